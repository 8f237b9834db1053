use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::{mean, median};

/// Agreement between measured and modelled series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub n: usize,
    pub rmse: f64,
    /// `None` when the measured series is constant.
    pub r2: Option<f64>,
    /// Mean of the APE series, percent; `None` when every measured value is 0.
    pub mape: Option<f64>,
    /// Median of the APE series, percent.
    pub meape: Option<f64>,
    /// `|y − ŷ|/|y|·100` for every non-zero measurement.
    pub ape: Vec<f64>,
    /// Samples left out of the APE series because `y = 0`.
    pub ape_excluded: usize,
}

pub fn absolute_percentage_error(measured: f64, modelled: f64) -> Option<f64> {
    (measured != 0.0).then(|| 100.0 * (measured - modelled).abs() / measured.abs())
}

pub fn metrics(measured: &[f64], modelled: &[f64]) -> Result<Metrics> {
    if measured.is_empty() {
        return Err(Error::input("metrics of an empty series"));
    }
    if measured.len() != modelled.len() {
        return Err(Error::input(format!(
            "series lengths differ: {} vs {}",
            measured.len(),
            modelled.len()
        )));
    }
    let n = measured.len();
    let sse: f64 = measured.iter().zip(modelled).map(|(y, m)| (y - m) * (y - m)).sum();
    let ybar = mean(measured);
    let sst: f64 = measured.iter().map(|y| (y - ybar) * (y - ybar)).sum();
    let ape: Vec<f64> = measured
        .iter()
        .zip(modelled)
        .filter_map(|(&y, &m)| absolute_percentage_error(y, m))
        .collect();
    Ok(Metrics {
        n,
        rmse: (sse / n as f64).sqrt(),
        r2: (sst > 0.0).then(|| 1.0 - sse / sst),
        mape: (!ape.is_empty()).then(|| mean(&ape)),
        meape: (!ape.is_empty()).then(|| median(&ape)),
        ape_excluded: n - ape.len(),
        ape,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_fit() {
        let y = [1.0, 2.0, 4.0];
        let m = metrics(&y, &y).unwrap();
        assert_eq!((m.rmse, m.r2, m.meape), (0.0, Some(1.0), Some(0.0)));
    }

    #[test]
    fn ape_arithmetic_and_zero_exclusion() {
        assert_eq!(absolute_percentage_error(100.0, 90.0), Some(10.0));
        let m = metrics(&[100.0, 0.0], &[90.0, 1.0]).unwrap();
        assert_eq!(m.ape, vec![10.0]);
        assert_eq!(m.ape_excluded, 1);
    }

    #[test]
    fn outlier_moves_mape_not_meape() {
        let y: Vec<f64> = (1..=11).map(|i| i as f64 * 10.0).collect();
        let mut m: Vec<f64> = y.iter().map(|v| v * 1.02).collect();
        let base = metrics(&y, &m).unwrap();
        m[5] = y[5] * 11.0;
        let out = metrics(&y, &m).unwrap();
        let brute = |v: &[f64]| {
            let mut s = v.to_vec();
            s.sort_by(f64::total_cmp);
            s[s.len() / 2]
        };
        assert!((out.meape.unwrap() - brute(&out.ape)).abs() < 1e-12);
        assert!((out.meape.unwrap() - base.meape.unwrap()).abs() < 1e-9);
        assert!((out.mape.unwrap() - out.ape.iter().sum::<f64>() / 11.0).abs() < 1e-12);
        assert!(out.mape.unwrap() > 10.0 * base.mape.unwrap());
    }

    #[test]
    fn constant_target_flags_r2() {
        let m = metrics(&[3.0; 4], &[3.0; 4]).unwrap();
        assert_eq!((m.rmse, m.r2), (0.0, None));
    }

    #[test]
    fn bad_inputs() {
        assert!(metrics(&[], &[]).is_err());
        assert!(metrics(&[1.0], &[1.0, 2.0]).is_err());
    }
}
