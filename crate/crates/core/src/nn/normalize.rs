use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-column min-max scaling to `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalizer {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl Normalizer {
    /// Fits on the given rows only.
    pub fn fit<'a>(rows: impl IntoIterator<Item = &'a [f64]>) -> Result<Self> {
        let mut it = rows.into_iter();
        let first = it
            .next()
            .ok_or_else(|| Error::input("cannot fit a normalizer on no rows"))?;
        let mut n = Normalizer {
            min: first.to_vec(),
            max: first.to_vec(),
        };
        for r in it {
            if r.len() != n.min.len() {
                return Err(Error::input("rows of unequal width"));
            }
            for (j, &v) in r.iter().enumerate() {
                n.min[j] = n.min[j].min(v);
                n.max[j] = n.max[j].max(v);
            }
        }
        if n.min.iter().chain(&n.max).any(|v| !v.is_finite()) {
            return Err(Error::input("non-finite value in normalizer fit"));
        }
        Ok(n)
    }

    pub fn width(&self) -> usize {
        self.min.len()
    }

    /// `(x − min)/(max − min)`; constant columns map to 0.
    pub fn transform_value(&self, j: usize, x: f64) -> f64 {
        let span = self.max[j] - self.min[j];
        if span > 0.0 {
            (x - self.min[j]) / span
        } else {
            0.0
        }
    }

    pub fn inverse_value(&self, j: usize, u: f64) -> f64 {
        self.min[j] + u * (self.max[j] - self.min[j])
    }

    pub fn transform(&self, x: &[f64]) -> Vec<f64> {
        x.iter().enumerate().map(|(j, &v)| self.transform_value(j, v)).collect()
    }

    pub fn inverse(&self, u: &[f64]) -> Vec<f64> {
        u.iter().enumerate().map(|(j, &v)| self.inverse_value(j, v)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn bounds_and_constant_columns() {
        let rows = [vec![1.0, 5.0, -2.0], vec![3.0, 5.0, 2.0], vec![2.0, 5.0, 0.0]];
        let n = Normalizer::fit(rows.iter().map(|r| r.as_slice())).unwrap();
        assert_eq!(n.transform(&rows[0]), vec![0.0, 0.0, 0.0]);
        assert_eq!(n.transform(&rows[1]), vec![1.0, 0.0, 1.0]);
        assert_eq!(n.transform(&rows[2]), vec![0.5, 0.0, 0.5]);
        assert!(Normalizer::fit(std::iter::empty()).is_err());
    }

    #[test]
    fn fitted_on_given_rows_only() {
        let train = [vec![0.0], vec![10.0]];
        let n = Normalizer::fit(train.iter().map(|r| r.as_slice())).unwrap();
        assert_eq!((n.min[0], n.max[0]), (0.0, 10.0));
        // held-out values outside the training range are not clipped
        assert_eq!(n.transform(&[20.0]), vec![2.0]);
    }

    proptest! {
        #[test]
        fn round_trip(lo in -1e3f64..1e3, span in 1e-3f64..1e4, u in 0.0f64..1.0) {
            let rows = [vec![lo], vec![lo + span]];
            let n = Normalizer::fit(rows.iter().map(|r| r.as_slice())).unwrap();
            let x = lo + u * span;
            let back = n.inverse(&n.transform(&[x]))[0];
            prop_assert!((back - x).abs() <= 1e-12 * x.abs().max(span).max(1.0));
        }
    }
}
