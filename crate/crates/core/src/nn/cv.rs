use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::{metrics, Metrics};
use super::train::{fit, split_validation, Dataset, EpochRecord, NetworkConfig};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, substream};

pub const FOLDS: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldReport {
    pub fold: usize,
    pub test_size: usize,
    pub metrics: Metrics,
    pub history: Vec<EpochRecord>,
    pub loss_trend_ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    /// Test fold of every row.
    pub assignment: Vec<usize>,
    pub folds: Vec<FoldReport>,
}

impl CvReport {
    pub fn mean_rmse(&self) -> f64 {
        self.folds.iter().map(|f| f.metrics.rmse).sum::<f64>() / self.folds.len() as f64
    }

    /// `None` if any fold has an undefined R².
    pub fn mean_r2(&self) -> Option<f64> {
        let r: Option<Vec<f64>> = self.folds.iter().map(|f| f.metrics.r2).collect();
        r.map(|r| r.iter().sum::<f64>() / r.len() as f64)
    }

    pub fn mean_meape(&self) -> Option<f64> {
        let r: Option<Vec<f64>> = self.folds.iter().map(|f| f.metrics.meape).collect();
        r.map(|r| r.iter().sum::<f64>() / r.len() as f64)
    }

    pub fn loss_trend_ok(&self) -> bool {
        self.folds.iter().all(|f| f.loss_trend_ok)
    }
}

/// Row indices of each of the five test folds (shuffled, near-equal sizes).
pub fn fold_indices(n: usize, seed: u64) -> Vec<Vec<usize>> {
    let mut p: Vec<usize> = (0..n).collect();
    p.shuffle(&mut substream(seed, "cv-folds", 0));
    (0..FOLDS)
        .map(|f| p[f * n / FOLDS..(f + 1) * n / FOLDS].to_vec())
        .collect()
}

/// Five-fold cross-validation. Each fold trains on the other 80%, itself split
/// 85/15 for validation, and is scored on its held-out 20% in target units.
pub fn kfold_cv(data: &Dataset, cfg: &NetworkConfig, seed: u64) -> Result<CvReport> {
    if data.len() < FOLDS {
        return Err(Error::input(format!("cross-validation needs at least {FOLDS} rows")));
    }
    let folds = fold_indices(data.len(), seed);
    let mut assignment = vec![0; data.len()];
    for (f, idx) in folds.iter().enumerate() {
        idx.iter().for_each(|&i| assignment[i] = f);
    }
    let reports = (0..FOLDS)
        .into_par_iter()
        .map(|f| -> Result<FoldReport> {
            let fold_seed = derive_seed(seed, "cv-fold", f as u64);
            let mut rest: Vec<usize> = (0..data.len()).filter(|&i| assignment[i] != f).collect();
            rest.sort_unstable();
            let (tr, va) = split_validation(&rest, cfg.validation_fraction, fold_seed);
            let model = fit(data, &tr, &va, cfg, fold_seed)?;
            let test = &folds[f];
            let y: Vec<f64> = test.iter().map(|&i| data.y[i]).collect();
            let yhat = test
                .iter()
                .map(|&i| model.predict(data.row(i)))
                .collect::<Result<Vec<_>>>()?;
            Ok(FoldReport {
                fold: f,
                test_size: test.len(),
                metrics: metrics(&y, &yhat)?,
                loss_trend_ok: model.loss_trend_ok(),
                history: model.history,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CvReport {
        assignment,
        folds: reports,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    #[test]
    fn folds_partition_rows() {
        let f = fold_indices(100, 3);
        assert!(f.iter().all(|x| x.len() == 20));
        let all: BTreeSet<usize> = f.iter().flatten().copied().collect();
        assert_eq!(all.len(), 100);
        let f = fold_indices(103, 3);
        assert_eq!(f.iter().map(|x| x.len()).sum::<usize>(), 103);
        assert!(f.iter().all(|x| x.len() == 20 || x.len() == 21));
    }

    #[test]
    fn constant_target_gives_zero_rmse_and_no_r2() {
        let mut d = Dataset::new(2);
        for i in 0..50 {
            d.push(&[i as f64, (i * 7 % 11) as f64], 4.0).unwrap();
        }
        let cfg = NetworkConfig {
            hidden: 6,
            epochs: 3,
            batch_size: 16,
            ..Default::default()
        };
        let r = kfold_cv(&d, &cfg, 1).unwrap();
        assert_eq!(r.folds.len(), 5);
        assert!(r.mean_rmse() < 1e-12);
        assert_eq!(r.mean_r2(), None);
        assert!(kfold_cv(
            &Dataset {
                n_features: 2,
                x: vec![0.0; 8],
                y: vec![0.0; 4]
            },
            &cfg,
            1
        )
        .is_err());
    }
}
