use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::network::{Dropout, Gradients, Mlp};
use super::normalize::Normalizer;
use crate::error::{Error, Result};
use crate::rng::{derive_seed, substream};

/// Samples per gradient work item; fixed so that results do not depend on the
/// thread count.
const CHUNK: usize = 500;

pub const MODEL_FORMAT: &str = "pvtwin-mlp/1";
/// Size of the full-scale synthetic dataset the default batch size belongs to.
pub const REFERENCE_ROWS: usize = 2_039_040;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkConfig {
    /// Neurons in each of the two hidden layers.
    pub hidden: usize,
    pub dropout: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub lr_initial: f64,
    pub lr_factor: f64,
    /// Epochs without relative validation improvement before the LR drops.
    pub lr_patience: usize,
    /// Relative improvement that counts as progress.
    pub lr_threshold: f64,
    pub lr_reset_floor: f64,
    pub lr_reset_value: f64,
    pub validation_fraction: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        NetworkConfig {
            hidden: 12,
            dropout: 0.2,
            epochs: 50,
            batch_size: 5000,
            lr_initial: 0.1,
            lr_factor: 0.1,
            lr_patience: 5,
            lr_threshold: 1e-4,
            lr_reset_floor: 1e-7,
            lr_reset_value: 0.01,
            validation_fraction: 0.15,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

impl NetworkConfig {
    pub fn with_hidden(hidden: usize) -> Self {
        NetworkConfig {
            hidden,
            ..Default::default()
        }
    }

    /// Batch size that keeps the default number of optimiser steps per epoch on
    /// a dataset of `rows` rows instead of [`REFERENCE_ROWS`].
    pub fn scaled_batch(rows: usize) -> usize {
        let b = NetworkConfig::default().batch_size as f64 * rows as f64 / REFERENCE_ROWS as f64;
        (b.round() as usize).max(1)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.hidden > 0
            && (0.0..1.0).contains(&self.dropout)
            && self.epochs > 0
            && self.batch_size > 0
            && self.lr_initial > 0.0
            && self.lr_factor > 0.0
            && self.lr_factor < 1.0
            && (0.0..1.0).contains(&self.validation_fraction);
        if ok {
            Ok(())
        } else {
            Err(Error::config(format!("invalid network configuration: {self:?}")))
        }
    }
}

/// Row-major feature matrix with one target per row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub n_features: usize,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl Dataset {
    pub fn new(n_features: usize) -> Self {
        Dataset {
            n_features,
            x: Vec::new(),
            y: Vec::new(),
        }
    }

    pub fn push(&mut self, x: &[f64], y: f64) -> Result<()> {
        if x.len() != self.n_features {
            return Err(Error::input(format!(
                "row has {} features, expected {}",
                x.len(),
                self.n_features
            )));
        }
        self.x.extend_from_slice(x);
        self.y.push(y);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.x[i * self.n_features..(i + 1) * self.n_features]
    }
}

/// Reduce-on-plateau learning rate with a reset once the rate has decayed to
/// the floor.
#[derive(Debug, Clone, PartialEq)]
pub struct PlateauScheduler {
    pub lr: f64,
    best: f64,
    bad_epochs: usize,
    factor: f64,
    patience: usize,
    threshold: f64,
    floor: f64,
    reset: f64,
}

impl PlateauScheduler {
    pub fn new(cfg: &NetworkConfig) -> Self {
        PlateauScheduler {
            lr: cfg.lr_initial,
            best: f64::INFINITY,
            bad_epochs: 0,
            factor: cfg.lr_factor,
            patience: cfg.lr_patience,
            threshold: cfg.lr_threshold,
            floor: cfg.lr_reset_floor,
            reset: cfg.lr_reset_value,
        }
    }

    /// Feeds one epoch's validation loss; returns the rate for the next epoch.
    pub fn step(&mut self, loss: f64) -> f64 {
        if !self.best.is_finite() || loss < self.best - self.threshold * self.best.abs() {
            self.best = loss;
            self.bad_epochs = 0;
        } else {
            self.bad_epochs += 1;
            if self.bad_epochs >= self.patience {
                self.lr *= self.factor;
                self.bad_epochs = 0;
                if self.lr <= self.floor * (1.0 + 1e-6) {
                    self.lr = self.reset;
                }
            }
        }
        self.lr
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    /// Mean training MSE with dropout active, normalised target units.
    pub train_loss: f64,
    pub val_loss: f64,
    /// Rate used during this epoch.
    pub lr: f64,
}

/// A trained estimator with its scaling, serialised as JSON.
///
/// `network.layers[i].w` is `n_out × n_in` row-major. Inputs are scaled with
/// `x_norm` before the network; the output is mapped back through `y_norm`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub format: String,
    pub config: NetworkConfig,
    pub network: Mlp,
    pub x_norm: Normalizer,
    pub y_norm: Normalizer,
    pub history: Vec<EpochRecord>,
    /// Epoch whose weights were kept (lowest validation loss).
    pub best_epoch: usize,
}

impl TrainedModel {
    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        let u = self.network.forward(&self.x_norm.transform(x))?;
        Ok(self.y_norm.inverse_value(0, u))
    }

    pub fn predict_all(&self, data: &Dataset) -> Result<Vec<f64>> {
        (0..data.len()).map(|i| self.predict(data.row(i))).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let m: TrainedModel = serde_json::from_str(s)?;
        if m.format != MODEL_FORMAT {
            return Err(Error::input(format!("unsupported model format `{}`", m.format)));
        }
        m.network.validate()?;
        Ok(m)
    }

    /// Loss-trend check: mean training loss of the last five epochs does not
    /// exceed that of the first five.
    pub fn loss_trend_ok(&self) -> bool {
        let n = self.history.len();
        if n == 0 {
            return true;
        }
        let k = n.min(5);
        let head: f64 = self.history[..k].iter().map(|e| e.train_loss).sum::<f64>() / k as f64;
        let tail: f64 = self.history[n - k..].iter().map(|e| e.train_loss).sum::<f64>() / k as f64;
        tail <= head
    }
}

struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    fn step(&mut self, net: &mut Mlp, g: &Gradients, lr: f64, cfg: &NetworkConfig) {
        self.t += 1;
        let c1 = 1.0 - cfg.beta1.powi(self.t);
        let c2 = 1.0 - cfg.beta2.powi(self.t);
        let grads = g.w.iter().zip(&g.b).flat_map(|(w, b)| w.iter().chain(b));
        for (k, (p, &gk)) in net.parameters_mut().zip(grads).enumerate() {
            self.m[k] = cfg.beta1 * self.m[k] + (1.0 - cfg.beta1) * gk;
            self.v[k] = cfg.beta2 * self.v[k] + (1.0 - cfg.beta2) * gk * gk;
            *p -= lr * (self.m[k] / c1) / ((self.v[k] / c2).sqrt() + cfg.epsilon);
        }
    }
}

fn mse(net: &Mlp, xs: &[Vec<f64>], ys: &[f64]) -> Result<f64> {
    let mut s = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        let d = net.forward(x)? - y;
        s += d * d;
    }
    Ok(s / ys.len().max(1) as f64)
}

/// Trains on `train` rows, monitoring `val` rows. Scaling is fitted on the
/// training rows only.
pub fn fit(data: &Dataset, train: &[usize], val: &[usize], cfg: &NetworkConfig, seed: u64) -> Result<TrainedModel> {
    cfg.validate()?;
    if train.is_empty() {
        return Err(Error::input("no training rows"));
    }
    let x_norm = Normalizer::fit(train.iter().map(|&i| data.row(i)))?;
    let y_norm = Normalizer::fit(train.iter().map(|&i| std::slice::from_ref(&data.y[i])))?;
    let scale = |idx: &[usize]| -> (Vec<Vec<f64>>, Vec<f64>) {
        (
            idx.iter().map(|&i| x_norm.transform(data.row(i))).collect(),
            idx.iter().map(|&i| y_norm.transform_value(0, data.y[i])).collect(),
        )
    };
    let (tx, ty) = scale(train);
    let (vx, vy) = scale(val);

    let mut net = Mlp::new(data.n_features, cfg.hidden, derive_seed(seed, "nn-init", 0))?;
    let np = net.parameter_count();
    let mut adam = Adam {
        m: vec![0.0; np],
        v: vec![0.0; np],
        t: 0,
    };
    let mut sched = PlateauScheduler::new(cfg);
    let mut history = Vec::with_capacity(cfg.epochs);
    let mut best = (f64::INFINITY, net.clone(), 0);
    let mut order: Vec<usize> = (0..tx.len()).collect();

    for epoch in 0..cfg.epochs {
        let lr = sched.lr;
        order.sort_unstable();
        order.shuffle(&mut substream(seed, "nn-shuffle", epoch as u64));
        let mut loss_sum = 0.0;
        for (b, batch) in order.chunks(cfg.batch_size).enumerate() {
            let parts: Vec<(f64, Gradients)> = batch
                .par_chunks(CHUNK)
                .enumerate()
                .map(|(c, chunk)| {
                    let tag = ((epoch as u64) << 40) | ((b as u64) << 20) | c as u64;
                    let mut rng = substream(seed, "nn-dropout", tag);
                    let mut g = Gradients::zeros_like(&net);
                    let mut loss = 0.0;
                    for &i in chunk {
                        let mut d = Dropout {
                            rate: cfg.dropout,
                            rng: &mut rng,
                        };
                        let drop = (cfg.dropout > 0.0).then_some(&mut d);
                        let y = net.accumulate(&tx[i], ty[i], &mut g, drop);
                        loss += (y - ty[i]) * (y - ty[i]);
                    }
                    (loss, g)
                })
                .collect();
            let mut g = Gradients::zeros_like(&net);
            let mut batch_loss = 0.0;
            for (l, pg) in &parts {
                batch_loss += l;
                g.add(pg);
            }
            g.scale(1.0 / batch.len() as f64);
            loss_sum += batch_loss;
            adam.step(&mut net, &g, lr, cfg);
        }
        let train_loss = loss_sum / tx.len() as f64;
        let val_loss = if vx.is_empty() {
            train_loss
        } else {
            mse(&net, &vx, &vy)?
        };
        if !train_loss.is_finite() || !val_loss.is_finite() {
            return Err(Error::numerical(format!(
                "non-finite loss at epoch {epoch} (lr {lr}): train {train_loss}, validation {val_loss}"
            )));
        }
        history.push(EpochRecord {
            epoch,
            train_loss,
            val_loss,
            lr,
        });
        if val_loss < best.0 {
            best = (val_loss, net.clone(), epoch);
        }
        sched.step(val_loss);
    }
    Ok(TrainedModel {
        format: MODEL_FORMAT.into(),
        config: cfg.clone(),
        network: best.1,
        x_norm,
        y_norm,
        history,
        best_epoch: best.2,
    })
}

/// Shuffled `(train, validation)` split of `idx` with the configured fraction.
pub fn split_validation(idx: &[usize], fraction: f64, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut p = idx.to_vec();
    p.shuffle(&mut substream(seed, "nn-split", 0));
    let n_val = if p.len() > 1 {
        ((fraction * p.len() as f64).round() as usize).clamp(1, p.len() - 1)
    } else {
        0
    };
    let val = p.split_off(p.len() - n_val);
    (p, val)
}

/// 85/15 train/validation split, then [`fit`].
pub fn train(data: &Dataset, cfg: &NetworkConfig, seed: u64) -> Result<TrainedModel> {
    if data.len() < 2 {
        return Err(Error::input("training needs at least two rows"));
    }
    let all: Vec<usize> = (0..data.len()).collect();
    let (tr, va) = split_validation(&all, cfg.validation_fraction, seed);
    fit(data, &tr, &va, cfg, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use rand::Rng as _;

    fn linear(n: usize, seed: u64) -> Dataset {
        let mut rng = seeded(seed);
        let mut d = Dataset::new(10);
        for _ in 0..n {
            let x: Vec<f64> = (0..10).map(|_| rng.random()).collect();
            let y = x.iter().sum::<f64>() / 10.0;
            d.push(&x, y).unwrap();
        }
        d
    }

    #[test]
    fn scaled_batch_keeps_steps_per_epoch() {
        assert_eq!(NetworkConfig::scaled_batch(REFERENCE_ROWS), 5000);
        assert_eq!(NetworkConfig::scaled_batch(50_000), 123);
        assert_eq!(NetworkConfig::scaled_batch(10), 1);
    }

    #[test]
    fn plateau_rule() {
        let cfg = NetworkConfig::default();
        let mut s = PlateauScheduler::new(&cfg);
        assert_eq!(s.step(1.0), 0.1);
        // improvements smaller than 1e-4 relative do not count
        for _ in 0..4 {
            assert_eq!(s.step(0.99995), 0.1);
        }
        assert!((s.step(0.99995) - 0.01).abs() < 1e-15);
        assert!((s.step(0.5) - 0.01).abs() < 1e-15);
        // decay to the floor resets the rate
        let mut lrs = Vec::new();
        for _ in 0..25 {
            lrs.push(s.step(0.5));
        }
        assert!(lrs.iter().all(|&l| l > 1.5e-7));
        assert!(lrs.contains(&0.01) && lrs.iter().any(|&l| (l - 1e-6).abs() < 1e-18));
    }

    #[test]
    fn overfits_linear_target() {
        let d = linear(200, 1);
        let cfg = NetworkConfig {
            hidden: 12,
            dropout: 0.0,
            epochs: 400,
            batch_size: 32,
            lr_initial: 0.01,
            ..Default::default()
        };
        let m = train(&d, &cfg, 3).unwrap();
        let last = m.history.iter().map(|e| e.val_loss).fold(f64::INFINITY, f64::min);
        // normalised units; back in target units MSE scales by the squared range
        let span = m.y_norm.max[0] - m.y_norm.min[0];
        assert!(last * span * span < 1e-3, "{last}");
        assert!(m.loss_trend_ok());
    }

    #[test]
    fn deterministic_weights() {
        let d = linear(600, 2);
        let cfg = NetworkConfig {
            hidden: 6,
            epochs: 5,
            batch_size: 128,
            ..Default::default()
        };
        let a = train(&d, &cfg, 9).unwrap();
        let b = train(&d, &cfg, 9).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.network, train(&d, &cfg, 10).unwrap().network);
        let back = TrainedModel::from_json(&a.to_json().unwrap()).unwrap();
        let x = d.row(3);
        assert_eq!(back.predict(x).unwrap(), a.predict(x).unwrap());
    }

    #[test]
    fn scaling_comes_from_training_rows() {
        let mut d = linear(100, 4);
        // an extreme row placed in the validation split must not move the scaling
        let all: Vec<usize> = (0..d.len()).collect();
        let (tr, va) = split_validation(&all, 0.15, 1);
        let v = va[0];
        for j in 0..10 {
            d.x[v * 10 + j] = 1e6;
        }
        let cfg = NetworkConfig {
            epochs: 1,
            batch_size: 50,
            ..Default::default()
        };
        let m = fit(&d, &tr, &va, &cfg, 1).unwrap();
        assert!(m.x_norm.max.iter().all(|&x| x < 1.0));
        assert_eq!(tr.len() + va.len(), 100);
        assert_eq!(va.len(), 15);
    }

    #[test]
    fn divergence_is_reported() {
        let mut d = linear(50, 5);
        d.y[0] = f64::NAN;
        let cfg = NetworkConfig {
            epochs: 2,
            batch_size: 10,
            ..Default::default()
        };
        assert!(train(&d, &cfg, 1).is_err());
    }
}
