//! Feed-forward estimators of the plant's technical signals.
//!
//! One network per signal (`I_L`, `I_sc`, `V_oc`, cell and inverter efficiency)
//! maps ten min-max scaled weather and production features to the signal. Two
//! hidden layers of equal width (sigmoid, then leaky rectifier), He
//! initialisation, dropout, Adam on mean squared error, and a plateau learning
//! rate schedule. Evaluation uses five-fold cross-validation.

mod cv;
mod features;
mod metrics;
mod network;
mod normalize;
mod train;

pub use cv::{fold_indices, kfold_cv, CvReport, FoldReport, FOLDS};
pub use features::{build_dataset, features, is_productive, TargetSignal, FEATURE_NAMES, N_FEATURES};
pub use metrics::{absolute_percentage_error, metrics, Metrics};
pub use network::{Activation, Dense, Dropout, Gradients, Mlp, LEAKY_SLOPE};
pub use normalize::Normalizer;
pub use train::{
    fit, split_validation, train, Dataset, EpochRecord, NetworkConfig, PlateauScheduler, TrainedModel, MODEL_FORMAT,
    REFERENCE_ROWS,
};

/// Worst relative gap between analytic and central-difference gradients of the
/// batch MSE on a random `10 → hidden → hidden → 1` network.
pub fn gradient_check(hidden: usize, seed: u64) -> crate::Result<f64> {
    use rand::Rng as _;
    let mut rng = crate::rng::seeded(seed);
    let mut net = Mlp::new(N_FEATURES, hidden, seed)?;
    for l in &mut net.layers {
        l.b.iter_mut().for_each(|b| *b = rng.random_range(-0.5..0.5));
    }
    let xs: Vec<Vec<f64>> = (0..8)
        .map(|_| (0..N_FEATURES).map(|_| rng.random()).collect())
        .collect();
    let ys: Vec<f64> = (0..8).map(|_| rng.random()).collect();
    let refs: Vec<&[f64]> = xs.iter().map(|x| x.as_slice()).collect();
    let (_, g) = net.batch_gradient(&refs, &ys);
    let analytic: Vec<f64> =
        g.w.iter()
            .zip(&g.b)
            .flat_map(|(w, b)| w.iter().chain(b))
            .copied()
            .collect();
    let h = 1e-6;
    let mut worst: f64 = 0.0;
    for (k, &ga) in analytic.iter().enumerate() {
        let mut plus = net.clone();
        let mut minus = net.clone();
        *plus.parameters_mut().nth(k).expect("parameter index") += h;
        *minus.parameters_mut().nth(k).expect("parameter index") -= h;
        let fd = (plus.batch_gradient(&refs, &ys).0 - minus.batch_gradient(&refs, &ys).0) / (2.0 * h);
        worst = worst.max((ga - fd).abs() / ga.abs().max(fd.abs()).max(1e-6));
    }
    Ok(worst)
}
