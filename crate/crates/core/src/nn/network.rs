use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{seeded, Rng};

pub const LEAKY_SLOPE: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Activation {
    Sigmoid,
    LeakyRelu,
    Identity,
}

impl Activation {
    pub fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Sigmoid => 1.0 / (1.0 + (-z).exp()),
            Activation::LeakyRelu => {
                if z > 0.0 {
                    z
                } else {
                    LEAKY_SLOPE * z
                }
            }
            Activation::Identity => z,
        }
    }

    /// Derivative expressed through the pre-activation `z` and output `a`.
    fn derivative(self, z: f64, a: f64) -> f64 {
        match self {
            Activation::Sigmoid => a * (1.0 - a),
            Activation::LeakyRelu => {
                if z > 0.0 {
                    1.0
                } else {
                    LEAKY_SLOPE
                }
            }
            Activation::Identity => 1.0,
        }
    }
}

/// Fully connected layer; `w` is `n_out × n_in`, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dense {
    pub n_in: usize,
    pub n_out: usize,
    pub w: Vec<f64>,
    pub b: Vec<f64>,
    pub activation: Activation,
}

impl Dense {
    pub fn zeros(n_in: usize, n_out: usize, activation: Activation) -> Self {
        Dense {
            n_in,
            n_out,
            w: vec![0.0; n_in * n_out],
            b: vec![0.0; n_out],
            activation,
        }
    }

    fn affine(&self, x: &[f64], z: &mut [f64]) {
        for (o, zo) in z.iter_mut().enumerate() {
            let row = &self.w[o * self.n_in..(o + 1) * self.n_in];
            *zo = self.b[o] + row.iter().zip(x).map(|(w, x)| w * x).sum::<f64>();
        }
    }
}

/// Feed-forward regression network `n_in → n → n → 1`:
/// sigmoid after the first hidden layer, leaky rectifier after the second,
/// linear output. Dropout, when training, follows each hidden activation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    pub layers: Vec<Dense>,
}

/// Gradients with the network's shape.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub w: Vec<Vec<f64>>,
    pub b: Vec<Vec<f64>>,
}

impl Gradients {
    pub fn zeros_like(net: &Mlp) -> Self {
        Gradients {
            w: net.layers.iter().map(|l| vec![0.0; l.w.len()]).collect(),
            b: net.layers.iter().map(|l| vec![0.0; l.b.len()]).collect(),
        }
    }

    pub fn add(&mut self, other: &Gradients) {
        for (a, b) in self.w.iter_mut().zip(&other.w).chain(self.b.iter_mut().zip(&other.b)) {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
        }
    }

    pub fn scale(&mut self, k: f64) {
        self.w
            .iter_mut()
            .chain(self.b.iter_mut())
            .flatten()
            .for_each(|x| *x *= k);
    }
}

/// Per-sample dropout: keep probability and a generator for the masks.
pub struct Dropout<'a> {
    pub rate: f64,
    pub rng: &'a mut Rng,
}

impl Mlp {
    /// He-initialised network (`w ~ N(0, 2/fan_in)`, zero biases).
    pub fn new(n_in: usize, hidden: usize, seed: u64) -> Result<Self> {
        if n_in == 0 || hidden == 0 {
            return Err(Error::config("network dimensions must be positive"));
        }
        let mut net = Mlp::zeros(n_in, hidden);
        let mut rng = seeded(seed);
        for l in &mut net.layers {
            let normal = Normal::new(0.0, (2.0 / l.n_in as f64).sqrt()).expect("positive variance");
            l.w.iter_mut().for_each(|w| *w = normal.sample(&mut rng));
        }
        Ok(net)
    }

    pub fn zeros(n_in: usize, hidden: usize) -> Self {
        Mlp {
            layers: vec![
                Dense::zeros(n_in, hidden, Activation::Sigmoid),
                Dense::zeros(hidden, hidden, Activation::LeakyRelu),
                Dense::zeros(hidden, 1, Activation::Identity),
            ],
        }
    }

    pub fn n_inputs(&self) -> usize {
        self.layers[0].n_in
    }

    pub fn validate(&self) -> Result<()> {
        let mut n = self.n_inputs();
        for (i, l) in self.layers.iter().enumerate() {
            if l.n_in != n || l.w.len() != l.n_in * l.n_out || l.b.len() != l.n_out {
                return Err(Error::config(format!("layer {i} has inconsistent dimensions")));
            }
            n = l.n_out;
        }
        if n != 1 {
            return Err(Error::config("network must have a single output"));
        }
        Ok(())
    }

    /// Inference (no dropout).
    pub fn forward(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.n_inputs() {
            return Err(Error::config(format!(
                "input has {} features, network expects {}",
                x.len(),
                self.n_inputs()
            )));
        }
        let mut a = x.to_vec();
        for l in &self.layers {
            let mut z = vec![0.0; l.n_out];
            l.affine(&a, &mut z);
            a = z.into_iter().map(|z| l.activation.apply(z)).collect();
        }
        Ok(a[0])
    }

    /// Adds `∂(y − t)²/∂θ` for one sample into `g` and returns the prediction.
    pub fn accumulate(&self, x: &[f64], target: f64, g: &mut Gradients, mut dropout: Option<&mut Dropout<'_>>) -> f64 {
        use rand::Rng as _;
        let nl = self.layers.len();
        let mut acts: Vec<Vec<f64>> = Vec::with_capacity(nl + 1);
        let mut pre: Vec<Vec<f64>> = Vec::with_capacity(nl);
        let mut masks: Vec<Vec<f64>> = Vec::with_capacity(nl);
        acts.push(x.to_vec());
        for (i, l) in self.layers.iter().enumerate() {
            let mut z = vec![0.0; l.n_out];
            l.affine(&acts[i], &mut z);
            let mut a: Vec<f64> = z.iter().map(|&z| l.activation.apply(z)).collect();
            let mut mask = vec![1.0; l.n_out];
            if i + 1 < nl {
                if let Some(d) = dropout.as_deref_mut() {
                    let keep = 1.0 - d.rate;
                    for (m, a) in mask.iter_mut().zip(a.iter_mut()) {
                        *m = if d.rng.random::<f64>() < keep { 1.0 / keep } else { 0.0 };
                        *a *= *m;
                    }
                }
            }
            pre.push(z);
            masks.push(mask);
            acts.push(a);
        }
        let y = acts[nl][0];
        let mut delta = vec![2.0 * (y - target)];
        for i in (0..nl).rev() {
            let l = &self.layers[i];
            // delta holds ∂L/∂a_i (post-dropout); convert to ∂L/∂z_i
            let dz: Vec<f64> = (0..l.n_out)
                .map(|o| {
                    let m = masks[i][o];
                    let a_raw = if m > 0.0 {
                        acts[i + 1][o] / m
                    } else {
                        l.activation.apply(pre[i][o])
                    };
                    delta[o] * m * l.activation.derivative(pre[i][o], a_raw)
                })
                .collect();
            let input = &acts[i];
            for o in 0..l.n_out {
                g.b[i][o] += dz[o];
                let row = &mut g.w[i][o * l.n_in..(o + 1) * l.n_in];
                row.iter_mut().zip(input).for_each(|(gw, a)| *gw += dz[o] * a);
            }
            if i > 0 {
                delta = (0..l.n_in)
                    .map(|j| (0..l.n_out).map(|o| l.w[o * l.n_in + j] * dz[o]).sum())
                    .collect();
            }
        }
        y
    }

    /// Mean squared error and its gradient over a batch.
    pub fn batch_gradient(&self, xs: &[&[f64]], ys: &[f64]) -> (f64, Gradients) {
        let mut g = Gradients::zeros_like(self);
        let mut loss = 0.0;
        for (x, &t) in xs.iter().zip(ys) {
            let y = self.accumulate(x, t, &mut g, None);
            loss += (y - t) * (y - t);
        }
        let n = ys.len().max(1) as f64;
        g.scale(1.0 / n);
        (loss / n, g)
    }

    pub fn parameters_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.layers
            .iter_mut()
            .flat_map(|l| l.w.iter_mut().chain(l.b.iter_mut()))
    }

    pub fn parameter_count(&self) -> usize {
        self.layers.iter().map(|l| l.w.len() + l.b.len()).sum()
    }
}
