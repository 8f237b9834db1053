use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::{median, median_sorted, sorted_copy};

/// Two-sided 95% standard normal quantile.
const Z_975: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheilSen {
    pub slope: f64,
    /// `median(y) − slope·median(x)`.
    pub intercept: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl TheilSen {
    pub fn at(&self, x: f64) -> f64 {
        self.intercept + self.slope * x
    }
}

/// Sizes of groups of tied values.
fn tie_groups(v: &[f64]) -> Vec<usize> {
    let s = sorted_copy(v);
    let mut out = Vec::new();
    let mut run = 1;
    for w in s.windows(2) {
        if w[0] == w[1] {
            run += 1;
        } else {
            if run > 1 {
                out.push(run);
            }
            run = 1;
        }
    }
    if run > 1 {
        out.push(run);
    }
    out
}

/// Median of pairwise slopes with the rank-based 95% confidence interval
/// (Sen 1968), tie-corrected.
pub fn theil_sen(x: &[f64], y: &[f64]) -> Result<TheilSen> {
    if x.len() != y.len() {
        return Err(Error::input("theil_sen: x and y lengths differ"));
    }
    let n = x.len();
    let mut slopes = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for i in 0..n {
        for j in 0..n {
            if x[j] > x[i] {
                slopes.push((y[j] - y[i]) / (x[j] - x[i]));
            }
        }
    }
    if slopes.is_empty() {
        return Err(Error::input("theil_sen needs at least two points with distinct x"));
    }
    slopes.sort_by(f64::total_cmp);
    let slope = median_sorted(&slopes);
    let intercept = median(y) - slope * median(x);

    let nf = n as f64;
    let tie_term = |k: usize| {
        let k = k as f64;
        k * (k - 1.0) * (2.0 * k + 5.0)
    };
    let ties: f64 = tie_groups(x).into_iter().chain(tie_groups(y)).map(tie_term).sum();
    let sigma = ((nf * (nf - 1.0) * (2.0 * nf + 5.0) - ties) / 18.0).max(0.0).sqrt();
    let nt = slopes.len() as f64;
    let last = slopes.len() - 1;
    let hi = (((nt + Z_975 * sigma) / 2.0).round_ties_even() as i64).clamp(0, last as i64) as usize;
    let lo = ((((nt - Z_975 * sigma) / 2.0).round_ties_even() as i64) - 1).clamp(0, last as i64) as usize;
    Ok(TheilSen {
        slope,
        intercept,
        ci_low: slopes[lo],
        ci_high: slopes[hi],
    })
}
