//! Principal branch of the Lambert W function for non-negative arguments.
//!
//! The single-diode solution needs `W(x)` for `x` far beyond `f64` range, so the
//! main entry point takes `ln x` and never forms `x` itself.

const MAX_ITER: usize = 64;

/// `W0(x)` for `x >= 0` by Halley iteration on `w·e^w − x`.
pub fn lambert_w0(x: f64) -> f64 {
    if x.is_nan() || x < 0.0 {
        return f64::NAN;
    }
    if x == 0.0 {
        return 0.0;
    }
    if x.is_infinite() {
        return f64::INFINITY;
    }
    if x > 1e2 {
        return lambert_w0_exp(x.ln());
    }
    let mut w = if x < 1.0 { x / (1.0 + x) } else { x.ln_1p() * 0.8 };
    for _ in 0..MAX_ITER {
        let ew = w.exp();
        let f = w * ew - x;
        let wp1 = w + 1.0;
        let denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
        let step = f / denom;
        w -= step;
        if step.abs() <= 4.0 * f64::EPSILON * w.abs().max(f64::MIN_POSITIVE) {
            break;
        }
    }
    w
}

/// `W0(e^log_x)`, valid for any finite `log_x`.
///
/// For large arguments iterates on `w + ln w = log_x`, which stays in range when
/// `e^log_x` overflows.
pub fn lambert_w0_exp(log_x: f64) -> f64 {
    if log_x.is_nan() {
        return f64::NAN;
    }
    if log_x == f64::INFINITY {
        return f64::INFINITY;
    }
    if log_x < 4.0 {
        return lambert_w0(log_x.exp());
    }
    // asymptotic start, then Halley on f(w) = w + ln w − L
    let mut w = log_x - log_x.ln() + log_x.ln() / log_x;
    for _ in 0..MAX_ITER {
        let f = w + w.ln() - log_x;
        let f1 = 1.0 + 1.0 / w;
        let f2 = -1.0 / (w * w);
        let step = f / (f1 - 0.5 * f * f2 / f1);
        w -= step;
        if step.abs() <= 4.0 * f64::EPSILON * w {
            break;
        }
    }
    w
}
