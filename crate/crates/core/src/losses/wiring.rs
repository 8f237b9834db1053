use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Copper resistivity, Ω·mm²/m.
pub const RHO_COPPER: f64 = 0.0171;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WiringSpec {
    /// Ω·mm²/m.
    pub rho: f64,
    /// Conductor length, m.
    pub length: f64,
    /// mm².
    pub cross_section: f64,
}

impl WiringSpec {
    pub fn copper(length: f64, cross_section: f64) -> Self {
        WiringSpec {
            rho: RHO_COPPER,
            length,
            cross_section,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.rho > 0.0 && self.length > 0.0 && self.cross_section > 0.0 {
            Ok(())
        } else {
            Err(Error::config(format!(
                "wiring spec must be strictly positive: {self:?}"
            )))
        }
    }

    pub fn resistance(&self) -> f64 {
        self.rho * self.length / self.cross_section
    }
}

/// Ohmic loss `I²·ρ·ℓ/A` in watts, and as a percentage of `p_ref`.
pub fn ohmic_loss(current: f64, spec: &WiringSpec, p_ref: f64) -> Result<(f64, f64)> {
    let watts = current * current * spec.resistance();
    if !(p_ref > 0.0) {
        return Err(Error::input(format!(
            "reference power must be > 0 for a percentage, got {p_ref}"
        )));
    }
    Ok((watts, 100.0 * watts / p_ref))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn direct_arithmetic() {
        let s = WiringSpec::copper(100.0, 10.0);
        assert!((s.resistance() - 0.171).abs() < 1e-15);
        let (w, pct) = ohmic_loss(10.0, &s, 1710.0).unwrap();
        assert!((w - 17.1).abs() < 1e-12);
        assert!((pct - 1.0).abs() < 1e-12);
        assert_eq!(ohmic_loss(0.0, &s, 1.0).unwrap().0, 0.0);
        assert!(ohmic_loss(1.0, &s, 0.0).is_err());
        assert!(WiringSpec::copper(0.0, 1.0).validate().is_err());
    }
}
