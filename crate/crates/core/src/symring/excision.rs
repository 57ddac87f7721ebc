use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Radial cut-off χ(ρ): zero for ρ ≤ r0, one for ρ ≥ r1, a polynomial
/// smoothstep in between.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExcisionProfile {
    pub r0: f64,
    pub r1: f64,
    #[serde(default = "default_degree")]
    pub smoothness: u32,
}

fn default_degree() -> u32 {
    7
}

impl Default for ExcisionProfile {
    fn default() -> Self {
        Self { r0: 0.5, r1: 1.0, smoothness: 7 }
    }
}

impl ExcisionProfile {
    pub fn new(r0: f64, r1: f64) -> Result<Self> {
        let p = Self { r0, r1, smoothness: 7 };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r0 > 0.0 && self.r1 > self.r0 && self.r1.is_finite()) {
            return Err(Error::Invalid(format!(
                "excision radii must satisfy 0 < r0 < r1, got r0={} r1={}",
                self.r0, self.r1
            )));
        }
        if !matches!(self.smoothness, 1 | 3 | 5 | 7) {
            return Err(Error::Invalid(format!(
                "smoothstep degree must be 1, 3, 5 or 7, got {}",
                self.smoothness
            )));
        }
        Ok(())
    }

    pub fn chi(&self, rho: f64) -> f64 {
        if rho <= self.r0 {
            return 0.0;
        }
        if rho >= self.r1 {
            return 1.0;
        }
        smoothstep(self.smoothness, (rho - self.r0) / (self.r1 - self.r0))
    }

    /// Smoothed norm `[p] = (r0⁴ + |p|⁴)^{1/4}`.
    pub fn bracket(&self, rho: f64) -> f64 {
        (self.r0.powi(4) + rho.powi(4)).powf(0.25)
    }
}

/// Polynomial smoothstep of odd degree `d` (C^{(d-1)/2} at both ends).
pub fn smoothstep(d: u32, t: f64) -> f64 {
    let t = t.clamp(0.0, 1.0);
    match d {
        1 => t,
        3 => t * t * (3.0 - 2.0 * t),
        5 => t * t * t * (10.0 + t * (-15.0 + 6.0 * t)),
        _ => t.powi(4) * (35.0 + t * (-84.0 + t * (70.0 - 20.0 * t))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chi_limits_and_midpoint() {
        let p = ExcisionProfile::default();
        assert_eq!(p.chi(0.3), 0.0);
        assert_eq!(p.chi(1.2), 1.0);
        assert!((p.chi(0.75) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn chi_is_monotone() {
        let p = ExcisionProfile::default();
        let mut last = 0.0;
        for i in 0..=200 {
            let v = p.chi(0.4 + 0.004 * i as f64);
            assert!(v >= last && (0.0..=1.0).contains(&v));
            last = v;
        }
    }

    #[test]
    fn rejects_bad_radii() {
        assert!(ExcisionProfile::new(1.0, 0.5).is_err());
        assert!(ExcisionProfile::new(0.0, 0.5).is_err());
    }
}
