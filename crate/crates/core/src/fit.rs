//! Least-squares Laurent fits used to read off poles and residues.

use nalgebra::{DMatrix, DVector};

use crate::cmat::C64;
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct LaurentFit {
    pub center: C64,
    pub powers: Vec<i32>,
    pub coeffs: Vec<C64>,
    /// Largest absolute residual at the sample points.
    pub residual: f64,
}

impl LaurentFit {
    pub fn coeff(&self, power: i32) -> C64 {
        self.powers
            .iter()
            .position(|&p| p == power)
            .map_or(C64::new(0.0, 0.0), |i| self.coeffs[i])
    }

    pub fn eval(&self, z: C64) -> C64 {
        let w = z - self.center;
        self.powers.iter().zip(&self.coeffs).map(|(&p, c)| c * w.powi(p)).sum()
    }
}

/// Fit Σ_p c_p (z − center)^p through `samples` (z, value) by least squares.
pub fn laurent_fit(samples: &[(C64, C64)], center: C64, powers: &[i32]) -> Result<LaurentFit> {
    if samples.len() < powers.len() {
        return Err(Error::FitIllConditioned(format!(
            "{} samples for {} coefficients",
            samples.len(),
            powers.len()
        )));
    }
    let rows = samples.len();
    let cols = powers.len();
    let mut m = DMatrix::<C64>::zeros(rows, cols);
    let mut rhs = DVector::<C64>::zeros(rows);
    for (i, (z, v)) in samples.iter().enumerate() {
        let w = z - center;
        if w.norm() == 0.0 {
            return Err(Error::FitIllConditioned("sample at the expansion center".into()));
        }
        for (j, &p) in powers.iter().enumerate() {
            m[(i, j)] = w.powi(p);
        }
        rhs[i] = *v;
    }
    // column scaling keeps the conditioning estimate meaningful
    let scales: Vec<f64> = (0..cols).map(|j| m.column(j).norm().max(f64::MIN_POSITIVE)).collect();
    for (j, s) in scales.iter().enumerate() {
        m.column_mut(j).scale_mut(1.0 / s);
    }
    let svd = m.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if smin <= 1e-13 * smax {
        return Err(Error::FitIllConditioned(format!("condition number {:e}", smax / smin)));
    }
    let sol = svd
        .solve(&rhs, 1e-300)
        .map_err(|e| Error::FitIllConditioned(e.to_string()))?;
    let coeffs: Vec<C64> = sol.iter().zip(&scales).map(|(c, s)| c / s).collect();
    let fitted = &m * &sol;
    let residual = (0..rows).map(|i| (fitted[i] - rhs[i]).norm()).fold(0.0, f64::max);
    Ok(LaurentFit { center, powers: powers.to_vec(), coeffs, residual })
}

/// Points center ± h, center ± 2h.
pub fn symmetric_points(center: C64, h: f64) -> Vec<C64> {
    vec![center - 2.0 * h, center - h, center + h, center + 2.0 * h]
}

/// `count` points on the circle |z − center| = radius.
pub fn circle_points(center: C64, radius: f64, count: usize) -> Vec<C64> {
    (0..count)
        .map(|k| {
            let t = 2.0 * std::f64::consts::PI * (k as f64 + 0.5) / count as f64;
            center + C64::from_polar(radius, t)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_simple_pole() {
        let f = |z: C64| C64::new(-2.0, 0.0) / z + 3.0 + 0.5 * z;
        let pts = symmetric_points(C64::new(0.0, 0.0), 0.05);
        let samples: Vec<_> = pts.iter().map(|&z| (z, f(z))).collect();
        let fit = laurent_fit(&samples, C64::new(0.0, 0.0), &[-1, 0, 1]).unwrap();
        assert!((fit.coeff(-1) + 2.0).norm() < 1e-12);
        assert!((fit.coeff(0) - 3.0).norm() < 1e-12);
    }

    #[test]
    fn rejects_underdetermined() {
        let s = [(C64::new(1.0, 0.0), C64::new(1.0, 0.0))];
        assert!(laurent_fit(&s, C64::new(0.0, 0.0), &[-1, 0]).is_err());
    }
}
