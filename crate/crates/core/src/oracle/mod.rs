//! Independent spectral ground truth in one dimension: Hermite-basis
//! matrices of op(a), their eigenvalues, traces and spectral sums.

pub mod hermite;
pub mod sums;

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::cmat::{eigenvalues as dense_eigenvalues, max_abs, CMat, C64};
use crate::error::{Error, Result};
use crate::spectra::{MeromorphicSample, Method};
use crate::symring::{ClassicalSymbol, ExactSymbol, SymbolTerm};

pub use hermite::{assemble_polynomial, d_matrix, hermite_functions, weyl_radial_diagonal, x_matrix};
pub use sums::{power_tail, riemann_zeta};

/// Fraction of the basis whose matrix entries and eigenvalues are trusted.
pub const TRUSTED_FRACTION: f64 = 0.8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantization {
    KohnNirenberg,
    /// Weyl quantization of a radial symbol; same trace and principal symbol
    /// as Kohn–Nirenberg, diagonal in the Hermite basis.
    WeylRadial,
}

#[derive(Debug, Clone)]
pub struct HermiteDiscretization {
    pub basis: usize,
    pub q: usize,
    /// (qN)×(qN), block (r, c) holds the (r, c) entry of the matrix symbol.
    pub matrix: CMat,
    pub quantization: Quantization,
    pub order: C64,
    pub source: String,
}

impl HermiteDiscretization {
    pub fn trusted(&self) -> usize {
        (TRUSTED_FRACTION * self.basis as f64).floor() as usize
    }

    /// Hermitian up to a relative tolerance.
    pub fn is_hermitian(&self, tol: f64) -> bool {
        let adj = self.matrix.adjoint();
        max_abs(&(&self.matrix - adj)) <= tol * max_abs(&self.matrix).max(1.0)
    }
}

fn polynomial_terms(a: &ClassicalSymbol) -> Option<Vec<SymbolTerm>> {
    if !a.complete {
        return None;
    }
    let mut out = Vec::new();
    for c in &a.components {
        if c.is_zero() {
            continue;
        }
        let ts = c.terms()?;
        if ts.iter().any(|t| !t.is_polynomial()) {
            return None;
        }
        out.extend(ts.iter().cloned());
    }
    Some(out)
}

/// Matrix of op(a) on the first `basis` Hermite functions.
pub fn discretize(a: &ClassicalSymbol, basis: usize) -> Result<HermiteDiscretization> {
    if a.n != 1 {
        return Err(Error::UnsupportedSymbol(format!("the Hermite oracle is one-dimensional, symbol has n = {}", a.n)));
    }
    if basis == 0 {
        return Err(Error::Invalid("basis size must be positive".into()));
    }
    if let Some(terms) = polynomial_terms(a) {
        let matrix = assemble_polynomial(&terms, a.q, basis)?;
        let source = a.exact.as_ref().map_or_else(|| "polynomial".to_string(), |e| e.label().to_string());
        return Ok(HermiteDiscretization {
            basis,
            q: a.q,
            matrix,
            quantization: Quantization::KohnNirenberg,
            order: a.order,
            source,
        });
    }
    match &a.exact {
        Some(e @ ExactSymbol::ShiftedQuadraticPower { .. }) => {
            let exact = e.clone();
            let f = |t: f64| exact.eval(&[t.sqrt(), 0.0])[(0, 0)];
            let diag = weyl_radial_diagonal(f, basis);
            if diag.iter().any(|v| !v.re.is_finite()) {
                return Err(Error::UnsupportedSymbol("radial profile could not be evaluated".into()));
            }
            let matrix = CMat::from_diagonal(&DVector::from_vec(diag));
            Ok(HermiteDiscretization {
                basis,
                q: 1,
                matrix,
                quantization: Quantization::WeylRadial,
                order: a.order,
                source: e.label().to_string(),
            })
        }
        _ => Err(Error::UnsupportedSymbol(
            "only polynomial symbols and registered radial profiles have Hermite matrices".into(),
        )),
    }
}

/// All eigenvalues, ordered by modulus then real part.
fn all_eigenvalues(d: &HermiteDiscretization) -> Vec<C64> {
    let mut ev: Vec<C64> = if d.is_hermitian(1e-10) {
        let h = (&d.matrix + d.matrix.adjoint()) * C64::new(0.5, 0.0);
        h.symmetric_eigenvalues().iter().map(|&v| C64::new(v, 0.0)).collect()
    } else {
        dense_eigenvalues(&d.matrix)
    };
    ev.sort_by(|a, b| a.norm().total_cmp(&b.norm()).then(a.re.total_cmp(&b.re)));
    ev
}

/// The `count` eigenvalues of smallest modulus.
pub fn eigenvalues(d: &HermiteDiscretization, count: usize) -> Result<Vec<C64>> {
    let trusted = (TRUSTED_FRACTION * (d.q * d.basis) as f64).floor() as usize;
    if count > trusted {
        return Err(Error::TruncationUntrusted { requested: count, trusted });
    }
    let mut ev = all_eigenvalues(d);
    ev.truncate(count);
    Ok(ev)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SumKind {
    /// Σ λ^{−z} with arg λ taken in (θ − 2π, θ).
    Zeta { z: C64, theta: f64 },
    /// Σ sgn(λ) |λ|^{−z} over a real spectrum.
    Eta { z: C64 },
}

/// Trusted moduli of the positive and negative real eigenvalues, ascending.
/// Each branch keeps |λ| ≤ 0.8 · (largest |λ| in that branch).
fn real_branches(ev: &[C64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let scale = ev.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if ev.iter().any(|v| v.im.abs() > 1e-8 * scale.max(1.0)) {
        return Err(Error::Invalid("spectral sums need a real spectrum".into()));
    }
    let zero = 1e-12 * scale.max(1.0);
    let trim = |mut v: Vec<f64>| {
        v.sort_by(f64::total_cmp);
        let cut = TRUSTED_FRACTION * v.last().copied().unwrap_or(0.0);
        v.retain(|x| *x <= cut);
        v
    };
    let pos = trim(ev.iter().filter(|v| v.re > zero).map(|v| v.re).collect());
    let neg = trim(ev.iter().filter(|v| v.re < -zero).map(|v| -v.re).collect());
    Ok((pos, neg))
}

/// Σ_{j≥1} μ_j^{−z} for ascending moduli μ_1..μ_J, with the tail j > J from
/// a Weyl-law model μ_j ≈ c j^γ + d fitted on the upper half.
pub fn branch_sum(moduli: &[f64], z: C64, gamma: f64) -> Result<(C64, f64)> {
    let count = moduli.len();
    let pw = |mu: f64| (-z * mu.ln()).exp();
    let head: C64 = moduli.iter().map(|&m| pw(m)).sum();
    if count < 8 {
        return Err(Error::Invalid(format!("{count} eigenvalues are too few for a tail model")));
    }
    let start = count / 2;
    let rows = count - start;
    let mut m = DMatrix::<f64>::zeros(rows, 2);
    let mut rhs = DVector::<f64>::zeros(rows);
    for (i, j) in (start..count).enumerate() {
        m[(i, 0)] = ((j + 1) as f64).powf(gamma);
        m[(i, 1)] = 1.0;
        rhs[i] = moduli[j];
    }
    let sol = m.clone().svd(true, true).solve(&rhs, 1e-14).map_err(|e| Error::FitIllConditioned(e.to_string()))?;
    let (c, d) = (sol[0], sol[1]);
    let residual = (&m * &sol - &rhs).amax();
    if c <= 0.0 {
        return Err(Error::FitIllConditioned(format!("Weyl-law fit gave c = {c}")));
    }
    let first = count + 1;
    let p0 = gamma * z;
    if (p0 - 1.0).norm() < 1e-12 || p0.re < -5.0 {
        return Err(Error::Divergent(z));
    }
    // (c j^γ + d)^{−z} = c^{−z} Σ_k binom(−z, k) (d/c)^k j^{−γ(z+k)}
    let cz = (-z * c.ln()).exp();
    let ratio = d / c;
    let mut coef = C64::new(1.0, 0.0);
    let mut tail = C64::new(0.0, 0.0);
    let mut err = 0.0;
    for k in 0..5 {
        let p = gamma * (z + k as f64);
        let (s, e) = power_tail(p, first);
        let term = cz * coef * s;
        if k < 4 {
            tail += term;
            err += cz.norm() * coef.norm() * e;
        } else {
            err += term.norm();
        }
        coef *= (-z - k as f64) / (k + 1) as f64 * ratio;
    }
    // sensitivity of the tail to the fit residual
    let (dt, _) = power_tail(gamma * (z + 1.0), first);
    err += (z * residual * dt).norm() * (-(z.re + 1.0) * c.ln()).exp();
    Ok((head + tail, err))
}

/// Direct spectral sum over trusted eigenvalues plus a Weyl-law tail.
pub fn spectral_sum(d: &HermiteDiscretization, kind: SumKind) -> Result<MeromorphicSample> {
    if d.order.re <= 0.0 || d.order.im != 0.0 {
        return Err(Error::Invalid(format!("spectral sums need a real positive order, got {}", d.order)));
    }
    let gamma = d.order.re / 2.0;
    let ev = all_eigenvalues(d);
    let (pos, neg) = real_branches(&ev)?;
    let sum_of = |v: &[f64], z: C64| -> Result<(C64, f64)> {
        if v.is_empty() {
            Ok((C64::new(0.0, 0.0), 0.0))
        } else {
            branch_sum(v, z, gamma)
        }
    };
    let (z, value, unc) = match kind {
        SumKind::Zeta { z, theta } => {
            let (sp, ep) = sum_of(&pos, z)?;
            let (sn, en) = sum_of(&neg, z)?;
            // arg of a negative number inside (θ − 2π, θ)
            let arg = if theta > PI { PI } else { -PI };
            let phase = (C64::new(0.0, -arg) * z).exp();
            (z, sp + phase * sn, ep + en)
        }
        SumKind::Eta { z } => {
            let (sp, ep) = sum_of(&pos, z)?;
            let (sn, en) = sum_of(&neg, z)?;
            (z, sp - sn, ep + en)
        }
    };
    Ok(MeromorphicSample { z, value, truncation_uncertainty: unc, method: Method::Oracle })
}

/// Matrix trace over the trusted block plus a fitted tail, with uncertainty.
pub fn trace(d: &HermiteDiscretization) -> Result<(C64, f64)> {
    if d.order.re >= -2.0 {
        return Err(Error::NotTraceClass(d.order));
    }
    let p = -d.order.re / 2.0;
    let k_max = d.trusted();
    let mut value = C64::new(0.0, 0.0);
    let mut unc = 0.0;
    for r in 0..d.q {
        let diag: Vec<C64> = (0..d.basis).map(|k| d.matrix[(r * d.basis + k, r * d.basis + k)]).collect();
        value += diag[..k_max].iter().sum::<C64>();
        let start = k_max / 2;
        let rows = k_max - start;
        let mut m = DMatrix::<C64>::zeros(rows, 2);
        let mut rhs = DVector::<C64>::zeros(rows);
        for (i, k) in (start..k_max).enumerate() {
            let kk = (k + 1) as f64;
            m[(i, 0)] = C64::new(kk.powf(-p), 0.0);
            m[(i, 1)] = C64::new(kk.powf(-p - 1.0), 0.0);
            rhs[i] = diag[k];
        }
        let sol = m.clone().svd(true, true).solve(&rhs, 1e-300).map_err(|e| Error::FitIllConditioned(e.to_string()))?;
        let residual = (&m * &sol - &rhs).iter().map(|v| v.norm()).fold(0.0, f64::max);
        let (t0, e0) = power_tail(C64::new(p, 0.0), k_max + 1);
        let (t1, e1) = power_tail(C64::new(p + 1.0, 0.0), k_max + 1);
        value += sol[0] * t0 + sol[1] * t1;
        let relative = residual / diag[k_max - 1].norm().max(f64::MIN_POSITIVE);
        unc += relative * (sol[0] * t0).norm() + sol[0].norm() * e0 + sol[1].norm() * e1;
    }
    Ok((value, unc))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cmat::re;

    #[test]
    fn oscillator_eigenvalues() {
        let d = discretize(&ClassicalSymbol::harmonic_oscillator(1), 40).unwrap();
        let ev = eigenvalues(&d, 20).unwrap();
        for (j, v) in ev.iter().enumerate() {
            assert!((v - re((j + 1) as f64)).norm() < 1e-10);
        }
        assert!(matches!(eigenvalues(&d, 33), Err(Error::TruncationUntrusted { .. })));
    }

    #[test]
    fn oscillator_zeta_two() {
        let d = discretize(&ClassicalSymbol::harmonic_oscillator(1), 100).unwrap();
        let s = spectral_sum(&d, SumKind::Zeta { z: re(2.0), theta: PI / 2.0 }).unwrap();
        assert!((s.value.re - PI * PI / 6.0).abs() < 1e-12, "{}", s.value);
    }
}
