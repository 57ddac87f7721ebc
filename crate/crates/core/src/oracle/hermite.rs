//! Hermite-function basis: ladder matrices, Kohn–Nirenberg assembly of
//! polynomial symbols, and Weyl diagonals of radial symbols.

use crate::cmat::{CMat, C64};
use crate::error::{Error, Result};
use crate::quadrature::GaussLegendre;
use crate::symring::SymbolTerm;

/// Matrix of multiplication by x on the first `size` Hermite functions.
pub fn x_matrix(size: usize) -> CMat {
    let mut m = CMat::zeros(size, size);
    for k in 0..size.saturating_sub(1) {
        let v = ((k + 1) as f64 / 2.0).sqrt();
        m[(k, k + 1)] = C64::new(v, 0.0);
        m[(k + 1, k)] = C64::new(v, 0.0);
    }
    m
}

/// Matrix of D = −i d/dx on the first `size` Hermite functions.
pub fn d_matrix(size: usize) -> CMat {
    let mut m = CMat::zeros(size, size);
    for k in 0..size.saturating_sub(1) {
        let v = ((k + 1) as f64 / 2.0).sqrt();
        m[(k, k + 1)] = C64::new(0.0, -v);
        m[(k + 1, k)] = C64::new(0.0, v);
    }
    m
}

/// Powers `base^0 ..= base^max` of a matrix.
fn powers(base: &CMat, max: usize) -> Vec<CMat> {
    let mut out = vec![CMat::identity(base.nrows(), base.ncols())];
    for k in 1..=max {
        let next = &out[k - 1] * base;
        out.push(next);
    }
    out
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Expand a polynomial term in n = 1 into (coefficient, x power, ξ power).
fn monomials(t: &SymbolTerm) -> Vec<(f64, u32, u32)> {
    let s = t.s_exp.re as u32;
    (0..=s)
        .map(|i| (binomial(s, i), t.beta[0] + 2 * i, t.alpha[0] + 2 * (s - i)))
        .collect()
}

/// Kohn–Nirenberg matrix (x-factors left of D-factors) of a sum of
/// polynomial terms on the first `size` Hermite functions. Built on a padded
/// basis so that the returned block is exact.
pub fn assemble_polynomial(terms: &[SymbolTerm], q: usize, size: usize) -> Result<CMat> {
    let mut max_deg = 0u32;
    for t in terms {
        if t.n() != 1 || !t.is_polynomial() {
            return Err(Error::UnsupportedSymbol("Kohn–Nirenberg assembly needs polynomial terms in n = 1".into()));
        }
        max_deg = max_deg.max(t.x_degree().max(t.xi_degree()));
    }
    let padded = size + max_deg as usize + 1;
    let xp = powers(&x_matrix(padded), max_deg as usize);
    let dp = powers(&d_matrix(padded), max_deg as usize);
    let mut out = CMat::zeros(q * size, q * size);
    for t in terms {
        let mut scalar_op = CMat::zeros(padded, padded);
        for (c, bx, ax) in monomials(t) {
            let prod = &xp[bx as usize] * &dp[ax as usize];
            scalar_op += prod * C64::new(c, 0.0);
        }
        for r in 0..q {
            for col in 0..q {
                let c = t.coeff[(r, col)];
                if c == C64::new(0.0, 0.0) {
                    continue;
                }
                let mut block = out.view_mut((r * size, col * size), (size, size));
                block += scalar_op.view((0, 0), (size, size)) * c;
            }
        }
    }
    Ok(out)
}

/// Values h_0(x), …, h_{count−1}(x) of the L²-normalized Hermite functions,
/// by the three-term recurrence with running rescaling.
pub fn hermite_functions(x: f64, count: usize) -> Vec<f64> {
    let mut out = vec![0.0; count];
    if count == 0 {
        return out;
    }
    // carry log-scale separately so that large |x| and k do not overflow
    let mut log_scale = -0.5 * x * x - 0.25 * std::f64::consts::PI.ln();
    let mut prev = 0.0;
    let mut cur = 1.0;
    let mut raw = Vec::with_capacity(count);
    let mut scales = Vec::with_capacity(count);
    for k in 0..count {
        raw.push(cur);
        scales.push(log_scale);
        let next = (2.0 / (k + 1) as f64).sqrt() * x * cur - (k as f64 / (k + 1) as f64).sqrt() * prev;
        prev = cur;
        cur = next;
        if cur.abs() > 1e100 {
            prev *= 1e-100;
            cur *= 1e-100;
            log_scale += 100.0 * std::f64::consts::LN_10;
        }
    }
    for k in 0..count {
        out[k] = raw[k] * scales[k].exp();
    }
    out
}

/// Diagonal ⟨h_k, op^W(f(ρ²)) h_k⟩ for k < count, computed as
/// (−1)^k ∫_0^∞ f(t) e^{−t} L_k(2t) dt. Weyl and Kohn–Nirenberg
/// quantizations share the same trace.
pub fn weyl_radial_diagonal<F: Fn(f64) -> C64>(f: F, count: usize) -> Vec<C64> {
    // substitute t = u², oscillations are roughly uniform in u
    let u_max = (4.0 * count as f64 + 60.0).sqrt() + 8.0;
    let panels = (u_max * (8.0 * count as f64 + 4.0).sqrt() / 4.0).ceil().max(8.0) as usize;
    let gl = GaussLegendre::cached(16);
    let mut acc = vec![C64::new(0.0, 0.0); count];
    let h = u_max / panels as f64;
    let mut lag = vec![0.0; count];
    for p in 0..panels {
        for (u, w) in gl.on_interval(p as f64 * h, (p + 1) as f64 * h) {
            let t = u * u;
            let weight = f(t) * (w * 2.0 * u);
            laguerre_functions(2.0 * t, &mut lag);
            for (k, l) in lag.iter().enumerate() {
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                acc[k] += weight * (sign * l);
            }
        }
    }
    acc
}

/// e^{−x/2} L_k(x) for k < out.len(), with running rescaling.
fn laguerre_functions(x: f64, out: &mut [f64]) {
    let mut log_scale = -0.5 * x;
    let mut prev = 0.0;
    let mut cur = 1.0;
    for k in 0..out.len() {
        out[k] = if log_scale < -700.0 { 0.0 } else { cur * log_scale.exp() };
        let next = ((2 * k + 1) as f64 - x) * cur / (k + 1) as f64 - k as f64 * prev / (k + 1) as f64;
        prev = cur;
        cur = next;
        if cur.abs() > 1e100 {
            prev *= 1e-100;
            cur *= 1e-100;
            log_scale += 100.0 * std::f64::consts::LN_10;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cmat::{identity, max_abs, re, scalar};

    #[test]
    fn ladder_elements() {
        let x = x_matrix(4);
        assert!((x[(0, 1)].re - 0.5f64.sqrt()).abs() < 1e-15);
        let x = x_matrix(30);
        let d = d_matrix(30);
        let comm = &x * &d - &d * &x;
        let block = comm.view((0, 0), (29, 29)).into_owned();
        assert!(max_abs(&(block - identity(29) * C64::new(0.0, 1.0))) < 1e-12);
    }

    #[test]
    fn oscillator_is_diagonal() {
        // (x² + ξ² + 1)/2
        let t = vec![
            SymbolTerm::radial(1, scalar(1, re(0.5)), re(1.0)),
            SymbolTerm::radial(1, scalar(1, re(0.5)), re(0.0)),
        ];
        let m = assemble_polynomial(&t, 1, 12).unwrap();
        for i in 0..12 {
            for j in 0..12 {
                let expect = if i == j { (i + 1) as f64 } else { 0.0 };
                assert!((m[(i, j)] - re(expect)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn hermite_functions_orthonormal() {
        let gl = GaussLegendre::new(200);
        let mut gram = [[0.0; 3]; 3];
        for (x, w) in gl.on_interval(-12.0, 12.0) {
            let h = hermite_functions(x, 3);
            for i in 0..3 {
                for j in 0..3 {
                    gram[i][j] += w * h[i] * h[j];
                }
            }
        }
        for i in 0..3 {
            for j in 0..3 {
                assert!((gram[i][j] - if i == j { 1.0 } else { 0.0 }).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn weyl_diagonal_of_gaussian() {
        // ∫_0^∞ e^{−2t} L_k(2t) dt = δ_{k0}/2
        let d = weyl_radial_diagonal(|t| re((-t).exp()), 5);
        assert!((d[0] - re(0.5)).norm() < 1e-12);
        for k in 1..5 {
            assert!(d[k].norm() < 1e-12, "k={k}: {}", d[k]);
        }
    }
}
