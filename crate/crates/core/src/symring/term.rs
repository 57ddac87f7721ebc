//! Ring terms `c · x^β ξ^α (|x|²+|ξ|²)^s` and their derivatives.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::cmat::{max_abs, CMat, C64};

/// Which block of coordinates a derivative acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Axis {
    X(usize),
    Xi(usize),
}

impl Axis {
    /// Position of the axis in the `(x, ξ)` coordinate vector.
    pub fn index(self, n: usize) -> usize {
        match self {
            Axis::X(i) => i,
            Axis::Xi(i) => n + i,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SymbolTerm {
    pub coeff: CMat,
    pub beta: Vec<u32>,
    pub alpha: Vec<u32>,
    pub s_exp: C64,
}

impl SymbolTerm {
    pub fn new(coeff: CMat, beta: Vec<u32>, alpha: Vec<u32>, s_exp: C64) -> Self {
        assert_eq!(beta.len(), alpha.len(), "x and ξ multi-indices must have equal length");
        Self { coeff, beta, alpha, s_exp }
    }

    /// Scalar term `c · ρ^{2s}` in dimension `n`.
    pub fn radial(n: usize, coeff: CMat, s_exp: C64) -> Self {
        Self::new(coeff, vec![0; n], vec![0; n], s_exp)
    }

    pub fn n(&self) -> usize {
        self.beta.len()
    }

    pub fn q(&self) -> usize {
        self.coeff.nrows()
    }

    pub fn degree(&self) -> C64 {
        let poly: u32 = self.beta.iter().chain(&self.alpha).sum();
        C64::new(poly as f64, 0.0) + self.s_exp * 2.0
    }

    /// True when `s_exp` is a non-negative integer, i.e. the term is a polynomial.
    pub fn is_polynomial(&self) -> bool {
        self.s_exp.im == 0.0 && self.s_exp.re >= 0.0 && self.s_exp.re.fract() == 0.0
    }

    /// Degree as a polynomial in ξ (only meaningful for polynomial terms).
    pub fn xi_degree(&self) -> u32 {
        self.alpha.iter().sum::<u32>() + 2 * self.s_exp.re as u32
    }

    /// Degree as a polynomial in x (only meaningful for polynomial terms).
    pub fn x_degree(&self) -> u32 {
        self.beta.iter().sum::<u32>() + 2 * self.s_exp.re as u32
    }

    /// Scalar factor `x^β ξ^α ρ^{2s}` at a point `(x, ξ)`.
    pub fn monomial_value(&self, point: &[f64]) -> C64 {
        let n = self.n();
        let mut v = 1.0;
        for i in 0..n {
            v *= point[i].powi(self.beta[i] as i32) * point[n + i].powi(self.alpha[i] as i32);
        }
        if self.s_exp == C64::new(0.0, 0.0) {
            return C64::new(v, 0.0);
        }
        let rho2: f64 = point.iter().map(|p| p * p).sum();
        if rho2 == 0.0 {
            return if self.is_polynomial() { C64::new(0.0, 0.0) } else { C64::new(f64::NAN, 0.0) };
        }
        C64::new(v, 0.0) * (self.s_exp * rho2.ln()).exp()
    }

    pub fn eval(&self, point: &[f64]) -> CMat {
        &self.coeff * self.monomial_value(point)
    }

    /// ∂ along `axis`: at most two new terms.
    pub fn differentiate(&self, axis: Axis) -> Vec<SymbolTerm> {
        let (i, is_x) = match axis {
            Axis::X(i) => (i, true),
            Axis::Xi(i) => (i, false),
        };
        let mut out = Vec::with_capacity(2);
        let power = if is_x { self.beta[i] } else { self.alpha[i] };
        if power > 0 {
            let mut t = self.clone();
            if is_x {
                t.beta[i] -= 1;
            } else {
                t.alpha[i] -= 1;
            }
            t.coeff *= C64::new(power as f64, 0.0);
            out.push(t);
        }
        if self.s_exp != C64::new(0.0, 0.0) {
            let mut t = self.clone();
            if is_x {
                t.beta[i] += 1;
            } else {
                t.alpha[i] += 1;
            }
            t.coeff *= self.s_exp * 2.0;
            t.s_exp -= 1.0;
            out.push(t);
        }
        out
    }

    pub fn adjoint(&self) -> SymbolTerm {
        let mut t = self.clone();
        t.coeff = self.coeff.adjoint();
        t.s_exp = self.s_exp.conj();
        t
    }

    /// Product of two terms (matrix product of the coefficients).
    pub fn mul(&self, other: &SymbolTerm) -> SymbolTerm {
        SymbolTerm {
            coeff: mat_mul(&self.coeff, &other.coeff),
            beta: self.beta.iter().zip(&other.beta).map(|(a, b)| a + b).collect(),
            alpha: self.alpha.iter().zip(&other.alpha).map(|(a, b)| a + b).collect(),
            s_exp: self.s_exp + other.s_exp,
        }
    }
}

/// Matrix product allowing a 1×1 factor to act as a scalar.
pub fn mat_mul(a: &CMat, b: &CMat) -> CMat {
    match (a.nrows(), b.nrows()) {
        (x, y) if x == y => a * b,
        (1, _) => b * a[(0, 0)],
        (_, 1) => a * b[(0, 0)],
        (x, y) => panic!("matrix dimension mismatch {x} vs {y}"),
    }
}

/// Combine terms with identical exponents and drop exact zeros.
pub fn merge_terms(terms: Vec<SymbolTerm>) -> Vec<SymbolTerm> {
    let mut order: Vec<(Vec<u32>, Vec<u32>, u64, u64)> = Vec::new();
    let mut acc: HashMap<(Vec<u32>, Vec<u32>, u64, u64), CMat> = HashMap::new();
    for t in terms {
        let key = (t.beta.clone(), t.alpha.clone(), t.s_exp.re.to_bits(), t.s_exp.im.to_bits());
        match acc.get_mut(&key) {
            Some(m) => *m += &t.coeff,
            None => {
                order.push(key.clone());
                acc.insert(key, t.coeff);
            }
        }
    }
    order
        .into_iter()
        .filter_map(|key| {
            let coeff = acc.remove(&key)?;
            if max_abs(&coeff) == 0.0 {
                return None;
            }
            let (beta, alpha, sr, si) = key;
            Some(SymbolTerm { coeff, beta, alpha, s_exp: C64::new(f64::from_bits(sr), f64::from_bits(si)) })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cmat::{re, scalar};

    fn scalar_term(c: f64, beta: u32, alpha: u32, s: f64) -> SymbolTerm {
        SymbolTerm::new(scalar(1, re(c)), vec![beta], vec![alpha], re(s))
    }

    #[test]
    fn derivative_of_x_over_rho_squared() {
        // ∂_x (x ρ^{-2}) = ρ^{-2} - 2 x² ρ^{-4}
        let t = scalar_term(1.0, 1, 0, -1.0);
        let d = merge_terms(t.differentiate(Axis::X(0)));
        assert_eq!(d.len(), 2);
        assert_eq!(d[0], scalar_term(1.0, 0, 0, -1.0));
        assert_eq!(d[1], scalar_term(-2.0, 2, 0, -2.0));
    }

    #[test]
    fn merge_cancels() {
        let a = scalar_term(1.0, 1, 1, 0.0);
        let b = scalar_term(-1.0, 1, 1, 0.0);
        assert!(merge_terms(vec![a, b]).is_empty());
    }

    #[test]
    fn degree_counts_radial_exponent() {
        let t = scalar_term(2.0, 1, 2, -1.5);
        assert_eq!(t.degree(), re(0.0));
    }
}
