//! Small dense complex matrices used as symbol values.

use nalgebra::DMatrix;
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMat = DMatrix<Complex64>;

pub const I: C64 = C64::new(0.0, 1.0);

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

pub fn identity(q: usize) -> CMat {
    CMat::identity(q, q)
}

pub fn zeros(q: usize) -> CMat {
    CMat::zeros(q, q)
}

pub fn scalar(q: usize, v: C64) -> CMat {
    CMat::identity(q, q) * v
}

pub fn diag(values: &[C64]) -> CMat {
    let q = values.len();
    let mut m = CMat::zeros(q, q);
    for (i, v) in values.iter().enumerate() {
        m[(i, i)] = *v;
    }
    m
}

/// Largest absolute entry.
pub fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn trace(m: &CMat) -> C64 {
    (0..m.nrows()).map(|i| m[(i, i)]).sum()
}

/// Eigenvalues of a square complex matrix via complex Schur form.
pub fn eigenvalues(m: &CMat) -> Vec<C64> {
    if m.nrows() == 1 {
        return vec![m[(0, 0)]];
    }
    let schur = nalgebra::linalg::Schur::new(m.clone());
    let (_, t) = schur.unpack();
    (0..t.nrows()).map(|i| t[(i, i)]).collect()
}

pub fn singular_values(m: &CMat) -> Vec<f64> {
    if m.nrows() == 1 {
        return vec![m[(0, 0)].norm()];
    }
    m.clone().svd(false, false).singular_values.iter().copied().collect()
}

pub fn inverse(m: &CMat) -> Option<CMat> {
    if m.nrows() == 1 {
        let v = m[(0, 0)];
        return if v == C64::new(0.0, 0.0) {
            None
        } else {
            Some(CMat::from_element(1, 1, v.inv()))
        };
    }
    m.clone().try_inverse()
}

/// `|λ|^s e^{i s arg}` for an explicitly chosen argument of λ.
pub fn pow_with_arg(modulus: f64, arg: f64, s: C64) -> C64 {
    let log = C64::new(modulus.ln(), arg);
    (s * log).exp()
}
