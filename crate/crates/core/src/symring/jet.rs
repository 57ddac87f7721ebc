//! Truncated multivariate Taylor series with matrix coefficients.
//!
//! A [`Jet`] of degree `d` around a base point p stores the coefficients
//! `c_e = ∂^e f(p) / e!` for every multi-index `e` with `|e| ≤ d`, where the
//! variables are ordered `(x_1..x_n, ξ_1..ξ_n)`. Products, sums and partial
//! derivatives are exact on the retained coefficients.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::cmat::{CMat, C64};
use crate::error::{Error, Result};

/// Monomial enumeration in graded order plus multiplication / derivative tables.
#[derive(Debug)]
pub struct MonoTable {
    pub nvars: usize,
    pub max_degree: usize,
    pub exps: Vec<Vec<u8>>,
    /// `deg_end[d]` = number of monomials of degree ≤ d.
    pub deg_end: Vec<usize>,
    index: HashMap<Vec<u8>, usize>,
    /// (i, j, k) with e_i + e_j = e_k, sorted by |e_k|.
    triples: Vec<(u32, u32, u32)>,
    /// `triple_end[d]` = number of triples whose product has degree ≤ d.
    triple_end: Vec<usize>,
    /// `shift[v][i]` = index of e_i + unit_v for |e_i| < max_degree.
    shift: Vec<Vec<u32>>,
}

impl MonoTable {
    fn build(nvars: usize, max_degree: usize) -> Self {
        let mut exps: Vec<Vec<u8>> = Vec::new();
        let mut deg_end = Vec::with_capacity(max_degree + 1);
        for d in 0..=max_degree {
            let mut cur = vec![0u8; nvars];
            enumerate_degree(nvars, d, 0, &mut cur, &mut exps);
            deg_end.push(exps.len());
        }
        let index: HashMap<Vec<u8>, usize> =
            exps.iter().enumerate().map(|(i, e)| (e.clone(), i)).collect();
        let degree_of = |e: &Vec<u8>| e.iter().map(|&v| v as usize).sum::<usize>();
        let mut triples = Vec::new();
        for (i, ei) in exps.iter().enumerate() {
            let di = degree_of(ei);
            for (j, ej) in exps.iter().enumerate() {
                if di + degree_of(ej) > max_degree {
                    continue;
                }
                let sum: Vec<u8> = ei.iter().zip(ej).map(|(a, b)| a + b).collect();
                triples.push((i as u32, j as u32, index[&sum] as u32));
            }
        }
        triples.sort_by_key(|&(_, _, k)| k);
        let mut triple_end = Vec::with_capacity(max_degree + 1);
        for d in 0..=max_degree {
            let limit = deg_end[d] as u32;
            triple_end.push(triples.partition_point(|&(_, _, k)| k < limit));
        }
        let shift = (0..nvars)
            .map(|v| {
                exps.iter()
                    .take(if max_degree == 0 { 0 } else { deg_end[max_degree - 1] })
                    .map(|e| {
                        let mut f = e.clone();
                        f[v] += 1;
                        index[&f] as u32
                    })
                    .collect()
            })
            .collect();
        Self { nvars, max_degree, exps, deg_end, index, triples, triple_end, shift }
    }

    /// Shared table for `nvars` variables, large enough for `degree`.
    pub fn get(nvars: usize, degree: usize) -> Arc<MonoTable> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<MonoTable>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().expect("monomial table cache poisoned");
        if let Some(t) = guard.get(&nvars) {
            if t.max_degree >= degree {
                return t.clone();
            }
        }
        let base = if nvars <= 2 { 16 } else { 8 };
        let t = Arc::new(MonoTable::build(nvars, degree.max(base)));
        guard.insert(nvars, t.clone());
        t
    }

    pub fn len(&self, degree: usize) -> usize {
        self.deg_end[degree]
    }

    pub fn index_of(&self, e: &[u8]) -> Option<usize> {
        self.index.get(e).copied()
    }
}

fn enumerate_degree(nvars: usize, d: usize, pos: usize, cur: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
    if pos == nvars - 1 {
        cur[pos] = d as u8;
        out.push(cur.clone());
        cur[pos] = 0;
        return;
    }
    for k in (0..=d).rev() {
        cur[pos] = k as u8;
        enumerate_degree(nvars, d - k, pos + 1, cur, out);
    }
    cur[pos] = 0;
}

#[derive(Debug, Clone)]
pub struct Jet {
    table: Arc<MonoTable>,
    q: usize,
    degree: usize,
    /// `len(degree)` blocks of `q*q` row-major entries.
    coeffs: Vec<C64>,
}

impl Jet {
    pub fn zero(nvars: usize, q: usize, degree: usize) -> Self {
        let table = MonoTable::get(nvars, degree);
        let len = table.len(degree);
        Self { table, q, degree, coeffs: vec![C64::new(0.0, 0.0); len * q * q] }
    }

    pub fn constant(nvars: usize, degree: usize, m: &CMat) -> Self {
        let q = m.nrows();
        let mut j = Self::zero(nvars, q, degree);
        j.set_block(0, m);
        j
    }

    /// Coordinate function `p_v + h_v` around base point `p`.
    pub fn coordinate(nvars: usize, degree: usize, var: usize, base: f64) -> Self {
        let mut j = Self::zero(nvars, 1, degree);
        j.coeffs[0] = C64::new(base, 0.0);
        if degree >= 1 {
            let mut e = vec![0u8; nvars];
            e[var] = 1;
            let idx = j.table.index_of(&e).expect("unit monomial");
            j.coeffs[idx] = C64::new(1.0, 0.0);
        }
        j
    }

    pub fn nvars(&self) -> usize {
        self.table.nvars
    }
    pub fn q(&self) -> usize {
        self.q
    }
    pub fn degree(&self) -> usize {
        self.degree
    }
    pub fn table(&self) -> &MonoTable {
        &self.table
    }

    pub fn block(&self, i: usize) -> CMat {
        let qq = self.q * self.q;
        CMat::from_row_slice(self.q, self.q, &self.coeffs[i * qq..(i + 1) * qq])
    }

    pub fn set_block(&mut self, i: usize, m: &CMat) {
        let q = self.q;
        for r in 0..q {
            for c in 0..q {
                self.coeffs[i * q * q + r * q + c] = m[(r, c)];
            }
        }
    }

    /// Value at the base point.
    pub fn value(&self) -> CMat {
        self.block(0)
    }

    /// Taylor coefficient for multi-index `e`.
    pub fn coeff(&self, e: &[u8]) -> Option<CMat> {
        let idx = self.table.index_of(e)?;
        (idx < self.table.len(self.degree)).then(|| self.block(idx))
    }

    /// Partial derivative `∂^e f` at the base point (coefficient × e!).
    pub fn derivative_value(&self, e: &[u8]) -> Option<CMat> {
        let fact: f64 = e.iter().map(|&k| factorial(k as usize)).product();
        self.coeff(e).map(|m| m * C64::new(fact, 0.0))
    }

    pub fn truncate(&self, degree: usize) -> Jet {
        let degree = degree.min(self.degree);
        let len = self.table.len(degree) * self.q * self.q;
        Jet { table: self.table.clone(), q: self.q, degree, coeffs: self.coeffs[..len].to_vec() }
    }

    pub fn scale(&self, s: C64) -> Jet {
        let mut out = self.clone();
        out.coeffs.iter_mut().for_each(|v| *v *= s);
        out
    }

    pub fn conj_transpose(&self) -> Jet {
        let q = self.q;
        let mut out = self.clone();
        let n = self.table.len(self.degree);
        for i in 0..n {
            for r in 0..q {
                for c in 0..q {
                    out.coeffs[i * q * q + r * q + c] = self.coeffs[i * q * q + c * q + r].conj();
                }
            }
        }
        out
    }

    /// In-place `self += s * other`, truncating to the smaller degree.
    pub fn add_scaled(&mut self, other: &Jet, s: C64) {
        debug_assert_eq!(self.q, other.q);
        if other.degree < self.degree {
            *self = self.truncate(other.degree);
        }
        let len = self.coeffs.len();
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs[..len]) {
            *a += s * b;
        }
    }

    pub fn add(&self, other: &Jet) -> Jet {
        let mut out = self.clone();
        out.add_scaled(other, C64::new(1.0, 0.0));
        out
    }

    pub fn sub(&self, other: &Jet) -> Jet {
        let mut out = self.clone();
        out.add_scaled(other, C64::new(-1.0, 0.0));
        out
    }

    /// Truncated product, at most of degree `min(deg self, deg other, cap)`.
    pub fn mul_capped(&self, other: &Jet, cap: usize) -> Jet {
        let degree = self.degree.min(other.degree).min(cap);
        let q = self.q;
        let qo = other.q;
        // scalar * matrix broadcasting
        let (qout, mode) = match (q, qo) {
            (a, b) if a == b => (a, 0u8),
            (1, b) => (b, 1),
            (a, 1) => (a, 2),
            _ => panic!("jet dimension mismatch {q} vs {qo}"),
        };
        let table = self.table.clone();
        let mut out = vec![C64::new(0.0, 0.0); table.len(degree) * qout * qout];
        let end = table.triple_end[degree];
        let qq = qout * qout;
        for &(i, j, k) in &table.triples[..end] {
            let (i, j, k) = (i as usize, j as usize, k as usize);
            match mode {
                0 if q == 1 => out[k] += self.coeffs[i] * other.coeffs[j],
                0 => {
                    let a = &self.coeffs[i * qq..(i + 1) * qq];
                    let b = &other.coeffs[j * qq..(j + 1) * qq];
                    let o = &mut out[k * qq..(k + 1) * qq];
                    for r in 0..q {
                        for l in 0..q {
                            let arl = a[r * q + l];
                            if arl == C64::new(0.0, 0.0) {
                                continue;
                            }
                            for cc in 0..q {
                                o[r * q + cc] += arl * b[l * q + cc];
                            }
                        }
                    }
                }
                1 => {
                    let s = self.coeffs[i];
                    for t in 0..qq {
                        out[k * qq + t] += s * other.coeffs[j * qq + t];
                    }
                }
                _ => {
                    let s = other.coeffs[j];
                    for t in 0..qq {
                        out[k * qq + t] += self.coeffs[i * qq + t] * s;
                    }
                }
            }
        }
        Jet { table, q: qout, degree, coeffs: out }
    }

    pub fn mul(&self, other: &Jet) -> Jet {
        self.mul_capped(other, usize::MAX)
    }

    /// `∂/∂ var`, lowering the degree by one.
    pub fn diff(&self, var: usize) -> Result<Jet> {
        if self.degree == 0 {
            return Err(Error::JetExhausted { needed: 1, available: 0 });
        }
        let degree = self.degree - 1;
        let table = self.table.clone();
        let qq = self.q * self.q;
        let n = table.len(degree);
        let mut out = vec![C64::new(0.0, 0.0); n * qq];
        for i in 0..n {
            let src = table.shift[var][i] as usize;
            let mult = (table.exps[i][var] as f64) + 1.0;
            for t in 0..qq {
                out[i * qq + t] = self.coeffs[src * qq + t] * mult;
            }
        }
        Ok(Jet { table, q: self.q, degree, coeffs: out })
    }

    /// Mixed derivative by multi-index (per variable counts).
    pub fn diff_multi(&self, e: &[u8]) -> Result<Jet> {
        let total: usize = e.iter().map(|&k| k as usize).sum();
        if total > self.degree {
            return Err(Error::JetExhausted { needed: total, available: self.degree });
        }
        let mut out = self.clone();
        for (v, &k) in e.iter().enumerate() {
            for _ in 0..k {
                out = out.diff(v)?;
            }
        }
        Ok(out)
    }

    /// Inverse of a jet whose constant term is invertible.
    pub fn inverse(&self) -> Option<Jet> {
        let a0inv = crate::cmat::inverse(&self.value())?;
        let nvars = self.nvars();
        let inv0 = Jet::constant(nvars, self.degree, &a0inv);
        // N = self - a0 has zero constant term; (a0 + N)^-1 = Σ (-a0^-1 N)^k a0^-1
        let mut nil = self.clone();
        let qq = self.q * self.q;
        nil.coeffs[..qq].iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
        let step = inv0.mul(&nil).scale(C64::new(-1.0, 0.0));
        let mut term = inv0.clone();
        let mut acc = inv0.clone();
        for _ in 0..self.degree {
            term = step.mul(&term);
            acc = acc.add(&term);
        }
        Some(acc)
    }

    /// Homogeneous rescaling of the expansion variables: h ↦ t·h.
    pub fn scale_variables(&self, t: f64) -> Jet {
        let mut out = self.clone();
        let qq = self.q * self.q;
        for i in 0..self.table.len(self.degree) {
            let d: usize = self.table.exps[i].iter().map(|&v| v as usize).sum();
            let f = t.powi(d as i32);
            out.coeffs[i * qq..(i + 1) * qq].iter_mut().for_each(|v| *v *= f);
        }
        out
    }

    /// Evaluate the truncated series at displacement `h`.
    pub fn eval_at(&self, h: &[f64]) -> CMat {
        let qq = self.q * self.q;
        let mut acc = vec![C64::new(0.0, 0.0); qq];
        for i in 0..self.table.len(self.degree) {
            let mono: f64 = self.table.exps[i]
                .iter()
                .zip(h)
                .map(|(&k, &x)| x.powi(k as i32))
                .product();
            for t in 0..qq {
                acc[t] += self.coeffs[i * qq + t] * mono;
            }
        }
        CMat::from_row_slice(self.q, self.q, &acc)
    }

    /// Largest coefficient magnitude.
    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |a, v| a.max(v.norm()))
    }

    /// Kronecker-style lift of a scalar jet by a constant matrix.
    pub fn times_matrix(&self, m: &CMat) -> Jet {
        assert_eq!(self.q, 1);
        let q = m.nrows();
        let n = self.table.len(self.degree);
        let mut coeffs = Vec::with_capacity(n * q * q);
        for i in 0..n {
            let s = self.coeffs[i];
            for r in 0..q {
                for cc in 0..q {
                    coeffs.push(s * m[(r, cc)]);
                }
            }
        }
        Jet { table: self.table.clone(), q, degree: self.degree, coeffs }
    }

    pub(crate) fn raw(&self) -> &[C64] {
        &self.coeffs
    }

    pub(crate) fn raw_mut(&mut self) -> &mut [C64] {
        &mut self.coeffs
    }
}

pub fn factorial(k: usize) -> f64 {
    (1..=k).fold(1.0, |a, b| a * b as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cplx(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn product_of_coordinates() {
        // (1 + h0)(2 + h1) = 2 + 2h0 + h1 + h0 h1
        let x = Jet::coordinate(2, 3, 0, 1.0);
        let y = Jet::coordinate(2, 3, 1, 2.0);
        let p = x.mul(&y);
        assert_eq!(p.coeff(&[0, 0]).unwrap()[(0, 0)], cplx(2.0));
        assert_eq!(p.coeff(&[1, 0]).unwrap()[(0, 0)], cplx(2.0));
        assert_eq!(p.coeff(&[0, 1]).unwrap()[(0, 0)], cplx(1.0));
        assert_eq!(p.coeff(&[1, 1]).unwrap()[(0, 0)], cplx(1.0));
        assert_eq!(p.coeff(&[2, 0]).unwrap()[(0, 0)], cplx(0.0));
    }

    #[test]
    fn derivative_lowers_degree() {
        let x = Jet::coordinate(2, 4, 0, 0.5);
        let x3 = x.mul(&x).mul(&x);
        let d = x3.diff(0).unwrap();
        assert_eq!(d.degree(), 3);
        // d/dx x^3 at 0.5 = 0.75
        assert!((d.value()[(0, 0)] - cplx(0.75)).norm() < 1e-15);
        assert!((x3.derivative_value(&[2, 0]).unwrap()[(0, 0)] - cplx(3.0)).norm() < 1e-14);
    }

    #[test]
    fn inverse_of_series() {
        // 1/(2 + h) = 1/2 - h/4 + h^2/8 ...
        let x = Jet::coordinate(2, 5, 0, 2.0);
        let inv = x.inverse().unwrap();
        let prod = inv.mul(&x);
        assert!((prod.value()[(0, 0)] - cplx(1.0)).norm() < 1e-15);
        for i in 1..prod.table().len(5) {
            assert!(prod.block(i)[(0, 0)].norm() < 1e-14);
        }
        assert!((inv.coeff(&[2, 0]).unwrap()[(0, 0)] - cplx(0.125)).norm() < 1e-15);
    }
}
