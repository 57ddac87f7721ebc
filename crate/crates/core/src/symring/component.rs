//! Homogeneous symbol components in ring or sphere-grid representation.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;

use super::jet::Jet;
use super::sphere::SphereGrid;
use super::term::{mat_mul, merge_terms, Axis, SymbolTerm};
use crate::cmat::{max_abs, CMat, C64};
use crate::error::{Error, Result};

/// Samples and Taylor jets of a homogeneous function at the nodes of a sphere grid.
#[derive(Debug, Clone)]
pub struct GridComponent {
    pub degree: C64,
    pub grid: Arc<SphereGrid>,
    pub q: usize,
    /// Jet of the component around each node, all of the same order.
    pub jets: Vec<Jet>,
}

impl GridComponent {
    pub fn order(&self) -> usize {
        self.jets.first().map_or(0, |j| j.degree())
    }

    pub fn values(&self) -> Vec<CMat> {
        self.jets.iter().map(|j| j.value()).collect()
    }
}

#[derive(Debug, Clone)]
pub enum Representation {
    Ring(Vec<SymbolTerm>),
    Grid(GridComponent),
}

#[derive(Debug, Clone)]
pub struct HomogeneousComponent {
    pub n: usize,
    pub q: usize,
    pub degree: C64,
    pub repr: Representation,
}

fn radius(point: &[f64]) -> f64 {
    point.iter().map(|p| p * p).sum::<f64>().sqrt()
}

fn real_pow(r: f64, mu: C64) -> C64 {
    if mu == C64::new(0.0, 0.0) {
        C64::new(1.0, 0.0)
    } else {
        (mu * r.ln()).exp()
    }
}

impl HomogeneousComponent {
    pub fn zero(n: usize, q: usize, degree: C64) -> Self {
        Self { n, q, degree, repr: Representation::Ring(Vec::new()) }
    }

    /// Ring component from terms; checks that every term has the stated degree.
    pub fn ring(n: usize, q: usize, degree: C64, terms: Vec<SymbolTerm>) -> Result<Self> {
        for t in &terms {
            if t.n() != n {
                return Err(Error::DimMismatch(format!("term has n = {}, component n = {n}", t.n())));
            }
            if t.q() != q {
                return Err(Error::DimMismatch(format!("term has q = {}, component q = {q}", t.q())));
            }
            if (t.degree() - degree).norm() > 1e-12 * (1.0 + degree.norm()) {
                return Err(Error::Invalid(format!(
                    "term of degree {} in component of degree {degree}",
                    t.degree()
                )));
            }
        }
        Ok(Self { n, q, degree, repr: Representation::Ring(merge_terms(terms)) })
    }

    pub fn from_grid(n: usize, g: GridComponent) -> Self {
        Self { n, q: g.q, degree: g.degree, repr: Representation::Grid(g) }
    }

    pub fn terms(&self) -> Option<&[SymbolTerm]> {
        match &self.repr {
            Representation::Ring(t) => Some(t),
            Representation::Grid(_) => None,
        }
    }

    pub fn grid(&self) -> Option<&GridComponent> {
        match &self.repr {
            Representation::Grid(g) => Some(g),
            Representation::Ring(_) => None,
        }
    }

    pub fn is_ring(&self) -> bool {
        matches!(self.repr, Representation::Ring(_))
    }

    /// Exactly zero (ring with no terms).
    pub fn is_zero(&self) -> bool {
        matches!(&self.repr, Representation::Ring(t) if t.is_empty())
    }

    /// Ring component made only of polynomial terms (smooth at the origin).
    pub fn is_polynomial(&self) -> bool {
        matches!(&self.repr, Representation::Ring(t) if t.iter().all(|t| t.is_polynomial()))
    }

    pub fn eval(&self, point: &[f64]) -> Result<CMat> {
        let r = radius(point);
        if r == 0.0 {
            return Err(Error::ZeroPoint);
        }
        match &self.repr {
            Representation::Ring(terms) => {
                let mut acc = CMat::zeros(self.q, self.q);
                for t in terms {
                    acc += t.eval(point);
                }
                Ok(acc)
            }
            Representation::Grid(g) => {
                let scale = real_pow(r, self.degree);
                if let Some(k) = g.grid.node_index(point) {
                    return Ok(g.jets[k].value() * scale);
                }
                if self.n == 1 {
                    return Ok(trig_interpolate(g, point[1].atan2(point[0])) * scale);
                }
                Err(Error::GridResolution(format!("point {point:?} is not a grid node")))
            }
        }
    }

    pub fn differentiate(&self, axis: Axis) -> Result<Self> {
        let degree = self.degree - 1.0;
        match &self.repr {
            Representation::Ring(terms) => {
                let out = terms.iter().flat_map(|t| t.differentiate(axis)).collect();
                Ok(Self { n: self.n, q: self.q, degree, repr: Representation::Ring(merge_terms(out)) })
            }
            Representation::Grid(g) => {
                let v = axis.index(self.n);
                let jets = g.jets.iter().map(|j| j.diff(v)).collect::<Result<Vec<_>>>()?;
                Ok(Self::from_grid(
                    self.n,
                    GridComponent { degree, grid: g.grid.clone(), q: g.q, jets },
                ))
            }
        }
    }

    /// ∂_x^β ∂_ξ^α.
    pub fn derivative(&self, beta: &[u32], alpha: &[u32]) -> Result<Self> {
        let mut out = self.clone();
        for (i, &k) in beta.iter().enumerate() {
            for _ in 0..k {
                out = out.differentiate(Axis::X(i))?;
            }
        }
        for (i, &k) in alpha.iter().enumerate() {
            for _ in 0..k {
                out = out.differentiate(Axis::Xi(i))?;
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: C64) -> Self {
        let mut out = self.clone();
        match &mut out.repr {
            Representation::Ring(terms) => {
                if c == C64::new(0.0, 0.0) {
                    terms.clear();
                }
                terms.iter_mut().for_each(|t| t.coeff *= c);
            }
            Representation::Grid(g) => g.jets.iter_mut().for_each(|j| *j = j.scale(c)),
        }
        out
    }

    /// Left multiplication of every coefficient by a constant matrix.
    pub fn left_mul_matrix(&self, m: &CMat) -> Result<Self> {
        match &self.repr {
            Representation::Ring(terms) => {
                let terms = terms
                    .iter()
                    .map(|t| SymbolTerm { coeff: mat_mul(m, &t.coeff), ..t.clone() })
                    .collect();
                Ok(Self { repr: Representation::Ring(merge_terms(terms)), q: m.nrows().max(self.q), ..self.clone() })
            }
            Representation::Grid(g) => {
                let mj = Jet::constant(g.jets[0].nvars(), g.order(), m);
                let jets = g.jets.iter().map(|j| mj.mul(j)).collect();
                Ok(Self::from_grid(self.n, GridComponent { jets, ..g.clone() }))
            }
        }
    }

    pub fn adjoint(&self) -> Self {
        match &self.repr {
            Representation::Ring(terms) => Self {
                degree: self.degree.conj(),
                repr: Representation::Ring(terms.iter().map(|t| t.adjoint()).collect()),
                ..self.clone()
            },
            Representation::Grid(g) => Self::from_grid(
                self.n,
                GridComponent {
                    degree: g.degree.conj(),
                    jets: g.jets.iter().map(|j| j.conj_transpose()).collect(),
                    ..g.clone()
                },
            ),
        }
    }

    /// Sum of two components of the same degree.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.n != other.n || self.q != other.q {
            return Err(Error::DimMismatch("adding components of different shape".into()));
        }
        if (self.degree - other.degree).norm() > 1e-9 * (1.0 + self.degree.norm()) {
            return Err(Error::Invalid(format!(
                "adding components of degree {} and {}",
                self.degree, other.degree
            )));
        }
        if other.is_zero() {
            return Ok(self.clone());
        }
        if self.is_zero() {
            return Ok(Self { degree: self.degree, ..other.clone() });
        }
        match (&self.repr, &other.repr) {
            (Representation::Ring(a), Representation::Ring(b)) => {
                let terms = a.iter().chain(b).cloned().collect();
                Ok(Self { repr: Representation::Ring(merge_terms(terms)), ..self.clone() })
            }
            (Representation::Grid(g), _) => {
                let h = other.to_grid(&g.grid, g.order())?;
                add_grid(self.n, g, &h)
            }
            (_, Representation::Grid(h)) => {
                let g = self.to_grid(&h.grid, h.order())?;
                add_grid(self.n, &g, h)
            }
        }
    }

    /// Pointwise product (ring only).
    pub fn mul_ring(&self, other: &Self) -> Option<Self> {
        let (Representation::Ring(a), Representation::Ring(b)) = (&self.repr, &other.repr) else {
            return None;
        };
        let mut terms = Vec::with_capacity(a.len() * b.len());
        for s in a {
            for t in b {
                terms.push(s.mul(t));
            }
        }
        Some(Self {
            n: self.n,
            q: self.q.max(other.q),
            degree: self.degree + other.degree,
            repr: Representation::Ring(merge_terms(terms)),
        })
    }

    /// Taylor jet of order `order` around `point`.
    pub fn jet(&self, point: &[f64], order: usize) -> Result<Jet> {
        match &self.repr {
            Representation::Ring(terms) => {
                let mut ctx = JetContext::new(point, order);
                Ok(ctx.ring_jet(terms, self.q))
            }
            Representation::Grid(g) => {
                if order > g.order() {
                    return Err(Error::JetExhausted { needed: order, available: g.order() });
                }
                let k = g.grid.node_index(point).ok_or_else(|| {
                    Error::GridResolution(format!("jet requested off the grid at {point:?}"))
                })?;
                let r = radius(point);
                let j = g.jets[k].truncate(order);
                if (r - 1.0).abs() < 1e-15 {
                    Ok(j)
                } else {
                    Ok(j.scale_variables(1.0 / r).scale(real_pow(r, self.degree)))
                }
            }
        }
    }

    /// Resample on a grid with jets of the given order.
    pub fn to_grid(&self, grid: &Arc<SphereGrid>, order: usize) -> Result<GridComponent> {
        match &self.repr {
            Representation::Grid(g) if Arc::ptr_eq(&g.grid, grid) || *g.grid == **grid => {
                if g.order() < order {
                    return Err(Error::JetExhausted { needed: order, available: g.order() });
                }
                Ok(GridComponent {
                    jets: g.jets.iter().map(|j| j.truncate(order)).collect(),
                    ..g.clone()
                })
            }
            Representation::Grid(_) => {
                Err(Error::GridResolution("components live on different sphere grids".into()))
            }
            Representation::Ring(terms) => {
                let jets = grid
                    .nodes
                    .par_iter()
                    .map(|p| JetContext::new(p, order).ring_jet(terms, self.q))
                    .collect();
                Ok(GridComponent { degree: self.degree, grid: grid.clone(), q: self.q, jets })
            }
        }
    }

    /// Largest coefficient magnitude (ring) or sampled value (grid).
    pub fn magnitude(&self) -> f64 {
        match &self.repr {
            Representation::Ring(t) => t.iter().map(|t| max_abs(&t.coeff)).fold(0.0, f64::max),
            Representation::Grid(g) => g.jets.iter().map(|j| max_abs(&j.value())).fold(0.0, f64::max),
        }
    }
}

fn add_grid(n: usize, g: &GridComponent, h: &GridComponent) -> Result<HomogeneousComponent> {
    let order = g.order().min(h.order());
    let jets = g.jets.iter().zip(&h.jets).map(|(a, b)| a.truncate(order).add(&b.truncate(order))).collect();
    Ok(HomogeneousComponent::from_grid(n, GridComponent { jets, ..g.clone() }))
}

/// Barycentric trigonometric interpolation on an even uniform circle grid.
fn trig_interpolate(g: &GridComponent, theta: f64) -> CMat {
    let nn = g.jets.len();
    let mut num = CMat::zeros(g.q, g.q);
    let mut den = 0.0;
    for (k, j) in g.jets.iter().enumerate() {
        let tk = 2.0 * PI * k as f64 / nn as f64;
        let half = 0.5 * (theta - tk);
        let s = half.sin();
        if s.abs() < 1e-15 {
            return j.value();
        }
        let w = if k % 2 == 0 { 1.0 } else { -1.0 } * half.cos() / s;
        num += j.value() * C64::new(w, 0.0);
        den += w;
    }
    num / C64::new(den, 0.0)
}

/// Cached coordinate and radial powers for building ring jets at one base point.
pub struct JetContext {
    base: Vec<f64>,
    order: usize,
    coord_pows: HashMap<(usize, u32), Jet>,
    t_pows: Vec<Jet>,
    rho2: f64,
    rho_pows: HashMap<(u64, u64), Jet>,
}

impl JetContext {
    pub fn new(base: &[f64], order: usize) -> Self {
        let nvars = base.len();
        let rho2: f64 = base.iter().map(|p| p * p).sum();
        // t = (ρ²(base + h) − ρ²(base)) / ρ²(base)
        let mut t = Jet::zero(nvars, 1, order);
        for v in 0..nvars {
            let c = Jet::coordinate(nvars, order, v, base[v]);
            t = t.add(&c.mul(&c));
        }
        t.raw_mut()[0] = C64::new(0.0, 0.0);
        let t = if rho2 > 0.0 { t.scale(C64::new(1.0 / rho2, 0.0)) } else { t };
        let one = Jet::constant(nvars, order, &CMat::from_element(1, 1, C64::new(1.0, 0.0)));
        let mut t_pows = vec![one];
        for k in 1..=order {
            let next = t_pows[k - 1].mul(&t);
            t_pows.push(next);
        }
        Self { base: base.to_vec(), order, coord_pows: HashMap::new(), t_pows, rho2, rho_pows: HashMap::new() }
    }

    fn coord_pow(&mut self, var: usize, k: u32) -> Jet {
        if let Some(j) = self.coord_pows.get(&(var, k)) {
            return j.clone();
        }
        let nvars = self.base.len();
        let j = if k == 0 {
            Jet::constant(nvars, self.order, &CMat::from_element(1, 1, C64::new(1.0, 0.0)))
        } else {
            let prev = self.coord_pow(var, k - 1);
            prev.mul(&Jet::coordinate(nvars, self.order, var, self.base[var]))
        };
        self.coord_pows.insert((var, k), j.clone());
        j
    }

    fn rho_pow(&mut self, s: C64) -> Jet {
        let key = (s.re.to_bits(), s.im.to_bits());
        if let Some(j) = self.rho_pows.get(&key) {
            return j.clone();
        }
        // ρ^{2s}(base + h) = ρ0^{2s} Σ_k C(s,k) t^k
        let lead = (s * self.rho2.ln()).exp();
        let mut acc = self.t_pows[0].scale(lead);
        let mut binom = C64::new(1.0, 0.0);
        for k in 1..=self.order {
            binom = binom * (s - (k as f64 - 1.0)) / k as f64;
            acc.add_scaled(&self.t_pows[k], lead * binom);
        }
        self.rho_pows.insert(key, acc.clone());
        acc
    }

    /// Scalar jet of `x^β ξ^α ρ^{2s}`.
    pub fn monomial_jet(&mut self, t: &SymbolTerm) -> Jet {
        let n = t.n();
        let nvars = self.base.len();
        let mut acc = Jet::constant(nvars, self.order, &CMat::from_element(1, 1, C64::new(1.0, 0.0)));
        for i in 0..n {
            if t.beta[i] > 0 {
                acc = acc.mul(&self.coord_pow(i, t.beta[i]));
            }
            if t.alpha[i] > 0 {
                acc = acc.mul(&self.coord_pow(n + i, t.alpha[i]));
            }
        }
        if t.s_exp != C64::new(0.0, 0.0) {
            acc = acc.mul(&self.rho_pow(t.s_exp));
        }
        acc
    }

    pub fn ring_jet(&mut self, terms: &[SymbolTerm], q: usize) -> Jet {
        let nvars = self.base.len();
        let mut acc = Jet::zero(nvars, q, self.order);
        for t in terms {
            let m = self.monomial_jet(t);
            if q == 1 {
                acc.add_scaled(&m, t.coeff[(0, 0)]);
            } else {
                acc.add_scaled(&m.times_matrix(&t.coeff), C64::new(1.0, 0.0));
            }
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cmat::{re, scalar};

    fn ho_principal() -> HomogeneousComponent {
        let t = SymbolTerm::radial(1, scalar(1, re(0.5)), re(1.0));
        HomogeneousComponent::ring(1, 1, re(2.0), vec![t]).unwrap()
    }

    #[test]
    fn ring_eval_and_derivative() {
        let a = ho_principal();
        assert!((a.eval(&[1.0, 0.0]).unwrap()[(0, 0)] - re(0.5)).norm() < 1e-15);
        let d = a.differentiate(Axis::Xi(0)).unwrap();
        assert!((d.eval(&[0.0, 1.0]).unwrap()[(0, 0)] - re(1.0)).norm() < 1e-15);
        assert_eq!(a.eval(&[0.0, 0.0]), Err(Error::ZeroPoint));
    }

    #[test]
    fn ring_jet_matches_derivatives() {
        // ρ^{-2} at (0.6, 0.8)
        let t = SymbolTerm::radial(1, scalar(1, re(1.0)), re(-1.0));
        let c = HomogeneousComponent::ring(1, 1, re(-2.0), vec![t]).unwrap();
        let p = [0.6, 0.8];
        let j = c.jet(&p, 3).unwrap();
        let dx = c.differentiate(Axis::X(0)).unwrap().eval(&p).unwrap()[(0, 0)];
        let dxx = c.derivative(&[2], &[1]).unwrap().eval(&p).unwrap()[(0, 0)];
        assert!((j.derivative_value(&[1, 0]).unwrap()[(0, 0)] - dx).norm() < 1e-13);
        assert!((j.derivative_value(&[2, 1]).unwrap()[(0, 0)] - dxx).norm() < 1e-12);
    }

    #[test]
    fn grid_component_homogeneous_extension() {
        let grid = Arc::new(SphereGrid::circle(32).unwrap());
        let t = SymbolTerm::new(scalar(1, re(1.0)), vec![1], vec![1], re(-1.0));
        let c = HomogeneousComponent::ring(1, 1, re(0.0), vec![t]).unwrap();
        let g = HomogeneousComponent::from_grid(1, c.to_grid(&grid, 2).unwrap());
        let p = [0.3, -1.7];
        let exact = c.eval(&p).unwrap()[(0, 0)];
        assert!((g.eval(&p).unwrap()[(0, 0)] - exact).norm() < 1e-12);
        let node = [2.0 * grid.nodes[3][0], 2.0 * grid.nodes[3][1]];
        let dj = g.differentiate(Axis::X(0)).unwrap().eval(&node).unwrap()[(0, 0)];
        let de = c.differentiate(Axis::X(0)).unwrap().eval(&node).unwrap()[(0, 0)];
        assert!((dj - de).norm() < 1e-12);
    }
}
