use std::sync::Arc;

use super::component::HomogeneousComponent;
use super::excision::ExcisionProfile;
use super::registry::ExactSymbol;
use super::sphere::SphereGrid;
use super::term::SymbolTerm;
use crate::cmat::{identity, re, CMat, C64};
use crate::error::{Error, Result};

/// Classical symbol of order m: components a_{(m-j)} for j < depth, plus an
/// optional closed-form evaluator of the full symbol.
#[derive(Debug, Clone)]
pub struct ClassicalSymbol {
    pub n: usize,
    pub q: usize,
    pub order: C64,
    pub components: Vec<HomogeneousComponent>,
    /// All components beyond the stored ones vanish.
    pub complete: bool,
    pub exact: Option<ExactSymbol>,
    pub excision: ExcisionProfile,
}

impl ClassicalSymbol {
    pub fn new(
        n: usize,
        q: usize,
        order: C64,
        components: Vec<HomogeneousComponent>,
        complete: bool,
    ) -> Result<Self> {
        if n == 0 || q == 0 {
            return Err(Error::Invalid("n and q must be positive".into()));
        }
        for (j, c) in components.iter().enumerate() {
            if c.n != n || c.q != q {
                return Err(Error::DimMismatch(format!(
                    "component {j} has (n, q) = ({}, {}), symbol has ({n}, {q})",
                    c.n, c.q
                )));
            }
            let want = order - j as f64;
            if (c.degree - want).norm() > 1e-9 * (1.0 + want.norm()) {
                return Err(Error::Invalid(format!(
                    "component {j} has degree {}, expected {want}",
                    c.degree
                )));
            }
        }
        Ok(Self { n, q, order, components, complete, exact: None, excision: ExcisionProfile::default() })
    }

    /// Registered symbol with `depth` components (or its full finite expansion).
    pub fn from_exact(exact: ExactSymbol, n: usize, depth: usize) -> Result<Self> {
        exact.validate()?;
        let (depth, complete) = match exact.natural_depth() {
            Some(d) => (d.max(1), true),
            None => (depth, false),
        };
        let comps = exact.components(n, depth);
        let mut s = Self::new(n, exact.q(), exact.order(), comps, complete)?;
        s.exact = Some(exact);
        Ok(s)
    }

    pub fn harmonic_oscillator(n: usize) -> Self {
        Self::from_exact(ExactSymbol::Ho, n, 3).expect("harmonic oscillator")
    }

    /// The constant symbol `I_q`.
    pub fn identity(n: usize, q: usize) -> Self {
        let t = SymbolTerm::radial(n, identity(q), re(0.0));
        let c = HomogeneousComponent::ring(n, q, re(0.0), vec![t]).expect("identity component");
        Self::new(n, q, re(0.0), vec![c], true).expect("identity symbol")
    }

    /// Finite sum of terms whose degrees differ by integers, grouped into
    /// components; the expansion is complete.
    pub fn from_terms(n: usize, q: usize, terms: Vec<SymbolTerm>) -> Result<Self> {
        let top = terms
            .iter()
            .map(|t| t.degree())
            .max_by(|a, b| a.re.total_cmp(&b.re))
            .ok_or(Error::EmptyExpansion)?;
        let mut buckets: Vec<Vec<SymbolTerm>> = Vec::new();
        for t in terms {
            let gap = top - t.degree();
            if gap.im.abs() > 1e-12 || (gap.re - gap.re.round()).abs() > 1e-12 {
                return Err(Error::Invalid(format!("term degree {} is not top degree minus an integer", t.degree())));
            }
            let j = gap.re.round() as usize;
            if buckets.len() <= j {
                buckets.resize(j + 1, Vec::new());
            }
            buckets[j].push(t);
        }
        let comps = buckets
            .into_iter()
            .enumerate()
            .map(|(j, ts)| HomogeneousComponent::ring(n, q, top - j as f64, ts))
            .collect::<Result<Vec<_>>>()?;
        Self::new(n, q, top, comps, true)
    }

    /// Single homogeneous component glued with the excision function.
    pub fn single(component: HomogeneousComponent) -> Self {
        let (n, q, deg) = (component.n, component.q, component.degree);
        Self::new(n, q, deg, vec![component], true).expect("single component symbol")
    }

    pub fn depth(&self) -> usize {
        self.components.len()
    }

    /// Component j; zero past the end of a complete expansion.
    pub fn component(&self, j: usize) -> Option<HomogeneousComponent> {
        if j < self.components.len() {
            Some(self.components[j].clone())
        } else if self.complete {
            Some(HomogeneousComponent::zero(self.n, self.q, self.order - j as f64))
        } else {
            None
        }
    }

    pub fn principal(&self) -> Result<&HomogeneousComponent> {
        match self.components.first() {
            Some(c) if !c.is_zero() => Ok(c),
            _ => Err(Error::EmptyExpansion),
        }
    }

    pub fn with_excision(mut self, excision: ExcisionProfile) -> Result<Self> {
        excision.validate()?;
        self.excision = excision;
        Ok(self)
    }

    /// Drop the closed-form evaluator (the symbol becomes its glued expansion).
    pub fn without_exact(mut self) -> Self {
        self.exact = None;
        self
    }

    pub fn truncated(&self, depth: usize) -> Self {
        let mut s = self.clone();
        if depth < s.components.len() {
            s.components.truncate(depth);
            let tail_zero = self.components[depth..].iter().all(|c| c.is_zero());
            s.complete = self.complete && tail_zero;
            s.exact = if s.complete { self.exact.clone() } else { None };
        }
        s
    }

    /// Σ_j χ(ρ) a_{(m-j)}(p); polynomial components are not excised.
    pub fn eval_glued(&self, point: &[f64]) -> Result<CMat> {
        let rho = point.iter().map(|p| p * p).sum::<f64>().sqrt();
        let chi = self.excision.chi(rho);
        let mut acc = CMat::zeros(self.q, self.q);
        for c in &self.components {
            if c.is_zero() {
                continue;
            }
            if c.is_polynomial() {
                if rho > 0.0 {
                    acc += c.eval(point)?;
                } else if c.degree == re(0.0) {
                    acc += c.eval(&unit_point(point.len()))?;
                }
            } else if chi != 0.0 {
                acc += c.eval(point)? * C64::new(chi, 0.0);
            }
        }
        Ok(acc)
    }

    /// Full symbol: closed form when registered, glued expansion otherwise.
    pub fn eval_full(&self, point: &[f64]) -> Result<CMat> {
        match &self.exact {
            Some(e) => Ok(e.eval(point)),
            None => self.eval_glued(point),
        }
    }

    /// Sphere grid shared by the grid components, if any.
    pub fn grid(&self) -> Option<Arc<SphereGrid>> {
        self.components.iter().find_map(|c| c.grid().map(|g| g.grid.clone()))
    }

    /// Smallest jet order stored among grid components.
    pub fn grid_jet_order(&self) -> Option<usize> {
        self.components.iter().filter_map(|c| c.grid().map(|g| g.order())).min()
    }

    pub fn is_ring(&self) -> bool {
        self.components.iter().all(|c| c.is_ring())
    }

    pub fn scale(&self, c: C64) -> Self {
        let mut s = self.clone();
        s.components = self.components.iter().map(|x| x.scale(c)).collect();
        s.exact = None;
        s
    }

    /// Sum of symbols of the same order; depth is the smaller of the two
    /// unless one of them is complete.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.n != other.n || self.q != other.q {
            return Err(Error::DimMismatch("adding symbols of different shape".into()));
        }
        if (self.order - other.order).norm() > 1e-9 {
            return Err(Error::Invalid(format!("adding symbols of order {} and {}", self.order, other.order)));
        }
        let depth = match (self.complete, other.complete) {
            (true, true) => self.depth().max(other.depth()),
            (true, false) => other.depth(),
            (false, true) => self.depth(),
            (false, false) => self.depth().min(other.depth()),
        };
        let comps = (0..depth)
            .map(|j| {
                let a = self.component(j).expect("within depth");
                let b = other.component(j).expect("within depth");
                a.add(&b)
            })
            .collect::<Result<Vec<_>>>()?;
        let mut s = Self::new(self.n, self.q, self.order, comps, self.complete && other.complete)?;
        s.excision = self.excision;
        Ok(s)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(re(-1.0)))
    }

    /// Shift the order label by an integer, prepending zero components
    /// (used to view a lower-order symbol inside a higher-order family).
    pub fn reindexed(&self, new_order: C64) -> Result<Self> {
        let shift = new_order - self.order;
        if shift.im != 0.0 || shift.re < 0.0 || shift.re.fract() != 0.0 {
            return Err(Error::Invalid(format!("cannot view order {} as order {new_order}", self.order)));
        }
        let k = shift.re as usize;
        let mut comps: Vec<_> = (0..k)
            .map(|j| HomogeneousComponent::zero(self.n, self.q, new_order - j as f64))
            .collect();
        comps.extend(self.components.iter().cloned());
        let mut s = Self::new(self.n, self.q, new_order, comps, self.complete)?;
        s.exact = self.exact.clone();
        s.excision = self.excision;
        Ok(s)
    }

    /// Index of the first nonzero component.
    pub fn leading_index(&self) -> Option<usize> {
        self.components.iter().position(|c| !c.is_zero())
    }
}

fn unit_point(len: usize) -> Vec<f64> {
    let mut p = vec![0.0; len];
    p[0] = 1.0;
    p
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cmat::scalar;

    #[test]
    fn ho_full_at_origin() {
        let a = ClassicalSymbol::harmonic_oscillator(1);
        assert!((a.eval_full(&[0.0, 0.0]).unwrap()[(0, 0)] - re(0.5)).norm() < 1e-15);
        let g = a.clone().without_exact();
        assert!((g.eval_full(&[0.0, 0.0]).unwrap()[(0, 0)] - re(0.5)).norm() < 1e-15);
        assert!((g.eval_full(&[0.3, 0.4]).unwrap()[(0, 0)] - re(0.625)).norm() < 1e-15);
    }

    #[test]
    fn glued_vanishes_near_origin() {
        let t = SymbolTerm::radial(1, scalar(1, re(1.0)), re(-1.0));
        let c = HomogeneousComponent::ring(1, 1, re(-2.0), vec![t]).unwrap();
        let a = ClassicalSymbol::single(c);
        assert_eq!(a.eval_full(&[0.1, 0.0]).unwrap()[(0, 0)], re(0.0));
        assert!((a.eval_full(&[2.0, 0.0]).unwrap()[(0, 0)] - re(0.25)).norm() < 1e-15);
    }

    #[test]
    fn inverse_square_exact_value() {
        let e = ExactSymbol::ShiftedQuadraticPower { s: [-2.0, 0.0], shift: 1.0, scale: 1.0 };
        let a = ClassicalSymbol::from_exact(e, 1, 6).unwrap();
        assert!((a.eval_full(&[1.0, 1.0]).unwrap()[(0, 0)] - re(1.0 / 9.0)).norm() < 1e-15);
        assert!(!a.complete);
    }
}
