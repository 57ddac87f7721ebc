//! Asymptotic Kohn–Nirenberg calculus: sharp product, adjoint, principal
//! symbol, ellipticity tests and the elliptic parametrix.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;

use crate::cmat::{eigenvalues, inverse, max_abs, singular_values, CMat, C64, I};
use crate::error::{Error, Result};
use crate::symring::jet::factorial;
use crate::symring::{ClassicalSymbol, GridComponent, HomogeneousComponent, Jet, SphereGrid, SymbolTerm};

pub const DEFAULT_DEPTH: usize = 8;
pub const DEFAULT_ELLIPTIC_TOL: f64 = 1e-9;

/// Closed sector Λ_{θ,θ'} = {r e^{iφ} : r ≥ 0, θ ≤ φ ≤ θ'}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sector {
    pub theta: f64,
    pub theta_prime: f64,
}

impl Sector {
    pub fn new(theta: f64, theta_prime: f64) -> Result<Self> {
        if !(theta < theta_prime && theta_prime <= theta + 2.0 * PI) {
            return Err(Error::Invalid(format!(
                "sector needs θ < θ' ≤ θ + 2π, got ({theta}, {theta_prime})"
            )));
        }
        Ok(Self { theta, theta_prime })
    }

    /// Thin sector around a single ray.
    pub fn around_ray(theta: f64, half_width: f64) -> Self {
        Self { theta: theta - half_width, theta_prime: theta + half_width }
    }

    pub fn contains_angle(&self, phi: f64) -> bool {
        (phi - self.theta).rem_euclid(2.0 * PI) <= self.theta_prime - self.theta + 1e-15
    }

    /// Euclidean distance from λ to the closed sector.
    pub fn distance(&self, lambda: C64) -> f64 {
        if lambda.norm() == 0.0 || self.contains_angle(lambda.arg()) {
            return 0.0;
        }
        let ray_dist = |phi: f64| {
            let u = C64::from_polar(1.0, phi);
            let p = lambda * u.conj();
            if p.re <= 0.0 {
                lambda.norm()
            } else {
                p.im.abs()
            }
        };
        ray_dist(self.theta).min(ray_dist(self.theta_prime))
    }
}

/// All multi-indices of length `n` with total degree `total`.
pub fn multi_indices(n: usize, total: u32) -> Vec<Vec<u32>> {
    fn rec(n: usize, total: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if cur.len() == n - 1 {
            cur.push(total);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for k in (0..=total).rev() {
            cur.push(k);
            rec(n, total - k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, total, &mut Vec::with_capacity(n), &mut out);
    out
}

pub fn multi_factorial(alpha: &[u32]) -> f64 {
    alpha.iter().map(|&k| factorial(k as usize)).product()
}

fn minus_i_pow(k: u32) -> C64 {
    match k % 4 {
        0 => C64::new(1.0, 0.0),
        1 => -I,
        2 => C64::new(-1.0, 0.0),
        _ => I,
    }
}

/// Number of components that can be formed without reading past a truncated expansion.
fn available_depth(a: &ClassicalSymbol, n: usize) -> usize {
    if a.complete {
        n
    } else {
        n.min(a.depth())
    }
}

fn last_nonzero(a: &ClassicalSymbol) -> usize {
    a.components.iter().rposition(|c| !c.is_zero()).unwrap_or(0)
}

/// Polynomial degree in ξ (if `xi`) or x of a complete ring expansion.
fn polynomial_degree(a: &ClassicalSymbol, xi: bool) -> Option<u32> {
    if !a.complete {
        return None;
    }
    let mut deg = 0;
    for c in &a.components {
        for t in c.terms()? {
            if !t.is_polynomial() {
                return None;
            }
            deg = deg.max(if xi { t.xi_degree() } else { t.x_degree() });
        }
    }
    Some(deg)
}

/// Memoized ∂_ξ^α a_j and D_x^α b_l.
struct DerivCache<'a> {
    sym: &'a ClassicalSymbol,
    xi: bool,
    map: HashMap<(usize, Vec<u32>), Option<HomogeneousComponent>>,
}

impl<'a> DerivCache<'a> {
    fn new(sym: &'a ClassicalSymbol, xi: bool) -> Self {
        Self { sym, xi, map: HashMap::new() }
    }

    /// `Ok(None)` means the derivative is identically zero.
    fn get(&mut self, j: usize, alpha: &[u32]) -> Result<Option<HomogeneousComponent>> {
        let key = (j, alpha.to_vec());
        if let Some(v) = self.map.get(&key) {
            return Ok(v.clone());
        }
        let c = self
            .sym
            .component(j)
            .ok_or_else(|| Error::InsufficientExpansion(format!("component {j} not available")))?;
        let zeros = vec![0; alpha.len()];
        let v = if c.is_zero() {
            None
        } else if let Some(g) = c.grid() {
            let k: u32 = alpha.iter().sum();
            if k as usize > g.order() {
                return Err(Error::JetExhausted { needed: k as usize, available: g.order() });
            }
            let d = if self.xi { c.derivative(&zeros, alpha)? } else { c.derivative(alpha, &zeros)? };
            Some(if self.xi { d } else { d.scale(minus_i_pow(k)) })
        } else {
            let d = if self.xi { c.derivative(&zeros, alpha)? } else { c.derivative(alpha, &zeros)? };
            if d.is_zero() {
                None
            } else {
                let k: u32 = alpha.iter().sum();
                Some(if self.xi { d } else { d.scale(minus_i_pow(k)) })
            }
        };
        self.map.insert(key, v.clone());
        Ok(v)
    }
}

fn check_compatible(a: &ClassicalSymbol, b: &ClassicalSymbol) -> Result<()> {
    if a.n != b.n {
        return Err(Error::DimMismatch(format!("space dimensions {} and {}", a.n, b.n)));
    }
    if a.q != b.q && a.q != 1 && b.q != 1 {
        return Err(Error::DimMismatch(format!("matrix sizes {} and {}", a.q, b.q)));
    }
    Ok(())
}

fn common_grid(a: &ClassicalSymbol, b: &ClassicalSymbol) -> Result<Option<Arc<SphereGrid>>> {
    match (a.grid(), b.grid()) {
        (Some(g), Some(h)) if !Arc::ptr_eq(&g, &h) && *g != *h => {
            Err(Error::GridResolution("operands live on different sphere grids".into()))
        }
        (Some(g), _) | (None, Some(g)) => Ok(Some(g)),
        _ => Ok(None),
    }
}

/// Sharp product a♯b truncated to `depth` components.
pub fn sharp(a: &ClassicalSymbol, b: &ClassicalSymbol, depth: usize) -> Result<ClassicalSymbol> {
    check_compatible(a, b)?;
    let n = a.n;
    let q = a.q.max(b.q);
    let depth = available_depth(a, available_depth(b, depth));
    let order = a.order + b.order;
    let grid = common_grid(a, b)?;
    let mut da = DerivCache::new(a, true);
    let mut db = DerivCache::new(b, false);
    let mut comps = Vec::with_capacity(depth);
    for k in 0..depth {
        let degree = order - k as f64;
        let mut pieces: Vec<(HomogeneousComponent, HomogeneousComponent, f64)> = Vec::new();
        for j in 0..=k {
            for l in (0..=(k - j)).filter(|l| (k - j - l) % 2 == 0) {
                let total = ((k - j - l) / 2) as u32;
                for alpha in multi_indices(n, total) {
                    let Some(x) = da.get(j, &alpha)? else { continue };
                    let Some(y) = db.get(l, &alpha)? else { continue };
                    pieces.push((x, y, 1.0 / multi_factorial(&alpha)));
                }
            }
        }
        comps.push(combine_products(n, q, degree, pieces, grid.as_ref())?);
    }
    let dmin = match (polynomial_degree(a, true), polynomial_degree(b, false)) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (Some(x), None) | (None, Some(x)) => Some(x),
        _ => None,
    };
    let complete = grid.is_none()
        && a.complete
        && b.complete
        && dmin.is_some_and(|d| last_nonzero(a) + last_nonzero(b) + 2 * (d as usize) < depth);
    let mut out = ClassicalSymbol::new(n, q, order, comps, complete)?;
    out.excision = a.excision;
    Ok(out)
}

/// Σ c·x·y over the given pieces, in ring form when possible, else on the grid.
fn combine_products(
    n: usize,
    q: usize,
    degree: C64,
    pieces: Vec<(HomogeneousComponent, HomogeneousComponent, f64)>,
    grid: Option<&Arc<SphereGrid>>,
) -> Result<HomogeneousComponent> {
    let all_ring = pieces.iter().all(|(x, y, _)| x.is_ring() && y.is_ring());
    if all_ring {
        let mut terms: Vec<SymbolTerm> = Vec::new();
        for (x, y, c) in &pieces {
            let p = x.mul_ring(y).expect("ring operands");
            for mut t in p.terms().unwrap_or(&[]).iter().cloned() {
                t.coeff *= C64::new(*c, 0.0);
                if t.q() != q {
                    t.coeff = CMat::identity(q, q) * t.coeff[(0, 0)];
                }
                terms.push(t);
            }
        }
        let mut comp = HomogeneousComponent::zero(n, q, degree);
        if !terms.is_empty() {
            comp = HomogeneousComponent::ring(n, q, degree, terms)?;
        }
        return Ok(comp);
    }
    let grid = grid.expect("grid operands imply a grid");
    let order = pieces
        .iter()
        .flat_map(|(x, y, _)| [x.grid().map(|g| g.order()), y.grid().map(|g| g.order())])
        .flatten()
        .min()
        .unwrap_or(0);
    let pieces: Vec<(GridComponent, GridComponent, f64)> = pieces
        .iter()
        .map(|(x, y, c)| Ok((x.to_grid(grid, order)?, y.to_grid(grid, order)?, *c)))
        .collect::<Result<_>>()?;
    let nvars = 2 * n;
    let jets: Vec<Jet> = (0..grid.len())
        .into_par_iter()
        .map(|k| {
            let mut acc = Jet::zero(nvars, q, order);
            for (x, y, c) in &pieces {
                acc.add_scaled(&x.jets[k].mul(&y.jets[k]), C64::new(*c, 0.0));
            }
            acc
        })
        .collect();
    Ok(HomogeneousComponent::from_grid(n, GridComponent { degree, grid: grid.clone(), q, jets }))
}

/// Formal adjoint a* truncated to `depth` components.
pub fn adjoint(a: &ClassicalSymbol, depth: usize) -> Result<ClassicalSymbol> {
    let n = a.n;
    let depth = available_depth(a, depth);
    let order = a.order.conj();
    let dag: Vec<HomogeneousComponent> = a.components.iter().map(|c| c.adjoint()).collect();
    let mut comps = Vec::with_capacity(depth);
    for k in 0..depth {
        let degree = order - k as f64;
        let mut acc = HomogeneousComponent::zero(n, a.q, degree);
        for j in 0..=k {
            let Some(c) = dag.get(j) else { continue };
            if c.is_zero() {
                continue;
            }
            if (k - j) % 2 == 1 {
                continue;
            }
            let total = ((k - j) / 2) as u32;
            if let Some(g) = c.grid() {
                if 2 * total as usize > g.order() {
                    return Err(Error::JetExhausted { needed: 2 * total as usize, available: g.order() });
                }
            }
            for alpha in multi_indices(n, total) {
                let d = c.derivative(&alpha, &alpha)?;
                if d.is_zero() {
                    continue;
                }
                let coef = minus_i_pow(total) / multi_factorial(&alpha);
                acc = acc.add(&d.scale(coef))?;
            }
        }
        comps.push(acc);
    }
    let complete = match polynomial_degree(a, true) {
        Some(d) => last_nonzero(a) + 2 * (d as usize) < depth,
        None => false,
    };
    let mut out = ClassicalSymbol::new(n, a.q, order, comps, complete)?;
    out.excision = a.excision;
    Ok(out)
}

/// Samples of the principal symbol a_{(m)} on the grid.
pub fn principal_restrict(a: &ClassicalSymbol, grid: &Arc<SphereGrid>) -> Result<GridComponent> {
    a.principal()?.to_grid(grid, 0)
}

/// (elliptic?, margin): margin is the smallest singular value of a_{(m)} over the grid.
pub fn is_elliptic(a: &ClassicalSymbol, tol: f64, grid: &Arc<SphereGrid>) -> (bool, f64) {
    let Ok(p) = principal_restrict(a, grid) else { return (false, 0.0) };
    let (smin, smax) = p
        .values()
        .par_iter()
        .map(|m| {
            let s = singular_values(m);
            let lo = s.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = s.iter().copied().fold(0.0, f64::max);
            (lo, hi)
        })
        .reduce(|| (f64::INFINITY, 0.0), |x, y| (x.0.min(y.0), x.1.max(y.1)));
    (smin > tol * smax.max(f64::MIN_POSITIVE), smin)
}

/// (Λ-elliptic?, margin): margin is the smallest distance from an eigenvalue
/// of a_{(m)}(ω) to the sector, over all grid nodes.
pub fn is_lambda_elliptic(a: &ClassicalSymbol, sector: &Sector, tol: f64, grid: &Arc<SphereGrid>) -> (bool, f64) {
    let Ok(p) = principal_restrict(a, grid) else { return (false, 0.0) };
    let (dmin, emax) = p
        .values()
        .par_iter()
        .map(|m| {
            let ev = eigenvalues(m);
            let d = ev.iter().map(|l| sector.distance(*l)).fold(f64::INFINITY, f64::min);
            let e = ev.iter().map(|l| l.norm()).fold(0.0, f64::max);
            (d, e)
        })
        .reduce(|| (f64::INFINITY, 0.0), |x, y| (x.0.min(y.0), x.1.max(y.1)));
    (dmin > tol * emax.max(f64::MIN_POSITIVE), dmin)
}

/// Leading component `C ρ^{2s}` with invertible C, if it has that form.
fn radial_leading(c: &HomogeneousComponent) -> Option<(CMat, C64)> {
    let terms = c.terms()?;
    let [t] = terms else { return None };
    if t.beta.iter().chain(&t.alpha).any(|&k| k != 0) {
        return None;
    }
    Some((inverse(&t.coeff)?, t.s_exp))
}

/// Elliptic parametrix b with a♯b = 1 modulo components of index ≥ depth.
///
/// Radial leading parts invert in the ring; anything else is inverted node by
/// node on `grid` with jets of order `jet_order`.
pub fn parametrix(
    a: &ClassicalSymbol,
    depth: usize,
    grid: &Arc<SphereGrid>,
    jet_order: usize,
) -> Result<ClassicalSymbol> {
    let (ok, margin) = is_elliptic(a, DEFAULT_ELLIPTIC_TOL, grid);
    if !ok {
        return Err(Error::NotElliptic { margin });
    }
    let depth = available_depth(a, depth);
    let lead = a.principal()?;
    if a.is_ring() {
        if let Some((cinv, s)) = radial_leading(lead) {
            return parametrix_ring(a, depth, cinv, s);
        }
    }
    parametrix_grid(a, depth, grid, jet_order)
}

fn parametrix_ring(a: &ClassicalSymbol, depth: usize, cinv: CMat, s: C64) -> Result<ClassicalSymbol> {
    let n = a.n;
    let q = a.q;
    let order = -a.order;
    let b0 = HomogeneousComponent::ring(n, q, order, vec![SymbolTerm::radial(n, cinv.clone(), -s)])?;
    let mut b = ClassicalSymbol::new(n, q, order, vec![b0.clone()], false)?;
    for k in 1..depth {
        // component k of a♯b with b_k = 0, then b_k = -a_0^{-1} · that
        let mut partial = b.clone();
        partial.components.push(HomogeneousComponent::zero(n, q, order - k as f64));
        let prod = sharp(a, &partial, k + 1)?;
        let rk = &prod.components[k];
        let bk = b0.mul_ring(rk).expect("ring").scale(C64::new(-1.0, 0.0));
        b.components.push(HomogeneousComponent { degree: order - k as f64, ..bk });
    }
    b.excision = a.excision;
    Ok(b)
}

fn parametrix_grid(
    a: &ClassicalSymbol,
    depth: usize,
    grid: &Arc<SphereGrid>,
    jet_order: usize,
) -> Result<ClassicalSymbol> {
    let n = a.n;
    let q = a.q;
    let nvars = 2 * n;
    let order = -a.order;
    let work = jet_order + depth.saturating_sub(1);
    if let Some(g) = a.grid_jet_order() {
        if g < work {
            return Err(Error::JetExhausted { needed: work, available: g });
        }
    }
    let a_comps: Vec<GridComponent> = (0..depth)
        .map(|j| a.component(j).expect("within depth").to_grid(grid, work))
        .collect::<Result<_>>()?;
    let per_node: Vec<Vec<Jet>> = (0..grid.len())
        .into_par_iter()
        .map(|node| {
            let aj: Vec<&Jet> = a_comps.iter().map(|g| &g.jets[node]).collect();
            let b0 = aj[0].inverse().ok_or(Error::NotElliptic { margin: 0.0 })?;
            let mut bs: Vec<Jet> = vec![b0.clone()];
            for k in 1..depth {
                let mut acc: Option<Jet> = None;
                for j in 0..=k {
                    for l in (0..k.min(k - j + 1)).filter(|l| (k - j - l) % 2 == 0) {
                        let total = ((k - j - l) / 2) as u32;
                        for alpha in multi_indices(n, total) {
                            let mut xi = vec![0u8; nvars];
                            let mut xx = vec![0u8; nvars];
                            for i in 0..n {
                                xi[n + i] = alpha[i] as u8;
                                xx[i] = alpha[i] as u8;
                            }
                            let da = aj[j].diff_multi(&xi)?;
                            let dbl = bs[l].diff_multi(&xx)?;
                            let term = da.mul(&dbl).scale(minus_i_pow(total) / multi_factorial(&alpha));
                            acc = Some(match acc {
                                None => term,
                                Some(s) => s.add(&term),
                            });
                        }
                    }
                }
                let bk = b0.mul(&acc.expect("nonempty sum")).scale(C64::new(-1.0, 0.0));
                bs.push(bk);
            }
            Ok(bs.into_iter().map(|j| j.truncate(jet_order)).collect())
        })
        .collect::<Result<_>>()?;
    let comps = (0..depth)
        .map(|k| {
            let jets = per_node.iter().map(|v| v[k].clone()).collect();
            HomogeneousComponent::from_grid(
                n,
                GridComponent { degree: order - k as f64, grid: grid.clone(), q, jets },
            )
        })
        .collect();
    let mut b = ClassicalSymbol::new(n, q, order, comps, false)?;
    b.excision = a.excision;
    Ok(b)
}

/// Largest deviation of components `0..depth` of `a` from those of `b`,
/// sampled on the grid.
pub fn max_component_deviation(
    a: &ClassicalSymbol,
    b: &ClassicalSymbol,
    depth: usize,
    grid: &SphereGrid,
) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for k in 0..depth {
        let ca = a.component(k).ok_or_else(|| Error::InsufficientExpansion(format!("component {k}")))?;
        let cb = b.component(k).ok_or_else(|| Error::InsufficientExpansion(format!("component {k}")))?;
        for node in &grid.nodes {
            let d = ca.eval(node)? - cb.eval(node)?;
            worst = worst.max(max_abs(&d));
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cmat::{diag, re, scalar};

    fn poly(n: usize, terms: &[(f64, f64, u32, u32)]) -> ClassicalSymbol {
        // (re, im, beta, alpha) monomials in n = 1, grouped by degree
        let maxdeg = terms.iter().map(|t| t.2 + t.3).max().unwrap_or(0);
        let comps = (0..=maxdeg)
            .rev()
            .map(|d| {
                let ts = terms
                    .iter()
                    .filter(|t| t.2 + t.3 == d)
                    .map(|t| SymbolTerm::new(scalar(1, C64::new(t.0, t.1)), vec![t.2], vec![t.3], re(0.0)))
                    .collect();
                HomogeneousComponent::ring(n, 1, re(d as f64), ts).unwrap()
            })
            .collect();
        ClassicalSymbol::new(n, 1, re(maxdeg as f64), comps, true).unwrap()
    }

    #[test]
    fn xi_sharp_x() {
        let xi = poly(1, &[(1.0, 0.0, 0, 1)]);
        let x = poly(1, &[(1.0, 0.0, 1, 0)]);
        let p = sharp(&xi, &x, 4).unwrap();
        let pt = [0.3, 0.7];
        assert!((p.components[0].eval(&pt).unwrap()[(0, 0)] - re(0.21)).norm() < 1e-15);
        assert!(p.components[1].is_zero());
        assert!((p.components[2].eval(&pt).unwrap()[(0, 0)] + I).norm() < 1e-15);
        assert!(p.complete);
    }

    #[test]
    fn sector_distance() {
        let s = Sector::new(PI / 4.0, 3.0 * PI / 4.0).unwrap();
        assert_eq!(s.distance(C64::new(0.0, 1.0)), 0.0);
        assert!((s.distance(C64::new(1.0, 0.0)) - (PI / 4.0).sin()).abs() < 1e-15);
        assert!((s.distance(C64::new(0.0, -1.0)) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn ellipticity_margins() {
        let grid = Arc::new(SphereGrid::circle(64).unwrap());
        let ho = ClassicalSymbol::harmonic_oscillator(1);
        let (ok, m) = is_elliptic(&ho, 1e-9, &grid);
        assert!(ok && (m - 0.5).abs() < 1e-14);
        let x = poly(1, &[(1.0, 0.0, 1, 0)]);
        assert!(!is_elliptic(&x, 1e-9, &grid).0);
        let t = SymbolTerm::radial(1, diag(&[re(1.0), re(-1.0)]), re(1.0));
        let d = ClassicalSymbol::single(HomogeneousComponent::ring(1, 2, re(2.0), vec![t]).unwrap());
        let (ok, m) = is_elliptic(&d, 1e-9, &grid);
        assert!(ok && (m - 1.0).abs() < 1e-14);
        let upper = Sector::new(PI / 4.0, 3.0 * PI / 4.0).unwrap();
        assert!(is_lambda_elliptic(&d, &upper, 1e-9, &grid).0);
        let right = Sector::new(-PI / 4.0, PI / 4.0).unwrap();
        assert!(!is_lambda_elliptic(&ho, &right, 1e-9, &grid).0);
    }

    #[test]
    fn ho_parametrix_leading() {
        let grid = Arc::new(SphereGrid::circle(32).unwrap());
        let ho = ClassicalSymbol::harmonic_oscillator(1);
        let b = parametrix(&ho, 6, &grid, 0).unwrap();
        let v = b.components[0].eval(&[0.6, 0.8]).unwrap()[(0, 0)];
        assert!((v - re(2.0)).norm() < 1e-14);
        let prod = sharp(&ho, &b, 6).unwrap();
        let one = ClassicalSymbol::identity(1, 1);
        assert!(max_component_deviation(&prod, &one, 6, &grid).unwrap() < 1e-12);
    }
}
