//! Complex powers and sectorial projections by contour integration of the
//! resolvent parametrix.

use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::calculus::{is_elliptic, is_lambda_elliptic, max_component_deviation, sharp, Sector, DEFAULT_ELLIPTIC_TOL};
use crate::cmat::{eigenvalues, C64};
use crate::error::{Error, Result};
use crate::resolvent::{contour_integral, ContourKind, ContourSpec, ResolventWorkspace, DEFAULT_ARC_PANELS};
use crate::symring::{ClassicalSymbol, ExactSymbol, GridComponent, HomogeneousComponent, Jet, SphereGrid};

/// Half-width of the sector around a ray used for Λ-ellipticity checks.
const RAY_HALF_WIDTH: f64 = 1e-3;

#[derive(Debug, Clone, Serialize)]
pub struct PowerOptions {
    /// Number of homogeneous components to compute.
    pub depth: usize,
    /// Jet order stored at each grid node.
    pub jet_order: usize,
    #[serde(skip)]
    pub grid: Option<Arc<SphereGrid>>,
    pub eps: Option<f64>,
    pub r_max: f64,
    pub ray_panels: usize,
    pub gauss_order: usize,
    pub arc_panels: usize,
}

impl Default for PowerOptions {
    fn default() -> Self {
        Self {
            depth: crate::calculus::DEFAULT_DEPTH,
            jet_order: 0,
            grid: None,
            eps: None,
            r_max: 1e6,
            ray_panels: 24,
            gauss_order: 16,
            arc_panels: DEFAULT_ARC_PANELS,
        }
    }
}

impl PowerOptions {
    pub fn grid_for(&self, n: usize) -> Result<Arc<SphereGrid>> {
        match &self.grid {
            Some(g) if g.n == n => Ok(g.clone()),
            Some(g) => Err(Error::DimMismatch(format!("grid is for n = {}, symbol has n = {n}", g.n))),
            None => Ok(Arc::new(SphereGrid::default_for(n)?)),
        }
    }

    fn contour(&self, kind: ContourKind, eps: f64) -> ContourSpec {
        ContourSpec {
            kind,
            eps,
            r_max: self.r_max,
            ray_panels: self.ray_panels,
            gauss_order: self.gauss_order,
            arc_panels: self.arc_panels,
        }
    }
}

/// A contour-produced symbol together with its quadrature diagnostics.
#[derive(Debug, Clone)]
pub struct PowerOutput {
    pub symbol: ClassicalSymbol,
    /// Largest modelled tail contribution over all nodes.
    pub tail_uncertainty: f64,
    /// Inner radius ε actually used (0 when no contour was needed).
    pub eps: f64,
}

/// Default ε: half the smallest principal eigenvalue modulus, capped at 1/2.
pub fn default_eps(a: &ClassicalSymbol, grid: &SphereGrid) -> Result<f64> {
    let lead = a.principal()?;
    let min_mod = grid
        .nodes
        .par_iter()
        .map(|p| Ok(eigenvalues(&lead.eval(p)?).iter().map(|l| l.norm()).fold(f64::INFINITY, f64::min)))
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    Ok((0.5 * min_mod).min(0.5))
}

fn check_ray(a: &ClassicalSymbol, theta: f64, grid: &Arc<SphereGrid>) -> Result<()> {
    let sector = Sector::around_ray(theta, RAY_HALF_WIDTH);
    let (ok, margin) = is_lambda_elliptic(a, &sector, DEFAULT_ELLIPTIC_TOL, grid);
    if !ok {
        return Err(Error::NotLambdaElliptic { margin });
    }
    check_assumption_a(a, theta)
}

/// Spectral part of assumption (A) for registered symbols whose spectrum is
/// known in closed form: no eigenvalue on the ray θ.
fn check_assumption_a(a: &ClassicalSymbol, theta: f64) -> Result<()> {
    let scales = match &a.exact {
        Some(ExactSymbol::Ho) => vec![1.0],
        Some(ExactSymbol::DiagHo { scales }) => scales.clone(),
        _ => return Ok(()),
    };
    for c in scales {
        let arg = if c > 0.0 { 0.0 } else { PI };
        let d = (arg - theta).rem_euclid(2.0 * PI);
        if d < 1e-12 || (2.0 * PI - d) < 1e-12 {
            return Err(Error::AssumptionA(format!("eigenvalues of sign {c:+} lie on the ray θ = {theta}")));
        }
    }
    Ok(())
}

fn require_positive_order(a: &ClassicalSymbol) -> Result<()> {
    if a.order.re <= 0.0 {
        return Err(Error::Invalid(format!("complex powers need Re(order) > 0, got {}", a.order)));
    }
    Ok(())
}

/// Integrate λ^z b_{-m-k}(ω, λ) over the contour at every grid node.
fn integrate_resolvent(
    a: &ClassicalSymbol,
    z: C64,
    spec: &ContourSpec,
    grid: &Arc<SphereGrid>,
    depth: usize,
    jet_order: usize,
    degree_of: impl Fn(usize) -> C64,
) -> Result<(Vec<HomogeneousComponent>, f64)> {
    spec.validate()?;
    let nvars = 2 * a.n;
    let q = a.q;
    let per_node: Vec<(Vec<Jet>, f64)> = grid
        .nodes
        .par_iter()
        .map(|omega| {
            let ws = ResolventWorkspace::new(a, omega, depth, jet_order)?;
            let template: Vec<Jet> = (0..depth).map(|_| Jet::zero(nvars, q, jet_order)).collect();
            let sizes: Vec<usize> = template.iter().map(|j| j.raw().len()).collect();
            let integral = contour_integral(spec, z, |lambda| {
                let r = ws.compute(lambda)?;
                let mut flat = Vec::with_capacity(sizes.iter().sum());
                for c in &r.components {
                    flat.extend_from_slice(c.raw());
                }
                Ok(flat)
            })?;
            let mut jets = template;
            let mut offset = 0;
            for (j, size) in jets.iter_mut().zip(&sizes) {
                j.raw_mut().copy_from_slice(&integral.values[offset..offset + size]);
                offset += size;
            }
            Ok((jets, integral.tail_uncertainty))
        })
        .collect::<Result<_>>()?;
    let unc = per_node.iter().map(|(_, u)| *u).fold(0.0, f64::max);
    let comps = (0..depth)
        .map(|k| {
            let jets = per_node.iter().map(|(v, _)| v[k].clone()).collect();
            HomogeneousComponent::from_grid(
                a.n,
                GridComponent { degree: degree_of(k), grid: grid.clone(), q, jets },
            )
        })
        .collect();
    Ok((comps, unc))
}

/// Largest number of ξ-derivatives a sharp product with `a` on the left can take.
pub fn xi_derivatives_needed(a: &ClassicalSymbol, depth: usize) -> usize {
    let half = depth.saturating_sub(1) / 2;
    if !a.complete {
        return half;
    }
    let mut deg = 0usize;
    for c in &a.components {
        match c.terms() {
            Some(ts) => {
                for t in ts {
                    if !t.is_polynomial() {
                        return half;
                    }
                    deg = deg.max(t.xi_degree() as usize);
                }
            }
            None => return half,
        }
    }
    deg.min(half)
}

/// a_θ^z with diagnostics. Re z ≥ 0 goes through a^{♯k} ♯ a_θ^{z−k},
/// k = ⌊Re z⌋ + 1.
pub fn complex_power_with_report(
    a: &ClassicalSymbol,
    z: C64,
    theta: f64,
    opts: &PowerOptions,
) -> Result<PowerOutput> {
    require_positive_order(a)?;
    let grid = opts.grid_for(a.n)?;
    let (ok, margin) = is_elliptic(a, DEFAULT_ELLIPTIC_TOL, &grid);
    if !ok {
        return Err(Error::NotElliptic { margin });
    }
    check_ray(a, theta, &grid)?;
    if z.re >= 0.0 {
        let k = z.re.floor() as usize + 1;
        let mut ak = a.truncated(opts.depth);
        for _ in 1..k {
            ak = sharp(&ak, a, opts.depth)?;
        }
        let extra = xi_derivatives_needed(&ak, opts.depth);
        let inner_opts = PowerOptions { jet_order: opts.jet_order + extra, grid: Some(grid), ..opts.clone() };
        let inner = complex_power_with_report(a, z - k as f64, theta, &inner_opts)?;
        let mut symbol = sharp(&ak, &inner.symbol, opts.depth)?;
        symbol = truncate_jets(&symbol, opts.jet_order);
        return Ok(PowerOutput { symbol, ..inner });
    }
    let eps = match opts.eps {
        Some(e) => e,
        None => default_eps(a, &grid)?,
    };
    let spec = opts.contour(ContourKind::Keyhole { theta }, eps);
    let order = a.order * z;
    let (comps, unc) = integrate_resolvent(a, z, &spec, &grid, opts.depth, opts.jet_order, |k| order - k as f64)?;
    let mut symbol = ClassicalSymbol::new(a.n, a.q, order, comps, false)?;
    symbol.excision = a.excision;
    Ok(PowerOutput { symbol, tail_uncertainty: unc, eps })
}

pub fn complex_power(a: &ClassicalSymbol, z: C64, theta: f64, opts: &PowerOptions) -> Result<ClassicalSymbol> {
    Ok(complex_power_with_report(a, z, theta, opts)?.symbol)
}

fn truncate_jets(s: &ClassicalSymbol, order: usize) -> ClassicalSymbol {
    let mut out = s.clone();
    for c in out.components.iter_mut() {
        if let Some(g) = c.grid() {
            if g.order() > order {
                let g = GridComponent { jets: g.jets.iter().map(|j| j.truncate(order)).collect(), ..g.clone() };
                *c = HomogeneousComponent::from_grid(s.n, g);
            }
        }
    }
    out
}

/// Π_{θ,θ'}(a) = a ♯ (1/2πi)∫ λ^{-1} (λ − a)^{-♯} dλ over the contour
/// enclosing the sector swept counterclockwise from θ' to θ.
pub fn sectorial_projection_with_report(
    a: &ClassicalSymbol,
    theta: f64,
    theta_prime: f64,
    opts: &PowerOptions,
) -> Result<PowerOutput> {
    require_positive_order(a)?;
    let grid = opts.grid_for(a.n)?;
    let (ok, margin) = is_elliptic(a, DEFAULT_ELLIPTIC_TOL, &grid);
    if !ok {
        return Err(Error::NotElliptic { margin });
    }
    check_ray(a, theta, &grid)?;
    check_ray(a, theta_prime, &grid)?;
    let eps = match opts.eps {
        Some(e) => e,
        None => default_eps(a, &grid)?,
    };
    let spec = opts.contour(ContourKind::RayArcRay { theta, theta_prime }, eps);
    let lead = a.truncated(opts.depth);
    let extra = xi_derivatives_needed(&lead, opts.depth);
    let inner_jet = opts.jet_order + extra;
    let order = -a.order;
    let (comps, unc) =
        integrate_resolvent(a, C64::new(-1.0, 0.0), &spec, &grid, opts.depth, inner_jet, |k| order - k as f64)?;
    let mut q = ClassicalSymbol::new(a.n, a.q, order, comps, false)?;
    q.excision = a.excision;
    let symbol = truncate_jets(&sharp(&lead, &q, opts.depth)?, opts.jet_order);
    Ok(PowerOutput { symbol, tail_uncertainty: unc, eps })
}

pub fn sectorial_projection(
    a: &ClassicalSymbol,
    theta: f64,
    theta_prime: f64,
    opts: &PowerOptions,
) -> Result<ClassicalSymbol> {
    Ok(sectorial_projection_with_report(a, theta, theta_prime, opts)?.symbol)
}

/// max_k max_ω |(a^z ♯ a^s − a^{z+s})_k(ω)| over components k < depth.
pub fn power_additivity_check(a: &ClassicalSymbol, z: C64, s: C64, theta: f64, opts: &PowerOptions) -> Result<f64> {
    let grid = opts.grid_for(a.n)?;
    let half = opts.depth.saturating_sub(1) / 2;
    let jet_opts = PowerOptions { jet_order: half, grid: Some(grid.clone()), ..opts.clone() };
    let az = complex_power(a, z, theta, &jet_opts)?;
    let as_ = complex_power(a, s, theta, &jet_opts)?;
    let plain = PowerOptions { grid: Some(grid.clone()), ..opts.clone() };
    let azs = complex_power(a, z + s, theta, &plain)?;
    let prod = sharp(&az, &as_, opts.depth)?;
    max_component_deviation(&prod, &azs, opts.depth, &grid)
}

/// max_k max_ω |(Π ♯ Π − Π)_k(ω)| for Π_{θ,θ'}(a) computed with enough jets.
pub fn projection_idempotency_defect(
    a: &ClassicalSymbol,
    theta: f64,
    theta_prime: f64,
    opts: &PowerOptions,
) -> Result<f64> {
    let half = opts.depth.saturating_sub(1) / 2;
    let jet_opts = PowerOptions { jet_order: opts.jet_order.max(half), ..opts.clone() };
    let p = sectorial_projection(a, theta, theta_prime, &jet_opts)?;
    idempotency_defect(&p, opts.depth)
}

/// max_k max_ω |(Π ♯ Π − Π)_k(ω)| over components k < depth.
pub fn idempotency_defect(p: &ClassicalSymbol, depth: usize) -> Result<f64> {
    let grid = p.grid().ok_or_else(|| Error::Invalid("projection has no grid components".into()))?;
    let pp = sharp(p, p, depth)?;
    max_component_deviation(&pp, p, depth, &grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cmat::re;

    fn small_opts() -> PowerOptions {
        PowerOptions { depth: 3, grid: Some(Arc::new(SphereGrid::circle(16).unwrap())), ..Default::default() }
    }

    #[test]
    fn ho_inverse_leading_component() {
        let a = ClassicalSymbol::harmonic_oscillator(1);
        let p = complex_power(&a, re(-1.0), PI / 2.0, &small_opts()).unwrap();
        let v = p.components[0].eval(&[0.6, 0.8]).unwrap()[(0, 0)];
        assert!((v - re(2.0)).norm() < 1e-8, "{v}");
    }

    #[test]
    fn power_rejects_ray_through_spectrum() {
        let a = ClassicalSymbol::harmonic_oscillator(1);
        let e = complex_power(&a, re(-1.0), 0.0, &small_opts()).unwrap_err();
        assert!(matches!(e, Error::NotLambdaElliptic { .. }));
    }
}
