//! Wodzicki residue and the Kontsevich–Vishik finite-part integral.

use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::cmat::{trace, C64};
use crate::error::{Error, Result};
use crate::fit::{laurent_fit, symmetric_points};
use crate::quadrature::{graded_unit_rule, GaussLegendre};
use crate::symring::{ClassicalSymbol, ExcisionProfile, HomogeneousComponent, SphereGrid};

#[derive(Debug, Clone, Serialize)]
pub struct TrOptions {
    #[serde(skip)]
    pub grid: Option<Arc<SphereGrid>>,
    /// Gauss order per radial panel inside the unit ball.
    pub ball_order: usize,
    /// Halving levels of the graded exterior rule in u = 1/r.
    pub exterior_levels: usize,
    pub exterior_order: usize,
}

impl Default for TrOptions {
    fn default() -> Self {
        Self { grid: None, ball_order: 32, exterior_levels: 40, exterior_order: 16 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrValue {
    pub value: C64,
    /// Truncation / tail uncertainty estimate.
    pub uncertainty: f64,
    /// Number of expansion terms subtracted in the exterior.
    pub p: usize,
}

fn norm_factor(n: usize) -> f64 {
    (2.0 * PI).powi(-(n as i32))
}

fn grid_for(c: &HomogeneousComponent, fallback: &Arc<SphereGrid>) -> Arc<SphereGrid> {
    c.grid().map_or_else(|| fallback.clone(), |g| g.grid.clone())
}

fn default_grid(a: &ClassicalSymbol, opts: Option<&Arc<SphereGrid>>) -> Result<Arc<SphereGrid>> {
    if let Some(g) = a.grid() {
        return Ok(g);
    }
    match opts {
        Some(g) => Ok(g.clone()),
        None => Ok(Arc::new(SphereGrid::default_for(a.n)?)),
    }
}

/// ∫_{S^{2n-1}} Tr c(ω) dω.
pub fn sphere_trace(c: &HomogeneousComponent, grid: &Arc<SphereGrid>) -> Result<C64> {
    if c.is_zero() {
        return Ok(C64::new(0.0, 0.0));
    }
    let g = grid_for(c, grid);
    let vals: Vec<C64> = g.nodes.par_iter().map(|p| Ok(trace(&c.eval(p)?))).collect::<Result<_>>()?;
    Ok(vals.iter().zip(&g.weights).map(|(v, w)| v * w).sum())
}

/// Index j with m − j = −2n, if the order is an integer ≥ −2n.
fn residue_index(order: C64, n: usize) -> Option<usize> {
    let j = order + 2.0 * n as f64;
    (j.im == 0.0 && j.re >= 0.0 && j.re.fract() == 0.0).then_some(j.re as usize)
}

/// Res(a) = (2π)^{-n} ∫_{S^{2n-1}} Tr a_{(-2n)}(ω) dω.
pub fn wodzicki_res(a: &ClassicalSymbol, grid: Option<&Arc<SphereGrid>>) -> Result<C64> {
    let Some(j) = residue_index(a.order, a.n) else { return Ok(C64::new(0.0, 0.0)) };
    let Some(c) = a.component(j) else {
        return Err(Error::InsufficientExpansion(format!(
            "degree −{} component is index {j}, expansion has {}",
            2 * a.n,
            a.depth()
        )));
    };
    let g = default_grid(a, grid)?;
    Ok(sphere_trace(&c, &g)? * norm_factor(a.n))
}

/// Smallest p with Re(order) − p < −2n.
pub fn minimal_p(order: C64, n: usize) -> usize {
    let t = order.re + 2.0 * n as f64;
    if t < 0.0 {
        0
    } else {
        t.floor() as usize + 1
    }
}

/// ∫_a^b χ(r) r^e dr (χ ≡ 1 when `excised` is false).
fn radial_integral(a: f64, b: f64, e: C64, chi: &ExcisionProfile, excised: bool, order: usize) -> C64 {
    if b <= a {
        return C64::new(0.0, 0.0);
    }
    let power = |r: f64| (e * r.ln()).exp();
    let antider = |lo: f64, hi: f64| {
        let e1 = e + 1.0;
        (power(hi) * hi - power(lo) * lo) / e1
    };
    if !excised {
        return antider(a, b);
    }
    let gl = GaussLegendre::cached(order);
    let mut acc = C64::new(0.0, 0.0);
    let lo = a.max(chi.r0);
    if lo >= b {
        return acc;
    }
    let mid = b.min(chi.r1);
    if mid > lo {
        for (r, w) in gl.on_interval(lo, mid) {
            acc += power(r) * (w * chi.chi(r));
        }
    }
    let start = lo.max(chi.r1);
    if b > start {
        acc += antider(start, b);
    }
    acc
}

/// ∫_1^∞ χ(r) r^e dr for Re e < −1.
fn exterior_radial(e: C64, chi: &ExcisionProfile, order: usize) -> C64 {
    let start = chi.r1.max(1.0);
    let mut acc = radial_integral(1.0, start, e, chi, true, order);
    acc += -(e * start.ln()).exp() * start / (e + 1.0);
    acc
}

fn check_order(a: &ClassicalSymbol, p: usize) -> Result<()> {
    if residue_index(a.order, a.n).is_some() {
        return Err(Error::IntegerOrderPole(a.order));
    }
    let need = minimal_p(a.order, a.n);
    if p < need {
        return Err(Error::Invalid(format!(
            "p = {p} too small for order {}: need Re(order) − p < −{}",
            a.order,
            2 * a.n
        )));
    }
    if !a.complete && a.depth() < p {
        return Err(Error::InsufficientExpansion(format!("need {p} components, have {}", a.depth())));
    }
    Ok(())
}

/// TR(a) with `p` expansion terms subtracted in the exterior.
pub fn kv_tr(a: &ClassicalSymbol, p: usize, opts: &TrOptions) -> Result<TrValue> {
    check_order(a, p)?;
    let grid = default_grid(a, opts.grid.as_ref())?;
    if a.exact.is_some() {
        kv_tr_exact(a, p, &grid, opts)
    } else {
        kv_tr_glued(a, p, &grid, opts)
    }
}

/// TR with the smallest admissible p.
pub fn kv_tr_auto(a: &ClassicalSymbol, opts: &TrOptions) -> Result<TrValue> {
    kv_tr(a, minimal_p(a.order, a.n), opts)
}

/// Glued symbols separate into sphere traces times radial integrals.
fn kv_tr_glued(a: &ClassicalSymbol, p: usize, grid: &Arc<SphereGrid>, opts: &TrOptions) -> Result<TrValue> {
    let n = a.n;
    let chi = &a.excision;
    let mut value = C64::new(0.0, 0.0);
    let mut tail = [0.0f64; 2];
    for (j, c) in a.components.iter().enumerate() {
        if c.is_zero() || c.is_polynomial() {
            // polynomial parts: ball integral and sphere correction cancel exactly
            continue;
        }
        let s = sphere_trace(c, grid)?;
        let e = c.degree + (2 * n - 1) as f64;
        let mut r = radial_integral(0.0, 1.0, e, chi, true, opts.ball_order);
        if j < p {
            r -= 1.0 / (e + 1.0);
        } else {
            if e.re + 1.0 >= 0.0 {
                return Err(Error::TailDivergence(format!("component {j} has degree {}", c.degree)));
            }
            r += exterior_radial(e, chi, opts.ball_order);
        }
        let contrib = s * r * norm_factor(n);
        value += contrib;
        if j + 2 >= a.depth() {
            tail[j + 2 - a.depth()] = contrib.norm();
        }
    }
    // odd-indexed components often vanish, so look at the last two
    let uncertainty = if a.complete { 0.0 } else { 2.0 * tail[0].max(tail[1]) };
    Ok(TrValue { value, uncertainty, p })
}

fn kv_tr_exact(a: &ClassicalSymbol, p: usize, grid: &Arc<SphereGrid>, opts: &TrOptions) -> Result<TrValue> {
    let n = a.n;
    let chi = a.excision;
    let comps: Vec<HomogeneousComponent> = (0..p).map(|j| a.component(j).expect("checked")).collect();
    // sphere corrections
    let mut corr = C64::new(0.0, 0.0);
    for c in &comps {
        if c.is_zero() {
            continue;
        }
        let e = c.degree + (2 * n - 1) as f64;
        corr += sphere_trace(c, grid)? / (e + 1.0);
    }
    // ball: radial panels split at the excision radii
    let gl = GaussLegendre::cached(opts.ball_order);
    let mut edges = vec![0.0];
    for r in [chi.r0, chi.r1] {
        if r < 1.0 {
            edges.push(r);
        }
    }
    edges.push(1.0);
    let ball_nodes: Vec<(f64, f64)> =
        edges.windows(2).flat_map(|w| gl.on_interval(w[0], w[1]).collect::<Vec<_>>()).collect();
    // exterior in u = 1/r: graded toward 0 below 1/r1, Gauss panels above
    let u_split = (1.0 / chi.r1).min(1.0);
    let (gn, gw, umin) = graded_unit_rule(opts.exterior_levels, opts.exterior_order);
    let mut ext_nodes: Vec<(f64, f64)> = gn.iter().zip(&gw).map(|(x, w)| (x * u_split, w * u_split)).collect();
    if u_split < 1.0 {
        let mut uedges = vec![u_split];
        if 1.0 / chi.r0 > u_split && 1.0 / chi.r0 < 1.0 {
            uedges.push(1.0 / chi.r0);
        }
        uedges.push(1.0);
        for w in uedges.windows(2) {
            ext_nodes.extend(gl.on_interval(w[0], w[1]));
        }
    }
    let umin = umin * u_split;
    let decay = C64::new(p as f64, 0.0) - a.order - (2 * n + 1) as f64;
    let rpow = (2 * n - 1) as i32;
    let per_node: Vec<(C64, C64, C64)> = grid
        .nodes
        .par_iter()
        .map(|omega| {
            let at = |r: f64| omega.iter().map(|w| w * r).collect::<Vec<f64>>();
            let mut ball = C64::new(0.0, 0.0);
            for &(r, w) in &ball_nodes {
                ball += trace(&a.eval_full(&at(r))?) * (w * r.powi(rpow));
            }
            let remainder = |u: f64| -> Result<C64> {
                let r = 1.0 / u;
                let pt = at(r);
                let mut v = trace(&a.eval_full(&pt)?);
                let x = chi.chi(r);
                for c in &comps {
                    if !c.is_zero() {
                        v -= trace(&c.eval(&pt)?) * x;
                    }
                }
                Ok(v * u.powi(-(2 * n as i32) - 1))
            };
            let mut ext = C64::new(0.0, 0.0);
            for &(u, w) in &ext_nodes {
                ext += remainder(u)? * w;
            }
            let tail = remainder(umin)? * umin / (decay + 1.0);
            Ok((ball, ext + tail, tail))
        })
        .collect::<Result<_>>()?;
    let mut ball = C64::new(0.0, 0.0);
    let mut ext = C64::new(0.0, 0.0);
    let mut tail = 0.0;
    for ((b, e, t), w) in per_node.iter().zip(&grid.weights) {
        ball += b * w;
        ext += e * w;
        tail += t.norm() * w;
    }
    if decay.re <= -1.0 {
        return Err(Error::TailDivergence(format!("remainder decays like r^{}", -decay.re - 2.0)));
    }
    let f = norm_factor(n);
    let value = (ball - corr + ext) * f;
    Ok(TrValue { value, uncertainty: tail * f + 1e-14 * value.norm(), p })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PoleFit {
    pub residue: C64,
    pub regular: C64,
    pub residual: f64,
}

/// Fit c₋₁/(z−z0) + c₀ + c₁(z−z0) through the four samples z0 ± h, z0 ± 2h.
pub fn tr_family_pole<F>(family: F, z0: C64, h: f64) -> Result<PoleFit>
where
    F: Fn(C64) -> Result<C64>,
{
    if !(h > 0.0) {
        return Err(Error::FitIllConditioned(format!("step h = {h}")));
    }
    let samples =
        symmetric_points(z0, h).into_iter().map(|z| Ok((z, family(z)?))).collect::<Result<Vec<_>>>()?;
    let fit = laurent_fit(&samples, z0, &[-1, 0, 1])?;
    Ok(PoleFit { residue: fit.coeff(-1), regular: fit.coeff(0), residual: fit.residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cmat::{re, scalar};
    use crate::symring::{ExactSymbol, SymbolTerm};

    fn radial_symbol(c: f64, s: f64) -> ClassicalSymbol {
        let t = SymbolTerm::radial(1, scalar(1, re(c)), re(s));
        ClassicalSymbol::single(HomogeneousComponent::ring(1, 1, re(2.0 * s), vec![t]).unwrap())
    }

    #[test]
    fn residue_of_two_over_rho_squared() {
        let b = radial_symbol(2.0, -1.0);
        assert!((wodzicki_res(&b, None).unwrap() - re(2.0)).norm() < 1e-12);
        assert_eq!(wodzicki_res(&ClassicalSymbol::identity(1, 1), None).unwrap(), re(0.0));
    }

    #[test]
    fn tr_of_inverse_square() {
        let e = ExactSymbol::ShiftedQuadraticPower { s: [-2.0, 0.0], shift: 1.0, scale: 1.0 };
        let a = ClassicalSymbol::from_exact(e, 1, 6).unwrap();
        for p in 0..3 {
            let v = kv_tr(&a, p, &TrOptions::default()).unwrap();
            assert!((v.value - re(0.5)).norm() < 1e-10, "p={p}: {}", v.value);
        }
    }

    #[test]
    fn integer_order_rejected() {
        let b = radial_symbol(2.0, -1.0);
        assert!(matches!(kv_tr(&b, 1, &TrOptions::default()), Err(Error::IntegerOrderPole(_))));
    }
}
