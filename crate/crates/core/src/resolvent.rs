//! Parameter-dependent parametrix of λ − a and the contours used to
//! integrate it.
//!
//! Contours bound a wedge `T = {φ_lo ≤ arg λ ≤ φ_hi, |λ| ≥ ε}` with positive
//! orientation: out along the ray `φ_lo`, back along the ray `φ_hi`, and
//! clockwise around the small arc. For a keyhole at θ the wedge is the whole
//! plane cut along θ, so `(1/2πi)∫ λ^z (λ − c)^{-1} dλ = c^z` with
//! `arg λ ∈ (θ − 2π, θ)`.

use std::collections::HashMap;
use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::calculus::{multi_factorial, multi_indices};
use crate::cmat::{pow_with_arg, CMat, C64, I};
use crate::error::{Error, Result};
use crate::quadrature::{geometric_panels, GaussLegendre};
use crate::symring::{Axis, ClassicalSymbol, HomogeneousComponent, Jet};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ContourKind {
    /// Γ_θ: encloses everything off the ray θ.
    Keyhole { theta: f64 },
    /// Γ_{θ,θ'}: encloses the sector swept counterclockwise from θ' to θ.
    RayArcRay { theta: f64, theta_prime: f64 },
}

/// Gauss–Legendre panels on the small arc, which passes within ε of the
/// principal spectrum.
pub const DEFAULT_ARC_PANELS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContourSpec {
    pub kind: ContourKind,
    pub eps: f64,
    pub r_max: f64,
    pub ray_panels: usize,
    pub gauss_order: usize,
    pub arc_panels: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContourNode {
    pub lambda: C64,
    /// dλ including the direction of traversal.
    pub weight: C64,
    /// Argument of λ on the branch of the contour.
    pub arg: f64,
}

impl ContourSpec {
    pub fn keyhole(theta: f64, eps: f64) -> Self {
        Self::with_kind(ContourKind::Keyhole { theta }, eps)
    }

    pub fn ray_arc_ray(theta: f64, theta_prime: f64, eps: f64) -> Self {
        Self::with_kind(ContourKind::RayArcRay { theta, theta_prime }, eps)
    }

    fn with_kind(kind: ContourKind, eps: f64) -> Self {
        Self { kind, eps, r_max: 1e6, ray_panels: 24, gauss_order: 16, arc_panels: DEFAULT_ARC_PANELS }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0 && self.r_max > self.eps && self.r_max.is_finite()) {
            return Err(Error::Invalid(format!("contour needs 0 < ε < R, got ε={} R={}", self.eps, self.r_max)));
        }
        if self.ray_panels == 0 || self.gauss_order == 0 || self.arc_panels == 0 {
            return Err(Error::Invalid("contour panel counts must be positive".into()));
        }
        if let ContourKind::RayArcRay { theta, theta_prime } = self.kind {
            let (lo, hi) = wedge(theta, theta_prime);
            if hi - lo <= 0.0 || hi - lo >= 2.0 * PI {
                return Err(Error::Invalid("ray-arc-ray contour needs two distinct rays".into()));
            }
        }
        Ok(())
    }

    /// (φ_lo, φ_hi) of the enclosed wedge.
    pub fn angles(&self) -> (f64, f64) {
        match self.kind {
            ContourKind::Keyhole { theta } => (theta - 2.0 * PI, theta),
            ContourKind::RayArcRay { theta, theta_prime } => wedge(theta, theta_prime),
        }
    }

    /// Quadrature nodes: outgoing ray, incoming ray, then the arc.
    pub fn nodes(&self) -> Vec<ContourNode> {
        let (lo, hi) = self.angles();
        let gl = GaussLegendre::cached(self.gauss_order);
        let edges = geometric_panels(self.eps, self.r_max, self.ray_panels);
        let mut out = Vec::new();
        let dir_lo = C64::from_polar(1.0, lo);
        let dir_hi = C64::from_polar(1.0, hi);
        for w in edges.windows(2) {
            for (r, wr) in gl.on_interval(w[0], w[1]) {
                out.push(ContourNode { lambda: dir_lo * r, weight: dir_lo * wr, arg: lo });
            }
        }
        for w in edges.windows(2) {
            for (r, wr) in gl.on_interval(w[0], w[1]) {
                out.push(ContourNode { lambda: dir_hi * r, weight: -dir_hi * wr, arg: hi });
            }
        }
        let step = (hi - lo) / self.arc_panels as f64;
        for p in 0..self.arc_panels {
            let a = lo + step * p as f64;
            for (phi, wphi) in gl.on_interval(a, a + step) {
                let lam = C64::from_polar(self.eps, phi);
                out.push(ContourNode { lambda: lam, weight: -I * lam * wphi, arg: phi });
            }
        }
        out
    }

    /// Sample points beyond R on both rays used to model the tail.
    fn tail_points(&self) -> [(f64, [f64; 4]); 2] {
        let (lo, hi) = self.angles();
        let r = self.r_max;
        let radii = [r, 2.0 * r, 4.0 * r, 8.0 * r];
        [(lo, radii), (hi, radii)]
    }
}

fn wedge(theta: f64, theta_prime: f64) -> (f64, f64) {
    let mut lo = theta_prime;
    while lo >= theta {
        lo -= 2.0 * PI;
    }
    while lo < theta - 2.0 * PI {
        lo += 2.0 * PI;
    }
    (lo, theta)
}

/// Result of a contour integral of a vector-valued integrand.
#[derive(Debug, Clone)]
pub struct ContourIntegral {
    pub values: Vec<C64>,
    /// Size of the last modelled tail coefficient (an error proxy).
    pub tail_uncertainty: f64,
}

/// `(1/2πi) ∫ λ^z F(λ) dλ` over the contour, where F returns a flat vector
/// and decays at least like |λ|^{-1}. The contribution beyond R is modelled by
/// the Laurent fit F ≈ Σ_{j=1}^{4} c_j λ^{-j} on each ray and integrated exactly.
pub fn contour_integral<F>(spec: &ContourSpec, z: C64, f: F) -> Result<ContourIntegral>
where
    F: Fn(C64) -> Result<Vec<C64>>,
{
    let nodes = spec.nodes();
    let mut acc: Option<Vec<C64>> = None;
    for node in &nodes {
        let v = f(node.lambda)?;
        let w = pow_with_arg(node.lambda.norm(), node.arg, z) * node.weight;
        match acc.as_mut() {
            None => acc = Some(v.iter().map(|x| x * w).collect()),
            Some(a) => a.iter_mut().zip(&v).for_each(|(a, x)| *a += x * w),
        }
    }
    let mut acc = acc.unwrap_or_default();
    let mut unc = 0.0;
    for (idx, (phi, radii)) in spec.tail_points().iter().enumerate() {
        let sign = if idx == 0 { 1.0 } else { -1.0 };
        let samples: Vec<Vec<C64>> =
            radii.iter().map(|&r| f(C64::from_polar(r, *phi))).collect::<Result<_>>()?;
        // Vandermonde in 1/λ
        let mut vm = DMatrix::<C64>::zeros(4, 4);
        for (i, &r) in radii.iter().enumerate() {
            let lam = C64::from_polar(r, *phi);
            for j in 0..4 {
                vm[(i, j)] = lam.powi(-(j as i32 + 1));
            }
        }
        let lu = vm.lu();
        let r = spec.r_max;
        let dir = C64::from_polar(1.0, *phi);
        for (slot, a) in acc.iter_mut().enumerate() {
            let rhs = DVector::from_iterator(4, samples.iter().map(|s| s[slot]));
            let c = lu.solve(&rhs).ok_or_else(|| Error::FitIllConditioned("tail Laurent fit".into()))?;
            for j in 0..4 {
                // ∫_R^∞ (r e^{iφ})^z c_j (r e^{iφ})^{-j-1} e^{iφ} dr
                let e = z - (j as f64 + 1.0) + 1.0;
                if e.re >= 0.0 {
                    let scale: f64 = c.iter().map(|v| v.norm()).sum();
                    if c[j].norm() > 1e-10 * scale {
                        return Err(Error::TailDivergence(format!(
                            "integrand decays like |λ|^{}",
                            e.re - 1.0
                        )));
                    }
                    continue;
                }
                let phase = pow_with_arg(1.0, *phi, e - 1.0) * dir;
                let tail = c[j] * phase * pow_with_arg(r, 0.0, e) / (-e) * sign;
                *a += tail;
                if j == 3 {
                    unc += tail.norm();
                }
            }
        }
    }
    let scale = C64::new(0.0, -1.0 / (2.0 * PI));
    acc.iter_mut().for_each(|a| *a *= scale);
    Ok(ContourIntegral { values: acc, tail_uncertainty: unc / (2.0 * PI) })
}

/// Jets of b_{-m-k}(·, λ) around one point, k = 0..K_comp-1.
#[derive(Debug, Clone)]
pub struct ResolventJet {
    pub omega: Vec<f64>,
    pub lambda: C64,
    pub components: Vec<Jet>,
}

/// Per-point precomputation for the resolvent recursion: the jets of
/// D_x^σ a_{(m-p)} needed for all requested components.
#[derive(Debug, Clone)]
pub struct ResolventWorkspace {
    omega: Vec<f64>,
    n: usize,
    q: usize,
    k_comp: usize,
    /// Working jet degree of b_{-m-k}.
    degrees: Vec<usize>,
    /// Requested output jet order of each component.
    out_orders: Vec<usize>,
    a_jets: HashMap<(usize, Vec<u32>), Jet>,
    principal: Jet,
}

impl ResolventWorkspace {
    /// Same output jet order for every component.
    pub fn new(a: &ClassicalSymbol, omega: &[f64], k_comp: usize, k_jet: usize) -> Result<Self> {
        Self::with_orders(a, omega, &vec![k_jet; k_comp])
    }

    /// Output jet order `orders[k]` for component k.
    pub fn with_orders(a: &ClassicalSymbol, omega: &[f64], orders: &[usize]) -> Result<Self> {
        let k_comp = orders.len();
        if k_comp == 0 {
            return Err(Error::Invalid("resolvent needs at least one component".into()));
        }
        let n = a.n;
        let mut degrees = orders.to_vec();
        for j in (0..k_comp).rev() {
            for k in j + 1..k_comp {
                degrees[j] = degrees[j].max(degrees[k] + (k - j) / 2);
            }
        }
        let mut a_jets = HashMap::new();
        for p in 0..k_comp {
            let Some(c) = a.component(p) else {
                return Err(Error::InsufficientExpansion(format!(
                    "resolvent component {} needs a_(m-{p})",
                    k_comp - 1
                )));
            };
            if c.is_zero() {
                continue;
            }
            let mut s = 0u32;
            while p + 2 * (s as usize) < k_comp {
                let deg = degrees[p + 2 * s as usize];
                for sigma in multi_indices(n, s) {
                    if p == 0 && s == 0 {
                        continue;
                    }
                    let d = x_derivative(&c, &sigma)?;
                    if d.is_zero() {
                        continue;
                    }
                    a_jets.insert((p, sigma), d.jet(omega, deg)?);
                }
                s += 1;
            }
        }
        let principal = a.principal()?.jet(omega, degrees[0])?;
        Ok(Self {
            omega: omega.to_vec(),
            n,
            q: a.q,
            k_comp,
            degrees,
            out_orders: orders.to_vec(),
            a_jets,
            principal,
        })
    }

    pub fn compute(&self, lambda: C64) -> Result<ResolventJet> {
        let nvars = 2 * self.n;
        let lam = Jet::constant(nvars, self.degrees[0], &(CMat::identity(self.q, self.q) * lambda));
        let b0 = lam.sub(&self.principal).inverse().ok_or(Error::SingularResolvent(lambda))?;
        let mut bs: Vec<Jet> = vec![b0.clone()];
        let mut xi_derivs: HashMap<(usize, Vec<u32>), Jet> = HashMap::new();
        for k in 1..self.k_comp {
            let dk = self.degrees[k];
            let mut acc = Jet::zero(nvars, self.q, dk);
            for j in 0..k {
                let mut s = 0u32;
                while j + 2 * s as usize <= k {
                    let p = k - j - 2 * s as usize;
                    for sigma in multi_indices(self.n, s) {
                        let Some(aj) = self.a_jets.get(&(p, sigma.clone())) else { continue };
                        let db = if s == 0 {
                            bs[j].clone()
                        } else {
                            let key = (j, sigma.clone());
                            if let Some(d) = xi_derivs.get(&key) {
                                d.clone()
                            } else {
                                let mut e = vec![0u8; nvars];
                                for i in 0..self.n {
                                    e[self.n + i] = sigma[i] as u8;
                                }
                                let d = bs[j].diff_multi(&e)?;
                                xi_derivs.insert(key, d.clone());
                                d
                            }
                        };
                        let term = db.mul_capped(aj, dk);
                        acc.add_scaled(&term, C64::new(1.0 / multi_factorial(&sigma), 0.0));
                    }
                    s += 1;
                }
            }
            bs.push(acc.mul_capped(&b0, dk));
        }
        let components = bs.iter().zip(&self.out_orders).map(|(b, &o)| b.truncate(o)).collect();
        Ok(ResolventJet { omega: self.omega.clone(), lambda, components })
    }

    pub fn k_comp(&self) -> usize {
        self.k_comp
    }
}

/// D_x^σ of a component (D_x = −i ∂_x).
fn x_derivative(c: &HomogeneousComponent, sigma: &[u32]) -> Result<HomogeneousComponent> {
    let mut d = c.clone();
    let mut total = 0;
    for (i, &k) in sigma.iter().enumerate() {
        for _ in 0..k {
            d = d.differentiate(Axis::X(i))?;
            total += 1;
        }
    }
    Ok(d.scale((-I).powi(total)))
}

/// Jets of b_{-m-k}(ω, λ) for k < K_comp, each of order K_jet.
pub fn resolvent_parametrix_jet(
    a: &ClassicalSymbol,
    omega: &[f64],
    lambda: C64,
    k_comp: usize,
    k_jet: usize,
) -> Result<ResolventJet> {
    ResolventWorkspace::new(a, omega, k_comp, k_jet)?.compute(lambda)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cmat::re;

    #[test]
    fn ho_leading_resolvent() {
        let a = ClassicalSymbol::harmonic_oscillator(1);
        let r = resolvent_parametrix_jet(&a, &[1.0, 0.0], re(-1.0), 3, 1).unwrap();
        assert!((r.components[0].value()[(0, 0)] - re(-2.0 / 3.0)).norm() < 1e-15);
        let dxi = r.components[0].derivative_value(&[0, 1]).unwrap()[(0, 0)];
        assert!(dxi.norm() < 1e-15);
    }

    #[test]
    fn keyhole_closed_integral() {
        let spec = ContourSpec { r_max: 1e3, ..ContourSpec::keyhole(PI / 2.0, 1.0) };
        let v = contour_integral(&spec, re(0.0), |l| Ok(vec![l.powi(-2)])).unwrap();
        assert!(v.values[0].norm() < 1e-8);
    }

    #[test]
    fn keyhole_reproduces_power() {
        let spec = ContourSpec::keyhole(PI / 2.0, 0.25);
        let c = 0.5;
        let v = contour_integral(&spec, re(-2.0), |l| Ok(vec![(l - c).inv()])).unwrap();
        assert!((v.values[0] - re(4.0)).norm() < 1e-8, "{}", v.values[0]);
        let z = C64::new(-0.7, 0.3);
        let v = contour_integral(&spec, z, |l| Ok(vec![(l - c).inv()])).unwrap();
        let exact = (z * c.ln()).exp();
        assert!((v.values[0] - exact).norm() < 1e-8, "{} vs {exact}", v.values[0]);
    }

    #[test]
    fn ray_arc_ray_encloses_right_half_plane() {
        for tp in [7.0 * PI / 4.0, -PI / 4.0] {
            let spec = ContourSpec::ray_arc_ray(PI / 4.0, tp, 0.5);
            let inside = contour_integral(&spec, re(-1.0), |l| Ok(vec![(l - 1.0).inv()])).unwrap();
            assert!((inside.values[0] - re(1.0)).norm() < 1e-8, "{}", inside.values[0]);
            let outside = contour_integral(&spec, re(-1.0), |l| Ok(vec![(l + 1.0).inv()])).unwrap();
            assert!(outside.values[0].norm() < 1e-8, "{}", outside.values[0]);
        }
    }
}
