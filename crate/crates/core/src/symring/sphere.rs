//! Quadrature grids on the unit sphere S^{2n-1} ⊂ ℝ^{2n}.

use std::f64::consts::PI;

use crate::cmat::{CMat, C64};
use crate::error::{Error, Result};
use crate::quadrature::GaussLegendre;

#[derive(Debug, Clone, PartialEq)]
pub struct SphereGrid {
    /// Space dimension n (the sphere lives in ℝ^{2n}).
    pub n: usize,
    pub nodes: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    /// Sizes used to build the grid (one entry for n=1, three for n=2).
    pub shape: Vec<usize>,
}

impl SphereGrid {
    /// Uniform trapezoid rule on S¹; nodes at angle 2πk/N in the (x, ξ) plane.
    pub fn circle(nodes: usize) -> Result<Self> {
        if nodes < 4 || !nodes.is_multiple_of(2) {
            return Err(Error::Invalid(format!("circle grid needs an even node count ≥ 4, got {nodes}")));
        }
        let w = 2.0 * PI / nodes as f64;
        let pts = (0..nodes)
            .map(|k| {
                let t = 2.0 * PI * k as f64 / nodes as f64;
                vec![t.cos(), t.sin()]
            })
            .collect();
        Ok(Self { n: 1, nodes: pts, weights: vec![w; nodes], shape: vec![nodes] })
    }

    /// Tensor grid on S³ in hyperspherical angles (ψ, θ, φ):
    /// Gauss–Legendre in ψ and θ, trapezoid in φ.
    pub fn three_sphere(n_psi: usize, n_theta: usize, n_phi: usize) -> Result<Self> {
        if n_psi == 0 || n_theta == 0 || n_phi < 2 {
            return Err(Error::Invalid("three-sphere grid sizes must be positive".into()));
        }
        let gp = GaussLegendre::cached(n_psi);
        let gt = GaussLegendre::cached(n_theta);
        let mut nodes = Vec::with_capacity(n_psi * n_theta * n_phi);
        let mut weights = Vec::with_capacity(nodes.capacity());
        let wphi = 2.0 * PI / n_phi as f64;
        for (psi, wp) in gp.on_interval(0.0, PI) {
            for (th, wt) in gt.on_interval(0.0, PI) {
                for k in 0..n_phi {
                    let ph = 2.0 * PI * k as f64 / n_phi as f64;
                    let (sp, cp) = psi.sin_cos();
                    let (st, ct) = th.sin_cos();
                    nodes.push(vec![cp, sp * ct, sp * st * ph.cos(), sp * st * ph.sin()]);
                    weights.push(wp * wt * wphi * sp * sp * st);
                }
            }
        }
        Ok(Self { n: 2, nodes, weights, shape: vec![n_psi, n_theta, n_phi] })
    }

    /// Default grid for dimension n: 256 nodes on S¹, 16×16×32 on S³.
    pub fn default_for(n: usize) -> Result<Self> {
        match n {
            1 => Self::circle(256),
            2 => Self::three_sphere(16, 16, 32),
            _ => Err(Error::Invalid(format!("sphere grids are available for n = 1, 2 only, got n = {n}"))),
        }
    }

    /// Grid for dimension `n` from a size hint (node count on S¹, φ-count on S³).
    pub fn with_size(n: usize, size: usize) -> Result<Self> {
        match n {
            1 => Self::circle(size),
            2 => Self::three_sphere(size / 2, size / 2, size),
            _ => Self::default_for(n),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Surface measure |S^{2n-1}|.
    pub fn measure(&self) -> f64 {
        match self.n {
            1 => 2.0 * PI,
            _ => 2.0 * PI * PI,
        }
    }

    /// Σ w_k f(ω_k).
    pub fn integrate<F: Fn(usize, &[f64]) -> CMat + Sync>(&self, q: usize, f: F) -> CMat {
        use rayon::prelude::*;
        let parts: Vec<CMat> = (0..self.len())
            .into_par_iter()
            .map(|k| f(k, &self.nodes[k]) * C64::new(self.weights[k], 0.0))
            .collect();
        parts.into_iter().fold(CMat::zeros(q, q), |acc, m| acc + m)
    }

    /// Scalar version of [`integrate`](Self::integrate).
    pub fn integrate_scalar<F: Fn(usize, &[f64]) -> C64 + Sync>(&self, f: F) -> C64 {
        use rayon::prelude::*;
        let parts: Vec<C64> = (0..self.len())
            .into_par_iter()
            .map(|k| f(k, &self.nodes[k]) * self.weights[k])
            .collect();
        parts.into_iter().sum()
    }

    /// Index of the node equal to the direction of `point`, if any.
    pub fn node_index(&self, point: &[f64]) -> Option<usize> {
        let r: f64 = point.iter().map(|p| p * p).sum::<f64>().sqrt();
        if r == 0.0 {
            return None;
        }
        if self.n == 1 {
            let nn = self.len() as f64;
            let t = point[1].atan2(point[0]).rem_euclid(2.0 * PI);
            let k = (t * nn / (2.0 * PI)).round();
            let k = (k as usize) % self.len();
            let node = &self.nodes[k];
            let d = (node[0] - point[0] / r).hypot(node[1] - point[1] / r);
            return (d < 1e-12).then_some(k);
        }
        self.nodes.iter().position(|node| {
            node.iter().zip(point).map(|(a, b)| (a - b / r).powi(2)).sum::<f64>() < 1e-24
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_measure_and_cos_squared() {
        let g = SphereGrid::circle(256).unwrap();
        let one = g.integrate_scalar(|_, _| C64::new(1.0, 0.0));
        assert!((one.re - 2.0 * PI).abs() < 1e-12);
        let c2 = g.integrate_scalar(|_, p| C64::new(p[0] * p[0], 0.0));
        assert!((c2.re - PI).abs() < 1e-12);
    }

    #[test]
    fn three_sphere_measure() {
        let g = SphereGrid::default_for(2).unwrap();
        let total: f64 = g.weights.iter().sum();
        assert!((total - 2.0 * PI * PI).abs() < 1e-10);
        for p in &g.nodes {
            let r: f64 = p.iter().map(|v| v * v).sum();
            assert!((r - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn node_lookup() {
        let g = SphereGrid::circle(16).unwrap();
        let p = [3.0 * g.nodes[5][0], 3.0 * g.nodes[5][1]];
        assert_eq!(g.node_index(&p), Some(5));
        assert_eq!(g.node_index(&[1.0, 0.1]), None);
    }
}
