//! One-dimensional Gauss–Legendre rules and panel helpers.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

/// Gauss–Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Nodes by Newton iteration on P_n from the Tricomi initial guess.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre order must be positive");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    /// Shared cached rule of order `n`.
    pub fn cached(n: usize) -> Arc<GaussLegendre> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<GaussLegendre>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().expect("quadrature cache poisoned");
        guard
            .entry(n)
            .or_insert_with(|| Arc::new(GaussLegendre::new(n)))
            .clone()
    }

    /// Nodes and weights mapped onto [a, b].
    pub fn on_interval(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        self.on_interval(a, b).map(|(x, w)| w * f(x)).sum()
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let d = n as f64 * (x * p - p0) / (x * x - 1.0);
    (p, d)
}

/// Panel boundaries a = t_0 < ... < t_k = b with geometric ratio, densest near `a`.
pub fn geometric_panels(a: f64, b: f64, panels: usize) -> Vec<f64> {
    assert!(a > 0.0 && b > a && panels >= 1);
    let ratio = (b / a).powf(1.0 / panels as f64);
    let mut edges: Vec<f64> = (0..=panels).map(|i| a * ratio.powi(i as i32)).collect();
    edges[panels] = b;
    edges
}

/// Composite Gauss rule over (0, 1] graded geometrically toward 0; the
/// smallest panel ends at `2^-levels`. Returns (nodes, weights, u_min).
pub fn graded_unit_rule(levels: usize, order: usize) -> (Vec<f64>, Vec<f64>, f64) {
    let gl = GaussLegendre::cached(order);
    let mut nodes = Vec::with_capacity(levels * order);
    let mut weights = Vec::with_capacity(levels * order);
    let mut hi = 1.0;
    for _ in 0..levels {
        let lo = hi * 0.5;
        for (x, w) in gl.on_interval(lo, hi) {
            nodes.push(x);
            weights.push(w);
        }
        hi = lo;
    }
    (nodes, weights, hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_two() {
        for n in [1, 2, 5, 16, 33, 64] {
            let g = GaussLegendre::new(n);
            let s: f64 = g.weights.iter().sum();
            assert!((s - 2.0).abs() < 1e-13, "n={n} sum={s}");
        }
    }

    #[test]
    fn integrates_polynomials_exactly() {
        let g = GaussLegendre::new(8);
        // degree 15 is the exactness limit
        let v = g.integrate(0.0, 2.0, |x| x.powi(15));
        assert!((v - 2f64.powi(16) / 16.0).abs() < 1e-9 * v);
    }

    #[test]
    fn graded_rule_handles_endpoint_power() {
        let (x, w, umin) = graded_unit_rule(50, 16);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powf(-0.5)).sum();
        // analytic tail over (0, umin)
        let tail = 2.0 * umin.sqrt();
        assert!((s + tail - 2.0).abs() < 1e-12);
    }
}
