//! Power sums with Euler–Maclaurin tails.

use crate::cmat::C64;

/// B_{2k}/(2k)! for k = 1..=6.
const BERNOULLI_OVER_FACTORIAL: [f64; 6] = [
    1.0 / 12.0,
    -1.0 / 720.0,
    1.0 / 30240.0,
    -1.0 / 1209600.0,
    1.0 / 47900160.0,
    -691.0 / 1307674368000.0,
];

/// Σ_{j ≥ m} j^{−p} for Re p > 1 and m ≥ 1, with an error estimate (the first
/// omitted Euler–Maclaurin term).
pub fn power_tail(p: C64, m: usize) -> (C64, f64) {
    let mf = m as f64;
    let pow = |e: C64| (-(e) * mf.ln()).exp();
    let mut sum = pow(p - 1.0) / (p - 1.0) + pow(p) * 0.5;
    // derivative factors: −d/dj applied 2k−1 times gives (p)_{2k−1} j^{−p−2k+1}
    let mut rising = p;
    let mut last = 0.0;
    for (k, b) in BERNOULLI_OVER_FACTORIAL.iter().enumerate() {
        let order = 2 * k + 1;
        let term = rising * pow(p + order as f64) * *b;
        sum += term;
        last = term.norm();
        rising *= (p + order as f64) * (p + (order + 1) as f64);
    }
    (sum, last)
}

/// Riemann ζ(p) for Re p > 1: direct sum to `m − 1` plus the tail.
pub fn riemann_zeta(p: C64) -> C64 {
    let m = 64;
    let head: C64 = (1..m).map(|j| (-(p) * (j as f64).ln()).exp()).sum();
    head + power_tail(p, m).0
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn zeta_two_and_four() {
        assert!((riemann_zeta(C64::new(2.0, 0.0)).re - PI * PI / 6.0).abs() < 1e-14);
        assert!((riemann_zeta(C64::new(4.0, 0.0)).re - PI.powi(4) / 90.0).abs() < 1e-14);
    }

    #[test]
    fn tail_matches_direct_sum() {
        let p = C64::new(2.5, 0.3);
        let direct: C64 = (10..200_000).map(|j| (-p * (j as f64).ln()).exp()).sum();
        let (t200k, _) = power_tail(p, 200_000);
        let (t10, err) = power_tail(p, 10);
        assert!((direct + t200k - t10).norm() < 1e-12);
        assert!(err < 1e-10);
    }
}
