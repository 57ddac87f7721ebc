//! Property tests for the symbol calculus against the Hermite-basis oracle.

use proptest::prelude::*;

use shubin::calculus::{adjoint, sharp};
use shubin::cmat::{c, max_abs, scalar, CMat, C64, I};
use shubin::fit::{laurent_fit, symmetric_points};
use shubin::oracle;
use shubin::symring::{ClassicalSymbol, ExcisionProfile, SymbolTerm};

const N: usize = 24;
const PAD: usize = 8;

fn mono(coeff: C64, beta: u32, alpha: u32) -> SymbolTerm {
    SymbolTerm::new(scalar(1, coeff), vec![beta], vec![alpha], c(0.0, 0.0))
}

/// Polynomials in (x, ξ) of total degree ≤ 3 with small complex coefficients.
fn polynomial() -> impl Strategy<Value = ClassicalSymbol> {
    prop::collection::vec((0u32..=2, 0u32..=2, -2.0f64..2.0, -2.0f64..2.0), 1..5).prop_filter_map(
        "degree ≤ 3",
        |raw| {
            let terms: Vec<_> = raw
                .into_iter()
                .filter(|(b, a, _, _)| b + a <= 3)
                .map(|(b, a, x, y)| mono(c(x, y), b, a))
                .collect();
            if terms.is_empty() {
                return None;
            }
            ClassicalSymbol::from_terms(1, 1, terms).ok()
        },
    )
}

fn matrix(a: &ClassicalSymbol, size: usize) -> CMat {
    oracle::discretize(a, size).unwrap().matrix
}

fn rel(a: &CMat, b: &CMat) -> f64 {
    max_abs(&(a - b)) / max_abs(b).max(1.0)
}

fn point() -> impl Strategy<Value = [f64; 2]> {
    (-2.0f64..2.0, -2.0f64..2.0).prop_filter("away from 0", |(x, y)| x * x + y * y > 0.01).prop_map(|(x, y)| [x, y])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn sharp_matches_operator_product(a in polynomial(), b in polynomial()) {
        let ab = matrix(&sharp(&a, &b, 12).unwrap(), N);
        let prod = (matrix(&a, N + PAD) * matrix(&b, N + PAD)).view((0, 0), (N, N)).into_owned();
        prop_assert!(rel(&ab, &prod) < 1e-10);
    }

    #[test]
    fn adjoint_matches_hermitian_transpose(a in polynomial()) {
        let adj = matrix(&adjoint(&a, 12).unwrap(), N);
        prop_assert!(rel(&adj, &matrix(&a, N).adjoint()) < 1e-10);
    }

    #[test]
    fn sharp_is_associative(a in polynomial(), b in polynomial(), d in polynomial(), p in point()) {
        let l = sharp(&sharp(&a, &b, 12).unwrap(), &d, 12).unwrap();
        let r = sharp(&a, &sharp(&b, &d, 12).unwrap(), 12).unwrap();
        let (lv, rv) = (l.eval_glued(&p).unwrap(), r.eval_glued(&p).unwrap());
        prop_assert!(rel(&lv, &rv) < 1e-10);
    }

    #[test]
    fn double_adjoint_is_identity(a in polynomial(), p in point()) {
        let aa = adjoint(&adjoint(&a, 12).unwrap(), 12).unwrap();
        prop_assert!(rel(&aa.eval_glued(&p).unwrap(), &a.eval_glued(&p).unwrap()) < 1e-12);
    }

    #[test]
    fn canonical_commutator(p in point()) {
        let x = ClassicalSymbol::from_terms(1, 1, vec![mono(c(1.0, 0.0), 1, 0)]).unwrap();
        let xi = ClassicalSymbol::from_terms(1, 1, vec![mono(c(1.0, 0.0), 0, 1)]).unwrap();
        let d = sharp(&x, &xi, 4).unwrap().sub(&sharp(&xi, &x, 4).unwrap()).unwrap();
        prop_assert_eq!(d.eval_glued(&p).unwrap()[(0, 0)], I);
    }

    #[test]
    fn sharp_components_are_homogeneous(a in polynomial(), b in polynomial(), p in point(), t in 0.5f64..3.0) {
        for comp in &sharp(&a, &b, 8).unwrap().components {
            let v1 = comp.eval(&p).unwrap();
            let v2 = comp.eval(&[t * p[0], t * p[1]]).unwrap();
            let scale = (comp.degree * t.ln()).exp();
            prop_assert!(max_abs(&(v2 - v1.clone() * scale)) <= 1e-10 * max_abs(&v1).max(1.0) * scale.norm().max(1.0));
        }
    }

    #[test]
    fn excision_is_a_monotone_cutoff(r0 in 0.05f64..1.0, w in 0.1f64..2.0, rho in 0.0f64..5.0) {
        let e = ExcisionProfile::new(r0, r0 + w).unwrap();
        let v = e.chi(rho);
        prop_assert!((0.0..=1.0).contains(&v));
        prop_assert!(e.chi(rho + 0.01) >= v);
        if rho <= r0 { prop_assert_eq!(v, 0.0); }
        if rho >= r0 + w { prop_assert_eq!(v, 1.0); }
    }

    #[test]
    fn laurent_fit_recovers_residue(res in -5.0f64..5.0, c0 in -5.0f64..5.0, c1 in -5.0f64..5.0) {
        let z0 = c(1.0, 0.0);
        let f = |z: C64| res / (z - z0) + c0 + c1 * (z - z0);
        let samples: Vec<_> = symmetric_points(z0, 0.05).into_iter().map(|z| (z, f(z))).collect();
        let fit = laurent_fit(&samples, z0, &[-1, 0, 1]).unwrap();
        prop_assert!((fit.coeff(-1) - res).norm() < 1e-10);
    }
}
