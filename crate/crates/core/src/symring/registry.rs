//! Named symbols with a closed-form full evaluator.

use serde::{Deserialize, Serialize};

use super::component::HomogeneousComponent;
use super::term::SymbolTerm;
use crate::cmat::{diag, re, scalar, CMat, C64};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum ExactSymbol {
    /// (|x|² + |ξ|² + 1) / 2
    Ho,
    /// (scale · (|x|² + |ξ|² + shift))^s
    ShiftedQuadraticPower { s: [f64; 2], shift: f64, scale: f64 },
    /// diag(c_1, …, c_q) · (|x|² + |ξ|² + 1) / 2
    DiagHo { scales: Vec<f64> },
}

impl ExactSymbol {
    pub fn validate(&self) -> Result<()> {
        match self {
            ExactSymbol::Ho => Ok(()),
            ExactSymbol::ShiftedQuadraticPower { shift, scale, .. } => {
                if *shift <= 0.0 || *scale <= 0.0 {
                    return Err(Error::Invalid("shifted_quadratic_power needs shift > 0 and scale > 0".into()));
                }
                Ok(())
            }
            ExactSymbol::DiagHo { scales } => {
                if scales.is_empty() || scales.contains(&0.0) {
                    return Err(Error::Invalid("diag_ho needs nonzero scales".into()));
                }
                Ok(())
            }
        }
    }

    pub fn q(&self) -> usize {
        match self {
            ExactSymbol::DiagHo { scales } => scales.len(),
            _ => 1,
        }
    }

    /// (exponent s, shift, scale matrix) such that the symbol is M · (ρ² + shift)^s.
    fn parts(&self) -> (C64, f64, CMat) {
        match self {
            ExactSymbol::Ho => (re(1.0), 1.0, scalar(1, re(0.5))),
            ExactSymbol::ShiftedQuadraticPower { s, shift, scale } => {
                let s = C64::new(s[0], s[1]);
                (s, *shift, scalar(1, (s * scale.ln()).exp()))
            }
            ExactSymbol::DiagHo { scales } => {
                let d: Vec<C64> = scales.iter().map(|c| re(0.5 * c)).collect();
                (re(1.0), 1.0, diag(&d))
            }
        }
    }

    pub fn order(&self) -> C64 {
        self.parts().0 * 2.0
    }

    /// Whether the expansion terminates (non-negative integer exponent).
    pub fn is_finite_expansion(&self) -> bool {
        let s = self.parts().0;
        s.im == 0.0 && s.re >= 0.0 && s.re.fract() == 0.0
    }

    pub fn eval(&self, point: &[f64]) -> CMat {
        let (s, shift, m) = self.parts();
        let rho2: f64 = point.iter().map(|p| p * p).sum();
        m * (s * (rho2 + shift).ln()).exp()
    }

    /// Homogeneous components 0..depth (odd indices vanish).
    pub fn components(&self, n: usize, depth: usize) -> Vec<HomogeneousComponent> {
        let (s, shift, m) = self.parts();
        let q = m.nrows();
        let order = s * 2.0;
        let mut binom = re(1.0);
        let mut out = Vec::with_capacity(depth);
        for j in 0..depth {
            let degree = order - j as f64;
            if j % 2 == 1 {
                out.push(HomogeneousComponent::zero(n, q, degree));
                continue;
            }
            let k = (j / 2) as f64;
            if k > 0.0 {
                binom = binom * (s - (k - 1.0)) / k;
            }
            let coeff = &m * (binom * shift.powf(k));
            let terms = if binom == re(0.0) {
                Vec::new()
            } else {
                vec![SymbolTerm::radial(n, coeff, s - k)]
            };
            out.push(HomogeneousComponent::ring(n, q, degree, terms).expect("registry component"));
        }
        out
    }

    /// Number of components carrying the whole finite expansion.
    pub fn natural_depth(&self) -> Option<usize> {
        self.is_finite_expansion().then(|| 2 * self.parts().0.re as usize + 1)
    }

    pub fn label(&self) -> &'static str {
        match self {
            ExactSymbol::Ho => "ho",
            ExactSymbol::ShiftedQuadraticPower { .. } => "shifted_quadratic_power",
            ExactSymbol::DiagHo { .. } => "diag_ho",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_square_value() {
        let a = ExactSymbol::ShiftedQuadraticPower { s: [-2.0, 0.0], shift: 1.0, scale: 1.0 };
        assert!((a.eval(&[1.0, 1.0])[(0, 0)] - re(1.0 / 9.0)).norm() < 1e-15);
        assert_eq!(a.order(), re(-4.0));
    }

    #[test]
    fn expansion_matches_far_field() {
        let a = ExactSymbol::ShiftedQuadraticPower { s: [-0.75, 0.0], shift: 2.0, scale: 0.5 };
        let comps = a.components(1, 8);
        let p = [30.0, -40.0];
        let sum: C64 = comps.iter().map(|c| c.eval(&p).unwrap()[(0, 0)]).sum();
        let exact = a.eval(&p)[(0, 0)];
        // remainder is of degree order - 8, far below the leading size at ρ = 50
        assert!((sum - exact).norm() < 1e-12 * exact.norm());
    }

    #[test]
    fn ho_expansion_is_finite() {
        assert_eq!(ExactSymbol::Ho.natural_depth(), Some(3));
        let c = ExactSymbol::Ho.components(1, 3);
        assert!(c[1].is_zero());
        assert!((c[2].eval(&[3.0, 4.0]).unwrap()[(0, 0)] - re(0.5)).norm() < 1e-15);
    }
}
