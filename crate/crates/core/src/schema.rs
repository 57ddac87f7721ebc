//! JSON symbol definitions shared by the CLI and the C interface.

use serde::{Deserialize, Serialize};

use crate::calculus::DEFAULT_DEPTH;
use crate::cmat::{CMat, C64};
use crate::error::{Error, Result};
use crate::symring::{ClassicalSymbol, ExactSymbol, ExcisionProfile, HomogeneousComponent, SymbolTerm};

type Complex = [f64; 2];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermDef {
    /// q×q matrix of complex numbers, row-major.
    pub coeff: Vec<Vec<Complex>>,
    pub beta: Vec<u32>,
    pub alpha: Vec<u32>,
    #[serde(default)]
    pub s_exp: Complex,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentDef {
    pub degree: Complex,
    #[serde(default)]
    pub terms: Vec<TermDef>,
}

/// `"ho"` or a full object such as `{"name": "diag_ho", "scales": [1, -1]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ExactDef {
    Name(String),
    Full(ExactSymbol),
}

impl ExactDef {
    pub fn resolve(&self) -> Result<ExactSymbol> {
        match self {
            ExactDef::Full(e) => Ok(e.clone()),
            ExactDef::Name(s) if s == "ho" => Ok(ExactSymbol::Ho),
            ExactDef::Name(s) => Err(Error::Invalid(format!(
                "exact symbol \"{s}\" needs parameters; use an object with a \"name\" field"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymbolDef {
    pub n: usize,
    #[serde(default = "one")]
    pub q: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<Complex>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub components: Option<Vec<ComponentDef>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact: Option<ExactDef>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub excision: Option<ExcisionProfile>,
    /// Whether the listed components are the whole expansion (default true).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub complete: Option<bool>,
    /// Components generated for registered symbols without a finite expansion.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<usize>,
}

fn one() -> usize {
    1
}

fn cplx(v: Complex) -> C64 {
    C64::new(v[0], v[1])
}

fn matrix(rows: &[Vec<Complex>], q: usize) -> Result<CMat> {
    if rows.len() != q || rows.iter().any(|r| r.len() != q) {
        return Err(Error::DimMismatch(format!("coefficient must be {q}×{q}")));
    }
    Ok(CMat::from_fn(q, q, |i, j| cplx(rows[i][j])))
}

impl SymbolDef {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Invalid(format!("symbol JSON: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("symbol definitions always serialize")
    }

    pub fn to_symbol(&self) -> Result<ClassicalSymbol> {
        if self.n == 0 || self.q == 0 {
            return Err(Error::Invalid("n and q must be positive".into()));
        }
        let exact = self.exact.as_ref().map(|e| e.resolve()).transpose()?;
        let mut sym = match (&self.components, &exact) {
            (Some(comps), _) => self.ring_symbol(comps)?,
            (None, Some(e)) => ClassicalSymbol::from_exact(e.clone(), self.n, self.depth.unwrap_or(DEFAULT_DEPTH))?,
            (None, None) => return Err(Error::Invalid("symbol needs \"components\" or \"exact\"".into())),
        };
        if let Some(e) = exact {
            e.validate()?;
            if e.q() != sym.q {
                return Err(Error::DimMismatch(format!("exact symbol has q = {}, components have q = {}", e.q(), sym.q)));
            }
            if let Some(o) = self.order {
                if (cplx(o) - e.order()).norm() > 1e-12 {
                    return Err(Error::Invalid(format!("order {:?} disagrees with the exact symbol", o)));
                }
            }
            sym.exact = Some(e);
        }
        if let Some(x) = self.excision {
            sym = sym.with_excision(x)?;
        }
        Ok(sym)
    }

    fn ring_symbol(&self, comps: &[ComponentDef]) -> Result<ClassicalSymbol> {
        let order = match (self.order, comps.first()) {
            (Some(o), _) => cplx(o),
            (None, Some(c)) => cplx(c.degree),
            (None, None) => return Err(Error::EmptyExpansion),
        };
        let mut out = Vec::with_capacity(comps.len());
        for c in comps {
            let mut terms = Vec::with_capacity(c.terms.len());
            for t in &c.terms {
                if t.beta.len() != self.n || t.alpha.len() != self.n {
                    return Err(Error::DimMismatch(format!("multi-indices must have length n = {}", self.n)));
                }
                terms.push(SymbolTerm::new(matrix(&t.coeff, self.q)?, t.beta.clone(), t.alpha.clone(), cplx(t.s_exp)));
            }
            out.push(HomogeneousComponent::ring(self.n, self.q, cplx(c.degree), terms)?);
        }
        ClassicalSymbol::new(self.n, self.q, order, out, self.complete.unwrap_or(true))
    }

    /// Definition of a ring symbol (grid components have no JSON form).
    pub fn from_symbol(a: &ClassicalSymbol) -> Result<Self> {
        let mut comps = Vec::with_capacity(a.components.len());
        for c in &a.components {
            let terms = c
                .terms()
                .ok_or_else(|| Error::Invalid("grid-valued components cannot be written as JSON".into()))?;
            let terms = terms
                .iter()
                .map(|t| TermDef {
                    coeff: (0..a.q).map(|i| (0..a.q).map(|j| [t.coeff[(i, j)].re, t.coeff[(i, j)].im]).collect()).collect(),
                    beta: t.beta.clone(),
                    alpha: t.alpha.clone(),
                    s_exp: [t.s_exp.re, t.s_exp.im],
                })
                .collect();
            comps.push(ComponentDef { degree: [c.degree.re, c.degree.im], terms });
        }
        Ok(SymbolDef {
            n: a.n,
            q: a.q,
            order: Some([a.order.re, a.order.im]),
            components: Some(comps),
            exact: a.exact.clone().map(ExactDef::Full),
            excision: Some(a.excision),
            complete: Some(a.complete),
            depth: None,
        })
    }
}

/// Parse a symbol JSON document.
pub fn parse_symbol(text: &str) -> Result<ClassicalSymbol> {
    SymbolDef::from_json(text)?.to_symbol()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_by_name() {
        let a = parse_symbol(r#"{"n": 1, "exact": "ho"}"#).unwrap();
        assert_eq!(a.exact, Some(ExactSymbol::Ho));
        assert!(a.complete);
        let b = parse_symbol(r#"{"n": 1, "q": 2, "exact": {"name": "diag_ho", "scales": [1, -2]}}"#).unwrap();
        assert_eq!(b.q, 2);
        assert!(parse_symbol(r#"{"n": 1, "exact": "diag_ho"}"#).is_err());
    }

    #[test]
    fn round_trip() {
        let text = r#"{"n": 1, "order": [1, 0], "components": [
            {"degree": [1, 0], "terms": [{"coeff": [[[0, 1]]], "beta": [1], "alpha": [0]}]}]}"#;
        let a = parse_symbol(text).unwrap();
        let again = SymbolDef::from_symbol(&a).unwrap().to_symbol().unwrap();
        let p = [0.3, -0.7];
        assert_eq!(a.eval_glued(&p).unwrap(), again.eval_glued(&p).unwrap());
    }

    #[test]
    fn rejects_bad_shapes() {
        let text = r#"{"n": 1, "q": 2, "components": [
            {"degree": [0, 0], "terms": [{"coeff": [[[1, 0]]], "beta": [0], "alpha": [0]}]}]}"#;
        assert!(matches!(parse_symbol(text), Err(Error::DimMismatch(_))));
    }
}
