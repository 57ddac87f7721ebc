//! Spectral ζ and η functions of elliptic symbols, their poles, and the
//! regularity of η at zero.

use std::f64::consts::PI;

use serde::Serialize;

use crate::calculus::{adjoint, max_component_deviation, sharp};
use crate::cmat::C64;
use crate::error::{Error, Result};
use crate::fit::{circle_points, laurent_fit, symmetric_points};
use crate::functionals::{kv_tr_auto, wodzicki_res, TrOptions};
use crate::powers::{complex_power_with_report, sectorial_projection, xi_derivatives_needed, PowerOptions};
use crate::symring::ClassicalSymbol;

/// Circle radius and sample count used for meromorphic continuation.
pub const CONTINUATION_RADIUS: f64 = 0.1;
pub const CONTINUATION_SAMPLES: usize = 6;
/// Residues below this are treated as a removable singularity.
pub const RESIDUE_FLOOR: f64 = 1e-8;

/// Step of the four-point pole fits.
pub const POLE_STEP: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Symbolic,
    Oracle,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Symbolic => "symbolic",
            Method::Oracle => "oracle",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeromorphicSample {
    pub z: C64,
    pub value: C64,
    pub truncation_uncertainty: f64,
    pub method: Method,
}

impl MeromorphicSample {
    pub fn csv_header() -> &'static str {
        "re_z,im_z,re_val,im_val,uncertainty,method"
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.z.re,
            self.z.im,
            self.value.re,
            self.value.im,
            self.truncation_uncertainty,
            self.method.as_str()
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PoleReport {
    pub location: C64,
    pub residue: C64,
    pub predicted_location: C64,
    /// (1/m) Res(a_θ^{−(2n−j)/m}).
    pub residue_formula_value: C64,
    /// |c₋₂ / c₋₁| of the fit; small for a simple pole.
    pub second_order_ratio: f64,
}

/// Knobs shared by all spectral computations.
#[derive(Debug, Clone, Default)]
pub struct SpectralOptions {
    pub power: PowerOptions,
    pub tr: TrOptions,
}

fn order_of(a: &ClassicalSymbol) -> Result<f64> {
    if a.order.im != 0.0 || a.order.re <= 0.0 {
        return Err(Error::Invalid(format!("spectral functions need a real positive order, got {}", a.order)));
    }
    Ok(a.order.re)
}

/// ζ_θ(a, z) = TR(a_θ^{−z}).
pub fn zeta(a: &ClassicalSymbol, z: C64, theta: f64, opts: &SpectralOptions) -> Result<MeromorphicSample> {
    order_of(a)?;
    let power = complex_power_with_report(a, -z, theta, &opts.power)?;
    let tr = kv_tr_auto(&power.symbol, &opts.tr).map_err(|e| match e {
        Error::IntegerOrderPole(_) => Error::PolePoint(z),
        e => e,
    })?;
    Ok(MeromorphicSample {
        z,
        value: tr.value,
        truncation_uncertainty: tr.uncertainty + power.tail_uncertainty,
        method: Method::Symbolic,
    })
}

/// Value at `z` of a meromorphic function known away from `z`: finite part
/// of a Laurent fit c₋₁w⁻¹ + … + c₂w² on a small circle around `z`.
pub fn continue_at<F>(f: F, z: C64) -> Result<(MeromorphicSample, C64)>
where
    F: Fn(C64) -> Result<MeromorphicSample>,
{
    let pts = circle_points(z, CONTINUATION_RADIUS, CONTINUATION_SAMPLES);
    let samples = pts.iter().map(|&w| f(w)).collect::<Result<Vec<_>>>()?;
    let pairs: Vec<(C64, C64)> = samples.iter().map(|s| (s.z, s.value)).collect();
    let fit = laurent_fit(&pairs, z, &[-1, 0, 1, 2])?;
    let unc = samples.iter().map(|s| s.truncation_uncertainty).fold(0.0, f64::max) + fit.residual;
    let method = samples.first().map_or(Method::Symbolic, |s| s.method);
    Ok((MeromorphicSample { z, value: fit.coeff(0), truncation_uncertainty: unc, method }, fit.coeff(-1)))
}

/// Evaluate directly, falling back to continuation when `z` sits on a pole
/// of the finite-part integral.
pub fn sample_or_continue<F>(f: F, z: C64) -> Result<MeromorphicSample>
where
    F: Fn(C64) -> Result<MeromorphicSample>,
{
    match f(z) {
        Err(Error::PolePoint(_)) | Err(Error::IntegerOrderPole(_)) => Ok(continue_at(f, z)?.0),
        r => r,
    }
}

/// Pole of ζ at (2n − j)/m, located by a four-point fit and compared with
/// the residue formula.
pub fn zeta_pole(a: &ClassicalSymbol, j: usize, theta: f64, opts: &SpectralOptions) -> Result<PoleReport> {
    let m = order_of(a)?;
    let predicted = C64::new((2.0 * a.n as f64 - j as f64) / m, 0.0);
    let formula = if predicted.norm() == 0.0 {
        C64::new(0.0, 0.0)
    } else {
        let p = complex_power_with_report(a, -predicted, theta, &opts.power)?;
        wodzicki_res(&p.symbol, opts.power.grid.as_ref())? / m
    };
    let samples = symmetric_points(predicted, POLE_STEP)
        .into_iter()
        .map(|z| Ok((z, zeta(a, z, theta, opts)?.value)))
        .collect::<Result<Vec<_>>>()?;
    let fit = laurent_fit(&samples, predicted, &[-2, -1, 0, 1])?;
    let c1 = fit.coeff(-1);
    let c2 = fit.coeff(-2);
    let (location, ratio) = if c1.norm() > 0.0 { (predicted + c2 / c1, (c2 / c1).norm()) } else { (predicted, 0.0) };
    Ok(PoleReport {
        location,
        residue: c1,
        predicted_location: predicted,
        residue_formula_value: formula,
        second_order_ratio: ratio,
    })
}

/// Componentwise check a ≈ a*.
pub fn self_adjoint_defect(a: &ClassicalSymbol, depth: usize, opts: &PowerOptions) -> Result<f64> {
    let grid = opts.grid_for(a.n)?;
    let adj = adjoint(a, depth)?;
    max_component_deviation(&adj, a, depth, &grid)
}

const SELF_ADJOINT_TOL: f64 = 1e-8;

fn require_self_adjoint(a: &ClassicalSymbol, opts: &PowerOptions) -> Result<()> {
    let d = self_adjoint_defect(a, opts.depth, opts)?;
    let scale = a.principal()?.magnitude().max(1.0);
    if d > SELF_ADJOINT_TOL * scale {
        return Err(Error::NotSelfAdjoint(d));
    }
    Ok(())
}

/// η(op(a), z) = TR(a ♯ (a♯a)_θ^{−(z+1)/2}), θ in the upper half-plane.
pub fn eta(a: &ClassicalSymbol, z: C64, theta: f64, opts: &SpectralOptions) -> Result<MeromorphicSample> {
    order_of(a)?;
    require_self_adjoint(a, &opts.power)?;
    if !(theta > 0.0 && theta < PI) {
        return Err(Error::Invalid(format!("η uses a ray in the open upper half-plane, got θ = {theta}")));
    }
    eta_unchecked(a, z, theta, opts)
}

fn eta_unchecked(a: &ClassicalSymbol, z: C64, theta: f64, opts: &SpectralOptions) -> Result<MeromorphicSample> {
    let depth = opts.power.depth;
    let lead = a.truncated(depth);
    let square = sharp(&lead, &lead, depth)?;
    let jets = opts.power.jet_order + xi_derivatives_needed(&lead, depth);
    let power_opts = PowerOptions { jet_order: jets, ..opts.power.clone() };
    let power = complex_power_with_report(&square, -(z + 1.0) / 2.0, theta, &power_opts)?;
    let b = sharp(&lead, &power.symbol, depth)?;
    let tr = kv_tr_auto(&b, &opts.tr).map_err(|e| match e {
        Error::IntegerOrderPole(_) => Error::PolePoint(z),
        e => e,
    })?;
    Ok(MeromorphicSample {
        z,
        value: tr.value,
        truncation_uncertainty: tr.uncertainty + power.tail_uncertainty,
        method: Method::Symbolic,
    })
}

/// η at `z`, continued through the finite-part poles (e.g. z = 0).
pub fn eta_continued(a: &ClassicalSymbol, z: C64, theta: f64, opts: &SpectralOptions) -> Result<MeromorphicSample> {
    order_of(a)?;
    require_self_adjoint(a, &opts.power)?;
    sample_or_continue(|w| eta_unchecked(a, w, theta, opts), z)
}

/// ζ at `z`, continued through the finite-part poles of TR where ζ itself is
/// regular. A genuine pole (nonzero (1/m)Res(a^{−z})) is a PolePoint error.
pub fn zeta_continued(a: &ClassicalSymbol, z: C64, theta: f64, opts: &SpectralOptions) -> Result<MeromorphicSample> {
    match zeta(a, z, theta, opts) {
        Err(Error::PolePoint(_)) => {
            let m = order_of(a)?;
            if z.norm() > 0.0 {
                let p = complex_power_with_report(a, -z, theta, &opts.power)?;
                if (wodzicki_res(&p.symbol, opts.power.grid.as_ref())? / m).norm() > RESIDUE_FLOOR {
                    return Err(Error::PolePoint(z));
                }
            }
            Ok(continue_at(|w| zeta(a, w, theta, opts), z)?.0)
        }
        r => r,
    }
}

/// 2iπ Res(Π_{θ,θ'}(a)).
pub fn eta_residue_at_zero(a: &ClassicalSymbol, theta: f64, theta_prime: f64, opts: &PowerOptions) -> Result<C64> {
    let p = sectorial_projection(a, theta, theta_prime, opts)?;
    Ok(C64::new(0.0, 2.0 * PI) * wodzicki_res(&p, opts.grid.as_ref())?)
}

/// Residue of η at 0 from a four-point fit of η samples at ±h, ±2h.
pub fn eta_residue_by_fit<F>(eta_at: F, h: f64) -> Result<C64>
where
    F: Fn(C64) -> Result<C64>,
{
    let zero = C64::new(0.0, 0.0);
    let samples = symmetric_points(zero, h).into_iter().map(|z| Ok((z, eta_at(z)?))).collect::<Result<Vec<_>>>()?;
    Ok(laurent_fit(&samples, zero, &[-1, 0, 1])?.coeff(-1))
}

/// ζ_{θ_up}(a, z) − ζ_{θ_down}(a, z), computed as the finite-part integral of
/// the difference of the two powers.
pub fn zeta_branch_difference(
    a: &ClassicalSymbol,
    z: C64,
    theta_up: f64,
    theta_down: f64,
    opts: &SpectralOptions,
) -> Result<C64> {
    order_of(a)?;
    let up = complex_power_with_report(a, -z, theta_up, &opts.power)?.symbol;
    let down = complex_power_with_report(a, -z, theta_down, &opts.power)?.symbol;
    let diff = up.sub(&down)?;
    match kv_tr_auto(&diff, &opts.tr) {
        Ok(v) => Ok(v.value),
        Err(Error::IntegerOrderPole(_)) => {
            // integer exponents: the two branches must agree as symbols
            let grid = opts.power.grid_for(a.n)?;
            let dev = max_component_deviation(&up, &down, opts.power.depth, &grid)?;
            if dev <= 1e-10 * up.principal().map_or(1.0, |c| c.magnitude().max(1.0)) {
                Ok(C64::new(0.0, 0.0))
            } else {
                Err(Error::PolePoint(z))
            }
        }
        Err(e) => Err(e),
    }
}

/// Richardson extrapolation to 0 of a quantity with linear error: 2f(h/2) − f(h).
pub fn richardson_to_zero(f_h: C64, f_half: C64) -> C64 {
    2.0 * f_half - f_h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn continuation_of_known_function() {
        // 1/z + 2 + z continued at 0
        let f = |z: C64| {
            Ok(MeromorphicSample {
                z,
                value: 1.0 / z + 2.0 + z,
                truncation_uncertainty: 0.0,
                method: Method::Oracle,
            })
        };
        let (s, res) = continue_at(f, C64::new(0.0, 0.0)).unwrap();
        assert!((s.value - 2.0).norm() < 1e-10);
        assert!((res - 1.0).norm() < 1e-10);
    }

    #[test]
    fn csv_row_has_six_columns() {
        let s = MeromorphicSample {
            z: C64::new(2.0, 0.0),
            value: C64::new(1.5, 0.0),
            truncation_uncertainty: 1e-3,
            method: Method::Symbolic,
        };
        assert_eq!(s.csv_row().split(',').count(), 6);
        assert_eq!(MeromorphicSample::csv_header().split(',').count(), 6);
    }
}
