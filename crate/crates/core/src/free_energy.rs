//! Limiting free energy `ψ∞(β1, β2) = sup_u l(u; β1, β2)` and its
//! derivatives.
//!
//! Off the transition curve the global maximizer `u*` is unique and
//!
//! ```text
//! ∂ψ/∂β1 = u*            ∂ψ/∂β2 = (u*)^p
//! ∂²ψ/∂β1²    = −1 / l''(u*)
//! ∂²ψ/∂β1∂β2  = −p(u*)^(p−1) / l''(u*)
//! ∂²ψ/∂β2²    = −(p(u*)^(p−1))² / l''(u*)
//! ```
//!
//! The first derivatives jump across the curve and the second derivatives
//! blow up at the critical point, where `l''(u*) → 0`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::maximizer::{local_maximizers, MaximizerReport, Region};
use crate::phase::{transition_q, CORNER_CUTOFF, Q_TOL};
use crate::scalar::{critical_point, ipow, ModelParams};
use crate::sim::Subgraph;

/// Half-width, in `β2`, of the band treated as lying on the curve.
pub const ON_CURVE_BAND: f64 = 10.0 * Q_TOL;

/// `|l''(u*)|` at or below which the Hessian is reported as divergent.
pub const CURVATURE_FLOOR: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Validity {
    /// `β2 > −2/(p(p−1))`: the variational formula and analyticity hold for
    /// any second subgraph.
    ProvenGeneral,
    /// Below that line, established only when the second subgraph is a star.
    ProvenStarOnly,
    Unproven,
}

impl Validity {
    pub fn as_str(&self) -> &'static str {
        match self {
            Validity::ProvenGeneral => "ProvenGeneral",
            Validity::ProvenStarOnly => "ProvenStarOnly",
            Validity::Unproven => "Unproven",
        }
    }
}

pub fn validity(params: &ModelParams, h2: Subgraph) -> Validity {
    let p = params.p() as f64;
    if params.beta2() > -2.0 / (p * (p - 1.0)) {
        Validity::ProvenGeneral
    } else if matches!(h2, Subgraph::PStar(_)) {
        Validity::ProvenStarOnly
    } else {
        Validity::Unproven
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PsiReport {
    pub psi: f64,
    pub du_beta1: Option<f64>,
    pub du_beta2: Option<f64>,
    pub d2_b1b1: Option<f64>,
    pub d2_b1b2: Option<f64>,
    pub d2_b2b2: Option<f64>,
    pub on_curve: bool,
    pub validity: Validity,
}

pub fn psi_infinity(params: &ModelParams) -> Result<f64> {
    Ok(local_maximizers(params)?.max_value())
}

fn gradient_of(u: f64, p: u32) -> (f64, f64) {
    (u, ipow(u, p))
}

/// Checks whether `params` sits on the transition curve; on the curve the
/// error carries the gradient of each branch.
fn off_curve(params: &ModelParams, report: &MaximizerReport) -> Result<()> {
    if report.region != Region::TwoLocal {
        return Ok(());
    }
    let p = params.p();
    let beta1_c = critical_point(p)?.beta1_c;
    if beta1_c - params.beta1() < CORNER_CUTOFF {
        return Ok(());
    }
    let cp = transition_q(params.beta1(), p, Q_TOL)?;
    if (params.beta2() - cp.q).abs() <= ON_CURVE_BAND {
        return Err(Error::Coexistence {
            beta1: params.beta1(),
            beta2: params.beta2(),
            low: gradient_of(report.locals[0].u, p),
            high: gradient_of(report.locals[1].u, p),
        });
    }
    Ok(())
}

/// `(∂ψ/∂β1, ∂ψ/∂β2) = (u*, (u*)^p)` off the transition curve.
pub fn psi_gradient(params: &ModelParams) -> Result<(f64, f64)> {
    let report = local_maximizers(params)?;
    off_curve(params, &report)?;
    Ok(gradient_of(report.best().u, params.p()))
}

/// `(∂²ψ/∂β1², ∂²ψ/∂β1∂β2, ∂²ψ/∂β2²)` off the transition curve and away
/// from the critical point.
pub fn psi_hessian(params: &ModelParams) -> Result<(f64, f64, f64)> {
    let report = local_maximizers(params)?;
    off_curve(params, &report)?;
    let best = report.best();
    if report.region == Region::Critical || best.l_curvature.abs() <= CURVATURE_FLOOR {
        return Err(Error::CriticalDivergence {
            u: best.u,
            curvature: best.l_curvature,
        });
    }
    Ok(hessian_of(best.u, best.l_curvature, params.p()))
}

fn hessian_of(u: f64, curvature: f64, p: u32) -> (f64, f64, f64) {
    let w = p as f64 * ipow(u, p - 1);
    (-1.0 / curvature, -w / curvature, -w * w / curvature)
}

/// Everything known about `ψ∞` at one parameter point. Derivatives that do
/// not exist there (on the curve, or second derivatives at the critical
/// point) are `None`.
pub fn psi_report(params: &ModelParams, h2: Subgraph) -> Result<PsiReport> {
    let report = local_maximizers(params)?;
    let best = *report.best();
    let on_curve = match off_curve(params, &report) {
        Ok(()) => false,
        Err(Error::Coexistence { .. }) => true,
        Err(e) => return Err(e),
    };
    let mut out = PsiReport {
        psi: best.l_value,
        du_beta1: None,
        du_beta2: None,
        d2_b1b1: None,
        d2_b1b2: None,
        d2_b2b2: None,
        on_curve,
        validity: validity(params, h2),
    };
    if !on_curve {
        let (g1, g2) = gradient_of(best.u, params.p());
        out.du_beta1 = Some(g1);
        out.du_beta2 = Some(g2);
        if report.region != Region::Critical && best.l_curvature.abs() > CURVATURE_FLOOR {
            let (h11, h12, h22) = hessian_of(best.u, best.l_curvature, params.p());
            out.d2_b1b1 = Some(h11);
            out.d2_b1b2 = Some(h12);
            out.d2_b2b2 = Some(h22);
        }
    }
    Ok(out)
}

/// Jump of `(∂ψ/∂β1, ∂ψ/∂β2)` across the transition curve at `β1`:
/// `(u2* − u1*, (u2*)^p − (u1*)^p)`.
pub fn jump_across_curve(beta1: f64, p: u32) -> Result<(f64, f64)> {
    let beta1_c = critical_point(p)?.beta1_c;
    if !(beta1 < beta1_c - CORNER_CUTOFF) {
        return Err(Error::OutOfRegion(format!(
            "beta1 = {beta1} must lie below beta1_c - {CORNER_CUTOFF} = {}",
            beta1_c - CORNER_CUTOFF
        )));
    }
    let cp = transition_q(beta1, p, Q_TOL)?;
    Ok((cp.u_high - cp.u_low, ipow(cp.u_high, p) - ipow(cp.u_low, p)))
}
