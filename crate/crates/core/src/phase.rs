//! Bounding curves of the V-shaped region and the first-order transition
//! curve `β2 = q(β1)` inside it.
//!
//! For `β1 < β1_c` the boundary function `n` takes the value `−β1` at one
//! point `a` below `(p−1)/p` and one point `b` above it. The region where
//! `l` has two local maximizers is `m(b) < β2 < m(a)`. Across that interval
//! the difference `l(u2*) − l(u1*)` increases from negative to positive and
//! its zero is the transition value `q(β1)`.

use std::cell::Cell;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::maximizer::{branch_maxima, inflection_points, LocalMax};
use crate::scalar::{
    check_p, critical_density, critical_point, find_root, ipow, l, logit, sigmoid, ModelParams,
};

/// Required clearance below `β1_c`.
pub const REGION_MARGIN: f64 = 1e-9;

/// Below this distance from `β1_c` the transition point is reported as the
/// critical point itself.
pub const CORNER_CUTOFF: f64 = 1e-6;

/// Default tolerance on `l(u2*) − l(u1*)` at the transition.
pub const Q_TOL: f64 = 1e-10;

const BRACKET_SHRINK: [f64; 3] = [1e-9, 1e-6, 1e-3];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VBounds {
    pub beta1: f64,
    pub a: f64,
    pub b: f64,
    /// `m(b)`, the lower bounding curve.
    pub lower: f64,
    /// `m(a)`, the upper bounding curve.
    pub upper: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvePoint {
    pub beta1: f64,
    pub q: f64,
    pub u_low: f64,
    pub u_high: f64,
    /// Common value of the two maxima.
    pub psi: f64,
    /// Set when `β1` is within [`CORNER_CUTOFF`] of `β1_c` and the critical
    /// point was returned.
    pub degenerate: bool,
}

/// One row of a traced phase diagram.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurveRow {
    pub beta1: f64,
    pub lower: f64,
    pub q: f64,
    pub upper: f64,
    pub u_low: f64,
    pub u_high: f64,
    pub psi: f64,
}

impl CurveRow {
    pub fn new(bounds: &VBounds, point: &CurvePoint) -> Self {
        Self {
            beta1: point.beta1,
            lower: bounds.lower,
            q: point.q,
            upper: bounds.upper,
            u_low: point.u_low,
            u_high: point.u_high,
            psi: point.psi,
        }
    }
}

fn check_region(beta1: f64, p: u32) -> Result<f64> {
    check_p(p)?;
    let beta1_c = critical_point(p)?.beta1_c;
    if !beta1.is_finite() || beta1 > beta1_c - REGION_MARGIN {
        return Err(Error::OutOfRegion(format!(
            "beta1 = {beta1} must lie below beta1_c - {REGION_MARGIN} = {} for p = {p}",
            beta1_c - REGION_MARGIN
        )));
    }
    Ok(beta1_c)
}

/// `n` in the logit coordinate: `(1 + e^x)/(2(p−1)) − x/2`.
fn n_at_logit(x: f64, p: u32) -> f64 {
    (1.0 + x.exp()) / (2.0 * (p as f64 - 1.0)) - 0.5 * x
}

/// `m` in the logit coordinate.
fn m_at_logit(x: f64, p: u32) -> f64 {
    let pf = p as f64;
    1.0 / (2.0 * pf * (pf - 1.0) * ipow(sigmoid(x), p - 1) * sigmoid(-x))
}

pub fn v_bounds(beta1: f64, p: u32) -> Result<VBounds> {
    check_region(beta1, p)?;
    let xc = logit(critical_density(p));
    let g = |x: f64| n_at_logit(x, p) + beta1;
    // n diverges at both ends; widen in steps of ten in ε until the sign flips.
    let mut eps = 1e-3_f64;
    let x_lo = loop {
        let x = logit(eps);
        if g(x) > 0.0 {
            break x;
        }
        eps *= 0.1;
        if eps < 1e-300 {
            return Err(Error::Numeric("bracket underflow for a(beta1)".into()));
        }
    };
    let mut eps = 1e-3_f64;
    let x_hi = loop {
        let x = -logit(eps);
        if g(x) > 0.0 {
            break x;
        }
        eps *= 0.1;
        if eps < 1e-300 {
            return Err(Error::Numeric("bracket underflow for b(beta1)".into()));
        }
    };
    let xa = find_root(g, x_lo, xc, 0.0)?;
    let xb = find_root(g, xc, x_hi, 0.0)?;
    Ok(VBounds {
        beta1,
        a: sigmoid(xa),
        b: sigmoid(xb),
        lower: m_at_logit(xb, p),
        upper: m_at_logit(xa, p),
    })
}

/// Both local maximizers at `(β1, β2)` and `l(u2*) − l(u1*)`.
fn coexisting(beta1: f64, beta2: f64, p: u32) -> Result<(f64, LocalMax, LocalMax)> {
    let params = ModelParams::new(p, beta1, beta2)?;
    let pair = inflection_points(p, beta2)?.ok_or_else(|| {
        Error::Numeric(format!(
            "no inflection points at beta2 = {beta2} inside the V region"
        ))
    })?;
    match branch_maxima(&params, &pair)? {
        (Some(low), Some(high)) => Ok((high.l_value - low.l_value, low, high)),
        _ => Err(Error::Numeric(format!(
            "expected two local maximizers at ({beta1}, {beta2}), p = {p}"
        ))),
    }
}

fn degenerate_point(beta1: f64, p: u32) -> Result<CurvePoint> {
    let c = critical_point(p)?;
    let uc = critical_density(p);
    let psi = l(uc, &ModelParams::new(p, beta1, c.beta2_c)?)?;
    Ok(CurvePoint {
        beta1,
        q: c.beta2_c,
        u_low: uc,
        u_high: uc,
        psi,
        degenerate: true,
    })
}

/// Transition value `q(β1)`, located by bisection in `β2` on the sign of
/// `l(u2*) − l(u1*)` until its magnitude is at most `tol`.
pub fn transition_q(beta1: f64, p: u32, tol: f64) -> Result<CurvePoint> {
    let beta1_c = check_region(beta1, p)?;
    if !(tol >= 0.0) {
        return Err(Error::Parameter(format!(
            "tolerance must be >= 0, got {tol}"
        )));
    }
    if beta1_c - beta1 < CORNER_CUTOFF {
        return degenerate_point(beta1, p);
    }
    let bounds = v_bounds(beta1, p)?;
    let width = bounds.upper - bounds.lower;

    let mut bracket = None;
    for shrink in BRACKET_SHRINK {
        // Far from the corner `upper` grows like e^(−2β1), so the step
        // is capped by the bound itself as well as by the width.
        let lo = bounds.lower + shrink * width.min(bounds.lower);
        let hi = bounds.upper - shrink * width.min(bounds.upper);
        if let (Ok(at_lo), Ok(at_hi)) = (coexisting(beta1, lo, p), coexisting(beta1, hi, p)) {
            if at_lo.0 < 0.0 && at_hi.0 > 0.0 {
                bracket = Some((lo, hi, at_lo, at_hi));
                break;
            }
        }
    }
    let (mut lo, mut hi, at_lo, at_hi) = bracket.ok_or_else(|| {
        Error::Numeric(format!(
            "could not bracket the transition at beta1 = {beta1}, p = {p} in ({}, {})",
            bounds.lower, bounds.upper
        ))
    })?;
    // Keep the better-resolved end in case the loop exhausts the bracket.
    let mut best = if -at_lo.0 < at_hi.0 {
        (lo, at_lo)
    } else {
        (hi, at_hi)
    };

    for _ in 0..crate::scalar::MAX_BISECTIONS {
        if best.1 .0.abs() <= tol {
            break;
        }
        let mid = lo + 0.5 * (hi - lo);
        if mid <= lo || mid >= hi {
            break;
        }
        let at_mid = coexisting(beta1, mid, p)?;
        if at_mid.0.abs() < best.1 .0.abs() {
            best = (mid, at_mid);
        }
        if at_mid.0 < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (q, (_, low, high)) = best;
    Ok(CurvePoint {
        beta1,
        q,
        u_low: low.u,
        u_high: high.u,
        psi: low.l_value.max(high.l_value),
        degenerate: false,
    })
}

/// The `β1` at which the transition curve passes through `β2`.
pub fn transition_q_inverse(beta2: f64, p: u32) -> Result<f64> {
    check_p(p)?;
    let c = critical_point(p)?;
    if !beta2.is_finite() || beta2 <= c.beta2_c + REGION_MARGIN {
        return Err(Error::OutOfRegion(format!(
            "beta2 = {beta2} must exceed beta2_c + {REGION_MARGIN} = {} for p = {p}",
            c.beta2_c + REGION_MARGIN
        )));
    }
    let failure: Cell<Option<Error>> = Cell::new(None);
    let gap = |beta1: f64| match transition_q(beta1, p, Q_TOL) {
        Ok(cp) => cp.q - beta2,
        Err(e) => {
            failure.set(Some(e));
            f64::NAN
        }
    };

    let hi = c.beta1_c - REGION_MARGIN;
    // q(β1) + β1 → 0 as β1 → −∞, so −β2 − 1 is nearly always above the curve.
    let mut lo = (-beta2 - 1.0).min(hi - 1.0);
    let mut step = 1.0;
    while gap(lo) <= 0.0 {
        if let Some(e) = failure.take() {
            return Err(e);
        }
        step *= 2.0;
        lo -= step;
        if step > 1e6 {
            return Err(Error::Numeric(format!("could not bracket q^-1({beta2})")));
        }
    }
    let root = find_root(gap, lo, hi, 1e-12);
    match failure.take() {
        Some(e) => Err(e),
        None => root,
    }
}

/// `|q(β1) + β1|`, which vanishes as `β1 → −∞`.
pub fn asymptote_gap(beta1: f64, p: u32) -> Result<f64> {
    Ok((transition_q(beta1, p, Q_TOL)?.q + beta1).abs())
}

/// Bounding curves and transition point on a uniform `β1` grid.
pub fn trace_curves(
    p: u32,
    beta1_min: f64,
    beta1_max: f64,
    steps: usize,
) -> Result<Vec<(VBounds, CurvePoint)>> {
    check_region(beta1_max, p)?;
    if steps < 2 {
        return Err(Error::Parameter(format!("steps must be >= 2, got {steps}")));
    }
    if !(beta1_min < beta1_max) {
        return Err(Error::Parameter(format!(
            "beta1_min = {beta1_min} must be below beta1_max = {beta1_max}"
        )));
    }
    let h = (beta1_max - beta1_min) / (steps - 1) as f64;
    (0..steps)
        .into_par_iter()
        .map(|i| {
            let beta1 = if i + 1 == steps {
                beta1_max
            } else {
                beta1_min + i as f64 * h
            };
            Ok((v_bounds(beta1, p)?, transition_q(beta1, p, Q_TOL)?))
        })
        .collect()
}
