//! Local and global maximizers of `l(u; β1, β2)` on `[0, 1]`.
//!
//! The shape of `l'` is fixed by the inflection points of `l`, the two
//! solutions `u1 < (p−1)/p < u2` of `m(u) = β2` (present only above the
//! critical level `β2_c`). `l'` decreases on `(0, u1)`, increases on
//! `(u1, u2)` and decreases again on `(u2, 1)`, so every local maximizer is
//! the unique root of `l'` on one of the two outer segments and can be
//! located by bisection.
//!
//! Roots are bracketed in the logit coordinate `x = log(u/(1−u))`, where
//! `l'` stays finite and maximizers close to `0` or `1` keep full relative
//! precision.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::{
    check_p, critical_density, critical_point, find_root, ipow, logit, sigmoid, softplus,
    ModelParams,
};

/// Default tolerance on `l(u1*) − l(u2*)` for declaring two maxima tied.
pub const DEFAULT_TIE_TOL: f64 = 1e-10;

/// Tolerance on the equalities `l'(u1) = 0`, `l'(u2) = 0` and on the
/// distance to the critical point used for the boundary labels.
pub const BOUNDARY_TOL: f64 = 1e-9;

const EPS_START: f64 = 1e-3;
const EPS_FLOOR: f64 = 1e-300;

/// Inflection points of `l`, the two solutions of `m(u) = β2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InflectionPair {
    pub u1: f64,
    pub u2: f64,
    /// Logit coordinates of `u1` and `u2`; these stay distinct from the
    /// endpoints when `u2` rounds to 1.
    pub x1: f64,
    pub x2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Region {
    /// `β2 ≤ β2_c`: `l'' ≤ 0` everywhere.
    UniqueSubcritical,
    /// Above the upper bounding curve: single maximizer beyond `u2`.
    UniqueAboveV,
    /// Below the lower bounding curve: single maximizer below `u1`.
    UniqueBelowV,
    /// Strictly inside the V-shaped region.
    TwoLocal,
    /// `l'(u2) = 0` within tolerance.
    OnLowerBoundary,
    /// `l'(u1) = 0` within tolerance.
    OnUpperBoundary,
    /// Within tolerance of the critical point.
    Critical,
}

impl Region {
    pub fn as_str(&self) -> &'static str {
        match self {
            Region::UniqueSubcritical => "UniqueSubcritical",
            Region::UniqueAboveV => "UniqueAboveV",
            Region::UniqueBelowV => "UniqueBelowV",
            Region::TwoLocal => "TwoLocal",
            Region::OnLowerBoundary => "OnLowerBoundary",
            Region::OnUpperBoundary => "OnUpperBoundary",
            Region::Critical => "Critical",
        }
    }
}

/// A local maximizer of `l` with its value and curvature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LocalMax {
    pub u: f64,
    pub l_value: f64,
    pub l_curvature: f64,
    /// `log(u/(1−u))`; retains precision when `u` rounds to 0 or 1.
    #[serde(skip)]
    pub logit: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaximizerReport {
    pub region: Region,
    /// Local maximizers in increasing order of `u`.
    pub locals: Vec<LocalMax>,
    /// Global maximizers in increasing order of `u`.
    pub globals: Vec<f64>,
}

impl MaximizerReport {
    /// Local maximizer with the largest `l` value (the lower one on ties).
    pub fn best(&self) -> &LocalMax {
        self.locals.iter().fold(&self.locals[0], |best, lm| {
            if lm.l_value > best.l_value {
                lm
            } else {
                best
            }
        })
    }

    /// The global maximum of `l`.
    pub fn max_value(&self) -> f64 {
        self.best().l_value
    }
}

/// `l'(σ(x))` evaluated in the logit coordinate.
pub(crate) fn slope_at_logit(x: f64, params: &ModelParams) -> f64 {
    let p = params.p();
    params.beta1() + p as f64 * params.beta2() * ipow(sigmoid(x), p - 1) - 0.5 * x
}

/// `l(σ(x))` with the entropy written through `softplus` so that it stays
/// accurate when `σ(x)` is within rounding of an endpoint.
pub(crate) fn value_at_logit(x: f64, params: &ModelParams) -> f64 {
    let u = sigmoid(x);
    let v = sigmoid(-x);
    let entropy = 0.5 * (u * softplus(-x) + v * softplus(x));
    params.beta1() * u + params.beta2() * ipow(u, params.p()) + entropy
}

pub(crate) fn curvature_at_logit(x: f64, params: &ModelParams) -> f64 {
    let p = params.p() as f64;
    let u = sigmoid(x);
    let v = sigmoid(-x);
    p * (p - 1.0) * params.beta2() * ipow(u, params.p() - 2) - 0.5 / (u * v)
}

fn local_at_logit(x: f64, params: &ModelParams) -> LocalMax {
    LocalMax {
        u: sigmoid(x),
        l_value: value_at_logit(x, params),
        l_curvature: curvature_at_logit(x, params),
        logit: x,
    }
}

pub fn inflection_points(p: u32, beta2: f64) -> Result<Option<InflectionPair>> {
    check_p(p)?;
    let beta2_c = critical_point(p)?.beta2_c;
    if !(beta2 > beta2_c) {
        return Ok(None);
    }
    // m(u) = β2  <=>  1/m(u) − 1/β2 = 0, solved in the logit coordinate,
    // where 1/m is finite and tends to 0 at both ends.
    let target = 1.0 / beta2;
    let pf = p as f64;
    let g = |x: f64| 2.0 * pf * (pf - 1.0) * ipow(sigmoid(x), p - 1) * sigmoid(-x) - target;
    let xc = logit(critical_density(p));
    if !(g(xc) > 0.0) {
        // β2 within rounding of β2_c: the two points have merged.
        return Ok(None);
    }
    let outward = |dir: f64| -> Result<f64> {
        let mut step = 1.0_f64;
        while step.is_finite() {
            let x = xc + dir * step;
            if g(x) < 0.0 {
                return Ok(x);
            }
            step *= 2.0;
        }
        Err(Error::Numeric(format!(
            "cannot bracket the inflection points at beta2 = {beta2}"
        )))
    };
    let x1 = find_root(g, outward(-1.0)?, xc, 0.0)?;
    let x2 = find_root(g, xc, outward(1.0)?, 0.0)?;
    if !(x1 < xc && xc < x2) {
        return Ok(None);
    }
    Ok(Some(InflectionPair {
        u1: sigmoid(x1),
        u2: sigmoid(x2),
        x1,
        x2,
    }))
}

/// Logit coordinate of `ε`, starting at `1e-3` and shrinking by ten until
/// `pred` holds. Past the smallest representable `ε` the search continues
/// by doubling in the logit coordinate, where large `|β2|` can put a
/// maximizer at `|x|` in the thousands.
fn adaptive_endpoint(pred: impl Fn(f64) -> bool) -> Result<f64> {
    let mut eps = EPS_START;
    let mut x = logit(eps);
    while eps >= EPS_FLOOR {
        x = logit(eps);
        if pred(x) {
            return Ok(x);
        }
        eps *= 0.1;
    }
    while x.is_finite() {
        x *= 2.0;
        if pred(x) {
            return Ok(x);
        }
    }
    Err(Error::Numeric(
        "bracket endpoint underflow while isolating a maximizer".into(),
    ))
}

/// Root of `l'` between `x_lo` (where `l' > 0`) and `x_hi` (where `l' < 0`).
fn root_between(x_lo: f64, x_hi: f64, params: &ModelParams) -> Result<LocalMax> {
    let x = find_root(|x| slope_at_logit(x, params), x_lo, x_hi, 0.0)?;
    Ok(local_at_logit(x, params))
}

fn lower_branch(x_u1: f64, params: &ModelParams) -> Result<LocalMax> {
    let x_lo = adaptive_endpoint(|x| x < x_u1 && slope_at_logit(x, params) > 0.0)?;
    root_between(x_lo, x_u1, params)
}

fn upper_branch(x_u2: f64, params: &ModelParams) -> Result<LocalMax> {
    let x_hi = -adaptive_endpoint(|x| -x > x_u2 && slope_at_logit(-x, params) < 0.0)?;
    root_between(x_u2, x_hi, params)
}

fn full_range(params: &ModelParams) -> Result<LocalMax> {
    let x_lo = adaptive_endpoint(|x| slope_at_logit(x, params) > 0.0)?;
    let x_hi = -adaptive_endpoint(|x| slope_at_logit(-x, params) < 0.0)?;
    root_between(x_lo, x_hi, params)
}

/// Values of `l'` at the two inflection points.
fn inflection_slopes(pair: &InflectionPair, params: &ModelParams) -> (f64, f64, f64, f64) {
    let (x1, x2) = (pair.x1, pair.x2);
    (
        x1,
        x2,
        slope_at_logit(x1, params),
        slope_at_logit(x2, params),
    )
}

/// Both local maximizers by strict sign tests, without boundary
/// tolerances. Used where the caller already knows the point lies inside
/// the V-shaped region, arbitrarily close to its boundary.
pub(crate) fn branch_maxima(
    params: &ModelParams,
    pair: &InflectionPair,
) -> Result<(Option<LocalMax>, Option<LocalMax>)> {
    let (x1, x2, d1, d2) = inflection_slopes(pair, params);
    let low = if d1 < 0.0 {
        Some(lower_branch(x1, params)?)
    } else {
        None
    };
    let high = if d2 > 0.0 {
        Some(upper_branch(x2, params)?)
    } else {
        None
    };
    Ok((low, high))
}

fn near_critical(params: &ModelParams) -> Result<bool> {
    let c = critical_point(params.p())?;
    Ok((params.beta1() - c.beta1_c).abs() <= BOUNDARY_TOL
        && (params.beta2() - c.beta2_c).abs() <= BOUNDARY_TOL)
}

fn region_from_slopes(d1: f64, d2: f64) -> Region {
    if d1.abs() <= BOUNDARY_TOL {
        Region::OnUpperBoundary
    } else if d2.abs() <= BOUNDARY_TOL {
        Region::OnLowerBoundary
    } else if d1 > 0.0 {
        Region::UniqueAboveV
    } else if d2 < 0.0 {
        Region::UniqueBelowV
    } else {
        Region::TwoLocal
    }
}

/// Region of the `(β1, β2)` plane containing `params`.
pub fn classify(params: &ModelParams) -> Result<Region> {
    if near_critical(params)? {
        return Ok(Region::Critical);
    }
    match inflection_points(params.p(), params.beta2())? {
        None => Ok(Region::UniqueSubcritical),
        Some(pair) => {
            let (_, _, d1, d2) = inflection_slopes(&pair, params);
            Ok(region_from_slopes(d1, d2))
        }
    }
}

/// Full maximizer report with the default tie tolerance.
pub fn local_maximizers(params: &ModelParams) -> Result<MaximizerReport> {
    analyze(params, DEFAULT_TIE_TOL)
}

/// Global maximizers of `l` over `[0, 1]`; two entries only when the two
/// local maxima differ by at most `tie_tol`.
pub fn global_maximizers(params: &ModelParams, tie_tol: f64) -> Result<Vec<f64>> {
    Ok(analyze(params, tie_tol)?.globals)
}

pub fn analyze(params: &ModelParams, tie_tol: f64) -> Result<MaximizerReport> {
    if !(tie_tol >= 0.0) {
        return Err(Error::Parameter(format!(
            "tie tolerance must be >= 0, got {tie_tol}"
        )));
    }
    let (region, locals) = if near_critical(params)? {
        (Region::Critical, vec![full_range(params)?])
    } else {
        match inflection_points(params.p(), params.beta2())? {
            None => (Region::UniqueSubcritical, vec![full_range(params)?]),
            Some(pair) => {
                let (x1, x2, d1, d2) = inflection_slopes(&pair, params);
                let region = region_from_slopes(d1, d2);
                let mut locals = Vec::with_capacity(2);
                // A slope within tolerance of zero at an inflection point is a
                // stationary inflection, not a maximizer.
                if d1 < -BOUNDARY_TOL {
                    locals.push(lower_branch(x1, params)?);
                }
                if d2 > BOUNDARY_TOL {
                    locals.push(upper_branch(x2, params)?);
                }
                if locals.is_empty() {
                    locals.push(full_range(params)?);
                }
                (region, locals)
            }
        }
    };
    let best = locals
        .iter()
        .map(|lm| lm.l_value)
        .fold(f64::NEG_INFINITY, f64::max);
    let globals = locals
        .iter()
        .filter(|lm| best - lm.l_value <= tie_tol)
        .map(|lm| lm.u)
        .collect();
    Ok(MaximizerReport {
        region,
        locals,
        globals,
    })
}
