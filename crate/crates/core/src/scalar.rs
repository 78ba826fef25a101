//! Closed-form scalar functions of the free-energy functional
//!
//! ```text
//! l(u; β1, β2) = β1·u + β2·u^p − ½·u·log u − ½·(1−u)·log(1−u)
//! ```
//!
//! together with its first two derivatives, the inflection-level function
//! `m`, the boundary function `n`, the critical point and a bisection root
//! finder shared by every higher-level module.
//!
//! `l` is defined on the closed interval `[0, 1]` with the convention
//! `0·log 0 = 0`; its derivatives and `m`, `n` diverge at the endpoints and
//! are only defined on the open interval.

use serde::Serialize;

use crate::error::{Error, Result};

/// Largest supported edge count of the second subgraph.
pub const MAX_P: u32 = 64;

/// Default absolute tolerance for [`find_root`].
pub const ROOT_TOL: f64 = 1e-12;

/// Iteration cap for [`find_root`].
pub const MAX_BISECTIONS: usize = 200;

/// Parameters of a two-parameter model: the edge count `p` of the second
/// subgraph and the two coupling constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelParams {
    p: u32,
    beta1: f64,
    beta2: f64,
}

impl ModelParams {
    pub fn new(p: u32, beta1: f64, beta2: f64) -> Result<Self> {
        check_p(p)?;
        if !beta1.is_finite() {
            return Err(Error::Parameter(format!(
                "beta1 must be finite, got {beta1}"
            )));
        }
        if !beta2.is_finite() {
            return Err(Error::Parameter(format!(
                "beta2 must be finite, got {beta2}"
            )));
        }
        Ok(Self { p, beta1, beta2 })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn beta1(&self) -> f64 {
        self.beta1
    }

    pub fn beta2(&self) -> f64 {
        self.beta2
    }

    /// Same model with a different `beta1`.
    pub fn with_beta1(&self, beta1: f64) -> Result<Self> {
        Self::new(self.p, beta1, self.beta2)
    }

    /// Same model with a different `beta2`.
    pub fn with_beta2(&self, beta2: f64) -> Result<Self> {
        Self::new(self.p, self.beta1, beta2)
    }
}

/// Corner of the V-shaped region, where the transition curve ends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalPoint {
    pub beta1_c: f64,
    pub beta2_c: f64,
}

pub(crate) fn check_p(p: u32) -> Result<()> {
    if !(2..=MAX_P).contains(&p) {
        return Err(Error::Parameter(format!(
            "p must lie in 2..={MAX_P}, got {p}"
        )));
    }
    Ok(())
}

fn check_closed(name: &'static str, u: f64) -> Result<()> {
    if (0.0..=1.0).contains(&u) {
        Ok(())
    } else {
        Err(Error::Domain {
            name,
            value: u,
            domain: "[0, 1]",
        })
    }
}

fn check_open(name: &'static str, u: f64) -> Result<()> {
    if u > 0.0 && u < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain {
            name,
            value: u,
            domain: "(0, 1)",
        })
    }
}

/// `x^k` by repeated squaring.
pub fn ipow(x: f64, k: u32) -> f64 {
    let mut base = x;
    let mut exp = k;
    let mut acc = 1.0;
    while exp > 0 {
        if exp & 1 == 1 {
            acc *= base;
        }
        base *= base;
        exp >>= 1;
    }
    acc
}

/// `log(u / (1 − u))`.
pub(crate) fn logit(u: f64) -> f64 {
    u.ln() - (-u).ln_1p()
}

/// Logistic function, the inverse of [`logit`].
pub(crate) fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + e^x)` without overflow.
pub(crate) fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

fn xlogx(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

/// Entropy part of `l`: `−½·u·log u − ½·(1−u)·log(1−u)`.
pub fn entropy_term(u: f64) -> Result<f64> {
    check_closed("u", u)?;
    Ok(-0.5 * (xlogx(u) + xlogx(1.0 - u)))
}

/// The free-energy functional `l(u; β1, β2)` on `[0, 1]`.
pub fn l(u: f64, params: &ModelParams) -> Result<f64> {
    let s = entropy_term(u)?;
    Ok(params.beta1 * u + params.beta2 * ipow(u, params.p) + s)
}

/// `l'(u) = β1 + p·β2·u^(p−1) − ½·log(u/(1−u))` on `(0, 1)`.
pub fn l_prime(u: f64, params: &ModelParams) -> Result<f64> {
    check_open("u", u)?;
    let p = params.p;
    Ok(params.beta1 + p as f64 * params.beta2 * ipow(u, p - 1) - 0.5 * logit(u))
}

/// `l''(u) = p(p−1)·β2·u^(p−2) − 1/(2u(1−u))` on `(0, 1)`.
pub fn l_double_prime(u: f64, params: &ModelParams) -> Result<f64> {
    check_open("u", u)?;
    let p = params.p;
    let pf = p as f64;
    Ok(pf * (pf - 1.0) * params.beta2 * ipow(u, p - 2) - 0.5 / (u * (1.0 - u)))
}

/// `2p(p−1)·u^(p−1)·(1−u)`, the reciprocal of [`m`]; finite on `[0, 1]`.
pub(crate) fn m_reciprocal(u: f64, p: u32) -> f64 {
    let pf = p as f64;
    2.0 * pf * (pf - 1.0) * ipow(u, p - 1) * (1.0 - u)
}

/// `m(u) = 1 / (2p(p−1)·u^(p−1)·(1−u))`, the value of `β2` at which `u` is
/// an inflection point of `l`.
pub fn m(u: f64, p: u32) -> Result<f64> {
    check_p(p)?;
    check_open("u", u)?;
    Ok(1.0 / m_reciprocal(u, p))
}

/// `n(u) = 1/(2(p−1)(1−u)) − ½·log(u/(1−u))`, equal to `l'(u) − β1` when
/// `β2 = m(u)`.
pub fn n_func(u: f64, p: u32) -> Result<f64> {
    check_p(p)?;
    check_open("u", u)?;
    Ok(0.5 / ((p as f64 - 1.0) * (1.0 - u)) - 0.5 * logit(u))
}

/// The common minimiser `(p−1)/p` of `m` and `n`.
pub fn critical_density(p: u32) -> f64 {
    (p as f64 - 1.0) / p as f64
}

pub fn critical_point(p: u32) -> Result<CriticalPoint> {
    check_p(p)?;
    let pf = p as f64;
    let beta1_c = 0.5 * (pf - 1.0).ln() - pf / (2.0 * (pf - 1.0));
    let beta2_c = ipow(pf, p - 1) / (2.0 * ipow(pf - 1.0, p));
    Ok(CriticalPoint { beta1_c, beta2_c })
}

/// Bisection on a bracket `[lo, hi]` where `f` changes sign.
///
/// Returns `x` within `tol` of the root. With `tol = 0` the bracket is
/// halved until its midpoint is no longer representable, which gives the
/// root to full double precision regardless of its magnitude.
pub fn find_root<F>(mut f: F, lo: f64, hi: f64, tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::Parameter(format!("invalid bracket [{lo}, {hi}]")));
    }
    if !(tol >= 0.0) {
        return Err(Error::Parameter(format!(
            "tolerance must be >= 0, got {tol}"
        )));
    }
    let (mut lo, mut hi) = (lo, hi);
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if !f_lo.is_finite() || !f_hi.is_finite() {
        return Err(Error::Numeric(format!(
            "non-finite value at bracket end: f({lo})={f_lo}, f({hi})={f_hi}"
        )));
    }
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::Bracket { lo, hi, f_lo, f_hi });
    }
    for _ in 0..MAX_BISECTIONS {
        if hi - lo <= 2.0 * tol {
            return Ok(lo + 0.5 * (hi - lo));
        }
        let mid = lo + 0.5 * (hi - lo);
        if mid <= lo || mid >= hi {
            return Ok(mid);
        }
        let f_mid = f(mid);
        if !f_mid.is_finite() {
            return Err(Error::Numeric(format!("non-finite value f({mid})={f_mid}")));
        }
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    if hi - lo <= 2.0 * tol {
        Ok(lo + 0.5 * (hi - lo))
    } else {
        Err(Error::Numeric(format!(
            "bisection did not reach tolerance {tol} in {MAX_BISECTIONS} steps; bracket [{lo}, {hi}]"
        )))
    }
}
