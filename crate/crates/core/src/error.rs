use thiserror::Error;

/// Gradient of the limiting free energy on one branch: `(u, u^p)`.
pub type BranchGradient = (f64, f64);

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("argument {name}={value} outside its domain {domain}")]
    Domain {
        name: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("root not bracketed: f({lo})={f_lo}, f({hi})={f_hi}")]
    Bracket {
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("out of region: {0}")]
    OutOfRegion(String),

    #[error(
        "({beta1}, {beta2}) lies on the transition curve; branch gradients {low:?} and {high:?}"
    )]
    Coexistence {
        beta1: f64,
        beta2: f64,
        low: BranchGradient,
        high: BranchGradient,
    },

    #[error("second derivatives diverge: l''(u*) = {curvature:e} at u* = {u}")]
    CriticalDivergence { u: f64, curvature: f64 },

    #[error("exact enumeration supports n <= {max}, got n = {n}")]
    Size { n: usize, max: usize },

    #[error("i/o: {0}")]
    Io(String),
}

impl Error {
    /// Process exit code for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Domain { .. } | Error::Parameter(_) | Error::Size { .. } => 2,
            Error::OutOfRegion(_) | Error::Coexistence { .. } => 3,
            Error::Bracket { .. } | Error::Numeric(_) | Error::CriticalDivergence { .. } => 4,
            Error::Io(_) => 5,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
