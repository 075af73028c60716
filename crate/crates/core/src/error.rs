use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    Params(String),

    #[error("non-finite value in {what} at node ({0}, {1})", .index.0, .index.1)]
    NonFinite {
        what: &'static str,
        index: (usize, usize),
    },

    #[error("Hermitian symmetry violated: relative deviation {dev:.3e} exceeds {tol:.3e}")]
    SymmetryViolation { dev: f64, tol: f64 },

    #[error("field is not mean-zero: |integral| = {mass:.3e} against scale {scale:.3e}")]
    NotMeanZero { mass: f64, scale: f64 },

    #[error("multiplier symbol is not even in k near ({0}, {1})", .k.0, .k.1)]
    OddSymbol { k: (i64, i64) },

    #[error("backward flow is ill-posed: t = {t} must be nonnegative")]
    NegativeTime { t: f64 },

    #[error("modified energy undefined at this resolution/tau: mode ({0}, {1}) overflows (log-term {log_term:.1})", .k.0, .k.1)]
    EnergyUndefined { k: (i64, i64), log_term: f64 },

    #[error("grid too coarse for kernel at beta = {beta:.3e}: n = {n}, need n >= {min_n}")]
    KernelResolution { beta: f64, n: usize, min_n: usize },

    #[error("zero field rejected: {0}")]
    ZeroField(&'static str),

    #[error("time steps must divide the horizon: tau = {tau} does not divide {base}")]
    NonDivisible { tau: f64, base: f64 },

    #[error("bisection bracket rejected: energy decay already fails at tau_lo = {tau_lo:.3e}")]
    BracketRejected { tau_lo: f64 },

    #[error("{0}")]
    Io(String),
}
