use thiserror::Error;

/// Everything that can go wrong in the numerical pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    Domain(String),

    #[error("state left the positive half-line (x = {x:e} at t = {t})")]
    PositivityViolation { t: f64, x: f64 },

    #[error("step budget of {max_steps} exhausted at t = {t}")]
    BudgetExceeded { max_steps: usize, t: f64 },

    #[error("start state is the equilibrium; no section return exists")]
    Equilibrium,

    #[error("energy {c} outside the admissible band [{lo}, {hi}]")]
    EnergyOutOfBand { c: f64, lo: f64, hi: f64 },

    #[error(
        "quadrature did not reach rel. tol {tol:e} within {panels} panels (estimate {estimate})"
    )]
    QuadratureNonConvergence {
        tol: f64,
        panels: usize,
        estimate: f64,
    },

    #[error("no bracket: {0}")]
    Bracket(String),

    #[error(
        "period {period} does not exceed the threshold T0 = {t0}; only constant solutions exist"
    )]
    ThresholdViolation { period: f64, t0: f64 },

    #[error("period {period} not attained on the scanned band: T(c) ranges over [{t_min}, {t_max}]{note}")]
    NoBracket {
        period: f64,
        t_min: f64,
        t_max: f64,
        note: String,
    },

    #[error("{what} = {value:e} exceeds the declared tolerance {limit:e}")]
    ToleranceBreach {
        what: &'static str,
        value: f64,
        limit: f64,
    },

    #[error("profile has {got} samples, need at least {need}")]
    TooFewSamples { got: usize, need: usize },

    #[error("warping function not positive at sample {index} (f = {value})")]
    NonPositiveWarp { index: usize, value: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
