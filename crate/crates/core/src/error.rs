use thiserror::Error;

/// Errors raised by the evaluators and the oracle.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unsupported dimension {0}; only n = 2 and n = 3 are implemented")]
    UnsupportedDimension(usize),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("Bessel order {0} is neither an integer nor a half-integer")]
    UnsupportedBesselOrder(f64),

    #[error("harmonic index (s = {degree}, i = {index}) out of range for n = {n}")]
    HarmonicIndex { n: usize, degree: usize, index: usize },

    #[error("perturbation is not mean-free: s = 0 coefficient is {0:e}")]
    NotMeanFree(f64),

    #[error("perturbation has degree-1 content (norm {0:e}); barycenter condition fails")]
    BarycenterViolated(f64),

    #[error("domain is not star-shaped: r(θ, t) = {min_radius:e} at some node")]
    NotStarShaped { min_radius: f64 },

    #[error("root bracketing failed on [{lo}, {hi}]: f(lo) = {f_lo:e}, f(hi) = {f_hi:e}")]
    Bracketing { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },

    #[error("degenerate configuration: a_s(R) vanishes for degree {degree}")]
    DegenerateSteklov { degree: usize },

    #[error("singular shape derivative: Steklov eigenvalue μ = {mu:e} at degree {degree} with nonzero data")]
    SingularShapeDerivative { degree: usize, mu: f64 },

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("ill-conditioned collocation system (condition estimate {0:e})")]
    IllConditioned(f64),

    #[error("oracle residual {residual:e} exceeds tolerance {tolerance:e}")]
    OracleResidual { residual: f64, tolerance: f64 },

    #[error("finite-difference step too small: round-off {roundoff:e} dominates level disagreement {spread:e}")]
    StepTooSmall { roundoff: f64, spread: f64 },

    #[error("wrong problem kind: expected {expected}, got {got}")]
    WrongKind { expected: &'static str, got: &'static str },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dimension(n: usize) -> Result<()> {
    if n == 2 || n == 3 {
        Ok(())
    } else {
        Err(Error::UnsupportedDimension(n))
    }
}
