use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Failure modes of the operator calculus.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("singular matrix: pivot {pivot:.3e} at step {step} below threshold {threshold:.3e}")]
    SingularMatrix { step: usize, pivot: f64, threshold: f64 },

    #[error("square-root iteration failed to converge after {iterations} iterations (residual {residual:.3e})")]
    IterationDiverged { iterations: usize, residual: f64 },

    #[error("eigenvalue {re:.3e}{im:+.3e}i lies on the branch cut (-inf, 0]")]
    SpectrumOnCut { re: f64, im: f64 },

    #[error("power iteration did not converge in {iterations} iterations; last interval [{lower:.6e}, {upper:.6e}]")]
    NoConvergence { iterations: usize, lower: f64, upper: f64 },

    #[error("matrix is not real symmetric (asymmetry {0:.3e})")]
    NotSymmetric(f64),

    #[error("Volterra kernel does not vanish on y = 1 (|phi(1, xi)| = {0:.3e})")]
    KernelRowNonzeroAtOne(f64),

    #[error("oblique coefficient does not vanish at the endpoints (c(0) = {c0:.3e}, c(1) = {c1:.3e})")]
    CoefficientBoundaryNonzero { c0: f64, c1: f64 },

    #[error("fractional order nu = {0} outside (0, 1)")]
    NuOutOfRange(f64),

    #[error("resolvent singular at lambda = {re:.6e}{im:+.6e}i")]
    SingularResolvent { re: f64, im: f64 },

    #[error("determinant operator Lambda is singular at lambda = {lambda_re:.4e}{lambda_im:+.4e}i, mu = {mu_re:.4e}{mu_im:+.4e}i")]
    LambdaSingular {
        lambda_re: f64,
        lambda_im: f64,
        mu_re: f64,
        mu_im: f64,
    },

    #[error("resolvent (A - tI) singular at t = {0:.6e}")]
    ResolventSingular(f64),

    #[error("Q_lambda - H_mu is singular")]
    QminusHSingular,

    #[error("spectral point outside the admissible region: {0}")]
    RegionViolation(String),

    #[error("no admissible region threshold found below {0:.3e}")]
    RegionNotFound(f64),

    #[error("block tridiagonal elimination broke down at block {0}")]
    BlockSingular(usize),
}

impl Error {
    /// True for errors signalling that a spectral point lies outside the
    /// invertibility region rather than a numerical breakdown.
    pub fn is_region_error(&self) -> bool {
        matches!(
            self,
            Error::RegionViolation(_) | Error::LambdaSingular { .. } | Error::RegionNotFound(_)
        )
    }
}
