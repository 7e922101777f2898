use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// Some channel sits (numerically) at an opening threshold, `a_n == 0`.
    #[error("channel {n} is at threshold: |a_n| = {a:.3e} <= tolerance {tolerance:.3e}")]
    ThresholdChannel { n: usize, a: f64, tolerance: f64 },

    #[error("truncation T = {truncation} is too small: channel {truncation} is still open")]
    TruncationTooSmall { truncation: usize },

    #[error("x = {x} is outside the allowed domain {domain}")]
    Domain { x: f64, domain: &'static str },

    #[error("cannot allocate a {dimension}x{dimension} complex system ({bytes} bytes)")]
    Resource { dimension: usize, bytes: u128 },

    /// A pivot of the LU factorization fell below the singularity threshold.
    /// Usually a quasi-bound resonance or a configuration close to threshold.
    #[error("singular system: pivot {pivot:.3e} below threshold {threshold:.3e}")]
    SingularSystem { pivot: f64, threshold: f64 },

    #[error("oracle did not converge: |r| changed by {change:.3e} at {steps} steps")]
    NonConvergence { steps: usize, change: f64 },

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
