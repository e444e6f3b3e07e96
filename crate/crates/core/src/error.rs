use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("cumulant generating function is not finite at theta = {theta}")]
    TiltOverflow { theta: f64 },
    #[error("tilted variance {k2:e} at theta = {theta} is numerically zero")]
    DegenerateVariance { theta: f64, k2: f64 },
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("threshold a/n = {ratio} is outside the open support hull ({lo}, {hi})")]
    OutOfHull { ratio: f64, lo: f64, hi: f64 },
    #[error("root finder did not converge after {iterations} iterations")]
    NoConvergence { iterations: usize },
    #[error("convolution would produce {points} support points, budget is {budget}")]
    TooLarge { points: usize, budget: usize },
    #[error("bad parameters: {0}")]
    BadParams(String),
    #[error("bad channel: {0}")]
    BadChannel(String),
    #[error("quadrature failed: {0}")]
    QuadratureFailure(String),
    #[error("quadrature budget: {0}")]
    QuadratureBudget(String),
}

pub type Result<T> = std::result::Result<T, Error>;
