//! Saddlepoint approximations for sums of i.i.d. random variables, with
//! certified error envelopes, and their use in bounding the dependence-testing
//! and meta-converse finite-blocklength bounds.
//!
//! Distributions are finite weighted supports ([`Distribution`]); continuous
//! laws enter as quadrature discretizations. The tilted-moment and saddlepoint
//! engines are generic over [`Real`] (`f32`/`f64`); channel models, the bound
//! stacks and the oracles work in `f64`.

// `!(x > 0.0)` is how NaN gets rejected here, and the rational-approximation
// coefficients are kept as published.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod channels;
pub mod distribution;
pub mod error;
pub mod fbl;
pub mod gauss;
pub mod oracle;
mod quad;
pub mod real;
pub mod saddlepoint;
pub mod special;
pub mod stable;
pub mod tilt;

pub use distribution::{DistKind, Distribution, QuadratureSource};
pub use error::{Error, Result};
pub use real::Real;
pub use saddlepoint::{BoundEnvelope, EnvelopeMethod, SaddlepointSolve};
pub use tilt::{tilt_distribution, tilted_moments, TiltedMoments};

pub type Distribution64 = Distribution<f64>;
pub type Distribution32 = Distribution<f32>;
pub type TiltedMoments64 = TiltedMoments<f64>;
pub type TiltedMoments32 = TiltedMoments<f32>;
pub type BoundEnvelope64 = BoundEnvelope<f64>;
pub type BoundEnvelope32 = BoundEnvelope<f32>;
