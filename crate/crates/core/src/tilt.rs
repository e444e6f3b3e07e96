use serde::{Deserialize, Serialize};

use crate::distribution::Distribution;
use crate::error::{Error, Result};
use crate::real::Real;

/// Berry–Esseen style constants inside `xi`.
pub const C1: f64 = 0.33554;
pub const C2: f64 = 0.415;

/// CGF value and tilted moments at one tilt.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TiltedMoments<T: Real = f64> {
    pub theta: T,
    /// `K(theta)`, the cumulant generating function.
    pub k: T,
    /// Tilted mean `K'(theta)`.
    pub k1: T,
    /// Tilted variance `K''(theta)`.
    pub k2: T,
    pub c3: T,
    pub c4: T,
    /// Absolute third central tilted moment.
    pub t3_abs: T,
    pub xi: T,
}

pub fn xi_from<T: Real>(k2: T, t3_abs: T) -> T {
    T::lit(C1) * (t3_abs / (k2 * k2.sqrt()) + T::lit(C2))
}

/// `K(theta) = ln E[exp(theta Y)]`.
pub fn cgf<T: Real>(dist: &Distribution<T>, theta: T) -> Result<T> {
    let (lse, _) = tilted_log_weights(dist, theta)?;
    Ok(lse - dist.log_mass())
}

fn tilted_log_weights<T: Real>(dist: &Distribution<T>, theta: T) -> Result<(T, Vec<T>)> {
    if !theta.is_finite() {
        return Err(Error::TiltOverflow { theta: theta.as_f64() });
    }
    let e: Vec<T> = dist.iter().map(|(y, lw)| theta * y + lw).collect();
    let lse = crate::real::log_sum_exp(&e);
    if !lse.is_finite() {
        return Err(Error::TiltOverflow { theta: theta.as_f64() });
    }
    Ok((lse, e))
}

pub fn tilted_moments<T: Real>(dist: &Distribution<T>, theta: T) -> Result<TiltedMoments<T>> {
    let (lse, e) = tilted_log_weights(dist, theta)?;
    let q: Vec<T> = e.iter().map(|&x| (x - lse).exp()).collect();
    let ys = dist.values();
    let mut k1 = T::zero();
    for (&qi, &y) in q.iter().zip(ys) {
        k1 = k1 + qi * y;
    }
    // One refinement pass on the mean removes most of the cancellation.
    let mut corr = T::zero();
    for (&qi, &y) in q.iter().zip(ys) {
        corr = corr + qi * (y - k1);
    }
    k1 = k1 + corr;
    let (mut k2, mut c3, mut c4, mut t3) = (T::zero(), T::zero(), T::zero(), T::zero());
    for (&qi, &y) in q.iter().zip(ys) {
        let d = y - k1;
        let d2 = d * d;
        k2 = k2 + qi * d2;
        c3 = c3 + qi * d2 * d;
        c4 = c4 + qi * d2 * d2;
        t3 = t3 + qi * d2 * d.abs();
    }
    if !(k2 > T::lit(1e-300)) {
        return Err(Error::DegenerateVariance { theta: theta.as_f64(), k2: k2.as_f64() });
    }
    Ok(TiltedMoments { theta, k: lse - dist.log_mass(), k1, k2, c3, c4, t3_abs: t3, xi: xi_from(k2, t3) })
}

/// The exponentially tilted law: weights `exp(theta y + lw - K(theta))` on the same support.
pub fn tilt_distribution<T: Real>(dist: &Distribution<T>, theta: T) -> Result<Distribution<T>> {
    let (lse, e) = tilted_log_weights(dist, theta)?;
    let pts = dist.values().iter().zip(e).map(|(&y, x)| (y, x - lse)).collect();
    let out = Distribution::from_log_weights(pts, dist.kind())?;
    Ok(match dist.source() {
        Some(s) => out.with_source(s.clone()),
        None => out,
    })
}
