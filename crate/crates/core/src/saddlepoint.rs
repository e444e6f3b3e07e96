//! Saddlepoint CDF/PDF approximations for `X_n = Y_1 + ... + Y_n` and their
//! certified error envelopes.

use serde::{Deserialize, Serialize};

use crate::distribution::Distribution;
use crate::error::{Error, Result};
use crate::gauss::{log_exp_times_q, normal_cdf};
use crate::real::Real;
use crate::tilt::{tilted_moments, TiltedMoments};

const MAX_ITER: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SaddlepointSolve<T: Real = f64> {
    pub theta_star: T,
    pub a: T,
    pub n: usize,
    /// `n K'(theta*) - a`.
    pub residual: T,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnvelopeMethod {
    BerryEsseen,
    SaddlepointThm2,
    SaddlepointThm3,
}

/// An approximation with a certified additive error radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundEnvelope<T: Real = f64> {
    pub center: T,
    pub lower: T,
    pub upper: T,
    pub log_radius: T,
    pub method: EnvelopeMethod,
}

impl<T: Real> BoundEnvelope<T> {
    fn new(center: T, log_radius: T, method: EnvelopeMethod) -> Self {
        let r = log_radius.exp();
        let clamp = |x: T| x.max(T::zero()).min(T::one());
        Self { center, lower: clamp(center - r), upper: clamp(center + r), log_radius, method }
    }

    pub fn radius(&self) -> T {
        self.log_radius.exp()
    }

    pub fn contains(&self, x: T) -> bool {
        self.lower <= x && x <= self.upper
    }
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::BadParams("n must be positive".into()));
    }
    Ok(())
}

/// Solves `n K'(theta) = a` by safeguarded Newton iteration.
pub fn solve_theta_star<T: Real>(dist: &Distribution<T>, n: usize, a: T) -> Result<SaddlepointSolve<T>> {
    check_n(n)?;
    let nf = T::from_usize(n).expect("n fits");
    let ratio = a / nf;
    let (lo_v, hi_v) = (dist.min_value(), dist.max_value());
    if !(ratio > lo_v && ratio < hi_v) {
        return Err(Error::OutOfHull { ratio: ratio.as_f64(), lo: lo_v.as_f64(), hi: hi_v.as_f64() });
    }
    let tol = T::lit(1e-9).max(T::epsilon() * T::lit(256.0)) * T::one().max(a.abs());
    let f = |theta: T| -> Result<(T, TiltedMoments<T>)> {
        let m = tilted_moments(dist, theta)?;
        Ok((nf * m.k1 - a, m))
    };

    let mut iterations = 0;
    let mut theta = T::zero();
    let mut r = f(theta)?.0;
    if r.abs() <= tol {
        return Ok(SaddlepointSolve { theta_star: theta, a, n, residual: r, iterations });
    }
    // Bracket: K' is increasing, so walk outward until the sign changes.
    let (mut lo, mut hi);
    if r < T::zero() {
        lo = T::zero();
        hi = T::one();
        while f(hi)?.0 < T::zero() {
            lo = hi;
            hi = hi + hi;
            iterations += 1;
            if iterations > MAX_ITER {
                return Err(Error::NoConvergence { iterations });
            }
        }
    } else {
        hi = T::zero();
        lo = -T::one();
        while f(lo)?.0 > T::zero() {
            hi = lo;
            lo = lo + lo;
            iterations += 1;
            if iterations > MAX_ITER {
                return Err(Error::NoConvergence { iterations });
            }
        }
    }
    theta = if r < T::zero() { lo } else { hi };
    let mut m;
    (r, m) = f(theta)?;
    loop {
        iterations += 1;
        if iterations > MAX_ITER {
            return Err(Error::NoConvergence { iterations });
        }
        let newton = theta - r / (nf * m.k2);
        let next = if newton > lo && newton < hi && newton.is_finite() { newton } else { (lo + hi) * T::lit(0.5) };
        if next == theta {
            // Bracket exhausted at machine precision.
            return Ok(SaddlepointSolve { theta_star: theta, a, n, residual: r, iterations });
        }
        theta = next;
        (r, m) = f(theta)?;
        if r.abs() <= tol {
            // One more Newton step is nearly free and takes the residual to
            // rounding level; keep it only if it helps.
            let polished = theta - r / (nf * m.k2);
            if polished.is_finite() && polished > lo && polished < hi {
                let (r2, _) = f(polished)?;
                if r2.abs() < r.abs() {
                    return Ok(SaddlepointSolve {
                        theta_star: polished,
                        a,
                        n,
                        residual: r2,
                        iterations: iterations + 1,
                    });
                }
            }
            return Ok(SaddlepointSolve { theta_star: theta, a, n, residual: r, iterations });
        }
        if r < T::zero() {
            lo = theta;
        } else {
            hi = theta;
        }
    }
}

/// Tilted-Gaussian approximation of `P[X_n <= a]` built at an arbitrary tilt.
pub fn eta<T: Real>(dist: &Distribution<T>, theta: T, a: T, n: usize) -> Result<T> {
    check_n(n)?;
    let m = tilted_moments(dist, theta)?;
    Ok(eta_from(&m, a, n))
}

pub(crate) fn eta_from<T: Real>(m: &TiltedMoments<T>, a: T, n: usize) -> T {
    let nf = T::from_usize(n).expect("n fits");
    let theta = m.theta;
    let nk2 = nf * m.k2;
    let expo = T::lit(0.5) * nf * theta * theta * m.k2 + nf * m.k - nf * theta * m.k1;
    let v = (a + nf * theta * m.k2 - nf * m.k1) / nk2.sqrt();
    let val =
        if theta <= T::zero() { log_exp_times_q(expo, -v).exp() } else { T::one() - log_exp_times_q(expo, v).exp() };
    val.max(T::zero()).min(T::one())
}

/// Saddlepoint approximation of `P[X_n <= a]`.
pub fn saddlepoint_cdf<T: Real>(dist: &Distribution<T>, n: usize, a: T) -> Result<T> {
    let s = solve_theta_star(dist, n, a)?;
    eta(dist, s.theta_star, a, n)
}

/// Saddlepoint density of `X_n` at `x`, optionally with the first-order `1/n` correction.
pub fn saddlepoint_pdf<T: Real>(dist: &Distribution<T>, n: usize, x: T, with_correction: bool) -> Result<T> {
    let s = solve_theta_star(dist, n, x)?;
    let m = tilted_moments(dist, s.theta_star)?;
    let nf = T::from_usize(n).expect("n fits");
    let base = (nf * m.k - s.theta_star * x).exp() / (T::lit(2.0) * T::PI() * nf * m.k2).sqrt();
    if !with_correction {
        return Ok(base);
    }
    let k4 = m.c4 - T::lit(3.0) * m.k2 * m.k2;
    let k3 = m.c3;
    let k2 = m.k2;
    let corr = T::one() + (k4 / (T::lit(8.0) * k2 * k2) - T::lit(5.0) * k3 * k3 / (T::lit(24.0) * k2 * k2 * k2)) / nf;
    Ok(base * corr)
}

/// Envelope at an arbitrary tilt: center `eta`, radius `exp(nK - theta a) min{1, 2 xi / sqrt n}`.
pub fn thm2_envelope<T: Real>(dist: &Distribution<T>, theta: T, a: T, n: usize) -> Result<BoundEnvelope<T>> {
    check_n(n)?;
    let m = tilted_moments(dist, theta)?;
    Ok(envelope_at(&m, a, n, EnvelopeMethod::SaddlepointThm2))
}

fn envelope_at<T: Real>(m: &TiltedMoments<T>, a: T, n: usize, method: EnvelopeMethod) -> BoundEnvelope<T> {
    let nf = T::from_usize(n).expect("n fits");
    let center = eta_from(m, a, n);
    let factor = T::one().min(T::lit(2.0) * m.xi / nf.sqrt());
    let log_radius = nf * m.k - m.theta * a + factor.ln();
    BoundEnvelope::new(center, log_radius, method)
}

/// The tilt-dependent envelope evaluated at the saddlepoint.
pub fn thm3_envelope<T: Real>(dist: &Distribution<T>, n: usize, a: T) -> Result<BoundEnvelope<T>> {
    let s = solve_theta_star(dist, n, a)?;
    let m = tilted_moments(dist, s.theta_star)?;
    Ok(envelope_at(&m, a, n, EnvelopeMethod::SaddlepointThm3))
}

/// Normal approximation with the uniform Berry–Esseen radius `min{1, xi(0)/sqrt n}`.
pub fn berry_esseen_envelope<T: Real>(dist: &Distribution<T>, n: usize, a: T) -> Result<BoundEnvelope<T>> {
    check_n(n)?;
    let m = tilted_moments(dist, T::zero())?;
    let nf = T::from_usize(n).expect("n fits");
    let center = normal_cdf((a - nf * m.k1) / (nf * m.k2).sqrt());
    let radius = T::one().min(m.xi / nf.sqrt());
    Ok(BoundEnvelope::new(center, radius.ln(), EnvelopeMethod::BerryEsseen))
}

/// Large-deviation exponent `h(a) = n K(theta*) - theta* a`.
pub fn exponent_h<T: Real>(dist: &Distribution<T>, n: usize, a: T) -> Result<T> {
    let s = solve_theta_star(dist, n, a)?;
    let m = tilted_moments(dist, s.theta_star)?;
    let nf = T::from_usize(n).expect("n fits");
    Ok(nf * m.k - s.theta_star * a)
}
