//! Dependence-testing (DT) and meta-converse (MC) bounds at finite blocklength:
//! normal-approximation sandwiches `D <= . <= N` and saddlepoint sandwiches
//! `G <= . <= S` for
//!
//! ```text
//! T = P[W <= ln((M-1)/2)] + (M-1)/2 P_ind[W > ln((M-1)/2)]
//! C = P[W <= ln g] + g (P_ind[W > ln g] - 1/M)
//! ```
//!
//! with `W` the sum of `n` i.i.d. information densities. `M = 2^(nR)` is kept
//! real-valued and handled through its logarithm, so large `nR` never overflows.

use serde::{Deserialize, Serialize};

use crate::channels::{ChannelModel, DensityBuild};
use crate::error::{Error, Result};
use crate::gauss::{gaussian_q, log_exp_times_q};
use crate::saddlepoint::solve_theta_star;
use crate::special::{binomial_log_pmfs, check_binomial_size, log_mass_range};
use crate::tilt::{tilted_moments, TiltedMoments};

const LN2: f64 = std::f64::consts::LN_2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Flavor {
    Dt,
    Mc,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalTriple {
    pub d: f64,
    pub alpha: f64,
    pub n_upper: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SaddleTriple {
    pub g: f64,
    pub beta: f64,
    pub s: f64,
}

/// The pieces the saddlepoint sandwich is assembled from, at threshold `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SaddleParts {
    pub theta: f64,
    /// Approximation of `P[W <= t]`.
    pub beta1: f64,
    /// `e^t` times the approximation of `P_ind[W > t]`.
    pub beta2_scaled: f64,
    /// Certified radius of each of the two terms above (they coincide after scaling).
    pub radius: f64,
    /// `G1`, unclipped.
    pub g1: f64,
    /// `e^t G2`, unclipped.
    pub g2_scaled: f64,
}

impl SaddleParts {
    /// Certified interval for `P[W <= t]`.
    pub fn joint_interval(&self) -> (f64, f64) {
        ((self.beta1 - self.radius).max(0.0), (self.beta1 + self.radius).min(1.0))
    }

    /// Certified interval for `e^t P_ind[W > t]`.
    pub fn independent_interval(&self) -> (f64, f64) {
        ((self.beta2_scaled - self.radius).max(0.0), self.beta2_scaled + self.radius)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FblPoint {
    pub flavor: Flavor,
    pub n: usize,
    /// Rate in bits per channel use; `log2 M = n rate`.
    pub rate: f64,
    pub log2_m: f64,
    /// `ln gamma` (MC only).
    pub log_gamma: Option<f64>,
    /// Solved tilt.
    pub theta: f64,
    pub normal: NormalTriple,
    pub sp: SaddleTriple,
    pub parts: SaddleParts,
    /// Exact `T` or `C` (BSC only).
    pub exact: Option<f64>,
    /// `G1 < 0`: the joint-term lower bound was clipped to zero.
    pub low_signal: bool,
    /// `D` was clipped to zero.
    pub d_clipped: bool,
}

/// `ln M` for `log2 M`.
pub fn log_m(log2_m: f64) -> f64 {
    log2_m * LN2
}

/// `ln((M - 1)/2)` for real `M = 2^log2_m > 1`.
pub fn dt_threshold(log2_m: f64) -> Result<f64> {
    if !(log2_m > 0.0) {
        return Err(Error::BadParams(format!("need M > 1, got log2 M = {log2_m}")));
    }
    let lm = log_m(log2_m);
    Ok(lm + (-(-lm).exp()).ln_1p() - LN2)
}

/// `mu`, `V`, `xi` of the information density at tilt `theta` under the joint law.
pub fn dt_tilted_stats(density: &DensityBuild, theta: f64) -> Result<TiltedMoments> {
    tilted_moments(&density.joint_density_dist, theta)
}

/// The reference measure is the channel marginal, so the MC information
/// density coincides with the DT one.
pub fn mc_tilted_stats(density: &DensityBuild, theta: f64) -> Result<TiltedMoments> {
    dt_tilted_stats(density, theta)
}

fn solve_at(density: &DensityBuild, n: usize, t: f64) -> Result<f64> {
    Ok(solve_theta_star(&density.joint_density_dist, n, t)?.theta_star)
}

/// Tilt solving `n mu(theta) = ln((M-1)/2)`.
pub fn dt_solve_theta(density: &DensityBuild, n: usize, log2_m: f64) -> Result<f64> {
    solve_at(density, n, dt_threshold(log2_m)?)
}

/// Tilt solving `n mu(theta) = ln gamma`.
pub fn mc_solve_theta(density: &DensityBuild, n: usize, log_gamma: f64) -> Result<f64> {
    solve_at(density, n, log_gamma)
}

fn beta1_from(m: &TiltedMoments, n: usize, t: f64) -> f64 {
    let nf = n as f64;
    let th = m.theta;
    let e = nf * m.k - th * t + 0.5 * th * th * nf * m.k2;
    let v = (nf * m.k2).sqrt() * th.abs();
    let x = log_exp_times_q(e, v).exp();
    if th > 0.0 {
        1.0 - x
    } else {
        x
    }
}

/// `ln(e^t beta2)`-style evaluation: returns `e^shift * beta2` without overflow.
fn beta2_shifted(m: &TiltedMoments, n: usize, t: f64, shift: f64) -> f64 {
    let nf = n as f64;
    let tp = m.theta + 1.0;
    let e = nf * m.k - tp * t + 0.5 * tp * tp * nf * m.k2;
    let v = (nf * m.k2).sqrt() * tp.abs();
    let lx = log_exp_times_q(e, v);
    if m.theta <= -1.0 {
        // e^shift (1 - x)
        (shift + (-lx.exp()).ln_1p()).exp()
    } else {
        (shift + lx).exp()
    }
}

/// Saddlepoint approximation of `P[W <= ln((M-1)/2)]` at tilt `theta`.
pub fn dt_beta1(density: &DensityBuild, n: usize, log2_m: f64, theta: f64) -> Result<f64> {
    let m = dt_tilted_stats(density, theta)?;
    Ok(beta1_from(&m, n, dt_threshold(log2_m)?))
}

/// Saddlepoint approximation of `P_ind[W > ln((M-1)/2)]`, built from the
/// joint-law statistics at `theta` (the product-law tilt is `theta + 1`).
pub fn dt_beta2(density: &DensityBuild, n: usize, log2_m: f64, theta: f64) -> Result<f64> {
    let m = dt_tilted_stats(density, theta)?;
    Ok(beta2_shifted(&m, n, dt_threshold(log2_m)?, 0.0))
}

pub fn mc_beta1(density: &DensityBuild, n: usize, log_gamma: f64, theta: f64) -> Result<f64> {
    let m = mc_tilted_stats(density, theta)?;
    Ok(beta1_from(&m, n, log_gamma))
}

pub fn mc_beta2(density: &DensityBuild, n: usize, log_gamma: f64, theta: f64) -> Result<f64> {
    let m = mc_tilted_stats(density, theta)?;
    Ok(beta2_shifted(&m, n, log_gamma, 0.0))
}

/// Saddlepoint parts at threshold `t`, with the tilt solved for `t`.
pub fn saddle_parts(density: &DensityBuild, n: usize, t: f64) -> Result<SaddleParts> {
    let theta = solve_at(density, n, t)?;
    let m = dt_tilted_stats(density, theta)?;
    let nf = n as f64;
    let beta1 = beta1_from(&m, n, t);
    let beta2_scaled = beta2_shifted(&m, n, t, t);
    // (2 xi / sqrt n) e^{n ln phi - theta t}; the second term's radius
    // (2 xi / sqrt n) e^{n ln phi - (theta + 1) t} is the same after scaling by e^t.
    let radius = 2.0 * m.xi / nf.sqrt() * (nf * m.k - theta * t).exp();
    Ok(SaddleParts { theta, beta1, beta2_scaled, radius, g1: beta1 - radius, g2_scaled: beta2_scaled - radius })
}

fn normal_at(density: &DensityBuild, n: usize, t: f64, penalty: f64) -> Result<NormalTriple> {
    let m = dt_tilted_stats(density, 0.0)?;
    let nf = n as f64;
    let alpha = gaussian_q((nf * m.k1 - t) / (nf * m.k2).sqrt()) - penalty;
    let d = (alpha - m.xi / nf.sqrt()).max(0.0);
    let n_upper =
        (alpha + 5.0 * m.xi / nf.sqrt() + 2.0 * LN2 / (m.k2.sqrt() * (2.0 * nf * std::f64::consts::PI).sqrt()))
            .min(1.0);
    Ok(NormalTriple { d, alpha, n_upper })
}

/// Normal approximation `alpha` of `T` with its sandwich `D <= T <= N`.
pub fn dt_normal(density: &DensityBuild, n: usize, log2_m: f64) -> Result<NormalTriple> {
    normal_at(density, n, dt_threshold(log2_m)?, 0.0)
}

/// Normal approximation of `C` at `ln gamma`, with its sandwich.
pub fn mc_normal(density: &DensityBuild, n: usize, log2_m: f64, log_gamma: f64) -> Result<NormalTriple> {
    normal_at(density, n, log_gamma, (log_gamma - log_m(log2_m)).exp())
}

fn rate_of(n: usize, log2_m: f64) -> f64 {
    log2_m / n as f64
}

pub fn dt_bounds(density: &DensityBuild, n: usize, log2_m: f64) -> Result<FblPoint> {
    let t = dt_threshold(log2_m)?;
    let p = saddle_parts(density, n, t)?;
    let beta = p.beta1 + p.beta2_scaled;
    let g = p.g1.max(0.0) + p.g2_scaled.max(0.0);
    let s = (beta + 2.0 * p.radius).min(1.0);
    let normal = dt_normal(density, n, log2_m)?;
    let exact = match density.channel {
        ChannelModel::Bsc { delta } => Some(bsc_exact_t(delta, n, log2_m)?),
        _ => None,
    };
    Ok(FblPoint {
        flavor: Flavor::Dt,
        n,
        rate: rate_of(n, log2_m),
        log2_m,
        log_gamma: None,
        theta: p.theta,
        normal,
        sp: SaddleTriple { g, beta, s },
        parts: p,
        exact,
        low_signal: p.g1 < 0.0,
        d_clipped: normal.d == 0.0,
    })
}

/// MC sandwich at a given `ln gamma`.
pub fn mc_bounds(density: &DensityBuild, n: usize, log2_m: f64, log_gamma: f64) -> Result<FblPoint> {
    if !(log2_m > 0.0) {
        return Err(Error::BadParams(format!("need M > 1, got log2 M = {log2_m}")));
    }
    let p = saddle_parts(density, n, log_gamma)?;
    let penalty = (log_gamma - log_m(log2_m)).exp();
    let beta = p.beta1 + p.beta2_scaled - penalty;
    let g = p.g1.max(0.0) + p.g2_scaled.max(0.0) - penalty;
    let s = (beta + 2.0 * p.radius).min(1.0);
    let normal = mc_normal(density, n, log2_m, log_gamma)?;
    let exact = match density.channel {
        ChannelModel::Bsc { delta } => Some(bsc_exact_c(delta, n, log2_m, log_gamma)?),
        _ => None,
    };
    Ok(FblPoint {
        flavor: Flavor::Mc,
        n,
        rate: rate_of(n, log2_m),
        log2_m,
        log_gamma: Some(log_gamma),
        theta: p.theta,
        normal,
        sp: SaddleTriple { g, beta, s },
        parts: p,
        exact,
        low_signal: p.g1 < 0.0,
        d_clipped: normal.d == 0.0,
    })
}

/// BSC information-density sums indexed by flip count, and the Binomial(n, delta)
/// and Binomial(n, 1/2) log pmfs of the flip count under the two laws.
struct BscSums {
    base: f64,
    step: f64,
    joint: Vec<f64>,
    indep: Vec<f64>,
}

impl BscSums {
    fn new(delta: f64, n: usize) -> Result<Self> {
        if !(delta > 0.0 && delta < 0.5) {
            return Err(Error::BadParams(format!("bsc crossover {delta} must lie in (0, 1/2)")));
        }
        if n == 0 {
            return Err(Error::BadParams("n must be positive".into()));
        }
        check_binomial_size(n as u64)?;
        Ok(Self {
            base: n as f64 * (2.0 * (1.0 - delta)).ln(),
            step: (delta / (1.0 - delta)).ln(),
            joint: binomial_log_pmfs(n as u64, delta),
            indep: binomial_log_pmfs(n as u64, 0.5),
        })
    }

    fn sum(&self, k: usize) -> f64 {
        self.base + k as f64 * self.step
    }

    /// Smallest flip count whose sum is `<= t` (sums decrease in k); `n + 1` if none.
    fn first_below(&self, t: f64) -> usize {
        let n = self.joint.len() - 1;
        let guess = ((t - self.base) / self.step).ceil().clamp(0.0, (n + 1) as f64) as usize;
        let mut k = guess;
        while k > 0 && self.sum(k - 1) <= t {
            k -= 1;
        }
        while k <= n && self.sum(k) > t {
            k += 1;
        }
        k
    }

    /// `(ln P[W <= t], ln P_ind[W > t])`.
    fn log_terms(&self, t: f64) -> (f64, f64) {
        let n = self.joint.len() - 1;
        let k0 = self.first_below(t);
        let below = log_mass_range(&self.joint, k0, n);
        let above = if k0 == 0 { f64::NEG_INFINITY } else { log_mass_range(&self.indep, 0, k0 - 1) };
        (below, above)
    }
}

/// Exact `T` for the BSC by reduction to the number of flips.
pub fn bsc_exact_t(delta: f64, n: usize, log2_m: f64) -> Result<f64> {
    let t = dt_threshold(log2_m)?;
    let (below, above) = BscSums::new(delta, n)?.log_terms(t);
    Ok(below.exp() + (t + above).exp())
}

/// Exact `C` for the BSC at `ln gamma`.
pub fn bsc_exact_c(delta: f64, n: usize, log2_m: f64, log_gamma: f64) -> Result<f64> {
    let (below, above) = BscSums::new(delta, n)?.log_terms(log_gamma);
    Ok(below.exp() + (log_gamma + above).exp() - (log_gamma - log_m(log2_m)).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GammaSearch {
    GoldenSection,
    /// The objective was not unimodal on the scan; the grid argmax was used.
    GridFallback,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaOptimum {
    pub log_gamma: f64,
    pub objective: f64,
    pub search: GammaSearch,
    pub point: FblPoint,
}

const SCAN_POINTS: usize = 65;
const FALLBACK_POINTS: usize = 512;
const LOG_GAMMA_TOL: f64 = 1e-6;

/// Maximizes the MC lower bound over `ln gamma`: exact `C` for the BSC,
/// the certified lower bound `G~` otherwise.
pub fn mc_optimize_gamma(density: &DensityBuild, n: usize, log2_m: f64) -> Result<GammaOptimum> {
    let m0 = dt_tilted_stats(density, 0.0)?;
    let nf = n as f64;
    let jd = &density.joint_density_dist;
    let (lo_h, hi_h) = (nf * jd.min_value(), nf * jd.max_value());
    let eps = 1e-6 * (hi_h - lo_h);
    // The maximizer solves P_ind[W > ln g] = 1/M. Markov's inequality under the
    // product law (E_ind[e^W] = 1) puts it at or below ln M, and changing measure
    // to the joint law puts it within a few deviations below min(n mu, ln M).
    let spread = 6.0 * (nf * m0.k2).sqrt();
    let lm = log_m(log2_m);
    let lo = (nf * m0.k1).min(lm) - spread;
    let (lo, hi) = (lo.max(lo_h + eps), lm.min(hi_h - eps));
    if !(lo < hi) {
        return Err(Error::OutOfHull { ratio: lm / nf, lo: jd.min_value(), hi: jd.max_value() });
    }

    let objective = |lg: f64| -> Result<f64> {
        match density.channel {
            ChannelModel::Bsc { delta } => bsc_exact_c(delta, n, log2_m, lg),
            _ => Ok(mc_bounds(density, n, log2_m, lg)?.sp.g),
        }
    };

    let grid = |k: usize| -> Vec<f64> { (0..k).map(|i| lo + (hi - lo) * i as f64 / (k - 1) as f64).collect() };
    let xs = grid(SCAN_POINTS);
    let ys = xs.iter().map(|&x| objective(x)).collect::<Result<Vec<_>>>()?;
    let best = argmax(&ys);

    let (log_gamma, search) = if unimodal(&ys) {
        let a = xs[best.saturating_sub(1)];
        let b = xs[(best + 1).min(SCAN_POINTS - 1)];
        (golden_max(&objective, a, b)?, GammaSearch::GoldenSection)
    } else {
        let xs = grid(FALLBACK_POINTS);
        let ys = xs.iter().map(|&x| objective(x)).collect::<Result<Vec<_>>>()?;
        (xs[argmax(&ys)], GammaSearch::GridFallback)
    };
    let point = mc_bounds(density, n, log2_m, log_gamma)?;
    Ok(GammaOptimum { log_gamma, objective: objective(log_gamma)?, search, point })
}

fn argmax(ys: &[f64]) -> usize {
    let mut best = 0;
    for (i, &y) in ys.iter().enumerate() {
        if y > ys[best] {
            best = i;
        }
    }
    best
}

/// Non-decreasing then non-increasing, up to rounding noise.
fn unimodal(ys: &[f64]) -> bool {
    let scale = ys.iter().fold(0.0f64, |m, y| m.max(y.abs()));
    let slack = 1e-12 * scale.max(1e-300);
    let peak = argmax(ys);
    ys[..=peak].windows(2).all(|w| w[1] >= w[0] - slack) && ys[peak..].windows(2).all(|w| w[1] <= w[0] + slack)
}

fn golden_max<F: Fn(f64) -> Result<f64>>(f: &F, mut a: f64, mut b: f64) -> Result<f64> {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    while b - a > LOG_GAMMA_TOL {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d)?;
        }
    }
    Ok(if fc >= fd { c } else { d })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::build_density_dist;
    use crate::gauss::normal_cdf;
    use crate::oracle::mc_fbl;

    fn bsc() -> DensityBuild {
        build_density_dist(&ChannelModel::Bsc { delta: 0.11 }, 0).unwrap()
    }

    fn awgn(nodes: usize) -> DensityBuild {
        build_density_dist(&ChannelModel::BiAwgn { snr: 1.0 }, nodes).unwrap()
    }

    /// `log2 M` putting `ln((M-1)/2)` exactly at `t`.
    fn log2_m_for_threshold(t: f64) -> f64 {
        (2.0 * t.exp() + 1.0).log2()
    }

    #[test]
    fn threshold_handles_huge_m() {
        assert!((dt_threshold(3f64.log2()).unwrap()).abs() < 1e-15);
        assert!((dt_threshold(1.0).unwrap() - 0.5f64.ln()).abs() < 1e-15);
        let big = dt_threshold(0.42 * 2000.0).unwrap();
        assert!((big - (0.42 * 2000.0 * LN2 - LN2)).abs() < 1e-9);
        assert!(dt_threshold(0.0).is_err());
    }

    #[test]
    fn untilted_stats_are_the_capacity() {
        let m = dt_tilted_stats(&bsc(), 0.0).unwrap();
        assert_eq!(m.k, 0.0);
        assert!((m.k1 - 0.346_631_843_641_279_16).abs() < 1e-15);
        let m = mc_tilted_stats(&bsc(), 0.0).unwrap();
        assert!((m.k1 - 0.346_631_843_641_279_16).abs() < 1e-15);
    }

    #[test]
    fn moment_generating_function_at_minus_one() {
        for d in [bsc(), awgn(2001)] {
            assert!(dt_tilted_stats(&d, -1.0).unwrap().k.abs() < 1e-9);
        }
    }

    #[test]
    fn tilt_sign_follows_rate() {
        let d = bsc();
        let mu = dt_tilted_stats(&d, 0.0).unwrap().k1;
        let at_mean = dt_solve_theta(&d, 1000, log2_m_for_threshold(1000.0 * mu)).unwrap();
        assert!(at_mean.abs() < 1e-9);
        assert!(dt_solve_theta(&d, 1000, 320.0).unwrap() < 0.0);
        assert!(dt_solve_theta(&d, 1000, 480.0).unwrap() < 0.0);
        assert!(dt_solve_theta(&d, 1000, 520.0).unwrap() > 0.0);
    }

    #[test]
    fn solved_tilt_meets_its_equation() {
        for d in [bsc(), awgn(2001)] {
            for (n, r) in [(100, 0.32), (500, 0.42), (2000, 0.32)] {
                let log2_m = r * n as f64;
                let theta = dt_solve_theta(&d, n, log2_m).unwrap();
                let t = dt_threshold(log2_m).unwrap();
                let k1 = dt_tilted_stats(&d, theta).unwrap().k1;
                assert!((n as f64 * k1 / t - 1.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn beta1_at_zero_tilt_is_gaussian() {
        // At zero tilt the threshold is the mean, where the Gaussian CDF is 1/2.
        let d = bsc();
        let mu = dt_tilted_stats(&d, 0.0).unwrap().k1;
        let log2_m = log2_m_for_threshold(500.0 * mu);
        assert!((dt_beta1(&d, 500, log2_m, 0.0).unwrap() - normal_cdf(0.0)).abs() < 1e-15);
        assert!((mc_beta1(&d, 500, 500.0 * mu, 0.0).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn beta2_at_minus_one_uses_the_complement_branch() {
        let d = bsc();
        // K(-1) = 0 for the BSC, so the product-law tilt is 0 and Q(0) = 1/2.
        let b = dt_beta2(&d, 100, 30.0, -1.0).unwrap();
        let k = dt_tilted_stats(&d, -1.0).unwrap().k;
        assert!((b - (1.0 - 0.5 * (100.0 * k).exp())).abs() < 1e-14);
        assert!((b - 0.5).abs() < 1e-12);
        assert!(mc_beta2(&d, 100, 0.0, -1.0).unwrap() <= 1.0);
    }

    #[test]
    fn dt_sandwich_at_500() {
        let d = bsc();
        let p = dt_bounds(&d, 500, 160.0).unwrap();
        let t = p.exact.unwrap();
        assert!(t > 0.0 && t < 1.0);
        assert!(p.sp.g <= t && t <= p.sp.s, "{p:?}");
        assert!(p.normal.d <= t && t <= p.normal.n_upper);
        assert!(p.sp.g <= p.sp.beta && p.sp.beta <= p.sp.s);
        let b1 = dt_beta1(&d, 500, 160.0, p.theta).unwrap();
        let b2 = dt_beta2(&d, 500, 160.0, p.theta).unwrap();
        let thr = dt_threshold(160.0).unwrap();
        assert!((b1 + thr.exp() * b2 - p.sp.beta).abs() < 1e-12);
    }

    #[test]
    fn sandwich_width_decomposes_into_radii() {
        let d = bsc();
        let p = dt_bounds(&d, 500, 160.0).unwrap();
        let m = dt_tilted_stats(&d, p.theta).unwrap();
        let t = dt_threshold(160.0).unwrap();
        let r = 2.0 * m.xi / 500f64.sqrt() * (500.0 * m.k - p.theta * t).exp();
        assert!((p.parts.radius / r - 1.0).abs() < 1e-12);
        if p.parts.g1 >= 0.0 && p.parts.g2_scaled >= 0.0 && p.sp.s < 1.0 {
            assert!(((p.sp.s - p.sp.g) / (4.0 * r) - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn radius_vanishes_at_large_n() {
        let p = dt_bounds(&bsc(), 200_000, 0.32 * 200_000.0).unwrap();
        assert_eq!(p.parts.radius, 0.0);
        assert!((p.sp.s - p.sp.g).abs() <= 1e-15);
        assert!((p.sp.beta - p.sp.g).abs() <= 1e-15);
    }

    #[test]
    fn normal_alpha_is_half_at_the_mean() {
        let d = awgn(2001);
        let mu = dt_tilted_stats(&d, 0.0).unwrap().k1;
        let a = dt_normal(&d, 400, log2_m_for_threshold(400.0 * mu)).unwrap();
        assert!((a.alpha - 0.5).abs() < 1e-12);
    }

    #[test]
    fn normal_width_shrinks_like_inverse_root_n() {
        let d = bsc();
        let mu = dt_tilted_stats(&d, 0.0).unwrap().k1;
        let width = |n: f64| {
            let p = dt_normal(&d, n as usize, log2_m_for_threshold(n * mu)).unwrap();
            p.n_upper - p.d
        };
        let slope = (width(4e6) / width(1e6)).ln() / 4f64.ln();
        assert!((slope + 0.5).abs() < 0.05, "{slope}");
    }

    #[test]
    fn exact_t_by_hand() {
        // One use, M = 3: threshold 0, flip gives ln 0.22 <= 0.
        let t = bsc_exact_t(0.11, 1, 3f64.log2()).unwrap();
        assert!((t - 0.61).abs() < 1e-15);
        let t2 = bsc_exact_t(0.11, 50, 1.0).unwrap();
        assert!(t2 > 0.0 && t2 <= 1.0);
        assert!(bsc_exact_t(0.6, 10, 3.0).is_err());
    }

    #[test]
    fn exact_t_agrees_with_sampling() {
        let d = bsc();
        let log2_m = 160.0;
        let t = dt_threshold(log2_m).unwrap();
        let exact = bsc_exact_t(0.11, 500, log2_m).unwrap();
        let e = mc_fbl(&d.joint_density_dist, 500, t, 200_000, 5).unwrap();
        assert!(e.total.ci95_low <= exact && exact <= e.total.ci95_high, "{e:?} vs {exact}");
    }

    #[test]
    fn mc_sandwich_with_optimized_gamma() {
        let d = bsc();
        let opt = mc_optimize_gamma(&d, 500, 210.0).unwrap();
        let p = opt.point;
        let c = p.exact.unwrap();
        assert_eq!(opt.objective, c);
        assert!(p.sp.g <= c && c <= p.sp.s, "{p:?}");
        assert!(p.normal.d <= c && c <= p.normal.n_upper);
        assert_eq!(opt.search, GammaSearch::GoldenSection);
    }

    #[test]
    fn optimum_dominates_a_dense_scan() {
        let d = bsc();
        let opt = mc_optimize_gamma(&d, 500, 210.0).unwrap();
        let m = dt_tilted_stats(&d, 0.0).unwrap();
        let (mid, half) = (500.0 * m.k1, 6.0 * (500.0 * m.k2).sqrt());
        for i in 0..=400 {
            let lg = mid - half + 2.0 * half * i as f64 / 400.0;
            assert!(bsc_exact_c(0.11, 500, 210.0, lg).unwrap() <= opt.objective + 1e-12);
        }
    }

    #[test]
    fn gamma_equal_to_m_is_useless() {
        let d = bsc();
        let log2_m = 210.0;
        let lg = log_m(log2_m);
        let hull_top = 500.0 * d.joint_density_dist.max_value();
        assert!(lg < hull_top);
        assert!(bsc_exact_c(0.11, 500, log2_m, lg).unwrap() <= 0.0);
        let p = mc_bounds(&d, 500, log2_m, lg).unwrap();
        assert!(p.sp.g <= 0.0);
    }

    #[test]
    fn optimized_gamma_beats_the_dt_threshold() {
        for d in [bsc(), awgn(2001)] {
            let log2_m = 210.0;
            let opt = mc_optimize_gamma(&d, 500, log2_m).unwrap();
            let heuristic = dt_threshold(log2_m).unwrap();
            let at_h = match d.channel {
                ChannelModel::Bsc { delta } => bsc_exact_c(delta, 500, log2_m, heuristic).unwrap(),
                _ => mc_bounds(&d, 500, log2_m, heuristic).unwrap().sp.g,
            };
            assert!(opt.objective >= at_h - 1e-12);
        }
    }

    #[test]
    fn optimized_gamma_survives_refinement() {
        let a = mc_optimize_gamma(&awgn(2001), 500, 210.0).unwrap();
        let b = mc_optimize_gamma(&awgn(4001), 500, 210.0).unwrap();
        assert!((a.log_gamma / b.log_gamma - 1.0).abs() < 5e-4, "{} vs {}", a.log_gamma, b.log_gamma);
    }

    #[test]
    fn low_signal_flag_tracks_clipping() {
        let d = bsc();
        for n in [100, 500, 2000] {
            let p = dt_bounds(&d, n, 0.32 * n as f64).unwrap();
            assert_eq!(p.low_signal, p.parts.g1 < 0.0);
            assert_eq!(p.d_clipped, p.normal.d == 0.0);
        }
    }
}
