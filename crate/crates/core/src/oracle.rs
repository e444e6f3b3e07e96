//! Ground truth: exact sum laws by convolution, closed-form CDFs, and seeded
//! Monte Carlo estimators.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distribution::{DistKind, Distribution};
use crate::error::{Error, Result};
use crate::gauss::normal_cdf;
use crate::real::log_add;
use crate::special::{binomial_log_pmfs, check_binomial_size, gamma_p, log_mass_range};

/// Largest support a convolution may produce.
pub const CONVOLUTION_BUDGET: usize = 1_000_000;
const MERGE_RTOL: f64 = 1e-12;

/// Exact law of the `n`-fold sum by repeated convolution in the log domain.
/// Support points closer than 1e-12 (relative) are merged.
pub fn convolve_sum(dist: &Distribution, n: usize) -> Result<Distribution> {
    if n == 0 {
        return Err(Error::BadParams("n must be positive".into()));
    }
    if dist.kind() != DistKind::ExactDiscrete {
        return Err(Error::BadParams("convolution needs an exact discrete distribution".into()));
    }
    let base: Vec<(f64, f64)> = dist.iter().collect();
    let mut cur = base.clone();
    for _ in 1..n {
        let pairs = cur.len() * base.len();
        if pairs > 64 * CONVOLUTION_BUDGET {
            return Err(Error::TooLarge { points: pairs, budget: CONVOLUTION_BUDGET });
        }
        let mut next: Vec<(f64, f64)> = Vec::with_capacity(pairs);
        for &(v, lw) in &cur {
            for &(u, lu) in &base {
                next.push((v + u, lw + lu));
            }
        }
        next.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(next.len());
        for (v, lw) in next {
            match merged.last_mut() {
                Some(last) if (v - last.0).abs() <= MERGE_RTOL * last.0.abs().max(1.0) => {
                    last.1 = log_add(last.1, lw);
                }
                _ => merged.push((v, lw)),
            }
        }
        if merged.len() > CONVOLUTION_BUDGET {
            return Err(Error::TooLarge { points: merged.len(), budget: CONVOLUTION_BUDGET });
        }
        cur = merged;
    }
    Distribution::from_log_weights(cur, DistKind::ExactDiscrete)
}

/// Families with a closed-form (or directly summable) CDF.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ClosedForm {
    Binomial { n: u64, p: f64 },
    Gamma { shape: f64, scale: f64 },
    Gaussian { mean: f64, var: f64 },
}

pub fn exact_cdf(family: &ClosedForm, a: f64) -> Result<f64> {
    match *family {
        ClosedForm::Binomial { n, p } => {
            if !(p > 0.0 && p < 1.0) || n == 0 {
                return Err(Error::BadParams(format!("binomial(n={n}, p={p})")));
            }
            if a < 0.0 {
                return Ok(0.0);
            }
            if a >= n as f64 {
                return Ok(1.0);
            }
            check_binomial_size(n)?;
            let k = a.floor() as usize;
            let pmfs = binomial_log_pmfs(n, p);
            // Sum the smaller tail, so a CDF near 1 keeps its distance from 1.
            if (k as f64) < n as f64 * p {
                Ok(log_mass_range(&pmfs, 0, k).exp().min(1.0))
            } else {
                Ok((1.0 - log_mass_range(&pmfs, k + 1, n as usize).exp()).max(0.0))
            }
        }
        ClosedForm::Gamma { shape, scale } => {
            if !(shape > 0.0 && scale > 0.0) {
                return Err(Error::BadParams(format!("gamma(shape={shape}, scale={scale})")));
            }
            Ok(gamma_p(shape, a / scale))
        }
        ClosedForm::Gaussian { mean, var } => {
            if !(var > 0.0) {
                return Err(Error::BadParams(format!("gaussian(mean={mean}, var={var})")));
            }
            Ok(normal_cdf((a - mean) / var.sqrt()))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub value: f64,
    pub stderr: f64,
    pub samples: u64,
    pub ci95_low: f64,
    pub ci95_high: f64,
    pub seed: u64,
}

impl McEstimate {
    fn from_sums(sum: f64, sumsq: f64, samples: u64, seed: u64) -> Self {
        let nf = samples as f64;
        let value = sum / nf;
        let var = ((sumsq / nf - value * value) * nf / (nf - 1.0)).max(0.0);
        let stderr = (var / nf).sqrt();
        Self { value, stderr, samples, ci95_low: value - 1.96 * stderr, ci95_high: value + 1.96 * stderr, seed }
    }

    fn exact(value: f64, samples: u64, seed: u64) -> Self {
        Self { value, stderr: 0.0, samples, ci95_low: value, ci95_high: value, seed }
    }

    /// Whether the 95% interval meets `[lo, hi]`.
    pub fn overlaps(&self, lo: f64, hi: f64) -> bool {
        self.ci95_low <= hi && lo <= self.ci95_high
    }
}

/// Inverse-CDF sampler over a finite support with a guide table for O(1) lookups.
#[derive(Debug, Clone)]
pub struct Sampler {
    values: Vec<f64>,
    cdf: Vec<f64>,
    guide: Vec<u32>,
}

impl Sampler {
    pub fn new(dist: &Distribution) -> Self {
        let values = dist.values().to_vec();
        let mut cdf = Vec::with_capacity(values.len());
        let mut acc = 0.0;
        for p in dist.probs() {
            acc += p;
            cdf.push(acc);
        }
        let last = cdf.len() - 1;
        for c in cdf.iter_mut() {
            *c /= acc;
        }
        cdf[last] = 1.0;
        let m = values.len();
        let mut guide = Vec::with_capacity(m);
        let mut i = 0usize;
        for j in 0..m {
            let u = j as f64 / m as f64;
            while cdf[i] <= u {
                i += 1;
            }
            guide.push(i as u32);
        }
        Self { values, cdf, guide }
    }

    #[inline]
    pub fn draw<R: Rng>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.gen();
        let mut i = self.guide[(u * self.guide.len() as f64) as usize] as usize;
        while self.cdf[i] <= u {
            i += 1;
        }
        self.values[i]
    }

    #[inline]
    pub fn draw_sum<R: Rng>(&self, rng: &mut R, n: usize) -> f64 {
        let mut s = 0.0;
        for _ in 0..n {
            s += self.draw(rng);
        }
        s
    }
}

/// Number of independent ChaCha streams a Monte Carlo run is split into.
/// Fixed, so results do not depend on the thread count.
pub const MC_SHARDS: u64 = 32;

/// Runs `samples` draws of the n-fold sum split over [`MC_SHARDS`] streams of
/// one seed, applying `f` to each sum. Shard partials are reduced in order.
fn sharded<const K: usize, F>(dist: &Distribution, n: usize, samples: u64, seed: u64, f: F) -> [(f64, f64); K]
where
    F: Fn(f64) -> [f64; K] + Sync,
{
    let sampler = Sampler::new(dist);
    let partials: Vec<[(f64, f64); K]> = (0..MC_SHARDS)
        .into_par_iter()
        .map(|shard| {
            let count = samples / MC_SHARDS + u64::from(shard < samples % MC_SHARDS);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(shard);
            let mut acc = [(0.0, 0.0); K];
            for _ in 0..count {
                let x = f(sampler.draw_sum(&mut rng, n));
                for (a, xi) in acc.iter_mut().zip(x) {
                    a.0 += xi;
                    a.1 += xi * xi;
                }
            }
            acc
        })
        .collect();
    let mut total = [(0.0, 0.0); K];
    for p in partials {
        for (t, x) in total.iter_mut().zip(p) {
            t.0 += x.0;
            t.1 += x.1;
        }
    }
    total
}

fn check_samples(samples: u64) -> Result<()> {
    if samples < 10_000 {
        return Err(Error::BadParams(format!("need at least 1e4 samples, got {samples}")));
    }
    Ok(())
}

/// Monte Carlo estimate of `P[Y_1 + ... + Y_n <= a]`.
pub fn mc_cdf(dist: &Distribution, n: usize, a: f64, samples: u64, seed: u64) -> Result<McEstimate> {
    check_samples(samples)?;
    if n == 0 {
        return Err(Error::BadParams("n must be positive".into()));
    }
    let nf = n as f64;
    if a < nf * dist.min_value() {
        return Ok(McEstimate::exact(0.0, samples, seed));
    }
    if a >= nf * dist.max_value() {
        return Ok(McEstimate::exact(1.0, samples, seed));
    }
    let [(s, ss)] = sharded(dist, n, samples, seed, |w| [if w <= a { 1.0 } else { 0.0 }]);
    Ok(McEstimate::from_sums(s, ss, samples, seed))
}

/// Monte Carlo estimates of the two expectations in the dependence-testing
/// bound at log-threshold `t`, from sums `W` of the joint-measure information density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FblMcEstimate {
    /// `P[W <= t]`.
    pub joint: McEstimate,
    /// `e^t P_ind[W > t]`, estimated as `E[e^(t - W) 1{W > t}]` under the joint measure.
    pub independent_scaled: McEstimate,
    /// Sum of the two terms.
    pub total: McEstimate,
}

pub fn mc_fbl(density: &Distribution, n: usize, threshold_log: f64, samples: u64, seed: u64) -> Result<FblMcEstimate> {
    check_samples(samples)?;
    if n == 0 {
        return Err(Error::BadParams("n must be positive".into()));
    }
    let t = threshold_log;
    let [(j, jj), (i, ii), (s, ss)] = sharded(density, n, samples, seed, |w| {
        if w <= t {
            [1.0, 0.0, 1.0]
        } else {
            let r = (t - w).exp();
            [0.0, r, r]
        }
    });
    Ok(FblMcEstimate {
        joint: McEstimate::from_sums(j, jj, samples, seed),
        independent_scaled: McEstimate::from_sums(i, ii, samples, seed),
        total: McEstimate::from_sums(s, ss, samples, seed),
    })
}
