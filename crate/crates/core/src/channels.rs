//! Information-density laws for binary-input symmetric channels.
//!
//! For each channel we build two distributions of `iota(x; y)` on the same
//! support: one under the joint law `P_X P_{Y|X}` and one under the product
//! `P_X P_Y`. Inputs are uniform and antipodal, the output reference measure is
//! the channel marginal, and by symmetry it suffices to condition on `x = +a`.

use serde::{Deserialize, Serialize};

use crate::distribution::{DistKind, Distribution, QuadratureSource};
use crate::error::{Error, Result};
use crate::real::log_add;
use crate::stable::{sas_density, sas_density_at_zero, sas_tail_mass};

/// AWGN grids reach this many noise standard deviations past each input point.
pub const AWGN_HALF_WIDTH: f64 = 20.0;
/// Stable-noise grids stop where the density drops below this fraction of its peak.
pub const SAS_DENSITY_FLOOR: f64 = 1e-12;
pub const MIN_NODES: usize = 101;
pub const MAX_NODES: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ChannelModel {
    Bsc {
        delta: f64,
    },
    /// Unit noise variance, inputs `±sqrt(snr)`.
    BiAwgn {
        snr: f64,
    },
    BiSas {
        alpha: f64,
        sigma: f64,
        amplitude: f64,
    },
}

impl ChannelModel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ChannelModel::Bsc { delta } if !(delta > 0.0 && delta < 0.5) => {
                Err(Error::BadChannel(format!("bsc crossover {delta} must lie in (0, 1/2)")))
            }
            ChannelModel::BiAwgn { snr } if !(snr > 0.0 && snr.is_finite()) => {
                Err(Error::BadChannel(format!("awgn snr {snr} must be positive")))
            }
            ChannelModel::BiSas { alpha, sigma, amplitude }
                if !(alpha > 0.0
                    && alpha <= 2.0
                    && sigma > 0.0
                    && amplitude > 0.0
                    && sigma.is_finite()
                    && amplitude.is_finite()) =>
            {
                Err(Error::BadChannel(format!(
                    "stable channel needs 0 < alpha <= 2, sigma > 0, amplitude > 0 (got {alpha}, {sigma}, {amplitude})"
                )))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputLaw {
    ChannelMarginal,
}

#[derive(Debug, Clone)]
pub struct DensityBuild {
    pub channel: ChannelModel,
    /// Law of `iota` under `P_X P_{Y|X}`.
    pub joint_density_dist: Distribution,
    /// Law of `iota` under `P_X P_Y`, on the same support.
    pub independent_dist: Distribution,
    pub node_count: usize,
    /// Half-width of the output grid (0 for the BSC).
    pub truncation: f64,
    pub qy_kind: OutputLaw,
}

pub fn build_density_dist(ch: &ChannelModel, nodes: usize) -> Result<DensityBuild> {
    build_density_dist_for_input(ch, nodes, true)
}

/// As [`build_density_dist`], conditioning on `x = +a` or `x = -a`.
pub fn build_density_dist_for_input(ch: &ChannelModel, nodes: usize, positive_input: bool) -> Result<DensityBuild> {
    ch.validate()?;
    match *ch {
        ChannelModel::Bsc { delta } => {
            let hi = (2.0 * (1.0 - delta)).ln();
            let lo = (2.0 * delta).ln();
            let joint = Distribution::from_probs(&[(lo, delta), (hi, 1.0 - delta)])?;
            let independent = Distribution::from_probs(&[(lo, 0.5), (hi, 0.5)])?;
            Ok(DensityBuild {
                channel: *ch,
                joint_density_dist: joint,
                independent_dist: independent,
                node_count: 2,
                truncation: 0.0,
                qy_kind: OutputLaw::ChannelMarginal,
            })
        }
        ChannelModel::BiAwgn { snr } => {
            check_nodes(nodes)?;
            let a = snr.sqrt();
            let half = a + AWGN_HALF_WIDTH;
            let h = 2.0 * half / (nodes - 1) as f64;
            let m = (nodes - 1) as f64 / 2.0;
            let ys: Vec<(f64, f64)> = (0..nodes)
                .map(|i| {
                    let y = half * ((i as f64 - m) / m);
                    let end = if i == 0 || i == nodes - 1 { 0.5f64.ln() } else { 0.0 };
                    (y, h.ln() + end)
                })
                .collect();
            let log_noise = |z: f64| -0.5 * z * z - 0.5 * (2.0 * std::f64::consts::PI).ln();
            assemble(ch, nodes, half, a, positive_input, &ys, &[], |z| Ok(log_noise(z)))
        }
        ChannelModel::BiSas { alpha, sigma, amplitude } => {
            check_nodes(nodes)?;
            let a = amplitude;
            let peak = sas_density_at_zero(alpha, sigma);
            // Farthest point of the grid: where the noise density (seen from the
            // nearer input) falls below the floor.
            let floor = SAS_DENSITY_FLOOR * peak;
            let mut t = 10.0 * sigma;
            while sas_density(alpha, sigma, t)? > floor {
                t *= 2.0;
                if t > 1e12 * sigma {
                    return Err(Error::QuadratureBudget("stable tail does not reach the density floor".into()));
                }
            }
            let (mut lo, mut hi) = (t / 2.0, t);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if sas_density(alpha, sigma, mid)? > floor {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let half = hi + a;
            // y = sigma sinh(u): uniform near the inputs, geometric in the tails.
            let umax = (half / sigma).asinh();
            let m = (nodes - 1) as f64 / 2.0;
            let du = umax / m;
            let ys: Vec<(f64, f64)> = (0..nodes)
                .map(|i| {
                    let u = umax * ((i as f64 - m) / m);
                    let end = if i == 0 || i == nodes - 1 { 0.5f64.ln() } else { 0.0 };
                    (sigma * u.sinh(), (sigma * u.cosh() * du).ln() + end)
                })
                .collect();
            let y_end = ys[nodes - 1].0;
            // Mass beyond the grid, lumped at the end points.
            let near = sas_tail_mass(alpha, sigma, y_end - a)?;
            let far = sas_tail_mass(alpha, sigma, y_end + a)?;
            let lumps = [(-y_end, far, near), (y_end, near, far)];
            assemble(ch, nodes, y_end, a, positive_input, &ys, &lumps, |z| Ok(sas_density(alpha, sigma, z)?.ln()))
        }
    }
}

fn check_nodes(nodes: usize) -> Result<()> {
    if !(MIN_NODES..=MAX_NODES).contains(&nodes) {
        return Err(Error::QuadratureBudget(format!("node count {nodes} outside [{MIN_NODES}, {MAX_NODES}]")));
    }
    Ok(())
}

/// Maps output nodes `(y, ln quadrature weight)` through `iota`.
/// `lumps` are `(y, mass given +a, mass given -a)` atoms.
#[allow(clippy::too_many_arguments)]
fn assemble<F: Fn(f64) -> Result<f64>>(
    ch: &ChannelModel,
    nodes: usize,
    half: f64,
    a: f64,
    positive_input: bool,
    ys: &[(f64, f64)],
    lumps: &[(f64, f64, f64)],
    log_noise: F,
) -> Result<DensityBuild> {
    let ln2 = std::f64::consts::LN_2;
    let mut joint = Vec::with_capacity(ys.len() + lumps.len());
    let mut indep = Vec::with_capacity(ys.len() + lumps.len());
    let mut push = |l_plus: f64, l_minus: f64, base: f64| {
        let l_mix = log_add(l_plus, l_minus);
        let l_x = if positive_input { l_plus } else { l_minus };
        let iota = ln2 + l_x - l_mix;
        joint.push((iota, base + l_x));
        indep.push((iota, base - ln2 + l_mix));
    };
    for &(y, lw) in ys {
        push(log_noise(y - a)?, log_noise(y + a)?, lw);
    }
    for &(_, m_plus, m_minus) in lumps {
        if m_plus > 0.0 && m_minus > 0.0 {
            push(m_plus.ln(), m_minus.ln(), 0.0);
        }
    }
    let source = QuadratureSource { label: format!("{ch:?}"), nodes, lower: -half, upper: half };
    Ok(DensityBuild {
        channel: *ch,
        joint_density_dist: Distribution::from_log_weights(joint, DistKind::Quadrature)?.with_source(source.clone()),
        independent_dist: Distribution::from_log_weights(indep, DistKind::Quadrature)?.with_source(source),
        node_count: nodes,
        truncation: half,
        qy_kind: OutputLaw::ChannelMarginal,
    })
}
