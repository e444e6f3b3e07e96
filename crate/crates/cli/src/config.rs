//! Run configuration: a TOML file layered over an optional preset.
//!
//! The file is read into a [`PartialConfig`] whose fields are all optional, so
//! parse errors carry the file's line and column. Presets are partial configs
//! too; the file overrides the preset field by field, and the merged result is
//! resolved and validated into a [`RunConfig`] before anything is computed.

use std::path::PathBuf;

use certbound_core::channels::{ChannelModel, MAX_NODES, MIN_NODES};
use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::presets::Preset;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    SumCdf,
    DtCurve,
    McCurve,
    /// Runs whatever the preset describes.
    Figure,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum, Default)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialConfig {
    pub command: Option<Command>,
    pub distribution: Option<PartialDistribution>,
    pub sum: Option<PartialSum>,
    pub channel: Option<PartialChannel>,
    pub curve: Option<PartialCurve>,
    pub mc: Option<PartialMc>,
    pub output: Option<PartialOutput>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialDistribution {
    pub kind: Option<String>,
    pub p: Option<f64>,
    pub mean: Option<f64>,
    pub var: Option<f64>,
    pub nodes: Option<usize>,
    pub half_width: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialSum {
    pub n: Option<usize>,
    pub a_start: Option<f64>,
    pub a_stop: Option<f64>,
    pub a_step: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialChannel {
    pub kind: Option<String>,
    pub delta: Option<f64>,
    pub snr: Option<f64>,
    pub alpha: Option<f64>,
    pub sigma: Option<f64>,
    pub amplitude: Option<f64>,
    pub nodes: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialCurve {
    pub rate: Option<f64>,
    pub n_start: Option<usize>,
    pub n_stop: Option<usize>,
    pub n_step: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialMc {
    pub samples: Option<u64>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialOutput {
    pub path: Option<PathBuf>,
    pub format: Option<Format>,
}

macro_rules! overlay {
    ($base:expr, $top:expr, $($f:ident),+) => {
        { $( if $top.$f.is_some() { $base.$f = $top.$f.clone(); } )+ }
    };
}

fn merge_section<T: Clone + Default>(base: &mut Option<T>, top: &Option<T>, apply: impl FnOnce(&mut T, &T)) {
    if let Some(t) = top {
        let b = base.get_or_insert_with(T::default);
        apply(b, t);
    }
}

impl PartialConfig {
    /// Applies `top` over `self`. A section whose `kind` changes is replaced
    /// wholesale, so parameters of the old kind don't leak into the new one.
    pub fn overlay(mut self, top: &PartialConfig) -> PartialConfig {
        overlay!(self, top, command);
        if let (Some(b), Some(t)) = (&self.distribution, &top.distribution) {
            if t.kind.is_some() && t.kind != b.kind {
                self.distribution = None;
            }
        }
        merge_section(&mut self.distribution, &top.distribution, |b, t| {
            overlay!(b, t, kind, p, mean, var, nodes, half_width)
        });
        merge_section(&mut self.sum, &top.sum, |b, t| overlay!(b, t, n, a_start, a_stop, a_step));
        if let (Some(b), Some(t)) = (&self.channel, &top.channel) {
            if t.kind.is_some() && t.kind != b.kind {
                self.channel = None;
            }
        }
        merge_section(&mut self.channel, &top.channel, |b, t| {
            overlay!(b, t, kind, delta, snr, alpha, sigma, amplitude, nodes)
        });
        merge_section(&mut self.curve, &top.curve, |b, t| overlay!(b, t, rate, n_start, n_stop, n_step));
        merge_section(&mut self.mc, &top.mc, |b, t| overlay!(b, t, samples, seed));
        merge_section(&mut self.output, &top.output, |b, t| overlay!(b, t, path, format));
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DistributionSpec {
    Bernoulli { p: f64 },
    ChiSquared1 { nodes: usize, half_width: f64 },
    Gaussian { mean: f64, var: f64, nodes: usize, half_width: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SumGrid {
    pub n: usize,
    pub a_start: f64,
    pub a_stop: f64,
    pub a_step: f64,
}

impl SumGrid {
    pub fn points(&self) -> Vec<f64> {
        let count = ((self.a_stop - self.a_start) / self.a_step + 1e-9).floor() as usize + 1;
        (0..count).map(|i| self.a_start + i as f64 * self.a_step).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelSpec {
    pub model: ChannelModel,
    /// Output-grid nodes (ignored for the BSC).
    pub nodes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveGrid {
    /// Bits per channel use.
    pub rate: f64,
    pub n_start: usize,
    pub n_stop: usize,
    pub n_step: usize,
}

impl CurveGrid {
    pub fn points(&self) -> Vec<usize> {
        (self.n_start..=self.n_stop).step_by(self.n_step).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct McSpec {
    pub samples: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputSpec {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    pub format: Format,
}

/// A fully resolved and validated run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: Command,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preset: Option<Preset>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub distribution: Option<DistributionSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sum: Option<SumGrid>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub channel: Option<ChannelSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub curve: Option<CurveGrid>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mc: Option<McSpec>,
    pub output: OutputSpec,
}

pub const DEFAULT_NODES: usize = 2001;
pub const DEFAULT_HALF_WIDTH: f64 = 20.0;
const MAX_GRID_POINTS: usize = 1_000_000;
const MIN_MC_SAMPLES: u64 = 10_000;

/// Parses a config file. Errors carry line and column.
pub fn parse(src: &str) -> Result<PartialConfig, CliError> {
    toml::from_str(src).map_err(|e| CliError::Config(format!("config: {e}")))
}

/// Where a value came from, for error messages that point into the file.
struct Locator<'a> {
    src: Option<&'a str>,
}

impl Locator<'_> {
    fn err(&self, section: &str, key: &str, msg: impl std::fmt::Display) -> CliError {
        let at = self.src.and_then(|s| find_line(s, section, key)).map(|l| format!(" (line {l})")).unwrap_or_default();
        CliError::Config(format!("{section}.{key}{at}: {msg}"))
    }
}

/// 1-based line of `key = ...` inside `[section]`, if present.
fn find_line(src: &str, section: &str, key: &str) -> Option<usize> {
    let mut current = String::new();
    for (i, line) in src.lines().enumerate() {
        let t = line.trim();
        if let Some(name) = t.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
            current = name.trim().to_string();
            continue;
        }
        if current == section {
            if let Some((k, _)) = t.split_once('=') {
                if k.trim() == key {
                    return Some(i + 1);
                }
            }
        }
    }
    None
}

fn need<T: Copy>(v: Option<T>, loc: &Locator, section: &str, key: &str) -> Result<T, CliError> {
    v.ok_or_else(|| loc.err(section, key, "missing"))
}

fn check_nodes(nodes: usize, loc: &Locator, section: &str) -> Result<(), CliError> {
    if !(MIN_NODES..=MAX_NODES).contains(&nodes) {
        return Err(loc.err(section, "nodes", format!("{nodes} outside [{MIN_NODES}, {MAX_NODES}]")));
    }
    Ok(())
}

fn check_positive(v: f64, loc: &Locator, section: &str, key: &str) -> Result<(), CliError> {
    if !(v > 0.0 && v.is_finite()) {
        return Err(loc.err(section, key, format!("{v} must be positive and finite")));
    }
    Ok(())
}

/// Resolves and validates a merged partial config. `src` is the user's file
/// text, used only to attach line numbers to errors.
pub fn resolve(p: &PartialConfig, preset: Option<Preset>, src: Option<&str>) -> Result<RunConfig, CliError> {
    let loc = Locator { src };
    let command = match p.command {
        Some(Command::Figure) | None => {
            return Err(CliError::Config(
                "no command: pass one on the command line, set `command` in the config, or use a preset".into(),
            ))
        }
        Some(c) => c,
    };

    let output = OutputSpec {
        path: p.output.as_ref().and_then(|o| o.path.clone()),
        format: p.output.as_ref().and_then(|o| o.format).unwrap_or_default(),
    };

    let mc = match &p.mc {
        None => None,
        Some(m) => {
            let samples = need(m.samples, &loc, "mc", "samples")?;
            if samples < MIN_MC_SAMPLES {
                return Err(loc.err("mc", "samples", format!("{samples} is below the minimum of {MIN_MC_SAMPLES}")));
            }
            Some(McSpec { samples, seed: m.seed.unwrap_or(0) })
        }
    };

    let mut cfg = RunConfig { command, preset, distribution: None, sum: None, channel: None, curve: None, mc, output };

    match command {
        Command::SumCdf => {
            if cfg.mc.is_some() {
                return Err(CliError::Config("mc: validation sampling applies to dt-curve and mc-curve only".into()));
            }
            let d = p
                .distribution
                .as_ref()
                .ok_or_else(|| CliError::Config("sum-cdf needs a [distribution] section".into()))?;
            cfg.distribution = Some(resolve_distribution(d, &loc)?);
            let s = p.sum.as_ref().ok_or_else(|| CliError::Config("sum-cdf needs a [sum] section".into()))?;
            cfg.sum = Some(resolve_sum(s, &loc)?);
        }
        Command::DtCurve | Command::McCurve => {
            let c = p.channel.as_ref().ok_or_else(|| CliError::Config("curves need a [channel] section".into()))?;
            cfg.channel = Some(resolve_channel(c, &loc)?);
            let g = p.curve.as_ref().ok_or_else(|| CliError::Config("curves need a [curve] section".into()))?;
            cfg.curve = Some(resolve_curve(g, &loc)?);
        }
        Command::Figure => unreachable!(),
    }
    Ok(cfg)
}

fn resolve_distribution(d: &PartialDistribution, loc: &Locator) -> Result<DistributionSpec, CliError> {
    const S: &str = "distribution";
    let kind = d.kind.as_deref().ok_or_else(|| loc.err(S, "kind", "missing"))?;
    let nodes = d.nodes.unwrap_or(DEFAULT_NODES);
    let half_width = d.half_width.unwrap_or(DEFAULT_HALF_WIDTH);
    match kind {
        "bernoulli" => {
            let p = need(d.p, loc, S, "p")?;
            if !(p > 0.0 && p < 1.0) {
                return Err(loc.err(S, "p", format!("{p} must lie in (0, 1)")));
            }
            Ok(DistributionSpec::Bernoulli { p })
        }
        "chi_squared_1" => {
            check_nodes(nodes, loc, S)?;
            check_positive(half_width, loc, S, "half_width")?;
            Ok(DistributionSpec::ChiSquared1 { nodes, half_width })
        }
        "gaussian" => {
            let mean = d.mean.unwrap_or(0.0);
            let var = d.var.unwrap_or(1.0);
            if !mean.is_finite() {
                return Err(loc.err(S, "mean", "must be finite"));
            }
            check_positive(var, loc, S, "var")?;
            check_nodes(nodes, loc, S)?;
            check_positive(half_width, loc, S, "half_width")?;
            Ok(DistributionSpec::Gaussian { mean, var, nodes, half_width })
        }
        other => Err(loc.err(S, "kind", format!("unknown kind `{other}` (bernoulli, chi_squared_1, gaussian)"))),
    }
}

fn resolve_sum(s: &PartialSum, loc: &Locator) -> Result<SumGrid, CliError> {
    const S: &str = "sum";
    let n = need(s.n, loc, S, "n")?;
    if n == 0 {
        return Err(loc.err(S, "n", "must be at least 1"));
    }
    let a_start = need(s.a_start, loc, S, "a_start")?;
    let a_stop = need(s.a_stop, loc, S, "a_stop")?;
    let a_step = s.a_step.unwrap_or(1.0);
    check_positive(a_step, loc, S, "a_step")?;
    if !(a_start.is_finite() && a_stop.is_finite()) || a_stop < a_start {
        return Err(loc.err(S, "a_stop", format!("range [{a_start}, {a_stop}] is empty or not finite")));
    }
    let g = SumGrid { n, a_start, a_stop, a_step };
    if (a_stop - a_start) / a_step > MAX_GRID_POINTS as f64 {
        return Err(loc.err(S, "a_step", format!("grid exceeds {MAX_GRID_POINTS} points")));
    }
    Ok(g)
}

fn resolve_channel(c: &PartialChannel, loc: &Locator) -> Result<ChannelSpec, CliError> {
    const S: &str = "channel";
    let kind = c.kind.as_deref().ok_or_else(|| loc.err(S, "kind", "missing"))?;
    let nodes = c.nodes.unwrap_or(DEFAULT_NODES);
    let model = match kind {
        "bsc" => ChannelModel::Bsc { delta: need(c.delta, loc, S, "delta")? },
        "bi_awgn" => ChannelModel::BiAwgn { snr: need(c.snr, loc, S, "snr")? },
        "bi_sas" => ChannelModel::BiSas {
            alpha: need(c.alpha, loc, S, "alpha")?,
            sigma: need(c.sigma, loc, S, "sigma")?,
            amplitude: c.amplitude.unwrap_or(1.0),
        },
        other => return Err(loc.err(S, "kind", format!("unknown kind `{other}` (bsc, bi_awgn, bi_sas)"))),
    };
    if let Err(e) = model.validate() {
        let key = match model {
            ChannelModel::Bsc { .. } => "delta",
            ChannelModel::BiAwgn { .. } => "snr",
            ChannelModel::BiSas { .. } => "alpha",
        };
        return Err(loc.err(S, key, e));
    }
    if !matches!(model, ChannelModel::Bsc { .. }) {
        check_nodes(nodes, loc, S)?;
    }
    Ok(ChannelSpec { model, nodes })
}

fn resolve_curve(g: &PartialCurve, loc: &Locator) -> Result<CurveGrid, CliError> {
    const S: &str = "curve";
    let rate = need(g.rate, loc, S, "rate")?;
    check_positive(rate, loc, S, "rate")?;
    let n_start = need(g.n_start, loc, S, "n_start")?;
    let n_stop = need(g.n_stop, loc, S, "n_stop")?;
    let n_step = g.n_step.unwrap_or(1);
    if n_start == 0 {
        return Err(loc.err(S, "n_start", "must be at least 1"));
    }
    if n_step == 0 {
        return Err(loc.err(S, "n_step", "must be at least 1"));
    }
    if n_stop < n_start {
        return Err(loc.err(S, "n_stop", format!("{n_stop} is below n_start = {n_start}")));
    }
    if (n_stop - n_start) / n_step >= MAX_GRID_POINTS {
        return Err(loc.err(S, "n_step", format!("grid exceeds {MAX_GRID_POINTS} points")));
    }
    Ok(CurveGrid { rate, n_start, n_stop, n_step })
}
