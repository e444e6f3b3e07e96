//! Row computation for the three run kinds.

use certbound_core::channels::{build_density_dist, DensityBuild};
use certbound_core::fbl::{
    dt_bounds, dt_normal, dt_threshold, log_m, mc_optimize_gamma, FblPoint, GammaSearch, NormalTriple,
};
use certbound_core::oracle::{exact_cdf, mc_fbl, ClosedForm};
use certbound_core::saddlepoint::{berry_esseen_envelope, exponent_h, solve_theta_star, thm3_envelope};
use certbound_core::{Distribution, Error};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{Command, DistributionSpec, McSpec, RunConfig};
use crate::error::CliError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// One evaluation point of a sum-CDF run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SumCdfRow {
    pub a: f64,
    pub exact: Option<f64>,
    pub normal_center: f64,
    pub normal_lo: f64,
    pub normal_hi: f64,
    pub sp_center: Option<f64>,
    pub sp_lo: Option<f64>,
    pub sp_hi: Option<f64>,
    pub theta_star: Option<f64>,
    pub h: Option<f64>,
    pub flag: String,
}

/// One blocklength of a DT or MC curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub n: usize,
    pub log2_m: f64,
    /// `ln gamma` (MC curves only).
    pub log_gamma: Option<f64>,
    pub theta: Option<f64>,
    pub d: Option<f64>,
    pub alpha: Option<f64>,
    pub n_upper: Option<f64>,
    pub g: Option<f64>,
    pub beta: Option<f64>,
    pub s: Option<f64>,
    pub exact: Option<f64>,
    pub mc_value: Option<f64>,
    pub mc_ci_lo: Option<f64>,
    pub mc_ci_hi: Option<f64>,
    pub flag: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "table", content = "rows", rename_all = "snake_case")]
pub enum Table {
    SumCdf(Vec<SumCdfRow>),
    Curve(Vec<CurveRow>),
}

impl Table {
    pub fn len(&self) -> usize {
        match self {
            Table::SumCdf(r) => r.len(),
            Table::Curve(r) => r.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Everything written to the output file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunOutput {
    pub version: String,
    /// The resolved configuration, minus the output path.
    pub config: RunConfig,
    #[serde(flatten)]
    pub table: Table,
}

#[derive(Debug, Clone)]
pub struct Report {
    pub output: RunOutput,
    /// Rows that failed for reasons other than an out-of-range threshold.
    pub failures: Vec<String>,
    pub warnings: Vec<String>,
}

fn join_flags(flags: &[&str]) -> String {
    flags.join(";")
}

pub fn run(cfg: &RunConfig) -> Result<Report, CliError> {
    let mut echo = cfg.clone();
    echo.output.path = None;
    let (table, failures, warnings) = match cfg.command {
        Command::SumCdf => {
            let (rows, failures) = run_sum_cdf(cfg)?;
            (Table::SumCdf(rows), failures, Vec::new())
        }
        Command::DtCurve | Command::McCurve => {
            let (rows, failures) = run_fbl_curve(cfg)?;
            let warnings = if cfg.command == Command::DtCurve { beta_trend_warnings(&rows) } else { Vec::new() };
            (Table::Curve(rows), failures, warnings)
        }
        Command::Figure => return Err(CliError::Config("figure runs resolve to a concrete command".into())),
    };
    Ok(Report { output: RunOutput { version: VERSION.into(), config: echo, table }, failures, warnings })
}

fn build_distribution(spec: &DistributionSpec) -> Result<Distribution, CliError> {
    let d = match *spec {
        DistributionSpec::Bernoulli { p } => Distribution::bernoulli(p),
        DistributionSpec::ChiSquared1 { nodes, half_width } => Distribution::chi_squared_1(nodes, half_width),
        DistributionSpec::Gaussian { mean, var, nodes, half_width } => {
            Distribution::gaussian(mean, var, nodes, half_width)
        }
    };
    d.map_err(|e| CliError::Numeric(format!("building distribution: {e}")))
}

fn oracle_for(spec: &DistributionSpec, n: usize) -> ClosedForm {
    let nf = n as f64;
    match *spec {
        DistributionSpec::Bernoulli { p } => ClosedForm::Binomial { n: n as u64, p },
        DistributionSpec::ChiSquared1 { .. } => ClosedForm::Gamma { shape: nf / 2.0, scale: 2.0 },
        DistributionSpec::Gaussian { mean, var, .. } => ClosedForm::Gaussian { mean: nf * mean, var: nf * var },
    }
}

pub fn run_sum_cdf(cfg: &RunConfig) -> Result<(Vec<SumCdfRow>, Vec<String>), CliError> {
    let spec = cfg.distribution.as_ref().ok_or_else(|| CliError::Config("missing distribution".into()))?;
    let grid = cfg.sum.as_ref().ok_or_else(|| CliError::Config("missing sum grid".into()))?;
    let dist = build_distribution(spec)?;
    let n = grid.n;
    let oracle = oracle_for(spec, n);
    let results: Vec<(SumCdfRow, Option<String>)> =
        grid.points().par_iter().map(|&a| sum_row(&dist, &oracle, n, a)).collect();
    Ok(split(results))
}

fn split<R>(results: Vec<(R, Option<String>)>) -> (Vec<R>, Vec<String>) {
    let mut failures = Vec::new();
    let rows = results
        .into_iter()
        .map(|(r, f)| {
            failures.extend(f);
            r
        })
        .collect();
    (rows, failures)
}

fn sum_row(dist: &Distribution, oracle: &ClosedForm, n: usize, a: f64) -> (SumCdfRow, Option<String>) {
    let mut failure = None;
    let mut flags = Vec::new();
    let exact = match exact_cdf(oracle, a) {
        Ok(v) => Some(v),
        Err(e) => {
            flags.push("oracle_error");
            failure = Some(format!("a = {a}: exact CDF: {e}"));
            None
        }
    };
    let be = berry_esseen_envelope(dist, n, a).expect("berry-esseen envelope needs only untilted moments");
    if be.center - be.radius() < 0.0 {
        flags.push("normal_lo_clipped");
    }
    let mut row = SumCdfRow {
        a,
        exact,
        normal_center: be.center,
        normal_lo: be.lower,
        normal_hi: be.upper,
        sp_center: None,
        sp_lo: None,
        sp_hi: None,
        theta_star: None,
        h: None,
        flag: String::new(),
    };
    let sp = solve_theta_star(dist, n, a).and_then(|s| Ok((s, thm3_envelope(dist, n, a)?, exponent_h(dist, n, a)?)));
    match sp {
        Ok((s, env, h)) => {
            row.sp_center = Some(env.center);
            row.sp_lo = Some(env.lower);
            row.sp_hi = Some(env.upper);
            row.theta_star = Some(s.theta_star);
            row.h = Some(h);
            if env.center - env.radius() < 0.0 {
                flags.push("sp_lo_clipped");
            }
        }
        Err(Error::OutOfHull { .. }) => flags.push("out_of_hull"),
        Err(e) => {
            flags.push("error");
            failure = Some(format!("a = {a}: saddlepoint: {e}"));
        }
    }
    row.flag = join_flags(&flags);
    (row, failure)
}

pub fn run_fbl_curve(cfg: &RunConfig) -> Result<(Vec<CurveRow>, Vec<String>), CliError> {
    let ch = cfg.channel.as_ref().ok_or_else(|| CliError::Config("missing channel".into()))?;
    let grid = cfg.curve.as_ref().ok_or_else(|| CliError::Config("missing curve grid".into()))?;
    let density = build_density_dist(&ch.model, ch.nodes)
        .map_err(|e| CliError::Numeric(format!("building {:?}: {e}", ch.model)))?;
    let mc_flavor = cfg.command == Command::McCurve;
    let results: Vec<(CurveRow, Option<String>)> =
        grid.points().par_iter().map(|&n| curve_row(&density, mc_flavor, n, grid.rate * n as f64, cfg.mc)).collect();
    Ok(split(results))
}

fn empty_row(n: usize, log2_m: f64) -> CurveRow {
    CurveRow {
        n,
        log2_m,
        log_gamma: None,
        theta: None,
        d: None,
        alpha: None,
        n_upper: None,
        g: None,
        beta: None,
        s: None,
        exact: None,
        mc_value: None,
        mc_ci_lo: None,
        mc_ci_hi: None,
        flag: String::new(),
    }
}

fn fill_normal(row: &mut CurveRow, t: &NormalTriple) {
    row.d = Some(t.d);
    row.alpha = Some(t.alpha);
    row.n_upper = Some(t.n_upper);
}

fn curve_row(
    density: &DensityBuild,
    mc_flavor: bool,
    n: usize,
    log2_m: f64,
    mc: Option<McSpec>,
) -> (CurveRow, Option<String>) {
    let mut row = empty_row(n, log2_m);
    let mut flags: Vec<&str> = Vec::new();

    let point: Result<(FblPoint, Option<GammaSearch>), Error> = if mc_flavor {
        mc_optimize_gamma(density, n, log2_m).map(|o| (o.point, Some(o.search)))
    } else {
        dt_bounds(density, n, log2_m).map(|p| (p, None))
    };

    let mut failure = None;
    match point {
        Ok((p, search)) => {
            row.log_gamma = p.log_gamma;
            row.theta = Some(p.theta);
            fill_normal(&mut row, &p.normal);
            row.g = Some(p.sp.g);
            row.beta = Some(p.sp.beta);
            row.s = Some(p.sp.s);
            row.exact = p.exact;
            if p.low_signal {
                flags.push("low_signal");
            }
            if p.d_clipped {
                flags.push("d_clipped");
            }
            if p.sp.g < 0.0 {
                flags.push("negative_lower");
            }
            if search == Some(GammaSearch::GridFallback) {
                flags.push("grid_fallback");
            }
            if let Some(lg) = p.log_gamma {
                if lg >= log_m(log2_m) {
                    flags.push("gamma_degenerate");
                }
            }
            if let Some(spec) = mc {
                let t = match p.log_gamma {
                    Some(lg) => lg,
                    None => dt_threshold(log2_m).expect("threshold already evaluated"),
                };
                let penalty = p.log_gamma.map_or(0.0, |lg| (lg - log_m(log2_m)).exp());
                match mc_fbl(&density.joint_density_dist, n, t, spec.samples, spec.seed) {
                    Ok(e) => {
                        row.mc_value = Some(e.total.value - penalty);
                        row.mc_ci_lo = Some(e.total.ci95_low - penalty);
                        row.mc_ci_hi = Some(e.total.ci95_high - penalty);
                    }
                    Err(e) => {
                        flags.push("mc_error");
                        failure = Some(format!("n = {n}: sampling: {e}"));
                    }
                }
            }
        }
        Err(Error::OutOfHull { .. }) => {
            flags.push("out_of_hull");
            // The DT normal approximation needs no tilt, so it is still reported.
            // MC curves have no gamma to report it at.
            if !mc_flavor {
                if let Ok(t) = dt_normal(density, n, log2_m) {
                    fill_normal(&mut row, &t);
                }
            }
        }
        Err(e) => {
            flags.push("error");
            failure = Some(format!("n = {n}: {e}"));
        }
    }
    row.flag = join_flags(&flags);
    (row, failure)
}

/// Below capacity the DT approximation should fall with n; a rise is worth a
/// look but not an error.
fn beta_trend_warnings(rows: &[CurveRow]) -> Vec<String> {
    rows.windows(2)
        .filter_map(|w| match (w[0].beta, w[1].beta) {
            (Some(a), Some(b)) if b > a => {
                Some(format!("beta rises from n = {} ({a:e}) to n = {} ({b:e})", w[0].n, w[1].n))
            }
            _ => None,
        })
        .collect()
}
