//! CSV and JSON rendering.
//!
//! CSV files open with `#` comment lines carrying the tool version and the
//! resolved configuration as TOML, then a header row. Floats are written with
//! 17 significant digits so they read back bit-exact; missing values are empty.

use std::path::Path;

use crate::config::Format;
use crate::error::CliError;
use crate::run::{RunOutput, Table};

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

pub fn render(out: &RunOutput, format: Format) -> Result<String, CliError> {
    match format {
        Format::Csv => render_csv(out),
        Format::Json => serde_json::to_string_pretty(out)
            .map(|s| s + "\n")
            .map_err(|e| CliError::Numeric(format!("encoding json: {e}"))),
    }
}

fn header_comments(out: &RunOutput) -> Result<String, CliError> {
    let cfg = toml::to_string(&out.config).map_err(|e| CliError::Numeric(format!("encoding config echo: {e}")))?;
    let mut s = format!("# certbound {}\n", out.version);
    for line in cfg.lines() {
        if line.is_empty() {
            s.push_str("#\n");
        } else {
            s.push_str("# ");
            s.push_str(line);
            s.push('\n');
        }
    }
    Ok(s)
}

fn render_csv(out: &RunOutput) -> Result<String, CliError> {
    let mut buf = header_comments(out)?.into_bytes();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        let csv_err = |e: csv::Error| CliError::Numeric(format!("writing csv: {e}"));
        match &out.table {
            Table::SumCdf(rows) => {
                w.write_record([
                    "a",
                    "exact",
                    "normal_center",
                    "normal_lo",
                    "normal_hi",
                    "sp_center",
                    "sp_lo",
                    "sp_hi",
                    "theta_star",
                    "h",
                    "flag",
                ])
                .map_err(csv_err)?;
                for r in rows {
                    w.write_record([
                        num(r.a),
                        opt(r.exact),
                        num(r.normal_center),
                        num(r.normal_lo),
                        num(r.normal_hi),
                        opt(r.sp_center),
                        opt(r.sp_lo),
                        opt(r.sp_hi),
                        opt(r.theta_star),
                        opt(r.h),
                        r.flag.clone(),
                    ])
                    .map_err(csv_err)?;
                }
            }
            Table::Curve(rows) => {
                w.write_record([
                    "n",
                    "log2_m",
                    "log_gamma",
                    "theta",
                    "d",
                    "alpha",
                    "n_upper",
                    "g",
                    "beta",
                    "s",
                    "exact",
                    "mc_value",
                    "mc_ci_lo",
                    "mc_ci_hi",
                    "flag",
                ])
                .map_err(csv_err)?;
                for r in rows {
                    w.write_record([
                        r.n.to_string(),
                        num(r.log2_m),
                        opt(r.log_gamma),
                        opt(r.theta),
                        opt(r.d),
                        opt(r.alpha),
                        opt(r.n_upper),
                        opt(r.g),
                        opt(r.beta),
                        opt(r.s),
                        opt(r.exact),
                        opt(r.mc_value),
                        opt(r.mc_ci_lo),
                        opt(r.mc_ci_hi),
                        r.flag.clone(),
                    ])
                    .map_err(csv_err)?;
                }
            }
        }
        w.flush()?;
    }
    String::from_utf8(buf).map_err(|e| CliError::Numeric(format!("csv is not utf-8: {e}")))
}

/// Writes `contents` to `path` through a sibling temporary file, so a failed
/// run never leaves a truncated output behind.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".partial");
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}
