//! Built-in configurations reproducing the standard figures.
//!
//! Each preset is a TOML snippet run through the same parser as user files,
//! so a preset and a config file with identical text behave identically.

use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use crate::config::{parse, PartialConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    /// Bernoulli(0.2) sums, n = 100.
    Fig1,
    /// Chi-squared(1) sums, n = 50.
    Fig2,
    /// BSC(0.11), DT bounds at R = 0.32.
    Fig3a,
    /// BSC(0.11), MC bounds at R = 0.42.
    Fig3b,
    /// Binary-input AWGN at SNR 1, DT bounds at R = 0.425.
    Fig4a,
    Fig4b,
    /// Binary-input SaS noise (1.4, 0.6), DT bounds at R = 0.38.
    Fig5a,
    Fig5b,
}

const N_GRID: &str = "n_start = 100\nn_stop = 2000\nn_step = 100\n";

impl Preset {
    pub const ALL: [Preset; 8] = [
        Preset::Fig1,
        Preset::Fig2,
        Preset::Fig3a,
        Preset::Fig3b,
        Preset::Fig4a,
        Preset::Fig4b,
        Preset::Fig5a,
        Preset::Fig5b,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Fig1 => "fig1",
            Preset::Fig2 => "fig2",
            Preset::Fig3a => "fig3a",
            Preset::Fig3b => "fig3b",
            Preset::Fig4a => "fig4a",
            Preset::Fig4b => "fig4b",
            Preset::Fig5a => "fig5a",
            Preset::Fig5b => "fig5b",
        }
    }

    pub fn toml(self) -> String {
        let bsc = "[channel]\nkind = \"bsc\"\ndelta = 0.11\n";
        let awgn = "[channel]\nkind = \"bi_awgn\"\nsnr = 1.0\nnodes = 2001\n";
        let sas = "[channel]\nkind = \"bi_sas\"\nalpha = 1.4\nsigma = 0.6\namplitude = 1.0\nnodes = 2001\n";
        let curve =
            |cmd: &str, ch: &str, rate: f64| format!("command = \"{cmd}\"\n{ch}[curve]\nrate = {rate}\n{N_GRID}");
        match self {
            Preset::Fig1 => "command = \"sum-cdf\"\n[distribution]\nkind = \"bernoulli\"\np = 0.2\n\
                             [sum]\nn = 100\na_start = 5.0\na_stop = 35.0\na_step = 1.0\n"
                .into(),
            Preset::Fig2 => {
                "command = \"sum-cdf\"\n[distribution]\nkind = \"chi_squared_1\"\nnodes = 2001\nhalf_width = 20.0\n\
                             [sum]\nn = 50\na_start = 0.0\na_stop = 100.0\na_step = 2.0\n"
                    .into()
            }
            Preset::Fig3a => curve("dt-curve", bsc, 0.32),
            Preset::Fig3b => curve("mc-curve", bsc, 0.42),
            Preset::Fig4a => curve("dt-curve", awgn, 0.425),
            Preset::Fig4b => curve("mc-curve", awgn, 0.425),
            Preset::Fig5a => curve("dt-curve", sas, 0.38),
            Preset::Fig5b => curve("mc-curve", sas, 0.38),
        }
    }

    pub fn partial(self) -> PartialConfig {
        parse(&self.toml()).expect("built-in presets parse")
    }
}
