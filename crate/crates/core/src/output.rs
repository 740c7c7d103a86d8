//! CSV tables, metadata sidecar and gnuplot scripts.
//!
//! Floats are written with Rust's shortest round-trip formatting, so the same
//! numbers always give the same bytes.

use std::io::{self, Write};

use serde::Serialize;

use crate::config::{ConfigFile, PsdOutputParams};
use crate::error::Result;
use crate::montecarlo::{MetricSeries, RunMetadata};
use crate::plan::IfSweepResult;
use crate::psd::{linear_to_dbchz, PhaseNoisePsd};
use crate::rng::RNG_ALGORITHM;

pub const PSD_HEADER: &str = "f_m_hz,psd_dbchz";
pub const SWEEP_HEADER: &str = "f_if_hz,sigma2_rad2,method";
pub const METRIC_HEADER: &str = "plan,cpe,snr_db,ber,ber_ci,evm_pct,runs,bits";

/// Log-spaced offset grid and spectrum in dBc/Hz, scaled to the requested carrier.
pub fn psd_table(reference: &PhaseNoisePsd, params: &PsdOutputParams) -> Result<Vec<(f64, f64)>> {
    let carrier = params.carrier_hz.unwrap_or(reference.base_carrier_hz());
    let psd = reference.scale_to_carrier(carrier)?;
    let stretch = if params.scale_offsets {
        carrier / reference.base_carrier_hz()
    } else {
        1.0
    };
    let ppd = params.points_per_decade as f64;
    let n = ((params.decade_max - params.decade_min) * ppd + 1e-9).floor() as usize + 1;
    (0..n)
        .map(|i| {
            let f = 10f64.powf(params.decade_min + i as f64 / ppd) * stretch;
            Ok((f, linear_to_dbchz(psd.eval(f)?)))
        })
        .collect()
}

pub fn write_psd_csv<W: Write>(mut w: W, rows: &[(f64, f64)]) -> io::Result<()> {
    writeln!(w, "{PSD_HEADER}")?;
    for (f, db) in rows {
        writeln!(w, "{f},{db}")?;
    }
    Ok(())
}

pub fn write_sweep_csv<W: Write>(mut w: W, sweeps: &[IfSweepResult]) -> io::Result<()> {
    writeln!(w, "{SWEEP_HEADER}")?;
    for s in sweeps {
        for (f, v) in s.grid.iter().zip(&s.variance) {
            writeln!(w, "{f},{v},{}", s.method)?;
        }
    }
    Ok(())
}

pub fn write_metric_csv<W: Write>(mut w: W, series: &[MetricSeries]) -> io::Result<()> {
    writeln!(w, "{METRIC_HEADER}")?;
    for s in series {
        let label = s.label();
        for i in 0..s.snr_db.len() {
            writeln!(
                w,
                "{label},{},{},{},{},{},{},{}",
                s.cpe_correction, s.snr_db[i], s.ber_mean[i], s.ber_ci_halfwidth[i], s.evm_rms_percent[i], s.runs, s.bits[i]
            )?;
        }
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct Conventions {
    psd: &'static str,
    carrier_scaling: &'static str,
    variance_band: &'static str,
    if_grid: &'static str,
    seeding: &'static str,
}

const CONVENTIONS: Conventions = Conventions {
    psd: "one-sided S(f) in rad^2/Hz; dBc/Hz = 10*log10(S)",
    carrier_scaling: "level x (fc/fb)^2, corner frequencies x fc/fb",
    variance_band: "offsets up to half the occupied bandwidth N*delta_f",
    if_grid: "uniform on [0.001, 0.999] x f_rf",
    seeding: "streams keyed by (purpose, run, symbol/snr index); plan and CPE mode share draws",
};

/// Sidecar written as `metadata.toml` next to every output set.
#[derive(Debug, Serialize)]
pub struct Metadata<'a> {
    pub tool: &'static str,
    pub version: &'static str,
    pub subcommand: &'a str,
    pub rng_algorithm: &'static str,
    pub workers: String,
    pub files: Vec<String>,
    conventions: Conventions,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub run: Option<RunMetadata>,
    pub config: &'a ConfigFile,
}

impl<'a> Metadata<'a> {
    pub fn new(subcommand: &'a str, config: &'a ConfigFile, workers: Option<usize>) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            subcommand,
            rng_algorithm: RNG_ALGORITHM,
            workers: workers.map_or_else(|| "all".to_string(), |n| n.to_string()),
            files: Vec::new(),
            conventions: CONVENTIONS,
            run: None,
            config,
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("metadata is serializable")
    }
}

fn quote(s: &str) -> String {
    format!("'{}'", s.replace('\'', "''"))
}

/// Variance against IF frequency, one line per method, minimum marked.
pub fn sweep_plot_script(csv: &str, sweeps: &[IfSweepResult], f_rf_hz: f64) -> String {
    let mut s = String::new();
    s.push_str("set datafile separator ','\n");
    s.push_str(&format!("set title {}\n", quote(&format!("IF placement, f_RF = {} GHz", f_rf_hz / 1e9))));
    s.push_str("set xlabel 'f_IF (GHz)'\nset ylabel 'phase variance (rad^2)'\nset key top center\nset grid\n");
    for (i, sw) in sweeps.iter().enumerate() {
        let vmin = sw.variance.iter().cloned().fold(f64::INFINITY, f64::min);
        s.push_str(&format!(
            "set label {} {} at {},{} point pt 7 offset 1,{}\n",
            i + 1,
            quote(&format!("min {} @ {} GHz", sw.method, sw.argmin_if_hz / 1e9)),
            sw.argmin_if_hz / 1e9,
            vmin,
            1 + i
        ));
    }
    let plots: Vec<String> = sweeps
        .iter()
        .map(|sw| {
            format!(
                "{} using ($1/1e9):(strcol(3) eq '{m}' ? $2 : 1/0) with lines title '{m}'",
                quote(csv),
                m = sw.method
            )
        })
        .collect();
    s.push_str(&format!("plot {}\n", plots.join(", \\\n     ")));
    s
}

/// BER (log scale) or EVM against SNR for each series.
pub fn metric_plot_script(csv: &str, series: &[MetricSeries], column: MetricColumn) -> String {
    let (col, ylabel, log) = match column {
        MetricColumn::Ber => (4, "BER", true),
        MetricColumn::Evm => (6, "EVM (%)", false),
    };
    let mut s = String::new();
    s.push_str("set datafile separator ','\n");
    s.push_str(&format!("set xlabel 'SNR (dB)'\nset ylabel '{ylabel}'\nset grid\nset key outside right\n"));
    if log {
        s.push_str("set logscale y\nset format y '10^{%L}'\n");
    }
    let plots: Vec<String> = series
        .iter()
        .map(|m| {
            let label = m.label();
            let cpe = m.cpe_correction;
            format!(
                "{} using 3:((strcol(1) eq '{label}' && strcol(2) eq '{cpe}') ? ${col} : 1/0) with linespoints title '{label}{}'",
                quote(csv),
                if cpe { " +CPE" } else { "" }
            )
        })
        .collect();
    s.push_str(&format!("plot {}\n", plots.join(", \\\n     ")));
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricColumn {
    Ber,
    Evm,
}

/// Spectrum against offset on log-log axes.
pub fn psd_plot_script(csv: &str, carrier_hz: f64) -> String {
    format!(
        "set datafile separator ','\nset logscale x\nset grid\nset xlabel 'offset (Hz)'\nset ylabel 'L(f) (dBc/Hz)'\n\
         set title 'phase noise at {} GHz'\nplot {} using 1:2 with lines notitle\n",
        carrier_hz / 1e9,
        quote(csv)
    )
}
