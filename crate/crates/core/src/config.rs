//! Experiment files.
//!
//! One TOML document with the sections `psd`, `numerology`, `plan`,
//! `experiment`, `sweep`, `psd_output` and `compare`. Every field has a
//! default, so an empty file describes the full-scale reference setup with the
//! representative oscillator. Overrides are `key=value` strings applied on top
//! of the file; `key` is either `section.field` or a bare field name, and
//! `value` is read as a TOML value (falling back to a plain string).
//!
//! ```toml
//! [psd]
//! s0_dbchz = -95.0
//! f_base_hz = 15e9
//! stages = [{ f_zero_hz = 10e6, f_pole_hz = 50e3 }]
//!
//! [plan]
//! kind = "heterodyne"
//! f_rf_hz = 140e9
//! f_if_hz = 70e9
//!
//! [experiment]
//! snr_grid = "0:1:30"
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::montecarlo::{snr_range, ExperimentConfig, PnMode, DEFAULT_MASTER_SEED};
use crate::ofdm::{NumerologyParams, OfdmNumerology};
use crate::plan::{FrequencyPlan, OscillatorPsds};
use crate::psd::{self, PhaseNoisePsd, VarianceMethod, ZeroPoleStage};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PsdParams {
    #[serde(default = "d::s0_dbchz")]
    pub s0_dbchz: f64,
    #[serde(default = "d::f_base_hz")]
    pub f_base_hz: f64,
    #[serde(default = "d::stages")]
    pub stages: Vec<ZeroPoleStage>,
}

impl Default for PsdParams {
    fn default() -> Self {
        Self {
            s0_dbchz: d::s0_dbchz(),
            f_base_hz: d::f_base_hz(),
            stages: d::stages(),
        }
    }
}

impl PsdParams {
    pub fn build(&self) -> Result<PhaseNoisePsd> {
        PhaseNoisePsd::from_dbchz(self.s0_dbchz, self.f_base_hz, self.stages.clone())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlanKind {
    Homodyne,
    Heterodyne,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanParams {
    #[serde(default = "d::plan_kind")]
    pub kind: PlanKind,
    #[serde(default = "d::f_rf_hz")]
    pub f_rf_hz: f64,
    /// Heterodyne only; defaults to `f_rf_hz / 2`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f_if_hz: Option<f64>,
    /// Reference spectrum of the IF oscillator when it differs from `[psd]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub if_psd: Option<PsdParams>,
    /// Reference spectrum of the RF LO when it differs from `[psd]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rf_lo_psd: Option<PsdParams>,
}

impl Default for PlanParams {
    fn default() -> Self {
        Self {
            kind: d::plan_kind(),
            f_rf_hz: d::f_rf_hz(),
            f_if_hz: None,
            if_psd: None,
            rf_lo_psd: None,
        }
    }
}

impl PlanParams {
    pub fn build(&self) -> Result<FrequencyPlan> {
        match self.kind {
            PlanKind::Homodyne => FrequencyPlan::homodyne(self.f_rf_hz),
            PlanKind::Heterodyne => {
                FrequencyPlan::heterodyne(self.f_rf_hz, self.f_if_hz.unwrap_or(self.f_rf_hz / 2.0))
            }
        }
    }
}

/// SNR grid written either as `"start:step:stop"` or as a list of values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SnrGrid {
    List(Vec<f64>),
    Range(String),
}

impl SnrGrid {
    pub fn values(&self) -> Result<Vec<f64>> {
        match self {
            SnrGrid::List(v) => Ok(v.clone()),
            SnrGrid::Range(s) => parse_range(s),
        }
    }
}

fn parse_range(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').map(str::trim).collect();
    let num = |p: &str| {
        p.parse::<f64>()
            .map_err(|_| Error::Config(format!("snr_grid: '{p}' is not a number in '{s}'")))
    };
    match parts.as_slice() {
        [a, b, c] => snr_range(num(a)?, num(b)?, num(c)?).map_err(|e| Error::Config(format!("snr_grid: {e}"))),
        [a, c] => snr_range(num(a)?, 1.0, num(c)?).map_err(|e| Error::Config(format!("snr_grid: {e}"))),
        _ => Err(Error::Config(format!("snr_grid: expected start:step:stop, got '{s}'"))),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentParams {
    #[serde(default = "d::snr_grid")]
    pub snr_grid: SnrGrid,
    #[serde(default = "d::n_symbols_per_run")]
    pub n_symbols_per_run: usize,
    #[serde(default = "d::n_mc_runs")]
    pub n_mc_runs: usize,
    #[serde(default)]
    pub cpe_correction: bool,
    #[serde(default = "d::master_seed")]
    pub master_seed: u64,
    #[serde(default)]
    pub pn_mode: PnMode,
    #[serde(default = "d::yes")]
    pub phase_noise: bool,
}

impl Default for ExperimentParams {
    fn default() -> Self {
        Self {
            snr_grid: d::snr_grid(),
            n_symbols_per_run: d::n_symbols_per_run(),
            n_mc_runs: d::n_mc_runs(),
            cpe_correction: false,
            master_seed: d::master_seed(),
            pn_mode: PnMode::Continuous,
            phase_noise: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepParams {
    /// Carrier to sweep; defaults to `plan.f_rf_hz`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f_rf_hz: Option<f64>,
    #[serde(default = "d::grid_points")]
    pub grid_points: usize,
    #[serde(default = "d::methods")]
    pub methods: Vec<VarianceMethod>,
}

impl Default for SweepParams {
    fn default() -> Self {
        Self {
            f_rf_hz: None,
            grid_points: d::grid_points(),
            methods: d::methods(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PsdOutputParams {
    /// First offset decade, `10^decade_min` Hz.
    #[serde(default = "d::decade_min")]
    pub decade_min: f64,
    #[serde(default = "d::decade_max")]
    pub decade_max: f64,
    #[serde(default = "d::points_per_decade")]
    pub points_per_decade: usize,
    /// Carrier to scale the reference spectrum to; defaults to `psd.f_base_hz`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub carrier_hz: Option<f64>,
    /// Stretch the offset grid by `carrier_hz / f_base_hz` so rows line up
    /// with the unscaled output.
    #[serde(default)]
    pub scale_offsets: bool,
}

impl Default for PsdOutputParams {
    fn default() -> Self {
        Self {
            decade_min: d::decade_min(),
            decade_max: d::decade_max(),
            points_per_decade: d::points_per_decade(),
            carrier_hz: None,
            scale_offsets: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareParams {
    /// Defaults to homodyne and symmetric heterodyne at `plan.f_rf_hz`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plans: Option<Vec<FrequencyPlan>>,
    #[serde(default = "d::cpe_modes")]
    pub cpe_modes: Vec<bool>,
}

impl Default for CompareParams {
    fn default() -> Self {
        Self {
            plans: None,
            cpe_modes: d::cpe_modes(),
        }
    }
}

/// Whole experiment file.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default)]
    pub psd: PsdParams,
    #[serde(default)]
    pub numerology: NumerologyParams,
    #[serde(default)]
    pub plan: PlanParams,
    #[serde(default)]
    pub experiment: ExperimentParams,
    #[serde(default)]
    pub sweep: SweepParams,
    #[serde(default)]
    pub psd_output: PsdOutputParams,
    #[serde(default)]
    pub compare: CompareParams,
}

mod d {
    use super::*;

    pub fn s0_dbchz() -> f64 {
        psd::DEFAULT_S0_DBCHZ
    }
    pub fn f_base_hz() -> f64 {
        psd::DEFAULT_BASE_CARRIER_HZ
    }
    pub fn stages() -> Vec<ZeroPoleStage> {
        vec![ZeroPoleStage {
            f_zero: psd::DEFAULT_F_ZERO_HZ,
            f_pole: psd::DEFAULT_F_POLE_HZ,
        }]
    }
    pub fn plan_kind() -> PlanKind {
        PlanKind::Homodyne
    }
    pub fn f_rf_hz() -> f64 {
        140e9
    }
    pub fn snr_grid() -> SnrGrid {
        SnrGrid::Range("0:1:30".into())
    }
    pub fn n_symbols_per_run() -> usize {
        1000
    }
    pub fn n_mc_runs() -> usize {
        200
    }
    pub fn master_seed() -> u64 {
        DEFAULT_MASTER_SEED
    }
    pub fn yes() -> bool {
        true
    }
    pub fn grid_points() -> usize {
        141
    }
    pub fn methods() -> Vec<VarianceMethod> {
        vec![VarianceMethod::AnalyticApprox, VarianceMethod::NumericalIntegral]
    }
    pub fn decade_min() -> f64 {
        2.0
    }
    pub fn decade_max() -> f64 {
        9.0
    }
    pub fn points_per_decade() -> usize {
        10
    }
    pub fn cpe_modes() -> Vec<bool> {
        vec![false, true]
    }
}

const SECTION_KEYS: &[(&str, &[&str])] = &[
    ("psd", &["s0_dbchz", "f_base_hz", "stages"]),
    ("numerology", &["n_subcarriers", "cp_len", "delta_f_hz", "pilot_fraction", "qam_order"]),
    ("plan", &["kind", "f_rf_hz", "f_if_hz", "if_psd", "rf_lo_psd"]),
    (
        "experiment",
        &["snr_grid", "n_symbols_per_run", "n_mc_runs", "cpe_correction", "master_seed", "pn_mode", "phase_noise"],
    ),
    ("sweep", &["grid_points", "methods"]),
    ("psd_output", &["decade_min", "decade_max", "points_per_decade", "carrier_hz", "scale_offsets"]),
    ("compare", &["plans", "cpe_modes"]),
];

fn resolve_key(key: &str) -> Result<(String, String)> {
    if let Some((section, field)) = key.split_once('.') {
        if SECTION_KEYS.iter().any(|(s, _)| *s == section) {
            return Ok((section.to_string(), field.to_string()));
        }
        return Err(Error::Config(format!("override '{key}': unknown section '{section}'")));
    }
    SECTION_KEYS
        .iter()
        .find(|(_, fields)| fields.contains(&key))
        .map(|(s, _)| (s.to_string(), key.to_string()))
        .ok_or_else(|| Error::Config(format!("override '{key}': unknown key")))
}

fn parse_value(raw: &str) -> toml::Value {
    toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}

/// Apply `key=value` overrides to a parsed document.
pub fn apply_overrides(table: &mut toml::Table, overrides: &[String]) -> Result<()> {
    for ov in overrides {
        let (key, raw) = ov
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("override '{ov}' is not key=value")))?;
        let (section, field) = resolve_key(key.trim())?;
        let entry = table
            .entry(section.clone())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        let sect = entry
            .as_table_mut()
            .ok_or_else(|| Error::Config(format!("'{section}' is not a table")))?;
        sect.insert(field, parse_value(raw.trim()));
    }
    Ok(())
}

impl ConfigFile {
    /// Parse a document and apply overrides. Errors carry the line and
    /// field reported by the TOML parser.
    pub fn parse(text: &str, overrides: &[String]) -> Result<Self> {
        let parsed: ConfigFile = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let mut cfg = if overrides.is_empty() {
            parsed
        } else {
            let mut table: toml::Table = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
            apply_overrides(&mut table, overrides)?;
            ConfigFile::deserialize(toml::Value::Table(table))
                .map_err(|e| Error::Config(format!("after overrides: {e}")))?
        };
        cfg.experiment.snr_grid = SnrGrid::List(cfg.experiment.snr_grid.values()?);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text, overrides).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    fn validate(&self) -> Result<()> {
        let wrap = |section: &str, e: Error| Error::Config(format!("[{section}] {e}"));
        self.psd.build().map_err(|e| wrap("psd", e))?;
        self.numerology.build().map_err(|e| wrap("numerology", e))?;
        self.plan.build().map_err(|e| wrap("plan", e))?;
        self.psds().map_err(|e| wrap("plan", e))?;
        self.experiment_config().map_err(|e| wrap("experiment", e))?.validate().map_err(|e| wrap("experiment", e))?;
        if self.sweep.grid_points < 3 {
            return Err(Error::Config("[sweep] grid_points must be >= 3".into()));
        }
        if self.sweep.methods.is_empty() {
            return Err(Error::Config("[sweep] methods must not be empty".into()));
        }
        let o = &self.psd_output;
        if !(o.decade_max > o.decade_min) || o.points_per_decade == 0 {
            return Err(Error::Config("[psd_output] need decade_max > decade_min and points_per_decade >= 1".into()));
        }
        for p in self.compare_plans() {
            p.validate().map_err(|e| wrap("compare", e))?;
        }
        if self.compare.cpe_modes.is_empty() {
            return Err(Error::Config("[compare] cpe_modes must not be empty".into()));
        }
        Ok(())
    }

    pub fn reference_psd(&self) -> Result<PhaseNoisePsd> {
        self.psd.build()
    }

    pub fn psds(&self) -> Result<OscillatorPsds> {
        let base = self.psd.build()?;
        Ok(OscillatorPsds {
            if_lo: self.plan.if_psd.as_ref().map(PsdParams::build).transpose()?.unwrap_or_else(|| base.clone()),
            rf_lo: self.plan.rf_lo_psd.as_ref().map(PsdParams::build).transpose()?.unwrap_or(base),
        })
    }

    pub fn numerology(&self) -> Result<OfdmNumerology> {
        self.numerology.build()
    }

    pub fn plan(&self) -> Result<FrequencyPlan> {
        self.plan.build()
    }

    pub fn experiment_config(&self) -> Result<ExperimentConfig> {
        let e = &self.experiment;
        Ok(ExperimentConfig {
            plan: self.plan()?,
            psds: self.psds()?,
            numerology: self.numerology()?,
            snr_grid_db: e.snr_grid.values()?,
            n_symbols_per_run: e.n_symbols_per_run,
            n_mc_runs: e.n_mc_runs,
            cpe_correction: e.cpe_correction,
            master_seed: e.master_seed,
            pn_mode: e.pn_mode,
            phase_noise: e.phase_noise,
            workers: None,
        })
    }

    pub fn compare_plans(&self) -> Vec<FrequencyPlan> {
        self.compare.plans.clone().unwrap_or_else(|| {
            let f = self.plan.f_rf_hz;
            vec![
                FrequencyPlan::Homodyne { f_rf_hz: f },
                FrequencyPlan::Heterodyne {
                    f_rf_hz: f,
                    f_if_hz: f / 2.0,
                },
            ]
        })
    }

    pub fn sweep_carrier_hz(&self) -> f64 {
        self.sweep.f_rf_hz.unwrap_or(self.plan.f_rf_hz)
    }

    /// Fully resolved document, suitable for echoing into metadata.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is serializable")
    }
}

/// Built-in presets, by name.
pub fn preset(name: &str) -> Option<&'static str> {
    match name {
        "desk" => Some(include_str!("../configs/desk.toml")),
        "full" => Some(include_str!("../configs/full.toml")),
        _ => None,
    }
}

pub const PRESET_NAMES: &[&str] = &["desk", "full"];
