//! SNR sweeps with Monte-Carlo repetitions.
//!
//! Every random draw is keyed by the master seed and a stream id that depends
//! only on *what* is drawn (phase noise of run `r`, data bits of run `r`,
//! AWGN of run `r` at SNR index `i`), never on the plan or the CPE mode. Two
//! experiments that differ only in plan or CPE setting therefore see the same
//! data and the same noise draws, and oscillator slot 0 of every plan shares
//! its Gaussian draws. Cells are evaluated in parallel and reduced in grid
//! order, so results do not depend on the worker count.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ofdm::{LinkChain, OfdmNumerology, SubcarrierFrame, SymbolOutcome};
use crate::plan::{plan_phase_process_with, FrequencyPlan, OscillatorPsds};
use crate::psd::PhaseNoisePsd;
use crate::rng::{mix_stream, SeedSpec, RNG_ALGORITHM};
use crate::synth::PhaseNoiseRealization;

const STREAM_PHASE: u64 = 1;
const STREAM_DATA: u64 = 2;
const STREAM_NOISE: u64 = 3;

/// z-value of the two-sided 95 % normal interval.
pub const Z_95: f64 = 1.96;

/// How phase noise is drawn across the symbols of one run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PnMode {
    /// One realization spanning every symbol of the run, sliced per symbol.
    #[default]
    Continuous,
    /// A fresh realization for each symbol.
    PerSymbol,
}

impl PnMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            PnMode::Continuous => "continuous",
            PnMode::PerSymbol => "per_symbol",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub plan: FrequencyPlan,
    pub psds: OscillatorPsds,
    pub numerology: OfdmNumerology,
    pub snr_grid_db: Vec<f64>,
    pub n_symbols_per_run: usize,
    pub n_mc_runs: usize,
    pub cpe_correction: bool,
    pub master_seed: u64,
    pub pn_mode: PnMode,
    /// `false` runs the AWGN-only baseline.
    pub phase_noise: bool,
    /// Worker cap; `None` uses the global rayon pool.
    pub workers: Option<usize>,
}

/// Inclusive `start:step:stop` grid.
pub fn snr_range(start: f64, step: f64, stop: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !start.is_finite() || !stop.is_finite() || stop < start {
        return Err(Error::domain(format!("invalid SNR range {start}:{step}:{stop}")));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize + 1;
    Ok((0..n).map(|i| start + step * i as f64).collect())
}

impl ExperimentConfig {
    /// Full-scale setup: 0:1:30 dB, 1000 symbols per run, 200 runs.
    pub fn full_scale(plan: FrequencyPlan) -> Self {
        Self {
            plan,
            psds: OscillatorPsds::shared(PhaseNoisePsd::representative()),
            numerology: OfdmNumerology::reference(),
            snr_grid_db: snr_range(0.0, 1.0, 30.0).expect("static grid"),
            n_symbols_per_run: 1000,
            n_mc_runs: 200,
            cpe_correction: false,
            master_seed: DEFAULT_MASTER_SEED,
            pn_mode: PnMode::Continuous,
            phase_noise: true,
            workers: None,
        }
    }

    /// CI-sized setup: 1:4:29 dB, 100 symbols per run, 20 runs.
    pub fn desk(plan: FrequencyPlan) -> Self {
        Self {
            snr_grid_db: snr_range(1.0, 4.0, 29.0).expect("static grid"),
            n_symbols_per_run: 100,
            n_mc_runs: 20,
            ..Self::full_scale(plan)
        }
    }

    pub fn with_cpe(mut self, on: bool) -> Self {
        self.cpe_correction = on;
        self
    }

    pub fn with_plan(mut self, plan: FrequencyPlan) -> Self {
        self.plan = plan;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.plan.validate()?;
        if self.snr_grid_db.is_empty() {
            return Err(Error::contract("SNR grid is empty"));
        }
        if self.snr_grid_db.iter().any(|s| s.is_nan() || *s == f64::NEG_INFINITY) {
            return Err(Error::contract("SNR grid contains NaN or -inf"));
        }
        if self.n_symbols_per_run == 0 || self.n_mc_runs == 0 {
            return Err(Error::contract("need at least one symbol and one run"));
        }
        if self.cpe_correction && self.numerology.pilot_indices().is_empty() {
            return Err(Error::contract("CPE correction requires a non-zero pilot fraction"));
        }
        if self.workers == Some(0) {
            return Err(Error::contract("worker count must be >= 1"));
        }
        Ok(())
    }

    fn seed(&self, labels: &[u64]) -> SeedSpec {
        SeedSpec::new(self.master_seed, mix_stream(labels))
    }

    /// Phase trajectory of run `run` covering all its symbols (continuous
    /// mode) or the first symbol (per-symbol mode).
    pub fn phase_process(&self, run: usize) -> Result<PhaseNoiseRealization> {
        let len = self.numerology.samples_per_symbol();
        match self.pn_mode {
            PnMode::Continuous => self.synth_phase(len * self.n_symbols_per_run, &[STREAM_PHASE, run as u64]),
            PnMode::PerSymbol => self.synth_phase(len, &[STREAM_PHASE, run as u64, 0]),
        }
    }

    fn synth_phase(&self, len: usize, labels: &[u64]) -> Result<PhaseNoiseRealization> {
        plan_phase_process_with(
            &self.plan,
            &self.psds,
            len,
            self.numerology.sample_rate_hz(),
            self.seed(labels),
        )
    }
}

pub const DEFAULT_MASTER_SEED: u64 = 20_240_601;

/// Conventions recorded alongside every result.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunMetadata {
    pub rng_algorithm: String,
    pub master_seed: u64,
    pub pn_mode: PnMode,
    pub phase_noise: bool,
    pub snr_definition: String,
    pub pilot_pattern_seed: u64,
    pub channel: String,
    pub metric_scope: String,
}

impl RunMetadata {
    fn from_config(c: &ExperimentConfig) -> Self {
        Self {
            rng_algorithm: RNG_ALGORITHM.to_string(),
            master_seed: c.master_seed,
            pn_mode: c.pn_mode,
            phase_noise: c.phase_noise,
            snr_definition: "Es/N0 per time-domain sample, signal power measured over the CP-stripped symbol".into(),
            pilot_pattern_seed: crate::ofdm::PILOT_PATTERN_SEED,
            channel: "identity (H_k = 1), AWGN".into(),
            metric_scope: "BER and EVM over data subcarriers only".into(),
        }
    }
}

/// Aggregated BER/EVM per SNR point.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricSeries {
    pub plan: FrequencyPlan,
    pub cpe_correction: bool,
    pub snr_db: Vec<f64>,
    pub ber_mean: Vec<f64>,
    pub evm_rms_percent: Vec<f64>,
    pub ber_ci_halfwidth: Vec<f64>,
    pub bits: Vec<u64>,
    pub runs: usize,
    /// Per-cell tallies indexed `[snr_index][run]`.
    pub cells: Vec<Vec<SymbolOutcome>>,
    pub metadata: RunMetadata,
}

impl MetricSeries {
    pub fn label(&self) -> String {
        self.plan.label()
    }

    pub fn snr_index(&self, snr_db: f64) -> Option<usize> {
        self.snr_db.iter().position(|&s| (s - snr_db).abs() < 1e-9)
    }

    /// Per-run EVM in percent at SNR index `i`.
    pub fn cell_evm(&self, i: usize) -> Vec<f64> {
        self.cells[i].iter().map(SymbolOutcome::evm_percent).collect()
    }
}

fn random_bits<R: Rng + ?Sized>(rng: &mut R, out: &mut [u8]) {
    let mut word = 0u64;
    for (i, b) in out.iter_mut().enumerate() {
        if i % 64 == 0 {
            word = rng.next_u64();
        }
        *b = (word & 1) as u8;
        word >>= 1;
    }
}

fn run_cells(config: &ExperimentConfig, run: usize) -> Result<Vec<SymbolOutcome>> {
    let num = &config.numerology;
    let sym_len = num.samples_per_symbol();
    let phase = if !config.phase_noise {
        None
    } else {
        match config.pn_mode {
            PnMode::Continuous => Some(config.phase_process(run)?.into_samples()),
            PnMode::PerSymbol => {
                let mut all = Vec::with_capacity(sym_len * config.n_symbols_per_run);
                for s in 0..config.n_symbols_per_run {
                    all.extend_from_slice(config.synth_phase(sym_len, &[STREAM_PHASE, run as u64, s as u64])?.samples());
                }
                Some(all)
            }
        }
    };

    let mut chain = LinkChain::new(num)?;
    let mut bits = vec![0u8; num.data_bits_per_symbol()];
    config
        .snr_grid_db
        .iter()
        .enumerate()
        .map(|(si, &snr)| {
            let mut data_rng = config.seed(&[STREAM_DATA, run as u64]).rng();
            let mut noise_rng = config.seed(&[STREAM_NOISE, run as u64, si as u64]).rng();
            let mut cell = SymbolOutcome::default();
            for s in 0..config.n_symbols_per_run {
                random_bits(&mut data_rng, &mut bits);
                let phi = phase.as_ref().map(|p| &p[s * sym_len..(s + 1) * sym_len]);
                let out = chain.run_symbol(&bits, phi, snr, &mut noise_rng, config.cpe_correction)?;
                cell.accumulate(&out);
            }
            if !(cell.error_energy.is_finite() && cell.reference_energy.is_finite()) {
                return Err(Error::NonFiniteMetric {
                    run,
                    snr_db: snr,
                    what: "EVM",
                });
            }
            Ok(cell)
        })
        .collect()
}

fn in_pool<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match workers {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::contract(format!("cannot build worker pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// Run every (run, SNR) cell of one configuration and aggregate.
pub fn run_experiment(config: &ExperimentConfig) -> Result<MetricSeries> {
    config.validate()?;
    let per_run: Vec<Vec<SymbolOutcome>> = in_pool(config.workers, || {
        (0..config.n_mc_runs)
            .into_par_iter()
            .map(|run| run_cells(config, run))
            .collect::<Result<Vec<_>>>()
    })??;

    let n_snr = config.snr_grid_db.len();
    let mut cells = vec![Vec::with_capacity(config.n_mc_runs); n_snr];
    for run in per_run {
        for (si, c) in run.into_iter().enumerate() {
            cells[si].push(c);
        }
    }
    let mut ber_mean = Vec::with_capacity(n_snr);
    let mut evm = Vec::with_capacity(n_snr);
    let mut ci = Vec::with_capacity(n_snr);
    let mut bits = Vec::with_capacity(n_snr);
    for (si, row) in cells.iter().enumerate() {
        let mut total = SymbolOutcome::default();
        row.iter().for_each(|c| total.accumulate(c));
        let p = total.ber();
        let e = total.evm_percent();
        if !(p.is_finite() && e.is_finite()) {
            return Err(Error::NonFiniteMetric {
                run: 0,
                snr_db: config.snr_grid_db[si],
                what: "aggregate",
            });
        }
        ber_mean.push(p);
        evm.push(e);
        ci.push(Z_95 * (p * (1.0 - p) / total.bits as f64).sqrt());
        bits.push(total.bits);
    }
    Ok(MetricSeries {
        plan: config.plan,
        cpe_correction: config.cpe_correction,
        snr_db: config.snr_grid_db.clone(),
        ber_mean,
        evm_rms_percent: evm,
        ber_ci_halfwidth: ci,
        bits,
        runs: config.n_mc_runs,
        cells,
        metadata: RunMetadata::from_config(config),
    })
}

/// Every plan × CPE mode, plans outermost, all on paired draws.
pub fn compare_architectures(
    base: &ExperimentConfig,
    plans: &[FrequencyPlan],
    cpe_modes: &[bool],
) -> Result<Vec<MetricSeries>> {
    if plans.is_empty() || cpe_modes.is_empty() {
        return Err(Error::contract("plans and CPE modes must be non-empty"));
    }
    let mut out = Vec::with_capacity(plans.len() * cpe_modes.len());
    for plan in plans {
        for &cpe in cpe_modes {
            out.push(run_experiment(&base.clone().with_plan(*plan).with_cpe(cpe))?);
        }
    }
    Ok(out)
}

/// Received subcarriers of the first symbol of run 0 at SNR index `snr_index`.
pub fn constellation_snapshot(config: &ExperimentConfig, snr_index: usize) -> Result<SubcarrierFrame> {
    config.validate()?;
    let snr = *config
        .snr_grid_db
        .get(snr_index)
        .ok_or_else(|| Error::contract(format!("SNR index {snr_index} out of range")))?;
    let num = &config.numerology;
    let phase = if config.phase_noise {
        Some(config.phase_process(0)?.into_samples())
    } else {
        None
    };
    let mut chain = LinkChain::new(num)?;
    let mut bits = vec![0u8; num.data_bits_per_symbol()];
    random_bits(&mut config.seed(&[STREAM_DATA, 0]).rng(), &mut bits);
    let mut noise_rng = config.seed(&[STREAM_NOISE, 0, snr_index as u64]).rng();
    let phi = phase.as_ref().map(|p| &p[..num.samples_per_symbol()]);
    chain.run_symbol(&bits, phi, snr, &mut noise_rng, config.cpe_correction)?;
    Ok(chain.last_received().cloned().expect("symbol was processed"))
}
