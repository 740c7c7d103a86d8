//! Phase-noise impact on OFDM links for homodyne and heterodyne transceivers.
//!
//! * [`psd`]: zero-pole phase-noise spectra, carrier scaling and integrated variance.
//! * [`synth`]: seeded phase-noise realizations shaped to a target spectrum.
//! * [`plan`]: homodyne/heterodyne frequency plans, IF sweeps, reduction factor.
//! * [`ofdm`]: QAM/OFDM symbol chain with phase noise, AWGN and pilot CPE correction.
//! * [`montecarlo`]: SNR sweeps, Monte-Carlo aggregation and architecture comparison.
//! * [`config`] and [`output`]: experiment files and CSV/plot emission.
//! * [`cli`]: the `pnlink` command line.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod error;
pub mod montecarlo;
pub mod ofdm;
pub mod output;
pub mod plan;
pub mod psd;
pub mod rng;
pub mod synth;

pub use error::{Error, Result};
pub use montecarlo::{compare_architectures, run_experiment, ExperimentConfig, MetricSeries, PnMode};
pub use ofdm::{OfdmNumerology, QamConstellation, SubcarrierFrame};
pub use plan::{
    plan_phase_process, plan_variance, sweep_if, variance_reduction_gamma, FrequencyPlan, IfSweepResult,
    OscillatorPsds,
};
pub use psd::{analytic_variance, PhaseNoisePsd, VarianceEstimate, VarianceMethod, ZeroPoleStage};
pub use rng::SeedSpec;
pub use synth::{empirical_variance, sum_realizations, synthesize, PhaseNoiseRealization};
