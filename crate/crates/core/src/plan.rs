//! Homodyne and heterodyne oscillator arrangements and their phase-noise
//! budgets.
//!
//! A heterodyne plan translates to `f_rf` through an IF oscillator at `f_if`
//! and an RF LO at `f_rf - f_if`. Both oscillators are modelled as
//! independent processes whose spectra derive from a reference PSD scaled to
//! their own frequencies, so their variances add.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ofdm::OfdmNumerology;
use crate::psd::{analytic_variance, PhaseNoisePsd, VarianceMethod};
use crate::rng::SeedSpec;
use crate::synth::{sum_realizations, synthesize, PhaseNoiseRealization};

/// Oscillator arrangement producing an RF carrier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FrequencyPlan {
    Homodyne { f_rf_hz: f64 },
    Heterodyne { f_rf_hz: f64, f_if_hz: f64 },
}

impl FrequencyPlan {
    pub fn homodyne(f_rf_hz: f64) -> Result<Self> {
        let p = FrequencyPlan::Homodyne { f_rf_hz };
        p.validate()?;
        Ok(p)
    }

    pub fn heterodyne(f_rf_hz: f64, f_if_hz: f64) -> Result<Self> {
        let p = FrequencyPlan::Heterodyne { f_rf_hz, f_if_hz };
        p.validate()?;
        Ok(p)
    }

    /// Heterodyne plan with the IF at half the carrier.
    pub fn symmetric_heterodyne(f_rf_hz: f64) -> Result<Self> {
        Self::heterodyne(f_rf_hz, f_rf_hz / 2.0)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            FrequencyPlan::Homodyne { f_rf_hz } => {
                if !(f_rf_hz > 0.0 && f_rf_hz.is_finite()) {
                    return Err(Error::contract(format!("homodyne f_rf must be positive, got {f_rf_hz}")));
                }
            }
            FrequencyPlan::Heterodyne { f_rf_hz, f_if_hz } => {
                if !(f_if_hz > 0.0 && f_if_hz < f_rf_hz && f_rf_hz.is_finite()) {
                    return Err(Error::contract(format!(
                        "heterodyne plan needs 0 < f_if < f_rf, got f_if = {f_if_hz}, f_rf = {f_rf_hz}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn f_rf_hz(&self) -> f64 {
        match *self {
            FrequencyPlan::Homodyne { f_rf_hz } | FrequencyPlan::Heterodyne { f_rf_hz, .. } => f_rf_hz,
        }
    }

    pub fn f_if_hz(&self) -> Option<f64> {
        match *self {
            FrequencyPlan::Homodyne { .. } => None,
            FrequencyPlan::Heterodyne { f_if_hz, .. } => Some(f_if_hz),
        }
    }

    /// `f_rf - f_if` for heterodyne plans.
    pub fn f_rflo_hz(&self) -> Option<f64> {
        match *self {
            FrequencyPlan::Homodyne { .. } => None,
            FrequencyPlan::Heterodyne { f_rf_hz, f_if_hz } => Some(f_rf_hz - f_if_hz),
        }
    }

    pub fn is_heterodyne(&self) -> bool {
        matches!(self, FrequencyPlan::Heterodyne { .. })
    }

    /// Oscillator frequencies, IF first.
    pub fn oscillator_frequencies(&self) -> Vec<f64> {
        match *self {
            FrequencyPlan::Homodyne { f_rf_hz } => vec![f_rf_hz],
            FrequencyPlan::Heterodyne { f_rf_hz, f_if_hz } => vec![f_if_hz, f_rf_hz - f_if_hz],
        }
    }

    /// Short label used in CSV output, e.g. `homodyne_140GHz` or
    /// `heterodyne_70+70GHz`.
    pub fn label(&self) -> String {
        let ghz = |f: f64| format!("{}", f / 1e9);
        match *self {
            FrequencyPlan::Homodyne { f_rf_hz } => format!("homodyne_{}GHz", ghz(f_rf_hz)),
            FrequencyPlan::Heterodyne { f_rf_hz, f_if_hz } => {
                format!("heterodyne_{}+{}GHz", ghz(f_if_hz), ghz(f_rf_hz - f_if_hz))
            }
        }
    }
}

/// Reference spectra of the two oscillator slots. Homodyne plans use
/// `rf_lo` only.
#[derive(Debug, Clone, PartialEq)]
pub struct OscillatorPsds {
    pub if_lo: PhaseNoisePsd,
    pub rf_lo: PhaseNoisePsd,
}

impl OscillatorPsds {
    pub fn shared(psd: PhaseNoisePsd) -> Self {
        Self {
            if_lo: psd.clone(),
            rf_lo: psd,
        }
    }

    fn for_plan<'a>(&'a self, plan: &FrequencyPlan) -> Vec<(&'a PhaseNoisePsd, f64)> {
        match *plan {
            FrequencyPlan::Homodyne { f_rf_hz } => vec![(&self.rf_lo, f_rf_hz)],
            FrequencyPlan::Heterodyne { f_rf_hz, f_if_hz } => {
                vec![(&self.if_lo, f_if_hz), (&self.rf_lo, f_rf_hz - f_if_hz)]
            }
        }
    }
}

/// Variance of one oscillator built from `ref_psd` and moved to `f_c`.
pub fn oscillator_variance(
    ref_psd: &PhaseNoisePsd,
    f_c: f64,
    numerology: &OfdmNumerology,
    method: VarianceMethod,
) -> Result<f64> {
    Ok(match method {
        VarianceMethod::NumericalIntegral => {
            ref_psd
                .scale_to_carrier(f_c)?
                .integrate_variance(numerology.occupied_bandwidth_hz())?
                .value
        }
        VarianceMethod::AnalyticApprox => {
            analytic_variance(
                ref_psd.s0(),
                numerology.delta_f_hz(),
                numerology.samples_per_symbol(),
                f_c,
                ref_psd.base_carrier_hz(),
            )?
            .value
        }
    })
}

/// Total phase variance of a plan: one term for homodyne, the sum of the IF
/// and RF-LO terms for heterodyne.
pub fn plan_variance(
    plan: &FrequencyPlan,
    ref_psd: &PhaseNoisePsd,
    numerology: &OfdmNumerology,
    method: VarianceMethod,
) -> Result<f64> {
    plan_variance_with(plan, &OscillatorPsds::shared(ref_psd.clone()), numerology, method)
}

pub fn plan_variance_with(
    plan: &FrequencyPlan,
    psds: &OscillatorPsds,
    numerology: &OfdmNumerology,
    method: VarianceMethod,
) -> Result<f64> {
    plan.validate()?;
    psds.for_plan(plan)
        .into_iter()
        .map(|(psd, f)| oscillator_variance(psd, f, numerology, method))
        .sum()
}

/// Heterodyne variance as a function of IF placement.
#[derive(Debug, Clone, PartialEq)]
pub struct IfSweepResult {
    pub grid: Vec<f64>,
    pub variance: Vec<f64>,
    pub argmin_if_hz: f64,
    pub method: VarianceMethod,
}

impl IfSweepResult {
    pub fn grid_step(&self) -> f64 {
        if self.grid.len() < 2 {
            0.0
        } else {
            self.grid[1] - self.grid[0]
        }
    }
}

/// Fraction of `f_rf` kept clear of each end of the sweep.
pub const SWEEP_EDGE_FRACTION: f64 = 1e-3;

/// Uniform IF grid on `[0.001·f_rf, 0.999·f_rf]`.
pub fn if_grid(f_rf_hz: f64, grid_points: usize) -> Result<Vec<f64>> {
    if !(f_rf_hz > 0.0 && f_rf_hz.is_finite()) {
        return Err(Error::domain(format!("f_rf must be positive, got {f_rf_hz}")));
    }
    if grid_points < 3 {
        return Err(Error::domain(format!("need at least 3 grid points, got {grid_points}")));
    }
    let lo = SWEEP_EDGE_FRACTION * f_rf_hz;
    let hi = (1.0 - SWEEP_EDGE_FRACTION) * f_rf_hz;
    let step = (hi - lo) / (grid_points - 1) as f64;
    Ok((0..grid_points).map(|i| lo + step * i as f64).collect())
}

pub fn sweep_if(
    f_rf_hz: f64,
    ref_psd: &PhaseNoisePsd,
    numerology: &OfdmNumerology,
    grid_points: usize,
    method: VarianceMethod,
) -> Result<IfSweepResult> {
    sweep_if_with(f_rf_hz, &OscillatorPsds::shared(ref_psd.clone()), numerology, grid_points, method)
}

pub fn sweep_if_with(
    f_rf_hz: f64,
    psds: &OscillatorPsds,
    numerology: &OfdmNumerology,
    grid_points: usize,
    method: VarianceMethod,
) -> Result<IfSweepResult> {
    let grid = if_grid(f_rf_hz, grid_points)?;
    let variance = grid
        .par_iter()
        .map(|&f_if| {
            let plan = FrequencyPlan::heterodyne(f_rf_hz, f_if)?;
            plan_variance_with(&plan, psds, numerology, method)
        })
        .collect::<Result<Vec<f64>>>()?;
    let (imin, _) = variance
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |(bi, bv), (i, &v)| if v < bv { (i, v) } else { (bi, bv) });
    Ok(IfSweepResult {
        argmin_if_hz: grid[imin],
        grid,
        variance,
        method,
    })
}

/// `(f_if / f_rf)²`: variance of the IF oscillator relative to a homodyne LO.
pub fn variance_reduction_gamma(f_if_hz: f64, f_rf_hz: f64) -> Result<f64> {
    if !(f_if_hz > 0.0 && f_if_hz <= f_rf_hz && f_rf_hz.is_finite()) {
        return Err(Error::domain(format!(
            "need 0 < f_if <= f_rf, got f_if = {f_if_hz}, f_rf = {f_rf_hz}"
        )));
    }
    let r = f_if_hz / f_rf_hz;
    Ok(r * r)
}

const OSCILLATOR_STREAM_LABEL: u64 = 0x004f_5343;

/// Seed of oscillator slot `index` (0 = IF or homodyne LO, 1 = RF LO).
pub fn oscillator_seed(seed: SeedSpec, index: usize) -> SeedSpec {
    seed.derive(&[OSCILLATOR_STREAM_LABEL, index as u64])
}

/// Phase trajectory of the whole plan: one synthesized process per
/// oscillator, summed.
pub fn plan_phase_process(
    plan: &FrequencyPlan,
    ref_psd: &PhaseNoisePsd,
    n_samples: usize,
    sample_rate_hz: f64,
    seed: SeedSpec,
) -> Result<PhaseNoiseRealization> {
    plan_phase_process_with(plan, &OscillatorPsds::shared(ref_psd.clone()), n_samples, sample_rate_hz, seed)
}

pub fn plan_phase_process_with(
    plan: &FrequencyPlan,
    psds: &OscillatorPsds,
    n_samples: usize,
    sample_rate_hz: f64,
    seed: SeedSpec,
) -> Result<PhaseNoiseRealization> {
    plan.validate()?;
    let mut total: Option<PhaseNoiseRealization> = None;
    for (i, (psd, f)) in psds.for_plan(plan).into_iter().enumerate() {
        let r = synthesize(&psd.scale_to_carrier(f)?, n_samples, sample_rate_hz, oscillator_seed(seed, i))?;
        total = Some(match total {
            None => r,
            Some(acc) => sum_realizations(&acc, &r)?,
        });
    }
    Ok(total.expect("every plan has at least one oscillator"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use crate::synth::empirical_variance;

    fn num() -> OfdmNumerology {
        OfdmNumerology::reference()
    }

    #[test]
    fn plan_validation() {
        assert!(FrequencyPlan::homodyne(0.0).is_err());
        assert!(FrequencyPlan::heterodyne(70e9, 0.0).is_err());
        assert!(FrequencyPlan::heterodyne(70e9, 70e9).is_err());
        let p = FrequencyPlan::heterodyne(70e9, 30e9).unwrap();
        assert_eq!(p.f_rflo_hz(), Some(40e9));
        assert_eq!(p.label(), "heterodyne_30+40GHz");
        assert_eq!(FrequencyPlan::homodyne(140e9).unwrap().label(), "homodyne_140GHz");
        let bad = FrequencyPlan::Heterodyne { f_rf_hz: 1.0, f_if_hz: 2.0 };
        assert!(plan_variance(&bad, &PhaseNoisePsd::representative(), &num(), VarianceMethod::AnalyticApprox).is_err());
    }

    #[test]
    fn symmetric_split_halves_analytic_variance() {
        let psd = PhaseNoisePsd::representative();
        for f_rf in [70e9, 140e9] {
            let hom = plan_variance(&FrequencyPlan::homodyne(f_rf).unwrap(), &psd, &num(), VarianceMethod::AnalyticApprox).unwrap();
            let het = plan_variance(&FrequencyPlan::symmetric_heterodyne(f_rf).unwrap(), &psd, &num(), VarianceMethod::AnalyticApprox).unwrap();
            assert_relative_eq!(het / hom, 0.5, max_relative = 1e-14);
        }
    }

    #[test]
    fn small_if_approaches_homodyne() {
        let psd = PhaseNoisePsd::representative();
        for method in [VarianceMethod::AnalyticApprox, VarianceMethod::NumericalIntegral] {
            let hom = plan_variance(&FrequencyPlan::homodyne(70e9).unwrap(), &psd, &num(), method).unwrap();
            let het = plan_variance(&FrequencyPlan::heterodyne(70e9, 70e9 * 1e-6).unwrap(), &psd, &num(), method).unwrap();
            assert_relative_eq!(het, hom, max_relative = 1e-4);
        }
    }

    #[test]
    fn sweep_shape_analytic() {
        let psd = PhaseNoisePsd::representative();
        for f_rf in [70e9, 140e9] {
            let s = sweep_if(f_rf, &psd, &num(), 101, VarianceMethod::AnalyticApprox).unwrap();
            assert!((s.argmin_if_hz - f_rf / 2.0).abs() <= s.grid_step());
            for w in s.variance.windows(3) {
                assert!(w[0] - 2.0 * w[1] + w[2] > 0.0);
            }
            let n = s.grid.len();
            for i in 0..n {
                assert_relative_eq!(s.variance[i], s.variance[n - 1 - i], max_relative = 1e-12);
            }
            let hom = plan_variance(&FrequencyPlan::homodyne(f_rf).unwrap(), &psd, &num(), VarianceMethod::AnalyticApprox).unwrap();
            assert_relative_eq!(s.variance[0], hom, max_relative = 0.01);
            assert_relative_eq!(s.variance[n - 1], hom, max_relative = 0.01);
        }
    }

    #[test]
    fn sweep_numerical_is_u_shaped() {
        let psd = PhaseNoisePsd::representative();
        let s = sweep_if(140e9, &psd, &num(), 41, VarianceMethod::NumericalIntegral).unwrap();
        assert!((s.argmin_if_hz - 70e9).abs() <= s.grid_step());
        let hom = plan_variance(&FrequencyPlan::homodyne(140e9).unwrap(), &psd, &num(), VarianceMethod::NumericalIntegral).unwrap();
        assert_relative_eq!(s.variance[0], hom, max_relative = 0.01);
    }

    #[test]
    fn sweep_errors() {
        let psd = PhaseNoisePsd::representative();
        assert!(sweep_if(0.0, &psd, &num(), 10, VarianceMethod::AnalyticApprox).is_err());
        assert!(sweep_if(70e9, &psd, &num(), 2, VarianceMethod::AnalyticApprox).is_err());
        assert_eq!(sweep_if(70e9, &psd, &num(), 3, VarianceMethod::AnalyticApprox).unwrap().grid.len(), 3);
    }

    #[test]
    fn gamma_values() {
        assert_relative_eq!(variance_reduction_gamma(30e9, 70e9).unwrap(), 9.0 / 49.0, max_relative = 1e-15);
        assert_eq!(variance_reduction_gamma(70e9, 70e9).unwrap(), 1.0);
        assert_eq!(variance_reduction_gamma(35e9, 70e9).unwrap(), 0.25);
        assert!(variance_reduction_gamma(0.0, 70e9).is_err());
        assert!(variance_reduction_gamma(80e9, 70e9).is_err());
        let mut prev = 0.0;
        for i in 1..=100 {
            let g = variance_reduction_gamma(i as f64 * 1e9, 100e9).unwrap();
            assert!(g > prev);
            prev = g;
        }
    }

    #[test]
    fn homodyne_process_is_direct_synthesis() {
        let psd = PhaseNoisePsd::representative();
        let seed = SeedSpec::new(3, 9);
        let plan = FrequencyPlan::homodyne(140e9).unwrap();
        let a = plan_phase_process(&plan, &psd, 1024, 61.44e6, seed).unwrap();
        let b = synthesize(&psd.scale_to_carrier(140e9).unwrap(), 1024, 61.44e6, oscillator_seed(seed, 0)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn heterodyne_process_additivity() {
        let psd = PhaseNoisePsd::representative();
        let plan = FrequencyPlan::heterodyne(140e9, 50e9).unwrap();
        let (mut tot, mut parts) = (0.0, 0.0);
        for i in 0..200 {
            let seed = SeedSpec::new(17, i);
            tot += empirical_variance(&plan_phase_process(&plan, &psd, 2048, 61.44e6, seed).unwrap()).unwrap();
            for (slot, f) in [(0, 50e9), (1, 90e9)] {
                let r = synthesize(&psd.scale_to_carrier(f).unwrap(), 2048, 61.44e6, oscillator_seed(seed, slot)).unwrap();
                parts += empirical_variance(&r).unwrap();
            }
        }
        assert_relative_eq!(tot, parts, max_relative = 0.10);
    }

    #[test]
    fn heterodyne_beats_homodyne_pathwise() {
        let psd = PhaseNoisePsd::representative();
        let hom = FrequencyPlan::homodyne(140e9).unwrap();
        let het = FrequencyPlan::symmetric_heterodyne(140e9).unwrap();
        let wins = (0..200)
            .filter(|&i| {
                let seed = SeedSpec::new(23, i);
                let a = empirical_variance(&plan_phase_process(&het, &psd, 4096, 61.44e6, seed).unwrap()).unwrap();
                let b = empirical_variance(&plan_phase_process(&hom, &psd, 4096, 61.44e6, seed.derive(&[1])).unwrap()).unwrap();
                a < b
            })
            .count();
        assert!(wins >= 190, "wins = {wins}");
    }

    #[test]
    fn distinct_oscillator_psds() {
        let base = PhaseNoisePsd::representative();
        let psds = OscillatorPsds {
            if_lo: base.with_power_scaled(0.5).unwrap(),
            rf_lo: base.clone(),
        };
        let plan = FrequencyPlan::symmetric_heterodyne(70e9).unwrap();
        let v = plan_variance_with(&plan, &psds, &num(), VarianceMethod::AnalyticApprox).unwrap();
        let shared = plan_variance(&plan, &base, &num(), VarianceMethod::AnalyticApprox).unwrap();
        assert_relative_eq!(v, 0.75 * shared, max_relative = 1e-14);
    }
}
