//! Phase-noise realizations with a prescribed zero-pole spectrum.
//!
//! Synthesis shapes a complex circular Gaussian spectrum on the DFT grid and
//! inverse-transforms it. For `k = 1 .. n/2` the bin amplitude is
//! `sqrt(S(k·fs/n) · fs / (2n))`, the negative-frequency bin carries the
//! conjugate, the DC bin is zero and the Nyquist bin (even `n`) is real. The
//! variance of the output is therefore the Riemann sum of the one-sided PSD
//! over `(0, fs/2]` on the `fs/n` grid. Offsets below `fs/n` are not
//! represented.

use std::io::Write;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::psd::PhaseNoisePsd;
pub use crate::rng::SeedSpec;

/// Discrete-time phase trajectory in radians.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseNoiseRealization {
    samples: Vec<f64>,
    sample_rate_hz: f64,
}

impl PhaseNoiseRealization {
    pub fn new(samples: Vec<f64>, sample_rate_hz: f64) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::contract("realization must not be empty"));
        }
        if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::contract(format!("non-finite phase sample at index {i}")));
        }
        if !(sample_rate_hz > 0.0 && sample_rate_hz.is_finite()) {
            return Err(Error::domain(format!("sample rate must be positive, got {sample_rate_hz}")));
        }
        Ok(Self {
            samples,
            sample_rate_hz,
        })
    }

    /// All-zero trajectory.
    pub fn zeros(len: usize, sample_rate_hz: f64) -> Result<Self> {
        Self::new(vec![0.0; len], sample_rate_hz)
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    /// Sub-trajectory `[start, start + len)`.
    pub fn slice(&self, start: usize, len: usize) -> Result<Self> {
        let end = start
            .checked_add(len)
            .filter(|&e| e <= self.samples.len())
            .ok_or_else(|| Error::contract(format!("slice {start}+{len} exceeds length {}", self.samples.len())))?;
        Self::new(self.samples[start..end].to_vec(), self.sample_rate_hz)
    }

    /// Population variance about the sample mean.
    pub fn empirical_variance(&self) -> Result<f64> {
        empirical_variance(self)
    }

    /// Write `sample_index,phase_rad` rows.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "sample_index,phase_rad")?;
        for (i, v) in self.samples.iter().enumerate() {
            writeln!(w, "{i},{v}")?;
        }
        Ok(())
    }
}

/// Draw one realization of length `n_samples` at `sample_rate_hz`.
pub fn synthesize(
    psd: &PhaseNoisePsd,
    n_samples: usize,
    sample_rate_hz: f64,
    seed: SeedSpec,
) -> Result<PhaseNoiseRealization> {
    if n_samples < 2 {
        return Err(Error::domain(format!("n_samples must be >= 2, got {n_samples}")));
    }
    if !(sample_rate_hz > 0.0 && sample_rate_hz.is_finite()) {
        return Err(Error::domain(format!("sample rate must be positive, got {sample_rate_hz}")));
    }
    let n = n_samples;
    let df = sample_rate_hz / n as f64;
    let bin_power_scale = sample_rate_hz / (2.0 * n as f64);
    let mut rng = seed.rng();
    let mut spec = vec![Complex64::new(0.0, 0.0); n];

    let half = n / 2;
    for k in 1..=half {
        let s = psd.eval_unchecked(k as f64 * df);
        if !s.is_finite() {
            return Err(Error::NonFinitePsd {
                offset_hz: k as f64 * df,
                value: s,
            });
        }
        let amp = (s * bin_power_scale).sqrt();
        if 2 * k == n {
            let g: f64 = rng.sample(StandardNormal);
            spec[k] = Complex64::new(amp * g, 0.0);
        } else {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            let z = Complex64::new(re, im) * (amp * std::f64::consts::FRAC_1_SQRT_2);
            spec[k] = z;
            spec[n - k] = z.conj();
        }
    }

    FftPlanner::<f64>::new().plan_fft_inverse(n).process(&mut spec);
    let samples = spec.into_iter().map(|z| z.re).collect();
    PhaseNoiseRealization::new(samples, sample_rate_hz)
}

/// Population variance of a realization.
pub fn empirical_variance(r: &PhaseNoiseRealization) -> Result<f64> {
    let s = r.samples();
    if s.len() < 2 {
        return Err(Error::contract("variance needs at least two samples"));
    }
    let n = s.len() as f64;
    let mean = s.iter().sum::<f64>() / n;
    Ok(s.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n)
}

/// Element-wise sum of two independent phase processes.
pub fn sum_realizations(
    a: &PhaseNoiseRealization,
    b: &PhaseNoiseRealization,
) -> Result<PhaseNoiseRealization> {
    if a.len() != b.len() {
        return Err(Error::contract(format!("length mismatch: {} vs {}", a.len(), b.len())));
    }
    if a.sample_rate_hz != b.sample_rate_hz {
        return Err(Error::contract(format!(
            "sample rate mismatch: {} vs {}",
            a.sample_rate_hz, b.sample_rate_hz
        )));
    }
    let samples = a.samples.iter().zip(&b.samples).map(|(x, y)| x + y).collect();
    PhaseNoiseRealization::new(samples, a.sample_rate_hz)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::psd::ZeroPoleStage;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn flat(s0: f64) -> PhaseNoisePsd {
        PhaseNoisePsd::new(s0, 15e9, vec![]).unwrap()
    }

    #[test]
    fn vanishing_psd_gives_vanishing_phase() {
        let r = synthesize(&flat(1e-30), 4096, 61.44e6, SeedSpec::new(1, 0)).unwrap();
        assert!(r.empirical_variance().unwrap() < 1e-20);
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let psd = PhaseNoisePsd::representative();
        let a = synthesize(&psd, 1000, 61.44e6, SeedSpec::new(9, 2)).unwrap();
        let b = synthesize(&psd, 1000, 61.44e6, SeedSpec::new(9, 2)).unwrap();
        assert_eq!(a, b);
        let c = synthesize(&psd, 1000, 61.44e6, SeedSpec::new(9, 3)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn rejects_short_or_bad_rate() {
        let psd = flat(1e-9);
        assert!(synthesize(&psd, 1, 1e6, SeedSpec::new(0, 0)).is_err());
        assert!(synthesize(&psd, 16, 0.0, SeedSpec::new(0, 0)).is_err());
    }

    #[test]
    fn flat_white_variance() {
        let (s0, fs) = (1e-9, 1e6);
        let psd = flat(s0);
        let mean: f64 = (0..200)
            .map(|i| synthesize(&psd, 4096, fs, SeedSpec::new(11, i)).unwrap().empirical_variance().unwrap())
            .sum::<f64>()
            / 200.0;
        assert_relative_eq!(mean, s0 * fs / 2.0, max_relative = 0.05);
    }

    #[test]
    fn odd_length_is_real_and_finite() {
        let r = synthesize(&flat(1e-9), 1001, 1e6, SeedSpec::new(0, 0)).unwrap();
        assert_eq!(r.len(), 1001);
        assert!(r.samples().iter().all(|v| v.is_finite()));
    }

    #[test]
    fn variance_examples() {
        let z = PhaseNoiseRealization::zeros(8, 1.0).unwrap();
        assert_eq!(empirical_variance(&z).unwrap(), 0.0);
        let c = PhaseNoiseRealization::new(vec![0.7; 8], 1.0).unwrap();
        assert!(empirical_variance(&c).unwrap().abs() < 1e-30);
        let alt = PhaseNoiseRealization::new((0..10).map(|i| if i % 2 == 0 { 0.3 } else { -0.3 }).collect(), 1.0).unwrap();
        assert_relative_eq!(empirical_variance(&alt).unwrap(), 0.09, max_relative = 1e-14);
    }

    #[test]
    fn sum_examples() {
        let psd = PhaseNoisePsd::representative();
        let a = synthesize(&psd, 512, 61.44e6, SeedSpec::new(1, 1)).unwrap();
        let z = PhaseNoiseRealization::zeros(512, 61.44e6).unwrap();
        assert_eq!(sum_realizations(&a, &z).unwrap(), a);
        let aa = sum_realizations(&a, &a).unwrap();
        for (x, y) in aa.samples().iter().zip(a.samples()) {
            assert_eq!(*x, 2.0 * y);
        }
        let short = PhaseNoiseRealization::zeros(10, 61.44e6).unwrap();
        assert!(sum_realizations(&a, &short).is_err());
        let other_rate = PhaseNoiseRealization::zeros(512, 1.0).unwrap();
        assert!(sum_realizations(&a, &other_rate).is_err());
    }

    #[test]
    fn independent_variances_add() {
        let psd = PhaseNoisePsd::new(1e-9, 15e9, vec![ZeroPoleStage::new(1e8, 1e5).unwrap()]).unwrap();
        let (mut va, mut vb, mut vs) = (0.0, 0.0, 0.0);
        for i in 0..200 {
            let a = synthesize(&psd, 4096, 61.44e6, SeedSpec::new(5, 2 * i)).unwrap();
            let b = synthesize(&psd, 4096, 61.44e6, SeedSpec::new(5, 2 * i + 1)).unwrap();
            va += a.empirical_variance().unwrap();
            vb += b.empirical_variance().unwrap();
            vs += sum_realizations(&a, &b).unwrap().empirical_variance().unwrap();
        }
        assert_relative_eq!(vs, va + vb, max_relative = 0.10);
    }

    #[test]
    fn slice_bounds() {
        let r = PhaseNoiseRealization::new((0..10).map(f64::from).collect(), 1.0).unwrap();
        assert_eq!(r.slice(2, 3).unwrap().samples(), &[2.0, 3.0, 4.0]);
        assert!(r.slice(8, 3).is_err());
    }

    #[test]
    fn csv_dump_format() {
        let r = PhaseNoiseRealization::new(vec![0.5, -0.25], 1.0).unwrap();
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "sample_index,phase_rad\n0,0.5\n1,-0.25\n");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn power_scaling_scales_amplitude(alpha_db in -40.0f64..40.0, seed in any::<u64>(), n in 2usize..600) {
            let alpha = 10f64.powf(alpha_db / 10.0);
            let psd = PhaseNoisePsd::representative();
            let scaled = psd.with_power_scaled(alpha).unwrap();
            let a = synthesize(&psd, n, 61.44e6, SeedSpec::new(seed, 0)).unwrap();
            let b = synthesize(&scaled, n, 61.44e6, SeedSpec::new(seed, 0)).unwrap();
            let peak = a.samples().iter().fold(0.0f64, |m, v| m.max(v.abs()));
            for (x, y) in a.samples().iter().zip(b.samples()) {
                prop_assert!((y - alpha.sqrt() * x).abs() <= 1e-12 * alpha.sqrt() * peak.max(1e-300));
            }
        }
    }
}
