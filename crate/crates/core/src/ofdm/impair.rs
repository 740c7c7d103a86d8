//! Channel impairments: oscillator phase rotation and AWGN.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::rng::SeedSpec;
use crate::synth::PhaseNoiseRealization;

/// `s[n] · exp(jφ[n])`.
pub fn apply_phase_noise(samples: &[Complex64], pn: &PhaseNoiseRealization) -> Result<Vec<Complex64>> {
    let mut out = samples.to_vec();
    rotate_in_place(&mut out, pn.samples())?;
    Ok(out)
}

pub(crate) fn rotate_in_place(samples: &mut [Complex64], phase: &[f64]) -> Result<()> {
    if samples.len() != phase.len() {
        return Err(Error::contract(format!(
            "sample/phase length mismatch: {} vs {}",
            samples.len(),
            phase.len()
        )));
    }
    for (s, &phi) in samples.iter_mut().zip(phase) {
        *s *= Complex64::from_polar(1.0, phi);
    }
    Ok(())
}

/// Add circular complex Gaussian noise at `snr_db`.
///
/// Noise variance per sample is `P / 10^(snr/10)` where `P` is the mean
/// `|s[n]|²` over `samples[cp_len..]`. The prefix samples are noised too but
/// do not enter the power measurement. `snr_db = +inf` leaves the input
/// untouched.
pub fn add_awgn(samples: &[Complex64], cp_len: usize, snr_db: f64, seed: SeedSpec) -> Result<Vec<Complex64>> {
    let mut out = samples.to_vec();
    add_awgn_in_place(&mut out, cp_len, snr_db, &mut seed.rng())?;
    Ok(out)
}

pub fn add_awgn_in_place<R: Rng + ?Sized>(
    samples: &mut [Complex64],
    cp_len: usize,
    snr_db: f64,
    rng: &mut R,
) -> Result<()> {
    if snr_db.is_nan() {
        return Err(Error::domain("SNR must not be NaN"));
    }
    if cp_len >= samples.len() {
        return Err(Error::contract(format!(
            "cp_len {cp_len} leaves no samples out of {}",
            samples.len()
        )));
    }
    if let Some(i) = samples.iter().position(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::contract(format!("non-finite sample at index {i}")));
    }
    if snr_db == f64::INFINITY {
        return Ok(());
    }
    let body = &samples[cp_len..];
    let power = body.iter().map(|z| z.norm_sqr()).sum::<f64>() / body.len() as f64;
    let sigma = (power / 10f64.powf(snr_db / 10.0) / 2.0).sqrt();
    for s in samples.iter_mut() {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        *s += Complex64::new(re, im) * sigma;
    }
    Ok(())
}
