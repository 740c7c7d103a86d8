//! Common phase error: pilot-based estimation, derotation and the CPE/ICI split
//! of a phase trajectory.

use num_complex::Complex64;

use super::modem::SubcarrierFrame;
use crate::error::{Error, Result};

/// Angle of `(1/N_p) Σ_{k∈P} Y_k X_k*`, in `(-π, π]`.
pub fn estimate_cpe(rx: &SubcarrierFrame, pilot_indices: &[usize], pilot_symbols: &[Complex64]) -> Result<f64> {
    if pilot_indices.is_empty() {
        return Err(Error::contract("pilot set is empty"));
    }
    if pilot_indices.len() != pilot_symbols.len() {
        return Err(Error::contract(format!(
            "{} pilot indices but {} pilot symbols",
            pilot_indices.len(),
            pilot_symbols.len()
        )));
    }
    let y = rx.values();
    let mut acc = Complex64::new(0.0, 0.0);
    for (&k, &x) in pilot_indices.iter().zip(pilot_symbols) {
        if x.norm_sqr() == 0.0 {
            return Err(Error::contract(format!("pilot symbol at subcarrier {k} is zero")));
        }
        let yk = *y
            .get(k)
            .ok_or_else(|| Error::contract(format!("pilot index {k} outside frame of {}", y.len())))?;
        acc += yk * x.conj();
    }
    let acc = acc / pilot_indices.len() as f64;
    let phi = acc.im.atan2(acc.re);
    Ok(if phi == -std::f64::consts::PI { std::f64::consts::PI } else { phi })
}

/// `Y_k · exp(-jφ̂)` on every subcarrier.
pub fn apply_cpe_correction(rx: &SubcarrierFrame, phi_hat: f64) -> SubcarrierFrame {
    let mut out = rx.clone();
    derotate_in_place(&mut out, phi_hat);
    out
}

pub(crate) fn derotate_in_place(frame: &mut SubcarrierFrame, phi_hat: f64) {
    let r = Complex64::from_polar(1.0, -phi_hat);
    frame.values_mut().iter_mut().for_each(|y| *y *= r);
}

/// CPE term and average ICI leakage of a phase trajectory over one symbol.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CpeIciDiagnostic {
    /// `(1/N) Σ exp(jφ[n])`.
    pub cpe: Complex64,
    /// `1 - |cpe|²`: interference power per subcarrier for unit-power,
    /// uncorrelated data.
    pub ici_power: f64,
}

/// Split `exp(jφ[n])`, `n = 0..N-1`, into its mean and leaked power.
pub fn decompose_cpe_ici(phase: &[f64]) -> Result<CpeIciDiagnostic> {
    if phase.is_empty() {
        return Err(Error::contract("phase trajectory is empty"));
    }
    let n = phase.len() as f64;
    // Averaging relative to the first sample keeps a constant trajectory exact.
    let reference = phase[0];
    let rel = phase.iter().map(|&p| Complex64::from_polar(1.0, p - reference)).sum::<Complex64>() / n;
    let ici_power = (1.0 - rel.norm_sqr()).max(0.0);
    Ok(CpeIciDiagnostic {
        cpe: rel * Complex64::from_polar(1.0, reference),
        ici_power,
    })
}
