use num_complex::Complex64;

use crate::error::{Error, Result};

/// RMS error vector magnitude in percent: `100·sqrt(Σ|rx-ref|² / Σ|ref|²)`.
pub fn compute_evm(rx: &[Complex64], reference: &[Complex64]) -> Result<f64> {
    let (err, power) = evm_sums(rx, reference)?;
    if power == 0.0 {
        return Err(Error::contract("reference power is zero"));
    }
    Ok(100.0 * (err / power).sqrt())
}

/// `(Σ|rx-ref|², Σ|ref|²)` for accumulation across symbols.
pub fn evm_sums(rx: &[Complex64], reference: &[Complex64]) -> Result<(f64, f64)> {
    if rx.len() != reference.len() {
        return Err(Error::contract(format!(
            "EVM length mismatch: {} vs {}",
            rx.len(),
            reference.len()
        )));
    }
    Ok(rx
        .iter()
        .zip(reference)
        .fold((0.0, 0.0), |(e, p), (y, x)| (e + (y - x).norm_sqr(), p + x.norm_sqr())))
}

/// Number of positions where the two bit streams differ.
pub fn bit_errors(tx: &[u8], rx: &[u8]) -> Result<u64> {
    if tx.len() != rx.len() {
        return Err(Error::contract(format!("BER length mismatch: {} vs {}", tx.len(), rx.len())));
    }
    Ok(tx.iter().zip(rx).filter(|(a, b)| (*a & 1) != (*b & 1)).count() as u64)
}

/// Hamming distance divided by length.
pub fn compute_ber(tx: &[u8], rx: &[u8]) -> Result<f64> {
    if tx.is_empty() {
        return Err(Error::contract("BER of empty streams is undefined"));
    }
    Ok(bit_errors(tx, rx)? as f64 / tx.len() as f64)
}
