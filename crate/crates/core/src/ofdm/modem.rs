//! Unitary OFDM modulation with cyclic prefix.

use std::io::Write;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::numerology::OfdmNumerology;
use crate::error::{Error, Result};

/// Values on the `N` subcarriers of one OFDM symbol, indexed by DFT bin.
#[derive(Debug, Clone, PartialEq)]
pub struct SubcarrierFrame(Vec<Complex64>);

impl SubcarrierFrame {
    pub fn new(values: Vec<Complex64>) -> Self {
        Self(values)
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![Complex64::new(0.0, 0.0); n])
    }

    pub fn values(&self) -> &[Complex64] {
        &self.0
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.0
    }

    /// Debug dump: `k,re,im` per subcarrier.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "k,re,im")?;
        for (k, y) in self.0.iter().enumerate() {
            writeln!(w, "{k},{},{}", y.re, y.im)?;
        }
        Ok(())
    }
}

/// Holds DFT plans for one numerology. Not shared between threads; build one
/// per worker.
pub struct OfdmModem {
    n: usize,
    cp_len: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    scratch: Vec<Complex64>,
}

impl std::fmt::Debug for OfdmModem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OfdmModem")
            .field("n", &self.n)
            .field("cp_len", &self.cp_len)
            .finish()
    }
}

impl OfdmModem {
    pub fn new(numerology: &OfdmNumerology) -> Self {
        let n = numerology.n_subcarriers();
        let mut planner = FftPlanner::<f64>::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let scratch_len = forward
            .get_inplace_scratch_len()
            .max(inverse.get_inplace_scratch_len());
        Self {
            n,
            cp_len: numerology.cp_len(),
            forward,
            inverse,
            scratch: vec![Complex64::new(0.0, 0.0); scratch_len],
        }
    }

    /// Inverse DFT scaled by `1/sqrt(N)` with the last `cp_len` samples prepended.
    pub fn modulate(&mut self, frame: &SubcarrierFrame) -> Result<Vec<Complex64>> {
        if frame.len() != self.n {
            return Err(Error::contract(format!("frame length {} != N = {}", frame.len(), self.n)));
        }
        let mut body = frame.values().to_vec();
        self.inverse.process_with_scratch(&mut body, &mut self.scratch);
        let norm = (self.n as f64).sqrt().recip();
        let mut out = Vec::with_capacity(self.n + self.cp_len);
        out.extend(body[self.n - self.cp_len..].iter().map(|z| z * norm));
        out.extend(body.iter().map(|z| z * norm));
        Ok(out)
    }

    /// Drop the cyclic prefix and apply the forward DFT scaled by `1/sqrt(N)`.
    pub fn demodulate(&mut self, samples: &[Complex64]) -> Result<SubcarrierFrame> {
        if samples.len() != self.n + self.cp_len {
            return Err(Error::contract(format!(
                "symbol length {} != N + CP = {}",
                samples.len(),
                self.n + self.cp_len
            )));
        }
        let mut body = samples[self.cp_len..].to_vec();
        self.forward.process_with_scratch(&mut body, &mut self.scratch);
        let norm = (self.n as f64).sqrt().recip();
        body.iter_mut().for_each(|z| *z *= norm);
        Ok(SubcarrierFrame(body))
    }
}

pub fn ofdm_modulate(frame: &SubcarrierFrame, numerology: &OfdmNumerology) -> Result<Vec<Complex64>> {
    OfdmModem::new(numerology).modulate(frame)
}

pub fn ofdm_demodulate(samples: &[Complex64], numerology: &OfdmNumerology) -> Result<SubcarrierFrame> {
    OfdmModem::new(numerology).demodulate(samples)
}
