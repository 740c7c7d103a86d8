//! OFDM symbol chain: QAM mapping, unitary (I)DFT with cyclic prefix, phase
//! noise and AWGN, pilot-aided CPE correction, and BER/EVM bookkeeping.
//!
//! The channel is identity (`H_k = 1`). BER and EVM are measured on data
//! subcarriers only.

pub mod cpe;
pub mod impair;
pub mod metrics;
pub mod modem;
pub mod numerology;
pub mod qam;

use num_complex::Complex64;
use rand::Rng;

pub use cpe::{apply_cpe_correction, decompose_cpe_ici, estimate_cpe, CpeIciDiagnostic};
pub use impair::{add_awgn, apply_phase_noise};
pub use metrics::{compute_ber, compute_evm};
pub use modem::{ofdm_demodulate, ofdm_modulate, OfdmModem, SubcarrierFrame};
pub use numerology::{NumerologyParams, OfdmNumerology};
pub use qam::{qam_demap, qam_map, QamConstellation};

use crate::error::{Error, Result};
use crate::rng::SeedSpec;

/// Master seed of the fixed pilot pattern.
pub const PILOT_PATTERN_SEED: u64 = 0x5049_4c4f_5453_0001;

/// Known pilot symbols: unit-magnitude QPSK points from a fixed seeded
/// pattern, one per pilot index.
pub fn pilot_symbols(numerology: &OfdmNumerology) -> Vec<Complex64> {
    let mut rng = SeedSpec::new(PILOT_PATTERN_SEED, numerology.n_subcarriers() as u64).rng();
    let r = std::f64::consts::FRAC_1_SQRT_2;
    numerology
        .pilot_indices()
        .iter()
        .map(|_| {
            let q: u8 = rng.random_range(0..4);
            Complex64::new(if q & 2 == 0 { r } else { -r }, if q & 1 == 0 { r } else { -r })
        })
        .collect()
}

/// Error tallies of one or more symbols.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SymbolOutcome {
    pub bit_errors: u64,
    pub bits: u64,
    /// `Σ|rx - ref|²` over data subcarriers.
    pub error_energy: f64,
    /// `Σ|ref|²` over data subcarriers.
    pub reference_energy: f64,
}

impl SymbolOutcome {
    pub fn accumulate(&mut self, other: &SymbolOutcome) {
        self.bit_errors += other.bit_errors;
        self.bits += other.bits;
        self.error_energy += other.error_energy;
        self.reference_energy += other.reference_energy;
    }

    pub fn ber(&self) -> f64 {
        if self.bits == 0 {
            0.0
        } else {
            self.bit_errors as f64 / self.bits as f64
        }
    }

    pub fn evm_percent(&self) -> f64 {
        if self.reference_energy == 0.0 {
            0.0
        } else {
            100.0 * (self.error_energy / self.reference_energy).sqrt()
        }
    }
}

/// One transceiver instance: transmitter, impairments and receiver for a
/// fixed numerology. Single-threaded; create one per worker.
#[derive(Debug)]
pub struct LinkChain {
    numerology: OfdmNumerology,
    constellation: QamConstellation,
    modem: OfdmModem,
    pilots: Vec<Complex64>,
    rx_bits: Vec<u8>,
    last_rx: Option<SubcarrierFrame>,
}

impl LinkChain {
    pub fn new(numerology: &OfdmNumerology) -> Result<Self> {
        Ok(Self {
            constellation: QamConstellation::new(numerology.qam_order())?,
            modem: OfdmModem::new(numerology),
            pilots: pilot_symbols(numerology),
            numerology: numerology.clone(),
            rx_bits: Vec::new(),
            last_rx: None,
        })
    }

    pub fn numerology(&self) -> &OfdmNumerology {
        &self.numerology
    }

    pub fn constellation(&self) -> &QamConstellation {
        &self.constellation
    }

    pub fn pilots(&self) -> &[Complex64] {
        &self.pilots
    }

    /// Equalized subcarriers of the last symbol passed through [`Self::run_symbol`].
    pub fn last_received(&self) -> Option<&SubcarrierFrame> {
        self.last_rx.as_ref()
    }

    /// Place data symbols and pilots on the subcarrier grid.
    pub fn build_frame(&self, bits: &[u8]) -> Result<SubcarrierFrame> {
        if bits.len() != self.numerology.data_bits_per_symbol() {
            return Err(Error::contract(format!(
                "expected {} bits per symbol, got {}",
                self.numerology.data_bits_per_symbol(),
                bits.len()
            )));
        }
        let data = self.constellation.map(bits)?;
        let mut frame = SubcarrierFrame::zeros(self.numerology.n_subcarriers());
        let v = frame.values_mut();
        for (&k, &x) in self.numerology.pilot_indices().iter().zip(&self.pilots) {
            v[k] = x;
        }
        for (&k, &x) in self.numerology.data_indices().iter().zip(&data) {
            v[k] = x;
        }
        Ok(frame)
    }

    /// Transmit one symbol's worth of data bits through phase noise (spanning
    /// `N + cp_len` samples) and AWGN, demodulate, optionally correct CPE,
    /// and score the data subcarriers.
    pub fn run_symbol<R: Rng + ?Sized>(
        &mut self,
        bits: &[u8],
        phase: Option<&[f64]>,
        snr_db: f64,
        noise_rng: &mut R,
        cpe_correction: bool,
    ) -> Result<SymbolOutcome> {
        let tx = self.build_frame(bits)?;
        let mut samples = self.modem.modulate(&tx)?;
        if let Some(phi) = phase {
            impair::rotate_in_place(&mut samples, phi)?;
        }
        impair::add_awgn_in_place(&mut samples, self.numerology.cp_len(), snr_db, noise_rng)?;
        let mut rx = self.modem.demodulate(&samples)?;
        if cpe_correction {
            let phi_hat = estimate_cpe(&rx, self.numerology.pilot_indices(), &self.pilots)?;
            cpe::derotate_in_place(&mut rx, phi_hat);
        }

        let data_idx = self.numerology.data_indices();
        let rx_data: Vec<Complex64> = data_idx.iter().map(|&k| rx.values()[k]).collect();
        let tx_data: Vec<Complex64> = data_idx.iter().map(|&k| tx.values()[k]).collect();
        let (error_energy, reference_energy) = metrics::evm_sums(&rx_data, &tx_data)?;
        self.rx_bits.clear();
        self.constellation.demap_into(&rx_data, &mut self.rx_bits);
        let bit_errors = metrics::bit_errors(bits, &self.rx_bits)?;
        self.last_rx = Some(rx);
        Ok(SymbolOutcome {
            bit_errors,
            bits: bits.len() as u64,
            error_energy,
            reference_energy,
        })
    }
}
