use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// OFDM grid: subcarrier count, cyclic prefix, spacing, pilots and QAM order.
///
/// All `n_subcarriers` DFT bins are occupied. Pilots sit on every
/// `pilot_spacing`-th bin starting at bin 0; the rest carry data.
#[derive(Debug, Clone, PartialEq)]
pub struct OfdmNumerology {
    n_subcarriers: usize,
    cp_len: usize,
    delta_f_hz: f64,
    pilot_spacing: usize,
    qam_order: usize,
    pilot_indices: Vec<usize>,
    data_indices: Vec<usize>,
}

/// Plain-data form used by config files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NumerologyParams {
    #[serde(default = "defaults::n_subcarriers")]
    pub n_subcarriers: usize,
    /// Defaults to `n_subcarriers / 16`.
    #[serde(default)]
    pub cp_len: Option<usize>,
    #[serde(default = "defaults::delta_f_hz")]
    pub delta_f_hz: f64,
    #[serde(default = "defaults::pilot_fraction")]
    pub pilot_fraction: f64,
    #[serde(default = "defaults::qam_order")]
    pub qam_order: usize,
}

mod defaults {
    pub fn n_subcarriers() -> usize {
        256
    }
    pub fn delta_f_hz() -> f64 {
        240e3
    }
    pub fn pilot_fraction() -> f64 {
        0.25
    }
    pub fn qam_order() -> usize {
        64
    }
}

impl Default for NumerologyParams {
    fn default() -> Self {
        Self {
            n_subcarriers: defaults::n_subcarriers(),
            cp_len: None,
            delta_f_hz: defaults::delta_f_hz(),
            pilot_fraction: defaults::pilot_fraction(),
            qam_order: defaults::qam_order(),
        }
    }
}

impl NumerologyParams {
    pub fn build(&self) -> Result<OfdmNumerology> {
        let cp = self.cp_len.unwrap_or(self.n_subcarriers / 16);
        OfdmNumerology::new(self.n_subcarriers, cp, self.delta_f_hz, self.pilot_fraction, self.qam_order)
    }
}

impl OfdmNumerology {
    /// `pilot_fraction` must be `0` (no pilots) or `1/s` for an integer `s`
    /// dividing `n_subcarriers`.
    pub fn new(
        n_subcarriers: usize,
        cp_len: usize,
        delta_f_hz: f64,
        pilot_fraction: f64,
        qam_order: usize,
    ) -> Result<Self> {
        if n_subcarriers < 2 {
            return Err(Error::domain(format!("need at least 2 subcarriers, got {n_subcarriers}")));
        }
        if cp_len >= n_subcarriers {
            return Err(Error::domain(format!("cp_len {cp_len} must be < N = {n_subcarriers}")));
        }
        if !(delta_f_hz > 0.0 && delta_f_hz.is_finite()) {
            return Err(Error::domain(format!("subcarrier spacing must be positive, got {delta_f_hz}")));
        }
        crate::ofdm::qam::check_order(qam_order)?;
        let pilot_spacing = if pilot_fraction == 0.0 {
            0
        } else {
            if !(pilot_fraction > 0.0 && pilot_fraction <= 1.0) {
                return Err(Error::domain(format!("pilot fraction must be in [0, 1], got {pilot_fraction}")));
            }
            let s = (1.0 / pilot_fraction).round() as usize;
            if (1.0 / s as f64 - pilot_fraction).abs() > 1e-9 || !n_subcarriers.is_multiple_of(s) {
                return Err(Error::domain(format!(
                    "pilot fraction {pilot_fraction} must be 1/s with s dividing N = {n_subcarriers}"
                )));
            }
            s
        };
        let (pilot_indices, data_indices): (Vec<usize>, Vec<usize>) = (0..n_subcarriers)
            .partition(|k| pilot_spacing != 0 && k % pilot_spacing == 0);
        if data_indices.is_empty() {
            return Err(Error::domain("no data subcarriers left after pilot allocation"));
        }
        Ok(Self {
            n_subcarriers,
            cp_len,
            delta_f_hz,
            pilot_spacing,
            qam_order,
            pilot_indices,
            data_indices,
        })
    }

    /// N = 256, CP = N/16, Δf = 240 kHz, 64-QAM, one pilot in four.
    pub fn reference() -> Self {
        NumerologyParams::default().build().expect("default numerology is valid")
    }

    pub fn n_subcarriers(&self) -> usize {
        self.n_subcarriers
    }

    pub fn cp_len(&self) -> usize {
        self.cp_len
    }

    pub fn delta_f_hz(&self) -> f64 {
        self.delta_f_hz
    }

    pub fn qam_order(&self) -> usize {
        self.qam_order
    }

    pub fn pilot_fraction(&self) -> f64 {
        if self.pilot_spacing == 0 {
            0.0
        } else {
            1.0 / self.pilot_spacing as f64
        }
    }

    pub fn pilot_indices(&self) -> &[usize] {
        &self.pilot_indices
    }

    pub fn data_indices(&self) -> &[usize] {
        &self.data_indices
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.n_subcarriers as f64 * self.delta_f_hz
    }

    pub fn symbol_duration_s(&self) -> f64 {
        1.0 / self.delta_f_hz
    }

    /// Samples per OFDM symbol including the cyclic prefix.
    pub fn samples_per_symbol(&self) -> usize {
        self.n_subcarriers + self.cp_len
    }

    /// Occupied bandwidth `N · Δf`.
    pub fn occupied_bandwidth_hz(&self) -> f64 {
        self.sample_rate_hz()
    }

    pub fn bits_per_qam_symbol(&self) -> usize {
        self.qam_order.trailing_zeros() as usize
    }

    pub fn data_bits_per_symbol(&self) -> usize {
        self.data_indices.len() * self.bits_per_qam_symbol()
    }

    pub fn params(&self) -> NumerologyParams {
        NumerologyParams {
            n_subcarriers: self.n_subcarriers,
            cp_len: Some(self.cp_len),
            delta_f_hz: self.delta_f_hz,
            pilot_fraction: self.pilot_fraction(),
            qam_order: self.qam_order,
        }
    }
}
