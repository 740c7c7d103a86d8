//! Square M-QAM with per-axis Gray labelling and unit average energy.
//!
//! A label of `2m` bits is split into an in-phase half (high bits) and a
//! quadrature half (low bits). Each half is Gray-decoded to a PAM level index
//! `i ∈ [0, 2^m)` and placed at `(2i - (2^m - 1)) / sqrt(2(L² - 1)/3)`.

use num_complex::Complex64;

use crate::error::{Error, Result};

pub(crate) fn check_order(order: usize) -> Result<()> {
    if order < 4 || !order.is_power_of_two() || !order.trailing_zeros().is_multiple_of(2) {
        return Err(Error::domain(format!(
            "QAM order must be an even power of two >= 4, got {order}"
        )));
    }
    Ok(())
}

fn gray_encode(b: usize) -> usize {
    b ^ (b >> 1)
}

fn gray_decode(mut g: usize) -> usize {
    let mut b = g;
    while g > 0 {
        g >>= 1;
        b ^= g;
    }
    b
}

#[derive(Debug, Clone, PartialEq)]
pub struct QamConstellation {
    order: usize,
    bits_per_axis: usize,
    levels: usize,
    scale: f64,
    points: Vec<Complex64>,
}

impl QamConstellation {
    pub fn new(order: usize) -> Result<Self> {
        check_order(order)?;
        let bits_per_axis = order.trailing_zeros() as usize / 2;
        let levels = 1usize << bits_per_axis;
        let scale = (2.0 * ((levels * levels) as f64 - 1.0) / 3.0).sqrt().recip();
        let level = |gray: usize| (2.0 * gray_decode(gray) as f64 - (levels as f64 - 1.0)) * scale;
        let points = (0..order)
            .map(|label| {
                let i_bits = label >> bits_per_axis;
                let q_bits = label & (levels - 1);
                Complex64::new(level(i_bits), level(q_bits))
            })
            .collect();
        Ok(Self {
            order,
            bits_per_axis,
            levels,
            scale,
            points,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn bits_per_symbol(&self) -> usize {
        2 * self.bits_per_axis
    }

    /// Symbol table indexed by label.
    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn point(&self, label: usize) -> Complex64 {
        self.points[label]
    }

    fn axis_decision(&self, x: f64) -> usize {
        let idx = ((x / self.scale + (self.levels as f64 - 1.0)) / 2.0).round();
        let idx = idx.clamp(0.0, (self.levels - 1) as f64) as usize;
        gray_encode(idx)
    }

    /// Nearest-neighbour label of a received point.
    pub fn decide(&self, y: Complex64) -> usize {
        (self.axis_decision(y.re) << self.bits_per_axis) | self.axis_decision(y.im)
    }

    /// Map bits (`0`/`1`, MSB first per symbol) to constellation points.
    pub fn map(&self, bits: &[u8]) -> Result<Vec<Complex64>> {
        let k = self.bits_per_symbol();
        if !bits.len().is_multiple_of(k) {
            return Err(Error::contract(format!(
                "bit count {} not divisible by {k} bits/symbol",
                bits.len()
            )));
        }
        Ok(bits
            .chunks_exact(k)
            .map(|c| self.points[c.iter().fold(0usize, |acc, &b| (acc << 1) | usize::from(b & 1))])
            .collect())
    }

    /// Hard-decision demapping back to bits.
    pub fn demap(&self, symbols: &[Complex64]) -> Vec<u8> {
        let mut out = Vec::with_capacity(symbols.len() * self.bits_per_symbol());
        self.demap_into(symbols, &mut out);
        out
    }

    pub(crate) fn demap_into(&self, symbols: &[Complex64], out: &mut Vec<u8>) {
        let k = self.bits_per_symbol();
        for &y in symbols {
            let label = self.decide(y);
            out.extend((0..k).rev().map(|i| ((label >> i) & 1) as u8));
        }
    }
}

/// Free-function form of [`QamConstellation::map`].
pub fn qam_map(bits: &[u8], constellation: &QamConstellation) -> Result<Vec<Complex64>> {
    constellation.map(bits)
}

/// Free-function form of [`QamConstellation::demap`].
pub fn qam_demap(symbols: &[Complex64], constellation: &QamConstellation) -> Vec<u8> {
    constellation.demap(symbols)
}
