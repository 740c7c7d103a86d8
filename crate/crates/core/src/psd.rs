//! Zero-pole phase-noise spectra.
//!
//! A [`PhaseNoisePsd`] is the one-sided phase PSD `S(f)` in rad²/Hz of an
//! oscillator running at `base_carrier_hz`:
//!
//! ```text
//! S(f) = s0 · Π_n (1 + (f/f_zero,n)²) / (1 + (f/f_pole,n)²)
//! ```
//!
//! Moving the oscillator to another carrier `f_c` multiplies the level by
//! `(f_c/f_base)²` and stretches every corner by `f_c/f_base`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One zero-pole factor of the cascade.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZeroPoleStage {
    #[serde(rename = "f_zero_hz")]
    pub f_zero: f64,
    #[serde(rename = "f_pole_hz")]
    pub f_pole: f64,
}

impl ZeroPoleStage {
    pub fn new(f_zero: f64, f_pole: f64) -> Result<Self> {
        let stage = Self { f_zero, f_pole };
        stage.validate()?;
        Ok(stage)
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if !(self.f_zero > 0.0 && self.f_zero.is_finite()) {
            return Err(Error::domain(format!("f_zero must be positive, got {}", self.f_zero)));
        }
        if !(self.f_pole > 0.0 && self.f_pole.is_finite()) {
            return Err(Error::domain(format!("f_pole must be positive, got {}", self.f_pole)));
        }
        Ok(())
    }

    #[inline]
    fn factor(&self, f_m: f64) -> f64 {
        let z = f_m / self.f_zero;
        let p = f_m / self.f_pole;
        (1.0 + z * z) / (1.0 + p * p)
    }
}

/// Single-sideband phase-noise spectrum anchored at a base carrier.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseNoisePsd {
    s0: f64,
    base_carrier_hz: f64,
    stages: Vec<ZeroPoleStage>,
}

/// How a variance figure was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarianceMethod {
    /// Quadrature of the PSD over half the occupied bandwidth.
    NumericalIntegral,
    /// Closed-form `N_sample · 2π · Δf · S₀ · (f_c/f_base)²` law.
    AnalyticApprox,
}

impl VarianceMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            VarianceMethod::NumericalIntegral => "numerical_integral",
            VarianceMethod::AnalyticApprox => "analytic_approx",
        }
    }
}

impl std::fmt::Display for VarianceMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for VarianceMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "numerical_integral" | "numerical" => Ok(VarianceMethod::NumericalIntegral),
            "analytic_approx" | "analytic" => Ok(VarianceMethod::AnalyticApprox),
            other => Err(Error::Config(format!("unknown variance method '{other}'"))),
        }
    }
}

/// Phase variance in rad² together with the method that produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarianceEstimate {
    pub value: f64,
    pub method: VarianceMethod,
}

/// Convert a dBc/Hz level to a linear one-sided phase PSD in rad²/Hz.
pub fn dbchz_to_linear(dbchz: f64) -> f64 {
    10f64.powf(dbchz / 10.0)
}

/// Convert a linear phase PSD in rad²/Hz to dBc/Hz.
pub fn linear_to_dbchz(linear: f64) -> f64 {
    10.0 * linear.log10()
}

impl PhaseNoisePsd {
    pub fn new(s0: f64, base_carrier_hz: f64, stages: Vec<ZeroPoleStage>) -> Result<Self> {
        if !(s0 > 0.0 && s0.is_finite()) {
            return Err(Error::domain(format!("s0 must be positive and finite, got {s0}")));
        }
        if !(base_carrier_hz > 0.0 && base_carrier_hz.is_finite()) {
            return Err(Error::domain(format!(
                "base carrier must be positive, got {base_carrier_hz}"
            )));
        }
        for stage in &stages {
            stage.validate()?;
        }
        Ok(Self {
            s0,
            base_carrier_hz,
            stages,
        })
    }

    /// Build from a low-offset level given in dBc/Hz.
    pub fn from_dbchz(s0_dbchz: f64, base_carrier_hz: f64, stages: Vec<ZeroPoleStage>) -> Result<Self> {
        Self::new(dbchz_to_linear(s0_dbchz), base_carrier_hz, stages)
    }

    /// Representative single-stage oscillator at 15 GHz.
    ///
    /// Flat at -95 dBc/Hz up to a 50 kHz pole, rolling off at 20 dB/decade
    /// until a 10 MHz zero sets the -141 dBc/Hz floor. These numbers are an
    /// illustrative stand-in for a measured sub-THz synthesizer, not a
    /// tabulated model.
    pub fn representative() -> Self {
        Self::from_dbchz(
            DEFAULT_S0_DBCHZ,
            DEFAULT_BASE_CARRIER_HZ,
            vec![ZeroPoleStage {
                f_zero: DEFAULT_F_ZERO_HZ,
                f_pole: DEFAULT_F_POLE_HZ,
            }],
        )
        .expect("default PSD parameters are valid")
    }

    pub fn s0(&self) -> f64 {
        self.s0
    }

    pub fn base_carrier_hz(&self) -> f64 {
        self.base_carrier_hz
    }

    pub fn stages(&self) -> &[ZeroPoleStage] {
        &self.stages
    }

    /// Evaluate `S(f_m)` in rad²/Hz.
    pub fn eval(&self, f_m: f64) -> Result<f64> {
        if !(f_m >= 0.0) {
            return Err(Error::domain(format!("offset frequency must be >= 0, got {f_m}")));
        }
        Ok(self.eval_unchecked(f_m))
    }

    #[inline]
    pub(crate) fn eval_unchecked(&self, f_m: f64) -> f64 {
        self.stages
            .iter()
            .fold(self.s0, |acc, stage| acc * stage.factor(f_m))
    }

    /// Move the spectrum to carrier `f_c`: level × (f_c/f_base)², corners × f_c/f_base.
    pub fn scale_to_carrier(&self, f_c: f64) -> Result<Self> {
        if !(f_c > 0.0 && f_c.is_finite()) {
            return Err(Error::domain(format!("carrier must be positive, got {f_c}")));
        }
        if f_c == self.base_carrier_hz {
            return Ok(self.clone());
        }
        let ratio = f_c / self.base_carrier_hz;
        Ok(Self {
            s0: self.s0 * ratio * ratio,
            base_carrier_hz: f_c,
            stages: self
                .stages
                .iter()
                .map(|s| ZeroPoleStage {
                    f_zero: s.f_zero * ratio,
                    f_pole: s.f_pole * ratio,
                })
                .collect(),
        })
    }

    /// Spectrum after an ideal frequency multiplier of order `n_mult`.
    pub fn apply_multiplier(&self, n_mult: u32) -> Result<Self> {
        if n_mult == 0 {
            return Err(Error::domain("multiplier order must be >= 1"));
        }
        self.scale_to_carrier(self.base_carrier_hz * f64::from(n_mult))
    }

    /// Same shape, level multiplied by `factor`.
    pub fn with_power_scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.s0 * factor, self.base_carrier_hz, self.stages.clone())
    }

    /// Integrated phase variance over `[0, bandwidth/2]`.
    ///
    /// The interval is split at `f_low = max(1e-9·B/2, 1 mHz)`. Below it
    /// adaptive Simpson runs on a linear axis (the PSD is close to flat there,
    /// so this costs a handful of points); above it in `ln f`, one decade per
    /// panel.
    pub fn integrate_variance(&self, bandwidth: f64) -> Result<VarianceEstimate> {
        if !(bandwidth > 0.0 && bandwidth.is_finite()) {
            return Err(Error::domain(format!("bandwidth must be positive, got {bandwidth}")));
        }
        let upper = bandwidth / 2.0;
        let f_low = (upper * 1e-9).max(1e-3);
        let value = if upper <= f_low {
            let f = |x: f64| self.checked(x);
            adaptive_simpson(&f, 0.0, upper)?
        } else {
            let g = |u: f64| {
                let x = u.exp();
                Ok(self.checked(x)? * x)
            };
            let (a, b) = (f_low.ln(), upper.ln());
            let panels = ((b - a) / std::f64::consts::LN_10).ceil().max(1.0) as usize;
            let h = (b - a) / panels as f64;
            let flat = |x: f64| self.checked(x);
            let mut acc = adaptive_simpson(&flat, 0.0, f_low)?;
            for i in 0..panels {
                let lo = a + h * i as f64;
                let hi = if i + 1 == panels { b } else { lo + h };
                acc += adaptive_simpson(&g, lo, hi)?;
            }
            acc
        };
        Ok(VarianceEstimate {
            value,
            method: VarianceMethod::NumericalIntegral,
        })
    }

    fn checked(&self, f_m: f64) -> Result<f64> {
        let v = self.eval_unchecked(f_m);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFinitePsd {
                offset_hz: f_m,
                value: v,
            })
        }
    }
}

pub const DEFAULT_S0_DBCHZ: f64 = -95.0;
pub const DEFAULT_BASE_CARRIER_HZ: f64 = 15e9;
pub const DEFAULT_F_POLE_HZ: f64 = 50e3;
pub const DEFAULT_F_ZERO_HZ: f64 = 10e6;

/// Free-function form of [`PhaseNoisePsd::eval`].
pub fn psd_eval(psd: &PhaseNoisePsd, f_m: f64) -> Result<f64> {
    psd.eval(f_m)
}

/// Free-function form of [`PhaseNoisePsd::integrate_variance`].
pub fn integrate_variance(psd: &PhaseNoisePsd, bandwidth: f64) -> Result<VarianceEstimate> {
    psd.integrate_variance(bandwidth)
}

/// Closed-form per-oscillator variance `N_sample · 2π · Δf · S₀ · (f_c/f_base)²`.
pub fn analytic_variance(
    s0_ref: f64,
    delta_f: f64,
    n_sample: usize,
    f_c: f64,
    f_base: f64,
) -> Result<VarianceEstimate> {
    for (name, v) in [("s0_ref", s0_ref), ("delta_f", delta_f), ("f_c", f_c), ("f_base", f_base)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::domain(format!("{name} must be positive, got {v}")));
        }
    }
    if n_sample == 0 {
        return Err(Error::domain("n_sample must be positive"));
    }
    let ratio = f_c / f_base;
    Ok(VarianceEstimate {
        value: n_sample as f64 * 2.0 * std::f64::consts::PI * delta_f * s0_ref * ratio * ratio,
        method: VarianceMethod::AnalyticApprox,
    })
}

const SIMPSON_REL_TOL: f64 = 1e-11;
const SIMPSON_MAX_DEPTH: u32 = 40;

fn adaptive_simpson<F>(f: &F, a: f64, b: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let fa = f(a)?;
    let fb = f(b)?;
    let m = 0.5 * (a + b);
    let fm = f(m)?;
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let tol = SIMPSON_REL_TOL * whole.abs().max(f64::MIN_POSITIVE);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, SIMPSON_MAX_DEPTH)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm)?;
    let frm = f(rm)?;
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    Ok(simpson_step(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)?
        + simpson_step(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)?)
}
