//! C ABI for `pnlink`.
//!
//! Conventions:
//! * every fallible function returns a [`PnlStatus`]; results go through out-pointers;
//! * on failure a message is stored per thread, see [`pnl_last_error_message`];
//! * handles ([`PnlPsd`], [`PnlResults`]) are created by the library and released
//!   with the matching `*_free` function; passing NULL to `*_free` is allowed;
//! * array outputs are caller-allocated; the length is passed alongside and is
//!   checked before anything is written.
//!
//! The header `include/pnlink.h` is generated at build time.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use pnlink::config::ConfigFile;
use pnlink::montecarlo::{compare_architectures, run_experiment};
use pnlink::plan::{plan_variance, sweep_if};
use pnlink::{
    Error, FrequencyPlan, MetricSeries, OfdmNumerology, PhaseNoisePsd, SeedSpec, VarianceMethod, ZeroPoleStage,
};

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PnlStatus {
    Ok = 0,
    NullPointer = 1,
    /// Argument outside the domain of the operation.
    Domain = 2,
    /// Inconsistent inputs (lengths, rates, pilot sets).
    Contract = 3,
    /// Non-finite value met during evaluation.
    Numerical = 4,
    /// Experiment description could not be parsed.
    Config = 5,
    BufferTooSmall = 6,
    InvalidUtf8 = 7,
    /// A Rust panic was caught at the boundary.
    Panic = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PnlVarianceMethod {
    NumericalIntegral = 0,
    AnalyticApprox = 1,
}

impl From<PnlVarianceMethod> for VarianceMethod {
    fn from(m: PnlVarianceMethod) -> Self {
        match m {
            PnlVarianceMethod::NumericalIntegral => VarianceMethod::NumericalIntegral,
            PnlVarianceMethod::AnalyticApprox => VarianceMethod::AnalyticApprox,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PnlPlanKind {
    Homodyne = 0,
    Heterodyne = 1,
}

/// Frequency plan; `f_if_hz` is ignored for homodyne.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct PnlPlan {
    pub kind: PnlPlanKind,
    pub f_rf_hz: f64,
    pub f_if_hz: f64,
}

/// OFDM numerology. `cp_len = 0` is allowed.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct PnlNumerology {
    pub n_subcarriers: usize,
    pub cp_len: usize,
    pub delta_f_hz: f64,
    pub pilot_fraction: f64,
    pub qam_order: usize,
}

/// What [`pnl_results_run_toml`] runs.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PnlRunKind {
    /// One series for `[plan]` and `experiment.cpe_correction`.
    LinkSim = 0,
    /// Every plan in `[compare]` with every CPE mode.
    Compare = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PnlMetric {
    SnrDb = 0,
    Ber = 1,
    BerCi95 = 2,
    EvmPercent = 3,
    Bits = 4,
}

/// Opaque phase-noise spectrum.
pub struct PnlPsd(PhaseNoisePsd);

/// Opaque set of BER/EVM series.
pub struct PnlResults(Vec<MetricSeries>);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Fail(PnlStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Domain(_) => PnlStatus::Domain,
            Error::Contract(_) => PnlStatus::Contract,
            Error::Config(_) => PnlStatus::Config,
            _ if e.is_numerical() => PnlStatus::Numerical,
            _ => PnlStatus::Contract,
        };
        Fail(status, e.to_string())
    }
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> PnlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            PnlStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("panic inside pnlink".into());
            PnlStatus::Panic
        }
    }
}

fn null(what: &str) -> Fail {
    Fail(PnlStatus::NullPointer, format!("{what} is NULL"))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn buffer<'a, T>(p: *mut T, len: usize, needed: usize, what: &str) -> Result<&'a mut [T], Fail> {
    if len < needed {
        return Err(Fail(PnlStatus::BufferTooSmall, format!("{what}: need {needed}, got {len}")));
    }
    if needed == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts_mut(p, needed))
}

unsafe fn input<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

fn plan_of(p: &PnlPlan) -> Result<FrequencyPlan, Fail> {
    Ok(match p.kind {
        PnlPlanKind::Homodyne => FrequencyPlan::homodyne(p.f_rf_hz)?,
        PnlPlanKind::Heterodyne => FrequencyPlan::heterodyne(p.f_rf_hz, p.f_if_hz)?,
    })
}

fn numerology_of(n: &PnlNumerology) -> Result<OfdmNumerology, Fail> {
    Ok(OfdmNumerology::new(n.n_subcarriers, n.cp_len, n.delta_f_hz, n.pilot_fraction, n.qam_order)?)
}

/// Length of the last error message in bytes, excluding the terminator; 0 if none.
#[no_mangle]
pub extern "C" fn pnl_last_error_length() -> usize {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(0, |c| c.as_bytes().len()))
}

/// Copy the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len - 1` bytes). Returns the full message length.
///
/// # Safety
/// `buf` must be NULL or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn pnl_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let bytes = e.as_ref().map_or(&[][..], |c| c.as_bytes());
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn pnl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Reference numerology: 256 subcarriers, CP 16, 240 kHz, 1/4 pilots, 64-QAM.
#[no_mangle]
pub extern "C" fn pnl_numerology_default() -> PnlNumerology {
    let n = OfdmNumerology::reference();
    PnlNumerology {
        n_subcarriers: n.n_subcarriers(),
        cp_len: n.cp_len(),
        delta_f_hz: n.delta_f_hz(),
        pilot_fraction: n.pilot_fraction(),
        qam_order: n.qam_order(),
    }
}

/// Build a spectrum from a level in dBc/Hz at `base_carrier_hz` and
/// `n_stages` zero/pole pairs.
///
/// # Safety
/// `f_zero_hz` and `f_pole_hz` must point to `n_stages` values (may be NULL if
/// `n_stages == 0`); `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pnl_psd_new(
    s0_dbchz: f64,
    base_carrier_hz: f64,
    f_zero_hz: *const f64,
    f_pole_hz: *const f64,
    n_stages: usize,
    out_psd: *mut *mut PnlPsd,
) -> PnlStatus {
    guard(|| {
        let o = out(out_psd, "out_psd")?;
        let z = input(f_zero_hz, n_stages, "f_zero_hz")?;
        let p = input(f_pole_hz, n_stages, "f_pole_hz")?;
        let stages = z
            .iter()
            .zip(p)
            .map(|(&z, &p)| ZeroPoleStage::new(z, p))
            .collect::<pnlink::Result<Vec<_>>>()?;
        let psd = PhaseNoisePsd::from_dbchz(s0_dbchz, base_carrier_hz, stages)?;
        *o = Box::into_raw(Box::new(PnlPsd(psd)));
        Ok(())
    })
}

/// The built-in representative oscillator.
///
/// # Safety
/// `out_psd` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pnl_psd_representative(out_psd: *mut *mut PnlPsd) -> PnlStatus {
    guard(|| {
        *out(out_psd, "out_psd")? = Box::into_raw(Box::new(PnlPsd(PhaseNoisePsd::representative())));
        Ok(())
    })
}

/// # Safety
/// `psd` must be NULL or a handle returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pnl_psd_free(psd: *mut PnlPsd) {
    if !psd.is_null() {
        drop(Box::from_raw(psd));
    }
}

/// One-sided spectrum in rad²/Hz at offset `f_m_hz`.
///
/// # Safety
/// `psd` must be a live handle and `out_value` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pnl_psd_eval(psd: *const PnlPsd, f_m_hz: f64, out_value: *mut f64) -> PnlStatus {
    guard(|| {
        *out(out_value, "out_value")? = handle(psd, "psd")?.0.eval(f_m_hz)?;
        Ok(())
    })
}

/// New handle holding the spectrum scaled to carrier `f_c_hz`.
///
/// # Safety
/// `psd` must be a live handle and `out_psd` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pnl_psd_scale_to_carrier(
    psd: *const PnlPsd,
    f_c_hz: f64,
    out_psd: *mut *mut PnlPsd,
) -> PnlStatus {
    guard(|| {
        let scaled = handle(psd, "psd")?.0.scale_to_carrier(f_c_hz)?;
        *out(out_psd, "out_psd")? = Box::into_raw(Box::new(PnlPsd(scaled)));
        Ok(())
    })
}

/// New handle holding the spectrum after an ideal ×`n_mult` multiplier.
///
/// # Safety
/// `psd` must be a live handle and `out_psd` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pnl_psd_apply_multiplier(
    psd: *const PnlPsd,
    n_mult: u32,
    out_psd: *mut *mut PnlPsd,
) -> PnlStatus {
    guard(|| {
        let m = handle(psd, "psd")?.0.apply_multiplier(n_mult)?;
        *out(out_psd, "out_psd")? = Box::into_raw(Box::new(PnlPsd(m)));
        Ok(())
    })
}

/// Phase variance in rad² over offsets up to `bandwidth_hz / 2`.
///
/// # Safety
/// `psd` must be a live handle and `out_value` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pnl_psd_integrate_variance(
    psd: *const PnlPsd,
    bandwidth_hz: f64,
    out_value: *mut f64,
) -> PnlStatus {
    guard(|| {
        *out(out_value, "out_value")? = handle(psd, "psd")?.0.integrate_variance(bandwidth_hz)?.value;
        Ok(())
    })
}

/// Closed-form variance `n_sample·2π·Δf·s0·(f_c/f_base)²`.
///
/// # Safety
/// `out_value` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pnl_analytic_variance(
    s0_ref: f64,
    delta_f_hz: f64,
    n_sample: usize,
    f_c_hz: f64,
    f_base_hz: f64,
    out_value: *mut f64,
) -> PnlStatus {
    guard(|| {
        *out(out_value, "out_value")? = pnlink::analytic_variance(s0_ref, delta_f_hz, n_sample, f_c_hz, f_base_hz)?.value;
        Ok(())
    })
}

/// `(f_if / f_rf)²`.
///
/// # Safety
/// `out_value` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pnl_variance_reduction_gamma(f_if_hz: f64, f_rf_hz: f64, out_value: *mut f64) -> PnlStatus {
    guard(|| {
        *out(out_value, "out_value")? = pnlink::variance_reduction_gamma(f_if_hz, f_rf_hz)?;
        Ok(())
    })
}

/// Total phase variance of a plan, every oscillator sharing `psd`.
///
/// # Safety
/// `psd` must be a live handle; `plan`, `numerology` and `out_value` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn pnl_plan_variance(
    plan: *const PnlPlan,
    psd: *const PnlPsd,
    numerology: *const PnlNumerology,
    method: PnlVarianceMethod,
    out_value: *mut f64,
) -> PnlStatus {
    guard(|| {
        let p = plan_of(handle(plan, "plan")?)?;
        let n = numerology_of(handle(numerology, "numerology")?)?;
        *out(out_value, "out_value")? = plan_variance(&p, &handle(psd, "psd")?.0, &n, method.into())?;
        Ok(())
    })
}

/// Heterodyne variance on a uniform IF grid of `grid_points` values.
/// `out_grid` and `out_variance` must each hold `len >= grid_points` values;
/// `out_argmin_if_hz` may be NULL.
///
/// # Safety
/// Pointers must be valid for the stated lengths.
#[no_mangle]
pub unsafe extern "C" fn pnl_sweep_if(
    f_rf_hz: f64,
    psd: *const PnlPsd,
    numerology: *const PnlNumerology,
    grid_points: usize,
    method: PnlVarianceMethod,
    out_grid: *mut f64,
    out_variance: *mut f64,
    len: usize,
    out_argmin_if_hz: *mut f64,
) -> PnlStatus {
    guard(|| {
        let n = numerology_of(handle(numerology, "numerology")?)?;
        let g = buffer(out_grid, len, grid_points, "out_grid")?;
        let v = buffer(out_variance, len, grid_points, "out_variance")?;
        let r = sweep_if(f_rf_hz, &handle(psd, "psd")?.0, &n, grid_points, method.into())?;
        g.copy_from_slice(&r.grid);
        v.copy_from_slice(&r.variance);
        if let Some(a) = out_argmin_if_hz.as_mut() {
            *a = r.argmin_if_hz;
        }
        Ok(())
    })
}

/// Fill `out_samples[0..n_samples]` with one phase realization in radians.
///
/// # Safety
/// `psd` must be a live handle; `out_samples` must hold `len >= n_samples` values.
#[no_mangle]
pub unsafe extern "C" fn pnl_synthesize(
    psd: *const PnlPsd,
    n_samples: usize,
    sample_rate_hz: f64,
    master_seed: u64,
    stream_id: u64,
    out_samples: *mut f64,
    len: usize,
) -> PnlStatus {
    guard(|| {
        let dst = buffer(out_samples, len, n_samples, "out_samples")?;
        let r = pnlink::synthesize(
            &handle(psd, "psd")?.0,
            n_samples,
            sample_rate_hz,
            SeedSpec::new(master_seed, stream_id),
        )?;
        dst.copy_from_slice(r.samples());
        Ok(())
    })
}

/// Run an experiment described by a TOML document (same schema as the CLI).
///
/// # Safety
/// `config_toml` must be a NUL-terminated string; `out_results` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pnl_results_run_toml(
    config_toml: *const c_char,
    kind: PnlRunKind,
    out_results: *mut *mut PnlResults,
) -> PnlStatus {
    guard(|| {
        let o = out(out_results, "out_results")?;
        if config_toml.is_null() {
            return Err(null("config_toml"));
        }
        let text = CStr::from_ptr(config_toml)
            .to_str()
            .map_err(|e| Fail(PnlStatus::InvalidUtf8, format!("config_toml: {e}")))?;
        let cfg = ConfigFile::parse(text, &[])?;
        let exp = cfg.experiment_config()?;
        let series = match kind {
            PnlRunKind::LinkSim => vec![run_experiment(&exp)?],
            PnlRunKind::Compare => compare_architectures(&exp, &cfg.compare_plans(), &cfg.compare.cpe_modes)?,
        };
        *o = Box::into_raw(Box::new(PnlResults(series)));
        Ok(())
    })
}

/// # Safety
/// `results` must be NULL or a handle returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pnl_results_free(results: *mut PnlResults) {
    if !results.is_null() {
        drop(Box::from_raw(results));
    }
}

unsafe fn series_at<'a>(results: *const PnlResults, index: usize) -> Result<&'a MetricSeries, Fail> {
    let r = handle(results, "results")?;
    r.0.get(index).ok_or_else(|| {
        Fail(PnlStatus::Contract, format!("series {index} out of range ({} series)", r.0.len()))
    })
}

/// Number of series; 0 for a NULL handle.
///
/// # Safety
/// `results` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pnl_results_series_count(results: *const PnlResults) -> usize {
    results.as_ref().map_or(0, |r| r.0.len())
}

/// Number of SNR points in series `index`.
///
/// # Safety
/// `results` must be a live handle and `out_count` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pnl_results_snr_count(
    results: *const PnlResults,
    index: usize,
    out_count: *mut usize,
) -> PnlStatus {
    guard(|| {
        *out(out_count, "out_count")? = series_at(results, index)?.snr_db.len();
        Ok(())
    })
}

/// Plan and CPE mode of series `index`.
///
/// # Safety
/// `results` must be a live handle; `out_plan` and `out_cpe` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn pnl_results_series_info(
    results: *const PnlResults,
    index: usize,
    out_plan: *mut PnlPlan,
    out_cpe: *mut bool,
) -> PnlStatus {
    guard(|| {
        let s = series_at(results, index)?;
        *out(out_plan, "out_plan")? = match s.plan {
            FrequencyPlan::Homodyne { f_rf_hz } => PnlPlan {
                kind: PnlPlanKind::Homodyne,
                f_rf_hz,
                f_if_hz: 0.0,
            },
            FrequencyPlan::Heterodyne { f_rf_hz, f_if_hz } => PnlPlan {
                kind: PnlPlanKind::Heterodyne,
                f_rf_hz,
                f_if_hz,
            },
        };
        *out(out_cpe, "out_cpe")? = s.cpe_correction;
        Ok(())
    })
}

/// Copy one metric of series `index` into `out_values` (one value per SNR point).
///
/// # Safety
/// `results` must be a live handle; `out_values` must hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn pnl_results_metric(
    results: *const PnlResults,
    index: usize,
    metric: PnlMetric,
    out_values: *mut f64,
    len: usize,
) -> PnlStatus {
    guard(|| {
        let s = series_at(results, index)?;
        let dst = buffer(out_values, len, s.snr_db.len(), "out_values")?;
        match metric {
            PnlMetric::SnrDb => dst.copy_from_slice(&s.snr_db),
            PnlMetric::Ber => dst.copy_from_slice(&s.ber_mean),
            PnlMetric::BerCi95 => dst.copy_from_slice(&s.ber_ci_halfwidth),
            PnlMetric::EvmPercent => dst.copy_from_slice(&s.evm_rms_percent),
            PnlMetric::Bits => dst.iter_mut().zip(&s.bits).for_each(|(d, &b)| *d = b as f64),
        }
        Ok(())
    })
}
