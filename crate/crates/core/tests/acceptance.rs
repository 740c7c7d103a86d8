//! End-to-end acceptance checks. Runs as a plain binary so that every
//! criterion prints one PASS/FAIL line even when the harness captures output.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rustfft::FftPlanner;
use statrs::function::erf::erfc;

use pnlink::montecarlo::{compare_architectures, run_experiment, ExperimentConfig, MetricSeries};
use pnlink::ofdm::decompose_cpe_ici;
use pnlink::plan::{plan_variance, sweep_if};
use pnlink::{
    synthesize, variance_reduction_gamma, FrequencyPlan, OfdmNumerology, OscillatorPsds, PhaseNoisePsd, SeedSpec,
    VarianceMethod, ZeroPoleStage,
};

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check, Duration);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn gamma_reduction() -> Check {
    let g = variance_reduction_gamma(30e9, 70e9).map_err(|e| e.to_string())?;
    ensure(g == (30.0f64 / 70.0).powi(2), || format!("gamma = {g}"))?;
    ensure((g - 9.0 / 49.0).abs() <= f64::EPSILON, || format!("gamma = {g}, expected 9/49"))?;
    let reduction = 100.0 * (1.0 - g);
    ensure(format!("{:.0}", reduction) == "82", || format!("reduction {reduction:.4}% does not round to 82%"))?;
    Ok(format!("gamma = {g:.6}, reduction {reduction:.2}%"))
}

fn sweep_u_shape() -> Check {
    let psd = PhaseNoisePsd::representative();
    let num = OfdmNumerology::reference();
    let mut notes = Vec::new();
    for f_rf in [70e9, 140e9] {
        let s = sweep_if(f_rf, &psd, &num, 141, VarianceMethod::AnalyticApprox).map_err(|e| e.to_string())?;
        for (i, w) in s.variance.windows(3).enumerate() {
            let d2 = w[0] - 2.0 * w[1] + w[2];
            ensure(d2 > 0.0, || format!("f_rf {f_rf}: second difference {d2} at index {}", i + 1))?;
        }
        let off = (s.argmin_if_hz - f_rf / 2.0).abs();
        ensure(off <= s.grid_step(), || format!("f_rf {f_rf}: argmin {} off by {off}", s.argmin_if_hz))?;
        notes.push(format!("argmin {} GHz", s.argmin_if_hz / 1e9));
    }
    Ok(notes.join(", "))
}

fn symmetric_halving() -> Check {
    let num = OfdmNumerology::reference();
    let mut worst: f64 = 0.0;
    for psd in [
        PhaseNoisePsd::representative(),
        PhaseNoisePsd::from_dbchz(-80.0, 10e9, vec![]).unwrap(),
    ] {
        for f_rf in [28e9, 70e9, 140e9, 300e9] {
            let hom = plan_variance(&FrequencyPlan::homodyne(f_rf).unwrap(), &psd, &num, VarianceMethod::AnalyticApprox)
                .map_err(|e| e.to_string())?;
            let het = plan_variance(
                &FrequencyPlan::symmetric_heterodyne(f_rf).unwrap(),
                &psd,
                &num,
                VarianceMethod::AnalyticApprox,
            )
            .map_err(|e| e.to_string())?;
            let dev = (het / hom - 0.5).abs();
            worst = worst.max(dev);
            ensure(dev <= 2.0 * f64::EPSILON, || format!("f_rf {f_rf}: ratio {}", het / hom))?;
        }
    }
    Ok(format!("max |ratio - 0.5| = {worst:.1e}"))
}

fn quadrature_oracles() -> Check {
    let s0 = 1e-9;
    let mut worst: f64 = 0.0;
    let bandwidths: Vec<f64> = (0..=24).map(|i| 10f64.powf(3.0 + i as f64 * 0.25)).collect();
    let flat = PhaseNoisePsd::new(s0, 15e9, vec![]).unwrap();
    for &b in &bandwidths {
        let v = flat.integrate_variance(b).map_err(|e| e.to_string())?.value;
        let oracle = s0 * b / 2.0;
        worst = worst.max((v - oracle).abs() / oracle);
    }
    for fp in [10.0, 3e3, 100e3, 20e6] {
        let pole = PhaseNoisePsd::new(s0, 15e9, vec![ZeroPoleStage::new(1e30, fp).unwrap()]).unwrap();
        for &b in &bandwidths {
            let v = pole.integrate_variance(b).map_err(|e| e.to_string())?.value;
            let oracle = s0 * fp * (b / (2.0 * fp)).atan();
            worst = worst.max((v - oracle).abs() / oracle);
        }
    }
    ensure(worst < 1e-6, || format!("worst relative error {worst:.3e}"))?;
    Ok(format!("worst relative error {worst:.2e} over {} bandwidths", bandwidths.len()))
}

fn spectral_fidelity() -> Check {
    let n = 4096;
    let fs = 61.44e6;
    let realizations = 200;
    let psd = PhaseNoisePsd::representative().scale_to_carrier(140e9).unwrap();
    let fft = FftPlanner::<f64>::new().plan_fft_forward(n);
    let mut avg = vec![0.0; n / 2 + 1];
    let mut buf = vec![Complex64::default(); n];
    for r in 0..realizations {
        let x = synthesize(&psd, n, fs, SeedSpec::new(20240601, 1).derive(&[r as u64])).map_err(|e| e.to_string())?;
        buf.iter_mut().zip(x.samples()).for_each(|(b, &s)| *b = Complex64::new(s, 0.0));
        fft.process(&mut buf);
        for (k, a) in avg.iter_mut().enumerate() {
            *a += 2.0 * buf[k].norm_sqr() / (n as f64 * fs) / realizations as f64;
        }
    }
    let (k_lo, k_hi) = (4, n / 4);
    let mut worst: f64 = 0.0;
    for (k, est) in avg.iter().enumerate().take(k_hi + 1).skip(k_lo) {
        let target = psd.eval(k as f64 * fs / n as f64).unwrap();
        let db = 10.0 * (est / target).log10();
        worst = if db.abs() > worst.abs() { db } else { worst };
    }
    ensure(worst.abs() <= 1.5, || format!("worst deviation {worst:.2} dB"))?;
    Ok(format!(
        "{realizations} x {n} samples, bins {k_lo}..{k_hi}, worst deviation {worst:+.2} dB"
    ))
}

/// Exact BER of Gray-coded square M-QAM at symbol SNR `es_n0` (linear).
fn gray_qam_ber(m: usize, es_n0: f64) -> f64 {
    let root = (m as f64).sqrt();
    let bits_per_axis = (root.log2()).round() as u32;
    let arg = (3.0 * es_n0 / (2.0 * (m as f64 - 1.0))).sqrt();
    let mut total = 0.0;
    for k in 1..=bits_per_axis {
        let span = ((1.0 - 2f64.powi(-(k as i32))) * root) as usize;
        let w = 2f64.powi(k as i32 - 1);
        let mut pk = 0.0;
        for i in 0..span {
            let t = i as f64 * w / root;
            let sign = if (t.floor() as i64) % 2 == 0 { 1.0 } else { -1.0 };
            pk += sign * (w - (t + 0.5).floor()) * erfc((2 * i + 1) as f64 * arg);
        }
        total += pk / root;
    }
    total / bits_per_axis as f64
}

fn awgn_baseline() -> Check {
    let config = ExperimentConfig {
        snr_grid_db: (0..=15).map(|i| 2.0 * i as f64).collect(),
        n_symbols_per_run: 500,
        n_mc_runs: 20,
        phase_noise: false,
        cpe_correction: false,
        ..ExperimentConfig::desk(FrequencyPlan::homodyne(140e9).unwrap())
    };
    let m = run_experiment(&config).map_err(|e| e.to_string())?;
    let mut checked = 0;
    let mut worst: f64 = 0.0;
    for (i, &snr) in m.snr_db.iter().enumerate() {
        let expected = gray_qam_ber(64, 10f64.powf(snr / 10.0));
        if expected < 1e-3 {
            continue;
        }
        ensure(m.bits[i] >= 10_000_000, || format!("only {} bits at {snr} dB", m.bits[i]))?;
        let rel = (m.ber_mean[i] - expected).abs() / expected;
        worst = worst.max(rel);
        ensure(rel <= 0.10, || format!("{snr} dB: BER {} vs {expected} ({:.1}%)", m.ber_mean[i], 100.0 * rel))?;
        checked += 1;
    }
    ensure(checked >= 5, || format!("only {checked} SNR points with BER >= 1e-3"))?;
    Ok(format!("{checked} SNR points, {} bits each, worst deviation {:.2}%", m.bits[0], 100.0 * worst))
}

fn find<'a>(series: &'a [MetricSeries], plan: &FrequencyPlan, cpe: bool) -> &'a MetricSeries {
    series.iter().find(|s| s.plan == *plan && s.cpe_correction == cpe).expect("series present")
}

fn desk_ordering() -> Check {
    let hom = FrequencyPlan::homodyne(140e9).unwrap();
    let het = FrequencyPlan::symmetric_heterodyne(140e9).unwrap();
    let base = ExperimentConfig::desk(hom);
    let series = compare_architectures(&base, &[hom, het], &[false, true]).map_err(|e| e.to_string())?;
    let order = [
        find(&series, &het, true),
        find(&series, &het, false),
        find(&series, &hom, true),
        find(&series, &hom, false),
    ];
    let i = order[0].snr_index(25.0).ok_or("25 dB not on the desk grid")?;
    for w in order.windows(2) {
        let (a, b) = (w[0], w[1]);
        let tag = format!("{}{} vs {}{}", a.label(), a.cpe_correction, b.label(), b.cpe_correction);
        let slack = a.ber_ci_halfwidth[i] + b.ber_ci_halfwidth[i];
        ensure(a.ber_mean[i] <= b.ber_mean[i] + slack, || {
            format!("BER {tag}: {} > {} + {slack}", a.ber_mean[i], b.ber_mean[i])
        })?;
        ensure(a.evm_rms_percent[i] <= b.evm_rms_percent[i], || {
            format!("EVM {tag}: {} > {}", a.evm_rms_percent[i], b.evm_rms_percent[i])
        })?;
    }
    for cpe in [false, true] {
        let (t, h) = (find(&series, &het, cpe), find(&series, &hom, cpe));
        for (j, &snr) in t.snr_db.iter().enumerate().filter(|(_, &s)| s >= 10.0) {
            ensure(t.ber_mean[j] <= h.ber_mean[j] && t.evm_rms_percent[j] <= h.evm_rms_percent[j], || {
                format!("cpe={cpe}, {snr} dB: heterodyne worse than homodyne")
            })?;
        }
    }
    let ber: Vec<String> = order.iter().map(|s| format!("{:.2e}", s.ber_mean[i])).collect();
    let evm: Vec<String> = order.iter().map(|s| format!("{:.2}", s.evm_rms_percent[i])).collect();
    Ok(format!(
        "25 dB BER [{}], EVM% [{}] (het+CPE, het, hom+CPE, hom)",
        ber.join(", "),
        evm.join(", ")
    ))
}

fn cpe_efficacy() -> Check {
    let plans = [FrequencyPlan::homodyne(70e9).unwrap(), FrequencyPlan::symmetric_heterodyne(70e9).unwrap()];
    let base = ExperimentConfig::desk(plans[0]);
    let series = compare_architectures(&base, &plans, &[false, true]).map_err(|e| e.to_string())?;
    let mut notes = Vec::new();
    for plan in &plans {
        let (off, on) = (find(&series, plan, false), find(&series, plan, true));
        let (mut wins, mut cells) = (0, 0);
        for (i, &snr) in off.snr_db.iter().enumerate() {
            if snr < 15.0 {
                continue;
            }
            for (a, b) in on.cell_evm(i).iter().zip(off.cell_evm(i)) {
                cells += 1;
                if *a <= b {
                    wins += 1;
                }
            }
        }
        let rate = wins as f64 / cells as f64;
        ensure(cells > 0 && rate >= 0.9, || format!("{}: CPE better in {wins}/{cells} cells", plan.label()))?;
        notes.push(format!("{} {wins}/{cells}", plan.label()));
    }
    Ok(notes.join(", "))
}

fn cpe_ici_diagnostic() -> Check {
    for phi in [0.0, 0.7, -2.9] {
        let d = decompose_cpe_ici(&[phi; 256]).map_err(|e| e.to_string())?;
        ensure(d.ici_power == 0.0, || format!("constant {phi}: ici {}", d.ici_power))?;
        ensure((d.cpe.norm() - 1.0).abs() <= 2.0 * f64::EPSILON, || format!("constant {phi}: |cpe| {}", d.cpe.norm()))?;
    }
    let zero = decompose_cpe_ici(&[0.0; 256]).unwrap();
    ensure(zero.cpe == Complex64::new(1.0, 0.0), || format!("zero phase: cpe {}", zero.cpe))?;

    let num = OfdmNumerology::reference();
    let fs = num.sample_rate_hz();
    let n = num.n_subcarriers();
    let shape = PhaseNoisePsd::representative().scale_to_carrier(140e9).unwrap();
    let unit = shape.integrate_variance(fs).unwrap().value;
    let mut means = Vec::new();
    for sigma2 in [0.01, 0.04, 0.16] {
        let psd = shape.with_power_scaled(sigma2 / unit).unwrap();
        let mut sum = 0.0;
        for seed in 0..200u64 {
            let x = synthesize(&psd, n, fs, SeedSpec::new(seed, 9)).map_err(|e| e.to_string())?;
            sum += decompose_cpe_ici(x.samples()).unwrap().ici_power;
        }
        means.push(sum / 200.0);
    }
    ensure(means.windows(2).all(|w| w[1] > w[0]), || format!("mean ICI not increasing: {means:?}"))?;
    Ok(format!("mean ICI {:.3e} < {:.3e} < {:.3e}", means[0], means[1], means[2]))
}

fn csv_of(series: &[MetricSeries]) -> Vec<u8> {
    let mut buf = Vec::new();
    pnlink::output::write_metric_csv(&mut buf, series).unwrap();
    buf
}

fn reproducibility() -> Check {
    let hom = FrequencyPlan::homodyne(140e9).unwrap();
    let het = FrequencyPlan::symmetric_heterodyne(140e9).unwrap();
    let base = ExperimentConfig {
        n_mc_runs: 6,
        n_symbols_per_run: 20,
        ..ExperimentConfig::desk(hom)
    };
    let run = |workers: Option<usize>| {
        let c = ExperimentConfig { workers, ..base.clone() };
        compare_architectures(&c, &[hom, het], &[false, true]).map(|s| csv_of(&s))
    };
    let reference = run(Some(1)).map_err(|e| e.to_string())?;
    for w in [Some(2), Some(4), Some(7), None] {
        let other = run(w).map_err(|e| e.to_string())?;
        ensure(other == reference, || format!("CSV differs at workers {w:?}"))?;
    }
    let psds = OscillatorPsds::shared(PhaseNoisePsd::representative());
    let sweep = |workers: usize| {
        rayon::ThreadPoolBuilder::new().num_threads(workers).build().unwrap().install(|| {
            let s = pnlink::plan::sweep_if_with(140e9, &psds, &base.numerology, 41, VarianceMethod::NumericalIntegral)
                .unwrap();
            let mut buf = Vec::new();
            pnlink::output::write_sweep_csv(&mut buf, &[s]).unwrap();
            buf
        })
    };
    ensure(sweep(1) == sweep(5), || "variance sweep CSV differs across workers".into())?;
    Ok(format!("compare CSV ({} bytes) identical at 1, 2, 4, 7 and all workers", reference.len()))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("1 gamma reduction 30/70 GHz", gamma_reduction, Duration::from_millis(1)),
        ("2 IF sweep U-shape at 70/140 GHz", sweep_u_shape, Duration::from_secs(1)),
        ("3 symmetric split halves variance", symmetric_halving, Duration::from_millis(1)),
        ("4 quadrature vs flat/single-pole oracles", quadrature_oracles, Duration::from_secs(1)),
        ("5 synthesis spectral fidelity", spectral_fidelity, Duration::from_secs(30)),
        ("6 64-QAM AWGN baseline", awgn_baseline, Duration::from_secs(120)),
        ("7 architecture ordering at 140 GHz", desk_ordering, Duration::from_secs(600)),
        ("8 CPE correction efficacy at 70 GHz", cpe_efficacy, Duration::from_secs(300)),
        ("9 CPE/ICI diagnostic", cpe_ici_diagnostic, Duration::from_secs(30)),
        ("10 reproducibility across workers", reproducibility, Duration::MAX),
    ];
    let mut failed = 0;
    for (name, check, budget) in criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        let timing = if budget == Duration::MAX {
            format!("{:.3}s", elapsed.as_secs_f64())
        } else {
            format!("{:.3}s, budget {:.3}s", elapsed.as_secs_f64(), budget.as_secs_f64())
        };
        let outcome = outcome.and_then(|detail| {
            if elapsed > budget {
                Err(format!("{detail}; over runtime budget"))
            } else {
                Ok(detail)
            }
        });
        match outcome {
            Ok(detail) => println!("PASS  criterion {name}: {detail} ({timing})"),
            Err(why) => {
                failed += 1;
                println!("FAIL  criterion {name}: {why} ({timing})");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 10 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
