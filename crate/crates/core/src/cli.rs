//! Command-line front end. The `pnlink` binary is a thin wrapper around [`run`].
//!
//! Every subcommand computes all of its results before touching the output
//! directory, then writes `metadata.toml` followed by the data files, so a
//! failed run leaves nothing behind.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::config::{preset, ConfigFile, PRESET_NAMES};
use crate::error::Error;
use crate::montecarlo::{compare_architectures, constellation_snapshot, run_experiment, ExperimentConfig, MetricSeries};
use crate::output::{self, Metadata, MetricColumn};
use crate::plan::sweep_if_with;

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

/// Environment variable capping the number of worker threads.
pub const WORKERS_ENV: &str = "PNLINK_WORKERS";

#[derive(Debug, Parser)]
#[command(name = "pnlink", version, about = "Phase-noise impact on homodyne and heterodyne OFDM links")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate the oscillator spectrum in dBc/Hz.
    Psd(CommonArgs),
    /// Heterodyne phase variance against IF placement.
    VarianceSweep(CommonArgs),
    /// BER/EVM against SNR for the configured plan.
    LinkSim(LinkSimArgs),
    /// BER/EVM for several plans with and without CPE correction.
    Compare(CommonArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Experiment file (TOML).
    #[arg(short, long, conflicts_with = "preset")]
    pub config: Option<PathBuf>,
    /// Built-in experiment: desk or full.
    #[arg(long)]
    pub preset: Option<String>,
    #[arg(short, long, default_value = "out")]
    pub output_dir: PathBuf,
    /// Override a config value, e.g. `--set snr_grid=0:10:30` or `--set plan.f_if_hz=50e9`.
    #[arg(long = "set", visible_alias = "overrides", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    /// Also write gnuplot scripts.
    #[arg(long)]
    pub plots: bool,
    /// Worker threads; falls back to PNLINK_WORKERS, then all cores.
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Debug, Args)]
pub struct LinkSimArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Write the phase process of run 0.
    #[arg(long)]
    pub dump_pn: bool,
    /// Write received subcarriers of the first symbol at the highest SNR.
    #[arg(long)]
    pub dump_constellation: bool,
}

#[derive(Debug)]
enum Failure {
    Io(String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl Failure {
    fn exit_code(&self) -> i32 {
        match self {
            Failure::Io(_) => EXIT_IO,
            Failure::Lib(e) if e.is_numerical() => EXIT_NUMERICAL,
            Failure::Lib(_) => EXIT_CONFIG,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Io(m) => write!(f, "i/o error: {m}"),
            Failure::Lib(e) => write!(f, "{e}"),
        }
    }
}

/// Files produced by one subcommand, written only after everything succeeded.
struct Outputs {
    files: Vec<(String, Vec<u8>)>,
}

impl Outputs {
    fn new() -> Self {
        Self { files: Vec::new() }
    }

    fn add(&mut self, name: impl Into<String>, bytes: Vec<u8>) {
        self.files.push((name.into(), bytes));
    }

    fn add_with(&mut self, name: &str, f: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>) {
        let mut buf = Vec::new();
        f(&mut buf).expect("writing to memory");
        self.add(name, buf);
    }

    fn commit(self, dir: &Path, mut meta: Metadata<'_>) -> Result<Vec<PathBuf>, Failure> {
        meta.files = self.files.iter().map(|(n, _)| n.clone()).collect();
        let io = |p: &Path, e: std::io::Error| Failure::Io(format!("{}: {e}", p.display()));
        std::fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
        let mut written = Vec::new();
        let meta_path = dir.join("metadata.toml");
        std::fs::write(&meta_path, meta.to_toml()).map_err(|e| io(&meta_path, e))?;
        written.push(meta_path);
        for (name, bytes) in self.files {
            let p = dir.join(name);
            std::fs::write(&p, bytes).map_err(|e| io(&p, e))?;
            written.push(p);
        }
        Ok(written)
    }
}

fn load_config(args: &CommonArgs) -> Result<ConfigFile, Failure> {
    match (&args.config, &args.preset) {
        (Some(path), _) => Ok(ConfigFile::load(path, &args.set)?),
        (None, Some(name)) => {
            let text = preset(name).ok_or_else(|| {
                Error::Config(format!("unknown preset '{name}' (available: {})", PRESET_NAMES.join(", ")))
            })?;
            Ok(ConfigFile::parse(text, &args.set)?)
        }
        (None, None) => Ok(ConfigFile::parse("", &args.set)?),
    }
}

fn resolve_workers(flag: Option<usize>) -> Result<Option<usize>, Failure> {
    let n = match flag {
        Some(n) => Some(n),
        None => match std::env::var(WORKERS_ENV) {
            Ok(v) if !v.trim().is_empty() => Some(
                v.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::Config(format!("{WORKERS_ENV}='{v}' is not a worker count")))?,
            ),
            _ => None,
        },
    };
    if n == Some(0) {
        return Err(Error::Config("worker count must be at least 1".into()).into());
    }
    Ok(n)
}

fn experiment(cfg: &ConfigFile, workers: Option<usize>) -> Result<ExperimentConfig, Failure> {
    let mut e = cfg.experiment_config()?;
    e.workers = workers;
    Ok(e)
}

fn metric_outputs(out: &mut Outputs, csv: &str, series: &[MetricSeries], plots: bool) {
    out.add_with(csv, |b| output::write_metric_csv(b, series));
    if plots {
        let stem = csv.trim_end_matches(".csv");
        out.add(format!("{stem}_ber.gp"), output::metric_plot_script(csv, series, MetricColumn::Ber).into_bytes());
        out.add(format!("{stem}_evm.gp"), output::metric_plot_script(csv, series, MetricColumn::Evm).into_bytes());
    }
}

fn summarize(series: &[MetricSeries]) {
    for s in series {
        let last = s.snr_db.len() - 1;
        println!(
            "{}{}: BER {:.3e}, EVM {:.2}% at {} dB",
            s.label(),
            if s.cpe_correction { " +CPE" } else { "" },
            s.ber_mean[last],
            s.evm_rms_percent[last],
            s.snr_db[last]
        );
    }
}

fn execute(cli: Cli) -> Result<Vec<PathBuf>, Failure> {
    match cli.command {
        Command::Psd(args) => {
            let cfg = load_config(&args)?;
            let workers = resolve_workers(args.workers)?;
            let reference = cfg.reference_psd()?;
            let rows = output::psd_table(&reference, &cfg.psd_output)?;
            let carrier = cfg.psd_output.carrier_hz.unwrap_or(reference.base_carrier_hz());
            let mut out = Outputs::new();
            out.add_with("psd.csv", |b| output::write_psd_csv(b, &rows));
            if args.plots {
                out.add("psd.gp", output::psd_plot_script("psd.csv", carrier).into_bytes());
            }
            println!("{} offsets at {} GHz", rows.len(), carrier / 1e9);
            out.commit(&args.output_dir, Metadata::new("psd", &cfg, workers))
        }
        Command::VarianceSweep(args) => {
            let cfg = load_config(&args)?;
            let workers = resolve_workers(args.workers)?;
            let f_rf = cfg.sweep_carrier_hz();
            let psds = cfg.psds()?;
            let num = cfg.numerology()?;
            let sweeps = in_workers(workers, || {
                cfg.sweep
                    .methods
                    .iter()
                    .map(|&m| sweep_if_with(f_rf, &psds, &num, cfg.sweep.grid_points, m))
                    .collect::<crate::Result<Vec<_>>>()
            })??;
            let mut out = Outputs::new();
            out.add_with("variance_sweep.csv", |b| output::write_sweep_csv(b, &sweeps));
            if args.plots {
                out.add(
                    "variance_sweep.gp",
                    output::sweep_plot_script("variance_sweep.csv", &sweeps, f_rf).into_bytes(),
                );
            }
            for s in &sweeps {
                println!("{}: minimum at f_IF = {} GHz", s.method, s.argmin_if_hz / 1e9);
            }
            out.commit(&args.output_dir, Metadata::new("variance-sweep", &cfg, workers))
        }
        Command::LinkSim(a) => {
            let args = &a.common;
            let cfg = load_config(args)?;
            let workers = resolve_workers(args.workers)?;
            let exp = experiment(&cfg, workers)?;
            let series = run_experiment(&exp)?;
            let mut out = Outputs::new();
            metric_outputs(&mut out, "link_sim.csv", std::slice::from_ref(&series), args.plots);
            if a.dump_pn {
                let pn = exp.phase_process(0)?;
                out.add_with("phase_noise_run0.csv", |b| pn.write_csv(b));
            }
            if a.dump_constellation {
                let last = exp.snr_grid_db.len() - 1;
                let frame = constellation_snapshot(&exp, last)?;
                out.add_with("constellation.csv", |b| frame.write_csv(b));
            }
            summarize(std::slice::from_ref(&series));
            let mut meta = Metadata::new("link-sim", &cfg, workers);
            meta.run = Some(series.metadata.clone());
            out.commit(&args.output_dir, meta)
        }
        Command::Compare(args) => {
            let cfg = load_config(&args)?;
            let workers = resolve_workers(args.workers)?;
            let exp = experiment(&cfg, workers)?;
            let series = compare_architectures(&exp, &cfg.compare_plans(), &cfg.compare.cpe_modes)?;
            let mut out = Outputs::new();
            metric_outputs(&mut out, "compare.csv", &series, args.plots);
            summarize(&series);
            let mut meta = Metadata::new("compare", &cfg, workers);
            meta.run = series.first().map(|s| s.metadata.clone());
            out.commit(&args.output_dir, meta)
        }
    }
}

fn in_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, Failure> {
    match workers {
        None => Ok(f()),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map(|p| p.install(f))
            .map_err(|e| Failure::Io(format!("cannot start workers: {e}"))),
    }
}

/// Parse `args` (including the program name) and run. Returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(paths) => {
            for p in paths {
                println!("wrote {}", p.display());
            }
            EXIT_OK
        }
        Err(f) => {
            eprintln!("pnlink: {f}");
            f.exit_code()
        }
    }
}
