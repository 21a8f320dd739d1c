use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use risalign::linalg::gram_eigenvalues;
use risalign::spectral::asymptotic_spectrum;
use risalign_sim::bench::{bench_runtime, BenchSettings};
use risalign_sim::config::{DimsSection, KSection, Overrides, RmoSection};
use risalign_sim::experiment::{default_workers, run_experiment, trial_rng};
use risalign_sim::output::{rows_csv, write_atomic, write_result};
use risalign_sim::spec::{db_to_linear, ArrangementPolicy, Csi, Method, Preset, Task};
use risalign_sim::{validate, HarnessError};

#[derive(Parser)]
#[command(name = "risalign", version, about = "1-bit RIS configuration experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Predicted (and optionally sampled) eigenvalues of an N_S x N_T Ricean channel.
    Spectrum(SpectrumArgs),
    /// Channel-gain trials: sign alignment vs RMO vs lower bound.
    Gain(RunArgs),
    /// Capacity trials: W-SA vs RMO (exact and surrogate) vs lower bound.
    Capacity(RunArgs),
    /// Run a figure preset and write CSV + JSON.
    Figure {
        /// fig1a, fig1b, fig1c, fig2a, fig2b or fig2c
        preset: Preset,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Runtime table for the runtime-gain or runtime-capacity preset.
    BenchRuntime {
        /// runtime-gain or runtime-capacity
        preset: Preset,
        /// Untimed calls before sampling
        #[arg(long, default_value_t = 3)]
        warmups: usize,
        /// Timed samples per method; the median is reported
        #[arg(long, default_value_t = 5)]
        samples: usize,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Fast invariant checks (sign-alignment oracle, gradients, Laguerre roots, waterfilling).
    Validate {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args, Clone, Default)]
struct RunArgs {
    /// TOML config file; flags override its values
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Base seed (64-bit)
    #[arg(long)]
    seed: Option<u64>,
    /// Monte Carlo trials per grid point
    #[arg(long)]
    trials: Option<usize>,
    /// Output directory; CSV goes to stdout when omitted (gain, capacity)
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Multiplier on the preset's RIS sizes
    #[arg(long, conflicts_with = "paper")]
    scale: Option<f64>,
    /// Use the original (slow) parameter grid
    #[arg(long)]
    paper: bool,
    /// Worker threads
    #[arg(long, env = "RISALIGN_THREADS")]
    threads: Option<usize>,
    /// RIS element counts N_S (comma separated)
    #[arg(long = "n-ris", value_delimiter = ',')]
    n_ris: Option<Vec<usize>>,
    /// Transmit antennas N_T
    #[arg(long)]
    nt: Option<usize>,
    /// Receive antennas N_R
    #[arg(long)]
    nr: Option<usize>,
    /// Ricean K-factor in dB: one value for both links or `K_T,K_R`
    #[arg(long = "k-db", value_delimiter = ',', allow_hyphen_values = true)]
    k_db: Option<Vec<f64>>,
    /// Symmetric K-factor sweep in dB (comma separated)
    #[arg(long = "k-sweep-db", value_delimiter = ',', allow_hyphen_values = true, conflicts_with = "k_db")]
    k_sweep_db: Option<Vec<f64>>,
    /// SNR in dB
    #[arg(long = "snr-db", allow_hyphen_values = true)]
    snr_db: Option<f64>,
    /// Subset of sa,wsa,rmo,rmo-surrogate,lb
    #[arg(long, value_delimiter = ',')]
    methods: Option<Vec<Method>>,
    /// Element layout for W-SA: contiguous, interleaved or random
    #[arg(long)]
    arrangement: Option<ArrangementPolicy>,
    /// Singular values used by W-SA's allocation: statistical or instantaneous
    #[arg(long, value_parser = parse_csi)]
    csi: Option<Csi>,
    /// RMO iteration cap
    #[arg(long = "rmo-max-iters")]
    rmo_max_iters: Option<usize>,
}

fn parse_csi(s: &str) -> Result<Csi, String> {
    match s {
        "statistical" => Ok(Csi::Statistical),
        "instantaneous" => Ok(Csi::Instantaneous),
        _ => Err(format!("unknown CSI mode `{s}`")),
    }
}

#[derive(Args)]
struct SpectrumArgs {
    /// RIS elements N_S
    #[arg(long = "n-ris")]
    n_ris: usize,
    /// Array size N_T
    #[arg(long)]
    nt: usize,
    /// Ricean K-factor in dB
    #[arg(long = "k-db", allow_hyphen_values = true)]
    k_db: f64,
    /// Sampled channels to average (0 prints predictions only)
    #[arg(long, default_value_t = 0)]
    trials: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Output directory; stdout when omitted
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

impl RunArgs {
    fn overrides(&self) -> Result<Overrides, HarnessError> {
        let flags = Overrides {
            preset: None,
            seed: self.seed,
            trials: self.trials,
            scale: self.scale,
            paper: self.paper.then_some(true),
            threads: self.threads,
            out: self.out.clone(),
            snr_db: self.snr_db,
            methods: self.methods.clone(),
            arrangement: self.arrangement,
            csi: self.csi,
            dims: DimsSection {
                n_ris: self.n_ris.clone(),
                n_t: self.nt,
                n_r: self.nr,
            },
            k: KSection {
                k_db: self.k_db.clone(),
                sweep_db: self.k_sweep_db.clone(),
            },
            rmo: RmoSection {
                max_iters: self.rmo_max_iters,
                ..Default::default()
            },
        };
        match &self.config {
            Some(path) => Ok(flags.over(&Overrides::load(path)?)),
            None => Ok(flags),
        }
    }
}

fn emit(bytes: &[u8], out: Option<&PathBuf>, name: &str) -> Result<(), HarnessError> {
    match out {
        Some(dir) => {
            let path = dir.join(name);
            write_atomic(&path, bytes)?;
            println!("wrote {}", path.display());
        }
        None => std::io::stdout().write_all(bytes)?,
    }
    Ok(())
}

fn run_preset(run: &RunArgs, preset: Preset, task: Option<Task>, default_out: Option<&str>) -> Result<(), HarnessError> {
    let merged = run.overrides()?;
    let mut spec = merged.build(preset)?;
    if let Some(task) = task {
        spec.task = task;
        if task == Task::Capacity && merged.methods.is_none() {
            spec.methods = vec![Method::Wsa, Method::Rmo, Method::RmoSurrogate, Method::Lb];
        }
    }
    if spec.out.is_none() {
        spec.out = default_out.map(PathBuf::from);
    }
    let workers = merged.threads.unwrap_or_else(default_workers);
    let result = run_experiment(&spec, workers)?;
    match &spec.out {
        Some(dir) => {
            let files = write_result(&result, dir, spec.preset.name(), &merged)?;
            println!("wrote {}", files.rows.display());
            println!("wrote {}", files.summary.display());
            println!("wrote {}", files.sidecar.display());
        }
        None => std::io::stdout().write_all(&rows_csv(&result)?)?,
    }
    if result.metadata.failed_trials > 0 {
        eprintln!("warning: {} trial(s) failed; see the error column", result.metadata.failed_trials);
    }
    Ok(())
}

fn spectrum(args: &SpectrumArgs) -> Result<(), HarnessError> {
    let k = db_to_linear(args.k_db);
    let predicted = asymptotic_spectrum(args.n_ris, args.nt, k)?;
    let mut empirical = vec![0.0; args.nt];
    for t in 0..args.trials {
        let mut rng = trial_rng(args.seed, 0, t);
        let los = risalign::channel::LosSpec::random(
            risalign::geometry::UpaGeometry::near_square(args.nt)?,
            risalign::geometry::UpaGeometry::near_square(args.n_ris)?,
            &mut rng,
        );
        let h = risalign::channel::sample_ricean(args.n_ris, args.nt, k, &los, &mut rng)?.matrix;
        for (e, l) in empirical.iter_mut().zip(gram_eigenvalues(&h)) {
            *e += l / args.trials as f64;
        }
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| HarnessError::Io(std::io::Error::other(e));
    w.write_record(["index", "predicted", "empirical_mean"]).map_err(io)?;
    for (i, p) in predicted.predicted_sq_singular_values.iter().enumerate() {
        let e = if args.trials > 0 { empirical[i].to_string() } else { String::new() };
        w.write_record([(i + 1).to_string(), p.to_string(), e]).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| HarnessError::Io(e.into_error()))?;
    emit(&bytes, args.out.as_ref(), "spectrum.csv")
}

fn dispatch(cli: Cli) -> Result<bool, HarnessError> {
    match cli.command {
        Command::Spectrum(args) => spectrum(&args)?,
        Command::Gain(run) => run_preset(&run, Preset::Custom, Some(Task::Gain), None)?,
        Command::Capacity(run) => run_preset(&run, Preset::Custom, Some(Task::Capacity), None)?,
        Command::Figure { preset, run } => {
            if preset.is_runtime() || preset == Preset::Custom {
                return Err(HarnessError::Spec(format!("`{preset}` is not a figure preset")));
            }
            run_preset(&run, preset, None, Some("results"))?;
        }
        Command::BenchRuntime {
            preset,
            warmups,
            samples,
            run,
        } => {
            if !preset.is_runtime() {
                return Err(HarnessError::Spec(format!("`{preset}` is not a runtime preset")));
            }
            let merged = run.overrides()?;
            let spec = merged.build(preset)?;
            let settings = BenchSettings {
                warmups,
                samples,
                ..Default::default()
            };
            let table = bench_runtime(&spec, &settings)?;
            emit(&table.to_csv()?, spec.out.as_ref(), &format!("{}.csv", preset.name()))?;
        }
        Command::Validate { seed } => {
            let checks = validate::run_all(seed);
            for c in &checks {
                println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            return Ok(checks.iter().all(|c| c.passed));
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("").trim_start_matches("error: ");
            eprintln!("error: code=usage message={first}");
            return ExitCode::from(2);
        }
    };
    match dispatch(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: code={} message={}", e.code(), e.to_string().replace('\n', " "));
            ExitCode::from(1)
        }
    }
}
