use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qrf_core::ansatz;
use qrf_core::experiment::{self, BasisSource, ExperimentConfig, GridSpec, SelectionMode};
use qrf_core::Error;

#[derive(Parser)]
#[command(name = "qrf", version, about = "Random quantum-circuit feature maps for linear classification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Download the MNIST files and verify their checksums.
    Fetch {
        #[arg(long, env = experiment::DATA_DIR_ENV)]
        data_dir: Option<PathBuf>,
        /// Base URL, file:// URL or local directory holding the IDX files.
        #[arg(long, default_value = qrf_core::dataio::DEFAULT_MIRROR)]
        mirror: String,
        /// sha256sum-style file with expected checksums of the decompressed files.
        #[arg(long)]
        lockfile: Option<PathBuf>,
    },
    /// Train and evaluate one configuration.
    Run {
        #[command(flatten)]
        opts: ConfigArgs,
        /// Print the full result record as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Evaluate every cell of a hyperparameter grid.
    Grid {
        #[command(flatten)]
        opts: ConfigArgs,
        /// JSON grid specification; missing axes take their defaults.
        #[arg(long)]
        grid: Option<PathBuf>,
        /// Override the basis sizes of the grid.
        #[arg(long, value_delimiter = ',')]
        sizes: Option<Vec<usize>>,
        /// Grid cells run concurrently.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Measure Gaussian random-feature kernel error against the exact RBF kernel.
    KernelCheck {
        #[arg(long, default_value_t = 8)]
        dim: usize,
        #[arg(long, value_delimiter = ',', default_value = "100,1000,10000")]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 1.0)]
        bandwidth: f64,
        #[arg(long, default_value_t = 1000)]
        pairs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the table as CSV here instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Sample a quantum basis and save it, or describe a saved one.
    Basis {
        #[command(flatten)]
        opts: ConfigArgs,
        /// Where to write the sampled basis.
        #[arg(long, conflicts_with = "inspect")]
        save: Option<PathBuf>,
        /// Print a summary of a saved basis file.
        #[arg(long)]
        inspect: Option<PathBuf>,
        /// Include the circuits in the saved file.
        #[arg(long)]
        with_circuits: bool,
    },
}

/// Flags that override fields of the JSON config.
#[derive(Args)]
struct ConfigArgs {
    /// JSON experiment configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, env = experiment::DATA_DIR_ENV)]
    data_dir: Option<PathBuf>,
    #[arg(long)]
    output: Option<PathBuf>,
    /// Two digits, e.g. `3,5`.
    #[arg(long, value_delimiter = ',')]
    digits: Option<Vec<u8>>,
    #[arg(long)]
    features: Option<usize>,
    /// Score features on the whole dataset rather than the training split.
    #[arg(long)]
    pooled_selection: bool,
    /// Keep raw 0..255 pixel values.
    #[arg(long)]
    no_scale: bool,
    #[arg(long)]
    qubits: Option<usize>,
    #[arg(long)]
    layers: Option<usize>,
    #[arg(long)]
    rotation_mean: Option<f64>,
    #[arg(long)]
    rotation_std: Option<f64>,
    #[arg(long)]
    weight_std: Option<f64>,
    #[arg(long)]
    basis_size: Option<usize>,
    /// `quantum`, `raw`, or `gaussian:<bandwidth>`.
    #[arg(long, value_parser = parse_basis)]
    basis: Option<BasisSource>,
    #[arg(long)]
    shots: Option<u64>,
    #[arg(long = "c")]
    reg_c: Option<f64>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long)]
    basis_seed: Option<u64>,
    #[arg(long)]
    split_seed: Option<u64>,
    #[arg(long)]
    shot_seed: Option<u64>,
}

fn parse_basis(s: &str) -> Result<BasisSource, String> {
    match s {
        "quantum" => Ok(BasisSource::Quantum),
        "raw" => Ok(BasisSource::Raw),
        _ => match s.strip_prefix("gaussian:") {
            Some(g) => g
                .parse()
                .map(|bandwidth| BasisSource::Gaussian { bandwidth })
                .map_err(|e| format!("bad bandwidth: {e}")),
            None => Err("expected quantum, raw or gaussian:<bandwidth>".into()),
        },
    }
}

/// Failure with an exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: e.exit_code() as u8,
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: 1,
        message: message.into(),
    }
}

impl ConfigArgs {
    fn resolve(&self) -> Result<ExperimentConfig, Failure> {
        let mut c = match &self.config {
            Some(p) => ExperimentConfig::load(p).map_err(|e| usage(format!("config {}: {e}", p.display())))?,
            None => ExperimentConfig::default(),
        };
        if let Some(v) = &self.data_dir {
            c.data_dir = v.clone();
        }
        if let Some(v) = &self.output {
            c.output_dir = Some(v.clone());
        }
        if let Some(v) = &self.digits {
            match v[..] {
                [a, b] if a != b => c.digits = (a, b),
                _ => return Err(usage("--digits takes two different digits, e.g. 3,5")),
            }
        }
        if self.pooled_selection {
            c.selection = SelectionMode::Pooled;
        }
        if self.no_scale {
            c.scale_pixels = false;
        }
        macro_rules! set {
            ($($f:ident),*) => { $(if let Some(v) = self.$f { c.$f = v; })* };
        }
        set!(features, qubits, layers, rotation_mean, rotation_std, weight_std, basis_size, basis, shots, reg_c, tol, max_iters, basis_seed, split_seed, shot_seed);
        c.validate().map_err(|e| usage(e.to_string()))?;
        Ok(c)
    }
}

fn write_or_print(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure {
            code: 3,
            message: format!("writing {}: {e}", p.display()),
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn execute(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Fetch {
            data_dir,
            mirror,
            lockfile,
        } => {
            let dir = data_dir.unwrap_or_else(experiment::default_data_dir);
            for (name, outcome) in experiment::fetch_data(&dir, &mirror, lockfile.as_deref())? {
                println!("{name}: {outcome:?}");
            }
        }
        Command::Run { opts, json } => {
            let config = opts.resolve()?;
            let r = experiment::run_experiment(&config)?;
            if json {
                println!("{}", serde_json::to_string_pretty(&r).map_err(Error::from)?);
            } else {
                println!(
                    "train accuracy {:.4}  test accuracy {:.4}  ({} / {} points, basis {})",
                    r.train_accuracy, r.test_accuracy, r.train_points, r.test_points, r.basis_fingerprint
                );
            }
        }
        Command::Grid {
            opts,
            grid,
            sizes,
            jobs,
        } => {
            let config = opts.resolve()?;
            let mut spec = match grid {
                Some(p) => {
                    let text = std::fs::read_to_string(&p).map_err(|e| usage(format!("grid {}: {e}", p.display())))?;
                    serde_json::from_str::<GridSpec>(&text).map_err(|e| usage(format!("grid {}: {e}", p.display())))?
                }
                None => GridSpec::default(),
            };
            if let Some(s) = sizes {
                spec.basis_size = s;
            }
            if jobs == 0 {
                return Err(usage("--jobs must be at least 1"));
            }
            let report = experiment::grid_search(&spec, &config, jobs)?;
            print!("{}", report.summary_csv());
        }
        Command::KernelCheck {
            dim,
            sizes,
            bandwidth,
            pairs,
            seed,
            output,
        } => {
            let rows = experiment::kernel_check(dim, &sizes, bandwidth, pairs, seed).map_err(|e| match e {
                Error::InvalidParameter(m) => usage(m),
                e => e.into(),
            })?;
            write_or_print(output.as_deref(), &experiment::kernel_check_csv(&rows))?;
        }
        Command::Basis {
            opts,
            save,
            inspect,
            with_circuits,
        } => {
            if let Some(p) = inspect {
                let b = ansatz::FeatureBasis::load(&p)?;
                println!(
                    "{} vectors of dimension {}, fingerprint {}, circuits {}",
                    b.len(),
                    b.dim(),
                    b.fingerprint(),
                    if b.circuits().is_some() { "included" } else { "absent" }
                );
                println!("{}", serde_json::to_string_pretty(b.params()).map_err(Error::from)?);
                return Ok(());
            }
            let config = opts.resolve()?;
            let mut b = ansatz::sample_basis(&config.ansatz_params())?;
            if !with_circuits {
                b = b.without_circuits();
            }
            println!("sampled {} vectors, fingerprint {}", b.len(), b.fingerprint());
            if let Some(p) = save {
                b.save(&p)?;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
