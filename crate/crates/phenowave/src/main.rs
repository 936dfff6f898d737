use clap::{Args, Parser, Subcommand};
use phenowave::cli::{cmd_compare, cmd_ibm, cmd_pde, predict_analytic, predict_measured};
use phenowave::config::RunConfig;
use phenowave::error::{Error, Result};
use phenowave::wave::WavePrediction;
use std::path::PathBuf;
use std::process::ExitCode;

/// Lattice and continuum simulations of pressure-driven growth of a
/// phenotypically structured cell population, with travelling-wave
/// analytics and cross-model comparison.
#[derive(Parser)]
#[command(name = "phenowave", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct ConfigSource {
    /// Path to a run config file
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Name of a shipped preset (see `--preset help`)
    #[arg(long, value_name = "NAME")]
    preset: Option<String>,
}

impl ConfigSource {
    fn resolve(&self) -> Result<(RunConfig, Option<&str>)> {
        match (&self.config, &self.preset) {
            (Some(path), None) => Ok((RunConfig::load(path)?, None)),
            (None, Some(name)) => {
                if name == "help" {
                    return Err(Error::Config(format!(
                        "available presets: {}",
                        phenowave::presets::names().join(", ")
                    )));
                }
                Ok((phenowave::presets::load(name)?, Some(name.as_str())))
            }
            _ => unreachable!("clap enforces exactly one source"),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run the stochastic lattice model as a replicate ensemble
    Ibm {
        #[command(flatten)]
        source: ConfigSource,
        /// Override the config's base seed
        #[arg(long)]
        seed: Option<u64>,
        /// Override the config's replicate count
        #[arg(long)]
        replicates: Option<u32>,
        /// Output directory for CSVs and the manifest
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
    },
    /// Run the continuum model
    Pde {
        #[command(flatten)]
        source: ConfigSource,
        /// Output directory for CSVs and the manifest
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
    },
    /// Predict the travelling wave, analytically or from a finished run
    Predict {
        #[command(flatten)]
        source: ConfigSource,
        /// Measure p(0) and band masses from this run directory instead of
        /// solving the rear boundary-value problem
        #[arg(long, value_name = "DIR")]
        from_run: Option<PathBuf>,
        /// Output JSON file (stdout when omitted)
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Compare two runs and optionally an analytic prediction
    Compare {
        /// First run directory (kink and jump audits apply to this one)
        #[arg(long, value_name = "DIR")]
        a: PathBuf,
        /// Second run directory
        #[arg(long, value_name = "DIR")]
        b: PathBuf,
        #[command(flatten)]
        source: ConfigSource,
        /// Prediction JSON written by `predict`
        #[arg(long, value_name = "FILE")]
        prediction: Option<PathBuf>,
        /// Output directory for the report and error CSV
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
    },
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var("PHENOWAVE_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.parse().map_err(|_| {
        Error::Config(format!(
            "PHENOWAVE_THREADS must be a non-negative integer, got {raw:?}"
        ))
    })?;
    if n > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    }
    Ok(())
}

fn load_prediction(path: &PathBuf) -> Result<WavePrediction> {
    let text = std::fs::read_to_string(path)?;
    if let Ok(report) = serde_json::from_str::<phenowave::cli::PredictReport>(&text) {
        return Ok(report.prediction);
    }
    serde_json::from_str(&text)
        .map_err(|e| Error::Format(format!("{}: not a prediction file: {e}", path.display())))
}

fn run(cli: Cli) -> Result<()> {
    configure_threads()?;
    match cli.command {
        Command::Ibm {
            source,
            seed,
            replicates,
            out,
        } => {
            let (mut cfg, preset) = source.resolve()?;
            if let Some(seed) = seed {
                cfg.run.seed = seed;
            }
            if let Some(replicates) = replicates {
                if replicates == 0 {
                    return Err(Error::Config("replicates must be >= 1".into()));
                }
                cfg.run.replicates = replicates;
            }
            let runs = cmd_ibm(&cfg, preset, &out)?;
            eprintln!(
                "wrote {} replicates and the ensemble average to {}",
                runs.len(),
                out.display()
            );
        }
        Command::Pde { source, out } => {
            let (cfg, preset) = source.resolve()?;
            let result = cmd_pde(&cfg, preset, &out)?;
            eprintln!(
                "wrote {} snapshots ({} steps, min dt {:.3e}) to {}",
                result.snapshots.len(),
                result.steps,
                result.min_dt,
                out.display()
            );
        }
        Command::Predict {
            source,
            from_run,
            out,
        } => {
            let (cfg, _) = source.resolve()?;
            let report = match from_run {
                Some(dir) => predict_measured(&phenowave::io::read_run(&dir)?, &cfg)?,
                None => predict_analytic(&cfg)?,
            };
            let text = serde_json::to_string_pretty(&report)
                .map_err(|e| Error::Format(format!("prediction serialization: {e}")))?;
            match out {
                Some(path) => std::fs::write(&path, text + "\n")?,
                None => println!("{text}"),
            }
        }
        Command::Compare {
            a,
            b,
            source,
            prediction,
            out,
        } => {
            let (cfg, _) = source.resolve()?;
            let run_a = phenowave::io::read_run(&a)?;
            let run_b = phenowave::io::read_run(&b)?;
            let pred = prediction.as_ref().map(load_prediction).transpose()?;
            let report = cmd_compare(&run_a, &run_b, &cfg, pred.as_ref(), &out)?;
            eprintln!(
                "speeds {:.4} vs {:.4}; max pressure error {:.3e} (near) / {:.3e} (far); \
                 report in {}",
                report.speed_a.slope,
                report.speed_b.slope,
                report.pressure.max_near,
                report.pressure.max_far,
                out.display()
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
