use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use numvar_core::harness::output::{write_csv, write_json};
use numvar_core::harness::{
    parse_sequence_arg, run_coefficients, run_energy_sweep, run_paircorr_experiment,
    run_variance_experiment, run_verification_suite, ExperimentConfig, Suite, VerifyOptions,
};
use numvar_core::Error;

const EXIT_VERIFY_FAILED: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_BUDGET: u8 = 3;

/// Number variance and pair correlation experiments for dilated integer
/// sequences mod 1.
#[derive(Parser)]
#[command(name = "numvar", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact number variance for sampled α along a schedule of N.
    Variance(ExperimentArgs),
    /// Pair correlation by the direct and Fourier routes.
    Paircorr(ExperimentArgs),
    /// Additive and difference energy along a schedule of N.
    Energy(ExperimentArgs),
    /// Randomised checks of the analytic lemmas and identities.
    Verify(VerifyArgs),
    /// Fourier coefficients b_k of R² in α.
    Coeffs {
        #[command(flatten)]
        exp: ExperimentArgs,
        #[arg(long, default_value_t = 1, allow_negative_numbers = true)]
        k_min: i64,
        #[arg(long, default_value_t = 32, allow_negative_numbers = true)]
        k_max: i64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Flat `key = value` config file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// monomial:d=D, lacunary:base=B, custom:FILE or custom:a,b,c
    #[arg(long)]
    seq: Option<String>,
    #[arg(long)]
    beta: Option<f64>,
    /// m=A..B (N = m²), m=m1,m2,... or n=N1,N2,...
    #[arg(long)]
    schedule: Option<String>,
    #[arg(long)]
    alphas: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    tol: Option<f64>,
    /// Estimate variances from this many random centres instead.
    #[arg(long)]
    mc: Option<u64>,
    /// Output path; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Args)]
struct VerifyArgs {
    /// Comma-separated subset of lemma1,lemma2,parseval,mean,identity.
    #[arg(long, value_delimiter = ',')]
    suites: Option<Vec<String>>,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Trials per suite, overriding the defaults.
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl ExperimentArgs {
    fn config(&self) -> Result<ExperimentConfig, Error> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::from_file(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(s) = &self.seq {
            cfg.seq = parse_sequence_arg(s, None)?;
        }
        if let Some(s) = &self.schedule {
            cfg.schedule = s.parse()?;
        }
        cfg.beta = self.beta.unwrap_or(cfg.beta);
        cfg.alpha_samples = self.alphas.unwrap_or(cfg.alpha_samples);
        cfg.seed = self.seed.unwrap_or(cfg.seed);
        cfg.delta = self.delta.unwrap_or(cfg.delta);
        cfg.epsilon = self.epsilon.unwrap_or(cfg.epsilon);
        cfg.tol = self.tol.unwrap_or(cfg.tol);
        if self.mc.is_some() {
            cfg.mc_samples = self.mc;
        }
        cfg.validate()?;
        if cfg.outside_regime() {
            eprintln!(
                "warning: beta = {} is outside [0, 1/2); results are exploratory",
                cfg.beta
            );
        }
        Ok(cfg)
    }

    fn sink(&self) -> Result<Box<dyn Write>, Error> {
        open_sink(self.out.as_deref())
    }
}

fn open_sink(path: Option<&Path>) -> Result<Box<dyn Write>, Error> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn emit<T: Serialize>(args: &ExperimentArgs, rows: &[T]) -> Result<(), Error> {
    let mut sink = args.sink()?;
    match args.format {
        Format::Csv => write_csv(&mut sink, rows)?,
        Format::Json => write_json(&mut sink, rows)?,
    }
    sink.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct VarianceOutput<'a> {
    rows: &'a [numvar_core::harness::ExperimentRow],
    summary: &'a [numvar_core::harness::SummaryRow],
}

fn run(cli: Cli) -> Result<u8, Error> {
    match cli.command {
        Command::Variance(args) => {
            let run = run_variance_experiment(&args.config()?)?;
            match args.format {
                Format::Csv => {
                    emit(&args, &run.rows)?;
                    // The per-N summary goes next to the CSV, or to stderr.
                    match &args.out {
                        Some(out) => write_json(
                            File::create(out.with_extension("summary.json"))?,
                            &run.summary,
                        )?,
                        None => write_json(io::stderr().lock(), &run.summary)?,
                    }
                }
                Format::Json => {
                    let mut sink = args.sink()?;
                    write_json(
                        &mut sink,
                        &VarianceOutput {
                            rows: &run.rows,
                            summary: &run.summary,
                        },
                    )?;
                    sink.flush()?;
                }
            }
            Ok(0)
        }
        Command::Paircorr(args) => {
            let rows = run_paircorr_experiment(&args.config()?)?;
            emit(&args, &rows)?;
            Ok(0)
        }
        Command::Energy(args) => {
            let rows = run_energy_sweep(&args.config()?)?;
            emit(&args, &rows)?;
            Ok(0)
        }
        Command::Coeffs { exp, k_min, k_max } => {
            let rows = run_coefficients(&exp.config()?, k_min, k_max)?;
            emit(&exp, &rows)?;
            Ok(0)
        }
        Command::Verify(args) => {
            let suites = match &args.suites {
                Some(names) => names
                    .iter()
                    .map(|s| s.trim().parse())
                    .collect::<Result<Vec<Suite>, _>>()?,
                None => Suite::ALL.to_vec(),
            };
            let report = run_verification_suite(&VerifyOptions {
                suites,
                tol: args.tol,
                seed: args.seed,
                trials: args.trials,
            })?;
            let mut sink = open_sink(args.out.as_deref())?;
            write_json(&mut sink, &report)?;
            sink.flush()?;
            for s in &report.suites {
                eprintln!(
                    "{:<9} {} ({} trials, {} failures, worst {:.3e})",
                    s.suite.name(),
                    if s.passed { "pass" } else { "FAIL" },
                    s.trials,
                    s.failures,
                    s.worst
                );
            }
            Ok(if report.passed { 0 } else { EXIT_VERIFY_FAILED })
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Budget(_) => EXIT_BUDGET,
                _ => EXIT_CONFIG,
            })
        }
    }
}
