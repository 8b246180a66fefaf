//! Library side of the `probmorph` binary: argument parsing, dispatch, and
//! artifact writing. Every command is a pure function of its inputs and the
//! seed, and every artifact is written in canonical form.

pub mod error;
pub mod gp_io;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use probmorph::json::{self, to_canonical_string};
use probmorph::laws::{self, Fault, LawConfig};
use probmorph::scalar::KERNEL_TOL;
use probmorph::{bayes_invert, gp_posterior_predictive, GpModel, InvertOptions, Rational, Scalar};
use serde_json::Value;

pub use error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Backend {
    Rational,
    Float,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Invert a finite Bayes model (`--input`).
    Invert,
    /// Posterior of a supervised model (`--input`) given training pairs (`--data`).
    Posterior,
    /// Predictive label distribution at test inputs (`--test`).
    Predictive,
    /// Gaussian-process regression from CSV data; writes CSV plus `<output>.cov.json`.
    GpPredict,
    /// Run the randomized law suites and report failures.
    CheckLaws,
}

#[derive(Debug, Parser)]
#[command(
    name = "probmorph",
    version,
    about = "Exact Bayesian inversion and supervised learning on finite and Gaussian models"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
    #[arg(long, global = true)]
    pub data: Option<PathBuf>,
    #[arg(long, global = true)]
    pub test: Option<PathBuf>,
    /// Output path; JSON results go to standard output when omitted.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Scalar backend for finite models [default: rational].
    #[arg(long, global = true, value_enum)]
    pub backend: Option<Backend>,
    /// Float comparison tolerance for law checks and inversion verification.
    #[arg(long, global = true)]
    pub tolerance: Option<f64>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, default_value_t = 200)]
    pub trials: usize,
    /// Diagonal jitter added before Gaussian solves.
    #[arg(long, global = true, value_name = "EPS")]
    pub jitter: Option<f64>,
    #[arg(long, global = true, hide = true)]
    pub inject_fault: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub input: Option<PathBuf>,
    pub data: Option<PathBuf>,
    pub test: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub backend: Backend,
    pub tolerance: Option<f64>,
    pub seed: u64,
    pub trials: usize,
    pub jitter: Option<f64>,
    pub fault: Option<Fault>,
}

impl RunConfig {
    pub fn from_cli(cli: Cli) -> Result<Self, CliError> {
        let fault = cli
            .inject_fault
            .as_deref()
            .map(str::parse::<Fault>)
            .transpose()
            .map_err(|e| CliError::Usage(e.to_string()))?;
        let backend = match (cli.command, cli.backend) {
            (Command::GpPredict, Some(Backend::Rational)) => {
                return Err(CliError::Usage(
                    "gp-predict runs on the float backend only".into(),
                ))
            }
            (Command::GpPredict, _) => Backend::Float,
            (_, b) => b.unwrap_or(Backend::Rational),
        };
        let cfg = Self {
            command: cli.command,
            input: cli.input,
            data: cli.data,
            test: cli.test,
            output: cli.output,
            backend,
            tolerance: cli.tolerance,
            seed: cli.seed,
            trials: cli.trials,
            jitter: cli.jitter,
            fault,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        for (flag, v) in [("--tolerance", self.tolerance), ("--jitter", self.jitter)] {
            if let Some(v) = v {
                if !(v.is_finite() && v > 0.0) {
                    return Err(CliError::Usage(format!("{flag} must be a positive number")));
                }
            }
        }
        let needed: &[(&str, &Option<PathBuf>)] = match self.command {
            Command::Invert => &[("--input", &self.input)],
            Command::Posterior => &[("--input", &self.input), ("--data", &self.data)],
            Command::Predictive | Command::GpPredict => &[
                ("--input", &self.input),
                ("--data", &self.data),
                ("--test", &self.test),
            ],
            Command::CheckLaws => &[],
        };
        for (flag, path) in needed {
            match path {
                None => return Err(CliError::Usage(format!("{flag} is required"))),
                Some(p) if !p.is_file() => {
                    return Err(CliError::Usage(format!(
                        "{flag}: no such file {}",
                        p.display()
                    )))
                }
                Some(_) => {}
            }
        }
        if self.command == Command::GpPredict && self.output.is_none() {
            return Err(CliError::Usage("gp-predict requires --output".into()));
        }
        if self.command == Command::CheckLaws && self.trials == 0 {
            return Err(CliError::Usage("--trials must be positive".into()));
        }
        Ok(())
    }
}

/// Parses arguments, runs, reports errors on stderr, and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match RunConfig::from_cli(cli).and_then(|cfg| run(&cfg)) {
        Ok(()) => 0,
        Err(e) => {
            let _ = std::io::stderr().write_all(to_canonical_string(&e.to_json()).as_bytes());
            e.exit_code()
        }
    }
}

pub fn run(cfg: &RunConfig) -> Result<(), CliError> {
    match (cfg.command, cfg.backend) {
        (Command::GpPredict, _) => gp_predict(cfg),
        (Command::CheckLaws, Backend::Rational) => check_laws::<Rational>(cfg),
        (Command::CheckLaws, Backend::Float) => check_laws::<f64>(cfg),
        (_, Backend::Rational) => finite::<Rational>(cfg),
        (_, Backend::Float) => finite::<f64>(cfg),
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn read_json(path: &Option<PathBuf>) -> Result<Value, CliError> {
    let path = path.as_deref().expect("validated");
    Ok(json::parse_value(&read(path)?)?)
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn emit(cfg: &RunConfig, doc: &Value) -> Result<(), CliError> {
    let text = to_canonical_string(doc);
    match &cfg.output {
        Some(path) => write_bytes(path, text.as_bytes()),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|source| CliError::Io {
                path: "<stdout>".into(),
                source,
            }),
    }
}

fn finite<S: Scalar>(cfg: &RunConfig) -> Result<(), CliError> {
    let doc = match cfg.command {
        Command::Invert => {
            let model = json::bayes_model_from_json::<S>(&read_json(&cfg.input)?)?;
            let inv = bayes_invert(&model);
            let tol = cfg.tolerance.unwrap_or(KERNEL_TOL);
            if !probmorph::bayes::verify_inversion_tol(&model, &inv.kernel, tol)? {
                return Err(CliError::Verification(format!(
                    "inversion does not satisfy the joint identity within {tol:e}"
                )));
            }
            json::inversion_to_json(&inv)
        }
        Command::Posterior => {
            let model = json::supervised_model_from_json::<S>(&read_json(&cfg.input)?)?;
            let s = json::training_set_from_json(&read_json(&cfg.data)?)?;
            json::posterior_to_json(&probmorph::posterior(&model, &s)?)
        }
        Command::Predictive => {
            let model = json::supervised_model_from_json::<S>(&read_json(&cfg.input)?)?;
            let s = json::training_set_from_json(&read_json(&cfg.data)?)?;
            let t = json::test_inputs_from_json(&read_json(&cfg.test)?)?;
            json::predictive_to_json(&probmorph::predictive(&model, &s, &t)?, model.labels())
        }
        Command::GpPredict | Command::CheckLaws => unreachable!("dispatched elsewhere"),
    };
    emit(cfg, &doc)
}

/// Covariance artifact path next to the CSV: `pred.csv` becomes `pred.cov.json`.
pub fn covariance_path(output: &Path) -> PathBuf {
    output.with_extension("cov.json")
}

fn gp_predict(cfg: &RunConfig) -> Result<(), CliError> {
    let gp: GpModel = json::parse(&read(cfg.input.as_deref().expect("validated"))?)?;
    let data = gp_io::read_training(cfg.data.as_deref().expect("validated"))?;
    let test = gp_io::read_test(cfg.test.as_deref().expect("validated"))?;
    let opts = cfg
        .jitter
        .map_or_else(InvertOptions::default, InvertOptions::with_jitter);
    let pred = gp_posterior_predictive(&gp, &data, &test, opts)?;
    let output = cfg.output.as_deref().expect("validated");
    write_bytes(output, &gp_io::predictive_csv(&test, &pred)?)?;
    let cov = to_canonical_string(&json::gaussian_to_json(&pred));
    write_bytes(&covariance_path(output), cov.as_bytes())
}

fn check_laws<S: Scalar>(cfg: &RunConfig) -> Result<(), CliError> {
    let defaults = LawConfig::default();
    let law_cfg = LawConfig {
        seed: cfg.seed,
        trials: cfg.trials,
        tolerance: cfg.tolerance.unwrap_or(defaults.tolerance),
        fault: cfg.fault,
        ..defaults
    };
    let report = laws::run::<S>(&law_cfg);
    let doc = serde_json::to_value(&report).expect("law reports are plain data");
    emit(cfg, &doc)?;
    if report.passed() {
        Ok(())
    } else {
        Err(CliError::LawFailure {
            failures: report.total_failures,
        })
    }
}
