//! Command-line front end. Exit status 0 on success, 1 for usage,
//! configuration and I/O errors, 2 when a run detects invariant violations.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use crate::config::ExperimentConfig;
use crate::divergences::{self, BsForm};
use crate::error::{Error, Result};
use crate::linalg;
use crate::runner::{self, RunOptions};
use crate::states::StateFile;

pub const EXIT_OK: u8 = 0;
pub const EXIT_USAGE: u8 = 1;
pub const EXIT_VIOLATION: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "subeth", version, about = "Subsystem eigenstate thermalization experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the experiments named in a config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `out_dir` from the config.
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// `key=value` with a dotted key and a TOML value; repeatable.
        #[arg(long = "override", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        /// Lift the memory cap.
        #[arg(long)]
        allow_large: bool,
        /// Worker threads, 0 for one per core.
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Print divergences between two state files as JSON.
    Divergence {
        /// First argument `σ`.
        a: PathBuf,
        /// Reference state `ρ`.
        b: PathBuf,
        #[arg(long, value_enum, default_value = "all")]
        measure: Measure,
        /// Which closed form of the BS entropy to report.
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=3))]
        form: u8,
    },
    /// Write the ascending spectrum of every N in a config as CSV.
    Spectrum {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long = "override", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        #[arg(long)]
        allow_large: bool,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Measure {
    Umegaki,
    Bs,
    Trace,
    All,
}

fn bs_form(form: u8) -> BsForm {
    match form {
        2 => BsForm::Similarity,
        3 => BsForm::Rescaled,
        _ => BsForm::Sandwich,
    }
}

/// Divergences of `a` relative to `b` as a JSON object.
pub fn divergence_json(a: &StateFile, b: &StateFile, measure: Measure, form: u8) -> Result<Value> {
    let sigma = a.to_density()?;
    let rho = b.to_density()?;
    if sigma.dim() != rho.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            found: sigma.dim(),
        });
    }
    let mut out = Map::new();
    if matches!(measure, Measure::Umegaki | Measure::All) {
        out.insert("umegaki".into(), json!(divergences::umegaki(&sigma, &rho)?));
    }
    if matches!(measure, Measure::Bs | Measure::All) {
        out.insert("bs".into(), json!(divergences::bs_entropy(&sigma, &rho, bs_form(form))?));
    }
    if matches!(measure, Measure::Trace | Measure::All) {
        out.insert("trace".into(), json!(linalg::trace_distance(sigma.matrix(), rho.matrix())?));
    }
    Ok(Value::Object(out))
}

fn execute(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Run {
            config,
            out_dir,
            overrides,
            allow_large,
            threads,
        } => {
            let mut cfg = ExperimentConfig::load(&config, &overrides)?;
            if let Some(t) = threads {
                cfg.threads = t;
            }
            let dir = out_dir.unwrap_or_else(|| cfg.out_dir.clone());
            let manifest = runner::run(&cfg, &dir, RunOptions { allow_large })?;
            for w in &manifest.warnings {
                eprintln!("warning: {w}");
            }
            for e in &manifest.experiments {
                eprintln!(
                    "{}: {} rows, {} violations, {:.2} s",
                    e.name, e.rows, e.violations, e.wall_time_s
                );
            }
            Ok(if manifest.violations > 0 { EXIT_VIOLATION } else { EXIT_OK })
        }
        Command::Divergence { a, b, measure, form } => {
            let v = divergence_json(&StateFile::load(&a)?, &StateFile::load(&b)?, measure, form)?;
            println!("{v}");
            Ok(EXIT_OK)
        }
        Command::Spectrum {
            config,
            out,
            overrides,
            allow_large,
        } => {
            let cfg = ExperimentConfig::load(&config, &overrides)?;
            cfg.check_memory(allow_large)?;
            let rows = runner::spectrum_rows(&cfg)?;
            let dir = match out.parent() {
                Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
                _ => PathBuf::from("."),
            };
            let name = out
                .file_name()
                .ok_or_else(|| Error::InvalidArgument(format!("{} is not a file path", out.display())))?;
            runner::write_csv_atomic(&dir, &name.to_string_lossy(), &rows)?;
            Ok(EXIT_OK)
        }
    }
}

/// Parses `args` and runs the command; errors are printed to stderr.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { EXIT_OK });
        }
    };
    match execute(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}
