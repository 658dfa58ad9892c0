//! Batch front end for `surrogate-ic`: reads a JSON configuration and CSV
//! data, runs one of the analysis modes and writes CSV and JSON results.

pub mod config;
mod modes;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;

pub use config::{Args, Config, Settings};

pub(crate) const TOY_KIND: &str = "toy-regression";

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, config syntax or config values.
    #[error("{0}")]
    Config(String),
    /// Unreadable, malformed or unusable input data.
    #[error("{0}")]
    Data(String),
    #[error("{path}: {source}")]
    Output {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Solver(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Data(_) => 3,
            CliError::Output { .. } | CliError::Solver(_) => 1,
        }
    }
}

/// What a run produced.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    /// Output files in the order they were written, relative to the output
    /// directory.
    pub files: Vec<String>,
    /// Whether every continuation run converged at its last sharpness.
    pub converged: bool,
}

/// Parses `argv` and runs; returns the process exit code.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    use clap::Parser;
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(args) {
        Ok(outcome) => {
            if !outcome.converged {
                eprintln!("warning: at least one run did not converge; see summary.json");
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(args: Args) -> Result<RunOutcome, CliError> {
    let settings = Settings::from_args(args)?;
    run_settings(&settings)
}

/// Runs the configuration file at `config`, writing into `out`.
pub fn run_config(config: &Path, out: &Path) -> Result<RunOutcome, CliError> {
    use clap::Parser;
    let args = Args::parse_from([
        "surrogate".as_ref(),
        "--config".as_ref(),
        config.as_os_str(),
        "--out".as_ref(),
        out.as_os_str(),
    ]);
    run(args)
}

pub fn run_settings(settings: &Settings) -> Result<RunOutcome, CliError> {
    let mode = settings
        .config
        .mode
        .as_deref()
        .ok_or_else(|| CliError::Config("no mode given; set `mode` in the config or pass --mode".into()))?;
    modes::weight_and_family(settings)?;
    let mut out = Output::new(&settings.out)?;
    let converged = match mode {
        "select" => modes::select(settings, &mut out)?,
        "cluster" => modes::cluster(settings, &mut out)?,
        "oracle-subset" => modes::oracle_subset(settings, &mut out)?,
        "oracle-partition" => modes::oracle_partition(settings, &mut out)?,
        "surface" => modes::surface(settings, &mut out)?,
        other => {
            return Err(settings.error(
                "mode",
                format!("unknown mode `{other}`; expected select, cluster, oracle-subset, oracle-partition or surface"),
            ))
        }
    };
    Ok(RunOutcome {
        files: out.files,
        converged,
    })
}

pub(crate) struct Output {
    dir: PathBuf,
    files: Vec<String>,
}

impl Output {
    fn new(dir: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir).map_err(|source| CliError::Output {
            path: dir.to_path_buf(),
            source,
        })?;
        Ok(Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    /// Creates `name` and hands a buffered writer to `fill`.
    pub(crate) fn write<F>(&mut self, name: &str, fill: F) -> Result<(), CliError>
    where
        F: FnOnce(&mut BufWriter<File>) -> Result<(), surrogate_ic::IoError>,
    {
        let path = self.dir.join(name);
        let wrap = |e: std::io::Error| CliError::Output {
            path: path.clone(),
            source: e,
        };
        let mut w = BufWriter::new(File::create(&path).map_err(wrap)?);
        fill(&mut w).map_err(|e| match e {
            surrogate_ic::IoError::Io(e) => wrap(e),
            other => wrap(std::io::Error::other(other.to_string())),
        })?;
        w.flush().map_err(wrap)?;
        self.files.push(name.to_string());
        Ok(())
    }

    pub(crate) fn write_json<T: serde::Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        self.write(name, |w| {
            serde_json::to_writer_pretty(&mut *w, value).map_err(std::io::Error::from)?;
            w.write_all(b"\n")?;
            Ok(())
        })
    }
}
