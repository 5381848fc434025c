use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use serde::Serialize;
use stretchlab::Error;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Usage(String),
    #[error(transparent)]
    Lib(#[from] Error),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Usage(_) => ExitCode::from(2),
            // refusals caused by the requested parameters are configuration errors
            CliError::Lib(
                Error::Domain(_)
                | Error::InvalidDimension { .. }
                | Error::DimensionMismatch { .. }
                | Error::Truncation(_)
                | Error::Grid(_)
                | Error::Stability { .. },
            ) => ExitCode::from(2),
            _ => ExitCode::from(1),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Sidecar written next to every artifact.
#[derive(Serialize)]
struct Sidecar<'a, C: Serialize> {
    artifact: &'a str,
    command: &'a str,
    library: &'static str,
    version: &'static str,
    config: &'a C,
}

/// Per-command output directory; every file gets a `<file>.meta.json`.
pub struct RunDir<'a, C: Serialize> {
    dir: PathBuf,
    command: &'a str,
    config: &'a C,
}

impl<'a, C: Serialize> RunDir<'a, C> {
    pub fn create(root: &Path, command: &'a str, config: &'a C) -> CliResult<Self> {
        let dir = root.join(command);
        fs::create_dir_all(&dir).map_err(|e| CliError::Usage(format!("output directory {} is not writable: {e}", dir.display())))?;
        Ok(RunDir { dir, command, config })
    }

    pub fn path(&self) -> &Path {
        &self.dir
    }

    pub fn write_with<F>(&self, name: &str, body: F) -> CliResult<PathBuf>
    where
        F: FnOnce(&mut dyn Write) -> std::io::Result<()>,
    {
        let path = self.dir.join(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        let mut w = BufWriter::new(File::create(&path)?);
        body(&mut w)?;
        w.flush()?;
        let meta = Sidecar {
            artifact: name,
            command: self.command,
            library: "stretchlab",
            version: env!("CARGO_PKG_VERSION"),
            config: self.config,
        };
        let mut m = BufWriter::new(File::create(self.dir.join(format!("{name}.meta.json")))?);
        serde_json::to_writer_pretty(&mut m, &meta).map_err(Error::from)?;
        writeln!(m)?;
        m.flush()?;
        Ok(path)
    }

    pub fn write_json<T: Serialize>(&self, name: &str, value: &T) -> CliResult<PathBuf> {
        self.write_with(name, |w| {
            serde_json::to_writer_pretty(&mut *w, value).map_err(std::io::Error::other)?;
            writeln!(w)
        })
    }
}

/// In-run assertions; failures go to `failure.json` and exit status 1.
#[derive(Debug, Default, Serialize)]
pub struct Checks {
    pub failures: Vec<Failure>,
}

#[derive(Debug, Serialize)]
pub struct Failure {
    pub check: String,
    pub detail: String,
}

impl Checks {
    pub fn expect(&mut self, ok: bool, check: &str, detail: impl Into<String>) {
        if !ok {
            self.failures.push(Failure { check: check.to_string(), detail: detail.into() });
        }
    }

    pub fn finish<C: Serialize>(self, dir: &RunDir<C>) -> CliResult<ExitCode> {
        let stale = dir.path().join("failure.json");
        if self.failures.is_empty() {
            for p in [stale.clone(), dir.path().join("failure.json.meta.json")] {
                if p.exists() {
                    fs::remove_file(p)?;
                }
            }
            return Ok(ExitCode::SUCCESS);
        }
        dir.write_json("failure.json", &self)?;
        eprintln!("{}", serde_json::to_string(&self).map_err(Error::from)?);
        Ok(ExitCode::from(1))
    }
}

/// Plain CSV with a header row and fixed-precision decimal numbers.
pub fn csv_row(values: &[f64]) -> String {
    values.iter().map(|v| format!("{v:.12e}")).collect::<Vec<_>>().join(",")
}
