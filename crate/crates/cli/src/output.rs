//! Run directory bookkeeping: output files, manifest and error records.

use std::path::{Path, PathBuf};
use std::time::Instant;

use galmax::Error;
use serde::Serialize;

/// Collects the files a subcommand writes so the manifest can list them.
pub struct RunDir {
    root: PathBuf,
    outputs: Vec<String>,
    start: Instant,
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    library_version: &'static str,
    subcommand: &'a str,
    seed: u64,
    threads: usize,
    /// Effective config; `config.toml` holds the same data as TOML.
    config: serde_json::Value,
    config_file: &'static str,
    /// Command line that regenerates every output from `config.toml`.
    regenerate: String,
    outputs: &'a [String],
    wall_time_s: f64,
}

#[derive(Debug, Serialize)]
struct ErrorRecord<'a> {
    status: &'static str,
    subcommand: &'a str,
    kind: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    path: Option<&'a str>,
    message: String,
}

impl RunDir {
    pub fn create(root: &Path) -> Result<Self, Error> {
        std::fs::create_dir_all(root)?;
        // a stale record from an earlier failed run would contradict this one
        let _ = std::fs::remove_file(root.join("error.json"));
        Ok(Self {
            root: root.to_path_buf(),
            outputs: Vec::new(),
            start: Instant::now(),
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    /// Records `name` (relative to the run directory) as an output.
    pub fn record(&mut self, name: impl Into<String>) {
        self.outputs.push(name.into());
    }

    pub fn write(&mut self, name: &str, text: &str) -> Result<(), Error> {
        std::fs::write(self.path(name), text)?;
        self.record(name);
        Ok(())
    }

    /// Writes `config.toml` and `manifest.json`.
    pub fn finish<C: Serialize>(self, subcommand: &str, seed: u64, config: &C) -> Result<(), Error> {
        let text = toml::to_string(config).expect("config serializes");
        std::fs::write(self.path("config.toml"), text)?;
        let manifest = Manifest {
            tool: env!("CARGO_BIN_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            library_version: galmax::VERSION,
            subcommand,
            seed,
            threads: rayon::current_num_threads(),
            config: serde_json::to_value(config).expect("config serializes"),
            config_file: "config.toml",
            regenerate: format!("galmax --out {} {subcommand} --scenario {}", self.root.display(), self.path("config.toml").display()),
            outputs: &self.outputs,
            wall_time_s: self.start.elapsed().as_secs_f64(),
        };
        let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        std::fs::write(self.path("manifest.json"), json + "\n")?;
        Ok(())
    }
}

/// Exit status 2 for rejected input, 1 for failures while running.
pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config { .. }
        | Error::Cfl { .. }
        | Error::Superluminal { .. }
        | Error::InvalidGrid(_)
        | Error::InvalidConstants(_)
        | Error::CoincidentCharges => 2,
        _ => 1,
    }
}

/// Prints the JSON error record on stderr and, when possible, into `<out>/error.json`.
pub fn report_error(subcommand: &str, out: Option<&Path>, e: &Error) {
    let record = ErrorRecord {
        status: "error",
        subcommand,
        kind: e.kind(),
        path: match e {
            Error::Config { path, .. } => Some(path.as_str()),
            _ => None,
        },
        message: e.to_string(),
    };
    let json = serde_json::to_string(&record).expect("record serializes");
    eprintln!("{json}");
    if let Some(dir) = out {
        if std::fs::create_dir_all(dir).is_ok() {
            let _ = std::fs::write(dir.join("error.json"), json + "\n");
        }
    }
}
