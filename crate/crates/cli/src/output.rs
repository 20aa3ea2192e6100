use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::sync::OnceLock;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::{json, Value};

use crate::CliError;

/// Process start, the origin of `elapsed_s`.
pub static START: OnceLock<Instant> = OnceLock::new();

/// Collects the artifacts of one command and writes them on [`Output::finish`].
pub struct Output {
    command: &'static str,
    dir: Option<PathBuf>,
    files: Vec<String>,
}

impl Output {
    pub fn new(command: &'static str, dir: Option<PathBuf>) -> Result<Self, CliError> {
        if let Some(d) = &dir {
            std::fs::create_dir_all(d)?;
        }
        Ok(Self { command, dir, files: Vec::new() })
    }

    /// Write a CSV table through `fill`; skipped without an output directory.
    pub fn csv<F>(&mut self, name: &str, fill: F) -> Result<(), CliError>
    where
        F: FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
    {
        let Some(dir) = &self.dir else {
            return Ok(());
        };
        let mut w = BufWriter::new(File::create(dir.join(name))?);
        fill(&mut w)?;
        w.flush()?;
        self.files.push(name.to_string());
        Ok(())
    }

    /// Print the JSON summary and store it next to the tables.
    pub fn finish<T: Serialize>(mut self, result: &T) -> Result<(), CliError> {
        let created = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        let name = format!("{}.json", self.command);
        if self.dir.is_some() {
            self.files.push(name.clone());
        }
        let summary: Value = json!({
            "command": self.command,
            "result": result,
            "files": self.files,
            "meta": {
                "version": env!("CARGO_PKG_VERSION"),
                "created_unix": created,
                "elapsed_s": START.get_or_init(Instant::now).elapsed().as_secs_f64(),
                "threads": rayon::current_num_threads(),
            },
        });
        let text = serde_json::to_string_pretty(&summary)?;
        if let Some(dir) = &self.dir {
            std::fs::write(dir.join(name), format!("{text}\n"))?;
        }
        // a closed pipe on stdout is not an error of the computation
        let _ = writeln!(std::io::stdout().lock(), "{text}");
        Ok(())
    }
}
