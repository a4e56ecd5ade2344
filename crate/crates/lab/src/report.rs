use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use oneway::instance::{serialize_instance, InstanceFile};
use oneway::random::RNG_ALGORITHM;

/// A CSV table with a fixed header.
pub struct Table {
    pub name: &'static str,
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &'static str, header: &[&'static str]) -> Self {
        Self { name, header: header.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    fn render(&self, preamble: &str) -> Result<Vec<u8>> {
        let mut buf = Vec::new();
        writeln!(buf, "{preamble}")?;
        let mut w = csv::Writer::from_writer(buf);
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        Ok(w.into_inner().map_err(|e| anyhow::anyhow!("{}", e.error()))?)
    }
}

/// Result of one command: tables, summary lines and invariant failures.
pub struct Outcome {
    pub command: &'static str,
    pub seed: Option<u64>,
    pub tables: Vec<Table>,
    pub summary: Vec<String>,
    pub failures: Vec<String>,
    pub replay: Option<InstanceFile>,
}

impl Outcome {
    pub fn new(command: &'static str, seed: Option<u64>) -> Self {
        Self { command, seed, tables: Vec::new(), summary: Vec::new(), failures: Vec::new(), replay: None }
    }

    pub fn fail(&mut self, message: String, replay: impl FnOnce() -> InstanceFile) {
        if self.replay.is_none() {
            self.replay = Some(replay());
        }
        self.failures.push(message);
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn preamble(&self) -> String {
        let seed = self.seed.map_or_else(|| "none".to_string(), |s| s.to_string());
        format!("# rng={RNG_ALGORITHM} seed={seed} command={}", self.command)
    }

    /// Writes tables into `out` (or stdout), then the replay file on failure.
    /// Returns the replay path if one was written.
    pub fn emit(&self, out: Option<&Path>) -> Result<Option<PathBuf>> {
        let preamble = self.preamble();
        let mut stdout = std::io::stdout().lock();
        if let Some(dir) = out {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        }
        for table in &self.tables {
            let bytes = table.render(&preamble)?;
            match out {
                Some(dir) => {
                    let path = dir.join(format!("{}.csv", table.name));
                    fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
                }
                None => {
                    writeln!(stdout, "## {}.csv", table.name)?;
                    stdout.write_all(&bytes)?;
                }
            }
        }
        for line in &self.summary {
            writeln!(stdout, "{line}")?;
        }
        let Some(replay) = &self.replay else { return Ok(None) };
        let path = out.unwrap_or(Path::new(".")).join(format!("{}.replay", self.command));
        fs::write(&path, serialize_instance(replay)).with_context(|| format!("writing {}", path.display()))?;
        Ok(Some(path))
    }
}

pub fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}
