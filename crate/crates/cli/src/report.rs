use std::fmt::Write as _;
use std::path::Path;

use anyhow::{Context, Result};
use rsv_core::variations::Check;
use serde::Serialize;

use crate::config::Format;

/// A failed embedded assertion, as written to `<command>.failures.json`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Failure {
    pub check: String,
    pub value: f64,
    pub reference: f64,
    pub tolerance: f64,
    pub detail: String,
}

#[derive(Debug, Clone, Default)]
pub struct Report {
    pub command: String,
    /// `key = value` lines.
    pub kv: String,
    /// Tab-separated table with a header row; empty means the kv lines are
    /// tabulated instead.
    pub table: String,
    pub failures: Vec<Failure>,
}

impl Report {
    pub fn new(command: &str) -> Self {
        Self { command: command.into(), ..Self::default() }
    }

    pub fn line(&mut self, key: &str, value: impl std::fmt::Display) {
        let _ = writeln!(self.kv, "{key} = {value}");
    }

    pub fn num(&mut self, key: &str, value: f64) {
        self.line(key, format!("{value:.17e}"));
    }

    /// Records a core check line and its failure, if any.
    pub fn check(&mut self, c: &Check) {
        let status = if c.pass { "pass" } else { "FAIL" };
        self.line(&format!("check.{}", c.name), format!("{status} {:.17e} {:.17e}", c.value, c.reference));
        if !c.pass {
            self.failures.push(Failure {
                check: c.name.clone(),
                value: c.value,
                reference: c.reference,
                tolerance: c.tolerance,
                detail: if c.one_sided { "value below reference - tolerance".into() } else { "|value - reference| > tolerance".into() },
            });
        }
    }

    /// Adopts already formatted core check lines from `kv` and the failures
    /// from `checks`.
    pub fn absorb(&mut self, kv: &str, checks: &[Check]) {
        self.kv.push_str(kv);
        for c in checks.iter().filter(|c| !c.pass) {
            self.failures.push(Failure {
                check: c.name.clone(),
                value: c.value,
                reference: c.reference,
                tolerance: c.tolerance,
                detail: String::new(),
            });
        }
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Kv => self.kv.clone(),
            Format::Table if !self.table.is_empty() => self.table.clone(),
            Format::Table => {
                let mut out = String::from("key\tvalue\n");
                for line in self.kv.lines() {
                    if let Some((k, v)) = line.split_once(" = ") {
                        let _ = writeln!(out, "{k}\t{v}");
                    }
                }
                out
            }
        }
    }

    pub fn failures_json(&self) -> String {
        serde_json::to_string_pretty(&self.failures).expect("failures serialize") + "\n"
    }

    /// Writes one file per format, plus the failure list when nonempty.
    pub fn write(&self, dir: &Path, formats: &[Format]) -> Result<()> {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        for &f in formats {
            let path = dir.join(format!("{}.{}", self.command, f.extension()));
            std::fs::write(&path, self.render(f)).with_context(|| format!("writing {}", path.display()))?;
        }
        let path = dir.join(format!("{}.failures.json", self.command));
        if self.failures.is_empty() {
            if path.exists() {
                std::fs::remove_file(&path).with_context(|| format!("removing stale {}", path.display()))?;
            }
        } else {
            std::fs::write(&path, self.failures_json()).with_context(|| format!("writing {}", path.display()))?;
        }
        Ok(())
    }
}
