// SPDX-License-Identifier: MIT OR Apache-2.0

//! Result tables: classifier × RFE × configuration, as JSON or CSV.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{EvalResult, TransferResult};
use crate::error::Error;

pub const REPORT_FORMAT: &str = "chatterkit-report";
pub const REPORT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
}

impl ReportFormat {
    /// `.csv` selects CSV; anything else is JSON.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("csv") => ReportFormat::Csv,
            _ => ReportFormat::Json,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRow {
    pub config: String,
    pub classifier: String,
    pub rfe: bool,
    pub protocol: String,
    pub seed: u64,
    pub mean_train: f64,
    pub std_train: f64,
    pub mean_test: f64,
    pub std_test: f64,
    pub train_accuracies: Vec<f64>,
    pub test_accuracies: Vec<f64>,
    /// Highest `mean_test` within its configuration.
    pub best: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferRow {
    pub source_config: String,
    pub target_config: String,
    pub classifier: String,
    pub rfe: bool,
    pub seed: u64,
    pub train_accuracy: f64,
    pub test_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub format: String,
    pub version: u32,
    pub evaluations: Vec<EvalRow>,
    pub transfers: Vec<TransferRow>,
}

impl Default for Report {
    fn default() -> Self {
        Report {
            format: REPORT_FORMAT.into(),
            version: REPORT_VERSION,
            evaluations: Vec::new(),
            transfers: Vec::new(),
        }
    }
}

impl Report {
    pub fn push_eval(&mut self, config: &str, r: &EvalResult) {
        self.evaluations.push(EvalRow {
            config: config.to_string(),
            classifier: r.classifier.short_name().to_string(),
            rfe: r.use_rfe,
            protocol: r.protocol.describe(),
            seed: r.seed,
            mean_train: r.mean_train,
            std_train: r.std_train,
            mean_test: r.mean_test,
            std_test: r.std_test,
            train_accuracies: r.per_rep.iter().map(|p| p.train_accuracy).collect(),
            test_accuracies: r.per_rep.iter().map(|p| p.test_accuracy).collect(),
            best: false,
        });
        self.mark_best();
    }

    pub fn push_transfer(&mut self, t: &TransferResult) {
        self.transfers.push(TransferRow {
            source_config: t.source_config.clone(),
            target_config: t.target_config.clone(),
            classifier: t.classifier.short_name().to_string(),
            rfe: t.use_rfe,
            seed: t.seed,
            train_accuracy: t.train_accuracy,
            test_accuracy: t.test_accuracy,
        });
    }

    /// Flags the first row with the maximal `mean_test` in each configuration.
    pub fn mark_best(&mut self) {
        for r in &mut self.evaluations {
            r.best = false;
        }
        let mut configs: Vec<String> = self.evaluations.iter().map(|r| r.config.clone()).collect();
        configs.dedup();
        for c in configs {
            let mut best: Option<usize> = None;
            for (i, r) in self.evaluations.iter().enumerate() {
                if r.config == c && best.map_or(true, |b| r.mean_test > self.evaluations[b].mean_test) {
                    best = Some(i);
                }
            }
            if let Some(b) = best {
                self.evaluations[b].best = true;
            }
        }
    }

    pub fn to_json(&self) -> Result<String, Error> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(s: &str) -> Result<Self, Error> {
        Ok(serde_json::from_str(s)?)
    }

    /// One flat table; transfer rows carry their single accuracies in the
    /// mean columns with zero spread.
    pub fn to_csv(&self) -> String {
        let mut s = String::from(
            "kind,config,target_config,classifier,rfe,protocol,mean_train,std_train,mean_test,std_test,best\n",
        );
        for r in &self.evaluations {
            let _ = writeln!(
                s,
                "eval,{},,{},{},{},{},{},{},{},{}",
                r.config, r.classifier, r.rfe, r.protocol, r.mean_train, r.std_train, r.mean_test, r.std_test, r.best
            );
        }
        for t in &self.transfers {
            let _ = writeln!(
                s,
                "transfer,{},{},{},{},transfer,{},0,{},0,false",
                t.source_config, t.target_config, t.classifier, t.rfe, t.train_accuracy, t.test_accuracy
            );
        }
        s
    }
}

impl EvalResult {
    /// `mean_train,std_train,mean_test,std_test` and one data line.
    pub fn summary_csv(&self) -> String {
        format!(
            "mean_train,std_train,mean_test,std_test\n{},{},{},{}\n",
            self.mean_train, self.std_train, self.mean_test, self.std_test
        )
    }
}

/// Writes through a temporary file in the destination directory and renames
/// it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), Error> {
    let io_err = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err)?;
    tmp.write_all(bytes).map_err(io_err)?;
    tmp.as_file().sync_all().map_err(io_err)?;
    tmp.persist(path).map_err(|e| io_err(e.error))?;
    Ok(())
}

pub fn emit_report(report: &Report, path: &Path, format: ReportFormat) -> Result<(), Error> {
    let body = match format {
        ReportFormat::Json => report.to_json()?,
        ReportFormat::Csv => report.to_csv(),
    };
    write_atomic(path, body.as_bytes())
}
