//! Contracts, data tables and the JSON report.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::config::RunConfig;
use crate::error::CliError;

/// How a measured value is compared with its bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// `measured ≤ bound`.
    AtMost,
    /// `measured > bound`.
    Above,
    /// `measured == bound`.
    Equals,
}

/// One declared check of a run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Contract {
    pub name: String,
    pub passed: bool,
    pub measured: f64,
    pub relation: Relation,
    pub bound: f64,
}

impl Contract {
    fn new(name: impl Into<String>, measured: f64, relation: Relation, bound: f64) -> Self {
        let passed = match relation {
            Relation::AtMost => measured <= bound,
            Relation::Above => measured > bound,
            Relation::Equals => measured == bound,
        };
        Self {
            name: name.into(),
            passed,
            measured,
            relation,
            bound,
        }
    }

    pub fn at_most(name: impl Into<String>, measured: f64, bound: f64) -> Self {
        Self::new(name, measured, Relation::AtMost, bound)
    }

    pub fn above(name: impl Into<String>, measured: f64, bound: f64) -> Self {
        Self::new(name, measured, Relation::Above, bound)
    }

    pub fn equals(name: impl Into<String>, measured: f64, bound: f64) -> Self {
        Self::new(name, measured, Relation::Equals, bound)
    }

    /// `|measured − target| ≤ half_width`, recorded as a deviation.
    pub fn within(name: impl Into<String>, measured: f64, target: f64, half_width: f64) -> Self {
        Self::at_most(name, (measured - target).abs(), half_width)
    }
}

/// A CSV table with a header row.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    /// File name without extension.
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Self {
            name: name.into(),
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push<I: IntoIterator<Item = String>>(&mut self, row: I) {
        let row: Vec<String> = row.into_iter().collect();
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    fn write(&self, dir: &Path) -> Result<PathBuf, CliError> {
        let path = dir.join(format!("{}.csv", self.name));
        let mut w = csv::Writer::from_path(&path).map_err(|e| CliError::Internal(e.to_string()))?;
        w.write_record(&self.header)
            .map_err(|e| CliError::Internal(e.to_string()))?;
        for r in &self.rows {
            w.write_record(r)
                .map_err(|e| CliError::Internal(e.to_string()))?;
        }
        w.flush()?;
        Ok(path)
    }
}

/// Result of one pipeline before it is written out.
#[derive(Clone, Debug, Default)]
pub struct Outcome {
    pub contracts: Vec<Contract>,
    /// Pipeline-specific results.
    pub results: serde_json::Map<String, Value>,
    pub tables: Vec<Table>,
    /// Extra documents `(file name, contents)`.
    pub documents: Vec<(String, String)>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.contracts.iter().all(|c| c.passed)
    }

    pub fn result(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).expect("results serialize");
        self.results.insert(key.to_string(), v);
    }
}

#[derive(Serialize)]
struct Versions {
    #[serde(rename = "beltrami-cli")]
    cli: &'static str,
    #[serde(rename = "beltrami-core")]
    core: &'static str,
    #[serde(rename = "beltrami-numerics")]
    numerics: &'static str,
}

#[derive(Serialize)]
struct ReportDoc<'a> {
    command: &'a str,
    mode: &'a str,
    seed: u64,
    passed: bool,
    contracts: &'a [Contract],
    results: &'a serde_json::Map<String, Value>,
    tables: Vec<String>,
    documents: Vec<String>,
    versions: Versions,
    config: Value,
}

const SECTIONS: [&str; 6] = ["symbols", "recover", "roundtrip", "slab", "bfield", "embed"];

/// The configuration without the sections of other commands.
fn config_echo(config: &RunConfig) -> Value {
    let mut v = serde_json::to_value(config).expect("configurations serialize");
    if let Value::Object(map) = &mut v {
        map.retain(|k, _| !SECTIONS.contains(&k.as_str()) || k == config.command.as_str());
    }
    v
}

/// Files written by [`write_report`].
#[derive(Clone, Debug)]
pub struct Written {
    pub report: PathBuf,
    pub tables: Vec<PathBuf>,
    pub documents: Vec<PathBuf>,
}

/// The report as pretty JSON with object keys in sorted order.
pub fn render(config: &RunConfig, mode: &str, outcome: &Outcome) -> String {
    let doc = ReportDoc {
        command: config.command.as_str(),
        mode,
        seed: config.seed,
        passed: outcome.passed(),
        contracts: &outcome.contracts,
        results: &outcome.results,
        tables: outcome
            .tables
            .iter()
            .map(|t| format!("{}.csv", t.name))
            .collect(),
        documents: outcome.documents.iter().map(|d| d.0.clone()).collect(),
        versions: Versions {
            cli: env!("CARGO_PKG_VERSION"),
            core: beltrami_core::VERSION,
            numerics: beltrami_numerics::VERSION,
        },
        config: config_echo(config),
    };
    // Routing through `Value` sorts every object's keys.
    let value = serde_json::to_value(&doc).expect("reports serialize");
    let mut text = serde_json::to_string_pretty(&value).expect("reports serialize");
    text.push('\n');
    text
}

/// Writes `report.json`, the CSV tables and the extra documents into `dir`.
pub fn write_report(
    dir: &Path,
    config: &RunConfig,
    mode: &str,
    outcome: &Outcome,
) -> Result<Written, CliError> {
    fs::create_dir_all(dir)?;
    let mut tables = Vec::with_capacity(outcome.tables.len());
    for t in &outcome.tables {
        tables.push(t.write(dir)?);
    }
    let mut documents = Vec::with_capacity(outcome.documents.len());
    for (name, text) in &outcome.documents {
        let p = dir.join(name);
        fs::write(&p, text)?;
        documents.push(p);
    }
    let report = dir.join("report.json");
    fs::write(&report, render(config, mode, outcome))?;
    Ok(Written {
        report,
        tables,
        documents,
    })
}
