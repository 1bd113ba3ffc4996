//! Report envelope and serialization. Reports are bit-identical for
//! identical configs on the same build: all content is deterministic given
//! (config, seed), keys are sorted, and no timestamps are embedded.

use nalgebra::DMatrix;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;
use crate::{CliError, Result};

#[derive(Debug, Serialize)]
pub struct Report {
    pub schema: u32,
    pub command: String,
    /// SHA-256 of the canonical TOML form of the resolved config.
    pub config_sha256: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nodes: Option<u64>,
    pub tolerances: Value,
    pub results: Value,
    pub config: Value,
}

#[derive(Debug, Clone)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl CsvTable {
    pub fn render(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| format!("{}", v)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> Value {
        json!({ "header": self.header, "rows": self.rows })
    }
}

pub fn config_sha256(config: &ExperimentConfig) -> Result<String> {
    let toml = config.to_toml()?;
    let digest = Sha256::digest(toml.as_bytes());
    Ok(digest.iter().map(|b| format!("{:02x}", b)).collect())
}

pub fn build_report(
    config: &ExperimentConfig,
    seed: Option<u64>,
    nodes: Option<u64>,
    tolerances: Value,
    results: Value,
) -> Result<Report> {
    Ok(Report {
        schema: config.schema,
        command: config.kind.name().to_string(),
        config_sha256: config_sha256(config)?,
        seed,
        nodes,
        tolerances,
        results,
        config: serde_json::to_value(config)
            .map_err(|e| CliError::Config(format!("config to JSON: {}", e)))?,
    })
}

impl Report {
    pub fn to_json_string(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("report serialization");
        text.push('\n');
        text
    }
}

pub fn matrix_json(m: &DMatrix<f64>) -> Value {
    let rows: Vec<Vec<f64>> = (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect();
    json!(rows)
}
