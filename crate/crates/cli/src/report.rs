//! Schema-versioned JSON reports.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::RunConfig;

pub const SCHEMA: &str = "qwcat.report/1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ToolInfo {
    pub name: String,
    pub version: String,
}

impl ToolInfo {
    pub fn current() -> Self {
        Self {
            name: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
        }
    }
}

/// Envelope shared by every command. `provenance` maps each result field to
/// the computation that produced it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub tool: ToolInfo,
    pub command: String,
    pub config: RunConfig,
    pub provenance: BTreeMap<String, String>,
    pub result: serde_json::Value,
}

impl Report {
    pub fn new(config: &RunConfig, result: serde_json::Value, provenance: &[(&str, &str)]) -> Self {
        Self {
            schema: SCHEMA.into(),
            tool: ToolInfo::current(),
            command: config.command.clone(),
            config: config.clone(),
            provenance: provenance.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect(),
            result,
        }
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("reports serialize");
        text.push('\n');
        text
    }
}

pub fn emit_report(report: &Report) -> String {
    report.to_json()
}

pub fn parse_report(text: &str) -> serde_json::Result<Report> {
    serde_json::from_str(text)
}
