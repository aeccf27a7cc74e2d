use dsi_core::{Divergence, DsiEstimate, DsiReport, MetricKind};
use serde::{Deserialize, Serialize};

/// Bumped on any breaking change to the JSON layout.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub schema_version: u32,
    pub command: CommandEcho,
    pub result: ReportResult,
    pub timings: Timings,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommandEcho {
    pub name: String,
    pub args: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportResult {
    Dsi(DsiReport),
    Estimate(DsiEstimate),
    Sweep(Vec<SweepRow>),
}

/// One line of the long-format sweep table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub param: f64,
    pub metric: MetricKind,
    pub divergence: Divergence,
    pub dsi: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub load_secs: f64,
    pub compute_secs: f64,
}

impl ReportDocument {
    pub fn new(command: CommandEcho, result: ReportResult, timings: Timings) -> Self {
        ReportDocument {
            schema_version: SCHEMA_VERSION,
            command,
            result,
            timings,
        }
    }

    /// Copy with every wall-clock field zeroed.
    pub fn without_timings(&self) -> Self {
        let result = match &self.result {
            ReportResult::Dsi(r) => ReportResult::Dsi(r.without_timing()),
            ReportResult::Estimate(e) => ReportResult::Estimate(DsiEstimate {
                trials: e.trials.iter().map(DsiReport::without_timing).collect(),
                ..e.clone()
            }),
            ReportResult::Sweep(rows) => ReportResult::Sweep(rows.clone()),
        };
        ReportDocument {
            result,
            timings: Timings::default(),
            ..self.clone()
        }
    }

    pub fn to_json(&self) -> String {
        // plain data with string keys: serialization cannot fail
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
