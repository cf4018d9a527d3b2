use std::io::Write;

use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::report::run::RunArtifact;

/// One artifact's line in a comparison.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub name: String,
    pub mode: String,
    pub verdict: String,
    pub limit: Option<String>,
    pub final_diameter: Option<String>,
    /// `Σ|aᵢ − a|` over the evaluated prefix.
    pub deviation_total: Option<String>,
    pub summable_heuristic: Option<bool>,
    /// `Σ −ln μ_r` over the certified stages.
    pub neg_log_mu_total: Option<String>,
    pub passes: Option<bool>,
    pub deviation_profile: Vec<(usize, String)>,
    pub neg_log_mu_profile: Vec<(usize, String)>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Comparison {
    pub rows: Vec<ComparisonRow>,
}

pub const COMPARISON_COLUMNS: [&str; 9] = [
    "name",
    "mode",
    "verdict",
    "limit",
    "final_diameter",
    "deviation_total",
    "summable_heuristic",
    "neg_log_mu_total",
    "passes",
];

fn text(v: &Value) -> Option<String> {
    match v {
        Value::String(s) => Some(s.clone()),
        Value::Null => None,
        other => Some(other.to_string()),
    }
}

fn profile(v: &Value) -> Vec<(usize, String)> {
    v.as_array()
        .map(|items| {
            items
                .iter()
                .filter_map(|pair| Some((pair.get(0)?.as_u64()? as usize, text(pair.get(1)?)?)))
                .collect()
        })
        .unwrap_or_default()
}

fn verdict_label(v: &Value) -> String {
    match v.get("kind").and_then(Value::as_str) {
        Some("converged") => "Converged".into(),
        Some("diverged_periodic") => format!(
            "DivergedPeriodic({})",
            v.get("period").and_then(Value::as_u64).unwrap_or(0)
        ),
        Some("undecided") => "Undecided".into(),
        _ => "unknown".into(),
    }
}

impl ComparisonRow {
    /// Reads the fields from a serialized [`RunArtifact`].
    pub fn from_value(v: &Value) -> Result<Self> {
        let scenario = v
            .get("scenario")
            .ok_or_else(|| Error::Scenario("artifact has no scenario".into()))?;
        let mode = scenario
            .get("mode")
            .and_then(Value::as_str)
            .unwrap_or("unknown")
            .to_string();
        let name = scenario
            .get("name")
            .and_then(Value::as_str)
            .unwrap_or(&mode)
            .to_string();
        let report = v
            .get("report")
            .ok_or_else(|| Error::Scenario("artifact has no report".into()))?;
        let windows = report.get("window_oscillation").and_then(Value::as_array);
        let gill = v.get("gill").filter(|g| !g.is_null());
        let summary = v.pointer("/certificate/summary");
        let deviation_profile = gill.map(|g| profile(&g["checkpoints"])).unwrap_or_default();
        Ok(ComparisonRow {
            name,
            mode,
            verdict: verdict_label(&report["verdict"]),
            limit: text(&report["limit_estimate"]),
            final_diameter: windows.and_then(|w| w.last()).and_then(|w| text(&w["diameter"])),
            deviation_total: deviation_profile.last().map(|(_, s)| s.clone()),
            summable_heuristic: gill.and_then(|g| g["summable_heuristic"].as_bool()),
            neg_log_mu_total: summary.and_then(|s| text(&s["neg_log_mu_total"])),
            passes: v.get("passes").and_then(Value::as_bool),
            deviation_profile,
            neg_log_mu_profile: summary
                .map(|s| profile(&s["neg_log_mu_partial_sums"]))
                .unwrap_or_default(),
        })
    }
}

/// Side-by-side table of at least two serialized artifacts.
pub fn compare_values(artifacts: &[Value]) -> Result<Comparison> {
    if artifacts.len() < 2 {
        return Err(Error::InvalidConfig(format!(
            "compare needs at least 2 artifacts, got {}",
            artifacts.len()
        )));
    }
    let rows = artifacts
        .iter()
        .map(ComparisonRow::from_value)
        .collect::<Result<Vec<_>>>()?;
    Ok(Comparison { rows })
}

pub fn compare(artifacts: &[RunArtifact]) -> Result<Comparison> {
    let values = artifacts
        .iter()
        .map(serde_json::to_value)
        .collect::<std::result::Result<Vec<_>, _>>()?;
    compare_values(&values)
}

impl Comparison {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(COMPARISON_COLUMNS)?;
        let opt = |s: &Option<String>| s.clone().unwrap_or_default();
        let flag = |b: Option<bool>| b.map(|b| b.to_string()).unwrap_or_default();
        for r in &self.rows {
            w.write_record([
                r.name.clone(),
                r.mode.clone(),
                r.verdict.clone(),
                opt(&r.limit),
                opt(&r.final_diameter),
                opt(&r.deviation_total),
                flag(r.summable_heuristic),
                opt(&r.neg_log_mu_total),
                flag(r.passes),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}
