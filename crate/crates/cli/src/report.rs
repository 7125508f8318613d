//! Report rendering. JSON output is deterministic for a fixed config and
//! seed: maps are ordered and nothing time- or host-dependent is written.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use qinterf_core::interferometer::FringePoint;
use qinterf_core::scenarios::{Check, CountEntry, ScenarioReport, TableEntry};
use serde::Serialize;

use crate::config::{Format, RunConfig};
use crate::fuzz::FuzzTables;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Serialize)]
pub struct Report<T> {
    pub version: &'static str,
    pub config: RunConfig,
    pub seed: u64,
    pub tables: T,
    pub checks: Vec<Check>,
}

impl<T> Report<T> {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ScenarioTables {
    pub scenario: String,
    pub probabilities: BTreeMap<String, Vec<TableEntry>>,
    pub fringe: Option<Vec<FringePoint>>,
    pub visibility: Option<f64>,
    pub counts: Option<Vec<CountEntry>>,
    /// Sampled count of the outcome where every detector fired.
    pub coincidences: Option<u64>,
}

impl From<ScenarioReport> for ScenarioTables {
    fn from(r: ScenarioReport) -> Self {
        Self {
            scenario: r.scenario,
            probabilities: r.tables,
            fringe: r.fringe,
            visibility: r.visibility,
            // outcomes are ordered by fired-detector bitmask, so the
            // all-fired outcome is last
            coincidences: r.counts.as_ref().and_then(|c| c.last()).map(|c| c.count),
            counts: r.counts,
        }
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serialization");
    s.push('\n');
    s
}

fn float(x: f64) -> String {
    format!("{x:?}")
}

/// CSV of the primary table: the fringe when present, otherwise the
/// sampled counts, otherwise every exact probability table.
pub fn scenario_csv(t: &ScenarioTables) -> String {
    let mut out = String::new();
    if let Some(fringe) = &t.fringe {
        out.push_str("phase,probability\n");
        for p in fringe {
            let _ = writeln!(out, "{},{}", float(p.phase), float(p.probability));
        }
    } else if let Some(counts) = &t.counts {
        out.push_str("outcome,count,probability\n");
        for c in counts {
            let _ = writeln!(out, "{},{},{}", c.outcome, c.count, float(c.probability));
        }
    } else {
        out.push_str("table,outcome,probability\n");
        for (name, entries) in &t.probabilities {
            for e in entries {
                let _ = writeln!(out, "{name},{},{}", e.outcome, float(e.probability));
            }
        }
    }
    out
}

pub fn fuzz_csv(t: &FuzzTables) -> String {
    let mut out = String::from("dim,instances,failures,max_superposition_ratio,max_kernel_ratio,max_excess\n");
    for d in &t.dimensions {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            d.dim,
            d.instances,
            d.failures,
            float(d.max_superposition_ratio),
            float(d.max_kernel_ratio),
            float(d.max_excess)
        );
    }
    out
}

pub fn render_scenario(report: &Report<ScenarioTables>, format: Format) -> String {
    match format {
        Format::Json => to_json(report),
        Format::Csv => scenario_csv(&report.tables),
    }
}

pub fn render_fuzz(report: &Report<FuzzTables>, format: Format) -> String {
    match format {
        Format::Json => to_json(report),
        Format::Csv => fuzz_csv(&report.tables),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_floats_round_trip() {
        let t = ScenarioTables {
            scenario: "x".into(),
            probabilities: BTreeMap::new(),
            fringe: Some(vec![FringePoint {
                phase: 0.1,
                probability: 1e-17,
            }]),
            visibility: None,
            counts: None,
            coincidences: None,
        };
        let csv = scenario_csv(&t);
        let row = csv.lines().nth(1).unwrap();
        let v: Vec<f64> = row.split(',').map(|s| s.parse().unwrap()).collect();
        assert_eq!(v, [0.1, 1e-17]);
    }
}
