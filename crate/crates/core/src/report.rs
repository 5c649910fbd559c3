//! Report envelopes with provenance, and their CSV renderings.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::trajectory::{CheckEntry, PReport, Scale};

pub const TOOL_NAME: &str = "trajlens";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Published JSON schema for every report this crate writes.
pub const REPORT_SCHEMA: &str = include_str!("../schema/report.schema.json");

/// Where the model came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelSource {
    File { path: String },
    Corpus { name: String, params: BTreeMap<String, i64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// `"dp"` or `"zsg"`.
    pub model_type: String,
    /// SHA-256 of the canonical model JSON.
    pub model_hash: String,
    pub source: ModelSource,
    /// Numeric parameters of the run, as given.
    pub parameters: serde_json::Value,
}

impl Provenance {
    pub fn new(
        command: &str,
        model_type: &str,
        model_hash: String,
        source: ModelSource,
        parameters: serde_json::Value,
    ) -> Self {
        Self {
            tool: TOOL_NAME.to_owned(),
            version: TOOL_VERSION.to_owned(),
            command: command.to_owned(),
            model_type: model_type.to_owned(),
            model_hash,
            source,
            parameters,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report<T: Serialize> {
    pub provenance: Provenance,
    pub result: T,
}

impl<T: Serialize> Report<T> {
    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Serializes `rows` as CSV with a header taken from the row type.
pub fn csv_string<R: Serialize>(rows: impl IntoIterator<Item = R>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).expect("row serializes");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}

/// CSV columns of a property report.
pub const DEVIATION_COLUMNS: [&str; 6] = ["horizon", "state", "t", "deviation", "epsilon", "verdict"];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeviationRow {
    /// `n` for the finite-horizon checker, `lambda` for the discounted one.
    pub horizon: String,
    pub state: String,
    pub t: f64,
    pub deviation: f64,
    pub epsilon: f64,
    /// `HOLDS` when this (scale, state) stays in the band, else `VIOLATED`.
    pub verdict: &'static str,
}

fn scale_label(scale: &Scale) -> String {
    match scale {
        Scale::Horizon(n) => n.to_string(),
        Scale::Discount(l) => l.to_string(),
    }
}

fn entry_rows<'a>(report: &'a PReport, e: &'a CheckEntry) -> impl Iterator<Item = DeviationRow> + 'a {
    let verdict = if e.within_band { "HOLDS" } else { "VIOLATED" };
    e.grid_rows.iter().map(move |&(t, d)| DeviationRow {
        horizon: scale_label(&e.scale),
        state: e.state_id.clone(),
        t,
        deviation: d,
        epsilon: report.epsilon,
        verdict,
    })
}

/// One row per (scale, start state, reported `t`) of the worst play.
pub fn preport_csv(report: &PReport) -> String {
    let rows = report.entries.iter().flat_map(|e| entry_rows(report, e));
    let out = csv_string(rows);
    if out.is_empty() {
        format!("{}\n", DEVIATION_COLUMNS.join(","))
    } else {
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::DpModel;
    use crate::trajectory::{check_property_p, CheckConfig};

    #[test]
    fn csv_header_is_exact() {
        let m = DpModel::from_labels(&[("s0", 0.0, vec!["s0", "s1"]), ("s1", 1.0, vec!["s1"])])
            .unwrap();
        let mut cfg = CheckConfig::new(0.05);
        cfg.grid = vec![0.0, 0.5, 1.0];
        let r = check_property_p(&m, &[10], &cfg, &[1.0, 1.0]).unwrap();
        let text = preport_csv(&r);
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), DEVIATION_COLUMNS.join(","));
        assert_eq!(lines.count(), 2 * 3);
        assert!(text.contains("10,s0,0.5,"));
    }

    #[test]
    fn provenance_serializes_source_tag() {
        let p = Provenance::new(
            "solve",
            "dp",
            "ab".into(),
            ModelSource::Corpus {
                name: "big-match".into(),
                params: BTreeMap::new(),
            },
            serde_json::json!({"horizon": 3}),
        );
        let v = serde_json::to_value(&p).unwrap();
        assert_eq!(v["source"]["kind"], "corpus");
        assert_eq!(v["version"], TOOL_VERSION);
    }
}
