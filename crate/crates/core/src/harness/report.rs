use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::HarnessConfig;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Holds,
    Violated,
    /// Some input exceeded the budget or was not found in a closed table.
    Undecided,
    /// A measurement with no inequality attached.
    Measured,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Holds => "holds",
            Verdict::Violated => "violated",
            Verdict::Undecided => "undecided",
            Verdict::Measured => "measured",
        }
    }

    /// `holds`/`violated` from a decided comparison, `undecided` otherwise.
    pub fn from_check(ok: Option<bool>) -> Self {
        match ok {
            Some(true) => Verdict::Holds,
            Some(false) => Verdict::Violated,
            None => Verdict::Undecided,
        }
    }
}

/// One instance of an experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub label: String,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub gap: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub witness: Option<String>,
    pub values: BTreeMap<String, Value>,
}

impl Record {
    pub fn new(label: impl Into<String>, verdict: Verdict) -> Self {
        Self {
            label: label.into(),
            verdict,
            gap: None,
            witness: None,
            values: BTreeMap::new(),
        }
    }

    pub fn set<T: Serialize>(&mut self, key: &str, value: T) -> &mut Self {
        let v = serde_json::to_value(value).expect("plain data serializes");
        self.values.insert(key.to_string(), v);
        self
    }
}

/// Settings a report can be regenerated from. Worker count is left out on
/// purpose: it must not change the output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub gate_set: String,
    pub gate_set_hash: String,
    pub epsilon: f64,
    pub grid: f64,
    pub budget: u32,
    pub max_entries: usize,
    pub wide_epsilon: f64,
    pub wide_grid: f64,
    pub wide_budget: u32,
    pub wide_max_entries: usize,
    pub seed: u64,
    pub samples: usize,
}

impl ExperimentConfig {
    pub fn new(cfg: &HarnessConfig) -> Self {
        Self {
            gate_set: cfg.gate_set.name.clone(),
            gate_set_hash: cfg.gate_set.hash_hex(),
            epsilon: cfg.params.epsilon,
            grid: cfg.params.grid,
            budget: cfg.params.budget,
            max_entries: cfg.params.max_entries,
            wide_epsilon: cfg.wide_params.epsilon,
            wide_grid: cfg.wide_params.grid,
            wide_budget: cfg.wide_params.budget,
            wide_max_entries: cfg.wide_params.max_entries,
            seed: cfg.seed,
            samples: cfg.samples,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub config: ExperimentConfig,
    pub summary: BTreeMap<String, Value>,
    pub records: Vec<Record>,
}

impl ExperimentReport {
    /// Sorts the records by label and adds verdict counts to the summary.
    pub fn new(
        experiment: &str,
        cfg: &HarnessConfig,
        mut records: Vec<Record>,
        mut summary: BTreeMap<String, Value>,
    ) -> Self {
        records.sort_by(|a, b| a.label.cmp(&b.label));
        for v in [Verdict::Holds, Verdict::Violated, Verdict::Undecided, Verdict::Measured] {
            let n = records.iter().filter(|r| r.verdict == v).count();
            summary.insert(format!("count_{}", v.as_str()), n.into());
        }
        summary.insert("records".into(), records.len().into());
        Self {
            experiment: experiment.to_string(),
            config: ExperimentConfig::new(cfg),
            summary,
            records,
        }
    }

    pub fn count(&self, verdict: Verdict) -> usize {
        self.records.iter().filter(|r| r.verdict == verdict).count()
    }

    /// Records whose label starts with `prefix`.
    pub fn with_prefix<'a>(&'a self, prefix: &'a str) -> impl Iterator<Item = &'a Record> + 'a {
        self.records.iter().filter(move |r| r.label.starts_with(prefix))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }

    /// One row per record: label, verdict, gap, witness, then every value
    /// key seen in any record, sorted. Structured values are written as JSON.
    pub fn to_csv(&self) -> Result<String> {
        let mut keys: Vec<&String> = self.records.iter().flat_map(|r| r.values.keys()).collect();
        keys.sort();
        keys.dedup();
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["experiment", "seed", "label", "verdict", "gap", "witness"];
        header.extend(keys.iter().map(|k| k.as_str()));
        w.write_record(&header).map_err(csv_err)?;
        let seed = self.config.seed.to_string();
        for r in &self.records {
            let mut row = vec![
                self.experiment.clone(),
                seed.clone(),
                r.label.clone(),
                r.verdict.as_str().to_string(),
                r.gap.map(|g| g.to_string()).unwrap_or_default(),
                r.witness.clone().unwrap_or_default(),
            ];
            for k in &keys {
                row.push(match r.values.get(*k) {
                    None => String::new(),
                    Some(Value::String(s)) => s.clone(),
                    Some(v) => v.to_string(),
                });
            }
            w.write_record(&row).map_err(csv_err)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::InvalidParameter(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv of utf-8 fields"))
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::InvalidParameter(format!("csv: {e}"))
}
