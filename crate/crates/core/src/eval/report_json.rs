//! Report JSON:
//! `{"test_size":N,"models":[{"name":..,"accuracy":..,"true_positives":..,
//! "errors":..,"per_class":[{"precision":..,"recall":..,"f1":..,"support":..} x3]}]}`
//! with accuracy rounded to four decimals.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::compare::ModelComparison;
use crate::data::NUM_CLASSES;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassEntry {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelEntry {
    pub name: String,
    pub accuracy: f64,
    pub true_positives: u64,
    pub errors: u64,
    pub per_class: Vec<ClassEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportJson {
    pub test_size: u64,
    pub models: Vec<ModelEntry>,
}

pub fn round_accuracy(acc: f64) -> f64 {
    (acc * 1e4).round() / 1e4
}

impl ReportJson {
    pub fn from_comparison(cmp: &ModelComparison) -> Self {
        ReportJson {
            test_size: cmp.test_size,
            models: cmp
                .entries
                .iter()
                .map(|e| ModelEntry {
                    name: e.name.clone(),
                    accuracy: round_accuracy(e.accuracy),
                    true_positives: e.true_positives,
                    errors: e.errors,
                    per_class: e
                        .report
                        .per_class
                        .iter()
                        .map(|m| ClassEntry {
                            precision: m.precision,
                            recall: m.recall,
                            f1: m.f1,
                            support: m.support,
                        })
                        .collect(),
                })
                .collect(),
        }
    }
}

pub fn render_report_json(cmp: &ModelComparison) -> Result<String> {
    if cmp.entries.is_empty() {
        return Err(Error::InvalidArgument("cannot write a report with no models".into()));
    }
    let text = serde_json::to_string_pretty(&ReportJson::from_comparison(cmp)).expect("report serializes");
    Ok(text + "\n")
}

pub fn emit_report_json(cmp: &ModelComparison, path: impl AsRef<Path>) -> Result<()> {
    let text = render_report_json(cmp)?;
    let path = path.as_ref();
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn schema_err(msg: impl Into<String>) -> Error {
    Error::parse("report json", msg.into())
}

fn object<'a>(v: &'a Value, keys: &[&str], what: &str) -> Result<&'a serde_json::Map<String, Value>> {
    let obj = v.as_object().ok_or_else(|| schema_err(format!("{what} must be an object")))?;
    for k in keys {
        if !obj.contains_key(*k) {
            return Err(schema_err(format!("{what} lacks {k:?}")));
        }
    }
    if let Some(extra) = obj.keys().find(|k| !keys.contains(&k.as_str())) {
        return Err(schema_err(format!("{what} has unexpected key {extra:?}")));
    }
    Ok(obj)
}

fn count(v: &Value, what: &str) -> Result<u64> {
    v.as_u64().ok_or_else(|| schema_err(format!("{what} must be a non-negative integer")))
}

fn unit(v: &Value, what: &str) -> Result<f64> {
    v.as_f64()
        .filter(|x| (0.0..=1.0).contains(x))
        .ok_or_else(|| schema_err(format!("{what} must be a number in [0, 1]")))
}

/// Structural and arithmetic checks of a parsed report document.
pub fn validate_report_value(doc: &Value) -> Result<()> {
    let top = object(doc, &["test_size", "models"], "report")?;
    let n = count(&top["test_size"], "test_size")?;
    if n == 0 {
        return Err(schema_err("test_size must be positive"));
    }
    let models = top["models"]
        .as_array()
        .filter(|m| !m.is_empty())
        .ok_or_else(|| schema_err("models must be a non-empty array"))?;
    for m in models {
        let obj = object(m, &["name", "accuracy", "true_positives", "errors", "per_class"], "model")?;
        let name = obj["name"]
            .as_str()
            .filter(|s| !s.is_empty())
            .ok_or_else(|| schema_err("model name must be a non-empty string"))?;
        let acc = unit(&obj["accuracy"], "accuracy")?;
        let tp = count(&obj["true_positives"], "true_positives")?;
        let errors = count(&obj["errors"], "errors")?;
        if tp + errors != n {
            return Err(schema_err(format!("{name}: true_positives + errors != test_size")));
        }
        if acc != round_accuracy(tp as f64 / n as f64) {
            return Err(schema_err(format!("{name}: accuracy disagrees with true_positives / test_size")));
        }
        let classes = obj["per_class"]
            .as_array()
            .filter(|c| c.len() == NUM_CLASSES)
            .ok_or_else(|| schema_err(format!("{name}: per_class must hold {NUM_CLASSES} entries")))?;
        let mut support = 0;
        for c in classes {
            let co = object(c, &["precision", "recall", "f1", "support"], "per_class entry")?;
            for k in ["precision", "recall", "f1"] {
                unit(&co[k], k)?;
            }
            support += count(&co["support"], "support")?;
        }
        if support != n {
            return Err(schema_err(format!("{name}: supports do not sum to test_size")));
        }
    }
    Ok(())
}

pub fn parse_report_json(text: &str) -> Result<ReportJson> {
    let value: Value = serde_json::from_str(text).map_err(|e| Error::parse("report json", e))?;
    validate_report_value(&value)?;
    serde_json::from_value(value).map_err(|e| Error::parse("report json", e))
}

#[cfg(test)]
mod tests {
    use super::super::compare::{compare_models, evaluate_predictions};
    use super::*;

    fn comparison() -> ModelComparison {
        let truth = [0, 0, 1, 1, 2, 2, 2];
        compare_models(vec![
            evaluate_predictions("BILSTM", &truth, &[0, 0, 1, 1, 2, 2, 1], 3).unwrap(),
            evaluate_predictions("SVM", &truth, &[0, 1, 1, 1, 2, 0, 1], 3).unwrap(),
        ])
        .unwrap()
    }

    #[test]
    fn round_trip_and_schema() {
        let cmp = comparison();
        let text = render_report_json(&cmp).unwrap();
        let back = parse_report_json(&text).unwrap();
        assert_eq!(back, ReportJson::from_comparison(&cmp));
        assert_eq!(back.models[0].name, "BILSTM");
        assert_eq!(back.models[0].accuracy, 0.8571);
        assert_eq!(back.test_size, 7);
    }

    #[test]
    fn schema_violations() {
        let cmp = comparison();
        let good: Value = serde_json::from_str(&render_report_json(&cmp).unwrap()).unwrap();
        let mut bad = good.clone();
        bad["models"][0]["errors"] = Value::from(5);
        assert!(validate_report_value(&bad).is_err());
        let mut bad = good.clone();
        bad["models"][0]["per_class"].as_array_mut().unwrap().pop();
        assert!(validate_report_value(&bad).is_err());
        let mut bad = good.clone();
        bad["extra"] = Value::from(1);
        assert!(validate_report_value(&bad).is_err());
        let mut bad = good;
        bad["models"] = Value::Array(vec![]);
        assert!(validate_report_value(&bad).is_err());
        assert!(parse_report_json("[1]").is_err());
    }

    #[test]
    fn empty_comparison_is_rejected() {
        let cmp = ModelComparison {
            test_size: 0,
            test_hash: 0,
            entries: vec![],
        };
        assert!(render_report_json(&cmp).is_err());
    }
}
