//! `--set key.path=value` overrides applied to a JSON document.

use asv_core::{Error, Result};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;

/// Applies each `key.path=value` to `target`. The value is parsed as JSON
/// and falls back to a plain string, so `mode=single` and
/// `planner.weights=[0.4,0.1,0.4,0.1]` both work. Keys must already exist in
/// the serialized document; array elements are addressed by index.
pub fn apply<T: Serialize + DeserializeOwned>(target: &T, overrides: &[String]) -> Result<T> {
    if overrides.is_empty() {
        return serde_json::to_value(target)
            .and_then(serde_json::from_value)
            .map_err(|e| Error::Parse(e.to_string()));
    }
    let mut doc = serde_json::to_value(target).map_err(|e| Error::Parse(e.to_string()))?;
    for item in overrides {
        let (key, raw) = item.split_once('=').ok_or_else(|| {
            Error::validation(item.clone(), "override must look like key.path=value")
        })?;
        let slot = lookup(&mut doc, key)?;
        *slot = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    }
    serde_json::from_value(doc).map_err(|e| Error::Parse(format!("after overrides: {e}")))
}

fn lookup<'a>(doc: &'a mut Value, key: &str) -> Result<&'a mut Value> {
    let mut node = doc;
    let mut walked = String::new();
    for part in key.split('.') {
        if !walked.is_empty() {
            walked.push('.');
        }
        walked.push_str(part);
        node = match node {
            Value::Object(map) => map
                .get_mut(part)
                .ok_or_else(|| Error::validation(walked.clone(), "unknown key"))?,
            Value::Array(items) => {
                let len = items.len();
                part.parse::<usize>()
                    .ok()
                    .and_then(|i| items.get_mut(i))
                    .ok_or_else(|| {
                        Error::validation(walked.clone(), format!("expected an index below {len}"))
                    })?
            }
            _ => return Err(Error::validation(walked.clone(), "unknown key")),
        };
    }
    Ok(node)
}

/// Every overridable leaf of `value` as `key.path = default`, one per line.
pub fn describe<T: Serialize>(value: &T) -> String {
    let mut lines = Vec::new();
    if let Ok(doc) = serde_json::to_value(value) {
        flatten(&doc, String::new(), &mut lines);
    }
    lines.join("\n")
}

fn flatten(value: &Value, prefix: String, out: &mut Vec<String>) {
    match value {
        Value::Object(map) if !map.is_empty() => {
            for (k, v) in map {
                let key = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                flatten(v, key, out);
            }
        }
        _ => out.push(format!("  {prefix} = {value}")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use asv_core::sim::{PlannerMode, ScenarioConfig};

    #[test]
    fn nested_and_string_values() {
        let base = ScenarioConfig::default();
        let out = apply(
            &base,
            &[
                "planner.d_safe=30".into(),
                "mode=single".into(),
                "planner.cluster.cutoff=25.5".into(),
            ],
        )
        .unwrap();
        assert_eq!(out.planner.d_safe, 30.0);
        assert_eq!(out.mode, PlannerMode::Single);
        assert_eq!(out.planner.cluster.cutoff, 25.5);
    }

    #[test]
    fn degree_fields_stay_degrees() {
        let out = apply(&ScenarioConfig::default(), &["ego.heading_deg=90".into()]).unwrap();
        assert!((out.ego.heading - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn unknown_key_named() {
        let err = apply(&ScenarioConfig::default(), &["planner.dsafe=3".into()]).unwrap_err();
        assert!(
            matches!(&err, Error::Validation { field, .. } if field == "planner.dsafe"),
            "{err}"
        );
    }

    #[test]
    fn array_index_paths() {
        let out = apply(
            &ScenarioConfig::default(),
            &[
                "planner.weights.0=0.5".into(),
                "planner.weights.2=0.2".into(),
            ],
        )
        .unwrap();
        assert_eq!(out.planner.weights, [0.5, 0.15, 0.2, 0.15]);
        assert!(apply(&ScenarioConfig::default(), &["planner.weights.9=1".into()]).is_err());
    }

    #[test]
    fn missing_equals_rejected() {
        assert!(apply(&ScenarioConfig::default(), &["planner.d_safe".into()]).is_err());
    }

    #[test]
    fn describe_lists_leaves() {
        let text = describe(&ScenarioConfig::default());
        assert!(text.contains("  planner.d_safe = 20.0"));
        assert!(text.contains("  rng_seed = 0"));
    }
}
