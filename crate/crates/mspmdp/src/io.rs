//! JSON problem specs and number rendering.
//!
//! A spec is a [`ProblemInstance`] with a `schema_version` field next to
//! it. Custom families and explicit kernels serialize by name only; a
//! reloaded instance needs its evaluators attached again before use.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::model::ProblemInstance;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub schema_version: u32,
    #[serde(flatten)]
    pub instance: ProblemInstance,
}

impl ProblemSpec {
    pub fn new(instance: ProblemInstance) -> Self {
        ProblemSpec {
            schema_version: SCHEMA_VERSION,
            instance,
        }
    }
}

/// Parse a spec and validate the instance it holds.
pub fn problem_from_str(s: &str) -> Result<ProblemInstance> {
    let raw: Value = serde_json::from_str(s)?;
    match raw.get("schema_version").and_then(Value::as_u64) {
        Some(v) if v == SCHEMA_VERSION as u64 => {}
        Some(v) => return Err(Error::SchemaVersion(v as u32)),
        None => return Err(Error::InvalidInput("missing schema_version".into())),
    }
    let spec: ProblemSpec = serde_json::from_value(raw)?;
    spec.instance.validate()?;
    Ok(spec.instance)
}

pub fn load_problem(path: impl AsRef<Path>) -> Result<ProblemInstance> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
    problem_from_str(&text)
}

pub fn problem_to_string(inst: &ProblemInstance) -> Result<String> {
    to_json_pretty(&ProblemSpec::new(inst.clone()))
}

pub fn save_problem(inst: &ProblemInstance, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, problem_to_string(inst)?)
        .map_err(|e| Error::InvalidInput(format!("cannot write {}: {e}", path.display())))
}

/// `v` rounded to 10 significant digits.
pub fn round_sig(v: f64) -> f64 {
    if !v.is_finite() || v == 0.0 {
        return v;
    }
    format!("{v:.9e}").parse().unwrap_or(v)
}

/// Round every float in a JSON tree to 10 significant digits.
pub fn round_json(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            if let Some(r) = n
                .as_f64()
                .map(round_sig)
                .and_then(serde_json::Number::from_f64)
            {
                *n = r;
            }
        }
        Value::Array(a) => a.iter_mut().for_each(round_json),
        Value::Object(o) => o.values_mut().for_each(round_json),
        _ => {}
    }
}

/// Pretty JSON with floats at 10 significant digits.
pub fn to_json_pretty<T: Serialize>(value: &T) -> Result<String> {
    let mut v = serde_json::to_value(value)?;
    round_json(&mut v);
    Ok(serde_json::to_string_pretty(&v)?)
}

/// Four significant digits for human-readable tables.
pub fn fmt4(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let mag = v.abs().log10().floor() as i32;
    if !(-4..6).contains(&mag) {
        return format!("{v:.3e}");
    }
    let decimals = (3 - mag).max(0) as usize;
    format!("{v:.decimals$}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding() {
        assert_eq!(round_sig(1.0 / 3.0), 0.3333333333);
        assert_eq!(round_sig(-62.029600000001), -62.0296);
        assert_eq!(fmt4(1.0 / 75.0), "0.01333");
        assert_eq!(fmt4(-62.0296), "-62.03");
        assert_eq!(fmt4(4.19), "4.190");
        assert_eq!(fmt4(1234.5), "1234");
    }

    #[test]
    fn schema_version_is_checked() {
        let err = problem_from_str(r#"{"schema_version": 2}"#).unwrap_err();
        assert!(matches!(err, Error::SchemaVersion(2)));
        assert!(problem_from_str("{}").is_err());
    }
}
