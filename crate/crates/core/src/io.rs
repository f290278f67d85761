//! JSON model files.
//!
//! ```json
//! {
//!   "states": ["low", {"label": "high", "coord": 2.0}, 3.5],
//!   "actions": ["wait", "go"],
//!   "admissible": [[0, 1], [0], [1]],
//!   "transition": [[[0.5, 0.5, 0], [0, 0, 1]], [[1, 0, 0], null], [null, [0, 0, 1]]],
//!   "utility": [[1, "-inf"], [0, null], [null, 2]],
//!   "weight": [1, 1, 2],
//!   "mode": "unbounded_below"
//! }
//! ```
//!
//! Rows of `transition[x]` and `utility[x]` are indexed by action (null for
//! inadmissible actions) when they have one entry per action, and follow the
//! order of `admissible[x]` when they are shorter.

use crate::model::{FiniteModel, Mode, ModelError, StateInfo};
use serde_json::{json, Map, Value};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IoError {
    #[error("JSON syntax: {0}")]
    Json(String),
    #[error("model schema: {0}")]
    Schema(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

fn schema(msg: impl Into<String>) -> IoError {
    IoError::Schema(msg.into())
}

fn field<'a>(obj: &'a Map<String, Value>, key: &str) -> Result<&'a Value, IoError> {
    obj.get(key).ok_or_else(|| schema(format!("missing key {key:?}")))
}

fn array<'a>(v: &'a Value, what: &str) -> Result<&'a Vec<Value>, IoError> {
    v.as_array().ok_or_else(|| schema(format!("{what} must be an array")))
}

fn number(v: &Value, what: &str) -> Result<f64, IoError> {
    match v {
        Value::Number(n) => n.as_f64().ok_or_else(|| schema(format!("{what} is not a number"))),
        Value::String(s) if s == "-inf" => Ok(f64::NEG_INFINITY),
        _ => Err(schema(format!("{what} must be a number or \"-inf\""))),
    }
}

fn finite(v: &Value, what: &str) -> Result<f64, IoError> {
    v.as_f64().ok_or_else(|| schema(format!("{what} must be a number")))
}

/// Parses a model file; the mode defaults to bounded.
pub fn parse_model_json(text: &str) -> Result<(FiniteModel, Mode), IoError> {
    let root: Value = serde_json::from_str(text).map_err(|e| IoError::Json(e.to_string()))?;
    let obj = root.as_object().ok_or_else(|| schema("top level must be an object"))?;

    let states = array(field(obj, "states")?, "states")?
        .iter()
        .enumerate()
        .map(|(x, s)| match s {
            Value::String(l) => Ok(StateInfo::labelled(l.clone())),
            Value::Number(n) => Ok(StateInfo::at(n.as_f64().unwrap_or(f64::NAN))),
            Value::Object(o) => {
                let coord = o.get("coord").and_then(Value::as_f64);
                let label = match (o.get("label").and_then(Value::as_str), coord) {
                    (Some(l), _) => l.to_string(),
                    (None, Some(c)) => StateInfo::at(c).label,
                    (None, None) => format!("s{x}"),
                };
                Ok(StateInfo { label, coord })
            }
            _ => Err(schema(format!("state {x} must be a label, number or object"))),
        })
        .collect::<Result<Vec<_>, _>>()?;
    let n = states.len();

    let actions = array(field(obj, "actions")?, "actions")?
        .iter()
        .map(|a| match a {
            Value::String(s) => Ok(s.clone()),
            Value::Number(n) => Ok(n.to_string()),
            _ => Err(schema("action labels must be strings or numbers")),
        })
        .collect::<Result<Vec<_>, _>>()?;
    let n_actions = actions.len();

    let admissible = array(field(obj, "admissible")?, "admissible")?
        .iter()
        .map(|row| {
            array(row, "admissible[x]")?
                .iter()
                .map(|a| {
                    a.as_u64()
                        .map(|a| a as usize)
                        .ok_or_else(|| schema("admissible entries must be action indices"))
                })
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    if admissible.len() != n {
        return Err(ModelError::Length {
            expected: n,
            got: admissible.len(),
        }
        .into());
    }

    let per_slot = |key: &str, x: usize, row: &Vec<Value>| -> Result<Vec<Value>, IoError> {
        let adm = &admissible[x];
        if row.len() == n_actions {
            adm.iter()
                .map(|&a| match row.get(a) {
                    Some(Value::Null) | None => {
                        Err(schema(format!("{key}[{x}][{a}] missing for admissible action")))
                    }
                    Some(v) => Ok(v.clone()),
                })
                .collect()
        } else if row.len() == adm.len() {
            Ok(row.clone())
        } else {
            Err(schema(format!(
                "{key}[{x}] has {} entries; expected {n_actions} (by action) or {} (by admissible slot)",
                row.len(),
                adm.len()
            )))
        }
    };

    let transition_rows = array(field(obj, "transition")?, "transition")?;
    let utility_rows = array(field(obj, "utility")?, "utility")?;
    if transition_rows.len() != n || utility_rows.len() != n {
        return Err(schema("transition and utility need one entry per state"));
    }
    let mut transition = Vec::with_capacity(n);
    let mut utility = Vec::with_capacity(n);
    for x in 0..n {
        let t = per_slot("transition", x, array(&transition_rows[x], "transition[x]")?)?;
        transition.push(
            t.iter()
                .map(|row| {
                    array(row, "transition row")?
                        .iter()
                        .map(|p| finite(p, "transition probability"))
                        .collect::<Result<Vec<_>, _>>()
                })
                .collect::<Result<Vec<_>, _>>()?,
        );
        let u = per_slot("utility", x, array(&utility_rows[x], "utility[x]")?)?;
        utility.push(
            u.iter()
                .map(|v| number(v, "utility"))
                .collect::<Result<Vec<_>, _>>()?,
        );
    }

    let weight = array(field(obj, "weight")?, "weight")?
        .iter()
        .map(|w| finite(w, "weight"))
        .collect::<Result<Vec<_>, _>>()?;
    let mode = match obj.get("mode") {
        None | Some(Value::Null) => Mode::Bounded,
        Some(Value::String(s)) => s.parse().map_err(|e: String| schema(e))?,
        Some(_) => return Err(schema("mode must be a string")),
    };
    let model = FiniteModel::new(states, actions, admissible, transition, utility, weight)?;
    Ok((model, mode))
}

fn json_number(v: f64) -> Value {
    if v == f64::NEG_INFINITY {
        Value::String("-inf".into())
    } else {
        json!(v)
    }
}

fn by_action(model: &FiniteModel, x: usize, entry: impl Fn(usize) -> Value) -> Vec<Value> {
    (0..model.n_actions())
        .map(|a| model.slot(x, a).map_or(Value::Null, &entry))
        .collect()
}

/// Serialises a model with action-indexed rows.
pub fn model_to_json(model: &FiniteModel, mode: Mode) -> Value {
    let states: Vec<Value> = model
        .states()
        .iter()
        .map(|s| match s.coord {
            Some(c) => json!({"label": s.label, "coord": c}),
            None => json!(s.label),
        })
        .collect();
    let n = model.n_states();
    json!({
        "states": states,
        "actions": model.actions(),
        "admissible": (0..n).map(|x| model.admissible(x).to_vec()).collect::<Vec<_>>(),
        "transition": (0..n)
            .map(|x| by_action(model, x, |k| json!(model.row(x, k))))
            .collect::<Vec<_>>(),
        "utility": (0..n)
            .map(|x| by_action(model, x, |k| json_number(model.utility(x, k))))
            .collect::<Vec<_>>(),
        "weight": model.weights(),
        "mode": mode.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const DOC: &str = r#"{
      "states": ["low", {"label": "high", "coord": 2.0}, 3.5],
      "actions": ["wait", "go"],
      "admissible": [[0, 1], [0], [1]],
      "transition": [[[0.5, 0.5, 0], [0, 0, 1]], [[1, 0, 0], null], [null, [0, 0, 1]]],
      "utility": [[1, "-inf"], [0, null], [null, 2]],
      "weight": [1, 1, 2],
      "mode": "unbounded_below"
    }"#;

    #[test]
    fn parses_action_indexed_rows() {
        let (m, mode) = parse_model_json(DOC).unwrap();
        assert_eq!(mode, Mode::UnboundedBelow);
        assert_eq!(m.n_states(), 3);
        assert_eq!(m.utility(0, 1), f64::NEG_INFINITY);
        assert_eq!(m.admissible(2), &[1]);
        assert_eq!(m.row(2, 0), &[0.0, 0.0, 1.0]);
        assert_eq!(m.states()[1].coord, Some(2.0));
        assert_eq!(m.states()[2].label, "3.5");
    }

    #[test]
    fn round_trip() {
        let (m, mode) = parse_model_json(DOC).unwrap();
        let text = model_to_json(&m, mode).to_string();
        let (back, mode2) = parse_model_json(&text).unwrap();
        assert_eq!(m, back);
        assert_eq!(mode, mode2);
    }

    #[test]
    fn schema_errors() {
        assert!(matches!(parse_model_json("{"), Err(IoError::Json(_))));
        assert!(matches!(
            parse_model_json(r#"{"states": []}"#),
            Err(IoError::Schema(_))
        ));
        let bad = DOC.replace("[[1, 0, 0], null]", "[[1, 0, 0]]").replace("[0, null]", "[0, 1, 2]");
        assert!(parse_model_json(&bad).is_err());
    }
}
