//! JSON descriptions of systems and patches.
//!
//! A system file is `{"alphabet": [...], "mode": "exact" | "natural",
//! "rules": {...}}`. Exact rules map each letter to an array of
//! `[letter, weight]` pairs with rational weights like "4/9"; natural rules
//! map each letter to an array of letters and the weights are derived from
//! the dominant eigenvalue. Patches serialize with exact coordinates as
//! "p/q" strings and sampled coordinates as plain numbers.

use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::rational::{format_rational, parse_rational};
use crate::substitution::{natural_weights, Color, Mode, Rule, WeightedSubstitution};
use crate::tiling::Patch;
use crate::weight::{Scalar, WeightValue};

fn parse_err(msg: impl Into<String>) -> Error {
    Error::Parse(msg.into())
}

pub fn parse_system(text: &str) -> Result<WeightedSubstitution> {
    let root: Value = serde_json::from_str(text).map_err(|e| {
        parse_err(format!("line {}, column {}: {}", e.line(), e.column(), e))
    })?;
    let obj = root
        .as_object()
        .ok_or_else(|| parse_err("the top level must be a JSON object"))?;
    let alphabet: Vec<String> = obj
        .get("alphabet")
        .and_then(Value::as_array)
        .ok_or_else(|| parse_err("missing \"alphabet\" array"))?
        .iter()
        .map(|v| {
            v.as_str()
                .map(str::to_owned)
                .ok_or_else(|| parse_err("alphabet entries must be strings"))
        })
        .collect::<Result<_>>()?;
    let mode = obj.get("mode").and_then(Value::as_str).unwrap_or("exact");
    let rules_obj = obj
        .get("rules")
        .and_then(Value::as_object)
        .ok_or_else(|| parse_err("missing \"rules\" object"))?;
    let color_of = |name: &str| -> Result<Color> {
        alphabet
            .iter()
            .position(|a| a == name)
            .map(Color)
            .ok_or_else(|| {
                Error::Validation(format!("rule references unknown letter {name:?}"))
            })
    };
    let rule_of = |name: &String| -> Result<&Vec<Value>> {
        rules_obj
            .get(name)
            .and_then(Value::as_array)
            .ok_or_else(|| parse_err(format!("missing rule array for letter {name:?}")))
    };
    match mode {
        "exact" => {
            let mut rules: Vec<Rule> = Vec::with_capacity(alphabet.len());
            for name in &alphabet {
                let mut rule = Vec::new();
                for entry in rule_of(name)? {
                    let pair = entry.as_array().filter(|p| p.len() == 2).ok_or_else(|| {
                        parse_err("exact rule entries must be [letter, weight] pairs")
                    })?;
                    let letter = pair[0]
                        .as_str()
                        .ok_or_else(|| parse_err("rule letters must be strings"))?;
                    let weight = pair[1]
                        .as_str()
                        .ok_or_else(|| parse_err("weights must be rational strings"))?;
                    rule.push((color_of(letter)?, WeightValue::Exact(parse_rational(weight)?)));
                }
                rules.push(rule);
            }
            WeightedSubstitution::try_new(alphabet, rules, Mode::Exact)
        }
        "natural" => {
            let mut color_rules: Vec<Vec<Color>> = Vec::with_capacity(alphabet.len());
            for name in &alphabet {
                let rule = rule_of(name)?
                    .iter()
                    .map(|entry| {
                        entry
                            .as_str()
                            .ok_or_else(|| parse_err("natural rule entries must be letters"))
                            .and_then(color_of)
                    })
                    .collect::<Result<_>>()?;
                color_rules.push(rule);
            }
            natural_weights(alphabet, color_rules)
        }
        other => Err(Error::Validation(format!(
            "unknown mode {other:?}: expected \"exact\" or \"natural\""
        ))),
    }
}

pub fn system_to_json(ws: &WeightedSubstitution) -> String {
    let exact = matches!(ws.mode(), Mode::Exact);
    let mut rules = Map::new();
    for a in ws.colors() {
        let entries: Vec<Value> = ws
            .rule(a)
            .iter()
            .map(|(b, w)| {
                if exact {
                    let r = w.as_exact().expect("exact systems carry exact weights");
                    json!([ws.color_name(*b), format_rational(r)])
                } else {
                    json!(ws.color_name(*b))
                }
            })
            .collect();
        rules.insert(ws.color_name(a).to_owned(), Value::Array(entries));
    }
    let doc = json!({
        "alphabet": ws.colors().map(|a| ws.color_name(a)).collect::<Vec<_>>(),
        "mode": if exact { "exact" } else { "natural" },
        "rules": rules,
    });
    serde_json::to_string_pretty(&doc).expect("a json value always serializes") + "\n"
}

fn scalar_json(s: &Scalar) -> Value {
    match s {
        Scalar::Rat(r) => Value::String(format_rational(r)),
        Scalar::F64(v) => json!(v),
    }
}

pub fn patch_to_json(ws: &WeightedSubstitution, patch: &Patch) -> String {
    let w = &patch.window;
    let tiles: Vec<Value> = patch
        .tiles
        .iter()
        .map(|ct| {
            json!({
                "x1": scalar_json(&ct.tile.x1),
                "x2": scalar_json(&ct.tile.x2),
                "y1": scalar_json(&ct.tile.y1),
                "y2": scalar_json(&ct.tile.y2),
                "color": ws.color_name(ct.color),
            })
        })
        .collect();
    let doc = json!({
        "window": [
            scalar_json(&w.x0),
            scalar_json(&w.x1),
            scalar_json(&w.y0),
            scalar_json(&w.y1)
        ],
        "tiles": tiles,
    });
    serde_json::to_string_pretty(&doc).expect("a json value always serializes") + "\n"
}

#[cfg(test)]
mod tests {
    use super::*;

    const MIRROR: &str = r#"{
        "alphabet": ["+", "-"],
        "mode": "exact",
        "rules": {
            "+": [["+", "4/9"], ["-", "1/9"], ["+", "4/9"]],
            "-": [["-", "4/9"], ["+", "1/9"], ["-", "4/9"]]
        }
    }"#;

    #[test]
    fn parses_an_exact_system() {
        let ws = parse_system(MIRROR).unwrap();
        assert_eq!(ws.color_count(), 2);
        assert_eq!(ws.rule_len(Color(0)), 3);
        assert!(matches!(ws.mode(), Mode::Exact));
    }

    #[test]
    fn parses_a_natural_system() {
        let text = r#"{
            "alphabet": ["a", "b"],
            "mode": "natural",
            "rules": {"a": ["a", "b"], "b": ["a"]}
        }"#;
        let ws = parse_system(text).unwrap();
        assert_eq!(ws.color_count(), 2);
        assert!(ws.perron().is_some());
    }

    #[test]
    fn malformed_json_reports_position() {
        let err = parse_system("{\n  \"alphabet\": [,]\n}").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line 2"), "got {msg}");
        assert!(msg.contains("column"), "got {msg}");
    }

    #[test]
    fn semantic_errors_are_validation_errors() {
        let unknown = r#"{
            "alphabet": ["a"],
            "rules": {"a": [["b", "1/1"]]}
        }"#;
        assert!(matches!(parse_system(unknown), Err(Error::Validation(_))));
        let bad_mode = r#"{"alphabet": ["a"], "mode": "odd", "rules": {"a": []}}"#;
        assert!(matches!(parse_system(bad_mode), Err(Error::Validation(_))));
    }

    #[test]
    fn system_json_round_trips() {
        let ws = parse_system(MIRROR).unwrap();
        let text = system_to_json(&ws);
        let back = parse_system(&text).unwrap();
        assert_eq!(system_to_json(&back), text);
    }

    #[test]
    fn patches_serialize_exact_coordinates_as_fractions() {
        use crate::base_group::{base_group, g_function};
        use crate::rational::big_rational;
        use crate::tiling::{expand_patch, PhaseSpec, Window};
        use crate::weight::Scalar;

        let ws = crate::systems::omega2();
        let report = base_group(&ws).unwrap();
        let g = g_function(&ws, &report).unwrap();
        let window = Window::try_new(
            Scalar::Rat(big_rational(-1, 1)),
            Scalar::Rat(big_rational(1, 1)),
            Scalar::Rat(big_rational(1, 2)),
            Scalar::Rat(big_rational(2, 1)),
        )
        .unwrap();
        let phase = PhaseSpec::separating(vec![1], vec![0]);
        let patch = expand_patch(&ws, &g, &report.classification, &window, &phase).unwrap();
        let text = patch_to_json(&ws, &patch);
        assert!(text.contains("\"window\""));
        assert!(text.contains("/"), "exact coordinates should print as p/q");
        let parsed: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(parsed["tiles"].as_array().unwrap().len(), patch.tiles.len());
    }
}
