//! Scenario files: the JSON format consumed by the CLI and the web demo.
//!
//! Matrix entries are written as integers, `"p/q"` strings, or decimal
//! literals; decimals are ingested exactly (`0.3` becomes 3/10), which
//! requires reading JSON numbers as raw tokens rather than floats.

use crate::game::{Depth, GameConfig};
use crate::ratmat::{parse_rat, Matrix, Rat};
use serde_json::Value;
use std::collections::BTreeMap;
use std::fmt;

/// A parsed scenario. `a`/`b`/`m` drive the game commands; `c` feeds the
/// sensor-fixed commands; the `a0/b1/b2/c0` quadruple feeds the
/// normal-form reduction.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub name: String,
    pub a: Option<Matrix>,
    pub b: Option<Matrix>,
    pub m: Option<usize>,
    pub f0: Option<Matrix>,
    pub c: Option<Matrix>,
    pub a0: Option<Matrix>,
    pub b1: Option<Matrix>,
    pub b2: Option<Matrix>,
    pub c0: Option<Matrix>,
    pub depth: Depth,
    pub horizon: usize,
    pub seed: u64,
    pub budget: usize,
    pub overrides: Vec<(usize, Matrix)>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct ParseError(pub String);

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "scenario parse error: {}", self.0)
    }
}

fn bad(msg: impl Into<String>) -> ParseError {
    ParseError(msg.into())
}

/// Entry from a JSON token: strings go through the rational parser;
/// numbers are re-read from their literal text so decimals stay exact.
fn entry_from_value(v: &Value) -> Result<Rat, ParseError> {
    match v {
        Value::String(s) => parse_rat(s).map_err(bad),
        Value::Number(n) => parse_rat(&n.to_string()).map_err(bad),
        other => Err(bad(format!(
            "matrix entry must be a number or string, got {other}"
        ))),
    }
}

fn matrix_from_value(v: &Value, what: &str) -> Result<Matrix, ParseError> {
    let rows = v
        .as_array()
        .ok_or_else(|| bad(format!("{what} must be an array of rows")))?;
    let mut out = Vec::with_capacity(rows.len());
    let mut width = None;
    for (i, row) in rows.iter().enumerate() {
        let cells = row
            .as_array()
            .ok_or_else(|| bad(format!("{what} row {i} must be an array")))?;
        match width {
            None => width = Some(cells.len()),
            Some(w) if w != cells.len() => {
                return Err(bad(format!(
                    "{what} row {i} has {} entries, expected {w}",
                    cells.len()
                )))
            }
            _ => {}
        }
        let parsed: Result<Vec<Rat>, _> = cells.iter().map(entry_from_value).collect();
        out.push(parsed?);
    }
    if out.is_empty() {
        return Err(bad(format!("{what} must have at least one row")));
    }
    Ok(Matrix::from_rows(out))
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Scenario, ParseError> {
        let v: Value = serde_json::from_str(text).map_err(|e| bad(e.to_string()))?;
        let obj = v
            .as_object()
            .ok_or_else(|| bad("scenario must be a JSON object"))?;
        let get_matrix = |key: &str| -> Result<Option<Matrix>, ParseError> {
            obj.get(key).map(|x| matrix_from_value(x, key)).transpose()
        };
        let get_usize = |key: &str| -> Result<Option<usize>, ParseError> {
            obj.get(key)
                .map(|x| {
                    x.as_u64()
                        .map(|u| u as usize)
                        .ok_or_else(|| bad(format!("{key} must be a non-negative integer")))
                })
                .transpose()
        };
        let depth = match obj.get("depth").and_then(|d| d.as_str()) {
            None | Some("one-step") => Depth::OneStep,
            Some("two-step") => Depth::TwoStep,
            Some(other) => return Err(bad(format!("unknown depth {other:?}"))),
        };
        let mut overrides = Vec::new();
        if let Some(list) = obj.get("overrides") {
            let arr = list
                .as_array()
                .ok_or_else(|| bad("overrides must be an array"))?;
            for item in arr {
                let o = item
                    .as_object()
                    .ok_or_else(|| bad("override must be an object"))?;
                let epoch = o
                    .get("epoch")
                    .and_then(|e| e.as_u64())
                    .ok_or_else(|| bad("override needs an integer epoch"))?
                    as usize;
                let matrix = matrix_from_value(
                    o.get("matrix")
                        .ok_or_else(|| bad("override needs a matrix"))?,
                    "override matrix",
                )?;
                overrides.push((epoch, matrix));
            }
        }
        Ok(Scenario {
            name: obj
                .get("name")
                .and_then(|n| n.as_str())
                .unwrap_or("unnamed")
                .to_string(),
            a: get_matrix("a")?,
            b: get_matrix("b")?,
            m: get_usize("m")?,
            f0: get_matrix("f0")?,
            c: get_matrix("c")?,
            a0: get_matrix("a0")?,
            b1: get_matrix("b1")?,
            b2: get_matrix("b2")?,
            c0: get_matrix("c0")?,
            depth,
            horizon: get_usize("horizon")?.unwrap_or(12),
            seed: obj
                .get("seed")
                .map(|s| s.as_u64().ok_or_else(|| bad("seed must be an integer")))
                .transpose()?
                .unwrap_or(0),
            budget: get_usize("budget")?.unwrap_or(16),
            overrides,
        })
    }

    /// The game configuration, when the scenario carries a game system.
    pub fn game_config(&self) -> Result<GameConfig, ParseError> {
        let a = self
            .a
            .clone()
            .ok_or_else(|| bad("scenario needs matrix a"))?;
        let b = self
            .b
            .clone()
            .ok_or_else(|| bad("scenario needs matrix b"))?;
        let m = self.m.ok_or_else(|| bad("scenario needs sensor count m"))?;
        let n = a.rows();
        if !a.is_square() {
            return Err(bad("matrix a must be square"));
        }
        if b.rows() != n {
            return Err(bad("matrix b must have as many rows as a"));
        }
        let f0 = match &self.f0 {
            Some(f) => {
                if f.rows() != b.cols() || f.cols() != n {
                    return Err(bad("f0 must be k x n"));
                }
                f.clone()
            }
            None => Matrix::zeros(b.cols(), n),
        };
        let mut overrides = BTreeMap::new();
        for (epoch, m_ovr) in &self.overrides {
            overrides.insert(*epoch, m_ovr.clone());
        }
        Ok(GameConfig {
            a,
            b,
            m,
            f0,
            horizon: self.horizon,
            depth: self.depth,
            overrides,
            search_budget: self.budget,
            seed: self.seed,
        })
    }

    /// Serializes back to the scenario format (entries as exact strings).
    pub fn to_json(&self) -> Value {
        fn mat_value(m: &Matrix) -> Value {
            Value::Array(
                (0..m.rows())
                    .map(|r| {
                        Value::Array(
                            (0..m.cols())
                                .map(|c| Value::String(m[(r, c)].to_string()))
                                .collect(),
                        )
                    })
                    .collect(),
            )
        }
        let mut obj = serde_json::Map::new();
        obj.insert("name".into(), Value::String(self.name.clone()));
        for (key, mat) in [
            ("a", &self.a),
            ("b", &self.b),
            ("f0", &self.f0),
            ("c", &self.c),
            ("a0", &self.a0),
            ("b1", &self.b1),
            ("b2", &self.b2),
            ("c0", &self.c0),
        ] {
            if let Some(m) = mat {
                obj.insert(key.into(), mat_value(m));
            }
        }
        if let Some(m) = self.m {
            obj.insert("m".into(), Value::from(m as u64));
        }
        obj.insert(
            "depth".into(),
            Value::String(
                match self.depth {
                    Depth::OneStep => "one-step",
                    Depth::TwoStep => "two-step",
                }
                .into(),
            ),
        );
        obj.insert("horizon".into(), Value::from(self.horizon as u64));
        obj.insert("seed".into(), Value::from(self.seed));
        obj.insert("budget".into(), Value::from(self.budget as u64));
        if !self.overrides.is_empty() {
            obj.insert(
                "overrides".into(),
                Value::Array(
                    self.overrides
                        .iter()
                        .map(|(e, m)| {
                            let mut o = serde_json::Map::new();
                            o.insert("epoch".into(), Value::from(*e as u64));
                            o.insert("matrix".into(), mat_value(m));
                            Value::Object(o)
                        })
                        .collect(),
                ),
            );
        }
        Value::Object(obj)
    }
}
