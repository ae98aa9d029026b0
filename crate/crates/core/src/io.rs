//! Family files.
//!
//! ```json
//! {"dim": 2, "L": 3, "points": ["a", "b"], "weights": ["1/2", "1/2"],
//!  "form": [["1/1", "0/1"], ["0/1", "1/1"]],
//!  "values": [[["1/1", "0/1"], ["0/1", "1/1"]], ...]}
//! ```
//!
//! `values[l][x]` is the vector `f_l(x)`. Scalars are either all `"p/q"`
//! strings (exact mode) or all JSON numbers (float mode).

use std::path::Path;

use serde_json::{json, Value};

use crate::bilinear::{BilinearForm, DiscreteMeasureSpace, FunctionFamily};
use crate::error::{Error, Result};
use crate::scalar::{parse_rational, Mode, Rational, Scalar};

#[derive(Debug, Clone, PartialEq)]
pub enum LoadedFamily {
    Exact(BilinearForm<Rational>, FunctionFamily<Rational>),
    Float(BilinearForm<f64>, FunctionFamily<f64>),
}

impl LoadedFamily {
    pub fn mode(&self) -> Mode {
        match self {
            LoadedFamily::Exact(..) => Mode::Exact,
            LoadedFamily::Float(..) => Mode::Float,
        }
    }

    /// Converts to float; float input is returned unchanged.
    pub fn into_float(self) -> (BilinearForm<f64>, FunctionFamily<f64>) {
        match self {
            LoadedFamily::Exact(b, f) => (b.map_scalar(Scalar::to_f64), f.map_scalar(Scalar::to_f64)),
            LoadedFamily::Float(b, f) => (b, f),
        }
    }
}

fn parse_err(msg: impl Into<String>) -> Error {
    Error::Parse(msg.into())
}

fn field<'a>(v: &'a Value, key: &str) -> Result<&'a Value> {
    v.get(key).ok_or_else(|| parse_err(format!("missing field `{key}`")))
}

fn array<'a>(v: &'a Value, what: &str) -> Result<&'a Vec<Value>> {
    v.as_array().ok_or_else(|| parse_err(format!("`{what}` must be an array")))
}

fn count(v: &Value, key: &str) -> Result<usize> {
    field(v, key)?
        .as_u64()
        .map(|n| n as usize)
        .ok_or_else(|| parse_err(format!("`{key}` must be a non-negative integer")))
}

fn collect_scalars<'a>(v: &'a Value, out: &mut Vec<&'a Value>) {
    match v {
        Value::Array(items) => items.iter().for_each(|i| collect_scalars(i, out)),
        other => out.push(other),
    }
}

fn infer_mode(doc: &Value) -> Result<Mode> {
    let mut leaves = Vec::new();
    for key in ["weights", "form", "values"] {
        collect_scalars(field(doc, key)?, &mut leaves);
    }
    let strings = leaves.iter().filter(|v| v.is_string()).count();
    let numbers = leaves.iter().filter(|v| v.is_number()).count();
    if strings + numbers != leaves.len() {
        return Err(parse_err("scalars must be \"p/q\" strings or numbers"));
    }
    match (strings, numbers) {
        (_, 0) => Ok(Mode::Exact),
        (0, _) => Ok(Mode::Float),
        _ => Err(Error::ModeMixing(format!("{strings} rational strings and {numbers} numbers in one file"))),
    }
}

trait Leaf: Scalar {
    fn leaf(v: &Value) -> Result<Self>;
    fn emit(&self) -> Value;
}

impl Leaf for Rational {
    fn leaf(v: &Value) -> Result<Self> {
        parse_rational(v.as_str().ok_or_else(|| parse_err("expected a \"p/q\" string"))?)
    }

    fn emit(&self) -> Value {
        self.to_json()
    }
}

impl Leaf for f64 {
    fn leaf(v: &Value) -> Result<Self> {
        v.as_f64().ok_or_else(|| parse_err("expected a number"))
    }

    fn emit(&self) -> Value {
        self.to_json()
    }
}

fn vector<S: Leaf>(v: &Value, what: &str) -> Result<Vec<S>> {
    array(v, what)?.iter().map(S::leaf).collect()
}

fn decode<S: Leaf>(doc: &Value) -> Result<(BilinearForm<S>, FunctionFamily<S>)> {
    let dim = count(doc, "dim")?;
    let len = count(doc, "L")?;
    let points = array(field(doc, "points")?, "points")?
        .iter()
        .map(|p| match p {
            Value::String(s) => Ok(s.clone()),
            Value::Number(n) => Ok(n.to_string()),
            _ => Err(parse_err("points must be strings or numbers")),
        })
        .collect::<Result<Vec<_>>>()?;
    let weights = vector::<S>(field(doc, "weights")?, "weights")?;
    let space = DiscreteMeasureSpace::new(points, weights)?;
    let form = array(field(doc, "form")?, "form")?
        .iter()
        .map(|row| vector::<S>(row, "form row"))
        .collect::<Result<Vec<_>>>()?;
    let form = BilinearForm::new(form)?;
    let values = array(field(doc, "values")?, "values")?
        .iter()
        .map(|member| array(member, "values[l]")?.iter().map(|vx| vector::<S>(vx, "values[l][x]")).collect())
        .collect::<Result<Vec<Vec<Vec<S>>>>>()?;
    if values.len() != len {
        return Err(parse_err(format!("`L` is {len} but {} members given", values.len())));
    }
    let family = FunctionFamily::new(space, dim, values)?;
    family.check_form(&form)?;
    Ok((form, family))
}

pub fn family_from_json(doc: &Value) -> Result<LoadedFamily> {
    match infer_mode(doc)? {
        Mode::Exact => decode::<Rational>(doc).map(|(b, f)| LoadedFamily::Exact(b, f)),
        Mode::Float => decode::<f64>(doc).map(|(b, f)| LoadedFamily::Float(b, f)),
    }
}

pub fn family_from_str(s: &str) -> Result<LoadedFamily> {
    family_from_json(&serde_json::from_str(s)?)
}

pub fn load_family(path: &Path) -> Result<LoadedFamily> {
    family_from_str(&std::fs::read_to_string(path)?)
}

fn encode<S: Leaf>(b: &BilinearForm<S>, family: &FunctionFamily<S>) -> Value {
    let row = |v: &[S]| Value::Array(v.iter().map(Leaf::emit).collect());
    json!({
        "dim": family.dim(),
        "L": family.len(),
        "points": family.space().points(),
        "weights": row(family.space().weights()),
        "form": b.matrix().iter().map(|r| row(r)).collect::<Vec<_>>(),
        "values": family.values().iter().map(|m| m.iter().map(|v| row(v)).collect::<Vec<_>>()).collect::<Vec<_>>(),
    })
}

pub fn family_to_json(loaded: &LoadedFamily) -> Value {
    match loaded {
        LoadedFamily::Exact(b, f) => encode(b, f),
        LoadedFamily::Float(b, f) => encode(b, f),
    }
}

pub fn save_family(path: &Path, loaded: &LoadedFamily) -> Result<()> {
    let mut text = serde_json::to_string_pretty(&family_to_json(loaded))?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}
