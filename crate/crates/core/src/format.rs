//! File formats: distribution JSON, trajectory CSV and its metadata sidecar.
//!
//! Exact scalars travel as strings (`"5/4 + 3/4*sqrt(7/3)"`), float scalars
//! as JSON numbers. Float values print in shortest round-trip form, so
//! writing and re-reading is lossless in both modes.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::exactnum::QuadraticNumber;
use crate::markov::{Atom, ConditionalDistribution, Trajectory};
use crate::qcore::QParams;
use crate::scalar::RealScalar;

/// A scalar with a JSON representation.
pub trait JsonScalar: RealScalar {
    /// `"exact"` or `"float"`.
    const MODE: &'static str;

    fn to_json(&self) -> Value;

    fn from_json(value: &Value) -> Result<Self>;

    /// Inverse of `Display`.
    fn parse_text(text: &str) -> Result<Self>;
}

impl JsonScalar for f64 {
    const MODE: &'static str = "float";

    fn to_json(&self) -> Value {
        serde_json::Number::from_f64(*self)
            .map(Value::Number)
            .unwrap_or_else(|| Value::String(self.to_string()))
    }

    fn from_json(value: &Value) -> Result<Self> {
        match value {
            Value::Number(n) => n
                .as_f64()
                .ok_or_else(|| Error::Parse(format!("{n} is not a float"))),
            Value::String(s) => parse_f64(s),
            other => Err(Error::Parse(format!("expected a number, found {other}"))),
        }
    }

    fn parse_text(text: &str) -> Result<Self> {
        parse_f64(text)
    }
}

impl JsonScalar for QuadraticNumber {
    const MODE: &'static str = "exact";

    fn to_json(&self) -> Value {
        Value::String(self.to_string())
    }

    fn from_json(value: &Value) -> Result<Self> {
        match value {
            Value::String(s) => s.parse(),
            Value::Number(n) if n.is_i64() => n.to_string().parse(),
            other => Err(Error::Parse(format!(
                "exact scalars are strings like \"a + b*sqrt(D)\", found {other}"
            ))),
        }
    }

    fn parse_text(text: &str) -> Result<Self> {
        text.parse()
    }
}

/// Parses a float, accepting `p/q` as well.
pub fn parse_f64(text: &str) -> Result<f64> {
    let text = text.trim();
    if let Some((num, den)) = text.split_once('/') {
        let num = parse_f64(num)?;
        let den = parse_f64(den)?;
        return Ok(num / den);
    }
    text.parse::<f64>()
        .map_err(|e| Error::Parse(format!("{text:?}: {e}")))
}

fn field<'a>(obj: &'a Value, key: &str) -> Result<&'a Value> {
    obj.get(key)
        .ok_or_else(|| Error::Parse(format!("missing field {key:?}")))
}

fn integer(obj: &Value, key: &str) -> Result<i64> {
    field(obj, key)?
        .as_i64()
        .ok_or_else(|| Error::Parse(format!("field {key:?} must be an integer")))
}

pub fn distribution_to_json<T: JsonScalar>(dist: &ConditionalDistribution<T>) -> Value {
    let atoms: Vec<Value> = dist
        .atoms()
        .iter()
        .map(|(k, atom)| json!({"k": k, "value": atom.value.to_json(), "mass": atom.mass.to_json()}))
        .collect();
    json!({
        "q": dist.params().q().to_string(),
        "m": dist.order(),
        "y": dist.y().to_string(),
        "atoms": atoms,
        "mode": T::MODE,
    })
}

pub fn distribution_to_string<T: JsonScalar>(dist: &ConditionalDistribution<T>) -> String {
    serde_json::to_string_pretty(&distribution_to_json(dist)).expect("json serializes")
}

pub fn distribution_from_json<T: JsonScalar>(value: &Value) -> Result<ConditionalDistribution<T>> {
    let mode = field(value, "mode")?.as_str().unwrap_or_default();
    if mode != T::MODE {
        return Err(Error::Parse(format!(
            "distribution is in {mode:?} mode, expected {:?}",
            T::MODE
        )));
    }
    let text = |key: &str| -> Result<T> {
        match field(value, key)? {
            Value::String(s) => T::parse_text(s),
            other => T::from_json(other),
        }
    };
    let q = text("q")?;
    let y = text("y")?;
    let m = usize::try_from(integer(value, "m")?)
        .map_err(|_| Error::Parse("field \"m\" must be non-negative".into()))?;
    let mut atoms = BTreeMap::new();
    let list = field(value, "atoms")?
        .as_array()
        .ok_or_else(|| Error::Parse("field \"atoms\" must be an array".into()))?;
    for entry in list {
        let k = integer(entry, "k")?;
        let atom = Atom {
            value: T::from_json(field(entry, "value")?)?,
            mass: T::from_json(field(entry, "mass")?)?,
        };
        if atoms.insert(k, atom).is_some() {
            return Err(Error::Parse(format!("duplicate atom index {k}")));
        }
    }
    if atoms.len() != m {
        return Err(Error::Parse(format!("{} atoms for m = {m}", atoms.len())));
    }
    Ok(ConditionalDistribution::from_atoms(m, y, QParams::new(q)?, atoms))
}

pub fn distribution_from_str<T: JsonScalar>(text: &str) -> Result<ConditionalDistribution<T>> {
    let value: Value = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    distribution_from_json(&value)
}

/// `step,state` header, one row per state.
pub fn trajectory_csv<T: RealScalar>(traj: &Trajectory<T>) -> String {
    let mut out = String::from("step,state\n");
    for (step, state) in traj.states.iter().enumerate() {
        writeln!(out, "{step},{state}").expect("writing to a String");
    }
    out
}

pub fn parse_trajectory_csv<T: JsonScalar>(text: &str) -> Result<Vec<T>> {
    let mut lines = text.lines();
    match lines.next() {
        Some("step,state") => {}
        other => return Err(Error::Parse(format!("bad trajectory header {other:?}"))),
    }
    lines
        .enumerate()
        .map(|(i, line)| {
            let (step, state) = line
                .split_once(',')
                .ok_or_else(|| Error::Parse(format!("row {i}: expected step,state")))?;
            if step.parse::<usize>() != Ok(i) {
                return Err(Error::Parse(format!("row {i}: step column reads {step:?}")));
            }
            T::parse_text(state)
        })
        .collect()
}

pub fn trajectory_metadata<T: JsonScalar>(traj: &Trajectory<T>) -> Value {
    let c = &traj.config;
    json!({
        "q": c.q.to_string(),
        "m": c.m,
        "initial_y": c.initial_y.to_string(),
        "steps": c.steps,
        "seed": c.seed,
        "state_bound": c.state_bound,
        "mode": T::MODE,
        "jumps": traj.jumps,
    })
}

/// The sidecar path for a CSV file: `FILE.meta.json`.
pub fn metadata_path(csv: &Path) -> PathBuf {
    let mut name = csv.as_os_str().to_owned();
    name.push(".meta.json");
    PathBuf::from(name)
}

/// Writes the CSV to `path` and the metadata to [`metadata_path`].
pub fn write_trajectory<T: JsonScalar>(path: &Path, traj: &Trajectory<T>) -> Result<()> {
    let io = |e: std::io::Error| Error::Domain(format!("{}: {e}", path.display()));
    std::fs::write(path, trajectory_csv(traj)).map_err(io)?;
    let meta = serde_json::to_string_pretty(&trajectory_metadata(traj)).expect("json serializes");
    std::fs::write(metadata_path(path), meta + "\n").map_err(io)
}
