//! JSON and text formats. Floats are written with 17 significant digits.

use std::io::{self, Write};
use std::path::Path;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::ser::Formatter;

use crate::degree::{DegreeFunction, DegreeSequence};
use crate::error::{Error, Result};
use crate::graphon::{StepCDF, StepGraphon};

/// Compact JSON with every float printed as `d.dddddddddddddddde±x`;
/// non-finite floats become `null`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Float17;

impl Formatter for Float17 {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            write!(writer, "{value:.16e}")
        } else {
            writer.write_all(b"null")
        }
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

pub fn to_json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Float17);
    value.serialize(&mut ser)?;
    Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
}

/// Same as [`to_json`], plus a trailing newline.
pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut s = to_json(value)?;
    s.push('\n');
    std::fs::write(path, s)?;
    Ok(())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

#[derive(Serialize, Deserialize)]
struct GraphonRepr {
    block_weights: Vec<f64>,
    values: Vec<Vec<f64>>,
}

impl Serialize for StepGraphon {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        GraphonRepr { block_weights: self.weights().to_vec(), values: self.rows() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for StepGraphon {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = GraphonRepr::deserialize(d)?;
        StepGraphon::new(r.block_weights, r.values).map_err(D::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
struct CdfRepr {
    jumps: Vec<f64>,
    cdf: Vec<f64>,
}

impl Serialize for StepCDF {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        CdfRepr { jumps: self.jumps().to_vec(), cdf: self.cdf().to_vec() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for StepCDF {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = CdfRepr::deserialize(d)?;
        StepCDF::new(r.jumps, r.cdf).map_err(D::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
struct DegreeFunctionRepr {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    c1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    c2: Option<f64>,
}

impl Serialize for DegreeFunction {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        DegreeFunctionRepr {
            breakpoints: self.breakpoints().to_vec(),
            values: self.values().to_vec(),
            c1: Some(self.c1()),
            c2: Some(self.c2()),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for DegreeFunction {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = DegreeFunctionRepr::deserialize(d)?;
        DegreeFunction::with_bounds(r.breakpoints, r.values, r.c1, r.c2).map_err(D::Error::custom)
    }
}

impl Serialize for DegreeSequence {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.as_slice().serialize(s)
    }
}

impl<'de> Deserialize<'de> for DegreeSequence {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<usize>::deserialize(d)?;
        DegreeSequence::new(v).map_err(D::Error::custom)
    }
}

/// Parses a degree sequence written either as a JSON array or as one integer
/// per line (blank lines and `#` comments ignored).
pub fn parse_degree_sequence(text: &str) -> Result<DegreeSequence> {
    let t = text.trim();
    if t.starts_with('[') {
        return Ok(serde_json::from_str(t)?);
    }
    let mut d = Vec::new();
    for line in t.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
        d.push(
            line.parse::<usize>()
                .map_err(|e| Error::Parse(format!("bad degree `{line}`: {e}")))?,
        );
    }
    DegreeSequence::new(d)
}
