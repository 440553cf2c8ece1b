//! Instance files: a JSON document with one top-level field per line and one
//! constraint row per line. Zero coefficients are dropped on write; infinite
//! bounds are written as the strings `"inf"` / `"-inf"`.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{Constraint, MilpInstance, Sense};
use crate::error::{Error, Result};

pub const INSTANCE_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq)]
struct Bound(f64);

impl Serialize for Bound {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0 == f64::INFINITY {
            s.serialize_str("inf")
        } else if self.0 == f64::NEG_INFINITY {
            s.serialize_str("-inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for Bound {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(Bound(v)),
            Raw::Text(t) if t == "inf" => Ok(Bound(f64::INFINITY)),
            Raw::Text(t) if t == "-inf" => Ok(Bound(f64::NEG_INFINITY)),
            Raw::Text(t) => Err(serde::de::Error::custom(format!("invalid bound `{t}`"))),
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInstance {
    schema_version: u64,
    name: String,
    sense: Sense,
    num_vars: usize,
    num_cons: usize,
    obj: Vec<f64>,
    var_lb: Vec<Bound>,
    var_ub: Vec<Bound>,
    is_integer: Vec<bool>,
    cons: Vec<Constraint>,
    seed: u64,
}

fn json<T: Serialize + ?Sized>(v: &T) -> String {
    serde_json::to_string(v).expect("in-memory serialization cannot fail")
}

/// Canonical text form of an instance. Identical instances give identical bytes.
pub fn instance_to_string(inst: &MilpInstance) -> String {
    let bounds = |v: &[f64]| json(&v.iter().map(|&b| Bound(b)).collect::<Vec<_>>());
    let mut out = String::new();
    out.push_str("{\n");
    let _ = writeln!(out, "\"schema_version\": {INSTANCE_SCHEMA_VERSION},");
    let _ = writeln!(out, "\"name\": {},", json(&inst.name));
    let _ = writeln!(out, "\"sense\": {},", json(&inst.sense));
    let _ = writeln!(out, "\"num_vars\": {},", inst.num_vars);
    let _ = writeln!(out, "\"num_cons\": {},", inst.num_cons);
    let _ = writeln!(out, "\"obj\": {},", json(&inst.obj));
    let _ = writeln!(out, "\"var_lb\": {},", bounds(&inst.var_lb));
    let _ = writeln!(out, "\"var_ub\": {},", bounds(&inst.var_ub));
    let _ = writeln!(out, "\"is_integer\": {},", json(&inst.is_integer));
    out.push_str("\"cons\": [\n");
    for (i, row) in inst.cons.iter().enumerate() {
        let kept = Constraint {
            entries: row.entries.iter().copied().filter(|&(_, a)| a != 0.0).collect(),
            rel: row.rel,
            rhs: row.rhs,
        };
        out.push_str(&json(&kept));
        out.push_str(if i + 1 < inst.cons.len() { ",\n" } else { "\n" });
    }
    out.push_str("],\n");
    let _ = writeln!(out, "\"seed\": {}", inst.seed);
    out.push_str("}\n");
    out
}

pub fn write_instance(inst: &MilpInstance, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, instance_to_string(inst)).map_err(|e| Error::io(path, e))
}

pub fn read_instance(path: impl AsRef<Path>) -> Result<MilpInstance> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_instance(&text, &path.display().to_string())
}

/// Finds `"schema_version": N` without requiring the rest of the file to parse.
fn sniff_schema_version(text: &str) -> Option<u64> {
    let at = text.find("\"schema_version\"")?;
    let rest = text[at + "\"schema_version\"".len()..].trim_start();
    let rest = rest.strip_prefix(':')?.trim_start();
    let digits: String = rest.chars().take_while(|c| c.is_ascii_digit()).collect();
    digits.parse().ok()
}

pub fn parse_instance(text: &str, origin: &str) -> Result<MilpInstance> {
    let version_error = |found: u64| Error::SchemaVersion {
        path: origin.to_string(),
        what: "instance",
        expected: INSTANCE_SCHEMA_VERSION,
        found,
    };
    if let Some(v) = sniff_schema_version(text) {
        if v != INSTANCE_SCHEMA_VERSION as u64 {
            return Err(version_error(v));
        }
    }
    let de = &mut serde_json::Deserializer::from_str(text);
    let raw: RawInstance = serde_path_to_error::deserialize(de).map_err(|e| {
        let field = match e.path().to_string() {
            p if p == "." => "<document>".to_string(),
            p => p,
        };
        Error::Parse {
            path: origin.to_string(),
            line: e.inner().line(),
            field,
            message: e.inner().to_string(),
        }
    })?;
    if raw.schema_version != INSTANCE_SCHEMA_VERSION as u64 {
        return Err(version_error(raw.schema_version));
    }
    let inst = MilpInstance {
        name: raw.name,
        sense: raw.sense,
        num_vars: raw.num_vars,
        num_cons: raw.num_cons,
        obj: raw.obj,
        cons: raw.cons,
        var_lb: raw.var_lb.into_iter().map(|b| b.0).collect(),
        var_ub: raw.var_ub.into_iter().map(|b| b.0).collect(),
        is_integer: raw.is_integer,
        seed: raw.seed,
    };
    inst.validate().map_err(|e| Error::Parse {
        path: origin.to_string(),
        line: 0,
        field: "<instance>".to_string(),
        message: e.to_string(),
    })?;
    Ok(inst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{generate_cap_facility_location, generate_set_covering};

    #[test]
    fn round_trip_is_field_equal() {
        let inst = generate_cap_facility_location(4, 3, 1.7, 5).unwrap();
        let back = parse_instance(&instance_to_string(&inst), "mem").unwrap();
        assert_eq!(back, inst);
    }

    #[test]
    fn infinite_bounds_survive() {
        let mut inst = generate_set_covering(3, 4, 0.5, 1).unwrap();
        inst.var_ub[0] = f64::INFINITY;
        inst.var_lb[1] = f64::NEG_INFINITY;
        let back = parse_instance(&instance_to_string(&inst), "mem").unwrap();
        assert_eq!(back, inst);
    }

    #[test]
    fn truncated_file_names_section() {
        let inst = generate_set_covering(6, 8, 0.4, 2).unwrap();
        let text = instance_to_string(&inst);
        let cut = text.find("\"cons\"").unwrap() + 40;
        match parse_instance(&text[..cut], "trunc.json") {
            Err(Error::Parse { field, line, .. }) => {
                assert!(field.starts_with("cons"), "field was {field}");
                assert!(line > 0);
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn missing_field_is_reported() {
        let inst = generate_set_covering(3, 4, 0.5, 1).unwrap();
        let text = instance_to_string(&inst).replace("\"seed\": 1\n", "\"extra\": 1\n");
        let err = parse_instance(&text, "x").unwrap_err();
        assert!(matches!(err, Error::Parse { .. }), "{err}");
    }

    #[test]
    fn schema_version_mismatch_is_distinct() {
        let inst = generate_set_covering(3, 4, 0.5, 1).unwrap();
        let text = instance_to_string(&inst).replace("\"schema_version\": 1", "\"schema_version\": 2");
        assert!(matches!(
            parse_instance(&text, "x"),
            Err(Error::SchemaVersion { found: 2, .. })
        ));
    }

    #[test]
    fn zero_coefficients_are_dropped() {
        let mut inst = generate_set_covering(3, 4, 0.5, 1).unwrap();
        inst.cons[0].entries.push((3, 0.0));
        let back = parse_instance(&instance_to_string(&inst), "mem").unwrap();
        assert!(back.cons[0].entries.iter().all(|&(_, a)| a != 0.0));
    }
}
