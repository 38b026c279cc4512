//! Document schema: versioned envelopes, complex numbers as `[re, im]`,
//! matrices as `{shape, data}` in row-major order.

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::boundary::{ComponentSignature, Ordering, Signature, VLayout};
use crate::error::{Error, Result};
use crate::intlin::IMat;
use crate::lattice_cft::{make_even_lattice, EvenLattice};
use crate::linalg::{CMat, C};
use crate::oav::OpenAbelianVariety;
use crate::torelli::DomainSpec;

pub const SCHEMA_VERSION: &str = "openjac/1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    CircleDomain,
    Oav,
    Lattice,
    Report,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub version: String,
    pub kind: Kind,
    pub payload: Value,
}

impl Envelope {
    pub fn new(kind: Kind, payload: Value) -> Self {
        Self { version: SCHEMA_VERSION.to_string(), kind, payload }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let env: Envelope = serde_json::from_str(text).map_err(|e| Error::Input(format!("bad document: {e}")))?;
        if env.version != SCHEMA_VERSION {
            return Err(Error::Input(format!("unsupported schema version {:?}", env.version)));
        }
        Ok(env)
    }

    pub fn expect(self, kind: Kind) -> Result<Value> {
        if self.kind != kind {
            return Err(Error::Input(format!("expected a {kind:?} document, got {:?}", self.kind)));
        }
        Ok(self.payload)
    }

    pub fn to_value(&self) -> Value {
        serde_json::to_value(self).expect("envelope serializes")
    }

    pub fn to_canonical(&self) -> String {
        canonical(&self.to_value())
    }
}

/// Compact JSON with sorted keys and every float written as `{:.16e}`.
pub fn canonical(v: &Value) -> String {
    let mut out = String::new();
    write_value(v, &mut out);
    out.push('\n');
    out
}

fn write_value(v: &Value, out: &mut String) {
    match v {
        Value::Null | Value::Bool(_) | Value::String(_) => out.push_str(&v.to_string()),
        Value::Number(n) => {
            if n.is_f64() {
                out.push_str(&format!("{:.16e}", n.as_f64().unwrap_or(f64::NAN)));
            } else {
                out.push_str(&n.to_string());
            }
        }
        Value::Array(items) => {
            out.push('[');
            for (k, item) in items.iter().enumerate() {
                if k > 0 {
                    out.push(',');
                }
                write_value(item, out);
            }
            out.push(']');
        }
        Value::Object(map) => {
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push('{');
            for (k, key) in keys.into_iter().enumerate() {
                if k > 0 {
                    out.push(',');
                }
                out.push_str(&Value::String(key.clone()).to_string());
                out.push(':');
                write_value(&map[key], out);
            }
            out.push('}');
        }
    }
}

fn float(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}

pub fn complex_to_value(z: C) -> Value {
    Value::Array(vec![float(z.re), float(z.im)])
}

pub fn complex_from_value(v: &Value) -> Result<C> {
    match v.as_array().map(|a| a.as_slice()) {
        Some([a, b]) => match (a.as_f64(), b.as_f64()) {
            (Some(x), Some(y)) => Ok(C::new(x, y)),
            _ => Err(Error::Input("complex entries must be numbers".into())),
        },
        _ => Err(Error::Input("complex numbers are [re, im] pairs".into())),
    }
}

pub fn matrix_to_value(m: &CMat) -> Value {
    let data = (0..m.nrows())
        .flat_map(|i| (0..m.ncols()).map(move |j| (i, j)))
        .map(|(i, j)| complex_to_value(m[(i, j)]))
        .collect();
    json!({ "shape": [m.nrows(), m.ncols()], "data": Value::Array(data) })
}

pub fn matrix_from_value(v: &Value) -> Result<CMat> {
    let shape = v
        .get("shape")
        .and_then(Value::as_array)
        .filter(|s| s.len() == 2)
        .ok_or_else(|| Error::Input("matrix needs a two-entry shape".into()))?;
    let dims: Vec<usize> = shape
        .iter()
        .map(|s| s.as_u64().map(|x| x as usize).ok_or_else(|| Error::Input("bad matrix shape".into())))
        .collect::<Result<_>>()?;
    let data = v
        .get("data")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::Input("matrix needs data".into()))?;
    if data.len() != dims[0] * dims[1] {
        return Err(Error::Input(format!(
            "matrix data has {} entries, shape needs {}",
            data.len(),
            dims[0] * dims[1]
        )));
    }
    let entries = data.iter().map(complex_from_value).collect::<Result<Vec<_>>>()?;
    Ok(CMat::from_row_slice(dims[0], dims[1], &entries))
}

fn field<'a>(v: &'a Value, key: &str) -> Result<&'a Value> {
    v.get(key).ok_or_else(|| Error::Input(format!("missing field {key:?}")))
}

fn decode<T: for<'de> Deserialize<'de>>(v: &Value, what: &str) -> Result<T> {
    serde_json::from_value(v.clone()).map_err(|e| Error::Input(format!("bad {what}: {e}")))
}

pub fn oav_to_value(x: &OpenAbelianVariety) -> Value {
    json!({
        "truncation": x.truncation(),
        "components": serde_json::to_value(x.signature().components()).expect("signature serializes"),
        "ordering": x.ordering().ids(),
        "omega": matrix_to_value(x.omega()),
        "iota": matrix_to_value(x.iota()),
        "w": matrix_to_value(x.w()),
        "lattice": matrix_to_value(x.lattice()),
        "truncation_budget": float(x.truncation_budget()),
    })
}

pub fn oav_from_value(v: &Value) -> Result<OpenAbelianVariety> {
    let truncation: usize = decode(field(v, "truncation")?, "truncation")?;
    let comps: Vec<ComponentSignature> = decode(field(v, "components")?, "components")?;
    let comps = comps
        .into_iter()
        .map(|c| ComponentSignature::new(c.id, c.boundaries))
        .collect::<Result<Vec<_>>>()?;
    let layout = VLayout::new(Signature::new(comps)?, truncation);
    let ordering = Ordering::new(decode(field(v, "ordering")?, "ordering")?)?;
    let budget = field(v, "truncation_budget")?
        .as_f64()
        .ok_or_else(|| Error::Input("truncation_budget must be a number".into()))?;
    OpenAbelianVariety::from_parts(
        layout,
        ordering,
        matrix_from_value(field(v, "omega")?)?,
        matrix_from_value(field(v, "iota")?)?,
        matrix_from_value(field(v, "w")?)?,
        matrix_from_value(field(v, "lattice")?)?,
        budget,
    )
}

pub fn domain_to_value(spec: &DomainSpec) -> Value {
    serde_json::to_value(spec).expect("domain serializes")
}

pub fn domain_from_value(v: &Value) -> Result<DomainSpec> {
    decode(v, "circle domain")
}

pub fn lattice_to_value(l: &EvenLattice) -> Value {
    json!({ "gram": l.gram() })
}

pub fn lattice_from_value(v: &Value) -> Result<EvenLattice> {
    let gram: IMat = decode(field(v, "gram")?, "Gram matrix")?;
    make_even_lattice(gram)
}

/// Parses either an envelope of the given kind or a bare payload.
pub fn parse_payload(text: &str, kind: Kind) -> Result<Value> {
    let v: Value = serde_json::from_str(text).map_err(|e| Error::Input(format!("bad JSON: {e}")))?;
    if v.get("version").is_some() && v.get("kind").is_some() {
        Envelope::parse(text)?.expect(kind)
    } else {
        Ok(v)
    }
}

/// Flattens a report into `key: value` lines for the text format.
pub fn render_text(v: &Value) -> String {
    let mut out = String::new();
    render_into(v, "", &mut out);
    out
}

fn render_into(v: &Value, prefix: &str, out: &mut String) {
    match v {
        Value::Object(map) => {
            let sorted: Map<String, Value> = map.clone().into_iter().collect();
            let is_matrix = map.contains_key("shape") && map.contains_key("data") && map.len() == 2;
            if is_matrix {
                if let Ok(m) = matrix_from_value(v) {
                    for i in 0..m.nrows() {
                        let row: Vec<String> = (0..m.ncols())
                            .map(|j| format!("{:+.10e}{:+.10e}i", m[(i, j)].re, m[(i, j)].im))
                            .collect();
                        out.push_str(&format!("{prefix}[{i}]: {}\n", row.join("  ")));
                    }
                    return;
                }
            }
            for (k, item) in sorted.iter() {
                let p = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                render_into(item, &p, out);
            }
        }
        _ => out.push_str(&format!("{prefix}: {}", canonical(v))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torelli::{torelli, CircleDomain};

    #[test]
    fn floats_use_fixed_format() {
        assert_eq!(canonical(&json!({"b": 0.5, "a": 2})), "{\"a\":2,\"b\":5.0000000000000000e-1}\n");
    }

    #[test]
    fn oav_round_trip() {
        let x = torelli(&CircleDomain::annulus(0.5).unwrap(), 6).unwrap();
        let text = Envelope::new(Kind::Oav, oav_to_value(&x)).to_canonical();
        let y = oav_from_value(&Envelope::parse(&text).unwrap().expect(Kind::Oav).unwrap()).unwrap();
        assert_eq!(x.w(), y.w());
        assert_eq!(x.omega(), y.omega());
        assert_eq!(x.ordering(), y.ordering());
        assert_eq!(x.signature(), y.signature());
    }
}
