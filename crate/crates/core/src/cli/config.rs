//! Run configuration documents.
//!
//! ```json
//! {
//!   "schema_version": 1,
//!   "modes": 2,
//!   "states": [{"type": "squeezed", "r": 0.5}, {"type": "thermal", "v": 2.0}],
//!   "unitary": {"file": "u.txt"},
//!   "patterns": ["11", [0, 1]],
//!   "shots": 100000,
//!   "seed": 7
//! }
//! ```
//!
//! `unitary` may be inline (rows of `[re, im]` pairs, bare numbers read as
//! real), `{"file": path}` relative to the config's directory,
//! `{"haar_seed": n}`, or `"identity"`. `patterns` may be replaced by
//! `"n_max": n`. `coherent` (a list of `[re, im]` amplitudes) replaces
//! `states` for coherent-state inputs.

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use super::matrix_io::read_matrix;
use crate::error::{Error, Result};
use crate::interferometer::Interferometer;
use crate::numeric::CMatrix;
use crate::pattern::{enumerate_patterns, DetectionPattern};
use crate::states::{GaussianModeState, StateDescriptor};

pub const SCHEMA_VERSION: u64 = 1;

const KNOWN_FIELDS: &[&str] = &[
    "schema_version",
    "modes",
    "states",
    "coherent",
    "unitary",
    "patterns",
    "n_max",
    "shots",
    "seed",
];

#[derive(Clone, Debug)]
pub enum Inputs {
    Gaussian(Vec<GaussianModeState>),
    Coherent(Vec<Complex64>),
}

#[derive(Clone, Debug)]
pub enum PatternSpec {
    List(Vec<DetectionPattern>),
    UpTo(usize),
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub modes: usize,
    pub inputs: Inputs,
    pub network: Interferometer,
    pub patterns: Option<PatternSpec>,
    pub shots: Option<u64>,
    pub seed: Option<u64>,
    /// SHA-256 over the config bytes followed by any sidecar files.
    pub hash: String,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path)
            .map_err(|e| Error::config("<file>", format!("cannot read {}: {e}", path.display())))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_bytes(&bytes, &base)
    }

    pub fn from_bytes(bytes: &[u8], base: &Path) -> Result<Self> {
        let doc: Value = serde_json::from_slice(bytes)
            .map_err(|e| Error::config("<root>", format!("invalid JSON: {e}")))?;
        let obj = doc
            .as_object()
            .ok_or_else(|| Error::config("<root>", "expected a JSON object"))?;
        for key in obj.keys() {
            if !KNOWN_FIELDS.contains(&key.as_str()) {
                return Err(Error::config(key.as_str(), "unknown field"));
            }
        }

        let version = require_u64(obj, "schema_version")?;
        if version != SCHEMA_VERSION {
            return Err(Error::config(
                "schema_version",
                format!("unsupported version {version}, expected {SCHEMA_VERSION}"),
            ));
        }
        let modes = require_u64(obj, "modes")? as usize;
        if modes == 0 {
            return Err(Error::config("modes", "must be at least 1"));
        }

        let inputs = match (obj.get("states"), obj.get("coherent")) {
            (Some(_), Some(_)) => return Err(Error::config("coherent", "cannot be combined with states")),
            (None, None) => return Err(Error::config("states", "missing field")),
            (Some(v), None) => Inputs::Gaussian(parse_states(v, modes)?),
            (None, Some(v)) => Inputs::Coherent(parse_amplitudes(v, modes)?),
        };

        let mut hasher = Sha256::new();
        hasher.update(bytes);
        let network = parse_unitary(obj.get("unitary"), modes, base, &mut hasher)?;

        let patterns = match (obj.get("patterns"), obj.get("n_max")) {
            (Some(_), Some(_)) => return Err(Error::config("n_max", "cannot be combined with patterns")),
            (Some(v), None) => Some(PatternSpec::List(parse_patterns(v, modes)?)),
            (None, Some(v)) => {
                let n = as_u64(v, "n_max")? as usize;
                if n > modes {
                    return Err(Error::config("n_max", format!("{n} exceeds the mode count {modes}")));
                }
                Some(PatternSpec::UpTo(n))
            }
            (None, None) => None,
        };

        let shots = obj.get("shots").map(|v| as_u64(v, "shots")).transpose()?;
        let seed = obj.get("seed").map(|v| as_u64(v, "seed")).transpose()?;

        Ok(RunConfig {
            modes,
            inputs,
            network,
            patterns,
            shots,
            seed,
            hash: hex::encode(hasher.finalize()),
        })
    }

    pub fn patterns(&self) -> Result<Vec<DetectionPattern>> {
        match &self.patterns {
            Some(PatternSpec::List(list)) => Ok(list.clone()),
            Some(PatternSpec::UpTo(n)) => Ok(enumerate_patterns(self.modes, *n)?.collect()),
            None => Err(Error::config("patterns", "missing field (give patterns or n_max)")),
        }
    }

    pub fn gaussian_states(&self) -> Result<&[GaussianModeState]> {
        match &self.inputs {
            Inputs::Gaussian(s) => Ok(s),
            Inputs::Coherent(_) => Err(Error::config("states", "this command needs Gaussian input states")),
        }
    }
}

fn require_u64(obj: &Map<String, Value>, key: &str) -> Result<u64> {
    let v = obj.get(key).ok_or_else(|| Error::config(key, "missing field"))?;
    as_u64(v, key)
}

fn as_u64(v: &Value, path: &str) -> Result<u64> {
    v.as_u64()
        .ok_or_else(|| Error::config(path, format!("expected a non-negative integer, got {v}")))
}

fn as_f64(v: &Value, path: &str) -> Result<f64> {
    v.as_f64()
        .ok_or_else(|| Error::config(path, format!("expected a number, got {v}")))
}

fn as_array<'a>(v: &'a Value, path: &str) -> Result<&'a Vec<Value>> {
    v.as_array()
        .ok_or_else(|| Error::config(path, format!("expected an array, got {v}")))
}

fn check_len(len: usize, modes: usize, path: &str) -> Result<()> {
    if len != modes {
        return Err(Error::config(path, format!("has {len} entries, expected {modes} (modes)")));
    }
    Ok(())
}

fn parse_states(v: &Value, modes: usize) -> Result<Vec<GaussianModeState>> {
    let arr = as_array(v, "states")?;
    check_len(arr.len(), modes, "states")?;
    arr.iter()
        .enumerate()
        .map(|(i, s)| {
            let path = format!("states[{i}]");
            let desc: StateDescriptor =
                serde_json::from_value(s.clone()).map_err(|e| Error::config(path.clone(), e.to_string()))?;
            desc.build().map_err(|e| Error::config(path, e.to_string()))
        })
        .collect()
}

fn parse_complex(v: &Value, path: &str) -> Result<Complex64> {
    if let Some(x) = v.as_f64() {
        return Ok(Complex64::new(x, 0.0));
    }
    match v.as_array().map(Vec::as_slice) {
        Some([re, im]) => Ok(Complex64::new(
            as_f64(re, &format!("{path}[0]"))?,
            as_f64(im, &format!("{path}[1]"))?,
        )),
        _ => Err(Error::config(path, format!("expected [re, im], got {v}"))),
    }
}

fn parse_amplitudes(v: &Value, modes: usize) -> Result<Vec<Complex64>> {
    let arr = as_array(v, "coherent")?;
    check_len(arr.len(), modes, "coherent")?;
    arr.iter()
        .enumerate()
        .map(|(i, a)| parse_complex(a, &format!("coherent[{i}]")))
        .collect()
}

fn parse_unitary(v: Option<&Value>, modes: usize, base: &Path, hasher: &mut Sha256) -> Result<Interferometer> {
    let v = v.ok_or_else(|| Error::config("unitary", "missing field"))?;
    let u = match v {
        Value::String(s) if s == "identity" => return Ok(Interferometer::identity(modes)),
        Value::Object(o) => {
            if let Some(seed) = o.get("haar_seed") {
                if o.len() != 1 {
                    return Err(Error::config("unitary", "haar_seed takes no other keys"));
                }
                let seed = as_u64(seed, "unitary.haar_seed")?;
                return Interferometer::haar_random(modes, seed).map_err(|e| Error::config("unitary", e.to_string()));
            }
            let file = o
                .get("file")
                .and_then(Value::as_str)
                .ok_or_else(|| Error::config("unitary", "expected {\"file\": path} or {\"haar_seed\": n}"))?;
            if o.len() != 1 {
                return Err(Error::config("unitary", "file reference takes no other keys"));
            }
            let path: PathBuf = base.join(file);
            let (m, bytes) = read_matrix(&path).map_err(|e| Error::config("unitary.file", e.to_string()))?;
            hasher.update(&bytes);
            m
        }
        Value::Array(rows) => {
            check_len(rows.len(), modes, "unitary")?;
            let mut m = CMatrix::zeros(modes, modes);
            for (i, row) in rows.iter().enumerate() {
                let path = format!("unitary[{i}]");
                let row = as_array(row, &path)?;
                check_len(row.len(), modes, &path)?;
                for (j, z) in row.iter().enumerate() {
                    m[(i, j)] = parse_complex(z, &format!("unitary[{i}][{j}]"))?;
                }
            }
            m
        }
        other => return Err(Error::config("unitary", format!("unsupported value {other}"))),
    };
    if u.nrows() != modes || u.ncols() != modes {
        return Err(Error::config(
            "unitary",
            format!("matrix is {}x{}, expected {modes}x{modes}", u.nrows(), u.ncols()),
        ));
    }
    Interferometer::new(u).map_err(|e| Error::config("unitary", e.to_string()))
}

fn parse_patterns(v: &Value, modes: usize) -> Result<Vec<DetectionPattern>> {
    let arr = as_array(v, "patterns")?;
    arr.iter()
        .enumerate()
        .map(|(i, p)| {
            let path = format!("patterns[{i}]");
            let pattern = match p {
                Value::String(s) => s.parse::<DetectionPattern>().map_err(|e| Error::config(path.clone(), e.to_string()))?,
                Value::Array(entries) => {
                    let flags = entries
                        .iter()
                        .enumerate()
                        .map(|(j, x)| match x.as_u64() {
                            Some(0) => Ok(false),
                            Some(1) => Ok(true),
                            _ => Err(Error::config(format!("{path}[{j}]"), format!("expected 0 or 1, got {x}"))),
                        })
                        .collect::<Result<Vec<_>>>()?;
                    DetectionPattern::new(flags)
                }
                other => return Err(Error::config(path, format!("expected a string or array, got {other}"))),
            };
            check_len(pattern.modes(), modes, &path)?;
            Ok(pattern)
        })
        .collect()
}
