//! Channel spec strings: `name[:arg,...]` where each argument is positional or
//! `key=value`.
//!
//! ```text
//! depolarizing:0.3        depolarizing:p=0.3,d=3
//! dephasing:1.0           identity:4
//! cq:2                    unitary:seed=7,d=3
//! erasure:0.5             amplitude-damping:0.3
//! constant:2              stinespring:seed=3,a=2,b=2,e=2
//! kraus:file=path.json
//! ```
//!
//! Kraus files hold `{"kraus": [M1, M2, ...]}` with each matrix a list of rows
//! and each entry a `[re, im]` pair.

use std::collections::BTreeMap;
use std::path::Path;

use nalgebra::Complex;
use serde::Deserialize;

use super::{make_named, Channel, NamedParams};
use crate::error::{Error, Result};
use crate::rng::seeded;
use crate::scalar::CMatrix;
use crate::tensor::{haar_unitary, ComplexOperator};

#[derive(Clone, Debug, PartialEq)]
pub struct ChannelSpec {
    pub name: String,
    pub positional: Vec<String>,
    pub named: BTreeMap<String, String>,
}

impl ChannelSpec {
    pub fn parse(spec: &str) -> Result<Self> {
        let malformed = |reason: &str| Error::MalformedSpec { spec: spec.to_string(), reason: reason.to_string() };
        let (name, rest) = match spec.split_once(':') {
            Some((n, r)) => (n.trim(), Some(r)),
            None => (spec.trim(), None),
        };
        if name.is_empty() {
            return Err(malformed("missing channel name"));
        }
        let mut positional = Vec::new();
        let mut named = BTreeMap::new();
        if let Some(rest) = rest {
            for arg in rest.split(',') {
                let arg = arg.trim();
                if arg.is_empty() {
                    return Err(malformed("empty argument"));
                }
                match arg.split_once('=') {
                    Some((k, v)) => {
                        if named.insert(k.trim().to_string(), v.trim().to_string()).is_some() {
                            return Err(malformed(&format!("duplicate key `{}`", k.trim())));
                        }
                    }
                    None => {
                        if !named.is_empty() {
                            return Err(malformed("positional argument after key=value"));
                        }
                        positional.push(arg.to_string());
                    }
                }
            }
        }
        Ok(Self { name: name.to_string(), positional, named })
    }

    fn err(&self, reason: impl Into<String>) -> Error {
        Error::MalformedSpec { spec: self.to_string(), reason: reason.into() }
    }

    fn number<N: std::str::FromStr>(&self, key: &str, pos: Option<usize>) -> Result<Option<N>> {
        let raw = self.named.get(key).or_else(|| pos.and_then(|i| self.positional.get(i)));
        raw.map(|s| s.parse::<N>().map_err(|_| self.err(format!("cannot parse `{key}` from `{s}`"))))
            .transpose()
    }

    fn check_keys(&self, allowed: &[&str], max_positional: usize) -> Result<()> {
        if let Some(k) = self.named.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(self.err(format!("unknown key `{k}`")));
        }
        if self.positional.len() > max_positional {
            return Err(self.err("too many positional arguments"));
        }
        Ok(())
    }

    /// Builds the channel; `default_dim` applies when the spec names none.
    pub fn build(&self, default_dim: usize) -> Result<Channel<f64>> {
        match self.name.as_str() {
            "identity" | "cq" | "constant" => {
                self.check_keys(&["d"], 1)?;
                let d = self.number("d", Some(0))?.unwrap_or(default_dim);
                make_named(&self.name, &NamedParams::dim(d))
            }
            "depolarizing" | "dephasing" | "erasure" => {
                self.check_keys(&["p", "d"], 2)?;
                let p = self.number("p", Some(0))?;
                let d = self.number("d", Some(1))?.unwrap_or(default_dim);
                let mut params = NamedParams::dim(d);
                params.p = p;
                make_named(&self.name, &params)
            }
            "amplitude-damping" => {
                self.check_keys(&["p", "gamma"], 1)?;
                let g = match self.number("gamma", None)? {
                    Some(g) => Some(g),
                    None => self.number("p", Some(0))?,
                };
                let mut params = NamedParams::dim(2);
                params.p = g;
                make_named(&self.name, &params)
            }
            "unitary" => {
                self.check_keys(&["seed", "d"], 1)?;
                let seed: u64 = self.number("seed", Some(0))?.ok_or_else(|| self.err("unitary needs seed="))?;
                let d = self.number("d", None)?.unwrap_or(default_dim);
                let mut params = NamedParams::dim(d);
                params.unitary = Some(haar_unitary(d, &mut seeded(seed)));
                make_named("unitary", &params)
            }
            "stinespring" => {
                self.check_keys(&["seed", "a", "b", "e"], 0)?;
                let seed: u64 = self.number("seed", None)?.ok_or_else(|| self.err("stinespring needs seed="))?;
                let a = self.number("a", None)?.unwrap_or(default_dim);
                let b = self.number("b", None)?.unwrap_or(a);
                let e = self.number("e", None)?.unwrap_or(a);
                random_stinespring(a, b, e, seed)
            }
            "kraus" => {
                self.check_keys(&["file"], 1)?;
                let path = self
                    .named
                    .get("file")
                    .or_else(|| self.positional.first())
                    .ok_or_else(|| self.err("kraus needs file="))?;
                load_kraus(Path::new(path))
            }
            other => Err(Error::UnknownChannel(other.to_string())),
        }
    }
}

impl std::fmt::Display for ChannelSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.name)?;
        let args: Vec<String> = self
            .positional
            .iter()
            .cloned()
            .chain(self.named.iter().map(|(k, v)| format!("{k}={v}")))
            .collect();
        if !args.is_empty() {
            write!(f, ":{}", args.join(","))?;
        }
        Ok(())
    }
}

/// Parses and builds in one step.
pub fn parse_channel(spec: &str, default_dim: usize) -> Result<Channel<f64>> {
    ChannelSpec::parse(spec)?.build(default_dim)
}

/// Channel whose Stinespring isometry `A → B⊗E` is the first `a` columns of
/// a Haar unitary on `B⊗E`.
pub fn random_stinespring(a: usize, b: usize, e: usize, seed: u64) -> Result<Channel<f64>> {
    if a == 0 || a > b * e {
        return Err(Error::InvalidArgument(format!("no isometry from dimension {a} into {b}x{e}")));
    }
    let u: CMatrix = haar_unitary(b * e, &mut seeded(seed));
    Channel::from_stinespring(&u.columns(0, a).into_owned(), b, e)
}

#[derive(Deserialize)]
struct KrausFile {
    kraus: Vec<Vec<Vec<[f64; 2]>>>,
}

pub fn load_kraus(path: &Path) -> Result<Channel<f64>> {
    let text = std::fs::read_to_string(path)?;
    parse_kraus_json(&text)
}

pub fn parse_kraus_json(text: &str) -> Result<Channel<f64>> {
    let file: KrausFile = serde_json::from_str(text)?;
    let mut kraus = Vec::with_capacity(file.kraus.len());
    for rows in &file.kraus {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        if nrows == 0 || ncols == 0 || rows.iter().any(|r| r.len() != ncols) {
            return Err(Error::DimensionMismatch("ragged or empty Kraus matrix".into()));
        }
        kraus.push(CMatrix::from_fn(nrows, ncols, |i, j| Complex::new(rows[i][j][0], rows[i][j][1])));
    }
    Channel::from_kraus(kraus)
}

/// The maximally mixed constant channel on dimension `d`, as used by the
/// information-disturbance reports.
pub fn constant_pi(d: usize) -> Channel<f64> {
    Channel::constant(d, &ComplexOperator::maximally_mixed(vec![d])).expect("maximally mixed state is valid")
}
