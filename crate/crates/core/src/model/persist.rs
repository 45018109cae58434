//! Model persistence: a versioned, line-oriented text format.
//!
//! Every file starts with `CGDM v1 <kind> <fingerprint>` where kind is
//! `linear`, `ovr`, or `nb`. Floats are written with Rust's shortest
//! round-trip encoding, so save/load is bit-exact and saving twice produces
//! byte-identical files.

use std::fmt::Write as FmtWrite;
use std::path::Path;

use super::{LinearModel, NaiveBayesModel, OneVsRestModel, TrainConfig};
use crate::corpus::{CrowdturfType, Label};
use crate::error::{Error, Result};
use crate::util::write_atomic;

const MAGIC: &str = "CGDM";
const VERSION: &str = "v1";

/// Any persistable model.
#[derive(Debug, Clone, PartialEq)]
#[allow(clippy::large_enum_variant)]
pub enum Model {
    Linear(LinearModel),
    OneVsRest(OneVsRestModel),
    NaiveBayes(NaiveBayesModel),
}

impl Model {
    pub fn kind(&self) -> &'static str {
        match self {
            Model::Linear(_) => "linear",
            Model::OneVsRest(_) => "ovr",
            Model::NaiveBayes(_) => "nb",
        }
    }

    pub fn fingerprint(&self) -> &str {
        match self {
            Model::Linear(m) => m.fingerprint(),
            Model::OneVsRest(m) => m.fingerprint(),
            Model::NaiveBayes(m) => m.fingerprint(),
        }
    }
}

/// Serialize a model to its text form.
pub fn encode_model(model: &Model) -> String {
    let mut out = String::new();
    writeln!(
        out,
        "{MAGIC} {VERSION} {} {}",
        model.kind(),
        model.fingerprint()
    )
    .expect("string");
    match model {
        Model::Linear(m) => encode_linear_body(&mut out, m),
        Model::OneVsRest(m) => {
            for kind in CrowdturfType::ALL {
                writeln!(out, "class {kind}").expect("string");
                encode_linear_body(&mut out, m.model_for(kind));
            }
        }
        Model::NaiveBayes(m) => {
            writeln!(out, "alpha {}", m.alpha).expect("string");
            writeln!(out, "dims {}", m.sparse_dim).expect("string");
            writeln!(out, "prior legitimate {}", m.log_prior[0]).expect("string");
            writeln!(out, "prior crowdturfing {}", m.log_prior[1]).expect("string");
            for (k, name) in ["legitimate", "crowdturfing"].iter().enumerate() {
                for (i, lp) in m.cond_log_prob[k].iter().enumerate() {
                    writeln!(out, "cond {name} {i} {lp}").expect("string");
                }
            }
        }
    }
    out
}

fn encode_linear_body(out: &mut String, m: &LinearModel) {
    let c = &m.config;
    writeln!(
        out,
        "config {} {} {} {} {}",
        c.c, c.max_epochs, c.tol, c.seed, c.positive_class
    )
    .expect("string");
    writeln!(out, "trained {} {}", m.objective, m.epochs_run).expect("string");
    writeln!(
        out,
        "dims {} {}",
        m.sparse_dim,
        m.weights.len() - m.sparse_dim
    )
    .expect("string");
    let join = |xs: &[f64]| {
        xs.iter()
            .map(|x| x.to_string())
            .collect::<Vec<_>>()
            .join(" ")
    };
    writeln!(out, "mean {}", join(&m.dense_mean)).expect("string");
    writeln!(out, "std {}", join(&m.dense_std)).expect("string");
    for (i, w) in m.weights.iter().enumerate() {
        if *w != 0.0 {
            writeln!(out, "w {i} {w}").expect("string");
        }
    }
    writeln!(out, "bias {}", m.bias).expect("string");
}

/// Write a model file (atomically: temp file + rename).
pub fn save_model(model: &Model, path: impl AsRef<Path>) -> Result<()> {
    write_atomic(path.as_ref(), encode_model(model).as_bytes())
}

/// Read back any model file; unknown magic or version is rejected.
pub fn load_model(path: impl AsRef<Path>) -> Result<Model> {
    let text = std::fs::read_to_string(path.as_ref())?;
    decode_model(&text)
}

struct Lines<'a> {
    iter: std::str::Lines<'a>,
    consumed: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Lines {
            iter: text.lines(),
            consumed: 0,
        }
    }

    fn next(&mut self) -> Result<&'a str> {
        self.consumed += 1;
        self.iter
            .next()
            .ok_or_else(|| Error::ModelFormat(format!("truncated at line {}", self.consumed)))
    }
}

fn fail(msg: impl Into<String>) -> Error {
    Error::ModelFormat(msg.into())
}

fn parse_f64(s: &str, what: &str) -> Result<f64> {
    s.parse::<f64>()
        .map_err(|_| fail(format!("bad {what}: {s:?}")))
}

fn expect_field<'a>(line: &'a str, key: &str) -> Result<&'a str> {
    line.strip_prefix(key)
        .and_then(|rest| {
            rest.strip_prefix(' ')
                .or(Some(rest).filter(|r| r.is_empty()))
        })
        .ok_or_else(|| fail(format!("expected {key:?} line, found {line:?}")))
}

/// Parse a model from its text form.
pub fn decode_model(text: &str) -> Result<Model> {
    let mut lines = Lines::new(text);
    let header = lines.next()?;
    let mut parts = header.split(' ');
    let magic = parts.next().unwrap_or_default();
    let version = parts.next().unwrap_or_default();
    let kind = parts.next().unwrap_or_default();
    let fingerprint = parts.next().unwrap_or_default().to_owned();
    if magic != MAGIC {
        return Err(fail(format!("bad magic {magic:?}")));
    }
    if version != VERSION {
        return Err(fail(format!("unsupported format version {version:?}")));
    }
    match kind {
        "linear" => Ok(Model::Linear(decode_linear_body(&mut lines, &fingerprint)?)),
        "ovr" => {
            let mut models = Vec::with_capacity(3);
            for expected in CrowdturfType::ALL {
                let line = lines.next()?;
                let name = expect_field(line, "class")?;
                if name != expected.to_string() {
                    return Err(fail(format!("expected class {expected}, found {name:?}")));
                }
                models.push(decode_linear_body(&mut lines, &fingerprint)?);
            }
            let [a, b, c]: [LinearModel; 3] = models.try_into().expect("three models");
            Ok(Model::OneVsRest(OneVsRestModel::from_models([a, b, c])))
        }
        "nb" => {
            let alpha = parse_f64(expect_field(lines.next()?, "alpha")?, "alpha")?;
            let dims = expect_field(lines.next()?, "dims")?;
            let sparse_dim: usize = dims
                .parse()
                .map_err(|_| fail(format!("bad dims: {dims:?}")))?;
            let mut log_prior = [0.0f64; 2];
            for (k, name) in ["legitimate", "crowdturfing"].iter().enumerate() {
                let rest = expect_field(lines.next()?, "prior")?;
                let (cls, value) = rest.split_once(' ').ok_or_else(|| fail("bad prior line"))?;
                if cls != *name {
                    return Err(fail(format!("expected prior {name}, found {cls:?}")));
                }
                log_prior[k] = parse_f64(value, "prior")?;
            }
            let mut cond = [vec![0.0f64; sparse_dim], vec![0.0f64; sparse_dim]];
            for (k, name) in ["legitimate", "crowdturfing"].iter().enumerate() {
                for (i, slot) in cond[k].iter_mut().enumerate() {
                    let rest = expect_field(lines.next()?, "cond")?;
                    let mut it = rest.split(' ');
                    let cls = it.next().unwrap_or_default();
                    let idx: usize = it
                        .next()
                        .unwrap_or_default()
                        .parse()
                        .map_err(|_| fail("bad cond index"))?;
                    let value = parse_f64(it.next().unwrap_or_default(), "cond value")?;
                    if cls != *name || idx != i {
                        return Err(fail(format!("cond line out of order at {name} {i}")));
                    }
                    *slot = value;
                }
            }
            Ok(Model::NaiveBayes(NaiveBayesModel {
                fingerprint,
                alpha,
                sparse_dim,
                log_prior,
                cond_log_prob: cond,
            }))
        }
        other => Err(fail(format!("unknown model kind {other:?}"))),
    }
}

fn decode_linear_body(lines: &mut Lines<'_>, fingerprint: &str) -> Result<LinearModel> {
    let config_line = expect_field(lines.next()?, "config")?;
    let parts: Vec<&str> = config_line.split(' ').collect();
    if parts.len() != 5 {
        return Err(fail(format!("bad config line: {config_line:?}")));
    }
    let positive_class = match parts[4] {
        "crowdturfing" => Label::Crowdturfing,
        "legitimate" => Label::Legitimate,
        other => return Err(fail(format!("bad positive class {other:?}"))),
    };
    let config = TrainConfig {
        c: parse_f64(parts[0], "C")?,
        max_epochs: parts[1].parse().map_err(|_| fail("bad max_epochs"))?,
        tol: parse_f64(parts[2], "tol")?,
        seed: parts[3].parse().map_err(|_| fail("bad seed"))?,
        positive_class,
    };
    let trained = expect_field(lines.next()?, "trained")?;
    let (obj_s, epochs_s) = trained
        .split_once(' ')
        .ok_or_else(|| fail("bad trained line"))?;
    let objective = parse_f64(obj_s, "objective")?;
    let epochs_run: u32 = epochs_s.parse().map_err(|_| fail("bad epoch count"))?;
    let dims = expect_field(lines.next()?, "dims")?;
    let (s_dim, d_dim) = dims.split_once(' ').ok_or_else(|| fail("bad dims line"))?;
    let sparse_dim: usize = s_dim.parse().map_err(|_| fail("bad sparse dim"))?;
    let dense_dim: usize = d_dim.parse().map_err(|_| fail("bad dense dim"))?;

    let parse_row = |row: &str, expected: usize, what: &str| -> Result<Vec<f64>> {
        let values: Vec<f64> = if row.is_empty() {
            Vec::new()
        } else {
            row.split(' ')
                .map(|s| parse_f64(s, what))
                .collect::<Result<_>>()?
        };
        if values.len() != expected {
            return Err(fail(format!(
                "{what}: expected {expected} values, found {}",
                values.len()
            )));
        }
        Ok(values)
    };
    let dense_mean = parse_row(expect_field(lines.next()?, "mean")?, dense_dim, "mean")?;
    let dense_std = parse_row(expect_field(lines.next()?, "std")?, dense_dim, "std")?;

    let mut weights = vec![0.0f64; sparse_dim + dense_dim];
    let bias;
    loop {
        let line = lines.next()?;
        if let Some(rest) = line.strip_prefix("w ") {
            let (idx_s, w_s) = rest
                .split_once(' ')
                .ok_or_else(|| fail("bad weight line"))?;
            let idx: usize = idx_s.parse().map_err(|_| fail("bad weight index"))?;
            if idx >= weights.len() {
                return Err(fail(format!("weight index {idx} out of range")));
            }
            weights[idx] = parse_f64(w_s, "weight")?;
        } else if let Some(rest) = line.strip_prefix("bias ") {
            bias = parse_f64(rest, "bias")?;
            break;
        } else {
            return Err(fail(format!(
                "expected weight or bias line, found {line:?}"
            )));
        }
    }
    Ok(LinearModel {
        weights,
        bias,
        sparse_dim,
        dense_mean,
        dense_std,
        fingerprint: fingerprint.to_owned(),
        config,
        objective,
        epochs_run,
    })
}
