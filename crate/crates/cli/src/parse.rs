//! Text formats accepted on the command line and in input files.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use qutrng_core::biphoton::{ChshSettings, QubitOperator};
use qutrng_core::linalg::{scalar, Matrix2};
use qutrng_core::qutrit::{unbiased_state, QutritState};
use qutrng_core::sampler::SourceModel;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("invalid seed {0:?}: expected a decimal or 0x-prefixed hexadecimal u64")]
    Seed(String),
    #[error("invalid number {0:?}")]
    Number(String),
    #[error("invalid state {spec:?}: {reason}")]
    State { spec: String, reason: String },
    #[error("invalid source {0:?}: expected ideal, state:<spec> or ensemble:<file>")]
    Source(String),
    #[error("line {line}: {reason}")]
    Line { line: usize, reason: String },
    #[error("invalid ensemble: {0}")]
    Ensemble(String),
    #[error("invalid observables: {0}")]
    Observables(String),
}

pub fn parse_seed(s: &str) -> Result<u64, ParseError> {
    let t = s.trim();
    let parsed = match t.strip_prefix("0x").or_else(|| t.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => t.parse::<u64>(),
    };
    parsed.map_err(|_| ParseError::Seed(s.to_string()))
}

fn parse_f64(s: &str) -> Result<f64, ParseError> {
    match s.trim().parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(ParseError::Number(s.to_string())),
    }
}

/// Parses `unbiased0..3`, `plus`, `zero`, `minus`, or three amplitudes given
/// as 3 reals or 6 numbers (`re,im` per amplitude).
pub fn parse_state(spec: &str) -> Result<QutritState, ParseError> {
    let bad = |reason: &str| ParseError::State { spec: spec.to_string(), reason: reason.to_string() };
    let t = spec.trim();
    match t {
        "plus" => return Ok(QutritState::plus()),
        "zero" => return Ok(QutritState::zero()),
        "minus" => return Ok(QutritState::minus()),
        _ => {}
    }
    if let Some(k) = t.strip_prefix("unbiased") {
        let k: usize = k.parse().map_err(|_| bad("expected unbiased0..unbiased3"))?;
        return unbiased_state(k).map_err(|e| bad(&e.to_string()));
    }
    let nums = t.split(',').map(parse_f64).collect::<Result<Vec<f64>, _>>().map_err(|e| bad(&e.to_string()))?;
    let amps: [Complex64; 3] = match nums.len() {
        3 => [0, 1, 2].map(|k| Complex64::new(nums[k], 0.0)),
        6 => [0, 1, 2].map(|k| Complex64::new(nums[2 * k], nums[2 * k + 1])),
        n => return Err(bad(&format!("expected 3 real or 6 re,im numbers, got {n}"))),
    };
    QutritState::new(amps[0], amps[1], amps[2]).map_err(|e| bad(&e.to_string()))
}

/// `re` or `re:im`.
pub fn parse_complex(s: &str) -> Result<Complex64, ParseError> {
    let (re, im) = match s.split_once(':') {
        Some((re, im)) => (parse_f64(re)?, parse_f64(im)?),
        None => (parse_f64(s)?, 0.0),
    };
    scalar(re, im).map_err(|_| ParseError::Number(s.to_string()))
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let l = l.split('#').next().unwrap_or("").trim();
        (!l.is_empty()).then_some((i + 1, l))
    })
}

/// One component per line: `weight a b c`, amplitudes as `re[:im]`.
pub fn parse_ensemble(text: &str) -> Result<SourceModel, ParseError> {
    let mut components = Vec::new();
    for (line, l) in content_lines(text) {
        let fields: Vec<&str> = l.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(ParseError::Line { line, reason: format!("expected `weight a b c`, got {} fields", fields.len()) });
        }
        let weight = parse_f64(fields[0]).map_err(|e| ParseError::Line { line, reason: e.to_string() })?;
        let amps = fields[1..]
            .iter()
            .map(|f| parse_complex(f))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| ParseError::Line { line, reason: e.to_string() })?;
        let state = QutritState::new(amps[0], amps[1], amps[2])
            .map_err(|e| ParseError::Line { line, reason: e.to_string() })?;
        components.push((weight, state));
    }
    SourceModel::ensemble(components).map_err(|e| ParseError::Ensemble(e.to_string()))
}

/// Source spec without the ensemble file contents resolved.
#[derive(Debug, Clone, PartialEq)]
pub enum SourceSpec {
    Ideal,
    State(QutritState),
    EnsembleFile(String),
}

pub fn parse_source(s: &str) -> Result<SourceSpec, ParseError> {
    let t = s.trim();
    if t == "ideal" {
        Ok(SourceSpec::Ideal)
    } else if let Some(rest) = t.strip_prefix("state:") {
        parse_state(rest).map(SourceSpec::State)
    } else if let Some(path) = t.strip_prefix("ensemble:") {
        if path.is_empty() {
            return Err(ParseError::Source(s.to_string()));
        }
        Ok(SourceSpec::EnsembleFile(path.to_string()))
    } else {
        Err(ParseError::Source(s.to_string()))
    }
}

/// CHSH settings file: lines `A1 = m00 m01 m10 m11` for `A1, A2, B1, B2`,
/// entries `re[:im]` in row-major order.
pub fn parse_observables(text: &str) -> Result<ChshSettings, ParseError> {
    let mut slots: [Option<QubitOperator>; 4] = [None; 4];
    for (line, l) in content_lines(text) {
        let (key, rest) = l
            .split_once('=')
            .ok_or_else(|| ParseError::Line { line, reason: "expected `NAME = m00 m01 m10 m11`".into() })?;
        let idx = match key.trim() {
            "A1" => 0,
            "A2" => 1,
            "B1" => 2,
            "B2" => 3,
            other => return Err(ParseError::Line { line, reason: format!("unknown observable {other:?}") }),
        };
        let e = rest
            .split_whitespace()
            .map(parse_complex)
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| ParseError::Line { line, reason: e.to_string() })?;
        if e.len() != 4 {
            return Err(ParseError::Line { line, reason: format!("expected 4 entries, got {}", e.len()) });
        }
        let op = QubitOperator::observable(Matrix2::new([[e[0], e[1]], [e[2], e[3]]]))
            .map_err(|err| ParseError::Line { line, reason: err.to_string() })?;
        slots[idx] = Some(op);
    }
    match slots {
        [Some(a1), Some(a2), Some(b1), Some(b2)] => Ok(ChshSettings { a1, a2, b1, b2 }),
        _ => Err(ParseError::Observables("all of A1, A2, B1, B2 must be given".into())),
    }
}

/// The default settings in file form, handy as a template.
pub fn default_observables_text() -> String {
    let k = FRAC_1_SQRT_2;
    format!("A1 = 1 0 0 -1\nA2 = 0 1 1 0\nB1 = {k} {k} {k} -{k}\nB2 = {k} -{k} -{k} -{k}\n")
}
