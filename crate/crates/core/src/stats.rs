//! Trit-stream statistics and an empirical check of the fidelity estimator.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::generator::{required_check_count, GeneratorError};
use crate::qutrit::{check_observable, Outcome};
use crate::sampler::{draw_state, labels, measure, BasisLabel, RandomStream, SourceError, SourceModel};

/// χ² critical value, 2 degrees of freedom, 1% significance.
pub const CHI2_CRITICAL_DF2_P01: f64 = 9.21;

pub const MIN_TRIALS: usize = 100;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error("stream is empty")]
    Empty,
    #[error("symbol {value} at position {position} is not a trit")]
    NotATrit { position: usize, value: u8 },
    #[error("at least {MIN_TRIALS} trials are required, got {0}")]
    TooFewTrials(usize),
    #[error(transparent)]
    Generator(#[from] GeneratorError),
    #[error(transparent)]
    Source(#[from] SourceError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Uniformity {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StreamStats {
    pub n: u64,
    pub counts: [u64; 3],
    pub frequencies: [f64; 3],
    pub entropy_bits: f64,
    pub chi2: f64,
    pub uniformity: Uniformity,
}

/// Plug-in Shannon entropy in bits of a count vector, `0·log 0 = 0`.
pub fn entropy_bits(counts: &[u64; 3]) -> f64 {
    let n: u64 = counts.iter().sum();
    if n == 0 {
        return 0.0;
    }
    let h: f64 = counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let f = c as f64 / n as f64;
            -f * f.log2()
        })
        .sum();
    h.clamp(0.0, 3f64.log2())
}

pub fn chi_square(counts: &[u64; 3]) -> f64 {
    let n: u64 = counts.iter().sum();
    let expected = n as f64 / 3.0;
    counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum()
}

pub fn analyze(stream: &[u8]) -> Result<StreamStats, StatsError> {
    if stream.is_empty() {
        return Err(StatsError::Empty);
    }
    let mut counts = [0u64; 3];
    for (position, &value) in stream.iter().enumerate() {
        match counts.get_mut(value as usize) {
            Some(c) => *c += 1,
            None => return Err(StatsError::NotATrit { position, value }),
        }
    }
    let n = stream.len() as u64;
    let chi2 = chi_square(&counts);
    Ok(StreamStats {
        n,
        counts,
        frequencies: counts.map(|c| c as f64 / n as f64),
        entropy_bits: entropy_bits(&counts),
        chi2,
        uniformity: if chi2 <= CHI2_CRITICAL_DF2_P01 { Uniformity::Pass } else { Uniformity::Fail },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorValidation {
    pub fidelity: f64,
    pub epsilon: f64,
    pub delta: f64,
    pub checks_per_trial: u64,
    pub trials: usize,
    pub failures: usize,
    pub failure_rate: f64,
}

/// Runs `trials` independent check campaigns of `ℓ = required_check_count(ε, δ)`
/// measurements each, on a source mixing `unbiased_state(0)` (weight `F`) with
/// an orthogonal state, and reports how often `|Y − F| > ε`.
pub fn validate_estimator(
    fidelity: f64,
    epsilon: f64,
    delta: f64,
    trials: usize,
    rng: &RandomStream,
) -> Result<EstimatorValidation, StatsError> {
    if trials < MIN_TRIALS {
        return Err(StatsError::TooFewTrials(trials));
    }
    let ell = required_check_count(epsilon, delta)?;
    let src = SourceModel::with_fidelity(fidelity)?;
    let check = check_observable();
    let failures = (0..trials as u64)
        .into_par_iter()
        .filter(|&t| {
            let trial = rng.split_index(t);
            let mut source = trial.split(labels::SOURCE);
            let mut meas = trial.split(labels::MEASUREMENT);
            let hits = (0..ell)
                .filter(|_| {
                    let s = draw_state(&src, &mut source);
                    measure(&s, &check, BasisLabel::Check, &mut meas).outcome == Outcome::Zero
                })
                .count();
            let y = hits as f64 / ell as f64;
            (y - fidelity).abs() > epsilon
        })
        .count();
    Ok(EstimatorValidation {
        fidelity,
        epsilon,
        delta,
        checks_per_trial: ell,
        trials,
        failures,
        failure_rate: failures as f64 / trials as f64,
    })
}
