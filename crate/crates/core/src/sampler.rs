//! Seeded randomness, qutrit source models and Born-rule measurement.

use std::f64::consts::TAU;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{c, Matrix2, Vector3, C64};
use crate::qutrit::{born, unbiased_state, Outcome, QutritState, SpinDirection, SpinObservable};

pub mod labels {
    pub const SETTINGS: &str = "settings";
    pub const SOURCE: &str = "source";
    pub const CHECK_SELECTION: &str = "check-selection";
    pub const MEASUREMENT: &str = "measurement";
}

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn fnv1a(parent: u64, bytes: &[u8]) -> u64 {
    let mut h = FNV_OFFSET;
    for b in parent.to_le_bytes().iter().chain(bytes) {
        h ^= u64::from(*b);
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}

/// Deterministic random stream with labeled, non-overlapping substreams.
///
/// All streams descending from one seed share a ChaCha8 key and differ only in
/// the 64-bit stream id, so their outputs cannot overlap.
#[derive(Clone, Debug)]
pub struct RandomStream {
    seed: u64,
    stream: u64,
    rng: ChaCha8Rng,
    /// Buffered 2-bit chunks for trit draws.
    bits: u64,
    bits_left: u32,
}

impl RandomStream {
    pub fn new(seed: u64) -> Self {
        Self::with_stream(seed, 0)
    }

    fn with_stream(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        rng.set_word_pos(0);
        Self { seed, stream, rng, bits: 0, bits_left: 0 }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream
    }

    /// Fresh substream identified by `label`. Does not advance `self`.
    pub fn split(&self, label: &str) -> Self {
        Self::with_stream(self.seed, fnv1a(self.stream, label.as_bytes()))
    }

    /// Fresh substream identified by an index, e.g. a block number.
    pub fn split_index(&self, index: u64) -> Self {
        let mut key = *b"#idx\0\0\0\0\0\0\0\0";
        key[4..].copy_from_slice(&index.to_le_bytes());
        Self::with_stream(self.seed, fnv1a(self.stream, &key))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform in `[0, 1)` with 53 bits of resolution.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `[lo, hi)`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.next_f64() < p
    }

    /// Uniform trit by rejection on 2-bit chunks (value 3 is redrawn).
    pub fn next_trit(&mut self) -> u8 {
        loop {
            if self.bits_left == 0 {
                self.bits = self.next_u64();
                self.bits_left = 32;
            }
            let v = (self.bits & 3) as u8;
            self.bits >>= 2;
            self.bits_left -= 1;
            if v < 3 {
                return v;
            }
        }
    }

    /// Unbounded iterator of public trits.
    pub fn trits(self) -> TritSource {
        TritSource(self)
    }
}

/// Infinite trit iterator over a [`RandomStream`].
#[derive(Debug, Clone)]
pub struct TritSource(RandomStream);

impl Iterator for TritSource {
    type Item = u8;
    fn next(&mut self) -> Option<u8> {
        Some(self.0.next_trit())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SourceError {
    #[error("ensemble is empty")]
    EmptyEnsemble,
    #[error("ensemble weight {0} is negative or not finite")]
    BadWeight(f64),
    #[error("ensemble weights sum to {0}, expected 1")]
    WeightSum(f64),
}

/// Emitter of qutrits.
#[derive(Debug, Clone, PartialEq)]
pub enum SourceModel {
    /// Always `unbiased_state(0)`.
    Ideal,
    FixedState(QutritState),
    /// Classical mixture of pure states, weights summing to 1.
    Ensemble(Vec<(f64, QutritState)>),
}

pub const WEIGHT_SUM_TOL: f64 = 1e-12;

impl SourceModel {
    pub fn ensemble(components: Vec<(f64, QutritState)>) -> Result<Self, SourceError> {
        if components.is_empty() {
            return Err(SourceError::EmptyEnsemble);
        }
        if let Some(&(w, _)) = components.iter().find(|(w, _)| !w.is_finite() || *w < 0.0) {
            return Err(SourceError::BadWeight(w));
        }
        let total: f64 = components.iter().map(|(w, _)| w).sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(SourceError::WeightSum(total));
        }
        Ok(SourceModel::Ensemble(components))
    }

    /// Mixture of `unbiased_state(0)` (weight `f`) and a state orthogonal to it,
    /// giving mixture fidelity exactly `f`.
    pub fn with_fidelity(f: f64) -> Result<Self, SourceError> {
        if !(0.0..=1.0).contains(&f) {
            return Err(SourceError::BadWeight(f));
        }
        Self::ensemble(vec![
            (f, unbiased_state(0).expect("index in range")),
            (1.0 - f, crate::qutrit::check_orthogonal_state()),
        ])
    }

    /// `Σ wⱼ F(ψⱼ)` against `unbiased_state(0)`.
    pub fn mixture_fidelity(&self) -> f64 {
        use crate::qutrit::fidelity_to_unbiased;
        match self {
            SourceModel::Ideal => 1.0,
            SourceModel::FixedState(s) => fidelity_to_unbiased(s),
            SourceModel::Ensemble(cs) => cs.iter().map(|(w, s)| w * fidelity_to_unbiased(s)).sum(),
        }
    }

    /// True when every draw returns the same state and no randomness is used.
    pub fn is_deterministic(&self) -> bool {
        !matches!(self, SourceModel::Ensemble(cs) if cs.len() > 1)
    }
}

pub fn draw_state(src: &SourceModel, rng: &mut RandomStream) -> QutritState {
    match src {
        SourceModel::Ideal => unbiased_state(0).expect("index in range"),
        SourceModel::FixedState(s) => *s,
        SourceModel::Ensemble(cs) if cs.len() == 1 => cs[0].1,
        SourceModel::Ensemble(cs) => {
            let u = rng.next_f64();
            let mut acc = 0.0;
            for (w, s) in cs {
                acc += w;
                if u < acc {
                    return *s;
                }
            }
            // Rounding left u above the final partial sum.
            cs.iter().rev().find(|(w, _)| *w > 0.0).map(|(_, s)| *s).unwrap_or(cs[0].1)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BasisLabel {
    Z,
    X,
    Y,
    Check,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementRecord {
    pub outcome: Outcome,
    pub basis: BasisLabel,
    /// Born probability of the sampled outcome.
    pub probability: f64,
}

impl MeasurementRecord {
    pub fn trit(&self) -> u8 {
        self.outcome.trit()
    }
}

/// Samples an outcome with one uniform draw, cumulating in order `+1, 0, −1`.
pub fn measure(state: &QutritState, obs: &SpinObservable, basis: BasisLabel, rng: &mut RandomStream) -> MeasurementRecord {
    let dist = born(state, obs);
    let u = rng.next_f64();
    let mut acc = 0.0;
    let mut chosen = None;
    for o in Outcome::ORDER {
        let p = dist.get(o);
        acc += p;
        if u < acc {
            chosen = Some((o, p));
            break;
        }
    }
    // u landed past the rounded total: take the last outcome with mass.
    let (outcome, probability) = chosen.unwrap_or_else(|| {
        Outcome::ORDER
            .into_iter()
            .rev()
            .map(|o| (o, dist.get(o)))
            .find(|(_, p)| *p > 0.0)
            .expect("distribution has mass")
    });
    MeasurementRecord { outcome, basis, probability }
}

/// Random normalized state with real and imaginary parts uniform in `[−1, 1]`
/// before normalization.
pub fn random_state(rng: &mut RandomStream) -> QutritState {
    loop {
        let v = Vector3::new([(); 3].map(|_| c(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0))));
        if v.norm() > 1e-3 {
            return QutritState::from_vector(v).expect("finite non-zero");
        }
    }
}

/// Random direction with `χ, φ` uniform on `[0, 2π)`.
pub fn random_direction(rng: &mut RandomStream) -> SpinDirection {
    SpinDirection::new(rng.uniform(0.0, TAU), rng.uniform(0.0, TAU))
}

/// Random 2×2 Hermitian matrix: entries uniform in `[−1, 1]`, then symmetrized.
pub fn random_hermitian2(rng: &mut RandomStream) -> Matrix2 {
    let mut rows = [[C64::new(0.0, 0.0); 2]; 2];
    for row in rows.iter_mut() {
        for z in row.iter_mut() {
            *z = c(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
        }
    }
    let m = Matrix2::new(rows);
    (m + m.adjoint()).scale_real(0.5)
}

/// Random general (non-Hermitian) 2×2 matrix, entries uniform in `[−1, 1]`.
pub fn random_matrix2(rng: &mut RandomStream) -> Matrix2 {
    let mut rows = [[C64::new(0.0, 0.0); 2]; 2];
    for row in rows.iter_mut() {
        for z in row.iter_mut() {
            *z = c(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
        }
    }
    Matrix2::new(rows)
}
