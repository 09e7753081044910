//! The generation protocol: public trits select `S_Z`/`S_X`/`S_Y` for most
//! emitted qutrits, a randomly selected fraction is diverted to the
//! `S_{1/√3,ζ³}` fidelity check, and the check average certifies the source.
//!
//! Emissions are processed in fixed-size blocks. Each block draws from its own
//! substreams (split by block index), so a run is bit-identical whatever the
//! number of worker threads.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::qutrit::{check_observable, spin_basic, Axis, Outcome, QutritState, SpinObservable};
use crate::sampler::{draw_state, labels, measure, BasisLabel, RandomStream, SourceModel};

/// Emissions per block.
pub const BLOCK_LEN: usize = 4096;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeneratorError {
    #[error("epsilon must lie in (0, 0.5], got {0}")]
    Epsilon(f64),
    #[error("delta must lie in (0, 1), got {0}")]
    Delta(f64),
    #[error("check rate must lie in [0, 1), got {0}")]
    CheckRate(f64),
    #[error("fidelity threshold must lie in (0, 1], got {0}")]
    Threshold(f64),
    #[error("public stream contains invalid trit {0}")]
    PublicTrit(u8),
    #[error("failed to build worker pool: {0}")]
    Pool(String),
}

/// `ℓ = ⌈1/(4ε²δ)⌉`.
pub fn required_check_count(epsilon: f64, delta: f64) -> Result<u64, GeneratorError> {
    if !(epsilon > 0.0 && epsilon <= 0.5) {
        return Err(GeneratorError::Epsilon(epsilon));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(GeneratorError::Delta(delta));
    }
    let exact = 1.0 / (4.0 * epsilon * epsilon * delta);
    // Inputs like ε = 0.05 land a few ulps above an integer.
    let nearest = exact.round();
    let ell = if (exact - nearest).abs() <= 1e-9 * nearest { nearest } else { exact.ceil() };
    Ok(ell.max(1.0) as u64)
}

/// Chebyshev bound `min(1, F(1−F)/(ℓε²))` on `P(|Y − F| ≥ ε)`.
pub fn chebyshev_failure_bound(fidelity: f64, ell: u64, epsilon: f64) -> f64 {
    let f = fidelity.clamp(0.0, 1.0);
    (f * (1.0 - f) / (ell as f64 * epsilon * epsilon)).min(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub epsilon: f64,
    pub delta: f64,
    pub check_rate: f64,
    pub target_output: usize,
    pub fidelity_threshold: f64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self { epsilon: 0.05, delta: 0.1, check_rate: 0.1, target_output: 1000, fidelity_threshold: 1.0 }
    }
}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<(), GeneratorError> {
        required_check_count(self.epsilon, self.delta)?;
        if !(0.0..1.0).contains(&self.check_rate) {
            return Err(GeneratorError::CheckRate(self.check_rate));
        }
        if !(self.fidelity_threshold > 0.0 && self.fidelity_threshold <= 1.0) {
            return Err(GeneratorError::Threshold(self.fidelity_threshold));
        }
        Ok(())
    }

    pub fn required_checks(&self) -> Result<u64, GeneratorError> {
        required_check_count(self.epsilon, self.delta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Accept,
    Reject,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionReport {
    pub emitted: u64,
    pub output_len: u64,
    pub checks: u64,
    pub check_zero_count: u64,
    /// Fidelity estimate, `check_zero_count / checks`; absent without checks.
    #[serde(rename = "Y")]
    pub y: Option<f64>,
    pub required_checks: u64,
    pub verdict: Verdict,
    pub epsilon: f64,
    pub delta: f64,
    pub check_rate: f64,
    pub threshold: f64,
    pub target_output: u64,
    pub public_exhausted: bool,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Session {
    pub output: Vec<u8>,
    pub report: SessionReport,
}

#[derive(Debug, Clone, Copy)]
enum Action {
    Check,
    Generate(Axis),
    /// Output already full; the qutrit is discarded unmeasured.
    Discard,
}

struct BlockDraws {
    states: Vec<QutritState>,
    is_check: Vec<bool>,
}

fn block_streams(rng: &RandomStream, block: u64) -> (RandomStream, RandomStream, RandomStream) {
    let b = rng.split_index(block);
    (b.split(labels::SOURCE), b.split(labels::CHECK_SELECTION), b.split(labels::MEASUREMENT))
}

fn draw_block(src: &SourceModel, rng: &RandomStream, block: u64, check_rate: f64) -> BlockDraws {
    let (mut source, mut selection, _) = block_streams(rng, block);
    let mut states = Vec::with_capacity(BLOCK_LEN);
    let mut is_check = Vec::with_capacity(BLOCK_LEN);
    for _ in 0..BLOCK_LEN {
        is_check.push(selection.bernoulli(check_rate));
        states.push(draw_state(src, &mut source));
    }
    BlockDraws { states, is_check }
}

struct Observables {
    basic: [SpinObservable; 3],
    check: SpinObservable,
}

/// Measures the planned actions of one block; returns output trits and check hits.
fn measure_block(
    obs: &Observables,
    rng: &RandomStream,
    block: u64,
    draws: &BlockDraws,
    actions: &[Action],
) -> (Vec<u8>, u64) {
    let (_, _, mut meas) = block_streams(rng, block);
    let mut out = Vec::new();
    let mut zeros = 0;
    for (state, action) in draws.states.iter().zip(actions) {
        match action {
            Action::Check => {
                let rec = measure(state, &obs.check, BasisLabel::Check, &mut meas);
                if rec.outcome == Outcome::Zero {
                    zeros += 1;
                }
            }
            Action::Generate(axis) => {
                let label = match axis {
                    Axis::Z => BasisLabel::Z,
                    Axis::X => BasisLabel::X,
                    Axis::Y => BasisLabel::Y,
                };
                out.push(measure(state, &obs.basic[*axis as usize], label, &mut meas).trit());
            }
            Action::Discard => {}
        }
    }
    (out, zeros)
}

/// Runs one session sequentially. See [`run_session_with_jobs`].
pub fn run_session<I>(
    src: &SourceModel,
    public: I,
    cfg: &GeneratorConfig,
    rng: &RandomStream,
) -> Result<Session, GeneratorError>
where
    I: IntoIterator<Item = u8>,
{
    run_session_with_jobs(src, public, cfg, rng, 1)
}

/// Runs one session, measuring blocks on `jobs` worker threads.
///
/// The session ends once `target_output` trits exist and at least `ℓ` checks
/// were made (or, with `check_rate = 0`, once the output is full). Running out
/// of public trits ends it early with an `Inconclusive` verdict.
pub fn run_session_with_jobs<I>(
    src: &SourceModel,
    public: I,
    cfg: &GeneratorConfig,
    rng: &RandomStream,
    jobs: usize,
) -> Result<Session, GeneratorError>
where
    I: IntoIterator<Item = u8>,
{
    cfg.validate()?;
    let ell = cfg.required_checks()?;
    if jobs <= 1 {
        return drive(src, public.into_iter(), cfg, ell, rng, None);
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| GeneratorError::Pool(e.to_string()))?;
    drive(src, public.into_iter(), cfg, ell, rng, Some(&pool))
}

fn drive<I: Iterator<Item = u8>>(
    src: &SourceModel,
    mut public: I,
    cfg: &GeneratorConfig,
    ell: u64,
    rng: &RandomStream,
    pool: Option<&rayon::ThreadPool>,
) -> Result<Session, GeneratorError> {
    let obs = Observables { basic: Axis::ALL.map(spin_basic), check: check_observable() };
    let target = cfg.target_output as u64;
    let wave = pool.map_or(1, |p| 2 * p.current_num_threads());

    let mut output: Vec<u8> = Vec::with_capacity(cfg.target_output);
    let (mut emitted, mut planned_out, mut checks, mut zeros) = (0u64, 0u64, 0u64, 0u64);
    let mut exhausted = false;
    let done = |out: u64, checks: u64| out >= target && (checks >= ell || cfg.check_rate == 0.0);
    let mut finished = done(0, 0);
    let mut next_block = 0u64;

    while !finished && !exhausted {
        let blocks: Vec<u64> = (next_block..next_block + wave as u64).collect();
        next_block += wave as u64;
        let draws: Vec<BlockDraws> = match pool {
            None => blocks.iter().map(|&b| draw_block(src, rng, b, cfg.check_rate)).collect(),
            Some(p) => p.install(|| blocks.par_iter().map(|&b| draw_block(src, rng, b, cfg.check_rate)).collect()),
        };

        // Sequential planning: assign public trits and find the stopping point.
        let mut plans: Vec<Vec<Action>> = Vec::with_capacity(draws.len());
        for d in &draws {
            let mut actions = Vec::with_capacity(BLOCK_LEN);
            if !(finished || exhausted) {
                for &is_check in &d.is_check {
                    let action = if is_check {
                        checks += 1;
                        Action::Check
                    } else if planned_out < target {
                        match public.next() {
                            Some(t) => {
                                let axis = Axis::from_trit(t).ok_or(GeneratorError::PublicTrit(t))?;
                                planned_out += 1;
                                Action::Generate(axis)
                            }
                            None => {
                                exhausted = true;
                                break;
                            }
                        }
                    } else {
                        Action::Discard
                    };
                    actions.push(action);
                    emitted += 1;
                    if done(planned_out, checks) {
                        finished = true;
                        break;
                    }
                }
            }
            plans.push(actions);
        }

        let results: Vec<(Vec<u8>, u64)> = match pool {
            None => blocks.iter().zip(&draws).zip(&plans).map(|((&b, d), p)| measure_block(&obs, rng, b, d, p)).collect(),
            Some(pool) => pool.install(|| {
                blocks
                    .par_iter()
                    .zip(draws.par_iter())
                    .zip(plans.par_iter())
                    .map(|((&b, d), p)| measure_block(&obs, rng, b, d, p))
                    .collect()
            }),
        };
        for (trits, z) in results {
            output.extend_from_slice(&trits);
            zeros += z;
        }
    }

    let y = (checks > 0).then(|| zeros as f64 / checks as f64);
    let verdict = match y {
        _ if checks < ell => Verdict::Inconclusive,
        Some(y) if y >= cfg.fidelity_threshold - cfg.epsilon => Verdict::Accept,
        _ => Verdict::Reject,
    };
    let report = SessionReport {
        emitted,
        output_len: output.len() as u64,
        checks,
        check_zero_count: zeros,
        y,
        required_checks: ell,
        verdict,
        epsilon: cfg.epsilon,
        delta: cfg.delta,
        check_rate: cfg.check_rate,
        threshold: cfg.fidelity_threshold,
        target_output: target,
        public_exhausted: exhausted,
        seed: rng.seed(),
    };
    Ok(Session { output, report })
}
