//! Exhaustive grid scan for states with all nine basic-axis probabilities
//! equal to 1/3.
//!
//! Pure states are parameterized with `β` real and non-negative (global phase
//! fixed), squared magnitudes `(|α|², |β|²) = (i/R, j/R)` on the simplex
//! `i + j ≤ R`, and the phases of `α` and `γ` on uniform `R`-point circles.
//! Cells whose worst deviation from 1/3 falls under `3/R` are kept and
//! grouped into clusters by grid adjacency (phases wrap around).

use std::collections::HashMap;
use std::f64::consts::TAU;

use rayon::prelude::*;
use thiserror::Error;

use super::{born, spin_basic, state_unchecked, unbiased_states, Axis, QutritState, SpinObservable};
use crate::linalg::{r, Vector3, C64};

pub const MIN_RESOLUTION: usize = 16;

/// Acceptance threshold is `THRESHOLD_CELLS / R`.
const THRESHOLD_CELLS: f64 = 3.0;

/// A cluster matches unbiased state `k` when its best cell lies within this
/// many grid units (`/R`) of it, measured as `sqrt(1 − F)`.
pub const MATCH_CELLS: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SearchError {
    #[error("resolution {0} is below the minimum of {MIN_RESOLUTION}")]
    ResolutionTooLow(usize),
    #[error("grid scan found no qualifying cells")]
    Empty,
    #[error("expected 4 clusters, found {0}")]
    ClusterCount(usize),
    #[error("cluster {cluster} is not near any unbiased state (best distance {distance:.4})")]
    Unmatched { cluster: usize, distance: f64 },
    #[error("unbiased state {0} is matched by more than one cluster")]
    DuplicateMatch(usize),
}

#[derive(Debug, Clone)]
pub struct Cluster {
    /// Indices into [`UnbiasedSearch::cells`].
    pub members: Vec<usize>,
    /// Member with the smallest deviation from 1/3.
    pub representative: QutritState,
    pub representative_deviation: f64,
    /// Which `unbiased_state(k)` this cluster surrounds.
    pub unbiased_index: usize,
    /// `sqrt(1 − |⟨u_k|rep⟩|²)`.
    pub distance: f64,
}

#[derive(Debug, Clone)]
pub struct UnbiasedSearch {
    pub resolution: usize,
    pub threshold: f64,
    pub cells: Vec<QutritState>,
    pub deviations: Vec<f64>,
    pub clusters: Vec<Cluster>,
}

type Cell = (usize, usize, usize, usize);

fn cell_state(res: usize, (i, j, m, n): Cell) -> QutritState {
    let rf = res as f64;
    let pa = i as f64 / rf;
    let pb = j as f64 / rf;
    let pg = (1.0 - pa - pb).max(0.0);
    let a = C64::from_polar(pa.sqrt(), TAU * m as f64 / rf);
    let g = C64::from_polar(pg.sqrt(), TAU * n as f64 / rf);
    state_unchecked(Vector3::new([a, r(pb.sqrt()), g]))
}

fn max_deviation(state: &QutritState, axes: &[SpinObservable; 3]) -> f64 {
    axes.iter()
        .map(|obs| born(state, obs).max_deviation_from(1.0 / 3.0))
        .fold(0.0, f64::max)
}

fn scan(res: usize, threshold: f64) -> Vec<(Cell, f64)> {
    let axes = Axis::ALL.map(spin_basic);
    (0..=res)
        .into_par_iter()
        .flat_map_iter(|i| {
            let mut hits = Vec::new();
            for j in 0..=(res - i) {
                for m in 0..res {
                    for n in 0..res {
                        let cell = (i, j, m, n);
                        let dev = max_deviation(&cell_state(res, cell), &axes);
                        if dev < threshold {
                            hits.push((cell, dev));
                        }
                    }
                }
            }
            hits
        })
        .collect()
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Groups hits by 4-D adjacency (Chebyshev distance 1, phases cyclic).
fn label(res: usize, hits: &[(Cell, f64)]) -> Vec<Vec<usize>> {
    let index: HashMap<Cell, usize> = hits.iter().enumerate().map(|(k, (c, _))| (*c, k)).collect();
    let mut parent: Vec<usize> = (0..hits.len()).collect();
    let wrap = |x: usize, d: i64| ((x as i64 + d).rem_euclid(res as i64)) as usize;
    for (k, &((i, j, m, n), _)) in hits.iter().enumerate() {
        for di in -1i64..=1 {
            for dj in -1i64..=1 {
                let (ni, nj) = (i as i64 + di, j as i64 + dj);
                if ni < 0 || nj < 0 {
                    continue;
                }
                for dm in -1i64..=1 {
                    for dn in -1i64..=1 {
                        let nb = (ni as usize, nj as usize, wrap(m, dm), wrap(n, dn));
                        if let Some(&other) = index.get(&nb) {
                            let (a, b) = (find(&mut parent, k), find(&mut parent, other));
                            if a != b {
                                parent[a.max(b)] = a.min(b);
                            }
                        }
                    }
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut root_to_group: HashMap<usize, usize> = HashMap::new();
    for k in 0..hits.len() {
        let root = find(&mut parent, k);
        let g = *root_to_group.entry(root).or_insert_with(|| {
            groups.push(Vec::new());
            groups.len() - 1
        });
        groups[g].push(k);
    }
    groups
}

/// Brute-force search for the unbiased states at grid resolution `R`.
///
/// Succeeds only if the qualifying cells form exactly four clusters, each
/// surrounding a distinct `unbiased_state(k)`. The result is deterministic.
pub fn search_unbiased(resolution: usize) -> Result<UnbiasedSearch, SearchError> {
    if resolution < MIN_RESOLUTION {
        return Err(SearchError::ResolutionTooLow(resolution));
    }
    let threshold = THRESHOLD_CELLS / resolution as f64;
    let mut hits = scan(resolution, threshold);
    hits.sort_by_key(|(c, _)| *c);
    if hits.is_empty() {
        return Err(SearchError::Empty);
    }
    let groups = label(resolution, &hits);
    if groups.len() != 4 {
        return Err(SearchError::ClusterCount(groups.len()));
    }

    let cells: Vec<QutritState> = hits.iter().map(|(c, _)| cell_state(resolution, *c)).collect();
    let deviations: Vec<f64> = hits.iter().map(|(_, d)| *d).collect();
    let targets = unbiased_states();
    let match_radius = MATCH_CELLS / resolution as f64;
    let mut taken = [false; 4];
    let mut clusters = Vec::with_capacity(4);
    for (g, members) in groups.into_iter().enumerate() {
        let best = *members
            .iter()
            .min_by(|a, b| deviations[**a].total_cmp(&deviations[**b]))
            .expect("non-empty group");
        let rep = cells[best];
        let (k, distance) = targets
            .iter()
            .enumerate()
            .map(|(k, u)| (k, (1.0 - u.overlap(&rep).norm_sqr()).max(0.0).sqrt()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("four targets");
        if distance > match_radius {
            return Err(SearchError::Unmatched { cluster: g, distance });
        }
        if std::mem::replace(&mut taken[k], true) {
            return Err(SearchError::DuplicateMatch(k));
        }
        clusters.push(Cluster {
            members,
            representative: rep,
            representative_deviation: deviations[best],
            unbiased_index: k,
            distance,
        });
    }
    clusters.sort_by_key(|c| c.unbiased_index);

    Ok(UnbiasedSearch { resolution, threshold, cells, deviations, clusters })
}
