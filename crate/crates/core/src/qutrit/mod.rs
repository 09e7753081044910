//! Qutrit states over the symmetric basis `|+⟩, |0⟩, |−⟩`, spin-1 observables
//! with closed-form spectra, and the unbiased states.

use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{c, r, zeta, LinalgError, Matrix3, Vector3, C64, I, IDENTITY_TOL, ONE, ZERO};

mod search;

pub use search::{search_unbiased, Cluster, SearchError, UnbiasedSearch, MATCH_CELLS, MIN_RESOLUTION};

/// Two states are the same ray when `|⟨a|b⟩| ≥ 1 − RAY_TOL`.
pub const RAY_TOL: f64 = 1e-9;

/// Renormalization larger than this sets the drift flag of [`make_state`].
pub const DRIFT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QutritError {
    #[error("amplitudes are all zero")]
    ZeroVector,
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("unbiased state index {0} out of range 0..=3")]
    UnbiasedIndex(usize),
    #[error("direction has c^2 + s^2 = {0}, expected 1")]
    BadDirection(f64),
}

/// Normalized pure qutrit state `α|+⟩ + β|0⟩ + γ|−⟩`.
#[derive(Clone, Copy, PartialEq)]
pub struct QutritState(Vector3);

impl QutritState {
    /// Normalizing constructor. Fails on a zero or non-finite vector.
    pub fn new(alpha: C64, beta: C64, gamma: C64) -> Result<Self, QutritError> {
        make_state(alpha, beta, gamma).map(|n| n.state)
    }

    pub fn from_vector(v: Vector3) -> Result<Self, QutritError> {
        Self::new(v[0], v[1], v[2])
    }

    pub fn plus() -> Self {
        Self(Vector3::basis(0))
    }

    pub fn zero() -> Self {
        Self(Vector3::basis(1))
    }

    pub fn minus() -> Self {
        Self(Vector3::basis(2))
    }

    pub fn alpha(&self) -> C64 {
        self.0[0]
    }

    pub fn beta(&self) -> C64 {
        self.0[1]
    }

    pub fn gamma(&self) -> C64 {
        self.0[2]
    }

    pub fn vector(&self) -> &Vector3 {
        &self.0
    }

    pub fn overlap(&self, other: &Self) -> C64 {
        self.0.inner(&other.0)
    }

    /// Equality of rays: equal up to a global phase.
    pub fn same_ray(&self, other: &Self) -> bool {
        self.overlap(other).norm() >= 1.0 - RAY_TOL
    }
}

impl fmt::Debug for QutritState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "QutritState({:?})", self.0)
    }
}

/// Result of [`make_state`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Normalized {
    pub state: QutritState,
    /// The input norm differed from 1 by more than [`DRIFT_TOL`].
    pub renormalized: bool,
}

pub fn make_state(alpha: C64, beta: C64, gamma: C64) -> Result<Normalized, QutritError> {
    let v = Vector3::try_new([alpha, beta, gamma])?;
    let norm = v.norm();
    if norm == 0.0 {
        return Err(QutritError::ZeroVector);
    }
    if !norm.is_finite() {
        return Err(QutritError::Linalg(LinalgError::NonFinite(0)));
    }
    Ok(Normalized {
        state: QutritState(v.scale(r(1.0 / norm))),
        renormalized: (norm - 1.0).abs() > DRIFT_TOL,
    })
}

/// The four states giving probability 1/3 for every outcome of `S_Z`, `S_X`, `S_Y`.
///
/// `k = 0, 1` are `(ζ, ±1, ζ³)/√3`, `k = 2, 3` are `(ζ³, ±1, ζ)/√3`.
pub fn unbiased_state(k: usize) -> Result<QutritState, QutritError> {
    let z = zeta();
    let z3 = z.powu(3);
    let (a, b, g) = match k {
        0 => (z, ONE, z3),
        1 => (z, -ONE, z3),
        2 => (z3, ONE, z),
        3 => (z3, -ONE, z),
        _ => return Err(QutritError::UnbiasedIndex(k)),
    };
    let s = r(1.0 / 3f64.sqrt());
    Ok(QutritState(Vector3::new([a * s, b * s, g * s])))
}

pub fn unbiased_states() -> [QutritState; 4] {
    [0, 1, 2, 3].map(|k| unbiased_state(k).expect("index in range"))
}

/// Spin measurement outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Outcome {
    Plus,
    Zero,
    Minus,
}

impl Outcome {
    /// Cumulative sampling order.
    pub const ORDER: [Outcome; 3] = [Outcome::Plus, Outcome::Zero, Outcome::Minus];

    pub fn eigenvalue(self) -> f64 {
        match self {
            Outcome::Plus => 1.0,
            Outcome::Zero => 0.0,
            Outcome::Minus => -1.0,
        }
    }

    /// Trit encoding: `+1 → 0`, `0 → 1`, `−1 → 2`.
    pub fn trit(self) -> u8 {
        match self {
            Outcome::Plus => 0,
            Outcome::Zero => 1,
            Outcome::Minus => 2,
        }
    }

    pub fn from_trit(t: u8) -> Option<Self> {
        match t {
            0 => Some(Outcome::Plus),
            1 => Some(Outcome::Zero),
            2 => Some(Outcome::Minus),
            _ => None,
        }
    }

    fn index(self) -> usize {
        self.trit() as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Axis {
    Z,
    X,
    Y,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::Z, Axis::X, Axis::Y];

    /// Public trit `0, 1, 2` selects `Z, X, Y`.
    pub fn from_trit(t: u8) -> Option<Self> {
        Self::ALL.get(t as usize).copied()
    }
}

/// Direction of a spin measurement, parameterized by `(c, s, θ)` with
/// `c = cos χ`, `s = sin χ`, `θ = exp(iφ)`.
///
/// The observable is `S_{c,θ} = c·S_Z + s·S_θ`, so `c` weights the `Z` axis.
/// At `s = 0` the phase is irrelevant and `S_{1,θ} = S_Z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinDirection {
    cos: f64,
    sin: f64,
    theta: C64,
}

impl SpinDirection {
    pub fn new(chi: f64, phi: f64) -> Self {
        let (sin, cos) = chi.sin_cos();
        Self { cos, sin, theta: C64::from_polar(1.0, phi) }
    }

    /// From the algebraic parameters directly; `c² + s²` and `|θ|` must be 1.
    pub fn from_parts(cos: f64, sin: f64, theta: C64) -> Result<Self, QutritError> {
        let n = cos * cos + sin * sin;
        if (n - 1.0).abs() > IDENTITY_TOL || !n.is_finite() {
            return Err(QutritError::BadDirection(n));
        }
        if (theta.norm() - 1.0).abs() > IDENTITY_TOL {
            return Err(QutritError::BadDirection(theta.norm_sqr()));
        }
        Ok(Self { cos, sin, theta })
    }

    pub fn cos(&self) -> f64 {
        self.cos
    }

    pub fn sin(&self) -> f64 {
        self.sin
    }

    pub fn theta(&self) -> C64 {
        self.theta
    }

    /// Spatial unit vector `(s cos φ, s sin φ, c)` of this direction.
    pub fn unit_vector(&self) -> [f64; 3] {
        [self.sin * self.theta.re, self.sin * self.theta.im, self.cos]
    }

    /// Three pairwise orthogonal directions starting with `self`.
    pub fn orthonormal_frame(&self) -> [SpinDirection; 3] {
        [
            *self,
            SpinDirection { cos: -self.sin, sin: self.cos, theta: self.theta },
            SpinDirection { cos: 0.0, sin: 1.0, theta: self.theta * I },
        ]
    }
}

/// Eigenvalue/eigenvector pair of a spin observable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eigenpair {
    pub outcome: Outcome,
    pub vector: Vector3,
}

/// Spin-1 observable with its spectrum, eigenvalues exactly `+1, 0, −1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinObservable {
    matrix: Matrix3,
    /// Indexed by [`Outcome::trit`], i.e. ordered `+1, 0, −1`.
    spectrum: [Vector3; 3],
}

impl SpinObservable {
    /// Pairs a matrix with eigenvectors for `+1, 0, −1`, in that order.
    ///
    /// No consistency check happens here; see [`SpinObservable::spectral_defect`].
    pub fn from_parts(matrix: Matrix3, spectrum: [Vector3; 3]) -> Self {
        Self { matrix, spectrum }
    }

    pub fn matrix(&self) -> &Matrix3 {
        &self.matrix
    }

    pub fn eigenvector(&self, outcome: Outcome) -> &Vector3 {
        &self.spectrum[outcome.index()]
    }

    pub fn spectrum(&self) -> [Eigenpair; 3] {
        Outcome::ORDER.map(|o| Eigenpair { outcome: o, vector: self.spectrum[o.index()] })
    }

    /// `Σ λ |v⟩⟨v|` over the spectrum.
    pub fn reconstruct(&self) -> Matrix3 {
        self.spectrum()
            .iter()
            .fold(Matrix3::zeros(), |acc, p| acc + p.vector.outer(&p.vector).scale_real(p.outcome.eigenvalue()))
    }

    pub fn square(&self) -> Matrix3 {
        self.matrix * self.matrix
    }

    /// Worst violation of the eigen-equations, orthonormality and Hermiticity.
    pub fn spectral_defect(&self) -> f64 {
        let mut worst = self.matrix.hermitian_defect();
        for p in self.spectrum() {
            let lhs = self.matrix.apply(&p.vector);
            let rhs = p.vector.scale(r(p.outcome.eigenvalue()));
            worst = worst.max(lhs.max_abs_diff(&rhs));
        }
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { ONE } else { ZERO };
                worst = worst.max((self.spectrum[i].inner(&self.spectrum[j]) - expect).norm());
            }
        }
        worst
    }
}

pub fn s_z_matrix() -> Matrix3 {
    Matrix3::diag([ONE, ZERO, -ONE])
}

pub fn s_x_matrix() -> Matrix3 {
    Matrix3::from_real([[0.0, 1.0, 0.0], [1.0, 0.0, 1.0], [0.0, 1.0, 0.0]]).scale_real(FRAC_1_SQRT_2)
}

pub fn s_y_matrix() -> Matrix3 {
    Matrix3::new([[ZERO, -I, ZERO], [I, ZERO, -I], [ZERO, I, ZERO]]).scale_real(FRAC_1_SQRT_2)
}

/// `S_Z`, `S_X` or `S_Y` with the textbook eigenvectors.
pub fn spin_basic(axis: Axis) -> SpinObservable {
    let h = r(0.5);
    let sq = r(FRAC_1_SQRT_2);
    match axis {
        Axis::Z => SpinObservable {
            matrix: s_z_matrix(),
            spectrum: [Vector3::basis(0), Vector3::basis(1), Vector3::basis(2)],
        },
        Axis::X => SpinObservable {
            matrix: s_x_matrix(),
            spectrum: [
                Vector3::new([h, r(FRAC_1_SQRT_2), h]),
                Vector3::new([sq, ZERO, -sq]),
                Vector3::new([h, r(-FRAC_1_SQRT_2), h]),
            ],
        },
        Axis::Y => SpinObservable {
            matrix: s_y_matrix(),
            spectrum: [
                Vector3::new([h, c(0.0, FRAC_1_SQRT_2), -h]),
                Vector3::new([sq, ZERO, sq]),
                Vector3::new([h, c(0.0, -FRAC_1_SQRT_2), -h]),
            ],
        },
    }
}

/// `S_{c,θ} = c·S_Z + s·S_θ` with its closed-form eigenvectors.
pub fn spin_general(d: SpinDirection) -> SpinObservable {
    let (cs, sn, th) = (d.cos, d.sin, d.theta);
    let thc = th.conj();
    let off = sn / SQRT_2;
    let matrix = Matrix3::new([
        [r(cs), thc * off, ZERO],
        [th * off, ZERO, thc * off],
        [ZERO, th * off, r(-cs)],
    ]);
    let zero = Vector3::new([-thc * off, r(cs), th * off]);
    let plus = Vector3::new([thc * (0.5 * (1.0 + cs)), r(sn * FRAC_1_SQRT_2), th * (0.5 * (1.0 - cs))]);
    let minus = Vector3::new([thc * (0.5 * (1.0 - cs)), r(-sn * FRAC_1_SQRT_2), th * (0.5 * (1.0 + cs))]);
    SpinObservable { matrix, spectrum: [plus, zero, minus] }
}

/// Direction of the fidelity check: `c = 1/√3`, `θ = ζ³`.
pub fn check_direction() -> SpinDirection {
    let cos = 1.0 / 3f64.sqrt();
    let sin = (2.0f64 / 3.0).sqrt();
    SpinDirection { cos, sin, theta: zeta().powu(3) }
}

/// `S_{1/√3,ζ³}`, whose 0-eigenvector is `unbiased_state(0)`.
pub fn check_observable() -> SpinObservable {
    spin_general(check_direction())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutcomeDistribution {
    pub p_plus: f64,
    pub p_zero: f64,
    pub p_minus: f64,
}

impl OutcomeDistribution {
    pub fn get(&self, o: Outcome) -> f64 {
        match o {
            Outcome::Plus => self.p_plus,
            Outcome::Zero => self.p_zero,
            Outcome::Minus => self.p_minus,
        }
    }

    /// Probabilities ordered `+1, 0, −1`.
    pub fn to_array(&self) -> [f64; 3] {
        [self.p_plus, self.p_zero, self.p_minus]
    }

    pub fn max_deviation_from(&self, p: f64) -> f64 {
        self.to_array().iter().map(|q| (q - p).abs()).fold(0.0, f64::max)
    }
}

/// Born rule: `p_v = |⟨v|ψ⟩|²` for each eigenvector.
pub fn born(state: &QutritState, obs: &SpinObservable) -> OutcomeDistribution {
    let p = |o: Outcome| obs.eigenvector(o).inner(state.vector()).norm_sqr().min(1.0);
    OutcomeDistribution { p_plus: p(Outcome::Plus), p_zero: p(Outcome::Zero), p_minus: p(Outcome::Minus) }
}

/// `C = |β² − 2αγ|`.
pub fn concurrence(state: &QutritState) -> f64 {
    (state.beta() * state.beta() - state.alpha() * state.gamma() * 2.0).norm()
}

/// `⟨ψ|M|ψ⟩` for Hermitian `M`.
pub fn expectation(state: &QutritState, m: &Matrix3) -> Result<f64, QutritError> {
    let defect = m.hermitian_defect();
    if defect > IDENTITY_TOL {
        return Err(LinalgError::NotHermitian(defect).into());
    }
    let e = m.expectation(state.vector());
    debug_assert!(e.im.abs() <= IDENTITY_TOL * 10.0);
    Ok(e.re)
}

/// `F = |⟨φ|ψ⟩|² = (1/3)|αζ* + β − γζ|²` against `unbiased_state(0)`.
pub fn fidelity_to_unbiased(state: &QutritState) -> f64 {
    let z = zeta();
    let amp = state.alpha() * z.conj() + state.beta() - state.gamma() * z;
    (amp.norm_sqr() / 3.0).min(1.0)
}

/// A unit vector orthogonal to `unbiased_state(0)`: the +1-eigenvector of the
/// check observable, fidelity 0.
pub fn check_orthogonal_state() -> QutritState {
    QutritState(*check_observable().eigenvector(Outcome::Plus))
}

pub(crate) fn state_unchecked(v: Vector3) -> QutritState {
    QutritState(v)
}
