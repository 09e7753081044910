//! Qutrits as symmetric qubit pairs: the Γ symmetrization map, the embedding
//! `|+⟩, |0⟩, |−⟩ ↦ |00⟩, (|01⟩+|10⟩)/√2, |11⟩`, and the two CHSH forms.

use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

use thiserror::Error;

use crate::linalg::{pauli, r, tensor, tensor_vec, Matrix2, Matrix3, Matrix4, Vector2, Vector3, Vector4, IDENTITY_TOL, ZERO};
use crate::qutrit::QutritState;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BiphotonError {
    #[error("operator is not a ±1-valued observable (max |M² − I| = {square:e}, Hermitian defect {hermitian:e})")]
    NotObservable { square: f64, hermitian: f64 },
    #[error("operator mixes the singlet and the symmetric subspace (max |[op, SWAP]| = {0:e})")]
    NotSymmetric(f64),
}

/// Single-qubit operator. Observables are Hermitian with `M² = I`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitOperator(Matrix2);

impl QubitOperator {
    pub fn new(m: Matrix2) -> Self {
        Self(m)
    }

    /// Checked constructor for `±1`-valued observables.
    pub fn observable(m: Matrix2) -> Result<Self, BiphotonError> {
        let op = Self(m);
        op.check_observable()?;
        Ok(op)
    }

    pub fn matrix(&self) -> &Matrix2 {
        &self.0
    }

    pub fn check_observable(&self) -> Result<(), BiphotonError> {
        let square = (self.0 * self.0).max_abs_diff(&Matrix2::identity());
        let hermitian = self.0.hermitian_defect();
        if square > IDENTITY_TOL || hermitian > IDENTITY_TOL {
            return Err(BiphotonError::NotObservable { square, hermitian });
        }
        Ok(())
    }

    /// Sign of a 2×2 Hermitian matrix's traceless part: `n̂·σ`.
    ///
    /// Returns `None` when the traceless part vanishes.
    pub fn sign_of(h: &Matrix2) -> Option<Self> {
        let nx = 0.5 * (h.get(0, 1).re + h.get(1, 0).re);
        let ny = 0.5 * (h.get(1, 0).im - h.get(0, 1).im);
        let nz = 0.5 * (h.get(0, 0).re - h.get(1, 1).re);
        let len = (nx * nx + ny * ny + nz * nz).sqrt();
        if len < 1e-9 {
            return None;
        }
        let m = pauli::x().scale_real(nx / len) + pauli::y().scale_real(ny / len) + pauli::z().scale_real(nz / len);
        Some(Self(m))
    }
}

/// Two-qubit operator in the basis `|00⟩, |01⟩, |10⟩, |11⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoQubitOperator(Matrix4);

impl TwoQubitOperator {
    pub fn new(m: Matrix4) -> Self {
        Self(m)
    }

    pub fn matrix(&self) -> &Matrix4 {
        &self.0
    }

    /// Real part of `⟨ψ|op|ψ⟩`.
    pub fn expectation(&self, v: &Vector4) -> f64 {
        self.0.expectation(v).re
    }
}

/// The four CHSH settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChshSettings {
    pub a1: QubitOperator,
    pub a2: QubitOperator,
    pub b1: QubitOperator,
    pub b2: QubitOperator,
}

impl ChshSettings {
    /// `A₁ = Z`, `A₂ = X`, `B₁ = (A₁+A₂)/√2`, `B₂ = (A₁−A₂)/√2`.
    pub fn tsirelson() -> Self {
        let a1 = pauli::z();
        let a2 = pauli::x();
        Self {
            a1: QubitOperator(a1),
            a2: QubitOperator(a2),
            b1: QubitOperator((a1 + a2).scale_real(FRAC_1_SQRT_2)),
            b2: QubitOperator((a1 - a2).scale_real(FRAC_1_SQRT_2)),
        }
    }

    pub fn validate(&self) -> Result<(), BiphotonError> {
        [self.a1, self.a2, self.b1, self.b2].iter().try_for_each(QubitOperator::check_observable)
    }
}

/// `(1, 0, 0, 1)/√2`.
pub fn bell_phi_plus() -> Vector4 {
    Vector4::new([r(FRAC_1_SQRT_2), ZERO, ZERO, r(FRAC_1_SQRT_2)])
}

/// Qubit swap `|ab⟩ ↦ |ba⟩`.
pub fn swap() -> Matrix4 {
    Matrix4::from_real([
        [1.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 1.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
    ])
}

/// `(|01⟩ − |10⟩)/√2`.
pub fn singlet() -> Vector4 {
    Vector4::new([ZERO, r(FRAC_1_SQRT_2), r(-FRAC_1_SQRT_2), ZERO])
}

/// `Γ(U) = ½(U⊗I + I⊗U)`.
pub fn gamma(u: &QubitOperator) -> TwoQubitOperator {
    let id = Matrix2::identity();
    TwoQubitOperator((tensor(&u.0, &id) + tensor(&id, &u.0)).scale_real(0.5))
}

/// Isometry from the qutrit space onto the symmetric two-qubit subspace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymmetricEmbedding {
    columns: [Vector4; 3],
}

impl Default for SymmetricEmbedding {
    fn default() -> Self {
        Self::new()
    }
}

impl SymmetricEmbedding {
    pub fn new() -> Self {
        let k = r(FRAC_1_SQRT_2);
        Self {
            columns: [
                Vector4::basis(0),
                Vector4::new([ZERO, k, k, ZERO]),
                Vector4::basis(3),
            ],
        }
    }

    pub fn columns(&self) -> &[Vector4; 3] {
        &self.columns
    }

    pub fn embed_vector(&self, v: &Vector3) -> Vector4 {
        (0..3).fold(Vector4::zeros(), |acc, k| acc + self.columns[k].scale(v[k]))
    }

    /// `V† · op · V` without the invariance check.
    pub fn compress(&self, op: &Matrix4) -> Matrix3 {
        let mut out = Matrix3::zeros();
        for i in 0..3 {
            let col_i = op.apply(&self.columns[i]);
            for j in 0..3 {
                out[(j, i)] = self.columns[j].inner(&col_i);
            }
        }
        out
    }

    /// `max |V†V − I₃|`.
    pub fn isometry_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                let g = self.columns[i].inner(&self.columns[j]);
                let e = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g - r(e)).norm());
            }
        }
        worst
    }
}

pub fn sym_embed(q: &QutritState) -> Vector4 {
    SymmetricEmbedding::new().embed_vector(q.vector())
}

/// Restricts a swap-commuting two-qubit operator to the symmetric subspace.
pub fn sym_restrict(op: &TwoQubitOperator) -> Result<Matrix3, BiphotonError> {
    let sw = swap();
    let defect = op.0.commutator(&sw).max_abs();
    if defect > IDENTITY_TOL {
        return Err(BiphotonError::NotSymmetric(defect));
    }
    Ok(SymmetricEmbedding::new().compress(&op.0))
}

/// `A₁⊗B₁ + A₁⊗B₂ + A₂⊗B₁ − A₂⊗B₂`.
pub fn chsh_operator(s: &ChshSettings) -> Result<TwoQubitOperator, BiphotonError> {
    s.validate()?;
    Ok(chsh_operator_unchecked(s))
}

/// [`chsh_operator`] without the `M² = I` check.
pub fn chsh_operator_unchecked(s: &ChshSettings) -> TwoQubitOperator {
    let t = |a: &QubitOperator, b: &QubitOperator| tensor(&a.0, &b.0);
    TwoQubitOperator(t(&s.a1, &s.b1) + t(&s.a1, &s.b2) + t(&s.a2, &s.b1) - t(&s.a2, &s.b2))
}

/// `Γ(A₁)Γ(B₁) + Γ(A₁)Γ(B₂) + Γ(A₂)Γ(B₁) − Γ(A₂)Γ(B₂)`, built from operator
/// products as written, no re-symmetrization.
pub fn chsh_symmetrized(s: &ChshSettings) -> Result<TwoQubitOperator, BiphotonError> {
    s.validate()?;
    let [a1, a2, b1, b2] = [s.a1, s.a2, s.b1, s.b2].map(|o| gamma(&o).0);
    Ok(TwoQubitOperator(a1 * b1 + a1 * b2 + a2 * b1 - a2 * b2))
}

/// `U(U+V)/√2 + U(U−V)/√2 + V(U+V)/√2 − V(U−V)/√2`.
pub fn chsh_spin(u: &Matrix3, v: &Matrix3) -> Matrix3 {
    let k = FRAC_1_SQRT_2;
    let plus = (*u + *v).scale_real(k);
    let minus = (*u - *v).scale_real(k);
    *u * plus + *u * minus + *v * plus - *v * minus
}

/// `√2(U² + V²)`, the simplified form of [`chsh_spin`].
pub fn chsh_spin_closed(u: &Matrix3, v: &Matrix3) -> Matrix3 {
    (*u * *u + *v * *v).scale_real(SQRT_2)
}

/// Product eigenvectors `|v_ε⟩⊗|v_η⟩` of `Γ(U)` with eigenvalues `½(ε+η)`,
/// ordered `(ε, η) = (+,+), (+,−), (−,+), (−,−)`.
///
/// For `U = ±I` every pair carries the single eigenvalue `±1`.
pub fn gamma_eigenpairs(u: &QubitOperator) -> Result<[(f64, Vector4); 4], BiphotonError> {
    u.check_observable()?;
    let id = Matrix2::identity();
    let plus = qubit_eigvec(&(id + u.0).scale_real(0.5));
    let minus = qubit_eigvec(&(id - u.0).scale_real(0.5));
    let (vp, vm, ep, em) = match (plus, minus) {
        (Some(p), Some(m)) => (p, m, 1.0, -1.0),
        // U = I or U = −I: use the computational basis.
        (Some(_), None) => (Vector2::basis(0), Vector2::basis(1), 1.0, 1.0),
        (None, Some(_)) => (Vector2::basis(0), Vector2::basis(1), -1.0, -1.0),
        (None, None) => unreachable!("projectors of an observable sum to I"),
    };
    let pairs = [(vp, ep), (vm, em)];
    let mut out = [(0.0, Vector4::zeros()); 4];
    for (k, ((va, ea), (vb, eb))) in pairs.iter().flat_map(|a| pairs.iter().map(move |b| (*a, *b))).enumerate() {
        out[k] = (0.5 * (ea + eb), tensor_vec(&va, &vb));
    }
    Ok(out)
}

/// Normalized largest column of a rank-≤1 projector.
fn qubit_eigvec(p: &Matrix2) -> Option<Vector2> {
    let cols = [0, 1].map(|j| Vector2::new([p.get(0, j), p.get(1, j)]));
    let best = if cols[0].norm() >= cols[1].norm() { cols[0] } else { cols[1] };
    let n = best.norm();
    (n > 1e-9).then(|| best.scale(r(1.0 / n)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, ONE};
    use crate::qutrit::{s_x_matrix, s_y_matrix, s_z_matrix, spin_basic, Axis, Outcome, QutritState};
    use crate::sampler::{random_hermitian2, random_matrix2, random_state, RandomStream};

    const TOL: f64 = 1e-12;

    #[test]
    fn gamma_examples() {
        let id = QubitOperator::new(Matrix2::identity());
        assert_eq!(*gamma(&id).matrix(), Matrix4::identity());
        let z = QubitOperator::new(pauli::z());
        assert_eq!(*gamma(&z).matrix(), Matrix4::diag([ONE, ZERO, ZERO, -ONE]));

        let s = ChshSettings::tsirelson();
        assert!(sym_restrict(&gamma(&s.a1)).unwrap().approx_eq(&s_z_matrix(), TOL));
        assert!(sym_restrict(&gamma(&s.a2)).unwrap().approx_eq(&s_x_matrix(), TOL));
        assert!(sym_restrict(&gamma(&QubitOperator::new(pauli::y()))).unwrap().approx_eq(&s_y_matrix(), TOL));
    }

    #[test]
    fn gamma_commutes_with_swap() {
        let mut rng = RandomStream::new(1);
        for _ in 0..20 {
            let g = gamma(&QubitOperator::new(random_matrix2(&mut rng)));
            assert!(g.matrix().commutator(&swap()).max_abs() < TOL);
        }
    }

    #[test]
    fn embedding_is_isometric() {
        let e = SymmetricEmbedding::new();
        assert!(e.isometry_defect() < TOL);
        for col in e.columns() {
            assert!(col.inner(&singlet()).norm() < TOL);
        }
        let k = r(FRAC_1_SQRT_2);
        assert!(sym_embed(&QutritState::zero()).max_abs_diff(&Vector4::new([ZERO, k, k, ZERO])) < TOL);
        let plus_minus = QutritState::new(ONE, ZERO, ONE).unwrap();
        assert!(sym_embed(&plus_minus).max_abs_diff(&bell_phi_plus()) < TOL);
        assert!(sym_restrict(&TwoQubitOperator::new(Matrix4::identity())).unwrap().approx_eq(&Matrix3::identity(), TOL));
    }

    #[test]
    fn sym_restrict_rejects_mixing_operators() {
        let mixer = TwoQubitOperator::new(tensor(&pauli::z(), &Matrix2::identity()));
        assert!(matches!(sym_restrict(&mixer), Err(BiphotonError::NotSymmetric(_))));
    }

    #[test]
    fn settings_reproduce_listing() {
        let s = ChshSettings::tsirelson();
        let k = FRAC_1_SQRT_2;
        assert!(s.b1.matrix().approx_eq(&Matrix2::from_real([[k, k], [k, -k]]), TOL));
        assert!(s.b2.matrix().approx_eq(&Matrix2::from_real([[k, -k], [-k, -k]]), TOL));
        assert!(s.validate().is_ok());
    }

    #[test]
    fn chsh_qubit_pair_values() {
        let op = chsh_operator(&ChshSettings::tsirelson()).unwrap();
        assert!((op.expectation(&bell_phi_plus()) - 2.0 * SQRT_2).abs() < TOL);
        assert!((op.expectation(&Vector4::basis(0)) - SQRT_2).abs() < TOL);
        assert!(op.expectation(&sym_embed(&QutritState::zero())).abs() < TOL);

        let id = QubitOperator::new(Matrix2::identity());
        let all_id = ChshSettings { a1: id, a2: id, b1: id, b2: id };
        assert_eq!(*chsh_operator_unchecked(&all_id).matrix(), Matrix4::identity().scale_real(2.0));
    }

    #[test]
    fn chsh_rejects_non_observables() {
        let mut s = ChshSettings::tsirelson();
        s.b2 = QubitOperator::new(Matrix2::identity().scale_real(2.0));
        assert!(matches!(chsh_operator(&s), Err(BiphotonError::NotObservable { .. })));
        assert!(chsh_symmetrized(&s).is_err());
        assert!(QubitOperator::observable(Matrix2::new([[ZERO, ONE], [ZERO, ZERO]])).is_err());
    }

    #[test]
    fn chsh_symmetrized_values() {
        let op = chsh_symmetrized(&ChshSettings::tsirelson()).unwrap();
        let pm = QutritState::new(ONE, ZERO, ONE).unwrap();
        assert!((op.expectation(&sym_embed(&pm)) - 2.0 * SQRT_2).abs() < TOL);
        // Restricts to √2(2 − S_Y²) and ⟨0|S_Y²|0⟩ = 1.
        assert!((op.expectation(&sym_embed(&QutritState::zero())) - SQRT_2).abs() < TOL);
        assert!(op.matrix().commutator(&swap()).max_abs() < TOL);
        // Singlet is annihilated.
        assert!(op.matrix().apply(&singlet()).norm() < TOL);
    }

    #[test]
    fn chsh_symmetrized_bounded_on_random_states() {
        let op = chsh_symmetrized(&ChshSettings::tsirelson()).unwrap();
        let mut rng = RandomStream::new(0xC45);
        let best = (0..10_000)
            .map(|_| op.expectation(&sym_embed(&random_state(&mut rng))))
            .fold(f64::MIN, f64::max);
        assert!(best <= 2.0 * SQRT_2 + 1e-9, "{best}");
        assert!(best > 2.0 * SQRT_2 - 0.1);
    }

    #[test]
    fn chsh_spin_identity() {
        let sz = s_z_matrix();
        let sx = s_x_matrix();
        let sy = s_y_matrix();
        let lhs = chsh_spin(&sz, &sx);
        assert!(lhs.approx_eq(&chsh_spin_closed(&sz, &sx), TOL));
        let alt = (Matrix3::identity().scale_real(2.0) - sy * sy).scale_real(SQRT_2);
        assert!(lhs.approx_eq(&alt, TOL));
        assert_eq!(chsh_spin(&Matrix3::zeros(), &Matrix3::zeros()), Matrix3::zeros());
        let pm = QutritState::new(ONE, ZERO, ONE).unwrap();
        let e = crate::qutrit::expectation(&pm, &lhs).unwrap();
        assert!((e - 2.0 * SQRT_2).abs() < TOL);
    }

    #[test]
    fn restricted_symmetrized_chsh_is_spin_form() {
        let op = chsh_symmetrized(&ChshSettings::tsirelson()).unwrap();
        let restricted = sym_restrict(&op).unwrap();
        assert!(restricted.approx_eq(&chsh_spin(&s_z_matrix(), &s_x_matrix()), TOL));
    }

    #[test]
    fn gamma_product_and_commutator_rules() {
        let mut rng = RandomStream::new(0x6A);
        for _ in 0..100 {
            let u = random_matrix2(&mut rng);
            let v = random_matrix2(&mut rng);
            let (gu, gv) = (gamma(&QubitOperator::new(u)).0, gamma(&QubitOperator::new(v)).0);
            let guv = gamma(&QubitOperator::new(u * v)).0;
            let rhs = (gu * gv).scale_real(2.0) - (tensor(&u, &v) + tensor(&v, &u)).scale_real(0.5);
            assert!(guv.approx_eq(&rhs, TOL));
            let gcomm = gamma(&QubitOperator::new(u.commutator(&v))).0;
            assert!(gcomm.approx_eq(&gu.commutator(&gv).scale_real(2.0), TOL));
        }
    }

    #[test]
    fn gamma_commutation_iff() {
        let mut rng = RandomStream::new(0x77);
        for _ in 0..50 {
            let h = random_hermitian2(&mut rng);
            // Polynomials in h commute with h.
            let p = h * h + h.scale(c(0.3, -0.2)) + Matrix2::identity();
            let q = random_hermitian2(&mut rng);
            let g = |m: Matrix2| gamma(&QubitOperator::new(m)).0;
            assert!(g(h).commutator(&g(p)).max_abs() < TOL);
            assert!(h.commutator(&q).max_abs() > 1e-6);
            assert!(g(h).commutator(&g(q)).max_abs() > 1e-6);
        }
    }

    #[test]
    fn eigenpairs_of_gamma() {
        let z = QubitOperator::new(pauli::z());
        let pairs = gamma_eigenpairs(&z).unwrap();
        let vals: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        assert_eq!(vals, vec![1.0, 0.0, 0.0, -1.0]);
        for (k, (_, v)) in pairs.iter().enumerate() {
            assert!(v.max_abs_diff(&Vector4::basis(k)) < TOL);
        }

        let x = QubitOperator::new(pauli::x());
        let pairs = gamma_eigenpairs(&x).unwrap();
        assert!(pairs[0].1.max_abs_diff(&Vector4::new([r(0.5); 4])) < TOL);
        let g = gamma(&x);
        for (lam, v) in pairs {
            assert!(g.matrix().apply(&v).max_abs_diff(&v.scale(r(lam))) < TOL);
        }

        // Symmetric combination of the two 0-eigenvectors of Γ(Z) restricts to
        // the 0-eigenvector of S_Z.
        let pairs = gamma_eigenpairs(&z).unwrap();
        let sym = (pairs[1].1 + pairs[2].1).scale(r(FRAC_1_SQRT_2));
        let as_qutrit = Vector3::new([0, 1, 2].map(|k| SymmetricEmbedding::new().columns()[k].inner(&sym)));
        assert!(as_qutrit.max_abs_diff(spin_basic(Axis::Z).eigenvector(Outcome::Zero)) < TOL);

        let id = QubitOperator::new(Matrix2::identity());
        assert!(gamma_eigenpairs(&id).unwrap().iter().all(|p| p.0 == 1.0));
        assert!(gamma_eigenpairs(&QubitOperator::new(Matrix2::identity().scale_real(2.0))).is_err());
    }

    #[test]
    fn eigenpairs_of_random_observables() {
        let mut rng = RandomStream::new(0xE16);
        for _ in 0..100 {
            let u = QubitOperator::sign_of(&random_hermitian2(&mut rng)).unwrap();
            assert!(u.check_observable().is_ok());
            let g = gamma(&u);
            for (lam, v) in gamma_eigenpairs(&u).unwrap() {
                assert!((v.norm() - 1.0).abs() < TOL);
                assert!(g.matrix().apply(&v).max_abs_diff(&v.scale(r(lam))) < 1e-12);
            }
        }
    }

    #[test]
    fn sign_of_pauli_y() {
        let h = pauli::y().scale_real(3.0) + Matrix2::identity().scale_real(0.5);
        let s = QubitOperator::sign_of(&h).unwrap();
        assert!(s.matrix().approx_eq(&pauli::y(), TOL));
        assert!(QubitOperator::sign_of(&Matrix2::identity()).is_none());
    }
}
