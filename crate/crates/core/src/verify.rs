//! Self-contained suite of the analytic identities behind the generator,
//! run by `qutrng verify`.
//!
//! Every check evaluates one identity numerically and reports the worst
//! deviation it saw. The basic spin observables come from a [`SpinTable`] so a
//! deliberately corrupted table can serve as a negative control.

use std::f64::consts::SQRT_2;

use crate::biphoton::{
    bell_phi_plus, chsh_operator, chsh_spin, chsh_spin_closed, chsh_symmetrized, gamma, gamma_eigenpairs, sym_embed,
    sym_restrict, ChshSettings, QubitOperator, SymmetricEmbedding,
};
use crate::linalg::{r, tensor, Matrix2, Matrix3, I, IDENTITY_TOL, ONE, ZERO};
use crate::qutrit::{
    born, check_observable, concurrence, expectation, fidelity_to_unbiased, search_unbiased, spin_basic, spin_general,
    unbiased_state, unbiased_states, Axis, Outcome, QutritState, SpinObservable,
};
use crate::sampler::{random_direction, random_hermitian2, random_matrix2, random_state, RandomStream};

pub const DEFAULT_RESOLUTION: usize = 64;
pub const DEFAULT_SEED: u64 = 0x5EED_CAFE;

/// The three basic spin observables under test.
#[derive(Debug, Clone, Copy)]
pub struct SpinTable {
    pub z: SpinObservable,
    pub x: SpinObservable,
    pub y: SpinObservable,
}

impl Default for SpinTable {
    fn default() -> Self {
        Self { z: spin_basic(Axis::Z), x: spin_basic(Axis::X), y: spin_basic(Axis::Y) }
    }
}

impl SpinTable {
    /// `S_Y` with its matrix sign flipped but its eigenvectors untouched.
    pub fn with_flipped_sy() -> Self {
        let mut t = Self::default();
        let spectrum = t.y.spectrum().map(|p| p.vector);
        t.y = SpinObservable::from_parts(-*t.y.matrix(), spectrum);
        t
    }

    fn all(&self) -> [(&'static str, &SpinObservable); 3] {
        [("S_Z", &self.z), ("S_X", &self.x), ("S_Y", &self.y)]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CheckResult {
    fn within(name: &'static str, worst: f64, tol: f64) -> Self {
        Self { name, passed: worst <= tol && worst.is_finite(), detail: format!("max deviation {worst:.3e} (tol {tol:.0e})") }
    }

    fn flag(name: &'static str, passed: bool, detail: String) -> Self {
        Self { name, passed, detail }
    }
}

#[derive(Debug, Clone)]
pub struct SuiteConfig {
    pub resolution: usize,
    pub seed: u64,
    pub random_cases: usize,
    pub random_states: usize,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self { resolution: DEFAULT_RESOLUTION, seed: DEFAULT_SEED, random_cases: 100, random_states: 10_000 }
    }
}

pub fn all_passed(results: &[CheckResult]) -> bool {
    results.iter().all(|r| r.passed)
}

pub fn run_suite(cfg: &SuiteConfig, table: &SpinTable) -> Vec<CheckResult> {
    let root = RandomStream::new(cfg.seed);
    let mut out = Vec::new();

    // Spin observables themselves.
    let worst = table.all().iter().map(|(_, o)| o.spectral_defect()).fold(0.0, f64::max);
    out.push(CheckResult::within("spin spectra (eigen-equations, orthonormality)", worst, IDENTITY_TOL));

    let (sz, sx, sy) = (*table.z.matrix(), *table.x.matrix(), *table.y.matrix());
    let worst = [
        sz.commutator(&sx).max_abs_diff(&sy.scale(I)),
        sx.commutator(&sy).max_abs_diff(&sz.scale(I)),
        sy.commutator(&sz).max_abs_diff(&sx.scale(I)),
    ]
    .into_iter()
    .fold(0.0, f64::max);
    out.push(CheckResult::within("spin commutation [S_Z,S_X] = i S_Y (cyclic)", worst, IDENTITY_TOL));

    let worst = unbiased_states()
        .iter()
        .flat_map(|u| table.all().map(|(_, o)| born(u, o).max_deviation_from(1.0 / 3.0)))
        .fold(0.0, f64::max);
    out.push(CheckResult::within("nine probabilities = 1/3", worst, IDENTITY_TOL));

    let worst = unbiased_states().iter().map(|u| (concurrence(u) - 1.0).abs()).fold(0.0, f64::max);
    out.push(CheckResult::within("unbiased states have concurrence 1", worst, IDENTITY_TOL));

    out.push(match search_unbiased(cfg.resolution) {
        Ok(found) => CheckResult::flag(
            "unbiased states are unique (grid search)",
            true,
            format!(
                "R={} : {} cells in 4 clusters, distances {:?}",
                cfg.resolution,
                found.cells.len(),
                found.clusters.iter().map(|c| format!("{:.3}", c.distance)).collect::<Vec<_>>()
            ),
        ),
        Err(e) => CheckResult::flag("unbiased states are unique (grid search)", false, e.to_string()),
    });

    // Born rule against the closed-form probability table.
    let mut rng = root.split("born");
    let mut worst: f64 = 0.0;
    for _ in 0..cfg.random_cases * 10 {
        let s = random_state(&mut rng);
        for (axis, obs) in [(Axis::Z, &table.z), (Axis::X, &table.x), (Axis::Y, &table.y)] {
            let p = born(&s, obs).to_array();
            let q = closed_form_born(&s, axis);
            worst = worst.max((0..3).map(|k| (p[k] - q[k]).abs()).fold(0.0, f64::max));
        }
    }
    out.push(CheckResult::within("Born rule matches closed forms", worst, 1e-10));

    // Casimir invariant.
    let two = Matrix3::identity().scale_real(2.0);
    let mut worst = (sz * sz + sx * sx + sy * sy).max_abs_diff(&two);
    let mut rng = root.split("casimir");
    for _ in 0..cfg.random_cases {
        let frame = random_direction(&mut rng).orthonormal_frame();
        let sum = frame.iter().fold(Matrix3::zeros(), |acc, d| acc + spin_general(*d).square());
        worst = worst.max(sum.max_abs_diff(&two));
    }
    out.push(CheckResult::within("Casimir = 2I", worst, IDENTITY_TOL));

    // General directions.
    let mut rng = root.split("directions");
    let (mut spec, mut ent) = (0.0f64, 0.0f64);
    for _ in 0..cfg.random_cases {
        let obs = spin_general(random_direction(&mut rng));
        spec = spec.max(obs.spectral_defect());
        spec = spec.max(obs.reconstruct().max_abs_diff(obs.matrix()));
        for o in Outcome::ORDER {
            let v = QutritState::from_vector(*obs.eigenvector(o)).expect("unit eigenvector");
            let expect = if o == Outcome::Zero { 1.0 } else { 0.0 };
            ent = ent.max((concurrence(&v) - expect).abs());
        }
    }
    out.push(CheckResult::within("general spin eigenvectors", spec, 1e-10));
    out.push(CheckResult::within("general spin: 0-eigvec concurrence 1, ±1-eigvecs 0", ent, 1e-10));

    // State test with the check observable.
    let check = check_observable();
    let sq = check.square();
    let u0 = unbiased_state(0).expect("index in range");
    let zero_ray = QutritState::from_vector(*check.eigenvector(Outcome::Zero)).expect("unit eigenvector");
    let mut worst = expectation(&u0, &sq).map(f64::abs).unwrap_or(f64::INFINITY);
    if !zero_ray.same_ray(&u0) {
        worst = f64::INFINITY;
    }
    out.push(CheckResult::within("<psi|S^2_(1/sqrt3,zeta^3)|psi> = 0 on the unbiased state", worst, IDENTITY_TOL));

    let mut rng = root.split("state-test");
    let (mut violations, mut worst_rel, mut worst_fid) = (0usize, 0.0f64, 0.0f64);
    for _ in 0..cfg.random_states {
        let s = random_state(&mut rng);
        let f = fidelity_to_unbiased(&s);
        let e = expectation(&s, &sq).unwrap_or(f64::NAN);
        if !(e > 1e-12 || f > 1.0 - 1e-9) {
            violations += 1;
        }
        worst_rel = worst_rel.max((e - (1.0 - f)).abs());
        worst_fid = worst_fid.max((f - u0.overlap(&s).norm_sqr()).abs());
    }
    out.push(CheckResult::flag(
        "state test strictly positive off the unbiased state",
        violations == 0,
        format!("{violations} violations in {} random states", cfg.random_states),
    ));
    out.push(CheckResult::within("fidelity formula = |<phi|psi>|^2", worst_fid, IDENTITY_TOL));
    out.push(CheckResult::within("<S^2> = 1 - F", worst_rel, 1e-10));

    // Biphoton embedding and Γ.
    let emb = SymmetricEmbedding::new();
    let pm = QutritState::new(ONE, ZERO, ONE).expect("non-zero");
    let worst = emb.isometry_defect().max(sym_embed(&pm).max_abs_diff(&bell_phi_plus()));
    out.push(CheckResult::within("symmetric embedding is an isometry", worst, IDENTITY_TOL));

    let settings = ChshSettings::tsirelson();
    let worst = match (sym_restrict(&gamma(&settings.a1)), sym_restrict(&gamma(&settings.a2))) {
        (Ok(ga1), Ok(ga2)) => ga1.max_abs_diff(&sz).max(ga2.max_abs_diff(&sx)),
        _ => f64::INFINITY,
    };
    out.push(CheckResult::within("Gamma(A1) = S_Z, Gamma(A2) = S_X", worst, IDENTITY_TOL));

    let mut rng = root.split("gamma");
    let (mut prod, mut comm) = (0.0f64, 0.0f64);
    for _ in 0..cfg.random_cases {
        let u = random_matrix2(&mut rng);
        let v = random_matrix2(&mut rng);
        let g = |m: Matrix2| *gamma(&QubitOperator::new(m)).matrix();
        let rhs = (g(u) * g(v)).scale_real(2.0) - (tensor(&u, &v) + tensor(&v, &u)).scale_real(0.5);
        prod = prod.max(g(u * v).max_abs_diff(&rhs));
        comm = comm.max(g(u.commutator(&v)).max_abs_diff(&g(u).commutator(&g(v)).scale_real(2.0)));
    }
    out.push(CheckResult::within("Gamma(UV) = 2Gamma(U)Gamma(V) - (U(x)V + V(x)U)/2", prod, IDENTITY_TOL));
    out.push(CheckResult::within("Gamma([U,V]) = 2[Gamma(U),Gamma(V)]", comm, IDENTITY_TOL));

    let mut rng = root.split("gamma-commute");
    let mut ok = true;
    for _ in 0..cfg.random_cases {
        let h = random_hermitian2(&mut rng);
        let p = h * h + h.scale_real(0.5);
        let q = random_hermitian2(&mut rng);
        let g = |m: Matrix2| *gamma(&QubitOperator::new(m)).matrix();
        let commuting = g(h).commutator(&g(p)).max_abs() <= IDENTITY_TOL;
        let noncommuting = (h.commutator(&q).max_abs() > 1e-6) == (g(h).commutator(&g(q)).max_abs() > 1e-6);
        ok &= commuting && noncommuting;
    }
    out.push(CheckResult::flag("Gamma(U), Gamma(V) commute iff U, V do", ok, format!("{} pairs", cfg.random_cases)));

    let mut rng = root.split("gamma-eigen");
    let mut worst: f64 = 0.0;
    for _ in 0..cfg.random_cases {
        let Some(u) = QubitOperator::sign_of(&random_hermitian2(&mut rng)) else { continue };
        let g = gamma(&u);
        match gamma_eigenpairs(&u) {
            Ok(pairs) => {
                for (lam, v) in pairs {
                    worst = worst.max(g.matrix().apply(&v).max_abs_diff(&v.scale(r(lam))));
                }
            }
            Err(_) => worst = f64::INFINITY,
        }
    }
    out.push(CheckResult::within("Gamma eigenvectors |v_e>(x)|v_h> with eigenvalue (e+h)/2", worst, IDENTITY_TOL));

    // CHSH.
    let tsirelson = 2.0 * SQRT_2;
    let worst = match (chsh_operator(&settings), chsh_symmetrized(&settings)) {
        (Ok(plain), Ok(sym)) => (plain.expectation(&bell_phi_plus()) - tsirelson)
            .abs()
            .max((sym.expectation(&sym_embed(&pm)) - tsirelson).abs()),
        _ => f64::INFINITY,
    };
    out.push(CheckResult::within("CHSH value 2 sqrt2 (qubit pair and symmetrized)", worst, IDENTITY_TOL));

    out.push(symmetrized_max_check(&settings, &root, cfg));

    let mut worst = chsh_spin(&sz, &sx).max_abs_diff(&chsh_spin_closed(&sz, &sx));
    worst = worst.max(chsh_spin(&sz, &sx).max_abs_diff(&(two - sy * sy).scale_real(SQRT_2)));
    let mut rng = root.split("chsh-spin");
    for _ in 0..cfg.random_cases {
        let u = *spin_general(random_direction(&mut rng)).matrix();
        let v = *spin_general(random_direction(&mut rng)).matrix();
        worst = worst.max(chsh_spin(&u, &v).max_abs_diff(&chsh_spin_closed(&u, &v)));
    }
    out.push(CheckResult::within("CHSH(U,V) = sqrt2(U^2+V^2), CHSH(S_Z,S_X) = sqrt2(2-S_Y^2)", worst, IDENTITY_TOL));

    out
}

/// Maximum of the restricted symmetrized CHSH expectation over qutrit states:
/// never above `2√2`, and attained.
fn symmetrized_max_check(settings: &ChshSettings, root: &RandomStream, cfg: &SuiteConfig) -> CheckResult {
    let name = "CHSH symmetrized max = 2 sqrt2";
    let bound = 2.0 * SQRT_2;
    let restricted = match chsh_symmetrized(settings).and_then(|op| sym_restrict(&op)) {
        Ok(m) => m,
        Err(e) => return CheckResult::flag(name, false, e.to_string()),
    };
    let value = |s: &QutritState| expectation(s, &restricted).unwrap_or(f64::INFINITY);
    let mut rng = root.split("chsh-max");
    let mut best = f64::MIN;
    for _ in 0..cfg.random_states {
        best = best.max(value(&random_state(&mut rng)));
    }
    // Coarse real-amplitude grid; includes (|+⟩ + |−⟩)/√2.
    let steps = 40;
    for i in 0..=steps {
        for j in 0..=steps {
            let a = -1.0 + 2.0 * i as f64 / steps as f64;
            let b = -1.0 + 2.0 * j as f64 / steps as f64;
            for g in [-1.0, 1.0] {
                if let Ok(s) = QutritState::new(r(a), r(b), r(g)) {
                    best = best.max(value(&s));
                }
            }
        }
    }
    CheckResult::flag(
        name,
        best <= bound + 1e-9 && (bound - best).abs() <= 1e-6,
        format!("max found {best:.12} vs {bound:.12}"),
    )
}

/// Probability table `(p₊, p₀, p₋)` for the basic axes, written out in amplitudes.
pub fn closed_form_born(s: &QutritState, axis: Axis) -> [f64; 3] {
    let (a, b, g) = (s.alpha(), s.beta(), s.gamma());
    let sq = r(SQRT_2);
    match axis {
        Axis::Z => [a.norm_sqr(), b.norm_sqr(), g.norm_sqr()],
        Axis::X => [
            0.25 * (a + sq * b + g).norm_sqr(),
            0.5 * (a - g).norm_sqr(),
            0.25 * (a - sq * b + g).norm_sqr(),
        ],
        Axis::Y => [
            0.25 * (a - I * sq * b - g).norm_sqr(),
            0.5 * (a + g).norm_sqr(),
            0.25 * (a + I * sq * b - g).norm_sqr(),
        ],
    }
}
