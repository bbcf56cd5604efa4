//! Restriction of the rotated Hamiltonian onto the stabilizer subspace fixed
//! by the retained generators, and the exact constrained eigensolve standing
//! in for the quantum correction.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::Hamiltonian;
use crate::pauli::PauliOperator;
use crate::quasi_model::{NoncontextualState, QuasiModel};
use crate::rotations::{apply_plan, diagonalize_generators, fix_generator_signs, RotationPlan};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolveConfig {
    /// Maximum qubit count for dense matrices.
    pub dense_limit: usize,
    /// Keep the 𝒜 constraint at intermediate steps.
    pub enforce_a: bool,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            dense_limit: 14,
            enforce_a: true,
        }
    }
}

/// A contextual-subspace eigenproblem: the rotated Hamiltonian restricted to
/// the free qubits, the per-qubit stabilizer eigenvalues, and the restricted
/// 𝒜 operator whose +1 eigenspace is the search space.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CsVqeProblem {
    pub rotated_h: Hamiltonian,
    pub plan: RotationPlan,
    pub generator_assignments: BTreeMap<usize, f64>,
    pub free_qubits: Vec<usize>,
    /// Full restricted Hamiltonian on the free qubits (constant included),
    /// so the solver returns the total energy directly.
    pub restricted_h: Hamiltonian,
    pub a_restricted: Option<Hamiltonian>,
    pub nc_energy: f64,
    pub retained: Vec<usize>,
}

impl CsVqeProblem {
    pub fn quantum_qubits(&self) -> usize {
        self.free_qubits.len()
    }

    pub fn restricted_term_count(&self) -> usize {
        self.restricted_h.num_terms()
    }
}

/// Restricts `h` to the qubits not named in `assignments`.
///
/// Terms with X or Y on an assigned qubit are dropped (zero expectation in
/// the stabilized subspace). Surviving terms contribute their coefficient
/// times the product of assignments at their Z positions; identical
/// restrictions merge, and pure-identity restrictions accumulate into the
/// constant.
pub fn restrict(h: &Hamiltonian, assignments: &BTreeMap<usize, f64>) -> Result<Hamiltonian> {
    let n = h.num_qubits();
    let mut assigned_mask = 0u64;
    for &q in assignments.keys() {
        if q >= n {
            return Err(Error::QubitOutOfRange { index: q, n });
        }
        assigned_mask |= 1 << q;
    }
    let free: Vec<usize> = (0..n).filter(|q| assigned_mask >> q & 1 == 0).collect();
    let mut out = Hamiltonian::new(free.len());
    out.set_constant(h.constant());
    for (p, coeff) in h.terms() {
        if p.x_bits() & assigned_mask != 0 {
            continue;
        }
        let mut p1 = 1.0;
        for (&q, &value) in assignments {
            if p.z_bits() >> q & 1 == 1 {
                p1 *= value;
            }
        }
        if (p.x_bits() | p.z_bits()) & !assigned_mask == 0 {
            out.set_constant(out.constant() + p1 * coeff);
            continue;
        }
        let trimmed = PauliOperator::new(n, p.x_bits(), p.z_bits() & !assigned_mask, 0)?;
        let p2 = trimmed.project_onto(&free)?;
        out.add_term(&p2, p1 * coeff)?;
    }
    Ok(out)
}

/// Assembles the CS-VQE problem for a retained generator subset: builds the
/// diagonalizing plan for those generators only, rotates and restricts the
/// Hamiltonian, and restricts 𝒜 = Σ r_i A_i alongside.
pub fn build_problem(
    h: &Hamiltonian,
    model: &QuasiModel,
    state: &NoncontextualState,
    retained: &[usize],
    cfg: &SolveConfig,
) -> Result<CsVqeProblem> {
    state.validate(model)?;
    let mut retained: Vec<usize> = retained.to_vec();
    retained.sort_unstable();
    retained.dedup();
    if retained.iter().any(|&j| j >= model.generators().len()) {
        return Err(Error::Invariant("retained index out of range".into()));
    }

    let generators: Vec<PauliOperator> =
        retained.iter().map(|&j| model.generators()[j]).collect();
    let plan = diagonalize_generators(&generators)?;
    let rotated = apply_plan(h, &plan)?;
    let q_sub: Vec<i8> = retained.iter().map(|&j| state.q[j]).collect();
    let assignments = fix_generator_signs(&plan, &q_sub)?;
    let restricted_h = restrict(&rotated, &assignments)?;
    let free_qubits: Vec<usize> = (0..h.num_qubits())
        .filter(|q| !assignments.contains_key(q))
        .collect();

    // The 𝒜 constraint is dropped only at the full-VQE endpoint (no retained
    // generators) or when the caller disables it.
    let a_restricted = if model.num_cliques() > 0 && cfg.enforce_a && !retained.is_empty() {
        let mut a_full = Hamiltonian::new(h.num_qubits());
        for (i, rep) in model.clique_reps().iter().enumerate() {
            let (op, sign) = plan.conjugate_pauli(rep)?;
            a_full.add_term(&op, sign * state.r[i])?;
        }
        let restricted = restrict(&a_full, &assignments)?;
        let norm_sq: f64 = restricted.terms().map(|(_, c)| c * c).sum();
        if restricted.constant().abs() > 1e-10 || (norm_sq - 1.0).abs() > 1e-10 {
            return Err(Error::Invariant(
                "restricted 𝒜 operator does not square to the identity".into(),
            ));
        }
        Some(restricted)
    } else {
        None
    };

    let nc_energy = crate::quasi_model::evaluate_objective(model, state)?;
    Ok(CsVqeProblem {
        rotated_h: rotated,
        plan,
        generator_assignments: assignments,
        free_qubits,
        restricted_h,
        a_restricted,
        nc_energy,
        retained,
    })
}

fn min_eigenvalue(m: DMatrix<Complex64>) -> f64 {
    let eig = SymmetricEigen::new(m);
    eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min)
}

/// Orthonormal basis of the +1 eigenspace of the restricted 𝒜 operator.
/// Its dimension is exactly half the space (𝒜 has eigenvalues ±1).
pub fn plus_one_eigenbasis(a: &Hamiltonian, dense_limit: usize) -> Result<DMatrix<Complex64>> {
    let m = a.to_dense(dense_limit)?;
    let dim = m.nrows();
    let eig = SymmetricEigen::new(m);
    let cols: Vec<usize> = (0..dim)
        .filter(|&i| (eig.eigenvalues[i] - 1.0).abs() < 0.5)
        .collect();
    if cols.len() != dim / 2 {
        return Err(Error::Invariant(format!(
            "+1 eigenspace of 𝒜 has dimension {} instead of {}",
            cols.len(),
            dim / 2
        )));
    }
    let mut basis = DMatrix::<Complex64>::zeros(dim, cols.len());
    for (k, &i) in cols.iter().enumerate() {
        basis.set_column(k, &eig.eigenvectors.column(i));
    }
    Ok(basis)
}

/// CS-VQE energy estimate: minimum eigenvalue of the restricted Hamiltonian,
/// within the +1 eigenspace of the restricted 𝒜 when the constraint is kept.
pub fn solve(problem: &CsVqeProblem, cfg: &SolveConfig) -> Result<f64> {
    if problem.free_qubits.is_empty() {
        return Ok(problem.restricted_h.constant());
    }
    let m = problem.restricted_h.to_dense(cfg.dense_limit)?;
    match &problem.a_restricted {
        None => Ok(min_eigenvalue(m)),
        Some(a) => {
            let basis = plus_one_eigenbasis(a, cfg.dense_limit)?;
            let projected = basis.adjoint() * m * &basis;
            // Symmetrize away the projection round-off.
            let hermitian = (&projected + projected.adjoint()) * Complex64::new(0.5, 0.0);
            Ok(min_eigenvalue(hermitian))
        }
    }
}

/// Numerically finds a state in the contextual subspace with zero expectation
/// for every (restricted) contextual term: minimizes Σ_P ⟨P⟩² over density
/// matrices ρ = LL†/Tr(LL†) supported in the subspace, by gradient descent
/// with restarts (the first start is the maximally mixed subspace state).
/// Mixed states are required: a pure witness need not exist when the subspace
/// is small. Returns the density matrix on the free qubits.
pub fn zero_expectation_witness(
    problem: &CsVqeProblem,
    contextual_terms: &[PauliOperator],
    cfg: &SolveConfig,
    seed: u64,
) -> Result<DMatrix<Complex64>> {
    if problem.free_qubits.is_empty() {
        return Err(Error::Invariant("no free qubits to search".into()));
    }
    let dim = 1usize << problem.free_qubits.len();
    let basis = match &problem.a_restricted {
        Some(a) => plus_one_eigenbasis(a, cfg.dense_limit)?,
        None => DMatrix::<Complex64>::identity(dim, dim),
    };
    let mut observables: Vec<DMatrix<Complex64>> = Vec::new();
    for p in contextual_terms {
        let (op, sign) = problem.plan.conjugate_pauli(p)?;
        let mut single = Hamiltonian::new(problem.rotated_h.num_qubits());
        single.add_term(&op, sign)?;
        let restricted = restrict(&single, &problem.generator_assignments)?;
        if restricted.is_empty() && restricted.constant().abs() < 1e-15 {
            continue; // dropped term: zero expectation in every subspace state
        }
        let m = restricted.to_dense(cfg.dense_limit)?;
        observables.push(basis.adjoint() * m * &basis);
    }
    let m_cols = basis.ncols();
    let to_full = |rho_sub: &DMatrix<Complex64>| &basis * rho_sub * basis.adjoint();
    if observables.is_empty() {
        let uniform = DMatrix::<Complex64>::identity(m_cols, m_cols)
            / Complex64::new(m_cols as f64, 0.0);
        return Ok(to_full(&uniform));
    }

    let density = |l: &DMatrix<Complex64>| -> DMatrix<Complex64> {
        let rho = l * l.adjoint();
        let trace = rho.trace().re;
        rho / Complex64::new(trace, 0.0)
    };
    let objective = |rho: &DMatrix<Complex64>| -> (f64, Vec<f64>) {
        let expectations: Vec<f64> = observables.iter().map(|m| (rho * m).trace().re).collect();
        (expectations.iter().map(|e| e * e).sum(), expectations)
    };

    let mut rng = StdRng::seed_from_u64(seed);
    for restart in 0..50 {
        let mut l = if restart == 0 {
            DMatrix::<Complex64>::identity(m_cols, m_cols)
        } else {
            DMatrix::<Complex64>::from_fn(m_cols, m_cols, |_, _| {
                Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
            })
        };
        let mut eta = 0.25;
        let (mut f, mut expectations) = objective(&density(&l));
        for _ in 0..5000 {
            if f < 1e-10 {
                return Ok(to_full(&density(&l)));
            }
            let trace = (&l * l.adjoint()).trace().re;
            // d/dL* of Σ (Tr(ρ M_k))² with ρ = LL†/Tr(LL†).
            let mut grad = DMatrix::<Complex64>::zeros(m_cols, m_cols);
            for (m, &e) in observables.iter().zip(&expectations) {
                let shifted = m - DMatrix::<Complex64>::identity(m_cols, m_cols)
                    * Complex64::new(e, 0.0);
                grad += shifted * &l * Complex64::new(2.0 * e / trace, 0.0);
            }
            let candidate = &l - &grad * Complex64::new(eta, 0.0);
            let (f_new, e_new) = objective(&density(&candidate));
            if f_new < f {
                l = candidate;
                f = f_new;
                expectations = e_new;
                eta = (eta * 1.2).min(1.0);
            } else {
                eta *= 0.5;
                if eta < 1e-14 {
                    break;
                }
            }
        }
        if f < 1e-10 {
            return Ok(to_full(&density(&l)));
        }
    }
    Err(Error::Invariant(
        "witness optimizer did not reach the target objective; retry with another seed".into(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contextuality::greedy_noncontextual_subset;
    use crate::oracle;
    use crate::quasi_model::{build_model, find_ground_state, OptimizerConfig};

    fn p(s: &str) -> PauliOperator {
        s.parse().unwrap()
    }

    fn example_hamiltonian(coeffs: &[f64]) -> Hamiltonian {
        let terms = [
            "ZII", "IXI", "IYI", "IZX", "IZY", "IZZ", "ZXI", "ZYI", "ZZX", "ZZY", "ZZZ", "IIX",
            "IIY", "IIZ",
        ];
        let mut h = Hamiltonian::new(3);
        for (t, &c) in terms.iter().zip(coeffs) {
            h.add_term(&p(t), c).unwrap();
        }
        h
    }

    #[test]
    fn restrict_drops_flips_and_folds_signs() {
        let mut assignments = BTreeMap::new();
        assignments.insert(0usize, 1.0);
        let h = Hamiltonian::from_terms(
            3,
            [(p("IIX"), 0.3), (p("IIY"), 0.4), (p("IIZ"), 0.5)],
        )
        .unwrap();
        let r = restrict(&h, &assignments).unwrap();
        assert_eq!(r.num_qubits(), 2);
        assert_eq!(r.coefficient(&p("IX")), 0.3);
        assert_eq!(r.coefficient(&p("IY")), 0.4);
        assert_eq!(r.coefficient(&p("IZ")), 0.5);

        let h = Hamiltonian::from_terms(3, [(p("ZII"), 0.7)]).unwrap();
        let r = restrict(&h, &assignments).unwrap();
        assert!(r.is_empty());
        assert_eq!(r.constant(), 0.7);

        let mut negative = BTreeMap::new();
        negative.insert(0usize, -1.0);
        let r = restrict(&h, &negative).unwrap();
        assert_eq!(r.constant(), -0.7);

        let h = Hamiltonian::from_terms(3, [(p("XII"), 0.7)]).unwrap();
        let r = restrict(&h, &assignments).unwrap();
        assert!(r.is_empty());
        assert_eq!(r.constant(), 0.0);
    }

    fn pipeline(h: &Hamiltonian) -> (QuasiModel, NoncontextualState, f64) {
        let d = greedy_noncontextual_subset(h).unwrap();
        let model = build_model(&d).unwrap();
        let (state, energy) = find_ground_state(&model, &OptimizerConfig::default()).unwrap();
        (model, state, energy)
    }

    #[test]
    fn example_problem_structure() {
        let coeffs = [
            1.0, 0.9, 0.8, 0.7, 0.6, 0.5, 0.9, 0.8, 0.7, 0.6, 0.5, 0.1, 0.1, 0.1,
        ];
        let h = example_hamiltonian(&coeffs);
        let (model, state, nc_energy) = pipeline(&h);
        let all: Vec<usize> = (0..model.generators().len()).collect();
        let problem = build_problem(&h, &model, &state, &all, &SolveConfig::default()).unwrap();
        assert_eq!(problem.quantum_qubits(), 2);
        let a = problem.a_restricted.as_ref().unwrap();
        // 𝒜′|_{ℋ₂} = r₁XI + r₂YI + r₃ZX + r₄ZY + r₅ZZ
        for (op, i) in [("XI", 0), ("YI", 1), ("ZX", 2), ("ZY", 3), ("ZZ", 4)] {
            assert!((a.coefficient(&p(op)) - state.r[i]).abs() < 1e-12, "{op}");
        }
        let energy = solve(&problem, &SolveConfig::default()).unwrap();
        let exact = oracle::exact_ground_energy(&h, 14).unwrap();
        assert!(energy <= nc_energy + 1e-9);
        assert!(energy >= exact - 1e-9);
    }

    #[test]
    fn no_retained_generators_gives_exact_energy() {
        let coeffs = [
            1.0, 0.9, 0.8, 0.7, 0.6, 0.5, 0.9, 0.8, 0.7, 0.6, 0.5, 0.1, 0.1, 0.1,
        ];
        let h = example_hamiltonian(&coeffs);
        let (model, state, _) = pipeline(&h);
        let problem = build_problem(&h, &model, &state, &[], &SolveConfig::default()).unwrap();
        assert!(problem.a_restricted.is_none());
        let energy = solve(&problem, &SolveConfig::default()).unwrap();
        let exact = oracle::exact_ground_energy(&h, 14).unwrap();
        assert!((energy - exact).abs() < 1e-9);
    }

    #[test]
    fn empty_contextual_part_recovers_nc_energy() {
        let h = Hamiltonian::from_terms(
            2,
            [(p("ZI"), 1.0), (p("IZ"), 0.5), (p("ZZ"), 0.25)],
        )
        .unwrap();
        let (model, state, nc_energy) = pipeline(&h);
        let all: Vec<usize> = (0..model.generators().len()).collect();
        let problem = build_problem(&h, &model, &state, &all, &SolveConfig::default()).unwrap();
        let energy = solve(&problem, &SolveConfig::default()).unwrap();
        assert!((energy - nc_energy).abs() < 1e-9);
    }

    #[test]
    fn witness_zeroes_contextual_expectations() {
        let coeffs = [
            1.0, 0.9, 0.8, 0.7, 0.6, 0.5, 0.9, 0.8, 0.7, 0.6, 0.5, 0.1, 0.1, 0.1,
        ];
        let h = example_hamiltonian(&coeffs);
        let (model, state, _) = pipeline(&h);
        let all: Vec<usize> = (0..model.generators().len()).collect();
        let cfg = SolveConfig::default();
        let problem = build_problem(&h, &model, &state, &all, &cfg).unwrap();
        let contextual = [p("IIX"), p("IIY"), p("IIZ")];
        let witness = zero_expectation_witness(&problem, &contextual, &cfg, 1).unwrap();
        // Valid density matrix: unit trace, Hermitian, supported in the
        // +1 eigenspace of restricted 𝒜.
        assert!((witness.trace().re - 1.0).abs() < 1e-9);
        assert!((&witness - witness.adjoint()).norm() < 1e-9);
        let a = problem.a_restricted.as_ref().unwrap().to_dense(14).unwrap();
        assert!(((&a * &witness).trace().re - 1.0).abs() < 1e-9);
        for t in &contextual {
            let (op, sign) = problem.plan.conjugate_pauli(t).unwrap();
            let mut single = Hamiltonian::new(3);
            single.add_term(&op, sign).unwrap();
            let restricted = restrict(&single, &problem.generator_assignments).unwrap();
            let m = restricted.to_dense(14).unwrap();
            let e = (&witness * m).trace().re;
            assert!(e.abs() < 1e-5, "⟨{t}⟩ = {e}");
        }
    }
}
