//! Acceptance gate: one test per criterion, each printing a pass/fail line.

use std::collections::BTreeSet;
use std::sync::OnceLock;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;

use csvqe::contextual_subspace::{build_problem, restrict, zero_expectation_witness, SolveConfig};
use csvqe::contextuality::{decompose, greedy_noncontextual_subset, is_noncontextual};
use csvqe::hamiltonian::Hamiltonian;
use csvqe::harness::{self, BenchOpts, BENCH_C_TERMS, BENCH_NC_TERMS};
use csvqe::heuristics::{greedy_pair_sweep, optimal_sweep, SweepConfig, SweepRecord};
use csvqe::oracle::{self, OracleConfig};
use csvqe::pauli::PauliOperator;
use csvqe::quasi_model::{build_model, find_ground_state, NoncontextualState, OptimizerConfig, QuasiModel};
use csvqe::rotations::{apply_plan, diagonalize_generators, unitary_partitioning, RotationPlan};

const TOL: f64 = 1e-9;

fn pass(criterion: usize, detail: &str) {
    println!("criterion {criterion}: PASS - {detail}");
}

fn random_pauli(rng: &mut StdRng, n: usize) -> PauliOperator {
    loop {
        let x = rng.random_range(0..1u64 << n);
        let z = rng.random_range(0..1u64 << n);
        if x | z != 0 {
            return PauliOperator::new(n, x, z, 0).unwrap();
        }
    }
}

fn random_hamiltonian(rng: &mut StdRng, n: usize, max_terms: usize) -> Hamiltonian {
    let count = rng.random_range(2..=max_terms);
    let mut ops = BTreeSet::new();
    while ops.len() < count {
        ops.insert(random_pauli(rng, n));
    }
    let mut h = Hamiltonian::new(n);
    for op in ops {
        h.add_term(&op, rng.random_range(-1.0..1.0)).unwrap();
    }
    h
}

struct Instance {
    h: Hamiltonian,
    model: QuasiModel,
    state: NoncontextualState,
    nc_energy: f64,
    exact: f64,
    optimal: Vec<SweepRecord>,
    greedy: Vec<SweepRecord>,
}

fn build_instance(seed: u64) -> Instance {
    let mut rng = StdRng::seed_from_u64(seed);
    let n = rng.random_range(3..=6usize);
    let h = random_hamiltonian(&mut rng, n, 20);
    let d = greedy_noncontextual_subset(&h).unwrap();
    let model = build_model(&d).unwrap();
    let opt = OptimizerConfig {
        seed,
        ..OptimizerConfig::default()
    };
    let (state, nc_energy) = find_ground_state(&model, &opt).unwrap();
    let exact = oracle::exact_ground_energy(&h, 14).unwrap();
    let cfg = SweepConfig::default();
    let optimal = optimal_sweep(&h, &model, &state, &cfg).unwrap();
    let greedy = greedy_pair_sweep(&h, &model, &state, &cfg).unwrap();
    Instance {
        h,
        model,
        state,
        nc_energy,
        exact,
        optimal,
        greedy,
    }
}

static ENSEMBLE: OnceLock<Vec<Instance>> = OnceLock::new();

fn ensemble() -> &'static [Instance] {
    ENSEMBLE.get_or_init(|| (0..1000u64).into_par_iter().map(build_instance).collect())
}

#[test]
fn criterion_1_fig1_reproduction() {
    let opts = BenchOpts {
        count: 10_000,
        seed: 1,
        bins: 50,
    };
    let (report, _) = harness::run_random_bench(&opts).unwrap();
    let results = report.results.as_object().unwrap();
    let mean_nc = results["mean_nc_fractional_error"].as_f64().unwrap();
    let mean_corr = results["mean_corrected_fractional_error"].as_f64().unwrap();
    assert!(
        (mean_nc - 0.257).abs() <= 0.010,
        "criterion 1: FAIL - mean nc fractional error {mean_nc} outside 0.257 +/- 0.010"
    );
    assert!(
        (mean_corr - 0.0268).abs() <= 0.0030,
        "criterion 1: FAIL - mean corrected fractional error {mean_corr} outside 0.0268 +/- 0.0030"
    );
    pass(
        1,
        &format!("10000 instances, mean nc error {mean_nc:.4} (target 0.257 +/- 0.010), corrected {mean_corr:.4} (target 0.0268 +/- 0.0030)"),
    );
}

#[test]
fn criterion_2_variational_bound() {
    let mut min_margin = f64::INFINITY;
    let mut records = 0usize;
    for inst in ensemble() {
        for r in inst.optimal.iter().chain(inst.greedy.iter()) {
            let margin = r.energy - inst.exact;
            assert!(
                margin >= -TOL,
                "criterion 2: FAIL - energy {} below exact {} at {} qubits",
                r.energy,
                inst.exact,
                r.quantum_qubits
            );
            min_margin = min_margin.min(margin);
            records += 1;
        }
    }
    pass(
        2,
        &format!("1000 instances, {records} sweep records all >= exact - 1e-9 (worst margin {min_margin:.2e})"),
    );
}

#[test]
fn criterion_3_monotonicity() {
    let mut chains = 0usize;
    for inst in ensemble() {
        for chain in [&inst.optimal, &inst.greedy] {
            for w in chain.windows(2) {
                assert!(
                    w[1].energy <= w[0].energy + TOL,
                    "criterion 3: FAIL - energy rose from {} to {} between {} and {} qubits",
                    w[0].energy,
                    w[1].energy,
                    w[0].quantum_qubits,
                    w[1].quantum_qubits
                );
            }
            chains += 1;
        }
    }
    pass(
        3,
        &format!("{chains} sweep chains non-increasing within 1e-9 as quantum qubits grow"),
    );
}

#[test]
fn criterion_4_endpoint_exactness() {
    for inst in ensemble() {
        for chain in [&inst.optimal, &inst.greedy] {
            let first = chain.first().unwrap();
            let last = chain.last().unwrap();
            assert!(
                (first.energy - inst.nc_energy).abs() <= TOL,
                "criterion 4: FAIL - first endpoint {} != noncontextual optimum {}",
                first.energy,
                inst.nc_energy
            );
            assert!(
                (last.energy - inst.exact).abs() <= TOL,
                "criterion 4: FAIL - last endpoint {} != exact ground energy {}",
                last.energy,
                inst.exact
            );
        }
    }
    pass(
        4,
        "all sweep endpoints equal (noncontextual optimum, exact ground energy) within 1e-9",
    );
}

#[test]
fn criterion_5_contextuality_oracle_equivalence() {
    let cfg = OracleConfig {
        assignment_limit: 1 << 16,
        ..OracleConfig::default()
    };
    let mut rng = StdRng::seed_from_u64(55);
    let mut contextual = 0usize;
    for case in 0..500 {
        let n = rng.random_range(2..=4usize);
        let count = rng.random_range(2..=8usize);
        let mut s = BTreeSet::new();
        while s.len() < count {
            s.insert(random_pauli(&mut rng, n));
        }
        let fast = is_noncontextual(&s).unwrap();
        let slow = oracle::brute_force_noncontextual(&s, &cfg).unwrap();
        assert_eq!(
            fast, slow,
            "criterion 5: FAIL - disagreement on case {case}: {s:?}"
        );
        if !fast {
            contextual += 1;
        }
    }
    pass(
        5,
        &format!("500 random sets, zero disagreements between transitivity test and assignment search ({contextual} contextual)"),
    );
}

#[test]
fn criterion_6_nc_ground_oracle_equivalence() {
    let cfg = OracleConfig::default();
    let mut checked = 0usize;
    for inst in ensemble() {
        if inst.model.generators().len() > 16 {
            continue;
        }
        let (state, brute) = oracle::brute_force_nc_ground(&inst.model, &cfg).unwrap();
        state.validate(&inst.model).unwrap();
        assert!(
            (brute - inst.nc_energy).abs() <= TOL,
            "criterion 6: FAIL - optimizer {} vs exhaustive {}",
            inst.nc_energy,
            brute
        );
        checked += 1;
    }
    pass(
        6,
        &format!("{checked} instances with |G| <= 16 match the exhaustive-q/closed-form-r search within 1e-9"),
    );
}

fn plan_unitary(plan: &RotationPlan, n: usize) -> DMatrix<Complex64> {
    let dim = 1usize << n;
    let mut u = DMatrix::<Complex64>::identity(dim, dim);
    for step in &plan.steps {
        u = step.to_dense_unitary() * u;
    }
    u
}

fn assert_plan_matches_dense(h: &Hamiltonian, plan: &RotationPlan, label: &str) {
    let rotated = apply_plan(h, plan).unwrap();
    let u = plan_unitary(plan, h.num_qubits());
    let dense = &u * h.to_dense(14).unwrap() * u.adjoint();
    let diff = (dense - rotated.to_dense(14).unwrap()).norm();
    assert!(
        diff < 1e-10,
        "criterion 7: FAIL - {label} plan differs from dense conjugation by {diff}"
    );
}

/// Random commuting, independent set: distinct single-qubit Zs scrambled by
/// random Clifford quarter turns.
fn random_commuting_set(rng: &mut StdRng, n: usize) -> Vec<PauliOperator> {
    let m = rng.random_range(1..=n);
    let mut qubits: Vec<usize> = (0..n).collect();
    for i in (1..qubits.len()).rev() {
        qubits.swap(i, rng.random_range(0..=i));
    }
    let mut ops: Vec<PauliOperator> = qubits[..m]
        .iter()
        .map(|&q| PauliOperator::single(n, q, 'Z').unwrap())
        .collect();
    for _ in 0..rng.random_range(0..8) {
        let g = random_pauli(rng, n);
        let step = csvqe::RotationStep::clifford(g).unwrap();
        let plan = RotationPlan {
            steps: vec![step],
            target_map: Vec::new(),
        };
        ops = ops
            .iter()
            .map(|op| plan.conjugate_pauli(op).unwrap().0)
            .collect();
    }
    ops
}

/// Random pairwise-anticommuting family: a subset of the Jordan-Wigner ladder
/// scrambled by random Clifford quarter turns.
fn random_anticommuting_set(rng: &mut StdRng, n: usize, count: usize) -> Vec<PauliOperator> {
    let mut ladder = Vec::new();
    for q in 0..n {
        let zs = (1u64 << q) - 1;
        ladder.push(PauliOperator::new(n, 1 << q, zs, 0).unwrap());
        ladder.push(PauliOperator::new(n, 1 << q, zs | 1 << q, 0).unwrap());
    }
    for i in (1..ladder.len()).rev() {
        ladder.swap(i, rng.random_range(0..=i));
    }
    let mut ops: Vec<PauliOperator> = ladder.into_iter().take(count).collect();
    for _ in 0..rng.random_range(0..8) {
        let g = random_pauli(rng, n);
        let step = csvqe::RotationStep::clifford(g).unwrap();
        let plan = RotationPlan {
            steps: vec![step],
            target_map: Vec::new(),
        };
        ops = ops
            .iter()
            .map(|op| plan.conjugate_pauli(op).unwrap().0)
            .collect();
    }
    ops
}

#[test]
fn criterion_7_rotation_correctness() {
    let mut rng = StdRng::seed_from_u64(77);
    for case in 0..200 {
        let n = rng.random_range(2..=5usize);

        let gens = random_commuting_set(&mut rng, n);
        let plan = diagonalize_generators(&gens).unwrap();
        assert!(
            plan.steps.len() <= 2 * gens.len(),
            "criterion 7: FAIL - case {case} used {} steps for {} generators",
            plan.steps.len(),
            gens.len()
        );
        let targets: BTreeSet<usize> = plan.target_map.iter().map(|t| t.qubit).collect();
        assert_eq!(
            targets.len(),
            gens.len(),
            "criterion 7: FAIL - case {case} targets not distinct"
        );
        for (g, t) in gens.iter().zip(plan.target_map.iter()) {
            let (z, sign) = plan.conjugate_pauli(g).unwrap();
            assert_eq!(z, PauliOperator::single(n, t.qubit, 'Z').unwrap());
            assert_eq!(sign, t.sign);
        }
        let h = random_hamiltonian(&mut rng, n, 12);
        assert_plan_matches_dense(&h, &plan, "diagonalization");

        let count = rng.random_range(1..=(2 * n).min(7));
        let reps = random_anticommuting_set(&mut rng, n, count);
        let mut r: Vec<f64> = (0..reps.len())
            .map(|_| rng.random_range(-1.0..1.0))
            .collect();
        let norm = r.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm < 1e-6 {
            r[0] = 1.0;
        } else {
            for v in &mut r {
                *v /= norm;
            }
        }
        let plan = unitary_partitioning(&reps, &r).unwrap();
        let mut a = Hamiltonian::new(n);
        for (op, &ri) in reps.iter().zip(&r) {
            a.add_term(op, ri).unwrap();
        }
        let rotated = apply_plan(&a, &plan).unwrap();
        assert_eq!(
            rotated.num_terms(),
            1,
            "criterion 7: FAIL - case {case} partitioning left {} terms",
            rotated.num_terms()
        );
        let coeff = rotated.coefficient(&reps[0]);
        // N = 1 needs no rotation; 𝒜 = r₁A₁ is already a single Pauli with
        // r₁ = ±1. Every multi-rep case collapses with coefficient +1.
        let expected = if reps.len() == 1 { r[0] } else { 1.0 };
        assert!(
            (coeff - expected).abs() < 1e-10,
            "criterion 7: FAIL - case {case} collapsed coefficient {coeff}, expected {expected}"
        );
        assert_plan_matches_dense(&a, &plan, "partitioning");
    }
    pass(
        7,
        "200 random instances: plans match dense conjugation within 1e-10, step bounds and collapse hold",
    );
}

#[test]
fn criterion_8_theorem1_witness() {
    let cfg = SolveConfig::default();
    let mut rng = StdRng::seed_from_u64(88);
    let mut done = 0usize;
    let mut seed = 0u64;
    while done < 100 {
        seed += 1;
        let n = rng.random_range(3..=4usize);
        let h = random_hamiltonian(&mut rng, n, 14);
        let d = greedy_noncontextual_subset(&h).unwrap();
        if d.contextual_terms.is_empty() {
            continue;
        }
        let model = build_model(&d).unwrap();
        let opt = OptimizerConfig {
            seed,
            ..OptimizerConfig::default()
        };
        let (state, _) = find_ground_state(&model, &opt).unwrap();
        let all: Vec<usize> = (0..model.generators().len()).collect();
        let problem = build_problem(&h, &model, &state, &all, &cfg).unwrap();
        let witness =
            zero_expectation_witness(&problem, &d.contextual_terms, &cfg, seed).unwrap();
        // Independent verification against dense restricted observables.
        let mut objective = 0.0;
        for t in &d.contextual_terms {
            let (op, sign) = problem.plan.conjugate_pauli(t).unwrap();
            let mut single = Hamiltonian::new(n);
            single.add_term(&op, sign).unwrap();
            let restricted = restrict(&single, &problem.generator_assignments).unwrap();
            let m = restricted.to_dense(14).unwrap();
            let e = (&witness * m).trace().re;
            objective += e * e;
        }
        assert!(
            objective < 1e-8,
            "criterion 8: FAIL - witness objective {objective} on instance {seed}"
        );
        done += 1;
    }
    pass(
        8,
        "100 contextual 3-4 qubit instances: witness reaches sum of squared expectations < 1e-8",
    );
}

#[test]
fn criterion_9_term_count_reduction() {
    // Part 1: the 3-qubit skeleton ensemble. No contextual term anticommutes
    // with the single generator ZII, so the restriction keeps all of S_c.
    let cfg = SolveConfig::default();
    let nc_set: BTreeSet<PauliOperator> =
        BENCH_NC_TERMS.iter().map(|s| s.parse().unwrap()).collect();
    let mut rng = StdRng::seed_from_u64(99);
    for _ in 0..200 {
        let mut coeffs = [0.0f64; 14];
        for c in &mut coeffs {
            *c = rng.random_range(-1.0..1.0);
        }
        let h = harness::bench_hamiltonian(&coeffs);
        let d = decompose(&h, &nc_set).unwrap();
        let model = build_model(&d).unwrap();
        let opt = OptimizerConfig::default();
        let (state, _) = find_ground_state(&model, &opt).unwrap();
        let all: Vec<usize> = (0..model.generators().len()).collect();
        let problem = build_problem(&h, &model, &state, &all, &cfg).unwrap();
        let (count, full, any_anti) = restricted_contextual_count(&h, &d.contextual_terms, &model, &problem);
        assert_eq!(full, BENCH_C_TERMS.len());
        if any_anti {
            assert!(count < full, "criterion 9: FAIL - no strict reduction");
        } else {
            assert_eq!(count, full, "criterion 9: FAIL - unexpected drop");
        }
    }

    // Part 2: generic random instances, where anticommuting contextual terms
    // occur and force a strict reduction.
    let mut strict = 0usize;
    for inst in ensemble().iter().take(300) {
        let d = greedy_noncontextual_subset(&inst.h).unwrap();
        if d.contextual_terms.is_empty() {
            continue;
        }
        let all: Vec<usize> = (0..inst.model.generators().len()).collect();
        let problem = build_problem(&inst.h, &inst.model, &inst.state, &all, &cfg).unwrap();
        let (count, full, any_anti) =
            restricted_contextual_count(&inst.h, &d.contextual_terms, &inst.model, &problem);
        if any_anti {
            assert!(
                count < full,
                "criterion 9: FAIL - anticommuting term without strict reduction ({count} vs {full})"
            );
            strict += 1;
        } else {
            assert!(count <= full);
        }
    }
    assert!(strict > 0, "criterion 9: FAIL - reduction never exercised");
    pass(
        9,
        &format!("skeleton ensemble keeps all of S_c (nothing anticommutes); {strict} generic instances show strict reduction"),
    );
}

fn restricted_contextual_count(
    h: &Hamiltonian,
    contextual: &[PauliOperator],
    model: &QuasiModel,
    problem: &csvqe::CsVqeProblem,
) -> (usize, usize, bool) {
    let mut h_c = Hamiltonian::new(h.num_qubits());
    for t in contextual {
        h_c.add_term(t, h.coefficient(t)).unwrap();
    }
    let rotated = apply_plan(&h_c, &problem.plan).unwrap();
    let restricted = restrict(&rotated, &problem.generator_assignments).unwrap();
    let any_anti = contextual.iter().any(|t| {
        model
            .generators()
            .iter()
            .any(|g| !t.commutes(g).unwrap())
    });
    (restricted.num_terms(), contextual.len(), any_anti)
}
