//! Generator-removal sweeps: greedy-pair, backward-greedy ("optimal"), and
//! weight-ordered heuristics producing energy-vs-qubits curves.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::contextual_subspace::{build_problem, solve, CsVqeProblem, SolveConfig};
use crate::error::{Error, Result};
use crate::hamiltonian::Hamiltonian;
use crate::oracle;
use crate::quasi_model::{NoncontextualState, QuasiModel};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightKind {
    /// Σ |coefficient| over rotated terms acting nontrivially on the qubit.
    CoefficientSum,
    /// Number of rotated terms acting nontrivially on the qubit.
    TermCount,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepConfig {
    pub solve: SolveConfig,
    pub weight_kind: WeightKind,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            solve: SolveConfig::default(),
            weight_kind: WeightKind::CoefficientSum,
        }
    }
}

/// One point on an energy-vs-qubits curve. The row with `quantum_qubits = 0`
/// is the classical-only point: the noncontextual optimum with no quantum
/// correction and nothing to simulate. Every other row satisfies
/// `quantum_qubits = n − |retained_generators|`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepRecord {
    pub quantum_qubits: usize,
    pub retained_generators: Vec<usize>,
    pub energy: f64,
    /// energy − exact ground energy; absent when the full problem is beyond
    /// the dense limit.
    pub error_vs_exact: Option<f64>,
    pub restricted_term_count: usize,
}

/// Shrinks the retained set of an existing problem, migrating all terms on the
/// freed qubits to the quantum correction.
pub fn remove_generators(
    h: &Hamiltonian,
    model: &QuasiModel,
    state: &NoncontextualState,
    problem: &CsVqeProblem,
    drop: &[usize],
    cfg: &SolveConfig,
) -> Result<CsVqeProblem> {
    for &j in drop {
        if !problem.retained.contains(&j) {
            return Err(Error::Invariant(format!(
                "generator {j} is not currently retained"
            )));
        }
    }
    let retained: Vec<usize> = problem
        .retained
        .iter()
        .copied()
        .filter(|j| !drop.contains(j))
        .collect();
    build_problem(h, model, state, &retained, cfg)
}

fn record_for(
    h: &Hamiltonian,
    model: &QuasiModel,
    state: &NoncontextualState,
    retained: &[usize],
    cfg: &SolveConfig,
    exact: Option<f64>,
) -> Result<(SweepRecord, f64)> {
    let problem = build_problem(h, model, state, retained, cfg)?;
    let energy = solve(&problem, cfg)?;
    let record = SweepRecord {
        quantum_qubits: problem.quantum_qubits(),
        retained_generators: problem.retained.clone(),
        energy,
        error_vs_exact: exact.map(|e| energy - e),
        restricted_term_count: problem.restricted_term_count(),
    };
    Ok((record, energy))
}

fn exact_if_tractable(h: &Hamiltonian, cfg: &SolveConfig) -> Option<f64> {
    oracle::exact_ground_energy(h, cfg.dense_limit).ok()
}

/// The classical-only starting row, present whenever full retention still
/// leaves quantum qubits (it would duplicate the first corrected row
/// otherwise).
fn nc_only_record(
    h: &Hamiltonian,
    model: &QuasiModel,
    state: &NoncontextualState,
    exact: Option<f64>,
) -> Result<Option<SweepRecord>> {
    let num_gens = model.generators().len();
    if h.num_qubits() == num_gens {
        return Ok(None);
    }
    let nc_energy = crate::quasi_model::evaluate_objective(model, state)?;
    Ok(Some(SweepRecord {
        quantum_qubits: 0,
        retained_generators: (0..num_gens).collect(),
        energy: nc_energy,
        error_vs_exact: exact.map(|e| nc_energy - e),
        restricted_term_count: 0,
    }))
}

/// Starts with all generators retained and repeatedly drops the pair of
/// retained generators that minimizes the resulting energy (a single generator
/// for the final odd step). Records every visited size; truncates when a size
/// exceeds the dense limit.
pub fn greedy_pair_sweep(
    h: &Hamiltonian,
    model: &QuasiModel,
    state: &NoncontextualState,
    cfg: &SweepConfig,
) -> Result<Vec<SweepRecord>> {
    let exact = exact_if_tractable(h, &cfg.solve);
    let mut retained: Vec<usize> = (0..model.generators().len()).collect();
    let mut records = Vec::new();
    records.extend(nc_only_record(h, model, state, exact)?);
    match record_for(h, model, state, &retained, &cfg.solve, exact) {
        Ok((record, _)) => records.push(record),
        Err(Error::Resource(_)) => return Ok(records),
        Err(e) => return Err(e),
    }
    while !retained.is_empty() {
        let candidates: Vec<Vec<usize>> = if retained.len() >= 2 {
            let mut pairs = Vec::new();
            for a in 0..retained.len() {
                for b in a + 1..retained.len() {
                    pairs.push(vec![retained[a], retained[b]]);
                }
            }
            pairs
        } else {
            vec![vec![retained[0]]]
        };
        let evaluated: Vec<Result<(Vec<usize>, f64)>> = candidates
            .into_par_iter()
            .map(|drop| {
                let next: Vec<usize> = retained
                    .iter()
                    .copied()
                    .filter(|j| !drop.contains(j))
                    .collect();
                let (_, energy) = record_for(h, model, state, &next, &cfg.solve, None)?;
                Ok((drop, energy))
            })
            .collect();
        let mut best: Option<(Vec<usize>, f64)> = None;
        let mut resource_hit = false;
        for item in evaluated {
            match item {
                Ok((drop, energy)) => {
                    let better = match &best {
                        None => true,
                        Some((b_drop, b_energy)) => {
                            energy < *b_energy || (energy == *b_energy && drop < *b_drop)
                        }
                    };
                    if better {
                        best = Some((drop, energy));
                    }
                }
                Err(Error::Resource(_)) => resource_hit = true,
                Err(e) => return Err(e),
            }
        }
        let Some((drop, _)) = best else {
            if resource_hit {
                return Ok(records);
            }
            return Err(Error::Invariant("no removal candidate evaluated".into()));
        };
        retained.retain(|j| !drop.contains(j));
        match record_for(h, model, state, &retained, &cfg.solve, exact) {
            Ok((record, _)) => records.push(record),
            Err(Error::Resource(_)) => return Ok(records),
            Err(e) => return Err(e),
        }
    }
    Ok(records)
}

/// Backward greedy: grows the retained set from empty by the single generator
/// whose addition minimizes the energy increase. Records are emitted in
/// increasing quantum-qubit order for comparability with the other sweeps.
pub fn optimal_sweep(
    h: &Hamiltonian,
    model: &QuasiModel,
    state: &NoncontextualState,
    cfg: &SweepConfig,
) -> Result<Vec<SweepRecord>> {
    let exact = exact_if_tractable(h, &cfg.solve);
    let num_gens = model.generators().len();
    let mut retained: Vec<usize> = Vec::new();
    let mut records = Vec::new();
    let (record, _) = record_for(h, model, state, &retained, &cfg.solve, exact)?;
    records.push(record);
    while retained.len() < num_gens {
        let candidates: Vec<usize> = (0..num_gens).filter(|j| !retained.contains(j)).collect();
        let evaluated: Vec<Result<(usize, f64)>> = candidates
            .into_par_iter()
            .map(|j| {
                let mut next = retained.clone();
                next.push(j);
                let (_, energy) = record_for(h, model, state, &next, &cfg.solve, None)?;
                Ok((j, energy))
            })
            .collect();
        let mut best: Option<(usize, f64)> = None;
        for item in evaluated {
            let (j, energy) = item?;
            let better = match best {
                None => true,
                Some((b_j, b_energy)) => energy < b_energy || (energy == b_energy && j < b_j),
            };
            if better {
                best = Some((j, energy));
            }
        }
        let (j, _) = best.ok_or_else(|| Error::Invariant("no retention candidate".into()))?;
        retained.push(j);
        let (record, _) = record_for(h, model, state, &retained, &cfg.solve, exact)?;
        records.push(record);
    }
    records.reverse();
    if let Some(first) = nc_only_record(h, model, state, exact)? {
        records.insert(0, first);
    }
    Ok(records)
}

fn qubit_weights(rotated: &Hamiltonian, kind: WeightKind) -> Vec<f64> {
    let n = rotated.num_qubits();
    let mut weights = vec![0.0; n];
    for (p, coeff) in rotated.terms() {
        for (q, w) in weights.iter_mut().enumerate() {
            if p.acts_on(q) {
                *w += match kind {
                    WeightKind::CoefficientSum => coeff.abs(),
                    WeightKind::TermCount => 1.0,
                };
            }
        }
    }
    weights
}

/// Orders the stabilized qubits by descending weight in the fully rotated
/// Hamiltonian and moves them to the quantum side in that order, without
/// evaluating energies during ordering.
pub fn weight_sweep(
    h: &Hamiltonian,
    model: &QuasiModel,
    state: &NoncontextualState,
    cfg: &SweepConfig,
) -> Result<Vec<SweepRecord>> {
    let exact = exact_if_tractable(h, &cfg.solve);
    let num_gens = model.generators().len();
    let all: Vec<usize> = (0..num_gens).collect();
    let full = build_problem(h, model, state, &all, &cfg.solve)?;
    let weights = qubit_weights(&full.rotated_h, cfg.weight_kind);
    // Generator j stabilizes the target qubit of its diagonalization.
    let mut order: Vec<usize> = all.clone();
    order.sort_by(|&a, &b| {
        let wa = weights[full.plan.target_map[a].qubit];
        let wb = weights[full.plan.target_map[b].qubit];
        wb.partial_cmp(&wa).unwrap().then(a.cmp(&b))
    });
    let mut retained = all;
    let mut records = Vec::new();
    records.extend(nc_only_record(h, model, state, exact)?);
    match record_for(h, model, state, &retained, &cfg.solve, exact) {
        Ok((record, _)) => records.push(record),
        Err(Error::Resource(_)) => return Ok(records),
        Err(e) => return Err(e),
    }
    for &j in &order {
        retained.retain(|&k| k != j);
        match record_for(h, model, state, &retained, &cfg.solve, exact) {
            Ok((record, _)) => records.push(record),
            Err(Error::Resource(_)) => return Ok(records),
            Err(e) => return Err(e),
        }
    }
    Ok(records)
}
