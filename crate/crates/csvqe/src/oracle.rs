//! Independent brute-force oracles used by tests and acceptance: dense exact
//! diagonalization, exhaustive value-assignment contextuality checking, and
//! exhaustive noncontextual ground-state search.

use std::collections::BTreeSet;

use nalgebra::SymmetricEigen;
use serde::{Deserialize, Serialize};

use crate::contextuality::closure_under_inference;
use crate::error::{Error, Result};
use crate::hamiltonian::Hamiltonian;
use crate::pauli::PauliOperator;
use crate::quasi_model::{self, NoncontextualState, QuasiModel};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OracleConfig {
    /// Max qubits for dense matrices.
    pub dense_limit: usize,
    /// Max closure size for the exhaustive contextuality search.
    pub assignment_limit: usize,
    /// Max |G| for the exhaustive cube search.
    pub q_limit: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            dense_limit: 14,
            assignment_limit: 24,
            q_limit: 18,
        }
    }
}

/// Minimum eigenvalue of the dense matrix of `h`.
pub fn exact_ground_energy(h: &Hamiltonian, dense_limit: usize) -> Result<f64> {
    let m = h.to_dense(dense_limit)?;
    let eig = SymmetricEigen::new(m);
    Ok(eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min))
}

/// True iff some ±1 assignment to the inference closure of `s` respects every
/// commuting-pair product constraint `v(AB) = σ·v(A)·v(B)` (σ the ±1 phase of
/// the Pauli product). Exhaustive backtracking; independent of the transitivity
/// criterion in `contextuality`.
pub fn brute_force_noncontextual(s: &BTreeSet<PauliOperator>, cfg: &OracleConfig) -> Result<bool> {
    let closure: Vec<PauliOperator> = closure_under_inference(s)?.into_iter().collect();
    if closure.len() > cfg.assignment_limit {
        return Err(Error::Resource(format!(
            "inference closure has {} elements, above the assignment limit {}",
            closure.len(),
            cfg.assignment_limit
        )));
    }
    let index_of = |op: &PauliOperator| closure.iter().position(|c| c == op);
    // Constraint (i, j, k, sigma): v[k] = sigma * v[i] * v[j]. Bucketed by the
    // highest participating index, so assigning values in closure order only
    // needs to check the newly completed constraints at each level.
    let mut buckets: Vec<Vec<(usize, usize, usize, i8)>> = vec![Vec::new(); closure.len()];
    for i in 0..closure.len() {
        for j in i + 1..closure.len() {
            if !closure[i].commutes(&closure[j])? {
                continue;
            }
            let (prod, sign) = closure[i].multiply(&closure[j])?.sign_split()?;
            if prod.is_identity() {
                // A·B = ±I means B = ±A; closure members are distinct
                // phase-free Paulis, so this cannot occur.
                continue;
            }
            let k = index_of(&prod).ok_or_else(|| {
                Error::Invariant("closure is not closed under inference".into())
            })?;
            let constraint = (i, j, k, if sign > 0.0 { 1i8 } else { -1 });
            buckets[i.max(j).max(k)].push(constraint);
        }
    }

    fn search(values: &mut Vec<i8>, next: usize, buckets: &[Vec<(usize, usize, usize, i8)>]) -> bool {
        if next == values.len() {
            return true;
        }
        for v in [1i8, -1] {
            values[next] = v;
            let ok = buckets[next]
                .iter()
                .all(|&(i, j, k, sigma)| values[k] == sigma * values[i] * values[j]);
            if ok && search(values, next + 1, buckets) {
                return true;
            }
        }
        values[next] = 0;
        false
    }

    let mut values = vec![0i8; closure.len()];
    Ok(search(&mut values, 0, &buckets))
}

/// Global minimum of the quasi-model objective: exhaustive over q⃗ ∈ {±1}^|G|
/// with the closed-form inner r⃗ optimum.
pub fn brute_force_nc_ground(
    model: &QuasiModel,
    cfg: &OracleConfig,
) -> Result<(NoncontextualState, f64)> {
    let num_gens = model.generators().len();
    if num_gens > cfg.q_limit {
        return Err(Error::Resource(format!(
            "|G| = {num_gens} exceeds the exhaustive search limit {}",
            cfg.q_limit
        )));
    }
    let mut best: Option<(NoncontextualState, f64)> = None;
    for mask in 0u64..1u64 << num_gens {
        let q: Vec<i8> = (0..num_gens)
            .map(|j| if mask >> j & 1 == 1 { -1 } else { 1 })
            .collect();
        let (value, r) = quasi_model::best_for_q(model, &q);
        if best.as_ref().is_none_or(|(_, b)| value < *b) {
            best = Some((NoncontextualState { q, r }, value));
        }
    }
    let (state, value) = best.ok_or_else(|| Error::Invariant("empty search cube".into()))?;
    Ok((state, value))
}
