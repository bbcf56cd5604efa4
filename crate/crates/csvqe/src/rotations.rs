//! Clifford sequences mapping commuting independent generators to distinct
//! single-qubit Z operators, and the unitary-partitioning sequence collapsing
//! a unit combination of anticommuting Paulis onto a single Pauli.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::{Hamiltonian, RotationStep};
use crate::pauli::PauliOperator;
use crate::quasi_model::GeneratorBasis;

/// A generator mapped by a plan to a signed single-qubit Z.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TargetZ {
    pub source: PauliOperator,
    pub qubit: usize,
    pub sign: f64,
}

/// Ordered rotation sequence with a record of where each source generator
/// landed. Serializable for audit.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RotationPlan {
    pub steps: Vec<RotationStep>,
    pub target_map: Vec<TargetZ>,
}

impl RotationPlan {
    pub fn empty() -> Self {
        RotationPlan {
            steps: Vec::new(),
            target_map: Vec::new(),
        }
    }

    /// Reversed steps with negated angles.
    pub fn inverse(&self) -> RotationPlan {
        RotationPlan {
            steps: self.steps.iter().rev().map(|s| s.inverse()).collect(),
            target_map: Vec::new(),
        }
    }

    /// Conjugates a Hermitian Pauli through every step. Only valid for
    /// all-Clifford plans, where each Pauli maps to a single signed Pauli.
    pub fn conjugate_pauli(&self, p: &PauliOperator) -> Result<(PauliOperator, f64)> {
        let mut op = *p;
        let mut sign = 1.0;
        for step in &self.steps {
            let terms = step.conjugate(&op)?;
            if terms.len() != 1 {
                return Err(Error::Invariant(
                    "plan contains a continuous step; Pauli image is not a single Pauli".into(),
                ));
            }
            op = terms[0].0;
            sign *= terms[0].1;
        }
        Ok((op, sign))
    }
}

/// Sequential conjugation of a Hamiltonian by every step of a plan.
pub fn apply_plan(h: &Hamiltonian, plan: &RotationPlan) -> Result<Hamiltonian> {
    let mut out = h.clone();
    for step in &plan.steps {
        out = out.conjugate_by_rotation(step)?;
    }
    Ok(out)
}

fn signed_conjugate(
    step: &RotationStep,
    op: &PauliOperator,
    sign: f64,
) -> Result<(PauliOperator, f64)> {
    let terms = step.conjugate(op)?;
    debug_assert_eq!(terms.len(), 1);
    Ok((terms[0].0, sign * terms[0].1))
}

/// Maps mutually commuting, GF(2)-independent generators to distinct
/// single-qubit Z operators with at most two quarter turns per generator.
///
/// Off-diagonal generators take one rotation about a copy with the first
/// off-diagonal letter swapped X↔Y; diagonal generators are first bumped
/// off-diagonal by a Y rotation on a fresh qubit.
pub fn diagonalize_generators(generators: &[PauliOperator]) -> Result<RotationPlan> {
    let n = match generators.first() {
        Some(g) => g.num_qubits(),
        None => return Ok(RotationPlan::empty()),
    };
    let mut basis = GeneratorBasis::new();
    for (i, g) in generators.iter().enumerate() {
        if !g.is_hermitian() || g.is_identity() {
            return Err(Error::Invariant(format!(
                "generator {g} must be a non-identity Hermitian Pauli"
            )));
        }
        if !basis.insert(g) {
            return Err(Error::Invariant(format!("generator {g} is GF(2)-dependent")));
        }
        for other in generators.iter().skip(i + 1) {
            if !g.commutes(other)? {
                return Err(Error::Invariant(format!(
                    "generators {g} and {other} anticommute"
                )));
            }
        }
    }

    let mut steps: Vec<RotationStep> = Vec::new();
    let mut working: Vec<(PauliOperator, f64)> = generators.iter().map(|g| (*g, 1.0)).collect();
    let mut assigned: Vec<usize> = Vec::new();
    let mut targets: Vec<TargetZ> = Vec::new();

    for i in 0..working.len() {
        let (mut op, _) = working[i];

        let single_z_qubit = |op: &PauliOperator| -> Option<usize> {
            if op.is_diagonal() && op.z_bits().count_ones() == 1 {
                Some(op.z_bits().trailing_zeros() as usize)
            } else {
                None
            }
        };

        if let Some(q) = single_z_qubit(&op) {
            if !assigned.contains(&q) {
                assigned.push(q);
                targets.push(TargetZ {
                    source: generators[i],
                    qubit: q,
                    sign: working[i].1,
                });
                continue;
            }
        }

        if op.is_diagonal() {
            // Case 2: rotate a fresh Z position into an X so Case 1 applies.
            let m = (0..n)
                .find(|q| op.letter(*q) == 'Z' && !assigned.contains(q))
                .ok_or_else(|| {
                    Error::Invariant(format!("no fresh qubit available for diagonal generator {op}"))
                })?;
            let step = RotationStep::clifford(PauliOperator::single(n, m, 'Y')?)?;
            for entry in working.iter_mut() {
                *entry = signed_conjugate(&step, &entry.0, entry.1)?;
            }
            steps.push(step);
            op = working[i].0;
        }

        // Case 1: flip the first off-diagonal letter X↔Y; the rotation about
        // the flipped copy maps the generator to ±Z on that qubit.
        let k = (0..n)
            .find(|q| matches!(op.letter(*q), 'X' | 'Y'))
            .expect("generator is off-diagonal here");
        // X↔Y at position k toggles the z bit.
        let j = PauliOperator::new(n, op.x_bits(), op.z_bits() ^ (1 << k), 0)?;
        let step = RotationStep::clifford(j)?;
        for entry in working.iter_mut() {
            *entry = signed_conjugate(&step, &entry.0, entry.1)?;
        }
        steps.push(step);

        let (final_op, final_sign) = working[i];
        match single_z_qubit(&final_op) {
            Some(q) if q == k => {
                assigned.push(q);
                targets.push(TargetZ {
                    source: generators[i],
                    qubit: q,
                    sign: final_sign,
                });
            }
            _ => {
                return Err(Error::Invariant(format!(
                    "diagonalization failed: {final_op} is not a single-qubit Z"
                )))
            }
        }
    }

    debug_assert!(steps.len() <= 2 * generators.len());
    Ok(RotationPlan {
        steps,
        target_map: targets,
    })
}

/// Builds the N−1 continuous rotations that collapse Σ r_i A_i onto A_1 with
/// coefficient 1, for pairwise-anticommuting clique representatives.
pub fn unitary_partitioning(clique_reps: &[PauliOperator], r: &[f64]) -> Result<RotationPlan> {
    if clique_reps.is_empty() {
        return Err(Error::Invariant("unitary partitioning needs at least one representative".into()));
    }
    if clique_reps.len() != r.len() {
        return Err(Error::DimensionMismatch(clique_reps.len(), r.len()));
    }
    let norm: f64 = r.iter().map(|v| v * v).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::Invariant(format!("|r| = {norm} is not 1")));
    }
    for (i, a) in clique_reps.iter().enumerate() {
        for b in clique_reps.iter().skip(i + 1) {
            if a.commutes(b)? {
                return Err(Error::Invariant(format!(
                    "representatives {a} and {b} commute"
                )));
            }
        }
    }

    let mut coeffs = r.to_vec();
    let mut steps = Vec::new();
    // Givens-style reduction i = N…2: each step zeroes coefficient i into
    // coefficient 1 about the Hermitian Pauli i·A_i·A_1.
    for i in (1..clique_reps.len()).rev() {
        let raw = clique_reps[i].multiply(&clique_reps[0])?;
        let (generator, sign) = raw.with_phase(raw.phase_exp() + 1).sign_split()?;
        let theta = coeffs[i].atan2(coeffs[0]);
        steps.push(RotationStep::continuous(generator, sign * theta)?);
        coeffs[0] = coeffs[0].hypot(coeffs[i]);
        coeffs[i] = 0.0;
    }
    Ok(RotationPlan {
        steps,
        target_map: Vec::new(),
    })
}

///// Per-qubit stabilizer eigenvalues for the rotated generators: the
/// rotation-produced sign times the noncontextual value q_j.
pub fn fix_generator_signs(plan: &RotationPlan, q: &[i8]) -> Result<BTreeMap<usize, f64>> {
    if plan.target_map.len() != q.len() {
        return Err(Error::DimensionMismatch(plan.target_map.len(), q.len()));
    }
    let mut assignments = BTreeMap::new();
    for (target, &qj) in plan.target_map.iter().zip(q.iter()) {
        if assignments
            .insert(target.qubit, target.sign * qj as f64)
            .is_some()
        {
            return Err(Error::Invariant(format!(
                "qubit {} assigned twice",
                target.qubit
            )));
        }
    }
    Ok(assignments)
}
