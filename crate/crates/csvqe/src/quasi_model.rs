//! Quasi-quantized model of a noncontextual Hamiltonian: independent
//! generators extracted by GF(2) elimination, clique representatives, the
//! classical objective function, and its minimization over (q, r).

use std::collections::{BTreeMap, BTreeSet};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::contextuality::NoncontextualDecomposition;
use crate::error::{Error, Result};
use crate::pauli::PauliOperator;

/// GF(2) row basis over symplectic bit vectors. Rows are the accepted
/// generators in insertion order; each carries a distinct pivot bit.
#[derive(Clone, Debug)]
pub struct GeneratorBasis {
    rows: Vec<PauliOperator>,
    /// Reduced echelon vectors, one pivot each. `vecs[i]` is the XOR of the
    /// original rows named by `combos[i]`.
    vecs: Vec<u128>,
    combos: Vec<u128>,
    pivots: Vec<u32>,
}

impl GeneratorBasis {
    pub fn new() -> Self {
        GeneratorBasis {
            rows: Vec::new(),
            vecs: Vec::new(),
            combos: Vec::new(),
            pivots: Vec::new(),
        }
    }

    pub fn rows(&self) -> &[PauliOperator] {
        &self.rows
    }

    /// Indices sorted so vectors reduce in one pass (descending pivot).
    fn reduction_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.rows.len()).collect();
        order.sort_by(|&a, &b| self.pivots[b].cmp(&self.pivots[a]));
        order
    }

    /// Reduces `v` against the echelon vectors; the returned mask names the
    /// original rows whose XOR was subtracted.
    fn reduce(&self, mut v: u128) -> (u128, u128) {
        let mut combo = 0u128;
        for i in self.reduction_order() {
            if (v >> self.pivots[i]) & 1 == 1 {
                v ^= self.vecs[i];
                combo ^= self.combos[i];
            }
        }
        (v, combo)
    }

    /// Adds `op` (phase-free) if GF(2)-independent of the current rows.
    /// Returns true when a new generator was accepted.
    pub fn insert(&mut self, op: &PauliOperator) -> bool {
        let (v, combo) = self.reduce(op.symplectic_bits());
        if v == 0 {
            return false;
        }
        let own = 1u128 << self.rows.len();
        self.rows.push(*op);
        self.vecs.push(v);
        self.combos.push(combo ^ own);
        self.pivots.push(127 - v.leading_zeros());
        true
    }

    /// Expresses `op` over the generators: returns indices J and a sign s
    /// such that `op = s · Π_{j∈J} G_j`, or None when not in the span.
    pub fn solve(&self, op: &PauliOperator) -> Result<Option<(Vec<usize>, f64)>> {
        let (v, combo) = self.reduce(op.symplectic_bits());
        if v != 0 {
            return Ok(None);
        }
        let indices: Vec<usize> = (0..self.rows.len()).filter(|i| (combo >> i) & 1 == 1).collect();
        let mut product = PauliOperator::identity(op.num_qubits());
        for &i in &indices {
            product = product.multiply(&self.rows[i])?;
        }
        let (bare, sign) = product.sign_split()?;
        debug_assert_eq!(bare.x_bits(), op.x_bits());
        debug_assert_eq!(bare.z_bits(), op.z_bits());
        // product = sign · op  ⇒  op = sign · product (signs are ±1).
        Ok(Some((indices, sign)))
    }
}

impl Default for GeneratorBasis {
    fn default() -> Self {
        Self::new()
    }
}

/// One record of the classical objective: the coefficients attached to a
/// generator-product B = Π_{j∈J} G_j, alone (h_b) and paired with each
/// clique representative (h_bi).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ObjectiveTerm {
    pub indices: Vec<usize>,
    pub h_b: f64,
    pub h_bi: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct QuasiModel {
    n: usize,
    generators: Vec<PauliOperator>,
    clique_reps: Vec<PauliOperator>,
    obj_terms: Vec<ObjectiveTerm>,
    basis: GeneratorBasis,
    nc_terms: BTreeSet<PauliOperator>,
}

impl QuasiModel {
    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn generators(&self) -> &[PauliOperator] {
        &self.generators
    }

    pub fn clique_reps(&self) -> &[PauliOperator] {
        &self.clique_reps
    }

    pub fn num_cliques(&self) -> usize {
        self.clique_reps.len()
    }

    pub fn obj_terms(&self) -> &[ObjectiveTerm] {
        &self.obj_terms
    }

    pub fn basis(&self) -> &GeneratorBasis {
        &self.basis
    }

    /// Source terms assigned to the noncontextual part.
    pub fn nc_terms(&self) -> &BTreeSet<PauliOperator> {
        &self.nc_terms
    }
}

/// Parameters (q, r) of a noncontextual state: definite ±1 values for the
/// generators and a unit expectation vector for the clique representatives.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NoncontextualState {
    pub q: Vec<i8>,
    pub r: Vec<f64>,
}

impl NoncontextualState {
    pub fn validate(&self, model: &QuasiModel) -> Result<()> {
        if self.q.len() != model.generators.len() || self.r.len() != model.num_cliques() {
            return Err(Error::DimensionMismatch(self.q.len(), model.generators.len()));
        }
        if self.q.iter().any(|&v| v != 1 && v != -1) {
            return Err(Error::Invariant("q entries must be ±1".into()));
        }
        if !self.r.is_empty() {
            let norm: f64 = self.r.iter().map(|v| v * v).sum::<f64>().sqrt();
            if (norm - 1.0).abs() > 1e-12 {
                return Err(Error::Invariant(format!("|r| = {norm} is not 1")));
            }
        }
        Ok(())
    }
}

/// Builds the quasi-quantized model from a validated decomposition.
///
/// Generators are found by GF(2) elimination over the Z-set and all
/// within-clique pair products; clique representatives are the
/// lexicographically-first member of each clique.
pub fn build_model(d: &NoncontextualDecomposition) -> Result<QuasiModel> {
    let n = d.source.num_qubits();
    let clique_reps: Vec<PauliOperator> = d.cliques.iter().map(|c| c[0]).collect();

    let mut basis = GeneratorBasis::new();
    for z in &d.z_set {
        basis.insert(z);
    }
    for clique in &d.cliques {
        for (i, a) in clique.iter().enumerate() {
            for b in clique.iter().skip(i + 1) {
                let (prod, _) = a.multiply(b)?.sign_split()?;
                if !prod.is_identity() {
                    basis.insert(&prod);
                }
            }
        }
    }
    let generators = basis.rows().to_vec();

    for (j, g) in generators.iter().enumerate() {
        for other in generators.iter().skip(j + 1) {
            if !g.commutes(other)? {
                return Err(Error::Invariant(format!(
                    "generators {g} and {other} anticommute"
                )));
            }
        }
        for a in &clique_reps {
            if !g.commutes(a)? {
                return Err(Error::Invariant(format!(
                    "generator {g} anticommutes with clique representative {a}"
                )));
            }
        }
    }

    let num_cliques = clique_reps.len();
    let mut records: BTreeMap<Vec<usize>, (f64, Vec<f64>)> = BTreeMap::new();
    let mut record = |indices: Vec<usize>, h_b: f64, clique: Option<(usize, f64)>| {
        let entry = records
            .entry(indices)
            .or_insert_with(|| (0.0, vec![0.0; num_cliques]));
        entry.0 += h_b;
        if let Some((i, v)) = clique {
            entry.1[i] += v;
        }
    };

    // Identity offset of the source Hamiltonian rides along as the empty
    // generator product.
    if d.source.constant() != 0.0 {
        record(Vec::new(), d.source.constant(), None);
    }
    for z in &d.z_set {
        let coeff = d.source.coefficient(z);
        let (indices, sign) = basis.solve(z)?.ok_or_else(|| {
            Error::Invariant(format!("Z-set member {z} is outside the generator span"))
        })?;
        record(indices, sign * coeff, None);
    }
    for (i, clique) in d.cliques.iter().enumerate() {
        let rep = &clique_reps[i];
        for p in clique {
            let coeff = d.source.coefficient(p);
            let (b, b_sign) = p.multiply(rep)?.sign_split()?;
            let (indices, sign) = basis.solve(&b)?.ok_or_else(|| {
                Error::Invariant(format!(
                    "clique term {p} times representative {rep} is outside the generator span"
                ))
            })?;
            record(indices, 0.0, Some((i, b_sign * sign * coeff)));
        }
    }

    let obj_terms = records
        .into_iter()
        .map(|(indices, (h_b, h_bi))| ObjectiveTerm { indices, h_b, h_bi })
        .collect();

    Ok(QuasiModel {
        n,
        generators,
        clique_reps,
        obj_terms,
        basis,
        nc_terms: d.nc_terms(),
    })
}

/// Expectation of H_nc in the noncontextual state (q, r):
/// Σ_B (h_B + Σ_i h_{B,i} r_i) Π_{j∈J_B} q_j.
pub fn evaluate_objective(model: &QuasiModel, state: &NoncontextualState) -> Result<f64> {
    state.validate(model)?;
    Ok(objective_unchecked(model, &state.q, &state.r))
}

fn objective_unchecked(model: &QuasiModel, q: &[i8], r: &[f64]) -> f64 {
    let mut total = 0.0;
    for term in &model.obj_terms {
        let mut prod = 1.0;
        for &j in &term.indices {
            prod *= q[j] as f64;
        }
        let mut coeff = term.h_b;
        for (i, &ri) in r.iter().enumerate() {
            coeff += term.h_bi[i] * ri;
        }
        total += coeff * prod;
    }
    total
}

/// Expectation of an arbitrary Pauli in the noncontextual state:
/// ±Π q_j when p is in the signed span of G, ±r_i Π q_j when p·A_i is,
/// zero otherwise.
pub fn expectation_of_pauli(
    model: &QuasiModel,
    state: &NoncontextualState,
    p: &PauliOperator,
) -> Result<f64> {
    state.validate(model)?;
    if p.num_qubits() != model.n {
        return Err(Error::DimensionMismatch(p.num_qubits(), model.n));
    }
    for g in &model.generators {
        if !g.commutes(p)? {
            return Ok(0.0);
        }
    }
    if let Some((indices, sign)) = model.basis.solve(p)? {
        let mut prod = sign;
        for j in indices {
            prod *= state.q[j] as f64;
        }
        return Ok(prod);
    }
    for (i, rep) in model.clique_reps.iter().enumerate() {
        if !rep.commutes(p)? {
            continue;
        }
        let (b, b_sign) = p.multiply(rep)?.sign_split()?;
        if let Some((indices, sign)) = model.basis.solve(&b)? {
            let mut prod = b_sign * sign * state.r[i];
            for j in indices {
                prod *= state.q[j] as f64;
            }
            return Ok(prod);
        }
    }
    Ok(0.0)
}

/// Optimizer configuration for the outer search over q.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub seed: u64,
    /// Exhaustive cube search up to this many generators.
    pub brute_force_threshold: usize,
    pub restarts: usize,
    /// Annealing steps are this factor times |G|.
    pub steps_per_spin: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            seed: 0,
            brute_force_threshold: 18,
            restarts: 20,
            steps_per_spin: 10_000,
        }
    }
}

/// For fixed q the objective is affine in r, so the optimal r is closed
/// form: value c0(q) − |c(q)| at r = −c/|c|.
pub(crate) fn best_for_q(model: &QuasiModel, q: &[i8]) -> (f64, Vec<f64>) {
    let num_cliques = model.num_cliques();
    let mut c0 = 0.0;
    let mut c = vec![0.0; num_cliques];
    for term in &model.obj_terms {
        let mut prod = 1.0;
        for &j in &term.indices {
            prod *= q[j] as f64;
        }
        c0 += term.h_b * prod;
        for i in 0..num_cliques {
            c[i] += term.h_bi[i] * prod;
        }
    }
    if num_cliques == 0 {
        return (c0, Vec::new());
    }
    let norm: f64 = c.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm < 1e-300 {
        // Degenerate direction: any unit r is optimal; pick a fixed one.
        let mut r = vec![0.0; num_cliques];
        r[0] = 1.0;
        return (c0, r);
    }
    let r: Vec<f64> = c.iter().map(|v| -v / norm).collect();
    (c0 - norm, r)
}

fn bits_to_q(bits: u64, m: usize) -> Vec<i8> {
    (0..m)
        .map(|j| if (bits >> j) & 1 == 1 { -1 } else { 1 })
        .collect()
}

/// Minimizes the objective. Exhaustive over the q cube when |G| is within
/// the brute-force threshold; simulated annealing with restarts otherwise.
pub fn find_ground_state(
    model: &QuasiModel,
    cfg: &OptimizerConfig,
) -> Result<(NoncontextualState, f64)> {
    let m = model.generators.len();
    if m <= cfg.brute_force_threshold {
        let mut best: Option<(f64, Vec<i8>, Vec<f64>)> = None;
        for bits in 0..(1u64 << m) {
            let q = bits_to_q(bits, m);
            let (value, r) = best_for_q(model, &q);
            if best.as_ref().is_none_or(|(b, _, _)| value < *b) {
                best = Some((value, q, r));
            }
        }
        let (value, q, r) = best.expect("cube is nonempty");
        return Ok((NoncontextualState { q, r }, value));
    }
    anneal(model, cfg)
}

/// Geometric-cooling single-spin-flip annealing over q with restarts.
fn anneal(model: &QuasiModel, cfg: &OptimizerConfig) -> Result<(NoncontextualState, f64)> {
    let m = model.generators.len();
    let steps = cfg.steps_per_spin.saturating_mul(m).max(1);
    let mut best: Option<(f64, Vec<i8>, Vec<f64>)> = None;
    for restart in 0..cfg.restarts.max(1) {
        let mut rng = StdRng::seed_from_u64(cfg.seed.wrapping_add(restart as u64));
        let mut q: Vec<i8> = (0..m).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect();
        let (mut energy, mut r) = best_for_q(model, &q);
        if best.as_ref().is_none_or(|(b, _, _)| energy < *b) {
            best = Some((energy, q.clone(), r.clone()));
        }
        let t_start = 2.0 * model.obj_terms.iter().map(|t| t.h_b.abs()).sum::<f64>().max(1.0);
        let t_end = 1e-6;
        let cooling = (t_end / t_start).powf(1.0 / steps as f64);
        let mut temp = t_start;
        for _ in 0..steps {
            let flip = rng.random_range(0..m);
            q[flip] = -q[flip];
            let (candidate, cand_r) = best_for_q(model, &q);
            let accept = candidate <= energy
                || rng.random::<f64>() < ((energy - candidate) / temp).exp();
            if accept {
                energy = candidate;
                r = cand_r;
                if best.as_ref().is_none_or(|(b, _, _)| energy < *b) {
                    best = Some((energy, q.clone(), r.clone()));
                }
            } else {
                q[flip] = -q[flip];
            }
            temp *= cooling;
        }
    }
    let (value, q, r) = best.expect("at least one restart");
    Ok((NoncontextualState { q, r }, value))
}
