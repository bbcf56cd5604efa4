//! CS-VQE: contextual subspace decomposition of Pauli Hamiltonians.
//!
//! Splits a Hamiltonian into a noncontextual part with an efficient classical
//! (quasi-quantized) description and a contextual remainder, solves the
//! classical part exactly, and computes the quantum correction on a reduced
//! qubit count by exact diagonalization in the contextual subspace.

pub mod contextual_subspace;
pub mod contextuality;
pub mod error;
pub mod hamiltonian;
pub mod harness;
pub mod heuristics;
pub mod oracle;
pub mod pauli;
pub mod quasi_model;
pub mod rotations;

pub use contextual_subspace::{build_problem, restrict, solve, CsVqeProblem, SolveConfig};
pub use contextuality::{
    closure_under_inference, decompose, greedy_noncontextual_subset, is_noncontextual,
    NoncontextualDecomposition,
};
pub use error::{Error, Result};
pub use hamiltonian::{Hamiltonian, RotationKind, RotationStep};
pub use heuristics::{
    greedy_pair_sweep, optimal_sweep, weight_sweep, SweepConfig, SweepRecord, WeightKind,
};
pub use pauli::PauliOperator;
pub use quasi_model::{
    build_model, evaluate_objective, find_ground_state, NoncontextualState, OptimizerConfig,
    QuasiModel,
};
pub use rotations::{
    apply_plan, diagonalize_generators, fix_generator_signs, unitary_partitioning, RotationPlan,
};
