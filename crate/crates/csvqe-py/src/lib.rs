//! Python bindings: thin wrappers around the csvqe pipeline. Hamiltonians
//! travel as the same JSON documents the CLI accepts; reports come back as
//! JSON strings.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use csvqe::harness::{self, HamiltonianFile, HeuristicKind, SolveOpts, SweepOpts};
use csvqe::Hamiltonian;

fn err(e: csvqe::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_hamiltonian(text: &str) -> PyResult<Hamiltonian> {
    let file: HamiltonianFile =
        serde_json::from_str(text).map_err(|e| PyValueError::new_err(e.to_string()))?;
    file.to_hamiltonian().map_err(err)
}

fn report_string(report: &harness::RunReport) -> PyResult<String> {
    serde_json::to_string(report).map_err(|e| PyValueError::new_err(e.to_string()))
}

/// Partition the Hamiltonian's terms into noncontextual and contextual sets.
#[pyfunction]
fn decompose(hamiltonian_json: &str) -> PyResult<String> {
    let h = parse_hamiltonian(hamiltonian_json)?;
    report_string(&harness::run_decompose(&h).map_err(err)?)
}

/// Noncontextual ground state of the classical model.
#[pyfunction]
#[pyo3(signature = (hamiltonian_json, seed = 0))]
fn ground(hamiltonian_json: &str, seed: u64) -> PyResult<String> {
    let h = parse_hamiltonian(hamiltonian_json)?;
    report_string(&harness::run_ground(&h, seed).map_err(err)?)
}

/// Full pipeline: decomposition, classical optimum, quantum correction.
#[pyfunction]
#[pyo3(signature = (hamiltonian_json, qubits = None, retain = None, no_correction = false, seed = 0, dense_limit = 14))]
fn solve(
    hamiltonian_json: &str,
    qubits: Option<usize>,
    retain: Option<Vec<usize>>,
    no_correction: bool,
    seed: u64,
    dense_limit: usize,
) -> PyResult<String> {
    let h = parse_hamiltonian(hamiltonian_json)?;
    let opts = SolveOpts {
        qubits,
        retain,
        heuristic: HeuristicKind::Optimal,
        no_correction,
        seed,
        dense_limit,
    };
    report_string(&harness::run_solve(&h, &opts).map_err(err)?)
}

/// Energy-vs-qubits curve for one of the removal heuristics.
#[pyfunction]
#[pyo3(signature = (hamiltonian_json, heuristic = "greedy-pair", seed = 0, dense_limit = 14))]
fn sweep(hamiltonian_json: &str, heuristic: &str, seed: u64, dense_limit: usize) -> PyResult<String> {
    let h = parse_hamiltonian(hamiltonian_json)?;
    let opts = SweepOpts {
        heuristic: heuristic.parse().map_err(err)?,
        seed,
        dense_limit,
        ..SweepOpts::default()
    };
    let (report, _) = harness::run_sweep(&h, &opts).map_err(err)?;
    report_string(&report)
}

/// Random-coefficient ensemble statistics on the bundled 3-qubit skeleton.
#[pyfunction]
#[pyo3(signature = (count = 1000, seed = 1, bins = 50))]
fn random_bench(count: usize, seed: u64, bins: usize) -> PyResult<String> {
    let opts = harness::BenchOpts { count, seed, bins };
    let (report, _) = harness::run_random_bench(&opts).map_err(err)?;
    report_string(&report)
}

/// Exact ground energy by dense diagonalization.
#[pyfunction]
#[pyo3(signature = (hamiltonian_json, dense_limit = 14))]
fn exact_ground_energy(hamiltonian_json: &str, dense_limit: usize) -> PyResult<f64> {
    let h = parse_hamiltonian(hamiltonian_json)?;
    csvqe::oracle::exact_ground_energy(&h, dense_limit).map_err(err)
}

#[pymodule]
fn csvqe_native(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(decompose, m)?)?;
    m.add_function(wrap_pyfunction!(ground, m)?)?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    m.add_function(wrap_pyfunction!(random_bench, m)?)?;
    m.add_function(wrap_pyfunction!(exact_ground_energy, m)?)?;
    Ok(())
}
