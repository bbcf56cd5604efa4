//! File formats and command implementations backing the CLI: JSON Hamiltonian
//! ingestion, run reports, CSV export, and the random-coefficient benchmark
//! ensemble.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::contextual_subspace::{build_problem, solve, SolveConfig};
use crate::contextuality::{decompose, greedy_noncontextual_subset, NoncontextualDecomposition};
use crate::error::{Error, Result};
use crate::hamiltonian::Hamiltonian;
use crate::heuristics::{
    greedy_pair_sweep, optimal_sweep, weight_sweep, SweepConfig, SweepRecord, WeightKind,
};
use crate::oracle;
use crate::pauli::PauliOperator;
use crate::quasi_model::{build_model, find_ground_state, NoncontextualState, OptimizerConfig, QuasiModel};

/// 1 kcal/mol in Hartree: the conventional chemical-accuracy threshold.
pub const CHEMICAL_ACCURACY: f64 = 1.594e-3;

/// The 14-term, 3-qubit example skeleton used by the random benchmark, with
/// its fixed noncontextual/contextual split.
pub const BENCH_NC_TERMS: [&str; 11] = [
    "ZII", "IXI", "IYI", "IZX", "IZY", "IZZ", "ZXI", "ZYI", "ZZX", "ZZY", "ZZZ",
];
pub const BENCH_C_TERMS: [&str; 3] = ["IIX", "IIY", "IIZ"];

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HamiltonianFile {
    pub n: usize,
    pub terms: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constant: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metadata: Option<Value>,
}

impl HamiltonianFile {
    pub fn to_hamiltonian(&self) -> Result<Hamiltonian> {
        let mut h = Hamiltonian::new(self.n);
        for (key, &coeff) in &self.terms {
            if !coeff.is_finite() {
                return Err(Error::Parse(format!(
                    "term '{key}': coefficient {coeff} is not finite"
                )));
            }
            if key.len() != self.n {
                return Err(Error::Parse(format!(
                    "term '{key}': length {} does not match n = {}",
                    key.len(),
                    self.n
                )));
            }
            let op: PauliOperator = key
                .parse()
                .map_err(|e| Error::Parse(format!("term '{key}': {e}")))?;
            h.add_term(&op, coeff)?;
        }
        if let Some(c) = self.constant {
            if !c.is_finite() {
                return Err(Error::Parse("constant is not finite".into()));
            }
            h.set_constant(h.constant() + c);
        }
        Ok(h)
    }

    pub fn from_hamiltonian(h: &Hamiltonian) -> Self {
        let terms = h
            .terms()
            .map(|(p, c)| (p.to_string(), c))
            .collect::<BTreeMap<_, _>>();
        HamiltonianFile {
            n: h.num_qubits(),
            terms,
            constant: (h.constant() != 0.0).then_some(h.constant()),
            metadata: None,
        }
    }
}

pub fn load_hamiltonian(path: &Path) -> Result<Hamiltonian> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Resource(format!("cannot read {}: {e}", path.display())))?;
    let file: HamiltonianFile = serde_json::from_str(&text)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    file.to_hamiltonian()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunReport {
    pub command: String,
    pub config: Value,
    pub results: Value,
    pub wall_time_ms: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HeuristicKind {
    GreedyPair,
    Optimal,
    Weight,
}

impl HeuristicKind {
    pub fn name(&self) -> &'static str {
        match self {
            HeuristicKind::GreedyPair => "greedy-pair",
            HeuristicKind::Optimal => "optimal",
            HeuristicKind::Weight => "weight",
        }
    }
}

impl std::str::FromStr for HeuristicKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "greedy-pair" => Ok(HeuristicKind::GreedyPair),
            "optimal" => Ok(HeuristicKind::Optimal),
            "weight" => Ok(HeuristicKind::Weight),
            other => Err(Error::Parse(format!(
                "unknown heuristic '{other}' (expected greedy-pair, optimal, or weight)"
            ))),
        }
    }
}

fn pauli_strings(ops: &[PauliOperator]) -> Vec<String> {
    ops.iter().map(|p| p.to_string()).collect()
}

fn decomposition_json(d: &NoncontextualDecomposition, model: &QuasiModel) -> Value {
    json!({
        "s_nc": d.nc_terms().iter().map(|p| p.to_string()).collect::<Vec<_>>(),
        "s_c": pauli_strings(&d.contextual_terms),
        "z_set": pauli_strings(&d.z_set),
        "cliques": d.cliques.iter().map(|c| pauli_strings(c)).collect::<Vec<_>>(),
        "generators": pauli_strings(model.generators()),
        "clique_reps": pauli_strings(model.clique_reps()),
    })
}

fn prepare(h: &Hamiltonian, seed: u64) -> Result<(NoncontextualDecomposition, QuasiModel, NoncontextualState, f64)> {
    let d = greedy_noncontextual_subset(h)?;
    let model = build_model(&d)?;
    let opt = OptimizerConfig {
        seed,
        ..OptimizerConfig::default()
    };
    let (state, nc_energy) = find_ground_state(&model, &opt)?;
    Ok((d, model, state, nc_energy))
}

pub fn run_decompose(h: &Hamiltonian) -> Result<RunReport> {
    let start = Instant::now();
    let d = greedy_noncontextual_subset(h)?;
    let model = build_model(&d)?;
    Ok(RunReport {
        command: "decompose".into(),
        config: json!({}),
        results: decomposition_json(&d, &model),
        wall_time_ms: start.elapsed().as_millis() as u64,
    })
}

pub fn run_ground(h: &Hamiltonian, seed: u64) -> Result<RunReport> {
    let start = Instant::now();
    let (d, model, state, nc_energy) = prepare(h, seed)?;
    Ok(RunReport {
        command: "ground".into(),
        config: json!({ "seed": seed }),
        results: json!({
            "decomposition": decomposition_json(&d, &model),
            "nc_energy": nc_energy,
            "q": state.q,
            "r": state.r,
        }),
        wall_time_ms: start.elapsed().as_millis() as u64,
    })
}

#[derive(Clone, Debug)]
pub struct SolveOpts {
    pub qubits: Option<usize>,
    pub retain: Option<Vec<usize>>,
    pub heuristic: HeuristicKind,
    pub no_correction: bool,
    pub seed: u64,
    pub dense_limit: usize,
}

impl Default for SolveOpts {
    fn default() -> Self {
        SolveOpts {
            qubits: None,
            retain: None,
            heuristic: HeuristicKind::Optimal,
            no_correction: false,
            seed: 0,
            dense_limit: 14,
        }
    }
}

fn sweep_records(
    h: &Hamiltonian,
    model: &QuasiModel,
    state: &NoncontextualState,
    heuristic: HeuristicKind,
    cfg: &SweepConfig,
) -> Result<Vec<SweepRecord>> {
    match heuristic {
        HeuristicKind::GreedyPair => greedy_pair_sweep(h, model, state, cfg),
        HeuristicKind::Optimal => optimal_sweep(h, model, state, cfg),
        HeuristicKind::Weight => weight_sweep(h, model, state, cfg),
    }
}

pub fn run_solve(h: &Hamiltonian, opts: &SolveOpts) -> Result<RunReport> {
    let start = Instant::now();
    let (_, model, state, nc_energy) = prepare(h, opts.seed)?;
    let solve_cfg = SolveConfig {
        dense_limit: opts.dense_limit,
        ..SolveConfig::default()
    };
    let config = json!({
        "seed": opts.seed,
        "dense_limit": opts.dense_limit,
        "qubits": opts.qubits,
        "retain": opts.retain,
        "heuristic": opts.heuristic.name(),
        "no_correction": opts.no_correction,
    });
    if opts.no_correction {
        return Ok(RunReport {
            command: "solve".into(),
            config,
            results: json!({ "nc_energy": nc_energy, "energy": nc_energy }),
            wall_time_ms: start.elapsed().as_millis() as u64,
        });
    }
    let num_gens = model.generators().len();
    let retained: Vec<usize> = match (&opts.retain, opts.qubits) {
        (Some(list), _) => list.clone(),
        (None, Some(k)) => {
            let min_qubits = h.num_qubits() - num_gens;
            if k < min_qubits || k > h.num_qubits() {
                return Err(Error::Parse(format!(
                    "--qubits {k} outside the feasible range [{min_qubits}, {}]",
                    h.num_qubits()
                )));
            }
            let sweep_cfg = SweepConfig {
                solve: solve_cfg.clone(),
                ..SweepConfig::default()
            };
            let records = sweep_records(h, &model, &state, opts.heuristic, &sweep_cfg)?;
            records
                .iter()
                .find(|r| r.quantum_qubits == k)
                .map(|r| r.retained_generators.clone())
                .ok_or_else(|| {
                    Error::Resource(format!(
                        "{} sweep did not visit size {k}",
                        opts.heuristic.name()
                    ))
                })?
        }
        (None, None) => (0..num_gens).collect(),
    };
    let problem = build_problem(h, &model, &state, &retained, &solve_cfg)?;
    let energy = solve(&problem, &solve_cfg)?;
    let exact = oracle::exact_ground_energy(h, opts.dense_limit).ok();
    Ok(RunReport {
        command: "solve".into(),
        config,
        results: json!({
            "nc_energy": nc_energy,
            "energy": energy,
            "exact_energy": exact,
            "error_vs_exact": exact.map(|e| energy - e),
            "quantum_qubits": problem.quantum_qubits(),
            "retained_generators": problem.retained,
            "restricted_term_count": problem.restricted_term_count(),
        }),
        wall_time_ms: start.elapsed().as_millis() as u64,
    })
}

#[derive(Clone, Debug)]
pub struct SweepOpts {
    pub heuristic: HeuristicKind,
    pub threshold: f64,
    pub weight_kind: WeightKind,
    pub seed: u64,
    pub dense_limit: usize,
}

impl Default for SweepOpts {
    fn default() -> Self {
        SweepOpts {
            heuristic: HeuristicKind::GreedyPair,
            threshold: CHEMICAL_ACCURACY,
            weight_kind: WeightKind::CoefficientSum,
            seed: 0,
            dense_limit: 14,
        }
    }
}

pub fn run_sweep(h: &Hamiltonian, opts: &SweepOpts) -> Result<(RunReport, Vec<SweepRecord>)> {
    let start = Instant::now();
    let (_, model, state, nc_energy) = prepare(h, opts.seed)?;
    let cfg = SweepConfig {
        solve: SolveConfig {
            dense_limit: opts.dense_limit,
            ..SolveConfig::default()
        },
        weight_kind: opts.weight_kind,
    };
    let records = sweep_records(h, &model, &state, opts.heuristic, &cfg)?;
    let first_accurate = records
        .iter()
        .find(|r| r.error_vs_exact.is_some_and(|e| e.abs() <= opts.threshold))
        .map(|r| r.quantum_qubits);
    let exact = oracle::exact_ground_energy(h, opts.dense_limit).ok();
    let report = RunReport {
        command: "sweep".into(),
        config: json!({
            "seed": opts.seed,
            "dense_limit": opts.dense_limit,
            "heuristic": opts.heuristic.name(),
            "threshold": opts.threshold,
            "weight_kind": opts.weight_kind,
        }),
        results: json!({
            "nc_energy": nc_energy,
            "exact_energy": exact,
            "records": records,
            "first_accurate_qubits": first_accurate,
        }),
        wall_time_ms: start.elapsed().as_millis() as u64,
    };
    Ok((report, records))
}

pub fn write_sweep_csv(path: &Path, records: &[SweepRecord]) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)
        .map_err(|e| Error::Resource(format!("cannot write {}: {e}", path.display())))?;
    writer
        .write_record(["qubits", "energy", "error", "terms"])
        .map_err(|e| Error::Resource(e.to_string()))?;
    for r in records {
        let error = r
            .error_vs_exact
            .map(|e| format!("{e}"))
            .unwrap_or_default();
        writer
            .write_record([
                r.quantum_qubits.to_string(),
                r.energy.to_string(),
                error,
                r.restricted_term_count.to_string(),
            ])
            .map_err(|e| Error::Resource(e.to_string()))?;
    }
    writer.flush().map_err(|e| Error::Resource(e.to_string()))
}

#[derive(Clone, Debug)]
pub struct BenchOpts {
    pub count: usize,
    pub seed: u64,
    pub bins: usize,
}

impl Default for BenchOpts {
    fn default() -> Self {
        BenchOpts {
            count: 10_000,
            seed: 1,
            bins: 50,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BenchHistogram {
    pub bin_edges: Vec<f64>,
    pub nc_counts: Vec<usize>,
    pub corrected_counts: Vec<usize>,
}

/// Skeleton Hamiltonian of the benchmark ensemble with the given coefficients
/// (order: the 11 noncontextual terms, then the 3 contextual terms).
pub fn bench_hamiltonian(coeffs: &[f64; 14]) -> Hamiltonian {
    let mut h = Hamiltonian::new(3);
    for (s, &c) in BENCH_NC_TERMS.iter().chain(BENCH_C_TERMS.iter()).zip(coeffs) {
        let op: PauliOperator = s.parse().expect("fixed term set parses");
        h.add_term(&op, c).expect("fixed term set is valid");
    }
    h
}

struct BenchSample {
    nc_error: f64,
    corrected_error: f64,
}

fn bench_instance(seed: u64, index: u64) -> Result<Option<BenchSample>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let mut coeffs = [0.0f64; 14];
    for c in &mut coeffs {
        *c = rng.random_range(-1.0..1.0);
    }
    let h = bench_hamiltonian(&coeffs);
    let exact = oracle::exact_ground_energy(&h, 14)?;
    if exact.abs() < 1e-8 {
        return Ok(None);
    }
    // The benchmark uses the fixed noncontextual/contextual split of the
    // skeleton, not the coefficient-driven greedy selection.
    let nc_set = BENCH_NC_TERMS
        .iter()
        .map(|s| s.parse().expect("fixed term set parses"))
        .collect();
    let d = decompose(&h, &nc_set)?;
    let model = build_model(&d)?;
    let opt = OptimizerConfig {
        seed,
        ..OptimizerConfig::default()
    };
    let (state, nc_energy) = find_ground_state(&model, &opt)?;
    let cfg = SolveConfig::default();
    let all: Vec<usize> = (0..model.generators().len()).collect();
    let problem = build_problem(&h, &model, &state, &all, &cfg)?;
    let corrected = solve(&problem, &cfg)?;
    Ok(Some(BenchSample {
        nc_error: (nc_energy - exact).abs() / exact.abs(),
        corrected_error: (corrected - exact).abs() / exact.abs(),
    }))
}

pub fn run_random_bench(opts: &BenchOpts) -> Result<(RunReport, BenchHistogram)> {
    let start = Instant::now();
    let samples: Vec<Result<Option<BenchSample>>> = (0..opts.count as u64)
        .into_par_iter()
        .map(|i| bench_instance(opts.seed, i))
        .collect();
    let mut nc_errors = Vec::with_capacity(opts.count);
    let mut corrected_errors = Vec::with_capacity(opts.count);
    let mut excluded = 0usize;
    for s in samples {
        match s? {
            Some(sample) => {
                nc_errors.push(sample.nc_error);
                corrected_errors.push(sample.corrected_error);
            }
            None => excluded += 1,
        }
    }
    if nc_errors.is_empty() {
        return Err(Error::Invariant("all benchmark instances excluded".into()));
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let mean_nc = mean(&nc_errors);
    let mean_corrected = mean(&corrected_errors);

    let max_error = nc_errors
        .iter()
        .chain(corrected_errors.iter())
        .cloned()
        .fold(0.0f64, f64::max);
    let bins = opts.bins.max(1);
    let width = if max_error > 0.0 { max_error / bins as f64 } else { 1.0 };
    let bin_of = |e: f64| ((e / width) as usize).min(bins - 1);
    let mut nc_counts = vec![0usize; bins];
    let mut corrected_counts = vec![0usize; bins];
    for &e in &nc_errors {
        nc_counts[bin_of(e)] += 1;
    }
    for &e in &corrected_errors {
        corrected_counts[bin_of(e)] += 1;
    }
    let histogram = BenchHistogram {
        bin_edges: (0..=bins).map(|i| i as f64 * width).collect(),
        nc_counts,
        corrected_counts,
    };
    let report = RunReport {
        command: "random-bench".into(),
        config: json!({
            "count": opts.count,
            "seed": opts.seed,
            "bins": opts.bins,
        }),
        results: json!({
            "instances": nc_errors.len(),
            "excluded_near_zero_exact": excluded,
            "mean_nc_fractional_error": mean_nc,
            "mean_corrected_fractional_error": mean_corrected,
            "histogram": histogram,
        }),
        wall_time_ms: start.elapsed().as_millis() as u64,
    };
    Ok((report, histogram))
}

pub fn write_bench_csv(path: &Path, histogram: &BenchHistogram) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)
        .map_err(|e| Error::Resource(format!("cannot write {}: {e}", path.display())))?;
    writer
        .write_record(["bin_lo", "bin_hi", "nc_count", "corrected_count"])
        .map_err(|e| Error::Resource(e.to_string()))?;
    for i in 0..histogram.nc_counts.len() {
        writer
            .write_record([
                histogram.bin_edges[i].to_string(),
                histogram.bin_edges[i + 1].to_string(),
                histogram.nc_counts[i].to_string(),
                histogram.corrected_counts[i].to_string(),
            ])
            .map_err(|e| Error::Resource(e.to_string()))?;
    }
    writer.flush().map_err(|e| Error::Resource(e.to_string()))
}
