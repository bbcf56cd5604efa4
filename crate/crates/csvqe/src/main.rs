use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use csvqe::error::Result;
use csvqe::harness::{
    self, BenchOpts, HeuristicKind, RunReport, SolveOpts, SweepOpts, CHEMICAL_ACCURACY,
};
use csvqe::heuristics::WeightKind;

#[derive(Parser)]
#[command(
    name = "csvqe",
    about = "Contextual-subspace decomposition and solving of Pauli Hamiltonians",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct OutputFlags {
    /// Print the full run report as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Partition a Hamiltonian's terms into noncontextual and contextual sets.
    Decompose {
        file: PathBuf,
        #[command(flatten)]
        output: OutputFlags,
    },
    /// Find the noncontextual ground state of the classical model.
    Ground {
        file: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        output: OutputFlags,
    },
    /// Run the full pipeline and report the corrected energy.
    Solve {
        file: PathBuf,
        /// Quantum-qubit budget; the retained set is chosen by the heuristic.
        #[arg(long, conflicts_with = "retain")]
        qubits: Option<usize>,
        /// Comma-separated retained generator indices, overriding --qubits.
        #[arg(long, value_delimiter = ',')]
        retain: Option<Vec<usize>>,
        #[arg(long, default_value = "optimal", value_parser = parse_heuristic)]
        heuristic: HeuristicKind,
        /// Report the noncontextual energy alone, without any correction.
        #[arg(long)]
        no_correction: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 14)]
        dense_limit: usize,
        #[command(flatten)]
        output: OutputFlags,
    },
    /// Produce an energy-vs-qubits curve with one of the removal heuristics.
    Sweep {
        file: PathBuf,
        #[arg(long, default_value = "greedy-pair", value_parser = parse_heuristic)]
        heuristic: HeuristicKind,
        /// Accuracy threshold for marking the first converged size.
        #[arg(long, default_value_t = CHEMICAL_ACCURACY)]
        threshold: f64,
        /// Weight definition for the weight heuristic.
        #[arg(long, default_value = "coefficient-sum")]
        weight_kind: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 14)]
        dense_limit: usize,
        /// Write the records as CSV to this path.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[command(flatten)]
        output: OutputFlags,
    },
    /// Random-coefficient ensemble on the bundled 3-qubit skeleton.
    RandomBench {
        #[arg(long, default_value_t = 10_000)]
        count: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Number of uniform histogram bins on [0, max error].
        #[arg(long, default_value_t = 50)]
        bins: usize,
        /// Write the histogram as CSV to this path.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[command(flatten)]
        output: OutputFlags,
    },
}

fn parse_heuristic(s: &str) -> std::result::Result<HeuristicKind, String> {
    s.parse::<HeuristicKind>().map_err(|e| e.to_string())
}

fn emit(report: &RunReport, json: bool) -> Result<()> {
    if json {
        println!(
            "{}",
            serde_json::to_string_pretty(report)
                .map_err(|e| csvqe::Error::Invariant(e.to_string()))?
        );
    } else {
        println!("command: {}", report.command);
        println!(
            "{}",
            serde_json::to_string_pretty(&report.results)
                .map_err(|e| csvqe::Error::Invariant(e.to_string()))?
        );
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Decompose { file, output } => {
            let h = harness::load_hamiltonian(&file)?;
            let report = harness::run_decompose(&h)?;
            emit(&report, output.json)
        }
        Command::Ground { file, seed, output } => {
            let h = harness::load_hamiltonian(&file)?;
            let report = harness::run_ground(&h, seed)?;
            emit(&report, output.json)
        }
        Command::Solve {
            file,
            qubits,
            retain,
            heuristic,
            no_correction,
            seed,
            dense_limit,
            output,
        } => {
            let h = harness::load_hamiltonian(&file)?;
            let opts = SolveOpts {
                qubits,
                retain,
                heuristic,
                no_correction,
                seed,
                dense_limit,
            };
            let report = harness::run_solve(&h, &opts)?;
            emit(&report, output.json)
        }
        Command::Sweep {
            file,
            heuristic,
            threshold,
            weight_kind,
            seed,
            dense_limit,
            csv,
            output,
        } => {
            let h = harness::load_hamiltonian(&file)?;
            let weight_kind = match weight_kind.as_str() {
                "coefficient-sum" => WeightKind::CoefficientSum,
                "term-count" => WeightKind::TermCount,
                other => {
                    return Err(csvqe::Error::Parse(format!(
                        "unknown weight kind '{other}' (expected coefficient-sum or term-count)"
                    )))
                }
            };
            let opts = SweepOpts {
                heuristic,
                threshold,
                weight_kind,
                seed,
                dense_limit,
            };
            let (report, records) = harness::run_sweep(&h, &opts)?;
            if let Some(path) = csv {
                harness::write_sweep_csv(&path, &records)?;
            }
            emit(&report, output.json)
        }
        Command::RandomBench {
            count,
            seed,
            bins,
            csv,
            output,
        } => {
            let opts = BenchOpts { count, seed, bins };
            let (report, histogram) = harness::run_random_bench(&opts)?;
            if let Some(path) = csv {
                harness::write_bench_csv(&path, &histogram)?;
            }
            emit(&report, output.json)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
