//! Command-line interface to the deterministic two-phase Grover search.
//!
//! Machine-readable JSON goes to standard output; diagnostics go to standard
//! error. Exit codes: 0 success, 2 validation error, 3 solver
//! non-convergence, 4 I/O error. All angles are radians.

use std::f64::consts::PI;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use d2p_core::circuit::{build_d2p, lower_all, to_qasm};
use d2p_core::sim::{run, SearchSpec, StateVector};
use d2p_core::solver::{k_opt, solve, PhaseSchedule};
use d2p_core::subspace::trajectory;
use d2p_core::sweep::{
    alpha_grid, export_records, export_trajectory, log_spaced_lambda_grid, sweep_alpha,
    sweep_lambda, ExportFormat,
};
use d2p_core::Error;

#[derive(Parser)]
#[command(
    name = "d2p",
    version,
    about = "Deterministic two-phase Grover search: solve diffusion phases, simulate circuits, sweep parameters"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

impl From<Format> for ExportFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => ExportFormat::Csv,
            Format::Json => ExportFormat::Json,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Solve the two diffusion phases for a marked fraction.
    Solve {
        /// Marked fraction M/N, in (0, 1/4].
        #[arg(long)]
        lambda: f64,
        /// Query count; defaults to k_opt(lambda).
        #[arg(long)]
        k: Option<u32>,
        /// Oracle phase in radians.
        #[arg(long, default_value_t = PI)]
        alpha: f64,
    },
    /// Build the search circuit for a marked set, run it, report probabilities.
    Simulate {
        /// Register size in qubits.
        #[arg(long)]
        n: usize,
        /// Marked basis-state indices, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        marked: Vec<usize>,
        /// Query count; defaults to k_opt of the instance.
        #[arg(long)]
        k: Option<u32>,
        /// Oracle phase in radians.
        #[arg(long, default_value_t = PI)]
        alpha: f64,
        /// Lower multi-controlled phase gates before running.
        #[arg(long)]
        lowered: bool,
    },
    /// Sweep the marked fraction and write a table of solved schedules.
    SweepLambda {
        /// Number of log-spaced grid points in [2^-16, 1/4].
        #[arg(long, default_value_t = 200)]
        points: usize,
        /// Oracle phase in radians.
        #[arg(long, default_value_t = PI)]
        alpha: f64,
        /// Output file path.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Sweep the oracle phase at fixed lambda, solving at the smallest
    /// feasible query count per point.
    SweepAlpha {
        /// Marked fraction M/N, in (0, 1/4].
        #[arg(long)]
        lambda: f64,
        /// Number of grid points inside (0, 2 pi).
        #[arg(long, default_value_t = 721)]
        points: usize,
        /// Largest query count to try per point; defaults to 8 * k_opt.
        #[arg(long)]
        k_cap: Option<u32>,
        /// Output file path.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Solve a schedule and write its Bloch-sphere trajectory.
    Trajectory {
        /// Marked fraction M/N, in (0, 1/4].
        #[arg(long)]
        lambda: f64,
        /// Query count; defaults to k_opt(lambda).
        #[arg(long)]
        k: Option<u32>,
        /// Oracle phase in radians.
        #[arg(long, default_value_t = PI)]
        alpha: f64,
        /// Output file path.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Build the search circuit and write it as OpenQASM 3.0 text.
    EmitQasm {
        /// Register size in qubits.
        #[arg(long)]
        n: usize,
        /// Marked basis-state indices, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        marked: Vec<usize>,
        /// Query count; defaults to k_opt of the instance.
        #[arg(long)]
        k: Option<u32>,
        /// Oracle phase in radians.
        #[arg(long, default_value_t = PI)]
        alpha: f64,
        /// Lower multi-controlled phase gates before emitting.
        #[arg(long)]
        lowered: bool,
        /// Output file path.
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Serialize)]
struct MarkedProbability {
    index: usize,
    probability: f64,
}

#[derive(Serialize)]
struct SimulateOutput<'a> {
    n_qubits: usize,
    marked: &'a [usize],
    lambda: f64,
    schedule: PhaseSchedule,
    lowered: bool,
    gate_count: usize,
    success: f64,
    marked_probabilities: Vec<MarkedProbability>,
}

#[derive(Serialize)]
struct FileOutput<'a> {
    path: &'a std::path::Path,
    records: usize,
    solved: usize,
}

#[derive(Serialize)]
struct TrajectoryOutput<'a> {
    path: &'a std::path::Path,
    schedule: PhaseSchedule,
    points: usize,
}

#[derive(Serialize)]
struct QasmOutput<'a> {
    path: &'a std::path::Path,
    n_qubits: usize,
    lowered: bool,
    gate_count: usize,
    schedule: PhaseSchedule,
}

fn print_json<T: Serialize>(value: &T) {
    println!(
        "{}",
        serde_json::to_string_pretty(value).expect("serializable output")
    );
}

fn schedule_for(lambda: f64, k: Option<u32>, alpha: f64) -> Result<PhaseSchedule, Error> {
    let k = match k {
        Some(k) => k,
        None => k_opt(lambda)?,
    };
    solve(lambda, k, alpha)
}

fn execute(command: Command) -> Result<(), Error> {
    match command {
        Command::Solve { lambda, k, alpha } => {
            let schedule = schedule_for(lambda, k, alpha)?;
            print_json(&schedule);
        }
        Command::Simulate {
            n,
            marked,
            k,
            alpha,
            lowered,
        } => {
            let spec = SearchSpec::new(n, marked)?;
            let schedule = schedule_for(spec.lambda(), k, alpha)?;
            let mut circuit = build_d2p(&spec, &schedule)?;
            if lowered {
                circuit = lower_all(&circuit);
            }
            let out = run(&circuit, &StateVector::zero_state(n)?)?;
            let marked_probabilities = spec
                .marked()
                .iter()
                .map(|&index| MarkedProbability {
                    index,
                    probability: out.amplitude(index).norm_sqr(),
                })
                .collect();
            print_json(&SimulateOutput {
                n_qubits: n,
                marked: spec.marked(),
                lambda: spec.lambda(),
                schedule,
                lowered,
                gate_count: circuit.len(),
                success: out.success_probability(spec.marked()),
                marked_probabilities,
            });
        }
        Command::SweepLambda {
            points,
            alpha,
            out,
            format,
        } => {
            let grid = log_spaced_lambda_grid(points);
            let records = sweep_lambda(&grid, alpha);
            export_records(&records, format.into(), &out)?;
            let solved = records.iter().filter(|r| r.status == "ok").count();
            print_json(&FileOutput {
                path: &out,
                records: records.len(),
                solved,
            });
        }
        Command::SweepAlpha {
            lambda,
            points,
            k_cap,
            out,
            format,
        } => {
            let cap = match k_cap {
                Some(c) => c,
                None => 8 * k_opt(lambda)?,
            };
            let records = sweep_alpha(lambda, &alpha_grid(points), cap)?;
            export_records(&records, format.into(), &out)?;
            let solved = records.iter().filter(|r| r.status == "ok").count();
            print_json(&FileOutput {
                path: &out,
                records: records.len(),
                solved,
            });
        }
        Command::Trajectory {
            lambda,
            k,
            alpha,
            out,
            format,
        } => {
            let schedule = schedule_for(lambda, k, alpha)?;
            let points = trajectory(
                schedule.lambda,
                schedule.alpha,
                schedule.theta1,
                schedule.theta2,
                schedule.k,
            )?;
            export_trajectory(&points, format.into(), &out)?;
            print_json(&TrajectoryOutput {
                path: &out,
                schedule,
                points: points.len(),
            });
        }
        Command::EmitQasm {
            n,
            marked,
            k,
            alpha,
            lowered,
            out,
        } => {
            let spec = SearchSpec::new(n, marked)?;
            let schedule = schedule_for(spec.lambda(), k, alpha)?;
            let mut circuit = build_d2p(&spec, &schedule)?;
            if lowered {
                circuit = lower_all(&circuit);
            }
            let text = to_qasm(&circuit);
            std::fs::write(&out, &text).map_err(|e| Error::Io {
                path: out.clone(),
                source: e,
            })?;
            print_json(&QasmOutput {
                path: &out,
                n_qubits: n,
                lowered,
                gate_count: circuit.len(),
                schedule,
            });
        }
    }
    Ok(())
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::NoConvergence { .. } => 3,
        Error::Io { .. } => 4,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
