use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use qsdp_cli::commands::{run_gamma_probe, run_gen, run_solve, run_sweep, SolveFlags};
use qsdp_cli::exit_codes;

/// Dual solver for convexly regularized semidefinite programs with trace
/// constraints: generate benchmark instances, maximize the dual, sweep the
/// regularization strength, and probe the zero-temperature limit.
#[derive(Parser)]
#[command(name = "qsdp", version, about)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a problem file from an instance spec or family parameters
    Gen {
        /// Instance spec JSON file ({family, params, seed})
        #[arg(long, conflicts_with = "family")]
        spec: Option<PathBuf>,
        /// Family tag: qt1, qt2, qt3, qwd, im, counterexample, custom
        #[arg(long, requires = "params")]
        family: Option<String>,
        /// Family parameters as a JSON object, or @file
        #[arg(long)]
        params: Option<String>,
        /// Seed for families that draw random observables
        #[arg(long)]
        seed: Option<u64>,
        /// Output problem file
        #[arg(long)]
        out: PathBuf,
    },
    /// Maximize the dual of a problem or spec file and recover the state
    Solve {
        /// Problem file or instance spec
        input: PathBuf,
        #[command(flatten)]
        flags: FlagArgs,
    },
    /// Solve along a strictly descending epsilon ladder with warm starts
    Sweep {
        input: PathBuf,
        /// Comma-separated strictly descending epsilons, e.g. 1e1,1,1e-1
        #[arg(long, value_delimiter = ',', required = true)]
        eps_ladder: Vec<f64>,
        /// Parallel independent rungs (disables warm starting when > 1);
        /// capped by QSDP_THREADS
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[command(flatten)]
        flags: FlagArgs,
    },
    /// Sample eps * Tr[psi(W/eps)] for a Hermitian matrix file
    GammaProbe {
        /// Matrix JSON file ({dim, re, im})
        matrix: PathBuf,
        #[arg(long, default_value = "vn")]
        reg: String,
        #[arg(long, value_delimiter = ',', required = true)]
        eps_ladder: Vec<f64>,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
    },
}

#[derive(clap::Args)]
struct FlagArgs {
    /// Regularizer: vn, vn-shifted, quad
    #[arg(long, default_value = "vn")]
    reg: String,
    /// Override the instance epsilon
    #[arg(long)]
    eps: Option<f64>,
    /// Gradient-norm convergence threshold
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long, default_value_t = 10_000)]
    max_iters: usize,
    /// Curvature pairs kept by the two-loop recursion
    #[arg(long, default_value_t = 10)]
    memory: usize,
    /// Sup-norm bound marking an escaping iterate as diverged
    #[arg(long, default_value_t = 1e8)]
    divergence_norm: f64,
    /// Seed for spec inputs that draw random observables
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
}

impl FlagArgs {
    fn into_flags(self) -> SolveFlags {
        SolveFlags {
            reg: self.reg,
            eps: self.eps,
            tol: self.tol,
            max_iters: self.max_iters,
            memory: self.memory,
            divergence_norm: self.divergence_norm,
            seed: self.seed,
            out_dir: self.out_dir,
        }
    }
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = Cli::parse();
    let result = match cli.cmd {
        Cmd::Gen {
            spec,
            family,
            params,
            seed,
            out,
        } => run_gen(
            spec.as_deref(),
            family.as_deref(),
            params.as_deref(),
            seed,
            &out,
        ),
        Cmd::Solve { input, flags } => run_solve(&input, &flags.into_flags(), argv),
        Cmd::Sweep {
            input,
            eps_ladder,
            jobs,
            flags,
        } => run_sweep(&input, &eps_ladder, jobs, &flags.into_flags(), argv),
        Cmd::GammaProbe {
            matrix,
            reg,
            eps_ladder,
            out_dir,
        } => run_gamma_probe(&matrix, &reg, &eps_ladder, &out_dir, argv),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_codes::INPUT_ERROR as u8)
        }
    }
}
