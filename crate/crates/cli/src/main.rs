use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use asymcat_cli::commands::{self, ComposeArgs, GlobalOpts};

/// Coherence bookkeeping, convertibility verdicts, and channel checks
/// for finite-dimensional quantum systems with rational energy levels.
#[derive(Parser)]
#[command(name = "asymcat", version, propagate_version = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Numerical tolerance; defaults to 1e-9 (1e-7 for `feasible`),
    /// after any problem-file override.
    #[arg(long, global = true)]
    tol: Option<f64>,

    /// Inverse temperature; falls back to the problem file, then 1.
    #[arg(long, global = true)]
    beta: Option<f64>,

    /// Emit a machine-readable JSON document instead of text.
    #[arg(long, global = true)]
    structured: bool,

    /// Ignore unknown fields in problem files instead of rejecting them.
    #[arg(long, global = true)]
    lenient: bool,

    /// Reserved for randomized batch workflows; every command today is
    /// deterministic, so this changes nothing.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Reserved for parallel batch execution; commands run
    /// single-threaded regardless.
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    jobs: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Print a state's available coherences and reachable lattice.
    Coherences {
        /// Problem file (JSON).
        file: PathBuf,
        /// Name of the state in the file.
        state: String,
    },
    /// Decide catalytic convertibility between two states.
    ///
    /// Exit code 0 when convertible, 1 when forbidden, 3 when the
    /// implemented criteria cannot decide, 2 on error.
    Verdict {
        file: PathBuf,
        /// Input state name.
        rho: String,
        /// Target state name.
        sigma: String,
    },
    /// Check a channel for covariance and Gibbs preservation.
    CheckChannel {
        file: PathBuf,
        /// Name of the channel in the file.
        channel: String,
    },
    /// Search for a covariant channel mapping one state to another.
    ///
    /// Exit code 0 when feasible, 1 when infeasible, 3 when
    /// undetermined at the iteration budget, 2 on error.
    Feasible {
        file: PathBuf,
        /// Input state name.
        rho: String,
        /// Target state name.
        sigma: String,
        /// Iteration budget for the projection solver.
        #[arg(long)]
        max_iter: Option<usize>,
    },
    /// Compose two marginal-protocol parameter sets, or split a target
    /// error budget across two stages.
    ///
    /// Composition mode takes --eps1 --delta1 --n1 --m1 --eps2 --delta2
    /// --n2 --m2; budget mode takes --target-eps [--target-delta] --n2.
    /// Error and loss parameters are exact rationals such as 1/100 or
    /// 0.01.
    Compose {
        #[arg(long)]
        eps1: Option<String>,
        #[arg(long)]
        delta1: Option<String>,
        #[arg(long)]
        n1: Option<u64>,
        #[arg(long)]
        m1: Option<u64>,
        #[arg(long)]
        eps2: Option<String>,
        #[arg(long)]
        delta2: Option<String>,
        #[arg(long)]
        n2: Option<u64>,
        #[arg(long)]
        m2: Option<u64>,
        #[arg(long)]
        target_eps: Option<String>,
        #[arg(long)]
        target_delta: Option<String>,
    },
    /// Lower-bound the error forced on any catalytic protocol whose
    /// catalyst Hamiltonian is bounded in sup-norm.
    Obstruction {
        file: PathBuf,
        /// Input state name.
        rho: String,
        /// Target state name.
        sigma: String,
        /// Sup-norm bound on the catalyst Hamiltonian.
        #[arg(long)]
        m_bound: f64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let opts = GlobalOpts {
        tol: cli.tol,
        beta: cli.beta,
        lenient: cli.lenient,
    };
    let result = match &cli.command {
        Command::Coherences { file, state } => commands::cmd_coherences(file, state, &opts),
        Command::Verdict { file, rho, sigma } => commands::cmd_verdict(file, rho, sigma, &opts),
        Command::CheckChannel { file, channel } => {
            commands::cmd_check_channel(file, channel, &opts)
        }
        Command::Feasible {
            file,
            rho,
            sigma,
            max_iter,
        } => commands::cmd_feasible(file, rho, sigma, *max_iter, &opts),
        Command::Compose {
            eps1,
            delta1,
            n1,
            m1,
            eps2,
            delta2,
            n2,
            m2,
            target_eps,
            target_delta,
        } => commands::cmd_compose(&ComposeArgs {
            eps1: eps1.clone(),
            delta1: delta1.clone(),
            n1: *n1,
            m1: *m1,
            eps2: eps2.clone(),
            delta2: delta2.clone(),
            n2: *n2,
            m2: *m2,
            target_eps: target_eps.clone(),
            target_delta: target_delta.clone(),
        }),
        Command::Obstruction {
            file,
            rho,
            sigma,
            m_bound,
        } => commands::cmd_obstruction(file, rho, sigma, *m_bound, &opts),
    };
    match result {
        Ok(output) => {
            print!("{}", output.render(cli.structured));
            u8::try_from(output.exit_code())
                .map(ExitCode::from)
                .unwrap_or(ExitCode::FAILURE)
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
    }
}
