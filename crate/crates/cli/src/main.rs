//! `ifalg`: controller-only control and measurement analysis from the command line.
//!
//! Exit codes: 0 success or true verdict, 1 false verdict, 2 usage or input error.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ifalg::selftest::RunConfig;
use ifalg::tolerance::DEFAULT_DIMENSION_CAP;
use ifalg::Tolerances;

#[derive(Parser, Debug)]
#[command(name = "ifalg", version, about = "Interface algebras, control synthesis and CQND measurements")]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct GlobalOpts {
    /// Relative Gram-Schmidt threshold for new directions.
    #[arg(long, global = true, env = "IFALG_RANK_TOL", default_value_t = 1e-9)]
    rank_tol: f64,
    /// Relative residual below which an operator counts as a member of a span.
    #[arg(long, global = true, env = "IFALG_MEMBERSHIP_TOL", default_value_t = 1e-8)]
    membership_tol: f64,
    /// Largest joint dimension for brute-force closures.
    #[arg(long, global = true, default_value_t = DEFAULT_DIMENSION_CAP)]
    cap: usize,
    /// Seed for randomized checks; recorded in every output.
    #[arg(long, global = true, env = "IFALG_SEED", default_value_t = 2024)]
    seed: u64,
    /// Write JSON here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(short, long, global = true)]
    verbose: bool,
}

impl GlobalOpts {
    fn config(&self, slow: bool) -> RunConfig {
        RunConfig {
            tolerances: Tolerances::with_rank(self.rank_tol, self.membership_tol),
            cap: self.cap,
            seed: self.seed,
            slow,
            verbose: self.verbose,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Operator-Schmidt decomposition into interaction terms and local parts.
    Decompose {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        dim_c: Option<usize>,
        #[arg(long)]
        dim_s: Option<usize>,
    },
    /// Lie closure or unital *-algebra closure of a list of generators.
    Closure {
        #[arg(long, value_enum)]
        kind: ClosureKind,
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Interface algebra: structural formula and optional brute-force closure.
    Interface {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        brute_force: bool,
        #[arg(long)]
        dim_c: Option<usize>,
        #[arg(long)]
        dim_s: Option<usize>,
    },
    /// Whether controller operations alone give universal control of the system.
    CheckControl {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        dim_c: Option<usize>,
        #[arg(long)]
        dim_s: Option<usize>,
    },
    /// Whether an observable is CQND-measurable (equivalently, implementable).
    CheckMeasure {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        observable: PathBuf,
        #[arg(long)]
        dim_c: Option<usize>,
        #[arg(long)]
        dim_s: Option<usize>,
        /// Also write the pointer measurement scheme for a measurable observable.
        #[arg(long)]
        scheme_out: Option<PathBuf>,
    },
    /// Build a control procedure or product-formula evolution.
    Synthesize {
        #[arg(long, value_enum)]
        kind: SynthesisKind,
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Run a measurement scheme on a system state.
    SimulateMeasurement {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        state: PathBuf,
    },
    /// Composite measurement scheme for a + b, i[a, b] or ab + ba.
    Compose {
        #[arg(long, value_enum)]
        op: ComposeOp,
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long, default_value_t = 32)]
        m: u64,
    },
    /// Chain hypotheses and controllability from the first `cut` sites.
    ChainCheck {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        cut: usize,
        /// Allow closures whose target exceeds su(16).
        #[arg(long)]
        slow: bool,
    },
    /// Run the acceptance suite.
    Selftest {
        /// Include the 3-qutrit chain closure.
        #[arg(long)]
        slow: bool,
        /// Run only these criteria.
        #[arg(long, value_delimiter = ',')]
        only: Vec<usize>,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ClosureKind {
    Lie,
    Star,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum SynthesisKind {
    Invert,
    Trotter,
    Commutator,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ComposeOp {
    Sum,
    Commutator,
    Jordan,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::dispatch(&cli) {
        Ok(commands::Verdict::Success) | Ok(commands::Verdict::Holds(true)) => ExitCode::SUCCESS,
        Ok(commands::Verdict::Holds(false)) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
