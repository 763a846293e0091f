use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use transit_core::coordination::{FastVariant, Topology};
use transit_core::{io, Error, StableVariant};

mod commands;

#[derive(Parser)]
#[command(
    name = "transit",
    version,
    about = "Transition sets, their prices and the bounds on them"
)]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,
    /// Use floating-point payoffs instead of exact rationals.
    #[arg(long, global = true)]
    float: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args, Clone)]
pub struct SolutionArgs {
    /// Pure Nash equilibria (the default).
    #[arg(long, conflicts_with_all = ["eps", "solutions"])]
    pub ne: bool,
    /// Pure eps-Nash equilibria.
    #[arg(long)]
    pub eps: Option<String>,
    /// Explicit solution set file.
    #[arg(long, conflicts_with = "eps")]
    pub solutions: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Prices of anarchy and stability over solutions, transitions and stable transitions.
    Prices {
        input: PathBuf,
        #[command(flatten)]
        sol: SolutionArgs,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long, default_value = "strict")]
        stable: StableVariant,
    },
    /// Check the welfare and per-player dependence bounds on the prices.
    Bounds {
        input: PathBuf,
        #[command(flatten)]
        sol: SolutionArgs,
    },
    /// Transition degrees and the saturation degree of a solution set.
    Degree {
        game: PathBuf,
        solutions: PathBuf,
        /// Profile as comma-separated strategies or a lexicographic index.
        #[arg(long, conflicts_with = "saturate")]
        profile: Option<String>,
        #[arg(long)]
        saturate: bool,
        #[arg(long)]
        greedy: bool,
    },
    /// Non-atomic routing analysis.
    Routing {
        #[command(subcommand)]
        action: RoutingAction,
    },
    /// Two-colour coordination games on graphs.
    Graph {
        #[command(subcommand)]
        action: GraphAction,
    },
    /// Run the checks of one structural result (1 polymatrix, 2 congestion,
    /// 3 routing stretch, 4 coordination bounds, 5 coordination constructions).
    Theorem {
        #[arg(value_parser = clap::value_parser!(u8).range(1..=5))]
        number: u8,
        input: PathBuf,
        #[command(flatten)]
        sol: SolutionArgs,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long, default_value = "strict")]
        stable: StableVariant,
        #[arg(long, default_value_t = transit_core::routing::solver::DEFAULT_TOLERANCE)]
        tol: f64,
    },
    /// Exhaustive analysis of a fixture name or input file.
    Oracle { target: String },
    /// List the fixture corpus, export it, or check exported files.
    Fixtures {
        #[arg(long, conflicts_with = "check")]
        export: Option<PathBuf>,
        #[arg(long)]
        check: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum RoutingAction {
    Analyze {
        input: PathBuf,
        #[arg(long, default_value_t = transit_core::routing::solver::DEFAULT_TOLERANCE)]
        tol: f64,
        #[arg(long)]
        m: Option<usize>,
    },
}

#[derive(Subcommand)]
enum GraphAction {
    /// Is a colouring a stable transition that is not an equilibrium?
    Check {
        input: PathBuf,
        /// Colours as "1 2 1 2", "1,2,1,2", a JSON array, or a file holding one.
        #[arg(long)]
        colouring: String,
        #[arg(long, default_value = "opposite-colour")]
        fast: FastVariant,
    },
    /// Build a stable transition that is not an equilibrium.
    Construct {
        input: PathBuf,
        #[arg(long)]
        topology: Option<Topology>,
    },
    /// Exhaustive posta and poa against their lower bounds.
    Bounds {
        input: PathBuf,
        #[arg(long, default_value = "strict")]
        stable: StableVariant,
    },
}

/// A report plus the asserted inequalities that failed.
pub struct Outcome {
    pub report: serde_json::Value,
    pub failures: Vec<String>,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parse(_) => 2,
        Error::EmptySolutionSet => 3,
        Error::UndefinedPrice { .. } => 4,
        _ => 5,
    }
}

fn run(cli: &Cli) -> Result<Outcome, Error> {
    let float = cli.float;
    match &cli.command {
        Command::Prices {
            input,
            sol,
            m,
            stable,
        } => commands::prices(input, sol, *m, *stable, float),
        Command::Bounds { input, sol } => commands::bounds(input, sol, float),
        Command::Degree {
            game,
            solutions,
            profile,
            saturate,
            greedy,
        } => commands::degree(
            game,
            solutions,
            profile.as_deref(),
            *saturate,
            *greedy,
            float,
        ),
        Command::Routing {
            action: RoutingAction::Analyze { input, tol, m },
        } => commands::routing(input, *tol, *m),
        Command::Graph { action } => match action {
            GraphAction::Check {
                input,
                colouring,
                fast,
            } => commands::graph_check(input, colouring, *fast),
            GraphAction::Construct { input, topology } => {
                commands::graph_construct(input, *topology)
            }
            GraphAction::Bounds { input, stable } => commands::graph_bounds(input, *stable),
        },
        Command::Theorem {
            number,
            input,
            sol,
            m,
            stable,
            tol,
        } => commands::theorem(*number, input, sol, *m, *stable, *tol, float),
        Command::Oracle { target } => commands::oracle(target),
        Command::Fixtures { export, check } => {
            commands::fixtures(export.as_deref(), check.as_deref())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(outcome) => {
            let text = match cli.format {
                Format::Json => Ok(io::render_json(&outcome.report)),
                Format::Csv => io::render_csv(&outcome.report),
            };
            match text {
                Ok(t) => print!("{t}"),
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(exit_code(&e));
                }
            }
            if outcome.failures.is_empty() {
                ExitCode::SUCCESS
            } else {
                for f in &outcome.failures {
                    eprintln!("ASSERTION FAILED: {f}");
                }
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
