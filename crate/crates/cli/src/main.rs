use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use flycheck::output::{render, Format};
use flycheck::{
    generate_herman, generate_philosophers, parse_constants, run, EngineKind, PropertySource,
    RunConfig,
};
use flycheck_core::ConvergenceScope;

#[derive(Parser)]
#[command(name = "flycheck", version, about = "On-the-fly PCTL model checking for DTMCs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check properties of a PRISM model.
    Check(CheckArgs),
    /// Print Herman's self-stabilising ring with N processes.
    GenHerman { n: u32 },
    /// Print the randomized dining philosophers with N seats.
    GenPhilosophers { n: u32 },
}

#[derive(Clone, Copy, ValueEnum)]
enum EngineArg {
    Onthefly,
    Global,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Text,
    Jsonl,
}

#[derive(clap::Args)]
struct CheckArgs {
    model: PathBuf,
    /// Property file, one property per line.
    #[arg(long, conflicts_with = "prop", required_unless_present = "prop")]
    props: Option<PathBuf>,
    /// A single property.
    #[arg(long)]
    prop: Option<String>,
    /// Constant values, `name=value,...` (also accepted as `-const`).
    #[arg(long = "const", value_name = "N=V,...")]
    constants: Vec<String>,
    #[arg(long, default_value_t = 1e-6)]
    epsilon: f64,
    #[arg(long, value_enum, default_value = "onthefly")]
    engine: EngineArg,
    /// Stop unbounded until once the initial state has converged.
    #[arg(long)]
    converge_initial_only: bool,
    #[arg(long, default_value_t = 10_000_000)]
    state_cap: usize,
    /// Widen threshold comparisons by this much.
    #[arg(long, default_value_t = 0.0)]
    bound_tolerance: f64,
    /// Print engine counters for every property.
    #[arg(long)]
    stats: bool,
    #[arg(long, value_enum, default_value = "text")]
    format: FormatArg,
    /// Exit 0 even when a property is false.
    #[arg(long)]
    allow_false: bool,
    /// Check up to this many properties in parallel.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

fn main() -> ExitCode {
    // PRISM spells the option with a single dash
    let args = std::env::args().map(|a| if a == "-const" { "--const".into() } else { a });
    let cli = Cli::parse_from(args);
    match cli.command {
        Command::GenHerman { n } => emit(generate_herman(n)),
        Command::GenPhilosophers { n } => emit(generate_philosophers(n)),
        Command::Check(args) => check(args),
    }
}

fn emit<E: std::fmt::Display>(text: Result<String, E>) -> ExitCode {
    match text {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn check(args: CheckArgs) -> ExitCode {
    let properties = match (args.props, args.prop) {
        (Some(path), _) => PropertySource::File(path),
        (None, Some(text)) => PropertySource::Inline(text),
        (None, None) => unreachable!("clap requires one of them"),
    };
    let mut config = RunConfig::new(args.model, properties);
    for c in &args.constants {
        match parse_constants(c) {
            Ok(map) => config.constants.extend(map),
            Err(e) => {
                eprintln!("error: -const: {e}");
                return ExitCode::from(2);
            }
        }
    }
    config.epsilon = args.epsilon;
    config.engine = match args.engine {
        EngineArg::Onthefly => EngineKind::OnTheFly,
        EngineArg::Global => EngineKind::Global,
    };
    if args.converge_initial_only {
        config.convergence = ConvergenceScope::InitialOnly;
    }
    config.state_cap = args.state_cap;
    config.bound_tolerance = args.bound_tolerance;
    config.fail_on_false = !args.allow_false;
    config.jobs = args.jobs;
    let format = match args.format {
        FormatArg::Text => Format::Text,
        FormatArg::Jsonl => Format::JsonLines,
    };

    let report = match run(&config) {
        Ok(report) => report,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    for r in &report.properties {
        println!("{}", render(r, format, args.stats));
    }
    ExitCode::from(report.exit_code(config.fail_on_false) as u8)
}
