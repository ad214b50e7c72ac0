use std::path::PathBuf;
use std::process;

use clap::{Parser, Subcommand};

use lpevol::cli::{run, Command, RunOptions, RunSpec, EXIT_SPEC};

#[derive(Parser)]
#[command(name = "lpevol", version, about = "Evolution of L^p controls on matrix Lie groups")]
struct Args {
    #[command(subcommand)]
    cmd: Cmd,

    /// Run specification (JSON or TOML).
    #[arg(long, global = true)]
    spec: Option<PathBuf>,

    /// Output directory, overriding the spec.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Omit wall-clock fields from the report.
    #[arg(long, global = true)]
    deterministic: bool,

    /// Seed for randomised checks, overriding the spec.
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[arg(short, long, global = true)]
    verbose: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// Seminorms and inclusion table of the control.
    Norm,
    /// Integrate the control and write the trajectory.
    Evolve,
    /// Run the invariant suite.
    Check,
    /// Residual against subdivision count.
    Convergence,
}

fn main() {
    let args = Args::parse();
    let level = if args.verbose { "debug" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    let Some(path) = args.spec else {
        eprintln!("error: --spec is required");
        process::exit(EXIT_SPEC);
    };
    let spec = match RunSpec::load(&path) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            process::exit(EXIT_SPEC);
        }
    };
    let cmd = match args.cmd {
        Cmd::Norm => Command::Norm,
        Cmd::Evolve => Command::Evolve,
        Cmd::Check => Command::Check,
        Cmd::Convergence => Command::Convergence,
    };
    let opts = RunOptions {
        out_dir: args.out,
        deterministic: args.deterministic,
        seed: args.seed,
        base_dir: path.parent().map(PathBuf::from),
    };
    let outcome = run(cmd, &spec, &opts);
    println!("{}", serde_json::to_string_pretty(&outcome.report).expect("report serialises"));
    process::exit(outcome.exit_code);
}
