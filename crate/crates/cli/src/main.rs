use ccqme_cli::config::{self, Method, Scenario};
use ccqme_cli::presets::PRESETS;
use ccqme_cli::{execute, ExecOptions};
use ccqme_core::NLevelSystem;
use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "ccqme", version, about = "Redfield, CCQME and HEOM dynamics of N-level systems in a Drude bath")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Run configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides `[output] dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for the (method, gamma) jobs.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Leave the timestamp out of the summary so repeated runs are byte-identical.
    #[arg(long, global = true)]
    seedless: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured scenario.
    Run,
    /// Check the configuration and list every problem.
    Validate,
    /// List built-in systems, potentials, presets, scenarios and methods.
    ListBuiltins,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match cli.command {
        Command::ListBuiltins => {
            println!("systems: {}", NLevelSystem::builtin_names().join(", "));
            println!("potentials: surrogate-taa, harmonic (or a two-column q,V file)");
            for p in PRESETS {
                println!("preset {}: {}", p.name, p.description);
            }
            println!("scenarios: {}", Scenario::ALL.map(|(n, _)| n).join(", "));
            println!("methods: {}", Method::ALL.map(Method::name).join(", "));
            ExitCode::SUCCESS
        }
        Command::Validate | Command::Run => {
            let Some(path) = cli.config.as_ref() else {
                eprintln!("error: --config PATH is required");
                return ExitCode::from(2);
            };
            let plan = match config::load(path).and_then(|raw| config::resolve(&raw)) {
                Ok(plan) => plan,
                Err(diags) => {
                    for d in &diags {
                        eprintln!("{d}");
                    }
                    eprintln!("{} problem(s) in {}", diags.len(), path.display());
                    return ExitCode::from(2);
                }
            };
            if matches!(cli.command, Command::Validate) {
                println!("{}: ok", path.display());
                return ExitCode::SUCCESS;
            }
            let out = cli.out.or_else(|| plan.output_dir.clone()).unwrap_or_else(|| PathBuf::from("out"));
            let opts = ExecOptions {
                threads: cli.threads,
                seedless: cli.seedless,
            };
            match execute(&plan, &out, &opts) {
                Ok(result) => {
                    for w in &result.summary.warnings {
                        eprintln!("warning: {w}");
                    }
                    println!("wrote {} files to {}", result.files.len(), out.display());
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::FAILURE
                }
            }
        }
    }
}
