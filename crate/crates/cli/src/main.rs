use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use vpl_cli::checks::{run_criterion, Level};
use vpl_cli::convergence::{convergence, Parameter};
use vpl_cli::run::{default_out_dir, run, MapFormat};
use vpl_cli::scenario::{builtin_names, builtin_toml};
use vpl_cli::{init_workers, CliError, Result, Scenario};

#[derive(Parser)]
#[command(name = "vpl", version, about = "Twisted electron packets under first-order perturbations")]
struct Cli {
    /// Worker threads for map evaluation (default: available parallelism).
    #[arg(long, global = true, env = "VPL_WORKERS")]
    workers: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Overrides the scenario's quadrature rel_tol.
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a scenario (builtin name or TOML file) and write its artifacts.
    Run {
        scenario: String,
        #[arg(long, value_enum, default_value_t = MapFormat::Csv)]
        format: MapFormat,
    },
    /// Run the invariant and oracle suites.
    Validate {
        #[arg(value_enum)]
        level: Level,
    },
    /// Tabulate probe values while one numerical parameter is tightened.
    Convergence {
        scenario: String,
        #[arg(long, value_enum)]
        parameter: Parameter,
        /// Comma-separated values (default depends on the parameter).
        #[arg(long, value_delimiter = ',')]
        ladder: Option<Vec<f64>>,
    },
    /// List builtin scenarios, or print one as TOML.
    ListScenarios {
        #[arg(long)]
        show: Option<String>,
    },
}

fn write_report<T: serde::Serialize>(cli: &Cli, name: &str, value: &T) -> Result<()> {
    if let Some(dir) = &cli.out {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join(name), serde_json::to_string_pretty(value)? + "\n")?;
    }
    Ok(())
}

fn execute(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Run { scenario, format } => {
            init_workers(cli.workers)?;
            let out = cli.out.clone().unwrap_or_else(|| default_out_dir(scenario));
            let manifest = run(scenario, cli.tol, *format, &out)?;
            for a in &manifest.artifacts {
                println!("wrote {}", out.join(&a.path).display());
            }
            println!("{}", serde_json::to_string_pretty(&manifest.summary)?);
            Ok(())
        }
        Command::Validate { level } => {
            init_workers(cli.workers)?;
            let mut reports = Vec::new();
            for id in level.criteria() {
                let report = run_criterion(id);
                println!("{}", report.render());
                reports.push(report);
            }
            write_report(cli, "validate.json", &reports)?;
            let failed: Vec<String> = reports.iter().filter(|r| !r.passed()).map(|r| r.id.to_string()).collect();
            if failed.is_empty() {
                println!("all {} criteria passed", reports.len());
                Ok(())
            } else {
                Err(CliError::Validation(format!("criteria {} failed", failed.join(", "))))
            }
        }
        Command::Convergence {
            scenario,
            parameter,
            ladder,
        } => {
            init_workers(cli.workers)?;
            let mut s = Scenario::load(scenario)?;
            if let Some(tol) = cli.tol {
                s.model.quadrature.rel_tol = tol;
            }
            let ladder = ladder.clone().unwrap_or_else(|| parameter.default_ladder());
            let table = convergence(&s, *parameter, &ladder)?;
            print!("{}", table.render());
            write_report(cli, "convergence.json", &table)?;
            if table.passed {
                Ok(())
            } else {
                Err(CliError::Validation(format!("{:?} ladder flagged: {}", parameter, table.criterion)))
            }
        }
        Command::ListScenarios { show } => {
            match show {
                Some(name) => match builtin_toml(name) {
                    Some(text) => print!("{text}"),
                    None => return Err(CliError::Config(format!("no builtin scenario named '{name}'"))),
                },
                None => builtin_names().iter().for_each(|n| println!("{n}")),
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("vpl: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
