use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use toricres::driver::{parse_field, run, Adversary, Command, DriverError, Overrides, RunOptions};
use toricres::newton::Field;

#[derive(Parser)]
#[command(name = "toricres", about = "Toric resolution steps for hypersurface singularities")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// Field: Q or Fp:<p>
    #[arg(long, global = true, value_parser = parse_field)]
    field: Option<Field>,
    /// Name of the distinguished variable
    #[arg(long, global = true)]
    z: Option<String>,
    /// Truncation order O for power series
    #[arg(long, global = true)]
    trunc: Option<u32>,
    /// Comma-separated nonzero sample values for chart points
    #[arg(long, global = true, allow_hyphen_values = true)]
    values: Option<String>,
    #[arg(long, global = true, value_enum, default_value_t = Adv::Exhaustive)]
    adversary: Adv,
    #[arg(long, global = true, default_value_t = 10)]
    max_steps: usize,
    /// Write the report here instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Adv {
    Exhaustive,
    Worst,
}

#[derive(Subcommand)]
enum Cmd {
    /// Newton polyhedron vertices and compact faces
    Np { input: PathBuf },
    /// Normal fan of the Newton polyhedron
    Fan { input: PathBuf },
    /// Upward subdivision trace and resulting fan
    Usd { input: PathBuf },
    /// Weierstrass type, simplicity, removable faces and invariants
    Check { input: PathBuf },
    /// One resolution step with per-point certificate checks
    Step { input: PathBuf },
    /// Resolution game against the adversary
    Game { input: PathBuf },
    /// Fan text of the subdivided fan, or canonical form of a FAN block
    ExportFan { input: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (cmd, input) = match cli.command {
        Cmd::Np { input } => (Command::Np, input),
        Cmd::Fan { input } => (Command::Fan, input),
        Cmd::Usd { input } => (Command::Usd, input),
        Cmd::Check { input } => (Command::Check, input),
        Cmd::Step { input } => (Command::Step, input),
        Cmd::Game { input } => (Command::Game, input),
        Cmd::ExportFan { input } => (Command::ExportFan, input),
    };
    let opts = RunOptions {
        overrides: Overrides { field: cli.field, z: cli.z, order: cli.trunc, values: cli.values },
        adversary: match cli.adversary {
            Adv::Exhaustive => Adversary::Exhaustive,
            Adv::Worst => Adversary::Worst,
        },
        max_steps: cli.max_steps,
    };
    let result = std::fs::read_to_string(&input)
        .map_err(|e| DriverError::Io(format!("{}: {e}", input.display())))
        .and_then(|text| run(cmd, &text, &opts))
        .and_then(|report| {
            match &cli.out {
                Some(path) => std::fs::write(path, &report.text)
                    .map_err(|e| DriverError::Io(format!("{}: {e}", path.display())))?,
                None => print!("{}", report.text),
            }
            report.status
        });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
