use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use optobath::cli::{parse_config_file, run, OutputFormat, Task};
use optobath::{Error, Fidelity};

#[derive(Parser)]
#[command(
    name = "optobath",
    version,
    about = "Optomechanical bath-engineering calculations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Position spectrum of one mode, its occupation and line fit.
    Spectrum(Args),
    /// Occupation of mode a along a cooperativity or detuning axis.
    Sweep(Args),
    /// Cooperativity that minimizes the occupation of mode a.
    Optimize(Args),
    /// Loss budget and coupling of a two-arm cantilever design.
    Design(Args),
    /// Thermal force noise on mode a.
    Sense(Args),
}

#[derive(clap::Args)]
struct Args {
    #[arg(long)]
    config: PathBuf,
    /// Directory for the table and summary.json; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long, value_enum)]
    fidelity: Option<FidelityArg>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum FidelityArg {
    Rwa,
    Full,
}

fn execute(task: Task, args: &Args) -> Result<(), Error> {
    let mut config = parse_config_file(&args.config, Some(task))?;
    if let Some(f) = args.fidelity {
        config.set_fidelity(match f {
            FidelityArg::Rwa => Fidelity::Rwa,
            FidelityArg::Full => Fidelity::Full,
        });
    }
    if let Some(f) = args.format {
        config.set_output_format(match f {
            Format::Csv => OutputFormat::Csv,
            Format::Json => OutputFormat::Json,
        });
    }
    if let Some(out) = &args.out {
        config.set_output_path(out);
    }
    let output = run(&config)?;
    let format = config.output.format;
    match &config.output.path {
        Some(dir) => {
            output.write_to(dir, format)?;
        }
        None => {
            let text = match format {
                OutputFormat::Csv => output.table_text(format)?,
                OutputFormat::Json => {
                    let mut doc = output.summary.clone();
                    doc["table"] = output.table.to_json();
                    let mut s = serde_json::to_string_pretty(&doc)
                        .map_err(|e| Error::Output(e.to_string()))?;
                    s.push('\n');
                    s
                }
            };
            std::io::stdout().lock().write_all(text.as_bytes())?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (task, args) = match &cli.command {
        Command::Spectrum(a) => (Task::Spectrum, a),
        Command::Sweep(a) => (Task::Sweep, a),
        Command::Optimize(a) => (Task::Optimize, a),
        Command::Design(a) => (Task::Design, a),
        Command::Sense(a) => (Task::Sense, a),
    };
    match execute(task, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let code = e.exit_code();
            let body = serde_json::json!({
                "kind": e.kind(),
                "message": e.to_string(),
                "exit_code": code,
            });
            eprintln!("{body}");
            ExitCode::from(code as u8)
        }
    }
}
