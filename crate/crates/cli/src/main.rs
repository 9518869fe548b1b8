use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::builder::PossibleValuesParser;
use clap::Parser;
use ftnm_cli::{emit, execute, schema, CliError, Command, Format, RunConfig, EXIT_CONFIG};

fn command_names() -> Vec<&'static str> {
    schema::COMMANDS
        .iter()
        .map(|c| c.command.name())
        .chain(["schema"])
        .collect()
}

#[derive(Parser)]
#[command(
    name = "ftnm",
    version,
    about = "Bound checks and calculators for fault tolerance under non-Markovian noise",
    after_help = schema::help_text()
)]
struct Cli {
    #[arg(value_parser = PossibleValuesParser::new(command_names()))]
    command: String,
    /// JSON config with the command's parameters.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long)]
    seed: Option<u64>,
}

fn load(cli: Cli, command: Command) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::from_file(Some(command), path)?,
        None => {
            let cfg = RunConfig::new(command, Default::default());
            cfg.validate()?;
            cfg
        }
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(format) = cli.format {
        cfg.format = format;
    }
    if cli.out.is_some() {
        cfg.output_path = cli.out;
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let Some(command) = Command::parse(&cli.command) else {
        println!("{}", serde_json::to_string_pretty(&schema::document()).expect("schema is JSON"));
        return ExitCode::SUCCESS;
    };
    let outcome = load(cli, command).and_then(|cfg| {
        let report = execute(&cfg)?;
        let text = emit(&report, &cfg)?;
        Ok((report, text))
    });
    match outcome {
        Ok((report, text)) => {
            if let Some(bytes) = text {
                std::io::stdout().write_all(&bytes).expect("stdout");
            }
            for v in report.verdicts.iter().filter(|v| !v.passed) {
                eprintln!("ftnm: verdict {} failed: {}", v.name, v.detail);
            }
            ExitCode::from(report.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("ftnm: {e}");
            ExitCode::from(EXIT_CONFIG as u8)
        }
    }
}
