use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use soliton_core::suite::{self, Format, OutputSpec, RunConfig, Status, Suite};

/// Verification suites for canonical soliton metrics on space-time.
#[derive(Debug, Parser)]
#[command(name = "soliton", version)]
struct Cli {
    /// Print the suite names and exit.
    #[arg(long)]
    list_suites: bool,

    /// Print the catalog backgrounds and flows and exit.
    #[arg(long)]
    list_backgrounds: bool,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the suite described by a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,

        /// Overrides the config's output path.
        #[arg(long)]
        output: Option<PathBuf>,

        /// Output format when `--output` is given.
        #[arg(long, value_parser = ["json", "csv"])]
        format: Option<String>,
    },
}

const PASS: u8 = 0;
const TOLERANCE_FAILURE: u8 = 1;
const CONFIG_ERROR: u8 = 2;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.list_suites {
        for s in Suite::ALL {
            println!("{:<24} {}", s.as_str(), s.description());
        }
    }
    if cli.list_backgrounds {
        println!("backgrounds:");
        for name in suite::background_names() {
            println!("  {name}");
        }
        println!("flows:");
        for name in suite::mcf_names() {
            println!("  {name}");
        }
    }
    match cli.command {
        Some(Command::Run { config, output, format }) => ExitCode::from(run(config, output, format)),
        None if cli.list_suites || cli.list_backgrounds => ExitCode::from(PASS),
        None => {
            eprintln!("nothing to do; try `soliton run --config <path>` or `--list-suites`");
            ExitCode::from(CONFIG_ERROR)
        }
    }
}

fn run(path: PathBuf, output: Option<PathBuf>, format: Option<String>) -> u8 {
    let mut config = match RunConfig::from_path(&path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            return CONFIG_ERROR;
        }
    };
    if let Some(path) = output {
        let format = match format.as_deref() {
            Some("csv") => Format::Csv,
            Some(_) => Format::Json,
            None if path.extension().is_some_and(|e| e == "csv") => Format::Csv,
            None => Format::Json,
        };
        config.output = Some(OutputSpec { path, format });
    }
    let report = match suite::run(&config) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("{e}");
            return CONFIG_ERROR;
        }
    };
    match &config.output {
        Some(out) => match suite::emit(&report, &out.path, out.format) {
            Ok(paths) => {
                for p in paths {
                    eprintln!("wrote {}", p.display());
                }
            }
            Err(e) => {
                eprintln!("{e}");
                return CONFIG_ERROR;
            }
        },
        None => print!("{}", report.to_json()),
    }
    let s = &report.summary;
    for c in &s.checks {
        eprintln!(
            "{} {}: {:.6e} (tolerance {:.3e})",
            if c.pass { "ok  " } else { "FAIL" },
            c.name,
            c.value,
            c.tolerance
        );
    }
    if s.point_errors > 0 {
        eprintln!("{} sample points failed to evaluate", s.point_errors);
    }
    eprintln!("{}: {}", config.suite.as_str(), s.status.as_str());
    match s.status {
        Status::Fail => TOLERANCE_FAILURE,
        Status::Pass | Status::NoData => PASS,
    }
}
