use std::io::Read;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use qss_core::harness::{self, SCENARIOS};
use qss_core::render::{self, RunReport};
use qss_core::{Position, SecretBits, StateLabel, Transcript};

/// Seed used when `--seed` is not given.
const DEFAULT_SEED: u64 = 42;

#[derive(Parser)]
#[command(name = "qss", version, about = "GHZ-state secret sharing simulator and verifier")]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Structured,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one round and reconstruct the secret from its announcements.
    Run {
        /// Initial state label: A, B, C, D or random.
        #[arg(long, default_value = "random", value_parser = parse_state)]
        state: Choice<StateLabel>,
        /// Two-bit secret.
        #[arg(long)]
        secret: SecretBits,
        /// Toggled qubit: 1, 6 or random.
        #[arg(long, default_value = "random", value_parser = parse_position)]
        position: Choice<Position>,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
    /// Reconstruct from a stored transcript (a path, or `-` for stdin).
    Replay { path: String },
    /// Check every honest configuration and measurement branch.
    Verify,
    /// Rebuild the P1 collapse table and compare it with the reference rows.
    Table,
    /// Run one scripted security scenario.
    Scenario {
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(SCENARIOS))]
        name: String,
    },
}

#[derive(Clone, Copy)]
enum Choice<T> {
    Fixed(T),
    Random,
}

impl<T> Choice<T> {
    fn fixed(self) -> Option<T> {
        match self {
            Choice::Fixed(v) => Some(v),
            Choice::Random => None,
        }
    }
}

fn parse_choice<T: std::str::FromStr>(s: &str) -> Result<Choice<T>, String>
where
    T::Err: std::fmt::Display,
{
    if s.eq_ignore_ascii_case("random") {
        Ok(Choice::Random)
    } else {
        s.parse().map(Choice::Fixed).map_err(|e: T::Err| e.to_string())
    }
}

fn parse_state(s: &str) -> Result<Choice<StateLabel>, String> {
    parse_choice(s)
}

fn parse_position(s: &str) -> Result<Choice<Position>, String> {
    parse_choice(s)
}

fn emit(format: Format, text: String, structured: String) {
    match format {
        Format::Text => print!("{text}"),
        Format::Structured => println!("{structured}"),
    }
}

fn status(ok: bool) -> ExitCode {
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn read_input(path: &str) -> std::io::Result<String> {
    if path == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s)?;
        Ok(s)
    } else {
        std::fs::read_to_string(path)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            state,
            secret,
            position,
            seed,
        } => {
            let transcript = qss_core::run_protocol(state.fixed(), secret, position.fixed(), seed);
            let report = RunReport::new(transcript);
            emit(cli.format, render::run_text(&report), render::to_json(&report));
            status(report.correct())
        }
        Command::Replay { path } => {
            let transcript = match read_input(&path)
                .map_err(|e| e.to_string())
                .and_then(|s| Transcript::from_json(&s).map_err(|e| e.to_string()))
            {
                Ok(t) => t,
                Err(e) => {
                    eprintln!("qss: cannot read transcript: {e}");
                    return ExitCode::from(2);
                }
            };
            let report = RunReport::new(transcript);
            emit(cli.format, render::run_text(&report), render::to_json(&report));
            status(report.correct())
        }
        Command::Verify => {
            let report = harness::exhaustive_verify();
            emit(cli.format, render::verify_text(&report), render::to_json(&report));
            status(report.summary.ok())
        }
        Command::Table => {
            let report = harness::collapse_table();
            emit(cli.format, render::table_text(&report), render::to_json(&report));
            status(report.ok())
        }
        Command::Scenario { name } => {
            let report = harness::scenario(&name).expect("validated by clap");
            emit(cli.format, render::scenario_text(&report), render::to_json(&report));
            status(report.verdict)
        }
    }
}
