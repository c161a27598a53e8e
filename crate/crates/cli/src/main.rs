use std::io::Write;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod config;

use config::{Format, Settings};

#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct UsageError(pub String);

impl From<qidlab::Error> for UsageError {
    fn from(e: qidlab::Error) -> Self {
        UsageError(e.to_string())
    }
}

#[derive(Parser)]
#[command(name = "qidlab", version, about = "Forgetfulness, geometry preservation and quantum identification at desk scale")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Randomized battery over the auxiliary inequalities.
    VerifyLemmas(Settings),
    /// Geometry deficit of N against forgetfulness of its complement.
    FidelityAlternative(Settings),
    /// Environment disturbance against the best decoder found.
    InfoDisturbance(Settings),
    /// Haar code plus minimax decoders for random targets.
    BuildQidCode(Settings),
    /// Worst sampled identification error of a built code.
    EvaluateQidCode(Settings),
    /// C_E, one-shot Q_ID and antidegradability gap.
    Capacity(Settings),
    /// Typical-subspace properties of the tripartite state.
    Typicality(Settings),
    /// Concentration of environment marginals over Haar states in a code.
    Concentration(Settings),
}

impl Command {
    fn split(self) -> (&'static str, Settings) {
        match self {
            Command::VerifyLemmas(s) => ("verify-lemmas", s),
            Command::FidelityAlternative(s) => ("fidelity-alternative", s),
            Command::InfoDisturbance(s) => ("info-disturbance", s),
            Command::BuildQidCode(s) => ("build-qid-code", s),
            Command::EvaluateQidCode(s) => ("evaluate-qid-code", s),
            Command::Capacity(s) => ("capacity", s),
            Command::Typicality(s) => ("typicality", s),
            Command::Concentration(s) => ("concentration", s),
        }
    }
}

fn init_threads(settings: &Settings) -> Result<(), UsageError> {
    let threads = match settings.threads {
        Some(t) => Some(t),
        None => match std::env::var("QIDLAB_THREADS") {
            Ok(v) => Some(v.parse().map_err(|_| UsageError(format!("QIDLAB_THREADS: cannot parse `{v}`")))?),
            Err(_) => None,
        },
    };
    if let Some(t) = threads {
        rayon::ThreadPoolBuilder::new().num_threads(t).build_global().map_err(|e| UsageError(e.to_string()))?;
    }
    Ok(())
}

fn emit(out: Option<&str>, body: &[u8]) -> Result<(), UsageError> {
    let io = |e: std::io::Error| UsageError(format!("writing report: {e}"));
    match out {
        None | Some("-") => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(body).map_err(io)?;
            stdout.flush().map_err(io)
        }
        Some(path) => std::fs::write(path, body).map_err(io),
    }
}

fn run(cli: Cli) -> Result<bool, UsageError> {
    let (name, flags) = cli.command.split();
    let outcome = commands::run(name, &flags, init_threads)?;
    let body = match outcome.settings.format() {
        Format::Json => outcome.json.into_bytes(),
        Format::Csv => outcome
            .csv
            .ok_or_else(|| UsageError(format!("{name} has no CSV form; use --format json")))?,
    };
    emit(outcome.settings.out.as_deref(), &body)?;
    for w in &outcome.witnesses {
        eprintln!("witness: {w}");
    }
    Ok(outcome.pass)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("assertion failed");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
