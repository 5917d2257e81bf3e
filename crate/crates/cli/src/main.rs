use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use eppa_cli::{cmd_extend, cmd_oracle, cmd_verify, Flags, Outcome};

#[derive(Parser)]
#[command(name = "eppa", version, about = "Extend partial automorphisms of finite metric spaces, measure algebras and inner-product spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the extension and write the result with its certificate.
    Extend {
        instance: PathBuf,
        #[command(flatten)]
        flags: FlagArgs,
    },
    /// Recheck a result file against its instance.
    Verify {
        instance: PathBuf,
        result: PathBuf,
        #[command(flatten)]
        flags: FlagArgs,
    },
    /// Compare engine answers with brute-force oracles (metric instances).
    Oracle {
        instance: PathBuf,
        #[command(flatten)]
        flags: FlagArgs,
    },
}

#[derive(Args)]
struct FlagArgs {
    /// Largest quotient order accepted [default: 10000]
    #[arg(long)]
    budget_order: Option<usize>,
    /// Largest symmetric-group degree searched [default: 6]
    #[arg(long)]
    max_degree: Option<usize>,
    /// Total word length for the factorization oracle; 0 disables it [default: 8]
    #[arg(long)]
    oracle_depth: Option<usize>,
    /// Seed for sampled checks [default: 0]
    #[arg(long)]
    seed: Option<u64>,
    /// Write the report here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

impl FlagArgs {
    fn flags(&self) -> Flags {
        Flags {
            budget_order: self.budget_order,
            max_degree: self.max_degree,
            oracle_depth: self.oracle_depth,
            seed: self.seed,
        }
    }
}

fn read(path: &PathBuf) -> Result<String, String> {
    std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let (outcome, out) = match &cli.command {
        Command::Extend { instance, flags } => match read(instance) {
            Ok(text) => (cmd_extend(&text, &flags.flags()), &flags.out),
            Err(e) => return fail(&e),
        },
        Command::Verify { instance, result, flags } => match (read(instance), read(result)) {
            (Ok(i), Ok(r)) => (cmd_verify(&i, &r, &flags.flags()), &flags.out),
            (Err(e), _) | (_, Err(e)) => return fail(&e),
        },
        Command::Oracle { instance, flags } => match read(instance) {
            Ok(text) => (cmd_oracle(&text, &flags.flags()), &flags.out),
            Err(e) => return fail(&e),
        },
    };
    emit(&outcome, out.as_ref());
    // timing stays out of the report so output files are reproducible
    eprintln!(
        "status: {} ({:.3} s)",
        outcome.report["status"].as_str().unwrap_or("?"),
        start.elapsed().as_secs_f64()
    );
    if let Some(e) = outcome.report.get("error").and_then(|e| e.as_str()) {
        eprintln!("error: {e}");
    }
    ExitCode::from(outcome.exit_code() as u8)
}

fn emit(outcome: &Outcome, out: Option<&PathBuf>) {
    let text = outcome.render();
    match out {
        Some(p) => {
            if let Err(e) = std::fs::write(p, text) {
                eprintln!("cannot write {}: {e}", p.display());
                std::process::exit(1);
            }
        }
        None => print!("{text}"),
    }
}

fn fail(msg: &str) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(2)
}
