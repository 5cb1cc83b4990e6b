use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use lomlab::instance::parse_instance;
use lomlab::Tolerance;
use lomlab_cli::ops::{self, Operation};
use lomlab_cli::suite::{self, Overrides};
use lomlab_cli::{corpus, exit};
use serde_json::Value;

#[derive(Parser)]
#[command(name = "lomlab", version, about = "Transitive matrix algebras, partial complex structures and operator ranges")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify the algebra generated by an `algebra` instance.
    Classify { file: PathBuf },
    /// Build the object described by a `pcs`, `rep` or `pair` instance.
    Construct {
        file: PathBuf,
        /// Also write the commutant of the construction as an `algebra` instance.
        #[arg(long)]
        emit: Option<PathBuf>,
    },
    /// Compare the operator ranges of a `ranges` instance.
    Ranges { file: PathBuf },
    /// Run the corpus and the acceptance criteria.
    Suite {
        /// Seed for every randomized probe (overrides instance seeds).
        #[arg(long)]
        seed: Option<u64>,
        /// Relative tolerance for every computation (overrides instance tolerances).
        #[arg(long)]
        tol: Option<f64>,
        /// Write the JSON report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Read the corpus from this directory instead of the built-in copy.
        #[arg(long)]
        corpus: Option<PathBuf>,
    },
}

fn emit_json(value: &Value, out: Option<&Path>) -> Result<(), String> {
    let text = serde_json::to_string_pretty(value).expect("report is serializable") + "\n";
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| e.to_string()),
    }
}

fn single(op: Operation, file: &Path, emit: Option<&Path>) -> i32 {
    let bytes = match std::fs::read(file) {
        Ok(b) => b,
        Err(e) => {
            eprintln!("lomlab: cannot read {}: {e}", file.display());
            return exit::INVALID;
        }
    };
    let report = ops::report(op, &bytes);
    if let Err(e) = emit_json(&report.value, None) {
        eprintln!("lomlab: {e}");
        return exit::INVALID;
    }
    if report.exit_code != exit::OK {
        if let Some(msg) = report.value.pointer("/error/message").and_then(Value::as_str) {
            eprintln!("lomlab: {msg}");
        }
        return report.exit_code;
    }
    if let Some(path) = emit {
        let inst = std::str::from_utf8(&bytes)
            .ok()
            .and_then(|t| parse_instance(t).ok())
            .expect("input parsed for the report");
        match ops::commutant_instance(&inst.with_defaults()) {
            Ok(derived) => {
                let value = serde_json::to_value(&derived).expect("instance is serializable");
                if let Err(e) = emit_json(&value, Some(path)) {
                    eprintln!("lomlab: {e}");
                    return exit::INVALID;
                }
            }
            Err(f) => {
                eprintln!("lomlab: {}", f.error);
                return f.exit_code();
            }
        }
    }
    exit::OK
}

fn run_suite(seed: Option<u64>, tol: Option<f64>, out: Option<&Path>, dir: Option<&Path>) -> i32 {
    let tolerance = match tol.map(|t| Tolerance::new(t, Tolerance::default().abs_eps)).transpose() {
        Ok(t) => t,
        Err(e) => {
            eprintln!("lomlab: {e}");
            return exit::INVALID;
        }
    };
    let entries = match dir {
        None => corpus::embedded(),
        Some(d) => match corpus::load_dir(d) {
            Ok(e) => e,
            Err(e) => {
                eprintln!("lomlab: cannot read corpus {}: {e}", d.display());
                return exit::INVALID;
            }
        },
    };
    let report = suite::run(&entries, &Overrides { seed, tolerance });
    eprint!("{}", report.table());
    if let Err(e) = emit_json(&report.to_json(), out) {
        eprintln!("lomlab: {e}");
        return exit::INVALID;
    }
    if report.passed() {
        exit::OK
    } else {
        exit::SUITE_FAILED
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { exit::INVALID as u8 } else { 0 });
        }
    };
    let code = match cli.command {
        Command::Classify { file } => single(Operation::Classify, &file, None),
        Command::Construct { file, emit } => single(Operation::Construct, &file, emit.as_deref()),
        Command::Ranges { file } => single(Operation::Ranges, &file, None),
        Command::Suite { seed, tol, out, corpus } => run_suite(seed, tol, out.as_deref(), corpus.as_deref()),
    };
    ExitCode::from(code as u8)
}
