//! `pfister`: exact quadratic-form, quaternion and involution computations over ℚ.
//!
//! Exit codes: 0 ok, 1 negative answer or failed check, 2 invalid input or error.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "pfister", version, about = "Exact invariants of quadratic forms and algebras with involution over Q")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Quadratic forms.
    #[command(subcommand)]
    Qf(QfCommand),
    /// Quaternion algebras (a, b).
    #[command(subcommand)]
    Quat(QuatCommand),
    /// Algebras with involution described by a factor file.
    #[command(subcommand)]
    Inv(InvCommand),
    /// Products of four quaternion algebras with involution.
    #[command(subcommand)]
    Shapiro4(ShapiroCommand),
}

/// A form given inline as a diagonal or as a JSON file ({"diag": [...]} or {"gram": [[...]]}).
#[derive(Args)]
struct FormInput {
    /// Comma-separated diagonal entries, e.g. 1,-1,2/3.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "file")]
    diag: Option<String>,
    /// JSON form file.
    file: Option<PathBuf>,
}

#[derive(Subcommand)]
enum QfCommand {
    /// Dimension, discriminant, Hasse and Clifford classes, signature.
    Invariants(FormInput),
    /// Witt decomposition with explicit hyperbolic pairs.
    Witt(FormInput),
    /// Whether the form is similar to an r-fold Pfister form.
    Pfister {
        #[arg(long)]
        r: u32,
        #[command(flatten)]
        form: FormInput,
    },
    /// Whether two forms are isometric; each is a diagonal list or a file.
    Isometric {
        #[arg(allow_hyphen_values = true)]
        a: String,
        #[arg(allow_hyphen_values = true)]
        b: String,
    },
}

#[derive(Args)]
struct Symbols {
    #[arg(allow_hyphen_values = true)]
    a: String,
    #[arg(allow_hyphen_values = true)]
    b: String,
}

#[derive(Subcommand)]
enum QuatCommand {
    /// Whether (a, b) is split, with its Brauer class.
    Split(Symbols),
    /// The norm form ⟨1, −a, −b, ab⟩.
    Normform(Symbols),
    /// Images of 1, i, j, k in M₂(Q) for a split algebra.
    Splitmap(Symbols),
}

#[derive(Subcommand)]
enum InvCommand {
    /// e0, e1, e2 and the Pfister verdict.
    Invariants { file: PathBuf },
}

#[derive(Subcommand)]
enum ShapiroCommand {
    /// Sample and run a batch of scenarios.
    Run {
        #[arg(long, default_value_t = 25)]
        count: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Write the full JSON report here.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Run one scenario file.
    Verify {
        file: PathBuf,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Check a user-supplied u (and optionally the c it came from).
    VerifyU {
        file: PathBuf,
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Qf(c) => commands::qf(c),
        Command::Quat(c) => commands::quat(c),
        Command::Inv(InvCommand::Invariants { file }) => commands::inv(&file),
        Command::Shapiro4(c) => commands::shapiro4(c),
    };
    match result {
        Ok(outcome) => ExitCode::from(outcome as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
