//! `smilansky`: bound states, resonances, scans and certificates from the command line.

mod commands;
mod config;

use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use commands::{
    cmd_bound_state, cmd_freecheck, cmd_krein, cmd_resonance, cmd_scan, cmd_sheet, to_json,
    BoundStateArgs, Failure, FreecheckArgs, KreinArgs, ResonanceArgs, ScanArgs, SheetArgs,
};

#[derive(Parser, Debug)]
#[command(name = "smilansky", version, about = "Spectral toolkit for the Smilansky model")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Describe a sheet: characteristic vector, threshold set, distance, sector chain
    Sheet(SheetArgs),
    /// Eigenvalue below the essential spectrum, with an order check
    BoundState(BoundStateArgs),
    /// Resonance near a threshold by Newton on the determinant
    Resonance(ResonanceArgs),
    /// Zero curves of Re det and Im det and their refined intersections
    Scan(ScanArgs),
    /// Certify a point free of eigenvalues and resonances
    Freecheck(FreecheckArgs),
    /// Channel scalars and the weighted resolvent form
    Krein(KreinArgs),
}

fn init_threads() -> Result<(), String> {
    let Ok(v) = std::env::var("SMILANSKY_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .map_err(|_| format!("SMILANSKY_THREADS must be a positive integer, got \"{v}\""))?;
    if n == 0 {
        return Err("SMILANSKY_THREADS must be a positive integer, got 0".into());
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn output_path(command: &Command) -> Option<&std::path::Path> {
    let common = match command {
        Command::Sheet(_) => return None,
        Command::BoundState(a) => &a.common,
        Command::Resonance(a) => &a.common,
        Command::Scan(a) => &a.common,
        Command::Freecheck(a) => &a.common,
        Command::Krein(a) => &a.common,
    };
    common.output.as_deref()
}

fn emit(path: Option<&std::path::Path>, text: &str) -> std::io::Result<()> {
    match path {
        Some(p) => std::fs::write(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    if let Err(e) = init_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    let result = match &cli.command {
        Command::Sheet(a) => cmd_sheet(a),
        Command::BoundState(a) => cmd_bound_state(a),
        Command::Resonance(a) => cmd_resonance(a),
        Command::Scan(a) => cmd_scan(a),
        Command::Freecheck(a) => cmd_freecheck(a),
        Command::Krein(a) => cmd_krein(a),
    };
    let path = output_path(&cli.command);
    let (text, code) = match result {
        Ok(text) => (text, ExitCode::SUCCESS),
        Err(Failure::Numeric { error, config }) => {
            eprintln!("error: {error}");
            let report = json!({
                "status": error.status(),
                "message": error.to_string(),
                "config": config,
            });
            (to_json(&report), ExitCode::from(2))
        }
        Err(Failure::Usage(msg)) | Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(1);
        }
    };
    if let Err(e) = emit(path, &text) {
        eprintln!("error: cannot write output: {e}");
        return ExitCode::from(1);
    }
    code
}
