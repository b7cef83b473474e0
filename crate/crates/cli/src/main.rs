use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

mod commands;
mod record;
mod source;

use commands::Status;

#[derive(Parser)]
#[command(name = "prodrange", version, about = "Product higher-rank numerical ranges and product codes")]
struct Cli {
    /// Base seed for every randomized step.
    #[arg(long, global = true, env = "PRODRANGE_SEED", default_value_t = 0)]
    seed: u64,

    /// Write a run record (arguments, seed, version, timing, outputs) to this path.
    #[arg(long, global = true)]
    record: Option<std::path::PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Hermitian rank-k range, a Δ_k certificate, or a product range with known answer.
    Range(commands::RangeArgs),
    /// Outer bounds on the product range: eigenvalue scan, local C-range, convex combination.
    Bound(commands::BoundArgs),
    /// Check a product code against an operator.
    Verify(commands::VerifyArgs),
    /// Tabulate bounds over a parameter grid as CSV.
    Sweep(commands::SweepArgs),
    /// Build a unitary with a prescribed product code at λ = 0.
    Reverse(commands::ReverseArgs),
    /// Write a zoo operator (and its attaining code, if any) to JSON files.
    Export(commands::ExportArgs),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let start = Instant::now();
    let mut outputs = Vec::new();
    let result = match &cli.command {
        Command::Range(a) => commands::range(a, &mut outputs),
        Command::Bound(a) => commands::bound(a, cli.seed, &mut outputs),
        Command::Verify(a) => commands::verify(a, &mut outputs),
        Command::Sweep(a) => commands::sweep(a, cli.seed, &mut outputs),
        Command::Reverse(a) => commands::reverse(a, cli.seed, &mut outputs),
        Command::Export(a) => commands::export(a, &mut outputs),
    };
    let status = match result {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(1);
        }
    };
    let mut records: Vec<std::path::PathBuf> = cli.record.iter().cloned().collect();
    if let Command::Sweep(a) = &cli.command {
        if cli.record.is_none() {
            if let Some(out) = &a.out {
                records.push(record::sibling_path(out));
            }
        }
    }
    for path in records {
        let rec = record::RunRecord::new(cli.seed, start.elapsed(), outputs.clone());
        if let Err(e) = rec.write(&path) {
            eprintln!("error: {e:#}");
            return ExitCode::from(1);
        }
    }
    match status {
        Status::Success => ExitCode::SUCCESS,
        Status::Negative => ExitCode::from(2),
    }
}
