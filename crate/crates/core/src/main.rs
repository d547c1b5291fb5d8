use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand};

use mch::config::parse_config;
use mch::report::compare_spectra;
use mch::runner::{execute_oracle, execute_run};
use mch::{McError, Result};

#[derive(Parser)]
#[command(name = "mch", about = "Low-lying quantum spectra from Monte Carlo transition amplitudes")]
struct Cli {
    /// Worker threads for matrix assembly (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Directory for run artifacts.
    #[arg(short, long, global = true, default_value = "out")]
    output_dir: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Full pipeline: sample, assemble, diagonalize, write artifacts.
    Run { config: PathBuf },
    /// Reference spectrum for the configured model, written as oracle.csv.
    Oracle { config: PathBuf },
    /// Level-by-level comparison of two spectrum tables.
    Compare { spectrum: PathBuf, reference: PathBuf },
}

fn read_config(path: &PathBuf) -> Result<mch::config::RunConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| McError::ConfigGeneral(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text)
}

fn main() {
    let cli = Cli::parse();
    if let Err(err) = dispatch(cli) {
        eprintln!("error: {err}");
        std::process::exit(err.exit_code());
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| McError::Runtime(format!("thread pool setup failed: {e}")))?;
    }
    match cli.command {
        Command::Run { config } => {
            let cfg = read_config(&config)?;
            let start = Instant::now();
            let summary = execute_run(&cfg, &cli.output_dir)?;
            let elapsed = start.elapsed().as_secs_f64();

            if summary.used_free_sigma_fallback {
                println!("note: no closed-form width for this potential; basis width used the free-particle rule");
            }
            println!(
                "spectrum: {} levels kept, {} discarded at the eigenvalue floor",
                summary.spectrum.len(),
                summary.spectrum.n_discarded
            );
            for (n, e) in summary.spectrum.energies.iter().take(8).enumerate() {
                match summary.reference.as_ref().and_then(|r| r.get(n)) {
                    Some(r) => println!(
                        "  E_{n} = {e:.8}  (reference {r:.8}, rel {:+.2e})",
                        (e - r) / r.abs().max(f64::MIN_POSITIVE)
                    ),
                    None => println!("  E_{n} = {e:.8}"),
                }
            }
            if summary.n_high_error > 0 {
                println!(
                    "warning: {} matrix entries carry >50% relative error",
                    summary.n_high_error
                );
            }
            if summary.min_acceptance < 1.0 {
                println!("metropolis acceptance (worst entry): {:.3}", summary.min_acceptance);
            }
            println!("elapsed: {elapsed:.2}s");
            for f in &summary.files {
                println!("wrote {}", f.display());
            }
            Ok(())
        }
        Command::Oracle { config } => {
            let cfg = read_config(&config)?;
            let start = Instant::now();
            let (levels, path) = execute_oracle(&cfg, &cli.output_dir)?;
            let elapsed = start.elapsed().as_secs_f64();
            for (n, e) in levels.iter().enumerate() {
                println!("  E_{n} = {e:.10}");
            }
            println!("elapsed: {elapsed:.2}s");
            println!("wrote {}", path.display());
            Ok(())
        }
        Command::Compare { spectrum, reference } => {
            let left = std::fs::read_to_string(&spectrum)
                .map_err(|e| McError::Input(format!("cannot read {}: {e}", spectrum.display())))?;
            let right = std::fs::read_to_string(&reference)
                .map_err(|e| McError::Input(format!("cannot read {}: {e}", reference.display())))?;
            let report = compare_spectra(&left, &right)?;
            print!("{}", report.to_text());
            Ok(())
        }
    }
}
