use std::path::PathBuf;
use std::process;

use clap::{Parser, Subcommand};

use sdvote_cli::{cmd_audit, cmd_bench, cmd_run, ExitCode};

#[derive(Parser)]
#[command(name = "sdvote", version, about = "Simulate, audit, and benchmark decentralized elections")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file and write the ledger dump and reports.
    Run {
        scenario: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Re-verify a ledger dump from scratch.
    Audit {
        dump: PathBuf,
        /// Print the report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Measure transaction sizes and proof timings.
    Bench {
        #[arg(long, default_value_t = 2048)]
        bits: u32,
        #[arg(long, default_value_t = 10)]
        trials: usize,
        #[arg(long)]
        json: bool,
    },
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("SDVOTE_LOG", "warn")).init();
    let cli = Cli::parse();
    let exit = match cli.command {
        Command::Run { scenario, out } => match cmd_run(&scenario, &out) {
            Ok(run) => {
                let t = &run.tally;
                match t.peers.iter().find_map(|p| p.result.as_ref().ok()) {
                    Some(r) => println!(
                        "tally: yes {} no {} total {} (expected yes {} of {})",
                        r.yes_count, r.no_count, r.total_votes, t.expected_yes, t.expected_total
                    ),
                    None => println!("tally: not available"),
                }
                println!(
                    "converged: {} at tick {}, {} messages sent, {} dropped",
                    run.convergence.converged,
                    run.convergence.tick,
                    run.convergence.messages_sent,
                    run.convergence.messages_dropped
                );
                for a in &t.adversaries {
                    println!(
                        "adversary {}: {} ({})",
                        a.script.name(),
                        if a.as_expected { "neutralized" } else { "NOT neutralized" },
                        a.reasons.join("; ")
                    );
                }
                println!("ledger dump: {}", run.dump_path.display());
                run.exit
            }
            Err(e) => {
                eprintln!("error: {e}");
                e.exit_code()
            }
        },
        Command::Audit { dump, json } => {
            let outcome = cmd_audit(&dump);
            print!("{}", outcome.render(json));
            outcome.exit_code()
        }
        Command::Bench { bits, trials, json } => match cmd_bench(bits, trials) {
            Ok(report) if json => {
                println!("{}", serde_json::to_string_pretty(&report).expect("serializable"));
                ExitCode::Success
            }
            Ok(report) => {
                print!("{}", report.to_text());
                ExitCode::Success
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::Validation
            }
        },
    };
    process::exit(exit.code());
}
