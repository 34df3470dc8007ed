use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use plab_cli::config::RunConfig;
use plab_cli::homfile;
use plab_cli::report::Witness;
use plab_cli::suites::{self, RunOptions, SUITES};

/// Property verification suites over ball graphs, their co-normal products,
/// and max-norm sums of lp spaces.
#[derive(Parser, Debug)]
#[command(name = "plab", version, about)]
struct Cli {
    /// Suite name (see `plab list`), or `factor` / `verify` for the
    /// homomorphism utilities.
    command: String,

    /// JSON run configuration; suite defaults are used when omitted.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Seed override; recorded verbatim in the report.
    #[arg(long)]
    seed: Option<u64>,

    /// Worker count. Parallel runs produce byte-identical reports to
    /// single-threaded runs.
    #[arg(long, default_value_t = 1)]
    jobs: usize,

    /// Re-execute the single check described by a witness file.
    #[arg(long)]
    replay: Option<PathBuf>,

    /// Write the report (or factorization) here instead of stdout only.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Homomorphism interchange file for `factor` / `verify`.
    #[arg(long)]
    hom: Option<PathBuf>,

    /// Dump sampled numeric data (gamma-phi, isometry-certify) to a file.
    #[arg(long)]
    dump_samples: Option<PathBuf>,

    /// Dump closure derivation lines to a file.
    #[arg(long)]
    dump_derivations: Option<PathBuf>,
}

fn usage_error(msg: &str) -> ExitCode {
    eprintln!("error: {msg}");
    eprintln!("suites: {}", SUITES.join(", "));
    ExitCode::from(2)
}

fn main() -> ExitCode {
    let cli = Cli::parse();

    match cli.command.as_str() {
        "list" => {
            for s in SUITES {
                println!("{s}");
            }
            return ExitCode::SUCCESS;
        }
        "factor" | "verify" => return run_hom_utility(&cli),
        _ => {}
    }

    if !SUITES.contains(&cli.command.as_str()) {
        return usage_error(&format!("unknown suite {:?}", cli.command));
    }

    if let Some(witness_path) = &cli.replay {
        return run_replay(&cli, witness_path);
    }

    let mut config = match &cli.config {
        None => RunConfig::default_for(&cli.command),
        Some(path) => {
            let text = match std::fs::read_to_string(path) {
                Ok(t) => t,
                Err(e) => return usage_error(&format!("cannot read {}: {e}", path.display())),
            };
            match RunConfig::from_json(&text) {
                Ok(c) => c,
                Err(e) => return usage_error(&e.to_string()),
            }
        }
    };
    if config.suite != cli.command {
        if cli.config.is_some() {
            return usage_error(&format!(
                "config is for suite {:?}, not {:?}",
                config.suite, cli.command
            ));
        }
        config.suite = cli.command.clone();
    }
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }

    let opts = RunOptions {
        jobs: cli.jobs,
        dump_samples: cli.dump_samples.clone(),
        dump_derivations: cli.dump_derivations.clone(),
    };
    match suites::run_suite(&config, &opts) {
        Err(e) => usage_error(&e.to_string()),
        Ok(report) => {
            print!("{}", report.console_summary());
            if let Some(out) = &cli.out {
                if let Err(e) = std::fs::write(out, report.to_json()) {
                    return usage_error(&format!("cannot write {}: {e}", out.display()));
                }
            }
            if report.failed() == 0 {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
    }
}

fn run_replay(cli: &Cli, witness_path: &PathBuf) -> ExitCode {
    let text = match std::fs::read_to_string(witness_path) {
        Ok(t) => t,
        Err(e) => return usage_error(&format!("cannot read {}: {e}", witness_path.display())),
    };
    let witness: Witness = match serde_json::from_str(&text) {
        Ok(w) => w,
        Err(e) => return usage_error(&format!("malformed witness: {e}")),
    };
    if witness.suite != cli.command {
        return usage_error(&format!(
            "witness is for suite {:?}, not {:?}",
            witness.suite, cli.command
        ));
    }
    match suites::replay_witness(&witness) {
        Err(e) => usage_error(&e.to_string()),
        Ok(result) => {
            let line = serde_json::to_string_pretty(&result).expect("result serializes");
            println!("{line}");
            if let Some(out) = &cli.out {
                if let Err(e) = std::fs::write(out, format!("{line}\n")) {
                    return usage_error(&format!("cannot write {}: {e}", out.display()));
                }
            }
            if result.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
    }
}

fn run_hom_utility(cli: &Cli) -> ExitCode {
    let Some(hom_path) = &cli.hom else {
        return usage_error("factor/verify need --hom <file>");
    };
    let text = match std::fs::read_to_string(hom_path) {
        Ok(t) => t,
        Err(e) => return usage_error(&format!("cannot read {}: {e}", hom_path.display())),
    };
    let hom = match homfile::parse_hom(&text) {
        Ok(h) => h,
        Err(e) => {
            // A well-formed file describing an invalid map is a check
            // failure, not a usage error.
            if cli.command == "verify" {
                if let homfile::HomFileError::Hom(violation) = &e {
                    println!("INVALID {violation}");
                    return ExitCode::FAILURE;
                }
            }
            return usage_error(&e.to_string());
        }
    };
    match cli.command.as_str() {
        "verify" => {
            println!(
                "VALID {} vertices, injective edge-preserving",
                hom.vertex_count()
            );
            ExitCode::SUCCESS
        }
        _ => match plab_core::factorizer::factor(&hom) {
            Ok(fact) => {
                let out_text = fact.canonical_text();
                print!("{out_text}");
                if let Some(out) = &cli.out {
                    if let Err(e) = std::fs::write(out, out_text) {
                        return usage_error(&format!("cannot write {}: {e}", out.display()));
                    }
                }
                ExitCode::SUCCESS
            }
            Err(e) => {
                println!("FACTORIZATION FAILED {e}");
                ExitCode::FAILURE
            }
        },
    }
}
