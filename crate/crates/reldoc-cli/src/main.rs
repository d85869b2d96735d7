//! `reldoc`: law checkers and quotient builders for finite value-relation
//! calculi, driven by a JSON instance file.
//!
//! Exit codes: 0 when every requested check passes, 1 when some checked
//! law does not hold, 2 on malformed input or usage errors.

mod commands;
mod instance;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use commands::LawFlags;
use instance::{CliOverrides, InstanceFile, RunOptions};

#[derive(Parser)]
#[command(
    name = "reldoc",
    version,
    about = "Law checkers and quotient builders for finite value-relation calculi"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run doctrine law checks on declared doctrines.
    #[command(alias = "laws")]
    CheckLaws {
        #[command(flatten)]
        common: Common,
        /// Check only these doctrines (default: all declared).
        #[arg(long = "target")]
        targets: Vec<String>,
        /// Also check product structure and the substitution square.
        #[arg(long)]
        cartesian: bool,
        /// Also check the Frobenius law.
        #[arg(long)]
        frobenius: bool,
        /// Also check the modular law.
        #[arg(long)]
        modular: bool,
        /// Also check relational unique choice on all object pairs.
        #[arg(long)]
        ruc: bool,
    },
    /// Build the quotient of a declared metric space and certify it.
    Quotient {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        space: String,
    },
    /// Collapse indistinguishable points of a declared metric space.
    Separate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        space: String,
    },
    /// Factor a declared map into a surjection followed by an injection.
    Factorize {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        map: String,
    },
    /// Compute the greatest behavioural relation between two systems.
    Bisim {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        left: String,
        #[arg(long)]
        right: String,
    },
    /// Check relational unique choice for one object pair.
    Ruc {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        doctrine: String,
        #[arg(long)]
        x: String,
        #[arg(long)]
        y: String,
    },
    /// Checks on declared powerset algebras.
    Algebras {
        #[command(subcommand)]
        cmd: AlgebrasCmd,
    },
    /// Run every check the instance file supports.
    Report {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Subcommand)]
enum AlgebrasCmd {
    /// Certify the algebra laws and the counit quotient for each algebra.
    Check {
        #[command(flatten)]
        common: Common,
    },
}

impl Cmd {
    fn common(&self) -> &Common {
        match self {
            Cmd::CheckLaws { common, .. }
            | Cmd::Quotient { common, .. }
            | Cmd::Separate { common, .. }
            | Cmd::Factorize { common, .. }
            | Cmd::Bisim { common, .. }
            | Cmd::Ruc { common, .. }
            | Cmd::Algebras {
                cmd: AlgebrasCmd::Check { common },
            }
            | Cmd::Report { common } => common,
        }
    }
}

#[derive(Args)]
struct Common {
    /// Instance file (JSON).
    #[arg(long = "in", value_name = "FILE")]
    input: PathBuf,
    /// Comparison tolerance for real-valued entries.
    #[arg(long)]
    eps: Option<f64>,
    /// Enumeration cap for hom-sets and fibres.
    #[arg(long)]
    hom_cap: Option<usize>,
    /// Iteration cap for fixpoint computations.
    #[arg(long)]
    max_iter: Option<usize>,
    /// Seed for sampled checks (RELDOC_SEED overrides).
    #[arg(long)]
    seed: Option<u64>,
    /// Emit JSON instead of text.
    #[arg(long, conflicts_with = "text")]
    json: bool,
    /// Emit plain text (the default).
    #[arg(long)]
    text: bool,
}

fn env_seed() -> Result<Option<u64>> {
    match std::env::var("RELDOC_SEED") {
        Ok(s) => s
            .parse::<u64>()
            .map(Some)
            .map_err(|_| anyhow!("RELDOC_SEED must be an unsigned integer, got {s:?}")),
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(std::env::VarError::NotUnicode(_)) => {
            bail!("RELDOC_SEED must be an unsigned integer")
        }
    }
}

fn run(cli: &Cli) -> Result<(String, bool)> {
    let common = cli.cmd.common();
    let text = std::fs::read_to_string(&common.input)
        .with_context(|| format!("cannot read {}", common.input.display()))?;
    let file: InstanceFile = serde_json::from_str(&text)
        .with_context(|| format!("cannot parse {}", common.input.display()))?;
    let overrides = CliOverrides {
        eps: common.eps,
        hom_cap: common.hom_cap,
        max_iter: common.max_iter,
        seed: common.seed,
        env_seed: env_seed()?,
    };
    let options = RunOptions::merge(file.options, &overrides);
    let res = instance::resolve(&file, options)?;
    let json = common.json;
    match &cli.cmd {
        Cmd::CheckLaws {
            targets,
            cartesian,
            frobenius,
            modular,
            ruc,
            ..
        } => {
            let flags = LawFlags {
                cartesian: *cartesian,
                frobenius: *frobenius,
                modular: *modular,
                ruc: *ruc,
            };
            commands::check_laws(&res, targets, &flags, json)
        }
        Cmd::Quotient { space, .. } => commands::quotient(&res, space, json),
        Cmd::Separate { space, .. } => commands::separate(&res, space, json),
        Cmd::Factorize { map, .. } => commands::factorize_map(&res, map, json),
        Cmd::Bisim { left, right, .. } => commands::bisim(&res, left, right, json),
        Cmd::Ruc { doctrine, x, y, .. } => commands::ruc(&res, doctrine, x, y, json),
        Cmd::Algebras { .. } => commands::algebras_check(&res, json),
        Cmd::Report { .. } => commands::report(&res, json),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let json = cli.cmd.common().json;
    match run(&cli) {
        Ok((out, ok)) => {
            print!("{out}");
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(err) => {
            if json {
                let v = serde_json::json!({
                    "schema_version": instance::SCHEMA_VERSION,
                    "error": format!("{err:#}"),
                });
                eprintln!("{v}");
            } else {
                eprintln!("error: {err:#}");
            }
            ExitCode::from(2)
        }
    }
}
