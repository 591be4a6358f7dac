//! `liplab`: exact-arithmetic laboratory for gap structures, monotone
//! Lipschitz map decisions, diagonal adversaries, glued and vertex-cube
//! spaces, and finite-scale extension operators.
//!
//! Exit codes: 0 expected verdict, 2 parse or input error, 3 guard or
//! precondition violation, 4 falsified expectation.

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use liplab_cli::{csv, files, run, scenario, CliError};
use liplab_core::extension::DEFAULT_ENUMERATION_CAP;
use liplab_core::gaps::DEFAULT_HORIZON;

#[derive(Parser)]
#[command(name = "liplab", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a gap structure from a gamma sequence file.
    BuildGaps {
        #[arg(long)]
        gamma: PathBuf,
        #[arg(long)]
        depth: usize,
        #[arg(long, default_value_t = DEFAULT_HORIZON)]
        horizon: u64,
        /// Skip the exhaustive first-fit minimality audit.
        #[arg(long)]
        no_audit: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        cert: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Decide existence of a monotone K-Lipschitz map between structures.
    DecideLip {
        #[arg(long)]
        domain: PathBuf,
        #[arg(long)]
        codomain: PathBuf,
        #[arg(long)]
        k: String,
        /// feasible | infeasible; mismatches exit with code 4.
        #[arg(long)]
        expect: Option<String>,
        #[arg(long)]
        cert: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Construct the diagonal prefix defeating a family.
    MakeAdversary {
        #[arg(long)]
        family: PathBuf,
        #[arg(long)]
        k: String,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        cert: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Re-run the decider from a constructed prefix onto every member.
    VerifyAdversary {
        #[arg(long)]
        prefix: PathBuf,
        /// Domain and codomain truncation depths, comma separated.
        #[arg(long)]
        depths: String,
        /// finite | geometric:RATIO:EXTRA (default geometric:1/2:domain depth).
        #[arg(long)]
        tail: Option<String>,
        #[arg(long)]
        k: Option<String>,
        #[arg(long)]
        cert: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Exact distance between two glued points.
    GlueDist {
        #[arg(long)]
        space: PathBuf,
        #[arg(long)]
        p: String,
        #[arg(long)]
        q: String,
        #[arg(long)]
        cert: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Collapse a K-Lipschitz glued table through one sheet.
    Collapse {
        #[arg(long)]
        space: PathBuf,
        #[arg(long)]
        table: PathBuf,
        #[arg(long)]
        k: String,
        #[arg(long)]
        domain: Option<PathBuf>,
        #[arg(long)]
        cert: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Diagonal defeat witness for a vertex-cube family.
    CubeDefeat {
        #[arg(long)]
        family: PathBuf,
        /// One or more K values, comma separated.
        #[arg(long)]
        k: String,
        #[arg(long)]
        beta0: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        cert: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Evaluate a candidate retraction table against a defeat witness.
    CubeCheck {
        #[arg(long)]
        retraction: PathBuf,
        #[arg(long)]
        witness: PathBuf,
        #[arg(long)]
        k: Option<String>,
        #[arg(long)]
        cert: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Distance-vector net over a finite metric space.
    Net {
        #[arg(long)]
        space: PathBuf,
        /// Base point ids, comma separated.
        #[arg(long)]
        points: String,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        eps: String,
        #[arg(long, default_value_t = DEFAULT_ENUMERATION_CAP)]
        cap: u128,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        cert: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Greedy maximal packing chain for a separation schedule.
    Chain {
        #[arg(long)]
        space: PathBuf,
        #[arg(long)]
        levels: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        cert: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Build the linear extension operator from a seed pipeline.
    Extend {
        #[arg(long)]
        space: PathBuf,
        /// Seed point ids, comma separated, cycled per level.
        #[arg(long)]
        seeds: String,
        #[arg(long)]
        levels: usize,
        #[arg(long, default_value_t = DEFAULT_ENUMERATION_CAP)]
        cap: u128,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        cert: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Emit a CSV series from a certificate.
    EmitCsv {
        #[arg(long)]
        cert: PathBuf,
        /// blocking-chain | breakpoints | defeat-grid.
        #[arg(long)]
        selector: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run one scenario document, or a batch concurrently.
    RunScenario {
        #[arg(long)]
        scenario: PathBuf,
        /// Worker threads for batches; the LIPLAB_JOBS variable overrides.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
}

fn dispatch(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::BuildGaps {
            gamma,
            depth,
            horizon,
            no_audit,
            out,
            cert,
            seed,
        } => {
            let o = run::build_gaps_cmd(&gamma, depth, horizon, !no_audit, out.as_deref(), seed)?;
            print_finish(o, cert)
        }
        Command::DecideLip {
            domain,
            codomain,
            k,
            expect,
            cert,
            seed,
        } => {
            let expect = match expect.as_deref() {
                None => None,
                Some("feasible") => Some(true),
                Some("infeasible") => Some(false),
                Some(other) => return Err(CliError::Parse(format!("bad expectation {other:?}"))),
            };
            let o = run::decide_lip_cmd(&domain, &codomain, &run::parse_rat(&k)?, expect, seed)?;
            print_finish(o, cert)
        }
        Command::MakeAdversary {
            family,
            k,
            out,
            cert,
            seed,
        } => {
            let o = run::make_adversary_cmd(&family, &run::parse_rat(&k)?, out.as_deref(), seed)?;
            print_finish(o, cert)
        }
        Command::VerifyAdversary {
            prefix,
            depths,
            tail,
            k,
            cert,
            seed,
        } => {
            let (dd, dc) = depths
                .split_once(',')
                .ok_or_else(|| CliError::Parse("depths must be m,m'".into()))?;
            let dd: usize = dd
                .trim()
                .parse()
                .map_err(|e| CliError::Parse(format!("bad domain depth: {e}")))?;
            let dc: usize = dc
                .trim()
                .parse()
                .map_err(|e| CliError::Parse(format!("bad codomain depth: {e}")))?;
            let tail = match tail.as_deref() {
                Some(t) => run::parse_tail_rule(t)?,
                None => liplab_core::adversary::TailRule::Geometric {
                    ratio: run::parse_rat("1/2")?,
                    extra_terms: dd,
                },
            };
            let k = k.as_deref().map(run::parse_rat).transpose()?;
            let o = run::verify_adversary_cmd(&prefix, dd, dc, &tail, k.as_ref(), seed)?;
            print_finish(o, cert)
        }
        Command::GlueDist {
            space,
            p,
            q,
            cert,
            seed,
        } => {
            let o = run::glue_dist_cmd(&space, &p, &q, seed)?;
            print_finish(o, cert)
        }
        Command::Collapse {
            space,
            table,
            k,
            domain,
            cert,
            seed,
        } => {
            let o = run::collapse_cmd(
                &space,
                &table,
                &run::parse_rat(&k)?,
                domain.as_deref(),
                seed,
            )?;
            print_finish(o, cert)
        }
        Command::CubeDefeat {
            family,
            k,
            beta0,
            out,
            cert,
            seed,
        } => {
            let ks: Result<Vec<_>, _> = k.split(',').map(run::parse_rat).collect();
            let o = run::cube_defeat_cmd(&family, &ks?, beta0, out.as_deref(), seed)?;
            print_finish(o, cert)
        }
        Command::CubeCheck {
            retraction,
            witness,
            k,
            cert,
            seed,
        } => {
            let k = k.as_deref().map(run::parse_rat).transpose()?;
            let o = run::cube_check_cmd(&retraction, &witness, k.as_ref(), seed)?;
            print_finish(o, cert)
        }
        Command::Net {
            space,
            points,
            k,
            eps,
            cap,
            out,
            cert,
            seed,
        } => {
            let points: Vec<String> = points.split(',').map(str::to_string).collect();
            let o = run::net_cmd(
                &space,
                &points,
                k,
                &run::parse_rat(&eps)?,
                cap,
                out.as_deref(),
                seed,
            )?;
            print_finish(o, cert)
        }
        Command::Chain {
            space,
            levels,
            out,
            cert,
            seed,
        } => {
            let o = run::chain_cmd(&space, &levels, out.as_deref(), seed)?;
            print_finish(o, cert)
        }
        Command::Extend {
            space,
            seeds,
            levels,
            cap,
            out,
            cert,
            seed,
        } => {
            let seeds: Vec<String> = seeds.split(',').map(str::to_string).collect();
            let o = run::extend_cmd(&space, &seeds, levels, cap, out.as_deref(), seed)?;
            print_finish(o, cert)
        }
        Command::EmitCsv {
            cert,
            selector,
            out,
        } => {
            let text = csv::emit_csv(&cert, &selector)?;
            match out {
                Some(p) => files::write_atomic(&p, &text)?,
                None => print!("{text}"),
            }
            Ok(0)
        }
        Command::RunScenario { scenario, jobs } => {
            let jobs = scenario::env_jobs().unwrap_or(jobs);
            scenario::run_scenario_file(&scenario, jobs)
        }
    }
}

fn print_finish(output: run::CommandOutput, cert: Option<PathBuf>) -> Result<i32, CliError> {
    if let Some(text) = run::finish(output, cert.as_deref())? {
        println!("{text}");
    }
    Ok(0)
}

fn main() {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
