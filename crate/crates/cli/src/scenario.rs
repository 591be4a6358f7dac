//! Scenario documents: a single structured description per run, dispatched to
//! the owning command. Batches run scenarios concurrently; every scenario
//! writes its own certificate, so the parallelism degree cannot change any
//! output byte.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use liplab_core::extension::DEFAULT_ENUMERATION_CAP;
use liplab_core::gaps::DEFAULT_HORIZON;

use crate::files::read_json;
use crate::run::{self, CommandOutput};
use crate::CliError;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Scenario {
    pub schema_version: u32,
    pub kind: String,
    #[serde(default)]
    pub inputs: BTreeMap<String, String>,
    #[serde(default)]
    pub parameters: BTreeMap<String, String>,
    #[serde(default)]
    pub seed: u64,
    /// Certificate destination; required inside a batch.
    #[serde(default)]
    pub out: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScenarioFile {
    Batch {
        schema_version: u32,
        batch: Vec<Scenario>,
    },
    Single(Scenario),
}

fn input<'a>(s: &'a Scenario, key: &str) -> Result<&'a str, CliError> {
    s.inputs
        .get(key)
        .map(String::as_str)
        .ok_or_else(|| CliError::Parse(format!("scenario misses input {key:?}")))
}

fn param<'a>(s: &'a Scenario, key: &str) -> Option<&'a str> {
    s.parameters.get(key).map(String::as_str)
}

fn required_param<'a>(s: &'a Scenario, key: &str) -> Result<&'a str, CliError> {
    param(s, key).ok_or_else(|| CliError::Parse(format!("scenario misses parameter {key:?}")))
}

fn parse_usize(s: &str, what: &str) -> Result<usize, CliError> {
    s.parse()
        .map_err(|e| CliError::Parse(format!("bad {what}: {e}")))
}

/// Dispatch one scenario to its command implementation.
pub fn run_scenario(s: &Scenario) -> Result<CommandOutput, CliError> {
    match s.kind.as_str() {
        "build-gaps" => run::build_gaps_cmd(
            Path::new(input(s, "gamma")?),
            parse_usize(required_param(s, "depth")?, "depth")?,
            param(s, "horizon")
                .map(|h| parse_usize(h, "horizon").map(|v| v as u64))
                .transpose()?
                .unwrap_or(DEFAULT_HORIZON),
            param(s, "audit") != Some("false"),
            param(s, "artifact").map(Path::new),
            s.seed,
        ),
        "decide-lip" => run::decide_lip_cmd(
            Path::new(input(s, "domain")?),
            Path::new(input(s, "codomain")?),
            &run::parse_rat(required_param(s, "k")?)?,
            match param(s, "expect") {
                None | Some("none") => None,
                Some("feasible") => Some(true),
                Some("infeasible") => Some(false),
                Some(other) => return Err(CliError::Parse(format!("bad expectation {other:?}"))),
            },
            s.seed,
        ),
        "make-adversary" => run::make_adversary_cmd(
            Path::new(input(s, "family")?),
            &run::parse_rat(required_param(s, "k")?)?,
            param(s, "artifact").map(Path::new),
            s.seed,
        ),
        "verify-adversary" => {
            let depth_domain = parse_usize(required_param(s, "depth_domain")?, "depth")?;
            let tail = match param(s, "tail") {
                Some(t) => run::parse_tail_rule(t)?,
                None => liplab_core::adversary::TailRule::Geometric {
                    ratio: run::parse_rat("1/2")?,
                    extra_terms: depth_domain,
                },
            };
            run::verify_adversary_cmd(
                Path::new(input(s, "prefix")?),
                depth_domain,
                parse_usize(required_param(s, "depth_codomain")?, "depth")?,
                &tail,
                param(s, "k").map(run::parse_rat).transpose()?.as_ref(),
                s.seed,
            )
        }
        "glue-dist" => run::glue_dist_cmd(
            Path::new(input(s, "space")?),
            required_param(s, "p")?,
            required_param(s, "q")?,
            s.seed,
        ),
        "collapse" => run::collapse_cmd(
            Path::new(input(s, "space")?),
            Path::new(input(s, "table")?),
            &run::parse_rat(required_param(s, "k")?)?,
            s.inputs.get("domain").map(Path::new),
            s.seed,
        ),
        "cube-defeat" => {
            let ks: Result<Vec<_>, _> = required_param(s, "k")?
                .split(',')
                .map(run::parse_rat)
                .collect();
            run::cube_defeat_cmd(
                Path::new(input(s, "family")?),
                &ks?,
                param(s, "beta0")
                    .map(|b| parse_usize(b, "beta0"))
                    .transpose()?,
                param(s, "artifact").map(Path::new),
                s.seed,
            )
        }
        "cube-check" => run::cube_check_cmd(
            Path::new(input(s, "retraction")?),
            Path::new(input(s, "witness")?),
            param(s, "k").map(run::parse_rat).transpose()?.as_ref(),
            s.seed,
        ),
        "net" => run::net_cmd(
            Path::new(input(s, "space")?),
            &required_param(s, "points")?
                .split(',')
                .map(str::to_string)
                .collect::<Vec<_>>(),
            parse_usize(required_param(s, "k")?, "k")?,
            &run::parse_rat(required_param(s, "eps")?)?,
            param(s, "cap")
                .map(|c| parse_usize(c, "cap").map(|v| v as u128))
                .transpose()?
                .unwrap_or(DEFAULT_ENUMERATION_CAP),
            param(s, "artifact").map(Path::new),
            s.seed,
        ),
        "chain" => run::chain_cmd(
            Path::new(input(s, "space")?),
            Path::new(input(s, "levels")?),
            param(s, "artifact").map(Path::new),
            s.seed,
        ),
        "extend" => run::extend_cmd(
            Path::new(input(s, "space")?),
            &required_param(s, "seeds")?
                .split(',')
                .map(str::to_string)
                .collect::<Vec<_>>(),
            parse_usize(required_param(s, "levels")?, "levels")?,
            param(s, "cap")
                .map(|c| parse_usize(c, "cap").map(|v| v as u128))
                .transpose()?
                .unwrap_or(DEFAULT_ENUMERATION_CAP),
            param(s, "artifact").map(Path::new),
            s.seed,
        ),
        other => Err(CliError::Parse(format!("unknown scenario kind {other:?}"))),
    }
}

/// Run a scenario file; batches fan out over `jobs` worker threads.
/// Returns the highest exit code encountered (0 when everything passed).
pub fn run_scenario_file(path: &Path, jobs: usize) -> Result<i32, CliError> {
    let file: ScenarioFile = read_json(path)?;
    match file {
        ScenarioFile::Single(s) => {
            let out = run_scenario(&s)?;
            let printable = run::finish(out, s.out.as_deref().map(Path::new))?;
            if let Some(text) = printable {
                println!("{text}");
            }
            Ok(0)
        }
        ScenarioFile::Batch { batch, .. } => {
            for s in &batch {
                if s.out.is_none() {
                    return Err(CliError::Parse(
                        "every scenario in a batch needs an \"out\" certificate path".into(),
                    ));
                }
            }
            let jobs = jobs.max(1);
            let results: Vec<Result<(), CliError>> = std::thread::scope(|scope| {
                let mut handles = Vec::new();
                for chunk in batch.chunks(batch.len().div_ceil(jobs)) {
                    handles.push(scope.spawn(move || {
                        chunk
                            .iter()
                            .map(|s| {
                                let out = run_scenario(s)?;
                                run::finish(out, s.out.as_deref().map(Path::new))?;
                                Ok(())
                            })
                            .collect::<Vec<Result<(), CliError>>>()
                    }));
                }
                handles
                    .into_iter()
                    .flat_map(|h| h.join().expect("worker panicked"))
                    .collect()
            });
            let mut worst = 0;
            for (s, r) in batch.iter().zip(&results) {
                if let Err(e) = r {
                    eprintln!("scenario for {:?} failed: {e}", s.out);
                    worst = worst.max(e.exit_code());
                }
            }
            Ok(worst)
        }
    }
}

/// Jobs override from the environment, the one permitted env knob.
pub fn env_jobs() -> Option<usize> {
    std::env::var("LIPLAB_JOBS")
        .ok()
        .and_then(|v| v.parse().ok())
}
