//! Command implementations. Every command yields a certificate that echoes
//! its scenario and carries the verdicts and transcripts needed to replay or
//! audit the run; artifacts are written atomically.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use liplab_core::adversary::{
    audit_prefix, construct_gamma_star, verify_prefix_defeat, AdversaryOptions, TailRule,
};
use liplab_core::cube::{check_retraction_violation, defeat_family, CubePoint};
use liplab_core::enumeration::RationalEnumeration;
use liplab_core::extension::{
    build_extension_pipeline, extension_operator, finite_net, packing_maximality_witnesses,
    separated_chain,
};
use liplab_core::gaps::{build_gaps, DEFAULT_HORIZON};
use liplab_core::glued::{collapse_map, glued_distance, GluedPoint};
use liplab_core::lipschitz::max_feasible_map;
use liplab_core::metric::FiniteMetricSpace;
use liplab_core::rational::Rat;

use crate::files::{
    load_gap_structure, read_json, to_pretty_json, write_atomic, ChainDoc, ChainLevelsFile,
    CollapseTableFile, CubeFamilyFile, FamilyFile, GammaFile, GapStructureDoc, GluedSpaceFile,
    NetResultDoc, OperatorDoc, PrefixFile, RetractionTableFile, WitnessFile, SCHEMA_VERSION,
};
use crate::CliError;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScenarioEcho {
    pub kind: String,
    pub inputs: BTreeMap<String, String>,
    pub parameters: BTreeMap<String, String>,
    pub seed: u64,
}

#[derive(Serialize, Deserialize)]
pub struct Certificate {
    pub schema_version: u32,
    pub tool_version: String,
    pub scenario: ScenarioEcho,
    pub verdicts: Value,
    pub transcripts: Value,
    pub wall_clock_ms: u128,
}

pub struct CommandOutput {
    pub certificate: Certificate,
    pub artifacts: Vec<(PathBuf, String)>,
    /// Present when an expected verdict was falsified; maps to exit code 4.
    pub falsified: Option<String>,
}

fn echo(
    kind: &str,
    inputs: &[(&str, String)],
    parameters: &[(&str, String)],
    seed: u64,
) -> ScenarioEcho {
    ScenarioEcho {
        kind: kind.to_string(),
        inputs: inputs
            .iter()
            .map(|(k, v)| (k.to_string(), v.clone()))
            .collect(),
        parameters: parameters
            .iter()
            .map(|(k, v)| (k.to_string(), v.clone()))
            .collect(),
        seed,
    }
}

fn certify(
    scenario: ScenarioEcho,
    verdicts: Value,
    transcripts: Value,
    started: Instant,
) -> Certificate {
    Certificate {
        schema_version: SCHEMA_VERSION,
        tool_version: TOOL_VERSION.to_string(),
        scenario,
        verdicts,
        transcripts,
        wall_clock_ms: started.elapsed().as_millis(),
    }
}

fn guard<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Guard(e.to_string())
}

pub fn parse_rat(s: &str) -> Result<Rat, CliError> {
    s.parse()
        .map_err(|e| CliError::Parse(format!("bad rational {s:?}: {e}")))
}

pub fn parse_tail_rule(s: &str) -> Result<TailRule, CliError> {
    if s == "finite" {
        return Ok(TailRule::FinitelySupported);
    }
    if let Some(rest) = s.strip_prefix("geometric:") {
        let (ratio, extra) = rest.split_once(':').ok_or_else(|| {
            CliError::Parse(format!("tail rule {s:?}; expected geometric:RATIO:EXTRA"))
        })?;
        return Ok(TailRule::Geometric {
            ratio: parse_rat(ratio)?,
            extra_terms: extra
                .parse()
                .map_err(|e| CliError::Parse(format!("bad extra term count: {e}")))?,
        });
    }
    Err(CliError::Parse(format!(
        "tail rule {s:?}; expected finite or geometric:RATIO:EXTRA"
    )))
}

fn jval<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable")
}

#[allow(clippy::too_many_arguments)]
pub fn build_gaps_cmd(
    gamma_path: &Path,
    depth: usize,
    horizon: u64,
    audit: bool,
    out: Option<&Path>,
    seed: u64,
) -> Result<CommandOutput, CliError> {
    let started = Instant::now();
    let file: GammaFile = read_json(gamma_path)?;
    let enumeration = RationalEnumeration::default();
    let gamma = file.spec.build(enumeration)?;
    let gs = build_gaps(&gamma, enumeration, depth, horizon).map_err(guard)?;
    gs.validate().map_err(guard)?;
    if audit {
        gs.minimality_audit()
            .map_err(|e| CliError::Falsified(e.to_string()))?;
    }
    let doc = GapStructureDoc::from_structure(&gs);
    let verdicts = json!({
        "valid": true,
        "placed": gs.gaps.len(),
        "empty_sources": gs.empty_sources,
        "complement_measure_bound": jval(&gs.complement_measure_bound()),
        "minimality_audit": if audit { "passed" } else { "skipped" },
    });
    let scenario = echo(
        "build-gaps",
        &[("gamma", gamma_path.display().to_string())],
        &[
            ("depth", depth.to_string()),
            ("horizon", horizon.to_string()),
            ("enumeration", enumeration.name().to_string()),
        ],
        seed,
    );
    let mut artifacts = Vec::new();
    if let Some(out) = out {
        artifacts.push((out.to_path_buf(), to_pretty_json(&doc)));
    }
    Ok(CommandOutput {
        certificate: certify(
            scenario,
            verdicts,
            json!({ "structure": jval(&doc) }),
            started,
        ),
        artifacts,
        falsified: None,
    })
}

pub fn decide_lip_cmd(
    domain_path: &Path,
    codomain_path: &Path,
    k: &Rat,
    expect: Option<bool>,
    seed: u64,
) -> Result<CommandOutput, CliError> {
    let started = Instant::now();
    let domain = load_gap_structure(domain_path)?;
    let codomain = load_gap_structure(codomain_path)?;
    let res = max_feasible_map(&domain, &codomain, k).map_err(guard)?;
    let verdicts = json!({
        "feasible": res.feasible,
        "terminal_value": jval(&res.terminal_value),
    });
    let transcripts = json!({ "feasibility": jval(&res) });
    let falsified = match expect {
        Some(want) if want != res.feasible => Some(format!(
            "expected {}, decided {}",
            if want { "feasible" } else { "infeasible" },
            if res.feasible {
                "feasible"
            } else {
                "infeasible"
            }
        )),
        _ => None,
    };
    let scenario = echo(
        "decide-lip",
        &[
            ("domain", domain_path.display().to_string()),
            ("codomain", codomain_path.display().to_string()),
        ],
        &[
            ("k", k.to_string()),
            (
                "expect",
                expect
                    .map(|b| if b { "feasible" } else { "infeasible" }.to_string())
                    .unwrap_or_else(|| "none".to_string()),
            ),
        ],
        seed,
    );
    Ok(CommandOutput {
        certificate: certify(scenario, verdicts, transcripts, started),
        artifacts: vec![],
        falsified,
    })
}

pub fn make_adversary_cmd(
    family_path: &Path,
    k: &Rat,
    out: Option<&Path>,
    seed: u64,
) -> Result<CommandOutput, CliError> {
    let started = Instant::now();
    let file: FamilyFile = read_json(family_path)?;
    let enumeration = RationalEnumeration::default();
    let members: Result<Vec<_>, _> = file.members.iter().map(|m| m.build(enumeration)).collect();
    let members = members?;
    let prefix = construct_gamma_star(&members, k, enumeration, &AdversaryOptions::default())
        .map_err(guard)?;
    let doc = PrefixFile {
        schema_version: SCHEMA_VERSION,
        enumeration,
        prefix: prefix.clone(),
    };
    let verdicts = json!({
        "family_size": prefix.family.len(),
        "gamma_star": jval(&prefix.gamma_star),
        "n_omega": prefix.steps.iter().map(|s| s.n_omega).collect::<Vec<_>>(),
    });
    let scenario = echo(
        "make-adversary",
        &[("family", family_path.display().to_string())],
        &[("k", k.to_string())],
        seed,
    );
    let mut artifacts = Vec::new();
    if let Some(out) = out {
        artifacts.push((out.to_path_buf(), to_pretty_json(&doc)));
    }
    Ok(CommandOutput {
        certificate: certify(
            scenario,
            verdicts,
            json!({ "prefix": jval(&doc.prefix) }),
            started,
        ),
        artifacts,
        falsified: None,
    })
}

#[allow(clippy::too_many_arguments)]
pub fn verify_adversary_cmd(
    prefix_path: &Path,
    depth_domain: usize,
    depth_codomain: usize,
    tail: &TailRule,
    k_override: Option<&Rat>,
    seed: u64,
) -> Result<CommandOutput, CliError> {
    let started = Instant::now();
    let file: PrefixFile = read_json(prefix_path)?;
    // a failed audit is evidence, not a reason to stop: the decider still
    // runs and attaches any feasible witness
    let audit = match audit_prefix(&file.prefix, file.enumeration, DEFAULT_HORIZON) {
        Ok(()) => "passed".to_string(),
        Err(e) => format!("failed: {e}"),
    };
    let verdicts_raw = verify_prefix_defeat(
        &file.prefix,
        tail,
        depth_domain,
        depth_codomain,
        file.enumeration,
        DEFAULT_HORIZON,
        k_override,
    )
    .map_err(guard)?;
    let feasible_members: Vec<usize> = verdicts_raw
        .iter()
        .filter(|v| !v.infeasible)
        .map(|v| v.member)
        .collect();
    let verdicts = Value::Array(
        verdicts_raw
            .iter()
            .map(|v| {
                json!({
                    "member": v.member,
                    "verdict": if v.infeasible { "INFEASIBLE" } else { "FEASIBLE" },
                    "terminal_value": jval(&v.feasibility.terminal_value),
                })
            })
            .collect(),
    );
    let transcripts = json!({ "members": jval(&verdicts_raw), "prefix_audit": audit });
    let falsified = if feasible_members.is_empty() {
        None
    } else {
        Some(format!(
            "members {feasible_members:?} admit a feasible map; the witness is attached"
        ))
    };
    let scenario = echo(
        "verify-adversary",
        &[("prefix", prefix_path.display().to_string())],
        &[
            ("depth_domain", depth_domain.to_string()),
            ("depth_codomain", depth_codomain.to_string()),
            ("tail", format!("{tail:?}")),
            (
                "k",
                k_override
                    .map(|k| k.to_string())
                    .unwrap_or_else(|| "prefix".to_string()),
            ),
        ],
        seed,
    );
    Ok(CommandOutput {
        certificate: certify(scenario, verdicts, transcripts, started),
        artifacts: vec![],
        falsified,
    })
}

pub fn glue_dist_cmd(
    space_path: &Path,
    p_json: &str,
    q_json: &str,
    seed: u64,
) -> Result<CommandOutput, CliError> {
    let started = Instant::now();
    let space = read_json::<GluedSpaceFile>(space_path)?.into_space()?;
    let p: GluedPoint =
        serde_json::from_str(p_json).map_err(|e| CliError::Parse(format!("bad point: {e}")))?;
    let q: GluedPoint =
        serde_json::from_str(q_json).map_err(|e| CliError::Parse(format!("bad point: {e}")))?;
    let d = glued_distance(&p, &q, &space).map_err(guard)?;
    let scenario = echo(
        "glue-dist",
        &[("space", space_path.display().to_string())],
        &[("p", p_json.to_string()), ("q", q_json.to_string())],
        seed,
    );
    Ok(CommandOutput {
        certificate: certify(
            scenario,
            json!({ "distance": jval(&d), "distance_decimal": d.decimal(12) }),
            Value::Null,
            started,
        ),
        artifacts: vec![],
        falsified: None,
    })
}

pub fn collapse_cmd(
    space_path: &Path,
    table_path: &Path,
    k: &Rat,
    domain_path: Option<&Path>,
    seed: u64,
) -> Result<CommandOutput, CliError> {
    let started = Instant::now();
    let space = read_json::<GluedSpaceFile>(space_path)?.into_space()?;
    let table_file: CollapseTableFile = read_json(table_path)?;
    let table: Vec<(Rat, GluedPoint)> = table_file
        .table
        .into_iter()
        .map(|e| (e.x, e.image))
        .collect();
    if let Some(dp) = domain_path {
        let domain = load_gap_structure(dp)?;
        for (x, _) in &table {
            if !domain.complement_contains(x) {
                return Err(CliError::Guard(format!(
                    "table key {x} is not a point of the declared domain structure"
                )));
            }
        }
    }
    let res = collapse_map(&table, k, &space).map_err(|e| match e {
        liplab_core::glued::GluedError::Soundness(m) => CliError::Falsified(m),
        other => CliError::Guard(other.to_string()),
    })?;
    let scenario = echo(
        "collapse",
        &[
            ("space", space_path.display().to_string()),
            ("table", table_path.display().to_string()),
            (
                "domain",
                domain_path
                    .map(|p| p.display().to_string())
                    .unwrap_or_else(|| "none".to_string()),
            ),
        ],
        &[("k", k.to_string())],
        seed,
    );
    Ok(CommandOutput {
        certificate: certify(
            scenario,
            json!({
                "p": jval(&res.p),
                "q": jval(&res.q),
                "n0": res.n0,
            }),
            json!({ "f0": jval(&res.f0) }),
            started,
        ),
        artifacts: vec![],
        falsified: None,
    })
}

pub fn cube_defeat_cmd(
    family_path: &Path,
    ks: &[Rat],
    beta0: Option<usize>,
    out: Option<&Path>,
    seed: u64,
) -> Result<CommandOutput, CliError> {
    let started = Instant::now();
    let file: CubeFamilyFile = read_json(family_path)?;
    if ks.is_empty() {
        return Err(CliError::Parse("need at least one K".into()));
    }
    let mut witnesses = Vec::new();
    for k in ks {
        witnesses.push(defeat_family(&file.sheets, k, beta0).map_err(guard)?);
    }
    let verdicts = Value::Array(
        witnesses
            .iter()
            .map(|w| {
                json!({
                    "k": jval(&w.k),
                    "beta0": w.beta0,
                    "gamma_star_beta0": jval(&w.gamma_star.gamma[w.beta0]),
                    "d_p_q": jval(&w.d_p_q),
                    "bound": jval(&w.bound),
                })
            })
            .collect(),
    );
    let scenario = echo(
        "cube-defeat",
        &[("family", family_path.display().to_string())],
        &[
            (
                "k",
                ks.iter().map(Rat::to_string).collect::<Vec<_>>().join(","),
            ),
            (
                "beta0",
                beta0
                    .map(|b| b.to_string())
                    .unwrap_or_else(|| "auto".to_string()),
            ),
        ],
        seed,
    );
    let mut artifacts = Vec::new();
    if let Some(out) = out {
        let doc = WitnessFile {
            schema_version: SCHEMA_VERSION,
            witness: witnesses[0].clone(),
        };
        artifacts.push((out.to_path_buf(), to_pretty_json(&doc)));
    }
    Ok(CommandOutput {
        certificate: certify(
            scenario,
            verdicts,
            json!({ "witnesses": jval(&witnesses) }),
            started,
        ),
        artifacts,
        falsified: None,
    })
}

pub fn cube_check_cmd(
    retraction_path: &Path,
    witness_path: &Path,
    k_override: Option<&Rat>,
    seed: u64,
) -> Result<CommandOutput, CliError> {
    let started = Instant::now();
    let table_file: RetractionTableFile = read_json(retraction_path)?;
    let witness_file: WitnessFile = read_json(witness_path)?;
    let witness = witness_file.witness;
    let table: Vec<(CubePoint, CubePoint)> = table_file
        .table
        .into_iter()
        .map(|e| (e.point, e.image))
        .collect();
    let k = k_override.unwrap_or(&witness.k).clone();
    let report = check_retraction_violation(&table, &k, &witness).map_err(guard)?;
    let falsified = if !report.violated && report.issues.is_empty() {
        Some(format!(
            "candidate retraction respected the budget: lhs {} <= rhs {}",
            report.lhs, report.rhs
        ))
    } else {
        None
    };
    let scenario = echo(
        "cube-check",
        &[
            ("retraction", retraction_path.display().to_string()),
            ("witness", witness_path.display().to_string()),
        ],
        &[("k", k.to_string())],
        seed,
    );
    Ok(CommandOutput {
        certificate: certify(
            scenario,
            json!({
                "violated": report.violated,
                "lhs": jval(&report.lhs),
                "rhs": jval(&report.rhs),
                "issues": report.issues.len(),
            }),
            json!({ "report": jval(&report) }),
            started,
        ),
        artifacts: vec![],
        falsified,
    })
}

fn resolve_ids(space: &FiniteMetricSpace, ids: &[String]) -> Result<Vec<usize>, CliError> {
    ids.iter()
        .map(|id| {
            space
                .index_of(id)
                .map_err(|e| CliError::Parse(e.to_string()))
        })
        .collect()
}

fn load_space(path: &Path) -> Result<FiniteMetricSpace, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Parse(format!("cannot read {}: {e}", path.display())))?;
    FiniteMetricSpace::from_matrix_text(&text).map_err(|e| CliError::Parse(e.to_string()))
}

#[allow(clippy::too_many_arguments)]
pub fn net_cmd(
    space_path: &Path,
    points: &[String],
    k: usize,
    eps: &Rat,
    cap: u128,
    out: Option<&Path>,
    seed: u64,
) -> Result<CommandOutput, CliError> {
    let started = Instant::now();
    let space = load_space(space_path)?;
    let f_set = resolve_ids(&space, points)?;
    let net = finite_net(&space, &f_set, k, eps, None, cap).map_err(guard)?;
    let doc = NetResultDoc {
        schema_version: SCHEMA_VERSION,
        ids: space.ids().to_vec(),
        net: net.clone(),
    };
    let scenario = echo(
        "net",
        &[("space", space_path.display().to_string())],
        &[
            ("points", points.join(",")),
            ("k", k.to_string()),
            ("eps", eps.to_string()),
        ],
        seed,
    );
    let mut artifacts = Vec::new();
    if let Some(out) = out {
        artifacts.push((out.to_path_buf(), to_pretty_json(&doc)));
    }
    Ok(CommandOutput {
        certificate: certify(
            scenario,
            json!({
                "centers": net.centers.len(),
                "z_size": net.z.len(),
                "radius": jval(&net.radius),
            }),
            json!({ "net": jval(&doc) }),
            started,
        ),
        artifacts,
        falsified: None,
    })
}

pub fn chain_cmd(
    space_path: &Path,
    levels_path: &Path,
    out: Option<&Path>,
    seed: u64,
) -> Result<CommandOutput, CliError> {
    let started = Instant::now();
    let space = load_space(space_path)?;
    let file: ChainLevelsFile = read_json(levels_path)?;
    let f_chain: Result<Vec<Vec<usize>>, CliError> = file
        .f_chain
        .iter()
        .map(|level| resolve_ids(&space, level))
        .collect();
    let chain = separated_chain(&space, &f_chain?, &file.eps_chain).map_err(guard)?;
    let witnesses = packing_maximality_witnesses(&chain, &space)
        .map_err(|e| CliError::Falsified(e.to_string()))?;
    let doc = ChainDoc {
        schema_version: SCHEMA_VERSION,
        ids: space.ids().to_vec(),
        chain: chain.clone(),
    };
    let scenario = echo(
        "chain",
        &[
            ("space", space_path.display().to_string()),
            ("levels", levels_path.display().to_string()),
        ],
        &[],
        seed,
    );
    let mut artifacts = Vec::new();
    if let Some(out) = out {
        artifacts.push((out.to_path_buf(), to_pretty_json(&doc)));
    }
    Ok(CommandOutput {
        certificate: certify(
            scenario,
            json!({
                "levels": chain.d_chain.len(),
                "final_size": chain.d_chain.last().map(Vec::len),
                "excluded": witnesses.len(),
            }),
            json!({ "chain": jval(&doc), "blocking_pairs": jval(&witnesses) }),
            started,
        ),
        artifacts,
        falsified: None,
    })
}

#[allow(clippy::too_many_arguments)]
pub fn extend_cmd(
    space_path: &Path,
    seeds: &[String],
    levels: usize,
    cap: u128,
    out: Option<&Path>,
    seed: u64,
) -> Result<CommandOutput, CliError> {
    let started = Instant::now();
    let space = load_space(space_path)?;
    let seed_ids = resolve_ids(&space, seeds)?;
    let pipeline = build_extension_pipeline(&space, &seed_ids, levels, cap).map_err(guard)?;
    let f_chain: Vec<Vec<usize>> = pipeline.iter().map(|l| l.f_set.clone()).collect();
    let eps_chain: Vec<Rat> = pipeline.iter().map(|l| l.eps.clone()).collect();
    let chain = separated_chain(&space, &f_chain, &eps_chain).map_err(guard)?;
    let op = extension_operator(&space, &pipeline, &chain).map_err(guard)?;
    let doc = OperatorDoc {
        schema_version: SCHEMA_VERSION,
        ids: space.ids().to_vec(),
        operator: op.clone(),
    };
    let scenario = echo(
        "extend",
        &[("space", space_path.display().to_string())],
        &[("seeds", seeds.join(",")), ("levels", levels.to_string())],
        seed,
    );
    let mut artifacts = Vec::new();
    if let Some(out) = out {
        artifacts.push((out.to_path_buf(), to_pretty_json(&doc)));
    }
    Ok(CommandOutput {
        certificate: certify(
            scenario,
            json!({
                "norm_certificate": jval(&op.norm_certificate),
                "norm_certificate_decimal": op.norm_certificate.decimal(12),
                "s_size": op.s.len(),
                "core_size": op.core.len(),
                "certified_size": op.certified.len(),
            }),
            json!({ "operator": jval(&doc), "pipeline": jval(&pipeline), "chain": jval(&chain) }),
            started,
        ),
        artifacts,
        falsified: None,
    })
}

/// Write artifacts and the certificate; returns the printable certificate.
pub fn finish(output: CommandOutput, cert_path: Option<&Path>) -> Result<Option<String>, CliError> {
    for (path, contents) in &output.artifacts {
        write_atomic(path, contents)?;
    }
    let text = to_pretty_json(&output.certificate);
    match cert_path {
        Some(p) => {
            write_atomic(p, &text)?;
            if let Some(msg) = output.falsified {
                return Err(CliError::Falsified(msg));
            }
            Ok(None)
        }
        None => {
            if let Some(msg) = output.falsified {
                // still show the certificate before failing
                println!("{text}");
                return Err(CliError::Falsified(msg));
            }
            Ok(Some(text))
        }
    }
}
