//! Diagonal construction of a gap-length prefix that defeats a finite family:
//! no monotone K-Lipschitz map from the constructed structure onto any family
//! member's truncation can fix both 0 and 1.
//!
//! Each step sweeps the target's gaps along every ordering of the previous
//! indices, records the minimal escaping gap index per ordering, and then
//! picks the next prefix term far below the shortest gap any chain reached.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::enumeration::RationalEnumeration;
use crate::gaps::{build_gaps, GammaSequence, GapError, GapStructure};
use crate::lipschitz::{max_feasible_map, sweeping, FeasibilityResult, LipError};
use crate::rational::Rat;

pub const FAMILY_GUARD: usize = 8;

#[derive(Debug, Error)]
pub enum AdvError {
    #[error("guard violated: {0}")]
    Guard(String),
    #[error("family invalid: {0}")]
    InvalidFamily(String),
    #[error("target depth {depth} insufficient while scanning for n > {after}")]
    DepthInsufficient { depth: usize, after: usize },
    #[error("chain invariant violated: {0}")]
    ChainInvariant(String),
    #[error(transparent)]
    Gap(#[from] GapError),
    #[error(transparent)]
    Lip(#[from] LipError),
}

/// One ordering's escape chain over a target structure.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepChain {
    /// 1-based family index of the target.
    pub target_index: usize,
    /// Ordering of the previous prefix indices.
    pub sigma: Vec<usize>,
    /// Gap indices `n_0 = 1, n_(j1), ..., n_sigma`, strictly increasing.
    pub chain: Vec<usize>,
    /// Accumulated sweep sets, one per ordering element, as merged disjoint
    /// open intervals with their exact total measure.
    pub sweep_sets: Vec<SweepSet>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepSet {
    pub intervals: Vec<(Rat, Rat)>,
    pub measure: Rat,
}

/// Per-step transcript of the construction.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StepRecord {
    /// Prefix index produced by this step (step i+1 targets member i+1).
    pub step: usize,
    pub n_omega: usize,
    pub depth_used: usize,
    pub chains: Vec<SweepChain>,
}

/// The constructed prefix with its full transcript.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AdversaryPrefix {
    pub k: Rat,
    pub eps0: Rat,
    pub family: Vec<GammaSequence>,
    pub gamma_star: Vec<Rat>,
    pub steps: Vec<StepRecord>,
}

/// How the prefix extends to a full sequence for deeper truncations.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TailRule {
    FinitelySupported,
    Geometric { ratio: Rat, extra_terms: usize },
}

#[derive(Clone, Copy, Debug)]
pub struct AdversaryOptions {
    pub initial_depth: usize,
    pub max_depth: usize,
    pub horizon: u64,
}

impl Default for AdversaryOptions {
    fn default() -> Self {
        AdversaryOptions {
            initial_depth: 32,
            max_depth: 4096,
            horizon: crate::gaps::DEFAULT_HORIZON,
        }
    }
}

/// Verdict of the decider against one family member.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MemberVerdict {
    pub member: usize,
    pub infeasible: bool,
    pub feasibility: FeasibilityResult,
}

fn merge_open_intervals(mut ivs: Vec<(Rat, Rat)>) -> Vec<(Rat, Rat)> {
    ivs.sort_by(|a, b| a.0.cmp(&b.0));
    let mut out: Vec<(Rat, Rat)> = Vec::new();
    for (lo, hi) in ivs {
        match out.last_mut() {
            // touching open intervals do not merge: the shared endpoint is
            // not covered
            Some((_, phi)) if lo < *phi => {
                if hi > *phi {
                    *phi = hi;
                }
            }
            _ => out.push((lo, hi)),
        }
    }
    out
}

fn covered_by(merged: &[(Rat, Rat)], lo: &Rat, hi: &Rat) -> bool {
    merged.iter().any(|(a, b)| a <= lo && hi <= b)
}

/// Walk the escape chain for one ordering over a built target structure.
///
/// Starting from the first gap, each ordering element `j` sweeps the current
/// gap by radius `K * gamma_star[j]`; the next chain entry is the least gap
/// index past the current one whose gap escapes the accumulated sweep set.
pub fn sweep_chain(
    target: &GapStructure,
    target_index: usize,
    sigma: &[usize],
    gamma_star_prefix: &[Rat],
    k: &Rat,
) -> Result<SweepChain, AdvError> {
    for &j in sigma {
        if j == 0 || j > gamma_star_prefix.len() {
            return Err(AdvError::Guard(format!(
                "ordering element {j} outside prefix of length {}",
                gamma_star_prefix.len()
            )));
        }
    }
    let eps0 = target.gamma.eps0().clone();
    let mut chain = vec![1usize];
    let mut raw: Vec<(Rat, Rat)> = Vec::new();
    let mut sweep_sets = Vec::new();
    let mut budget = Rat::zero();

    for &j in sigma {
        let cur = target
            .gap_by_source(*chain.last().unwrap())
            .ok_or_else(|| AdvError::ChainInvariant("chain entry names an empty gap".into()))?;
        let radius = k * &gamma_star_prefix[j - 1];
        let sw = sweeping(&cur.left, &cur.right(), &radius)?;
        if let Some(iv) = sw.result {
            raw.push(iv);
        }
        let merged = merge_open_intervals(raw.clone());
        let measure = merged.iter().fold(Rat::zero(), |acc, (a, b)| acc + (b - a));
        budget = budget + Rat::pow2_neg(j as u32) * &eps0;
        if measure >= budget {
            return Err(AdvError::ChainInvariant(format!(
                "sweep set measure {measure} reached its budget {budget}"
            )));
        }
        sweep_sets.push(SweepSet {
            intervals: merged.clone(),
            measure,
        });

        let mut n = chain.last().unwrap() + 1;
        loop {
            if n > target.depth {
                return Err(AdvError::DepthInsufficient {
                    depth: target.depth,
                    after: *chain.last().unwrap(),
                });
            }
            if let Some(g) = target.gap_by_source(n) {
                if !covered_by(&merged, &g.left, &g.right()) {
                    break;
                }
            }
            n += 1;
        }
        chain.push(n);
    }

    Ok(SweepChain {
        target_index,
        sigma: sigma.to_vec(),
        chain,
        sweep_sets,
    })
}

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.is_empty() {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for (i, &x) in items.iter().enumerate() {
        let mut rest = items.to_vec();
        rest.remove(i);
        for mut tail in permutations(&rest) {
            let mut perm = vec![x];
            perm.append(&mut tail);
            out.push(perm);
        }
    }
    out
}

/// Build the defeating prefix for a finite family sharing one eps0.
pub fn construct_gamma_star(
    family: &[GammaSequence],
    k: &Rat,
    enumeration: RationalEnumeration,
    opts: &AdversaryOptions,
) -> Result<AdversaryPrefix, AdvError> {
    if family.is_empty() {
        return Err(AdvError::InvalidFamily("family is empty".into()));
    }
    if family.len() > FAMILY_GUARD {
        return Err(AdvError::Guard(format!(
            "family size {} exceeds the ordering-enumeration guard {FAMILY_GUARD}",
            family.len()
        )));
    }
    if k < &Rat::one() {
        return Err(AdvError::Guard(format!("K must be at least 1, got {k}")));
    }
    let eps0 = family[0].eps0().clone();
    for (i, g) in family.iter().enumerate() {
        if g.eps0() != &eps0 {
            return Err(AdvError::InvalidFamily(format!(
                "member {} has eps0 = {}, expected {eps0}",
                i + 1,
                g.eps0()
            )));
        }
        if g.is_empty() {
            return Err(AdvError::InvalidFamily(format!(
                "member {} has no terms",
                i + 1
            )));
        }
    }

    let quarter = Rat::pow2_neg(2);
    let k_inv = k.recip();
    let mut gamma_star = vec![&quarter * &k_inv * &eps0 * family[0].term(1)];
    let mut steps: Vec<StepRecord> = Vec::new();

    for i in 1..family.len() {
        let target = &family[i];
        let mut depth = opts.initial_depth.min(target.len());
        let perms = permutations(&(1..=i).collect::<Vec<_>>());
        let (chains, depth_used) = loop {
            let gs = build_gaps(target, enumeration, depth, opts.horizon)?;
            let mut chains = Vec::with_capacity(perms.len());
            let mut insufficient = false;
            for sigma in &perms {
                match sweep_chain(&gs, i + 1, sigma, &gamma_star, k) {
                    Ok(c) => chains.push(c),
                    Err(AdvError::DepthInsufficient { .. }) => {
                        insufficient = true;
                        break;
                    }
                    Err(e) => return Err(e),
                }
            }
            if !insufficient {
                break (chains, depth);
            }
            if depth >= target.len() || depth >= opts.max_depth {
                return Err(AdvError::DepthInsufficient { depth, after: 0 });
            }
            depth = (depth * 2).min(target.len()).min(opts.max_depth);
        };

        // chain gaps must shrink strictly along each chain, and the overall
        // maximum index must name the shortest reached gap
        let mut n_omega = 0usize;
        for c in &chains {
            for w in c.chain.windows(2) {
                if w[1] <= w[0] {
                    return Err(AdvError::ChainInvariant("chain not increasing".into()));
                }
                if target.term(w[1]) >= target.term(w[0]) {
                    return Err(AdvError::ChainInvariant(format!(
                        "gap length did not shrink strictly from index {} to {}",
                        w[0], w[1]
                    )));
                }
            }
            n_omega = n_omega.max(*c.chain.last().unwrap());
        }
        for c in &chains {
            if target.term(n_omega) > target.term(*c.chain.last().unwrap()) {
                return Err(AdvError::ChainInvariant(
                    "maximal chain index is not the shortest reached gap".into(),
                ));
            }
        }

        // half the strict bound, then shrink until the next gap is placeable
        // and the prefix stays strictly decreasing
        let bound = Rat::pow2_neg(i as u32 + 2) * &k_inv * &eps0 * target.term(n_omega);
        let mut cand = bound / Rat::int(2);
        let mut shrinks = 0;
        loop {
            if &cand < gamma_star.last().unwrap() {
                let mut terms = gamma_star.clone();
                terms.push(cand.clone());
                let seq = GammaSequence::new(eps0.clone(), terms, Rat::zero(), enumeration)?;
                let pgs = build_gaps(&seq, enumeration, i + 1, opts.horizon)?;
                if pgs.empty_sources.is_empty() {
                    break;
                }
            }
            cand = cand / Rat::int(2);
            shrinks += 1;
            if shrinks > 200 {
                return Err(AdvError::ChainInvariant(
                    "shrink loop failed to place the next gap".into(),
                ));
            }
        }
        gamma_star.push(cand);
        steps.push(StepRecord {
            step: i + 1,
            n_omega,
            depth_used,
            chains,
        });
    }

    let prefix = AdversaryPrefix {
        k: k.clone(),
        eps0,
        family: family.to_vec(),
        gamma_star,
        steps,
    };
    audit_prefix(&prefix, enumeration, opts.horizon)?;
    Ok(prefix)
}

/// Re-check the constructed prefix: every term sits below its exponential
/// bound and every prefix gap is placeable.
pub fn audit_prefix(
    prefix: &AdversaryPrefix,
    enumeration: RationalEnumeration,
    horizon: u64,
) -> Result<(), AdvError> {
    let k_inv = prefix.k.recip();
    for (i, term) in prefix.gamma_star.iter().enumerate() {
        let bound = Rat::pow2_neg(i as u32 + 2) * &k_inv * &prefix.eps0;
        if term >= &bound {
            return Err(AdvError::ChainInvariant(format!(
                "term {} = {term} reaches its bound {bound}",
                i + 1
            )));
        }
        if i > 0 && term >= &prefix.gamma_star[i - 1] {
            return Err(AdvError::ChainInvariant(format!(
                "prefix is not strictly decreasing at index {}",
                i + 1
            )));
        }
    }
    let seq = GammaSequence::new(
        prefix.eps0.clone(),
        prefix.gamma_star.clone(),
        Rat::zero(),
        enumeration,
    )?;
    let gs = build_gaps(&seq, enumeration, prefix.gamma_star.len(), horizon)?;
    if !gs.empty_sources.is_empty() {
        return Err(AdvError::ChainInvariant(format!(
            "prefix gaps {:?} are empty at the working depth",
            gs.empty_sources
        )));
    }
    Ok(())
}

/// Extend the prefix to a full sequence by the tail rule.
pub fn extend_gamma(
    prefix: &AdversaryPrefix,
    tail_rule: &TailRule,
    enumeration: RationalEnumeration,
) -> Result<GammaSequence, AdvError> {
    let mut terms = prefix.gamma_star.clone();
    let tail = match tail_rule {
        TailRule::FinitelySupported => Rat::zero(),
        TailRule::Geometric { ratio, extra_terms } => {
            if !ratio.is_positive() || ratio >= &Rat::one() {
                return Err(AdvError::Guard(format!(
                    "geometric tail ratio must lie in (0, 1), got {ratio}"
                )));
            }
            let mut t = terms.last().unwrap().clone();
            for _ in 0..*extra_terms {
                t = &t * ratio;
                terms.push(t.clone());
            }
            terms.last().unwrap() * ratio / (Rat::one() - ratio)
        }
    };
    Ok(GammaSequence::new(
        prefix.eps0.clone(),
        terms,
        tail,
        enumeration,
    )?)
}

/// Run the decider from the extended prefix structure onto every family
/// member's truncation. A defeat means every member is infeasible.
pub fn verify_prefix_defeat(
    prefix: &AdversaryPrefix,
    tail_rule: &TailRule,
    depth_domain: usize,
    depth_codomain: usize,
    enumeration: RationalEnumeration,
    horizon: u64,
    k_override: Option<&Rat>,
) -> Result<Vec<MemberVerdict>, AdvError> {
    let n = prefix.family.len();
    if depth_domain < n {
        return Err(AdvError::Guard(format!(
            "domain depth {depth_domain} is below the family size {n}"
        )));
    }
    let max_n_omega = prefix.steps.iter().map(|s| s.n_omega).max().unwrap_or(1);
    if depth_codomain < max_n_omega {
        return Err(AdvError::Guard(format!(
            "codomain depth {depth_codomain} is below the recorded maximum index {max_n_omega}"
        )));
    }
    let domain_gamma = extend_gamma(prefix, tail_rule, enumeration)?;
    if depth_domain > domain_gamma.len() {
        return Err(AdvError::Guard(format!(
            "domain depth {depth_domain} exceeds the extended terms {}; widen the tail rule",
            domain_gamma.len()
        )));
    }
    let domain = build_gaps(&domain_gamma, enumeration, depth_domain, horizon)?;
    let k = k_override.unwrap_or(&prefix.k);

    let mut verdicts = Vec::with_capacity(n);
    for (idx, member) in prefix.family.iter().enumerate() {
        let depth = depth_codomain.min(member.len());
        if depth < max_n_omega {
            return Err(AdvError::Guard(format!(
                "member {} has only {} terms, below the required depth {max_n_omega}",
                idx + 1,
                member.len()
            )));
        }
        let codomain = build_gaps(member, enumeration, depth, horizon)?;
        let feasibility = max_feasible_map(&domain, &codomain, k)?;
        verdicts.push(MemberVerdict {
            member: idx + 1,
            infeasible: !feasibility.feasible,
            feasibility,
        });
    }
    Ok(verdicts)
}
