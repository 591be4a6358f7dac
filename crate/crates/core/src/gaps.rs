//! Fat Cantor gap structures: finite truncations of the unit interval minus
//! inductively placed open gaps, all with exact rational endpoints.
//!
//! A `GammaSequence` holds the gap lengths together with a certified tail
//! bound; `build_gaps` places each gap at the first enumerated rational whose
//! interval fits inside the remaining complement. Placement is deterministic
//! for a fixed enumeration and auditably minimal.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::enumeration::RationalEnumeration;
use crate::rational::Rat;

#[derive(Debug, Error)]
pub enum GapError {
    #[error("invalid gamma sequence: {0}")]
    InvalidGamma(String),
    #[error("depth {depth} exceeds available terms {terms}")]
    DepthExceedsTerms { depth: usize, terms: usize },
    #[error("search horizon {horizon} exhausted for term {index}; gap is not provably empty")]
    HorizonExhausted { index: usize, horizon: u64 },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("gap structure invariant violated: {0}")]
    InvariantViolated(String),
    #[error("minimality audit failed for gap {source_index}: {reason}")]
    AuditFailed { source_index: usize, reason: String },
}

/// Gap lengths with a certified bound on the unlisted tail.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GammaSequence {
    eps0: Rat,
    terms: Vec<Rat>,
    tail_bound: Rat,
}

impl GammaSequence {
    pub fn new(
        eps0: Rat,
        terms: Vec<Rat>,
        tail_bound: Rat,
        enumeration: RationalEnumeration,
    ) -> Result<Self, GapError> {
        if !eps0.is_positive() || eps0 >= Rat::new(1, 2) {
            return Err(GapError::InvalidGamma(format!(
                "eps0 must lie in (0, 1/2), got {eps0}"
            )));
        }
        if tail_bound.is_negative() {
            return Err(GapError::InvalidGamma(format!(
                "tail bound must be non-negative, got {tail_bound}"
            )));
        }
        let mut sum = Rat::zero();
        for (i, t) in terms.iter().enumerate() {
            if !t.is_positive() {
                return Err(GapError::InvalidGamma(format!(
                    "term {} must be positive, got {t}",
                    i + 1
                )));
            }
            if i > 0 && t > &terms[i - 1] {
                return Err(GapError::InvalidGamma(format!(
                    "terms must be non-increasing, term {} = {t} exceeds its predecessor",
                    i + 1
                )));
            }
            sum = sum + t;
        }
        if &sum + &tail_bound > Rat::one() - &eps0 {
            return Err(GapError::InvalidGamma(format!(
                "sum of terms plus tail bound {} exceeds 1 - eps0 = {}",
                &sum + &tail_bound,
                Rat::one() - &eps0
            )));
        }
        if let Some(first) = terms.first() {
            let q1 = enumeration.nth(1);
            if &q1 + first >= Rat::one() {
                return Err(GapError::InvalidGamma(format!(
                    "q1 + gamma_1 = {} must be below 1",
                    &q1 + first
                )));
            }
        }
        Ok(GammaSequence {
            eps0,
            terms,
            tail_bound,
        })
    }

    /// Finitely supported sequence: the listed terms are all of it.
    pub fn finitely_supported(
        eps0: Rat,
        terms: Vec<Rat>,
        enumeration: RationalEnumeration,
    ) -> Result<Self, GapError> {
        GammaSequence::new(eps0, terms, Rat::zero(), enumeration)
    }

    /// Geometric sequence `first * ratio^i` for `count` listed terms, with the
    /// exact closed-form tail bound for the rest.
    pub fn geometric(
        eps0: Rat,
        first: Rat,
        ratio: Rat,
        count: usize,
        enumeration: RationalEnumeration,
    ) -> Result<Self, GapError> {
        if !ratio.is_positive() || ratio >= Rat::one() {
            return Err(GapError::InvalidGamma(format!(
                "geometric ratio must lie in (0, 1), got {ratio}"
            )));
        }
        if count == 0 {
            return Err(GapError::InvalidGamma(
                "geometric needs at least one term".into(),
            ));
        }
        let mut terms = Vec::with_capacity(count);
        let mut t = first;
        for _ in 0..count {
            terms.push(t.clone());
            t = &t * &ratio;
        }
        // sum_{i >= count} first * ratio^i = terms[count-1] * ratio / (1 - ratio)
        let tail = terms.last().unwrap() * &ratio / (Rat::one() - &ratio);
        GammaSequence::new(eps0, terms, tail, enumeration)
    }

    pub fn eps0(&self) -> &Rat {
        &self.eps0
    }

    pub fn terms(&self) -> &[Rat] {
        &self.terms
    }

    /// 1-based term access.
    pub fn term(&self, i: usize) -> &Rat {
        &self.terms[i - 1]
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn tail_bound(&self) -> &Rat {
        &self.tail_bound
    }
}

/// A placed open gap `(left, left + length)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Gap {
    /// 1-based index of the term that produced this gap.
    pub source_index: usize,
    /// 1-based enumeration index of the left endpoint, when placed by the
    /// inductive rule. Synthetic structures leave this unset.
    pub enum_index: Option<u64>,
    pub left: Rat,
    pub length: Rat,
}

impl Gap {
    pub fn right(&self) -> Rat {
        &self.left + &self.length
    }

    pub fn contains_strictly(&self, x: &Rat) -> bool {
        x > &self.left && *x < self.right()
    }

    pub fn interval(&self) -> (Rat, Rat) {
        (self.left.clone(), self.right())
    }
}

/// Depth-`m` truncation: the unit interval minus the placed gaps.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GapStructure {
    pub gamma: GammaSequence,
    pub enumeration: RationalEnumeration,
    pub depth: usize,
    /// Placed gaps ordered by left endpoint; pairwise disjoint open intervals.
    pub gaps: Vec<Gap>,
    /// Term indices whose gap is provably empty at this truncation.
    pub empty_sources: Vec<usize>,
}

/// Outcome of `consecutive_pair_check`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PairCheck {
    /// `(x, y)` is exactly this gap.
    IsGap(Gap),
    /// A complement point strictly inside `(x, y)`.
    Refuted(Rat),
}

/// Outcome of `refinement_witness`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RefinementWitness {
    /// Least depth at which a placed gap meets the interval.
    Depth(usize),
    /// No placed gap meets the interval up to the probed depth.
    Exhausted,
}

pub const DEFAULT_HORIZON: u64 = 100_000;

/// Place the first `depth` gaps of `gamma` by the inductive first-fit rule.
///
/// Each gap goes to the earliest enumerated rational `q` with
/// `(q, q + gamma_i)` inside the current complement. When every maximal
/// complement interval is shorter than `gamma_i` the gap is provably empty;
/// otherwise a fit must be found within `horizon` enumeration indices.
pub fn build_gaps(
    gamma: &GammaSequence,
    enumeration: RationalEnumeration,
    depth: usize,
    horizon: u64,
) -> Result<GapStructure, GapError> {
    if depth > gamma.len() {
        return Err(GapError::DepthExceedsTerms {
            depth,
            terms: gamma.len(),
        });
    }
    // maximal closed complement intervals, kept sorted; degenerate points stay
    let mut complement: Vec<(Rat, Rat)> = vec![(Rat::zero(), Rat::one())];
    let mut gaps: Vec<Gap> = Vec::new();
    let mut empty_sources = Vec::new();

    for i in 1..=depth {
        let len = gamma.term(i);
        if !complement.iter().any(|(a, b)| &(b - a) >= len) {
            empty_sources.push(i);
            continue;
        }
        let mut found: Option<(u64, Rat)> = None;
        for (offset, q) in enumeration.iter().take(horizon as usize).enumerate() {
            let fits = complement.iter().any(|(a, b)| a <= &q && &q + len <= *b);
            if fits {
                found = Some((offset as u64 + 1, q));
                break;
            }
        }
        let (n, q) = found.ok_or(GapError::HorizonExhausted { index: i, horizon })?;
        let right = &q + len;
        let pos = complement
            .iter()
            .position(|(a, b)| a <= &q && right <= *b)
            .expect("fit interval");
        let (a, b) = complement.remove(pos);
        complement.insert(pos, (right.clone(), b));
        complement.insert(pos, (a, q.clone()));
        gaps.push(Gap {
            source_index: i,
            enum_index: Some(n),
            left: q,
            length: len.clone(),
        });
    }

    gaps.sort_by(|g, h| g.left.cmp(&h.left));
    let gs = GapStructure {
        gamma: gamma.clone(),
        enumeration,
        depth,
        gaps,
        empty_sources,
    };
    gs.validate()?;
    Ok(gs)
}

impl GapStructure {
    /// Synthetic structure from explicit disjoint open gaps, with eps0 chosen
    /// from the slack. Source indices follow decreasing length so the derived
    /// gamma terms are non-increasing.
    pub fn from_intervals(intervals: Vec<(Rat, Rat)>) -> Result<GapStructure, GapError> {
        let total: Rat = intervals
            .iter()
            .fold(Rat::zero(), |acc, (a, b)| acc + (b - a));
        if total >= Rat::one() {
            return Err(GapError::InvalidGamma(format!(
                "total gap length {total} leaves no room for eps0"
            )));
        }
        let eps0 = std::cmp::min((Rat::one() - &total) / Rat::int(2), Rat::new(49, 100));
        Self::from_intervals_with_eps0(eps0, intervals)
    }

    pub fn from_intervals_with_eps0(
        eps0: Rat,
        intervals: Vec<(Rat, Rat)>,
    ) -> Result<GapStructure, GapError> {
        for (a, b) in &intervals {
            if a >= b {
                return Err(GapError::Precondition(format!(
                    "degenerate interval ({a}, {b})"
                )));
            }
            if a.is_negative() || *b > Rat::one() {
                return Err(GapError::Precondition(format!(
                    "interval ({a}, {b}) escapes [0, 1]"
                )));
            }
        }
        // order lengths descending (stable by left) to form the gamma terms
        let mut order: Vec<usize> = (0..intervals.len()).collect();
        order.sort_by(|&i, &j| {
            let li = &intervals[i].1 - &intervals[i].0;
            let lj = &intervals[j].1 - &intervals[j].0;
            lj.cmp(&li).then(intervals[i].0.cmp(&intervals[j].0))
        });
        let terms: Vec<Rat> = order
            .iter()
            .map(|&i| &intervals[i].1 - &intervals[i].0)
            .collect();
        let gamma = GammaSequence::new(eps0, terms, Rat::zero(), RationalEnumeration::default())?;
        let mut gaps: Vec<Gap> = order
            .iter()
            .enumerate()
            .map(|(rank, &i)| Gap {
                source_index: rank + 1,
                enum_index: None,
                left: intervals[i].0.clone(),
                length: &intervals[i].1 - &intervals[i].0,
            })
            .collect();
        gaps.sort_by(|g, h| g.left.cmp(&h.left));
        let depth = gaps.len();
        let gs = GapStructure {
            gamma,
            enumeration: RationalEnumeration::default(),
            depth,
            gaps,
            empty_sources: vec![],
        };
        gs.validate()?;
        Ok(gs)
    }

    /// Type invariants: disjointness, endpoint exclusion, 0/1 membership, and
    /// the measure bound.
    pub fn validate(&self) -> Result<(), GapError> {
        let mut sum = Rat::zero();
        for (i, g) in self.gaps.iter().enumerate() {
            if !g.length.is_positive() {
                return Err(GapError::InvariantViolated(format!(
                    "gap {} has non-positive length",
                    g.source_index
                )));
            }
            if g.left.is_negative() || g.right() > Rat::one() {
                return Err(GapError::InvariantViolated(format!(
                    "gap {} escapes [0, 1]",
                    g.source_index
                )));
            }
            if i > 0 {
                let prev = &self.gaps[i - 1];
                if prev.right() > g.left {
                    return Err(GapError::InvariantViolated(format!(
                        "gaps {} and {} overlap",
                        prev.source_index, g.source_index
                    )));
                }
            }
            sum = sum + &g.length;
        }
        // endpoint exclusion: no gap endpoint strictly inside another gap
        for g in &self.gaps {
            for h in &self.gaps {
                if g.source_index != h.source_index
                    && (h.contains_strictly(&g.left) || h.contains_strictly(&g.right()))
                {
                    return Err(GapError::InvariantViolated(format!(
                        "endpoint of gap {} lies inside gap {}",
                        g.source_index, h.source_index
                    )));
                }
            }
        }
        if &sum + self.gamma.tail_bound() > Rat::one() - self.gamma.eps0() {
            return Err(GapError::InvariantViolated(
                "placed lengths plus tail exceed 1 - eps0".into(),
            ));
        }
        Ok(())
    }

    /// Maximal closed complement intervals of `[0,1]` minus the gaps, in
    /// order; degenerate single points included.
    pub fn complement_intervals(&self) -> Vec<(Rat, Rat)> {
        let mut out = Vec::with_capacity(self.gaps.len() + 1);
        let mut cursor = Rat::zero();
        for g in &self.gaps {
            out.push((cursor, g.left.clone()));
            cursor = g.right();
        }
        out.push((cursor, Rat::one()));
        out
    }

    pub fn complement_contains(&self, x: &Rat) -> bool {
        if x.is_negative() || x > &Rat::one() {
            return false;
        }
        !self.gaps.iter().any(|g| g.contains_strictly(x))
    }

    pub fn gap_by_source(&self, source_index: usize) -> Option<&Gap> {
        self.gaps.iter().find(|g| g.source_index == source_index)
    }

    /// `1 - (placed lengths) - tail_bound`; at least eps0 by the sequence
    /// invariant.
    pub fn complement_measure_bound(&self) -> Rat {
        let placed: Rat = self.gaps.iter().fold(Rat::zero(), |acc, g| acc + &g.length);
        Rat::one() - placed - self.gamma.tail_bound()
    }

    /// For `x < y` both in the complement: either `(x, y)` is exactly a gap,
    /// or some complement point strictly inside refutes it.
    pub fn consecutive_pair_check(&self, x: &Rat, y: &Rat) -> Result<PairCheck, GapError> {
        if x >= y {
            return Err(GapError::Precondition(format!(
                "need x < y, got {x} >= {y}"
            )));
        }
        for (label, p) in [("x", x), ("y", y)] {
            if !self.complement_contains(p) {
                return Err(GapError::Precondition(format!(
                    "{label} = {p} lies inside a gap or outside [0, 1]"
                )));
            }
        }
        let overlapping: Vec<&Gap> = self
            .gaps
            .iter()
            .filter(|g| &g.left < y && g.right() > *x)
            .collect();
        match overlapping.first() {
            None => Ok(PairCheck::Refuted((x + y) / Rat::int(2))),
            Some(g) if g.left > *x => Ok(PairCheck::Refuted(g.left.clone())),
            Some(g) => {
                // g.left == x since x is not strictly inside g
                let r = g.right();
                if &r < y {
                    Ok(PairCheck::Refuted(r))
                } else {
                    // r == y: (x, y) is exactly this gap
                    Ok(PairCheck::IsGap((*g).clone()))
                }
            }
        }
    }

    /// Exhaustively re-check first-fit minimality of every placed gap.
    pub fn minimality_audit(&self) -> Result<(), GapError> {
        let mut by_source: Vec<&Gap> = self.gaps.iter().collect();
        by_source.sort_by_key(|g| g.source_index);
        for (k, g) in by_source.iter().enumerate() {
            let n_i = g.enum_index.ok_or_else(|| GapError::AuditFailed {
                source_index: g.source_index,
                reason: "synthetic gap has no enumeration index".into(),
            })?;
            let prefix: Vec<&Gap> = by_source[..k].to_vec();
            let fits = |q: &Rat| -> bool {
                let right = q + &g.length;
                if q.is_negative() || right > Rat::one() {
                    return false;
                }
                prefix.iter().all(|h| right <= h.left || h.right() <= *q)
            };
            for (offset, q) in self.enumeration.iter().take(n_i as usize).enumerate() {
                let n = offset as u64 + 1;
                if n < n_i && fits(&q) {
                    return Err(GapError::AuditFailed {
                        source_index: g.source_index,
                        reason: format!("earlier index {n} (q = {q}) already fits"),
                    });
                }
                if n == n_i {
                    if !fits(&q) {
                        return Err(GapError::AuditFailed {
                            source_index: g.source_index,
                            reason: format!("recorded index {n_i} (q = {q}) does not fit"),
                        });
                    }
                    if q != g.left {
                        return Err(GapError::AuditFailed {
                            source_index: g.source_index,
                            reason: format!(
                                "recorded left endpoint {} disagrees with q_{n_i} = {q}",
                                g.left
                            ),
                        });
                    }
                }
            }
        }
        Ok(())
    }
}

/// Least depth at which a placed gap meets the open interval, a bounded
/// surrogate for refinement of every neighborhood.
pub fn refinement_witness(
    gamma: &GammaSequence,
    enumeration: RationalEnumeration,
    interval: (&Rat, &Rat),
    max_depth: usize,
    horizon: u64,
) -> Result<RefinementWitness, GapError> {
    let (lo, hi) = interval;
    if lo >= hi || lo.is_negative() || *hi > Rat::one() {
        return Err(GapError::Precondition(format!(
            "need a nontrivial interval inside [0, 1], got ({lo}, {hi})"
        )));
    }
    let gs = build_gaps(gamma, enumeration, max_depth, horizon)?;
    let mut hit: Option<usize> = None;
    for g in &gs.gaps {
        if &g.left < hi && g.right() > *lo {
            hit = Some(match hit {
                Some(d) => d.min(g.source_index),
                None => g.source_index,
            });
        }
    }
    Ok(match hit {
        Some(d) => RefinementWitness::Depth(d),
        None => RefinementWitness::Exhausted,
    })
}
