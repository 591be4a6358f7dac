//! Monotone piecewise-linear maps between gap structures, the exact
//! feasibility decider, and the jump/sweeping certificate machinery.
//!
//! The decider computes the pointwise-maximal non-decreasing K-Lipschitz map
//! into the codomain complement with `F(0) = 0` by a single left-to-right
//! event sweep: inside a domain component it climbs at slope K until the
//! first codomain gap lower endpoint at or above the running value blocks it;
//! across a domain gap of length `d` it jumps to the largest codomain point
//! at most `K*d` higher. Feasibility holds exactly when the terminal value
//! is 1; every feasible monotone K-Lipschitz map is pointwise dominated.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gaps::{Gap, GapStructure, PairCheck};
use crate::rational::Rat;

#[derive(Debug, Error)]
pub enum LipError {
    #[error("K must be positive, got {0}")]
    NonPositiveK(Rat),
    #[error("invalid samples: {0}")]
    InvalidSamples(String),
    #[error("map violates its contract: {0}")]
    InvalidMap(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("certificate construction failed: {0}")]
    Certificate(String),
}

/// Non-decreasing piecewise-linear map stored at its event breakpoints.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonotonePLMap {
    breakpoints: Vec<(Rat, Rat)>,
    k: Rat,
}

impl MonotonePLMap {
    pub fn try_new(breakpoints: Vec<(Rat, Rat)>, k: Rat) -> Result<Self, LipError> {
        if breakpoints.is_empty() {
            return Err(LipError::InvalidMap("no breakpoints".into()));
        }
        if breakpoints[0] != (Rat::zero(), Rat::zero()) {
            return Err(LipError::InvalidMap(
                "first breakpoint must be (0, 0)".into(),
            ));
        }
        for w in breakpoints.windows(2) {
            let (x0, y0) = &w[0];
            let (x1, y1) = &w[1];
            if x1 <= x0 {
                return Err(LipError::InvalidMap(format!(
                    "x values must increase strictly: {x0} then {x1}"
                )));
            }
            if y1 < y0 {
                return Err(LipError::InvalidMap(format!(
                    "y values must be non-decreasing: {y0} then {y1}"
                )));
            }
            if y1 - y0 > &k * (x1 - x0) {
                return Err(LipError::InvalidMap(format!(
                    "segment from {x0} to {x1} exceeds slope bound {k}"
                )));
            }
        }
        Ok(MonotonePLMap { breakpoints, k })
    }

    /// Identity map on the complement of a gap structure, valid for K >= 1.
    pub fn identity_on(domain: &GapStructure) -> MonotonePLMap {
        let mut bps = Vec::new();
        for (a, b) in domain.complement_intervals() {
            if bps
                .last()
                .map(|(x, _): &(Rat, Rat)| x != &a)
                .unwrap_or(true)
            {
                bps.push((a.clone(), a.clone()));
            }
            if b > a {
                bps.push((b.clone(), b));
            }
        }
        MonotonePLMap {
            breakpoints: bps,
            k: Rat::one(),
        }
    }

    pub fn breakpoints(&self) -> &[(Rat, Rat)] {
        &self.breakpoints
    }

    pub fn slope_bound(&self) -> &Rat {
        &self.k
    }

    pub fn first(&self) -> &(Rat, Rat) {
        self.breakpoints.first().unwrap()
    }

    pub fn last(&self) -> &(Rat, Rat) {
        self.breakpoints.last().unwrap()
    }

    /// Exact value by linear interpolation between breakpoints.
    pub fn eval(&self, x: &Rat) -> Result<Rat, LipError> {
        let first = self.first();
        let last = self.last();
        if x < &first.0 || x > &last.0 {
            return Err(LipError::Precondition(format!(
                "{x} outside breakpoint range [{}, {}]",
                first.0, last.0
            )));
        }
        let pos = self.breakpoints.partition_point(|(bx, _)| bx <= x);
        let (x1, y1) = &self.breakpoints[pos.saturating_sub(1)];
        if x1 == x {
            return Ok(y1.clone());
        }
        let (x2, y2) = &self.breakpoints[pos];
        Ok(y1 + (y2 - y1) * (x - x1) / (x2 - x1))
    }

    /// Largest slope between consecutive breakpoints; for a monotone
    /// piecewise-linear map this is the Lipschitz constant over all pairs.
    pub fn lipschitz_constant(&self) -> Rat {
        let mut best = Rat::zero();
        for w in self.breakpoints.windows(2) {
            let s = (&w[1].1 - &w[0].1) / (&w[1].0 - &w[0].0);
            if s > best {
                best = s;
            }
        }
        best
    }
}

/// Verdict of the feasibility sweep, with the maximal map as witness.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FeasibilityResult {
    pub feasible: bool,
    pub max_map: MonotonePLMap,
    pub terminal_value: Rat,
    /// Codomain gap lower endpoints that blocked the sweep, in order.
    pub blocking_chain: Vec<Rat>,
}

/// One codomain gap jumped by one domain gap, with the witness points.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct JumpCertificate {
    pub codomain_gap: Gap,
    pub domain_gap: Gap,
    pub p_minus: Rat,
    pub p_plus: Rat,
    pub x_minus: Rat,
    pub y_plus: Rat,
}

/// The open interval `(b - r, a + r)` swept from `(a, b)` by radius `r`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepInterval {
    pub source: (Rat, Rat),
    pub radius: Rat,
    pub result: Option<(Rat, Rat)>,
}

impl SweepInterval {
    pub fn length(&self) -> Rat {
        match &self.result {
            Some((lo, hi)) => hi - lo,
            None => Rat::zero(),
        }
    }

    pub fn contains_interval(&self, lo: &Rat, hi: &Rat) -> bool {
        match &self.result {
            Some((a, b)) => a <= lo && hi <= b,
            None => false,
        }
    }
}

/// Running-maximum monotonization of samples fixing 0 and 1.
pub fn monotonize(samples: &[(Rat, Rat)]) -> Result<MonotonePLMap, LipError> {
    let mut pts = samples.to_vec();
    pts.sort_by(|a, b| a.0.cmp(&b.0));
    for w in pts.windows(2) {
        if w[0].0 == w[1].0 {
            return Err(LipError::InvalidSamples(format!(
                "duplicate x value {}",
                w[0].0
            )));
        }
    }
    match pts.first() {
        Some((x, y)) if x.is_zero() && y.is_zero() => {}
        _ => {
            return Err(LipError::InvalidSamples(
                "samples must include (0, 0)".into(),
            ))
        }
    }
    match pts.last() {
        Some((x, y)) if *x == Rat::one() && *y == Rat::one() => {}
        _ => {
            return Err(LipError::InvalidSamples(
                "samples must include (1, 1)".into(),
            ))
        }
    }
    let mut running = Rat::zero();
    let mut out = Vec::with_capacity(pts.len());
    for (x, y) in pts {
        if y > running {
            running = y;
        }
        out.push((x, running.clone()));
    }
    let k = sample_lipschitz(&out);
    MonotonePLMap::try_new(out, k)
}

/// Largest difference quotient over all sample pairs.
pub fn sample_lipschitz(samples: &[(Rat, Rat)]) -> Rat {
    let mut best = Rat::zero();
    for i in 0..samples.len() {
        for j in (i + 1)..samples.len() {
            let dx = (&samples[j].0 - &samples[i].0).abs();
            if dx.is_zero() {
                continue;
            }
            let q = (&samples[j].1 - &samples[i].1).abs() / dx;
            if q > best {
                best = q;
            }
        }
    }
    best
}

/// Pointwise-maximal monotone K-Lipschitz codomain-valued map with F(0) = 0,
/// by the exact event sweep. Feasible iff the terminal value is 1.
pub fn max_feasible_map(
    domain: &GapStructure,
    codomain: &GapStructure,
    k: &Rat,
) -> Result<FeasibilityResult, LipError> {
    if !k.is_positive() {
        return Err(LipError::NonPositiveK(k.clone()));
    }
    let comps = domain.complement_intervals();
    let cod_gaps = &codomain.gaps;

    // first codomain gap lower endpoint at or above v
    let stall_bound = |v: &Rat| -> Option<Rat> {
        let idx = cod_gaps.partition_point(|g| &g.left < v);
        cod_gaps.get(idx).map(|g| g.left.clone())
    };
    // largest codomain point at most w
    let land = |w: &Rat| -> Rat {
        let idx = cod_gaps.partition_point(|g| &g.left < w);
        if idx > 0 {
            let g = &cod_gaps[idx - 1];
            if g.contains_strictly(w) {
                return g.left.clone();
            }
        }
        w.clone()
    };

    let one = Rat::one();
    let mut bps: Vec<(Rat, Rat)> = Vec::new();
    let mut chain: Vec<Rat> = Vec::new();
    let push_block = |chain: &mut Vec<Rat>, v: &Rat| {
        if chain.last() != Some(v) {
            chain.push(v.clone());
        }
    };
    let mut v = Rat::zero();
    let mut prev_end: Option<Rat> = None;

    for (a, b) in comps {
        match prev_end {
            None => bps.push((a.clone(), v.clone())),
            Some(pe) => {
                let w = std::cmp::min(&v + k * (&a - &pe), one.clone());
                let landed = land(&w);
                if landed < w {
                    push_block(&mut chain, &landed);
                }
                v = landed;
                bps.push((a.clone(), v.clone()));
            }
        }
        if b > a {
            let target = &v + k * (&b - &a);
            let bound = match stall_bound(&v) {
                Some(s) => std::cmp::min(s, one.clone()),
                None => one.clone(),
            };
            if target > bound {
                if bound < one {
                    push_block(&mut chain, &bound);
                }
                if v < bound {
                    let kink = &a + (&bound - &v) / k;
                    bps.push((kink, bound.clone()));
                }
                v = bound;
            } else {
                v = target;
            }
            bps.push((b.clone(), v.clone()));
        }
        prev_end = Some(b);
    }

    let terminal = v;
    let feasible = terminal == one;
    let max_map = MonotonePLMap::try_new(bps, k.clone())
        .map_err(|e| LipError::InvalidMap(format!("sweep produced invalid map: {e}")))?;
    Ok(FeasibilityResult {
        feasible,
        max_map,
        terminal_value: terminal,
        blocking_chain: chain,
    })
}

/// Check a map is a valid monotone K-Lipschitz map between the structures:
/// breakpoints on the domain complement, values in the codomain complement,
/// and no codomain gap crossed by a segment whose span still contains domain
/// points (crossing is only possible over exactly a domain gap).
pub fn validate_map_between(
    map: &MonotonePLMap,
    domain: &GapStructure,
    codomain: &GapStructure,
) -> Result<(), LipError> {
    for (x, y) in map.breakpoints() {
        if !domain.complement_contains(x) {
            return Err(LipError::InvalidMap(format!(
                "breakpoint x = {x} is not a domain point"
            )));
        }
        if !codomain.complement_contains(y) {
            return Err(LipError::InvalidMap(format!(
                "value {y} at x = {x} is not a codomain point"
            )));
        }
    }
    for w in map.breakpoints().windows(2) {
        let (x0, y0) = &w[0];
        let (x1, y1) = &w[1];
        let same_component = match domain.consecutive_pair_check(x0, x1) {
            Ok(PairCheck::IsGap(_)) => false,
            Ok(PairCheck::Refuted(_)) => true,
            Err(e) => return Err(LipError::InvalidMap(e.to_string())),
        };
        if same_component {
            // a refuted pair means domain points remain between x0 and x1;
            // the segment must then stay inside the codomain complement
            for g in &codomain.gaps {
                if y0 <= &g.left && g.right() <= *y1 && y0 < y1 {
                    return Err(LipError::InvalidMap(format!(
                        "segment from ({x0}, {y0}) crosses codomain gap ({}, {}) inside a component",
                        g.left,
                        g.right()
                    )));
                }
            }
        }
    }
    Ok(())
}

/// Extract one jump certificate per codomain gap from a feasible monotone map.
pub fn jump_certificates(
    map: &MonotonePLMap,
    domain: &GapStructure,
    codomain: &GapStructure,
) -> Result<Vec<JumpCertificate>, LipError> {
    validate_map_between(map, domain, codomain)?;
    if map.first() != &(Rat::zero(), Rat::zero()) || map.last() != &(Rat::one(), Rat::one()) {
        return Err(LipError::Precondition(
            "certificates need a feasible map fixing 0 and 1".into(),
        ));
    }
    let bps = map.breakpoints();
    let mut out = Vec::with_capacity(codomain.gaps.len());
    for g in &codomain.gaps {
        let idx = bps.partition_point(|(_, y)| y <= &g.left);
        if idx == 0 || idx >= bps.len() {
            return Err(LipError::Certificate(format!(
                "no jump found over codomain gap ({}, {})",
                g.left,
                g.right()
            )));
        }
        let (x_minus, p_minus) = bps[idx - 1].clone();
        let (y_plus, p_plus) = bps[idx].clone();
        if p_plus < g.right() {
            return Err(LipError::Certificate(format!(
                "map enters codomain gap ({}, {})",
                g.left,
                g.right()
            )));
        }
        let domain_gap = match domain.consecutive_pair_check(&x_minus, &y_plus) {
            Ok(PairCheck::IsGap(dg)) => dg,
            Ok(PairCheck::Refuted(p)) => {
                return Err(LipError::Certificate(format!(
                    "jump interval ({x_minus}, {y_plus}) is not a domain gap; {p} is a domain point"
                )))
            }
            Err(e) => return Err(LipError::Certificate(e.to_string())),
        };
        out.push(JumpCertificate {
            codomain_gap: g.clone(),
            domain_gap,
            p_minus,
            p_plus,
            x_minus,
            y_plus,
        });
    }
    Ok(out)
}

/// For certificates sharing one domain gap: `K * gap length` must cover the
/// largest spread between a jumped gap's right endpoint and another's left.
pub fn check_jump_length(group: &[JumpCertificate], k: &Rat) -> Result<bool, LipError> {
    let first = group
        .first()
        .ok_or_else(|| LipError::Precondition("empty certificate group".into()))?;
    let dg = &first.domain_gap;
    if group
        .iter()
        .any(|c| c.domain_gap.interval() != dg.interval())
    {
        return Err(LipError::Precondition(
            "certificates in a group must share one domain gap".into(),
        ));
    }
    let mut spread = Rat::zero();
    for (i, c1) in group.iter().enumerate() {
        for (j, c2) in group.iter().enumerate() {
            if i == j {
                continue;
            }
            let s = (c1.codomain_gap.right() - &c2.codomain_gap.left).abs();
            if s > spread {
                spread = s;
            }
        }
    }
    Ok(k * &dg.length >= spread)
}

/// The sweeping `(b - r, a + r)` of `(a, b)` by radius `r`; empty exactly
/// when `2r <= b - a`.
pub fn sweeping(a: &Rat, b: &Rat, r: &Rat) -> Result<SweepInterval, LipError> {
    if a >= b {
        return Err(LipError::Precondition(format!(
            "need a < b, got {a} >= {b}"
        )));
    }
    if !r.is_positive() {
        return Err(LipError::Precondition(format!("need r > 0, got {r}")));
    }
    let lo = b - r;
    let hi = a + r;
    let result = if lo < hi { Some((lo, hi)) } else { None };
    Ok(SweepInterval {
        source: (a.clone(), b.clone()),
        radius: r.clone(),
        result,
    })
}

/// When two certificates share a domain gap and the second jumped gap escapes
/// the sweeping of the first by `r`, the shared gap must satisfy
/// `K * length > r`.
pub fn sweep_escape_check(
    cert1: &JumpCertificate,
    cert2: &JumpCertificate,
    r: &Rat,
    k: &Rat,
) -> Result<bool, LipError> {
    if cert1.domain_gap.interval() != cert2.domain_gap.interval() {
        return Err(LipError::Precondition(
            "certificates must share one domain gap".into(),
        ));
    }
    let sw = sweeping(&cert1.codomain_gap.left, &cert1.codomain_gap.right(), r)?;
    if sw.contains_interval(&cert2.codomain_gap.left, &cert2.codomain_gap.right()) {
        return Err(LipError::Precondition(
            "second gap is contained in the sweeping of the first".into(),
        ));
    }
    Ok(k * &cert1.domain_gap.length > *r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaps::{build_gaps, GammaSequence, DEFAULT_HORIZON};
    use crate::rational::rat;
    use crate::RationalEnumeration;

    fn two_gap_instance() -> (GapStructure, GapStructure) {
        let domain = GapStructure::from_intervals(vec![(rat("2/5"), rat("3/5"))]).unwrap();
        let codomain = GapStructure::from_intervals(vec![(rat("1/10"), rat("3/10"))]).unwrap();
        (domain, codomain)
    }

    #[test]
    fn monotonize_keeps_monotone_input() {
        let pts = vec![
            (rat("0"), rat("0")),
            (rat("1/2"), rat("1/4")),
            (rat("1"), rat("1")),
        ];
        let m = monotonize(&pts).unwrap();
        assert_eq!(m.breakpoints(), &pts[..]);
    }

    #[test]
    fn monotonize_running_maximum() {
        let pts = vec![
            (rat("0"), rat("0")),
            (rat("2/5"), rat("1/2")),
            (rat("7/10"), rat("3/10")),
            (rat("1"), rat("1")),
        ];
        let m = monotonize(&pts).unwrap();
        assert_eq!(
            m.breakpoints(),
            &[
                (rat("0"), rat("0")),
                (rat("2/5"), rat("1/2")),
                (rat("7/10"), rat("1/2")),
                (rat("1"), rat("1")),
            ]
        );
        // running maximum never raises the sample Lipschitz constant
        assert!(m.lipschitz_constant() <= sample_lipschitz(&pts));
        // idempotent
        let again = monotonize(m.breakpoints()).unwrap();
        assert_eq!(again.breakpoints(), m.breakpoints());
    }

    #[test]
    fn monotonize_endpoints_only() {
        let m = monotonize(&[(rat("0"), rat("0")), (rat("1"), rat("1"))]).unwrap();
        assert_eq!(m.breakpoints().len(), 2);
        assert_eq!(m.lipschitz_constant(), rat("1"));
    }

    #[test]
    fn monotonize_requires_endpoints() {
        assert!(monotonize(&[(rat("0"), rat("0"))]).is_err());
        assert!(monotonize(&[(rat("0"), rat("1/8")), (rat("1"), rat("1"))]).is_err());
    }

    #[test]
    fn identity_is_feasible_and_dominated() {
        let gamma = GammaSequence::finitely_supported(
            rat("1/4"),
            vec![rat("1/4"), rat("1/8"), rat("1/16")],
            RationalEnumeration::default(),
        )
        .unwrap();
        let gs = build_gaps(&gamma, RationalEnumeration::default(), 3, DEFAULT_HORIZON).unwrap();
        let res = max_feasible_map(&gs, &gs, &rat("1")).unwrap();
        assert!(res.feasible);
        assert_eq!(res.terminal_value, rat("1"));
        let id = MonotonePLMap::identity_on(&gs);
        validate_map_between(&id, &gs, &gs).unwrap();
        for (x, y) in id.breakpoints() {
            assert!(res.max_map.eval(x).unwrap() >= *y);
        }
    }

    #[test]
    fn sweep_example_k1_infeasible() {
        let (domain, codomain) = two_gap_instance();
        let res = max_feasible_map(&domain, &codomain, &rat("1")).unwrap();
        assert!(!res.feasible);
        assert_eq!(res.terminal_value, rat("7/10"));
        assert_eq!(res.blocking_chain, vec![rat("1/10")]);
    }

    #[test]
    fn sweep_example_k2_feasible() {
        let (domain, codomain) = two_gap_instance();
        let res = max_feasible_map(&domain, &codomain, &rat("2")).unwrap();
        assert!(res.feasible);
        assert_eq!(
            res.max_map.breakpoints(),
            &[
                (rat("0"), rat("0")),
                (rat("1/20"), rat("1/10")),
                (rat("2/5"), rat("1/10")),
                (rat("3/5"), rat("1/2")),
                (rat("17/20"), rat("1")),
                (rat("1"), rat("1")),
            ]
        );
    }

    #[test]
    fn k_below_one_is_always_infeasible() {
        let (domain, codomain) = two_gap_instance();
        let res = max_feasible_map(&domain, &codomain, &rat("1/2")).unwrap();
        assert!(!res.feasible);
    }

    #[test]
    fn jump_certificates_identity_self_jump() {
        let gs = GapStructure::from_intervals(vec![
            (rat("1/10"), rat("3/10")),
            (rat("2/5"), rat("3/5")),
        ])
        .unwrap();
        let id = MonotonePLMap::identity_on(&gs);
        let certs = jump_certificates(&id, &gs, &gs).unwrap();
        assert_eq!(certs.len(), 2);
        for c in &certs {
            assert_eq!(c.codomain_gap.interval(), c.domain_gap.interval());
            assert_eq!(c.x_minus, c.codomain_gap.left);
            assert_eq!(c.y_plus, c.codomain_gap.right());
        }
    }

    #[test]
    fn jump_certificates_from_sweep_map() {
        let (domain, codomain) = two_gap_instance();
        let res = max_feasible_map(&domain, &codomain, &rat("2")).unwrap();
        let certs = jump_certificates(&res.max_map, &domain, &codomain).unwrap();
        assert_eq!(certs.len(), 1);
        let c = &certs[0];
        assert_eq!(c.codomain_gap.interval(), (rat("1/10"), rat("3/10")));
        assert_eq!(c.domain_gap.interval(), (rat("2/5"), rat("3/5")));
        assert_eq!(c.p_minus, rat("1/10"));
        assert_eq!(c.p_plus, rat("1/2"));
    }

    #[test]
    fn jump_length_examples() {
        let dg = Gap {
            source_index: 1,
            enum_index: None,
            left: rat("2/5"),
            length: rat("1/5"),
        };
        let mk = |left: &str, len: &str| JumpCertificate {
            codomain_gap: Gap {
                source_index: 1,
                enum_index: None,
                left: rat(left),
                length: rat(len),
            },
            domain_gap: dg.clone(),
            p_minus: rat("0"),
            p_plus: rat("1"),
            x_minus: rat("2/5"),
            y_plus: rat("3/5"),
        };
        let single = vec![mk("1/10", "1/5")];
        assert!(check_jump_length(&single, &rat("1/100")).unwrap());

        let pair = vec![mk("1/10", "1/5"), mk("7/10", "1/10")];
        // spread = max(|3/10 - 7/10|, |4/5 - 1/10|) = 7/10; need K/5 >= 7/10
        assert!(check_jump_length(&pair, &rat("7/2")).unwrap());
        assert!(!check_jump_length(&pair, &rat("2")).unwrap());
    }

    #[test]
    fn sweeping_examples() {
        let sw = sweeping(&rat("3/10"), &rat("2/5"), &rat("1/20")).unwrap();
        assert_eq!(sw.result, None);
        let sw = sweeping(&rat("3/10"), &rat("2/5"), &rat("1/5")).unwrap();
        assert_eq!(sw.result, Some((rat("1/5"), rat("1/2"))));
        assert_eq!(sw.length(), rat("3/10"));
        let sw = sweeping(&rat("0"), &rat("1"), &rat("1")).unwrap();
        assert_eq!(sw.result, Some((rat("0"), rat("1"))));
        assert_eq!(sw.length(), rat("1"));
    }

    #[test]
    fn sweep_escape_example() {
        let dg = Gap {
            source_index: 1,
            enum_index: None,
            left: rat("2/5"),
            length: rat("1/5"),
        };
        let c1 = JumpCertificate {
            codomain_gap: Gap {
                source_index: 1,
                enum_index: None,
                left: rat("1/10"),
                length: rat("1/5"),
            },
            domain_gap: dg.clone(),
            p_minus: rat("0"),
            p_plus: rat("1"),
            x_minus: rat("2/5"),
            y_plus: rat("3/5"),
        };
        let c2 = JumpCertificate {
            codomain_gap: Gap {
                source_index: 2,
                enum_index: None,
                left: rat("7/10"),
                length: rat("1/10"),
            },
            ..c1.clone()
        };
        // sweeping of (1/10, 3/10) by 1/4 is (1/20, 7/20); (7/10, 4/5) escapes
        assert!(sweep_escape_check(&c1, &c2, &rat("1/4"), &rat("2")).unwrap());
        assert!(!sweep_escape_check(&c1, &c2, &rat("1/2"), &rat("2")).unwrap());
        // containment violates the precondition
        let inside = JumpCertificate {
            codomain_gap: Gap {
                source_index: 3,
                enum_index: None,
                left: rat("1/10"),
                length: rat("1/10"),
            },
            ..c1.clone()
        };
        assert!(sweep_escape_check(&c1, &inside, &rat("1/4"), &rat("2")).is_err());
    }

    proptest::proptest! {
        #[test]
        fn monotonize_contract_on_random_samples(
            xs in proptest::collection::btree_set(1i64..64, 0..6),
            ys in proptest::collection::vec(0i64..=64, 6),
        ) {
            let mut samples = vec![(rat("0"), rat("0")), (rat("1"), rat("1"))];
            for (x, y) in xs.iter().zip(&ys) {
                samples.push((Rat::new(*x, 64), Rat::new(*y, 64)));
            }
            let m = monotonize(&samples).unwrap();
            // never raises the sample constant, fixes 0 and 1, idempotent
            proptest::prop_assert!(m.lipschitz_constant() <= sample_lipschitz(&samples));
            proptest::prop_assert_eq!(m.first(), &(rat("0"), rat("0")));
            proptest::prop_assert_eq!(m.last(), &(rat("1"), rat("1")));
            let again = monotonize(m.breakpoints()).unwrap();
            proptest::prop_assert_eq!(again.breakpoints(), m.breakpoints());
        }
    }

    #[test]
    fn eval_interpolates_exactly() {
        let m = MonotonePLMap::try_new(
            vec![
                (rat("0"), rat("0")),
                (rat("1/2"), rat("1/4")),
                (rat("1"), rat("1")),
            ],
            rat("3/2"),
        )
        .unwrap();
        assert_eq!(m.eval(&rat("1/4")).unwrap(), rat("1/8"));
        assert_eq!(m.eval(&rat("3/4")).unwrap(), rat("5/8"));
        assert!(m.eval(&rat("2")).is_err());
    }
}
