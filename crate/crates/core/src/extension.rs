//! Finite-scale Lipschitz extension machinery over exact metric spaces:
//! McShane extension, cone/lattice norming functions with support control,
//! distance-vector nets with local matching maps, greedy separated chains,
//! and the resulting linear extension operator.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metric::{exact_lipschitz_constant, FiniteMetricSpace, LipschitzSample, MetricError};
use crate::rational::Rat;

#[derive(Debug, Error)]
pub enum ExtError {
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("combinatorial guard exceeded: {candidates} candidate sets over cap {cap}")]
    Guard { candidates: u128, cap: u128 },
    #[error("no matching center for the requested set; the covering is broken")]
    NoCenter,
    #[error("chain mismatch: {0}")]
    ChainMismatch(String),
    #[error(transparent)]
    Metric(#[from] MetricError),
}

pub const DEFAULT_ENUMERATION_CAP: u128 = 2_000_000;

/// McShane upper extension `min over the table of f(y) + L * d(x, y)`; the
/// pointwise-largest L-Lipschitz function agreeing with the table.
pub fn mcshane_extend(
    f: &LipschitzSample,
    space: &FiniteMetricSpace,
    l: &Rat,
) -> Result<LipschitzSample, ExtError> {
    if f.values.is_empty() {
        return Err(ExtError::Precondition("empty table".into()));
    }
    let declared = LipschitzSample {
        values: f.values.clone(),
        constant: l.clone(),
    };
    declared.validate(space)?;
    let mut values = BTreeMap::new();
    for x in 0..space.len() {
        let v = f
            .values
            .iter()
            .map(|(&y, fy)| fy + l * space.d(x, y))
            .min()
            .unwrap();
        values.insert(x, v);
    }
    for (&x, fx) in &f.values {
        debug_assert_eq!(&values[&x], fx);
    }
    Ok(LipschitzSample {
        values,
        constant: l.clone(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConeSign {
    Positive,
    Negative,
}

/// Cone at one point: `max(value - slope * d(p, x0), 0)` for positive sign,
/// `min(value + slope * d(p, x0), 0)` for negative, slope `lam * (1 + eps)`.
pub fn cone_function(
    x0: usize,
    value: &Rat,
    lam: &Rat,
    eps: &Rat,
    sign: ConeSign,
    space: &FiniteMetricSpace,
) -> Result<Vec<Rat>, ExtError> {
    if lam < &Rat::one() || !eps.is_positive() {
        return Err(ExtError::Precondition("need lam >= 1 and eps > 0".into()));
    }
    match sign {
        ConeSign::Positive if !value.is_positive() => {
            return Err(ExtError::Precondition(
                "positive cone needs a positive apex value".into(),
            ))
        }
        ConeSign::Negative if !value.is_negative() => {
            return Err(ExtError::Precondition(
                "negative cone needs a negative apex value".into(),
            ))
        }
        _ => {}
    }
    let slope = lam * (Rat::one() + eps);
    let zero = Rat::zero();
    Ok((0..space.len())
        .map(|p| match sign {
            ConeSign::Positive => std::cmp::max(value - &slope * space.d(p, x0), zero.clone()),
            ConeSign::Negative => std::cmp::min(value + &slope * space.d(p, x0), zero.clone()),
        })
        .collect())
}

/// Lattice of cones matching `f` on `f_set`: the positive part takes the max
/// of positive cones, the negative part the min of negative cones, zero
/// elsewhere. Requires a 1-Lipschitz total input vanishing at the base.
pub fn norming_function(
    f: &[Rat],
    f_set: &[usize],
    lam: &Rat,
    eps: &Rat,
    space: &FiniteMetricSpace,
) -> Result<Vec<Rat>, ExtError> {
    if f.len() != space.len() {
        return Err(ExtError::Precondition("table must be total".into()));
    }
    if lam < &Rat::one() || !eps.is_positive() {
        return Err(ExtError::Precondition("need lam >= 1 and eps > 0".into()));
    }
    if !f[space.base()].is_zero() {
        return Err(ExtError::Precondition(
            "input must vanish at the base".into(),
        ));
    }
    if exact_lipschitz_constant(f, space) > Rat::one() {
        return Err(ExtError::Precondition(
            "input constant exceeds 1; normalize first".into(),
        ));
    }
    if !f_set.contains(&space.base()) {
        return Err(ExtError::Precondition("f_set must contain the base".into()));
    }
    let pos: Vec<usize> = f_set
        .iter()
        .copied()
        .filter(|&x| f[x].is_positive())
        .collect();
    let neg: Vec<usize> = f_set
        .iter()
        .copied()
        .filter(|&x| f[x].is_negative())
        .collect();
    let mut cones_pos = Vec::new();
    for &x in &pos {
        cones_pos.push(cone_function(
            x,
            &f[x],
            lam,
            eps,
            ConeSign::Positive,
            space,
        )?);
    }
    let mut cones_neg = Vec::new();
    for &x in &neg {
        cones_neg.push(cone_function(
            x,
            &f[x],
            lam,
            eps,
            ConeSign::Negative,
            space,
        )?);
    }
    let zero = Rat::zero();
    let g: Vec<Rat> = (0..space.len())
        .map(|p| {
            if f[p].is_positive() {
                cones_pos
                    .iter()
                    .map(|c| c[p].clone())
                    .max()
                    .unwrap_or_else(Rat::zero)
            } else if f[p].is_negative() {
                cones_neg
                    .iter()
                    .map(|c| c[p].clone())
                    .min()
                    .unwrap_or_else(Rat::zero)
            } else {
                zero.clone()
            }
        })
        .collect();
    Ok(g)
}

/// A selected net: centers cover every admissible extension's distance
/// vector within sup-radius `eps^2`, size class by size class.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NetResult {
    pub f_set: Vec<usize>,
    pub k: usize,
    pub eps: Rat,
    /// Union of the base set and all center extras.
    pub z: Vec<usize>,
    /// Full center sets, each containing `f_set`.
    pub centers: Vec<Vec<usize>>,
    /// Covering radius `eps^2`.
    pub radius: Rat,
}

fn distance_vector(space: &FiniteMetricSpace, f_set: &[usize], extras: &[usize]) -> Vec<Rat> {
    let mut v = Vec::with_capacity((f_set.len() + extras.len()) * extras.len());
    for &u in f_set.iter().chain(extras.iter()) {
        for &e in extras {
            v.push(space.d(u, e).clone());
        }
    }
    v
}

fn sup_diff(a: &[Rat], b: &[Rat]) -> Rat {
    debug_assert_eq!(a.len(), b.len());
    let mut best = Rat::zero();
    for (x, y) in a.iter().zip(b) {
        let d = (x - y).abs();
        if d > best {
            best = d;
        }
    }
    best
}

fn combinations(pool: &[usize], k: usize) -> Vec<Vec<usize>> {
    fn rec(
        pool: &[usize],
        k: usize,
        start: usize,
        cur: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..pool.len() {
            cur.push(pool[i]);
            rec(pool, k, i + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(pool, k, 0, &mut Vec::new(), &mut out);
    out
}

fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul(n - i) / (i + 1);
    }
    acc
}

/// Enumerate every eps-separated extension of `f_set` by at most `k` extra
/// points (restricted to `within` when given) and greedily select centers
/// until all same-size distance vectors are covered within `eps^2`.
pub fn finite_net(
    space: &FiniteMetricSpace,
    f_set: &[usize],
    k: usize,
    eps: &Rat,
    within: Option<&[usize]>,
    cap: u128,
) -> Result<NetResult, ExtError> {
    let mut f_sorted = f_set.to_vec();
    f_sorted.sort_unstable();
    f_sorted.dedup();
    if f_sorted.is_empty() {
        return Err(ExtError::Precondition("base set is empty".into()));
    }
    if !eps.is_positive() || eps >= &Rat::one() {
        return Err(ExtError::Precondition(format!(
            "eps must lie in (0, 1), got {eps}"
        )));
    }
    if let Some(m) = space.min_pairwise(&f_sorted) {
        if eps > &m {
            return Err(ExtError::Precondition(format!(
                "eps = {eps} exceeds the base set separation {m}"
            )));
        }
    }
    let pool: Vec<usize> = match within {
        Some(w) => w
            .iter()
            .copied()
            .filter(|p| !f_sorted.contains(p))
            .collect(),
        None => (0..space.len()).filter(|p| !f_sorted.contains(p)).collect(),
    };
    let mut total: u128 = 0;
    for l in 0..=k {
        total = total.saturating_add(binomial(pool.len() as u128, l as u128));
    }
    if total > cap {
        return Err(ExtError::Guard {
            candidates: total,
            cap,
        });
    }

    let mut centers: Vec<Vec<usize>> = Vec::new();
    let mut center_vectors: Vec<(usize, Vec<Rat>)> = Vec::new();
    let radius = eps * eps;
    for l in 0..=k {
        for extras in combinations(&pool, l) {
            let mut e_full = f_sorted.clone();
            e_full.extend(&extras);
            if !space.is_separated(&e_full, eps) {
                continue;
            }
            let v = distance_vector(space, &f_sorted, &extras);
            let covered = center_vectors
                .iter()
                .any(|(cl, cv)| *cl == l && sup_diff(cv, &v) <= radius);
            if !covered {
                center_vectors.push((l, v));
                centers.push(e_full);
            }
        }
    }
    let mut z: BTreeSet<usize> = f_sorted.iter().copied().collect();
    for c in &centers {
        z.extend(c.iter().copied());
    }
    Ok(NetResult {
        f_set: f_sorted,
        k,
        eps: eps.clone(),
        z: z.into_iter().collect(),
        centers,
        radius,
    })
}

/// The matching map of one admissible set into the net: identity on the base
/// set, extras paired in id order with a same-size center within `eps^2`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LocalMap {
    pub pairs: Vec<(usize, usize)>,
    pub lip: Rat,
}

impl LocalMap {
    pub fn apply(&self, p: usize) -> Option<usize> {
        self.pairs.iter().find(|(x, _)| *x == p).map(|(_, y)| *y)
    }
}

pub fn local_map(
    e_set: &[usize],
    net: &NetResult,
    space: &FiniteMetricSpace,
) -> Result<LocalMap, ExtError> {
    let mut e_sorted = e_set.to_vec();
    e_sorted.sort_unstable();
    e_sorted.dedup();
    for f in &net.f_set {
        if !e_sorted.contains(f) {
            return Err(ExtError::Precondition(format!(
                "set must contain the base set; missing index {f}"
            )));
        }
    }
    let extras: Vec<usize> = e_sorted
        .iter()
        .copied()
        .filter(|p| !net.f_set.contains(p))
        .collect();
    if extras.len() > net.k {
        return Err(ExtError::Precondition(format!(
            "{} extras exceed the net's class bound {}",
            extras.len(),
            net.k
        )));
    }
    if !space.is_separated(&e_sorted, &net.eps) {
        return Err(ExtError::Precondition(format!(
            "set is not {}-separated",
            net.eps
        )));
    }
    let v = distance_vector(space, &net.f_set, &extras);
    let mut matched: Option<&Vec<usize>> = None;
    for c in &net.centers {
        let c_extras: Vec<usize> = c
            .iter()
            .copied()
            .filter(|p| !net.f_set.contains(p))
            .collect();
        if c_extras.len() != extras.len() {
            continue;
        }
        let cv = distance_vector(space, &net.f_set, &c_extras);
        if sup_diff(&cv, &v) <= net.radius {
            matched = Some(c);
            break;
        }
    }
    let center = matched.ok_or(ExtError::NoCenter)?;
    let c_extras: Vec<usize> = center
        .iter()
        .copied()
        .filter(|p| !net.f_set.contains(p))
        .collect();
    let mut pairs: Vec<(usize, usize)> = net.f_set.iter().map(|&f| (f, f)).collect();
    pairs.extend(extras.iter().copied().zip(c_extras.iter().copied()));

    // exact Lipschitz constant of the pairing as a max of distance ratios
    let mut lip = Rat::zero();
    for a in 0..pairs.len() {
        for b in (a + 1)..pairs.len() {
            let (x1, y1) = pairs[a];
            let (x2, y2) = pairs[b];
            if x1 == x2 {
                continue;
            }
            let q = space.d(y1, y2) / space.d(x1, x2);
            if q > lip {
                lip = q;
            }
        }
    }
    Ok(LocalMap { pairs, lip })
}

/// Greedy maximal packings compatible with a decreasing separation schedule.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SeparatedChain {
    pub f_chain: Vec<Vec<usize>>,
    pub eps_chain: Vec<Rat>,
    pub d_chain: Vec<Vec<usize>>,
}

pub fn separated_chain(
    space: &FiniteMetricSpace,
    f_chain: &[Vec<usize>],
    eps_chain: &[Rat],
) -> Result<SeparatedChain, ExtError> {
    let levels = f_chain.len();
    if levels == 0 || eps_chain.len() != levels {
        return Err(ExtError::Precondition(
            "chain needs matching non-empty level lists".into(),
        ));
    }
    for w in eps_chain.windows(2) {
        if w[1] > w[0] {
            return Err(ExtError::Precondition(
                "separation schedule must not increase".into(),
            ));
        }
    }
    for (n, (f, eps)) in f_chain.iter().zip(eps_chain).enumerate() {
        if !eps.is_positive() {
            return Err(ExtError::Precondition(
                "separations must be positive".into(),
            ));
        }
        if let Some(m) = space.min_pairwise(f) {
            if eps > &m {
                return Err(ExtError::Precondition(format!(
                    "level {n} separation {eps} exceeds the set's own spacing {m}"
                )));
            }
        }
        if n > 0 && !f_chain[n - 1].iter().all(|p| f.contains(p)) {
            return Err(ExtError::Precondition("level sets must increase".into()));
        }
    }

    let mut d_chain: Vec<Vec<usize>> = Vec::with_capacity(levels);
    let mut current: BTreeSet<usize> = BTreeSet::new();
    for n in 0..levels {
        current.extend(f_chain[n].iter().copied());
        let ok = |set: &BTreeSet<usize>, cand: Option<usize>| -> bool {
            for (k, f_up) in f_chain[n..].iter().enumerate() {
                let eps = &eps_chain[n + k];
                let mut pts: Vec<usize> = set.iter().copied().collect();
                if let Some(c) = cand {
                    pts.push(c);
                }
                for f in f_up {
                    if !pts.contains(f) {
                        pts.push(*f);
                    }
                }
                if !space.is_separated(&pts, eps) {
                    return false;
                }
            }
            true
        };
        if !ok(&current, None) {
            return Err(ExtError::ChainMismatch(
                "level base set already violates the schedule".into(),
            ));
        }
        for p in 0..space.len() {
            if current.contains(&p) {
                continue;
            }
            if ok(&current, Some(p)) {
                current.insert(p);
            }
        }
        d_chain.push(current.iter().copied().collect());
    }
    Ok(SeparatedChain {
        f_chain: f_chain.to_vec(),
        eps_chain: eps_chain.to_vec(),
        d_chain,
    })
}

/// Every excluded point must be blocked at the finest separation; returns the
/// blocking pairs.
pub fn packing_maximality_witnesses(
    chain: &SeparatedChain,
    space: &FiniteMetricSpace,
) -> Result<Vec<(usize, usize, Rat)>, ExtError> {
    let last = chain
        .d_chain
        .last()
        .ok_or_else(|| ExtError::Precondition("empty chain".into()))?;
    let eps = chain.eps_chain.last().unwrap();
    let mut out = Vec::new();
    for p in 0..space.len() {
        if last.contains(&p) {
            continue;
        }
        let blocker = last
            .iter()
            .copied()
            .find(|&q| space.d(p, q) < eps)
            .ok_or_else(|| {
                ExtError::ChainMismatch(format!(
                    "point {} could still be added to the final packing",
                    space.id(p)
                ))
            })?;
        out.push((p, blocker, space.d(p, blocker).clone()));
    }
    Ok(out)
}

/// One level of the extension pipeline.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExtensionLevel {
    pub f_set: Vec<usize>,
    pub eps: Rat,
    pub theta: Option<Rat>,
    pub r_n: Rat,
    pub big_r: Rat,
    pub net: NetResult,
}

/// Build the level recursion: each level adds one seed point to the previous
/// net output and nets the result inside the ball of radius `max(r_n, n)`.
pub fn build_extension_pipeline(
    space: &FiniteMetricSpace,
    seeds: &[usize],
    levels: usize,
    cap: u128,
) -> Result<Vec<ExtensionLevel>, ExtError> {
    if seeds.is_empty() || levels == 0 {
        return Err(ExtError::Precondition(
            "need seeds and at least one level".into(),
        ));
    }
    let base = space.base();
    let mut s_prev: Vec<usize> = vec![base];
    let mut out = Vec::with_capacity(levels);
    for n in 1..=levels {
        let seed = seeds[(n - 1) % seeds.len()];
        let mut f_set = s_prev.clone();
        if !f_set.contains(&seed) {
            f_set.push(seed);
        }
        f_set.sort_unstable();
        let theta = space.min_pairwise(&f_set);
        let inv_n = Rat::new(1, n as i64);
        let eps = match &theta {
            Some(t) => std::cmp::min(inv_n, t.clone()),
            None => inv_n,
        };
        let r_n = space.radius_of(&f_set);
        let big_r = std::cmp::max(r_n.clone(), Rat::int(n as i64));
        let ball: Vec<usize> = (0..space.len())
            .filter(|&p| space.d(base, p) <= &big_r)
            .collect();
        for f in &f_set {
            if !ball.contains(f) {
                return Err(ExtError::ChainMismatch(format!(
                    "level {n} base set escapes the ball of radius {big_r}; rescale the space"
                )));
            }
        }
        let net = finite_net(space, &f_set, n, &eps, Some(&ball), cap)?;
        s_prev = net.z.clone();
        out.push(ExtensionLevel {
            f_set,
            eps,
            theta,
            r_n,
            big_r,
            net,
        });
    }
    Ok(out)
}

/// Linear extension operator realized as composition with a fixed point map.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExtensionOperator {
    /// The intermediate subset carrying the extended functions.
    pub s: Vec<usize>,
    /// Points mapped identically; functions extend exactly from here.
    pub core: Vec<usize>,
    /// Target point per space point.
    pub assignment: BTreeMap<usize, usize>,
    /// Exact Lipschitz constant of the assignment, at least 1.
    pub norm_certificate: Rat,
    /// The certified subset where the top-level matching applies directly.
    pub certified: Vec<usize>,
}

impl ExtensionOperator {
    /// Compose a function on `s` with the assignment. Linearity in the
    /// function is immediate from the shape `p -> f(L(p))`.
    pub fn apply(&self, f: &BTreeMap<usize, Rat>) -> Result<Vec<Rat>, ExtError> {
        let mut out = Vec::with_capacity(self.assignment.len());
        for target in self.assignment.values() {
            let v = f.get(target).ok_or_else(|| {
                ExtError::Precondition(format!("function misses the target index {target}"))
            })?;
            out.push(v.clone());
        }
        Ok(out)
    }
}

/// Collapse the pipeline and the packing chain into one operator: the top
/// packing inside the top ball is matched through the top net, and every
/// other point rides along with its nearest matched point.
pub fn extension_operator(
    space: &FiniteMetricSpace,
    levels: &[ExtensionLevel],
    chain: &SeparatedChain,
) -> Result<ExtensionOperator, ExtError> {
    let n_levels = levels.len();
    if n_levels == 0 {
        return Err(ExtError::Precondition("no levels".into()));
    }
    if chain.d_chain.len() != n_levels {
        return Err(ExtError::ChainMismatch(format!(
            "chain has {} levels, pipeline has {n_levels}",
            chain.d_chain.len()
        )));
    }
    for (n, level) in levels.iter().enumerate() {
        if chain.f_chain[n] != level.f_set {
            return Err(ExtError::ChainMismatch(format!(
                "level {n} base sets disagree"
            )));
        }
        if chain.eps_chain[n] != level.eps {
            return Err(ExtError::ChainMismatch(format!(
                "level {n} separations disagree"
            )));
        }
        for f in &level.f_set {
            if !chain.d_chain[n].contains(f) {
                return Err(ExtError::ChainMismatch(format!(
                    "level {n} packing misses a base point"
                )));
            }
        }
    }
    let top = levels.last().unwrap();
    let base = space.base();
    let e_max: Vec<usize> = chain
        .d_chain
        .last()
        .unwrap()
        .iter()
        .copied()
        .filter(|&p| space.d(base, p) <= &top.big_r)
        .collect();
    let extras = e_max.iter().filter(|p| !top.f_set.contains(p)).count();
    if extras > n_levels {
        return Err(ExtError::ChainMismatch(format!(
            "top packing has {extras} extras over the class bound {n_levels}; deepen the chain"
        )));
    }
    let lm = local_map(&e_max, &top.net, space)?;

    let mut assignment: BTreeMap<usize, usize> = BTreeMap::new();
    for &p in &e_max {
        assignment.insert(p, lm.apply(p).unwrap());
    }
    for p in 0..space.len() {
        if assignment.contains_key(&p) {
            continue;
        }
        // ride with the nearest matched point, ties toward the lowest id
        let nearest = e_max
            .iter()
            .copied()
            .min_by(|&a, &b| space.d(p, a).cmp(space.d(p, b)).then(a.cmp(&b)))
            .ok_or_else(|| ExtError::ChainMismatch("empty top packing".into()))?;
        assignment.insert(p, assignment[&nearest]);
    }

    let mut norm = Rat::one();
    for i in 0..space.len() {
        for j in (i + 1)..space.len() {
            let q = space.d(assignment[&i], assignment[&j]) / space.d(i, j);
            if q > norm {
                norm = q;
            }
        }
    }

    for f in &top.f_set {
        debug_assert_eq!(assignment[f], *f);
    }

    Ok(ExtensionOperator {
        s: top.net.z.clone(),
        core: top.f_set.clone(),
        assignment,
        norm_certificate: norm,
        certified: e_max,
    })
}
