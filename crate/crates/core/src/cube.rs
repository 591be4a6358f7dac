//! Sheets inside the sup-metric unit cube sharing their 0/1 vertices, the
//! exact cross-sheet distance through a best connecting vertex, and the
//! diagonal witness pair that defeats candidate retractions.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rational::Rat;

/// Reserved sheet id for the diagonally constructed sheet.
pub const GAMMA_STAR_SHEET: &str = "gamma-star";

#[derive(Debug, Error)]
pub enum CubeError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid sheet: {0}")]
    InvalidSheet(String),
    #[error("invalid point: {0}")]
    InvalidPoint(String),
    #[error("unknown sheet id {0}")]
    UnknownSheet(String),
    #[error("guard violated: {0}")]
    Guard(String),
    #[error("retraction table incomplete: {0}")]
    TableIncomplete(String),
    #[error("witness algebra violated: {0}")]
    WitnessAlgebra(String),
}

/// Band widths of one sheet: coordinate `a` must avoid the open band
/// `(1/2 - gamma_a, 1/2 + gamma_a)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SheetSpec {
    pub gamma: Vec<Rat>,
}

impl SheetSpec {
    pub fn new(gamma: Vec<Rat>) -> Result<Self, CubeError> {
        let half = Rat::new(1, 2);
        for (i, g) in gamma.iter().enumerate() {
            if !g.is_positive() || g >= &half {
                return Err(CubeError::InvalidSheet(format!(
                    "coordinate {i} band width {g} must lie in (0, 1/2)"
                )));
            }
        }
        Ok(SheetSpec { gamma })
    }

    pub fn lambda(&self) -> usize {
        self.gamma.len()
    }
}

/// A vertex subset or an interior sheet point.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "tag", rename_all = "lowercase")]
pub enum CubePoint {
    Vertex { set: Vec<u32> },
    Inner { sheet: String, coords: Vec<Rat> },
}

impl CubePoint {
    pub fn vertex(set: impl IntoIterator<Item = u32>) -> CubePoint {
        let mut set: Vec<u32> = set.into_iter().collect();
        set.sort_unstable();
        set.dedup();
        CubePoint::Vertex { set }
    }

    fn coord(&self, alpha: usize) -> Rat {
        match self {
            CubePoint::Vertex { set } => {
                if set.contains(&(alpha as u32)) {
                    Rat::one()
                } else {
                    Rat::zero()
                }
            }
            CubePoint::Inner { coords, .. } => coords[alpha].clone(),
        }
    }
}

/// All sheets of one instance, indexed by id, with a common dimension.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CubeSpace {
    pub lambda: usize,
    pub sheets: BTreeMap<String, SheetSpec>,
}

impl CubeSpace {
    pub fn new(sheets: BTreeMap<String, SheetSpec>) -> Result<Self, CubeError> {
        let mut lambda = None;
        for (id, s) in &sheets {
            match lambda {
                None => lambda = Some(s.lambda()),
                Some(l) if l == s.lambda() => {}
                Some(l) => {
                    return Err(CubeError::DimensionMismatch(format!(
                        "sheet {id} has dimension {}, expected {l}",
                        s.lambda()
                    )))
                }
            }
        }
        let lambda = lambda.ok_or_else(|| CubeError::InvalidSheet("no sheets".into()))?;
        Ok(CubeSpace { lambda, sheets })
    }

    pub fn validate_point(&self, p: &CubePoint) -> Result<(), CubeError> {
        match p {
            CubePoint::Vertex { set } => {
                if set.iter().any(|&a| a as usize >= self.lambda) {
                    return Err(CubeError::InvalidPoint(format!(
                        "vertex set {set:?} escapes dimension {}",
                        self.lambda
                    )));
                }
                Ok(())
            }
            CubePoint::Inner { sheet, coords } => {
                let spec = self
                    .sheets
                    .get(sheet)
                    .ok_or_else(|| CubeError::UnknownSheet(sheet.clone()))?;
                if coords.len() != self.lambda {
                    return Err(CubeError::DimensionMismatch(format!(
                        "point has {} coordinates, expected {}",
                        coords.len(),
                        self.lambda
                    )));
                }
                if !membership(coords, spec)? {
                    return Err(CubeError::InvalidPoint(
                        "coordinates enter a forbidden band".into(),
                    ));
                }
                if coords.iter().all(|c| c.is_zero() || c == &Rat::one()) {
                    return Err(CubeError::InvalidPoint(
                        "inner point has all 0/1 coordinates; use a vertex".into(),
                    ));
                }
                Ok(())
            }
        }
    }
}

/// True iff every coordinate avoids the sheet's open middle band.
pub fn membership(coords: &[Rat], sheet: &SheetSpec) -> Result<bool, CubeError> {
    if coords.len() != sheet.lambda() {
        return Err(CubeError::DimensionMismatch(format!(
            "{} coordinates against dimension {}",
            coords.len(),
            sheet.lambda()
        )));
    }
    let half = Rat::new(1, 2);
    for (c, g) in coords.iter().zip(&sheet.gamma) {
        if c.is_negative() || c > &Rat::one() {
            return Err(CubeError::InvalidPoint(format!(
                "coordinate {c} escapes [0, 1]"
            )));
        }
        if c > &(&half - g) && *c < &half + g {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The vertex subset whose quadrant contains the point: coordinates above
/// one half round to 1.
pub fn component_of(p: &CubePoint) -> Vec<u32> {
    match p {
        CubePoint::Vertex { set } => set.clone(),
        CubePoint::Inner { coords, .. } => {
            let half = Rat::new(1, 2);
            coords
                .iter()
                .enumerate()
                .filter(|(_, c)| **c > half)
                .map(|(i, _)| i as u32)
                .collect()
        }
    }
}

fn sup_distance_to_vertex(coords: &[Rat], mask: u64) -> Rat {
    let mut best = Rat::zero();
    for (i, c) in coords.iter().enumerate() {
        let d = if mask >> i & 1 == 1 {
            Rat::one() - c
        } else {
            c.clone()
        };
        if d > best {
            best = d;
        }
    }
    best
}

fn sup_distance(p: &CubePoint, q: &CubePoint, lambda: usize) -> Rat {
    let mut best = Rat::zero();
    for a in 0..lambda {
        let d = (p.coord(a) - q.coord(a)).abs();
        if d > best {
            best = d;
        }
    }
    best
}

/// Exact minimum over vertex detours of `sup(p, e) + sup(e, q)`, computed by
/// a threshold sweep: for each candidate bound on the first leg, each
/// coordinate independently picks the orientation minimizing the second leg.
fn cross_sheet_distance(p: &[Rat], q: &[Rat]) -> Rat {
    let lambda = p.len();
    let mut thresholds: Vec<Rat> = Vec::with_capacity(2 * lambda);
    for c in p {
        thresholds.push(c.clone());
        thresholds.push(Rat::one() - c);
    }
    thresholds.sort();
    thresholds.dedup();

    let mut best: Option<Rat> = None;
    for t in &thresholds {
        let mut first_leg = Rat::zero();
        let mut second_leg = Rat::zero();
        let mut feasible = true;
        for a in 0..lambda {
            // orientation 0 keeps the vertex coordinate at 0, orientation 1
            // lifts it to 1
            let u0 = p[a].clone();
            let v0 = q[a].clone();
            let u1 = Rat::one() - &p[a];
            let v1 = Rat::one() - &q[a];
            let c0 = &u0 <= t;
            let c1 = &u1 <= t;
            let (u, v) = match (c0, c1) {
                (false, false) => {
                    feasible = false;
                    break;
                }
                (true, false) => (u0, v0),
                (false, true) => (u1, v1),
                (true, true) => {
                    if v0 < v1 || (v0 == v1 && u0 <= u1) {
                        (u0, v0)
                    } else {
                        (u1, v1)
                    }
                }
            };
            if u > first_leg {
                first_leg = u;
            }
            if v > second_leg {
                second_leg = v;
            }
        }
        if feasible {
            let total = first_leg + second_leg;
            if best.as_ref().map(|b| &total < b).unwrap_or(true) {
                best = Some(total);
            }
        }
    }
    best.expect("largest threshold is always feasible")
}

/// Exact distance: sup metric within a sheet or when a vertex is involved,
/// otherwise the best vertex detour.
pub fn cube_distance(p: &CubePoint, q: &CubePoint, space: &CubeSpace) -> Result<Rat, CubeError> {
    space.validate_point(p)?;
    space.validate_point(q)?;
    match (p, q) {
        (
            CubePoint::Inner {
                sheet: s1,
                coords: c1,
            },
            CubePoint::Inner {
                sheet: s2,
                coords: c2,
            },
        ) if s1 != s2 => Ok(cross_sheet_distance(c1, c2)),
        _ => Ok(sup_distance(p, q, space.lambda)),
    }
}

pub const BRUTE_FORCE_GUARD: usize = 20;

/// Oracle: enumerate all vertex subsets. Guarded at dimension 20.
pub fn cube_distance_bruteforce(
    p: &CubePoint,
    q: &CubePoint,
    space: &CubeSpace,
) -> Result<Rat, CubeError> {
    space.validate_point(p)?;
    space.validate_point(q)?;
    match (p, q) {
        (
            CubePoint::Inner {
                sheet: s1,
                coords: c1,
            },
            CubePoint::Inner {
                sheet: s2,
                coords: c2,
            },
        ) if s1 != s2 => {
            let lambda = space.lambda;
            if lambda > BRUTE_FORCE_GUARD {
                return Err(CubeError::Guard(format!(
                    "brute force limited to dimension {BRUTE_FORCE_GUARD}, got {lambda}"
                )));
            }
            let mut best: Option<Rat> = None;
            for mask in 0u64..(1 << lambda) {
                let total = sup_distance_to_vertex(c1, mask) + sup_distance_to_vertex(c2, mask);
                if best.as_ref().map(|b| &total < b).unwrap_or(true) {
                    best = Some(total);
                }
            }
            Ok(best.unwrap())
        }
        _ => Ok(sup_distance(p, q, space.lambda)),
    }
}

/// Diagonal witness: a new sheet strictly inside every family band, and a
/// coordinate pair whose images under any component-preserving candidate
/// retraction must stretch beyond the K budget.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DefeatWitness {
    pub k: Rat,
    /// Family sheets in diagonal order (index beta names both the sheet and
    /// the coordinate).
    pub family: Vec<(String, SheetSpec)>,
    pub gamma_star: SheetSpec,
    pub beta0: usize,
    pub p_star: CubePoint,
    pub q_star: CubePoint,
    /// Exact distance between the witness points: `2 * gamma_star[beta0]`.
    pub d_p_q: Rat,
    /// `K^{-1} * gamma[beta0][beta0]`, equal to `d_p_q`.
    pub bound: Rat,
}

impl DefeatWitness {
    /// Family sheets plus the diagonal sheet, for distance evaluation.
    pub fn space(&self) -> Result<CubeSpace, CubeError> {
        let mut sheets = BTreeMap::new();
        for (id, s) in &self.family {
            if id == GAMMA_STAR_SHEET {
                return Err(CubeError::InvalidSheet(format!(
                    "family uses the reserved sheet id {GAMMA_STAR_SHEET}"
                )));
            }
            if sheets.insert(id.clone(), s.clone()).is_some() {
                return Err(CubeError::InvalidSheet(format!("duplicate sheet id {id}")));
            }
        }
        sheets.insert(GAMMA_STAR_SHEET.to_string(), self.gamma_star.clone());
        CubeSpace::new(sheets)
    }
}

/// Build the diagonal witness for a family indexed by its own coordinates.
///
/// The default contradiction coordinate is the one minimizing the diagonal
/// band width, the tightest of the available bounds.
pub fn defeat_family(
    family: &[(String, SheetSpec)],
    k: &Rat,
    beta0: Option<usize>,
) -> Result<DefeatWitness, CubeError> {
    let lambda = family.len();
    if lambda == 0 {
        return Err(CubeError::InvalidSheet("family is empty".into()));
    }
    if k < &Rat::one() {
        return Err(CubeError::Guard(format!("K must be at least 1, got {k}")));
    }
    for (id, s) in family {
        if s.lambda() != lambda {
            return Err(CubeError::DimensionMismatch(format!(
                "sheet {id} has dimension {}, family indexing needs {lambda}",
                s.lambda()
            )));
        }
    }
    let two_k = Rat::int(2) * k;
    let star: Vec<Rat> = (0..lambda)
        .map(|a| &family[a].1.gamma[a] / &two_k)
        .collect();
    // diagonal: strictly inside every indexed band, so the sheet is new
    for (a, s) in star.iter().enumerate() {
        if s >= &family[a].1.gamma[a] {
            return Err(CubeError::WitnessAlgebra(format!(
                "diagonal term {a} failed to shrink"
            )));
        }
    }
    let gamma_star = SheetSpec::new(star.clone())?;

    let beta0 = match beta0 {
        Some(b) => {
            if b >= lambda {
                return Err(CubeError::DimensionMismatch(format!(
                    "beta0 = {b} outside dimension {lambda}"
                )));
            }
            b
        }
        None => (0..lambda)
            .min_by(|&a, &b| family[a].1.gamma[a].cmp(&family[b].1.gamma[b]))
            .unwrap(),
    };

    let half = Rat::new(1, 2);
    let p_coords: Vec<Rat> = star.iter().map(|g| &half - g).collect();
    let mut q_coords = p_coords.clone();
    q_coords[beta0] = &half + &star[beta0];
    let p_star = CubePoint::Inner {
        sheet: GAMMA_STAR_SHEET.to_string(),
        coords: p_coords,
    };
    let q_star = CubePoint::Inner {
        sheet: GAMMA_STAR_SHEET.to_string(),
        coords: q_coords,
    };

    let witness = DefeatWitness {
        k: k.clone(),
        family: family.to_vec(),
        gamma_star,
        beta0,
        p_star,
        q_star,
        d_p_q: Rat::int(2) * &star[beta0],
        bound: &family[beta0].1.gamma[beta0] / k,
    };

    let space = witness.space()?;
    let d = cube_distance(&witness.p_star, &witness.q_star, &space)?;
    if d != witness.d_p_q {
        return Err(CubeError::WitnessAlgebra(format!(
            "metric disagrees with the witness distance: {d} vs {}",
            witness.d_p_q
        )));
    }
    if k * &d != family[beta0].1.gamma[beta0] {
        return Err(CubeError::WitnessAlgebra(
            "K times the witness distance must equal the diagonal band width".into(),
        ));
    }
    if k * &d >= half {
        return Err(CubeError::WitnessAlgebra(
            "witness budget must stay below one half".into(),
        ));
    }
    // band-crossing slack: twice the diagonal width strictly exceeds K * d
    if Rat::int(2) * &family[beta0].1.gamma[beta0] <= k * &d {
        return Err(CubeError::WitnessAlgebra(
            "band-crossing contradiction lost its slack".into(),
        ));
    }
    if component_of(&witness.p_star) != Vec::<u32>::new() {
        return Err(CubeError::WitnessAlgebra(
            "first witness left the zero quadrant".into(),
        ));
    }
    if component_of(&witness.q_star) != vec![beta0 as u32] {
        return Err(CubeError::WitnessAlgebra(
            "second witness is not in the flipped quadrant".into(),
        ));
    }
    Ok(witness)
}

/// Which proof case the checked pair fell into.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "case", rename_all = "kebab-case")]
pub enum ViolationCase {
    /// Image of the first witness is the zero vertex; any image of the
    /// second stays a half away.
    ZeroVertex { distance_from_zero: Rat },
    /// Image of the first witness sits below the band of some family sheet;
    /// crossing the band costs more than the budget.
    BandCrossing { image_sheet: String },
    /// The table does not behave like a continuous retraction at all.
    OutOfModel,
}

/// Exact evaluation of the Lipschitz obstruction on the witness pair.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ViolationReport {
    pub case: ViolationCase,
    /// `d(R(p*), R(q*))`.
    pub lhs: Rat,
    /// `K * d(p*, q*)`.
    pub rhs: Rat,
    pub violated: bool,
    /// Component or fixing defects that take the table out of the model.
    pub issues: Vec<String>,
}

/// Check a candidate retraction table against the witness: vertices must be
/// fixed, components preserved, images drawn from the family, and then the
/// pair inequality is evaluated exactly.
pub fn check_retraction_violation(
    table: &[(CubePoint, CubePoint)],
    k: &Rat,
    witness: &DefeatWitness,
) -> Result<ViolationReport, CubeError> {
    let space = witness.space()?;
    let find = |p: &CubePoint| -> Option<&CubePoint> {
        table.iter().find(|(x, _)| x == p).map(|(_, y)| y)
    };
    let rp = find(&witness.p_star).ok_or_else(|| {
        CubeError::TableIncomplete("table must contain the first witness point".into())
    })?;
    let rq = find(&witness.q_star).ok_or_else(|| {
        CubeError::TableIncomplete("table must contain the second witness point".into())
    })?;

    let mut issues = Vec::new();
    for (x, y) in table {
        space.validate_point(x)?;
        space.validate_point(y)?;
        if let CubePoint::Vertex { .. } = x {
            if x != y {
                issues.push(format!("vertex {x:?} is not fixed"));
            }
        }
        if component_of(x) != component_of(y) {
            issues.push(format!(
                "image of {x:?} changes quadrant from {:?} to {:?}",
                component_of(x),
                component_of(y)
            ));
        }
        if let CubePoint::Inner { sheet, .. } = y {
            if sheet == GAMMA_STAR_SHEET {
                issues.push(format!(
                    "image of {x:?} lands on the diagonal sheet, outside the candidate subset"
                ));
            }
        }
    }

    let lhs = cube_distance(rp, rq, &space)?;
    let rhs = k * cube_distance(&witness.p_star, &witness.q_star, &space)?;
    let case = if !issues.is_empty() {
        ViolationCase::OutOfModel
    } else {
        match rp {
            CubePoint::Vertex { .. } => ViolationCase::ZeroVertex {
                distance_from_zero: cube_distance(&CubePoint::vertex([]), rq, &space)?,
            },
            CubePoint::Inner { sheet, .. } => ViolationCase::BandCrossing {
                image_sheet: sheet.clone(),
            },
        }
    };
    Ok(ViolationReport {
        violated: lhs > rhs,
        case,
        lhs,
        rhs,
        issues,
    })
}

/// Snap coordinates onto a sheet: each coordinate moves to the nearest
/// allowed value, ties toward the lower band edge.
pub fn nearest_point_in_sheet(coords: &[Rat], sheet: &SheetSpec) -> Result<Vec<Rat>, CubeError> {
    if coords.len() != sheet.lambda() {
        return Err(CubeError::DimensionMismatch(format!(
            "{} coordinates against dimension {}",
            coords.len(),
            sheet.lambda()
        )));
    }
    let half = Rat::new(1, 2);
    Ok(coords
        .iter()
        .zip(&sheet.gamma)
        .map(|(c, g)| {
            let lo = &half - g;
            let hi = &half + g;
            if c > &lo && *c < hi {
                if c - &lo <= &hi - c {
                    lo
                } else {
                    hi
                }
            } else {
                c.clone()
            }
        })
        .collect())
}

/// Wrap snapped coordinates as a cube point, collapsing full 0/1 vectors to
/// the vertex they are.
pub fn normalize_point(coords: Vec<Rat>, sheet_id: &str) -> CubePoint {
    if coords.iter().all(|c| c.is_zero() || c == &Rat::one()) {
        CubePoint::vertex(
            coords
                .iter()
                .enumerate()
                .filter(|(_, c)| **c == Rat::one())
                .map(|(i, _)| i as u32),
        )
    } else {
        CubePoint::Inner {
            sheet: sheet_id.to_string(),
            coords,
        }
    }
}
