//! Disjoint copies of gap-structure complements glued at 0 and 1, with the
//! exact cross-sheet metric and the finite-sample collapse map that squeezes
//! a table through a single sheet.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gaps::GapStructure;
use crate::rational::Rat;

#[derive(Debug, Error)]
pub enum GluedError {
    #[error("invalid space: {0}")]
    InvalidSpace(String),
    #[error("unknown sheet id {0}")]
    UnknownSheet(String),
    #[error("invalid point: {0}")]
    InvalidPoint(String),
    #[error("table invalid: {0}")]
    InvalidTable(String),
    #[error("table is not {k}-Lipschitz: pair ({x1}, {x2}) has image distance {image_distance} > {allowed}")]
    NotLipschitz {
        k: Rat,
        x1: Rat,
        x2: Rat,
        image_distance: Rat,
        allowed: Rat,
    },
    #[error("collapse soundness violated: {0}")]
    Soundness(String),
}

/// A point of the glued space: one of the two shared base points, or an
/// interior point of a named sheet.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "tag", rename_all = "lowercase")]
pub enum GluedPoint {
    Base0,
    Base1,
    Inner { sheet: String, x: Rat },
}

/// Sheets keyed by opaque ids; all sheets share one eps0.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GluedSpace {
    pub sheets: BTreeMap<String, GapStructure>,
}

impl GluedSpace {
    pub fn new(sheets: BTreeMap<String, GapStructure>) -> Result<Self, GluedError> {
        let mut eps0: Option<&Rat> = None;
        for (id, gs) in &sheets {
            match eps0 {
                None => eps0 = Some(gs.gamma.eps0()),
                Some(e) if e == gs.gamma.eps0() => {}
                Some(e) => {
                    return Err(GluedError::InvalidSpace(format!(
                        "sheet {id} has eps0 = {}, expected {e}",
                        gs.gamma.eps0()
                    )))
                }
            }
        }
        Ok(GluedSpace { sheets })
    }

    fn validate_point(&self, p: &GluedPoint) -> Result<(), GluedError> {
        if let GluedPoint::Inner { sheet, x } = p {
            let gs = self
                .sheets
                .get(sheet)
                .ok_or_else(|| GluedError::UnknownSheet(sheet.clone()))?;
            if !x.is_positive() || x >= &Rat::one() {
                return Err(GluedError::InvalidPoint(format!(
                    "inner coordinate {x} must lie strictly inside (0, 1)"
                )));
            }
            if !gs.complement_contains(x) {
                return Err(GluedError::InvalidPoint(format!(
                    "{x} lies inside a gap of sheet {sheet}"
                )));
            }
        }
        Ok(())
    }
}

fn dist_to_base0(p: &GluedPoint) -> Rat {
    match p {
        GluedPoint::Base0 => Rat::zero(),
        GluedPoint::Base1 => Rat::one(),
        GluedPoint::Inner { x, .. } => x.clone(),
    }
}

fn dist_to_base1(p: &GluedPoint) -> Rat {
    match p {
        GluedPoint::Base0 => Rat::one(),
        GluedPoint::Base1 => Rat::zero(),
        GluedPoint::Inner { x, .. } => Rat::one() - x,
    }
}

/// Exact metric: within a sheet the line distance, across sheets the better
/// of the two detours through the glued base points.
pub fn glued_distance(
    p: &GluedPoint,
    q: &GluedPoint,
    space: &GluedSpace,
) -> Result<Rat, GluedError> {
    space.validate_point(p)?;
    space.validate_point(q)?;
    Ok(glued_distance_unchecked(p, q))
}

fn glued_distance_unchecked(p: &GluedPoint, q: &GluedPoint) -> Rat {
    match (p, q) {
        (GluedPoint::Base0, GluedPoint::Base0) | (GluedPoint::Base1, GluedPoint::Base1) => {
            Rat::zero()
        }
        (GluedPoint::Base0, GluedPoint::Base1) | (GluedPoint::Base1, GluedPoint::Base0) => {
            Rat::one()
        }
        (GluedPoint::Base0, other) | (other, GluedPoint::Base0) => dist_to_base0(other),
        (GluedPoint::Base1, other) | (other, GluedPoint::Base1) => dist_to_base1(other),
        (GluedPoint::Inner { sheet: s1, x }, GluedPoint::Inner { sheet: s2, x: y }) => {
            if s1 == s2 {
                (x - y).abs()
            } else {
                std::cmp::min(x + y, (Rat::one() - x) + (Rat::one() - y))
            }
        }
    }
}

/// Isometric embedding of a sheet's complement: 0 and 1 land on the shared
/// base points, everything else on the sheet.
pub fn embed(x: &Rat, sheet_id: &str, space: &GluedSpace) -> Result<GluedPoint, GluedError> {
    let gs = space
        .sheets
        .get(sheet_id)
        .ok_or_else(|| GluedError::UnknownSheet(sheet_id.to_string()))?;
    if x.is_zero() {
        return Ok(GluedPoint::Base0);
    }
    if x == &Rat::one() {
        return Ok(GluedPoint::Base1);
    }
    if !gs.complement_contains(x) || x.is_negative() || x > &Rat::one() {
        return Err(GluedError::InvalidPoint(format!(
            "{x} is not a point of sheet {sheet_id}"
        )));
    }
    Ok(GluedPoint::Inner {
        sheet: sheet_id.to_string(),
        x: x.clone(),
    })
}

/// Result of collapsing a K-Lipschitz table through one sheet.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CollapseResult {
    /// Below `p` the collapsed map is 0.
    pub p: Rat,
    /// At and above `q` the collapsed map is 1.
    pub q: Rat,
    /// The sheet carrying the middle segment, when any interior image exists.
    pub n0: Option<String>,
    /// The collapsed table, key by key.
    pub f0: Vec<(Rat, Rat)>,
}

fn image_sheet(p: &GluedPoint) -> Option<&str> {
    match p {
        GluedPoint::Inner { sheet, .. } => Some(sheet),
        _ => None,
    }
}

/// Membership conditions for a left endpoint `x` with witness `y > x`:
/// all images on `[x, y)` lie in one sheet (or on the base points), and each
/// such point can still reach 1 within the K budget through `y`'s image.
fn witness_ok(table: &[(Rat, GluedPoint)], i: usize, yi: usize, k: &Rat) -> Option<Option<String>> {
    let (ref y, ref img_y) = table[yi];
    let mut sheet: Option<String> = None;
    for (z, img_z) in &table[i..yi] {
        if let Some(s) = image_sheet(img_z) {
            match &sheet {
                None => sheet = Some(s.to_string()),
                Some(prev) if prev == s => {}
                Some(_) => return None,
            }
        }
        let lhs = dist_to_base1(img_z) + dist_to_base1(img_y);
        if lhs > k * (y - z) {
            return None;
        }
    }
    Some(sheet)
}

/// Collapse a K-Lipschitz table into a single sheet: find the least key that
/// admits a one-sheet run reaching toward 1, then clamp below it to 0 and
/// from the witness on to 1. The output is checked to be K-Lipschitz on the
/// table and to fix 0 and 1.
pub fn collapse_map(
    table: &[(Rat, GluedPoint)],
    k: &Rat,
    space: &GluedSpace,
) -> Result<CollapseResult, GluedError> {
    if !k.is_positive() {
        return Err(GluedError::InvalidTable(format!(
            "K must be positive, got {k}"
        )));
    }
    let mut table: Vec<(Rat, GluedPoint)> = table.to_vec();
    table.sort_by(|a, b| a.0.cmp(&b.0));
    for w in table.windows(2) {
        if w[0].0 == w[1].0 {
            return Err(GluedError::InvalidTable(format!(
                "duplicate key {}",
                w[0].0
            )));
        }
    }
    if table.len() < 2 {
        return Err(GluedError::InvalidTable(
            "table needs at least the two endpoint samples".into(),
        ));
    }
    match table.first() {
        Some((x, GluedPoint::Base0)) if x.is_zero() => {}
        _ => {
            return Err(GluedError::InvalidTable(
                "table must map 0 to the lower base point".into(),
            ))
        }
    }
    match table.last() {
        Some((x, GluedPoint::Base1)) if *x == Rat::one() => {}
        _ => {
            return Err(GluedError::InvalidTable(
                "table must map 1 to the upper base point".into(),
            ))
        }
    }
    for (_, img) in &table {
        space.validate_point(img)?;
    }
    for i in 0..table.len() {
        for j in (i + 1)..table.len() {
            let d = glued_distance_unchecked(&table[i].1, &table[j].1);
            let allowed = k * (&table[j].0 - &table[i].0);
            if d > allowed {
                return Err(GluedError::NotLipschitz {
                    k: k.clone(),
                    x1: table[i].0.clone(),
                    x2: table[j].0.clone(),
                    image_distance: d,
                    allowed,
                });
            }
        }
    }

    let last = table.len() - 1;
    // least admissible left endpoint; the last key is always admissible
    let mut p_idx = last;
    let mut q_idx = last;
    let mut n0: Option<String> = None;
    'outer: for i in 0..last {
        // prefer the largest witness
        for yi in (i + 1..=last).rev() {
            if let Some(sheet) = witness_ok(&table, i, yi, k) {
                p_idx = i;
                q_idx = yi;
                n0 = sheet;
                break 'outer;
            }
        }
    }

    let p = table[p_idx].0.clone();
    let q = table[q_idx].0.clone();
    let f0: Vec<(Rat, Rat)> = table
        .iter()
        .map(|(x, img)| {
            let v = if x < &p {
                Rat::zero()
            } else if x < &q {
                match img {
                    GluedPoint::Base0 => Rat::zero(),
                    GluedPoint::Base1 => Rat::one(),
                    GluedPoint::Inner { x: c, .. } => c.clone(),
                }
            } else {
                Rat::one()
            };
            (x.clone(), v)
        })
        .collect();

    // soundness: the collapsed table is K-Lipschitz and fixes the endpoints
    if f0.first().map(|(_, v)| !v.is_zero()).unwrap_or(true) {
        return Err(GluedError::Soundness("collapsed map does not fix 0".into()));
    }
    if f0.last().map(|(_, v)| v != &Rat::one()).unwrap_or(true) {
        return Err(GluedError::Soundness("collapsed map does not fix 1".into()));
    }
    for i in 0..f0.len() {
        for j in (i + 1)..f0.len() {
            let d = (&f0[j].1 - &f0[i].1).abs();
            if d > k * (&f0[j].0 - &f0[i].0) {
                return Err(GluedError::Soundness(format!(
                    "collapsed pair ({}, {}) exceeds the K budget",
                    f0[i].0, f0[j].0
                )));
            }
        }
    }

    Ok(CollapseResult { p, q, n0, f0 })
}
