//! Finite pointed metric spaces with exact rational distance matrices, and
//! partial/total Lipschitz function tables over them.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rational::Rat;

#[derive(Debug, Error)]
pub enum MetricError {
    #[error("invalid metric space: {0}")]
    Invalid(String),
    #[error("unknown point id {0}")]
    UnknownId(String),
    #[error("matrix file malformed: {0}")]
    Malformed(String),
    #[error("function table invalid: {0}")]
    InvalidTable(String),
    #[error(
        "function is not {l}-Lipschitz: pair ({i}, {j}) differs by {diff} over distance {dist}"
    )]
    NotLipschitz {
        l: Rat,
        i: String,
        j: String,
        diff: Rat,
        dist: Rat,
    },
}

/// Finite metric space: named points, a symmetric exact distance matrix that
/// satisfies the triangle inequality, and a distinguished base point.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FiniteMetricSpace {
    ids: Vec<String>,
    dist: Vec<Vec<Rat>>,
    base: usize,
}

impl FiniteMetricSpace {
    pub fn new(ids: Vec<String>, dist: Vec<Vec<Rat>>, base: usize) -> Result<Self, MetricError> {
        let n = ids.len();
        if n == 0 {
            return Err(MetricError::Invalid("no points".into()));
        }
        if base >= n {
            return Err(MetricError::Invalid(format!(
                "base index {base} out of range"
            )));
        }
        {
            let mut sorted = ids.clone();
            sorted.sort();
            sorted.dedup();
            if sorted.len() != n {
                return Err(MetricError::Invalid("duplicate point ids".into()));
            }
        }
        if dist.len() != n || dist.iter().any(|row| row.len() != n) {
            return Err(MetricError::Invalid(format!("matrix must be {n} x {n}")));
        }
        for i in 0..n {
            if !dist[i][i].is_zero() {
                return Err(MetricError::Invalid(format!(
                    "d({}, {}) must be 0",
                    ids[i], ids[i]
                )));
            }
            for j in 0..n {
                if i != j && !dist[i][j].is_positive() {
                    return Err(MetricError::Invalid(format!(
                        "d({}, {}) must be positive",
                        ids[i], ids[j]
                    )));
                }
                if dist[i][j] != dist[j][i] {
                    return Err(MetricError::Invalid(format!(
                        "matrix is not symmetric at ({}, {})",
                        ids[i], ids[j]
                    )));
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if dist[i][j] > &dist[i][k] + &dist[k][j] {
                        return Err(MetricError::Invalid(format!(
                            "triangle inequality fails at ({}, {}, {})",
                            ids[i], ids[j], ids[k]
                        )));
                    }
                }
            }
        }
        Ok(FiniteMetricSpace { ids, dist, base })
    }

    /// Points on a line with the absolute-value metric; ids are zero-padded
    /// so id order matches coordinate order.
    pub fn line(points: &[Rat]) -> Result<Self, MetricError> {
        let width = points.len().to_string().len();
        let ids: Vec<String> = (0..points.len()).map(|i| format!("p{i:0width$}")).collect();
        let dist: Vec<Vec<Rat>> = points
            .iter()
            .map(|x| points.iter().map(|y| (x - y).abs()).collect())
            .collect();
        FiniteMetricSpace::new(ids, dist, 0)
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn base(&self) -> usize {
        self.base
    }

    pub fn id(&self, i: usize) -> &str {
        &self.ids[i]
    }

    pub fn index_of(&self, id: &str) -> Result<usize, MetricError> {
        self.ids
            .iter()
            .position(|x| x == id)
            .ok_or_else(|| MetricError::UnknownId(id.to_string()))
    }

    pub fn d(&self, i: usize, j: usize) -> &Rat {
        &self.dist[i][j]
    }

    pub fn diameter(&self) -> Rat {
        let mut best = Rat::zero();
        for i in 0..self.len() {
            for j in (i + 1)..self.len() {
                if self.dist[i][j] > best {
                    best = self.dist[i][j].clone();
                }
            }
        }
        best
    }

    /// Smallest pairwise distance within a point set; `None` for fewer than
    /// two points.
    pub fn min_pairwise(&self, set: &[usize]) -> Option<Rat> {
        let mut best: Option<Rat> = None;
        for (a, &i) in set.iter().enumerate() {
            for &j in &set[a + 1..] {
                let d = self.d(i, j).clone();
                if best.as_ref().map(|b| &d < b).unwrap_or(true) {
                    best = Some(d);
                }
            }
        }
        best
    }

    /// Smallest enclosing-ball radius over candidate centers in the space.
    pub fn radius_of(&self, set: &[usize]) -> Rat {
        let mut best: Option<Rat> = None;
        for c in 0..self.len() {
            let mut worst = Rat::zero();
            for &i in set {
                if self.d(c, i) > &worst {
                    worst = self.d(c, i).clone();
                }
            }
            if best.as_ref().map(|b| &worst < b).unwrap_or(true) {
                best = Some(worst);
            }
        }
        best.unwrap_or_else(Rat::zero)
    }

    pub fn is_separated(&self, set: &[usize], eps: &Rat) -> bool {
        match self.min_pairwise(set) {
            Some(m) => &m >= eps,
            None => true,
        }
    }

    /// Parse the matrix text format: an id header line, one matrix row per
    /// line, and an optional trailing `base <id>` line.
    pub fn from_matrix_text(text: &str) -> Result<Self, MetricError> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines
            .next()
            .ok_or_else(|| MetricError::Malformed("missing id header".into()))?;
        let ids: Vec<String> = header.split_whitespace().map(str::to_string).collect();
        let n = ids.len();
        let mut dist = Vec::with_capacity(n);
        let mut base = 0usize;
        for line in lines {
            if let Some(b) = line.strip_prefix("base ") {
                base = ids
                    .iter()
                    .position(|x| x == b.trim())
                    .ok_or_else(|| MetricError::UnknownId(b.trim().to_string()))?;
                continue;
            }
            let row: Result<Vec<Rat>, _> = line.split_whitespace().map(str::parse).collect();
            dist.push(row.map_err(|e| MetricError::Malformed(format!("{e}")))?);
        }
        if dist.len() != n {
            return Err(MetricError::Malformed(format!(
                "expected {n} rows, got {}",
                dist.len()
            )));
        }
        FiniteMetricSpace::new(ids, dist, base)
    }

    pub fn to_matrix_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.ids.join(" "));
        out.push('\n');
        for row in &self.dist {
            let cells: Vec<String> = row.iter().map(|r| r.to_string()).collect();
            out.push_str(&cells.join(" "));
            out.push('\n');
        }
        out.push_str(&format!("base {}\n", self.ids[self.base]));
        out
    }
}

/// Partial function table with a declared Lipschitz constant.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LipschitzSample {
    pub values: BTreeMap<usize, Rat>,
    pub constant: Rat,
}

impl LipschitzSample {
    /// Validate the declared constant over all table pairs, and that the
    /// base vanishes when present.
    pub fn validate(&self, space: &FiniteMetricSpace) -> Result<(), MetricError> {
        if self.constant.is_negative() {
            return Err(MetricError::InvalidTable(
                "declared constant must be non-negative".into(),
            ));
        }
        if let Some(v) = self.values.get(&space.base()) {
            if !v.is_zero() {
                return Err(MetricError::InvalidTable(
                    "value at the base point must be 0".into(),
                ));
            }
        }
        let keys: Vec<usize> = self.values.keys().copied().collect();
        for (a, &i) in keys.iter().enumerate() {
            if i >= space.len() {
                return Err(MetricError::InvalidTable(format!("index {i} out of range")));
            }
            for &j in &keys[a + 1..] {
                let diff = (&self.values[&i] - &self.values[&j]).abs();
                if diff > &self.constant * space.d(i, j) {
                    return Err(MetricError::NotLipschitz {
                        l: self.constant.clone(),
                        i: space.id(i).to_string(),
                        j: space.id(j).to_string(),
                        diff,
                        dist: space.d(i, j).clone(),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn is_total(&self, space: &FiniteMetricSpace) -> bool {
        (0..space.len()).all(|i| self.values.contains_key(&i))
    }
}

/// Exact Lipschitz constant of a total table over all pairs.
pub fn exact_lipschitz_constant(values: &[Rat], space: &FiniteMetricSpace) -> Rat {
    let mut best = Rat::zero();
    for i in 0..space.len() {
        for j in (i + 1)..space.len() {
            let q = (&values[i] - &values[j]).abs() / space.d(i, j);
            if q > best {
                best = q;
            }
        }
    }
    best
}
