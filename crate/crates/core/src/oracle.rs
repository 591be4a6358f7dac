//! Brute-force grid dynamic program for map feasibility, kept independent of
//! the event sweep so the two can be compared differentially.
//!
//! Optimal monotone K-Lipschitz maps take values in the finite set of
//! codomain endpoints shifted by K times differences of domain endpoints, so
//! a reachability pass over that exact grid decides feasibility with no
//! tolerance at all.

use crate::gaps::GapStructure;
use crate::rational::Rat;

/// Per-grid-point results of the dynamic program.
#[derive(Clone, Debug)]
pub struct GridOutcome {
    pub feasible: bool,
    /// Domain grid (all component endpoints, increasing).
    pub grid: Vec<Rat>,
    /// For each grid point, the largest value attained by any feasible grid
    /// map, when the instance is feasible.
    pub max_feasible_value: Vec<Option<Rat>>,
}

/// Decide feasibility by forward/backward reachability over the value grid.
pub fn grid_dp_decide(domain: &GapStructure, codomain: &GapStructure, k: &Rat) -> GridOutcome {
    let comps = domain.complement_intervals();
    let mut grid: Vec<Rat> = Vec::new();
    // transition spans between consecutive grid points: true = inside one
    // component (continuity constraint applies), false = across a domain gap
    let mut within: Vec<bool> = Vec::new();
    for (a, b) in &comps {
        if grid.is_empty() {
            grid.push(a.clone());
        } else {
            grid.push(a.clone());
            within.push(false);
        }
        if b > a {
            grid.push(b.clone());
            within.push(true);
        }
    }

    // candidate value set
    let mut anchors: Vec<Rat> = vec![Rat::zero(), Rat::one()];
    for g in &codomain.gaps {
        anchors.push(g.left.clone());
        anchors.push(g.right());
    }
    let mut values: Vec<Rat> = Vec::new();
    for e in &anchors {
        for i in 0..grid.len() {
            for j in i..grid.len() {
                let v = e + k * (&grid[j] - &grid[i]);
                if v.is_negative() || v > Rat::one() {
                    continue;
                }
                if codomain.complement_contains(&v) {
                    values.push(v);
                }
            }
        }
    }
    values.sort();
    values.dedup();
    let vidx = |v: &Rat| -> usize { values.partition_point(|w| w < v) };

    // largest admissible increase from value v over one span
    let span_cap = |v: &Rat, dx: &Rat, inside: bool| -> Rat {
        let mut cap = std::cmp::min(v + k * dx, Rat::one());
        if inside {
            // climbing may not cross a codomain gap
            for g in &codomain.gaps {
                if &g.left >= v && g.left < cap {
                    cap = g.left.clone();
                }
            }
        }
        cap
    };

    let n = grid.len();
    let m = values.len();
    let mut forward = vec![vec![false; m]; n];
    let zero_idx = vidx(&Rat::zero());
    debug_assert!(values.get(zero_idx) == Some(&Rat::zero()));
    forward[0][zero_idx] = true;
    for t in 0..n - 1 {
        let dx = &grid[t + 1] - &grid[t];
        let inside = within[t];
        let mut marks: Vec<(usize, usize)> = Vec::new();
        for (vi, reach) in forward[t].iter().enumerate() {
            if !reach {
                continue;
            }
            let v = &values[vi];
            let hi = span_cap(v, &dx, inside);
            let lo_i = vi;
            let hi_i = values.partition_point(|w| w <= &hi);
            if hi_i > lo_i {
                marks.push((lo_i, hi_i));
            }
        }
        for (lo, hi) in marks {
            for cell in &mut forward[t + 1][lo..hi] {
                *cell = true;
            }
        }
    }

    let one_idx = vidx(&Rat::one());
    debug_assert!(values.get(one_idx) == Some(&Rat::one()));
    let feasible = forward[n - 1][one_idx];

    let mut max_feasible_value = vec![None; n];
    if feasible {
        let mut backward = vec![vec![false; m]; n];
        backward[n - 1][one_idx] = true;
        for t in (0..n - 1).rev() {
            let dx = &grid[t + 1] - &grid[t];
            let inside = within[t];
            for vi in 0..m {
                let v = &values[vi];
                let hi = span_cap(v, &dx, inside);
                let hi_i = values.partition_point(|w| w <= &hi);
                backward[t][vi] = backward[t + 1][vi..hi_i].iter().any(|&b| b);
            }
        }
        for t in 0..n {
            let best = (0..m)
                .rev()
                .find(|&vi| forward[t][vi] && backward[t][vi])
                .map(|vi| values[vi].clone());
            max_feasible_value[t] = best;
        }
    }

    GridOutcome {
        feasible,
        grid,
        max_feasible_value,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lipschitz::max_feasible_map;
    use crate::rational::rat;

    fn instance() -> (GapStructure, GapStructure) {
        let domain = GapStructure::from_intervals(vec![(rat("2/5"), rat("3/5"))]).unwrap();
        let codomain = GapStructure::from_intervals(vec![(rat("1/10"), rat("3/10"))]).unwrap();
        (domain, codomain)
    }

    #[test]
    fn grid_dp_matches_sweep_on_worked_example() {
        let (domain, codomain) = instance();
        for k in ["1", "3/2", "2", "3"] {
            let k = rat(k);
            let sweep = max_feasible_map(&domain, &codomain, &k).unwrap();
            let dp = grid_dp_decide(&domain, &codomain, &k);
            assert_eq!(sweep.feasible, dp.feasible, "K = {k}");
            if dp.feasible {
                for (x, best) in dp.grid.iter().zip(&dp.max_feasible_value) {
                    let fstar = sweep.max_map.eval(x).unwrap();
                    assert!(best.as_ref().unwrap() <= &fstar);
                }
            }
        }
    }

    #[test]
    fn grid_dp_identity_feasible() {
        let (domain, _) = instance();
        let dp = grid_dp_decide(&domain, &domain, &rat("1"));
        assert!(dp.feasible);
    }
}
