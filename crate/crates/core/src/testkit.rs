//! Deterministic instance generators for the differential and acceptance
//! suites. The generator is a fixed SplitMix64 stream, so a seed names the
//! same instance on every platform and toolchain.

use crate::cube::SheetSpec;
use crate::gaps::GapStructure;
use crate::metric::FiniteMetricSpace;
use crate::rational::Rat;

/// SplitMix64; good enough statistics, trivially portable.
#[derive(Clone, Debug)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in `0..bound`.
    pub fn below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0);
        self.next_u64() % bound
    }

    pub fn range(&mut self, lo: u64, hi_inclusive: u64) -> u64 {
        lo + self.below(hi_inclusive - lo + 1)
    }

    pub fn pick<'a, T>(&mut self, items: &'a [T]) -> &'a T {
        &items[self.below(items.len() as u64) as usize]
    }

    pub fn chance(&mut self, num: u64, den: u64) -> bool {
        self.below(den) < num
    }
}

/// A rational `p/q` with `0 <= p <= q` and `1 <= q <= max_denominator`.
pub fn gen_unit_rat(rng: &mut SplitMix64, max_denominator: u64) -> Rat {
    let q = rng.range(1, max_denominator);
    let p = rng.below(q + 1);
    Rat::new(p as i64, q as i64)
}

/// Random gap structure: at most `max_gaps` disjoint open gaps with endpoint
/// denominators at most `max_denominator`, total length capped so the slack
/// leaves room for a positive eps0.
pub fn gen_gap_structure(
    rng: &mut SplitMix64,
    max_gaps: usize,
    max_denominator: u64,
) -> GapStructure {
    loop {
        let target = rng.below(max_gaps as u64 + 1) as usize;
        let mut cuts: Vec<Rat> = (0..2 * target)
            .map(|_| gen_unit_rat(rng, max_denominator))
            .collect();
        cuts.sort();
        cuts.dedup();
        let mut intervals = Vec::new();
        let mut total = Rat::zero();
        let mut i = 0;
        while i + 1 < cuts.len() {
            let (a, b) = (cuts[i].clone(), cuts[i + 1].clone());
            i += 2;
            if a >= b || b > Rat::one() {
                continue;
            }
            let len = &b - &a;
            if &total + &len >= Rat::new(3, 4) {
                continue;
            }
            total = total + len;
            intervals.push((a, b));
        }
        if let Ok(gs) = GapStructure::from_intervals(intervals) {
            return gs;
        }
    }
}

/// Random sheet spec of the given dimension with band widths in (0, 1/2).
pub fn gen_sheet_spec(rng: &mut SplitMix64, lambda: usize, max_denominator: u64) -> SheetSpec {
    let gamma = (0..lambda)
        .map(|_| loop {
            let q = rng.range(3, max_denominator);
            let p = rng.range(1, q / 2);
            let g = Rat::new(p as i64, q as i64);
            if g.is_positive() && g < Rat::new(1, 2) {
                break g;
            }
        })
        .collect();
    SheetSpec::new(gamma).expect("generated bands are admissible")
}

/// A point of the sheet: each coordinate uniform over a small grid inside
/// the allowed bands.
pub fn gen_sheet_point(rng: &mut SplitMix64, sheet: &SheetSpec, max_denominator: u64) -> Vec<Rat> {
    let half = Rat::new(1, 2);
    sheet
        .gamma
        .iter()
        .map(|g| {
            let low_side = rng.chance(1, 2);
            loop {
                let c = gen_unit_rat(rng, max_denominator);
                if low_side {
                    let scaled = &c * (&half - g);
                    if scaled <= &half - g {
                        break scaled;
                    }
                } else {
                    let scaled = &half + g + &c * (&half - g);
                    if scaled <= Rat::one() {
                        break scaled;
                    }
                }
            }
        })
        .collect()
}

/// Random finite metric space: points scattered on a rational line fold,
/// which satisfies every metric axiom by construction and keeps distances
/// exact and small.
pub fn gen_line_space(
    rng: &mut SplitMix64,
    max_points: usize,
    max_denominator: u64,
) -> FiniteMetricSpace {
    loop {
        let n = rng.range(3, max_points as u64) as usize;
        let mut coords: Vec<Rat> = (0..n).map(|_| gen_unit_rat(rng, max_denominator)).collect();
        coords.sort();
        coords.dedup();
        if coords.len() < 3 {
            continue;
        }
        if let Ok(m) = FiniteMetricSpace::line(&coords) {
            return m;
        }
    }
}

/// Clustered line space: `clusters` tight groups spread across the unit
/// interval; within-cluster spreads stay below `tightness`.
pub fn gen_clustered_space(
    rng: &mut SplitMix64,
    clusters: usize,
    per_cluster: usize,
    tightness: &Rat,
) -> FiniteMetricSpace {
    loop {
        let mut coords: Vec<Rat> = Vec::new();
        for c in 0..clusters {
            let center = Rat::new(c as i64, (clusters as i64).max(1));
            for _ in 0..per_cluster {
                let jitter = gen_unit_rat(rng, 64) * tightness;
                let x = &center + &jitter;
                if x <= Rat::one() {
                    coords.push(x);
                }
            }
        }
        coords.sort();
        coords.dedup();
        if coords.len() >= 3 {
            if let Ok(m) = FiniteMetricSpace::line(&coords) {
                return m;
            }
        }
    }
}

/// Random total function on a space with values on a rational grid.
pub fn gen_function(rng: &mut SplitMix64, n: usize, max_denominator: u64) -> Vec<Rat> {
    (0..n)
        .map(|_| {
            let v = gen_unit_rat(rng, max_denominator);
            if rng.chance(1, 2) {
                v
            } else {
                -v
            }
        })
        .collect()
}
