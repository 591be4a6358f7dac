//! Deterministic orderings of the reduced fractions in `[0, 1]`.
//!
//! Gap structures depend on the chosen ordering, so the ordering is named in
//! every serialized artifact. The default lists fractions by denominator and
//! then numerator: `0, 1, 1/2, 1/3, 2/3, 1/4, 3/4, 1/5, ...`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::rational::Rat;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum RationalEnumeration {
    #[default]
    #[serde(rename = "denominator-numerator")]
    DenominatorNumerator,
}

impl RationalEnumeration {
    pub fn name(&self) -> &'static str {
        match self {
            RationalEnumeration::DenominatorNumerator => "denominator-numerator",
        }
    }

    /// The n-th fraction, 1-based.
    pub fn nth(&self, n: u64) -> Rat {
        assert!(n >= 1, "enumeration is 1-based");
        self.iter().nth((n - 1) as usize).expect("infinite")
    }

    /// Iterator over the full enumeration, starting at index 1.
    pub fn iter(&self) -> impl Iterator<Item = Rat> {
        Fractions { denom: 1, numer: 0 }
    }

    /// 1-based index of a reduced fraction in `[0, 1]`; `None` outside.
    pub fn index_of(&self, q: &Rat) -> Option<u64> {
        if q.is_negative() || q > &Rat::one() {
            return None;
        }
        let denom = q.denom().to_u64()?;
        let numer = q.numer().to_u64()?;
        if denom == 1 {
            return Some(if numer == 0 { 1 } else { 2 });
        }
        let mut idx = 2u64;
        for d in 2..denom {
            idx += euler_phi(d);
        }
        for p in 1..numer {
            if gcd(p, denom) == 1 {
                idx += 1;
            }
        }
        Some(idx + 1)
    }
}

struct Fractions {
    denom: u64,
    numer: u64,
}

impl Iterator for Fractions {
    type Item = Rat;

    fn next(&mut self) -> Option<Rat> {
        loop {
            if self.denom == 1 {
                if self.numer == 0 {
                    self.numer = 1;
                    return Some(Rat::zero());
                }
                self.denom = 2;
                self.numer = 1;
                return Some(Rat::one());
            }
            if self.numer >= self.denom {
                self.denom += 1;
                self.numer = 1;
                continue;
            }
            let p = self.numer;
            self.numer += 1;
            if gcd(p, self.denom) == 1 {
                return Some(Rat::from_bigints(BigInt::from(p), BigInt::from(self.denom)).unwrap());
            }
        }
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    BigInt::from(a).gcd(&BigInt::from(b)).to_u64().unwrap()
}

fn euler_phi(n: u64) -> u64 {
    (1..n).filter(|&p| gcd(p, n) == 1).count() as u64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    #[test]
    fn default_order_prefix() {
        let e = RationalEnumeration::default();
        let got: Vec<Rat> = e.iter().take(11).collect();
        let want: Vec<Rat> = [
            "0", "1", "1/2", "1/3", "2/3", "1/4", "3/4", "1/5", "2/5", "3/5", "4/5",
        ]
        .iter()
        .map(|s| rat(s))
        .collect();
        assert_eq!(got, want);
    }

    #[test]
    fn index_of_inverts_nth() {
        let e = RationalEnumeration::default();
        for (i, q) in e.iter().take(200).enumerate() {
            assert_eq!(e.index_of(&q), Some(i as u64 + 1), "at {q}");
        }
    }

    #[test]
    fn index_of_rejects_outside_unit_interval() {
        let e = RationalEnumeration::default();
        assert_eq!(e.index_of(&rat("-1/2")), None);
        assert_eq!(e.index_of(&rat("3/2")), None);
    }

    #[test]
    fn nth_matches_examples() {
        let e = RationalEnumeration::default();
        assert_eq!(e.nth(1), rat("0"));
        assert_eq!(e.nth(3), rat("1/2"));
        assert_eq!(e.nth(4), rat("1/3"));
        assert_eq!(e.nth(6), rat("1/4"));
    }

    #[test]
    fn enumeration_is_injective_on_prefix() {
        let e = RationalEnumeration::default();
        let mut seen = std::collections::BTreeSet::new();
        for q in e.iter().take(500) {
            assert!(seen.insert(q.to_string()));
        }
    }
}
