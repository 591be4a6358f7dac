//! Exact-arithmetic machinery for Lipschitz retraction counterexamples:
//! fat Cantor gap structures, a decision procedure for monotone K-Lipschitz
//! maps between them, a diagonal construction defeating finite families,
//! glued and vertex-cube metric spaces, and finite-scale Lipschitz extension
//! operators.

#![allow(clippy::result_large_err)]
#![allow(clippy::large_enum_variant)]
#![allow(clippy::needless_range_loop)]

pub mod adversary;
pub mod cube;
pub mod enumeration;
pub mod extension;
pub mod gaps;
pub mod glued;
pub mod lipschitz;
pub mod metric;
pub mod oracle;
pub mod rational;
pub mod testkit;

pub use enumeration::RationalEnumeration;
pub use gaps::{build_gaps, GammaSequence, Gap, GapStructure, PairCheck, RefinementWitness};
pub use rational::Rat;
