//! Test support: brute-force oracles that share no code with the
//! implementations they check, plus synthetic release triples.

pub mod fixture;
pub mod oracle;
pub mod problems;
pub mod tracking;
