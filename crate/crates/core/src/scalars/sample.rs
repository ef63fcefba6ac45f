//! Seeded random rational points for evaluation-based checks.

use std::collections::BTreeMap;

use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::poly::Symbol;
use super::rational::Scalar;
use crate::error::{Error, Result};

/// Nonzero rationals p/r with 1 ≤ |p| ≤ 97 and 1 ≤ r ≤ 97.
pub fn random_rational(rng: &mut impl Rng) -> BigRational {
    let p: i64 = rng.gen_range(1..=97) * if rng.gen_bool(0.5) { 1 } else { -1 };
    let r: i64 = rng.gen_range(1..=97);
    BigRational::new(p.into(), r.into())
}

pub fn random_point(symbols: &[Symbol], seed: u64) -> BTreeMap<Symbol, BigRational> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    symbols
        .iter()
        .map(|&s| (s, random_rational(&mut rng)))
        .collect()
}

/// Exact value of `x` at `point`; every symbol of `x` must be assigned.
pub fn eval_at(x: &Scalar, point: &BTreeMap<Symbol, BigRational>) -> Result<BigRational> {
    if let Some(s) = x.symbols().into_iter().find(|s| !point.contains_key(s)) {
        return Err(Error::Invalid(format!("no value for {s}")));
    }
    x.eval(&|s| point[&s].clone())
}
