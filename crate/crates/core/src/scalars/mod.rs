//! Exact arithmetic in ℚ(q_{ij}) with specialization maps and q-combinatorics.

mod gcd;
mod numfield;
mod parse;
mod poly;
mod qcomb;
mod rational;
mod sample;
mod specialize;

pub use gcd::gcd;
pub use numfield::{NfElem, NumberField};
pub use parse::{parse_scalar, parse_symbol};
pub use poly::{Monomial, Poly, Symbol};
pub use qcomb::{q_binomial, q_factorial, q_number};
pub use rational::Scalar;
pub use sample::{eval_at, random_point, random_rational};
pub use specialize::{AlgebraicRelation, Image, Specialization};
