//! q-numbers and Gaussian binomials.

use super::rational::Scalar;
use crate::error::{Error, Result};

/// (m)_q = 1 + q + … + q^{m-1}.
pub fn q_number(m: u32, q: &Scalar) -> Scalar {
    let mut acc = Scalar::zero();
    let mut p = Scalar::one();
    for _ in 0..m {
        acc = acc.add(&p);
        p = p.mul(q);
    }
    acc
}

pub fn q_factorial(m: u32, q: &Scalar) -> Scalar {
    (1..=m).fold(Scalar::one(), |acc, k| acc.mul(&q_number(k, q)))
}

/// Gaussian binomial by the Pascal recurrence
/// `[k, m] = [k-1, m-1] + q^m [k-1, m]`, so no division ever happens.
pub fn q_binomial(k: u32, m: u32, q: &Scalar) -> Result<Scalar> {
    if m > k {
        return Err(Error::Precondition(format!(
            "q_binomial needs m <= k, got k = {k}, m = {m}"
        )));
    }
    let mut row = vec![Scalar::one()];
    for n in 1..=k {
        let mut next = vec![Scalar::one(); n as usize + 1];
        for j in 1..n as usize {
            next[j] = row[j - 1].add(&q.powi(j as i32).mul(&row[j]));
        }
        row = next;
    }
    Ok(row[m as usize].clone())
}
