//! Exact dense linear algebra over a generic field: reduced row-echelon
//! form, null spaces, determinants and linear solves.

use std::fmt::Debug;

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::scalars::{NfElem, Scalar};

pub trait Field: Clone + PartialEq + Debug + Send + Sync {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    /// Inverse of a nonzero element.
    fn inv(&self) -> Self;
    /// Rough size, used to prefer simple pivots.
    fn cost(&self) -> usize {
        1
    }
}

impl Field for Scalar {
    fn zero() -> Self {
        Scalar::zero()
    }
    fn one() -> Self {
        Scalar::one()
    }
    fn is_zero(&self) -> bool {
        Scalar::is_zero(self)
    }
    fn add(&self, o: &Self) -> Self {
        Scalar::add(self, o)
    }
    fn sub(&self, o: &Self) -> Self {
        Scalar::sub(self, o)
    }
    fn mul(&self, o: &Self) -> Self {
        Scalar::mul(self, o)
    }
    fn neg(&self) -> Self {
        Scalar::neg(self)
    }
    fn inv(&self) -> Self {
        Scalar::inv(self).expect("pivot is nonzero")
    }
    fn cost(&self) -> usize {
        self.size()
    }
}

impl Field for BigRational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn inv(&self) -> Self {
        self.recip()
    }
    fn cost(&self) -> usize {
        (self.numer().bits() + self.denom().bits()) as usize
    }
}

impl Field for NfElem {
    fn zero() -> Self {
        NfElem::rational(Zero::zero())
    }
    fn one() -> Self {
        NfElem::rational(One::one())
    }
    fn is_zero(&self) -> bool {
        NfElem::is_zero(self)
    }
    fn add(&self, o: &Self) -> Self {
        NfElem::add(self, o)
    }
    fn sub(&self, o: &Self) -> Self {
        NfElem::sub(self, o)
    }
    fn mul(&self, o: &Self) -> Self {
        NfElem::mul(self, o)
    }
    fn neg(&self) -> Self {
        NfElem::neg(self)
    }
    fn inv(&self) -> Self {
        NfElem::inv(self).expect("pivot is invertible")
    }
}

/// A matrix in reduced row-echelon form.
#[derive(Clone, Debug)]
pub struct Rref<F> {
    pub rows: Vec<Vec<F>>,
    /// Pivot column of each of the first `pivots.len()` rows, increasing.
    pub pivots: Vec<usize>,
}

impl<F: Field> Rref<F> {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }
}

/// Gauss–Jordan elimination. Only columns `< pivot_cols` may hold pivots, so
/// trailing columns act as an augmented block.
pub fn rref<F: Field>(mut rows: Vec<Vec<F>>, pivot_cols: usize) -> Rref<F> {
    let mut pivots = Vec::new();
    let mut rank = 0;
    for col in 0..pivot_cols {
        if rank == rows.len() {
            break;
        }
        let best = (rank..rows.len())
            .filter(|&r| !rows[r][col].is_zero())
            .min_by_key(|&r| (rows[r][col].cost(), r));
        let Some(p) = best else { continue };
        rows.swap(rank, p);
        let inv = rows[rank][col].inv();
        for x in rows[rank].iter_mut().skip(col) {
            if !x.is_zero() {
                *x = x.mul(&inv);
            }
        }
        let pivot_row = rows[rank].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r == rank || row[col].is_zero() {
                continue;
            }
            let f = row[col].clone();
            for (x, y) in row.iter_mut().zip(pivot_row.iter()).skip(col) {
                if !y.is_zero() {
                    *x = x.sub(&f.mul(y));
                }
            }
        }
        pivots.push(col);
        rank += 1;
    }
    Rref { rows, pivots }
}

/// Null space basis of `rows` (each of length `ncols`), itself returned in
/// reduced row-echelon form: the first nonzero entry of each vector is 1 and
/// leading positions increase.
pub fn nullspace<F: Field>(rows: Vec<Vec<F>>, ncols: usize) -> Vec<Vec<F>> {
    let r = rref(rows, ncols);
    let mut basis = Vec::new();
    for f in 0..ncols {
        if r.pivots.contains(&f) {
            continue;
        }
        let mut v = vec![F::zero(); ncols];
        v[f] = F::one();
        for (i, &p) in r.pivots.iter().enumerate() {
            v[p] = r.rows[i][f].neg();
        }
        basis.push(v);
    }
    if basis.is_empty() {
        return basis;
    }
    let rb = rref(basis, ncols);
    let k = rb.rank();
    rb.rows.into_iter().take(k).collect()
}

pub fn rank<F: Field>(rows: Vec<Vec<F>>, ncols: usize) -> usize {
    rref(rows, ncols).rank()
}

/// Determinant of a square matrix.
pub fn determinant<F: Field>(mut m: Vec<Vec<F>>) -> F {
    let n = m.len();
    let mut det = F::one();
    for col in 0..n {
        let best = (col..n)
            .filter(|&r| !m[r][col].is_zero())
            .min_by_key(|&r| (m[r][col].cost(), r));
        let Some(p) = best else { return F::zero() };
        if p != col {
            m.swap(p, col);
            det = det.neg();
        }
        let piv = m[col][col].clone();
        det = det.mul(&piv);
        let inv = piv.inv();
        let pivot_row = m[col].clone();
        for row in m.iter_mut().skip(col + 1) {
            if row[col].is_zero() {
                continue;
            }
            let f = row[col].mul(&inv);
            for (x, y) in row.iter_mut().zip(pivot_row.iter()).skip(col) {
                if !y.is_zero() {
                    *x = x.sub(&f.mul(y));
                }
            }
        }
    }
    det
}

/// Result of solving `A x = b` for several right-hand sides at once.
#[derive(Clone, Debug)]
pub struct Solution<F> {
    pub rank: usize,
    pub ncols: usize,
    /// One entry per right-hand side; `None` when that system is inconsistent.
    /// Free variables are set to zero.
    pub x: Vec<Option<Vec<F>>>,
}

impl<F> Solution<F> {
    pub fn injective(&self) -> bool {
        self.rank == self.ncols
    }
}

/// Solves `a x = b_k` for each column `b_k` of `rhs` (`rhs[row][k]`).
pub fn solve<F: Field>(a: &[Vec<F>], ncols: usize, rhs: &[Vec<F>]) -> Solution<F> {
    let k = rhs.first().map(|r| r.len()).unwrap_or(0);
    let rows: Vec<Vec<F>> = a
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let b = rhs.get(i).map(|b| b.as_slice()).unwrap_or(&[]);
            r.iter().cloned().chain(b.iter().cloned()).collect()
        })
        .collect();
    let r = rref(rows, ncols);
    let rank = r.rank();
    let x = (0..k)
        .map(|j| {
            let c = ncols + j;
            if r.rows.iter().skip(rank).any(|row| !row[c].is_zero()) {
                return None;
            }
            let mut v = vec![F::zero(); ncols];
            for (i, &p) in r.pivots.iter().enumerate() {
                v[p] = r.rows[i][c].clone();
            }
            Some(v)
        })
        .collect();
    Solution { rank, ncols, x }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    fn m(v: &[&[i64]]) -> Vec<Vec<BigRational>> {
        v.iter()
            .map(|r| r.iter().map(|&x| rat(x)).collect())
            .collect()
    }

    #[test]
    fn determinant_with_swap() {
        assert_eq!(determinant(m(&[&[0, 1], &[1, 0]])), rat(-1));
        assert_eq!(
            determinant(m(&[&[2, 1, 0], &[1, 3, 1], &[0, 1, 4]])),
            rat(18)
        );
        assert_eq!(determinant(m(&[&[1, 2], &[2, 4]])), rat(0));
    }

    #[test]
    fn nullspace_is_normalized() {
        let ns = nullspace(m(&[&[1, 1, 1]]), 3);
        assert_eq!(ns, m(&[&[1, 0, -1], &[0, 1, -1]]));
    }

    #[test]
    fn inconsistent_right_hand_side_detected() {
        let a = m(&[&[1, 1], &[2, 2]]);
        let b = m(&[&[1, 1], &[2, 3]]);
        let s = solve(&a, 2, &b);
        assert!(s.x[0].is_some());
        assert!(s.x[1].is_none());
        assert!(!s.injective());
    }
}
