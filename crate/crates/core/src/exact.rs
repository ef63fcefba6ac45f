//! Linear algebra over the coefficient field of a spec: plain `Scalar`
//! arithmetic, or arithmetic in a number field when the spec carries an
//! algebraic relation. Results always come back as `Scalar`s, reduced modulo
//! the relation.

use crate::error::Result;
use crate::freealg::AlgebraSpec;
use crate::linalg::{determinant, nullspace, rank, rref, solve, Rref, Solution};
use crate::scalars::{NfElem, NumberField, Scalar};

fn to_nf(nf: &NumberField, m: &[Vec<Scalar>]) -> Result<Vec<Vec<NfElem>>> {
    m.iter()
        .map(|r| r.iter().map(|x| nf.eval(x)).collect::<Result<Vec<_>>>())
        .collect()
}

fn from_nf(nf: &NumberField, m: Vec<Vec<NfElem>>) -> Vec<Vec<Scalar>> {
    let s = nf.symbol();
    m.into_iter()
        .map(|r| r.into_iter().map(|x| x.to_scalar(s)).collect())
        .collect()
}

pub(crate) fn is_zero_in(spec: &AlgebraSpec, x: &Scalar) -> Result<bool> {
    match spec.algebraic() {
        None => Ok(x.is_zero()),
        Some(rel) => Ok(NumberField::new(rel).eval(x)?.is_zero()),
    }
}

/// Canonical representative of `x` modulo the spec's algebraic relation.
pub(crate) fn normalize(spec: &AlgebraSpec, x: &Scalar) -> Result<Scalar> {
    match spec.algebraic() {
        None => Ok(x.clone()),
        Some(rel) => {
            let nf = NumberField::new(rel);
            Ok(nf.eval(x)?.to_scalar(nf.symbol()))
        }
    }
}

pub(crate) fn nullspace_and_det(
    spec: &AlgebraSpec,
    m: &[Vec<Scalar>],
    ncols: usize,
    want_det: bool,
) -> Result<(Vec<Vec<Scalar>>, Option<Scalar>)> {
    match spec.algebraic() {
        None => {
            let det = want_det.then(|| determinant(m.to_vec()));
            Ok((nullspace(m.to_vec(), ncols), det))
        }
        Some(rel) => {
            let nf = NumberField::new(rel);
            let em = to_nf(&nf, m)?;
            let det = want_det.then(|| determinant(em.clone()).to_scalar(nf.symbol()));
            Ok((from_nf(&nf, nullspace(em, ncols)), det))
        }
    }
}

pub(crate) fn rank_in(spec: &AlgebraSpec, m: &[Vec<Scalar>], ncols: usize) -> Result<usize> {
    match spec.algebraic() {
        None => Ok(rank(m.to_vec(), ncols)),
        Some(rel) => Ok(rank(to_nf(&NumberField::new(rel), m)?, ncols)),
    }
}

pub(crate) fn rref_in(
    spec: &AlgebraSpec,
    m: Vec<Vec<Scalar>>,
    ncols: usize,
) -> Result<Rref<Scalar>> {
    match spec.algebraic() {
        None => Ok(rref(m, ncols)),
        Some(rel) => {
            let nf = NumberField::new(rel);
            let r = rref(to_nf(&nf, &m)?, ncols);
            Ok(Rref {
                rows: from_nf(&nf, r.rows),
                pivots: r.pivots,
            })
        }
    }
}

pub(crate) fn solve_in(
    spec: &AlgebraSpec,
    a: &[Vec<Scalar>],
    ncols: usize,
    rhs: &[Vec<Scalar>],
) -> Result<Solution<Scalar>> {
    match spec.algebraic() {
        None => Ok(solve(a, ncols, rhs)),
        Some(rel) => {
            let nf = NumberField::new(rel);
            let s = solve(&to_nf(&nf, a)?, ncols, &to_nf(&nf, rhs)?);
            let sym = nf.symbol();
            Ok(Solution {
                rank: s.rank,
                ncols: s.ncols,
                x: s.x
                    .into_iter()
                    .map(|v| v.map(|v| v.into_iter().map(|e| e.to_scalar(sym)).collect()))
                    .collect(),
            })
        }
    }
}
