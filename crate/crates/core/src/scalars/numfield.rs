//! Arithmetic in ℚ[x]/(p) for a monic minimal polynomial p.

use std::sync::Arc;

use num_rational::BigRational;
use num_traits::{One, Zero};

use super::poly::Symbol;
use super::rational::Scalar;
use super::specialize::AlgebraicRelation;
use crate::error::{Error, Result};

/// Dense univariate polynomial, constant term first, no trailing zeros.
type Dense = Vec<BigRational>;

fn trim(mut v: Dense) -> Dense {
    while v.last().is_some_and(|c| c.is_zero()) {
        v.pop();
    }
    v
}

fn dense_sub(a: &Dense, b: &Dense) -> Dense {
    let n = a.len().max(b.len());
    let z = BigRational::zero();
    trim(
        (0..n)
            .map(|i| a.get(i).unwrap_or(&z) - b.get(i).unwrap_or(&z))
            .collect(),
    )
}

fn dense_mul(a: &Dense, b: &Dense) -> Dense {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![BigRational::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    trim(out)
}

fn dense_divrem(a: &Dense, b: &Dense) -> (Dense, Dense) {
    let mut r = a.clone();
    let db = b.len() - 1;
    let lb = b[db].clone();
    if r.len() < b.len() {
        return (Vec::new(), r);
    }
    let mut q = vec![BigRational::zero(); r.len() - db];
    while r.len() > db {
        let k = r.len() - 1 - db;
        let c = r.last().unwrap() / &lb;
        for (i, y) in b.iter().enumerate() {
            r[i + k] -= &c * y;
        }
        q[k] = c;
        r = trim(r);
        if r.len() <= db {
            break;
        }
    }
    (trim(q), r)
}

/// An element of a simple algebraic extension of ℚ.
///
/// Elements built without a modulus are plain rationals and adopt the
/// modulus of whatever they are combined with.
#[derive(Clone, Debug)]
pub struct NfElem {
    coeffs: Dense,
    modulus: Option<Arc<Dense>>,
}

impl PartialEq for NfElem {
    fn eq(&self, other: &Self) -> bool {
        self.coeffs == other.coeffs
    }
}

impl NfElem {
    pub fn rational(c: BigRational) -> Self {
        NfElem {
            coeffs: trim(vec![c]),
            modulus: None,
        }
    }

    fn modulus_of(&self, other: &Self) -> Option<Arc<Dense>> {
        self.modulus.clone().or_else(|| other.modulus.clone())
    }

    fn reduce(coeffs: Dense, modulus: Option<Arc<Dense>>) -> Self {
        let coeffs = match &modulus {
            Some(m) if coeffs.len() >= m.len() => dense_divrem(&coeffs, m).1,
            _ => trim(coeffs),
        };
        NfElem { coeffs, modulus }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn add(&self, o: &Self) -> Self {
        let neg: Dense = o.coeffs.iter().map(|c| -c).collect();
        NfElem {
            coeffs: dense_sub(&self.coeffs, &neg),
            modulus: self.modulus_of(o),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        NfElem {
            coeffs: dense_sub(&self.coeffs, &o.coeffs),
            modulus: self.modulus_of(o),
        }
    }

    pub fn neg(&self) -> Self {
        NfElem {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
            modulus: self.modulus.clone(),
        }
    }

    pub fn mul(&self, o: &Self) -> Self {
        Self::reduce(dense_mul(&self.coeffs, &o.coeffs), self.modulus_of(o))
    }

    /// Inverse by the extended Euclidean algorithm modulo p.
    pub fn inv(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let Some(m) = self.modulus.clone() else {
            return Ok(NfElem::rational(self.coeffs[0].recip()));
        };
        let (mut r0, mut r1) = ((*m).clone(), self.coeffs.clone());
        let (mut s0, mut s1): (Dense, Dense) = (Vec::new(), vec![BigRational::one()]);
        while r1.len() > 1 {
            let (q, r) = dense_divrem(&r0, &r1);
            let s = dense_sub(&s0, &dense_mul(&q, &s1));
            r0 = std::mem::replace(&mut r1, r);
            s0 = std::mem::replace(&mut s1, s);
        }
        if r1.is_empty() {
            return Err(Error::Invalid(
                "element is a zero divisor: minimal polynomial is reducible".into(),
            ));
        }
        let c = r1[0].recip();
        let out: Dense = s1.iter().map(|x| x * &c).collect();
        Ok(Self::reduce(out, Some(m)))
    }

    /// The reduced representative as a polynomial in `s`.
    pub fn to_scalar(&self, s: Symbol) -> Scalar {
        let terms = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| (super::poly::Monomial::pow(s, i as i32), c.clone()));
        Scalar::from_poly(super::poly::Poly::from_terms(terms))
    }

    pub fn powi(&self, e: i32) -> Result<Self> {
        let base = if e < 0 { self.inv()? } else { self.clone() };
        let mut acc = NfElem {
            coeffs: vec![BigRational::one()],
            modulus: self.modulus.clone(),
        };
        for _ in 0..e.unsigned_abs() {
            acc = acc.mul(&base);
        }
        Ok(acc)
    }
}

/// Evaluation of scalars at a root θ of an algebraic relation.
#[derive(Clone, Debug)]
pub struct NumberField {
    symbol: Symbol,
    theta: NfElem,
}

impl NumberField {
    pub fn new(rel: &AlgebraicRelation) -> Self {
        let mut m: Dense = rel.lower_coeffs.clone();
        m.push(BigRational::one());
        let modulus = Arc::new(m);
        NumberField {
            symbol: rel.symbol,
            theta: NfElem::reduce(vec![BigRational::zero(), BigRational::one()], Some(modulus)),
        }
    }

    pub fn symbol(&self) -> Symbol {
        self.symbol
    }

    fn eval_poly(&self, p: &super::poly::Poly) -> Result<NfElem> {
        let mut acc = NfElem::rational(BigRational::zero());
        for (m, c) in p.terms() {
            let mut t = NfElem::rational(c.clone());
            for &(s, e) in m.iter() {
                if s != self.symbol {
                    return Err(Error::Invalid(format!(
                        "symbol {s} is not covered by the algebraic relation on {}",
                        self.symbol
                    )));
                }
                t = t.mul(&self.theta.powi(e)?);
            }
            acc = acc.add(&t);
        }
        Ok(acc)
    }

    /// Image of `x` in the number field; poles are errors.
    pub fn eval(&self, x: &Scalar) -> Result<NfElem> {
        let n = self.eval_poly(x.numerator())?;
        let d = self.eval_poly(x.denominator())?;
        if d.is_zero() {
            return Err(Error::Pole(x.to_string()));
        }
        Ok(n.mul(&d.inv()?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalars::parse_scalar;
    use crate::scalars::poly::rat;

    fn cube_root() -> NumberField {
        NumberField::new(&AlgebraicRelation {
            symbol: Symbol::Pair(1, 1),
            lower_coeffs: vec![rat(1), rat(1)],
        })
    }

    #[test]
    fn three_term_q_number_vanishes_at_cube_root() {
        let nf = cube_root();
        let x = parse_scalar("1 + q[1,1] + q[1,1]^2").unwrap();
        assert!(nf.eval(&x).unwrap().is_zero());
        let y = parse_scalar("q[1,1]^3").unwrap();
        assert_eq!(nf.eval(&y).unwrap(), NfElem::rational(rat(1)));
    }

    #[test]
    fn inverse_multiplies_to_one() {
        let nf = cube_root();
        let x = nf.eval(&parse_scalar("2 + q[1,1]").unwrap()).unwrap();
        let one = x.mul(&x.inv().unwrap());
        assert_eq!(one, NfElem::rational(rat(1)));
    }
}
