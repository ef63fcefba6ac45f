//! Substitution homomorphisms on the symbol ring.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::One;

use super::poly::{pow_rat, Monomial, Poly, Symbol};
use super::rational::Scalar;
use crate::error::{Error, Result};

/// Image of one symbol: a nonzero rational times a Laurent monomial.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Image {
    pub coeff: BigRational,
    pub monomial: Monomial,
}

/// A symbol subject to a monic minimal polynomial, e.g. `x^2 + x + 1` for a
/// primitive cube root of unity. Coefficients are listed from the constant
/// term upward; the leading 1 is implicit.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct AlgebraicRelation {
    pub symbol: Symbol,
    pub lower_coeffs: Vec<BigRational>,
}

#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Specialization {
    map: BTreeMap<Symbol, Image>,
    pub algebraic: Option<AlgebraicRelation>,
}

impl Specialization {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_identity(&self) -> bool {
        self.map.is_empty()
    }

    pub fn images(&self) -> impl Iterator<Item = (&Symbol, &Image)> {
        self.map.iter()
    }

    /// Adds `s ↦ value`, where `value` must be a nonzero rational multiple of a
    /// Laurent monomial.
    pub fn set(&mut self, s: Symbol, value: &Scalar) -> Result<()> {
        if !value.denominator().is_one() || !value.numerator().is_monomial() {
            return Err(Error::Invalid(format!(
                "image of {s} must be a nonzero monomial, got {value}"
            )));
        }
        let (m, c) = value.numerator().leading().unwrap().clone();
        self.map.insert(
            s,
            Image {
                coeff: c,
                monomial: m,
            },
        );
        Ok(())
    }

    pub fn with(mut self, s: Symbol, value: &Scalar) -> Result<Self> {
        self.set(s, value)?;
        Ok(self)
    }

    /// Composes so that `self` is applied first, then `next`.
    pub fn then(&self, next: &Specialization) -> Specialization {
        let mut out = next.clone();
        for (s, img) in &self.map {
            let p = next.apply_poly(&Poly::term(img.monomial.clone(), img.coeff.clone()));
            let (m, c) = p.leading().unwrap().clone();
            out.map.insert(
                *s,
                Image {
                    coeff: c,
                    monomial: m,
                },
            );
        }
        if out.algebraic.is_none() {
            out.algebraic = self.algebraic.clone();
        }
        out
    }

    pub fn apply_poly(&self, p: &Poly) -> Poly {
        if self.map.is_empty() {
            return p.clone();
        }
        Poly::from_terms(p.terms().iter().map(|(m, c)| {
            let mut coeff = c.clone();
            let mut mono = Vec::new();
            for &(s, e) in m.iter() {
                match self.map.get(&s) {
                    Some(img) => {
                        if !img.coeff.is_one() {
                            coeff *= pow_rat(&img.coeff, e);
                        }
                        mono.extend(img.monomial.iter().map(|&(t, f)| (t, f * e)));
                    }
                    None => mono.push((s, e)),
                }
            }
            (Monomial::from_pairs(mono), coeff)
        }))
    }

    /// Applies the substitution; a vanishing denominator is a pole error.
    pub fn apply(&self, x: &Scalar) -> Result<Scalar> {
        if self.map.is_empty() {
            return Ok(x.clone());
        }
        let n = self.apply_poly(x.numerator());
        let d = self.apply_poly(x.denominator());
        if d.is_zero() {
            return Err(Error::Pole(x.to_string()));
        }
        Scalar::from_parts(n, d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalars::parse_scalar;

    #[test]
    fn forced_cancellation() {
        let q = Scalar::symbol(Symbol::Base(0));
        let s = Specialization::new()
            .with(Symbol::Pair(1, 2), &q)
            .unwrap()
            .with(Symbol::Pair(2, 1), &q.inv().unwrap())
            .unwrap();
        let x = parse_scalar("1 - q[1,2]*q[2,1]").unwrap();
        assert!(s.apply(&x).unwrap().is_zero());
    }

    #[test]
    fn pole_is_an_error() {
        let x = parse_scalar("1/(1 + q[1,1])").unwrap();
        let s = Specialization::new()
            .with(Symbol::Pair(1, 1), &Scalar::from_int(-1))
            .unwrap();
        assert!(matches!(s.apply(&x), Err(Error::Pole(_))));
    }

    #[test]
    fn numeric_substitution() {
        let s = Specialization::new()
            .with(Symbol::Pair(1, 1), &Scalar::from_int(-1))
            .unwrap();
        assert_eq!(s.apply(&Scalar::q(1, 1)).unwrap(), Scalar::from_int(-1));
    }
}
