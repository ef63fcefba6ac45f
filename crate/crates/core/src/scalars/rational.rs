//! Canonical rational functions in the formal symbols.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::gcd::gcd;
use super::poly::{Monomial, Poly, Symbol};
use crate::error::{Error, Result};

/// An element of ℚ(q_{ij}).
///
/// Canonical form: the denominator is a genuine polynomial with no monomial
/// factor and leading coefficient 1, coprime to the numerator. All Laurent
/// monomial factors live in the numerator. Equal field elements therefore
/// have identical representations.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Scalar {
    num: Poly,
    den: Poly,
}

impl Default for Scalar {
    fn default() -> Self {
        Scalar::zero()
    }
}

impl Scalar {
    pub fn zero() -> Self {
        Scalar {
            num: Poly::zero(),
            den: Poly::one(),
        }
    }

    pub fn one() -> Self {
        Scalar {
            num: Poly::one(),
            den: Poly::one(),
        }
    }

    pub fn from_int(n: i64) -> Self {
        Self::from_rational(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn from_rational(c: BigRational) -> Self {
        Scalar {
            num: Poly::constant(c),
            den: Poly::one(),
        }
    }

    pub fn symbol(s: Symbol) -> Self {
        Self::monomial(Monomial::var(s))
    }

    pub fn monomial(m: Monomial) -> Self {
        Scalar {
            num: Poly::monomial(m),
            den: Poly::one(),
        }
    }

    /// q[i,j].
    pub fn q(i: u16, j: u16) -> Self {
        Self::symbol(Symbol::Pair(i, j))
    }

    pub fn from_poly(p: Poly) -> Self {
        Scalar {
            num: p,
            den: Poly::one(),
        }
    }

    /// Canonicalizes an arbitrary Laurent numerator/denominator pair.
    pub fn from_parts(num: Poly, den: Poly) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Self::canonical(num, den))
    }

    fn canonical(num: Poly, den: Poly) -> Self {
        if num.is_zero() {
            return Self::zero();
        }
        let md = den.monomial_content();
        let (num, den) = if md.is_one() {
            (num, den)
        } else {
            let inv = md.inv();
            (num.mul_monomial(&inv), den.mul_monomial(&inv))
        };
        if let Some(c) = den.as_constant() {
            return Scalar {
                num: num.scale(&c.recip()),
                den: Poly::one(),
            };
        }
        let mn = num.monomial_content();
        let n0 = num.mul_monomial(&mn.inv());
        let g = gcd(&n0, &den);
        let (n0, d0) = if g.is_one() {
            (n0, den)
        } else {
            (
                n0.div_exact(&g).expect("gcd divides numerator"),
                den.div_exact(&g).expect("gcd divides denominator"),
            )
        };
        let lc = d0.leading_coeff();
        let (n0, d0) = if lc.is_one() {
            (n0, d0)
        } else {
            let inv = lc.recip();
            (n0.scale(&inv), d0.scale(&inv))
        };
        Scalar {
            num: n0.mul_monomial(&mn),
            den: d0,
        }
    }

    pub fn numerator(&self) -> &Poly {
        &self.num
    }

    pub fn denominator(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.num.is_one() && self.den.is_one()
    }

    /// ±1 times a Laurent monomial.
    pub fn is_unit_monomial(&self) -> bool {
        self.den.is_one() && self.num.is_monomial() && self.num.leading_coeff().abs().is_one()
    }

    pub fn as_rational(&self) -> Option<BigRational> {
        if self.den.is_one() {
            self.num.as_constant()
        } else {
            None
        }
    }

    /// Number of stored terms; a cheap complexity measure for pivoting.
    pub fn size(&self) -> usize {
        self.num.len() + self.den.len()
    }

    pub fn symbols(&self) -> Vec<Symbol> {
        let mut v = self.num.symbols();
        v.extend(self.den.symbols());
        v.sort();
        v.dedup();
        v
    }

    pub fn neg(&self) -> Self {
        Scalar {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        if self.den.is_one() && other.den.is_one() {
            return Scalar {
                num: self.num.add(&other.num),
                den: Poly::one(),
            };
        }
        // a + n/d with d coprime to n is already reduced
        if self.den.is_one() {
            let num = self.num.mul(&other.den).add(&other.num);
            return Self::canonical(num, other.den.clone());
        }
        if other.den.is_one() {
            let num = other.num.mul(&self.den).add(&self.num);
            return Self::canonical(num, self.den.clone());
        }
        if self.den == other.den {
            return Self::canonical(self.num.add(&other.num), self.den.clone());
        }
        let g = gcd(&self.den, &other.den);
        if g.is_one() {
            let num = self.num.mul(&other.den).add(&other.num.mul(&self.den));
            return Self::canonical(num, self.den.mul(&other.den));
        }
        let da = self.den.div_exact(&g).unwrap();
        let db = other.den.div_exact(&g).unwrap();
        let num = self.num.mul(&db).add(&other.num.mul(&da));
        Self::canonical(num, self.den.mul(&db))
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        if self.den.is_one() && other.den.is_one() {
            return Scalar {
                num: self.num.mul(&other.num),
                den: Poly::one(),
            };
        }
        // cross-cancel: gcd(n1, d2) and gcd(n2, d1)
        let (n1, d2) = cancel(&self.num, &other.den);
        let (n2, d1) = cancel(&other.num, &self.den);
        let num = n1.mul(&n2);
        let den = d1.mul(&d2);
        let lc = den.leading_coeff();
        if lc.is_one() {
            Scalar { num, den }
        } else {
            let inv = lc.recip();
            Scalar {
                num: num.scale(&inv),
                den: den.scale(&inv),
            }
        }
    }

    pub fn inv(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let m = self.num.monomial_content();
        let n0 = self.num.mul_monomial(&m.inv());
        let lc = n0.leading_coeff().recip();
        Ok(Scalar {
            num: self.den.mul_monomial(&m.inv()).scale(&lc),
            den: n0.scale(&lc),
        })
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        Ok(self.mul(&other.inv()?))
    }

    pub fn powi(&self, k: i32) -> Self {
        if k == 0 {
            return Scalar::one();
        }
        if k < 0 {
            return self.inv().expect("negative power of zero").powi(-k);
        }
        if self.den.is_one() {
            return Scalar {
                num: self.num.pow(k as u32),
                den: Poly::one(),
            };
        }
        Scalar {
            num: self.num.pow(k as u32),
            den: self.den.pow(k as u32),
        }
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        Scalar {
            num: self.num.scale(c),
            den: if c.is_zero() {
                Poly::one()
            } else {
                self.den.clone()
            },
        }
    }

    /// Exact evaluation at rational values of the symbols.
    pub fn eval(&self, f: &impl Fn(Symbol) -> BigRational) -> Result<BigRational> {
        let d = self.den.eval(f);
        if d.is_zero() {
            return Err(Error::Pole(self.to_string()));
        }
        Ok(self.num.eval(f) / d)
    }
}

/// Removes the common factor of a Laurent numerator and a canonical denominator.
fn cancel(num: &Poly, den: &Poly) -> (Poly, Poly) {
    if den.is_one() {
        return (num.clone(), den.clone());
    }
    let m = num.monomial_content();
    let n0 = num.mul_monomial(&m.inv());
    let g = gcd(&n0, den);
    if g.is_one() {
        (num.clone(), den.clone())
    } else {
        (
            n0.div_exact(&g).unwrap().mul_monomial(&m),
            den.div_exact(&g).unwrap(),
        )
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            return write!(f, "{}", self.num);
        }
        if self.num.len() > 1 {
            write!(f, "({})", self.num)?;
        } else {
            write!(f, "{}", self.num)?;
        }
        if self.den.len() > 1 {
            write!(f, "/({})", self.den)
        } else {
            write!(f, "/{}", self.den)
        }
    }
}

impl From<i64> for Scalar {
    fn from(n: i64) -> Self {
        Scalar::from_int(n)
    }
}
