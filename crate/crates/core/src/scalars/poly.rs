//! Sparse multivariate Laurent polynomials over ℚ.
//!
//! Terms are kept sorted by the degree-lexicographic order of
//! [`Monomial`], leading term first, with no zero coefficients.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

#[cfg(test)]
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

/// A formal invertible parameter.
///
/// `Pair(i, j)` is the pairing symbol `q[i,j]`. `Base(k)` is a preset base
/// symbol: `q` for `k = 0`, `v` for `k = 1` (a root of `q`).
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
pub enum Symbol {
    Pair(u16, u16),
    Base(u16),
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Symbol::Pair(i, j) => write!(f, "q[{i},{j}]"),
            Symbol::Base(0) => write!(f, "q"),
            Symbol::Base(1) => write!(f, "v"),
            Symbol::Base(k) => write!(f, "b{k}"),
        }
    }
}

/// A Laurent monomial: sorted `(symbol, exponent)` pairs with nonzero exponents.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct Monomial(SmallVec<[(Symbol, i32); 4]>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(SmallVec::new())
    }

    pub fn var(s: Symbol) -> Self {
        Self::pow(s, 1)
    }

    pub fn pow(s: Symbol, e: i32) -> Self {
        let mut v = SmallVec::new();
        if e != 0 {
            v.push((s, e));
        }
        Monomial(v)
    }

    /// Builds from arbitrary pairs, merging repeats and dropping zeros.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (Symbol, i32)>) -> Self {
        let mut map: BTreeMap<Symbol, i32> = BTreeMap::new();
        for (s, e) in pairs {
            *map.entry(s).or_insert(0) += e;
        }
        Monomial(map.into_iter().filter(|&(_, e)| e != 0).collect())
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &(Symbol, i32)> {
        self.0.iter()
    }

    pub fn degree(&self) -> i64 {
        self.0.iter().map(|&(_, e)| e as i64).sum()
    }

    pub fn exp(&self, s: Symbol) -> i32 {
        self.0
            .iter()
            .find(|(t, _)| *t == s)
            .map(|&(_, e)| e)
            .unwrap_or(0)
    }

    /// Merge two exponent vectors with `f` applied to each pair of exponents.
    fn zip_with(&self, other: &Self, f: impl Fn(i32, i32) -> i32) -> Self {
        let (a, b) = (&self.0, &other.0);
        let mut out = SmallVec::with_capacity(a.len().max(b.len()));
        let (mut i, mut j) = (0, 0);
        while i < a.len() || j < b.len() {
            let (s, e) = if j == b.len() || (i < a.len() && a[i].0 < b[j].0) {
                i += 1;
                (a[i - 1].0, f(a[i - 1].1, 0))
            } else if i == a.len() || b[j].0 < a[i].0 {
                j += 1;
                (b[j - 1].0, f(0, b[j - 1].1))
            } else {
                i += 1;
                j += 1;
                (a[i - 1].0, f(a[i - 1].1, b[j - 1].1))
            };
            if e != 0 {
                out.push((s, e));
            }
        }
        Monomial(out)
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_one() {
            return other.clone();
        }
        if other.is_one() {
            return self.clone();
        }
        self.zip_with(other, |x, y| x + y)
    }

    pub fn div(&self, other: &Self) -> Self {
        self.zip_with(other, |x, y| x - y)
    }

    pub fn inv(&self) -> Self {
        Monomial(self.0.iter().map(|&(s, e)| (s, -e)).collect())
    }

    pub fn powi(&self, k: i32) -> Self {
        if k == 0 {
            return Monomial::one();
        }
        Monomial(self.0.iter().map(|&(s, e)| (s, e * k)).collect())
    }

    /// Componentwise minimum of exponents (missing symbols count as 0).
    pub fn meet(&self, other: &Self) -> Self {
        self.zip_with(other, |x, y| x.min(y))
    }

    pub fn is_polynomial(&self) -> bool {
        self.0.iter().all(|&(_, e)| e > 0)
    }

    /// True when `self` divides `other` inside the polynomial ring.
    pub fn divides(&self, other: &Self) -> bool {
        self.0.iter().all(|&(s, e)| other.exp(s) >= e)
    }

    pub fn symbols(&self) -> impl Iterator<Item = Symbol> + '_ {
        self.0.iter().map(|&(s, _)| s)
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        match self.degree().cmp(&other.degree()) {
            Ordering::Equal => {}
            o => return o,
        }
        let (a, b) = (&self.0, &other.0);
        let (mut i, mut j) = (0, 0);
        loop {
            match (a.get(i), b.get(j)) {
                (None, None) => return Ordering::Equal,
                (Some(&(_, e)), None) => return e.cmp(&0),
                (None, Some(&(_, e))) => return 0.cmp(&e),
                (Some(&(s, e)), Some(&(t, f))) => {
                    if s == t {
                        if e != f {
                            return e.cmp(&f);
                        }
                        i += 1;
                        j += 1;
                    } else if s < t {
                        return e.cmp(&0);
                    } else {
                        return 0.cmp(&f);
                    }
                }
            }
        }
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_one() {
            return write!(f, "1");
        }
        for (k, &(s, e)) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, "*")?;
            }
            if e == 1 {
                write!(f, "{s}")?;
            } else {
                write!(f, "{s}^{e}")?;
            }
        }
        Ok(())
    }
}

/// A Laurent polynomial, leading (largest) term first.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct Poly {
    terms: Vec<(Monomial, BigRational)>,
}

#[cfg(test)]
pub(crate) fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

impl Poly {
    pub fn zero() -> Self {
        Poly { terms: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(BigRational::one())
    }

    pub fn constant(c: BigRational) -> Self {
        if c.is_zero() {
            Self::zero()
        } else {
            Poly {
                terms: vec![(Monomial::one(), c)],
            }
        }
    }

    pub fn term(m: Monomial, c: BigRational) -> Self {
        if c.is_zero() {
            Self::zero()
        } else {
            Poly {
                terms: vec![(m, c)],
            }
        }
    }

    pub fn monomial(m: Monomial) -> Self {
        Self::term(m, BigRational::one())
    }

    pub fn var(s: Symbol) -> Self {
        Self::monomial(Monomial::var(s))
    }

    /// Collects arbitrary terms, combining like monomials.
    pub fn from_terms(terms: impl IntoIterator<Item = (Monomial, BigRational)>) -> Self {
        let mut map: BTreeMap<Monomial, BigRational> = BTreeMap::new();
        for (m, c) in terms {
            if c.is_zero() {
                continue;
            }
            match map.entry(m) {
                std::collections::btree_map::Entry::Vacant(v) => {
                    v.insert(c);
                }
                std::collections::btree_map::Entry::Occupied(mut o) => {
                    *o.get_mut() += c;
                    if o.get().is_zero() {
                        o.remove();
                    }
                }
            }
        }
        Poly {
            terms: map.into_iter().rev().collect(),
        }
    }

    pub fn terms(&self) -> &[(Monomial, BigRational)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms[0].0.is_one() && self.terms[0].1.is_one()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty() || (self.terms.len() == 1 && self.terms[0].0.is_one())
    }

    pub fn as_constant(&self) -> Option<BigRational> {
        match self.terms.len() {
            0 => Some(BigRational::zero()),
            1 if self.terms[0].0.is_one() => Some(self.terms[0].1.clone()),
            _ => None,
        }
    }

    pub fn is_monomial(&self) -> bool {
        self.terms.len() == 1
    }

    pub fn leading(&self) -> Option<&(Monomial, BigRational)> {
        self.terms.first()
    }

    pub fn leading_coeff(&self) -> BigRational {
        self.terms
            .first()
            .map(|t| t.1.clone())
            .unwrap_or_else(BigRational::zero)
    }

    pub fn neg(&self) -> Self {
        Poly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        let mut out = Vec::with_capacity(self.terms.len() + other.terms.len());
        let (mut i, mut j) = (0, 0);
        let (a, b) = (&self.terms, &other.terms);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Greater => {
                    out.push(a[i].clone());
                    i += 1;
                }
                Ordering::Less => {
                    out.push(b[j].clone());
                    j += 1;
                }
                Ordering::Equal => {
                    let c = &a[i].1 + &b[j].1;
                    if !c.is_zero() {
                        out.push((a[i].0.clone(), c));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Poly { terms: out }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Poly {
            terms: self.terms.iter().map(|(m, d)| (m.clone(), d * c)).collect(),
        }
    }

    /// Multiplication by a monomial preserves the term order.
    pub fn mul_monomial(&self, m: &Monomial) -> Self {
        if m.is_one() {
            return self.clone();
        }
        Poly {
            terms: self
                .terms
                .iter()
                .map(|(n, c)| (n.mul(m), c.clone()))
                .collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        if other.terms.len() == 1 {
            let (m, c) = &other.terms[0];
            return self.mul_monomial(m).scale(c);
        }
        if self.terms.len() == 1 {
            let (m, c) = &self.terms[0];
            return other.mul_monomial(m).scale(c);
        }
        let mut map: BTreeMap<Monomial, BigRational> = BTreeMap::new();
        for (m, c) in &self.terms {
            for (n, d) in &other.terms {
                let e = map.entry(m.mul(n)).or_insert_with(BigRational::zero);
                *e += c * d;
            }
        }
        Poly {
            terms: map
                .into_iter()
                .rev()
                .filter(|(_, c)| !c.is_zero())
                .collect(),
        }
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Poly::one();
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// The monomial gcd of all terms (componentwise minimum exponents).
    pub fn monomial_content(&self) -> Monomial {
        let mut it = self.terms.iter();
        let Some((first, _)) = it.next() else {
            return Monomial::one();
        };
        let mut m = first.clone();
        for (n, _) in it {
            m = m.meet(n);
        }
        m
    }

    pub fn is_polynomial(&self) -> bool {
        self.terms
            .iter()
            .all(|(m, _)| m.iter().all(|&(_, e)| e >= 0))
    }

    pub fn symbols(&self) -> Vec<Symbol> {
        let mut v: Vec<Symbol> = self.terms.iter().flat_map(|(m, _)| m.symbols()).collect();
        v.sort();
        v.dedup();
        v
    }

    pub fn degree_in(&self, s: Symbol) -> i32 {
        self.terms.iter().map(|(m, _)| m.exp(s)).max().unwrap_or(0)
    }

    /// Splits into coefficients with respect to `s`: exponent ↦ polynomial in the
    /// remaining symbols.
    pub fn coeffs_in(&self, s: Symbol) -> BTreeMap<i32, Poly> {
        let mut groups: BTreeMap<i32, Vec<(Monomial, BigRational)>> = BTreeMap::new();
        for (m, c) in &self.terms {
            let e = m.exp(s);
            let rest = m.div(&Monomial::pow(s, e));
            groups.entry(e).or_default().push((rest, c.clone()));
        }
        groups
            .into_iter()
            .map(|(e, ts)| {
                // removing one symbol from every term keeps relative order
                (e, Poly { terms: ts })
            })
            .collect()
    }

    /// Exact division by `d` in the polynomial ring; `None` if not exact.
    /// Both inputs must have nonnegative exponents.
    pub fn div_exact(&self, d: &Poly) -> Option<Poly> {
        assert!(!d.is_zero(), "division by zero polynomial");
        if self.is_zero() {
            return Some(Poly::zero());
        }
        if d.terms.len() == 1 {
            let (m, c) = &d.terms[0];
            if !self.terms.iter().all(|(n, _)| m.divides(n)) {
                return None;
            }
            let inv = c.recip();
            return Some(Poly {
                terms: self
                    .terms
                    .iter()
                    .map(|(n, e)| (n.div(m), e * &inv))
                    .collect(),
            });
        }
        let (lm, lc) = d.terms[0].clone();
        let lc_inv = lc.recip();
        let mut rem = self.clone();
        let mut q = Vec::new();
        while let Some((rm, rc)) = rem.terms.first().cloned() {
            if !lm.divides(&rm) {
                return None;
            }
            let qm = rm.div(&lm);
            let qc = rc * &lc_inv;
            rem = rem.sub(&d.mul_monomial(&qm).scale(&qc));
            q.push((qm, qc));
        }
        Some(Poly::from_terms(q))
    }

    /// Evaluates at rational values for every symbol appearing.
    pub fn eval(&self, f: &impl Fn(Symbol) -> BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for &(s, e) in m.iter() {
                let v = f(s);
                t *= pow_rat(&v, e);
            }
            acc += t;
        }
        acc
    }
}

pub(crate) fn pow_rat(v: &BigRational, e: i32) -> BigRational {
    if e >= 0 {
        num_traits::pow(v.clone(), e as usize)
    } else {
        num_traits::pow(v.recip(), (-e) as usize)
    }
}

fn fmt_coeff_term(f: &mut fmt::Formatter<'_>, m: &Monomial, c: &BigRational) -> fmt::Result {
    let a = c.abs();
    if m.is_one() {
        write!(f, "{a}")
    } else if a.is_one() {
        write!(f, "{m}")
    } else {
        write!(f, "{a}*{m}")
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (m, c)) in self.terms.iter().enumerate() {
            if k == 0 {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else if c.is_negative() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            fmt_coeff_term(f, m, c)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(i: u16, j: u16) -> Poly {
        Poly::var(Symbol::Pair(i, j))
    }

    #[test]
    fn deglex_puts_higher_degree_first() {
        let p = q(1, 2).add(&Poly::one()).add(&q(1, 2).mul(&q(2, 1)));
        assert_eq!(p.to_string(), "q[1,2]*q[2,1] + q[1,2] + 1");
    }

    #[test]
    fn lex_tie_break_prefers_earlier_symbol() {
        let p = q(2, 1).add(&q(1, 2));
        assert_eq!(p.to_string(), "q[1,2] + q[2,1]");
    }

    #[test]
    fn exact_division_round_trips() {
        let a = q(1, 2).sub(&Poly::one());
        let b = q(1, 2).add(&q(2, 1)).add(&rat_poly(3));
        let p = a.mul(&b);
        assert_eq!(p.div_exact(&a), Some(b.clone()));
        assert_eq!(p.div_exact(&b), Some(a));
        assert_eq!(b.div_exact(&q(1, 2)), None);
    }

    fn rat_poly(n: i64) -> Poly {
        Poly::constant(rat(n))
    }

    #[test]
    fn negative_exponents_render_with_caret() {
        let m = Monomial::from_pairs([(Symbol::Pair(1, 2), -1), (Symbol::Pair(2, 1), 2)]);
        assert_eq!(m.to_string(), "q[1,2]^-1*q[2,1]^2");
    }
}
