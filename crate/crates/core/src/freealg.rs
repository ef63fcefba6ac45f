//! Graded free algebras A⁺ and A⁻ on the generator set, and the algebra
//! specification that fixes the pairings q_{ij}.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::scalars::{AlgebraicRelation, Scalar, Specialization, Symbol};

/// A generator label (root index).
pub type Letter = u16;

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
pub enum Side {
    Positive,
    Negative,
}

impl Side {
    pub fn sign(self) -> char {
        match self {
            Side::Positive => '+',
            Side::Negative => '-',
        }
    }

    pub fn opposite(self) -> Side {
        match self {
            Side::Positive => Side::Negative,
            Side::Negative => Side::Positive,
        }
    }
}

/// A word in the generators. Ordering is lexicographic on letters.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct Word(pub SmallVec<[Letter; 6]>);

impl Word {
    pub fn empty() -> Self {
        Word(SmallVec::new())
    }

    pub fn new(letters: &[Letter]) -> Self {
        Word(SmallVec::from_slice(letters))
    }

    pub fn letter(a: Letter) -> Self {
        Self::new(&[a])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }

    pub fn reversed(&self) -> Word {
        Word(self.0.iter().rev().copied().collect())
    }

    pub fn slice(&self, from: usize, to: usize) -> Word {
        Word::new(&self.0[from..to])
    }

    pub fn without(&self, k: usize) -> Word {
        let mut v = self.0.clone();
        v.remove(k);
        Word(v)
    }

    pub fn render(&self, side: Side) -> String {
        if self.is_empty() {
            return "1".into();
        }
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|a| format!("{}{a}", side.sign()))
            .collect();
        format!("e[{}]", parts.join(" "))
    }
}

/// Free-algebra element on one side.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct FreeElement {
    side: Side,
    terms: BTreeMap<Word, Scalar>,
}

impl FreeElement {
    pub fn zero(side: Side) -> Self {
        FreeElement {
            side,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(side: Side) -> Self {
        Self::word(side, Word::empty(), Scalar::one())
    }

    pub fn word(side: Side, w: Word, c: Scalar) -> Self {
        let mut e = Self::zero(side);
        e.add_term(w, c);
        e
    }

    pub fn from_terms(side: Side, terms: impl IntoIterator<Item = (Word, Scalar)>) -> Self {
        let mut e = Self::zero(side);
        for (w, c) in terms {
            e.add_term(w, c);
        }
        e
    }

    pub fn side(&self) -> Side {
        self.side
    }

    /// Same coefficients on the opposite side.
    pub fn with_side(&self, side: Side) -> Self {
        FreeElement {
            side,
            terms: self.terms.clone(),
        }
    }

    pub fn terms(&self) -> &BTreeMap<Word, Scalar> {
        &self.terms
    }

    pub fn into_terms(self) -> BTreeMap<Word, Scalar> {
        self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, w: &Word) -> Scalar {
        self.terms.get(w).cloned().unwrap_or_else(Scalar::zero)
    }

    pub fn add_term(&mut self, w: Word, c: Scalar) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(w) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = o.get().add(&c);
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    fn check_side(&self, other: &Self) -> Result<()> {
        if self.side != other.side {
            return Err(Error::SideMismatch(
                "free-algebra elements on different sides".into(),
            ));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_side(other)?;
        let mut out = self.clone();
        for (w, c) in &other.terms {
            out.add_term(w.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(&Scalar::from_int(-1)))
    }

    pub fn scale(&self, c: &Scalar) -> Self {
        if c.is_zero() {
            return Self::zero(self.side);
        }
        FreeElement {
            side: self.side,
            terms: self
                .terms
                .iter()
                .map(|(w, d)| (w.clone(), d.mul(c)))
                .collect(),
        }
    }

    /// Concatenation product.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_side(other)?;
        let mut out = Self::zero(self.side);
        for (u, a) in &self.terms {
            for (v, b) in &other.terms {
                out.add_term(u.concat(v), a.mul(b));
            }
        }
        Ok(out)
    }

    pub fn map_coeffs(&self, f: impl Fn(&Scalar) -> Result<Scalar>) -> Result<Self> {
        let mut out = Self::zero(self.side);
        for (w, c) in &self.terms {
            out.add_term(w.clone(), f(c)?);
        }
        Ok(out)
    }

    /// Reverses every word, keeping coefficients.
    pub fn reversed(&self) -> Self {
        Self::from_terms(
            self.side,
            self.terms.iter().map(|(w, c)| (w.reversed(), c.clone())),
        )
    }

    pub fn grade_component(&self, g: usize) -> Self {
        FreeElement {
            side: self.side,
            terms: self
                .terms
                .iter()
                .filter(|(w, _)| w.len() == g)
                .map(|(w, c)| (w.clone(), c.clone()))
                .collect(),
        }
    }

    pub fn multidegree_component(&self, d: &[u32], gens: &[Letter]) -> Self {
        FreeElement {
            side: self.side,
            terms: self
                .terms
                .iter()
                .filter(|(w, _)| multidegree(w, gens) == d)
                .map(|(w, c)| (w.clone(), c.clone()))
                .collect(),
        }
    }

    /// All homogeneous components keyed by multidegree.
    pub fn components(&self, gens: &[Letter]) -> BTreeMap<Vec<u32>, FreeElement> {
        let mut out: BTreeMap<Vec<u32>, FreeElement> = BTreeMap::new();
        for (w, c) in &self.terms {
            out.entry(multidegree(w, gens))
                .or_insert_with(|| Self::zero(self.side))
                .terms
                .insert(w.clone(), c.clone());
        }
        out
    }

    /// The common multidegree, if homogeneous and nonzero.
    pub fn homogeneous_multidegree(&self, gens: &[Letter]) -> Option<Vec<u32>> {
        let comps = self.components(gens);
        if comps.len() == 1 {
            comps.into_keys().next()
        } else {
            None
        }
    }
}

impl fmt::Display for FreeElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (w, c)) in self.terms.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            if c.is_one() {
                write!(f, "{}", w.render(self.side))?;
            } else {
                write!(f, "({c})*{}", w.render(self.side))?;
            }
        }
        Ok(())
    }
}

pub fn multidegree(w: &Word, gens: &[Letter]) -> Vec<u32> {
    let mut d = vec![0u32; gens.len()];
    for a in w.letters() {
        let i = gens
            .iter()
            .position(|g| g == a)
            .expect("letter in generator set");
        d[i] += 1;
    }
    d
}

/// Net multidegree: positive letters count +1, negative letters −1.
pub type Weight = Vec<i32>;

/// Every word of multidegree `d`, in lexicographic order.
pub fn words_of(d: &[u32], gens: &[Letter]) -> Vec<Word> {
    fn rec(d: &mut [u32], gens: &[Letter], cur: &mut Vec<Letter>, out: &mut Vec<Word>) {
        if d.iter().all(|&x| x == 0) {
            out.push(Word::new(cur));
            return;
        }
        for i in 0..gens.len() {
            if d[i] == 0 {
                continue;
            }
            d[i] -= 1;
            cur.push(gens[i]);
            rec(d, gens, cur, out);
            cur.pop();
            d[i] += 1;
        }
    }
    let mut out = Vec::new();
    rec(&mut d.to_vec(), gens, &mut Vec::new(), &mut out);
    out
}

/// Every word of length `n`, in lexicographic order.
pub fn words_of_length(n: usize, gens: &[Letter]) -> Vec<Word> {
    let mut out = vec![Word::empty()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|w| gens.iter().map(move |&a| w.concat(&Word::letter(a))))
            .collect();
    }
    out
}

/// Multidegrees of total degree `n` over `k` generators, lexicographically
/// decreasing: (n,0,…), (n−1,1,…), …
pub fn multidegrees_of_grade(n: u32, k: usize) -> Vec<Vec<u32>> {
    fn rec(n: u32, k: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if k == 1 {
            cur.push(n);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for a in (0..=n).rev() {
            cur.push(a);
            rec(n - a, k - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if k > 0 {
        rec(n, k, &mut Vec::new(), &mut out);
    }
    out
}

/// Optional Cartan data: Card(M), the values H_a(β) and the matrix φ^{ab}.
#[derive(Clone, Debug, PartialEq)]
pub struct CartanData {
    pub card_m: usize,
    /// `h[a][β]` = H_a(β), one column per generator.
    pub h: Vec<Vec<BigRational>>,
    pub phi: Vec<Vec<BigRational>>,
}

impl CartanData {
    /// φ(α, β) = φ^{ab} H_a(α) H_b(β), by generator positions.
    pub fn pairing(&self, i: usize, j: usize) -> BigRational {
        let mut acc = BigRational::from_integer(0.into());
        for a in 0..self.card_m {
            for b in 0..self.card_m {
                acc += &self.phi[a][b] * &self.h[a][i] * &self.h[b][j];
            }
        }
        acc
    }
}

/// Generators N and the pairings q_{ij} (after any specialization).
#[derive(Clone, Debug)]
pub struct AlgebraSpec {
    generators: Vec<Letter>,
    q: Vec<Vec<Scalar>>,
    qinv: Vec<Vec<Scalar>>,
    pub cartan: Option<CartanData>,
    pub specialization: Specialization,
}

impl AlgebraSpec {
    /// All q_{ij} independent symbols.
    pub fn symbolic(generators: &[Letter]) -> Result<Self> {
        let q = generators
            .iter()
            .map(|&i| generators.iter().map(|&j| Scalar::q(i, j)).collect())
            .collect();
        Self::from_matrix(generators, q)
    }

    /// From an explicit matrix indexed by generator position.
    pub fn from_matrix(generators: &[Letter], q: Vec<Vec<Scalar>>) -> Result<Self> {
        if generators.is_empty() {
            return Err(Error::Invalid("generator set is empty".into()));
        }
        if generators.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Invalid(
                "generators must be listed in strictly increasing order".into(),
            ));
        }
        let n = generators.len();
        if q.len() != n || q.iter().any(|r| r.len() != n) {
            return Err(Error::Invalid("q-matrix has the wrong shape".into()));
        }
        let mut qinv = Vec::with_capacity(n);
        for (i, row) in q.iter().enumerate() {
            let mut r = Vec::with_capacity(n);
            for (j, x) in row.iter().enumerate() {
                let inv = x.inv().map_err(|_| {
                    Error::Invalid(format!(
                        "q[{},{}] is zero; pairings must be invertible",
                        generators[i], generators[j]
                    ))
                })?;
                r.push(inv);
            }
            qinv.push(r);
        }
        Ok(AlgebraSpec {
            generators: generators.to_vec(),
            q,
            qinv,
            cartan: None,
            specialization: Specialization::new(),
        })
    }

    /// Applies a substitution to every pairing.
    pub fn specialize(&self, s: &Specialization) -> Result<Self> {
        let q = self
            .q
            .iter()
            .map(|r| r.iter().map(|x| s.apply(x)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        let mut out = Self::from_matrix(&self.generators, q)?;
        out.cartan = self.cartan.clone();
        out.specialization = self.specialization.then(s);
        Ok(out)
    }

    /// The same generators with q_{ij} replaced by q_{ji}.
    pub fn transposed(&self) -> Self {
        let n = self.rank();
        let t = |m: &Vec<Vec<Scalar>>| -> Vec<Vec<Scalar>> {
            (0..n)
                .map(|i| (0..n).map(|j| m[j][i].clone()).collect())
                .collect()
        };
        AlgebraSpec {
            generators: self.generators.clone(),
            q: t(&self.q),
            qinv: t(&self.qinv),
            cartan: None,
            specialization: self.specialization.clone(),
        }
    }

    pub fn generators(&self) -> &[Letter] {
        &self.generators
    }

    pub fn rank(&self) -> usize {
        self.generators.len()
    }

    pub fn index(&self, a: Letter) -> usize {
        self.generators
            .iter()
            .position(|&g| g == a)
            .unwrap_or_else(|| panic!("letter {a} not a generator"))
    }

    pub fn contains(&self, a: Letter) -> bool {
        self.generators.contains(&a)
    }

    /// q_{ab}.
    pub fn q(&self, a: Letter, b: Letter) -> &Scalar {
        &self.q[self.index(a)][self.index(b)]
    }

    /// q_{ab}^{-1}.
    pub fn qinv(&self, a: Letter, b: Letter) -> &Scalar {
        &self.qinv[self.index(a)][self.index(b)]
    }

    pub fn algebraic(&self) -> Option<&AlgebraicRelation> {
        self.specialization.algebraic.as_ref()
    }

    pub fn with_algebraic(mut self, rel: AlgebraicRelation) -> Self {
        self.specialization.algebraic = Some(rel);
        self
    }

    pub fn multidegree(&self, w: &Word) -> Vec<u32> {
        multidegree(w, &self.generators)
    }

    /// Generators α with q_{αβ} q_{βα} = 1 for every β: excluded by the
    /// nondegeneracy requirement, tested at pairing level only.
    pub fn degenerate_generators(&self) -> Vec<Letter> {
        self.generators
            .iter()
            .copied()
            .filter(|&a| {
                self.generators
                    .iter()
                    .all(|&b| self.q(a, b).mul(self.q(b, a)).is_one())
            })
            .collect()
    }

    /// Symbols appearing in any pairing.
    pub fn symbols(&self) -> Vec<Symbol> {
        let mut v: Vec<Symbol> = self.q.iter().flatten().flat_map(|x| x.symbols()).collect();
        v.sort();
        v.dedup();
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pos(letters: &[Letter]) -> FreeElement {
        FreeElement::word(Side::Positive, Word::new(letters), Scalar::one())
    }

    #[test]
    fn concatenation_and_bilinearity() {
        let x = pos(&[1]).add(&pos(&[2])).unwrap();
        let y = x.mul(&pos(&[1])).unwrap();
        let expect = pos(&[1, 1]).add(&pos(&[2, 1])).unwrap();
        assert_eq!(y, expect);
        assert_eq!(x.mul(&FreeElement::one(Side::Positive)).unwrap(), x);
    }

    #[test]
    fn mixed_sides_rejected() {
        let n = FreeElement::word(Side::Negative, Word::letter(1), Scalar::one());
        assert!(pos(&[1]).mul(&n).is_err());
    }

    #[test]
    fn components_by_multidegree() {
        let gens = [1, 2];
        let x = pos(&[1, 2]).add(&pos(&[1, 1])).unwrap();
        assert_eq!(x.multidegree_component(&[1, 1], &gens), pos(&[1, 2]));
        assert_eq!(x.multidegree_component(&[2, 0], &gens), pos(&[1, 1]));
        assert!(x.multidegree_component(&[0, 0], &gens).is_zero());
    }

    #[test]
    fn word_enumeration_is_lexicographic() {
        let w = words_of(&[2, 1], &[1, 2]);
        let r: Vec<String> = w.iter().map(|w| w.render(Side::Positive)).collect();
        assert_eq!(r, ["e[+1 +1 +2]", "e[+1 +2 +1]", "e[+2 +1 +1]"]);
        assert_eq!(words_of(&[1, 1, 1], &[1, 2, 3]).len(), 6);
    }

    #[test]
    fn multidegree_listing() {
        assert_eq!(
            multidegrees_of_grade(2, 2),
            vec![vec![2, 0], vec![1, 1], vec![0, 2]]
        );
    }
}
