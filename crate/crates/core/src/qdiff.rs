//! q-deformed derivatives on the free algebras, constants, determinants and
//! q-Serre relations.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::exact::{is_zero_in, nullspace_and_det, rank_in};
use crate::freealg::{words_of, words_of_length, AlgebraSpec, FreeElement, Letter, Side, Word};
use crate::scalars::{q_binomial, Scalar};

/// The five derivative operators.
///
/// `Section3` is the abstract rule ∂_i ξ_j = δ_ij + q^{ij} ξ_j ∂_i with q^{ij}
/// read directly from the spec's pairings. The other four are the operators
/// ∂⃗_{−γ}, ⃖∂_{−γ} on A⁺ and ∂⃗_γ, ⃖∂_γ on A⁻.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum DerivativeKind {
    Section3,
    LeftMinus,
    RightMinus,
    LeftPlus,
    RightPlus,
}

impl DerivativeKind {
    pub fn side(self) -> Side {
        match self {
            DerivativeKind::LeftPlus | DerivativeKind::RightPlus => Side::Negative,
            _ => Side::Positive,
        }
    }

    pub fn is_left(self) -> bool {
        matches!(
            self,
            DerivativeKind::Section3 | DerivativeKind::LeftMinus | DerivativeKind::LeftPlus
        )
    }

    /// The factor picked up when the derivative in direction `g` passes the
    /// letter `w`.
    pub fn factor(self, spec: &AlgebraSpec, g: Letter, w: Letter) -> Scalar {
        match self {
            DerivativeKind::Section3 => spec.q(g, w).clone(),
            DerivativeKind::LeftMinus => spec.qinv(g, w).clone(),
            DerivativeKind::RightMinus => spec.qinv(w, g).clone(),
            DerivativeKind::LeftPlus => spec.qinv(w, g).clone(),
            DerivativeKind::RightPlus => spec.qinv(g, w).clone(),
        }
    }
}

/// Derivative of a single word: pairs (shorter word, coefficient).
pub fn derivative_word(
    spec: &AlgebraSpec,
    kind: DerivativeKind,
    g: Letter,
    w: &Word,
) -> Vec<(Word, Scalar)> {
    let letters = w.letters();
    let n = letters.len();
    let mut out = Vec::new();
    let mut acc = Scalar::one();
    if kind.is_left() {
        for k in 0..n {
            if letters[k] == g {
                out.push((w.without(k), acc.clone()));
            }
            acc = acc.mul(&kind.factor(spec, g, letters[k]));
        }
    } else {
        for k in (0..n).rev() {
            if letters[k] == g {
                out.push((w.without(k), acc.clone()));
            }
            acc = acc.mul(&kind.factor(spec, g, letters[k]));
        }
    }
    out
}

pub fn derivative(
    spec: &AlgebraSpec,
    kind: DerivativeKind,
    g: Letter,
    x: &FreeElement,
) -> Result<FreeElement> {
    if x.side() != kind.side() {
        return Err(Error::SideMismatch(format!(
            "{kind:?} acts on the {:?} side",
            kind.side()
        )));
    }
    let mut out = FreeElement::zero(x.side());
    for (w, c) in x.terms() {
        for (u, f) in derivative_word(spec, kind, g, w) {
            out.add_term(u, f.mul(c));
        }
    }
    Ok(out)
}

/// The square matrix of the constants problem at multidegree `d`.
///
/// Columns are `words_of(d)`; rows are pairs (γ, u) with u running over
/// `words_of(d − e_γ)`, γ in generator order.
pub struct DerivativeMatrix {
    pub columns: Vec<Word>,
    pub rows: Vec<(Letter, Word)>,
    pub entries: Vec<Vec<Scalar>>,
}

pub fn derivative_matrix(spec: &AlgebraSpec, kind: DerivativeKind, d: &[u32]) -> DerivativeMatrix {
    let gens = spec.generators();
    let columns = words_of(d, gens);
    let mut rows = Vec::new();
    let mut index: BTreeMap<(Letter, Word), usize> = BTreeMap::new();
    for (i, &g) in gens.iter().enumerate() {
        if d[i] == 0 {
            continue;
        }
        let mut dd = d.to_vec();
        dd[i] -= 1;
        for u in words_of(&dd, gens) {
            index.insert((g, u.clone()), rows.len());
            rows.push((g, u));
        }
    }
    let mut entries = vec![vec![Scalar::zero(); columns.len()]; rows.len()];
    for (j, w) in columns.iter().enumerate() {
        for &g in gens {
            for (u, c) in derivative_word(spec, kind, g, w) {
                let r = index[&(g, u)];
                entries[r][j] = entries[r][j].add(&c);
            }
        }
    }
    DerivativeMatrix {
        columns,
        rows,
        entries,
    }
}

#[derive(Clone, Debug)]
pub struct ConstantReport {
    pub multidegree: Vec<u32>,
    pub basis: Vec<FreeElement>,
    pub determinant: Scalar,
    pub matrix_dim: usize,
}

pub fn find_constants(
    kind: DerivativeKind,
    d: &[u32],
    spec: &AlgebraSpec,
) -> Result<ConstantReport> {
    if d.len() != spec.rank() {
        return Err(Error::Invalid(
            "multidegree length differs from rank".into(),
        ));
    }
    if d.iter().sum::<u32>() == 0 {
        return Err(Error::Precondition("multidegree must be nonzero".into()));
    }
    let dm = derivative_matrix(spec, kind, d);
    let n = dm.columns.len();
    let (ns, det) = nullspace_and_det(spec, &dm.entries, n, true)?;
    let basis = ns
        .into_iter()
        .map(|v| FreeElement::from_terms(kind.side(), dm.columns.iter().cloned().zip(v)))
        .collect();
    Ok(ConstantReport {
        multidegree: d.to_vec(),
        basis,
        determinant: det.unwrap(),
        matrix_dim: n,
    })
}

pub fn constants_determinant(d: &[u32], spec: &AlgebraSpec) -> Result<Scalar> {
    if d.iter().sum::<u32>() < 2 {
        return Err(Error::Precondition("determinant needs |d| >= 2".into()));
    }
    let dm = derivative_matrix(spec, DerivativeKind::Section3, d);
    let n = dm.columns.len();
    Ok(nullspace_and_det(spec, &dm.entries, n, true)?.1.unwrap())
}

/// True when every derivative of the given kind kills `c`.
pub fn is_constant(spec: &AlgebraSpec, kind: DerivativeKind, c: &FreeElement) -> Result<bool> {
    for &g in spec.generators() {
        let d = derivative(spec, kind, g, c)?;
        for x in d.terms().values() {
            if !is_zero_in(spec, x)? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// The left-derivative pairing q^{ij} seen by a left-acting kind.
fn left_q(spec: &AlgebraSpec, kind: DerivativeKind, i: Letter, j: Letter) -> Scalar {
    kind.factor(spec, i, j)
}

#[derive(Clone, Debug)]
pub struct SerreRelation {
    pub element: FreeElement,
    /// Coefficients Q^k_m for m = 0..=k.
    pub coefficients: Vec<Scalar>,
    /// Whether ∏_{m<k} (1 − q^m σ) vanishes.
    pub is_constant: bool,
}

/// Σ_m Q^k_m ξ_α^m ξ_β ξ_α^{k−m} for the left-acting derivative `kind`.
pub fn qserre_relation(
    alpha: Letter,
    beta: Letter,
    k: u32,
    spec: &AlgebraSpec,
    kind: DerivativeKind,
) -> Result<SerreRelation> {
    if alpha == beta {
        return Err(Error::Precondition(
            "q-Serre relation needs alpha != beta".into(),
        ));
    }
    if k == 0 {
        return Err(Error::Precondition(
            "q-Serre exponent must be positive".into(),
        ));
    }
    if !kind.is_left() || kind.side() != Side::Positive {
        return Err(Error::Precondition(
            "q-Serre relations use a left derivative on A+".into(),
        ));
    }
    let q = left_q(spec, kind, alpha, alpha);
    for n in 1..=k {
        if is_zero_in(spec, &q.powi(n as i32).sub(&Scalar::one()))? {
            return Err(Error::Precondition(format!(
                "q^{{{alpha}{alpha}}} is a root of unity of order {n} <= {k}"
            )));
        }
    }
    let qab = left_q(spec, kind, alpha, beta);
    let sigma = qab.mul(&left_q(spec, kind, beta, alpha));
    let mut coefficients = Vec::new();
    let mut element = FreeElement::zero(Side::Positive);
    for m in 0..=k {
        let sign = if m % 2 == 0 {
            Scalar::one()
        } else {
            Scalar::from_int(-1)
        };
        let c = sign
            .mul(&qab.powi(m as i32))
            .mul(&q.powi((m * (m.saturating_sub(1)) / 2) as i32))
            .mul(&q_binomial(k, m, &q)?);
        let mut letters = vec![alpha; m as usize];
        letters.push(beta);
        letters.extend(std::iter::repeat_n(alpha, (k - m) as usize));
        element.add_term(Word::new(&letters), c.clone());
        coefficients.push(c);
    }
    let mut prod = Scalar::one();
    for m in 0..k {
        prod = prod.mul(&Scalar::one().sub(&q.powi(m as i32).mul(&sigma)));
    }
    Ok(SerreRelation {
        element,
        coefficients,
        is_constant: is_zero_in(spec, &prod)?,
    })
}

/// Smallest k ≤ kmax with q_{αβ} q_{βα} q_{αα}^{k−1} = 1.
pub fn serre_exponent(alpha: Letter, beta: Letter, spec: &AlgebraSpec, kmax: u32) -> Option<u32> {
    let s = spec.q(alpha, beta).mul(spec.q(beta, alpha));
    let q = spec.q(alpha, alpha);
    let mut acc = s;
    for k in 1..=kmax {
        if acc.is_one() {
            return Some(k);
        }
        acc = acc.mul(q);
    }
    None
}

/// Φ(C) = Σ C^{i₁…iₙ} ∂_{i₁}…∂_{iₙ} applied to one word.
fn phi_apply(
    spec: &AlgebraSpec,
    kind: DerivativeKind,
    c: &FreeElement,
    w: &Word,
) -> Result<FreeElement> {
    let mut out = FreeElement::zero(kind.side());
    for (idx, coeff) in c.terms() {
        let mut x = FreeElement::word(kind.side(), w.clone(), Scalar::one());
        for &g in idx.letters().iter().rev() {
            x = derivative(spec, kind, g, &x)?;
            if x.is_zero() {
                break;
            }
        }
        out = out.add(&x.scale(coeff))?;
    }
    Ok(out)
}

/// True iff Φ(C) annihilates every word of grade ≤ gmax.
pub fn phi_operator_check(
    spec: &AlgebraSpec,
    kind: DerivativeKind,
    c: &FreeElement,
    gmax: usize,
) -> Result<bool> {
    if !is_constant(spec, kind, c)? {
        return Err(Error::Precondition("Φ(C) check needs a constant C".into()));
    }
    for len in 0..=gmax {
        for w in words_of_length(len, spec.generators()) {
            let r = phi_apply(spec, kind, c, &w)?;
            for x in r.terms().values() {
                if !is_zero_in(spec, x)? {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// d_C Y = Σ C^{i₁…iₙ} ∂_{i₁}…∂_{i_{n−1}} Y_{iₙ} = 0.
pub fn is_c_closed(
    spec: &AlgebraSpec,
    kind: DerivativeKind,
    c: &FreeElement,
    y: &BTreeMap<Letter, FreeElement>,
) -> Result<bool> {
    let n = match c.terms().keys().next() {
        Some(w) => w.len(),
        None => return Ok(true),
    };
    if c.terms().keys().any(|w| w.len() != n) {
        return Err(Error::Precondition("C must be homogeneous".into()));
    }
    for comp in y.values() {
        if comp.terms().keys().any(|w| w.len() + 1 != n) {
            return Err(Error::Precondition(format!(
                "one-form components must have grade {}",
                n - 1
            )));
        }
    }
    let mut total = Scalar::zero();
    for (idx, coeff) in c.terms() {
        let letters = idx.letters();
        let Some(yc) = y.get(&letters[n - 1]) else {
            continue;
        };
        let mut x = yc.clone();
        for &g in letters[..n - 1].iter().rev() {
            x = derivative(spec, kind, g, &x)?;
        }
        total = total.add(&x.coeff(&Word::empty()).mul(coeff));
    }
    Ok(is_zero_in(spec, &total)?)
}

/// Whether `x` lies in the span of `basis` (exact rank test).
pub fn in_span(spec: &AlgebraSpec, basis: &[FreeElement], x: &FreeElement) -> Result<bool> {
    let mut words: Vec<Word> = basis
        .iter()
        .chain(std::iter::once(x))
        .flat_map(|e| e.terms().keys().cloned())
        .collect();
    words.sort();
    words.dedup();
    let row = |e: &FreeElement| -> Vec<Scalar> { words.iter().map(|w| e.coeff(w)).collect() };
    let mut rows: Vec<Vec<Scalar>> = basis.iter().map(row).collect();
    let r0 = rank_in(spec, &rows, words.len())?;
    rows.push(row(x));
    Ok(rank_in(spec, &rows, words.len())? == r0)
}

/// Unit-equivalence: `a = u·b` with u = ±1 times a Laurent monomial.
pub fn unit_equivalent(a: &Scalar, b: &Scalar) -> bool {
    if a.is_zero() || b.is_zero() {
        return a.is_zero() && b.is_zero();
    }
    a.div(b).map(|u| u.is_unit_monomial()).unwrap_or(false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalars::{parse_scalar, q_number, Specialization, Symbol};

    fn spec2() -> AlgebraSpec {
        AlgebraSpec::symbolic(&[1, 2]).unwrap()
    }

    fn w(l: &[Letter]) -> FreeElement {
        FreeElement::word(Side::Positive, Word::new(l), Scalar::one())
    }

    #[test]
    fn power_rule() {
        let s = spec2();
        let x = derivative(&s, DerivativeKind::Section3, 1, &w(&[1, 1, 1])).unwrap();
        let expect = w(&[1, 1]).scale(&q_number(3, &Scalar::q(1, 1)));
        assert_eq!(x, expect);
    }

    #[test]
    fn passing_another_letter() {
        let s = spec2();
        let x = derivative(&s, DerivativeKind::Section3, 1, &w(&[2, 1])).unwrap();
        assert_eq!(x, w(&[2]).scale(&Scalar::q(1, 2)));
        assert!(derivative(&s, DerivativeKind::Section3, 2, &w(&[1]))
            .unwrap()
            .is_zero());
    }

    #[test]
    fn side_is_checked() {
        let s = spec2();
        assert!(derivative(&s, DerivativeKind::LeftPlus, 1, &w(&[1])).is_err());
    }

    #[test]
    fn commuting_pair_gives_grade_two_constant() {
        let sp = Specialization::new()
            .with(Symbol::Pair(1, 2), &parse_scalar("q[2,1]^-1").unwrap())
            .unwrap();
        let s = spec2().specialize(&sp).unwrap();
        let r = find_constants(DerivativeKind::Section3, &[1, 1], &s).unwrap();
        assert_eq!(r.basis.len(), 1);
        let expect = w(&[1, 2]).sub(&w(&[2, 1]).scale(&Scalar::q(2, 1))).unwrap();
        assert_eq!(r.basis[0], expect);
        assert!(r.determinant.is_zero());
    }

    #[test]
    fn determinant_grade_two() {
        let d = constants_determinant(&[1, 1], &spec2()).unwrap();
        assert!(unit_equivalent(
            &d,
            &parse_scalar("1 - q[1,2]*q[2,1]").unwrap()
        ));
    }
}
