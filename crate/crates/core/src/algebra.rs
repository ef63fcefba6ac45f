//! The full algebra generated by e_{±α} and the group-likes K_α, K'_α, in
//! normal order e[-..]·K·e[+..], with tensor powers and the R⁰ prefix.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::sync::{Arc, Mutex};

use rayon::prelude::*;
use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::freealg::{AlgebraSpec, FreeElement, Letter, Side, Word};
use crate::quotient::ObstructionIdeal;
use crate::scalars::Scalar;

/// Exponents of K_1..K_n followed by K'_1..K'_n, indexed by generator
/// position.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct CartanMonomial(SmallVec<[i32; 8]>);

impl CartanMonomial {
    pub fn one(rank: usize) -> Self {
        CartanMonomial(SmallVec::from_elem(0, 2 * rank))
    }

    pub fn rank(&self) -> usize {
        self.0.len() / 2
    }

    /// K_i^e, with `i` a generator position.
    pub fn k(rank: usize, i: usize, e: i32) -> Self {
        let mut c = Self::one(rank);
        c.0[i] = e;
        c
    }

    /// K'_i^e.
    pub fn kp(rank: usize, i: usize, e: i32) -> Self {
        let mut c = Self::one(rank);
        c.0[rank + i] = e;
        c
    }

    /// ∏ K_i^{w_i}.
    pub fn k_weight(w: &[i32]) -> Self {
        let mut c = Self::one(w.len());
        c.0[..w.len()].copy_from_slice(w);
        c
    }

    /// ∏ K'_i^{w_i}.
    pub fn kp_weight(w: &[i32]) -> Self {
        let n = w.len();
        let mut c = Self::one(n);
        c.0[n..].copy_from_slice(w);
        c
    }

    pub fn k_exps(&self) -> &[i32] {
        &self.0[..self.rank()]
    }

    pub fn kp_exps(&self) -> &[i32] {
        &self.0[self.rank()..]
    }

    pub fn is_one(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn mul(&self, o: &Self) -> Self {
        CartanMonomial(self.0.iter().zip(&o.0).map(|(a, b)| a + b).collect())
    }

    pub fn inv(&self) -> Self {
        CartanMonomial(self.0.iter().map(|a| -a).collect())
    }

    pub fn render(&self, gens: &[Letter]) -> String {
        let n = self.rank();
        let mut parts = Vec::new();
        for (i, &e) in self.0.iter().enumerate() {
            if e == 0 {
                continue;
            }
            let name = if i < n {
                format!("K[{}]", gens[i])
            } else {
                format!("K'[{}]", gens[i - n])
            };
            parts.push(if e == 1 { name } else { format!("{name}^{e}") });
        }
        if parts.is_empty() {
            "1".into()
        } else {
            parts.join("*")
        }
    }
}

/// A normal-ordered monomial e_{−n}·K·e_{+p}.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Term {
    pub neg: Word,
    pub cartan: CartanMonomial,
    pub pos: Word,
}

impl Term {
    pub fn one(rank: usize) -> Self {
        Term {
            neg: Word::empty(),
            cartan: CartanMonomial::one(rank),
            pos: Word::empty(),
        }
    }

    /// Z-grade: number of positive letters minus number of negative letters.
    pub fn z_grade(&self) -> i64 {
        self.pos.len() as i64 - self.neg.len() as i64
    }

    pub fn render(&self, gens: &[Letter]) -> String {
        let mut parts = Vec::new();
        if !self.neg.is_empty() {
            parts.push(self.neg.render(Side::Negative));
        }
        if !self.cartan.is_one() {
            parts.push(self.cartan.render(gens));
        }
        if !self.pos.is_empty() {
            parts.push(self.pos.render(Side::Positive));
        }
        if parts.is_empty() {
            "1".into()
        } else {
            parts.join(" * ")
        }
    }
}

fn add_into<K: Ord>(map: &mut BTreeMap<K, Scalar>, k: K, c: Scalar) {
    if c.is_zero() {
        return;
    }
    match map.entry(k) {
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

#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct AlgebraElement {
    terms: BTreeMap<Term, Scalar>,
}

impl AlgebraElement {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn term(t: Term, c: Scalar) -> Self {
        let mut e = Self::zero();
        e.add_term(t, c);
        e
    }

    pub fn terms(&self) -> &BTreeMap<Term, Scalar> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, t: Term, c: Scalar) {
        add_into(&mut self.terms, t, c);
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for (t, c) in &o.terms {
            out.add_term(t.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(&Scalar::from_int(-1)))
    }

    pub fn scale(&self, c: &Scalar) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        AlgebraElement {
            terms: self
                .terms
                .iter()
                .map(|(t, x)| (t.clone(), x.mul(c)))
                .collect(),
        }
    }

    /// Common net multidegree of all terms, if there is one.
    pub fn weight(&self, spec: &AlgebraSpec) -> Option<Vec<i32>> {
        let mut out: Option<Vec<i32>> = None;
        for t in self.terms.keys() {
            let w = term_weight(spec, t);
            match &out {
                None => out = Some(w),
                Some(v) if *v != w => return None,
                _ => {}
            }
        }
        Some(out.unwrap_or_else(|| vec![0; spec.rank()]))
    }

    pub fn render(&self, gens: &[Letter]) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut s = String::new();
        for (i, (t, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                s.push_str(" + ");
            }
            let _ = write!(s, "({c}) {}", t.render(gens));
        }
        s
    }
}

/// Net multidegree of a normal-ordered term.
pub fn term_weight(spec: &AlgebraSpec, t: &Term) -> Vec<i32> {
    let mut w = vec![0i32; spec.rank()];
    for &l in t.pos.letters() {
        w[spec.index(l)] += 1;
    }
    for &l in t.neg.letters() {
        w[spec.index(l)] -= 1;
    }
    w
}

/// Group-like relations imposed on Cartan monomials. Each entry eliminates
/// one exponent slot by replacing a unit of it with the given monomial.
#[derive(Clone, Debug, Default)]
pub struct CartanRelations {
    subs: Vec<(usize, CartanMonomial)>,
}

impl CartanRelations {
    pub fn none() -> Self {
        Self::default()
    }

    /// Imposes K'_ρ K_σ = 1 by K_σ ↦ K'_ρ^{-1} (positions in generator order).
    pub fn kp_k_unit(rank: usize, rho: usize, sigma: usize) -> Self {
        CartanRelations {
            subs: vec![(sigma, CartanMonomial::kp(rank, rho, -1))],
        }
    }

    /// Adds a substitution for one exponent slot (K_i at i, K'_i at rank+i),
    /// applied after the existing ones.
    pub fn substitute(mut self, slot: usize, rep: CartanMonomial) -> Self {
        self.subs.push((slot, rep));
        self
    }

    pub fn is_empty(&self) -> bool {
        self.subs.is_empty()
    }

    pub fn apply(&self, c: &CartanMonomial) -> CartanMonomial {
        let mut c = c.clone();
        for (slot, rep) in &self.subs {
            let e = c.0[*slot];
            if e != 0 {
                c.0[*slot] = 0;
                for (x, r) in c.0.iter_mut().zip(&rep.0) {
                    *x += r * e;
                }
            }
        }
        c
    }
}

/// Straightened form of a product of a positive word by a negative word.
type Straightened = Arc<Vec<(Term, Scalar)>>;

/// Multiplication context: the spec, optional Cartan relations and an
/// optional obstruction ideal for quotient reduction.
pub struct Algebra {
    spec: AlgebraSpec,
    relations: CartanRelations,
    ideal: Option<Arc<ObstructionIdeal>>,
    memo: Mutex<HashMap<(Word, Word), Straightened>>,
    reduce_memo: Mutex<HashMap<(Side, Word), FreeElement>>,
}

impl Algebra {
    pub fn new(spec: &AlgebraSpec) -> Self {
        Algebra {
            spec: spec.clone(),
            relations: CartanRelations::none(),
            ideal: None,
            memo: Mutex::new(HashMap::new()),
            reduce_memo: Mutex::new(HashMap::new()),
        }
    }

    pub fn with_ideal(mut self, ideal: Option<Arc<ObstructionIdeal>>) -> Self {
        self.ideal = ideal.filter(|i| !i.is_empty() || i.spec().algebraic().is_some());
        self
    }

    pub fn with_relations(mut self, r: CartanRelations) -> Self {
        self.relations = r;
        self
    }

    pub fn spec(&self) -> &AlgebraSpec {
        &self.spec
    }

    pub fn rank(&self) -> usize {
        self.spec.rank()
    }

    pub fn ideal(&self) -> Option<&Arc<ObstructionIdeal>> {
        self.ideal.as_ref()
    }

    pub fn one(&self) -> AlgebraElement {
        AlgebraElement::term(Term::one(self.rank()), Scalar::one())
    }

    /// e_{+a} or e_{−a}.
    pub fn generator(&self, side: Side, a: Letter) -> AlgebraElement {
        let mut t = Term::one(self.rank());
        match side {
            Side::Positive => t.pos = Word::letter(a),
            Side::Negative => t.neg = Word::letter(a),
        }
        AlgebraElement::term(t, Scalar::one())
    }

    pub fn cartan(&self, c: CartanMonomial) -> AlgebraElement {
        let mut t = Term::one(self.rank());
        t.cartan = self.relations.apply(&c);
        AlgebraElement::term(t, Scalar::one())
    }

    /// Embeds a free element of A⁺ or A⁻.
    pub fn from_free(&self, x: &FreeElement) -> AlgebraElement {
        let mut out = AlgebraElement::zero();
        for (w, c) in x.terms() {
            let mut t = Term::one(self.rank());
            match x.side() {
                Side::Positive => t.pos = w.clone(),
                Side::Negative => t.neg = w.clone(),
            }
            out.add_term(t, c.clone());
        }
        out
    }

    /// χ with K·x = χ x·K for x of net weight `w`.
    pub fn character_weight(&self, c: &CartanMonomial, w: &[i32]) -> Scalar {
        let gens = self.spec.generators();
        let n = gens.len();
        let mut acc = Scalar::one();
        for i in 0..n {
            for j in 0..n {
                // q_{ij} collects K_i against letter j and K'_j against letter i.
                let e = c.0[i] * w[j] + c.0[n + j] * w[i];
                if e != 0 {
                    acc = acc.mul(&self.spec.q(gens[i], gens[j]).powi(e));
                }
            }
        }
        acc
    }

    fn word_weight(&self, w: &Word, side: Side) -> Vec<i32> {
        let mut v = vec![0i32; self.rank()];
        let s = if side == Side::Positive { 1 } else { -1 };
        for &l in w.letters() {
            v[self.spec.index(l)] += s;
        }
        v
    }

    /// p·n for a positive word p and negative word n, normal ordered.
    pub fn straighten(&self, p: &Word, n: &Word) -> Straightened {
        let rank = self.rank();
        if p.is_empty() || n.is_empty() {
            return Arc::new(vec![(
                Term {
                    neg: n.clone(),
                    cartan: CartanMonomial::one(rank),
                    pos: p.clone(),
                },
                Scalar::one(),
            )]);
        }
        let key = (p.clone(), n.clone());
        if let Some(r) = self.memo.lock().unwrap().get(&key) {
            return r.clone();
        }
        let a = *p.letters().last().unwrap();
        let head = p.slice(0, p.len() - 1);
        // e_a·n = n·e_a + Σ_k δ(a,n_k) (∏_{j>k} q_{a n_j}^{-1} n_{\k}K_a − ∏_{j>k} q_{n_j a} n_{\k}K'^{-1}_a)
        let mut step: Vec<(Word, CartanMonomial, Word, Scalar)> = vec![(
            n.clone(),
            CartanMonomial::one(rank),
            Word::letter(a),
            Scalar::one(),
        )];
        let nl = n.letters();
        let ai = self.spec.index(a);
        for k in 0..nl.len() {
            if nl[k] != a {
                continue;
            }
            let mut f1 = Scalar::one();
            let mut f2 = Scalar::one();
            for &b in &nl[k + 1..] {
                f1 = f1.mul(self.spec.qinv(a, b));
                f2 = f2.mul(self.spec.q(b, a));
            }
            let rest = n.without(k);
            step.push((
                rest.clone(),
                CartanMonomial::k(rank, ai, 1),
                Word::empty(),
                f1,
            ));
            step.push((
                rest,
                CartanMonomial::kp(rank, ai, -1),
                Word::empty(),
                f2.neg(),
            ));
        }
        let mut acc: BTreeMap<Term, Scalar> = BTreeMap::new();
        for (n2, c2, p2, f) in step {
            for (t, x) in self.straighten(&head, &n2).iter() {
                // t.pos · c2 = χ_{c2}(t.pos)^{-1} c2 · t.pos
                let chi = self.character_weight(&c2, &self.word_weight(&t.pos, Side::Positive));
                let coeff = x.mul(&f).div(&chi).expect("characters are units");
                let term = Term {
                    neg: t.neg.clone(),
                    cartan: t.cartan.mul(&c2),
                    pos: t.pos.concat(&p2),
                };
                add_into(&mut acc, term, coeff);
            }
        }
        let r: Straightened = Arc::new(acc.into_iter().collect());
        self.memo.lock().unwrap().insert(key, r.clone());
        r
    }

    /// Product of two normal-ordered terms.
    pub fn mul_terms(&self, a: &Term, b: &Term) -> Vec<(Term, Scalar)> {
        let s = self.straighten(&a.pos, &b.neg);
        let mut out = Vec::with_capacity(s.len());
        for (t, x) in s.iter() {
            // a.cartan · t.neg = χ_{a.c}(t.neg) t.neg · a.cartan
            let c1 = self.character_weight(&a.cartan, &self.word_weight(&t.neg, Side::Negative));
            // t.pos · b.cartan = χ_{b.c}(t.pos)^{-1} b.cartan · t.pos
            let c2 = self.character_weight(&b.cartan, &self.word_weight(&t.pos, Side::Positive));
            let coeff = x.mul(&c1).div(&c2).expect("characters are units");
            let cartan = a.cartan.mul(&t.cartan).mul(&b.cartan);
            let cartan = if self.relations.is_empty() {
                cartan
            } else {
                self.relations.apply(&cartan)
            };
            out.push((
                Term {
                    neg: a.neg.concat(&t.neg),
                    cartan,
                    pos: t.pos.concat(&b.pos),
                },
                coeff,
            ));
        }
        out
    }

    pub fn mul(&self, x: &AlgebraElement, y: &AlgebraElement) -> AlgebraElement {
        let mut acc = BTreeMap::new();
        for (a, ca) in &x.terms {
            for (b, cb) in &y.terms {
                let cab = ca.mul(cb);
                for (t, c) in self.mul_terms(a, b) {
                    add_into(&mut acc, t, c.mul(&cab));
                }
            }
        }
        AlgebraElement { terms: acc }
    }

    pub fn commutator(&self, x: &AlgebraElement, y: &AlgebraElement) -> AlgebraElement {
        self.mul(x, y).sub(&self.mul(y, x))
    }

    fn reduce_word(&self, side: Side, w: &Word) -> Result<FreeElement> {
        let Some(ideal) = &self.ideal else {
            return Ok(FreeElement::word(side, w.clone(), Scalar::one()));
        };
        let key = (side, w.clone());
        if let Some(r) = self.reduce_memo.lock().unwrap().get(&key) {
            return Ok(r.clone());
        }
        let r = ideal.reduce(&FreeElement::word(side, w.clone(), Scalar::one()))?;
        self.reduce_memo.lock().unwrap().insert(key, r.clone());
        Ok(r)
    }

    /// Quotient normal form: both outer words reduced modulo the ideal.
    pub fn reduce_term(&self, t: &Term) -> Result<Vec<(Term, Scalar)>> {
        if self.ideal.is_none() {
            return Ok(vec![(t.clone(), Scalar::one())]);
        }
        let n = self.reduce_word(Side::Negative, &t.neg)?;
        let p = self.reduce_word(Side::Positive, &t.pos)?;
        let mut out = Vec::new();
        for (nw, nc) in n.terms() {
            for (pw, pc) in p.terms() {
                out.push((
                    Term {
                        neg: nw.clone(),
                        cartan: t.cartan.clone(),
                        pos: pw.clone(),
                    },
                    nc.mul(pc),
                ));
            }
        }
        Ok(out)
    }

    pub fn reduce(&self, x: &AlgebraElement) -> Result<AlgebraElement> {
        if self.ideal.is_none() && self.spec.algebraic().is_none() {
            return Ok(x.clone());
        }
        let mut acc = BTreeMap::new();
        for (t, c) in &x.terms {
            for (u, f) in self.reduce_term(t)? {
                let v = crate::exact::normalize(&self.spec, &c.mul(&f))?;
                add_into(&mut acc, u, v);
            }
        }
        Ok(AlgebraElement { terms: acc })
    }
}

/// Slot measure used by truncation bounds.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Measure {
    NegLen,
    PosLen,
    /// Z-grade, positive minus negative letters.
    ZGrade,
    /// Minus the Z-grade.
    NegZ,
}

#[derive(Clone, Copy, Debug)]
pub struct Bound {
    pub slot: usize,
    pub measure: Measure,
    pub max: i64,
}

/// Terms exceeding any bound are dropped after each product. A bound is
/// exact for fixed-grade assertions whenever later factors cannot lower the
/// measure in that slot (one-signed slots for letter counts; bounded-below
/// Z-grades for Z-bounds).
#[derive(Clone, Debug, Default)]
pub struct Truncation(pub Vec<Bound>);

impl Truncation {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn with(mut self, slot: usize, measure: Measure, max: i64) -> Self {
        self.0.push(Bound { slot, measure, max });
        self
    }

    fn admits_slot(&self, slot: usize, t: &Term) -> bool {
        self.0.iter().filter(|b| b.slot == slot).all(|b| {
            let v = match b.measure {
                Measure::NegLen => t.neg.len() as i64,
                Measure::PosLen => t.pos.len() as i64,
                Measure::ZGrade => t.z_grade(),
                Measure::NegZ => -t.z_grade(),
            };
            v <= b.max
        })
    }

    pub fn admits(&self, key: &[Term]) -> bool {
        key.iter().enumerate().all(|(i, t)| self.admits_slot(i, t))
    }
}

pub type TensorKey = SmallVec<[Term; 3]>;

/// A finite sum of elementary tensors of normal-ordered terms.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TensorElement {
    rank: usize,
    terms: BTreeMap<TensorKey, Scalar>,
}

impl TensorElement {
    pub fn zero(rank: usize) -> Self {
        TensorElement {
            rank,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(rank: usize, alg_rank: usize) -> Self {
        let mut t = Self::zero(rank);
        t.add_term(
            (0..rank).map(|_| Term::one(alg_rank)).collect(),
            Scalar::one(),
        );
        t
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn terms(&self) -> &BTreeMap<TensorKey, Scalar> {
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

    pub fn add_term(&mut self, k: TensorKey, c: Scalar) {
        debug_assert_eq!(k.len(), self.rank);
        add_into(&mut self.terms, k, c);
    }

    /// Elementary tensor x₁⊗…⊗x_r of algebra elements.
    pub fn elementary(parts: &[AlgebraElement]) -> Self {
        let mut out = Self::zero(parts.len());
        let mut partial: Vec<(TensorKey, Scalar)> = vec![(SmallVec::new(), Scalar::one())];
        for p in parts {
            let mut next = Vec::new();
            for (k, c) in &partial {
                for (t, x) in p.terms() {
                    let mut k2 = k.clone();
                    k2.push(t.clone());
                    next.push((k2, c.mul(x)));
                }
            }
            partial = next;
        }
        for (k, c) in partial {
            out.add_term(k, c);
        }
        out
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        if self.rank != o.rank {
            return Err(Error::Invalid("tensor rank mismatch".into()));
        }
        let mut out = self.clone();
        for (k, c) in &o.terms {
            out.add_term(k.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        self.add(&o.scale(&Scalar::from_int(-1)))
    }

    pub fn scale(&self, c: &Scalar) -> Self {
        let mut out = Self::zero(self.rank);
        if c.is_zero() {
            return out;
        }
        for (k, x) in &self.terms {
            out.terms.insert(k.clone(), x.mul(c));
        }
        out
    }

    pub fn filter(&self, f: impl Fn(&TensorKey) -> bool) -> Self {
        TensorElement {
            rank: self.rank,
            terms: self
                .terms
                .iter()
                .filter(|(k, _)| f(k))
                .map(|(k, c)| (k.clone(), c.clone()))
                .collect(),
        }
    }

    /// Places the slots of `self` at positions `slots` of a rank-`rank`
    /// tensor, filling the rest with 1.
    pub fn embed(&self, rank: usize, slots: &[usize], alg_rank: usize) -> Self {
        let mut out = Self::zero(rank);
        for (k, c) in &self.terms {
            let mut key: TensorKey = (0..rank).map(|_| Term::one(alg_rank)).collect();
            for (t, &s) in k.iter().zip(slots) {
                key[s] = t.clone();
            }
            out.add_term(key, c.clone());
        }
        out
    }

    /// Permutes slots: slot i of the result is slot `perm[i]` of `self`.
    pub fn permute(&self, perm: &[usize]) -> Self {
        let mut out = Self::zero(self.rank);
        for (k, c) in &self.terms {
            out.add_term(perm.iter().map(|&i| k[i].clone()).collect(), c.clone());
        }
        out
    }

    pub fn render(&self, gens: &[Letter]) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut s = String::new();
        for (i, (k, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                s.push('\n');
            }
            let slots: Vec<String> = k.iter().map(|t| t.render(gens)).collect();
            let _ = write!(s, "({c}) {}", slots.join(" ⊗ "));
        }
        s
    }
}

impl Algebra {
    /// Slot-wise product with straightening and truncation.
    pub fn tensor_mul(
        &self,
        x: &TensorElement,
        y: &TensorElement,
        trunc: &Truncation,
    ) -> Result<TensorElement> {
        if x.rank != y.rank {
            return Err(Error::Invalid("tensor rank mismatch".into()));
        }
        let rank = x.rank;
        let ys: Vec<(&TensorKey, &Scalar)> = y.terms.iter().collect();
        let partials: Vec<BTreeMap<TensorKey, Scalar>> = x
            .terms
            .par_iter()
            .map(|(kx, cx)| {
                let mut acc = BTreeMap::new();
                for (ky, cy) in &ys {
                    let mut partial: Vec<(TensorKey, Scalar)> = vec![(SmallVec::new(), cx.mul(cy))];
                    for s in 0..rank {
                        let prods = self.mul_terms(&kx[s], &ky[s]);
                        let mut next = Vec::new();
                        for (k, c) in &partial {
                            for (t, f) in &prods {
                                if !trunc.admits_slot(s, t) {
                                    continue;
                                }
                                let mut k2 = k.clone();
                                k2.push(t.clone());
                                next.push((k2, c.mul(f)));
                            }
                        }
                        partial = next;
                        if partial.is_empty() {
                            break;
                        }
                    }
                    for (k, c) in partial {
                        add_into(&mut acc, k, c);
                    }
                }
                acc
            })
            .collect();
        let mut out = TensorElement::zero(rank);
        for p in partials {
            for (k, c) in p {
                out.add_term(k, c);
            }
        }
        Ok(out)
    }

    /// Slot-wise quotient reduction; coefficients are normalized modulo any
    /// algebraic relation.
    pub fn tensor_reduce(&self, x: &TensorElement) -> Result<TensorElement> {
        if self.ideal.is_none() && self.spec.algebraic().is_none() {
            return Ok(x.clone());
        }
        let mut out = TensorElement::zero(x.rank);
        for (k, c) in &x.terms {
            let mut partial: Vec<(TensorKey, Scalar)> = vec![(SmallVec::new(), c.clone())];
            for t in k.iter() {
                let r = self.reduce_term(t)?;
                let mut next = Vec::new();
                for (kk, cc) in &partial {
                    for (u, f) in &r {
                        let mut k2 = kk.clone();
                        k2.push(u.clone());
                        next.push((k2, cc.mul(f)));
                    }
                }
                partial = next;
            }
            for (kk, cc) in partial {
                out.add_term(kk, crate::exact::normalize(&self.spec, &cc)?);
            }
        }
        Ok(out)
    }

    /// Applies an algebra map to each slot.
    pub fn tensor_map(
        &self,
        x: &TensorElement,
        f: impl Fn(usize, &Term) -> AlgebraElement,
    ) -> TensorElement {
        let mut out = TensorElement::zero(x.rank);
        for (k, c) in &x.terms {
            let parts: Vec<AlgebraElement> = k.iter().enumerate().map(|(i, t)| f(i, t)).collect();
            let e = TensorElement::elementary(&parts).scale(c);
            for (kk, cc) in e.terms {
                out.add_term(kk, cc);
            }
        }
        out
    }

    /// The conjugation x ↦ (R⁰_{ij})^{-1} x R⁰_{ij}:
    /// (x⊗y)R⁰ = R⁰(x·F(−wt y) ⊗ E(−wt x)·y), E = ∏K, F = ∏K'.
    pub fn conj_r0(&self, x: &TensorElement, i: usize, j: usize) -> TensorElement {
        let mut out = TensorElement::zero(x.rank);
        for (k, c) in &x.terms {
            let wx = term_weight(&self.spec, &k[i]);
            let wy = term_weight(&self.spec, &k[j]);
            let neg = |w: &[i32]| -> Vec<i32> { w.iter().map(|a| -a).collect() };
            let f = CartanMonomial::kp_weight(&neg(&wy));
            let e = CartanMonomial::k_weight(&neg(&wx));
            let mut key = k.clone();
            let mut coeff = c.clone();
            // k[i].pos · F = χ_F(pos)^{-1} F · pos
            let chi = self.character_weight(&f, &self.word_weight(&k[i].pos, Side::Positive));
            coeff = coeff.div(&chi).expect("unit");
            key[i].cartan = self.relations.apply(&k[i].cartan.mul(&f));
            // E · k[j].neg = χ_E(neg) neg · E
            let chi = self.character_weight(&e, &self.word_weight(&k[j].neg, Side::Negative));
            coeff = coeff.mul(&chi);
            key[j].cartan = self.relations.apply(&e.mul(&k[j].cartan));
            out.add_term(key, coeff);
        }
        out
    }

    pub fn prefixed_mul(
        &self,
        a: &PrefixedTensor,
        b: &PrefixedTensor,
        trunc: &Truncation,
    ) -> Result<PrefixedTensor> {
        let mut body = a.body.clone();
        for &(i, j) in &b.prefix {
            body = self.conj_r0(&body, i, j);
        }
        let body = self.tensor_mul(&body, &b.body, trunc)?;
        let mut prefix = a.prefix.clone();
        prefix.extend_from_slice(&b.prefix);
        prefix.sort();
        Ok(PrefixedTensor { prefix, body })
    }
}

/// ∏ R⁰_{ij} (commuting, stored sorted) times a body.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PrefixedTensor {
    pub prefix: Vec<(usize, usize)>,
    pub body: TensorElement,
}

impl PrefixedTensor {
    pub fn plain(body: TensorElement) -> Self {
        PrefixedTensor {
            prefix: Vec::new(),
            body,
        }
    }

    /// Embeds a rank-2 R⁰-prefixed tensor into slots (i,j) of rank `rank`.
    pub fn embed(&self, rank: usize, slots: &[usize], alg_rank: usize) -> Self {
        let mut prefix: Vec<(usize, usize)> = self
            .prefix
            .iter()
            .map(|&(a, b)| (slots[a], slots[b]))
            .collect();
        prefix.sort();
        PrefixedTensor {
            prefix,
            body: self.body.embed(rank, slots, alg_rank),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn alg2() -> Algebra {
        Algebra::new(&AlgebraSpec::symbolic(&[1, 2]).unwrap())
    }

    #[test]
    fn commutator_of_opposite_generators() {
        let a = alg2();
        let e = a.generator(Side::Positive, 1);
        let f = a.generator(Side::Negative, 1);
        let c = a.commutator(&e, &f);
        let expect = a
            .cartan(CartanMonomial::k(2, 0, 1))
            .sub(&a.cartan(CartanMonomial::kp(2, 0, -1)));
        assert_eq!(c, expect);
        let g = a.generator(Side::Negative, 2);
        assert!(a.commutator(&e, &g).is_zero());
    }

    #[test]
    fn cartan_characters() {
        let a = alg2();
        let k = a.cartan(CartanMonomial::k(2, 0, 1));
        let e2 = a.generator(Side::Positive, 2);
        let ke = a.mul(&e2, &k);
        let mut t = Term::one(2);
        t.pos = Word::letter(2);
        t.cartan = CartanMonomial::k(2, 0, 1);
        assert_eq!(
            ke,
            AlgebraElement::term(t.clone(), Scalar::q(1, 2).inv().unwrap())
        );
        let kp = a.cartan(CartanMonomial::kp(2, 0, 1));
        let mut t2 = t.clone();
        t2.cartan = CartanMonomial::kp(2, 0, 1);
        assert_eq!(
            a.mul(&e2, &kp),
            AlgebraElement::term(t2, Scalar::q(2, 1).inv().unwrap())
        );
        let f2 = a.generator(Side::Negative, 2);
        let mut t3 = Term::one(2);
        t3.neg = Word::letter(2);
        t3.cartan = CartanMonomial::k(2, 0, 1);
        assert_eq!(
            a.mul(&k, &f2),
            AlgebraElement::term(t3, Scalar::q(1, 2).inv().unwrap())
        );
    }

    #[test]
    fn associativity_on_mixed_words() {
        let a = alg2();
        let e = |s, l| a.generator(s, l);
        let x = a.mul(&e(Side::Positive, 1), &e(Side::Positive, 2));
        let y = a.mul(&e(Side::Negative, 1), &e(Side::Negative, 2));
        let z = a.mul(&e(Side::Positive, 2), &e(Side::Negative, 1));
        let l = a.mul(&a.mul(&x, &y), &z);
        let r = a.mul(&x, &a.mul(&y, &z));
        assert_eq!(l, r);
    }

    #[test]
    fn r0_conjugation_is_consistent_with_characters() {
        let a = alg2();
        let x = TensorElement::elementary(&[
            a.generator(Side::Negative, 1),
            a.generator(Side::Positive, 1),
        ]);
        let c = a.conj_r0(&x, 0, 1);
        assert_eq!(c.len(), 1);
        let (k, v) = c.terms().iter().next().unwrap();
        assert_eq!(k[0].cartan, CartanMonomial::kp(2, 0, -1));
        assert_eq!(k[1].cartan, CartanMonomial::k(2, 0, 1));
        assert!(v.is_unit_monomial());
    }
}
