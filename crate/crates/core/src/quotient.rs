//! The two-sided ideal generated by constants and the graded quotient of the
//! free algebras, realized piece by piece in each multidegree.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex};

use crate::error::{Error, Result};
use crate::exact::{normalize, nullspace_and_det, rank_in, rref_in};
use crate::freealg::{multidegrees_of_grade, words_of, AlgebraSpec, FreeElement, Side, Word};
use crate::qdiff::{derivative_word, DerivativeKind};
use crate::scalars::Scalar;

/// The ideal's graded piece at one multidegree, as a reduced row-echelon
/// basis over `words_of(d)`.
#[derive(Debug)]
pub struct Piece {
    pub side: Side,
    pub multidegree: Vec<u32>,
    pub words: Vec<Word>,
    index: HashMap<Word, usize>,
    rows: Vec<Vec<Scalar>>,
    pivots: Vec<usize>,
}

impl Piece {
    pub fn position(&self, w: &Word) -> Option<usize> {
        self.index.get(w).copied()
    }

    pub fn dim(&self) -> usize {
        self.pivots.len()
    }

    /// Words not hit by a pivot: a basis of the quotient at this multidegree.
    pub fn normal_words(&self) -> Vec<Word> {
        let mut pivot = vec![false; self.words.len()];
        for &p in &self.pivots {
            pivot[p] = true;
        }
        self.words
            .iter()
            .zip(pivot)
            .filter(|(_, p)| !p)
            .map(|(w, _)| w.clone())
            .collect()
    }

    fn basis(&self) -> impl Iterator<Item = FreeElement> + '_ {
        self.rows.iter().map(|r| {
            FreeElement::from_terms(self.side, self.words.iter().cloned().zip(r.iter().cloned()))
        })
    }

    /// Subtracts the basis rows so that no pivot word survives.
    fn eliminate(&self, terms: &mut BTreeMap<Word, Scalar>) {
        for (row, &p) in self.rows.iter().zip(&self.pivots) {
            let Some(c) = terms.get(&self.words[p]).cloned() else {
                continue;
            };
            for (j, v) in row.iter().enumerate() {
                if v.is_zero() {
                    continue;
                }
                let w = &self.words[j];
                let new = terms
                    .get(w)
                    .cloned()
                    .unwrap_or_else(Scalar::zero)
                    .sub(&c.mul(v));
                if new.is_zero() {
                    terms.remove(w);
                } else {
                    terms.insert(w.clone(), new);
                }
            }
        }
    }
}

/// Checks made while the ideal was built, one entry per multidegree at which
/// constants were found.
#[derive(Clone, Debug)]
pub struct IdealDiagnostic {
    pub grade: usize,
    pub multidegree: Vec<u32>,
    /// Dimension of the left (∂⃗) constants in the current quotient.
    pub left_dim: usize,
    pub right_dim: usize,
    /// Left and right constants span the same subspace.
    pub left_right_agree: bool,
    /// The mirrored generators are constants for the negative-side operator.
    pub mirror_constant: bool,
}

#[derive(Debug)]
pub struct ObstructionIdeal {
    spec: AlgebraSpec,
    gmax: usize,
    generators: Vec<FreeElement>,
    diagnostics: Vec<IdealDiagnostic>,
    cache: Mutex<HashMap<(Side, Vec<u32>), Arc<Piece>>>,
}

impl ObstructionIdeal {
    pub fn empty(spec: &AlgebraSpec) -> Self {
        ObstructionIdeal {
            spec: spec.clone(),
            gmax: 0,
            generators: Vec::new(),
            diagnostics: Vec::new(),
            cache: Mutex::new(HashMap::new()),
        }
    }

    /// An ideal from explicitly given multihomogeneous generators.
    pub fn from_generators(spec: &AlgebraSpec, generators: Vec<FreeElement>) -> Result<Self> {
        let mut gmax = 0;
        for g in &generators {
            let Some(d) = g.homogeneous_multidegree(spec.generators()) else {
                return Err(Error::Invalid(format!(
                    "generator {g} is not multihomogeneous"
                )));
            };
            let n = d.iter().sum::<u32>() as usize;
            if n < 2 {
                return Err(Error::Invalid(format!("generator {g} has grade below 2")));
            }
            gmax = gmax.max(n);
        }
        Ok(ObstructionIdeal {
            spec: spec.clone(),
            gmax,
            generators,
            diagnostics: Vec::new(),
            cache: Mutex::new(HashMap::new()),
        })
    }

    pub fn spec(&self) -> &AlgebraSpec {
        &self.spec
    }

    pub fn max_grade(&self) -> usize {
        self.gmax
    }

    pub fn generators(&self) -> &[FreeElement] {
        &self.generators
    }

    pub fn generators_on(&self, side: Side) -> impl Iterator<Item = &FreeElement> {
        self.generators.iter().filter(move |g| g.side() == side)
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn diagnostics(&self) -> &[IdealDiagnostic] {
        &self.diagnostics
    }

    pub fn piece(&self, side: Side, d: &[u32]) -> Result<Arc<Piece>> {
        let key = (side, d.to_vec());
        if let Some(p) = self.cache.lock().unwrap().get(&key) {
            return Ok(p.clone());
        }
        let p = Arc::new(self.compute_piece(side, d)?);
        Ok(self.cache.lock().unwrap().entry(key).or_insert(p).clone())
    }

    /// Spanned by ξ_g·I_{d−e_g}, I_{d−e_g}·ξ_g and the generators of
    /// multidegree exactly d.
    fn compute_piece(&self, side: Side, d: &[u32]) -> Result<Piece> {
        let gens = self.spec.generators();
        let words = words_of(d, gens);
        let index: HashMap<Word, usize> = words
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, w)| (w, i))
            .collect();
        let mut vectors: Vec<Vec<Scalar>> = Vec::new();
        let total: u32 = d.iter().sum();
        let has_gens = self.generators.iter().any(|g| g.side() == side);
        if total >= 2 && has_gens {
            for (i, &g) in gens.iter().enumerate() {
                if d[i] == 0 {
                    continue;
                }
                let mut dd = d.to_vec();
                dd[i] -= 1;
                let lower = self.piece(side, &dd)?;
                let gl = Word::letter(g);
                for b in lower.basis() {
                    let mut left = vec![Scalar::zero(); words.len()];
                    let mut right = vec![Scalar::zero(); words.len()];
                    for (w, c) in b.terms() {
                        left[index[&gl.concat(w)]] = c.clone();
                        right[index[&w.concat(&gl)]] = c.clone();
                    }
                    vectors.push(left);
                    vectors.push(right);
                }
            }
            for g in self.generators_on(side) {
                if g.homogeneous_multidegree(gens).as_deref() == Some(d) {
                    let mut v = vec![Scalar::zero(); words.len()];
                    for (w, c) in g.terms() {
                        v[index[w]] = c.clone();
                    }
                    vectors.push(v);
                }
            }
        }
        let (rows, pivots) = if vectors.is_empty() {
            (Vec::new(), Vec::new())
        } else {
            let r = rref_in(&self.spec, vectors, words.len())?;
            let k = r.rank();
            (r.rows.into_iter().take(k).collect(), r.pivots)
        };
        Ok(Piece {
            side,
            multidegree: d.to_vec(),
            words,
            index,
            rows,
            pivots,
        })
    }

    /// Canonical representative of `x` in the quotient.
    pub fn reduce(&self, x: &FreeElement) -> Result<FreeElement> {
        if self.generators.is_empty() && self.spec.algebraic().is_none() {
            return Ok(x.clone());
        }
        let side = x.side();
        let mut out = FreeElement::zero(side);
        for (d, comp) in x.components(self.spec.generators()) {
            let mut terms = comp.into_terms();
            if self.spec.algebraic().is_some() {
                for v in terms.values_mut() {
                    *v = normalize(&self.spec, v)?;
                }
            }
            self.piece(side, &d)?.eliminate(&mut terms);
            for (w, c) in terms {
                let c = normalize(&self.spec, &c)?;
                out.add_term(w, c);
            }
        }
        Ok(out)
    }

    pub fn contains(&self, x: &FreeElement) -> Result<bool> {
        Ok(self.reduce(x)?.is_zero())
    }

    pub fn normal_words(&self, side: Side, d: &[u32]) -> Result<Vec<Word>> {
        Ok(self.piece(side, d)?.normal_words())
    }

    /// Constants of `kind` at multidegree `d` in the quotient by the current
    /// generators: combinations X of normal words with every derivative of X
    /// lying in the ideal.
    pub fn quotient_constants(&self, kind: DerivativeKind, d: &[u32]) -> Result<Vec<FreeElement>> {
        let side = kind.side();
        let gens = self.spec.generators();
        let columns = self.normal_words(side, d)?;
        let mut rows: Vec<Vec<Scalar>> = Vec::new();
        for (i, &g) in gens.iter().enumerate() {
            if d[i] == 0 {
                continue;
            }
            let mut dd = d.to_vec();
            dd[i] -= 1;
            let lower = self.piece(side, &dd)?;
            let lw = lower.normal_words();
            let li: HashMap<&Word, usize> = lw.iter().enumerate().map(|(k, w)| (w, k)).collect();
            let base = rows.len();
            rows.extend((0..lw.len()).map(|_| vec![Scalar::zero(); columns.len()]));
            for (j, w) in columns.iter().enumerate() {
                let mut terms = BTreeMap::new();
                for (u, c) in derivative_word(&self.spec, kind, g, w) {
                    let e = terms.entry(u).or_insert_with(Scalar::zero);
                    *e = Scalar::add(e, &c);
                }
                terms.retain(|_, c| !c.is_zero());
                lower.eliminate(&mut terms);
                for (u, c) in terms {
                    rows[base + li[&u]][j] = c;
                }
            }
        }
        let (ns, _) = nullspace_and_det(&self.spec, &rows, columns.len(), false)?;
        Ok(ns
            .into_iter()
            .map(|v| FreeElement::from_terms(side, columns.iter().cloned().zip(v)))
            .collect())
    }

    /// Builds the ideal grade by grade: at each grade the left constants of
    /// A⁺ in the current quotient are added, together with their mirrors in
    /// A⁻.
    pub fn build(spec: &AlgebraSpec, gmax: usize) -> Result<Self> {
        if gmax < 2 {
            return Err(Error::Precondition(
                "ideal construction needs gmax >= 2".into(),
            ));
        }
        let mut ideal = ObstructionIdeal::empty(spec);
        ideal.gmax = gmax;
        for n in 2..=gmax {
            let mut found = Vec::new();
            for d in multidegrees_of_grade(n as u32, spec.rank()) {
                let left = ideal.quotient_constants(DerivativeKind::LeftMinus, &d)?;
                if left.is_empty() {
                    continue;
                }
                let right = ideal.quotient_constants(DerivativeKind::RightMinus, &d)?;
                let agree = same_span(spec, &left, &right)?;
                found.push((n, d, left, right.len(), agree));
            }
            let mut pending = Vec::new();
            for (n, d, left, right_dim, agree) in found {
                let mirrors: Vec<FreeElement> = left.iter().map(mirror).collect();
                let left_dim = left.len();
                ideal.generators.extend(left);
                ideal.generators.extend(mirrors.iter().cloned());
                pending.push((n, d, mirrors, left_dim, right_dim, agree));
            }
            ideal.cache.lock().unwrap().clear();
            for (grade, multidegree, mirrors, left_dim, right_dim, left_right_agree) in pending {
                let mut mirror_constant = true;
                for m in &mirrors {
                    mirror_constant &= ideal.is_constant_mod_lower(DerivativeKind::RightPlus, m)?;
                }
                ideal.diagnostics.push(IdealDiagnostic {
                    grade,
                    multidegree,
                    left_dim,
                    right_dim,
                    left_right_agree,
                    mirror_constant,
                });
            }
        }
        Ok(ideal)
    }

    /// Every derivative of `x` lies in the ideal.
    pub fn is_constant_mod_lower(&self, kind: DerivativeKind, x: &FreeElement) -> Result<bool> {
        for &g in self.spec.generators() {
            let dx = crate::qdiff::derivative(&self.spec, kind, g, x)?;
            if !self.reduce(&dx)?.is_zero() {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// The negative-side image Σ C^{α_n…α₁} e_{−α₁}…e_{−α_n}.
pub fn mirror(c: &FreeElement) -> FreeElement {
    c.reversed().with_side(c.side().opposite())
}

fn same_span(spec: &AlgebraSpec, a: &[FreeElement], b: &[FreeElement]) -> Result<bool> {
    if a.len() != b.len() {
        return Ok(false);
    }
    let mut words: Vec<Word> = a
        .iter()
        .chain(b)
        .flat_map(|e| e.terms().keys().cloned())
        .collect();
    words.sort();
    words.dedup();
    let rows: Vec<Vec<Scalar>> = a
        .iter()
        .chain(b)
        .map(|e| words.iter().map(|w| e.coeff(w)).collect())
        .collect();
    Ok(rank_in(spec, &rows, words.len())? == a.len())
}
