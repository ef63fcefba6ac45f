//! The standard R-matrix: the t-coefficient recursion solved grade by grade,
//! obstruction detection, and assembly of the truncated series.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use rayon::prelude::*;
use serde_json::{json, Value};

use crate::algebra::{Algebra, PrefixedTensor, TensorElement};
use crate::error::{Error, Obstruction, Result};
use crate::exact::{nullspace_and_det, solve_in};
use crate::freealg::{
    multidegrees_of_grade, words_of, AlgebraSpec, FreeElement, Letter, Side, Word,
};
use crate::linalg::determinant;
use crate::qdiff::{derivative_word, is_c_closed, DerivativeKind};
use crate::quotient::ObstructionIdeal;
use crate::scalars::{parse_scalar, Scalar};

/// Which of the two equivalent recursions produced a table.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Direction {
    /// ∂⃗_{−γ} t_{α₁…α_ℓ} = δ^γ_{α₁} t_{α₂…α_ℓ}
    Left,
    /// t_{α₁…α_ℓ} ⃖∂_{−γ} = t_{α₁…α_{ℓ−1}} δ^γ_{α_ℓ}
    Right,
}

impl Direction {
    fn kind(self) -> DerivativeKind {
        match self {
            Direction::Left => DerivativeKind::LeftMinus,
            Direction::Right => DerivativeKind::RightMinus,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Provenance {
    Unique,
    /// Unique in the quotient; the stored value is the normal-form
    /// representative.
    UniqueModuloQuotient,
}

impl Provenance {
    pub fn label(self) -> &'static str {
        match self {
            Provenance::Unique => "unique",
            Provenance::UniqueModuloQuotient => "unique-modulo-quotient",
        }
    }
}

/// t_{(α)} for every lower word (α) through the covered grade. Grade 0 holds
/// t_∅ = 1.
#[derive(Clone, Debug)]
pub struct TCoefficients {
    pub direction: Direction,
    pub max_grade: usize,
    pub table: BTreeMap<Word, FreeElement>,
    /// Indexed by grade.
    pub provenance: Vec<Provenance>,
}

impl TCoefficients {
    pub fn get(&self, lower: &Word) -> Option<&FreeElement> {
        self.table.get(lower)
    }

    /// t^{(α′)}_{(α)}.
    pub fn coeff(&self, lower: &Word, upper: &Word) -> Scalar {
        self.table
            .get(lower)
            .map(|t| t.coeff(upper))
            .unwrap_or_else(Scalar::zero)
    }

    /// Same coefficients, ignoring which recursion produced them.
    pub fn same_table(&self, other: &TCoefficients) -> bool {
        self.max_grade == other.max_grade && self.table == other.table
    }
}

/// Basis words of the quotient (or all words) at multidegree `d`.
fn basis(
    ideal: Option<&ObstructionIdeal>,
    side: Side,
    spec: &AlgebraSpec,
    d: &[u32],
) -> Result<Vec<Word>> {
    match ideal {
        Some(i) => i.normal_words(side, d),
        None => Ok(words_of(d, spec.generators())),
    }
}

fn reduce(ideal: Option<&ObstructionIdeal>, x: FreeElement) -> Result<FreeElement> {
    match ideal {
        Some(i) => i.reduce(&x),
        None => Ok(x),
    }
}

pub fn solve_t(
    spec: &AlgebraSpec,
    k: usize,
    ideal: Option<&ObstructionIdeal>,
) -> Result<TCoefficients> {
    solve_recursion(spec, k, ideal, Direction::Left)
}

pub fn solve_t_right(
    spec: &AlgebraSpec,
    k: usize,
    ideal: Option<&ObstructionIdeal>,
) -> Result<TCoefficients> {
    solve_recursion(spec, k, ideal, Direction::Right)
}

pub fn solve_recursion(
    spec: &AlgebraSpec,
    k: usize,
    ideal: Option<&ObstructionIdeal>,
    dir: Direction,
) -> Result<TCoefficients> {
    if k < 1 {
        return Err(Error::Precondition(
            "truncation grade must be at least 1".into(),
        ));
    }
    let ideal = ideal.filter(|i| !i.is_empty());
    let mut table = BTreeMap::new();
    table.insert(Word::empty(), FreeElement::one(Side::Positive));
    let mut provenance = vec![Provenance::Unique];
    for grade in 1..=k {
        let blocks: Vec<Result<Vec<(Word, FreeElement)>>> =
            multidegrees_of_grade(grade as u32, spec.rank())
                .into_par_iter()
                .map(|d| solve_block(spec, ideal, dir, grade, &d, &table))
                .collect();
        for b in blocks {
            table.extend(b?);
        }
        let modded = ideal.is_some_and(|i| {
            i.generators()
                .iter()
                .filter_map(|g| g.terms().keys().next())
                .any(|w| w.len() <= grade)
        });
        provenance.push(if modded {
            Provenance::UniqueModuloQuotient
        } else {
            Provenance::Unique
        });
    }
    Ok(TCoefficients {
        direction: dir,
        max_grade: k,
        table,
        provenance,
    })
}

/// The matrix of v ↦ reduce(∂_γ v) on the upper basis at `d`, with rows
/// grouped by γ.
struct Block {
    upper: Vec<Word>,
    /// (γ, basis at d − e_γ, row offset)
    targets: Vec<(Letter, Vec<Word>, usize)>,
    matrix: Vec<Vec<Scalar>>,
}

fn derivative_block(
    spec: &AlgebraSpec,
    ideal: Option<&ObstructionIdeal>,
    kind: DerivativeKind,
    d: &[u32],
) -> Result<Block> {
    let gens = spec.generators();
    let upper = basis(ideal, Side::Positive, spec, d)?;
    let mut targets = Vec::new();
    let mut nrows = 0;
    for (i, &g) in gens.iter().enumerate() {
        if d[i] == 0 {
            continue;
        }
        let mut dd = d.to_vec();
        dd[i] -= 1;
        let b = basis(ideal, Side::Positive, spec, &dd)?;
        let n = b.len();
        targets.push((g, b, nrows));
        nrows += n;
    }
    let mut matrix = vec![vec![Scalar::zero(); upper.len()]; nrows];
    for (g, b, off) in &targets {
        let pos: HashMap<&Word, usize> = b.iter().enumerate().map(|(i, w)| (w, i)).collect();
        for (j, w) in upper.iter().enumerate() {
            let dw = FreeElement::from_terms(Side::Positive, derivative_word(spec, kind, *g, w));
            for (u, c) in reduce(ideal, dw)?.terms() {
                matrix[off + pos[u]][j] = c.clone();
            }
        }
    }
    Ok(Block {
        upper,
        targets,
        matrix,
    })
}

fn solve_block(
    spec: &AlgebraSpec,
    ideal: Option<&ObstructionIdeal>,
    dir: Direction,
    grade: usize,
    d: &[u32],
    table: &BTreeMap<Word, FreeElement>,
) -> Result<Vec<(Word, FreeElement)>> {
    let kind = dir.kind();
    let block = derivative_block(spec, ideal, kind, d)?;
    let lower = basis(ideal, Side::Negative, spec, d)?;
    let lower_pos: HashMap<&Word, usize> = lower.iter().enumerate().map(|(i, w)| (w, i)).collect();
    let nrows = block.matrix.len();
    // rhs[row][u]: Σ_{u'} [u] reduce(e_{−γ}e_{−u'}) · t_{u'}, or e_{−u'}e_{−γ}.
    let mut rhs = vec![vec![Scalar::zero(); lower.len()]; nrows];
    for (g, b, off) in &block.targets {
        let i = spec.index(*g);
        let mut dd = d.to_vec();
        dd[i] -= 1;
        let pos: HashMap<&Word, usize> = b.iter().enumerate().map(|(i, w)| (w, i)).collect();
        for up in basis(ideal, Side::Negative, spec, &dd)? {
            let w = match dir {
                Direction::Left => Word::letter(*g).concat(&up),
                Direction::Right => up.concat(&Word::letter(*g)),
            };
            let r = reduce(ideal, FreeElement::word(Side::Negative, w, Scalar::one()))?;
            let t = &table[&up];
            for (u, c) in r.terms() {
                let col = lower_pos[u];
                for (v, x) in t.terms() {
                    let row = off + pos[v];
                    rhs[row][col] = rhs[row][col].add(&c.mul(x));
                }
            }
        }
    }
    let sol = solve_in(spec, &block.matrix, block.upper.len(), &rhs)?;
    if !sol.injective() || sol.x.iter().any(|x| x.is_none()) {
        let (ns, _) = nullspace_and_det(spec, &block.matrix, block.upper.len(), false)?;
        if ns.is_empty() {
            return Err(Error::Inconsistent(d.to_vec()));
        }
        let constants: Vec<FreeElement> = ns
            .into_iter()
            .map(|v| FreeElement::from_terms(Side::Positive, block.upper.iter().cloned().zip(v)))
            .collect();
        let mut c_closed = Vec::new();
        for c in &constants {
            let mut closed = true;
            for (col, _) in lower.iter().enumerate() {
                let mut y = BTreeMap::new();
                for (g, b, off) in &block.targets {
                    let comp = FreeElement::from_terms(
                        Side::Positive,
                        b.iter()
                            .enumerate()
                            .map(|(i, w)| (w.clone(), rhs[off + i][col].clone())),
                    );
                    y.insert(*g, comp);
                }
                closed &= is_c_closed(spec, kind, c, &y)?;
            }
            c_closed.push(closed);
        }
        let det = if block.matrix.len() == block.upper.len() {
            determinant(block.matrix.clone()).to_string()
        } else {
            String::new()
        };
        return Err(Error::ObstructionDetected(Box::new(Obstruction {
            grade,
            multidegree: d.to_vec(),
            constants,
            c_closed,
            determinant: det,
        })));
    }
    Ok(lower
        .iter()
        .enumerate()
        .map(|(col, u)| {
            let x = sol.x[col].as_ref().unwrap();
            let t = FreeElement::from_terms(
                Side::Positive,
                block.upper.iter().cloned().zip(x.iter().cloned()),
            );
            (u.clone(), t)
        })
        .collect())
}

/// The negative-side table t^{(γ)} = Σ_{(γ′)} t^{(γ)}_{(γ′)} e_{−γ′}, keyed by
/// the upper word.
#[derive(Clone, Debug)]
pub struct MirrorT {
    pub max_grade: usize,
    pub table: BTreeMap<Word, FreeElement>,
}

pub fn mirror_t(t: &TCoefficients) -> MirrorT {
    let mut table: BTreeMap<Word, FreeElement> = BTreeMap::new();
    for (lower, te) in &t.table {
        for (upper, c) in te.terms() {
            table
                .entry(upper.clone())
                .or_insert_with(|| FreeElement::zero(Side::Negative))
                .add_term(lower.clone(), c.clone());
        }
    }
    MirrorT {
        max_grade: t.max_grade,
        table,
    }
}

impl MirrorT {
    pub fn get(&self, upper: &Word) -> FreeElement {
        self.table
            .get(upper)
            .cloned()
            .unwrap_or_else(|| FreeElement::zero(Side::Negative))
    }
}

/// Checks ∂⃗_α t^{γ…} = δ^{γ₁}_α t^{γ₂…} (left) or
/// t^{…γ_n} ⃖∂_α = t^{…}δ^{γ_n}_α (right) on every upper basis word.
pub fn check_mirror_recursion(
    spec: &AlgebraSpec,
    m: &MirrorT,
    ideal: Option<&ObstructionIdeal>,
    dir: Direction,
) -> Result<bool> {
    let ideal = ideal.filter(|i| !i.is_empty());
    let kind = match dir {
        Direction::Left => DerivativeKind::LeftPlus,
        Direction::Right => DerivativeKind::RightPlus,
    };
    for grade in 1..=m.max_grade {
        for d in multidegrees_of_grade(grade as u32, spec.rank()) {
            for w in basis(ideal, Side::Positive, spec, &d)? {
                let tw = m.get(&w);
                for (i, &a) in spec.generators().iter().enumerate() {
                    if d[i] == 0 {
                        continue;
                    }
                    let lhs = reduce(ideal, crate::qdiff::derivative(spec, kind, a, &tw)?)?;
                    let mut dd = d.clone();
                    dd[i] -= 1;
                    let mut rhs = FreeElement::zero(Side::Negative);
                    for wp in basis(ideal, Side::Positive, spec, &dd)? {
                        let prod = match dir {
                            Direction::Left => Word::letter(a).concat(&wp),
                            Direction::Right => wp.concat(&Word::letter(a)),
                        };
                        let r = reduce(
                            ideal,
                            FreeElement::word(Side::Positive, prod, Scalar::one()),
                        )?;
                        let c = r.coeff(&w);
                        if !c.is_zero() {
                            rhs = rhs.add(&m.get(&wp).scale(&c))?;
                        }
                    }
                    if !lhs.sub(&rhs)?.is_zero() {
                        return Ok(false);
                    }
                }
            }
        }
    }
    Ok(true)
}

/// A truncated standard R-matrix R⁰·Σ e_{−(α)} ⊗ t_{(α)}.
#[derive(Clone, Debug)]
pub struct RMatrix {
    pub spec: AlgebraSpec,
    pub truncation: usize,
    pub t: TCoefficients,
    pub ideal: Option<Arc<ObstructionIdeal>>,
    pub tensor: PrefixedTensor,
}

pub fn assemble_r(
    spec: &AlgebraSpec,
    t: &TCoefficients,
    k: usize,
    ideal: Option<Arc<ObstructionIdeal>>,
) -> Result<RMatrix> {
    if k > t.max_grade {
        return Err(Error::Truncation(format!(
            "t covers grades <= {}, asked for {k}",
            t.max_grade
        )));
    }
    let alg = Algebra::new(spec);
    let mut body = TensorElement::zero(2);
    for (u, tu) in &t.table {
        if u.len() > k {
            continue;
        }
        let left = alg.from_free(&FreeElement::word(Side::Negative, u.clone(), Scalar::one()));
        let right = alg.from_free(tu);
        body = body.add(&TensorElement::elementary(&[left, right]))?;
    }
    Ok(RMatrix {
        spec: spec.clone(),
        truncation: k,
        t: t.clone(),
        ideal,
        tensor: PrefixedTensor {
            prefix: vec![(0, 1)],
            body,
        },
    })
}

/// Convenience: solve, optionally build the ideal, and assemble.
pub fn build_r(spec: &AlgebraSpec, k: usize, quotient: bool) -> Result<RMatrix> {
    let ideal = if quotient && k >= 2 {
        Some(Arc::new(ObstructionIdeal::build(spec, k)?))
    } else {
        None
    };
    let t = solve_t(spec, k, ideal.as_deref())?;
    assemble_r(spec, &t, k, ideal)
}

fn word_json(w: &Word) -> Value {
    Value::Array(w.letters().iter().map(|&l| json!(l)).collect())
}

fn word_from_json(v: &Value) -> Result<Word> {
    let arr = v
        .as_array()
        .ok_or_else(|| Error::Parse("word must be an array of generator indices".into()))?;
    let letters = arr
        .iter()
        .map(|x| {
            x.as_u64()
                .and_then(|n| Letter::try_from(n).ok())
                .ok_or_else(|| Error::Parse(format!("bad letter {x}")))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Word::new(&letters))
}

impl RMatrix {
    pub fn to_json(&self) -> Value {
        let gens = self.spec.generators();
        let mut q = serde_json::Map::new();
        for &a in gens {
            for &b in gens {
                q.insert(format!("{a},{b}"), json!(self.spec.q(a, b).to_string()));
            }
        }
        let mut terms = Vec::new();
        for (lower, tu) in &self.t.table {
            for (upper, c) in tu.terms() {
                terms.push(json!({
                    "lower_word": word_json(lower),
                    "upper_word": word_json(upper),
                    "coeff": c.to_string(),
                }));
            }
        }
        json!({
            "generators": gens,
            "qmatrix": q,
            "truncation": self.truncation,
            "direction": match self.t.direction { Direction::Left => "left", Direction::Right => "right" },
            "provenance": self.t.provenance.iter().map(|p| p.label()).collect::<Vec<_>>(),
            "ideal": self.ideal.as_ref().map(|i| crate::report::ideal_json(i)),
            "terms": terms,
        })
    }

    /// Reads back the coefficient table written by [`RMatrix::to_json`].
    pub fn table_from_json(v: &Value) -> Result<BTreeMap<Word, FreeElement>> {
        let terms = v["terms"]
            .as_array()
            .ok_or_else(|| Error::Parse("missing terms".into()))?;
        let mut table: BTreeMap<Word, FreeElement> = BTreeMap::new();
        for t in terms {
            let lower = word_from_json(&t["lower_word"])?;
            let upper = word_from_json(&t["upper_word"])?;
            let c = parse_scalar(
                t["coeff"]
                    .as_str()
                    .ok_or_else(|| Error::Parse("coeff must be a string".into()))?,
            )?;
            table
                .entry(lower)
                .or_insert_with(|| FreeElement::zero(Side::Positive))
                .add_term(upper, c);
        }
        Ok(table)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qdiff::unit_equivalent;
    use crate::scalars::{Specialization, Symbol};

    fn w(l: &[Letter]) -> Word {
        Word::new(l)
    }

    #[test]
    fn grade_two_closed_forms() {
        let s = AlgebraSpec::symbolic(&[1, 2]).unwrap();
        let t = solve_t(&s, 2, None).unwrap();
        let a = Scalar::one()
            .sub(&Scalar::q(1, 2).mul(&Scalar::q(2, 1)).inv().unwrap())
            .inv()
            .unwrap();
        assert_eq!(t.coeff(&w(&[1, 2]), &w(&[1, 2])), a);
        assert_eq!(
            t.coeff(&w(&[1, 2]), &w(&[2, 1])),
            Scalar::q(2, 1).inv().unwrap().neg().mul(&a)
        );
        let b = Scalar::one()
            .add(&Scalar::q(1, 1).inv().unwrap())
            .inv()
            .unwrap();
        assert_eq!(t.coeff(&w(&[1, 1]), &w(&[1, 1])), b);
        assert_eq!(t.coeff(&w(&[1]), &w(&[1])), Scalar::one());
    }

    #[test]
    fn left_and_right_agree_generically() {
        let s = AlgebraSpec::symbolic(&[1, 2]).unwrap();
        let l = solve_t(&s, 3, None).unwrap();
        let r = solve_t_right(&s, 3, None).unwrap();
        assert!(l.same_table(&r));
        let m = mirror_t(&l);
        assert!(check_mirror_recursion(&s, &m, None, Direction::Left).unwrap());
        assert!(check_mirror_recursion(&s, &m, None, Direction::Right).unwrap());
    }

    #[test]
    fn square_obstruction() {
        let sp = Specialization::new()
            .with(Symbol::Pair(1, 1), &Scalar::from_int(-1))
            .unwrap();
        let s = AlgebraSpec::symbolic(&[1])
            .unwrap()
            .specialize(&sp)
            .unwrap();
        match solve_t(&s, 2, None) {
            Err(Error::ObstructionDetected(o)) => {
                assert_eq!(o.grade, 2);
                assert_eq!(
                    o.constants,
                    vec![FreeElement::word(Side::Positive, w(&[1, 1]), Scalar::one())]
                );
                assert_eq!(o.c_closed, vec![false]);
                assert!(unit_equivalent(
                    &parse_scalar(&o.determinant).unwrap(),
                    &Scalar::zero()
                ));
            }
            other => panic!("expected obstruction, got {other:?}"),
        }
        let r = build_r(&s, 4, true).unwrap();
        assert_eq!(r.t.provenance[2], Provenance::UniqueModuloQuotient);
        assert!(r.t.get(&w(&[1, 1])).is_none());
    }

    #[test]
    fn json_round_trip() {
        let s = AlgebraSpec::symbolic(&[1, 2]).unwrap();
        let r = build_r(&s, 3, false).unwrap();
        let v = r.to_json();
        let text = serde_json::to_string(&v).unwrap();
        let back: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(RMatrix::table_from_json(&back).unwrap(), r.t.table);
    }
}
