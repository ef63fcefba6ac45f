//! Yang–Baxter verification, grade by grade: a structural sum over the
//! t-coefficients and an independent brute-force triple product.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::algebra::{Algebra, AlgebraElement, CartanMonomial, Measure, TensorElement, Truncation};
use crate::error::{Error, Result};
use crate::freealg::{multidegrees_of_grade, words_of, FreeElement, Side, Word};
use crate::rmatrix::{mirror_t, MirrorT, RMatrix};
use crate::scalars::Scalar;

/// Outcome at one grade (ℓ, n): ℓ negative letters in slot 1, n positive
/// letters in slot 3.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GradeResult {
    pub l: i64,
    pub n: i64,
    pub nonzero: usize,
    pub first_residual: Option<String>,
}

impl GradeResult {
    pub fn pass(&self) -> bool {
        self.nonzero == 0
    }
}

#[derive(Clone, Debug)]
pub struct YBReport {
    pub method: &'static str,
    pub grades: Vec<GradeResult>,
}

impl YBReport {
    pub fn pass(&self) -> bool {
        self.grades.iter().all(|g| g.pass())
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "method": self.method,
            "pass": self.pass(),
            "grades": self.grades.iter().map(|g| serde_json::json!({
                "grade": [g.l, g.n],
                "pass": g.pass(),
                "nonzero_terms": g.nonzero,
                "first_residual": g.first_residual,
            })).collect::<Vec<_>>(),
        })
    }

    pub fn text(&self) -> String {
        let mut s = format!(
            "{} check: {}\n",
            self.method,
            if self.pass() { "pass" } else { "FAIL" }
        );
        for g in &self.grades {
            s.push_str(&format!(
                "  ({},{}) {}",
                g.l,
                g.n,
                if g.pass() {
                    "0".to_string()
                } else {
                    format!("{} residual terms", g.nonzero)
                }
            ));
            if let Some(r) = &g.first_residual {
                s.push_str(&format!(", e.g. {r}"));
            }
            s.push('\n');
        }
        s
    }

    pub fn failing(&self) -> Vec<(i64, i64)> {
        self.grades
            .iter()
            .filter(|g| !g.pass())
            .map(|g| (g.l, g.n))
            .collect()
    }
}

pub(crate) fn algebra_for(r: &RMatrix) -> Algebra {
    Algebra::new(&r.spec).with_ideal(r.ideal.clone())
}

fn basis_of_grade(r: &RMatrix, side: Side, g: usize) -> Result<Vec<Word>> {
    let mut out = Vec::new();
    for d in multidegrees_of_grade(g as u32, r.spec.rank()) {
        match &r.ideal {
            Some(i) => out.extend(i.normal_words(side, &d)?),
            None => out.extend(words_of(&d, r.spec.generators())),
        }
    }
    Ok(out)
}

fn reduce_free(r: &RMatrix, x: FreeElement) -> Result<FreeElement> {
    match &r.ideal {
        Some(i) => i.reduce(&x),
        None => Ok(x),
    }
}

fn weight_of_word(r: &RMatrix, w: &Word) -> Vec<i32> {
    let mut v = vec![0; r.spec.rank()];
    for &l in w.letters() {
        v[r.spec.index(l)] += 1;
    }
    v
}

type SlotKey = (Word, Word);

/// Σ_m Σ c_{b,β} [e_{−a}e_{−b} ⊗ t_a K'^{-1}_β t^{γ′} ⊗ e_β e_{γ′}
///                − e_{−b}e_{−a} ⊗ t^{γ′} K_b t_a ⊗ e_{γ′} e_β]
/// at one grade, keyed by the outer words.
fn structural_grade(
    r: &RMatrix,
    alg: &Algebra,
    mirror: &MirrorT,
    l: usize,
    n: usize,
) -> Result<BTreeMap<SlotKey, AlgebraElement>> {
    let mut acc: BTreeMap<SlotKey, AlgebraElement> = BTreeMap::new();
    let mut add = |s1: &FreeElement, mid: &AlgebraElement, s3: &FreeElement| {
        for (w1, c1) in s1.terms() {
            for (w3, c3) in s3.terms() {
                let e = acc.entry((w1.clone(), w3.clone())).or_default();
                *e = e.add(&mid.scale(&c1.mul(c3)));
            }
        }
    };
    for m in 0..=l.min(n) {
        let la = basis_of_grade(r, Side::Negative, l - m)?;
        let lb = basis_of_grade(r, Side::Negative, m)?;
        let ub = basis_of_grade(r, Side::Positive, m)?;
        let ug = basis_of_grade(r, Side::Positive, n - m)?;
        for b in &lb {
            for beta in &ub {
                let c = r.t.coeff(b, beta);
                if c.is_zero() {
                    continue;
                }
                let kp = alg.cartan(CartanMonomial::kp_weight(
                    &weight_of_word(r, beta)
                        .iter()
                        .map(|x| -x)
                        .collect::<Vec<_>>(),
                ));
                let kb = alg.cartan(CartanMonomial::k_weight(&weight_of_word(r, b)));
                for a in &la {
                    let ta = alg.from_free(r.t.get(a).unwrap());
                    for g in &ug {
                        let tg = alg.from_free(&mirror.get(g));
                        let neg = |w: Word| FreeElement::word(Side::Negative, w, Scalar::one());
                        let pos = |w: Word| FreeElement::word(Side::Positive, w, Scalar::one());
                        let mid = alg.mul(&alg.mul(&ta, &kp), &tg).scale(&c);
                        let s1 = reduce_free(r, neg(a.concat(b)))?;
                        let s3 = reduce_free(r, pos(beta.concat(g)))?;
                        add(&s1, &mid, &s3);
                        let mid = alg.mul(&alg.mul(&tg, &kb), &ta).scale(&c.neg());
                        let s1 = reduce_free(r, neg(b.concat(a)))?;
                        let s3 = reduce_free(r, pos(g.concat(beta)))?;
                        add(&s1, &mid, &s3);
                    }
                }
            }
        }
    }
    let mut out = BTreeMap::new();
    for (k, v) in acc {
        let v = alg.reduce(&v)?;
        if !v.is_zero() {
            out.insert(k, v);
        }
    }
    Ok(out)
}

pub fn yb_check_structural(r: &RMatrix, lmax: usize, nmax: usize) -> Result<YBReport> {
    if lmax.max(nmax) > r.t.max_grade {
        return Err(Error::Truncation(format!(
            "R covers grades <= {}, YB check needs {}",
            r.t.max_grade,
            lmax.max(nmax)
        )));
    }
    let alg = algebra_for(r);
    let mirror = mirror_t(&r.t);
    let pairs: Vec<(usize, usize)> = (0..=lmax)
        .flat_map(|l| (0..=nmax).map(move |n| (l, n)))
        .collect();
    let gens = r.spec.generators().to_vec();
    let grades = pairs
        .par_iter()
        .map(|&(l, n)| {
            let res = structural_grade(r, &alg, &mirror, l, n)?;
            Ok(GradeResult {
                l: l as i64,
                n: n as i64,
                nonzero: res.len(),
                first_residual: res.iter().next().map(|((a, g), v)| {
                    format!(
                        "{} ⊗ [{}] ⊗ {}",
                        a.render(Side::Negative),
                        v.render(&gens),
                        g.render(Side::Positive)
                    )
                }),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(YBReport {
        method: "structural",
        grades,
    })
}

/// R₁₂R₁₃R₂₃ − R₂₃R₁₃R₁₂ computed directly, R⁰ handled by conjugation.
pub fn yb_check_bruteforce(r: &RMatrix, k: usize) -> Result<YBReport> {
    if k > r.truncation {
        return Err(Error::Truncation(format!(
            "R is truncated at {}, asked for {k}",
            r.truncation
        )));
    }
    let alg = algebra_for(r);
    let rank = r.spec.rank();
    let trunc =
        Truncation::none()
            .with(0, Measure::NegLen, k as i64)
            .with(2, Measure::PosLen, k as i64);
    let r12 = r.tensor.embed(3, &[0, 1], rank);
    let r13 = r.tensor.embed(3, &[0, 2], rank);
    let r23 = r.tensor.embed(3, &[1, 2], rank);
    let lhs = alg.prefixed_mul(&alg.prefixed_mul(&r12, &r13, &trunc)?, &r23, &trunc)?;
    let rhs = alg.prefixed_mul(&alg.prefixed_mul(&r23, &r13, &trunc)?, &r12, &trunc)?;
    debug_assert_eq!(lhs.prefix, rhs.prefix);
    let diff = alg.tensor_reduce(&lhs.body.sub(&rhs.body)?)?;
    Ok(YBReport {
        method: "bruteforce",
        grades: group_by_grade(&diff, 0, k as i64, r.spec.generators()),
    })
}

/// Buckets residual terms by (−Z(slot 1), Z(slot 3)); terms outside
/// `lo..=hi` are beyond the exact range and ignored.
pub(crate) fn group_by_grade(
    diff: &TensorElement,
    lo: i64,
    hi: i64,
    gens: &[u16],
) -> Vec<GradeResult> {
    let mut grades: BTreeMap<(i64, i64), GradeResult> = BTreeMap::new();
    for l in lo..=hi {
        for n in lo..=hi {
            grades.insert(
                (l, n),
                GradeResult {
                    l,
                    n,
                    nonzero: 0,
                    first_residual: None,
                },
            );
        }
    }
    for (key, c) in diff.terms() {
        let Some(g) = grades.get_mut(&(-key[0].z_grade(), key[2].z_grade())) else {
            continue;
        };
        g.nonzero += 1;
        if g.first_residual.is_none() {
            let slots: Vec<String> = key.iter().map(|t| t.render(gens)).collect();
            g.first_residual = Some(format!("({c}) {}", slots.join(" ⊗ ")));
        }
    }
    grades.into_values().collect()
}
