//! First-order deformations R + εR₁ driven by e_σ ⊗ e_{−ρ}, and
//! feasibility reports for the three driving types that do not survive.

use rayon::prelude::*;
use serde_json::{json, Value};

use crate::algebra::{
    Algebra, CartanMonomial, CartanRelations, Measure, PrefixedTensor, TensorElement, Truncation,
};
use crate::error::{Error, Result};
use crate::exact::is_zero_in;
use crate::freealg::{AlgebraSpec, Letter, Side};
use crate::rmatrix::{build_r, RMatrix};
use crate::scalars::Scalar;
use crate::yangbaxter::{group_by_grade, GradeResult, YBReport};

fn is_one_in(spec: &AlgebraSpec, x: &Scalar) -> bool {
    is_zero_in(spec, &x.sub(&Scalar::one())).unwrap_or(false)
}

/// Generators β with f(β) ≠ 1.
fn failing_betas(spec: &AlgebraSpec, f: impl Fn(Letter) -> Scalar) -> Vec<Letter> {
    spec.generators()
        .iter()
        .copied()
        .filter(|&b| !is_one_in(spec, &f(b)))
        .collect()
}

fn check_letter(spec: &AlgebraSpec, a: Letter) -> Result<()> {
    if spec.contains(a) {
        Ok(())
    } else {
        Err(Error::Invalid(format!("{a} is not a generator")))
    }
}

/// q_{βρ} q_{σβ} = 1 for every generator β.
pub fn pairing_admissible(spec: &AlgebraSpec, sigma: Letter, rho: Letter) -> bool {
    failing_betas(spec, |b| spec.q(b, rho).mul(spec.q(sigma, b))).is_empty()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AdmissiblePair {
    pub sigma: Letter,
    pub rho: Letter,
    /// K = K'_ρ, the Cartan factor of the driving term.
    pub k_cartan: CartanMonomial,
    /// ρ = σ quommuting with every generator; allowed by the pairing test
    /// but excluded by nondegeneracy.
    pub degenerate: bool,
}

impl AdmissiblePair {
    pub fn new(spec: &AlgebraSpec, sigma: Letter, rho: Letter) -> Result<Self> {
        check_letter(spec, sigma)?;
        check_letter(spec, rho)?;
        if !pairing_admissible(spec, sigma, rho) {
            return Err(Error::Precondition(format!(
                "inadmissible pair (σ={sigma}, ρ={rho})"
            )));
        }
        Ok(Self::forced(spec, sigma, rho))
    }

    /// Skips the admissibility test; used for fault injection.
    pub fn forced(spec: &AlgebraSpec, sigma: Letter, rho: Letter) -> Self {
        AdmissiblePair {
            sigma,
            rho,
            k_cartan: CartanMonomial::kp(spec.rank(), spec.index(rho), 1),
            degenerate: sigma == rho && spec.degenerate_generators().contains(&rho),
        }
    }

    pub fn to_json(&self) -> Value {
        json!({ "sigma": self.sigma, "rho": self.rho, "degenerate": self.degenerate })
    }
}

/// All ordered pairs passing the pairing-level test.
pub fn find_admissible_pairs(spec: &AlgebraSpec) -> Vec<AdmissiblePair> {
    let gens = spec.generators();
    let mut out = Vec::new();
    for &s in gens {
        for &r in gens {
            if pairing_admissible(spec, s, r) {
                out.push(AdmissiblePair::forced(spec, s, r));
            }
        }
    }
    out
}

/// K'_ρ K_σ = 1 for each admissible pair, as K_σ ↦ K'_ρ^{-1}. Pairs that
/// fail the pairing test get no relation: it would not be central.
fn relations_for(
    spec: &AlgebraSpec,
    pairs: &[(AdmissiblePair, Scalar)],
) -> Result<CartanRelations> {
    let n = spec.rank();
    let mut rel = CartanRelations::none();
    let mut seen = Vec::new();
    for (p, _) in pairs {
        if !pairing_admissible(spec, p.sigma, p.rho) || seen.contains(&(p.sigma, p.rho)) {
            continue;
        }
        if seen.iter().any(|&(s, _)| s == p.sigma) {
            return Err(Error::Invalid(format!(
                "two pairs share σ = {}; their Cartan relations conflict",
                p.sigma
            )));
        }
        seen.push((p.sigma, p.rho));
        rel = rel.substitute(
            spec.index(p.sigma),
            CartanMonomial::kp(n, spec.index(p.rho), -1),
        );
    }
    Ok(rel)
}

/// A first-order deformation: the base R together with R₁, complete
/// through `max_grade` (grade of a term: −Z of its first slot).
#[derive(Clone, Debug)]
pub struct DeformedR {
    pub base: RMatrix,
    pub pairs: Vec<(AdmissiblePair, Scalar)>,
    pub r1: PrefixedTensor,
    pub max_grade: usize,
    pub relations: CartanRelations,
}

impl DeformedR {
    pub fn algebra(&self) -> Algebra {
        Algebra::new(&self.base.spec)
            .with_ideal(self.base.ideal.clone())
            .with_relations(self.relations.clone())
    }

    /// Terms of R₁ at grade `g` (−1 is the driving term).
    pub fn grade_part(&self, g: i64) -> TensorElement {
        self.r1.body.filter(|k| -k[0].z_grade() == g)
    }

    pub fn to_json(&self) -> Value {
        let gens = self.base.spec.generators();
        let terms: Vec<Value> = self
            .r1
            .body
            .terms()
            .iter()
            .map(|(k, c)| {
                json!({
                    "grade": -k[0].z_grade(),
                    "slots": k.iter().map(|t| t.render(gens)).collect::<Vec<_>>(),
                    "coeff": c.to_string(),
                })
            })
            .collect();
        json!({
            "base": {
                "generators": gens,
                "truncation": self.base.truncation,
                "direction": format!("{:?}", self.base.t.direction).to_lowercase(),
                "quotient": self.base.ideal.is_some(),
            },
            "pairs": self.pairs.iter().map(|(p, c)| {
                let mut v = p.to_json();
                v["coeff"] = json!(c.to_string());
                v
            }).collect::<Vec<_>>(),
            "prefix": "R0_12",
            "max_grade": self.max_grade,
            "admissibility": "pairing-level: tested against all generator weights",
            "r1": terms,
        })
    }
}

/// R₁ = Σ C·(R(Ke_σ⊗Ke_{−ρ}) − (Ke_{−ρ}⊗Ke_σ)R) through grade k.
pub fn deform_r_combination(
    r: &RMatrix,
    pairs: &[(AdmissiblePair, Scalar)],
    k: usize,
) -> Result<DeformedR> {
    if k + 1 > r.truncation {
        return Err(Error::Truncation(format!(
            "R₁ through grade {k} needs R through {}, have {}",
            k + 1,
            r.truncation
        )));
    }
    let relations = relations_for(&r.spec, pairs)?;
    let alg = Algebra::new(&r.spec)
        .with_ideal(r.ideal.clone())
        .with_relations(relations.clone());
    let trunc = Truncation::none().with(0, Measure::NegZ, k as i64);
    let body = &r.tensor.body;
    let mut r1 = TensorElement::zero(2);
    for (p, c) in pairs {
        if c.is_zero() {
            continue;
        }
        let kk = alg.cartan(p.k_cartan.clone());
        let ks = alg.mul(&kk, &alg.generator(Side::Positive, p.sigma));
        let kr = alg.mul(&kk, &alg.generator(Side::Negative, p.rho));
        let x = TensorElement::elementary(&[ks.clone(), kr.clone()]);
        let y = TensorElement::elementary(&[kr, ks]);
        let bx = alg.tensor_mul(body, &x, &trunc)?;
        let yb = alg.tensor_mul(&alg.conj_r0(&y, 0, 1), body, &trunc)?;
        r1 = r1.add(&bx.sub(&yb)?.scale(c))?;
    }
    Ok(DeformedR {
        base: r.clone(),
        pairs: pairs.to_vec(),
        r1: PrefixedTensor {
            prefix: vec![(0, 1)],
            body: alg.tensor_reduce(&r1)?,
        },
        max_grade: k,
        relations,
    })
}

pub fn deform_r(r: &RMatrix, pair: &AdmissiblePair, k: usize) -> Result<DeformedR> {
    if !pairing_admissible(&r.spec, pair.sigma, pair.rho) {
        return Err(Error::Precondition(format!(
            "inadmissible pair (σ={}, ρ={})",
            pair.sigma, pair.rho
        )));
    }
    deform_r_combination(r, &[(pair.clone(), Scalar::one())], k)
}

/// Σ over the three slots of (R₁)_{ij} inserted into R₁₂R₁₃R₂₃, minus the
/// same for R₂₃R₁₃R₁₂.
fn first_order_residual(
    alg: &Algebra,
    r: &RMatrix,
    r1: &PrefixedTensor,
    k: i64,
) -> Result<TensorElement> {
    let rank = r.spec.rank();
    let base = |s: &[usize]| r.tensor.embed(3, s, rank);
    let def = |s: &[usize]| r1.embed(3, s, rank);
    let (r12, r13, r23) = (base(&[0, 1]), base(&[0, 2]), base(&[1, 2]));
    let (s12, s13, s23) = (def(&[0, 1]), def(&[0, 2]), def(&[1, 2]));
    // Slot 1 loses at most one unit of −Z and slot 3 at most one unit of Z
    // from the single R₁ factor.
    let trunc = Truncation::none()
        .with(0, Measure::NegZ, k + 1)
        .with(2, Measure::ZGrade, k + 1);
    let triples = [
        (&s12, &r13, &r23, false),
        (&r12, &s13, &r23, false),
        (&r12, &r13, &s23, false),
        (&s23, &r13, &r12, true),
        (&r23, &s13, &r12, true),
        (&r23, &r13, &s12, true),
    ];
    let parts = triples
        .par_iter()
        .map(|(a, b, c, neg)| {
            let p = alg.prefixed_mul(&alg.prefixed_mul(a, b, &trunc)?, c, &trunc)?;
            Ok((
                p.prefix,
                if *neg {
                    p.body.scale(&Scalar::from_int(-1))
                } else {
                    p.body
                },
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut sum = TensorElement::zero(3);
    for (prefix, body) in parts {
        debug_assert_eq!(prefix, vec![(0, 1), (0, 2), (1, 2)]);
        sum = sum.add(&body)?;
    }
    alg.tensor_reduce(&sum)
}

/// The order-ε part of the Yang–Baxter relation, grades (−1,−1) … (k,k).
pub fn verify_first_order_yb(r: &RMatrix, d: &DeformedR, k: usize) -> Result<YBReport> {
    if k > d.max_grade || k + 1 > r.truncation {
        return Err(Error::Truncation(format!(
            "first-order check through {k} needs R₁ through {k} and R through {}",
            k + 1
        )));
    }
    let diff = first_order_residual(&d.algebra(), r, &d.r1, k as i64)?;
    Ok(YBReport {
        method: "first-order",
        grades: group_by_grade(&diff, -1, k as i64, r.spec.generators()),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DrivingKind {
    MinusPlus,
    PlusPlus,
    MinusMinus,
}

impl DrivingKind {
    pub fn label(self) -> &'static str {
        match self {
            DrivingKind::MinusPlus => "minus-plus",
            DrivingKind::PlusPlus => "plus-plus",
            DrivingKind::MinusMinus => "minus-minus",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "minus-plus" => Ok(DrivingKind::MinusPlus),
            "plus-plus" => Ok(DrivingKind::PlusPlus),
            "minus-minus" => Ok(DrivingKind::MinusMinus),
            _ => Err(Error::Parse(format!(
                "unknown driving type {s:?} (minus-plus, plus-plus, minus-minus)"
            ))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Condition {
    pub name: String,
    pub statement: String,
    pub holds: bool,
    /// Generators β at which the condition fails.
    pub failing: Vec<Letter>,
    /// A consequence of the preceding conditions rather than a new one.
    pub implied: bool,
}

#[derive(Clone, Debug)]
pub struct RejectionReport {
    pub kind: DrivingKind,
    pub sigma: Letter,
    pub rho: Letter,
    pub conditions: Vec<Condition>,
    /// Driving-term residual at the lowest grades, when computed.
    pub computed: Vec<GradeResult>,
    pub rejected: bool,
    pub reason: String,
}

impl RejectionReport {
    pub fn to_json(&self) -> Value {
        json!({
            "kind": self.kind.label(),
            "sigma": self.sigma,
            "rho": self.rho,
            "conditions": self.conditions.iter().map(|c| json!({
                "name": c.name,
                "statement": c.statement,
                "holds": c.holds,
                "failing_beta": c.failing,
                "implied": c.implied,
            })).collect::<Vec<_>>(),
            "computed_residual": self.computed.iter().map(|g| json!({
                "grade": [g.l, g.n],
                "nonzero_terms": g.nonzero,
                "first": g.first_residual,
            })).collect::<Vec<_>>(),
            "rejected": self.rejected,
            "reason": self.reason,
        })
    }
}

/// Pairing q_{ab} written with β in one position.
fn qs(a: Letter, beta_first: bool) -> String {
    if beta_first {
        format!("q[β,{a}]")
    } else {
        format!("q[{a},β]")
    }
}

fn condition(
    spec: &AlgebraSpec,
    name: &str,
    statement: String,
    implied: bool,
    f: impl Fn(Letter) -> Scalar,
) -> Condition {
    let failing = failing_betas(spec, f);
    Condition {
        name: name.into(),
        statement,
        holds: failing.is_empty(),
        failing,
        implied,
    }
}

/// Evaluates, at pairing level, the necessary conditions for a driving
/// term of the given type, and reports why it is rejected.
pub fn check_rejected_types(
    spec: &AlgebraSpec,
    kind: DrivingKind,
    sigma: Letter,
    rho: Letter,
) -> Result<RejectionReport> {
    check_letter(spec, sigma)?;
    check_letter(spec, rho)?;
    match kind {
        DrivingKind::MinusPlus => Ok(minus_plus(spec, sigma, rho)),
        DrivingKind::PlusPlus => plus_plus(spec, sigma, rho, false),
        // Mirror image of plus-plus: transpose the pairings, swap σ and ρ.
        DrivingKind::MinusMinus => {
            let mut rep = plus_plus(&spec.transposed(), rho, sigma, true)?;
            rep.kind = DrivingKind::MinusMinus;
            rep.sigma = sigma;
            rep.rho = rho;
            Ok(rep)
        }
    }
}

fn minus_plus(spec: &AlgebraSpec, s: Letter, r: Letter) -> RejectionReport {
    let conditions = vec![
        condition(
            spec,
            "lowest grades, first index",
            format!("{} = {} for all β", qs(s, false), qs(r, false)),
            false,
            |b| spec.q(s, b).mul(spec.qinv(r, b)),
        ),
        condition(
            spec,
            "lowest grades, second index",
            format!("{} = {} for all β", qs(s, true), qs(r, true)),
            false,
            |b| spec.q(b, s).mul(spec.qinv(b, r)),
        ),
        condition(
            spec,
            "grade (1,1) cancellation",
            format!("{}·{} = 1 for all β", qs(r, false), qs(s, true)),
            false,
            |b| spec.q(r, b).mul(spec.q(b, s)),
        ),
        condition(
            spec,
            "ρ quommutes with every generator",
            format!("{}·{} = 1 for all β", qs(r, false), qs(r, true)),
            true,
            |b| spec.q(r, b).mul(spec.q(b, r)),
        ),
        condition(
            spec,
            "σ quommutes with every generator",
            format!("{}·{} = 1 for all β", qs(s, false), qs(s, true)),
            true,
            |b| spec.q(s, b).mul(spec.q(b, s)),
        ),
    ];
    let failed: Vec<&str> = conditions[..3]
        .iter()
        .filter(|c| !c.holds)
        .map(|c| c.name.as_str())
        .collect();
    let reason = if failed.is_empty() {
        debug_assert!(conditions[3].holds && conditions[4].holds);
        "the necessary conditions force e_ρ and e_σ to quommute with every generator \
         (e_ρe_β = q[ρ,β]e_βe_ρ, e_σe_β = q[σ,β]e_βe_σ), a degree of commutativity \
         excluded by nondegeneracy"
            .to_string()
    } else {
        format!("necessary condition(s) fail: {}", failed.join("; "))
    };
    RejectionReport {
        kind: DrivingKind::MinusPlus,
        sigma: s,
        rho: r,
        conditions,
        computed: Vec::new(),
        rejected: true,
        reason,
    }
}

/// Residual of the driving term R⁰(e_σ⊗e_ρ) alone at grades (−1,0),
/// (−1,1) and (0,1), with K_σK_ρ = 1 imposed.
fn plus_plus_residual(spec: &AlgebraSpec, s: Letter, r: Letter) -> Result<Vec<GradeResult>> {
    let n = spec.rank();
    let base = build_r(spec, 2, true)?;
    let rel =
        CartanRelations::none().substitute(spec.index(s), CartanMonomial::k(n, spec.index(r), -1));
    let alg = Algebra::new(spec)
        .with_ideal(base.ideal.clone())
        .with_relations(rel);
    let drive = PrefixedTensor {
        prefix: vec![(0, 1)],
        body: TensorElement::elementary(&[
            alg.generator(Side::Positive, s),
            alg.generator(Side::Positive, r),
        ]),
    };
    let diff = first_order_residual(&alg, &base, &drive, 1)?;
    Ok(group_by_grade(&diff, -1, 1, spec.generators())
        .into_iter()
        .filter(|g| matches!((g.l, g.n), (-1, 0) | (-1, 1) | (0, 1)))
        .collect())
}

fn plus_plus(spec: &AlgebraSpec, s: Letter, r: Letter, mirrored: bool) -> Result<RejectionReport> {
    // Statements are phrased in the caller's pairings, so the mirror flips
    // which index β occupies.
    let m = mirrored;
    let conditions = vec![
        condition(
            spec,
            "lowest grade (−1,0)",
            format!("{}·{} = 1 for all β", qs(s, m), qs(r, m)),
            false,
            |b| spec.q(s, b).mul(spec.q(r, b)),
        ),
        condition(
            spec,
            "grade (−1,1), alternative Cartan factor",
            format!(
                "{}·{} = 1 for all β (ρ quommuting; excluded by nondegeneracy, so S = R⁰)",
                qs(r, false),
                qs(r, true)
            ),
            false,
            |b| spec.q(r, b).mul(spec.q(b, r)),
        ),
        condition(
            spec,
            "grade (0,1), Cartan-only part",
            format!("{}·{} = 1 for all β", qs(s, !m), qs(r, !m)),
            false,
            |b| spec.q(b, s).mul(spec.q(b, r)),
        ),
    ];
    let (computed, reason, rejected) = if !conditions[0].holds {
        (Vec::new(), "lowest-grade condition fails".to_string(), true)
    } else if s == r {
        let rejected = !conditions[2].holds;
        let reason = if rejected {
            "grade (0,1) Cartan-only part does not cancel".to_string()
        } else {
            "pairing-level conditions hold; σ = ρ residual not computed".to_string()
        };
        (Vec::new(), reason, rejected)
    } else {
        let computed = plus_plus_residual(spec, s, r)?;
        let bad: Vec<String> = computed
            .iter()
            .filter(|g| !g.pass())
            .map(|g| format!("({},{})", g.l, g.n))
            .collect();
        if bad.is_empty() {
            (
                computed,
                "driving-term residual vanishes at the lowest grades; not rejected at this order"
                    .to_string(),
                false,
            )
        } else {
            (
                computed,
                format!(
                    "with S = R⁰ the driving-term residual does not cancel at grade {}",
                    bad.join(", ")
                ),
                true,
            )
        }
    };
    Ok(RejectionReport {
        kind: DrivingKind::PlusPlus,
        sigma: s,
        rho: r,
        conditions,
        computed,
        rejected,
        reason,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalars::Symbol;

    fn qpow(e: i32) -> Scalar {
        Scalar::symbol(Symbol::Base(0)).powi(e)
    }

    /// q11 = q22 = q, q12 = q^{-1}, q21 = 1.
    fn sl3_twisted() -> AlgebraSpec {
        AlgebraSpec::from_matrix(
            &[1, 2],
            vec![vec![qpow(1), qpow(-1)], vec![qpow(0), qpow(1)]],
        )
        .unwrap()
    }

    #[test]
    fn generic_has_no_pairs() {
        assert!(find_admissible_pairs(&AlgebraSpec::symbolic(&[1, 2]).unwrap()).is_empty());
    }

    #[test]
    fn twisted_sl3_pairs() {
        let p = find_admissible_pairs(&sl3_twisted());
        assert_eq!(p.len(), 1);
        assert_eq!((p[0].sigma, p[0].rho), (1, 2));
        assert!(!p[0].degenerate);
    }

    #[test]
    fn driving_term_at_lowest_truncation() {
        let s = sl3_twisted();
        let r = build_r(&s, 1, false).unwrap();
        let p = AdmissiblePair::new(&s, 1, 2).unwrap();
        let d = deform_r(&r, &p, 0).unwrap();
        let alg = d.algebra();
        let kk = alg.cartan(p.k_cartan.clone());
        let want = TensorElement::elementary(&[
            alg.mul(&kk, &alg.generator(Side::Positive, 1)),
            alg.mul(&kk, &alg.generator(Side::Negative, 2)),
        ]);
        assert_eq!(d.grade_part(-1), want);
    }

    #[test]
    fn inadmissible_pair_errors() {
        let s = sl3_twisted();
        let r = build_r(&s, 1, false).unwrap();
        let p = AdmissiblePair::forced(&s, 2, 1);
        assert!(matches!(deform_r(&r, &p, 0), Err(Error::Precondition(_))));
    }

    #[test]
    fn minus_plus_generic_rejected() {
        let s = AlgebraSpec::symbolic(&[1, 2]).unwrap();
        let rep = check_rejected_types(&s, DrivingKind::MinusPlus, 1, 2).unwrap();
        assert!(rep.rejected);
        assert!(!rep.conditions[0].holds);
    }
}
