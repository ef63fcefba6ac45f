//! Coproduct, counit and antipode, the Hopf axioms, the intertwining
//! ΔR = RΔ′, and the first-order maps attached to a deformation.

use serde_json::{json, Value};

use crate::algebra::{
    Algebra, AlgebraElement, CartanMonomial, Measure, PrefixedTensor, TensorElement, TensorKey,
    Term, Truncation,
};
use crate::deformation::DeformedR;
use crate::error::{Error, Result};
use crate::freealg::{Letter, Side};
use crate::rmatrix::RMatrix;
use crate::scalars::Scalar;
use crate::yangbaxter::algebra_for;

fn neg_gen(alg: &Algebra, a: Letter) -> AlgebraElement {
    alg.generator(Side::Negative, a)
}

fn pos_gen(alg: &Algebra, a: Letter) -> AlgebraElement {
    alg.generator(Side::Positive, a)
}

fn k_of(alg: &Algebra, a: Letter) -> CartanMonomial {
    CartanMonomial::k(alg.rank(), alg.spec().index(a), 1)
}

fn kp_of(alg: &Algebra, a: Letter) -> CartanMonomial {
    CartanMonomial::kp(alg.rank(), alg.spec().index(a), 1)
}

fn tensor2(a: AlgebraElement, b: AlgebraElement) -> TensorElement {
    TensorElement::elementary(&[a, b])
}

/// Δ(e_α) = 1⊗e_α + e_α⊗K_α, Δ(e_{−α}) = K′_α^{-1}⊗e_{−α} + e_{−α}⊗1.
fn generator_coproduct(alg: &Algebra, side: Side, a: Letter) -> TensorElement {
    let one = alg.one();
    match side {
        Side::Positive => tensor2(one, pos_gen(alg, a))
            .add(&tensor2(pos_gen(alg, a), alg.cartan(k_of(alg, a))))
            .expect("rank 2"),
        Side::Negative => tensor2(alg.cartan(kp_of(alg, a).inv()), neg_gen(alg, a))
            .add(&tensor2(neg_gen(alg, a), one))
            .expect("rank 2"),
    }
}

fn term_coproduct(alg: &Algebra, t: &Term) -> Result<TensorElement> {
    let none = Truncation::none();
    let c = alg.cartan(t.cartan.clone());
    let mut acc = TensorElement::one(2, alg.rank());
    for &a in t.neg.letters() {
        acc = alg.tensor_mul(&acc, &generator_coproduct(alg, Side::Negative, a), &none)?;
    }
    acc = alg.tensor_mul(&acc, &tensor2(c.clone(), c), &none)?;
    for &a in t.pos.letters() {
        acc = alg.tensor_mul(&acc, &generator_coproduct(alg, Side::Positive, a), &none)?;
    }
    Ok(acc)
}

pub fn coproduct(alg: &Algebra, x: &AlgebraElement) -> Result<TensorElement> {
    let mut out = TensorElement::zero(2);
    for (t, c) in x.terms() {
        out = out.add(&term_coproduct(alg, t)?.scale(c))?;
    }
    Ok(out)
}

/// Group-likes go to 1, every e_{±α} to 0.
pub fn counit(x: &AlgebraElement) -> Scalar {
    x.terms()
        .iter()
        .filter(|(t, _)| t.neg.is_empty() && t.pos.is_empty())
        .fold(Scalar::zero(), |acc, (_, c)| acc.add(c))
}

fn term_antipode(alg: &Algebra, t: &Term) -> AlgebraElement {
    let minus = Scalar::from_int(-1);
    let mut acc = alg.one();
    // S(e_{−n₁}…e_{−n_k} K e_{p₁}…e_{p_m}) = S(e_{p_m})…S(e_{p₁}) K^{-1} S(e_{−n_k})…S(e_{−n₁})
    for &a in t.pos.letters().iter().rev() {
        let s = alg
            .mul(&pos_gen(alg, a), &alg.cartan(k_of(alg, a).inv()))
            .scale(&minus);
        acc = alg.mul(&acc, &s);
    }
    acc = alg.mul(&acc, &alg.cartan(t.cartan.inv()));
    for &a in t.neg.letters().iter().rev() {
        let s = alg
            .mul(&alg.cartan(kp_of(alg, a)), &neg_gen(alg, a))
            .scale(&minus);
        acc = alg.mul(&acc, &s);
    }
    acc
}

pub fn antipode(alg: &Algebra, x: &AlgebraElement) -> AlgebraElement {
    let mut out = AlgebraElement::zero();
    for (t, c) in x.terms() {
        out = out.add(&term_antipode(alg, t).scale(c));
    }
    out
}

/// m: a⊗b ↦ ab.
pub fn multiply(alg: &Algebra, x: &TensorElement) -> AlgebraElement {
    let mut out = AlgebraElement::zero();
    for (k, c) in x.terms() {
        for (t, f) in alg.mul_terms(&k[0], &k[1]) {
            out.add_term(t, f.mul(c));
        }
    }
    out
}

/// Applies a linear map to one slot of every term.
fn map_slot(
    x: &TensorElement,
    slot: usize,
    f: impl Fn(&Term) -> Result<TensorElement>,
) -> Result<TensorElement> {
    let mut out: Option<TensorElement> = None;
    for (k, c) in x.terms() {
        let img = f(&k[slot])?;
        let rank = x.rank() - 1 + img.rank();
        let acc = out.get_or_insert_with(|| TensorElement::zero(rank));
        for (ik, ic) in img.terms() {
            let mut key: TensorKey = k[..slot].iter().cloned().collect();
            key.extend(ik.iter().cloned());
            key.extend(k[slot + 1..].iter().cloned());
            acc.add_term(key, c.mul(ic));
        }
    }
    Ok(out.unwrap_or_else(|| TensorElement::zero(x.rank())))
}

fn single(t: &Term) -> AlgebraElement {
    AlgebraElement::term(t.clone(), Scalar::one())
}

fn as_rank1(x: &AlgebraElement) -> TensorElement {
    TensorElement::elementary(std::slice::from_ref(x))
}

/// One named identity and its residual after reduction.
#[derive(Clone, Debug)]
pub struct HopfCheck {
    pub name: String,
    pub target: String,
    pub nonzero: usize,
    pub first_residual: Option<String>,
}

impl HopfCheck {
    pub fn pass(&self) -> bool {
        self.nonzero == 0
    }
}

#[derive(Clone, Debug, Default)]
pub struct HopfReport {
    pub checks: Vec<HopfCheck>,
}

impl HopfReport {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass())
    }

    pub fn failing(&self) -> Vec<&HopfCheck> {
        self.checks.iter().filter(|c| !c.pass()).collect()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "pass": self.pass(),
            "checks": self.checks.iter().map(|c| json!({
                "name": c.name,
                "target": c.target,
                "pass": c.pass(),
                "nonzero_terms": c.nonzero,
                "first_residual": c.first_residual,
            })).collect::<Vec<_>>(),
        })
    }

    pub fn text(&self) -> String {
        let failing = self.failing();
        let mut s = format!(
            "{} of {} identities hold\n",
            self.checks.len() - failing.len(),
            self.checks.len()
        );
        for c in failing {
            s.push_str(&format!(
                "  FAIL {} [{}]: {} terms, e.g. {}\n",
                c.name,
                c.target,
                c.nonzero,
                c.first_residual.as_deref().unwrap_or("")
            ));
        }
        s
    }

    pub fn extend(&mut self, other: HopfReport) {
        self.checks.extend(other.checks);
    }

    fn push_tensor(
        &mut self,
        alg: &Algebra,
        name: &str,
        target: &str,
        r: &TensorElement,
    ) -> Result<()> {
        let r = alg.tensor_reduce(r)?;
        let gens = alg.spec().generators();
        self.checks.push(HopfCheck {
            name: name.into(),
            target: target.into(),
            nonzero: r.len(),
            first_residual: r.terms().iter().next().map(|(k, c)| {
                let slots: Vec<String> = k.iter().map(|t| t.render(gens)).collect();
                format!("({c}) {}", slots.join(" ⊗ "))
            }),
        });
        Ok(())
    }

    fn push_elem(
        &mut self,
        alg: &Algebra,
        name: &str,
        target: &str,
        r: &AlgebraElement,
    ) -> Result<()> {
        self.push_tensor(alg, name, target, &as_rank1(r))
    }

    fn push_scalar(&mut self, alg: &Algebra, name: &str, target: &str, r: &Scalar) -> Result<()> {
        let zero = crate::exact::is_zero_in(alg.spec(), r)?;
        self.checks.push(HopfCheck {
            name: name.into(),
            target: target.into(),
            nonzero: usize::from(!zero),
            first_residual: (!zero).then(|| r.to_string()),
        });
        Ok(())
    }
}

/// Generators e_{±α}, K_α and K′_α, with display names.
pub fn generator_samples(alg: &Algebra) -> Vec<(String, AlgebraElement)> {
    let gens = alg.spec().generators().to_vec();
    let mut out = Vec::new();
    for &a in &gens {
        out.push((format!("e[+{a}]"), pos_gen(alg, a)));
        out.push((format!("e[-{a}]"), neg_gen(alg, a)));
        out.push((format!("K[{a}]"), alg.cartan(k_of(alg, a))));
        out.push((format!("K'[{a}]"), alg.cartan(kp_of(alg, a))));
    }
    out
}

/// Coassociativity, both counit identities and both antipode identities.
pub fn check_axioms(alg: &Algebra, samples: &[(String, AlgebraElement)]) -> Result<HopfReport> {
    let mut rep = HopfReport::default();
    for (name, x) in samples {
        let d = coproduct(alg, x)?;
        let left = map_slot(&d, 0, |t| coproduct(alg, &single(t)))?;
        let right = map_slot(&d, 1, |t| coproduct(alg, &single(t)))?;
        rep.push_tensor(alg, "coassociativity", name, &left.sub(&right)?)?;
        let eps = |t: &Term| -> Result<TensorElement> {
            Ok(TensorElement::one(0, alg.rank()).scale(&counit(&single(t))))
        };
        let x1 = as_rank1(x);
        rep.push_tensor(
            alg,
            "counit (ε⊗id)Δ",
            name,
            &map_slot(&d, 0, eps)?.sub(&x1)?,
        )?;
        rep.push_tensor(
            alg,
            "counit (id⊗ε)Δ",
            name,
            &map_slot(&d, 1, eps)?.sub(&x1)?,
        )?;
        let unit = alg.one().scale(&counit(x));
        let s_slot = |i: usize| {
            alg.tensor_map(&d, |j, t| {
                if j == i {
                    term_antipode(alg, t)
                } else {
                    single(t)
                }
            })
        };
        rep.push_elem(
            alg,
            "antipode m(id⊗S)Δ",
            name,
            &multiply(alg, &s_slot(1)).sub(&unit),
        )?;
        rep.push_elem(
            alg,
            "antipode m(S⊗id)Δ",
            name,
            &multiply(alg, &s_slot(0)).sub(&unit),
        )?;
    }
    Ok(rep)
}

/// Δ(xy) = Δ(x)Δ(y), ε(xy) = ε(x)ε(y) and S(xy) = S(y)S(x) on ordered
/// pairs of samples; on generator pairs this covers the defining relations.
pub fn check_homomorphism(
    alg: &Algebra,
    samples: &[(String, AlgebraElement)],
) -> Result<HopfReport> {
    let none = Truncation::none();
    let mut rep = HopfReport::default();
    for (nx, x) in samples {
        let dx = coproduct(alg, x)?;
        for (ny, y) in samples {
            let target = format!("{nx}·{ny}");
            let xy = alg.mul(x, y);
            let lhs = coproduct(alg, &xy)?;
            let rhs = alg.tensor_mul(&dx, &coproduct(alg, y)?, &none)?;
            rep.push_tensor(alg, "Δ homomorphism", &target, &lhs.sub(&rhs)?)?;
            let e = counit(&xy).sub(&counit(x).mul(&counit(y)));
            rep.push_scalar(alg, "ε homomorphism", &target, &e)?;
            let s = antipode(alg, &xy).sub(&alg.mul(&antipode(alg, y), &antipode(alg, x)));
            rep.push_elem(alg, "S anti-homomorphism", &target, &s)?;
        }
    }
    Ok(rep)
}

/// Δ(I) ⊂ I⊗A + A⊗I, S(I) ⊂ I and ε(I) = 0 on the ideal's generators.
pub fn check_ideal_compatibility(alg: &Algebra) -> Result<HopfReport> {
    let mut rep = HopfReport::default();
    let Some(ideal) = alg.ideal().cloned() else {
        return Ok(rep);
    };
    for c in ideal.generators() {
        let x = alg.from_free(c);
        let target = c.to_string();
        rep.push_tensor(alg, "Δ(C) in ideal", &target, &coproduct(alg, &x)?)?;
        rep.push_elem(
            alg,
            "S(C) in ideal",
            &target,
            &alg.reduce(&antipode(alg, &x))?,
        )?;
        rep.push_scalar(alg, "ε(C) = 0", &target, &counit(&x))?;
    }
    Ok(rep)
}

/// Bound for exact residuals of products with a generator of the given
/// kind: positive generators raise slot 2, the rest are tracked in slot 1.
fn generator_measure(side: Option<Side>) -> (usize, Measure) {
    match side {
        Some(Side::Positive) => (1, Measure::ZGrade),
        _ => (0, Measure::NegZ),
    }
}

fn intertwiner_samples(alg: &Algebra) -> Vec<(String, AlgebraElement, Option<Side>)> {
    let mut out = Vec::new();
    for &a in alg.spec().generators() {
        out.push((format!("e[+{a}]"), pos_gen(alg, a), Some(Side::Positive)));
        out.push((format!("e[-{a}]"), neg_gen(alg, a), Some(Side::Negative)));
        out.push((format!("K[{a}]"), alg.cartan(k_of(alg, a)), None));
        out.push((format!("K'[{a}]"), alg.cartan(kp_of(alg, a)), None));
    }
    out
}

fn flip(x: &TensorElement) -> TensorElement {
    x.permute(&[1, 0])
}

/// Body of (plain a)·R − R·(plain b), R⁰ factored out on the left.
fn left_minus_right(
    alg: &Algebra,
    a: &TensorElement,
    r: &PrefixedTensor,
    b: &TensorElement,
    trunc: &Truncation,
) -> Result<TensorElement> {
    let l = alg.prefixed_mul(&PrefixedTensor::plain(a.clone()), r, trunc)?;
    let rr = alg.prefixed_mul(r, &PrefixedTensor::plain(b.clone()), trunc)?;
    debug_assert_eq!(l.prefix, rr.prefix);
    l.body.sub(&rr.body)
}

/// Δ(x)R − RΔ′(x) on every generator, exact through grade k.
pub fn check_intertwiner(r: &RMatrix, k: usize) -> Result<HopfReport> {
    if k + 1 > r.truncation {
        return Err(Error::Truncation(format!(
            "intertwining through {k} needs R through {}, have {}",
            k + 1,
            r.truncation
        )));
    }
    let alg = algebra_for(r);
    let mut rep = HopfReport::default();
    for (name, x, side) in intertwiner_samples(&alg) {
        let (slot, m) = generator_measure(side);
        let trunc = Truncation::none().with(slot, m, k as i64 + 1);
        let d = coproduct(&alg, &x)?;
        let res = left_minus_right(&alg, &d, &r.tensor, &flip(&d), &trunc)?;
        rep.push_tensor(&alg, "ΔR = RΔ′", &name, &res)?;
    }
    Ok(rep)
}

/// Ke_{−ρ} ⊗ Ke_σ summed over the deformation's pairs.
fn deformed_y(alg: &Algebra, d: &DeformedR) -> TensorElement {
    let mut y = TensorElement::zero(2);
    for (p, c) in &d.pairs {
        let kk = alg.cartan(p.k_cartan.clone());
        let a = alg.mul(&kk, &neg_gen(alg, p.rho));
        let b = alg.mul(&kk, &pos_gen(alg, p.sigma));
        y = y.add(&tensor2(a, b).scale(c)).expect("rank 2");
    }
    y
}

/// Ke_{−ρ}e_σ summed over the pairs.
fn deformed_v(alg: &Algebra, d: &DeformedR) -> AlgebraElement {
    let mut v = AlgebraElement::zero();
    for (p, c) in &d.pairs {
        let kk = alg.cartan(p.k_cartan.clone());
        let t = alg.mul(&alg.mul(&kk, &neg_gen(alg, p.rho)), &pos_gen(alg, p.sigma));
        v = v.add(&t.scale(c));
    }
    v
}

/// Δ₁(x) = [Δ(x), Ke_{−ρ}⊗Ke_σ].
pub fn deformed_coproduct(
    alg: &Algebra,
    d: &DeformedR,
    x: &AlgebraElement,
) -> Result<TensorElement> {
    let none = Truncation::none();
    let dx = coproduct(alg, x)?;
    let y = deformed_y(alg, d);
    alg.tensor_mul(&dx, &y, &none)?
        .sub(&alg.tensor_mul(&y, &dx, &none)?)
}

/// S₁(x) = [Ke_{−ρ}e_σ, S(x)].
pub fn deformed_antipode(alg: &Algebra, d: &DeformedR, x: &AlgebraElement) -> AlgebraElement {
    alg.commutator(&deformed_v(alg, d), &antipode(alg, x))
}

/// First-order Hopf structure of R + εR₁: homomorphism of Δ_ε on generator
/// pairs and ideal generators, intertwining, ε₁ = 0 and both antipode
/// identities, all on generators.
pub fn deformed_hopf_check(r: &RMatrix, d: &DeformedR, k: usize) -> Result<HopfReport> {
    if k > d.max_grade || k + 1 > r.truncation {
        return Err(Error::Truncation(format!(
            "first-order intertwining through {k} needs R₁ through {k} and R through {}",
            k + 1
        )));
    }
    let alg = d.algebra();
    let none = Truncation::none();
    let mut rep = HopfReport::default();
    let samples = intertwiner_samples(&alg);

    for (nx, x, _) in &samples {
        let dx = coproduct(&alg, x)?;
        let d1x = deformed_coproduct(&alg, d, x)?;
        for (ny, y, _) in &samples {
            let lhs = deformed_coproduct(&alg, d, &alg.mul(x, y))?;
            let dy = coproduct(&alg, y)?;
            let d1y = deformed_coproduct(&alg, d, y)?;
            let rhs = alg
                .tensor_mul(&d1x, &dy, &none)?
                .add(&alg.tensor_mul(&dx, &d1y, &none)?)?;
            rep.push_tensor(
                &alg,
                "Δ₁ derivation",
                &format!("{nx}·{ny}"),
                &lhs.sub(&rhs)?,
            )?;
        }
    }
    if let Some(ideal) = alg.ideal().cloned() {
        for c in ideal.generators() {
            let x = alg.from_free(c);
            rep.push_tensor(
                &alg,
                "Δ₁(C) in ideal",
                &c.to_string(),
                &deformed_coproduct(&alg, d, &x)?,
            )?;
        }
    }

    for (name, x, side) in &samples {
        let (slot, m) = generator_measure(*side);
        let trunc = Truncation::none().with(slot, m, k as i64);
        let dx = coproduct(&alg, x)?;
        let d1x = deformed_coproduct(&alg, d, x)?;
        // Δ₁(x)R + Δ(x)R₁ − R₁Δ′(x) − RΔ₁′(x)
        let a = left_minus_right(&alg, &d1x, &r.tensor, &flip(&d1x), &trunc)?;
        let b = left_minus_right(&alg, &dx, &d.r1, &flip(&dx), &trunc)?;
        rep.push_tensor(&alg, "first-order ΔR = RΔ′", name, &a.add(&b)?)?;

        let eps = |t: &Term| -> Result<TensorElement> {
            Ok(TensorElement::one(0, alg.rank()).scale(&counit(&single(t))))
        };
        rep.push_tensor(&alg, "ε₁ = 0: (ε⊗id)Δ₁", name, &map_slot(&d1x, 0, eps)?)?;
        rep.push_tensor(&alg, "ε₁ = 0: (id⊗ε)Δ₁", name, &map_slot(&d1x, 1, eps)?)?;

        let with = |t: &TensorElement, i: usize, f: &dyn Fn(&Term) -> AlgebraElement| {
            alg.tensor_map(t, |j, u| if j == i { f(u) } else { single(u) })
        };
        let s = |u: &Term| term_antipode(&alg, u);
        let s1 = |u: &Term| deformed_antipode(&alg, d, &single(u));
        let right = multiply(&alg, &with(&dx, 1, &s1)).add(&multiply(&alg, &with(&d1x, 1, &s)));
        rep.push_elem(
            &alg,
            "m(id⊗S₁)Δ + m(id⊗S)Δ₁ = 0",
            name,
            &alg.reduce(&right)?,
        )?;
        let left = multiply(&alg, &with(&dx, 0, &s1)).add(&multiply(&alg, &with(&d1x, 0, &s)));
        rep.push_elem(&alg, "m(S₁⊗id)Δ + m(S⊗id)Δ₁ = 0", name, &alg.reduce(&left)?)?;
    }
    Ok(rep)
}
