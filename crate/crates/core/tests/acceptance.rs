//! One line per acceptance criterion. Everything is exact; reference values
//! come from closed forms typed in by hand or from solvers written here,
//! never from the code under test.

use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qforge_core::algebra::{Algebra, TensorElement};
use qforge_core::deformation::{
    deform_r, find_admissible_pairs, verify_first_order_yb, AdmissiblePair,
};
use qforge_core::error::Error;
use qforge_core::freealg::{
    multidegrees_of_grade, words_of, AlgebraSpec, FreeElement, Letter, Side, Word,
};
use qforge_core::hopf::{
    check_axioms, check_ideal_compatibility, check_intertwiner, deformed_hopf_check,
    generator_samples,
};
use qforge_core::qdiff::{
    constants_determinant, find_constants, in_span, is_constant, phi_operator_check,
    qserre_relation, serre_exponent, unit_equivalent, DerivativeKind,
};
use qforge_core::quotient::ObstructionIdeal;
use qforge_core::rmatrix::{build_r, solve_t, solve_t_right, TCoefficients};
use qforge_core::scalars::{random_rational, AlgebraicRelation, Scalar, Specialization, Symbol};
use qforge_core::specfile::{parse_spec, single_q_exponents};
use qforge_core::yangbaxter::{yb_check_bruteforce, yb_check_structural};

type Outcome = Result<String, String>;

fn q(i: Letter, j: Letter) -> Scalar {
    Scalar::q(i, j)
}

fn int(n: i64) -> Scalar {
    Scalar::from_int(n)
}

fn inv(x: &Scalar) -> Scalar {
    x.inv().unwrap()
}

fn sigma(i: Letter, j: Letter) -> Scalar {
    q(i, j).mul(&q(j, i))
}

fn elem(terms: &[(Scalar, &[Letter])]) -> FreeElement {
    FreeElement::from_terms(
        Side::Positive,
        terms.iter().map(|(c, w)| (Word::new(w), c.clone())),
    )
}

fn specialize(x: &FreeElement, sp: &Specialization) -> FreeElement {
    x.map_coeffs(|c| sp.apply(c)).unwrap()
}

fn symbolic(gens: &[Letter]) -> AlgebraSpec {
    AlgebraSpec::symbolic(gens).unwrap()
}

fn one_minus(x: &Scalar) -> Scalar {
    Scalar::one().sub(x)
}

fn ensure(cond: bool, what: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(what.into())
    }
}

fn within(t: Instant, limit: Duration) -> Result<(), String> {
    ensure(
        t.elapsed() < limit,
        format!("took {:?}, limit {limit:?}", t.elapsed()),
    )
}

fn e<T>(r: qforge_core::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

// 1 ------------------------------------------------------------------------

fn grade_two_closed_forms() -> Outcome {
    let t0 = Instant::now();
    let s = symbolic(&[1, 2]);
    let t = e(solve_t(&s, 2, None))?;
    for (a, b) in [(1, 2), (2, 1)] {
        let ab = Word::new(&[a, b]);
        let ba = Word::new(&[b, a]);
        let top = one_minus(&inv(&q(a, b).mul(&q(b, a))));
        let want = inv(&top);
        ensure(
            t.coeff(&ab, &ab) == want,
            format!("t^{{{a}{b}}}_{{{a}{b}}}"),
        )?;
        ensure(
            t.coeff(&ab, &ba) == inv(&q(b, a)).neg().mul(&want),
            format!("t^{{{b}{a}}}_{{{a}{b}}}"),
        )?;
        let aa = Word::new(&[a, a]);
        ensure(
            t.coeff(&aa, &aa) == inv(&Scalar::one().add(&inv(&q(a, a)))),
            format!("t^{{{a}{a}}}_{{{a}{a}}}"),
        )?;
    }
    within(t0, Duration::from_secs(1))?;
    Ok(format!("6 coefficients exact in {:?}", t0.elapsed()))
}

// 2 ------------------------------------------------------------------------

fn determinants() -> Outcome {
    let t0 = Instant::now();
    let s2 = symbolic(&[1, 2]);
    let s3 = symbolic(&[1, 2, 3]);
    let q11 = q(1, 1);
    let cases: Vec<(&str, &AlgebraSpec, Vec<u32>, Scalar)> = vec![
        ("D^12", &s2, vec![1, 1], one_minus(&sigma(1, 2))),
        ("D^11", &s2, vec![2, 0], Scalar::one().add(&q11)),
        (
            "D^123",
            &s3,
            vec![1, 1, 1],
            one_minus(&sigma(1, 2))
                .mul(&one_minus(&sigma(1, 3)))
                .mul(&one_minus(&sigma(2, 3)))
                .mul(&one_minus(&sigma(1, 2).mul(&sigma(1, 3)).mul(&sigma(2, 3)))),
        ),
        (
            "D^112",
            &s2,
            vec![2, 1],
            Scalar::one()
                .add(&q11)
                .mul(&one_minus(&sigma(1, 2)))
                .mul(&one_minus(&q11.mul(&sigma(1, 2)))),
        ),
        (
            "D^111",
            &s2,
            vec![3, 0],
            Scalar::one().add(&q11).add(&q11.powi(2)),
        ),
    ];
    for (name, s, d, want) in cases {
        let got = e(constants_determinant(&d, s))?;
        ensure(unit_equivalent(&got, &want), format!("{name}: got {got}"))?;
    }
    within(t0, Duration::from_secs(5))?;
    Ok(format!("5 determinants up to a unit in {:?}", t0.elapsed()))
}

// 3 ------------------------------------------------------------------------

struct Catalogued {
    name: &'static str,
    spec: AlgebraSpec,
    d: Vec<u32>,
    element: FreeElement,
}

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Every catalogued constant, already specialized to its locus.
fn catalogue() -> Vec<Catalogued> {
    let s2 = symbolic(&[1, 2]);
    let s3 = symbolic(&[1, 2, 3]);
    let mut out = Vec::new();
    let push = |out: &mut Vec<Catalogued>,
                name,
                base: &AlgebraSpec,
                sp: Specialization,
                d: Vec<u32>,
                x: FreeElement| {
        out.push(Catalogued {
            name,
            spec: base.specialize(&sp).unwrap(),
            d,
            element: specialize(&x, &sp),
        })
    };
    let sigma_one = Specialization::new()
        .with(Symbol::Pair(2, 1), &inv(&q(1, 2)))
        .unwrap();
    let q11_minus_one = Specialization::new()
        .with(Symbol::Pair(1, 1), &int(-1))
        .unwrap();

    push(
        &mut out,
        "(3.8) σ12=1",
        &s2,
        sigma_one.clone(),
        vec![1, 1],
        elem(&[(int(1), &[1, 2]), (q(2, 1).neg(), &[2, 1])]),
    );
    push(
        &mut out,
        "(3.9) q11=-1",
        &symbolic(&[1]),
        q11_minus_one.clone(),
        vec![2],
        elem(&[(int(1), &[1, 1])]),
    );
    out.push(Catalogued {
        name: "(3.10) 1+q11+q11²=0",
        spec: symbolic(&[1]).with_algebraic(AlgebraicRelation {
            symbol: Symbol::Pair(1, 1),
            lower_coeffs: vec![rat(1), rat(1)],
        }),
        d: vec![3],
        element: elem(&[(int(1), &[1, 1, 1])]),
    });
    push(
        &mut out,
        "(3.11) q11=-1",
        &s2,
        q11_minus_one,
        vec![2, 1],
        elem(&[(int(1), &[1, 1, 2]), (q(2, 1).powi(2).neg(), &[2, 1, 1])]),
    );
    push(
        &mut out,
        "(3.12) q11σ12=1",
        &s2,
        Specialization::new()
            .with(Symbol::Pair(2, 1), &inv(&q(1, 1).mul(&q(1, 2))))
            .unwrap(),
        vec![2, 1],
        elem(&[
            (q(1, 2), &[1, 1, 2]),
            (Scalar::one().add(&sigma(1, 2)).neg(), &[1, 2, 1]),
            (q(2, 1), &[2, 1, 1]),
        ]),
    );
    push(
        &mut out,
        "(3.13) σ12=1, middle coefficient −q21(1+q11)",
        &s2,
        sigma_one.clone(),
        vec![2, 1],
        corrected_313(),
    );
    let c12 = elem(&[(int(1), &[1, 2]), (q(2, 1).neg(), &[2, 1])]);
    let xi3 = elem(&[(int(1), &[3])]);
    let bracket = c12
        .mul(&xi3)
        .unwrap()
        .sub(&xi3.mul(&c12).unwrap().scale(&q(3, 1).mul(&q(3, 2))))
        .unwrap();
    push(
        &mut out,
        "(3.14) σ12=1, three generators",
        &s3,
        sigma_one,
        vec![1, 1, 1],
        bracket,
    );

    // σ12σ13σ23 = 1 solved for q32.
    let q32 = inv(&q(1, 2)
        .mul(&q(2, 1))
        .mul(&q(1, 3))
        .mul(&q(3, 1))
        .mul(&q(2, 3)));
    let cyclic = Specialization::new()
        .with(Symbol::Pair(3, 2), &q32)
        .unwrap();
    let mut x315 = FreeElement::zero(Side::Positive);
    for (a, b, c) in [(1, 2, 3), (2, 3, 1), (3, 1, 2)] {
        let pre = inv(&q(c, a)).sub(&q(a, c));
        let part = elem(&[
            (int(1), &[a, b, c]),
            (q(c, a).mul(&q(c, b)).mul(&q(b, a)), &[c, b, a]),
        ]);
        x315 = x315.add(&part.scale(&pre)).unwrap();
    }
    push(
        &mut out,
        "(3.15) σ12σ13σ23=1",
        &s3,
        cyclic,
        vec![1, 1, 1],
        x315,
    );
    out
}

fn corrected_313() -> FreeElement {
    elem(&[
        (q(1, 1), &[1, 1, 2]),
        (q(2, 1).mul(&Scalar::one().add(&q(1, 1))).neg(), &[1, 2, 1]),
        (q(2, 1).powi(2), &[2, 1, 1]),
    ])
}

fn constants_catalogue() -> Outcome {
    let t0 = Instant::now();
    let kind = DerivativeKind::Section3;
    let cat = catalogue();
    for c in &cat {
        let rep = e(find_constants(kind, &c.d, &c.spec))?;
        ensure(
            rep.basis.len() == 1,
            format!("{}: null space has dimension {}", c.name, rep.basis.len()),
        )?;
        ensure(
            !c.element.is_zero(),
            format!("{}: element vanishes on the locus", c.name),
        )?;
        ensure(
            e(in_span(&c.spec, &rep.basis, &c.element))?,
            format!("{}: not in the null space", c.name),
        )?;
    }
    // The printed middle coefficient −(1+q11) is not a constant.
    let sp = Specialization::new()
        .with(Symbol::Pair(2, 1), &inv(&q(1, 2)))
        .unwrap();
    let s2 = symbolic(&[1, 2]).specialize(&sp).unwrap();
    let printed = specialize(
        &elem(&[
            (q(1, 1), &[1, 1, 2]),
            (Scalar::one().add(&q(1, 1)).neg(), &[1, 2, 1]),
            (q(2, 1).powi(2), &[2, 1, 1]),
        ]),
        &sp,
    );
    ensure(
        !e(is_constant(&s2, kind, &printed))?,
        "printed (3.13) unexpectedly constant",
    )?;

    // σ12 = 1 with three generators: constants at (2,1,0) and (1,1,1).
    let s3 = symbolic(&[1, 2, 3]).specialize(&sp).unwrap();
    let a = e(find_constants(kind, &[2, 1, 0], &s3))?;
    let b = e(find_constants(kind, &[1, 1, 1], &s3))?;
    let dim = a.basis.len() + b.basis.len();
    ensure(
        dim == 2,
        format!("σ12=1, three generators: dimension {dim}"),
    )?;
    ensure(
        e(in_span(&s3, &a.basis, &specialize(&corrected_313(), &sp)))?,
        "(3.13) at (2,1,0)",
    )?;
    let b314 = &cat
        .iter()
        .find(|c| c.name.starts_with("(3.14)"))
        .unwrap()
        .element;
    ensure(e(in_span(&s3, &b.basis, b314))?, "(3.14) at (1,1,1)")?;
    within(t0, Duration::from_secs(30))?;
    Ok(format!(
        "{} one-dimensional spaces plus the 2-dimensional σ12=1 space in {:?} (printed 3.13 middle term corrected)",
        cat.len(),
        t0.elapsed()
    ))
}

// 4 ------------------------------------------------------------------------

/// Gaussian binomial from the product formula.
fn gauss_binomial(k: u32, m: u32, x: &Scalar) -> Scalar {
    let mut num = Scalar::one();
    let mut den = Scalar::one();
    for i in 0..m {
        num = num.mul(&one_minus(&x.powi((k - i) as i32)));
        den = den.mul(&one_minus(&x.powi((i + 1) as i32)));
    }
    num.div(&den).unwrap()
}

fn q_serre() -> Outcome {
    let t0 = Instant::now();
    let kind = DerivativeKind::Section3;
    let s = symbolic(&[1, 2]);
    for (a, b) in [(1, 2), (2, 1)] {
        let qa = q(a, a);
        for k in 1..=4u32 {
            let rel = e(qserre_relation(a, b, k, &s, kind))?;
            for m in 0..=k {
                let want = q(a, b)
                    .neg()
                    .powi(m as i32)
                    .mul(&qa.powi((m * m.saturating_sub(1) / 2) as i32))
                    .mul(&gauss_binomial(k, m, &qa));
                ensure(
                    rel.coefficients[m as usize] == want,
                    format!("Q^{k}_{m} for ({a},{b})"),
                )?;
            }
            ensure(!rel.is_constant, format!("generic k={k} flagged constant"))?;
            ensure(
                !e(is_constant(&s, kind, &rel.element))?,
                format!("generic k={k} is constant"),
            )?;

            // On 1 − q^{k−1}σ = 0 the relation becomes a constant.
            let img = inv(&qa.powi(k as i32 - 1).mul(&q(a, b)));
            let sp = Specialization::new()
                .with(Symbol::Pair(b, a), &img)
                .unwrap();
            let sk = s.specialize(&sp).unwrap();
            let rel = e(qserre_relation(a, b, k, &sk, kind))?;
            ensure(rel.is_constant, format!("k={k} not flagged on its locus"))?;
            ensure(
                e(is_constant(&sk, kind, &rel.element))?,
                format!("k={k} not constant on its locus"),
            )?;
            ensure(
                serre_exponent(a, b, &sk, 6) == Some(k),
                format!(
                    "Serre exponent at k={k}: {:?}",
                    serre_exponent(a, b, &sk, 6)
                ),
            )?;
        }
    }
    let mut n = 0;
    for c in catalogue() {
        ensure(
            e(phi_operator_check(&c.spec, kind, &c.element, 4))?,
            format!("Φ(C) fails for {}", c.name),
        )?;
        n += 1;
    }
    Ok(format!("Q^k_m exact for k ≤ 4, flags and exponents agree, Φ(C) kills grade ≤ 4 for {n} constants in {:?}", t0.elapsed()))
}

// 5 ------------------------------------------------------------------------

fn yang_baxter_generic() -> Outcome {
    let t0 = Instant::now();
    let s = symbolic(&[1, 2]);
    let r = e(build_r(&s, 3, false))?;
    let a = e(yb_check_structural(&r, 3, 3))?;
    let b = e(yb_check_bruteforce(&r, 3))?;
    ensure(
        a.grades.len() == 16 && b.grades.len() == 16,
        "grade pairs missing",
    )?;
    ensure(a.pass(), format!("structural fails at {:?}", a.failing()))?;
    ensure(b.pass(), format!("brute force fails at {:?}", b.failing()))?;
    within(t0, Duration::from_secs(600))?;
    Ok(format!(
        "both methods zero on all 16 grade pairs in {:?}",
        t0.elapsed()
    ))
}

// 6 ------------------------------------------------------------------------

fn minus_one() -> AlgebraSpec {
    let sp = Specialization::new()
        .with(Symbol::Pair(1, 1), &int(-1))
        .unwrap();
    symbolic(&[1]).specialize(&sp).unwrap()
}

fn sigma12_one() -> AlgebraSpec {
    let sp = Specialization::new()
        .with(Symbol::Pair(1, 2), &inv(&q(2, 1)))
        .unwrap();
    symbolic(&[1, 2]).specialize(&sp).unwrap()
}

fn left_right() -> Outcome {
    let t0 = Instant::now();
    let s = symbolic(&[1, 2]);
    ensure(
        e(solve_t(&s, 4, None))?.same_table(&e(solve_t_right(&s, 4, None))?),
        "generic",
    )?;
    for (name, s) in [("q11=-1", minus_one()), ("σ12=1", sigma12_one())] {
        let i = e(ObstructionIdeal::build(&s, 4))?;
        ensure(!i.is_empty(), format!("{name}: empty ideal"))?;
        let l = e(solve_t(&s, 4, Some(&i)))?;
        let r = e(solve_t_right(&s, 4, Some(&i)))?;
        ensure(l.same_table(&r), format!("{name}: tables differ"))?;
    }
    Ok(format!(
        "generic and two quotients agree through grade 4 in {:?}",
        t0.elapsed()
    ))
}

// 7 ------------------------------------------------------------------------

fn quotient_path() -> Outcome {
    let t0 = Instant::now();
    let s = minus_one();
    match solve_t(&s, 4, None) {
        Err(Error::ObstructionDetected(o)) => {
            ensure(o.grade == 2, format!("obstruction at grade {}", o.grade))?;
            ensure(
                o.constants == vec![elem(&[(int(1), &[1, 1])])],
                "constant is not e1e1",
            )?;
        }
        other => return Err(format!("no obstruction: {other:?}")),
    }
    let r = e(build_r(&s, 4, true))?;
    let i = r.ideal.as_ref().ok_or("no ideal")?;
    let want = vec![
        elem(&[(int(1), &[1, 1])]),
        FreeElement::word(Side::Negative, Word::new(&[1, 1]), int(1)),
    ];
    let mut got = i.generators().to_vec();
    got.sort_by_key(|g| g.side() != Side::Positive);
    ensure(got == want, format!("ideal generators {got:?}"))?;
    let a = e(yb_check_structural(&r, 4, 4))?;
    let b = e(yb_check_bruteforce(&r, 4))?;
    ensure(
        a.pass() && b.pass(),
        format!("YB fails at {:?} / {:?}", a.failing(), b.failing()),
    )?;
    within(t0, Duration::from_secs(60))?;
    Ok(format!(
        "obstruction e1e1 at grade 2; ideal {{e1e1, e-1e-1}}; YB through 4 in {:?}",
        t0.elapsed()
    ))
}

// 8 ------------------------------------------------------------------------

/// sl3 with the antisymmetric twist solved from the admissibility of (1, 2):
/// φ(β,2) + φ(1,β) = 0 for β = 1, 2.
fn derived_sl3_twisted() -> Result<AlgebraSpec, String> {
    let cartan = vec![vec![2, -1], vec![-1, 2]];
    let phi = e(single_q_exponents(&cartan, &[1, 1], None))?;
    // twist = τ [[0, 1], [−1, 0]]
    let shift = |i: usize, j: usize| -> BigRational {
        match (i, j) {
            (0, 1) => rat(1),
            (1, 0) => rat(-1),
            _ => BigRational::zero(),
        }
    };
    let (sg, rh) = (0, 1);
    let mut tau: Option<BigRational> = None;
    for b in 0..2 {
        let c = &phi[b][rh] + &phi[sg][b];
        let a = shift(b, rh) + shift(sg, b);
        if a.is_zero() {
            ensure(c.is_zero(), "admissibility impossible")?;
            continue;
        }
        let t = -c / a;
        if let Some(prev) = &tau {
            ensure(prev == &t, "admissibility conditions disagree")?;
        }
        tau = Some(t);
    }
    let tau = tau.ok_or("twist undetermined")?;
    let src = format!(
        r#"{{"preset": {{"type": "single-q", "cartan_matrix": [[2,-1],[-1,2]],
             "twist": [["0", "{}"], ["{}", "0"]]}}}}"#,
        tau,
        -tau.clone()
    );
    Ok(e(parse_spec(&src))?.spec)
}

fn deformation() -> Outcome {
    let t0 = Instant::now();
    let s = derived_sl3_twisted()?;
    let pairs = find_admissible_pairs(&s);
    ensure(
        pairs.iter().any(|p| (p.sigma, p.rho) == (1, 2)),
        format!("pairs {pairs:?}"),
    )?;
    let p = e(AdmissiblePair::new(&s, 1, 2))?;
    let r = e(build_r(&s, 3, true))?;
    let d = e(deform_r(&r, &p, 2))?;
    let alg = d.algebra();
    let kk = alg.cartan(p.k_cartan.clone());
    let lowest = TensorElement::elementary(&[
        alg.mul(&kk, &alg.generator(Side::Positive, 1)),
        alg.mul(&kk, &alg.generator(Side::Negative, 2)),
    ]);
    ensure(
        d.grade_part(-1) == lowest,
        "lowest-grade term is not (K⊗K)(e_σ⊗e_−ρ)",
    )?;
    let rep = e(verify_first_order_yb(&r, &d, 2))?;
    ensure(
        rep.pass(),
        format!("first-order YB fails at {:?}", rep.failing()),
    )?;
    for gens in [&[1u16, 2][..], &[1, 2, 3]] {
        ensure(
            find_admissible_pairs(&symbolic(gens)).is_empty(),
            "generic parameters admit a pair",
        )?;
    }
    within(t0, Duration::from_secs(300))?;
    Ok(format!(
        "twist τ solved, pair (1,2), first-order YB zero through grade 2 ({} grade pairs), generic rigid, in {:?}",
        rep.grades.len(),
        t0.elapsed()
    ))
}

// 9 ------------------------------------------------------------------------

fn hopf() -> Outcome {
    let t0 = Instant::now();
    let mut count = 0;
    let generic = symbolic(&[1, 2]);
    let r = e(build_r(&generic, 3, false))?;
    let s1 = minus_one();
    let r1 = e(build_r(&s1, 3, true))?;
    for alg in [
        Algebra::new(&generic),
        Algebra::new(&s1).with_ideal(r1.ideal.clone()),
    ] {
        let gens = generator_samples(&alg);
        let mut samples = gens.clone();
        for (nx, x) in &gens {
            for (ny, y) in &gens {
                samples.push((format!("{nx}·{ny}"), alg.mul(x, y)));
            }
        }
        let rep = e(check_axioms(&alg, &samples))?;
        ensure(
            rep.pass(),
            format!("axioms: {:?}", rep.failing().first().map(|c| &c.name)),
        )?;
        count += rep.checks.len();
    }
    let rep = e(check_intertwiner(&r, 2))?;
    ensure(rep.pass(), "ΔR = RΔ′ fails")?;
    count += rep.checks.len();
    let alg = Algebra::new(&s1).with_ideal(r1.ideal.clone());
    let rep = e(check_ideal_compatibility(&alg))?;
    ensure(
        !rep.checks.is_empty() && rep.pass(),
        "ideal compatibility fails",
    )?;
    count += rep.checks.len();

    let s = derived_sl3_twisted()?;
    let r = e(build_r(&s, 3, true))?;
    let d = e(deform_r(&r, &e(AdmissiblePair::new(&s, 1, 2))?, 2))?;
    let rep = e(deformed_hopf_check(&r, &d, 2))?;
    ensure(
        rep.pass(),
        format!(
            "first-order identities fail: {:?}",
            rep.failing().iter().map(|c| &c.name).collect::<Vec<_>>()
        ),
    )?;
    count += rep.checks.len();
    Ok(format!("{count} identities exact in {:?}", t0.elapsed()))
}

// 10 -----------------------------------------------------------------------

/// Plain Gauss–Jordan on an augmented matrix; None unless the solution is
/// unique.
fn naive_solve(mut m: Vec<Vec<Scalar>>, n: usize) -> Option<Vec<Scalar>> {
    let mut row = 0;
    for col in 0..n {
        let p = (row..m.len()).find(|&i| !m[i][col].is_zero())?;
        m.swap(row, p);
        let pivot = m[row][col].clone();
        for x in m[row].iter_mut() {
            *x = x.div(&pivot).unwrap();
        }
        for i in 0..m.len() {
            if i != row && !m[i][col].is_zero() {
                let f = m[i][col].clone();
                let (top, rest) = if i < row {
                    let (a, b) = m.split_at_mut(row);
                    (&b[0], &mut a[i])
                } else {
                    let (a, b) = m.split_at_mut(i);
                    (&a[row], &mut b[0])
                };
                for (x, y) in rest.iter_mut().zip(top.iter()) {
                    *x = x.sub(&f.mul(y));
                }
            }
        }
        row += 1;
    }
    if m[row..].iter().any(|r| !r[n].is_zero()) {
        return None;
    }
    Some(m[..n].iter().map(|r| r[n].clone()).collect())
}

/// ∂⃗_{−γ} on a positive word: the factor q_{γ w_j}^{-1} for each letter passed.
fn left_minus(s: &AlgebraSpec, g: Letter, w: &Word) -> FreeElement {
    let mut out = FreeElement::zero(Side::Positive);
    let mut acc = Scalar::one();
    for (k, &l) in w.letters().iter().enumerate() {
        if l == g {
            out.add_term(w.without(k), acc.clone());
        }
        acc = acc.mul(&inv(s.q(g, l)));
    }
    out
}

/// The t-table at every multidegree |d| ≤ k from one full linear system per
/// multidegree, in all unknowns t^{(v)}_{(u)} at once.
fn oracle(
    s: &AlgebraSpec,
    k: usize,
    ideal: Option<&ObstructionIdeal>,
) -> Result<BTreeMap<Word, FreeElement>, String> {
    let gens = s.generators().to_vec();
    let red = |x: FreeElement| -> Result<FreeElement, String> {
        match ideal {
            Some(i) => e(i.reduce(&x)),
            None => Ok(x),
        }
    };
    let basis = |side: Side, d: &[u32]| -> Result<Vec<Word>, String> {
        match ideal {
            Some(i) => e(i.normal_words(side, d)),
            None => Ok(words_of(d, &gens)),
        }
    };
    let mut table = BTreeMap::new();
    table.insert(Word::empty(), FreeElement::one(Side::Positive));
    for grade in 1..=k {
        for d in multidegrees_of_grade(grade as u32, gens.len()) {
            let lower = basis(Side::Negative, &d)?;
            let upper = basis(Side::Positive, &d)?;
            let (nu, nv) = (lower.len(), upper.len());
            let n = nu * nv;
            let mut rows: Vec<Vec<Scalar>> = Vec::new();
            for (gi, &g) in gens.iter().enumerate() {
                if d[gi] == 0 {
                    continue;
                }
                let mut dd = d.clone();
                dd[gi] -= 1;
                let targets = basis(Side::Positive, &dd)?;
                let prev = basis(Side::Negative, &dd)?;
                let dv: Vec<FreeElement> = upper
                    .iter()
                    .map(|v| red(left_minus(s, g, v)))
                    .collect::<Result<_, _>>()?;
                // [e_{−u}] Σ_{u′} e_{−γ}e_{−u′} ⊗ t_{u′}
                let mut rhs: Vec<FreeElement> = vec![FreeElement::zero(Side::Positive); nu];
                for up in &prev {
                    let w = red(FreeElement::word(
                        Side::Negative,
                        Word::letter(g).concat(up),
                        Scalar::one(),
                    ))?;
                    for (ui, u) in lower.iter().enumerate() {
                        let c = w.coeff(u);
                        if !c.is_zero() {
                            rhs[ui] = rhs[ui].add(&table[up].scale(&c)).unwrap();
                        }
                    }
                }
                for (ui, r) in rhs.iter().enumerate() {
                    for z in &targets {
                        let mut row = vec![Scalar::zero(); n + 1];
                        for (vi, x) in dv.iter().enumerate() {
                            row[ui * nv + vi] = x.coeff(z);
                        }
                        row[n] = r.coeff(z);
                        rows.push(row);
                    }
                }
            }
            let x = naive_solve(rows, n)
                .ok_or_else(|| format!("oracle: no unique solution at {d:?}"))?;
            for (ui, u) in lower.iter().enumerate() {
                let t = FreeElement::from_terms(
                    Side::Positive,
                    upper
                        .iter()
                        .cloned()
                        .zip(x[ui * nv..(ui + 1) * nv].iter().cloned()),
                );
                table.insert(u.clone(), t);
            }
        }
    }
    Ok(table)
}

fn oracle_equivalence() -> Outcome {
    let t0 = Instant::now();
    let sl3 = e(parse_spec(
        r#"{"preset": {"type": "single-q", "cartan_matrix": [[2,-1],[-1,2]]}}"#,
    ))?
    .spec;
    let mut blocks = 0;
    for (name, s, quotient) in [
        ("generic", symbolic(&[1, 2]), false),
        ("σ12=1 quotient", sigma12_one(), true),
        ("single-q sl3", sl3, true),
    ] {
        let ideal = if quotient {
            Some(Arc::new(e(ObstructionIdeal::build(&s, 4))?))
        } else {
            None
        };
        let t: TCoefficients = e(solve_t(&s, 4, ideal.as_deref()))?;
        let want = oracle(&s, 4, ideal.as_deref())?;
        ensure(
            t.table.len() == want.len(),
            format!("{name}: {} vs {} lower words", t.table.len(), want.len()),
        )?;
        for (u, x) in &want {
            ensure(
                t.table.get(u) == Some(x),
                format!("{name}: t_{} differs", u.render(Side::Negative)),
            )?;
        }
        blocks += (1..=4)
            .map(|g| multidegrees_of_grade(g, 2).len())
            .sum::<usize>();
    }
    Ok(format!(
        "{blocks} multidegree blocks identical on three specs in {:?}",
        t0.elapsed()
    ))
}

// 11 -----------------------------------------------------------------------

fn point_spec(s: &AlgebraSpec, vals: &BTreeMap<(Letter, Letter), BigRational>) -> AlgebraSpec {
    let mut sp = Specialization::new();
    for (&(i, j), v) in vals {
        sp.set(Symbol::Pair(i, j), &Scalar::from_rational(v.clone()))
            .unwrap();
    }
    s.specialize(&sp).unwrap()
}

fn b4_factors() -> Outcome {
    let t0 = Instant::now();
    let gens = [1u16, 2, 3, 4];
    let s = symbolic(&gens);
    let d = [1, 1, 1, 1];
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let draw = |rng: &mut ChaCha8Rng| -> BTreeMap<(Letter, Letter), BigRational> {
        let mut m = BTreeMap::new();
        for &i in &gens {
            for &j in &gens {
                m.insert((i, j), random_rational(rng));
            }
        }
        m
    };
    let det_at = |v: &BTreeMap<(Letter, Letter), BigRational>| {
        e(constants_determinant(&d, &point_spec(&s, v)))
    };
    let mut checked = 0;
    for &i in &gens {
        for &j in &gens {
            if i >= j {
                continue;
            }
            for _ in 0..2 {
                let mut v = draw(&mut rng);
                let qij = v[&(i, j)].clone();
                v.insert((j, i), qij.recip());
                let det = det_at(&v)?;
                ensure(det.is_zero(), format!("nonzero on 1−σ{i}{j}=0: {det}"))?;
                checked += 1;
            }
        }
    }
    for _ in 0..2 {
        let mut v = draw(&mut rng);
        let rest = v
            .iter()
            .filter(|(&(i, j), _)| i != j && (i, j) != (4, 3))
            .fold(BigRational::one(), |acc, (_, x)| acc * x);
        v.insert((4, 3), rest.recip());
        let det = det_at(&v)?;
        ensure(det.is_zero(), format!("nonzero on 1−∏σ=0: {det}"))?;
        checked += 1;
    }
    let det = det_at(&draw(&mut rng))?;
    ensure(!det.is_zero(), "zero at a generic point")?;
    within(t0, Duration::from_secs(120))?;
    Ok(format!(
        "zero on {checked} hypersurface points, nonzero at a generic point, in {:?}",
        t0.elapsed()
    ))
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("grade-2 closed forms", grade_two_closed_forms),
        ("determinants", determinants),
        ("constants catalogue", constants_catalogue),
        ("q-Serre", q_serre),
        ("Yang–Baxter, generic", yang_baxter_generic),
        ("left/right agreement", left_right),
        ("quotient path", quotient_path),
        ("deformation", deformation),
        ("Hopf", hopf),
        ("oracle equivalence", oracle_equivalence),
        ("B4 factor structure", b4_factors),
    ];
    let mut failed = Vec::new();
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(msg) => println!("criterion {:>2} PASS  {name}: {msg}", i + 1),
            Err(msg) => {
                println!("criterion {:>2} FAIL  {name}: {msg}", i + 1);
                failed.push(i + 1);
            }
        }
    }
    assert!(failed.is_empty(), "failing criteria: {failed:?}");
}
