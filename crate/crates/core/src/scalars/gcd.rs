//! Multivariate polynomial gcd over ℚ by recursive primitive remainder
//! sequences. Inputs must have nonnegative exponents.

use num_traits::{One, Zero};

use super::poly::{Monomial, Poly, Symbol};

/// Scales so the leading coefficient is 1.
pub fn monic(p: &Poly) -> Poly {
    if p.is_zero() {
        return Poly::zero();
    }
    let lc = p.leading_coeff();
    if lc.is_one() {
        p.clone()
    } else {
        p.scale(&lc.recip())
    }
}

/// Monic gcd of two polynomials.
pub fn gcd(a: &Poly, b: &Poly) -> Poly {
    if a.is_zero() {
        return monic(b);
    }
    if b.is_zero() {
        return monic(a);
    }
    if a.is_constant() || b.is_constant() {
        return Poly::one();
    }
    let ma = a.monomial_content();
    let mb = b.monomial_content();
    let m = ma.meet(&mb);
    let a0 = a.mul_monomial(&ma.inv());
    let b0 = b.mul_monomial(&mb.inv());
    gcd_no_monomial(&a0, &b0).mul_monomial(&m)
}

fn gcd_no_monomial(a: &Poly, b: &Poly) -> Poly {
    if a.is_constant() || b.is_constant() {
        return Poly::one();
    }
    if a == b {
        return monic(a);
    }
    let sa = a.symbols();
    let sb = b.symbols();
    if let Some(&x) = sa.iter().find(|s| !sb.contains(s)) {
        return gcd(&content(a, x), b);
    }
    if let Some(&x) = sb.iter().find(|s| !sa.contains(s)) {
        return gcd(a, &content(b, x));
    }
    // main variable: the common symbol of lowest combined degree keeps the
    // remainder sequence short
    let x = *sa
        .iter()
        .min_by_key(|&&s| (a.degree_in(s) + b.degree_in(s), s))
        .unwrap();
    if a.is_monomial() || b.is_monomial() {
        return Poly::one();
    }
    let ca = content(a, x);
    let cb = content(b, x);
    let pa = a.div_exact(&ca).expect("content divides");
    let pb = b.div_exact(&cb).expect("content divides");
    let c = gcd(&ca, &cb);
    let g = primitive_prs(pa, pb, x);
    monic(&c.mul(&g))
}

/// Gcd of the coefficients of `p` viewed as a polynomial in `x`.
pub fn content(p: &Poly, x: Symbol) -> Poly {
    let mut g = Poly::zero();
    for (_, c) in p.coeffs_in(x) {
        g = gcd(&g, &c);
        if g.is_one() {
            break;
        }
    }
    g
}

fn primitive_part(p: &Poly, x: Symbol) -> Poly {
    let c = content(p, x);
    if c.is_one() {
        p.clone()
    } else {
        p.div_exact(&c).expect("content divides")
    }
}

fn coeff_at(p: &Poly, x: Symbol, e: i32) -> Poly {
    p.coeffs_in(x).remove(&e).unwrap_or_else(Poly::zero)
}

/// Pseudo-remainder of `a` by `b` in the variable `x`.
pub fn prem(a: &Poly, b: &Poly, x: Symbol) -> Poly {
    let db = b.degree_in(x);
    let lb = coeff_at(b, x, db);
    let mut r = a.clone();
    while !r.is_zero() {
        let dr = r.degree_in(x);
        if dr < db {
            break;
        }
        let lr = coeff_at(&r, x, dr);
        let shift = Monomial::pow(x, dr - db);
        r = r.mul(&lb).sub(&b.mul_monomial(&shift).mul(&lr));
    }
    r
}

fn primitive_prs(mut a: Poly, mut b: Poly, x: Symbol) -> Poly {
    if a.degree_in(x) == 0 || b.degree_in(x) == 0 {
        return Poly::one();
    }
    loop {
        if a.degree_in(x) < b.degree_in(x) {
            std::mem::swap(&mut a, &mut b);
        }
        let r = prem(&a, &b, x);
        if r.is_zero() {
            return monic(&b);
        }
        if r.degree_in(x) == 0 {
            return Poly::one();
        }
        a = b;
        b = primitive_part(&r, x);
        // drop rational content so coefficients stay small
        let lc = b.leading_coeff();
        if !lc.is_zero() && !lc.is_one() {
            b = b.scale(&lc.recip());
        }
    }
}
