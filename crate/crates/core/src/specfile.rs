//! JSON algebra specs and the single-q preset expansion.
//!
//! ```json
//! {
//!   "generators": [1, 2],
//!   "qmatrix": {"1,2": "q[2,1]^-1", "2,2": "symbolic"},
//!   "specializations": [{"symbol": "q[1,1]", "value": "-1"}],
//!   "algebraic": {"symbol": "q", "lower_coeffs": ["1", "1"]},
//!   "preset": {"type": "single-q", "cartan_matrix": [[2,-1],[-1,2]],
//!              "symmetrizers": [1,1], "twist": [["0","-1/2"],["1/2","0"]]}
//! }
//! ```
//!
//! Missing qmatrix entries are symbolic unless a preset or `cartan` block
//! determines them; explicit entries must then agree with the derived value.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::Deserialize;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::freealg::{AlgebraSpec, CartanData, Letter};
use crate::scalars::{
    parse_scalar, parse_symbol, AlgebraicRelation, Scalar, Specialization, Symbol,
};

#[derive(Deserialize, Debug)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    #[serde(default)]
    name: Option<String>,
    #[serde(default)]
    generators: Option<Vec<Letter>>,
    #[serde(default)]
    qmatrix: BTreeMap<String, String>,
    #[serde(default)]
    cartan: Option<RawCartan>,
    #[serde(default)]
    specializations: Vec<RawSubst>,
    #[serde(default)]
    algebraic: Option<RawAlgebraic>,
    #[serde(default)]
    preset: Option<RawPreset>,
}

#[derive(Deserialize, Debug)]
#[serde(deny_unknown_fields)]
struct RawCartan {
    card_m: usize,
    h: Vec<Vec<Value>>,
    phi: Vec<Vec<Value>>,
}

#[derive(Deserialize, Debug)]
#[serde(deny_unknown_fields)]
struct RawSubst {
    symbol: String,
    value: String,
}

#[derive(Deserialize, Debug)]
#[serde(deny_unknown_fields)]
struct RawAlgebraic {
    symbol: String,
    lower_coeffs: Vec<Value>,
}

#[derive(Deserialize, Debug)]
#[serde(deny_unknown_fields)]
struct RawPreset {
    #[serde(rename = "type")]
    kind: String,
    cartan_matrix: Vec<Vec<i64>>,
    #[serde(default)]
    symmetrizers: Option<Vec<i64>>,
    #[serde(default)]
    twist: Option<Vec<Vec<Value>>>,
}

/// A validated spec plus what the validator noticed.
#[derive(Clone, Debug)]
pub struct ParsedSpec {
    pub name: Option<String>,
    pub spec: AlgebraSpec,
    /// The base symbol `q` stands for q^{1/base_root}.
    pub base_root: u32,
    pub warnings: Vec<String>,
}

fn rat(v: &Value, what: &str) -> Result<BigRational> {
    let bad = || {
        Error::Parse(format!(
            "{what}: expected an integer or a rational string, got {v}"
        ))
    };
    match v {
        Value::Number(n) => n
            .as_i64()
            .map(|i| BigRational::from_integer(i.into()))
            .ok_or_else(bad),
        Value::String(s) => {
            let s = s.trim();
            let (num, den) = match s.split_once('/') {
                Some((a, b)) => (a.trim(), b.trim()),
                None => (s, "1"),
            };
            let num: BigInt = num.parse().map_err(|_| bad())?;
            let den: BigInt = den.parse().map_err(|_| bad())?;
            if den.is_zero() {
                return Err(bad());
            }
            Ok(BigRational::new(num, den))
        }
        _ => Err(bad()),
    }
}

fn rat_matrix(m: &[Vec<Value>], what: &str) -> Result<Vec<Vec<BigRational>>> {
    m.iter()
        .enumerate()
        .map(|(i, r)| {
            r.iter()
                .enumerate()
                .map(|(j, v)| rat(v, &format!("{what}[{i}][{j}]")))
                .collect()
        })
        .collect()
}

/// q_{ij} = b^{D·φ_ij}, b the base symbol, D the common denominator.
fn from_exponents(phi: &[Vec<BigRational>]) -> Result<(Vec<Vec<Scalar>>, u32)> {
    let mut d = BigInt::one();
    for r in phi {
        for x in r {
            d = d.lcm(x.denom());
        }
    }
    let base = Scalar::symbol(Symbol::Base(0));
    let dr = BigRational::from_integer(d.clone());
    let q = phi
        .iter()
        .map(|r| {
            r.iter()
                .map(|x| {
                    let e = (x * &dr).to_integer();
                    e.to_i32()
                        .map(|e| base.powi(e))
                        .ok_or_else(|| Error::Invalid(format!("exponent {x} too large")))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let d = d
        .to_u32()
        .ok_or_else(|| Error::Invalid("exponent denominators too large".into()))?;
    Ok((q, d))
}

/// φ(α_i, α_j) = d_i a_ij / 2 + twist_ij for a symmetrizable Cartan matrix.
pub fn single_q_exponents(
    cartan: &[Vec<i64>],
    symmetrizers: &[i64],
    twist: Option<&[Vec<BigRational>]>,
) -> Result<Vec<Vec<BigRational>>> {
    let n = cartan.len();
    if n == 0 || cartan.iter().any(|r| r.len() != n) {
        return Err(Error::Invalid(
            "cartan_matrix must be square and nonempty".into(),
        ));
    }
    if symmetrizers.len() != n || symmetrizers.iter().any(|&d| d <= 0) {
        return Err(Error::Invalid(format!(
            "symmetrizers must be {n} positive integers"
        )));
    }
    for i in 0..n {
        for j in 0..n {
            if symmetrizers[i] * cartan[i][j] != symmetrizers[j] * cartan[j][i] {
                return Err(Error::Invalid(format!(
                    "cartan_matrix is not symmetrized by the given symmetrizers at ({i},{j})"
                )));
            }
        }
    }
    let zero = BigRational::zero();
    if let Some(t) = twist {
        if t.len() != n || t.iter().any(|r| r.len() != n) {
            return Err(Error::Invalid("twist must be an n×n matrix".into()));
        }
        for i in 0..n {
            for j in 0..n {
                if &t[i][j] + &t[j][i] != zero {
                    return Err(Error::Invalid(format!(
                        "twist must be antisymmetric; entries ({i},{j}) and ({j},{i}) disagree"
                    )));
                }
            }
        }
    }
    Ok((0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let s = BigRational::new((symmetrizers[i] * cartan[i][j]).into(), 2.into());
                    match twist {
                        Some(t) => s + &t[i][j],
                        None => s,
                    }
                })
                .collect()
        })
        .collect())
}

/// Single-q preset on generators 1..=n.
pub fn single_q(
    cartan: &[Vec<i64>],
    symmetrizers: &[i64],
    twist: Option<&[Vec<BigRational>]>,
) -> Result<(AlgebraSpec, u32)> {
    let phi = single_q_exponents(cartan, symmetrizers, twist)?;
    let (q, d) = from_exponents(&phi)?;
    let gens: Vec<Letter> = (1..=cartan.len() as Letter).collect();
    Ok((AlgebraSpec::from_matrix(&gens, q)?, d))
}

fn entry_key(key: &str) -> Result<(Letter, Letter)> {
    let bad = || Error::Parse(format!("qmatrix key {key:?} must look like \"i,j\""));
    let (a, b) = key.split_once(',').ok_or_else(bad)?;
    Ok((
        a.trim().parse().map_err(|_| bad())?,
        b.trim().parse().map_err(|_| bad())?,
    ))
}

pub fn parse_spec(src: &str) -> Result<ParsedSpec> {
    let raw: RawSpec = serde_json::from_str(src).map_err(|e| Error::Parse(e.to_string()))?;
    let mut warnings = Vec::new();

    let (derived, base_root, cartan_data, gens) = if let Some(p) = &raw.preset {
        if p.kind != "single-q" {
            return Err(Error::Parse(format!(
                "preset.type: unknown preset {:?} (only \"single-q\")",
                p.kind
            )));
        }
        let n = p.cartan_matrix.len();
        let sym = p.symmetrizers.clone().unwrap_or_else(|| vec![1; n]);
        let twist = p
            .twist
            .as_ref()
            .map(|t| rat_matrix(t, "preset.twist"))
            .transpose()?;
        let phi = single_q_exponents(&p.cartan_matrix, &sym, twist.as_deref())?;
        let (q, d) = from_exponents(&phi)?;
        let gens: Vec<Letter> = (1..=n as Letter).collect();
        if let Some(g) = &raw.generators {
            if g != &gens {
                return Err(Error::Parse(format!(
                    "generators: a rank-{n} preset uses generators 1..={n}"
                )));
            }
        }
        (Some(q), d, None, gens)
    } else {
        let gens = raw
            .generators
            .clone()
            .ok_or_else(|| Error::Parse("generators: required field missing".into()))?;
        match &raw.cartan {
            Some(c) => {
                let n = gens.len();
                let h = rat_matrix(&c.h, "cartan.h")?;
                let phi = rat_matrix(&c.phi, "cartan.phi")?;
                if h.len() != c.card_m || h.iter().any(|r| r.len() != n) {
                    return Err(Error::Parse(format!(
                        "cartan.h must be card_m × {n} (one column per generator)"
                    )));
                }
                if phi.len() != c.card_m || phi.iter().any(|r| r.len() != c.card_m) {
                    return Err(Error::Parse("cartan.phi must be card_m × card_m".into()));
                }
                let data = CartanData {
                    card_m: c.card_m,
                    h,
                    phi,
                };
                let pairings: Vec<Vec<BigRational>> = (0..n)
                    .map(|i| (0..n).map(|j| data.pairing(i, j)).collect())
                    .collect();
                let (q, d) = from_exponents(&pairings)?;
                (Some(q), d, Some(data), gens)
            }
            None => (None, 1, None, gens),
        }
    };

    let n = gens.len();
    let mut q: Vec<Vec<Scalar>> = match &derived {
        Some(q) => q.clone(),
        None => gens
            .iter()
            .map(|&i| gens.iter().map(|&j| Scalar::q(i, j)).collect())
            .collect(),
    };
    for (key, val) in &raw.qmatrix {
        let (a, b) = entry_key(key)?;
        let (Some(i), Some(j)) = (
            gens.iter().position(|&g| g == a),
            gens.iter().position(|&g| g == b),
        ) else {
            return Err(Error::Parse(format!(
                "qmatrix[{key:?}]: not a pair of generators"
            )));
        };
        let x = if val.trim() == "symbolic" {
            Scalar::q(a, b)
        } else {
            parse_scalar(val).map_err(|e| Error::Parse(format!("qmatrix[{key:?}]: {e}")))?
        };
        if let Some(d) = &derived {
            if d[i][j] != x {
                return Err(Error::Invalid(format!(
                    "qmatrix[{key:?}] = {x} is inconsistent with the Cartan data, which gives {}",
                    d[i][j]
                )));
            }
        }
        q[i][j] = x;
    }
    debug_assert_eq!(q.len(), n);
    let mut spec = AlgebraSpec::from_matrix(&gens, q)?;
    spec.cartan = cartan_data;

    if !raw.specializations.is_empty() {
        let mut s = Specialization::new();
        for (k, sub) in raw.specializations.iter().enumerate() {
            let sym = parse_symbol(&sub.symbol)
                .map_err(|e| Error::Parse(format!("specializations[{k}].symbol: {e}")))?;
            let v = parse_scalar(&sub.value)
                .map_err(|e| Error::Parse(format!("specializations[{k}].value: {e}")))?;
            s.set(sym, &v)
                .map_err(|e| Error::Parse(format!("specializations[{k}]: {e}")))?;
        }
        spec = spec.specialize(&s)?;
    }
    if let Some(a) = &raw.algebraic {
        let symbol =
            parse_symbol(&a.symbol).map_err(|e| Error::Parse(format!("algebraic.symbol: {e}")))?;
        let lower_coeffs = a
            .lower_coeffs
            .iter()
            .enumerate()
            .map(|(k, v)| rat(v, &format!("algebraic.lower_coeffs[{k}]")))
            .collect::<Result<Vec<_>>>()?;
        if lower_coeffs.is_empty() {
            return Err(Error::Parse("algebraic.lower_coeffs: empty".into()));
        }
        spec = spec.with_algebraic(AlgebraicRelation {
            symbol,
            lower_coeffs,
        });
    }

    if base_root > 1 {
        warnings.push(format!("the base symbol q stands for q^(1/{base_root})"));
    }
    for a in spec.degenerate_generators() {
        warnings.push(format!(
            "generator {a}: q[{a},b]·q[b,{a}] = 1 for every generator b \
             (pairing-level nondegeneracy fails)"
        ));
    }
    if spec.cartan.as_ref().is_some_and(|c| c.card_m > n) {
        warnings.push(
            "card_m exceeds the number of generators: pairing-level tests may be weaker \
             than the Cartan identities"
                .into(),
        );
    }
    Ok(ParsedSpec {
        name: raw.name,
        spec,
        base_root,
        warnings,
    })
}

pub fn read_spec(path: &std::path::Path) -> Result<ParsedSpec> {
    let src = std::fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    parse_spec(&src)
}
