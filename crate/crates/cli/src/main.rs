use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::{json, Value};

use qforge_core::algebra::Algebra;
use qforge_core::deformation::{
    check_rejected_types, deform_r_combination, find_admissible_pairs, verify_first_order_yb,
    AdmissiblePair, DrivingKind,
};
use qforge_core::error::{Error, Obstruction};
use qforge_core::freealg::{multidegrees_of_grade, AlgebraSpec, Letter};
use qforge_core::hopf::{
    check_axioms, check_homomorphism, check_ideal_compatibility, check_intertwiner,
    deformed_hopf_check, generator_samples, HopfReport,
};
use qforge_core::qdiff::{
    constants_determinant, find_constants, is_constant, qserre_relation, serre_exponent,
    DerivativeKind,
};
use qforge_core::quotient::ObstructionIdeal;
use qforge_core::report::{
    free_element_json, latex_free, latex_scalar, rmatrix_latex, rmatrix_text,
};
use qforge_core::rmatrix::{
    assemble_r, solve_t, solve_t_right, Direction, Provenance, RMatrix, TCoefficients,
};
use qforge_core::scalars::{eval_at, parse_scalar, random_point};
use qforge_core::specfile::{read_spec, ParsedSpec};
use qforge_core::yangbaxter::{yb_check_bruteforce, yb_check_structural};
use qforge_core::Result;

#[derive(Parser)]
#[command(
    name = "qforge",
    version,
    about = "Standard R-matrices for generalized quantum groups, exactly"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// JSON algebra spec.
    #[arg(long, global = true)]
    spec: Option<PathBuf>,
    /// Truncation grade K.
    #[arg(long, global = true, default_value_t = 2)]
    grade: usize,
    /// Pass to the quotient by the obstruction ideal instead of aborting.
    #[arg(long, global = true)]
    quotient: bool,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for evaluation-based checks.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Latex,
    Text,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Section3,
    LeftMinus,
    RightMinus,
    LeftPlus,
    RightPlus,
}

impl From<Kind> for DerivativeKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Section3 => DerivativeKind::Section3,
            Kind::LeftMinus => DerivativeKind::LeftMinus,
            Kind::RightMinus => DerivativeKind::RightMinus,
            Kind::LeftPlus => DerivativeKind::LeftPlus,
            Kind::RightPlus => DerivativeKind::RightPlus,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Both,
    Structural,
    Bruteforce,
}

#[derive(Clone, Copy, ValueEnum)]
enum Dir {
    Left,
    Right,
}

#[derive(Clone, Copy, ValueEnum)]
enum RejectedKind {
    MinusPlus,
    PlusPlus,
    MinusMinus,
}

#[derive(Subcommand)]
enum Command {
    /// Null spaces of the derivative operators, per multidegree.
    Constants {
        #[arg(long, value_enum, default_value_t = Kind::Section3)]
        kind: Kind,
        /// Single multidegree, e.g. 1,1,1 (default: every multidegree up to --grade).
        #[arg(long, value_delimiter = ',')]
        multidegree: Option<Vec<u32>>,
    },
    /// Determinant of the grade-n derivative matrix.
    Determinant {
        #[arg(long, value_delimiter = ',')]
        multidegree: Option<Vec<u32>>,
        /// Also evaluate at this many seeded random rational points.
        #[arg(long, default_value_t = 0)]
        points: usize,
    },
    /// q-Serre relations and Serre exponents.
    Serre {
        #[arg(long, value_enum, default_value_t = Kind::Section3)]
        kind: Kind,
        #[arg(long)]
        alpha: Option<Letter>,
        #[arg(long)]
        beta: Option<Letter>,
        /// Exponent k (default: the smallest k <= --grade making the relation constant).
        #[arg(long)]
        k: Option<u32>,
    },
    /// Solve for the t-coefficients and serialize R.
    Rmatrix {
        #[arg(long, value_enum, default_value_t = Dir::Left)]
        direction: Dir,
    },
    /// Yang–Baxter relation grade by grade.
    YbCheck {
        #[arg(long, value_enum, default_value_t = Method::Both)]
        method: Method,
        /// Check a serialized R instead of solving.
        #[arg(long)]
        rmatrix: Option<PathBuf>,
    },
    /// Admissible pairs; optionally the feasibility of a rejected driving type.
    Pairs {
        #[arg(long, value_enum)]
        check_type: Option<RejectedKind>,
        #[arg(long)]
        sigma: Option<Letter>,
        #[arg(long)]
        rho: Option<Letter>,
    },
    /// First-order deformation R + εR₁ and its Yang–Baxter check.
    Deform {
        #[arg(long)]
        sigma: Option<Letter>,
        #[arg(long)]
        rho: Option<Letter>,
        #[arg(long, default_value = "1")]
        coeff: String,
    },
    /// Hopf axioms, ideal compatibility, ΔR = RΔ′ and the deformed maps.
    HopfCheck {
        #[arg(long)]
        sigma: Option<Letter>,
        #[arg(long)]
        rho: Option<Letter>,
        #[arg(long, default_value = "1")]
        coeff: String,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Constants { .. } => "constants",
            Command::Determinant { .. } => "determinant",
            Command::Serre { .. } => "serre",
            Command::Rmatrix { .. } => "rmatrix",
            Command::YbCheck { .. } => "yb-check",
            Command::Pairs { .. } => "pairs",
            Command::Deform { .. } => "deform",
            Command::HopfCheck { .. } => "hopf-check",
        }
    }
}

/// A command's result in all three renderings.
struct Outcome {
    pass: bool,
    json: Value,
    text: String,
    latex: Option<String>,
}

impl Outcome {
    fn info(json: Value, text: String) -> Self {
        Outcome {
            pass: true,
            json,
            text,
            latex: None,
        }
    }
}

fn load(common: &Common) -> Result<ParsedSpec> {
    let path = common
        .spec
        .as_ref()
        .ok_or_else(|| Error::Parse("--spec FILE is required".into()))?;
    read_spec(path)
}

fn multidegrees(
    spec: &AlgebraSpec,
    given: &Option<Vec<u32>>,
    lo: usize,
    hi: usize,
) -> Result<Vec<Vec<u32>>> {
    match given {
        Some(d) => {
            if d.len() != spec.rank() {
                return Err(Error::Invalid(format!(
                    "--multidegree has {} entries, the spec has {} generators",
                    d.len(),
                    spec.rank()
                )));
            }
            Ok(vec![d.clone()])
        }
        None => Ok((lo..=hi)
            .flat_map(|g| multidegrees_of_grade(g as u32, spec.rank()))
            .collect()),
    }
}

fn build_ideal(
    spec: &AlgebraSpec,
    k: usize,
    quotient: bool,
) -> Result<Option<Arc<ObstructionIdeal>>> {
    Ok(if quotient && k >= 2 {
        Some(Arc::new(ObstructionIdeal::build(spec, k)?))
    } else {
        None
    })
}

fn build(spec: &AlgebraSpec, k: usize, quotient: bool, dir: Dir) -> Result<RMatrix> {
    let ideal = build_ideal(spec, k, quotient)?;
    let t = match dir {
        Dir::Left => solve_t(spec, k, ideal.as_deref())?,
        Dir::Right => solve_t_right(spec, k, ideal.as_deref())?,
    };
    assemble_r(spec, &t, k, ideal)
}

fn pairs_from(
    spec: &AlgebraSpec,
    sigma: Option<Letter>,
    rho: Option<Letter>,
) -> Result<Vec<AdmissiblePair>> {
    match (sigma, rho) {
        (Some(s), Some(r)) => Ok(vec![AdmissiblePair::new(spec, s, r)?]),
        (None, None) => Ok(find_admissible_pairs(spec)),
        _ => Err(Error::Invalid(
            "give both --sigma and --rho, or neither".into(),
        )),
    }
}

fn run_constants(
    spec: &AlgebraSpec,
    c: &Common,
    kind: Kind,
    md: &Option<Vec<u32>>,
) -> Result<Outcome> {
    let kind: DerivativeKind = kind.into();
    let ds = multidegrees(spec, md, 1, c.grade)?;
    let reps = ds
        .par_iter()
        .map(|d| find_constants(kind, d, spec))
        .collect::<Result<Vec<_>>>()?;
    let mut text = String::new();
    let mut latex = String::from("\\begin{align*}\n");
    let items: Vec<Value> = reps
        .iter()
        .map(|r| {
            text.push_str(&format!(
                "{:?}: {} constant(s) among {} words, det = {}\n",
                r.multidegree,
                r.basis.len(),
                r.matrix_dim,
                r.determinant
            ));
            for b in &r.basis {
                text.push_str(&format!("  {b}\n"));
                latex.push_str(&format!(
                    "C_{{{:?}}} &= {} \\\\\n",
                    r.multidegree,
                    latex_free(b)
                ));
            }
            json!({
                "multidegree": r.multidegree,
                "dimension": r.basis.len(),
                "words": r.matrix_dim,
                "determinant": r.determinant.to_string(),
                "basis": r.basis.iter().map(free_element_json).collect::<Vec<_>>(),
            })
        })
        .collect();
    latex.push_str("\\end{align*}\n");
    Ok(Outcome {
        pass: true,
        json: json!({ "kind": format!("{kind:?}"), "multidegrees": items }),
        text,
        latex: Some(latex),
    })
}

fn run_determinant(
    spec: &AlgebraSpec,
    c: &Common,
    md: &Option<Vec<u32>>,
    points: usize,
) -> Result<Outcome> {
    let ds = multidegrees(spec, md, c.grade.max(2), c.grade.max(2))?;
    let dets = ds
        .par_iter()
        .map(|d| constants_determinant(d, spec))
        .collect::<Result<Vec<_>>>()?;
    let mut text = String::new();
    let mut latex = String::from("\\begin{align*}\n");
    let mut items = Vec::new();
    for (d, det) in ds.iter().zip(&dets) {
        text.push_str(&format!("{d:?}: {det}\n"));
        latex.push_str(&format!("\\det_{{{d:?}}} &= {} \\\\\n", latex_scalar(det)));
        let syms = det.symbols();
        let mut samples = Vec::new();
        for i in 0..points {
            let p = random_point(&syms, c.seed.wrapping_add(i as u64));
            let v = eval_at(det, &p)?;
            text.push_str(&format!("  at point {i}: {v}\n"));
            samples.push(json!({
                "point": p.iter().map(|(s, x)| (s.to_string(), json!(x.to_string()))).collect::<serde_json::Map<_, _>>(),
                "value": v.to_string(),
            }));
        }
        items.push(json!({ "multidegree": d, "determinant": det.to_string(), "samples": samples }));
    }
    latex.push_str("\\end{align*}\n");
    Ok(Outcome {
        pass: true,
        json: json!({ "seed": c.seed, "determinants": items }),
        text,
        latex: Some(latex),
    })
}

fn run_serre(
    spec: &AlgebraSpec,
    c: &Common,
    kind: Kind,
    alpha: Option<Letter>,
    beta: Option<Letter>,
    k: Option<u32>,
) -> Result<Outcome> {
    let kind: DerivativeKind = kind.into();
    let gens = spec.generators();
    let pairs: Vec<(Letter, Letter)> = match (alpha, beta) {
        (Some(a), Some(b)) => vec![(a, b)],
        (None, None) => gens
            .iter()
            .flat_map(|&a| gens.iter().filter(move |&&b| b != a).map(move |&b| (a, b)))
            .collect(),
        _ => {
            return Err(Error::Invalid(
                "give both --alpha and --beta, or neither".into(),
            ))
        }
    };
    let mut text = String::new();
    let mut items = Vec::new();
    for (a, b) in pairs {
        let kk = k.or_else(|| serre_exponent(a, b, spec, c.grade as u32));
        let Some(kk) = kk else {
            text.push_str(&format!("({a},{b}): no Serre exponent <= {}\n", c.grade));
            items.push(json!({ "alpha": a, "beta": b, "k": null }));
            continue;
        };
        match qserre_relation(a, b, kk, spec, kind) {
            Ok(rel) => {
                let verified = is_constant(spec, kind, &rel.element)?;
                text.push_str(&format!(
                    "({a},{b}) k={kk} A={}: {} [constant: {}, verified: {verified}]\n",
                    1 - kk as i64,
                    rel.element,
                    rel.is_constant
                ));
                items.push(json!({
                    "alpha": a, "beta": b, "k": kk,
                    "cartan_entry": 1 - kk as i64,
                    "relation": free_element_json(&rel.element),
                    "coefficients": rel.coefficients.iter().map(|x| x.to_string()).collect::<Vec<_>>(),
                    "is_constant": rel.is_constant,
                    "verified_constant": verified,
                }));
            }
            Err(e) => {
                text.push_str(&format!("({a},{b}) k={kk}: {e}\n"));
                items.push(json!({ "alpha": a, "beta": b, "k": kk, "error": e.to_string() }));
            }
        }
    }
    Ok(Outcome::info(
        json!({ "kind": format!("{kind:?}"), "relations": items }),
        text,
    ))
}

fn run_rmatrix(spec: &AlgebraSpec, c: &Common, dir: Dir) -> Result<Outcome> {
    let r = build(spec, c.grade, c.quotient, dir)?;
    Ok(Outcome {
        pass: true,
        json: r.to_json(),
        text: rmatrix_text(&r),
        latex: Some(rmatrix_latex(&r)),
    })
}

fn load_rmatrix(spec: &AlgebraSpec, c: &Common, path: &PathBuf) -> Result<RMatrix> {
    let src = std::fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    let v: Value =
        serde_json::from_str(&src).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    let doc = if v.get("result").is_some() {
        &v["result"]
    } else {
        &v
    };
    let gens: Vec<Letter> = serde_json::from_value(doc["generators"].clone())
        .map_err(|e| Error::Parse(format!("generators: {e}")))?;
    if gens != spec.generators() {
        return Err(Error::Invalid(
            "serialized R has different generators from the spec".into(),
        ));
    }
    let k = doc["truncation"]
        .as_u64()
        .ok_or_else(|| Error::Parse("truncation missing".into()))? as usize;
    let direction = match doc["direction"].as_str() {
        Some("right") => Direction::Right,
        _ => Direction::Left,
    };
    let quotient = !doc["ideal"].is_null() || c.quotient;
    let ideal = build_ideal(spec, k, quotient)?;
    let provenance = match doc["provenance"].as_array() {
        Some(p) => p
            .iter()
            .map(|x| match x.as_str() {
                Some("unique") => Ok(Provenance::Unique),
                Some("unique-modulo-quotient") => Ok(Provenance::UniqueModuloQuotient),
                _ => Err(Error::Parse(format!("bad provenance {x}"))),
            })
            .collect::<Result<Vec<_>>>()?,
        None => vec![Provenance::Unique; k + 1],
    };
    let t = TCoefficients {
        direction,
        max_grade: k,
        table: RMatrix::table_from_json(doc)?,
        provenance,
    };
    assemble_r(spec, &t, k, ideal)
}

fn run_yb(
    spec: &AlgebraSpec,
    c: &Common,
    method: Method,
    file: &Option<PathBuf>,
) -> Result<Outcome> {
    let r = match file {
        Some(p) => load_rmatrix(spec, c, p)?,
        None => build(spec, c.grade, c.quotient, Dir::Left)?,
    };
    let k = c.grade.min(r.truncation);
    let mut reps = Vec::new();
    if matches!(method, Method::Both | Method::Structural) {
        reps.push(yb_check_structural(&r, k, k)?);
    }
    if matches!(method, Method::Both | Method::Bruteforce) {
        reps.push(yb_check_bruteforce(&r, k)?);
    }
    Ok(Outcome {
        pass: reps.iter().all(|r| r.pass()),
        json: json!({ "grade": k, "quotient": r.ideal.is_some(), "reports": reps.iter().map(|r| r.to_json()).collect::<Vec<_>>() }),
        text: reps.iter().map(|r| r.text()).collect(),
        latex: None,
    })
}

fn run_pairs(
    spec: &AlgebraSpec,
    kind: Option<RejectedKind>,
    sigma: Option<Letter>,
    rho: Option<Letter>,
) -> Result<Outcome> {
    let pairs = find_admissible_pairs(spec);
    let mut text = format!("{} admissible pair(s) (pairing-level test)\n", pairs.len());
    for p in &pairs {
        text.push_str(&format!(
            "  (σ={}, ρ={}){}\n",
            p.sigma,
            p.rho,
            if p.degenerate {
                " [degenerate: excluded by nondegeneracy]"
            } else {
                ""
            }
        ));
    }
    let mut out = json!({
        "admissibility": "pairing-level: q[β,ρ]·q[σ,β] = 1 for every generator β",
        "pairs": pairs.iter().map(|p| p.to_json()).collect::<Vec<_>>(),
    });
    if let Some(k) = kind {
        let dk = match k {
            RejectedKind::MinusPlus => DrivingKind::MinusPlus,
            RejectedKind::PlusPlus => DrivingKind::PlusPlus,
            RejectedKind::MinusMinus => DrivingKind::MinusMinus,
        };
        let gens = spec.generators();
        let targets: Vec<(Letter, Letter)> = match (sigma, rho) {
            (Some(s), Some(r)) => vec![(s, r)],
            (None, None) => gens
                .iter()
                .flat_map(|&s| gens.iter().map(move |&r| (s, r)))
                .collect(),
            _ => {
                return Err(Error::Invalid(
                    "give both --sigma and --rho, or neither".into(),
                ))
            }
        };
        let reps = targets
            .iter()
            .map(|&(s, r)| check_rejected_types(spec, dk, s, r))
            .collect::<Result<Vec<_>>>()?;
        for r in &reps {
            text.push_str(&format!(
                "{} (σ={}, ρ={}): {} ({})\n",
                dk.label(),
                r.sigma,
                r.rho,
                if r.rejected {
                    "rejected"
                } else {
                    "not rejected"
                },
                r.reason
            ));
            for c in &r.conditions {
                text.push_str(&format!(
                    "  [{}] {}: {}{}\n",
                    if c.holds { "holds" } else { "fails" },
                    c.name,
                    c.statement,
                    if c.implied { " (implied)" } else { "" }
                ));
            }
        }
        out["rejected_types"] = Value::Array(reps.iter().map(|r| r.to_json()).collect());
    }
    Ok(Outcome::info(out, text))
}

fn run_deform(
    spec: &AlgebraSpec,
    c: &Common,
    sigma: Option<Letter>,
    rho: Option<Letter>,
    coeff: &str,
) -> Result<Outcome> {
    let pairs = pairs_from(spec, sigma, rho)?;
    let coeff = parse_scalar(coeff)?;
    let k = c.grade;
    let r = build(spec, k + 1, c.quotient, Dir::Left)?;
    let mut text = String::new();
    let mut items = Vec::new();
    let mut pass = !pairs.is_empty();
    if pairs.is_empty() {
        text.push_str("no admissible pairs: nothing to deform\n");
    }
    for p in &pairs {
        let d = deform_r_combination(&r, &[(p.clone(), coeff.clone())], k)?;
        let rep = verify_first_order_yb(&r, &d, k)?;
        pass &= rep.pass();
        text.push_str(&format!(
            "pair (σ={}, ρ={}): R₁ has {} terms\n",
            p.sigma,
            p.rho,
            d.r1.body.len()
        ));
        text.push_str(&rep.text());
        items.push(json!({ "deformation": d.to_json(), "yb": rep.to_json() }));
    }
    Ok(Outcome {
        pass,
        json: json!({ "grade": k, "results": items }),
        text,
        latex: None,
    })
}

fn run_hopf(
    spec: &AlgebraSpec,
    c: &Common,
    sigma: Option<Letter>,
    rho: Option<Letter>,
    coeff: &str,
) -> Result<Outcome> {
    let k = c.grade;
    let r = build(spec, k + 1, c.quotient, Dir::Left)?;
    let alg = Algebra::new(spec).with_ideal(r.ideal.clone());
    let gens = generator_samples(&alg);
    let mut samples = gens.clone();
    for (nx, x) in &gens {
        for (ny, y) in &gens {
            samples.push((format!("{nx}·{ny}"), alg.mul(x, y)));
        }
    }
    let mut sections: Vec<(&str, HopfReport)> = vec![
        ("axioms", check_axioms(&alg, &samples)?),
        ("homomorphism", check_homomorphism(&alg, &gens)?),
        ("ideal", check_ideal_compatibility(&alg)?),
        ("intertwiner", check_intertwiner(&r, k)?),
    ];
    let coeff = parse_scalar(coeff)?;
    let pairs = match (sigma, rho) {
        (None, None) => find_admissible_pairs(spec)
            .into_iter()
            .filter(|p| !p.degenerate)
            .collect(),
        _ => pairs_from(spec, sigma, rho)?,
    };
    let mut deformed = HopfReport::default();
    for p in &pairs {
        let d = deform_r_combination(&r, &[(p.clone(), coeff.clone())], k)?;
        deformed.extend(deformed_hopf_check(&r, &d, k)?);
    }
    if !pairs.is_empty() {
        sections.push(("deformed", deformed));
    }
    let mut text = String::new();
    let mut obj = serde_json::Map::new();
    for (name, rep) in &sections {
        text.push_str(&format!("{name}: {}", rep.text()));
        obj.insert(name.to_string(), rep.to_json());
    }
    obj.insert("grade".into(), json!(k));
    obj.insert(
        "pairs".into(),
        Value::Array(pairs.iter().map(|p| p.to_json()).collect()),
    );
    Ok(Outcome {
        pass: sections.iter().all(|(_, r)| r.pass()),
        json: Value::Object(obj),
        text,
        latex: None,
    })
}

fn run(cli: &Cli, parsed: &ParsedSpec) -> Result<Outcome> {
    let spec = &parsed.spec;
    let c = &cli.common;
    match &cli.command {
        Command::Constants { kind, multidegree } => run_constants(spec, c, *kind, multidegree),
        Command::Determinant {
            multidegree,
            points,
        } => run_determinant(spec, c, multidegree, *points),
        Command::Serre {
            kind,
            alpha,
            beta,
            k,
        } => run_serre(spec, c, *kind, *alpha, *beta, *k),
        Command::Rmatrix { direction } => run_rmatrix(spec, c, *direction),
        Command::YbCheck { method, rmatrix } => run_yb(spec, c, *method, rmatrix),
        Command::Pairs {
            check_type,
            sigma,
            rho,
        } => run_pairs(spec, *check_type, *sigma, *rho),
        Command::Deform { sigma, rho, coeff } => run_deform(spec, c, *sigma, *rho, coeff),
        Command::HopfCheck { sigma, rho, coeff } => run_hopf(spec, c, *sigma, *rho, coeff),
    }
}

fn obstruction_outcome(o: &Obstruction) -> Outcome {
    let mut text = format!(
        "obstruction at grade {}, multidegree {:?}; determinant {}\n",
        o.grade, o.multidegree, o.determinant
    );
    for (cst, closed) in o.constants.iter().zip(&o.c_closed) {
        text.push_str(&format!("  constant: {cst} (C-closed: {closed})\n"));
    }
    text.push_str("rerun with --quotient to solve on the quotient algebra\n");
    Outcome {
        pass: false,
        json: json!({
            "obstruction": {
                "grade": o.grade,
                "multidegree": o.multidegree,
                "determinant": o.determinant,
                "constants": o.constants.iter().map(free_element_json).collect::<Vec<_>>(),
                "c_closed": o.c_closed,
            }
        }),
        text: text.clone(),
        latex: Some(format!(
            "\\begin{{align*}}\n{}\\end{{align*}}\n",
            o.constants
                .iter()
                .map(|c| format!("C &= {} \\\\\n", latex_free(c)))
                .collect::<String>()
        )),
    }
}

fn render(cli: &Cli, parsed: Option<&ParsedSpec>, o: &Outcome) -> String {
    let name = cli.command.name();
    let warnings: Vec<String> = parsed.map(|p| p.warnings.clone()).unwrap_or_default();
    match cli.common.format {
        Format::Json => {
            let doc = json!({
                "command": name,
                "spec": parsed.and_then(|p| p.name.clone()),
                "base_root": parsed.map(|p| p.base_root),
                "warnings": warnings,
                "pass": o.pass,
                "result": o.json,
            });
            let mut s = serde_json::to_string_pretty(&doc).expect("serializable");
            s.push('\n');
            s
        }
        Format::Text => {
            let mut s = format!("qforge {name}\n");
            for w in &warnings {
                s.push_str(&format!("warning: {w}\n"));
            }
            s.push_str(&o.text);
            s.push_str(if o.pass { "PASS\n" } else { "FAIL\n" });
            s
        }
        Format::Latex => match &o.latex {
            Some(l) => l.clone(),
            None => format!("\\begin{{verbatim}}\n{}\\end{{verbatim}}\n", o.text),
        },
    }
}

fn emit(cli: &Cli, s: &str) -> std::result::Result<(), String> {
    match &cli.common.out {
        Some(p) => std::fs::write(p, s).map_err(|e| format!("{}: {e}", p.display())),
        None => {
            print!("{s}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(j) = cli.common.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build_global()
        {
            eprintln!("error: --jobs: {e}");
            return ExitCode::from(3);
        }
    }
    let parsed = match load(&cli.common) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(3);
        }
    };
    if !matches!(cli.common.format, Format::Text) || cli.common.out.is_some() {
        for w in &parsed.warnings {
            eprintln!("warning: {w}");
        }
    }
    let (outcome, code) = match run(&cli, &parsed) {
        Ok(o) => {
            let code = if o.pass { 0 } else { 1 };
            (o, code)
        }
        Err(Error::ObstructionDetected(o)) => (obstruction_outcome(&o), 2),
        Err(e @ Error::Inconsistent(_)) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
        Err(e) => {
            eprintln!("error: {}: {e}", cli.command.name());
            return ExitCode::from(3);
        }
    };
    if let Err(e) = emit(&cli, &render(&cli, Some(&parsed), &outcome)) {
        eprintln!("error: {e}");
        return ExitCode::from(3);
    }
    ExitCode::from(code)
}
