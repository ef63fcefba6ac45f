//! Structured renderings shared by the reports: JSON values, LaTeX and plain
//! text.

use serde_json::{json, Value};

use crate::freealg::{FreeElement, Side, Word};
use crate::quotient::ObstructionIdeal;
use crate::rmatrix::{Direction, RMatrix};
use crate::scalars::Scalar;

pub fn side_label(s: Side) -> &'static str {
    match s {
        Side::Positive => "positive",
        Side::Negative => "negative",
    }
}

pub fn free_element_json(x: &FreeElement) -> Value {
    let terms: Vec<Value> = x
        .terms()
        .iter()
        .map(|(w, c)| json!({"word": w.render(x.side()), "coeff": c.to_string()}))
        .collect();
    json!({"side": side_label(x.side()), "terms": terms})
}

pub fn ideal_json(i: &ObstructionIdeal) -> Value {
    Value::Array(i.generators().iter().map(free_element_json).collect())
}

/// Rewrites the canonical ASCII rendering in TeX notation: `q[1,2]^-1` as
/// `q_{12}^{-1}`, `e[+1 +2]` as `e_{1}e_{2}`, `K'[1]` as `K'_{1}`.
pub fn latex_text(s: &str) -> String {
    let c: Vec<char> = s.chars().collect();
    let mut out = String::new();
    let mut i = 0;
    let read_until = |i: &mut usize, stop: char| -> String {
        let mut buf = String::new();
        while *i < c.len() && c[*i] != stop {
            buf.push(c[*i]);
            *i += 1;
        }
        *i += 1;
        buf
    };
    while i < c.len() {
        match c[i] {
            'q' | 'K' if c.get(i + 1) == Some(&'[') => {
                let head = c[i];
                i += 2;
                let inner = read_until(&mut i, ']');
                out.push_str(&format!("{head}_{{{}}}", inner.replace(',', "")));
            }
            'K' if c.get(i + 1) == Some(&'\'') && c.get(i + 2) == Some(&'[') => {
                i += 3;
                let inner = read_until(&mut i, ']');
                out.push_str(&format!("K'_{{{inner}}}"));
            }
            'e' if c.get(i + 1) == Some(&'[') => {
                i += 2;
                let inner = read_until(&mut i, ']');
                for l in inner.split_whitespace() {
                    let l = l.trim_start_matches('+');
                    out.push_str(&format!("e_{{{l}}}"));
                }
            }
            '^' => {
                i += 1;
                let mut e = String::new();
                if c.get(i) == Some(&'-') {
                    e.push('-');
                    i += 1;
                }
                while i < c.len() && c[i].is_ascii_digit() {
                    e.push(c[i]);
                    i += 1;
                }
                out.push_str(&format!("^{{{e}}}"));
            }
            '*' => {
                out.push_str("\\,");
                i += 1;
            }
            '⊗' => {
                out.push_str("\\otimes ");
                i += 1;
            }
            ch => {
                out.push(ch);
                i += 1;
            }
        }
    }
    out
}

pub fn latex_scalar(x: &Scalar) -> String {
    if x.denominator().is_one() {
        latex_text(&x.numerator().to_string())
    } else {
        format!(
            "\\frac{{{}}}{{{}}}",
            latex_text(&x.numerator().to_string()),
            latex_text(&x.denominator().to_string())
        )
    }
}

pub fn latex_free(x: &FreeElement) -> String {
    if x.is_zero() {
        return "0".into();
    }
    let parts: Vec<String> = x
        .terms()
        .iter()
        .map(|(w, c)| {
            let word = if w.is_empty() {
                "1".to_string()
            } else {
                latex_text(&w.render(x.side()))
            };
            if c.is_one() {
                word
            } else {
                format!("\\left({}\\right){word}", latex_scalar(c))
            }
        })
        .collect();
    parts.join(" + ")
}

/// t^{(α′)}_{(α)} table as an align* block.
pub fn rmatrix_latex(r: &RMatrix) -> String {
    let mut s = String::from("\\begin{align*}\n");
    let letters = |w: &Word| -> String {
        w.letters()
            .iter()
            .map(|l| l.to_string())
            .collect::<Vec<_>>()
            .join(" ")
    };
    for (lower, tu) in &r.t.table {
        for (upper, c) in tu.terms() {
            s.push_str(&format!(
                "t^{{({})}}_{{({})}} &= {} \\\\\n",
                letters(upper),
                letters(lower),
                latex_scalar(c)
            ));
        }
    }
    s.push_str("\\end{align*}\n");
    s
}

pub fn rmatrix_text(r: &RMatrix) -> String {
    let mut s = format!(
        "R-matrix through grade {} ({} recursion{})\n",
        r.truncation,
        match r.t.direction {
            Direction::Left => "left",
            Direction::Right => "right",
        },
        if r.ideal.is_some() { ", quotient" } else { "" }
    );
    if let Some(i) = &r.ideal {
        for g in i.generators() {
            s.push_str(&format!("  ideal generator: {g}\n"));
        }
    }
    for (lower, tu) in &r.t.table {
        s.push_str(&format!("  t_{} = {tu}\n", lower.render(Side::Negative)));
    }
    s
}
