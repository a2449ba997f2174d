//! Text and LaTeX renderings of records and elements.

use std::collections::BTreeMap;

use supercanon::laurent::LaurentPolynomial;
use supercanon::matrices::SuperMatrix;
use supercanon::schur::SchurElement;
use supercanon::uplus::{monomial_word, CanonicalRecord};

/// Upper (or transposed lower) triangle as a bracketed array, the way the
/// small-rank tables print matrices; other matrices fall back to `pmatrix`.
pub fn matrix_latex(a: &SuperMatrix) -> String {
    let (m, suffix) = if a.is_strictly_upper() {
        (a.clone(), "")
    } else if a.is_strictly_lower() {
        (a.transpose(), "^{t}")
    } else {
        return a.to_latex();
    };
    let d = m.dim();
    let mut rows = Vec::new();
    for i in 1..d {
        let mut cells: Vec<String> = vec![String::new(); i - 1];
        cells.extend((i + 1..=d).map(|j| m.at(i, j).to_string()));
        rows.push(cells.join("&"));
    }
    format!(
        "\\left[\\begin{{smallmatrix}}{}\\end{{smallmatrix}}\\right]{suffix}(\\mathbf{{0}})",
        rows.join("\\\\")
    )
}

fn coeff_prefix(c: &LaurentPolynomial) -> String {
    if c.is_one() {
        String::new()
    } else if c.len() == 1 {
        c.to_latex()
    } else {
        format!("({})", c.to_latex())
    }
}

fn sum_latex<'a>(
    terms: impl Iterator<Item = (&'a SuperMatrix, &'a LaurentPolynomial)>,
    render: impl Fn(&SuperMatrix) -> String,
) -> String {
    let parts: Vec<String> = terms
        .map(|(a, c)| format!("{}{}", coeff_prefix(c), render(a)))
        .collect();
    if parts.is_empty() {
        "0".to_string()
    } else {
        parts.join(" + ")
    }
}

fn by_norm(
    map: &BTreeMap<SuperMatrix, LaurentPolynomial>,
) -> Vec<(&SuperMatrix, &LaurentPolynomial)> {
    let mut v: Vec<_> = map.iter().collect();
    v.sort_by_key(|(a, _)| std::cmp::Reverse(a.norm()));
    v
}

pub fn record_latex(rec: &CanonicalRecord) -> String {
    let mut out = format!(
        "\\mathsf C_{{{}}} = {}",
        rec.target.to_text(),
        sum_latex(by_norm(&rec.expansion).into_iter(), matrix_latex)
    );
    if let Some(w) = &rec.witness {
        if rec.target.is_strictly_upper() || rec.target.is_zero() {
            let mut monomials = format!("\\mathsf{{{}}}", monomial_word(&rec.target));
            for (b, c) in by_norm(w) {
                let neg = c.scale(-1);
                monomials.push_str(&format!(
                    " + {}\\mathsf{{{}}}",
                    coeff_prefix(&neg),
                    monomial_word(b)
                ));
            }
            out.push_str(&format!(
                "\\quad\\text{{with}}\\quad \\mathsf C = {monomials}"
            ));
        }
    }
    out
}

pub fn record_text(rec: &CanonicalRecord) -> String {
    let terms: Vec<String> = by_norm(&rec.expansion)
        .into_iter()
        .map(|(a, c)| format!("({c})*[{}]", a.to_text()))
        .collect();
    format!("C[{}] = {}", rec.target.to_text(), terms.join(" + "))
}

pub fn schur_latex(x: &SchurElement) -> String {
    sum_latex(x.terms().iter(), |a| format!("[{}]", a.to_latex()))
}
