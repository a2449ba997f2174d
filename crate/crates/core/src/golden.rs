//! Closed-form canonical basis elements of `U^+` in ranks `(2|1)` and
//! `(2|2)`, and a checker comparing them with the general solver.
//!
//! A `(2|2)` matrix is written `(a, b, d, c, e, f)` for
//! `a E12 + b E13 + d E14 + c E23 + e E24 + f E34`, with `b, c, d, e ∈ {0, 1}`.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::laurent::{signed_sym_int, LaurentPolynomial};
use crate::matrices::{SuperMatrix, SuperShape};
use crate::uplus::{monomial_word, UPlus, UplusError};

/// One expected canonical basis element.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GoldenCase {
    pub label: String,
    pub target: SuperMatrix,
    /// The monomial `m_A` as a word.
    pub word: String,
    /// `C_A = Σ coeff · B(0)`.
    pub expansion: BTreeMap<SuperMatrix, LaurentPolynomial>,
    /// `C_A = m_A - Σ witness_B m_B`.
    pub witness: BTreeMap<SuperMatrix, LaurentPolynomial>,
}

/// Discrepancies found for one case; empty when it matches.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GoldenOutcome {
    pub label: String,
    pub problems: Vec<String>,
}

impl GoldenOutcome {
    pub fn passed(&self) -> bool {
        self.problems.is_empty()
    }
}

fn q(k: i64) -> LaurentPolynomial {
    signed_sym_int(k)
}

fn vp(e: i64) -> LaurentPolynomial {
    LaurentPolynomial::v(e)
}

fn neg(x: LaurentPolynomial) -> LaurentPolynomial {
    x.scale(-1)
}

fn insert(
    map: &mut BTreeMap<SuperMatrix, LaurentPolynomial>,
    a: SuperMatrix,
    c: LaurentPolynomial,
) {
    if !c.is_zero() {
        map.insert(a, c);
    }
}

fn word_string(parts: &[(usize, u32)]) -> String {
    let mut s = String::new();
    for &(h, p) in parts {
        match p {
            0 => {}
            1 => s.push_str(&format!("E{h}")),
            _ => s.push_str(&format!("E{h}^({p})")),
        }
    }
    if s.is_empty() {
        s.push('1');
    }
    s
}

/// `a E12 + b E13 + c E23` in `(2|1)`.
pub fn m21(a: u32, b: u32, c: u32) -> SuperMatrix {
    let s = SuperShape::new(2, 1).expect("valid shape");
    SuperMatrix::from_rows(s, &[vec![0, a, b], vec![0, 0, c], vec![0, 0, 0]]).expect("square rows")
}

/// `a E12 + b E13 + d E14 + c E23 + e E24 + f E34` in `(2|2)`.
pub fn m22(a: u32, b: u32, d: u32, c: u32, e: u32, f: u32) -> SuperMatrix {
    let s = SuperShape::new(2, 2).expect("valid shape");
    SuperMatrix::from_rows(
        s,
        &[
            vec![0, a, b, d],
            vec![0, 0, c, e],
            vec![0, 0, 0, f],
            vec![0, 0, 0, 0],
        ],
    )
    .expect("square rows")
}

fn word21(a: u32, b: u32, c: u32) -> String {
    let mut parts = vec![(2, c)];
    if b == 1 {
        parts.extend([(1, 1), (2, 1)]);
    }
    parts.push((1, a));
    word_string(&parts)
}

fn word22(a: u32, b: u32, d: u32, c: u32, e: u32, f: u32) -> String {
    let mut parts = vec![(3, f)];
    if e == 1 {
        parts.extend([(2, 1), (3, 1)]);
    }
    if d == 1 {
        parts.extend([(1, 1), (2, 1), (3, 1)]);
    }
    parts.push((2, c));
    if b == 1 {
        parts.extend([(1, 1), (2, 1)]);
    }
    parts.push((1, a));
    word_string(&parts)
}

/// The four families of `(2|1)` for `0 ≤ a ≤ a_max`.
pub fn gl21_cases(a_max: u32) -> Vec<GoldenCase> {
    let mut out = Vec::new();
    for a in 0..=a_max {
        let ai = a as i64;
        for (b, c) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            let target = m21(a, b, c);
            let mut expansion = BTreeMap::new();
            let mut witness = BTreeMap::new();
            insert(&mut expansion, target.clone(), LaurentPolynomial::one());
            if (b, c) == (1, 0) {
                insert(&mut expansion, m21(a + 1, 0, 1), vp(-ai - 1));
                insert(&mut witness, m21(a + 1, 0, 1), q(ai));
            }
            out.push(GoldenCase {
                label: format!("gl21 b={b} c={c} a={a}"),
                word: word21(a, b, c),
                target,
                expansion,
                witness,
            });
        }
    }
    out
}

/// The eighteen families of `(2|2)` for `0 ≤ a, f ≤ max`.
pub fn gl22_cases(a_max: u32, f_max: u32) -> Vec<GoldenCase> {
    let mut out = Vec::new();
    for a in 0..=a_max {
        for f in 0..=f_max {
            out.extend(gl22_at(a, f));
        }
    }
    out
}

fn gl22_at(a: u32, f: u32) -> Vec<GoldenCase> {
    let (ai, fi) = (a as i64, f as i64);
    let special = ai >= 1 && fi == ai - 1;
    let mut out = Vec::new();
    let mut push = |t: (u32, u32, u32, u32, u32, u32),
                    exp: Vec<(SuperMatrix, LaurentPolynomial)>,
                    wit: Vec<(SuperMatrix, LaurentPolynomial)>| {
        let target = m22(t.0, t.1, t.2, t.3, t.4, t.5);
        let mut expansion = BTreeMap::new();
        insert(&mut expansion, target.clone(), LaurentPolynomial::one());
        for (m, c) in exp {
            insert(&mut expansion, m, c);
        }
        let mut witness = BTreeMap::new();
        for (m, c) in wit {
            insert(&mut witness, m, c);
        }
        out.push(GoldenCase {
            label: format!("gl22 b={} d={} c={} e={} a={a} f={f}", t.1, t.2, t.3, t.4),
            word: word22(t.0, t.1, t.2, t.3, t.4, t.5),
            target,
            expansion,
            witness,
        });
    };

    for t in [
        (a, 0, 0, 0, 0, f),
        (a, 0, 0, 1, 0, f),
        (a, 1, 0, 1, 0, f),
        (a, 0, 0, 1, 1, f),
        (a, 1, 0, 1, 1, f),
        (a, 1, 1, 1, 1, f),
    ] {
        push(t, vec![], vec![]);
    }

    push(
        (a, 1, 0, 0, 0, f),
        vec![(m22(a + 1, 0, 0, 1, 0, f), vp(-ai - 1))],
        vec![(m22(a + 1, 0, 0, 1, 0, f), q(ai))],
    );
    push(
        (a, 0, 0, 0, 1, f),
        vec![(m22(a, 0, 0, 1, 0, f + 1), neg(vp(-fi - 1)))],
        vec![(m22(a, 0, 0, 1, 0, f + 1), q(fi + 2))],
    );

    let corner4 = if special {
        &(&vp(-fi - 1) * &q(ai)) - &(&vp(-ai - 1) * &q(fi + 2))
    } else {
        neg(vp(-fi - ai - 2))
    };
    push(
        (a, 0, 1, 0, 0, f),
        vec![
            (m22(a + 1, 0, 0, 0, 1, f), vp(-ai - 1)),
            (m22(a, 1, 0, 0, 0, f + 1), neg(vp(-fi - 1))),
            (m22(a + 1, 0, 0, 1, 0, f + 1), corner4),
        ],
        vec![
            (m22(a + 1, 0, 0, 0, 1, f), q(ai)),
            (m22(a, 1, 0, 0, 0, f + 1), q(fi + 2)),
            (
                m22(a + 1, 0, 0, 1, 0, f + 1),
                neg(&(&(&q(ai) * &q(fi + 2)).scale(2) + &q(fi - ai + 1))
                    - &(&q(ai + 1) * &q(fi + 1))),
            ),
        ],
    );

    push(
        (a, 1, 0, 0, 1, f),
        vec![
            (m22(a + 1, 0, 0, 1, 1, f), vp(-ai - 1)),
            (m22(a, 1, 0, 1, 0, f + 1), neg(vp(-fi - 1))),
        ],
        vec![
            (m22(a + 1, 0, 0, 1, 1, f), q(ai)),
            (m22(a, 1, 0, 1, 0, f + 1), q(fi + 2)),
        ],
    );

    if a == 0 {
        push(
            (0, 0, 1, 1, 0, f),
            vec![
                (m22(0, 1, 0, 0, 1, f), vp(-1)),
                (m22(1, 0, 0, 1, 1, f), vp(-2)),
            ],
            vec![],
        );
    } else {
        push(
            (a, 0, 1, 1, 0, f),
            vec![
                (m22(a, 1, 0, 0, 1, f), vp(-1)),
                (m22(a + 1, 0, 0, 1, 1, f), &vp(-ai) + &vp(-ai - 2)),
            ],
            vec![(m22(a + 1, 0, 0, 1, 1, f), q(ai - 1))],
        );
    }

    push(
        (a, 1, 1, 0, 0, f),
        vec![
            (m22(a + 1, 0, 1, 1, 0, f), vp(-ai - 1)),
            (m22(a + 1, 1, 0, 0, 1, f), vp(-ai - 2)),
            (m22(a + 2, 0, 0, 1, 1, f), vp(-2 * ai - 4)),
        ],
        vec![
            (m22(a + 1, 0, 1, 1, 0, f), q(ai)),
            (m22(a + 1, 1, 0, 0, 1, f), q(ai + 1)),
            (m22(a + 2, 0, 0, 1, 1, f), neg(&q(ai + 1) * &q(ai + 1))),
        ],
    );

    push(
        (a, 1, 1, 1, 0, f),
        vec![(m22(a + 1, 1, 0, 1, 1, f), vp(-ai - 1))],
        vec![(m22(a + 1, 1, 0, 1, 1, f), q(ai))],
    );
    push(
        (a, 0, 1, 1, 1, f),
        vec![(m22(a, 1, 0, 1, 1, f + 1), vp(-fi - 1))],
        vec![(m22(a, 1, 0, 1, 1, f + 1), neg(q(fi + 2)))],
    );

    let corner13 = if special {
        &(&vp(-ai - 1) * &q(fi + 2)) - &(&vp(-fi - 1) * &q(ai))
    } else {
        vp(-fi - ai - 2)
    };
    push(
        (a, 1, 1, 0, 1, f),
        vec![
            (m22(a, 1, 1, 1, 0, f + 1), vp(-fi - 1)),
            (m22(a + 1, 0, 1, 1, 1, f), vp(-ai - 1)),
            (m22(a + 1, 1, 0, 1, 1, f + 1), corner13),
        ],
        vec![
            (m22(a, 1, 1, 1, 0, f + 1), neg(q(fi + 2))),
            (m22(a + 1, 0, 1, 1, 1, f), q(ai)),
            (
                m22(a + 1, 1, 0, 1, 1, f + 1),
                &(&q(ai) * &q(fi + 2)).scale(2) + &q(fi - ai + 1),
            ),
        ],
    );
    out
}

/// Compares one case with the solver: word of the monomial, expansion of
/// `C_A`, its monomial witness, and the layered elimination algorithm.
pub fn check_case(u: &UPlus, case: &GoldenCase) -> Result<GoldenOutcome, UplusError> {
    let mut problems = Vec::new();
    let word = monomial_word(&case.target).to_string();
    if word != case.word {
        problems.push(format!("word {word} != {}", case.word));
    }
    let rec = u.canonical(&case.target)?;
    if rec.expansion != case.expansion {
        problems.push(format!(
            "expansion {:?} != {:?}",
            rec.expansion, case.expansion
        ));
    }
    if rec.witness.as_ref() != Some(&case.witness) {
        problems.push(format!("witness {:?} != {:?}", rec.witness, case.witness));
    }
    let du = u.du_algorithm(&case.target)?;
    if du.record.expansion != case.expansion {
        problems.push("layered elimination disagrees".to_string());
    }
    Ok(GoldenOutcome {
        label: case.label.clone(),
        problems,
    })
}

/// Runs [`check_case`] over a list.
pub fn check_all(u: &UPlus, cases: &[GoldenCase]) -> Result<Vec<GoldenOutcome>, UplusError> {
    cases.iter().map(|c| check_case(u, c)).collect()
}
