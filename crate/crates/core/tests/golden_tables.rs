//! Closed-form canonical basis elements in ranks (2|1) and (2|2).

use std::collections::BTreeMap;

use supercanon::golden::{self, m21, m22};
use supercanon::laurent::{signed_sym_int, LaurentPolynomial};
use supercanon::matrices::{SuperMatrix, SuperShape};
use supercanon::uplus::{eval_word, MonomialWord, UPlus, WordFactor};

type Expansion = BTreeMap<SuperMatrix, LaurentPolynomial>;

fn expansion(terms: Vec<(SuperMatrix, LaurentPolynomial)>) -> Expansion {
    terms.into_iter().collect()
}

fn one() -> LaurentPolynomial {
    LaurentPolynomial::one()
}

fn v(e: i64) -> LaurentPolynomial {
    LaurentPolynomial::v(e)
}

fn word(shape: SuperShape, factors: &[(usize, u32)]) -> MonomialWord {
    MonomialWord {
        shape,
        factors: factors
            .iter()
            .filter(|(_, p)| *p > 0)
            .map(|&(h, p)| WordFactor { h, p })
            .collect(),
    }
}

#[test]
fn gl21_four_families_by_hand() {
    let u = UPlus::new(SuperShape::new(2, 1).unwrap());
    for a in 0..=6u32 {
        let ai = a as i64;
        let cases = [
            (m21(a, 0, 0), expansion(vec![(m21(a, 0, 0), one())])),
            (m21(a, 0, 1), expansion(vec![(m21(a, 0, 1), one())])),
            (
                m21(a, 1, 0),
                expansion(vec![(m21(a, 1, 0), one()), (m21(a + 1, 0, 1), v(-ai - 1))]),
            ),
            (m21(a, 1, 1), expansion(vec![(m21(a, 1, 1), one())])),
        ];
        for (target, expected) in cases {
            let rec = u.canonical(&target).unwrap();
            assert_eq!(rec.expansion, expected, "a={a} target {}", target.to_text());
        }
        let rec = u.canonical(&m21(a, 1, 0)).unwrap();
        let witness = rec.witness.as_ref().unwrap();
        let w = witness
            .get(&m21(a + 1, 0, 1))
            .cloned()
            .unwrap_or_else(LaurentPolynomial::zero);
        assert_eq!(w, signed_sym_int(ai));
        assert!(witness.keys().all(|b| *b == m21(a + 1, 0, 1)));
    }
}

#[test]
fn gl21_tight_monomials() {
    let s = SuperShape::new(2, 1).unwrap();
    let u = UPlus::new(s);
    for a in 0..=6u32 {
        let mid = eval_word(&word(s, &[(1, a + 1), (2, 1)])).unwrap();
        assert_eq!(mid.terms(), &u.canonical(&m21(a, 1, 0)).unwrap().expansion);
        let top = eval_word(&word(s, &[(2, 1), (1, a + 1), (2, 1)])).unwrap();
        assert_eq!(top.terms(), &u.canonical(&m21(a, 1, 1)).unwrap().expansion);
    }
}

#[test]
fn gl22_first_cases_by_hand() {
    let u = UPlus::new(SuperShape::new(2, 2).unwrap());
    for a in 0..=3u32 {
        for f in 0..=3u32 {
            let (ai, fi) = (a as i64, f as i64);
            let cases = [
                (
                    m22(a, 0, 0, 0, 0, f),
                    expansion(vec![(m22(a, 0, 0, 0, 0, f), one())]),
                ),
                (
                    m22(a, 0, 0, 1, 0, f),
                    expansion(vec![(m22(a, 0, 0, 1, 0, f), one())]),
                ),
                (
                    m22(a, 1, 0, 0, 0, f),
                    expansion(vec![
                        (m22(a, 1, 0, 0, 0, f), one()),
                        (m22(a + 1, 0, 0, 1, 0, f), v(-ai - 1)),
                    ]),
                ),
                (
                    m22(a, 0, 0, 0, 1, f),
                    expansion(vec![
                        (m22(a, 0, 0, 0, 1, f), one()),
                        (m22(a, 0, 0, 1, 0, f + 1), -v(-fi - 1)),
                    ]),
                ),
            ];
            for (target, expected) in cases {
                let rec = u.canonical(&target).unwrap();
                assert_eq!(rec.expansion, expected, "a={a} f={f} {}", target.to_text());
            }
        }
    }
}

#[test]
fn gl21_table_agrees_with_solver() {
    let u = UPlus::new(SuperShape::new(2, 1).unwrap());
    let cases = golden::gl21_cases(6);
    assert_eq!(cases.len(), 28);
    for outcome in golden::check_all(&u, &cases).unwrap() {
        assert!(
            outcome.passed(),
            "{}: {:?}",
            outcome.label,
            outcome.problems
        );
    }
}

#[test]
fn gl22_table_agrees_with_solver() {
    let u = UPlus::new(SuperShape::new(2, 2).unwrap());
    let cases = golden::gl22_cases(3, 3);
    let families: std::collections::BTreeSet<(u32, u32, u32, u32)> = cases
        .iter()
        .map(|c| {
            let t = &c.target;
            (t.at(1, 3), t.at(1, 4), t.at(2, 3), t.at(2, 4))
        })
        .collect();
    assert_eq!(families.len(), 15);
    assert!(!families.contains(&(0, 1, 0, 1)));
    for outcome in golden::check_all(&u, &cases).unwrap() {
        assert!(
            outcome.passed(),
            "{}: {:?}",
            outcome.label,
            outcome.problems
        );
    }
}
