use std::collections::BTreeMap;

use proptest::prelude::*;
use proptest::test_runner::{Config, RngSeed};

use supercanon::matrices::{
    a_lambda, enumerate_compositions, enumerate_level, enumerate_upper, hooks, preceq, Composition,
    SuperMatrix, SuperShape,
};

fn config() -> Config {
    Config {
        cases: 500,
        rng_seed: RngSeed::Fixed(0x5eed_0002),
        failure_persistence: None,
        ..Config::default()
    }
}

fn shape(m: usize, n: usize) -> SuperShape {
    SuperShape::new(m, n).unwrap()
}

/// A valid matrix of shape `(m|n)` with even entries below `cap`.
fn matrix(m: usize, n: usize, cap: u32) -> impl Strategy<Value = SuperMatrix> {
    let s = shape(m, n);
    let d = m + n;
    prop::collection::vec(0..cap, d * d).prop_map(move |cells| {
        let rows: Vec<Vec<u32>> = (0..d)
            .map(|i| {
                (0..d)
                    .map(|j| {
                        let x = cells[i * d + j];
                        if s.is_mixed(i + 1, j + 1) {
                            x % 2
                        } else {
                            x
                        }
                    })
                    .collect()
            })
            .collect();
        SuperMatrix::from_rows(s, &rows).unwrap()
    })
}

fn strictly_upper(a: SuperMatrix) -> SuperMatrix {
    a.upper_part()
}

fn binomial(n: u64, k: u64) -> u64 {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

#[test]
fn order_axioms_exhaustive_on_gl22() {
    let s = shape(2, 2);
    let all = enumerate_upper(s, |_, _| 1, None);
    assert_eq!(all.len(), 64);
    for a in &all {
        assert!(preceq(a, a));
        for b in &all {
            let ab = preceq(a, b);
            let ba = preceq(b, a);
            if ab && ba {
                assert_eq!(a, b);
            }
            if ab && a != b {
                assert!(a.norm() < b.norm(), "{} < {}", a.to_text(), b.to_text());
            }
            if !ab {
                continue;
            }
            for c in &all {
                if preceq(b, c) {
                    assert!(preceq(a, c));
                }
            }
        }
    }
}

#[test]
fn composition_counts() {
    for (m, n) in [(2, 1), (1, 2), (2, 2), (3, 1)] {
        let s = shape(m, n);
        let d = (m + n) as u64;
        for p in 0..=5u32 {
            let all = enumerate_compositions(s, p, None);
            assert_eq!(all.len() as u64, binomial(p as u64 + d - 1, d - 1));
            assert!(all.iter().all(|c| c.total() == p && c.len() == d as usize));
            assert!(all.windows(2).all(|w| w[0] > w[1]));
        }
    }
    let s = shape(2, 1);
    let bound = Composition(vec![0, 1, 1]);
    assert_eq!(
        enumerate_compositions(s, 1, Some(&bound)),
        vec![Composition(vec![0, 1, 0]), Composition(vec![0, 0, 1])]
    );
}

#[test]
fn level_count_matches_brute_force() {
    for (m, n, r) in [(1, 1, 3), (2, 1, 2), (1, 2, 2), (2, 1, 3)] {
        let s = shape(m, n);
        let d = m + n;
        let mut count = 0usize;
        let total = (r as usize + 1).pow((d * d) as u32);
        for code in 0..total {
            let mut x = code;
            let mut rows = vec![vec![0u32; d]; d];
            for cell in rows.iter_mut().flatten() {
                *cell = (x % (r as usize + 1)) as u32;
                x /= r as usize + 1;
            }
            let a = SuperMatrix::from_rows(s, &rows).unwrap();
            if a.size() == r && a.is_valid() {
                count += 1;
            }
        }
        assert_eq!(enumerate_level(s, r).len(), count, "({m}|{n}) r={r}");
    }
}

#[test]
fn norm_examples() {
    let s = shape(2, 2);
    let parse = |t: &str| SuperMatrix::parse_text(s, t, &BTreeMap::new()).unwrap();
    assert_eq!(parse("E[1,2]").norm(), 1);
    assert_eq!(parse("E[1,3]").norm(), 3);
    assert_eq!(parse("E[1,4]+2E[2,1]").norm(), 8);
    let mut subs = BTreeMap::new();
    subs.insert("a".to_string(), 3);
    assert_eq!(
        SuperMatrix::parse_text(s, "aE[1,2]+E[3,4]", &subs).unwrap(),
        parse("3E[1,2]+E[3,4]")
    );
    assert!(SuperMatrix::parse_text(s, "E[1,5]", &BTreeMap::new()).is_err());
    assert!(!parse("2E[1,3]").is_valid());
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn transpose_is_an_involution(a in matrix(2, 2, 4)) {
        let t = a.transpose();
        prop_assert_eq!(t.transpose(), a.clone());
        prop_assert_eq!(t.ro(), a.co());
        prop_assert_eq!(t.co(), a.ro());
        prop_assert_eq!(t.norm(), a.norm());
        prop_assert!(a.upper_part().transpose().is_strictly_lower() || a.upper_part().is_zero());
    }

    #[test]
    fn order_is_transitive_and_norm_monotone(
        a in matrix(3, 2, 3).prop_map(strictly_upper),
        b in matrix(3, 2, 3).prop_map(strictly_upper),
        c in matrix(3, 2, 3).prop_map(strictly_upper),
    ) {
        prop_assert!(preceq(&a, &a));
        if preceq(&a, &b) && preceq(&b, &c) {
            prop_assert!(preceq(&a, &c));
        }
        if preceq(&a, &b) && preceq(&b, &a) {
            prop_assert_eq!(&a, &b);
        }
        if preceq(&a, &b) && a != b {
            prop_assert!(a.norm() < b.norm());
        }
        prop_assert!(preceq(&SuperMatrix::zero(a.shape()), &a));
    }

    #[test]
    fn dropping_an_entry_goes_down(a in matrix(2, 2, 3).prop_map(strictly_upper)) {
        for ((i, j), _) in a.nonzero().collect::<Vec<_>>() {
            let b = a.with_added(i, j, -1).unwrap();
            prop_assert!(preceq(&b, &a));
            prop_assert!(b.norm() < a.norm());
        }
    }

    #[test]
    fn column_sums_of_shifted_lower_matrix(
        a in matrix(2, 1, 3).prop_map(|a| a.lower_part()),
        extra in prop::collection::vec(0u32..3, 3),
    ) {
        let h = hooks(&a);
        let lambda = Composition(h.0.iter().zip(&extra).map(|(x, y)| x + y).collect());
        let al = a_lambda(&a, &lambda).unwrap();
        prop_assert_eq!(al.co(), lambda);
        prop_assert_eq!(al.lower_part(), a);
    }

    #[test]
    fn text_and_json_round_trip(a in matrix(2, 2, 4)) {
        let back = SuperMatrix::parse_text(a.shape(), &a.to_text(), &BTreeMap::new()).unwrap();
        prop_assert_eq!(&back, &a);
        let json = serde_json::to_string(&a).unwrap();
        let back: SuperMatrix = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(back, a);
    }

    #[test]
    fn weight_is_row_minus_column(a in matrix(3, 1, 4)) {
        let w = a.weight();
        let (ro, co) = (a.ro(), a.co());
        for (i, wi) in w.iter().enumerate() {
            prop_assert_eq!(*wi, ro.0[i] as i64 - co.0[i] as i64);
        }
    }
}
