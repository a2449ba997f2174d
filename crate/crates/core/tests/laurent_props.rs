use proptest::prelude::*;
use proptest::test_runner::{Config, RngSeed};

use supercanon::laurent::{
    antisym_solve, bar_symmetric_part, gauss_factorial, gauss_int, qq_binom, signed_sym_int,
    sym_factorial, sym_int, y_decompose, LaurentPolynomial, Parity,
};

fn config() -> Config {
    Config {
        cases: 500,
        rng_seed: RngSeed::Fixed(0x00c0_ffee),
        failure_persistence: None,
        ..Config::default()
    }
}

fn poly() -> impl Strategy<Value = LaurentPolynomial> {
    prop::collection::vec((-8i64..=8, -6i64..=6), 0..7).prop_map(LaurentPolynomial::from_terms)
}

fn negative_poly() -> impl Strategy<Value = LaurentPolynomial> {
    prop::collection::vec((-10i64..=-1, -6i64..=6), 0..7).prop_map(LaurentPolynomial::from_terms)
}

/// Gaussian binomial in `q = v^step` by the Pascal recurrence
/// `C(n,k) = C(n-1,k-1) + q^k C(n-1,k)`.
fn pascal_binom(n: u32, k: u32, step: i64) -> LaurentPolynomial {
    let mut rows = vec![vec![LaurentPolynomial::one()]];
    for row in 1..=n as usize {
        let prev = &rows[row - 1];
        let mut next = Vec::with_capacity(row + 1);
        for kk in 0..=row {
            let mut c = LaurentPolynomial::zero();
            if kk >= 1 {
                c += &prev[kk - 1];
            }
            if kk < row {
                c += prev[kk].shift(kk as i64 * step);
            }
            next.push(c);
        }
        rows.push(next);
    }
    rows[n as usize]
        .get(k as usize)
        .cloned()
        .unwrap_or_else(LaurentPolynomial::zero)
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn bar_is_a_ring_involution(f in poly(), g in poly()) {
        prop_assert_eq!(f.bar().bar(), f.clone());
        prop_assert_eq!((&f * &g).bar(), &f.bar() * &g.bar());
        prop_assert_eq!((&f + &g).bar(), &f.bar() + &g.bar());
    }

    #[test]
    fn ring_axioms(f in poly(), g in poly(), h in poly()) {
        prop_assert_eq!(&f * &g, &g * &f);
        prop_assert_eq!(&(&f * &g) * &h, &f * &(&g * &h));
        prop_assert_eq!(&f * &(&g + &h), &(&f * &g) + &(&f * &h));
        prop_assert_eq!(&(&f - &g) + &g, f.clone());
        prop_assert!((&f - &f).is_zero());
    }

    #[test]
    fn evaluation_at_one_is_multiplicative(f in poly(), g in poly()) {
        prop_assert_eq!((&f * &g).eval_at_one(), f.eval_at_one() * g.eval_at_one());
    }

    #[test]
    fn antisym_solve_round_trip(p in negative_poly()) {
        let r = &p - &p.bar();
        prop_assert_eq!(antisym_solve(&r).unwrap(), p);
    }

    #[test]
    fn exact_division_inverts_multiplication(f in poly(), g in poly()) {
        prop_assume!(!g.is_zero());
        prop_assert_eq!((&f * &g).div_exact(&g).unwrap(), f);
    }

    #[test]
    fn bar_symmetric_split(g in poly()) {
        let s = bar_symmetric_part(&g);
        prop_assert_eq!(s.bar(), s.clone());
        prop_assert!((&g - &s).is_strictly_negative() || (&g - &s).is_zero());
        match y_decompose(&g) {
            Ok((gy, gneg)) => {
                prop_assert_eq!(&gy + &gneg, g.clone());
                prop_assert_eq!(gy.bar(), gy.clone());
                prop_assert!(gneg.is_zero() || gneg.is_strictly_negative());
                prop_assert!(gy.coeff(0) % 2 == 0.into());
            }
            Err(_) => prop_assert!(g.coeff(0) % 2 != 0.into()),
        }
    }

    #[test]
    fn json_round_trip(f in poly()) {
        let text = serde_json::to_string(&f).unwrap();
        let back: LaurentPolynomial = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back, f);
    }
}

#[test]
fn normalized_gauss_integer_is_balanced() {
    for i in 1..=30u32 {
        let lhs = &LaurentPolynomial::v(i as i64 - 1) * &gauss_int(i, 2).bar();
        assert_eq!(lhs, sym_int(i, Parity::Even), "i = {i}");
        assert_eq!(sym_int(i, Parity::Odd), sym_int(i, Parity::Even));
    }
}

#[test]
fn balanced_integers_recurrence() {
    let two = sym_int(2, Parity::Even);
    for i in 1..=20i64 {
        let lhs = &signed_sym_int(i) * &two;
        let rhs = &signed_sym_int(i + 1) + &signed_sym_int(i - 1);
        assert_eq!(lhs, rhs, "i = {i}");
        assert_eq!(signed_sym_int(-i), -signed_sym_int(i));
        assert_eq!(sym_int(i as u32, Parity::Even).eval_at_one(), i.into());
    }
    assert!(signed_sym_int(0).is_zero());
    assert_eq!(
        sym_int(3, Parity::Even),
        LaurentPolynomial::from_terms([(2, 1), (0, 1), (-2, 1)])
    );
}

#[test]
fn factorials_match_products() {
    for i in 0..=8u32 {
        let mut prod = LaurentPolynomial::one();
        for t in 1..=i {
            prod = &prod * &sym_int(t, Parity::Even);
        }
        assert_eq!(sym_factorial(i), prod);
        assert_eq!(
            gauss_factorial(i, 2).eval_at_one(),
            (1..=i as u64).product::<u64>().into()
        );
    }
}

#[test]
fn gaussian_binomials_match_pascal_recurrence() {
    for step in [-2i64, -1, 1, 2] {
        for n in 0..=8u32 {
            for k in 0..=n + 1 {
                assert_eq!(
                    qq_binom(n, k, step),
                    pascal_binom(n, k, step),
                    "n={n} k={k} s={step}"
                );
            }
        }
    }
}

#[test]
fn subset_of_subset_identity() {
    for step in [-2i64, 2] {
        for n in 0..=8u32 {
            for k in 0..=n {
                for j in 0..=k {
                    let lhs = &qq_binom(n, k, step) * &qq_binom(k, j, step);
                    let rhs = &qq_binom(n, j, step) * &qq_binom(n - j, k - j, step);
                    assert_eq!(lhs, rhs, "n={n} k={k} j={j} s={step}");
                }
            }
        }
    }
}

#[test]
fn y_decomposition_examples() {
    let g = LaurentPolynomial::from_terms([(2, 1), (-1, 1)]);
    let (gy, gneg) = y_decompose(&g).unwrap();
    assert_eq!(gy, LaurentPolynomial::from_terms([(2, 1), (-2, 1)]));
    assert_eq!(gneg, LaurentPolynomial::from_terms([(-1, 1), (-2, -1)]));
    assert!(y_decompose(&LaurentPolynomial::one()).is_err());
    assert!(antisym_solve(&LaurentPolynomial::one()).is_err());
}
