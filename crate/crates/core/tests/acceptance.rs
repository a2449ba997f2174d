//! Acceptance checks, one line per criterion. All comparisons are exact
//! (symbolic equality in `Z[v, v^-1]`); each criterion also carries a
//! wall-clock budget.

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use proptest::prelude::*;
use proptest::test_runner::{Config, RngSeed, TestRunner};

use supercanon::golden;
use supercanon::laurent::{antisym_solve, LaurentPolynomial};
use supercanon::matrices::{
    enumerate_compositions, enumerate_level, enumerate_upper, preceq, preceq_rc, SuperMatrix,
    SuperShape,
};
use supercanon::schur::{qs3_check, verify_stabilization, SchurLevel};
use supercanon::tableaux::{count_by_content, dominates, hook_partitions, pi_tilde, t_pi};
use supercanon::uplus::{AlgebraElement, Side, UPlus};

type Outcome = Result<String, String>;
type Criterion = (u32, &'static str, Duration, fn() -> Outcome);

fn shape(m: usize, n: usize) -> SuperShape {
    SuperShape::new(m, n).unwrap()
}

fn parse(s: SuperShape, t: &str) -> SuperMatrix {
    SuperMatrix::parse_text(s, t, &BTreeMap::new()).unwrap()
}

fn golden_criterion(s: SuperShape, cases: &[golden::GoldenCase]) -> Outcome {
    let u = UPlus::new(s);
    let outcomes = golden::check_all(&u, cases).map_err(|e| e.to_string())?;
    let bad: Vec<_> = outcomes.iter().filter(|o| !o.passed()).collect();
    if bad.is_empty() {
        Ok(format!("{} cases", outcomes.len()))
    } else {
        Err(format!(
            "{} of {} cases differ, first {}: {:?}",
            bad.len(),
            outcomes.len(),
            bad[0].label,
            bad[0].problems
        ))
    }
}

fn pbw_universe() -> Vec<SuperMatrix> {
    let mut out = enumerate_upper(shape(2, 2), |_, _| 2, None);
    out.extend(enumerate_upper(shape(2, 1), |_, _| 3, None));
    out.extend(enumerate_upper(shape(1, 2), |_, _| 3, None));
    out
}

fn criterion_1() -> Outcome {
    golden_criterion(shape(2, 1), &golden::gl21_cases(6))
}

fn criterion_2() -> Outcome {
    golden_criterion(shape(2, 2), &golden::gl22_cases(3, 3))
}

fn criterion_3() -> Outcome {
    let all = pbw_universe();
    let in22 = all.iter().filter(|a| a.shape() == shape(2, 2)).count();
    if in22 != 144 {
        return Err(format!("expected 144 matrices in (2|2), found {in22}"));
    }
    let mut engines: BTreeMap<(usize, usize), UPlus> = BTreeMap::new();
    for a in &all {
        let s = a.shape();
        let u = engines.entry((s.m, s.n)).or_insert_with(|| UPlus::new(s));
        let lhs = u.pbw(a).map_err(|e| e.to_string())?;
        if lhs != AlgebraElement::basis(a).unwrap() {
            return Err(format!("{} in {s}: product is {lhs}", a.to_text()));
        }
    }
    Ok(format!("{} matrices", all.len()))
}

fn criterion_4() -> Outcome {
    let mut checked = 0;
    for (m, n) in [(2, 1), (1, 2), (2, 2)] {
        let rep = UPlus::new(shape(m, n))
            .serre_check(6)
            .map_err(|e| e.to_string())?;
        if let Some(v) = rep.violations.first() {
            return Err(format!("({m}|{n}) {} on {}", v.relation, v.basis.to_text()));
        }
        checked += rep.checked;
    }
    let mut qs3 = 0;
    for (m, n) in [(2, 1), (1, 2)] {
        for r in 1..=3 {
            let rep = qs3_check(shape(m, n), r).map_err(|e| e.to_string())?;
            if let Some(v) = rep.violations.first() {
                return Err(format!(
                    "commutator h={} ({m}|{n}) r={r} on {}",
                    v.h,
                    v.basis.to_text()
                ));
            }
            qs3 += rep.checked;
        }
    }
    Ok(format!(
        "{checked} relation checks, {qs3} commutator checks"
    ))
}

fn criterion_5() -> Outcome {
    let mut targets: BTreeSet<SuperMatrix> = pbw_universe().into_iter().collect();
    targets.extend(golden::gl21_cases(6).into_iter().map(|c| c.target));
    targets.extend(golden::gl22_cases(3, 3).into_iter().map(|c| c.target));
    let mut engines: BTreeMap<(usize, usize), UPlus> = BTreeMap::new();
    for a in &targets {
        let s = a.shape();
        let u = engines.entry((s.m, s.n)).or_insert_with(|| UPlus::new(s));
        let rec = u.canonical(a).map_err(|e| e.to_string())?;
        let c = rec.element(Side::Plus);
        if u.bar_element(&c).map_err(|e| e.to_string())? != c {
            return Err(format!("{} not bar-invariant", a.to_text()));
        }
        if c.coeff(a) != LaurentPolynomial::one() {
            return Err(format!(
                "{} leading coefficient {}",
                a.to_text(),
                c.coeff(a)
            ));
        }
        for (b, p) in rec.expansion.iter().filter(|(b, _)| *b != a) {
            if !preceq(b, a) || !p.is_strictly_negative() {
                return Err(format!(
                    "{} has coefficient {p} at {}",
                    a.to_text(),
                    b.to_text()
                ));
            }
        }
        let du = u.du_algorithm(a).map_err(|e| e.to_string())?;
        if du.record.expansion != rec.expansion {
            return Err(format!("{}: layered elimination disagrees", a.to_text()));
        }
    }
    Ok(format!("{} targets", targets.len()))
}

/// Twenty `(shape, A, h, j)` instances.
fn stabilization_instances() -> Vec<(SuperShape, &'static str, usize, Vec<i64>)> {
    let s21 = shape(2, 1);
    let s12 = shape(1, 2);
    let s22 = shape(2, 2);
    vec![
        (s21, "E[2,1]", 1, vec![0, 0, 0]),
        (s21, "E[2,1]", 2, vec![0, 0, 0]),
        (s21, "E[3,1]", 1, vec![0, 0, 0]),
        (s21, "E[3,2]", 2, vec![0, 0, 0]),
        (s21, "E[1,2]+E[3,1]", 1, vec![1, 0, -1]),
        (s21, "2E[2,1]", 1, vec![0, 1, 0]),
        (s21, "E[1,3]+E[2,1]", 2, vec![0, 0, 2]),
        (s21, "0", 2, vec![0, 0, 0]),
        (s12, "E[2,1]", 1, vec![0, 0, 0]),
        (s12, "E[3,2]", 2, vec![0, 0, 0]),
        (s12, "E[3,1]+E[2,3]", 1, vec![1, 1, 0]),
        (s12, "E[1,3]+E[3,2]", 2, vec![0, -1, 0]),
        (s22, "E[1,2]+E[3,4]", 1, vec![0, 0, 0, 0]),
        (s22, "E[1,2]+E[3,4]", 2, vec![0, 0, 0, 0]),
        (s22, "E[1,2]+E[3,4]", 3, vec![0, 0, 0, 0]),
        (s22, "E[3,2]", 2, vec![0, 0, 0, 0]),
        (s22, "E[4,1]", 3, vec![1, 0, 0, 0]),
        (s22, "E[2,1]+E[4,3]", 1, vec![0, 0, 1, 1]),
        (s22, "E[2,4]+E[3,1]", 2, vec![0, 1, 0, 0]),
        (s22, "E[4,2]", 2, vec![0, 0, 0, -1]),
    ]
}

fn criterion_6() -> Outcome {
    let instances = stabilization_instances();
    for (s, a, h, j) in &instances {
        let a = parse(*s, a);
        let r0 = a.size().max(1) + 1;
        let rep =
            verify_stabilization(&a, j, *h, &[r0, r0 + 1, r0 + 2]).map_err(|e| e.to_string())?;
        if !rep.passed() {
            return Err(format!(
                "{} in {s} with h={h}: {:?}",
                a.to_text(),
                rep.levels
            ));
        }
    }
    Ok(format!("{} instances", instances.len()))
}

fn lower_targets(s: SuperShape, r: u32) -> Vec<SuperMatrix> {
    let set: BTreeSet<SuperMatrix> = enumerate_level(s, r)
        .into_iter()
        .map(|a| a.lower_part())
        .filter(|a| !a.is_zero())
        .collect();
    set.into_iter().collect()
}

fn criterion_7() -> Outcome {
    let s = shape(2, 1);
    let mut cases = 0;
    for r in 1..=3 {
        let level = SchurLevel::new(s, r).map_err(|e| e.to_string())?;
        for a in lower_targets(s, r) {
            let rep = level.verify_thm54(&a).map_err(|e| e.to_string())?;
            if !rep.passed() {
                return Err(format!("r={r} {}", a.to_text()));
            }
            cases += rep.cases.len();
        }
    }
    Ok(format!("{cases} (A, weight) pairs"))
}

fn criterion_8() -> Outcome {
    let s = shape(2, 1);
    let mut pairs = 0;
    for r in 1..=3 {
        let level = SchurLevel::new(s, r).map_err(|e| e.to_string())?;
        let offs: BTreeSet<SuperMatrix> = (0..=r)
            .flat_map(|k| enumerate_level(s, k))
            .map(|a| a.off_diagonal())
            .filter(|a| a.size() <= r)
            .collect();
        for a in &offs {
            for lambda in enumerate_compositions(s, r, None) {
                let rep = level
                    .verify_pbw_product(a, &lambda)
                    .map_err(|e| e.to_string())?;
                if !rep.passed() {
                    return Err(format!("r={r} {} at {:?}", a.to_text(), lambda.0));
                }
                if let Some((lead, _)) = &rep.expected_leading {
                    if rep
                        .product
                        .terms()
                        .keys()
                        .any(|c| c != lead && !preceq_rc(c, lead))
                    {
                        return Err(format!(
                            "r={r} {}: support not below leading term",
                            a.to_text()
                        ));
                    }
                }
                pairs += 1;
            }
        }
    }
    Ok(format!("{pairs} (A, weight) pairs"))
}

fn criterion_9() -> Outcome {
    let mut count = 0;
    for (m, n) in [(2, 1), (2, 2), (1, 2)] {
        let s = shape(m, n);
        for r in 1..=6 {
            for pi in hook_partitions(s, r) {
                if t_pi(&pi).map_err(|e| e.to_string())?.is_none() {
                    return Err(format!("({m}|{n}) {pi}: highest tableau not unique"));
                }
                let top = pi_tilde(&pi).map_err(|e| e.to_string())?;
                for mu in count_by_content(&pi).keys() {
                    if !dominates(&top, mu) {
                        return Err(format!("({m}|{n}) {pi}: content {:?} not dominated", mu.0));
                    }
                }
                count += 1;
            }
        }
    }
    Ok(format!("{count} partitions"))
}

fn run_property<S: Strategy>(
    name: &str,
    seed: u64,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<(), String> {
    let mut runner = TestRunner::new(Config {
        cases: 500,
        rng_seed: RngSeed::Fixed(seed),
        failure_persistence: None,
        ..Config::default()
    });
    runner
        .run(&strategy, test)
        .map_err(|e| format!("{name}: {e}"))
}

fn poly() -> impl Strategy<Value = LaurentPolynomial> {
    prop::collection::vec((-8i64..=8, -6i64..=6), 0..7).prop_map(LaurentPolynomial::from_terms)
}

fn upper22() -> impl Strategy<Value = SuperMatrix> {
    prop::collection::vec(0u32..3, 6).prop_map(|v| {
        let s = shape(2, 2);
        let rows = vec![
            vec![0, v[0], v[1] % 2, v[2] % 2],
            vec![0, 0, v[3] % 2, v[4] % 2],
            vec![0, 0, 0, v[5]],
            vec![0, 0, 0, 0],
        ];
        SuperMatrix::from_rows(s, &rows).unwrap()
    })
}

fn criterion_10() -> Outcome {
    run_property("bar involution", 0x0a01, (poly(), poly()), |(f, g)| {
        prop_assert_eq!(f.bar().bar(), f.clone());
        prop_assert_eq!((&f * &g).bar(), &f.bar() * &g.bar());
        Ok(())
    })?;
    run_property(
        "ring identities",
        0x0a02,
        (poly(), poly(), poly()),
        |(f, g, h)| {
            prop_assert_eq!(&f * &(&g + &h), &(&f * &g) + &(&f * &h));
            prop_assert_eq!(&(&f * &g) * &h, &f * &(&g * &h));
            Ok(())
        },
    )?;
    let negative = prop::collection::vec((-10i64..=-1, -6i64..=6), 0..7)
        .prop_map(LaurentPolynomial::from_terms);
    run_property("antisymmetric solve", 0x0a03, negative, |p| {
        prop_assert_eq!(antisym_solve(&(&p - &p.bar())).unwrap(), p);
        Ok(())
    })?;
    run_property(
        "order axioms",
        0x0a04,
        (upper22(), upper22(), upper22()),
        |(a, b, c)| {
            prop_assert!(preceq(&a, &a));
            if preceq(&a, &b) && preceq(&b, &a) {
                prop_assert_eq!(&a, &b);
            }
            if preceq(&a, &b) && preceq(&b, &c) {
                prop_assert!(preceq(&a, &c));
            }
            if preceq(&a, &b) && a != b {
                prop_assert!(a.norm() < b.norm());
            }
            Ok(())
        },
    )?;
    run_property("transpose", 0x0a05, upper22(), |a| {
        let t = a.transpose();
        prop_assert!(t.is_strictly_lower() || a.is_zero());
        prop_assert_eq!(t.transpose(), a.clone());
        prop_assert_eq!(t.ro(), a.co());
        Ok(())
    })?;
    let all = enumerate_upper(shape(2, 2), |_, _| 1, None);
    for a in &all {
        for b in &all {
            if preceq(a, b) && a != b && (preceq(b, a) || a.norm() >= b.norm()) {
                return Err(format!(
                    "order fails on {} and {}",
                    a.to_text(),
                    b.to_text()
                ));
            }
        }
    }
    Ok("5 properties x 500 cases, exhaustive order check on 64 matrices".to_string())
}

#[test]
fn acceptance_criteria() {
    let criteria: Vec<Criterion> = vec![
        (
            1,
            "rank (2|1) closed-form table",
            Duration::from_secs(5),
            criterion_1,
        ),
        (
            2,
            "rank (2|2) closed-form table",
            Duration::from_secs(60),
            criterion_2,
        ),
        (
            3,
            "PBW products equal the standard basis",
            Duration::from_secs(60),
            criterion_3,
        ),
        (
            4,
            "defining relations and generator commutators",
            Duration::from_secs(120),
            criterion_4,
        ),
        (
            5,
            "canonical basis axioms and layered elimination",
            Duration::from_secs(120),
            criterion_5,
        ),
        (
            6,
            "r-independent generator expansions",
            Duration::from_secs(120),
            criterion_6,
        ),
        (
            7,
            "negative canonical basis at level r",
            Duration::from_secs(120),
            criterion_7,
        ),
        (
            8,
            "leading terms of PBW-type products",
            Duration::from_secs(120),
            criterion_8,
        ),
        (
            9,
            "highest supertableaux and content dominance",
            Duration::from_secs(60),
            criterion_9,
        ),
        (
            10,
            "laurent and matrices property suites",
            Duration::from_secs(60),
            criterion_10,
        ),
    ];
    let mut failed = Vec::new();
    for (n, name, budget, run) in criteria {
        let start = Instant::now();
        let outcome =
            catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|_| Err("panicked".to_string()));
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if elapsed > budget => {
                Err(format!("{detail}; took {elapsed:.2?}, budget {budget:?}"))
            }
            other => other,
        };
        match outcome {
            Ok(detail) => println!("[PASS] criterion {n}: {name} ({detail}, {elapsed:.2?})"),
            Err(why) => {
                println!("[FAIL] criterion {n}: {name}: {why}");
                failed.push(n);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
