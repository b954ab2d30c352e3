//! Seeded randomized property suites (>= 100 cases each): canonical-form
//! arithmetic laws with numeric cross-evaluation, jet-calculus identities,
//! parser/printer round-trips, null-Lagrangian behaviour of the
//! Euler-Lagrange operator, and exact nullspace checks.

use std::collections::BTreeMap;

use noether_core::calculus::{euler_lagrange, partial, total_derivative, Diff, LagrangianSpec};
use noether_core::expr::{parse, to_text, ExactPoint, Expr, JetVar, TransArg, TransKind};
use noether_core::linsolve::RationalMatrix;
use noether_core::rational::{rat, rat_int, to_f64, Rational};
use noether_core::DEFAULT_ORDER_CAP as CAP;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const COORDS: [&str; 2] = ["x", "y"];

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_rational<R: Rng>(r: &mut R) -> Rational {
    loop {
        let num = r.gen_range(-9..=9i64);
        if num != 0 {
            return rat(num, r.gen_range(1..=4i64));
        }
    }
}

/// Random canonical expression over two coordinates with jet order <= 3.
fn random_expr<R: Rng>(r: &mut R, allow_trans: bool, allow_frac: bool) -> Expr {
    let n_terms = r.gen_range(1..=4);
    let mut acc = Expr::zero();
    for _ in 0..n_terms {
        let mut term = Expr::rational(random_rational(r));
        if r.gen_bool(0.4) {
            let p = r.gen_range(0..=2i64);
            term = term.mul(&Expr::time_pow(rat_int(p)));
        }
        for _ in 0..r.gen_range(0..=2) {
            let v = JetVar::new(r.gen_range(0..2), r.gen_range(0..=3));
            let e = if allow_frac && r.gen_bool(0.2) {
                rat(r.gen_range(1..=3), 2)
            } else {
                rat_int(r.gen_range(1..=2))
            };
            term = term.mul(&Expr::jet_pow(v, e));
        }
        if allow_trans && r.gen_bool(0.5) {
            let kind = match r.gen_range(0..3) {
                0 => TransKind::Sin,
                1 => TransKind::Cos,
                _ => TransKind::Exp,
            };
            let freq = match r.gen_range(0..3) {
                0 => rat_int(1),
                1 => rat_int(2),
                _ => rat(1, 2),
            };
            let arg = if r.gen_bool(0.8) {
                TransArg::Time
            } else {
                TransArg::Coord(r.gen_range(0..2))
            };
            term = term.mul(&Expr::trans(kind, arg, freq));
        }
        acc = acc.add(&term);
    }
    acc
}

/// Positive evaluation point keeping fractional powers and negative
/// exponents in-domain.
fn random_point<R: Rng>(r: &mut R) -> (f64, BTreeMap<JetVar, f64>) {
    let t = r.gen_range(0.3..2.5);
    let mut jets = BTreeMap::new();
    for coord in 0..2 {
        for order in 0..=4 {
            jets.insert(JetVar::new(coord, order), r.gen_range(0.3..2.5));
        }
    }
    (t, jets)
}

fn assert_close(a: f64, b: f64, tol: f64, what: &str) {
    let scale = 1.0_f64.max(a.abs()).max(b.abs());
    assert!(
        (a - b).abs() <= tol * scale,
        "{what}: {a} vs {b} (scale {scale})"
    );
}

#[test]
fn canonical_arithmetic_laws() {
    let mut r = rng(0xA1);
    for case in 0..100 {
        let e1 = random_expr(&mut r, true, false);
        let e2 = random_expr(&mut r, true, false);
        let e3 = random_expr(&mut r, true, false);
        // structural laws
        assert_eq!(e1.add(&e2), e2.add(&e1), "case {case}: add commutes");
        assert_eq!(
            e1.mul(&e2.add(&e3)),
            e1.mul(&e2).add(&e1.mul(&e3)),
            "case {case}: distributivity"
        );
        assert!(e1.sub(&e1).is_zero(), "case {case}: zero test");
        // numeric cross-check of the product at 10 points
        let prod = e1.mul(&e2);
        for _ in 0..10 {
            let (t, jets) = random_point(&mut r);
            let lhs = prod.eval_numeric(t, &jets).unwrap();
            let rhs = e1.eval_numeric(t, &jets).unwrap() * e2.eval_numeric(t, &jets).unwrap();
            assert_close(lhs, rhs, 1e-10, &format!("case {case}: product value"));
        }
    }
}

#[test]
fn trig_rewriting_preserves_value() {
    // Build raw sin/cos products and compare the canonical expression
    // against factor-by-factor IEEE evaluation.
    let mut r = rng(0xA2);
    for case in 0..100 {
        let n = r.gen_range(2..=4);
        let mut factors: Vec<(TransKind, f64)> = Vec::new();
        let mut expr = Expr::one();
        for _ in 0..n {
            let kind = if r.gen_bool(0.5) {
                TransKind::Sin
            } else {
                TransKind::Cos
            };
            let (fr, ff) = match r.gen_range(0..3) {
                0 => (rat_int(1), 1.0),
                1 => (rat_int(2), 2.0),
                _ => (rat(1, 2), 0.5),
            };
            factors.push((kind, ff));
            expr = expr.mul(&Expr::trans(kind, TransArg::Time, fr));
        }
        for k in 0..10 {
            let t = -4.0 + 0.83 * k as f64;
            let want: f64 = factors
                .iter()
                .map(|(kind, f)| match kind {
                    TransKind::Sin => (f * t).sin(),
                    TransKind::Cos => (f * t).cos(),
                    TransKind::Exp => (f * t).exp(),
                })
                .product();
            let got = expr.eval_numeric(t, &BTreeMap::new()).unwrap();
            assert_close(got, want, 1e-10, &format!("case {case}: trig product"));
        }
    }
}

#[test]
fn print_parse_round_trip() {
    let mut r = rng(0xA3);
    for case in 0..200 {
        let e = random_expr(&mut r, true, case % 2 == 0);
        let text = to_text(&e, &COORDS);
        let back = parse(&text, &COORDS, &BTreeMap::new())
            .unwrap_or_else(|err| panic!("case {case}: `{text}` failed to re-parse: {err}"));
        assert_eq!(back, e, "case {case}: round trip of `{text}`");
    }
}

#[test]
fn leibniz_rule_holds() {
    let mut r = rng(0xA4);
    for case in 0..100 {
        let a = random_expr(&mut r, true, false);
        let b = random_expr(&mut r, true, false);
        let lhs = total_derivative(&a.mul(&b), 12).unwrap();
        let rhs = total_derivative(&a, 12)
            .unwrap()
            .mul(&b)
            .add(&a.mul(&total_derivative(&b, 12).unwrap()));
        assert_eq!(lhs, rhs, "case {case}");
    }
}

#[test]
fn commutation_of_partial_and_total_derivative() {
    let mut r = rng(0xA5);
    for case in 0..100 {
        let e = random_expr(&mut r, true, false);
        let coord = r.gen_range(0..2);
        let k = r.gen_range(1..=4u32);
        let v = JetVar::new(coord, k);
        let lhs = partial(&total_derivative(&e, 12).unwrap(), Diff::Var(v));
        let rhs = total_derivative(&partial(&e, Diff::Var(v)), 12)
            .unwrap()
            .add(&partial(&e, Diff::Var(JetVar::new(coord, k - 1))));
        assert_eq!(lhs, rhs, "case {case}");
    }
}

#[test]
fn euler_lagrange_annihilates_total_derivatives() {
    let mut r = rng(0xA6);
    for case in 0..100 {
        // F of jet order <= 1, so D_t F is a valid second-order Lagrangian
        let f = loop {
            let f = random_expr(&mut r, true, false);
            if f.max_order() <= 1 && !f.is_zero() {
                break f;
            }
        };
        let df = total_derivative(&f, CAP).unwrap();
        if df.is_zero() {
            continue;
        }
        let spec = LagrangianSpec::new(2, 2, df).unwrap();
        for i in 0..2 {
            assert!(
                euler_lagrange(&spec, i, CAP).unwrap().is_zero(),
                "case {case}: E_{i}(D_t F) != 0 for F = {f}"
            );
        }
    }
}

#[test]
fn gauge_terms_leave_equations_of_motion_unchanged() {
    let base = parse(
        "(1/2)*(x''^2 - x'^2 + y''^2 - y'^2)",
        &COORDS,
        &BTreeMap::new(),
    )
    .unwrap();
    let spec = LagrangianSpec::new(2, 2, base).unwrap();
    let el: Vec<Expr> = (0..2)
        .map(|i| euler_lagrange(&spec, i, CAP).unwrap())
        .collect();
    let mut r = rng(0xA7);
    for case in 0..100 {
        let f = loop {
            let f = random_expr(&mut r, true, false);
            if f.max_order() <= 1 {
                break f;
            }
        };
        let lt = LagrangianSpec::new(
            2,
            2,
            spec.lagrangian.add(&total_derivative(&f, CAP).unwrap()),
        )
        .unwrap();
        for i in 0..2 {
            assert_eq!(
                euler_lagrange(&lt, i, CAP).unwrap(),
                el[i],
                "case {case}: gauge term changed E_{i}"
            );
        }
    }
}

#[test]
fn partial_matches_finite_differences() {
    let mut r = rng(0xA8);
    let h = 1e-6;
    for case in 0..100 {
        let e = random_expr(&mut r, true, false);
        let v = JetVar::new(r.gen_range(0..2), r.gen_range(0..=3));
        let de = partial(&e, Diff::Var(v));
        for _ in 0..10 {
            let (t, jets) = random_point(&mut r);
            let mut hi = jets.clone();
            let mut lo = jets.clone();
            hi.insert(v, jets[&v] + h);
            lo.insert(v, jets[&v] - h);
            let fd =
                (e.eval_numeric(t, &hi).unwrap() - e.eval_numeric(t, &lo).unwrap()) / (2.0 * h);
            let exact = de.eval_numeric(t, &jets).unwrap();
            let scale = 1.0_f64.max(exact.abs());
            assert!(
                (fd - exact).abs() <= 1e-6 * scale,
                "case {case}: fd {fd} vs exact {exact}"
            );
        }
    }
}

#[test]
fn nullspace_vectors_annihilate_exactly() {
    let mut r = rng(0xA9);
    for case in 0..100 {
        let rows = r.gen_range(1..=6);
        let cols = r.gen_range(1..=6);
        let mut m = RationalMatrix::new(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                if r.gen_bool(0.7) {
                    m.set(i, j, rat(r.gen_range(-6..=6), r.gen_range(1..=3)));
                }
            }
        }
        let ns = m.nullspace();
        assert_eq!(m.rank() + ns.len(), cols, "case {case}: rank-nullity");
        for v in &ns {
            let image = m.apply(v);
            assert!(
                image.iter().all(|x| x == &rat_int(0)),
                "case {case}: A v != 0"
            );
        }
    }
}

#[test]
fn exact_evaluation_matches_floating_point() {
    // eval_exact over sampled power bases agrees with eval_numeric.
    let mut r = rng(0xAA);
    for case in 0..100 {
        let e = random_expr(&mut r, false, true);
        let mut point = ExactPoint::default();
        point.time = Some((rat(r.gen_range(1..=9), r.gen_range(1..=3)), 2));
        for coord in 0..2 {
            for order in 0..=4 {
                point.jets.insert(
                    JetVar::new(coord, order),
                    (rat(r.gen_range(1..=9), r.gen_range(1..=3)), 2),
                );
            }
        }
        let exact = e.eval_exact(&point).unwrap();
        let t = to_f64(&point.time.as_ref().unwrap().0).powi(2);
        let mut jets = BTreeMap::new();
        for (v, (b, d)) in &point.jets {
            jets.insert(*v, to_f64(b).powi(*d as i32));
        }
        let approx = e.eval_numeric(t, &jets).unwrap();
        assert_close(to_f64(&exact), approx, 1e-9, &format!("case {case}"));
    }
}
