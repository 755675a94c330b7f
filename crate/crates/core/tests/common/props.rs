//! Randomized invariants shared by the test suite and the acceptance runner.

use num_bigint::BigInt;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};

use padic_expsum::enumerate::{brute_points, lift_levels, lift_points, DEFAULT_BUDGET};
use padic_expsum::expsum::{sum_curve, PhaseSpec};
use padic_expsum::hensel::CurvePoint;
use padic_expsum::padic::{char_eval, pow_p};
use padic_expsum::{mu_at_point, BiPoly};

use super::{eval_mod, naive_points, taylor_mu_on_graph, terms};

pub const CASES: u32 = 1000;

pub fn runner() -> TestRunner {
    TestRunner::new(Config {
        cases: CASES,
        failure_persistence: None,
        ..Config::default()
    })
}

const MONOMIALS: [(u32, u32); 10] = [
    (0, 0),
    (1, 0),
    (0, 1),
    (2, 0),
    (1, 1),
    (0, 2),
    (3, 0),
    (2, 1),
    (1, 2),
    (0, 3),
];

/// Cubic-or-lower curves with small coefficients, never constant.
fn curve() -> impl Strategy<Value = BiPoly> {
    prop::collection::vec(-3i64..=3, 10)
        .prop_map(|c| BiPoly::from_terms(MONOMIALS.iter().copied().zip(c)))
        .prop_filter("non-constant", |f| !f.is_constant())
}

/// `(p, m)` with `p^(2m) <= 15625` so the plane can be scanned.
fn small_level(min_m: u32) -> impl Strategy<Value = (u64, u32)> {
    prop::sample::select(vec![(2u64, 6u32), (3, 4), (5, 3)]).prop_flat_map(move |(p, max_m)| {
        (Just(p), min_m..=max_m)
    })
}

fn unit(p: u64) -> impl Strategy<Value = i64> {
    (-200i64..200).prop_filter("unit", move |u| u.rem_euclid(p as i64) != 0)
}

/// `Ψ(a + b) = Ψ(a)Ψ(b)`, and `Ψ` is trivial on `p^m Z`.
pub fn character_additivity() -> Result<(), String> {
    let strat = (
        prop::sample::select(vec![2u64, 3, 5, 7, 11, 13]),
        1u32..=40,
        any::<i64>(),
        any::<i64>(),
        any::<i32>(),
    );
    runner()
        .run(&strat, |(p, m, a, b, k)| {
            let (a, b) = (BigInt::from(a), BigInt::from(b));
            let sum = char_eval(&(&a + &b), m, p).unwrap();
            let prod = char_eval(&a, m, p).unwrap() * char_eval(&b, m, p).unwrap();
            prop_assert!((sum - prod).norm() < 1e-9, "{sum} vs {prod}");
            let shifted = &a + pow_p(p, m) * BigInt::from(k);
            prop_assert_eq!(char_eval(&shifted, m, p).unwrap(), char_eval(&a, m, p).unwrap());
            Ok(())
        })
        .map_err(|e| e.to_string())
}

/// `S_m(-u) = conj(S_m(u))`, with `S_m(u)` matching the direct sum.
pub fn conjugation_symmetry() -> Result<(), String> {
    let strat = (curve(), curve(), small_level(1))
        .prop_flat_map(|(f, g, (p, m))| (Just(f), Just(g), Just((p, m)), unit(p)));
    runner()
        .run(&strat, |(f, g, (p, m), u)| {
            let pts = lift_points(&f, p, m).unwrap();
            let plus = sum_curve(&f, &g, &PhaseSpec::new(p, m, u).unwrap(), &pts).unwrap();
            let minus = sum_curve(&f, &g, &PhaseSpec::new(p, m, -u).unwrap(), &pts).unwrap();
            let tol = 1e-9 * (pts.len().max(1) as f64);
            prop_assert!((minus.value() - plus.value().conj()).norm() <= tol);
            let (re, im) = super::naive_sum(pts.points(), &terms(&g), p, m, u as i128);
            prop_assert!((plus.re - re).abs() <= tol && (plus.im - im).abs() <= tol);
            Ok(())
        })
        .map_err(|e| e.to_string())
}

/// The lifting tree and the exhaustive scan agree with a naive double loop.
pub fn lift_consistency() -> Result<(), String> {
    runner()
        .run(&(curve(), small_level(1)), |(f, (p, m))| {
            let naive = naive_points(&terms(&f), p, m);
            let lifted = lift_points(&f, p, m).unwrap();
            prop_assert_eq!(lifted.points(), &naive[..]);
            let brute = brute_points(&f, p, m, DEFAULT_BUDGET).unwrap();
            prop_assert_eq!(brute.points(), &naive[..]);
            Ok(())
        })
        .map_err(|e| e.to_string())
}

/// `μ(c1·f, c2·g) = μ(f, g)` for units `c1, c2`, and both equal the Taylor order.
pub fn mu_unit_invariance() -> Result<(), String> {
    let strat = (
        prop::sample::select(vec![3u64, 5, 7]),
        prop::collection::vec(-4i64..=4, 5),
        prop::collection::vec(-3i64..=3, 4),
        0i64..49,
    )
        .prop_flat_map(|(p, phi, gc, x0)| (Just((p, phi, gc, x0)), unit(p), unit(p)));
    runner()
        .run(&strat, |((p, phi_c, gc, x0), c1, c2)| {
            let phi = BiPoly::from_terms((0u32..5).map(|i| (i, 0u32)).zip(phi_c));
            let g = BiPoly::from_terms([(1, 0), (0, 1), (1, 1), (0, 2)].into_iter().zip(gc));
            let oracle = taylor_mu_on_graph(&terms(&phi), &terms(&g), x0);
            prop_assume!(oracle.is_some());
            let f = &BiPoly::y() - &phi;
            let y0 = phi.eval_int(&BigInt::from(x0), &BigInt::from(0));
            let pt = CurvePoint::new(&f, x0, y0.clone(), p, 40).unwrap();
            let base = mu_at_point(&f, &g, &pt).unwrap();
            prop_assert_eq!(base.mu as usize, oracle.unwrap());
            let fs = f.scale(&BigInt::from(c1));
            let gs = g.scale(&BigInt::from(c2));
            let pt_s = CurvePoint::new(&fs, x0, y0, p, 40).unwrap();
            let scaled = mu_at_point(&fs, &gs, &pt_s).unwrap();
            prop_assert_eq!(scaled.mu, base.mu);
            prop_assert_eq!(scaled.v_c0, base.v_c0);
            Ok(())
        })
        .map_err(|e| e.to_string())
}

/// Reducing `Y_m` to level `k` gives exactly the points of `Y_k` that lift to level `m`.
pub fn projection_consistency() -> Result<(), String> {
    let strat = (curve(), small_level(2)).prop_flat_map(|(f, (p, m))| (Just(f), Just((p, m)), 1..m));
    runner()
        .run(&strat, |(f, (p, m), k)| {
            let t = terms(&f);
            let levels = lift_levels(&f, p, m).unwrap();
            let projected = levels[m as usize - 1].project(k).unwrap();
            prop_assert_eq!(&levels[k as usize - 1], &lift_points(&f, p, k).unwrap());
            let nm = (p as i128).pow(m);
            let nk = (p as i128).pow(k);
            let step = (p as i128).pow(m - k);
            let expected: Vec<(u64, u64)> = naive_points(&t, p, k)
                .into_iter()
                .filter(|&(x, y)| {
                    (0..step).any(|a| {
                        (0..step).any(|b| {
                            eval_mod(&t, x as i128 + a * nk, y as i128 + b * nk, nm) == 0
                        })
                    })
                })
                .collect();
            prop_assert_eq!(projected.points(), &expected[..]);
            Ok(())
        })
        .map_err(|e| e.to_string())
}

pub type Property = fn() -> Result<(), String>;

pub fn all() -> Vec<(&'static str, Property)> {
    vec![
        ("character additivity", character_additivity as Property),
        ("conjugation symmetry", conjugation_symmetry),
        ("lift consistency", lift_consistency),
        ("unit-invariance of mu", mu_unit_invariance),
        ("projection consistency", projection_consistency),
    ]
}
