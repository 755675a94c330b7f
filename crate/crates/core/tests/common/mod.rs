//! Reference computations written without the library's arithmetic:
//! plain `i128` residues, dense integer polynomials in `t`, and direct
//! `cos`/`sin` evaluation of the character.

#![allow(dead_code)]

pub mod props;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use padic_expsum::BiPoly;

/// `(coefficient, i, j)` for each monomial `c·x^i·y^j`.
pub type Terms = Vec<(i128, u32, u32)>;

pub fn terms(f: &BiPoly) -> Terms {
    f.terms()
        .map(|(&(i, j), c)| (c.to_i128().expect("small coefficient"), i, j))
        .collect()
}

pub fn poly(s: &str) -> BiPoly {
    s.parse().expect("valid polynomial")
}

fn pow_mod(b: i128, mut e: u32, n: i128) -> i128 {
    let mut acc = 1 % n;
    let mut b = b.rem_euclid(n);
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % n;
        }
        b = b * b % n;
        e >>= 1;
    }
    acc
}

/// `f(x, y) mod n` for `n < 2^62`.
pub fn eval_mod(f: &Terms, x: i128, y: i128, n: i128) -> i128 {
    let mut acc = 0i128;
    for (c, i, j) in f {
        let c = c.rem_euclid(n);
        let t = c * pow_mod(x, *i, n) % n * pow_mod(y, *j, n) % n;
        acc = (acc + t) % n;
    }
    acc
}

/// Every `(x, y)` in `(Z/n)^2` with `f ≡ 0`.
pub fn naive_points(f: &Terms, p: u64, m: u32) -> Vec<(u64, u64)> {
    let n = (p as i128).pow(m);
    let mut out = Vec::new();
    for x in 0..n {
        for y in 0..n {
            if eval_mod(f, x, y, n) == 0 {
                out.push((x as u64, y as u64));
            }
        }
    }
    out
}

/// `Σ exp(2πi·u·g(x, y) / p^m)` over the given points, accumulated left to right.
pub fn naive_sum(points: &[(u64, u64)], g: &Terms, p: u64, m: u32, u: i128) -> (f64, f64) {
    let n = (p as i128).pow(m);
    let (mut re, mut im) = (0.0, 0.0);
    for &(x, y) in points {
        let k = (u * eval_mod(g, x as i128, y as i128, n)).rem_euclid(n);
        let theta = 2.0 * std::f64::consts::PI * (k as f64) / (n as f64);
        re += theta.cos();
        im += theta.sin();
    }
    (re, im)
}

pub fn naive_curve_sum(f: &BiPoly, g: &BiPoly, p: u64, m: u32, u: i128) -> (f64, f64, usize) {
    let pts = naive_points(&terms(f), p, m);
    let (re, im) = naive_sum(&pts, &terms(g), p, m, u);
    (re, im, pts.len())
}

/// Dense polynomial in `t` with integer coefficients.
pub type TPoly = Vec<BigInt>;

pub fn tp_mul(a: &TPoly, b: &TPoly) -> TPoly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![BigInt::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

pub fn tp_add(a: &TPoly, b: &TPoly) -> TPoly {
    let mut out = vec![BigInt::zero(); a.len().max(b.len())];
    for (i, x) in a.iter().enumerate() {
        out[i] += x;
    }
    for (i, x) in b.iter().enumerate() {
        out[i] += x;
    }
    out
}

fn tp_pow(a: &TPoly, e: u32) -> TPoly {
    let mut acc = vec![BigInt::one()];
    for _ in 0..e {
        acc = tp_mul(&acc, a);
    }
    acc
}

/// `h(X(t), Y(t))` expanded exactly, for polynomial `X` and `Y`.
pub fn compose(h: &Terms, x: &TPoly, y: &TPoly) -> TPoly {
    let mut out = Vec::new();
    for (c, i, j) in h {
        let mono = tp_mul(&tp_pow(x, *i), &tp_pow(y, *j));
        let scaled: TPoly = mono.iter().map(|v| v * BigInt::from(*c)).collect();
        out = tp_add(&out, &scaled);
    }
    out
}

/// Lowest `k >= 1` with a nonzero coefficient, or `None` when the polynomial is constant.
pub fn order_of_vanishing(s: &TPoly) -> Option<usize> {
    s.iter().enumerate().skip(1).find(|(_, c)| !c.is_zero()).map(|(k, _)| k)
}

/// `μ` at `(x0, φ(x0))` on the graph `y = φ(x)`: the Taylor order of
/// `g(x0 + t, φ(x0 + t)) - g(x0, φ(x0))`, computed exactly over `Z`.
pub fn taylor_mu_on_graph(phi: &Terms, g: &Terms, x0: i64) -> Option<usize> {
    let x: TPoly = vec![BigInt::from(x0), BigInt::one()];
    let y = compose(phi, &x, &vec![BigInt::one()]);
    order_of_vanishing(&compose(g, &x, &y))
}

/// `μ` of a one-variable phase at `x0`: the Taylor order of `f(x0 + t) - f(x0)`.
pub fn taylor_mu_onevar(f: &Terms, x0: i64) -> Option<usize> {
    let x: TPoly = vec![BigInt::from(x0), BigInt::one()];
    order_of_vanishing(&compose(f, &x, &vec![BigInt::one()]))
}

/// `f(X(t), Y(t)) mod (n, t^(order+1))` for series given by residue coefficients.
pub fn residual_mod(f: &Terms, x: &[i128], y: &[i128], n: i128, order: usize) -> Vec<i128> {
    let mul = |a: &[i128], b: &[i128]| {
        let mut out = vec![0i128; order + 1];
        for (i, u) in a.iter().enumerate().take(order + 1) {
            if *u == 0 {
                continue;
            }
            for (j, v) in b.iter().enumerate().take(order + 1 - i) {
                out[i + j] = (out[i + j] + u * v % n) % n;
            }
        }
        out
    };
    let pow = |a: &[i128], e: u32| {
        let mut acc = vec![0i128; order + 1];
        acc[0] = 1 % n;
        for _ in 0..e {
            acc = mul(&acc, a);
        }
        acc
    };
    let mut out = vec![0i128; order + 1];
    for (c, i, j) in f {
        let c = c.rem_euclid(n);
        let mono = mul(&pow(x, *i), &pow(y, *j));
        for k in 0..=order {
            out[k] = (out[k] + c * mono[k]) % n;
        }
    }
    out
}

pub fn to_i128_mod(c: &BigInt, n: i128) -> i128 {
    let r = c % BigInt::from(n);
    let r = if r.is_negative() { r + BigInt::from(n) } else { r };
    r.to_i128().unwrap()
}

/// Curves used across the suites; the flag marks those without singular `Z_p` points.
/// `P2` stands for `p^2`.
pub const CORPUS: &[(&str, bool)] = &[
    ("y - x^2", true),
    ("y - x^3", true),
    ("x*y - 1", true),
    ("y^2 - x^3 - P2", true),
    ("x^2 + y^2 - 1", true),
    ("y^2 - x^3 - x - 1", true),
    ("y - x - x*y", true),
    ("x^2 - 2*y^2 - 1", true),
    ("y^3 - x^2 - x", true),
    ("y^2 - x^3 + x", true),
    ("x^3 + y^3 - 1", true),
    ("y^2 + x*y - x^3 - 1", true),
    ("x^2 + x*y + y^2 - 1", true),
    ("y^2 - x^3", false),
];

pub fn corpus_curve(text: &str, p: u64) -> BiPoly {
    poly(&text.replace("P2", &(p * p).to_string()))
}

pub fn primes_up_to(n: u64) -> Vec<u64> {
    (2..=n).filter(|&k| (2..k).take_while(|d| d * d <= k).all(|d| k % d != 0)).collect()
}
