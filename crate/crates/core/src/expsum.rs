//! Exponential sums `S_m(z, Ψ, Y, g) = Σ_{P ∈ Y_m} Ψ(z·g(P))` with `z = u·p^(-m)`.
//!
//! Phases are reduced exactly mod `p^m` before the character is evaluated;
//! terms are accumulated by a fixed pairwise tree over the lexicographic
//! point order, so results are reproducible bit for bit.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use serde::Serialize;

use crate::enumerate::{PointSet, MAX_MODULUS};
use crate::error::{Error, Result};
use crate::hensel::{Branch, Orientation};
use crate::padic::{char_u64, is_prime, pow_p_u64};
use crate::poly::{add_mod, big_mod_u64, mul_mod, BiPoly};
use crate::round_sig;

/// `z = u·p^(-m)` with `u` a unit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PhaseSpec {
    p: u64,
    m: u32,
    u: u64,
}

impl PhaseSpec {
    /// `u` may be any integer coprime to `p`; it is reduced mod `p^m`.
    pub fn new(p: u64, m: u32, u: i64) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if m == 0 {
            return Err(Error::Domain("phase level m must be >= 1".into()));
        }
        if u.rem_euclid(p as i64) == 0 {
            return Err(Error::Domain(format!("u = {u} is not coprime to p = {p}")));
        }
        let n = match pow_p_u64(p, m) {
            Some(n) if n <= MAX_MODULUS => n,
            _ => {
                return Err(Error::Budget {
                    what: "modulus p^m",
                    needed: (p as u128).saturating_pow(m),
                    limit: MAX_MODULUS as u128,
                })
            }
        };
        Ok(Self {
            p,
            m,
            u: (u as i128).rem_euclid(n as i128) as u64,
        })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn u(&self) -> u64 {
        self.u
    }

    pub fn modulus(&self) -> u64 {
        self.p.pow(self.m)
    }

    /// The phase with `-u`.
    pub fn conjugate(&self) -> Self {
        let n = self.modulus();
        Self {
            u: (n - self.u) % n,
            ..*self
        }
    }

    /// `Ψ(z·v)` for an integer `v` already reduced mod `p^m`.
    #[inline]
    pub fn character(&self, v: u64) -> Complex64 {
        let n = self.modulus();
        char_u64(mul_mod(self.u, v, n), n)
    }
}

/// One evaluated sum.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SumRecord {
    pub p: u64,
    pub m: u32,
    pub u: u64,
    pub f: String,
    pub g: String,
    #[serde(serialize_with = "round_sig::serialize")]
    pub re: f64,
    #[serde(serialize_with = "round_sig::serialize")]
    pub im: f64,
    #[serde(serialize_with = "round_sig::serialize")]
    pub magnitude: f64,
    pub point_count: u64,
    #[serde(serialize_with = "round_sig::serialize_opt")]
    pub normalized: Option<f64>,
}

/// CSV column order for [`SumRecord`].
pub const SUM_CSV_HEADER: &str = "p,m,u,f,g,re,im,magnitude,point_count,normalized";

impl SumRecord {
    fn new(phase: &PhaseSpec, f: String, g: String, value: Complex64, point_count: u64) -> Result<Self> {
        let magnitude = value.norm();
        if magnitude > point_count as f64 * (1.0 + 1e-9) + 1e-9 {
            return Err(Error::Internal(format!(
                "|S| = {magnitude} exceeds the point count {point_count}"
            )));
        }
        Ok(Self {
            p: phase.p,
            m: phase.m,
            u: phase.u,
            f,
            g,
            re: value.re,
            im: value.im,
            magnitude,
            point_count,
            normalized: None,
        })
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }

    /// Attaches `|S_m| / p^(m(1 - 1/σ))`.
    pub fn with_sigma(mut self, sigma: u32) -> Self {
        self.normalized = Some(self.magnitude / bound_scale(self.p, self.m, sigma));
        self
    }

    pub fn to_csv_row(&self) -> String {
        let opt = |v: Option<f64>| v.map(round_sig::fmt).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.p,
            self.m,
            self.u,
            csv_quote(&self.f),
            csv_quote(&self.g),
            round_sig::fmt(self.re),
            round_sig::fmt(self.im),
            round_sig::fmt(self.magnitude),
            self.point_count,
            opt(self.normalized)
        )
    }
}

fn csv_quote(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// `p^(m(1 - 1/σ))`.
pub fn bound_scale(p: u64, m: u32, sigma: u32) -> f64 {
    let exponent = m as f64 * (1.0 - 1.0 / sigma.max(1) as f64);
    (p as f64).powf(exponent)
}

const LEAF: usize = 64;
const PAR_CUTOFF: usize = 1 << 15;

/// Pairwise sum of `term(i)` for `i` in `lo..hi` over a tree fixed by the range alone.
pub fn tree_sum<F>(lo: usize, hi: usize, term: &F) -> Complex64
where
    F: Fn(usize) -> Complex64 + Sync,
{
    let n = hi - lo;
    if n <= LEAF {
        return (lo..hi).map(term).fold(Complex64::new(0.0, 0.0), |a, b| a + b);
    }
    let mid = lo + n / 2;
    if n >= PAR_CUTOFF {
        let (a, b) = rayon::join(|| tree_sum(lo, mid, term), || tree_sum(mid, hi, term));
        a + b
    } else {
        tree_sum(lo, mid, term) + tree_sum(mid, hi, term)
    }
}

/// `Σ Ψ(z·g(x, y))` over raw coordinate pairs, each reduced mod `p^m` first.
pub fn phase_sum(points: &[(u64, u64)], g: &BiPoly, phase: &PhaseSpec) -> Complex64 {
    let n = phase.modulus();
    let gm = g.to_mod(n);
    tree_sum(0, points.len(), &|i| {
        let (x, y) = points[i];
        phase.character(gm.eval(x % n, y % n))
    })
}

/// `S_m` along an enumerated curve; `points` must sit at the phase level.
pub fn sum_curve(f: &BiPoly, g: &BiPoly, phase: &PhaseSpec, points: &PointSet) -> Result<SumRecord> {
    if points.m() != phase.m || points.p() != phase.p {
        return Err(Error::LevelMismatch {
            points: points.m(),
            phase: phase.m,
        });
    }
    let value = phase_sum(points.points(), g, phase);
    SumRecord::new(phase, f.to_string(), g.to_string(), value, points.len() as u64)
}

/// `Σ_{x mod p^m} Ψ(z·f(x))`.
///
/// Recorded as the curve sum for `y - f(x)` with `g = y`, which is the same sum.
pub fn sum_onevar(f_one: &BiPoly, phase: &PhaseSpec) -> Result<SumRecord> {
    if !f_one.is_univariate_x() {
        return Err(Error::Domain("one-variable sums need a polynomial in x only".into()));
    }
    let n = phase.modulus();
    let fm = f_one.to_mod(n);
    let value = tree_sum(0, n as usize, &|i| phase.character(fm.eval(i as u64, 0)));
    let curve = &BiPoly::y() - f_one;
    SumRecord::new(phase, curve.to_string(), "y".into(), value, n)
}

/// Sum over the branch `{branch(t) : t ≡ 0 mod p^l}` in `Z/p^m`.
///
/// The series must determine every branch point mod `p^m`: its precision
/// must be at least `m` and the dropped tail `Σ_{j>T} c_j t^j` must vanish
/// mod `p^m` for `v(t) >= l`.
pub fn sum_parametric(branch: &Branch, g: &BiPoly, l: u32, phase: &PhaseSpec) -> Result<SumRecord> {
    let m = phase.m;
    let p = phase.p;
    if branch.series.p() != p {
        return Err(Error::Domain("branch and phase use different primes".into()));
    }
    if l > m {
        return Err(Error::Domain(format!("ball level l = {l} exceeds m = {m}")));
    }
    if branch.series.precision() < m || branch.anchor.level() < m {
        return Err(Error::Precision(format!(
            "series precision {} / anchor level {} below m = {m}; recompute h at precision >= {m}",
            branch.series.precision(),
            branch.anchor.level()
        )));
    }
    let order = branch.series.order_cap() as u64;
    let tail = (order + 1) * l as u64 + if branch.series.is_srp() { order } else { 0 };
    if tail < m as u64 {
        return Err(Error::Precision(format!(
            "truncation at t^{order} leaves terms of valuation {tail} < m = {m}; recompute h to a higher order"
        )));
    }

    let n = phase.modulus();
    let coeffs: Vec<u64> = branch
        .series
        .coeffs()
        .iter()
        .map(|c| big_mod_u64(c, p, m).expect("fits"))
        .collect();
    let (x0, y0) = branch.anchor.coords();
    let x0 = big_mod_u64(&x0, p, m).expect("fits");
    let y0 = big_mod_u64(&y0, p, m).expect("fits");
    let gm = g.to_mod(n);
    let step = p.pow(l) % n;
    let count = p.pow(m - l);
    let value = tree_sum(0, count as usize, &|s| {
        let t = mul_mod(s as u64, step, n);
        let h = coeffs.iter().rev().fold(0u64, |acc, &c| add_mod(mul_mod(acc, t, n), c, n));
        let (x, y) = match branch.orientation {
            Orientation::SolveY => (add_mod(x0, t, n), add_mod(y0, h, n)),
            Orientation::SolveX => (add_mod(x0, h, n), add_mod(y0, t, n)),
        };
        phase.character(gm.eval(x, y))
    });
    SumRecord::new(phase, String::new(), g.to_string(), value, count)
}

/// Exact `g(P) mod p^m` for use with [`PhaseSpec::character`].
pub fn reduce_value(v: &BigInt, phase: &PhaseSpec) -> u64 {
    v.mod_floor(&BigInt::from(phase.modulus()))
        .try_into()
        .expect("reduced below a u64 modulus")
}
