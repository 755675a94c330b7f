//! Enumeration of `Y_m = {(x, y) ∈ (Z/p^m)^2 : f(x, y) ≡ 0 mod p^m}`.
//!
//! `brute_points` scans the whole plane and serves as the oracle;
//! `lift_points` refines solutions level by level, extending each point
//! mod `p^k` by one digit per coordinate.

use std::fmt::Write as _;

use num_integer::Integer;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::padic::{is_prime, pow_p_u64};
use crate::poly::{add_mod, mul_mod, BiPoly, ModPoly};

/// Default cap on `p^(2m)` for the exhaustive scan.
pub const DEFAULT_BUDGET: u128 = 100_000_000;

/// Largest modulus `p^m` the word-sized enumeration supports.
pub const MAX_MODULUS: u64 = 1 << 62;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Brute,
    Lift,
}

/// Solutions mod `p^m`, sorted lexicographically and free of duplicates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointSet {
    p: u64,
    m: u32,
    points: Vec<(u64, u64)>,
    method: Method,
}

impl PointSet {
    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn modulus(&self) -> u64 {
        self.p.pow(self.m)
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn points(&self) -> &[(u64, u64)] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn contains(&self, x: u64, y: u64) -> bool {
        self.points.binary_search(&(x, y)).is_ok()
    }

    /// Reduction mod `p^level` (`level <= m`), deduplicated.
    pub fn project(&self, level: u32) -> Result<PointSet> {
        if level == 0 || level > self.m {
            return Err(Error::Domain(format!(
                "cannot project level {} points to level {level}",
                self.m
            )));
        }
        let n = self.p.pow(level);
        let mut points: Vec<_> = self.points.iter().map(|&(x, y)| (x % n, y % n)).collect();
        points.sort_unstable();
        points.dedup();
        Ok(PointSet {
            p: self.p,
            m: level,
            points,
            method: self.method,
        })
    }

    /// The line format: a `# p=<p> m=<m> f=<poly>` header, then one `x,y` per line.
    pub fn to_text(&self, f: &BiPoly) -> String {
        let mut out = format!("# p={} m={} f={}\n", self.p, self.m, f);
        for (x, y) in &self.points {
            let _ = writeln!(out, "{x},{y}");
        }
        out
    }

    /// Reads the line format back, returning the points and the header polynomial.
    pub fn from_text(text: &str) -> Result<(PointSet, BiPoly)> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Domain("empty point file".into()))?;
        let rest = header
            .strip_prefix("# p=")
            .ok_or_else(|| Error::Domain("missing '# p=' header".into()))?;
        let (p_str, rest) = rest
            .split_once(" m=")
            .ok_or_else(|| Error::Domain("missing m= in header".into()))?;
        let (m_str, f_str) = rest
            .split_once(" f=")
            .ok_or_else(|| Error::Domain("missing f= in header".into()))?;
        let bad = |what: &str| Error::Domain(format!("malformed {what} in point file"));
        let p: u64 = p_str.parse().map_err(|_| bad("p"))?;
        let m: u32 = m_str.parse().map_err(|_| bad("m"))?;
        let f: BiPoly = f_str.parse()?;
        let mut points = Vec::new();
        for line in lines.filter(|l| !l.trim().is_empty() && !l.starts_with('#')) {
            let (x, y) = line.split_once(',').ok_or_else(|| bad("point line"))?;
            points.push((
                x.trim().parse().map_err(|_| bad("x"))?,
                y.trim().parse().map_err(|_| bad("y"))?,
            ));
        }
        points.sort_unstable();
        points.dedup();
        Ok((
            PointSet {
                p,
                m,
                points,
                method: Method::Lift,
            },
            f,
        ))
    }
}

fn check_args(p: u64, m: u32) -> Result<u64> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    if m == 0 {
        return Err(Error::Domain("level m must be >= 1".into()));
    }
    match pow_p_u64(p, m) {
        Some(n) if n <= MAX_MODULUS => Ok(n),
        _ => Err(Error::Budget {
            what: "modulus p^m",
            needed: (p as u128).saturating_pow(m),
            limit: MAX_MODULUS as u128,
        }),
    }
}

/// Exhaustive scan of `(Z/p^m)^2`; refuses when `p^(2m)` exceeds `budget`.
pub fn brute_points(f: &BiPoly, p: u64, m: u32, budget: u128) -> Result<PointSet> {
    let n = check_args(p, m)?;
    let cells = (n as u128) * (n as u128);
    if cells > budget {
        return Err(Error::Budget {
            what: "brute-force scan p^(2m)",
            needed: cells,
            limit: budget,
        });
    }
    let fm = f.to_mod(n);
    let points: Vec<(u64, u64)> = (0..n)
        .into_par_iter()
        .flat_map_iter(|x| {
            let fm = &fm;
            (0..n).filter(move |&y| fm.eval(x, y) == 0).map(move |y| (x, y))
        })
        .collect();
    Ok(PointSet {
        p,
        m,
        points,
        method: Method::Brute,
    })
}

/// Solutions mod `p^m` by the lifting tree.
pub fn lift_points(f: &BiPoly, p: u64, m: u32) -> Result<PointSet> {
    let mut levels = lift_levels(f, p, m)?;
    Ok(levels.pop().expect("m >= 1"))
}

/// Every level `1..=m` of the lifting tree.
pub fn lift_levels(f: &BiPoly, p: u64, m: u32) -> Result<Vec<PointSet>> {
    check_args(p, m)?;
    let fx = f.partial_x().to_mod(p);
    let fy = f.partial_y().to_mod(p);
    let f1 = f.to_mod(p);
    let base: Vec<(u64, u64)> = (0..p)
        .flat_map(|x| (0..p).map(move |y| (x, y)))
        .filter(|&(x, y)| f1.eval(x, y) == 0)
        .collect();
    let mut levels = vec![PointSet {
        p,
        m: 1,
        points: base,
        method: Method::Lift,
    }];
    let mut step = p;
    for k in 1..m {
        let next_mod = step * p;
        let fk = f.to_mod(next_mod);
        let frontier = &levels.last().expect("nonempty").points;
        let mut points: Vec<(u64, u64)> = frontier
            .par_iter()
            .flat_map_iter(|&pt| extend_point(pt, step, p, &fk, &fx, &fy))
            .collect();
        points.par_sort_unstable();
        levels.push(PointSet {
            p,
            m: k + 1,
            points,
            method: Method::Lift,
        });
        step = next_mod;
    }
    Ok(levels)
}

/// All lifts of `(x, y)` from mod `step` to mod `step·p`.
///
/// Writing `f(x, y) = step·c mod step·p`, a lift `(x + a·step, y + b·step)` is
/// a solution iff `c + a·f_x + b·f_y ≡ 0 mod p`. A unit partial gives exactly
/// `p` lifts directly; otherwise all `p^2` digit pairs are evaluated.
fn extend_point(
    (x, y): (u64, u64),
    step: u64,
    p: u64,
    fk: &ModPoly,
    fx: &ModPoly,
    fy: &ModPoly,
) -> Vec<(u64, u64)> {
    let c = fk.eval(x, y) / step;
    let (xr, yr) = (x % p, y % p);
    let a = fx.eval(xr, yr);
    let b = fy.eval(xr, yr);
    let mut out = Vec::with_capacity(p as usize);
    if b != 0 {
        let binv = inv_mod_prime(b, p);
        for dx in 0..p {
            let rhs = add_mod(c, mul_mod(a, dx, p), p);
            let dy = mul_mod(p - rhs, binv, p) % p;
            out.push((x + dx * step, y + dy * step));
        }
    } else if a != 0 {
        let ainv = inv_mod_prime(a, p);
        for dy in 0..p {
            let rhs = add_mod(c, mul_mod(b, dy, p), p);
            let dx = mul_mod(p - rhs, ainv, p) % p;
            out.push((x + dx * step, y + dy * step));
        }
    } else {
        for dx in 0..p {
            for dy in 0..p {
                let (nx, ny) = (x + dx * step, y + dy * step);
                if fk.eval(nx, ny) == 0 {
                    out.push((nx, ny));
                }
            }
        }
    }
    debug_assert!(out.iter().all(|&(u, v)| fk.eval(u, v) == 0));
    out
}

/// Common solutions of several polynomials mod `p^m`, by exhaustive digit
/// extension at every level. Fails once a frontier exceeds `cap` points.
pub fn system_points(polys: &[BiPoly], p: u64, m: u32, cap: usize) -> Result<Vec<(u64, u64)>> {
    check_args(p, m)?;
    let f1: Vec<ModPoly> = polys.iter().map(|f| f.to_mod(p)).collect();
    let base: Vec<(u64, u64)> = (0..p)
        .flat_map(|x| (0..p).map(move |y| (x, y)))
        .filter(|&(x, y)| f1.iter().all(|f| f.eval(x, y) == 0))
        .collect();
    extend_system(&base, polys, p, 1, m, cap)
}

/// Extends solutions of a system from level `from` to level `to`.
pub fn extend_system(
    points: &[(u64, u64)],
    polys: &[BiPoly],
    p: u64,
    from: u32,
    to: u32,
    cap: usize,
) -> Result<Vec<(u64, u64)>> {
    check_args(p, to.max(1))?;
    let mut frontier = points.to_vec();
    let mut step = p.pow(from);
    for _ in from..to {
        if frontier.is_empty() {
            break;
        }
        let next = step * p;
        let fk: Vec<ModPoly> = polys.iter().map(|f| f.to_mod(next)).collect();
        let mut out: Vec<(u64, u64)> = frontier
            .par_iter()
            .flat_map_iter(|&(x, y)| {
                let fk = &fk;
                (0..p)
                    .flat_map(move |dx| (0..p).map(move |dy| (x + dx * step, y + dy * step)))
                    .filter(move |&(u, v)| fk.iter().all(|f| f.eval(u, v) == 0))
            })
            .collect();
        if out.len() > cap {
            return Err(Error::Budget {
                what: "system solution frontier",
                needed: out.len() as u128,
                limit: cap as u128,
            });
        }
        out.par_sort_unstable();
        frontier = out;
        step = next;
    }
    Ok(frontier)
}

fn inv_mod_prime(a: u64, p: u64) -> u64 {
    let e = (a as i128).extended_gcd(&(p as i128));
    e.x.mod_floor(&(p as i128)) as u64
}

/// A rational number `numerator / denominator` in lowest terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Ratio {
    pub numerator: u64,
    pub denominator: u64,
}

impl Ratio {
    pub fn new(numerator: u64, denominator: u64) -> Self {
        let g = numerator.gcd(&denominator).max(1);
        Self {
            numerator: numerator / g,
            denominator: denominator / g,
        }
    }

    pub fn to_f64(self) -> f64 {
        self.numerator as f64 / self.denominator as f64
    }
}

/// Point-count growth over a range of levels.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountReport {
    pub p: u64,
    pub levels: Vec<u32>,
    pub counts: Vec<u64>,
    /// `counts[k+1] / counts[k]`, `None` where `counts[k] = 0`.
    pub ratios: Vec<Option<f64>>,
    /// `Card(Y_m) / p^m` at the largest level.
    pub density_alpha: Ratio,
    /// Smallest level from which every later ratio in range equals `p` exactly.
    pub stable_from: Option<u32>,
}

impl CountReport {
    pub fn stabilized(&self) -> bool {
        self.stable_from.is_some()
    }

    pub fn count_at(&self, m: u32) -> Option<u64> {
        self.levels.iter().position(|&l| l == m).map(|k| self.counts[k])
    }
}

/// Counts `Card(Y_m)` for `m` in `m_lo..=m_hi` and detects when growth settles at `p`.
pub fn count_report(f: &BiPoly, p: u64, m_lo: u32, m_hi: u32) -> Result<CountReport> {
    if m_lo == 0 || m_lo > m_hi {
        return Err(Error::Domain(format!("empty level range {m_lo}..{m_hi}")));
    }
    let all = lift_levels(f, p, m_hi)?;
    let levels: Vec<u32> = (m_lo..=m_hi).collect();
    let counts: Vec<u64> = levels
        .iter()
        .map(|&m| all[m as usize - 1].len() as u64)
        .collect();
    let ratios: Vec<Option<f64>> = counts
        .windows(2)
        .map(|w| (w[0] > 0).then(|| w[1] as f64 / w[0] as f64))
        .collect();
    let grows_by_p = |k: usize| counts[k] > 0 && counts[k + 1] == p * counts[k];
    let mut stable_from = None;
    for k in (0..counts.len().saturating_sub(1)).rev() {
        if grows_by_p(k) {
            stable_from = Some(levels[k]);
        } else {
            break;
        }
    }
    let density_alpha = Ratio::new(*counts.last().expect("nonempty"), p.pow(m_hi));
    Ok(CountReport {
        p,
        levels,
        counts,
        ratios,
        density_alpha,
        stable_from,
    })
}
