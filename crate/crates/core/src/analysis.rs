//! Decay invariants of `S_m` along a curve and the empirical bound check.
//!
//! * `L(f,P)`: the smaller valuation of the two partials at `P`.
//! * `μ` at `P`: order of vanishing of `g - g(P)` along the branch through `P`.
//! * `σ_f(g)`: the largest `μ` over the `Z_p` points of the curve, found by
//!   lifting the critical system `f = 0`, `f_x·g_y - f_y·g_x = 0`.
//! * the decay fit of `log_p |S_m|` against `m`, compared to `1 - 1/σ`.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Zero;
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::enumerate::{extend_system, lift_points, system_points};
use crate::error::{Error, Result};
use crate::expsum::{bound_scale, SumRecord};
use crate::hensel::{
    hensel_param, partial_valuations, refine_point, rescale_srp, CurvePoint, Orientation,
};
use crate::padic::{mod_inverse, pow_p, valuation_int, Valuation};
use crate::poly::BiPoly;
use crate::round_sig;
use crate::series::{OrdT, TruncSeries};

/// `L(f,P)`, or a lower bound when both partials vanish to the point's precision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum NeronL {
    Value(u32),
    AtLeast(u32),
}

impl Serialize for NeronL {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            NeronL::Value(v) => s.serialize_u32(*v),
            NeronL::AtLeast(v) => s.serialize_str(&format!(">={v}")),
        }
    }
}

pub fn neron_l(f: &BiPoly, point: &CurvePoint) -> NeronL {
    let (vx, vy) = partial_valuations(f, point);
    match vx.min(vy) {
        Valuation::Finite(v) => NeronL::Value(v as u32),
        Valuation::Infinite => NeronL::AtLeast(point.level()),
    }
}

/// Depth-stamped lower bound for `c(f) = sup_P L(f,P)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NeronBound {
    pub lower_bound: u32,
    pub depth: u32,
    pub witness: Option<(u64, u64)>,
    pub points_examined: usize,
}

/// Max of `L(f,P)` over the points mod `p^depth` that lift to level `2·depth`.
pub fn c_of_f(f: &BiPoly, p: u64, depth: u32) -> Result<NeronBound> {
    if depth == 0 {
        return Err(Error::Domain("depth must be >= 1".into()));
    }
    let pts = lift_points(f, p, 2 * depth)?.project(depth)?;
    let ls: Vec<(NeronL, (u64, u64))> = pts
        .points()
        .par_iter()
        .map(|&(x, y)| {
            let cp = CurvePoint::certify(f, x, y, p, depth);
            (neron_l(f, &cp), (x, y))
        })
        .collect();
    if ls.iter().any(|(l, _)| matches!(l, NeronL::AtLeast(_))) {
        return Err(Error::DepthExhausted { depth });
    }
    let best = ls.iter().max_by_key(|(l, pt)| (*l, std::cmp::Reverse(*pt)));
    Ok(NeronBound {
        lower_bound: match best {
            Some((NeronL::Value(v), _)) => *v,
            _ => 0,
        },
        depth,
        witness: best.map(|(_, pt)| *pt),
        points_examined: ls.len(),
    })
}

/// Precision controls for [`mu_at_point`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MuOptions {
    /// Initial `t`-order; defaults to `2·deg f·deg g + 4`.
    pub order: Option<usize>,
    /// Initial p-adic precision.
    pub precision: u32,
    pub max_order: usize,
    pub max_precision: u32,
}

impl Default for MuOptions {
    fn default() -> Self {
        Self {
            order: None,
            precision: 24,
            max_order: 512,
            max_precision: 128,
        }
    }
}

/// `μ` at a point and the valuation of the leading coefficient.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MuValue {
    pub mu: u32,
    /// Valuation of the leading coefficient of `g - g(P)` along the branch,
    /// normalized by `p^(D(e+1))` in a rescaled chart.
    pub v_c0: u32,
    /// `e = L(f,P)`; nonzero means the branch was taken in the chart
    /// `(x, y) = P + p^(e+1)(x', y')`.
    pub chart_scale: u32,
    pub orientation: Orientation,
    pub order: usize,
    pub precision: u32,
}

/// `g - g(P)` along the branch through `P`, in the chart where the branch is smooth mod `p`.
///
/// Returns the series, the chart scale `e`, the chart-normalization shift
/// `D(e+1)` and the branch orientation.
pub fn branch_expansion(
    f: &BiPoly,
    g: &BiPoly,
    point: &CurvePoint,
    order: usize,
    precision: u32,
) -> Result<(TruncSeries, u32, u32, Orientation)> {
    let e = match neron_l(f, point) {
        NeronL::Value(e) => e,
        NeronL::AtLeast(_) => return Err(Error::NonUnitDerivative(Valuation::Infinite)),
    };
    let (series, shift, orientation) = if e == 0 {
        let branch = hensel_param(f, point, order, precision)?;
        let (x, y) = branch.coordinate_series();
        (g.eval_series(&x, &y)?, 0, branch.orientation)
    } else {
        if point.level() <= 2 * e {
            return Err(Error::Precision(format!(
                "point certified to level {} cannot be refined with L = {e}; need level > {}",
                point.level(),
                2 * e
            )));
        }
        let p = point.p();
        let anchor = refine_point(f, point, precision + 2 * e + 2)?;
        let f_star = rescale_srp(f, &anchor, e)?;
        let origin = CurvePoint::certify(&f_star, 0, 0, p, precision);
        let branch = hensel_param(&f_star, &origin, order, precision)?;
        let (x0, y0) = anchor.coords();
        let moved = g.translate(&x0, &y0);
        let g_star = moved.scale_vars(&pow_p(p, e + 1));
        let (x, y) = branch.coordinate_series();
        let d = moved.order().unwrap_or(0);
        (g_star.eval_series(&x, &y)?, d * (e + 1), branch.orientation)
    };
    let mut c = series.coeffs().to_vec();
    c[0] = BigInt::zero();
    let s = TruncSeries::new(c, series.p(), series.precision(), series.order_cap());
    Ok((s, e, shift, orientation))
}

/// `μ(f,g)` at `P` with automatic precision escalation.
pub fn mu_at_point(f: &BiPoly, g: &BiPoly, point: &CurvePoint) -> Result<MuValue> {
    mu_at_point_with(f, g, point, MuOptions::default())
}

pub fn mu_at_point_with(
    f: &BiPoly,
    g: &BiPoly,
    point: &CurvePoint,
    opts: MuOptions,
) -> Result<MuValue> {
    let default_order = (2 * f.total_degree() * g.total_degree() + 4) as usize;
    let mut order = opts.order.unwrap_or(default_order).clamp(2, opts.max_order);
    let mut precision = opts.precision.max(2);
    let mut trace = Vec::new();
    loop {
        trace.push((order, precision));
        let (s, e, shift, orientation) = branch_expansion(f, g, point, order, precision)?;
        match s.ord_t() {
            OrdT::Found {
                order: mu,
                valuation,
                confident: true,
            } => {
                return Ok(MuValue {
                    mu: mu as u32,
                    v_c0: valuation.saturating_sub(shift),
                    chart_scale: e,
                    orientation,
                    order,
                    precision,
                })
            }
            OrdT::Found { .. } => {
                if precision * 2 > opts.max_precision {
                    return Err(Error::Inconclusive(trace));
                }
                precision *= 2;
            }
            OrdT::Inconclusive => {
                if order < opts.max_order {
                    order = (order * 2).min(opts.max_order);
                } else if precision * 2 <= opts.max_precision {
                    precision *= 2;
                } else {
                    return Err(Error::Inconclusive(trace));
                }
            }
        }
    }
}

/// `f_x·g_y - f_y·g_x`, vanishing where `g|_{f=0}` ramifies.
pub fn critical_jacobian(f: &BiPoly, g: &BiPoly) -> BiPoly {
    &(&f.partial_x() * &g.partial_y()) - &(&f.partial_y() * &g.partial_x())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Confidence {
    Certified,
    Heuristic,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub point: CurvePoint,
    pub mu: u32,
    pub v_c0: u32,
    pub chart_scale: u32,
    /// True for critical points, false for the generic `μ = 1` witness.
    pub critical: bool,
}

/// `σ_f(g)` with the points that realize it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SigmaCertificate {
    pub sigma: u32,
    pub witnesses: Vec<Witness>,
    pub search_depth: u32,
    pub confidence: Confidence,
    /// Solutions of the critical system mod `p^depth`.
    pub candidates: usize,
    /// Balls of radius `p^-ceil(depth/2)` the candidates fall into.
    pub clusters: usize,
    /// Clusters neither certified nor refuted.
    pub unresolved: usize,
    pub notes: Vec<String>,
}

impl SigmaCertificate {
    pub fn beta(&self) -> f64 {
        1.0 / self.sigma as f64
    }
}

/// Search controls for [`sigma_fg`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SigmaOptions {
    pub depth: u32,
    /// Precision to which critical points are certified.
    pub certify_precision: u32,
    /// Cap on any critical-system frontier.
    pub frontier_cap: usize,
    pub mu: MuOptions,
}

pub const DEFAULT_DEPTH: u32 = 6;

impl Default for SigmaOptions {
    fn default() -> Self {
        Self {
            depth: DEFAULT_DEPTH,
            certify_precision: 300,
            frontier_cap: 2_000_000,
            mu: MuOptions::default(),
        }
    }
}

pub fn sigma_fg(f: &BiPoly, g: &BiPoly, p: u64, depth: u32) -> Result<SigmaCertificate> {
    sigma_fg_with(
        f,
        g,
        p,
        SigmaOptions {
            depth,
            ..SigmaOptions::default()
        },
    )
}

pub fn sigma_fg_with(f: &BiPoly, g: &BiPoly, p: u64, opts: SigmaOptions) -> Result<SigmaCertificate> {
    let k = opts.depth;
    if k == 0 {
        return Err(Error::Domain("search depth must be >= 1".into()));
    }
    let jac = critical_jacobian(f, g);
    if jac.is_zero() {
        return Err(Error::ConstantOnCurve);
    }
    let curve = lift_points(f, p, k)?;
    let system = [f.clone(), jac.clone()];
    let candidates = system_points(&system, p, k, opts.frontier_cap)?;
    if !curve.is_empty() && candidates.len() == curve.len() {
        return Err(Error::ConstantOnCurve);
    }

    let radius = p.pow(k.div_ceil(2));
    let mut clusters: BTreeMap<(u64, u64), Vec<(u64, u64)>> = BTreeMap::new();
    for &(x, y) in &candidates {
        clusters.entry((x % radius, y % radius)).or_default().push((x, y));
    }

    enum Outcome {
        Certified(Vec<CurvePoint>),
        Refuted,
        Unresolved,
    }
    let outcomes: Vec<Outcome> = clusters
        .values()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|members| {
            let found: Vec<CurvePoint> = members
                .iter()
                .filter_map(|&(x, y)| certify_critical(f, &jac, x, y, p, k, opts.certify_precision))
                .collect();
            if !found.is_empty() {
                return Outcome::Certified(found);
            }
            match extend_system(members, &system, p, k, 2 * k, opts.frontier_cap) {
                Ok(rest) if rest.is_empty() => Outcome::Refuted,
                _ => Outcome::Unresolved,
            }
        })
        .collect();

    let modk = pow_p(p, k);
    let mut roots: BTreeMap<(BigInt, BigInt), CurvePoint> = BTreeMap::new();
    let mut unresolved = 0;
    for o in outcomes {
        match o {
            Outcome::Certified(pts) => {
                for cp in pts {
                    let key = (cp.x().value().mod_floor(&modk), cp.y().value().mod_floor(&modk));
                    roots.entry(key).or_insert(cp);
                }
            }
            Outcome::Refuted => {}
            Outcome::Unresolved => unresolved += 1,
        }
    }

    let mut witnesses: Vec<Witness> = roots
        .into_values()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|cp| {
            mu_at_point_with(f, g, cp, opts.mu).map(|mv| Witness {
                point: cp.clone(),
                mu: mv.mu,
                v_c0: mv.v_c0,
                chart_scale: mv.chart_scale,
                critical: true,
            })
        })
        .collect::<Result<_>>()?;

    let mut notes = Vec::new();
    if witnesses.is_empty() {
        let generic = curve
            .points()
            .iter()
            .copied()
            .filter(|&(x, y)| candidates.binary_search(&(x, y)).is_err())
            .find_map(|(x, y)| {
                let cp = CurvePoint::certify(f, x, y, p, k);
                let mv = mu_at_point_with(f, g, &cp, opts.mu).ok()?;
                Some(Witness {
                    point: cp,
                    mu: mv.mu,
                    v_c0: mv.v_c0,
                    chart_scale: mv.chart_scale,
                    critical: false,
                })
            });
        match generic {
            Some(w) => witnesses.push(w),
            None if curve.is_empty() => notes.push(format!("no points mod {p}^{k}")),
            None => notes.push("no generic witness could be parametrized".into()),
        }
    }

    let sigma = witnesses.iter().map(|w| w.mu).max().unwrap_or(1).max(1);
    Ok(SigmaCertificate {
        sigma,
        witnesses,
        search_depth: k,
        confidence: if unresolved == 0 {
            Confidence::Certified
        } else {
            Confidence::Heuristic
        },
        candidates: candidates.len(),
        clusters: clusters.len(),
        unresolved,
        notes,
    })
}

/// Certifies a mod-`p^k` solution of `{f, J}` as a `Z_p` point: either the
/// symmetric representative is an exact integer root, or two-variable
/// Newton converges from it.
fn certify_critical(
    f: &BiPoly,
    jac: &BiPoly,
    x: u64,
    y: u64,
    p: u64,
    k: u32,
    precision: u32,
) -> Option<CurvePoint> {
    let m = pow_p(p, k);
    let sym = |v: u64| {
        let v = BigInt::from(v);
        if &v * 2 > m {
            v - &m
        } else {
            v
        }
    };
    let (xs, ys) = (sym(x), sym(y));
    if f.eval_int(&xs, &ys).is_zero() && jac.eval_int(&xs, &ys).is_zero() {
        return Some(CurvePoint::certify(f, xs, ys, p, precision));
    }
    let (xr, yr) = newton_2d(f, jac, xs, ys, p, precision)?;
    Some(CurvePoint::certify(f, xr, yr, p, precision))
}

/// Two-variable Newton for `F = (f1, f2) = 0`, valid when `v(F) > 2·v(det DF)`.
pub fn newton_2d(
    f1: &BiPoly,
    f2: &BiPoly,
    mut x: BigInt,
    mut y: BigInt,
    p: u64,
    target: u32,
) -> Option<(BigInt, BigInt)> {
    let (f1x, f1y, f2x, f2y) = (f1.partial_x(), f1.partial_y(), f2.partial_x(), f2.partial_y());
    let mut last = Valuation::Finite(-1);
    for _ in 0..64 {
        let a = f1.eval_int(&x, &y);
        let b = f2.eval_int(&x, &y);
        let v = valuation_int(&a, p).min(valuation_int(&b, p));
        if v >= Valuation::Finite(target as i64) {
            return Some((x, y));
        }
        if v <= last {
            return None;
        }
        last = v;
        let (j11, j12) = (f1x.eval_int(&x, &y), f1y.eval_int(&x, &y));
        let (j21, j22) = (f2x.eval_int(&x, &y), f2y.eval_int(&x, &y));
        let det = &j11 * &j22 - &j12 * &j21;
        let d = valuation_int(&det, p).finite()? as u32;
        if v <= Valuation::Finite(2 * d as i64) {
            return None;
        }
        let work = pow_p(p, target + 2 * d + 4);
        let pd = pow_p(p, d);
        let unit_inv = mod_inverse(&(&det / &pd), &work)?;
        let nx = &j22 * &a - &j12 * &b;
        let ny = &j11 * &b - &j21 * &a;
        if !(&nx % &pd).is_zero() || !(&ny % &pd).is_zero() {
            return None;
        }
        x = (x - (nx / &pd) * &unit_inv).mod_floor(&work);
        y = (y - (ny / &pd) * &unit_inv).mod_floor(&work);
    }
    None
}

/// `σ` for `Σ_x Ψ(z·f(x))`, computed on the curve `y = f(x)` with `g = y`.
pub fn sigma_onevar(f_one: &BiPoly, p: u64, depth: u32) -> Result<SigmaCertificate> {
    if !f_one.is_univariate_x() {
        return Err(Error::Domain("expected a polynomial in x only".into()));
    }
    if f_one.is_constant() {
        return Err(Error::ConstantOnCurve);
    }
    let curve = &BiPoly::y() - f_one;
    let mut cert = sigma_fg(&curve, &BiPoly::y(), p, depth)?;
    let found: u32 = cert
        .witnesses
        .iter()
        .filter(|w| w.critical)
        .map(|w| w.mu - 1)
        .sum();
    let deg = f_one.degree_x() - 1;
    if deg > found {
        cert.notes.push(format!(
            "f' has degree {deg} but only {found} critical roots (with multiplicity) were found in Z_p"
        ));
    }
    Ok(cert)
}

/// `⌊(m - v(c_0)) / μ⌋ + 1`: the smallest ball level at which the local sum has constant phase.
pub fn constant_phase_level(m: u32, mu: u32, v_c0: u32) -> u32 {
    (m.saturating_sub(v_c0)) / mu.max(1) + 1
}

/// `m(1 - 1/μ) + v(c_0)/μ`: exponent of `p` in the local bound on one ball.
pub fn local_bound_exponent(m: u32, mu: u32, v_c0: u32) -> f64 {
    let mu = mu.max(1) as f64;
    m as f64 * (1.0 - 1.0 / mu) + v_c0 as f64 / mu
}

/// Magnitudes below this are treated as exactly zero.
pub const ZERO_MAGNITUDE: f64 = 1e-7;

/// Default slack on the fitted slope, in exponent units.
pub const DEFAULT_SLOPE_TOLERANCE: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

/// Regression of `log_p |S_m|` on `m` against the predicted exponent `1 - 1/σ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayReport {
    pub records: Vec<SumRecord>,
    pub sigma: u32,
    #[serde(serialize_with = "round_sig::serialize")]
    pub beta: f64,
    #[serde(serialize_with = "round_sig::serialize")]
    pub predicted_exponent: f64,
    #[serde(serialize_with = "round_sig::serialize_opt")]
    pub fitted_slope: Option<f64>,
    #[serde(serialize_with = "round_sig::serialize")]
    pub a_estimate: f64,
    #[serde(serialize_with = "round_sig::serialize")]
    pub tolerance: f64,
    /// Levels whose sum vanished and were left out of the fit.
    pub zero_levels: Vec<u32>,
    pub trivially_zero: bool,
    pub verdict: Verdict,
}

impl DecayReport {
    /// `m,log_p|S_m|` for every nonzero record.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("m,log_p_magnitude\n");
        for r in self.records.iter().filter(|r| r.magnitude >= ZERO_MAGNITUDE) {
            out.push_str(&format!(
                "{},{}\n",
                r.m,
                round_sig::fmt(r.magnitude.ln() / (r.p as f64).ln())
            ));
        }
        out
    }

    /// `|S_m| <= A·p^(m(1-1/σ))` for every record.
    pub fn bound_holds(&self) -> bool {
        self.records.iter().all(|r| {
            r.magnitude <= self.a_estimate * bound_scale(r.p, r.m, self.sigma) * (1.0 + 1e-12) + 1e-12
        })
    }
}

pub fn decay_fit(records: &[SumRecord], sigma: u32, tolerance: f64) -> Result<DecayReport> {
    if records.is_empty() {
        return Err(Error::Domain("no records to fit".into()));
    }
    let sigma = sigma.max(1);
    let predicted = 1.0 - 1.0 / sigma as f64;
    let records: Vec<SumRecord> = records.iter().cloned().map(|r| r.with_sigma(sigma)).collect();
    let (nonzero, zero): (Vec<&SumRecord>, Vec<&SumRecord>) =
        records.iter().partition(|r| r.magnitude >= ZERO_MAGNITUDE);
    let zero_levels: Vec<u32> = zero.iter().map(|r| r.m).collect();
    let base = DecayReport {
        records: records.clone(),
        sigma,
        beta: 1.0 / sigma as f64,
        predicted_exponent: predicted,
        fitted_slope: None,
        a_estimate: 0.0,
        tolerance,
        zero_levels,
        trivially_zero: nonzero.is_empty(),
        verdict: Verdict::Pass,
    };
    if nonzero.is_empty() {
        return Ok(base);
    }
    if nonzero.len() < 2 {
        return Err(Error::Domain(format!(
            "decay fit needs at least 2 nonzero sums, got {}",
            nonzero.len()
        )));
    }
    let pts: Vec<(f64, f64)> = nonzero
        .iter()
        .map(|r| (r.m as f64, r.magnitude.ln() / (r.p as f64).ln()))
        .collect();
    let slope = least_squares_slope(&pts);
    let a_estimate = records
        .iter()
        .filter_map(|r| r.normalized)
        .fold(0.0f64, f64::max);
    let pass = slope <= predicted + tolerance && a_estimate.is_finite();
    Ok(DecayReport {
        fitted_slope: Some(slope),
        a_estimate,
        verdict: if pass { Verdict::Pass } else { Verdict::Fail },
        ..base
    })
}

fn least_squares_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}
