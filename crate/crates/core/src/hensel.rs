//! Curve points, point refinement, and Newton parametrization of a smooth
//! branch `f(x_P + t, y_P + h(t)) = 0`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::padic::{mod_inverse, pow_p, valuation_int, Residue, Valuation};
use crate::poly::BiPoly;
use crate::series::TruncSeries;

/// A point with `f(x, y) ≡ 0 mod p^level`; coordinates are held at `precision >= level`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CurvePoint {
    x: Residue,
    y: Residue,
    level: u32,
}

impl CurvePoint {
    /// Certifies `(x, y)` against `f`, failing if `f(x, y) ≢ 0 mod p^level`.
    pub fn new(
        f: &BiPoly,
        x: impl Into<BigInt>,
        y: impl Into<BigInt>,
        p: u64,
        level: u32,
    ) -> Result<Self> {
        let (x, y) = (Residue::new(x, p, level), Residue::new(y, p, level));
        let v = valuation_int(&f.eval_int(x.value(), y.value()), p);
        if v < Valuation::Finite(level as i64) {
            return Err(Error::NotOnCurve(v));
        }
        Ok(Self { x, y, level })
    }

    /// The largest level (capped at `precision`) at which `(x, y)` lies on `f`.
    pub fn certify(
        f: &BiPoly,
        x: impl Into<BigInt>,
        y: impl Into<BigInt>,
        p: u64,
        precision: u32,
    ) -> Self {
        let (x, y) = (Residue::new(x, p, precision), Residue::new(y, p, precision));
        let level = match valuation_int(&f.eval_int(x.value(), y.value()), p) {
            Valuation::Finite(v) => (v as u32).min(precision),
            Valuation::Infinite => precision,
        };
        Self { x, y, level }
    }

    pub fn x(&self) -> &Residue {
        &self.x
    }

    pub fn y(&self) -> &Residue {
        &self.y
    }

    pub fn p(&self) -> u64 {
        self.x.p()
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn coords(&self) -> (BigInt, BigInt) {
        (self.x.value().clone(), self.y.value().clone())
    }
}

impl Serialize for CurvePoint {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("CurvePoint", 3)?;
        st.serialize_field("x", &self.x.value().to_string())?;
        st.serialize_field("y", &self.y.value().to_string())?;
        st.serialize_field("level", &self.level)?;
        st.end()
    }
}

/// Which coordinate the branch solves for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    /// `(x_P + t, y_P + h(t))`
    SolveY,
    /// `(x_P + h(t), y_P + t)`
    SolveX,
}

/// Step schedule for the Newton iteration on series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NewtonSchedule {
    /// Doubles the certified `t`-order every step.
    #[default]
    Doubling,
    /// Gains one `t`-order per step.
    Linear,
}

/// Valuations of `(∂f/∂x, ∂f/∂y)` at `P`, capped at the point's level.
pub fn partial_valuations(f: &BiPoly, point: &CurvePoint) -> (Valuation, Valuation) {
    let (x, y) = point.coords();
    let p = point.p();
    let vx = valuation_int(&f.partial_x().eval_int(&x, &y), p).capped(point.level);
    let vy = valuation_int(&f.partial_y().eval_int(&x, &y), p).capped(point.level);
    (vx, vy)
}

/// Picks the coordinate to solve for: the one with the smaller partial valuation, ties to `y`.
pub fn choose_orientation(vx: Valuation, vy: Valuation) -> Orientation {
    if vy <= vx {
        Orientation::SolveY
    } else {
        Orientation::SolveX
    }
}

/// Newton-refines `P` along one coordinate until `f(P) ≡ 0 mod p^target`.
///
/// With `e` the valuation of the partial in the moving coordinate, this
/// needs `v(f(P)) > 2e` and converges to the unique nearby `Z_p` point.
pub fn refine_point(f: &BiPoly, point: &CurvePoint, target: u32) -> Result<CurvePoint> {
    let p = point.p();
    let (vx, vy) = partial_valuations(f, point);
    let orientation = choose_orientation(vx, vy);
    let e = match vx.min(vy) {
        Valuation::Finite(e) => e as u32,
        Valuation::Infinite => return Err(Error::NonUnitDerivative(Valuation::Infinite)),
    };
    let (g, mut fixed, mut moving) = match orientation {
        Orientation::SolveY => (f.clone(), point.x.value().clone(), point.y.value().clone()),
        Orientation::SolveX => (f.transpose(), point.y.value().clone(), point.x.value().clone()),
    };
    let dg = g.partial_y();
    let work = target + 2 * e + 2;
    let wmod = pow_p(p, work);
    let pe = pow_p(p, e);
    fixed = fixed.mod_floor(&wmod);
    for _ in 0..128 {
        let value = g.eval_int(&fixed, &moving);
        let v = valuation_int(&value, p);
        if v >= Valuation::Finite(target as i64) {
            let (x, y) = match orientation {
                Orientation::SolveY => (fixed, moving),
                Orientation::SolveX => (moving, fixed),
            };
            return Ok(CurvePoint {
                x: Residue::new(x, p, target),
                y: Residue::new(y, p, target),
                level: target,
            });
        }
        if v <= Valuation::Finite(2 * e as i64) {
            return Err(Error::NotOnCurve(v));
        }
        let d = dg.eval_int(&fixed, &moving);
        if valuation_int(&d, p) != Valuation::Finite(e as i64) {
            return Err(Error::Internal("derivative valuation changed during refinement".into()));
        }
        let unit = mod_inverse(&(d / &pe), &wmod).expect("unit");
        let step = (value / &pe) * unit;
        moving = (moving - step).mod_floor(&wmod);
    }
    Err(Error::Internal("point refinement did not converge".into()))
}

/// A parametrized smooth branch through `anchor`.
#[derive(Debug, Clone)]
pub struct Branch {
    pub anchor: CurvePoint,
    pub series: TruncSeries,
    pub orientation: Orientation,
}

impl Branch {
    /// `(X(t), Y(t))` as series.
    pub fn coordinate_series(&self) -> (TruncSeries, TruncSeries) {
        let t = self.series.variable();
        let (x0, y0) = self.anchor.coords();
        match self.orientation {
            Orientation::SolveY => (
                t.add(&t.constant(x0)).expect("same shape"),
                self.series.add(&t.constant(y0)).expect("same shape"),
            ),
            Orientation::SolveX => (
                self.series.add(&t.constant(x0)).expect("same shape"),
                t.add(&t.constant(y0)).expect("same shape"),
            ),
        }
    }

    /// The branch point at parameter `t`, reduced mod `modulus`.
    pub fn point_at(&self, t: &BigInt, modulus: &BigInt) -> (BigInt, BigInt) {
        let h = self.series.eval_mod(t, modulus);
        let (x0, y0) = self.anchor.coords();
        match self.orientation {
            Orientation::SolveY => ((x0 + t).mod_floor(modulus), (y0 + h).mod_floor(modulus)),
            Orientation::SolveX => ((x0 + h).mod_floor(modulus), (y0 + t).mod_floor(modulus)),
        }
    }

    /// `f` along the branch, which should vanish identically.
    pub fn residual(&self, f: &BiPoly) -> Result<TruncSeries> {
        let (x, y) = self.coordinate_series();
        f.eval_series(&x, &y)
    }
}

/// Solves `f = 0` near `P` as a power series to order `order` at p-adic precision `precision`.
pub fn hensel_param(
    f: &BiPoly,
    point: &CurvePoint,
    order: usize,
    precision: u32,
) -> Result<Branch> {
    hensel_param_with(f, point, order, precision, NewtonSchedule::Doubling)
}

pub fn hensel_param_with(
    f: &BiPoly,
    point: &CurvePoint,
    order: usize,
    precision: u32,
    schedule: NewtonSchedule,
) -> Result<Branch> {
    if point.level == 0 {
        return Err(Error::NotOnCurve(Valuation::Finite(0)));
    }
    if order == 0 || precision == 0 {
        return Err(Error::Domain("order and precision must be positive".into()));
    }
    let p = point.p();
    let (vx, vy) = partial_valuations(f, point);
    let orientation = choose_orientation(vx, vy);
    if vx.min(vy) != Valuation::Finite(0) {
        return Err(Error::NonUnitDerivative(vx.min(vy)));
    }
    let anchor = refine_point(f, point, precision)?;
    let (x0, y0) = anchor.coords();
    let modulus = pow_p(p, precision);
    let translated = f.translate(&x0, &y0);
    let local = match orientation {
        Orientation::SolveY => translated,
        Orientation::SolveX => translated.transpose(),
    }
    .reduce_mod(&modulus);
    let d_local = local.partial_y();

    let t = TruncSeries::new([0, 1], p, precision, order);
    let b = local.coeff(0, 1);
    let binv = mod_inverse(&b, &modulus).ok_or(Error::NonUnitDerivative(valuation_int(&b, p)))?;
    let slope = -(local.coeff(1, 0) * binv);
    let mut h = TruncSeries::new([BigInt::zero(), slope], p, precision, order);
    let mut known = 1usize;
    let mut steps = 0usize;
    while known < order {
        let next = match schedule {
            NewtonSchedule::Doubling => (2 * known + 1).min(order),
            NewtonSchedule::Linear => known + 1,
        };
        let value = local.eval_series(&t, &h)?;
        let deriv = d_local.eval_series(&t, &h)?;
        let correction = value.mul(&deriv.inverse()?)?;
        h = h.sub(&correction)?.truncate(next);
        known = next;
        steps += 1;
        if steps > 4 * order + 8 {
            return Err(Error::Internal("Newton iteration did not converge".into()));
        }
    }

    let residual = local.eval_series(&t, &h)?;
    if !residual.is_zero() {
        return Err(Error::Internal(format!(
            "Hensel residual is nonzero: {residual}"
        )));
    }
    Ok(Branch {
        anchor,
        series: h,
        orientation,
    })
}

/// `p^-(2e+1) · f(P + p^(e+1)·(x', y'))`, the chart in which `L = 0`.
pub fn rescale_srp(f: &BiPoly, point: &CurvePoint, e: u32) -> Result<BiPoly> {
    if e == 0 {
        return Err(Error::Domain(
            "rescaling needs L(f,P) >= 1; L(f,P) = 0 already has a unit partial".into(),
        ));
    }
    let p = point.p();
    let (x0, y0) = point.coords();
    let scaled = f.translate(&x0, &y0).scale_vars(&pow_p(p, e + 1));
    let f_star = scaled
        .div_exact(&pow_p(p, 2 * e + 1))
        .ok_or_else(|| Error::InexactRescale {
            e,
            detail: "a coefficient is not divisible by p^(2e+1)".into(),
        })?;
    let unit_partial = [f_star.coeff(1, 0), f_star.coeff(0, 1)]
        .iter()
        .any(|c| !(c % BigInt::from(p)).is_zero());
    if !unit_partial {
        return Err(Error::InexactRescale {
            e,
            detail: "rescaled chart has no unit linear coefficient (e != L(f,P))".into(),
        });
    }
    Ok(f_star)
}

/// SRP test on a polynomial: zero constant term and `v_p(c_ij) >= i + j - 1`.
pub fn is_srp_poly(f: &BiPoly, p: u64) -> bool {
    f.coeff(0, 0).is_zero()
        && f.terms().all(|(&(i, j), c)| {
            valuation_int(c, p) >= Valuation::Finite((i + j) as i64 - 1)
        })
}
