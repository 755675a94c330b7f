//! Exact arithmetic in `Z/p^N`, p-adic valuations, and the standard additive
//! character of `Q_p`.
//!
//! Residues carry arbitrary-precision canonical representatives in
//! `[0, p^N)`, so moduli far beyond machine words stay exact.

use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Deterministic trial-division primality test.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// `p^n` as a big integer.
pub fn pow_p(p: u64, n: u32) -> BigInt {
    num_traits::pow(BigInt::from(p), n as usize)
}

/// `p^n` as a `u64`, or `None` on overflow.
pub fn pow_p_u64(p: u64, n: u32) -> Option<u64> {
    p.checked_pow(n)
}

/// A p-adic valuation: an integer or `+∞`.
///
/// Variant order makes `Infinite` compare greater than every finite value,
/// so `min`/`max` behave as on the extended integers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Valuation {
    Finite(i64),
    Infinite,
}

impl Valuation {
    pub fn finite(self) -> Option<i64> {
        match self {
            Valuation::Finite(v) => Some(v),
            Valuation::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Valuation::Infinite)
    }

    /// Treats anything at or above `cap` as `+∞` (valuation of a value known mod `p^cap`).
    pub fn capped(self, cap: u32) -> Valuation {
        match self {
            Valuation::Finite(v) if v < cap as i64 => self,
            _ => Valuation::Infinite,
        }
    }
}

impl std::ops::Add for Valuation {
    type Output = Valuation;

    fn add(self, rhs: Valuation) -> Valuation {
        match (self, rhs) {
            (Valuation::Finite(a), Valuation::Finite(b)) => Valuation::Finite(a + b),
            _ => Valuation::Infinite,
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{v}"),
            Valuation::Infinite => write!(f, "inf"),
        }
    }
}

impl Serialize for Valuation {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Valuation::Finite(v) => s.serialize_i64(*v),
            Valuation::Infinite => s.serialize_str("inf"),
        }
    }
}

/// `v_p(n)` for an integer; `+∞` for zero.
pub fn valuation_int(n: &BigInt, p: u64) -> Valuation {
    if n.is_zero() {
        return Valuation::Infinite;
    }
    let p = BigInt::from(p);
    let mut v = 0i64;
    let mut rest = n.abs();
    loop {
        let (q, r) = rest.div_rem(&p);
        if !r.is_zero() {
            break;
        }
        rest = q;
        v += 1;
    }
    Valuation::Finite(v)
}

/// `v_p(numerator / denominator)`.
pub fn valuation(numerator: &BigInt, denominator: &BigInt, p: u64) -> Result<Valuation> {
    if denominator.is_zero() {
        return Err(Error::Domain("zero denominator".into()));
    }
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    Ok(match (valuation_int(numerator, p), valuation_int(denominator, p)) {
        (Valuation::Infinite, _) => Valuation::Infinite,
        (Valuation::Finite(a), Valuation::Finite(b)) => Valuation::Finite(a - b),
        (Valuation::Finite(_), Valuation::Infinite) => unreachable!("denominator is nonzero"),
    })
}

/// The prime and working precision: `K = Q_p`, `R = Z_p`, `q = p`, `π = p`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PadicContext {
    p: u64,
    precision: u32,
}

impl PadicContext {
    pub fn new(p: u64, precision: u32) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if precision == 0 {
            return Err(Error::Domain("precision must be at least 1".into()));
        }
        Ok(Self { p, precision })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn modulus(&self) -> BigInt {
        pow_p(self.p, self.precision)
    }

    pub fn residue(&self, value: impl Into<BigInt>) -> Residue {
        Residue::new(value, self.p, self.precision)
    }

    /// Decomposes a rational `num/den` as `p^val · unit`.
    pub fn decompose(&self, numerator: &BigInt, denominator: &BigInt) -> Result<PadicScalar> {
        scalar_decompose(numerator, denominator, self)
    }
}

/// An element of `Z/p^N` stored as its canonical representative.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Residue {
    value: BigInt,
    p: u64,
    precision: u32,
}

impl Residue {
    pub fn new(value: impl Into<BigInt>, p: u64, precision: u32) -> Self {
        let value = value.into().mod_floor(&pow_p(p, precision));
        Self {
            value,
            p,
            precision,
        }
    }

    pub fn zero(p: u64, precision: u32) -> Self {
        Self {
            value: BigInt::zero(),
            p,
            precision,
        }
    }

    pub fn one(p: u64, precision: u32) -> Self {
        Self::new(1, p, precision)
    }

    pub fn value(&self) -> &BigInt {
        &self.value
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn modulus(&self) -> BigInt {
        pow_p(self.p, self.precision)
    }

    pub fn is_zero(&self) -> bool {
        self.value.is_zero()
    }

    pub fn is_unit(&self) -> bool {
        !(&self.value % BigInt::from(self.p)).is_zero()
    }

    /// Valuation of the representative; `+∞` when the residue is zero (i.e. `≥ N`).
    pub fn valuation(&self) -> Valuation {
        valuation_int(&self.value, self.p)
    }

    /// Symmetric representative in `(-p^N/2, p^N/2]`.
    pub fn symmetric(&self) -> BigInt {
        let m = self.modulus();
        if &self.value * 2 > m {
            &self.value - m
        } else {
            self.value.clone()
        }
    }

    /// Reduction to a lower precision.
    pub fn reduce(&self, precision: u32) -> Result<Residue> {
        if precision > self.precision {
            return Err(Error::PrecisionMismatch(self.precision, precision));
        }
        Ok(Residue::new(self.value.clone(), self.p, precision))
    }

    fn check(&self, other: &Residue) -> Result<()> {
        if self.p != other.p {
            return Err(Error::Domain(format!(
                "residues over different primes {} and {}",
                self.p, other.p
            )));
        }
        if self.precision != other.precision {
            return Err(Error::PrecisionMismatch(self.precision, other.precision));
        }
        Ok(())
    }

    fn with_value(&self, value: BigInt) -> Residue {
        Residue::new(value, self.p, self.precision)
    }

    pub fn add(&self, other: &Residue) -> Result<Residue> {
        self.check(other)?;
        Ok(self.with_value(&self.value + &other.value))
    }

    pub fn sub(&self, other: &Residue) -> Result<Residue> {
        self.check(other)?;
        Ok(self.with_value(&self.value - &other.value))
    }

    pub fn mul(&self, other: &Residue) -> Result<Residue> {
        self.check(other)?;
        Ok(self.with_value(&self.value * &other.value))
    }

    pub fn neg(&self) -> Residue {
        self.with_value(-&self.value)
    }

    pub fn pow(&self, exp: u64) -> Residue {
        self.with_value(self.value.modpow(&BigInt::from(exp), &self.modulus()))
    }

    /// Multiplicative inverse; fails with the valuation of a non-unit.
    pub fn inv(&self) -> Result<Residue> {
        if !self.is_unit() {
            return Err(Error::NonUnit(self.valuation()));
        }
        let inv = mod_inverse(&self.value, &self.modulus())
            .ok_or_else(|| Error::Internal("unit without inverse".into()))?;
        Ok(self.with_value(inv))
    }
}

impl fmt::Display for Residue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} mod {}^{}", self.value, self.p, self.precision)
    }
}

/// Inverse of `a` modulo `m` via the extended Euclidean algorithm.
pub fn mod_inverse(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    let e = a.mod_floor(m).extended_gcd(m);
    if e.gcd.is_one() {
        Some(e.x.mod_floor(m))
    } else {
        None
    }
}

/// An element `z = p^val · unit` of `Q_p` at finite precision.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PadicScalar {
    val: Valuation,
    unit: Option<Residue>,
}

impl PadicScalar {
    pub fn zero() -> Self {
        Self {
            val: Valuation::Infinite,
            unit: None,
        }
    }

    pub fn valuation(&self) -> Valuation {
        self.val
    }

    /// The unit part; `None` exactly when the scalar is zero.
    pub fn unit(&self) -> Option<&Residue> {
        self.unit.as_ref()
    }

    /// `|z| = p^(-val)`, derived on demand.
    pub fn abs(&self, p: u64) -> f64 {
        match self.val {
            Valuation::Infinite => 0.0,
            Valuation::Finite(v) => (p as f64).powi(-(v as i32)),
        }
    }
}

/// Decomposes `numerator / denominator = p^val · unit` with `unit ∈ (Z/p^N)^×`.
pub fn scalar_decompose(
    numerator: &BigInt,
    denominator: &BigInt,
    ctx: &PadicContext,
) -> Result<PadicScalar> {
    let val = valuation(numerator, denominator, ctx.p)?;
    if val.is_infinite() {
        return Ok(PadicScalar::zero());
    }
    let strip = |n: &BigInt| {
        let v = valuation_int(n, ctx.p).finite().expect("nonzero") as u32;
        n / pow_p(ctx.p, v)
    };
    let num = ctx.residue(strip(numerator));
    let den = ctx.residue(strip(denominator));
    let unit = num.mul(&den.inv()?)?;
    Ok(PadicScalar {
        val,
        unit: Some(unit),
    })
}

/// `Ψ(phase_num / p^m) = exp(2πi · (phase_num mod p^m) / p^m)`.
///
/// The phase is reduced exactly before any conversion to floating point.
pub fn char_eval(phase_num: &BigInt, m: u32, p: u64) -> Result<Complex64> {
    if m == 0 {
        return Err(Error::Domain("character level m must be >= 1".into()));
    }
    let modulus = pow_p(p, m);
    let r = phase_num.mod_floor(&modulus);
    if let (Some(r), Some(n)) = (r.to_u64(), modulus.to_u64()) {
        return Ok(char_u64(r, n));
    }
    // Scale both down so the ratio survives conversion.
    let shift = modulus.bits().saturating_sub(62);
    let r = (&r >> shift).to_f64().unwrap_or(0.0);
    let n = (&modulus >> shift).to_f64().unwrap_or(1.0);
    Ok(unit_circle(r / n))
}

/// `exp(2πi · k / n)` for a reduced residue `k ∈ [0, n)`.
#[inline]
pub fn char_u64(k: u64, n: u64) -> Complex64 {
    // Symmetric representative keeps the angle in [-π, π].
    let k = k % n;
    let frac = if k > n / 2 {
        -((n - k) as f64) / n as f64
    } else {
        k as f64 / n as f64
    };
    unit_circle(frac)
}

#[inline]
fn unit_circle(frac: f64) -> Complex64 {
    let (s, c) = (std::f64::consts::TAU * frac).sin_cos();
    Complex64::new(c, s)
}
