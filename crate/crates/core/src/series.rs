//! Power series in `t` truncated at order `T`, coefficients in `Z/p^N`.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::padic::{mod_inverse, pow_p, valuation_int, Valuation};

/// `c_0 + c_1 t + ... + c_T t^T` with every `c_k` reduced mod `p^N`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruncSeries {
    coeffs: Vec<BigInt>,
    p: u64,
    precision: u32,
    modulus: BigInt,
}

/// Result of [`TruncSeries::ord_t`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrdT {
    /// First nonzero coefficient sits at `order` with p-adic valuation `valuation`.
    ///
    /// `confident` is false when `valuation >= N/2`; the value may then be a
    /// precision artifact and should be recomputed at a larger `N`.
    Found {
        order: usize,
        valuation: u32,
        confident: bool,
    },
    /// Every coefficient up to `T` vanishes mod `p^N`.
    Inconclusive,
}

impl TruncSeries {
    /// Builds a series from integer coefficients, padding or truncating to `order_cap + 1`.
    pub fn new<I, C>(coeffs: I, p: u64, precision: u32, order_cap: usize) -> Self
    where
        I: IntoIterator<Item = C>,
        C: Into<BigInt>,
    {
        let modulus = pow_p(p, precision);
        let mut v: Vec<BigInt> = coeffs
            .into_iter()
            .take(order_cap + 1)
            .map(|c| c.into().mod_floor(&modulus))
            .collect();
        v.resize(order_cap + 1, BigInt::zero());
        Self {
            coeffs: v,
            p,
            precision,
            modulus,
        }
    }

    pub fn zero(p: u64, precision: u32, order_cap: usize) -> Self {
        Self::new(std::iter::empty::<BigInt>(), p, precision, order_cap)
    }

    /// The zero series with the same `p`, `N`, `T`.
    pub fn zeroed(&self) -> Self {
        Self::zero(self.p, self.precision, self.order_cap())
    }

    /// The constant series `1` with the same `p`, `N`, `T`.
    pub fn one(&self) -> Self {
        self.constant(BigInt::one())
    }

    pub fn constant(&self, c: BigInt) -> Self {
        Self::new([c], self.p, self.precision, self.order_cap())
    }

    /// The series `t` with the same `p`, `N`, `T`.
    pub fn variable(&self) -> Self {
        Self::new([0, 1], self.p, self.precision, self.order_cap())
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> &BigInt {
        &self.coeffs[k]
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn modulus(&self) -> &BigInt {
        &self.modulus
    }

    /// `T`: the highest retained power of `t`.
    pub fn order_cap(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    /// Coefficients as symmetric residues in `(-p^N/2, p^N/2]`.
    pub fn signed_coeffs(&self) -> Vec<BigInt> {
        self.coeffs
            .iter()
            .map(|c| {
                let c = c.mod_floor(&self.modulus);
                if &c * 2 > self.modulus {
                    c - &self.modulus
                } else {
                    c
                }
            })
            .collect()
    }

    /// Human-readable form with signed coefficients and zero terms dropped,
    /// e.g. `0 + t - 2*t^3`. The constant term is always shown.
    pub fn to_pretty(&self) -> String {
        let mut out = String::new();
        for (k, c) in self.signed_coeffs().into_iter().enumerate() {
            if k == 0 {
                out.push_str(&c.to_string());
                continue;
            }
            if c.is_zero() {
                continue;
            }
            let (sign, a) = if c < BigInt::zero() { ("-", -c) } else { ("+", c) };
            let mono = if k == 1 { "t".to_string() } else { format!("t^{k}") };
            if a.is_one() {
                out.push_str(&format!(" {sign} {mono}"));
            } else {
                out.push_str(&format!(" {sign} {a}*{mono}"));
            }
        }
        out
    }

    pub(crate) fn check_compatible(&self, other: &TruncSeries) -> Result<()> {
        if self.p != other.p {
            return Err(Error::Domain("series over different primes".into()));
        }
        if self.precision != other.precision {
            return Err(Error::PrecisionMismatch(self.precision, other.precision));
        }
        if self.coeffs.len() != other.coeffs.len() {
            return Err(Error::Domain(format!(
                "series truncated at different orders {} and {}",
                self.order_cap(),
                other.order_cap()
            )));
        }
        Ok(())
    }

    fn with_coeffs(&self, coeffs: Vec<BigInt>) -> Self {
        Self::new(coeffs, self.p, self.precision, self.order_cap())
    }

    /// Same coefficients retruncated (or zero-padded) to a new order cap.
    pub fn with_order_cap(&self, order_cap: usize) -> Self {
        Self::new(self.coeffs.iter().cloned(), self.p, self.precision, order_cap)
    }

    /// Zeroes every coefficient above `t^k`.
    pub fn truncate(&self, k: usize) -> Self {
        let mut c = self.coeffs.clone();
        for v in c.iter_mut().skip(k + 1) {
            *v = BigInt::zero();
        }
        self.with_coeffs(c)
    }

    pub fn add(&self, other: &TruncSeries) -> Result<Self> {
        self.check_compatible(other)?;
        Ok(self.with_coeffs(self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect()))
    }

    pub fn sub(&self, other: &TruncSeries) -> Result<Self> {
        self.check_compatible(other)?;
        Ok(self.with_coeffs(self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect()))
    }

    pub fn neg(&self) -> Self {
        self.with_coeffs(self.coeffs.iter().map(|a| -a).collect())
    }

    pub fn scale(&self, c: &BigInt) -> Self {
        self.with_coeffs(self.coeffs.iter().map(|a| a * c).collect())
    }

    pub fn mul(&self, other: &TruncSeries) -> Result<Self> {
        self.check_compatible(other)?;
        let n = self.coeffs.len();
        let lo = other.coeffs.iter().position(|c| !c.is_zero()).unwrap_or(n);
        let mut out = vec![BigInt::zero(); n];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() || i + lo >= n {
                continue;
            }
            for (j, b) in other.coeffs[..n - i].iter().enumerate().skip(lo) {
                if !b.is_zero() {
                    out[i + j] += a * b;
                }
            }
        }
        Ok(self.with_coeffs(out))
    }

    /// `self(inner(t))`; `inner` must have zero constant term.
    pub fn compose(&self, inner: &TruncSeries) -> Result<Self> {
        self.check_compatible(inner)?;
        if !inner.coeffs[0].is_zero() {
            return Err(Error::Domain(
                "composition requires an inner series with zero constant term".into(),
            ));
        }
        let mut acc = self.zeroed();
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(inner)?.add(&self.constant(c.clone()))?;
        }
        Ok(acc)
    }

    /// Multiplicative inverse; the constant term must be a unit mod `p`.
    pub fn inverse(&self) -> Result<Self> {
        let c0 = &self.coeffs[0];
        let inv0 = mod_inverse(c0, &self.modulus).ok_or(Error::NonUnit(
            valuation_int(c0, self.p).capped(self.precision),
        ))?;
        let n = self.coeffs.len();
        let mut out = vec![BigInt::zero(); n];
        out[0] = inv0.clone();
        for k in 1..n {
            let mut s = BigInt::zero();
            for i in 1..=k {
                if !self.coeffs[i].is_zero() {
                    s += &self.coeffs[i] * &out[k - i];
                }
            }
            out[k] = (-(s * &inv0)).mod_floor(&self.modulus);
        }
        Ok(self.with_coeffs(out))
    }

    /// Formal derivative `d/dt`.
    pub fn derivative(&self) -> Self {
        let c = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, a)| a * BigInt::from(k))
            .collect::<Vec<_>>();
        self.with_coeffs(c)
    }

    /// Order of vanishing in `t` and the valuation of the leading coefficient.
    pub fn ord_t(&self) -> OrdT {
        match self.coeffs.iter().position(|c| !c.is_zero()) {
            None => OrdT::Inconclusive,
            Some(order) => {
                let valuation = match valuation_int(&self.coeffs[order], self.p) {
                    Valuation::Finite(v) => v as u32,
                    Valuation::Infinite => unreachable!("nonzero coefficient"),
                };
                OrdT::Found {
                    order,
                    valuation,
                    confident: 2 * valuation < self.precision,
                }
            }
        }
    }

    /// Special restricted power series test: `c_0 = 0` and `v_p(c_k) >= k - 1`.
    pub fn is_srp(&self) -> bool {
        self.coeffs[0].is_zero()
            && self.coeffs.iter().enumerate().skip(2).all(|(k, c)| {
                let need = (k - 1).min(self.precision as usize) as i64;
                match valuation_int(c, self.p) {
                    Valuation::Infinite => true,
                    Valuation::Finite(v) => v >= need,
                }
            })
    }

    /// Evaluates at an integer `t` modulo `p^m` (`m <= N`).
    pub fn eval_mod(&self, t: &BigInt, m: &BigInt) -> BigInt {
        let mut acc = BigInt::zero();
        for c in self.coeffs.iter().rev() {
            acc = (acc * t + c).mod_floor(m);
        }
        acc
    }
}

impl fmt::Display for TruncSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| match k {
                0 => format!("{c}"),
                1 => format!("{c}*t"),
                _ => format!("{c}*t^{k}"),
            })
            .collect();
        write!(f, "{} + O(t^{})", parts.join(" + "), self.coeffs.len())
    }
}
