//! Bivariate integer polynomials, the text grammar they are read from, and
//! fast evaluation modulo machine-word moduli.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::padic::{pow_p, Residue};
use crate::series::TruncSeries;

/// Largest exponent accepted by the parser.
pub const MAX_EXPONENT: u32 = 1024;

/// A polynomial in `x, y` with arbitrary-precision integer coefficients.
///
/// Zero coefficients are never stored, so structural equality is
/// polynomial equality.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct BiPoly {
    terms: BTreeMap<(u32, u32), BigInt>,
}

impl BiPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: impl Into<BigInt>) -> Self {
        Self::monomial(c, 0, 0)
    }

    pub fn x() -> Self {
        Self::monomial(1, 1, 0)
    }

    pub fn y() -> Self {
        Self::monomial(1, 0, 1)
    }

    pub fn monomial(c: impl Into<BigInt>, i: u32, j: u32) -> Self {
        let mut p = Self::zero();
        p.add_term(i, j, c.into());
        p
    }

    pub fn from_terms<I, C>(terms: I) -> Self
    where
        I: IntoIterator<Item = ((u32, u32), C)>,
        C: Into<BigInt>,
    {
        let mut p = Self::zero();
        for ((i, j), c) in terms {
            p.add_term(i, j, c.into());
        }
        p
    }

    fn add_term(&mut self, i: u32, j: u32, c: BigInt) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry((i, j)).or_insert_with(BigInt::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&(i, j));
        }
    }

    /// Terms as `((i, j), coefficient)` in ascending exponent order.
    pub fn terms(&self) -> impl Iterator<Item = (&(u32, u32), &BigInt)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, i: u32, j: u32) -> BigInt {
        self.terms.get(&(i, j)).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|&(i, j)| i == 0 && j == 0)
    }

    /// True when `y` does not occur.
    pub fn is_univariate_x(&self) -> bool {
        self.terms.keys().all(|&(_, j)| j == 0)
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|&(i, j)| i + j).max().unwrap_or(0)
    }

    pub fn degree_x(&self) -> u32 {
        self.terms.keys().map(|&(i, _)| i).max().unwrap_or(0)
    }

    pub fn degree_y(&self) -> u32 {
        self.terms.keys().map(|&(_, j)| j).max().unwrap_or(0)
    }

    /// Lowest total degree among the nonconstant terms.
    pub fn order(&self) -> Option<u32> {
        self.terms
            .keys()
            .map(|&(i, j)| i + j)
            .filter(|&d| d > 0)
            .min()
    }

    /// The lowest-degree nonconstant homogeneous part (`g_D`).
    pub fn lowest_homogeneous(&self) -> BiPoly {
        let Some(d) = self.order() else {
            return BiPoly::zero();
        };
        Self::from_terms(
            self.terms
                .iter()
                .filter(|(&(i, j), _)| i + j == d)
                .map(|(&k, c)| (k, c.clone())),
        )
    }

    pub fn neg(&self) -> BiPoly {
        Self {
            terms: self.terms.iter().map(|(&k, c)| (k, -c)).collect(),
        }
    }

    pub fn scale(&self, c: &BigInt) -> BiPoly {
        Self::from_terms(self.terms.iter().map(|(&k, v)| (k, v * c)))
    }

    pub fn pow(&self, mut e: u32) -> BiPoly {
        let mut base = self.clone();
        let mut acc = BiPoly::constant(1);
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    pub fn partial_x(&self) -> BiPoly {
        Self::from_terms(
            self.terms
                .iter()
                .filter(|(&(i, _), _)| i > 0)
                .map(|(&(i, j), c)| ((i - 1, j), c * BigInt::from(i))),
        )
    }

    pub fn partial_y(&self) -> BiPoly {
        Self::from_terms(
            self.terms
                .iter()
                .filter(|(&(_, j), _)| j > 0)
                .map(|(&(i, j), c)| ((i, j - 1), c * BigInt::from(j))),
        )
    }

    /// `f(y, x)`.
    pub fn transpose(&self) -> BiPoly {
        Self {
            terms: self.terms.iter().map(|(&(i, j), c)| ((j, i), c.clone())).collect(),
        }
    }

    /// `f(x + a, y + b)`, expanded exactly.
    pub fn translate(&self, a: &BigInt, b: &BigInt) -> BiPoly {
        let xa = &BiPoly::x() + &BiPoly::constant(a.clone());
        let yb = &BiPoly::y() + &BiPoly::constant(b.clone());
        let xpow = powers(&xa, self.degree_x());
        let ypow = powers(&yb, self.degree_y());
        let mut out = BiPoly::zero();
        for (&(i, j), c) in &self.terms {
            let t = (&xpow[i as usize] * &ypow[j as usize]).scale(c);
            out = &out + &t;
        }
        out
    }

    /// `f(s·x, s·y)`.
    pub fn scale_vars(&self, s: &BigInt) -> BiPoly {
        Self::from_terms(
            self.terms
                .iter()
                .map(|(&(i, j), c)| ((i, j), c * num_traits::pow(s.clone(), (i + j) as usize))),
        )
    }

    /// Exact division of every coefficient by `d`; `None` if any is inexact.
    pub fn div_exact(&self, d: &BigInt) -> Option<BiPoly> {
        let mut out = BiPoly::zero();
        for (&(i, j), c) in &self.terms {
            let (q, r) = c.div_rem(d);
            if !r.is_zero() {
                return None;
            }
            out.add_term(i, j, q);
        }
        Some(out)
    }

    /// Coefficients reduced into `[0, m)`, dropping those that vanish.
    pub fn reduce_mod(&self, m: &BigInt) -> BiPoly {
        Self::from_terms(self.terms.iter().map(|(&k, c)| (k, c.mod_floor(m))))
    }

    /// Exact evaluation over the integers.
    pub fn eval_int(&self, x: &BigInt, y: &BigInt) -> BigInt {
        let xpow = int_powers(x, self.degree_x());
        let ypow = int_powers(y, self.degree_y());
        self.terms
            .iter()
            .map(|(&(i, j), c)| c * &xpow[i as usize] * &ypow[j as usize])
            .sum()
    }

    /// Evaluation at a point of residues of equal precision.
    pub fn eval(&self, x: &Residue, y: &Residue) -> Result<Residue> {
        if x.p() != y.p() || x.precision() != y.precision() {
            return Err(Error::PrecisionMismatch(x.precision(), y.precision()));
        }
        let m = x.modulus();
        let xpow = mod_powers(x.value(), self.degree_x(), &m);
        let ypow = mod_powers(y.value(), self.degree_y(), &m);
        let mut acc = BigInt::zero();
        for (&(i, j), c) in &self.terms {
            acc += c * &xpow[i as usize] * &ypow[j as usize];
            acc = acc.mod_floor(&m);
        }
        Ok(Residue::new(acc, x.p(), x.precision()))
    }

    /// `f(x(t), y(t))` as a truncated series.
    pub fn eval_series(&self, x: &TruncSeries, y: &TruncSeries) -> Result<TruncSeries> {
        x.check_compatible(y)?;
        let xpow = series_powers(x, self.degree_x())?;
        let ypow = series_powers(y, self.degree_y())?;
        let mut acc = x.zeroed();
        for (&(i, j), c) in &self.terms {
            let term = xpow[i as usize].mul(&ypow[j as usize])?.scale(c);
            acc = acc.add(&term)?;
        }
        Ok(acc)
    }

    /// Canonical term order: descending total degree, then descending power of `x`.
    pub fn graded_terms(&self) -> Vec<((u32, u32), &BigInt)> {
        let mut v: Vec<_> = self.terms.iter().map(|(&k, c)| (k, c)).collect();
        v.sort_by(|a, b| {
            let (da, db) = (a.0 .0 + a.0 .1, b.0 .0 + b.0 .1);
            db.cmp(&da).then(b.0 .0.cmp(&a.0 .0))
        });
        v
    }

    /// Prepares the polynomial for repeated evaluation modulo `modulus < 2^63`.
    pub fn to_mod(&self, modulus: u64) -> ModPoly {
        ModPoly::new(self, modulus)
    }
}

fn powers(base: &BiPoly, n: u32) -> Vec<BiPoly> {
    let mut v = vec![BiPoly::constant(1)];
    for k in 0..n as usize {
        let next = &v[k] * base;
        v.push(next);
    }
    v
}

fn int_powers(base: &BigInt, n: u32) -> Vec<BigInt> {
    let mut v = vec![BigInt::one()];
    for k in 0..n as usize {
        let next = &v[k] * base;
        v.push(next);
    }
    v
}

fn mod_powers(base: &BigInt, n: u32, m: &BigInt) -> Vec<BigInt> {
    let mut v = vec![BigInt::one().mod_floor(m)];
    for k in 0..n as usize {
        let next = (&v[k] * base).mod_floor(m);
        v.push(next);
    }
    v
}

fn series_powers(s: &TruncSeries, n: u32) -> Result<Vec<TruncSeries>> {
    let mut v = vec![s.one()];
    for k in 0..n as usize {
        let next = v[k].mul(s)?;
        v.push(next);
    }
    Ok(v)
}

impl std::ops::Add for &BiPoly {
    type Output = BiPoly;

    fn add(self, rhs: &BiPoly) -> BiPoly {
        let mut out = self.clone();
        for (&(i, j), c) in &rhs.terms {
            out.add_term(i, j, c.clone());
        }
        out
    }
}

impl std::ops::Sub for &BiPoly {
    type Output = BiPoly;

    fn sub(self, rhs: &BiPoly) -> BiPoly {
        let mut out = self.clone();
        for (&(i, j), c) in &rhs.terms {
            out.add_term(i, j, -c);
        }
        out
    }
}

impl std::ops::Mul for &BiPoly {
    type Output = BiPoly;

    fn mul(self, rhs: &BiPoly) -> BiPoly {
        let mut out = BiPoly::zero();
        for (&(i1, j1), c1) in &self.terms {
            for (&(i2, j2), c2) in &rhs.terms {
                out.add_term(i1 + i2, j1 + j2, c1 * c2);
            }
        }
        out
    }
}

impl fmt::Display for BiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (n, ((i, j), c)) in self.graded_terms().into_iter().enumerate() {
            let neg = c.is_negative();
            match (n, neg) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            let mag = c.abs();
            let mut factors: Vec<String> = Vec::new();
            if !mag.is_one() || (i == 0 && j == 0) {
                factors.push(mag.to_string());
            }
            for (var, e) in [("x", i), ("y", j)] {
                match e {
                    0 => {}
                    1 => factors.push(var.to_string()),
                    _ => factors.push(format!("{var}^{e}")),
                }
            }
            write!(f, "{}", factors.join("*"))?;
        }
        Ok(())
    }
}

impl FromStr for BiPoly {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_poly(s)
    }
}

/// Parses the polynomial grammar:
///
/// ```text
/// expr   := ['+' | '-'] term (('+' | '-') term)*
/// term   := factor ('*' factor)*
/// factor := atom ['^' integer]
/// atom   := integer | 'x' | 'y' | '(' expr ')'
/// ```
///
/// Whitespace is insignificant. Columns in errors are 1-based.
pub fn parse_poly(text: &str) -> Result<BiPoly> {
    let tokens = tokenize(text)?;
    let mut parser = Parser {
        tokens,
        pos: 0,
        end_column: text.chars().count() + 1,
    };
    let poly = parser.expr()?;
    if let Some(tok) = parser.peek() {
        return Err(Error::Syntax {
            column: tok.column,
            message: format!("unexpected {}", tok.kind),
        });
    }
    Ok(poly)
}

#[derive(Debug, Clone, PartialEq)]
enum TokenKind {
    Int(BigInt),
    X,
    Y,
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TokenKind::Int(n) => write!(f, "integer {n}"),
            TokenKind::X => write!(f, "'x'"),
            TokenKind::Y => write!(f, "'y'"),
            TokenKind::Plus => write!(f, "'+'"),
            TokenKind::Minus => write!(f, "'-'"),
            TokenKind::Star => write!(f, "'*'"),
            TokenKind::Caret => write!(f, "'^'"),
            TokenKind::LParen => write!(f, "'('"),
            TokenKind::RParen => write!(f, "')'"),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    kind: TokenKind,
    column: usize,
}

fn tokenize(text: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let mut k = 0;
    while k < chars.len() {
        let c = chars[k];
        let column = k + 1;
        let kind = match c {
            c if c.is_whitespace() => {
                k += 1;
                continue;
            }
            '0'..='9' => {
                let start = k;
                while k < chars.len() && chars[k].is_ascii_digit() {
                    k += 1;
                }
                let digits: String = chars[start..k].iter().collect();
                tokens.push(Token {
                    kind: TokenKind::Int(digits.parse().expect("ascii digits")),
                    column,
                });
                continue;
            }
            'x' => TokenKind::X,
            'y' => TokenKind::Y,
            '+' => TokenKind::Plus,
            '-' => TokenKind::Minus,
            '*' => TokenKind::Star,
            '^' => TokenKind::Caret,
            '(' => TokenKind::LParen,
            ')' => TokenKind::RParen,
            other => {
                return Err(Error::Syntax {
                    column,
                    message: format!("unexpected character '{other}'"),
                })
            }
        };
        tokens.push(Token { kind, column });
        k += 1;
    }
    Ok(tokens)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    end_column: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn bump(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn eat(&mut self, kind: &TokenKind) -> bool {
        if self.peek().map(|t| &t.kind) == Some(kind) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn error_here(&self, expected: &str) -> Error {
        match self.peek() {
            Some(t) => Error::Syntax {
                column: t.column,
                message: format!("expected {expected}, found {}", t.kind),
            },
            None => Error::Syntax {
                column: self.end_column,
                message: format!("expected {expected}, found end of input"),
            },
        }
    }

    fn expr(&mut self) -> Result<BiPoly> {
        let negate = if self.eat(&TokenKind::Minus) {
            true
        } else {
            self.eat(&TokenKind::Plus);
            false
        };
        let first = self.term()?;
        let mut acc = if negate { first.neg() } else { first };
        loop {
            if self.eat(&TokenKind::Plus) {
                acc = &acc + &self.term()?;
            } else if self.eat(&TokenKind::Minus) {
                acc = &acc - &self.term()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<BiPoly> {
        let mut acc = self.factor()?;
        while self.eat(&TokenKind::Star) {
            acc = &acc * &self.factor()?;
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<BiPoly> {
        let base = self.atom()?;
        if !self.eat(&TokenKind::Caret) {
            return Ok(base);
        }
        match self.bump() {
            Some(Token {
                kind: TokenKind::Int(n),
                column,
            }) => match n.to_u32() {
                Some(e) if e <= MAX_EXPONENT => Ok(base.pow(e)),
                _ => Err(Error::ExponentOverflow {
                    column,
                    max: MAX_EXPONENT,
                }),
            },
            _ => {
                self.pos -= 1;
                Err(self.error_here("a non-negative integer exponent"))
            }
        }
    }

    fn atom(&mut self) -> Result<BiPoly> {
        let Some(tok) = self.peek().cloned() else {
            return Err(self.error_here("a term"));
        };
        match tok.kind {
            TokenKind::Int(n) => {
                self.pos += 1;
                Ok(BiPoly::constant(n))
            }
            TokenKind::X => {
                self.pos += 1;
                Ok(BiPoly::x())
            }
            TokenKind::Y => {
                self.pos += 1;
                Ok(BiPoly::y())
            }
            TokenKind::LParen => {
                self.pos += 1;
                let inner = self.expr()?;
                if !self.eat(&TokenKind::RParen) {
                    return Err(self.error_here("')'"));
                }
                Ok(inner)
            }
            _ => Err(self.error_here("a term")),
        }
    }
}

/// A polynomial compiled for evaluation modulo a fixed `modulus < 2^63`.
///
/// Stored densely as `Σ_j y^j A_j(x)` and evaluated by nested Horner.
#[derive(Debug, Clone)]
pub struct ModPoly {
    modulus: u64,
    rows: Vec<Vec<u64>>,
}

impl ModPoly {
    pub fn new(f: &BiPoly, modulus: u64) -> Self {
        assert!(modulus > 0 && modulus < (1 << 63), "modulus out of range");
        let m = BigInt::from(modulus);
        let mut rows = vec![vec![0u64; f.degree_x() as usize + 1]; f.degree_y() as usize + 1];
        for (&(i, j), c) in f.terms() {
            rows[j as usize][i as usize] = c.mod_floor(&m).to_u64().expect("reduced");
        }
        Self { modulus, rows }
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    #[inline]
    pub fn eval(&self, x: u64, y: u64) -> u64 {
        let m = self.modulus;
        let mut acc = 0u64;
        for row in self.rows.iter().rev() {
            let mut a = 0u64;
            for &c in row.iter().rev() {
                a = add_mod(mul_mod(a, x, m), c, m);
            }
            acc = add_mod(mul_mod(acc, y, m), a, m);
        }
        acc
    }
}

#[inline]
pub(crate) fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

#[inline]
pub(crate) fn add_mod(a: u64, b: u64, m: u64) -> u64 {
    let s = a + b;
    if s >= m {
        s - m
    } else {
        s
    }
}

/// Reduces a big integer modulo `p^n` into a `u64`, if it fits.
pub(crate) fn big_mod_u64(v: &BigInt, p: u64, n: u32) -> Option<u64> {
    v.mod_floor(&pow_p(p, n)).to_u64()
}
