//! Exact arithmetic in the Laurent polynomial ring `Z[v, v^-1]`.
//!
//! Polynomials are stored sparsely as an ordered map from exponent to a
//! nonzero arbitrary-precision coefficient, so structural equality is
//! mathematical equality. Besides the ring operations this module provides
//! the bar involution `v -> v^-1` and the quantum integers used throughout
//! the multiplication formulas.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::de::{self, MapAccess, Visitor};
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LaurentError {
    #[error("not bar-antisymmetric: {0}")]
    NotAntisymmetric(String),
    #[error("no Y-decomposition: constant term of {0} is odd")]
    NoYDecomposition(String),
    #[error("inexact division of {numerator} by {divisor}")]
    InexactDivision { numerator: String, divisor: String },
    #[error("division by the zero polynomial")]
    DivisionByZero,
}

/// Parity of an index, deciding whether `v_h` is `v` (even) or `v^-1` (odd).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    /// `+1` for even and `-1` for odd; `v_h = v^sign`.
    pub fn sign(self) -> i64 {
        match self {
            Parity::Even => 1,
            Parity::Odd => -1,
        }
    }
}

/// An element of `Z[v, v^-1]`.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LaurentPolynomial {
    coeffs: BTreeMap<i64, BigInt>,
}

impl LaurentPolynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::monomial(0, 1)
    }

    /// `c * v^exp`.
    pub fn monomial(exp: i64, c: impl Into<BigInt>) -> Self {
        let mut p = Self::zero();
        p.add_term(exp, c.into());
        p
    }

    /// The monomial `v^exp`.
    pub fn v(exp: i64) -> Self {
        Self::monomial(exp, 1)
    }

    pub fn constant(c: impl Into<BigInt>) -> Self {
        Self::monomial(0, c)
    }

    pub fn from_terms<I, C>(terms: I) -> Self
    where
        I: IntoIterator<Item = (i64, C)>,
        C: Into<BigInt>,
    {
        let mut p = Self::zero();
        for (e, c) in terms {
            p.add_term(e, c.into());
        }
        p
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs.get(&0).is_some_and(|c| c.is_one())
    }

    /// Coefficient of `v^exp`.
    pub fn coeff(&self, exp: i64) -> BigInt {
        self.coeffs.get(&exp).cloned().unwrap_or_default()
    }

    /// Nonzero terms in increasing exponent order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (i64, &BigInt)> + '_ {
        self.coeffs.iter().map(|(e, c)| (*e, c))
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn min_exp(&self) -> Option<i64> {
        self.coeffs.keys().next().copied()
    }

    pub fn max_exp(&self) -> Option<i64> {
        self.coeffs.keys().next_back().copied()
    }

    /// True when every exponent is at most `-1`, i.e. the polynomial lies in `v^-1 Z[v^-1]`.
    pub fn is_strictly_negative(&self) -> bool {
        self.max_exp().is_none_or(|e| e < 0)
    }

    pub fn add_term(&mut self, exp: i64, c: BigInt) {
        if c.is_zero() {
            return;
        }
        let entry = self.coeffs.entry(exp).or_default();
        *entry += c;
        if entry.is_zero() {
            self.coeffs.remove(&exp);
        }
    }

    /// The bar involution `v -> v^-1`.
    pub fn bar(&self) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|(e, c)| (-e, c.clone())).collect(),
        }
    }

    /// Multiplication by `v^k`.
    pub fn shift(&self, k: i64) -> Self {
        Self {
            coeffs: self
                .coeffs
                .iter()
                .map(|(e, c)| (e + k, c.clone()))
                .collect(),
        }
    }

    pub fn scale(&self, c: impl Into<BigInt>) -> Self {
        let c = c.into();
        if c.is_zero() {
            return Self::zero();
        }
        Self {
            coeffs: self.coeffs.iter().map(|(e, x)| (*e, x * &c)).collect(),
        }
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    /// Exact division in `Z[v, v^-1]`.
    ///
    /// Fails when the divisor is zero or when the quotient would leave a
    /// nonzero remainder or need non-integral coefficients.
    pub fn div_exact(&self, divisor: &Self) -> Result<Self, LaurentError> {
        let (d_lo, d_hi) = match (divisor.min_exp(), divisor.max_exp()) {
            (Some(lo), Some(hi)) => (lo, hi),
            _ => return Err(LaurentError::DivisionByZero),
        };
        if self.is_zero() {
            return Ok(Self::zero());
        }
        let inexact = || LaurentError::InexactDivision {
            numerator: self.to_string(),
            divisor: divisor.to_string(),
        };
        let lead = divisor.coeff(d_hi);
        let n_lo = self.min_exp().unwrap_or(0);
        let mut rem = self.clone();
        let mut quot = Self::zero();
        while let Some(r_hi) = rem.max_exp() {
            if r_hi - (d_hi - d_lo) < n_lo {
                return Err(inexact());
            }
            let rc = rem.coeff(r_hi);
            if !(&rc % &lead).is_zero() {
                return Err(inexact());
            }
            let qc = rc / &lead;
            let qe = r_hi - d_hi;
            for (e, c) in divisor.terms() {
                rem.add_term(e + qe, -(c * &qc));
            }
            quot.add_term(qe, qc);
        }
        Ok(quot)
    }

    /// Evaluation at `v = 1`.
    pub fn eval_at_one(&self) -> BigInt {
        self.coeffs.values().sum()
    }

    /// LaTeX rendering with exponents in descending order and variable `v`.
    pub fn to_latex(&self) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (i, (e, c)) in self.coeffs.iter().rev().enumerate() {
            let neg = c.is_negative();
            let abs = c.abs();
            if i == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            let unit = abs.is_one();
            if !unit || *e == 0 {
                out.push_str(&abs.to_string());
            }
            match *e {
                0 => {}
                1 => out.push('v'),
                _ => out.push_str(&format!("v^{{{e}}}")),
            }
        }
        out
    }
}

impl fmt::Display for LaurentPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (i, (e, c)) in self.coeffs.iter().rev().enumerate() {
            let neg = c.is_negative();
            let abs = c.abs();
            if i == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            if !abs.is_one() || *e == 0 {
                write!(f, "{abs}")?;
            }
            match *e {
                0 => {}
                1 => write!(f, "v")?,
                _ => write!(f, "v^{e}")?,
            }
        }
        Ok(())
    }
}

impl fmt::Debug for LaurentPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LaurentPolynomial({self})")
    }
}

impl From<i64> for LaurentPolynomial {
    fn from(c: i64) -> Self {
        Self::constant(c)
    }
}

impl From<BigInt> for LaurentPolynomial {
    fn from(c: BigInt) -> Self {
        Self::constant(c)
    }
}

impl Serialize for LaurentPolynomial {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.coeffs.len()))?;
        for (e, c) in &self.coeffs {
            let num: serde_json::Number =
                c.to_string().parse().map_err(serde::ser::Error::custom)?;
            map.serialize_entry(&e.to_string(), &num)?;
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for LaurentPolynomial {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct PolyVisitor;

        impl<'de> Visitor<'de> for PolyVisitor {
            type Value = LaurentPolynomial;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                write!(f, "a map from decimal exponents to integer coefficients")
            }

            fn visit_map<A: MapAccess<'de>>(self, mut access: A) -> Result<Self::Value, A::Error> {
                let mut p = LaurentPolynomial::zero();
                while let Some((k, v)) = access.next_entry::<String, serde_json::Number>()? {
                    let e: i64 = k.trim().parse().map_err(de::Error::custom)?;
                    let c: BigInt = v.to_string().parse().map_err(de::Error::custom)?;
                    p.add_term(e, c);
                }
                Ok(p)
            }
        }

        deserializer.deserialize_map(PolyVisitor)
    }
}

impl Add<&LaurentPolynomial> for &LaurentPolynomial {
    type Output = LaurentPolynomial;

    fn add(self, rhs: &LaurentPolynomial) -> LaurentPolynomial {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Add for LaurentPolynomial {
    type Output = LaurentPolynomial;

    fn add(mut self, rhs: LaurentPolynomial) -> LaurentPolynomial {
        self += &rhs;
        self
    }
}

impl AddAssign<&LaurentPolynomial> for LaurentPolynomial {
    fn add_assign(&mut self, rhs: &LaurentPolynomial) {
        for (e, c) in &rhs.coeffs {
            self.add_term(*e, c.clone());
        }
    }
}

impl AddAssign for LaurentPolynomial {
    fn add_assign(&mut self, rhs: LaurentPolynomial) {
        *self += &rhs;
    }
}

impl Sub<&LaurentPolynomial> for &LaurentPolynomial {
    type Output = LaurentPolynomial;

    fn sub(self, rhs: &LaurentPolynomial) -> LaurentPolynomial {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl Sub for LaurentPolynomial {
    type Output = LaurentPolynomial;

    fn sub(mut self, rhs: LaurentPolynomial) -> LaurentPolynomial {
        self -= &rhs;
        self
    }
}

impl SubAssign<&LaurentPolynomial> for LaurentPolynomial {
    fn sub_assign(&mut self, rhs: &LaurentPolynomial) {
        for (e, c) in &rhs.coeffs {
            self.add_term(*e, -c.clone());
        }
    }
}

impl SubAssign for LaurentPolynomial {
    fn sub_assign(&mut self, rhs: LaurentPolynomial) {
        *self -= &rhs;
    }
}

impl Neg for &LaurentPolynomial {
    type Output = LaurentPolynomial;

    fn neg(self) -> LaurentPolynomial {
        LaurentPolynomial {
            coeffs: self.coeffs.iter().map(|(e, c)| (*e, -c.clone())).collect(),
        }
    }
}

impl Neg for LaurentPolynomial {
    type Output = LaurentPolynomial;

    fn neg(self) -> LaurentPolynomial {
        -&self
    }
}

impl Mul<&LaurentPolynomial> for &LaurentPolynomial {
    type Output = LaurentPolynomial;

    fn mul(self, rhs: &LaurentPolynomial) -> LaurentPolynomial {
        let mut out = LaurentPolynomial::zero();
        for (e1, c1) in &self.coeffs {
            for (e2, c2) in &rhs.coeffs {
                out.add_term(e1 + e2, c1 * c2);
            }
        }
        out
    }
}

impl Mul for LaurentPolynomial {
    type Output = LaurentPolynomial;

    fn mul(self, rhs: LaurentPolynomial) -> LaurentPolynomial {
        &self * &rhs
    }
}

/// `[[i]] = 1 + v^step + ... + v^{(i-1) step}`.
pub fn gauss_int(i: u32, step: i64) -> LaurentPolynomial {
    LaurentPolynomial::from_terms((0..i as i64).map(|t| (t * step, 1)))
}

/// The balanced quantum integer `[i] = v^{i-1} + v^{i-3} + ... + v^{1-i}`.
///
/// It is invariant under `v -> v^-1`, so the parity only documents which
/// `v_h` is meant.
pub fn sym_int(i: u32, _parity: Parity) -> LaurentPolynomial {
    let i = i as i64;
    LaurentPolynomial::from_terms((0..i).map(|t| (i - 1 - 2 * t, 1)))
}

/// `[i]` extended to negative arguments by `[-i] = -[i]`.
pub fn signed_sym_int(i: i64) -> LaurentPolynomial {
    let q = sym_int(i.unsigned_abs() as u32, Parity::Even);
    if i < 0 {
        -q
    } else {
        q
    }
}

/// `[[i]]! = [[1]][[2]]...[[i]]`.
pub fn gauss_factorial(i: u32, step: i64) -> LaurentPolynomial {
    (1..=i).fold(LaurentPolynomial::one(), |acc, t| {
        &acc * &gauss_int(t, step)
    })
}

/// `[i]! = [1][2]...[i]`.
pub fn sym_factorial(i: u32) -> LaurentPolynomial {
    (1..=i).fold(LaurentPolynomial::one(), |acc, t| {
        &acc * &sym_int(t, Parity::Even)
    })
}

/// The Gaussian binomial `[[n]]! / ([[k]]! [[n-k]]!)` in the variable `v^step`.
///
/// Returns zero when `k > n`. The division is exact; a remainder would be a
/// bug and panics.
pub fn qq_binom(n: u32, k: u32, step: i64) -> LaurentPolynomial {
    if k > n {
        return LaurentPolynomial::zero();
    }
    let num = gauss_factorial(n, step);
    let den = &gauss_factorial(k, step) * &gauss_factorial(n - k, step);
    num.div_exact(&den)
        .expect("Gaussian binomial quotient is always exact")
}

/// Solves `p - bar(p) = r` for `p` in `v^-1 Z[v^-1]`.
pub fn antisym_solve(r: &LaurentPolynomial) -> Result<LaurentPolynomial, LaurentError> {
    if r.bar() != -r {
        return Err(LaurentError::NotAntisymmetric(r.to_string()));
    }
    Ok(LaurentPolynomial {
        coeffs: r
            .coeffs
            .iter()
            .filter(|(e, _)| **e < 0)
            .map(|(e, c)| (*e, c.clone()))
            .collect(),
    })
}

/// Splits `g = g_y + g_neg` with `g_y = h + bar(h)` for some `h` in `Z[v]` and
/// `g_neg` in `v^-1 Z[v^-1]`.
///
/// Such an `h` exists only when the constant term of `g` is even.
pub fn y_decompose(
    g: &LaurentPolynomial,
) -> Result<(LaurentPolynomial, LaurentPolynomial), LaurentError> {
    let c0 = g.coeff(0);
    if !(&c0 % BigInt::from(2)).is_zero() {
        return Err(LaurentError::NoYDecomposition(g.to_string()));
    }
    let gy = bar_symmetric_part(g);
    let gneg = g - &gy;
    Ok((gy, gneg))
}

/// The unique bar-invariant `s` such that `g - s` lies in `v^-1 Z[v^-1]`.
///
/// Unlike [`y_decompose`] this always exists: the constant term of `g` is
/// kept whole.
pub fn bar_symmetric_part(g: &LaurentPolynomial) -> LaurentPolynomial {
    let mut s = LaurentPolynomial::zero();
    for (e, c) in g.terms() {
        match e.cmp(&0) {
            std::cmp::Ordering::Greater => {
                s.add_term(e, c.clone());
                s.add_term(-e, c.clone());
            }
            std::cmp::Ordering::Equal => s.add_term(0, c.clone()),
            std::cmp::Ordering::Less => {}
        }
    }
    s
}
