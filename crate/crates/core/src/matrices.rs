//! Super matrices indexing the bases, with their partial orders and the
//! combinatorial statistics consumed by the multiplication formulas.
//!
//! Indices are 1-based throughout the public API, matching the usual
//! notation `a_{i,j}` with `1 <= i, j <= m+n`. Index `i` is even when
//! `i <= m` and odd otherwise.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::laurent::Parity;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MatrixError {
    #[error("shape (0|0) is empty")]
    EmptyShape,
    #[error("expected a {expected}x{expected} matrix, got {rows} rows")]
    BadDimensions { expected: usize, rows: usize },
    #[error("index ({0},{1}) out of range for shape {2}")]
    IndexOutOfRange(usize, usize, SuperShape),
    #[error("hook sums {hooks} exceed weight {lambda}")]
    HookExceedsWeight {
        hooks: Composition,
        lambda: Composition,
    },
    #[error("length mismatch: composition of length {got}, expected {expected}")]
    LengthMismatch { got: usize, expected: usize },
    #[error("cannot parse matrix term '{term}': {reason}")]
    Parse { term: String, reason: String },
}

/// The pair `(m|n)` with `m + n >= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SuperShape {
    pub m: usize,
    pub n: usize,
}

impl SuperShape {
    pub fn new(m: usize, n: usize) -> Result<Self, MatrixError> {
        if m + n == 0 {
            return Err(MatrixError::EmptyShape);
        }
        Ok(Self { m, n })
    }

    pub fn dim(&self) -> usize {
        self.m + self.n
    }

    pub fn parity(&self, i: usize) -> Parity {
        if i <= self.m {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    pub fn is_odd(&self, i: usize) -> bool {
        i > self.m
    }

    /// `+1` if `v_i = v`, `-1` if `v_i = v^-1`.
    pub fn vsign(&self, i: usize) -> i64 {
        self.parity(i).sign()
    }

    /// Whether position `(i,j)` lies in a mixed block, where entries are 0 or 1.
    pub fn is_mixed(&self, i: usize, j: usize) -> bool {
        self.is_odd(i) != self.is_odd(j)
    }
}

impl fmt::Display for SuperShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}|{})", self.m, self.n)
    }
}

/// A composition `λ = (λ_1..λ_m | λ_{m+1}..λ_{m+n})`, stored flat.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Composition(pub Vec<u32>);

impl Composition {
    pub fn zero(len: usize) -> Self {
        Self(vec![0; len])
    }

    /// The unit vector `e_k` (1-based).
    pub fn unit(len: usize, k: usize) -> Self {
        let mut c = Self::zero(len);
        c.0[k - 1] = 1;
        c
    }

    pub fn total(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// 1-based access.
    pub fn at(&self, i: usize) -> u32 {
        self.0[i - 1]
    }

    /// Componentwise `self >= other`.
    pub fn dominates_componentwise(&self, other: &Composition) -> bool {
        self.0.len() == other.0.len() && self.0.iter().zip(&other.0).all(|(a, b)| a >= b)
    }

    pub fn checked_sub(&self, other: &Composition) -> Option<Composition> {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a.checked_sub(*b))
            .collect::<Option<Vec<_>>>()
            .map(Composition)
    }

    /// The signed dot product `Σ (-1)^{î} λ_i j_i`.
    pub fn super_dot(&self, shape: SuperShape, j: &[i64]) -> i64 {
        self.0
            .iter()
            .enumerate()
            .map(|(i, l)| shape.vsign(i + 1) * (*l as i64) * j[i])
            .sum()
    }

    pub fn display_in(&self, shape: SuperShape) -> String {
        let even: Vec<String> = self.0[..shape.m].iter().map(|x| x.to_string()).collect();
        let odd: Vec<String> = self.0[shape.m..].iter().map(|x| x.to_string()).collect();
        format!("({}|{})", even.join(","), odd.join(","))
    }
}

impl fmt::Display for Composition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|x| x.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// An `(m+n) x (m+n)` matrix of natural numbers.
///
/// Matrices with an entry `>= 2` in a mixed block are representable so that
/// formulas can produce and then discard them; see [`SuperMatrix::is_valid`].
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SuperMatrix {
    shape: SuperShape,
    entries: Vec<u32>,
}

impl SuperMatrix {
    pub fn zero(shape: SuperShape) -> Self {
        let d = shape.dim();
        Self {
            shape,
            entries: vec![0; d * d],
        }
    }

    pub fn from_rows(shape: SuperShape, rows: &[Vec<u32>]) -> Result<Self, MatrixError> {
        let d = shape.dim();
        if rows.len() != d || rows.iter().any(|r| r.len() != d) {
            return Err(MatrixError::BadDimensions {
                expected: d,
                rows: rows.len(),
            });
        }
        Ok(Self {
            shape,
            entries: rows.iter().flatten().copied().collect(),
        })
    }

    /// The matrix unit `E_{i,j}`.
    pub fn unit(shape: SuperShape, i: usize, j: usize) -> Self {
        let mut a = Self::zero(shape);
        a.set(i, j, 1);
        a
    }

    pub fn diag(shape: SuperShape, lambda: &Composition) -> Self {
        let mut a = Self::zero(shape);
        for i in 1..=shape.dim() {
            a.set(i, i, lambda.at(i));
        }
        a
    }

    pub fn shape(&self) -> SuperShape {
        self.shape
    }

    pub fn dim(&self) -> usize {
        self.shape.dim()
    }

    /// Entry `a_{i,j}` with 1-based indices.
    #[inline]
    pub fn at(&self, i: usize, j: usize) -> u32 {
        self.entries[(i - 1) * self.dim() + (j - 1)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: u32) {
        let d = self.dim();
        self.entries[(i - 1) * d + (j - 1)] = value;
    }

    /// Adds `delta` to `a_{i,j}`; `None` if the entry would become negative.
    pub fn with_added(&self, i: usize, j: usize, delta: i64) -> Option<Self> {
        let v = self.at(i, j) as i64 + delta;
        if v < 0 {
            return None;
        }
        let mut out = self.clone();
        out.set(i, j, v as u32);
        Some(out)
    }

    pub fn plus(&self, other: &SuperMatrix) -> SuperMatrix {
        let mut out = self.clone();
        for (x, y) in out.entries.iter_mut().zip(&other.entries) {
            *x += y;
        }
        out
    }

    pub fn rows(&self) -> Vec<Vec<u32>> {
        self.entries
            .chunks(self.dim())
            .map(|r| r.to_vec())
            .collect()
    }

    pub fn entries(&self) -> &[u32] {
        &self.entries
    }

    /// Iterator over nonzero entries `((i,j), a_{i,j})`, 1-based, row-major.
    pub fn nonzero(&self) -> impl Iterator<Item = ((usize, usize), u32)> + '_ {
        let d = self.dim();
        self.entries
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0)
            .map(move |(k, v)| ((k / d + 1, k % d + 1), *v))
    }

    /// Mixed-block entries are at most 1.
    pub fn is_valid(&self) -> bool {
        let d = self.dim();
        (1..=d).all(|i| (1..=d).all(|j| !self.shape.is_mixed(i, j) || self.at(i, j) <= 1))
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|v| *v == 0)
    }

    pub fn is_diagonal(&self) -> bool {
        self.nonzero().all(|((i, j), _)| i == j)
    }

    pub fn is_strictly_upper(&self) -> bool {
        self.nonzero().all(|((i, j), _)| i < j)
    }

    pub fn is_strictly_lower(&self) -> bool {
        self.nonzero().all(|((i, j), _)| i > j)
    }

    pub fn has_zero_diagonal(&self) -> bool {
        self.nonzero().all(|((i, j), _)| i != j)
    }

    pub fn transpose(&self) -> SuperMatrix {
        let d = self.dim();
        let mut out = Self::zero(self.shape);
        for i in 1..=d {
            for j in 1..=d {
                out.set(j, i, self.at(i, j));
            }
        }
        out
    }

    /// Strictly upper part `A^+`.
    pub fn upper_part(&self) -> SuperMatrix {
        self.filtered(|i, j| i < j)
    }

    /// Strictly lower part `A^-`.
    pub fn lower_part(&self) -> SuperMatrix {
        self.filtered(|i, j| i > j)
    }

    /// The matrix with its diagonal cleared.
    pub fn off_diagonal(&self) -> SuperMatrix {
        self.filtered(|i, j| i != j)
    }

    pub fn diagonal(&self) -> Composition {
        Composition((1..=self.dim()).map(|i| self.at(i, i)).collect())
    }

    fn filtered(&self, keep: impl Fn(usize, usize) -> bool) -> SuperMatrix {
        let mut out = Self::zero(self.shape);
        for ((i, j), v) in self.nonzero() {
            if keep(i, j) {
                out.set(i, j, v);
            }
        }
        out
    }

    pub fn ro(&self) -> Composition {
        Composition(
            self.entries
                .chunks(self.dim())
                .map(|r| r.iter().sum())
                .collect(),
        )
    }

    pub fn co(&self) -> Composition {
        let d = self.dim();
        Composition(
            (1..=d)
                .map(|j| (1..=d).map(|i| self.at(i, j)).sum())
                .collect(),
        )
    }

    /// Entry sum `|A|`.
    pub fn size(&self) -> u32 {
        self.entries.iter().sum()
    }

    /// `‖A‖ = Σ_{i<j} (j-i)(j-i+1)/2 (a_{i,j} + a_{j,i})`.
    pub fn norm(&self) -> u64 {
        let d = self.dim();
        let mut total = 0u64;
        for i in 1..=d {
            for j in i + 1..=d {
                let w = ((j - i) * (j - i + 1) / 2) as u64;
                total += w * (self.at(i, j) + self.at(j, i)) as u64;
            }
        }
        total
    }

    /// The degree `Σ a_{i,j} (e_i - e_j)`.
    pub fn weight(&self) -> Vec<i64> {
        let mut w = vec![0i64; self.dim()];
        for ((i, j), v) in self.nonzero() {
            w[i - 1] += v as i64;
            w[j - 1] -= v as i64;
        }
        w
    }

    pub fn corner_sums(&self) -> CornerSums {
        CornerSums::new(self)
    }

    /// Row `i` as a composition.
    pub fn row(&self, i: usize) -> Composition {
        Composition((1..=self.dim()).map(|j| self.at(i, j)).collect())
    }

    /// Compact text form, e.g. `2E[1,2]+E[1,3]`; the zero matrix prints as `0`.
    pub fn to_text(&self) -> String {
        let terms: Vec<String> = self
            .nonzero()
            .map(|((i, j), v)| {
                if v == 1 {
                    format!("E[{i},{j}]")
                } else {
                    format!("{v}E[{i},{j}]")
                }
            })
            .collect();
        if terms.is_empty() {
            "0".to_string()
        } else {
            terms.join("+")
        }
    }

    /// LaTeX `pmatrix` of the full matrix.
    pub fn to_latex(&self) -> String {
        let rows: Vec<String> = self
            .rows()
            .iter()
            .map(|r| {
                r.iter()
                    .map(|v| v.to_string())
                    .collect::<Vec<_>>()
                    .join(" & ")
            })
            .collect();
        format!("\\begin{{pmatrix}}{}\\end{{pmatrix}}", rows.join(" \\\\ "))
    }

    /// Parses the text form `aE[1,2]+E[1,3]+fE[3,4]`.
    ///
    /// A term coefficient is either a decimal integer or a name looked up in
    /// `subs`; `0` or an empty string denotes the zero matrix. Repeated
    /// positions accumulate.
    pub fn parse_text(
        shape: SuperShape,
        text: &str,
        subs: &BTreeMap<String, u32>,
    ) -> Result<SuperMatrix, MatrixError> {
        let mut out = Self::zero(shape);
        let cleaned: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        if cleaned.is_empty() || cleaned == "0" {
            return Ok(out);
        }
        for term in cleaned.split('+') {
            let err = |reason: &str| MatrixError::Parse {
                term: term.to_string(),
                reason: reason.to_string(),
            };
            let pos = term.find("E[").ok_or_else(|| err("missing E[i,j]"))?;
            let (coef, rest) = term.split_at(pos);
            let coef = coef.trim_end_matches('*');
            let value: u32 = if coef.is_empty() {
                1
            } else if let Ok(v) = coef.parse() {
                v
            } else {
                *subs
                    .get(coef)
                    .ok_or_else(|| err(&format!("no value given for '{coef}'")))?
            };
            let inner = rest
                .strip_prefix("E[")
                .and_then(|s| s.strip_suffix(']'))
                .ok_or_else(|| err("malformed index bracket"))?;
            let (i, j) = inner
                .split_once(',')
                .ok_or_else(|| err("expected two indices"))?;
            let i: usize = i.parse().map_err(|_| err("bad row index"))?;
            let j: usize = j.parse().map_err(|_| err("bad column index"))?;
            if i == 0 || j == 0 || i > shape.dim() || j > shape.dim() {
                return Err(MatrixError::IndexOutOfRange(i, j, shape));
            }
            let cur = out.at(i, j);
            out.set(i, j, cur + value);
        }
        Ok(out)
    }
}

impl fmt::Display for SuperMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_text())
    }
}

impl fmt::Debug for SuperMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.shape, self.to_text())
    }
}

#[derive(Serialize, Deserialize)]
struct MatrixJson {
    m: usize,
    n: usize,
    rows: Vec<Vec<u32>>,
}

impl Serialize for SuperMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        MatrixJson {
            m: self.shape.m,
            n: self.shape.n,
            rows: self.rows(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for SuperMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = MatrixJson::deserialize(deserializer)?;
        let shape = SuperShape::new(raw.m, raw.n).map_err(serde::de::Error::custom)?;
        SuperMatrix::from_rows(shape, &raw.rows).map_err(serde::de::Error::custom)
    }
}

/// The two corner-sum tables behind the order `⪯`.
///
/// `upper[s][t] = Σ_{i<=s, j>=t} a_{i,j}` for `s < t` and
/// `lower[s][t] = Σ_{i>=s, j<=t} a_{i,j}` for `s > t` (0-based storage).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CornerSums {
    dim: usize,
    upper: Vec<u64>,
    lower: Vec<u64>,
}

impl CornerSums {
    pub fn new(a: &SuperMatrix) -> Self {
        let d = a.dim();
        let mut upper = vec![0u64; d * d];
        let mut lower = vec![0u64; d * d];
        for s in 1..=d {
            for t in 1..=d {
                if s < t {
                    let mut sum = 0u64;
                    for i in 1..=s {
                        for j in t..=d {
                            sum += a.at(i, j) as u64;
                        }
                    }
                    upper[(s - 1) * d + (t - 1)] = sum;
                } else if s > t {
                    let mut sum = 0u64;
                    for i in s..=d {
                        for j in 1..=t {
                            sum += a.at(i, j) as u64;
                        }
                    }
                    lower[(s - 1) * d + (t - 1)] = sum;
                }
            }
        }
        Self {
            dim: d,
            upper,
            lower,
        }
    }

    /// Every corner sum of `self` is at most the matching one of `other`.
    pub fn le(&self, other: &CornerSums) -> bool {
        self.dim == other.dim
            && self.upper.iter().zip(&other.upper).all(|(a, b)| a <= b)
            && self.lower.iter().zip(&other.lower).all(|(a, b)| a <= b)
    }
}

/// `B ⪯ A`.
pub fn preceq(b: &SuperMatrix, a: &SuperMatrix) -> bool {
    b.shape == a.shape && b.corner_sums().le(&a.corner_sums())
}

/// `B ⪯_rc A`: equal row and column sums and `B ⪯ A`.
pub fn preceq_rc(b: &SuperMatrix, a: &SuperMatrix) -> bool {
    b.ro() == a.ro() && b.co() == a.co() && preceq(b, a)
}

/// Parity of `Σ_{i>m>=k, m<j<l} a_{i,j} a_{k,l}`.
pub fn sign_bar(a: &SuperMatrix) -> u8 {
    let s = a.shape;
    let d = s.dim();
    let mut total = 0u64;
    for i in s.m + 1..=d {
        for j in s.m + 1..=d {
            let x = a.at(i, j) as u64;
            if x == 0 {
                continue;
            }
            for k in 1..=s.m {
                for l in j + 1..=d {
                    total += x * a.at(k, l) as u64;
                }
            }
        }
    }
    (total % 2) as u8
}

/// Parity of `Σ_{m<k<i<=m+n, 1<=j<l<=m+n} a_{i,j} a_{k,l}`.
pub fn sign_hat(a: &SuperMatrix) -> u8 {
    let s = a.shape;
    let d = s.dim();
    let mut total = 0u64;
    for i in s.m + 1..=d {
        for k in s.m + 1..i {
            for j in 1..=d {
                let x = a.at(i, j) as u64;
                if x == 0 {
                    continue;
                }
                for l in j + 1..=d {
                    total += x * a.at(k, l) as u64;
                }
            }
        }
    }
    (total % 2) as u8
}

/// Parity of `Σ_{m<k<i<=m+n, 1<=j<l<=m} a_{i,j} a_{k,l}`, counting the
/// inversions among odd entries below the even block. The generator-level
/// anti-involution exchanging `E_h` and `F_h` sends `A^t(0)` to
/// `(-1)^{odd_inversions(A)} A(0)` for strictly lower `A`.
pub fn odd_inversions(a: &SuperMatrix) -> u8 {
    let s = a.shape;
    let d = s.dim();
    let mut total = 0u64;
    for i in s.m + 1..=d {
        for k in s.m + 1..i {
            for j in 1..=s.m {
                let x = a.at(i, j) as u64;
                if x == 0 {
                    continue;
                }
                for l in j + 1..=s.m {
                    total += x * a.at(k, l) as u64;
                }
            }
        }
    }
    (total % 2) as u8
}

/// Hook sums `h_i(A) = a_{i,i} + Σ_{j>i} (a_{i,j} + a_{j,i})`.
pub fn hooks(a: &SuperMatrix) -> Composition {
    let d = a.dim();
    Composition(
        (1..=d)
            .map(|i| a.at(i, i) + (i + 1..=d).map(|j| a.at(i, j) + a.at(j, i)).sum::<u32>())
            .collect(),
    )
}

/// `A_λ = A + diag(λ - h(A))`.
pub fn a_lambda(a: &SuperMatrix, lambda: &Composition) -> Result<SuperMatrix, MatrixError> {
    if lambda.len() != a.dim() {
        return Err(MatrixError::LengthMismatch {
            got: lambda.len(),
            expected: a.dim(),
        });
    }
    let h = hooks(a);
    let diff = lambda
        .checked_sub(&h)
        .ok_or_else(|| MatrixError::HookExceedsWeight {
            hooks: h.clone(),
            lambda: lambda.clone(),
        })?;
    Ok(a.plus(&SuperMatrix::diag(a.shape, &diff)))
}

/// `σ_A(k) = Σ_{i<=m, j>k} a_{i,j}`.
pub fn stat_sigma(a: &SuperMatrix, k: usize) -> u64 {
    let s = a.shape;
    let mut total = 0u64;
    for i in 1..=s.m {
        for j in k + 1..=s.dim() {
            total += a.at(i, j) as u64;
        }
    }
    total
}

/// `f_A(h,k) = Σ_{j>=k} a_{h,j} - (-1)^{δ_{m,h}} Σ_{j>k} a_{h+1,j}`.
pub fn stat_f_cap(a: &SuperMatrix, h: usize, k: usize) -> i64 {
    let d = a.dim();
    let first: i64 = (k..=d).map(|j| a.at(h, j) as i64).sum();
    let second: i64 = (k + 1..=d).map(|j| a.at(h + 1, j) as i64).sum();
    if h == a.shape.m {
        first + second
    } else {
        first - second
    }
}

fn nu_pair_sum(nu: &Composition) -> i64 {
    let mut total = 0i64;
    let mut prefix = 0i64;
    for x in &nu.0 {
        total += prefix * *x as i64;
        prefix += *x as i64;
    }
    total
}

/// `f_h(ν,A) = Σ_{j>=t} a_{h,j} ν_t - Σ_{j>t} a_{h+1,j} ν_t + Σ_{t<t'} ν_t ν_{t'}`.
pub fn stat_fh(nu: &Composition, a: &SuperMatrix, h: usize) -> i64 {
    let d = a.dim();
    let mut total = nu_pair_sum(nu);
    for t in 1..=d {
        let nt = nu.at(t) as i64;
        if nt == 0 {
            continue;
        }
        let hs: i64 = (t..=d).map(|j| a.at(h, j) as i64).sum();
        let h1: i64 = (t + 1..=d).map(|j| a.at(h + 1, j) as i64).sum();
        total += (hs - h1) * nt;
    }
    total
}

/// `g_h(ν,A) = Σ_{j<=t} a_{h+1,j} ν_t - Σ_{j<t} a_{h,j} ν_t + Σ_{t<t'} ν_t ν_{t'}`.
pub fn stat_gh(nu: &Composition, a: &SuperMatrix, h: usize) -> i64 {
    let d = a.dim();
    let mut total = nu_pair_sum(nu);
    for t in 1..=d {
        let nt = nu.at(t) as i64;
        if nt == 0 {
            continue;
        }
        let h1: i64 = (1..=t).map(|j| a.at(h + 1, j) as i64).sum();
        let hs: i64 = (1..t).map(|j| a.at(h, j) as i64).sum();
        total += (h1 - hs) * nt;
    }
    total
}

/// `f_m(e_k, A) = Σ_{j>=k} a_{m,j} + Σ_{j>k} a_{m+1,j}`.
pub fn stat_fm(k: usize, a: &SuperMatrix) -> u64 {
    let m = a.shape.m;
    let d = a.dim();
    (k..=d).map(|j| a.at(m, j) as u64).sum::<u64>()
        + (k + 1..=d).map(|j| a.at(m + 1, j) as u64).sum::<u64>()
}

/// `g_m(e_k, A) = Σ_{j<=k} a_{m+1,j} + Σ_{j<k} a_{m,j}`.
pub fn stat_gm(k: usize, a: &SuperMatrix) -> u64 {
    let m = a.shape.m;
    (1..=k).map(|j| a.at(m + 1, j) as u64).sum::<u64>()
        + (1..k).map(|j| a.at(m, j) as u64).sum::<u64>()
}

/// All compositions of `p` with `m+n` parts, optionally bounded componentwise,
/// in decreasing lexicographic order.
pub fn enumerate_compositions(
    shape: SuperShape,
    p: u32,
    bound: Option<&Composition>,
) -> Vec<Composition> {
    fn rec(
        pos: usize,
        left: u32,
        cur: &mut Vec<u32>,
        bound: Option<&Composition>,
        out: &mut Vec<Composition>,
    ) {
        let len = cur.capacity();
        if pos + 1 == len {
            if bound.is_none_or(|b| left <= b.0[pos]) {
                cur.push(left);
                out.push(Composition(cur.clone()));
                cur.pop();
            }
            return;
        }
        let cap = bound.map_or(left, |b| b.0[pos].min(left));
        for x in (0..=cap).rev() {
            cur.push(x);
            rec(pos + 1, left - x, cur, bound, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(shape.dim());
    rec(0, p, &mut cur, bound, &mut out);
    out
}

/// All valid matrices of the given shape with entry sum `r`.
pub fn enumerate_level(shape: SuperShape, r: u32) -> Vec<SuperMatrix> {
    let d = shape.dim();
    let mut out = Vec::new();
    let mut cur = SuperMatrix::zero(shape);
    fn rec(
        pos: usize,
        left: u32,
        d: usize,
        shape: SuperShape,
        cur: &mut SuperMatrix,
        out: &mut Vec<SuperMatrix>,
    ) {
        if pos == d * d {
            if left == 0 {
                out.push(cur.clone());
            }
            return;
        }
        let (i, j) = (pos / d + 1, pos % d + 1);
        let cap = if shape.is_mixed(i, j) {
            left.min(1)
        } else {
            left
        };
        for x in 0..=cap {
            cur.set(i, j, x);
            rec(pos + 1, left - x, d, shape, cur, out);
        }
        cur.set(i, j, 0);
    }
    rec(0, r, d, shape, &mut cur, &mut out);
    out
}

/// All valid strictly upper matrices whose entries respect `cap(i,j)`,
/// optionally with `‖A‖ <= norm_max`.
pub fn enumerate_upper(
    shape: SuperShape,
    cap: impl Fn(usize, usize) -> u32,
    norm_max: Option<u64>,
) -> Vec<SuperMatrix> {
    let d = shape.dim();
    let positions: Vec<(usize, usize)> = (1..=d)
        .flat_map(|i| (i + 1..=d).map(move |j| (i, j)))
        .collect();
    let mut out = Vec::new();
    let mut cur = SuperMatrix::zero(shape);
    #[allow(clippy::too_many_arguments)]
    fn rec(
        idx: usize,
        positions: &[(usize, usize)],
        shape: SuperShape,
        cap: &dyn Fn(usize, usize) -> u32,
        norm_left: Option<u64>,
        cur: &mut SuperMatrix,
        out: &mut Vec<SuperMatrix>,
    ) {
        if idx == positions.len() {
            out.push(cur.clone());
            return;
        }
        let (i, j) = positions[idx];
        let w = ((j - i) * (j - i + 1) / 2) as u64;
        let mut hi = cap(i, j);
        if shape.is_mixed(i, j) {
            hi = hi.min(1);
        }
        if let Some(left) = norm_left {
            hi = hi.min((left / w) as u32);
        }
        for x in 0..=hi {
            cur.set(i, j, x);
            rec(
                idx + 1,
                positions,
                shape,
                cap,
                norm_left.map(|l| l - w * x as u64),
                cur,
                out,
            );
        }
        cur.set(i, j, 0);
    }
    rec(0, &positions, shape, &cap, norm_max, &mut cur, &mut out);
    out
}
