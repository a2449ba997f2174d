//! The positive part `U^+` of the quantum supergroup, realized on the basis
//! `{A(0)}` of strictly upper triangular super matrices, and its mirror `U^-`
//! on strictly lower matrices via the transpose anti-involution.
//!
//! Generators act through stabilized multiplication formulas; everything
//! else (monomial basis, bar involution, canonical basis, root vectors and
//! PBW products) is built on top of that single primitive.

use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex, RwLock};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::laurent::{
    antisym_solve, bar_symmetric_part, gauss_int, qq_binom, sym_factorial, y_decompose,
    LaurentError, LaurentPolynomial,
};
use crate::matrices::{
    enumerate_compositions, enumerate_upper, odd_inversions, preceq, stat_f_cap, stat_fh,
    stat_sigma, SuperMatrix, SuperShape,
};

/// `(-1)^{odd_inversions(B)}` for the strictly lower member `B` of the pair `{A, A^t}`.
fn transpose_sign(a: &SuperMatrix) -> i64 {
    let lower = if a.is_strictly_lower() {
        a.clone()
    } else {
        a.transpose()
    };
    if odd_inversions(&lower) == 1 {
        -1
    } else {
        1
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum UplusError {
    #[error("generator index {h} out of range for shape {shape}")]
    IndexOutOfRange { h: usize, shape: SuperShape },
    #[error("divided power exponent must be positive")]
    ZeroPower,
    #[error("matrix {0:?} violates the mixed-block 0/1 constraint")]
    InvalidMatrix(SuperMatrix),
    #[error("matrix {0:?} is not strictly triangular on the {1} side")]
    WrongSide(SuperMatrix, Side),
    #[error("odd root vector E[{a},{b}] has no divided power of order {p}")]
    OddDividedPower { a: usize, b: usize, p: u32 },
    #[error("root vector indices ({a},{b},{c}) are not admissible for shape {shape}")]
    BadRootIndices {
        a: usize,
        b: usize,
        c: usize,
        shape: SuperShape,
    },
    #[error("element is not weight-homogeneous")]
    NonHomogeneous,
    #[error("operands differ in shape or side")]
    Mismatch,
    #[error("monomial of {0:?} is not unitriangular")]
    NotUnitriangular(SuperMatrix),
    #[error("bar matrix is not triangular at {lower:?} under {upper:?}")]
    BarNotTriangular {
        lower: SuperMatrix,
        upper: SuperMatrix,
    },
    #[error(transparent)]
    Laurent(#[from] LaurentError),
}

/// Which half of the quantum supergroup an element lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Plus,
    Minus,
}

impl Side {
    pub fn admits(self, a: &SuperMatrix) -> bool {
        match self {
            Side::Plus => a.is_strictly_upper(),
            Side::Minus => a.is_strictly_lower(),
        }
    }

    pub fn opposite(self) -> Side {
        match self {
            Side::Plus => Side::Minus,
            Side::Minus => Side::Plus,
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Side::Plus => write!(f, "plus"),
            Side::Minus => write!(f, "minus"),
        }
    }
}

/// A single `(matrix, coefficient)` pair of the JSON term encoding.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Term {
    pub matrix: SuperMatrix,
    pub coefficient: LaurentPolynomial,
}

/// Serde adapter writing a matrix-keyed map as a list of [`Term`]s.
pub mod term_list {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(
        map: &BTreeMap<SuperMatrix, LaurentPolynomial>,
        serializer: S,
    ) -> Result<S::Ok, S::Error> {
        let terms: Vec<Term> = map
            .iter()
            .map(|(m, c)| Term {
                matrix: m.clone(),
                coefficient: c.clone(),
            })
            .collect();
        terms.serialize(serializer)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        deserializer: D,
    ) -> Result<BTreeMap<SuperMatrix, LaurentPolynomial>, D::Error> {
        let terms = Vec::<Term>::deserialize(deserializer)?;
        let mut map = BTreeMap::new();
        for t in terms {
            if !t.coefficient.is_zero() {
                map.insert(t.matrix, t.coefficient);
            }
        }
        Ok(map)
    }
}

/// Serde adapter for an optional matrix-keyed map.
pub mod opt_term_list {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(
        map: &Option<BTreeMap<SuperMatrix, LaurentPolynomial>>,
        serializer: S,
    ) -> Result<S::Ok, S::Error> {
        match map {
            Some(m) => {
                let terms: Vec<Term> = m
                    .iter()
                    .map(|(k, c)| Term {
                        matrix: k.clone(),
                        coefficient: c.clone(),
                    })
                    .collect();
                serializer.serialize_some(&terms)
            }
            None => serializer.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        deserializer: D,
    ) -> Result<Option<BTreeMap<SuperMatrix, LaurentPolynomial>>, D::Error> {
        let terms = Option::<Vec<Term>>::deserialize(deserializer)?;
        Ok(terms.map(|ts| {
            ts.into_iter()
                .filter(|t| !t.coefficient.is_zero())
                .map(|t| (t.matrix, t.coefficient))
                .collect()
        }))
    }
}

/// A finite `Z[v,v^-1]`-combination of symbols `A(0)`.
#[derive(Clone, PartialEq, Eq)]
pub struct AlgebraElement {
    shape: SuperShape,
    side: Side,
    terms: BTreeMap<SuperMatrix, LaurentPolynomial>,
}

impl AlgebraElement {
    pub fn zero(shape: SuperShape, side: Side) -> Self {
        Self {
            shape,
            side,
            terms: BTreeMap::new(),
        }
    }

    /// The unit `0(0)`.
    pub fn identity(shape: SuperShape, side: Side) -> Self {
        let mut x = Self::zero(shape, side);
        x.terms
            .insert(SuperMatrix::zero(shape), LaurentPolynomial::one());
        x
    }

    /// The basis symbol `A(0)`, with the side read off from `A`.
    pub fn basis(a: &SuperMatrix) -> Result<Self, UplusError> {
        let side = if a.is_strictly_upper() {
            Side::Plus
        } else if a.is_strictly_lower() {
            Side::Minus
        } else {
            return Err(UplusError::WrongSide(a.clone(), Side::Plus));
        };
        Self::basis_on(a, side)
    }

    pub fn basis_on(a: &SuperMatrix, side: Side) -> Result<Self, UplusError> {
        if !a.is_valid() {
            return Err(UplusError::InvalidMatrix(a.clone()));
        }
        if !side.admits(a) {
            return Err(UplusError::WrongSide(a.clone(), side));
        }
        let mut x = Self::zero(a.shape(), side);
        x.terms.insert(a.clone(), LaurentPolynomial::one());
        Ok(x)
    }

    pub fn from_terms(
        shape: SuperShape,
        side: Side,
        terms: impl IntoIterator<Item = (SuperMatrix, LaurentPolynomial)>,
    ) -> Result<Self, UplusError> {
        let mut x = Self::zero(shape, side);
        for (a, c) in terms {
            if !a.is_valid() {
                return Err(UplusError::InvalidMatrix(a));
            }
            if a.shape() != shape || !side.admits(&a) {
                return Err(UplusError::WrongSide(a, side));
            }
            x.add_term(a, &c);
        }
        Ok(x)
    }

    pub fn shape(&self) -> SuperShape {
        self.shape
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn terms(&self) -> &BTreeMap<SuperMatrix, LaurentPolynomial> {
        &self.terms
    }

    pub fn into_terms(self) -> BTreeMap<SuperMatrix, LaurentPolynomial> {
        self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, a: &SuperMatrix) -> LaurentPolynomial {
        self.terms.get(a).cloned().unwrap_or_default()
    }

    pub fn add_term(&mut self, a: SuperMatrix, c: &LaurentPolynomial) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(a) {
            Entry::Vacant(v) => {
                v.insert(c.clone());
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    /// `self += c * other`.
    pub fn add_scaled(&mut self, other: &AlgebraElement, c: &LaurentPolynomial) {
        if c.is_zero() {
            return;
        }
        for (a, x) in &other.terms {
            self.add_term(a.clone(), &(x * c));
        }
    }

    pub fn scaled(&self, c: &LaurentPolynomial) -> AlgebraElement {
        let mut out = Self::zero(self.shape, self.side);
        out.add_scaled(self, c);
        out
    }

    pub fn plus(&self, other: &AlgebraElement) -> AlgebraElement {
        let mut out = self.clone();
        out.add_scaled(other, &LaurentPolynomial::one());
        out
    }

    pub fn minus(&self, other: &AlgebraElement) -> AlgebraElement {
        let mut out = self.clone();
        out.add_scaled(other, &LaurentPolynomial::constant(-1));
        out
    }

    /// Applies `v -> v^-1` to every coefficient (not the bar involution of the algebra).
    pub fn bar_coefficients(&self) -> AlgebraElement {
        AlgebraElement {
            shape: self.shape,
            side: self.side,
            terms: self
                .terms
                .iter()
                .map(|(a, c)| (a.clone(), c.bar()))
                .collect(),
        }
    }

    /// The anti-involution exchanging `E_h` and `F_h`, swapping the side.
    ///
    /// It sends `A(0)` to `(-1)^{odd_inversions(B)} A^t(0)`, where `B` is whichever of
    /// `A`, `A^t` is strictly lower.
    pub fn tau_transpose(&self) -> AlgebraElement {
        AlgebraElement {
            shape: self.shape,
            side: self.side.opposite(),
            terms: self
                .terms
                .iter()
                .map(|(a, c)| (a.transpose(), c.scale(transpose_sign(a))))
                .collect(),
        }
    }

    /// The common degree `Σ a_{i,j}(e_i - e_j)` of all terms.
    pub fn weight(&self) -> Result<Vec<i64>, UplusError> {
        let mut it = self.terms.keys();
        let first = match it.next() {
            Some(a) => a.weight(),
            None => return Ok(vec![0; self.shape.dim()]),
        };
        if it.all(|a| a.weight() == first) {
            Ok(first)
        } else {
            Err(UplusError::NonHomogeneous)
        }
    }

    pub fn to_term_list(&self) -> Vec<Term> {
        self.terms
            .iter()
            .map(|(m, c)| Term {
                matrix: m.clone(),
                coefficient: c.clone(),
            })
            .collect()
    }

    pub fn to_latex(&self) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .rev()
            .map(|(a, c)| {
                let coeff = if c.is_one() {
                    String::new()
                } else if c.len() == 1 {
                    c.to_latex()
                } else {
                    format!("({})", c.to_latex())
                };
                format!("{coeff}{}", a.to_latex())
            })
            .collect();
        parts.join(" + ")
    }
}

impl fmt::Debug for AlgebraElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for AlgebraElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(a, c)| format!("({c})*[{a}]"))
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl Serialize for AlgebraElement {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.to_term_list().serialize(serializer)
    }
}

/// One factor `(p E_{h,h+1})(0)` of a monomial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WordFactor {
    pub h: usize,
    pub p: u32,
}

/// An ordered product of divided powers of simple generators.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MonomialWord {
    pub shape: SuperShape,
    /// Left-to-right product order.
    pub factors: Vec<WordFactor>,
}

impl fmt::Display for MonomialWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return write!(f, "1");
        }
        for fac in &self.factors {
            if fac.p == 1 {
                write!(f, "E{}", fac.h)?;
            } else {
                write!(f, "E{}^({})", fac.h, fac.p)?;
            }
        }
        Ok(())
    }
}

/// A formula term whose matrix broke the mixed-block constraint and was
/// therefore discarded.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DroppedTerm {
    pub source: SuperMatrix,
    pub h: usize,
    pub p: u32,
    pub result: SuperMatrix,
    pub coefficient: LaurentPolynomial,
}

fn check_generator(shape: SuperShape, h: usize, p: u32) -> Result<(), UplusError> {
    if h == 0 || h >= shape.dim() {
        return Err(UplusError::IndexOutOfRange { h, shape });
    }
    if p == 0 {
        return Err(UplusError::ZeroPower);
    }
    Ok(())
}

/// `v_h^e` as a Laurent monomial.
fn vh_pow(shape: SuperShape, h: usize, e: i64) -> LaurentPolynomial {
    LaurentPolynomial::v(shape.vsign(h) * e)
}

/// Raw terms of `E_{h,h+1}(0) A(0)` for strictly upper `A`, before the
/// validity filter.
pub fn generator_terms(h: usize, a: &SuperMatrix) -> Vec<(SuperMatrix, LaurentPolynomial)> {
    let shape = a.shape();
    let d = shape.dim();
    let step = 2 * shape.vsign(h);
    let odd = h == shape.m;
    let sign = |k: usize| -> i64 {
        if odd && stat_sigma(a, k) % 2 == 1 {
            -1
        } else {
            1
        }
    };
    let mut out = Vec::new();
    let c = &vh_pow(shape, h, stat_f_cap(a, h, h + 1)) * &gauss_int(a.at(h, h + 1) + 1, step).bar();
    let mut b = a.clone();
    b.set(h, h + 1, a.at(h, h + 1) + 1);
    out.push((b, c.scale(sign(h + 1))));
    for k in h + 2..=d {
        if a.at(h + 1, k) == 0 {
            continue;
        }
        let c = &vh_pow(shape, h, stat_f_cap(a, h, k)) * &gauss_int(a.at(h, k) + 1, step).bar();
        let mut b = a.clone();
        b.set(h, k, a.at(h, k) + 1);
        b.set(h + 1, k, a.at(h + 1, k) - 1);
        out.push((b, c.scale(sign(k))));
    }
    out
}

/// Raw terms of `(p E_{h,h+1})(0) A(0)` for an even generator (`h != m`),
/// summed over compositions `ν` of `p`, before the validity filter.
pub fn divided_power_terms(
    h: usize,
    p: u32,
    a: &SuperMatrix,
) -> Vec<(SuperMatrix, LaurentPolynomial)> {
    let shape = a.shape();
    let d = shape.dim();
    let step = 2 * shape.vsign(h);
    let mut bound = a.row(h + 1);
    bound.0[h] = p;
    let mut out = Vec::new();
    for nu in enumerate_compositions(shape, p, Some(&bound)) {
        let mut c = vh_pow(shape, h, stat_fh(&nu, a, h));
        for k in 1..=d {
            let nk = nu.at(k);
            if nk > 0 {
                c = &c * &qq_binom(a.at(h, k) + nk, nk, step).bar();
            }
        }
        let mut b = a.clone();
        for l in 1..=d {
            let nl = nu.at(l);
            if nl == 0 {
                continue;
            }
            b.set(h, l, b.at(h, l) + nl);
            if l != h + 1 {
                b.set(h + 1, l, b.at(h + 1, l) - nl);
            }
        }
        out.push((b, c));
    }
    out
}

/// Left multiplication by the divided power `(p E_{h,h+1})(0)` on `U^+`,
/// recording every discarded invalid term into `log`.
pub fn left_mult_divided_e_logged(
    h: usize,
    p: u32,
    x: &AlgebraElement,
    log: &mut Vec<DroppedTerm>,
) -> Result<AlgebraElement, UplusError> {
    let shape = x.shape;
    check_generator(shape, h, p)?;
    if x.side != Side::Plus {
        return Err(UplusError::Mismatch);
    }
    let mut out = AlgebraElement::zero(shape, Side::Plus);
    if h == shape.m && p >= 2 {
        return Ok(out);
    }
    for (a, c) in &x.terms {
        let raw = if p == 1 {
            generator_terms(h, a)
        } else {
            divided_power_terms(h, p, a)
        };
        for (b, coeff) in raw {
            if !b.is_valid() {
                log.push(DroppedTerm {
                    source: a.clone(),
                    h,
                    p,
                    result: b,
                    coefficient: coeff,
                });
                continue;
            }
            out.add_term(b, &(c * &coeff));
        }
    }
    Ok(out)
}

/// Left multiplication by the divided power `(p E_{h,h+1})(0)` on `U^+`.
pub fn left_mult_divided_e(
    h: usize,
    p: u32,
    x: &AlgebraElement,
) -> Result<AlgebraElement, UplusError> {
    left_mult_divided_e_logged(h, p, x, &mut Vec::new())
}

/// Positions `(i,j)`, `i < j`, in increasing `<_3` order: decreasing `j`,
/// then decreasing `i`.
pub fn order3_positions(shape: SuperShape) -> Vec<(usize, usize)> {
    let d = shape.dim();
    let mut out = Vec::new();
    for j in (2..=d).rev() {
        for i in (1..j).rev() {
            out.push((i, j));
        }
    }
    out
}

/// The monomial word whose product is `A(0)` plus lower terms.
pub fn monomial_word(a: &SuperMatrix) -> MonomialWord {
    let shape = a.shape();
    let mut factors = Vec::new();
    for (i, j) in order3_positions(shape) {
        let v = a.at(i, j);
        if v == 0 {
            continue;
        }
        for h in i..j {
            factors.push(WordFactor { h, p: v });
        }
    }
    MonomialWord { shape, factors }
}

/// Applies the word to `x`, rightmost factor first.
pub fn apply_word(w: &MonomialWord, x: &AlgebraElement) -> Result<AlgebraElement, UplusError> {
    apply_word_logged(w, x, &mut Vec::new())
}

fn apply_word_logged(
    w: &MonomialWord,
    x: &AlgebraElement,
    log: &mut Vec<DroppedTerm>,
) -> Result<AlgebraElement, UplusError> {
    let mut cur = x.clone();
    for f in w.factors.iter().rev() {
        cur = left_mult_divided_e_logged(f.h, f.p, &cur, log)?;
    }
    Ok(cur)
}

/// The product of the word's factors as an element of `U^+`.
pub fn eval_word(w: &MonomialWord) -> Result<AlgebraElement, UplusError> {
    apply_word(w, &AlgebraElement::identity(w.shape, Side::Plus))
}

/// The canonical basis element `C_A` with its coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CanonicalRecord {
    pub target: SuperMatrix,
    /// The coefficients `p_{B,A}` of `C_A = Σ_B p_{B,A} B(0)`.
    #[serde(with = "term_list")]
    pub expansion: BTreeMap<SuperMatrix, LaurentPolynomial>,
    /// Bar-invariant `w_B` with `C_A = m_A - Σ_B w_B m_B`.
    #[serde(with = "opt_term_list", default)]
    pub witness: Option<BTreeMap<SuperMatrix, LaurentPolynomial>>,
}

impl CanonicalRecord {
    pub fn element(&self, side: Side) -> AlgebraElement {
        AlgebraElement {
            shape: self.target.shape(),
            side,
            terms: self.expansion.clone(),
        }
    }

    /// The record of the image under the anti-involution, rescaled so the
    /// target again has coefficient one.
    pub fn transposed(&self) -> CanonicalRecord {
        let lead = transpose_sign(&self.target);
        let tr = |m: &BTreeMap<SuperMatrix, LaurentPolynomial>| {
            m.iter()
                .map(|(a, c)| (a.transpose(), c.scale(lead * transpose_sign(a))))
                .collect()
        };
        CanonicalRecord {
            target: self.target.transpose(),
            expansion: tr(&self.expansion),
            witness: self.witness.as_ref().map(tr),
        }
    }
}

/// Output of the layered elimination algorithm.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DuRecord {
    pub record: CanonicalRecord,
    /// Matrices whose subtracted multiplier had an odd constant term, so it is
    /// bar-invariant but not of the form `h + bar(h)` with `h` in `Z[v]`.
    pub strict_y_failures: Vec<SuperMatrix>,
}

/// The closure of `A` under taking supports of monomials, with the
/// unitriangular transition matrix `m_B = Σ_C T[C,B] C(0)`.
#[derive(Debug, Clone)]
pub struct TransitionClosure {
    /// Sorted by decreasing `‖·‖`, ties by decreasing entries; the target comes first.
    pub basis: Vec<SuperMatrix>,
    index: HashMap<SuperMatrix, usize>,
    /// `columns[b][c] = T[c, b]`.
    pub columns: Vec<BTreeMap<usize, LaurentPolynomial>>,
}

impl TransitionClosure {
    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn index_of(&self, a: &SuperMatrix) -> Option<usize> {
        self.index.get(a).copied()
    }

    /// `T[c, b]`.
    pub fn entry(&self, c: usize, b: usize) -> LaurentPolynomial {
        self.columns[b].get(&c).cloned().unwrap_or_default()
    }
}

fn processing_key(a: &SuperMatrix) -> (std::cmp::Reverse<u64>, std::cmp::Reverse<Vec<u32>>) {
    (
        std::cmp::Reverse(a.norm()),
        std::cmp::Reverse(a.entries().to_vec()),
    )
}

/// Counters for terms discarded by the validity filter.
#[derive(Debug, Clone, Default)]
pub struct DropStats {
    pub count: u64,
    pub samples: Vec<DroppedTerm>,
}

const DROP_SAMPLES: usize = 64;

/// Generator-action engine for one shape, with memo tables for monomials and
/// canonical records.
///
/// The memo tables only ever grow; concurrent callers may compute the same
/// entry twice, which is harmless because results are deterministic.
pub struct UPlus {
    shape: SuperShape,
    monomials: RwLock<HashMap<SuperMatrix, Arc<AlgebraElement>>>,
    canonicals: RwLock<HashMap<SuperMatrix, Arc<CanonicalRecord>>>,
    dropped: Mutex<DropStats>,
}

impl fmt::Debug for UPlus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("UPlus").field("shape", &self.shape).finish()
    }
}

impl UPlus {
    pub fn new(shape: SuperShape) -> Self {
        Self {
            shape,
            monomials: RwLock::new(HashMap::new()),
            canonicals: RwLock::new(HashMap::new()),
            dropped: Mutex::new(DropStats::default()),
        }
    }

    pub fn shape(&self) -> SuperShape {
        self.shape
    }

    pub fn drop_stats(&self) -> DropStats {
        self.dropped.lock().expect("drop log poisoned").clone()
    }

    fn record_drops(&self, log: Vec<DroppedTerm>) {
        if log.is_empty() {
            return;
        }
        let mut stats = self.dropped.lock().expect("drop log poisoned");
        stats.count += log.len() as u64;
        for d in log {
            if stats.samples.len() >= DROP_SAMPLES {
                break;
            }
            if !stats.samples.contains(&d) {
                stats.samples.push(d);
            }
        }
    }

    fn check_upper(&self, a: &SuperMatrix) -> Result<(), UplusError> {
        if a.shape() != self.shape {
            return Err(UplusError::Mismatch);
        }
        if !a.is_valid() {
            return Err(UplusError::InvalidMatrix(a.clone()));
        }
        if !a.is_strictly_upper() {
            return Err(UplusError::WrongSide(a.clone(), Side::Plus));
        }
        Ok(())
    }

    /// Generator action with drop logging into this engine.
    pub fn left_mult_divided_e(
        &self,
        h: usize,
        p: u32,
        x: &AlgebraElement,
    ) -> Result<AlgebraElement, UplusError> {
        let mut log = Vec::new();
        let out = left_mult_divided_e_logged(h, p, x, &mut log)?;
        self.record_drops(log);
        Ok(out)
    }

    pub fn apply_word(
        &self,
        w: &MonomialWord,
        x: &AlgebraElement,
    ) -> Result<AlgebraElement, UplusError> {
        let mut log = Vec::new();
        let out = apply_word_logged(w, x, &mut log)?;
        self.record_drops(log);
        Ok(out)
    }

    /// The monomial `m_A = eval_word(monomial_word(A))`, memoized.
    pub fn monomial(&self, a: &SuperMatrix) -> Result<Arc<AlgebraElement>, UplusError> {
        if let Some(m) = self.monomials.read().expect("memo poisoned").get(a) {
            return Ok(m.clone());
        }
        self.check_upper(a)?;
        let word = monomial_word(a);
        let m = self.apply_word(&word, &AlgebraElement::identity(self.shape, Side::Plus))?;
        if m.coeff(a) != LaurentPolynomial::one()
            || m.terms.keys().any(|b| b != a && b.norm() >= a.norm())
        {
            return Err(UplusError::NotUnitriangular(a.clone()));
        }
        let m = Arc::new(m);
        self.monomials
            .write()
            .expect("memo poisoned")
            .insert(a.clone(), m.clone());
        Ok(m)
    }

    /// Coordinates of a `U^+` element in the monomial basis.
    pub fn to_monomial_coords(
        &self,
        x: &AlgebraElement,
    ) -> Result<BTreeMap<SuperMatrix, LaurentPolynomial>, UplusError> {
        if x.shape != self.shape || x.side != Side::Plus {
            return Err(UplusError::Mismatch);
        }
        let mut rem = x.terms.clone();
        let mut coords = BTreeMap::new();
        while let Some(top) = rem.keys().min_by_key(|a| processing_key(a)).cloned() {
            let c = rem[&top].clone();
            let m = self.monomial(&top)?;
            for (b, g) in &m.terms {
                let entry = rem.entry(b.clone()).or_default();
                *entry -= &(g * &c);
                if entry.is_zero() {
                    rem.remove(b);
                }
            }
            coords.insert(top, c);
        }
        Ok(coords)
    }

    /// `Σ_B coords[B] m_B`.
    pub fn from_monomial_coords(
        &self,
        coords: &BTreeMap<SuperMatrix, LaurentPolynomial>,
    ) -> Result<AlgebraElement, UplusError> {
        let mut out = AlgebraElement::zero(self.shape, Side::Plus);
        for (b, c) in coords {
            out.add_scaled(&*self.monomial(b)?, c);
        }
        Ok(out)
    }

    /// The bar involution of the algebra: fixes every monomial, inverts `v`.
    pub fn bar_element(&self, x: &AlgebraElement) -> Result<AlgebraElement, UplusError> {
        match x.side {
            Side::Plus => {
                let coords = self.to_monomial_coords(x)?;
                let barred = coords.into_iter().map(|(b, c)| (b, c.bar())).collect();
                self.from_monomial_coords(&barred)
            }
            Side::Minus => Ok(self.bar_element(&x.tau_transpose())?.tau_transpose()),
        }
    }

    pub fn transition_closure(&self, a: &SuperMatrix) -> Result<TransitionClosure, UplusError> {
        self.check_upper(a)?;
        let mut seen: BTreeMap<SuperMatrix, ()> = BTreeMap::new();
        let mut stack = vec![a.clone()];
        seen.insert(a.clone(), ());
        while let Some(b) = stack.pop() {
            let m = self.monomial(&b)?;
            for c in m.terms.keys() {
                if seen.insert(c.clone(), ()).is_none() {
                    stack.push(c.clone());
                }
            }
        }
        let mut basis: Vec<SuperMatrix> = seen.into_keys().collect();
        basis.sort_by_key(processing_key);
        let index: HashMap<SuperMatrix, usize> = basis
            .iter()
            .enumerate()
            .map(|(i, b)| (b.clone(), i))
            .collect();
        let mut columns = Vec::with_capacity(basis.len());
        for b in &basis {
            let m = self.monomial(b)?;
            columns.push(
                m.terms
                    .iter()
                    .map(|(c, g)| (index[c], g.clone()))
                    .collect::<BTreeMap<_, _>>(),
            );
        }
        Ok(TransitionClosure {
            basis,
            index,
            columns,
        })
    }

    /// Seeds the memo with a record computed elsewhere (e.g. loaded from disk).
    pub fn insert_canonical(&self, record: CanonicalRecord) {
        self.canonicals
            .write()
            .expect("memo poisoned")
            .insert(record.target.clone(), Arc::new(record));
    }

    pub fn cached_canonical(&self, a: &SuperMatrix) -> Option<Arc<CanonicalRecord>> {
        self.canonicals
            .read()
            .expect("memo poisoned")
            .get(a)
            .cloned()
    }

    /// The canonical basis element `C_A` by a triangular solve over the closure.
    pub fn canonical(&self, a: &SuperMatrix) -> Result<Arc<CanonicalRecord>, UplusError> {
        if let Some(r) = self.cached_canonical(a) {
            return Ok(r);
        }
        let closure = self.transition_closure(a)?;
        let n = closure.len();
        // bar_images[c] = bar(basis[c](0)) in closure indices
        let mut bar_images: Vec<BTreeMap<usize, LaurentPolynomial>> = Vec::with_capacity(n);
        for c in &closure.basis {
            let img = self.bar_element(&AlgebraElement::basis_on(c, Side::Plus)?)?;
            let mut col = BTreeMap::new();
            for (b, g) in img.terms {
                let idx = closure
                    .index_of(&b)
                    .ok_or_else(|| UplusError::BarNotTriangular {
                        lower: b.clone(),
                        upper: c.clone(),
                    })?;
                col.insert(idx, g);
            }
            bar_images.push(col);
        }
        for (c, col) in bar_images.iter().enumerate() {
            if col.get(&c) != Some(&LaurentPolynomial::one()) || col.keys().any(|&b| b < c) {
                let lower = col
                    .keys()
                    .find(|&&b| b < c)
                    .map(|&b| closure.basis[b].clone())
                    .unwrap_or_else(|| closure.basis[c].clone());
                return Err(UplusError::BarNotTriangular {
                    lower,
                    upper: closure.basis[c].clone(),
                });
            }
        }
        let mut p: Vec<LaurentPolynomial> = vec![LaurentPolynomial::zero(); n];
        p[0] = LaurentPolynomial::one();
        for b in 1..n {
            let mut rhs = LaurentPolynomial::zero();
            for c in 0..b {
                if p[c].is_zero() {
                    continue;
                }
                if let Some(r) = bar_images[c].get(&b) {
                    rhs += &(r * &p[c].bar());
                }
            }
            p[b] = antisym_solve(&rhs)?;
        }
        let expansion: BTreeMap<SuperMatrix, LaurentPolynomial> = closure
            .basis
            .iter()
            .zip(p)
            .filter(|(_, c)| !c.is_zero())
            .map(|(b, c)| (b.clone(), c))
            .collect();
        let element = AlgebraElement {
            shape: self.shape,
            side: Side::Plus,
            terms: expansion.clone(),
        };
        let coords = self.to_monomial_coords(&element)?;
        let witness = coords
            .into_iter()
            .filter(|(b, _)| b != a)
            .map(|(b, c)| (b, -c))
            .collect();
        let record = Arc::new(CanonicalRecord {
            target: a.clone(),
            expansion,
            witness: Some(witness),
        });
        self.canonicals
            .write()
            .expect("memo poisoned")
            .insert(a.clone(), record.clone());
        Ok(record)
    }

    /// `C_A` for strictly lower `A`: the image of `C_{A^t}` under the
    /// anti-involution, rescaled to have leading coefficient one.
    pub fn canonical_minus(&self, a: &SuperMatrix) -> Result<CanonicalRecord, UplusError> {
        if !a.is_strictly_lower() {
            return Err(UplusError::WrongSide(a.clone(), Side::Minus));
        }
        Ok(self.canonical(&a.transpose())?.transposed())
    }

    /// The layered elimination algorithm: starting from `m_A`, repeatedly
    /// remove the bar-invariant part of the first coefficient (in the
    /// shallowest layer of the poset below `A`) that is not in `v^-1 Z[v^-1]`.
    pub fn du_algorithm(&self, a: &SuperMatrix) -> Result<DuRecord, UplusError> {
        let closure = self.transition_closure(a)?;
        let n = closure.len();
        let mut depth = vec![0usize; n];
        for b in 1..n {
            depth[b] = (1..b)
                .filter(|&c| preceq(&closure.basis[b], &closure.basis[c]))
                .map(|c| depth[c] + 1)
                .max()
                .unwrap_or(1);
        }
        let mut x = (*self.monomial(a)?).clone();
        let mut witness: BTreeMap<SuperMatrix, LaurentPolynomial> = BTreeMap::new();
        let mut failures = Vec::new();
        loop {
            let next = x
                .terms
                .iter()
                .filter(|(b, c)| *b != a && !c.is_strictly_negative())
                .map(|(b, _)| {
                    let idx = closure
                        .index_of(b)
                        .ok_or_else(|| UplusError::BarNotTriangular {
                            lower: b.clone(),
                            upper: a.clone(),
                        })?;
                    Ok((depth[idx], idx))
                })
                .collect::<Result<Vec<_>, UplusError>>()?
                .into_iter()
                .min();
            let Some((_, idx)) = next else { break };
            let b = closure.basis[idx].clone();
            let g = x.coeff(&b);
            if y_decompose(&g).is_err() {
                failures.push(b.clone());
            }
            let gy = bar_symmetric_part(&g);
            x.add_scaled(&*self.monomial(&b)?, &(-&gy));
            let entry = witness.entry(b.clone()).or_default();
            *entry += &gy;
            if entry.is_zero() {
                witness.remove(&b);
            }
        }
        Ok(DuRecord {
            record: CanonicalRecord {
                target: a.clone(),
                expansion: x.terms,
                witness: Some(witness),
            },
            strict_y_failures: failures,
        })
    }

    /// Product in `U^+` (or `U^-` through the transpose anti-involution).
    pub fn mult(
        &self,
        x: &AlgebraElement,
        y: &AlgebraElement,
    ) -> Result<AlgebraElement, UplusError> {
        if x.shape != self.shape || y.shape != self.shape || x.side != y.side {
            return Err(UplusError::Mismatch);
        }
        match x.side {
            Side::Plus => {
                let coords = self.to_monomial_coords(x)?;
                let mut out = AlgebraElement::zero(self.shape, Side::Plus);
                for (b, c) in coords {
                    let prod = self.apply_word(&monomial_word(&b), y)?;
                    out.add_scaled(&prod, &c);
                }
                Ok(out)
            }
            Side::Minus => Ok(self
                .mult(&y.tau_transpose(), &x.tau_transpose())?
                .tau_transpose()),
        }
    }

    /// Simple root vector `E_{h,h+1}` or `E_{h+1,h}` as a basis symbol.
    fn simple_root(&self, a: usize, b: usize) -> Result<AlgebraElement, UplusError> {
        AlgebraElement::basis(&SuperMatrix::unit(self.shape, a, b))
    }

    /// The quantum root vector `E_{a,b}`, recursing through `c = a+1`
    /// (`c = a-1` when `a > b`).
    pub fn root_vector(&self, a: usize, b: usize) -> Result<AlgebraElement, UplusError> {
        let c = if a < b { a + 1 } else { a.wrapping_sub(1) };
        self.root_vector_via(a, b, c)
    }

    /// `E_{a,b} = E_{a,c} E_{c,b} - v_c^{∓1} E_{c,b} E_{a,c}` for an explicit
    /// intermediate index `c`.
    pub fn root_vector_via(
        &self,
        a: usize,
        b: usize,
        c: usize,
    ) -> Result<AlgebraElement, UplusError> {
        let d = self.shape.dim();
        let bad = || UplusError::BadRootIndices {
            a,
            b,
            c,
            shape: self.shape,
        };
        if a == b || a == 0 || b == 0 || a > d || b > d {
            return Err(bad());
        }
        if a.abs_diff(b) == 1 {
            return self.simple_root(a, b);
        }
        let (lo, hi) = (a.min(b), a.max(b));
        if c <= lo || c >= hi {
            return Err(bad());
        }
        let left = self.root_vector(a, c)?;
        let right = self.root_vector(c, b)?;
        let exp = if a < b {
            -self.shape.vsign(c)
        } else {
            self.shape.vsign(c)
        };
        let lr = self.mult(&left, &right)?;
        let rl = self.mult(&right, &left)?;
        Ok(lr.minus(&rl.scaled(&LaurentPolynomial::v(exp))))
    }

    /// Divided power `E_{a,b}^{(p)}` of a positive root vector.
    pub fn root_divided_power(
        &self,
        a: usize,
        b: usize,
        p: u32,
    ) -> Result<AlgebraElement, UplusError> {
        if self.shape.is_mixed(a, b) && p >= 2 {
            return Err(UplusError::OddDividedPower { a, b, p });
        }
        let root = self.root_vector(a, b)?;
        let mut acc = AlgebraElement::identity(self.shape, Side::Plus);
        for _ in 0..p {
            acc = self.mult(&root, &acc)?;
        }
        let fact = sym_factorial(p);
        let mut out = AlgebraElement::zero(self.shape, Side::Plus);
        for (m, c) in acc.terms {
            out.add_term(m, &c.div_exact(&fact)?);
        }
        Ok(out)
    }

    /// The PBW element `E_A = Π_{<=_3} E_{i,j}^{(a_{i,j})}`.
    pub fn pbw(&self, a: &SuperMatrix) -> Result<AlgebraElement, UplusError> {
        self.check_upper(a)?;
        let mut factors = Vec::new();
        for (i, j) in order3_positions(self.shape) {
            let v = a.at(i, j);
            if v > 0 {
                factors.push(self.root_divided_power(i, j, v)?);
            }
        }
        let mut acc = AlgebraElement::identity(self.shape, Side::Plus);
        for f in factors.iter().rev() {
            acc = self.mult(f, &acc)?;
        }
        Ok(acc)
    }

    /// Checks the positive-part defining relations as operator identities on
    /// the span of all `A(0)` with `‖A‖ <= norm_bound`.
    pub fn serre_check(&self, norm_bound: u64) -> Result<SerreReport, UplusError> {
        let shape = self.shape;
        let d = shape.dim();
        let m = shape.m;
        let cap = norm_bound.min(u32::MAX as u64) as u32;
        let basis = enumerate_upper(shape, |_, _| cap, Some(norm_bound));
        let mut report = SerreReport::default();
        let e = |h: usize, x: &AlgebraElement| self.left_mult_divided_e(h, 1, x);
        let word = |hs: &[usize], x: &AlgebraElement| -> Result<AlgebraElement, UplusError> {
            let mut cur = x.clone();
            for &h in hs.iter().rev() {
                cur = e(h, &cur)?;
            }
            Ok(cur)
        };
        let two = crate::laurent::sym_int(2, crate::laurent::Parity::Even);
        for a in &basis {
            let x = AlgebraElement::basis_on(a, Side::Plus)?;
            let mut check = |name: String, residue: AlgebraElement| {
                report.checked += 1;
                if !residue.is_zero() {
                    report.violations.push(SerreViolation {
                        relation: name,
                        basis: a.clone(),
                        residue,
                    });
                }
            };
            for h in 1..d {
                for k in h + 2..d {
                    let r = word(&[h, k], &x)?.minus(&word(&[k, h], &x)?);
                    check(format!("E{h}E{k} = E{k}E{h}"), r);
                }
            }
            for h in 1..d {
                if h == m {
                    continue;
                }
                for k in [h.wrapping_sub(1), h + 1] {
                    if k == 0 || k >= d {
                        continue;
                    }
                    let r = word(&[h, h, k], &x)?
                        .minus(&word(&[h, k, h], &x)?.scaled(&two))
                        .plus(&word(&[k, h, h], &x)?);
                    check(format!("E{h}^2E{k} - [2]E{h}E{k}E{h} + E{k}E{h}^2 = 0"), r);
                }
            }
            if m >= 1 && m < d {
                check(format!("E{m}^2 = 0"), word(&[m, m], &x)?);
            }
            if m >= 2 && m + 2 <= d {
                let (p, q) = (m - 1, m + 1);
                let root = |y: &AlgebraElement| -> Result<AlgebraElement, UplusError> {
                    Ok(word(&[p, m, q], y)?
                        .minus(&word(&[p, q, m], y)?.scaled(&LaurentPolynomial::v(1)))
                        .minus(&word(&[m, q, p], y)?.scaled(&LaurentPolynomial::v(-1)))
                        .plus(&word(&[q, m, p], y)?))
                };
                let r = e(m, &root(&x)?)?.plus(&root(&e(m, &x)?)?);
                check(format!("[E{m}, E({p},{})] = 0", m + 2), r);
            }
        }
        Ok(report)
    }
}

/// A relation that failed on a basis vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SerreViolation {
    pub relation: String,
    pub basis: SuperMatrix,
    pub residue: AlgebraElement,
}

/// Outcome of [`UPlus::serre_check`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SerreReport {
    pub checked: usize,
    pub violations: Vec<SerreViolation>,
}

impl SerreReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}
