//! Semistandard supertableaux, the hook-constrained partitions `Π(r)_{m|n}`
//! that index simple polynomial modules, and their highest weights.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matrices::{enumerate_compositions, Composition, SuperShape};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TableauxError {
    #[error("parts {0:?} are not a partition")]
    NotPartition(Vec<u32>),
    #[error("partition {parts:?} violates the hook condition for {shape}")]
    OutsideHook { parts: Vec<u32>, shape: SuperShape },
    #[error("content {content:?} has size {got}, expected {expected}")]
    ContentSize {
        content: Composition,
        got: u32,
        expected: u32,
    },
}

/// A partition considered relative to a super shape `(m|n)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SuperPartition {
    parts: Vec<u32>,
    shape: SuperShape,
}

impl SuperPartition {
    /// Trailing zero parts are dropped; the rest must be weakly decreasing.
    pub fn new(parts: &[u32], shape: SuperShape) -> Result<Self, TableauxError> {
        let mut parts = parts.to_vec();
        while parts.last() == Some(&0) {
            parts.pop();
        }
        if parts.contains(&0) || parts.windows(2).any(|w| w[0] < w[1]) {
            return Err(TableauxError::NotPartition(parts));
        }
        Ok(Self { parts, shape })
    }

    pub fn parts(&self) -> &[u32] {
        &self.parts
    }

    pub fn shape(&self) -> SuperShape {
        self.shape
    }

    pub fn size(&self) -> u32 {
        self.parts.iter().sum()
    }

    /// Part `i` (1-based), zero beyond the last row.
    pub fn part(&self, i: usize) -> u32 {
        self.parts.get(i - 1).copied().unwrap_or(0)
    }

    /// Membership in `Π(r)_{m|n}`: `π_{m+1} ≤ n`.
    pub fn in_hook(&self) -> bool {
        self.part(self.shape.m + 1) as usize <= self.shape.n
    }

    /// Conjugate partition.
    pub fn conjugate(&self) -> Vec<u32> {
        conjugate(&self.parts)
    }
}

impl fmt::Display for SuperPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p: Vec<String> = self.parts.iter().map(u32::to_string).collect();
        write!(f, "({})", p.join(","))
    }
}

fn conjugate(parts: &[u32]) -> Vec<u32> {
    let first = parts.first().copied().unwrap_or(0);
    (1..=first)
        .map(|c| parts.iter().filter(|&&p| p >= c).count() as u32)
        .collect()
}

/// All partitions of `r`, in decreasing lexicographic order.
pub fn partitions(r: u32) -> Vec<Vec<u32>> {
    fn rec(rest: u32, max: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if rest == 0 {
            out.push(cur.clone());
            return;
        }
        for p in (1..=rest.min(max)).rev() {
            cur.push(p);
            rec(rest - p, p, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(r, r, &mut Vec::new(), &mut out);
    out
}

/// `Π(r)_{m|n}`.
pub fn hook_partitions(shape: SuperShape, r: u32) -> Vec<SuperPartition> {
    partitions(r)
        .into_iter()
        .map(|p| SuperPartition { parts: p, shape })
        .filter(SuperPartition::in_hook)
        .collect()
}

/// A filling of a Young diagram by `1..=m+n`, stored row by row.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SuperTableau {
    shape: SuperShape,
    rows: Vec<Vec<u32>>,
}

impl SuperTableau {
    pub fn from_rows(shape: SuperShape, rows: Vec<Vec<u32>>) -> Self {
        Self { shape, rows }
    }

    pub fn rows(&self) -> &[Vec<u32>] {
        &self.rows
    }

    pub fn partition(&self) -> Vec<u32> {
        self.rows.iter().map(|r| r.len() as u32).collect()
    }

    pub fn content(&self) -> Composition {
        let mut c = vec![0u32; self.shape.dim()];
        for &x in self.rows.iter().flatten() {
            c[x as usize - 1] += 1;
        }
        Composition(c)
    }

    /// Weakly increasing rows and columns, even entries strictly increasing
    /// down columns, odd entries strictly increasing along rows.
    pub fn is_semistandard(&self) -> bool {
        let d = self.shape.dim() as u32;
        let m = self.shape.m as u32;
        for (i, row) in self.rows.iter().enumerate() {
            if i > 0 && row.len() > self.rows[i - 1].len() {
                return false;
            }
            for (j, &x) in row.iter().enumerate() {
                if x == 0 || x > d {
                    return false;
                }
                if j > 0 {
                    let left = row[j - 1];
                    if left > x || (left == x && x > m) {
                        return false;
                    }
                }
                if i > 0 {
                    let up = self.rows[i - 1][j];
                    if up > x || (up == x && x <= m) {
                        return false;
                    }
                }
            }
        }
        true
    }
}

impl fmt::Display for SuperTableau {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = self
            .rows
            .iter()
            .map(|r| {
                let cells: Vec<String> = r.iter().map(u32::to_string).collect();
                format!("[{}]", cells.join(","))
            })
            .collect();
        write!(f, "{}", rows.join(""))
    }
}

/// All semistandard supertableaux of shape `π` and content `μ`, in
/// lexicographic order of their row reading words.
pub fn enumerate_ssyt(
    pi: &SuperPartition,
    mu: &Composition,
) -> Result<Vec<SuperTableau>, TableauxError> {
    let shape = pi.shape;
    if mu.len() != shape.dim() || mu.total() != pi.size() {
        return Err(TableauxError::ContentSize {
            content: mu.clone(),
            got: mu.total(),
            expected: pi.size(),
        });
    }
    let cells: Vec<(usize, usize)> = pi
        .parts
        .iter()
        .enumerate()
        .flat_map(|(i, &len)| (0..len as usize).map(move |j| (i, j)))
        .collect();
    let mut rows: Vec<Vec<u32>> = pi.parts.iter().map(|&l| vec![0; l as usize]).collect();
    let mut remaining = mu.0.clone();
    let mut out = Vec::new();
    fill(shape, &cells, 0, &mut rows, &mut remaining, &mut out);
    Ok(out)
}

fn fill(
    shape: SuperShape,
    cells: &[(usize, usize)],
    idx: usize,
    rows: &mut Vec<Vec<u32>>,
    remaining: &mut Vec<u32>,
    out: &mut Vec<SuperTableau>,
) {
    if idx == cells.len() {
        out.push(SuperTableau {
            shape,
            rows: rows.clone(),
        });
        return;
    }
    let (i, j) = cells[idx];
    let m = shape.m as u32;
    for x in 1..=shape.dim() as u32 {
        if remaining[x as usize - 1] == 0 {
            continue;
        }
        if j > 0 {
            let left = rows[i][j - 1];
            if left > x || (left == x && x > m) {
                continue;
            }
        }
        if i > 0 {
            let up = rows[i - 1][j];
            if up > x || (up == x && x <= m) {
                continue;
            }
        }
        rows[i][j] = x;
        remaining[x as usize - 1] -= 1;
        fill(shape, cells, idx + 1, rows, remaining, out);
        remaining[x as usize - 1] += 1;
        rows[i][j] = 0;
    }
}

/// The highest weight `π̃ = (π_1..π_m | conjugate of (π_{m+1}, ...))`.
pub fn pi_tilde(pi: &SuperPartition) -> Result<Composition, TableauxError> {
    if !pi.in_hook() {
        return Err(TableauxError::OutsideHook {
            parts: pi.parts.clone(),
            shape: pi.shape,
        });
    }
    let (m, n) = (pi.shape.m, pi.shape.n);
    let mut out: Vec<u32> = (1..=m).map(|i| pi.part(i)).collect();
    let tail: Vec<u32> = pi.parts.iter().skip(m).copied().collect();
    let mut odd = conjugate(&tail);
    odd.resize(n, 0);
    out.extend(odd);
    Ok(Composition(out))
}

/// The unique semistandard supertableau of shape `π` and content `π̃`.
/// Returns `None` if that set is not a singleton.
pub fn t_pi(pi: &SuperPartition) -> Result<Option<SuperTableau>, TableauxError> {
    let mu = pi_tilde(pi)?;
    let mut all = enumerate_ssyt(pi, &mu)?;
    Ok(if all.len() == 1 { all.pop() } else { None })
}

/// Dominance `λ ⊵ μ` by partial sums.
pub fn dominates(lambda: &Composition, mu: &Composition) -> bool {
    let (mut a, mut b) = (0u64, 0u64);
    for i in 0..lambda.len().max(mu.len()) {
        a += lambda.0.get(i).copied().unwrap_or(0) as u64;
        b += mu.0.get(i).copied().unwrap_or(0) as u64;
        if a < b {
            return false;
        }
    }
    true
}

/// Number of semistandard supertableaux of shape `π` for every content.
pub fn count_by_content(pi: &SuperPartition) -> BTreeMap<Composition, usize> {
    let mut out = BTreeMap::new();
    for mu in enumerate_compositions(pi.shape, pi.size(), None) {
        let k = enumerate_ssyt(pi, &mu).map(|v| v.len()).unwrap_or(0);
        if k > 0 {
            out.insert(mu, k);
        }
    }
    out
}
