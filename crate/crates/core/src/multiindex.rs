//! Multi-indices in `ℕ^d` and the graded enumeration of `{I : |I| ≤ N}`.
//!
//! Axes are 0-based throughout the Rust API. The JSON formats use 1-based
//! axes (`"j": 1` is the first variable).

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Result, ShiftError};

/// An exponent vector `I = (i_1, …, i_d)`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(Vec<usize>);

impl MultiIndex {
    pub fn new(coords: Vec<usize>) -> Self {
        MultiIndex(coords)
    }

    pub fn zero(d: usize) -> Self {
        MultiIndex(vec![0; d])
    }

    /// The unit index `ε_j`.
    pub fn unit(d: usize, axis: usize) -> Result<Self> {
        MultiIndex::zero(d).increment(axis)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn coords(&self) -> &[usize] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    /// `I + ε_axis`.
    pub fn increment(&self, axis: usize) -> Result<Self> {
        if axis >= self.0.len() {
            return Err(ShiftError::Argument(format!(
                "axis {} out of range for d={}",
                axis + 1,
                self.0.len()
            )));
        }
        let mut c = self.0.clone();
        c[axis] += 1;
        Ok(MultiIndex(c))
    }

    /// `I − ε_axis`, or `None` when the coordinate is already zero.
    pub fn decrement(&self, axis: usize) -> Option<Self> {
        match self.0.get(axis) {
            Some(&c) if c > 0 => {
                let mut v = self.0.clone();
                v[axis] -= 1;
                Some(MultiIndex(v))
            }
            _ => None,
        }
    }

    pub fn add(&self, other: &MultiIndex) -> Result<Self> {
        self.check_dim(other)?;
        Ok(MultiIndex(
            self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect(),
        ))
    }

    /// Coordinatewise partial order: `I ≤ J` iff `i_k ≤ j_k` for every `k`.
    pub fn leq(&self, other: &MultiIndex) -> Result<bool> {
        self.check_dim(other)?;
        Ok(self.0.iter().zip(&other.0).all(|(a, b)| a <= b))
    }

    /// Immediate predecessors `(I − ε_j, j)`, in increasing axis order.
    pub fn predecessors(&self) -> impl Iterator<Item = (MultiIndex, usize)> + '_ {
        (0..self.dim()).filter_map(move |j| self.decrement(j).map(|p| (p, j)))
    }

    /// The axes of `I` with multiplicity, e.g. `(2,0,1)` gives `[0, 0, 2]`.
    pub fn axis_word(&self) -> Vec<usize> {
        self.0
            .iter()
            .enumerate()
            .flat_map(|(j, &c)| std::iter::repeat_n(j, c))
            .collect()
    }

    fn check_dim(&self, other: &MultiIndex) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(ShiftError::Argument(format!(
                "dimension mismatch: {} vs {}",
                self.dim(),
                other.dim()
            )));
        }
        Ok(())
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, c) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl From<Vec<usize>> for MultiIndex {
    fn from(v: Vec<usize>) -> Self {
        MultiIndex(v)
    }
}

/// `binomial(n, k)` without overflow for the sizes used here.
pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as usize
}

/// All multi-indices with `|I| ≤ N`, degree-major and lexicographically
/// descending within a degree, so `(1,0,0)` precedes `(0,1,0)`.
#[derive(Clone, Debug)]
pub struct BasisEnumeration {
    d: usize,
    level: usize,
    order: Vec<MultiIndex>,
    ranks: HashMap<MultiIndex, usize>,
    /// `layer_start[k]` is the rank of the first index of degree `k`.
    layer_start: Vec<usize>,
}

impl BasisEnumeration {
    pub fn new(d: usize, level: usize) -> Result<Self> {
        if d == 0 {
            return Err(ShiftError::Argument("d must be at least 1".into()));
        }
        let mut order = Vec::with_capacity(binomial(level + d, d));
        let mut layer_start = Vec::with_capacity(level + 2);
        let mut buf = vec![0usize; d];
        for deg in 0..=level {
            layer_start.push(order.len());
            push_layer(&mut buf, 0, deg, &mut order);
        }
        layer_start.push(order.len());
        let ranks = order
            .iter()
            .enumerate()
            .map(|(k, i)| (i.clone(), k))
            .collect();
        Ok(BasisEnumeration {
            d,
            level,
            order,
            ranks,
            layer_start,
        })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Maximal degree `N` of the enumerated indices.
    pub fn level(&self) -> usize {
        self.level
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn rank(&self, index: &MultiIndex) -> Option<usize> {
        self.ranks.get(index).copied()
    }

    pub fn unrank(&self, k: usize) -> Option<&MultiIndex> {
        self.order.get(k)
    }

    pub fn indices(&self) -> &[MultiIndex] {
        &self.order
    }

    pub fn iter(&self) -> std::slice::Iter<'_, MultiIndex> {
        self.order.iter()
    }

    /// Rank range of the indices with degree exactly `deg`.
    pub fn layer(&self, deg: usize) -> std::ops::Range<usize> {
        if deg > self.level {
            return self.order.len()..self.order.len();
        }
        self.layer_start[deg]..self.layer_start[deg + 1]
    }
}

fn push_layer(buf: &mut [usize], pos: usize, remaining: usize, out: &mut Vec<MultiIndex>) {
    if pos + 1 == buf.len() {
        buf[pos] = remaining;
        out.push(MultiIndex(buf.to_vec()));
        return;
    }
    for c in (0..=remaining).rev() {
        buf[pos] = c;
        push_layer(buf, pos + 1, remaining - c, out);
    }
    buf[pos] = 0;
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mi(v: &[usize]) -> MultiIndex {
        MultiIndex::new(v.to_vec())
    }

    #[test]
    fn increment_examples() {
        assert_eq!(mi(&[0, 0, 0]).increment(0).unwrap(), mi(&[1, 0, 0]));
        assert_eq!(mi(&[1, 0, 1]).increment(2).unwrap(), mi(&[1, 0, 2]));
        assert_eq!(mi(&[2, 5]).increment(1).unwrap(), mi(&[2, 6]));
        assert!(matches!(
            mi(&[2, 5]).increment(2),
            Err(ShiftError::Argument(_))
        ));
    }

    #[test]
    fn enumerate_examples() {
        let e = BasisEnumeration::new(1, 3).unwrap();
        let got: Vec<_> = e.iter().cloned().collect();
        assert_eq!(got, vec![mi(&[0]), mi(&[1]), mi(&[2]), mi(&[3])]);

        let e = BasisEnumeration::new(3, 1).unwrap();
        let got: Vec<_> = e.iter().cloned().collect();
        assert_eq!(
            got,
            vec![mi(&[0, 0, 0]), mi(&[1, 0, 0]), mi(&[0, 1, 0]), mi(&[0, 0, 1])]
        );
    }

    #[test]
    fn enumerate_count_matches_brute_force() {
        // Brute force: scan the box [0, N]^d and count |I| ≤ N.
        for d in 1..=4 {
            for n in 0usize..=6 {
                let mut count = 0;
                let total = (n + 1).pow(d as u32);
                for code in 0..total {
                    let mut c = code;
                    let mut deg = 0;
                    for _ in 0..d {
                        deg += c % (n + 1);
                        c /= n + 1;
                    }
                    if deg <= n {
                        count += 1;
                    }
                }
                assert_eq!(BasisEnumeration::new(d, n).unwrap().len(), count);
            }
        }
        assert_eq!(BasisEnumeration::new(2, 2).unwrap().len(), 6);
    }

    #[test]
    fn leq_examples() {
        assert!(mi(&[1, 0]).leq(&mi(&[1, 2])).unwrap());
        assert!(!mi(&[2, 0]).leq(&mi(&[1, 2])).unwrap());
        assert!(mi(&[3, 1]).leq(&mi(&[3, 1])).unwrap());
        assert!(mi(&[1]).leq(&mi(&[1, 2])).is_err());
    }

    #[test]
    fn rank_unrank_round_trip() {
        for d in 1..=4 {
            for n in 0..=8 {
                let e = BasisEnumeration::new(d, n).unwrap();
                assert_eq!(e.len(), binomial(n + d, d));
                assert!(e.unrank(0).unwrap().is_zero());
                for k in 0..e.len() {
                    assert_eq!(e.rank(e.unrank(k).unwrap()), Some(k));
                }
                for deg in 0..=n {
                    for k in e.layer(deg) {
                        assert_eq!(e.unrank(k).unwrap().degree(), deg);
                    }
                }
            }
        }
    }

    #[test]
    fn axis_word_and_predecessors() {
        assert_eq!(mi(&[2, 0, 1]).axis_word(), vec![0, 0, 2]);
        let preds: Vec<_> = mi(&[1, 1]).predecessors().collect();
        assert_eq!(preds, vec![(mi(&[0, 1]), 0), (mi(&[1, 0]), 1)]);
    }

    #[test]
    fn json_is_plain_array() {
        assert_eq!(serde_json::to_string(&mi(&[1, 0, 2])).unwrap(), "[1,0,2]");
    }
}
