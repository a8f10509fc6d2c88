//! Sorted index sets.

use alloc::vec::Vec;
use rand::seq::index;
use rand::Rng;

use crate::error::{ensure, Result};

/// Sorted, duplicate-free vertex or coordinate indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(transparent))]
pub struct Support(Vec<usize>);

impl Support {
    /// Sort and deduplicate `indices`.
    pub fn new(mut indices: Vec<usize>) -> Self {
        indices.sort_unstable();
        indices.dedup();
        Self(indices)
    }

    /// Validate that every index lies in `0..n`.
    pub fn checked(indices: Vec<usize>, n: usize) -> Result<Self> {
        let s = Self::new(indices);
        ensure!(s.0.last().is_none_or(|&m| m < n), "support index out of range for n = {n}");
        Ok(s)
    }

    /// Uniform `k`-subset of `0..n`.
    pub fn random<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Self {
        Self::new(index::sample(rng, n, k).into_vec())
    }

    /// Indices as a slice.
    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    /// Size.
    pub fn len(&self) -> usize {
        self.0.len()
    }

    /// Whether empty.
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Membership test.
    pub fn contains(&self, i: usize) -> bool {
        self.0.binary_search(&i).is_ok()
    }

    /// Image under a relabeling `i ↦ sigma[i]`.
    pub fn map(&self, sigma: &[usize]) -> Self {
        Self::new(self.0.iter().map(|&i| sigma[i]).collect())
    }

    /// Size of the intersection.
    pub fn overlap(&self, other: &Self) -> usize {
        self.0.iter().filter(|&&i| other.contains(i)).count()
    }

    /// Indicator vector of length `n`.
    pub fn indicator(&self, n: usize) -> Vec<f64> {
        let mut v = alloc::vec![0.0; n];
        for &i in &self.0 {
            v[i] = 1.0;
        }
        v
    }

    /// Nonzero coordinates of `v`.
    pub fn of_nonzero(v: &[f64]) -> Self {
        Self(v.iter().enumerate().filter(|(_, x)| **x != 0.0).map(|(i, _)| i).collect())
    }
}

impl From<Vec<usize>> for Support {
    fn from(v: Vec<usize>) -> Self {
        Self::new(v)
    }
}
