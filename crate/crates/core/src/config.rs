use std::collections::BTreeMap;

use crate::cell::Cell;
use crate::error::{Error, Result};

/// Finite-support grain assignment. Zero entries are never stored.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Configuration {
    dim: usize,
    grains: BTreeMap<Cell, u64>,
}

/// Per-cell toppling counts of one stabilization. Zero entries are never stored.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Odometer {
    dim: usize,
    counts: BTreeMap<Cell, u64>,
}

impl Configuration {
    pub fn new(dim: usize) -> Self {
        Configuration { dim, grains: BTreeMap::new() }
    }

    /// Builds a configuration; repeated cells accumulate.
    pub fn from_pairs<I, C>(dim: usize, pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (C, u64)>,
        C: Into<Cell>,
    {
        let mut c = Self::new(dim);
        for (cell, k) in pairs {
            c.add(&cell.into(), k)?;
        }
        Ok(c)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, x: &Cell) -> u64 {
        self.grains.get(x).copied().unwrap_or(0)
    }

    pub fn set(&mut self, x: &Cell, k: u64) -> Result<()> {
        self.check_dim(x)?;
        if k == 0 {
            self.grains.remove(x);
        } else {
            self.grains.insert(x.clone(), k);
        }
        Ok(())
    }

    pub fn add(&mut self, x: &Cell, k: u64) -> Result<()> {
        self.check_dim(x)?;
        if k == 0 {
            return Ok(());
        }
        let e = self.grains.entry(x.clone()).or_insert(0);
        *e = e.checked_add(k).ok_or_else(|| Error::Overflow(x.clone()))?;
        Ok(())
    }

    /// c + 1_y.
    pub fn add_grain(&self, y: &Cell) -> Result<Configuration> {
        let mut c = self.clone();
        c.add(y, 1)?;
        Ok(c)
    }

    fn check_dim(&self, x: &Cell) -> Result<()> {
        if x.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: x.dim() });
        }
        Ok(())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Cell, u64)> + '_ {
        self.grains.iter().map(|(c, &k)| (c, k))
    }

    pub fn cells(&self) -> impl Iterator<Item = &Cell> + '_ {
        self.grains.keys()
    }

    pub fn len(&self) -> usize {
        self.grains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grains.is_empty()
    }

    pub fn total(&self) -> u128 {
        self.grains.values().map(|&k| k as u128).sum()
    }

    pub fn max_count(&self) -> u64 {
        self.grains.values().copied().max().unwrap_or(0)
    }

    pub fn is_stable(&self, theta: u64) -> bool {
        self.grains.values().all(|&k| k < theta)
    }

    /// Lexicographically minimal cell holding a grain.
    pub fn min_cell(&self) -> Option<&Cell> {
        self.grains.keys().next()
    }

    /// Componentwise bounds of the support.
    pub fn bounding_box(&self) -> Option<(Cell, Cell)> {
        let mut it = self.grains.keys();
        let first = it.next()?;
        let mut lo = first.to_vec();
        let mut hi = first.to_vec();
        for c in it {
            for i in 0..self.dim {
                lo[i] = lo[i].min(c[i]);
                hi[i] = hi[i].max(c[i]);
            }
        }
        Some((Cell::from(lo), Cell::from(hi)))
    }

    /// Every cell moved by `-offset`.
    pub fn translated(&self, offset: &Cell) -> Configuration {
        Configuration {
            dim: self.dim,
            grains: self.grains.iter().map(|(c, &k)| (c - offset, k)).collect(),
        }
    }

    pub(crate) fn from_map(dim: usize, grains: BTreeMap<Cell, u64>) -> Self {
        debug_assert!(grains.values().all(|&k| k > 0));
        Configuration { dim, grains }
    }
}

impl Odometer {
    pub fn new(dim: usize) -> Self {
        Odometer { dim, counts: BTreeMap::new() }
    }

    pub fn from_pairs<I, C>(dim: usize, pairs: I) -> Self
    where
        I: IntoIterator<Item = (C, u64)>,
        C: Into<Cell>,
    {
        let counts = pairs
            .into_iter()
            .filter(|(_, k)| *k > 0)
            .map(|(c, k)| (c.into(), k))
            .collect();
        Odometer { dim, counts }
    }

    pub(crate) fn from_map(dim: usize, counts: BTreeMap<Cell, u64>) -> Self {
        debug_assert!(counts.values().all(|&k| k > 0));
        Odometer { dim, counts }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, x: &Cell) -> u64 {
        self.counts.get(x).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Cell, u64)> + '_ {
        self.counts.iter().map(|(c, &k)| (c, k))
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn total(&self) -> u128 {
        self.counts.values().map(|&k| k as u128).sum()
    }

    pub fn max(&self) -> u64 {
        self.counts.values().copied().max().unwrap_or(0)
    }
}
