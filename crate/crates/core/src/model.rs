use std::fmt;
use std::str::FromStr;

use crate::cell::Cell;
use crate::error::{Error, Result};
use crate::lattice;

/// A sandpile model: neighborhood with a positive grain distribution.
/// The threshold is always the total weight.
#[derive(Clone, PartialEq, Eq)]
pub struct SandpileModel {
    dim: usize,
    neighbors: Vec<(Cell, u64)>,
    threshold: u64,
    radius: i64,
    complete: bool,
}

/// Built-in model families.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    VonNeumann,
    Moore,
    Kadanoff1d,
    Decreasing1d,
}

impl FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "von-neumann" | "vn" => Ok(Family::VonNeumann),
            "moore" => Ok(Family::Moore),
            "kadanoff-1d" | "kadanoff" => Ok(Family::Kadanoff1d),
            "decreasing-1d" | "decreasing" => Ok(Family::Decreasing1d),
            _ => Err(Error::InvalidModel(format!("unknown family {s:?}"))),
        }
    }
}

impl SandpileModel {
    /// Builds a model, checking the structural invariants. Completeness is computed but not required.
    pub fn new(dim: usize, mut neighbors: Vec<(Cell, u64)>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidModel("dimension must be positive".into()));
        }
        if neighbors.is_empty() {
            return Err(Error::InvalidModel("empty neighborhood".into()));
        }
        neighbors.sort();
        for w in neighbors.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::InvalidModel(format!("duplicate neighbor {}", w[0].0)));
            }
        }
        let mut threshold: u64 = 0;
        let mut radius = 0;
        for (v, wgt) in &neighbors {
            if v.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: v.dim() });
            }
            if v.is_zero() {
                return Err(Error::InvalidModel("origin in neighborhood".into()));
            }
            if *wgt == 0 {
                return Err(Error::InvalidModel(format!("zero weight at {v}")));
            }
            threshold = threshold
                .checked_add(*wgt)
                .ok_or_else(|| Error::InvalidModel("threshold overflow".into()))?;
            radius = radius.max(v.norm_inf());
        }
        let cells: Vec<Cell> = neighbors.iter().map(|(v, _)| v.clone()).collect();
        let complete = check_complete(&cells, dim)?;
        Ok(SandpileModel { dim, neighbors, threshold, radius, complete })
    }

    /// Like [`SandpileModel::new`] but rejects incomplete neighborhoods.
    pub fn new_complete(dim: usize, neighbors: Vec<(Cell, u64)>) -> Result<Self> {
        let m = Self::new(dim, neighbors)?;
        if !m.complete {
            return Err(Error::IncompleteModel);
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn neighbors(&self) -> &[(Cell, u64)] {
        &self.neighbors
    }

    pub fn threshold(&self) -> u64 {
        self.threshold
    }

    pub fn radius(&self) -> i64 {
        self.radius
    }

    pub fn is_complete(&self) -> bool {
        self.complete
    }

    /// D(v), or 0 when v is not a neighbor.
    pub fn weight(&self, v: &Cell) -> u64 {
        self.neighbors
            .binary_search_by(|(c, _)| c.cmp(v))
            .map(|i| self.neighbors[i].1)
            .unwrap_or(0)
    }

    pub fn contains(&self, v: &Cell) -> bool {
        self.weight(v) > 0
    }

    pub fn von_neumann(dim: usize, r: i64) -> Result<Self> {
        check_dims(dim, r)?;
        let mut n = Vec::new();
        for axis in 0..dim {
            for k in 1..=r {
                n.push((Cell::axis(dim, axis, k), 1));
                n.push((Cell::axis(dim, axis, -k), 1));
            }
        }
        Self::new(dim, n)
    }

    pub fn moore(dim: usize, r: i64) -> Result<Self> {
        check_dims(dim, r)?;
        if (2 * r + 1).checked_pow(dim as u32).map_or(true, |s| s > 1 << 20) {
            return Err(Error::Unsupported("Moore neighborhood too large".into()));
        }
        let mut n = Vec::new();
        let mut cur = vec![-r; dim];
        loop {
            if cur.iter().any(|&v| v != 0) {
                n.push((Cell::new(&cur), 1));
            }
            let mut i = dim;
            loop {
                if i == 0 {
                    return Self::new(dim, n);
                }
                i -= 1;
                if cur[i] < r {
                    cur[i] += 1;
                    break;
                }
                cur[i] = -r;
            }
        }
    }

    /// N = {-1, r}, D(-1) = r, D(r) = 1.
    pub fn kadanoff(r: i64) -> Result<Self> {
        check_dims(1, r)?;
        Self::new(1, vec![(Cell::from([-1]), r as u64), (Cell::from([r]), 1)])
    }

    /// One-dimensional model whose only negative neighbor is -1.
    pub fn decreasing(minus_one_weight: u64, positives: &[(i64, u64)]) -> Result<Self> {
        if positives.iter().any(|&(o, _)| o <= 0) {
            return Err(Error::InvalidModel("decreasing model takes positive offsets only".into()));
        }
        let mut n = vec![(Cell::from([-1]), minus_one_weight)];
        n.extend(positives.iter().map(|&(o, w)| (Cell::from([o]), w)));
        Self::new(1, n)
    }

    /// Dispatch on a family name. `extra` carries the positive offsets of decreasing models,
    /// and `r` is the weight of -1 for them.
    pub fn builtin(family: Family, dim: usize, r: i64, extra: &[(i64, u64)]) -> Result<Self> {
        match family {
            Family::VonNeumann => Self::von_neumann(dim, r),
            Family::Moore => Self::moore(dim, r),
            Family::Kadanoff1d | Family::Decreasing1d if dim != 1 => {
                Err(Error::InvalidModel(format!("{family:?} requires d=1")))
            }
            Family::Kadanoff1d => Self::kadanoff(r),
            Family::Decreasing1d => {
                if r < 1 {
                    return Err(Error::InvalidModel("weight of -1 must be positive".into()));
                }
                Self::decreasing(r as u64, extra)
            }
        }
    }

    /// Same neighborhood with one weight changed (used by the simulation lemmas).
    pub fn with_weight(&self, v: &Cell, weight: u64) -> Result<Self> {
        let mut n: Vec<_> = self.neighbors.iter().filter(|(c, _)| c != v).cloned().collect();
        n.push((v.clone(), weight));
        Self::new(self.dim, n)
    }
}

fn check_dims(dim: usize, r: i64) -> Result<()> {
    if dim == 0 || r < 1 {
        return Err(Error::InvalidModel(format!("need d >= 1 and r >= 1, got d={dim} r={r}")));
    }
    Ok(())
}

impl fmt::Debug for SandpileModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SandpileModel(d={}, theta={}, N=[", self.dim, self.threshold)?;
        for (i, (v, w)) in self.neighbors.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{v}:{w}")?;
        }
        write!(f, "])")
    }
}

/// span+(N) = Z^d, decided as: N generates Z^d as a group and the origin is interior to conv(N).
///
/// The second part is tested as rank(N) = d together with -sum(N) in cone(N): a strictly
/// positive relation among all of N makes the cone a linear space.
pub fn check_complete(neighbors: &[Cell], dim: usize) -> Result<bool> {
    if neighbors.is_empty() {
        return Err(Error::InvalidModel("empty neighborhood".into()));
    }
    if neighbors.iter().any(|v| v.is_zero()) {
        return Err(Error::InvalidModel("origin in neighborhood".into()));
    }
    if lattice::lattice_index(neighbors, dim) != Some(1) {
        return Ok(false);
    }
    let gens: Vec<Vec<i64>> = neighbors.iter().map(|v| v.to_vec()).collect();
    let mut neg_sum = vec![0i64; dim];
    for v in neighbors {
        for (s, x) in neg_sum.iter_mut().zip(v.iter()) {
            *s -= x;
        }
    }
    Ok(lattice::in_cone(&gens, &neg_sum))
}
