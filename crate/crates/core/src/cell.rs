use std::fmt;
use std::ops::{Add, Deref, Neg, Sub};

use smallvec::SmallVec;

/// A lattice point of Z^d. Ordering is lexicographic, first coordinate most significant.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Cell(SmallVec<[i64; 4]>);

impl Cell {
    pub fn new(coords: &[i64]) -> Self {
        Cell(SmallVec::from_slice(coords))
    }

    pub fn origin(dim: usize) -> Self {
        Cell(smallvec::smallvec![0; dim])
    }

    /// Unit vector `e_axis` scaled by `len`.
    pub fn axis(dim: usize, axis: usize, len: i64) -> Self {
        let mut c = Self::origin(dim);
        c.0[axis] = len;
        c
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    pub fn norm_inf(&self) -> i64 {
        self.0.iter().map(|v| v.abs()).max().unwrap_or(0)
    }

    pub fn norm2_sq(&self) -> i128 {
        self.0.iter().map(|&v| (v as i128) * (v as i128)).sum()
    }

    pub fn dot(&self, other: &Cell) -> i128 {
        self.0.iter().zip(other.0.iter()).map(|(&a, &b)| a as i128 * b as i128).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&v| v == 0)
    }

    pub fn scale(&self, k: i64) -> Cell {
        Cell(self.0.iter().map(|v| v * k).collect())
    }

    /// `self + other`, written into `out` to avoid reallocating in hot loops.
    #[inline]
    pub fn add_into(&self, other: &Cell, out: &mut Cell) {
        out.0.clear();
        out.0.extend(self.0.iter().zip(other.0.iter()).map(|(a, b)| a + b));
    }
}

impl Deref for Cell {
    type Target = [i64];
    fn deref(&self) -> &[i64] {
        &self.0
    }
}

impl From<Vec<i64>> for Cell {
    fn from(v: Vec<i64>) -> Self {
        Cell(SmallVec::from_vec(v))
    }
}

impl From<&[i64]> for Cell {
    fn from(v: &[i64]) -> Self {
        Cell::new(v)
    }
}

impl<const N: usize> From<[i64; N]> for Cell {
    fn from(v: [i64; N]) -> Self {
        Cell::new(&v)
    }
}

impl Add for &Cell {
    type Output = Cell;
    fn add(self, rhs: &Cell) -> Cell {
        debug_assert_eq!(self.dim(), rhs.dim());
        Cell(self.0.iter().zip(rhs.0.iter()).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &Cell {
    type Output = Cell;
    fn sub(self, rhs: &Cell) -> Cell {
        debug_assert_eq!(self.dim(), rhs.dim());
        Cell(self.0.iter().zip(rhs.0.iter()).map(|(a, b)| a - b).collect())
    }
}

impl Neg for &Cell {
    type Output = Cell;
    fn neg(self) -> Cell {
        Cell(self.0.iter().map(|a| -a).collect())
    }
}

impl fmt::Debug for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}
