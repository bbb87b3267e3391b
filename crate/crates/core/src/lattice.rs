//! Exact integer and rational linear algebra: lattice index, rank, cone and hull membership.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::cell::Cell;

/// Index of the subgroup of Z^d generated by `vectors`, or `None` when they do not span R^d.
///
/// Integer row reduction: each column is cleared by repeated Euclidean steps, so the
/// product of the pivots is the index.
pub fn lattice_index(vectors: &[Cell], dim: usize) -> Option<u128> {
    let mut rows: Vec<Vec<i128>> = vectors
        .iter()
        .map(|v| v.iter().map(|&x| x as i128).collect())
        .collect();
    let mut index: u128 = 1;
    let mut top = 0;
    for col in 0..dim {
        loop {
            // smallest nonzero entry in this column among remaining rows
            let pivot = (top..rows.len())
                .filter(|&i| rows[i][col] != 0)
                .min_by_key(|&i| rows[i][col].abs());
            let Some(p) = pivot else { return None };
            rows.swap(top, p);
            let mut done = true;
            for i in top + 1..rows.len() {
                if rows[i][col] != 0 {
                    let q = rows[i][col] / rows[top][col];
                    for j in col..dim {
                        rows[i][j] -= q * rows[top][j];
                    }
                    if rows[i][col] != 0 {
                        done = false;
                    }
                }
            }
            if done {
                break;
            }
        }
        index = index.saturating_mul(rows[top][col].unsigned_abs());
        top += 1;
    }
    Some(index)
}

/// Rank over Q.
pub fn rank(vectors: &[Cell], dim: usize) -> usize {
    let mut rows: Vec<Vec<BigRational>> = vectors.iter().map(|v| to_rat(v)).collect();
    let mut r = 0;
    for col in 0..dim {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][col].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        for i in r + 1..rows.len() {
            if !rows[i][col].is_zero() {
                let f = &rows[i][col] / &rows[r][col];
                for j in col..dim {
                    let t = &f * &rows[r][j];
                    rows[i][j] -= t;
                }
            }
        }
        r += 1;
    }
    r
}

fn to_rat(v: &[i64]) -> Vec<BigRational> {
    v.iter().map(|&x| BigRational::from_integer(BigInt::from(x))).collect()
}

/// Decides whether `target` is a nonnegative rational combination of `generators`.
///
/// Phase-one simplex over exact rationals with Bland's rule.
pub fn in_cone(generators: &[Vec<i64>], target: &[i64]) -> bool {
    let rows = target.len();
    let m = generators.len();
    if target.iter().all(|&t| t == 0) {
        return true;
    }
    if m == 0 {
        return false;
    }
    let cols = m + rows;
    // tableau rows: [A | I | b], b >= 0
    let mut tab: Vec<Vec<BigRational>> = Vec::with_capacity(rows);
    for i in 0..rows {
        let sign: i64 = if target[i] < 0 { -1 } else { 1 };
        let mut row = Vec::with_capacity(cols + 1);
        for g in generators {
            row.push(BigRational::from_integer(BigInt::from(sign * g[i])));
        }
        for k in 0..rows {
            row.push(if k == i { BigRational::one() } else { BigRational::zero() });
        }
        row.push(BigRational::from_integer(BigInt::from(sign * target[i])));
        tab.push(row);
    }
    let mut basis: Vec<usize> = (m..cols).collect();
    // reduced costs of the phase-one objective (sum of artificials)
    let mut cost: Vec<BigRational> = vec![BigRational::zero(); cols + 1];
    for row in &tab {
        for j in 0..m {
            cost[j] -= &row[j];
        }
        cost[cols] -= &row[cols];
    }
    loop {
        let Some(enter) = (0..cols).find(|&j| cost[j].is_negative()) else {
            break;
        };
        let mut leave: Option<usize> = None;
        for i in 0..rows {
            if tab[i][enter].is_positive() {
                let better = match leave {
                    None => true,
                    Some(l) => {
                        let a = &tab[i][cols] / &tab[i][enter];
                        let b = &tab[l][cols] / &tab[l][enter];
                        a < b || (a == b && basis[i] < basis[l])
                    }
                };
                if better {
                    leave = Some(i);
                }
            }
        }
        let Some(l) = leave else {
            // unbounded in phase one cannot happen; the objective is bounded below by 0
            unreachable!("phase-one simplex unbounded");
        };
        let piv = tab[l][enter].clone();
        for v in tab[l].iter_mut() {
            *v /= &piv;
        }
        let prow = tab[l].clone();
        for (i, row) in tab.iter_mut().enumerate() {
            if i != l && !row[enter].is_zero() {
                let f = row[enter].clone();
                for (x, p) in row.iter_mut().zip(prow.iter()) {
                    *x -= &f * p;
                }
            }
        }
        if !cost[enter].is_zero() {
            let f = cost[enter].clone();
            for (x, p) in cost.iter_mut().zip(prow.iter()) {
                *x -= &f * p;
            }
        }
        basis[l] = enter;
    }
    cost[cols].is_zero()
}

/// Whether `y` lies in the convex hull of `points` (closed hull).
pub fn in_convex_hull(points: &[Cell], y: &Cell) -> bool {
    let gens: Vec<Vec<i64>> = points
        .iter()
        .map(|p| {
            let mut v = p.to_vec();
            v.push(1);
            v
        })
        .collect();
    let mut t = y.to_vec();
    t.push(1);
    in_cone(&gens, &t)
}

/// Solves `v = a*x + b*y + c*z` over Q for linearly independent x, y, z.
/// Returns the coefficients when they exist.
pub fn coordinates_in_span3(x: &Cell, y: &Cell, z: &Cell, v: &Cell) -> Option<[BigRational; 3]> {
    let d = v.dim();
    // augmented system, d equations in 3 unknowns
    let mut m: Vec<Vec<BigRational>> = (0..d)
        .map(|i| to_rat(&[x[i], y[i], z[i], v[i]]))
        .collect();
    let mut piv_cols = Vec::new();
    let mut r = 0;
    for col in 0..3 {
        let Some(p) = (r..d).find(|&i| !m[i][col].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let pv = m[r][col].clone();
        for val in m[r].iter_mut() {
            *val /= &pv;
        }
        let prow = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i != r && !row[col].is_zero() {
                let f = row[col].clone();
                for (a, b) in row.iter_mut().zip(prow.iter()) {
                    *a -= &f * b;
                }
            }
        }
        piv_cols.push(col);
        r += 1;
    }
    if r < 3 {
        return None;
    }
    if m[r..].iter().any(|row| !row[3].is_zero()) {
        return None;
    }
    Some([m[0][3].clone(), m[1][3].clone(), m[2][3].clone()])
}
