//! Reference implementations used as oracles by the integration tests. They share no code
//! with the library beyond the model and configuration containers.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};

use sandpile::{Cell, Configuration, SandpileModel};

pub type Grid = BTreeMap<Vec<i64>, u64>;

pub fn grid(c: &Configuration) -> Grid {
    c.iter().map(|(x, k)| (x.to_vec(), k)).collect()
}

pub fn nbhd(m: &SandpileModel) -> Vec<(Vec<i64>, u64)> {
    m.neighbors().iter().map(|(v, w)| (v.to_vec(), *w)).collect()
}

fn plus(a: &[i64], b: &[i64]) -> Vec<i64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

/// Sequential stabilization that always fires the lexicographically least unstable cell.
/// Returns the stable grid (zeros removed), the odometer and the firing order.
pub fn lexmin_run(m: &SandpileModel, c: &Grid) -> (Grid, Grid, Vec<Vec<i64>>) {
    let theta = m.threshold();
    let nb = nbhd(m);
    let mut g = c.clone();
    let mut unstable: BTreeSet<Vec<i64>> = g.iter().filter(|(_, &k)| k >= theta).map(|(x, _)| x.clone()).collect();
    let mut odo = Grid::new();
    let mut order = Vec::new();
    while let Some(x) = unstable.pop_first() {
        *g.get_mut(&x).unwrap() -= theta;
        if g[&x] >= theta {
            unstable.insert(x.clone());
        }
        for (v, w) in &nb {
            let y = plus(&x, v);
            let e = g.entry(y.clone()).or_insert(0);
            *e += w;
            if *e >= theta {
                unstable.insert(y);
            }
        }
        *odo.entry(x.clone()).or_insert(0) += 1;
        order.push(x);
    }
    g.retain(|_, k| *k > 0);
    (g, odo, order)
}

/// One synchronous round of the global rule on a grid.
pub fn parallel_round(m: &SandpileModel, c: &Grid) -> Grid {
    let theta = m.threshold();
    let mut out = c.clone();
    for (x, &k) in c {
        if k >= theta {
            *out.get_mut(x).unwrap() -= theta;
            for (v, w) in nbhd(m) {
                *out.entry(plus(x, &v)).or_insert(0) += w;
            }
        }
    }
    out.retain(|_, k| *k > 0);
    out
}

/// Toppling bits of c + 1 at index `at` on a dense 1D line, with `pad` empty cells on each side.
/// Panics if the avalanche reaches the padding's edge or some cell fires twice.
pub fn line_avalanche(nb: &[(i64, u64)], theta: u64, cells: &[u64], at: usize, pad: usize) -> Vec<bool> {
    let r = nb.iter().map(|(v, _)| v.unsigned_abs() as usize).max().unwrap();
    let len = cells.len() + 2 * pad;
    let mut g = vec![0u64; len];
    g[pad..pad + cells.len()].copy_from_slice(cells);
    g[pad + at] += 1;
    let mut fired = vec![false; len];
    let mut stack: Vec<usize> = (0..len).filter(|&i| g[i] >= theta).collect();
    while let Some(i) = stack.pop() {
        if g[i] < theta {
            continue;
        }
        assert!(!fired[i], "cell fired twice");
        assert!(i >= r && i + r < len, "avalanche reached the padding edge");
        fired[i] = true;
        g[i] -= theta;
        for &(v, w) in nb {
            let j = (i as i64 + v) as usize;
            g[j] += w;
            if g[j] >= theta {
                stack.push(j);
            }
        }
    }
    fired
}

/// Is every vector with |x|_inf <= `want` a sum of neighbors? Searched within a box of `radius`.
pub fn bfs_spans(n: &[Vec<i64>], dim: usize, radius: i64, want: i64) -> bool {
    let start = vec![0i64; dim];
    let mut seen = HashSet::from([start.clone()]);
    let mut q = VecDeque::from([start]);
    while let Some(p) = q.pop_front() {
        for v in n {
            let s = plus(&p, v);
            if s.iter().all(|x| x.abs() <= radius) && seen.insert(s.clone()) {
                q.push_back(s);
            }
        }
    }
    let mut cur = vec![-want; dim];
    loop {
        if !seen.contains(&cur) {
            return false;
        }
        let mut i = dim;
        loop {
            if i == 0 {
                return true;
            }
            i -= 1;
            if cur[i] < want {
                cur[i] += 1;
                break;
            }
            cur[i] = -want;
        }
    }
}

pub fn cell(v: &[i64]) -> Cell {
    Cell::new(v)
}
