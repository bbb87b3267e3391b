//! Parallel first-column prediction in dimension one.
//!
//! After one grain is added at cell 0 of a stable configuration on [0, n-1], every cell
//! topples at most once and nothing outside [0, n-1] topples. The odometer is then the least
//! fixed point of `o(x) = [c(x) + Σ D(v) o(x-v) >= θ]`. The line is cut into leaves of 4r cells;
//! each leaf gets a table from its two r-cell boundary blocks to its own bits, and tables are
//! merged pairwise along a binary tree. Merging picks the least seam assignment that both
//! halves agree on, which is exactly the least fixed point of the merged segment.

use rayon::prelude::*;

use crate::config::Configuration;
use crate::error::{Error, Result};
use crate::model::SandpileModel;
use crate::prediction::normalize;
use crate::cell::Cell;

/// Largest supported radius; tables have 2^{2r} entries.
pub const MAX_RADIUS: usize = 8;

const INFEASIBLE: u64 = u64::MAX;

/// Dense 1D instance: c + 1_0 on [0, len), zero elsewhere.
#[derive(Clone, Debug)]
pub struct Line {
    r: usize,
    theta: u64,
    /// (offset, weight) pairs of the neighborhood.
    nb: Vec<(i64, u64)>,
    cells: Vec<u64>,
    /// Support side before padding.
    n: usize,
}

impl Line {
    /// Builds the instance from a stable configuration; `c` is normalized first.
    /// Returns the line and the normalization offset.
    pub fn new(model: &SandpileModel, c: &Configuration) -> Result<(Line, i64)> {
        if model.dim() != 1 || c.dim() != 1 {
            return Err(Error::Unsupported("parallel prediction is one-dimensional".into()));
        }
        if !model.is_complete() {
            return Err(Error::IncompleteModel);
        }
        let r = model.radius() as usize;
        if r > MAX_RADIUS {
            return Err(Error::Unsupported(format!("radius {r} exceeds {MAX_RADIUS}")));
        }
        if !c.is_stable(model.threshold()) {
            return Err(Error::InvalidInstance("configuration must be stable".into()));
        }
        if c.is_empty() {
            return Err(Error::InvalidInstance("first-column prediction needs a nonempty configuration".into()));
        }
        let (norm, offset, n) = normalize(c);
        let n = n as usize;
        let leaf = 4 * r;
        let len = n.div_ceil(leaf).max(1) * leaf;
        let mut cells = vec![0u64; len];
        for (x, k) in norm.iter() {
            cells[x[0] as usize] = k;
        }
        cells[0] += 1;
        let nb = model.neighbors().iter().map(|(v, w)| (v[0], *w)).collect();
        Ok((Line { r, theta: model.threshold(), nb, cells, n }, offset[0]))
    }

    pub fn radius(&self) -> usize {
        self.r
    }

    /// Padded length, a multiple of 4r.
    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn support_side(&self) -> usize {
        self.n
    }

    pub fn leaves(&self) -> usize {
        self.cells.len() / (4 * self.r)
    }

    fn content(&self, x: i64) -> u64 {
        if x < 0 || x as usize >= self.cells.len() {
            0
        } else {
            self.cells[x as usize]
        }
    }

    /// Least fixed point on [start, start+len) with `left` giving the topplings of the r cells
    /// before and `right` those of the r cells after. `None` if some cell would topple twice.
    fn lfp(&self, start: i64, len: usize, left: u64, right: u64) -> Option<u64> {
        debug_assert!(len <= 64);
        let r = self.r as i64;
        let mut recv = [0u64; 64];
        let end = start + len as i64;
        let give = |src: i64, recv: &mut [u64; 64]| {
            for &(v, w) in &self.nb {
                let t = src + v;
                if t >= start && t < end {
                    recv[(t - start) as usize] += w;
                }
            }
        };
        for i in 0..r {
            if left >> i & 1 == 1 {
                give(start - r + i, &mut recv);
            }
            if right >> i & 1 == 1 {
                give(end + i, &mut recv);
            }
        }
        let mut fired: u64 = 0;
        let mut stack = [0usize; 64];
        let mut top = 0;
        for i in 0..len {
            if self.content(start + i as i64) + recv[i] >= self.theta {
                fired |= 1 << i;
                stack[top] = i;
                top += 1;
            }
        }
        while top > 0 {
            top -= 1;
            let i = stack[top];
            let src = start + i as i64;
            for &(v, w) in &self.nb {
                let t = src + v;
                if t >= start && t < end {
                    let j = (t - start) as usize;
                    recv[j] += w;
                    if fired >> j & 1 == 0 && self.content(t) + recv[j] >= self.theta {
                        fired |= 1 << j;
                        stack[top] = j;
                        top += 1;
                    }
                }
            }
        }
        for i in 0..len {
            if fired >> i & 1 == 1 && self.content(start + i as i64) + recv[i] >= 2 * self.theta {
                return None;
            }
        }
        Some(fired)
    }
}

/// Boundary-to-odometer table of a segment [start, start+len), len ≥ 2r.
///
/// Entry `left | right << r` holds the segment's first 2r bits in the low half and its last
/// 2r bits in the high half, or marks the boundary pair infeasible.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SegmentFn {
    pub start: i64,
    pub len: usize,
    r: usize,
    table: Vec<u64>,
    /// Height of the composition tree that produced this function (0 for leaves).
    pub depth: usize,
}

/// A leaf table over 4r cells.
pub type WindowFunction = SegmentFn;

impl SegmentFn {
    pub fn entries(&self) -> usize {
        self.table.len()
    }

    /// (first 2r bits, last 2r bits), or `None` for an infeasible boundary pair.
    pub fn get(&self, left: u64, right: u64) -> Option<(u64, u64)> {
        let e = self.table[(left | right << self.r) as usize];
        let m = (1u64 << (2 * self.r)) - 1;
        (e != INFEASIBLE).then(|| (e & m, e >> (2 * self.r)))
    }

    /// All 4r bits of a leaf.
    pub fn leaf_bits(&self, left: u64, right: u64) -> Option<u64> {
        debug_assert_eq!(self.len, 4 * self.r);
        let e = self.table[(left | right << self.r) as usize];
        (e != INFEASIBLE).then_some(e)
    }

    fn pack(&self, lo: u64, hi: u64) -> u64 {
        lo | hi << (2 * self.r)
    }
}

/// Interior bits of the least fixed point on [x, y] with fixed boundary bits.
/// Returns the first 2r and the last 2r bits, or `InfeasibleWindow`.
pub fn local_odometer(
    model: &SandpileModel,
    c: &Configuration,
    x: i64,
    y: i64,
    left: &[bool],
    right: &[bool],
) -> Result<(Vec<bool>, Vec<bool>)> {
    let r = model.radius() as usize;
    if left.len() != r || right.len() != r {
        return Err(Error::InvalidInstance(format!("boundary blocks must have length {r}")));
    }
    if x + r as i64 > y || y - x + 1 > 64 {
        return Err(Error::InvalidInstance("interval must satisfy x + r <= y and hold at most 64 cells".into()));
    }
    let theta = model.threshold();
    let nb: Vec<(i64, u64)> = model.neighbors().iter().map(|(v, w)| (v[0], *w)).collect();
    let lo = x - r as i64;
    let cells: Vec<u64> = (lo..=y + r as i64).map(|i| c.get(&Cell::from([i]))).collect();
    // a line anchored at `lo` so that content() reads the configuration verbatim
    let line = Line { r, theta, nb, cells, n: 0 };
    let bits = |v: &[bool]| v.iter().enumerate().fold(0u64, |a, (i, &b)| a | (b as u64) << i);
    let len = (y - x + 1) as usize;
    let fired = line.lfp(x - lo, len, bits(left), bits(right)).ok_or(Error::InfeasibleWindow)?;
    let w = (2 * r).min(len);
    let first = (0..w).map(|i| fired >> i & 1 == 1).collect();
    let last = (len - w..len).map(|i| fired >> i & 1 == 1).collect();
    Ok((first, last))
}

/// Leaf table for the window [y, y+4r).
fn build_leaf(line: &Line, y: i64) -> SegmentFn {
    let r = line.r;
    let side = 1u64 << r;
    let mut table = Vec::with_capacity((side * side) as usize);
    for right in 0..side {
        for left in 0..side {
            table.push(line.lfp(y, 4 * r, left, right).unwrap_or(INFEASIBLE));
        }
    }
    SegmentFn { start: y, len: 4 * r, r, table, depth: 0 }
}

/// Leaf table at anchor `y` (a multiple of 4r inside the padded line).
pub fn build_window(line: &Line, y: i64) -> Result<WindowFunction> {
    let w = 4 * line.r as i64;
    if y < 0 || y % w != 0 || y >= line.len() as i64 {
        return Err(Error::InvalidInstance(format!("window anchor {y} is not a leaf position")));
    }
    Ok(build_leaf(line, y))
}

/// All leaf tables, built in parallel.
pub fn build_windows(line: &Line) -> Vec<WindowFunction> {
    let w = 4 * line.r as i64;
    (0..line.leaves()).into_par_iter().map(|j| build_leaf(line, j as i64 * w)).collect()
}

/// Merges adjacent segments `a` then `b`.
pub fn compose(line: &Line, a: &SegmentFn, b: &SegmentFn) -> Result<SegmentFn> {
    let r = line.r;
    if a.r != r || b.r != r || a.start + a.len as i64 != b.start || a.len < 2 * r || b.len < 2 * r {
        return Err(Error::InvalidInstance("compose: segments are not adjacent with matching radius".into()));
    }
    let side = 1u64 << r;
    let mask = side - 1;
    let seam = a.start + a.len as i64 - r as i64;
    let mut out = SegmentFn {
        start: a.start,
        len: a.len + b.len,
        r,
        table: Vec::with_capacity((side * side) as usize),
        depth: a.depth.max(b.depth) + 1,
    };
    for rb in 0..side {
        for lb in 0..side {
            let mut best: Option<(u32, u64)> = None;
            for i6 in 0..side {
                let Some((a_lo, a_hi)) = a.get(lb, i6) else { continue };
                let i5 = a_hi >> r;
                let i4 = a_hi & mask;
                let Some((b_lo, b_hi)) = b.get(i5, rb) else { continue };
                if b_lo & mask != i6 {
                    continue;
                }
                let i7 = b_lo >> r;
                // the seam must itself be the least fixed point given its outer blocks
                if line.lfp(seam, 2 * r, i4, i7) != Some(i5 | i6 << r) {
                    continue;
                }
                let weight = (i5 | i6 << r).count_ones();
                let packed = out.pack(a_lo, b_hi);
                match best {
                    Some((w, p)) if w < weight || (w == weight && p == packed) => {}
                    Some((w, _)) if w == weight => {
                        return Err(Error::InvariantViolation("two incomparable seam fixed points".into()));
                    }
                    _ => best = Some((weight, packed)),
                }
            }
            out.table.push(best.map_or(INFEASIBLE, |(_, p)| p));
        }
    }
    Ok(out)
}

/// Order in which a run of segments is merged.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TreeShape {
    Balanced,
    LeftLeaning,
}

/// Merges a nonempty run of adjacent segments. Balanced trees merge both halves in parallel.
pub fn compose_all(line: &Line, segs: &[SegmentFn], shape: TreeShape) -> Result<SegmentFn> {
    match segs.len() {
        0 => Err(Error::InvalidInstance("nothing to compose".into())),
        1 => Ok(segs[0].clone()),
        n => match shape {
            TreeShape::Balanced => {
                let (l, r) = segs.split_at(n / 2);
                let (a, b) = rayon::join(|| compose_all(line, l, shape), || compose_all(line, r, shape));
                compose(line, &a?, &b?)
            }
            TreeShape::LeftLeaning => {
                let mut acc = segs[0].clone();
                for s in &segs[1..] {
                    acc = compose(line, &acc, s)?;
                }
                Ok(acc)
            }
        },
    }
}

/// Resolves the odometer bits of leaf `j` given the merged prefix and suffix around it.
fn resolve_leaf(line: &Line, prefix: Option<&SegmentFn>, leaf: &SegmentFn, suffix: Option<&SegmentFn>) -> Result<u64> {
    let r = line.r;
    let side = 1u64 << r;
    let mask = side - 1;
    let a_range = if prefix.is_some() { side } else { 1 };
    let b_range = if suffix.is_some() { side } else { 1 };
    let mut best: Option<(u32, u64)> = None;
    for a in 0..a_range {
        for b in 0..b_range {
            let Some(bits) = leaf.leaf_bits(a, b) else { continue };
            let p = bits & mask;
            let q = bits >> (3 * r) & mask;
            if let Some(pre) = prefix {
                match pre.get(0, p) {
                    Some((_, hi)) if hi >> r == a => {}
                    _ => continue,
                }
            }
            if let Some(suf) = suffix {
                match suf.get(q, 0) {
                    Some((lo, _)) if lo & mask == b => {}
                    _ => continue,
                }
            }
            let weight = (a | b << r).count_ones() + bits.count_ones();
            match best {
                Some((w, v)) if w < weight || (w == weight && v == bits) => {}
                Some((w, _)) if w == weight => {
                    return Err(Error::InvariantViolation("two incomparable fixed points".into()));
                }
                _ => best = Some((weight, bits)),
            }
        }
    }
    best.map(|(_, b)| b).ok_or(Error::InfeasibleWindow)
}

/// Statistics of one prediction.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Predict1dStats {
    pub leaves: usize,
    /// Height of the deeper of the two merge trees.
    pub depth: usize,
    /// Number of table entries evaluated.
    pub work: u64,
}

#[derive(Clone, Copy, Debug)]
pub struct Predict1dOptions {
    /// Worker threads; `None` uses the global pool.
    pub threads: Option<usize>,
    pub shape: TreeShape,
}

impl Default for Predict1dOptions {
    fn default() -> Self {
        Predict1dOptions { threads: None, shape: TreeShape::Balanced }
    }
}

/// Does `x` topple after a grain is added at the minimal cell of the stable `c`?
pub fn predict_1d(model: &SandpileModel, c: &Configuration, x: i64) -> Result<bool> {
    predict_1d_with(model, c, x, &Predict1dOptions::default()).map(|(b, _)| b)
}

pub fn predict_1d_with(
    model: &SandpileModel,
    c: &Configuration,
    x: i64,
    opts: &Predict1dOptions,
) -> Result<(bool, Predict1dStats)> {
    let (line, offset) = Line::new(model, c)?;
    let x = x - offset;
    let run = || predict_on_line(&line, x, opts.shape);
    match opts.threads {
        None => run(),
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t.max(1))
            .build()
            .map_err(|e| Error::Unsupported(e.to_string()))?
            .install(run),
    }
}

/// Query on a prepared line (coordinates relative to the normalized instance).
pub fn predict_on_line(line: &Line, x: i64, shape: TreeShape) -> Result<(bool, Predict1dStats)> {
    let r = line.r as i64;
    let mut stats = Predict1dStats { leaves: line.leaves(), ..Default::default() };
    if x < -r || x > line.n as i64 + r || x < 0 || x >= line.len() as i64 {
        // outside the support nothing topples
        return Ok((false, stats));
    }
    let leaves = build_windows(line);
    let entries = 1u64 << (2 * line.r);
    stats.work = entries * leaves.len() as u64;
    let j = (x / (4 * r)) as usize;
    let (pre, suf) = rayon::join(
        || (j > 0).then(|| compose_all(line, &leaves[..j], shape)).transpose(),
        || (j + 1 < leaves.len()).then(|| compose_all(line, &leaves[j + 1..], shape)).transpose(),
    );
    let (pre, suf) = (pre?, suf?);
    stats.depth = pre.as_ref().map_or(0, |p| p.depth).max(suf.as_ref().map_or(0, |s| s.depth));
    stats.work += entries * entries * (leaves.len().saturating_sub(3) as u64);
    let bits = resolve_leaf(line, pre.as_ref(), &leaves[j], suf.as_ref())?;
    Ok((bits >> (x - 4 * r * j as i64) & 1 == 1, stats))
}

/// Every odometer bit of the line, via prefix and suffix merges.
pub fn odometer_on_line(line: &Line) -> Result<Vec<bool>> {
    let leaves = build_windows(line);
    let m = leaves.len();
    let mut prefix: Vec<SegmentFn> = Vec::with_capacity(m);
    for (j, l) in leaves.iter().enumerate() {
        let p = if j == 0 { l.clone() } else { compose(line, &prefix[j - 1], l)? };
        prefix.push(p);
    }
    let mut suffix: Vec<Option<SegmentFn>> = vec![None; m];
    for j in (0..m).rev() {
        suffix[j] = Some(if j + 1 == m {
            leaves[j].clone()
        } else {
            compose(line, &leaves[j], suffix[j + 1].as_ref().unwrap())?
        });
    }
    let mut out = Vec::with_capacity(line.len());
    for j in 0..m {
        let pre = (j > 0).then(|| &prefix[j - 1]);
        let suf = suffix.get(j + 1).and_then(|s| s.as_ref());
        let bits = resolve_leaf(line, pre, &leaves[j], suf)?;
        out.extend((0..4 * line.r).map(|i| bits >> i & 1 == 1));
    }
    Ok(out)
}

/// Odometer of c + 1_min(c) as 0/1 bits over the padded normalized line, with the offset.
pub fn odometer_1d(model: &SandpileModel, c: &Configuration) -> Result<(Vec<bool>, i64)> {
    let (line, offset) = Line::new(model, c)?;
    Ok((odometer_on_line(&line)?, offset))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{stabilize, Policy};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cfg1(v: &[u64]) -> Configuration {
        Configuration::from_pairs(1, v.iter().enumerate().map(|(i, &k)| ([i as i64], k))).unwrap()
    }

    /// Odometer of the full sequential run, as a dense vector over [lo, hi].
    fn oracle(model: &SandpileModel, c: &Configuration, lo: i64, hi: i64) -> Vec<u64> {
        let y = c.min_cell().unwrap().clone();
        let s = stabilize(model, &c.add_grain(&y).unwrap(), Policy::SequentialLexMin).unwrap();
        (lo..=hi).map(|x| s.odometer.get(&Cell::from([x]))).collect()
    }

    fn models() -> Vec<SandpileModel> {
        vec![
            SandpileModel::von_neumann(1, 1).unwrap(),
            SandpileModel::von_neumann(1, 2).unwrap(),
            SandpileModel::kadanoff(2).unwrap(),
            SandpileModel::kadanoff(3).unwrap(),
            SandpileModel::new(1, vec![(Cell::from([-2]), 1), (Cell::from([-1]), 1), (Cell::from([3]), 1)]).unwrap(),
            SandpileModel::decreasing(2, &[(1, 1), (3, 2)]).unwrap(),
        ]
    }

    fn random_stable(rng: &mut ChaCha8Rng, theta: u64, n: usize) -> Configuration {
        let mut v: Vec<u64> = (0..n).map(|_| rng.gen_range(0..theta)).collect();
        v[0] = rng.gen_range(1..theta);
        cfg1(&v)
    }

    #[test]
    fn local_odometer_examples() {
        let m = SandpileModel::von_neumann(1, 1).unwrap();
        let zero = Configuration::new(1);
        assert_eq!(
            local_odometer(&m, &zero, 0, 5, &[false], &[false]).unwrap(),
            (vec![false, false], vec![false, false])
        );
        // all ones, wave entering from the left
        let ones = cfg1(&[1; 8]);
        let (a, b) = local_odometer(&m, &ones, 2, 6, &[true], &[false]).unwrap();
        assert_eq!((a, b), (vec![true, true], vec![true, true]));
        // the same wave as a full sequential run on [2,6] with cell 1 feeding it
        let mut c = Configuration::new(1);
        for i in 2..=6 {
            c.add(&Cell::from([i]), 1).unwrap();
        }
        c.add(&Cell::from([2]), 1).unwrap();
        let s = stabilize(&m, &c, Policy::SequentialLexMin).unwrap();
        assert!((2..=6).all(|i| s.odometer.get(&Cell::from([i])) == 1));
        // a cell holding 2θ-1 receiving from both sides must topple twice
        let tall = cfg1(&[0, 0, 1, 0]);
        assert_eq!(local_odometer(&m, &tall, 1, 2, &[true], &[true]), Ok((vec![true, true], vec![true, true])));
        let over = Configuration::from_pairs(1, [([1], 1), ([2], 1)]).unwrap();
        assert!(local_odometer(&m, &over, 1, 2, &[true], &[true]).is_ok());
        let infeasible = Configuration::from_pairs(1, [([1], 3)]).unwrap();
        assert_eq!(local_odometer(&m, &infeasible, 1, 2, &[true], &[false]), Err(Error::InfeasibleWindow));
    }

    #[test]
    fn local_odometer_matches_oracle_on_random_triples() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let ms = models();
        let mut checked = 0;
        while checked < 500 {
            let m = &ms[rng.gen_range(0..ms.len())];
            let r = m.radius();
            let n = rng.gen_range(1..30);
            let c = random_stable(&mut rng, m.threshold(), n);
            let truth = oracle(m, &c, -r - 40, n as i64 + 40);
            let at = |x: i64| truth[(x + r + 40) as usize] == 1;
            let x = rng.gen_range(0..n as i64);
            let y = x + r + rng.gen_range(0..20);
            let left: Vec<bool> = (x - r..x).map(at).collect();
            let right: Vec<bool> = (y + 1..=y + r).map(at).collect();
            let c1 = c.add_grain(&Cell::from([0])).unwrap();
            let (a, b) = local_odometer(m, &c1, x, y, &left, &right).unwrap();
            let w = (2 * r).min(y - x + 1);
            assert_eq!(a, (x..x + w).map(at).collect::<Vec<_>>());
            assert_eq!(b, (y - w + 1..=y).map(at).collect::<Vec<_>>());
            checked += 1;
        }
    }

    #[test]
    fn windows() {
        let m = SandpileModel::von_neumann(1, 1).unwrap();
        let (line, _) = Line::new(&m, &cfg1(&[1, 1, 1, 1])).unwrap();
        let w = build_window(&line, 0).unwrap();
        assert_eq!(w.entries(), 4);
        // left boundary idle: cell 0 holds 2 after the grain, so the whole window fires
        assert_eq!(w.leaf_bits(0, 0), Some(0b1111));
        assert!(build_window(&line, 2).is_err());

        let k = SandpileModel::kadanoff(2).unwrap();
        let (line, _) = Line::new(&k, &cfg1(&[1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1])).unwrap();
        let w = build_window(&line, 8).unwrap();
        assert_eq!(w.entries(), 16);
        for l in 0..4 {
            for rr in 0..4 {
                if let Some(b) = w.leaf_bits(l, rr) {
                    if l == 0 && rr == 0 {
                        assert_eq!(b, 0);
                    }
                }
            }
        }
    }

    #[test]
    fn compose_empty_windows_is_zero() {
        let m = SandpileModel::von_neumann(1, 1).unwrap();
        let mut v = vec![0; 16];
        v[0] = 1;
        v[15] = 1;
        let (line, _) = Line::new(&m, &cfg1(&v)).unwrap();
        let ws = build_windows(&line);
        assert_eq!(ws.len(), 4);
        let f = compose(&line, &ws[1], &ws[2]).unwrap();
        assert_eq!(f.get(0, 0), Some((0, 0)));
        assert!(compose(&line, &ws[0], &ws[2]).is_err());
    }

    #[test]
    fn tree_shapes_agree_and_depth_is_logarithmic() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for m in models() {
            for _ in 0..5 {
                let n = rng.gen_range(1..200);
                let c = random_stable(&mut rng, m.threshold(), n);
                let (line, _) = Line::new(&m, &c).unwrap();
                let ws = build_windows(&line);
                let a = compose_all(&line, &ws, TreeShape::Balanced).unwrap();
                let b = compose_all(&line, &ws, TreeShape::LeftLeaning).unwrap();
                assert_eq!(a.table, b.table);
                let leaves = ws.len();
                let want = if leaves <= 1 { 0 } else { (leaves as f64).log2().ceil() as usize };
                assert_eq!(a.depth, want);
                // the root with idle outer boundaries carries the true edge bits
                let truth = oracle(&m, &c, 0, line.len() as i64 - 1);
                let (lo, hi) = a.get(0, 0).unwrap();
                let r = m.radius() as usize;
                for i in 0..2 * r {
                    assert_eq!(lo >> i & 1, truth[i]);
                    assert_eq!(hi >> i & 1, truth[line.len() - 2 * r + i]);
                }
            }
        }
    }

    #[test]
    fn predictions_match_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for m in models() {
            let r = m.radius();
            for _ in 0..20 {
                let n = rng.gen_range(1..80);
                let c = random_stable(&mut rng, m.threshold(), n);
                let truth = oracle(&m, &c, -r - 2, n as i64 + r + 2);
                let (bits, off) = odometer_1d(&m, &c).unwrap();
                assert_eq!(off, 0);
                for x in -r - 2..=n as i64 + r + 2 {
                    let want = truth[(x + r + 2) as usize] == 1;
                    let got_all = x >= 0 && (x as usize) < bits.len() && bits[x as usize];
                    assert_eq!(got_all, want, "odometer_1d x={x} {m:?}");
                }
                for _ in 0..3 {
                    let x = rng.gen_range(-r - 2..=n as i64 + r + 2);
                    let want = truth[(x + r + 2) as usize] == 1;
                    assert_eq!(predict_1d(&m, &c, x).unwrap(), want);
                }
            }
        }
    }

    #[test]
    fn translated_input_and_threads() {
        let m = SandpileModel::kadanoff(2).unwrap();
        let c = Configuration::from_pairs(1, [([10], 2), ([11], 2), ([13], 1)]).unwrap();
        let o = Predict1dOptions { threads: Some(2), shape: TreeShape::LeftLeaning };
        let (b, _) = predict_1d_with(&m, &c, 11, &o).unwrap();
        assert_eq!(b, crate::prediction::solve_first_col(&m, &c, &Cell::from([11])).unwrap());
        assert!(!predict_1d(&m, &c, 1000).unwrap());
        assert!(predict_1d(&m, &Configuration::new(1), 0).is_err());
    }
}
