//! Sequential and parallel toppling dynamics with odometer tracking.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustc_hash::FxHashMap;

use crate::cell::Cell;
use crate::config::{Configuration, Odometer};
use crate::error::{Error, Result};
use crate::model::SandpileModel;

/// Order in which unstable cells are toppled.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Policy {
    /// Every unstable cell topples once per round (the global rule F).
    Parallel,
    /// Always topple the lexicographically smallest unstable cell.
    SequentialLexMin,
    /// Topple a uniformly random unstable cell, seeded.
    SequentialRandom(u64),
}

impl Policy {
    /// Parses `parallel`, `seq-lexmin`, `seq-random` (seed taken from `seed`) or `seq-random:<seed>`.
    pub fn parse(s: &str, seed: u64) -> Result<Policy> {
        match s {
            "parallel" => Ok(Policy::Parallel),
            "seq-lexmin" | "lexmin" => Ok(Policy::SequentialLexMin),
            "seq-random" | "random" => Ok(Policy::SequentialRandom(seed)),
            _ => match s.strip_prefix("seq-random:") {
                Some(n) => n
                    .parse()
                    .map(Policy::SequentialRandom)
                    .map_err(|_| Error::InvalidInstance(format!("bad seed in policy {s:?}"))),
                None => Err(Error::InvalidInstance(format!("unknown policy {s:?}"))),
            },
        }
    }
}

impl FromStr for Policy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Policy> {
        Policy::parse(s, 0)
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Policy::Parallel => write!(f, "parallel"),
            Policy::SequentialLexMin => write!(f, "seq-lexmin"),
            Policy::SequentialRandom(s) => write!(f, "seq-random:{s}"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Options {
    pub policy: Policy,
    /// Check conservation after every toppling and the 2θ bound after every parallel round.
    pub check_invariants: bool,
    /// Keep the toppling order (sequential policies only).
    pub record_sequence: bool,
    /// Stop as soon as this cell is unstable.
    pub stop_when_unstable: Option<Cell>,
}

impl Options {
    pub fn new(policy: Policy) -> Self {
        Options { policy, check_invariants: false, record_sequence: false, stop_when_unstable: None }
    }

    pub fn checked(mut self) -> Self {
        self.check_invariants = true;
        self
    }
}

/// Outcome of a stabilization run.
#[derive(Clone, Debug)]
pub struct Stabilization {
    pub configuration: Configuration,
    pub odometer: Odometer,
    /// Rounds for the parallel policy, topplings otherwise.
    pub steps: u64,
    pub topplings: u128,
    pub watchdog_bound: u128,
    pub sequence: Option<Vec<Cell>>,
    /// True when `stop_when_unstable` fired before stabilization completed.
    pub stopped_early: bool,
}

/// 2^{3d+4} d^{d+1} θ^{d+2} r^{d+1} n^{d²+2d}, saturating.
pub fn watchdog_bound(d: u32, theta: u64, r: u64, n: u64) -> u128 {
    let mut b: u128 = 1;
    let mut mul = |base: u128, exp: u32| {
        for _ in 0..exp {
            b = b.saturating_mul(base);
        }
    };
    mul(2, 3 * d + 4);
    mul(d as u128, d + 1);
    mul(theta as u128, d + 2);
    mul(r as u128, d + 1);
    mul(n.max(1) as u128, d * d + 2 * d);
    b
}

/// Side of the hypercube used for the watchdog. Configurations whose cells hold 2θ or more
/// are charged as a hypercube large enough to hold their grains below 2θ per cell.
pub fn effective_side(c: &Configuration, theta: u64) -> u64 {
    let Some((lo, hi)) = c.bounding_box() else { return 0 };
    let side = lo.iter().zip(hi.iter()).map(|(a, b)| (b - a + 1) as u64).max().unwrap_or(1);
    if c.max_count() < 2 * theta {
        return side;
    }
    let per_cell = 2 * theta as u128;
    let total = c.total();
    let d = c.dim() as u32;
    let mut n = side;
    while (n as u128).checked_pow(d).map_or(false, |v| v.saturating_mul(per_cell) < total) {
        n += 1;
    }
    n
}

/// Shared toppling engine over a hash map.
struct Engine<'a> {
    theta: u64,
    neighbors: &'a [(Cell, u64)],
    grains: FxHashMap<Cell, u64>,
    odo: FxHashMap<Cell, u64>,
    check: bool,
    topplings: u128,
    scratch: Cell,
}

impl<'a> Engine<'a> {
    fn new(model: &'a SandpileModel, c: &Configuration, check: bool) -> Self {
        let mut grains = FxHashMap::default();
        grains.reserve(c.len() * 2);
        for (x, k) in c.iter() {
            grains.insert(x.clone(), k);
        }
        Engine {
            theta: model.threshold(),
            neighbors: model.neighbors(),
            grains,
            odo: FxHashMap::default(),
            check,
            topplings: 0,
            scratch: Cell::origin(model.dim()),
        }
    }

    fn get(&self, x: &Cell) -> u64 {
        self.grains.get(x).copied().unwrap_or(0)
    }

    fn unstable_cells(&self) -> Vec<Cell> {
        let mut v: Vec<Cell> = self
            .grains
            .iter()
            .filter(|(_, &k)| k >= self.theta)
            .map(|(c, _)| c.clone())
            .collect();
        v.sort();
        v
    }

    /// Topples `x` once. Cells crossing the threshold are pushed to `newly`.
    fn topple(&mut self, x: &Cell, newly: &mut Vec<Cell>) -> Result<()> {
        let theta = self.theta;
        let g = self.grains.get_mut(x).expect("toppled cell holds grains");
        debug_assert!(*g >= theta);
        *g -= theta;
        let mut received: u128 = 0;
        for (v, w) in self.neighbors {
            x.add_into(v, &mut self.scratch);
            let e = match self.grains.get_mut(&self.scratch) {
                Some(e) => e,
                None => self.grains.entry(self.scratch.clone()).or_insert(0),
            };
            let before = *e;
            *e = before.checked_add(*w).ok_or_else(|| Error::Overflow(self.scratch.clone()))?;
            received += *w as u128;
            if before < theta && *e >= theta {
                newly.push(self.scratch.clone());
            }
        }
        if self.check && received != theta as u128 {
            return Err(Error::InvariantViolation(format!(
                "conservation: toppling {x} moved {received} grains, expected {theta}"
            )));
        }
        *self.odo.entry(x.clone()).or_insert(0) += 1;
        self.topplings += 1;
        Ok(())
    }

    fn finish(self, dim: usize) -> (Configuration, Odometer) {
        let grains = self.grains.into_iter().filter(|(_, k)| *k > 0).collect();
        let odo = self.odo.into_iter().collect();
        (Configuration::from_map(dim, grains), Odometer::from_map(dim, odo))
    }
}

fn check_dim(model: &SandpileModel, c: &Configuration) -> Result<()> {
    if model.dim() != c.dim() {
        return Err(Error::DimensionMismatch { expected: model.dim(), found: c.dim() });
    }
    Ok(())
}

/// One application of the global rule F: every unstable cell topples once.
pub fn parallel_step(model: &SandpileModel, c: &Configuration) -> Result<Configuration> {
    check_dim(model, c)?;
    let mut e = Engine::new(model, c, true);
    let mut newly = Vec::new();
    for x in e.unstable_cells() {
        e.topple(&x, &mut newly)?;
    }
    Ok(e.finish(model.dim()).0)
}

/// Topples `x` if it is unstable; otherwise returns `c` unchanged.
pub fn sequential_step(model: &SandpileModel, c: &Configuration, x: &Cell) -> Result<Configuration> {
    check_dim(model, c)?;
    if x.dim() != model.dim() {
        return Err(Error::DimensionMismatch { expected: model.dim(), found: x.dim() });
    }
    if c.get(x) < model.threshold() {
        return Ok(c.clone());
    }
    let mut e = Engine::new(model, c, true);
    e.topple(x, &mut Vec::new())?;
    Ok(e.finish(model.dim()).0)
}

pub fn stabilize(model: &SandpileModel, c: &Configuration, policy: Policy) -> Result<Stabilization> {
    stabilize_with(model, c, &Options::new(policy))
}

pub fn stabilize_with(model: &SandpileModel, c: &Configuration, opts: &Options) -> Result<Stabilization> {
    check_dim(model, c)?;
    if !model.is_complete() {
        return Err(Error::IncompleteModel);
    }
    let theta = model.threshold();
    let n = effective_side(c, theta);
    let bound = watchdog_bound(model.dim() as u32, theta, model.radius() as u64, n);
    let mut e = Engine::new(model, c, opts.check_invariants);
    let mut sequence = opts.record_sequence.then(Vec::new);
    let target = opts.stop_when_unstable.as_ref();
    let mut stopped_early = target.map_or(false, |t| e.get(t) >= theta);
    let mut steps: u64 = 0;
    let mut newly = Vec::new();
    let watchdog = |t: u128| -> Result<()> {
        if t > bound {
            Err(Error::Watchdog { steps: t, bound })
        } else {
            Ok(())
        }
    };

    if !stopped_early {
        match opts.policy {
            Policy::Parallel => {
                let mut unstable = e.unstable_cells();
                let mut before: FxHashMap<Cell, u64> = FxHashMap::default();
                while !unstable.is_empty() && !stopped_early {
                    let bounded = opts.check_invariants && e.grains.values().all(|&k| k < 2 * theta);
                    if bounded {
                        before.clear();
                        for x in &unstable {
                            before.insert(x.clone(), e.get(x));
                            for (v, _) in model.neighbors() {
                                let y = x + v;
                                let k = e.get(&y);
                                before.entry(y).or_insert(k);
                            }
                        }
                    }
                    newly.clear();
                    for x in &unstable {
                        e.topple(x, &mut newly)?;
                        if let Some(s) = sequence.as_mut() {
                            s.push(x.clone());
                        }
                    }
                    steps += 1;
                    watchdog(e.topplings)?;
                    if bounded {
                        let total_before: u128 = before.values().map(|&k| k as u128).sum();
                        let total_after: u128 = before.keys().map(|y| e.get(y) as u128).sum();
                        if total_before != total_after {
                            return Err(Error::InvariantViolation("conservation across a parallel round".into()));
                        }
                        if let Some(y) = before.keys().find(|y| e.get(y) >= 2 * theta) {
                            return Err(Error::InvariantViolation(format!(
                                "2θ bound broken at {y} after a parallel round"
                            )));
                        }
                    }
                    let mut next: Vec<Cell> = unstable
                        .drain(..)
                        .chain(newly.drain(..))
                        .filter(|x| e.get(x) >= theta)
                        .collect();
                    next.sort();
                    next.dedup();
                    if let Some(t) = target {
                        stopped_early = next.binary_search(t).is_ok();
                    }
                    unstable = next;
                }
            }
            Policy::SequentialLexMin => {
                let mut unstable: BTreeSet<Cell> = e.unstable_cells().into_iter().collect();
                while let Some(x) = unstable.first().cloned() {
                    newly.clear();
                    e.topple(&x, &mut newly)?;
                    steps += 1;
                    watchdog(e.topplings)?;
                    if let Some(s) = sequence.as_mut() {
                        s.push(x.clone());
                    }
                    if e.get(&x) < theta {
                        unstable.remove(&x);
                    }
                    if let Some(t) = target {
                        if newly.contains(t) {
                            stopped_early = true;
                            break;
                        }
                    }
                    unstable.extend(newly.drain(..));
                }
            }
            Policy::SequentialRandom(seed) => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut unstable = e.unstable_cells();
                while !unstable.is_empty() {
                    let i = rng.gen_range(0..unstable.len());
                    let x = unstable[i].clone();
                    newly.clear();
                    e.topple(&x, &mut newly)?;
                    steps += 1;
                    watchdog(e.topplings)?;
                    if let Some(s) = sequence.as_mut() {
                        s.push(x.clone());
                    }
                    if e.get(&x) < theta {
                        unstable.swap_remove(i);
                    }
                    if let Some(t) = target {
                        if newly.contains(t) {
                            stopped_early = true;
                            break;
                        }
                    }
                    unstable.extend(newly.drain(..));
                }
            }
        }
    }
    let topplings = e.topplings;
    let (configuration, odometer) = e.finish(model.dim());
    if opts.check_invariants && configuration.total() != c.total() {
        return Err(Error::InvariantViolation("total grain count changed".into()));
    }
    Ok(Stabilization {
        configuration,
        odometer,
        steps,
        topplings,
        watchdog_bound: bound,
        sequence,
        stopped_early,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn btw() -> SandpileModel {
        SandpileModel::von_neumann(1, 1).unwrap()
    }

    fn cfg1(p: &[(i64, u64)]) -> Configuration {
        Configuration::from_pairs(1, p.iter().map(|&(x, k)| ([x], k))).unwrap()
    }

    /// Naive oracle: repeatedly topple any unstable cell over a dense vector.
    fn dense_oracle(theta: u64, c: &[(i64, u64)], lo: i64, hi: i64) -> (Vec<u64>, Vec<u64>) {
        let w = (hi - lo + 1) as usize;
        let mut g = vec![0u64; w];
        let mut o = vec![0u64; w];
        for &(x, k) in c {
            g[(x - lo) as usize] += k;
        }
        loop {
            let Some(i) = (0..w).find(|&i| g[i] >= theta) else { break };
            g[i] -= theta;
            o[i] += 1;
            g[i - 1] += 1;
            g[i + 1] += 1;
        }
        (g, o)
    }

    #[test]
    fn parallel_step_examples() {
        let m = btw();
        assert!(parallel_step(&m, &Configuration::new(1)).unwrap().is_empty());
        let r = parallel_step(&m, &cfg1(&[(0, 3)])).unwrap();
        assert_eq!(r, cfg1(&[(-1, 1), (0, 1), (1, 1)]));
    }

    #[test]
    fn sequential_step_examples() {
        let m = btw();
        let c = cfg1(&[(0, 2), (1, 2)]);
        assert_eq!(sequential_step(&m, &c, &Cell::from([0])).unwrap(), cfg1(&[(-1, 1), (1, 3)]));
        let s = cfg1(&[(0, 1)]);
        assert_eq!(sequential_step(&m, &s, &Cell::from([0])).unwrap(), s);
    }

    #[test]
    fn stabilize_examples() {
        let m = btw();
        for p in [Policy::Parallel, Policy::SequentialLexMin, Policy::SequentialRandom(7)] {
            let s = stabilize(&m, &cfg1(&[(5, 1)]), p).unwrap();
            assert_eq!(s.configuration, cfg1(&[(5, 1)]));
            assert!(s.odometer.is_empty());
            assert_eq!(s.steps, 0);

            let s = stabilize(&m, &cfg1(&[(0, 2)]), p).unwrap();
            assert_eq!(s.configuration, cfg1(&[(-1, 1), (1, 1)]));
            assert_eq!(s.odometer, Odometer::from_pairs(1, [([0], 1)]));
            assert_eq!(s.steps, 1);

            let s = stabilize_with(&m, &cfg1(&[(0, 4)]), &Options::new(p).checked()).unwrap();
            let (g, o) = dense_oracle(2, &[(0, 4)], -10, 10);
            let want_c = cfg1(&g.iter().enumerate().map(|(i, &k)| (i as i64 - 10, k)).collect::<Vec<_>>());
            let want_o = Odometer::from_pairs(1, o.iter().enumerate().map(|(i, &k)| ([i as i64 - 10], k)));
            assert_eq!(s.configuration, want_c);
            assert_eq!(s.configuration, cfg1(&[(-2, 1), (-1, 1), (1, 1), (2, 1)]));
            assert_eq!(s.odometer, want_o);
            // cell 0 must topple three times: 4 - 3θ + 1 + 1 = 0
            assert_eq!(s.odometer, Odometer::from_pairs(1, [([-1], 1), ([0], 3), ([1], 1)]));
            if p != Policy::Parallel {
                assert_eq!(s.steps as u128, s.odometer.total());
            }
        }
    }

    #[test]
    fn incomplete_model_rejected() {
        let m = SandpileModel::new(1, vec![(Cell::from([1]), 2)]).unwrap();
        assert!(matches!(stabilize(&m, &cfg1(&[(0, 1)]), Policy::Parallel), Err(Error::IncompleteModel)));
    }

    #[test]
    fn watchdog_constant() {
        // d=1, θ=2, r=1, n=1: 2^7 * 1 * 2^3 * 1 * 1
        assert_eq!(watchdog_bound(1, 2, 1, 1), 1024);
        assert_eq!(watchdog_bound(3, 6, 1, 2), (1u128 << 13) * 81 * 6u128.pow(5) * 2u128.pow(15));
        assert_eq!(watchdog_bound(4, 1000, 9, 1000), u128::MAX);
    }

    #[test]
    fn effective_side_grows_for_tall_piles() {
        let c = cfg1(&[(0, 100)]);
        assert_eq!(effective_side(&c, 2), 25);
        assert_eq!(effective_side(&cfg1(&[(0, 1), (4, 1)]), 2), 5);
    }

    #[test]
    fn stop_when_target_unstable() {
        let m = btw();
        let mut o = Options::new(Policy::SequentialLexMin);
        o.stop_when_unstable = Some(Cell::from([1]));
        let s = stabilize_with(&m, &cfg1(&[(0, 4)]), &o).unwrap();
        assert!(s.stopped_early);
        o.stop_when_unstable = Some(Cell::from([3]));
        let s = stabilize_with(&m, &cfg1(&[(0, 4)]), &o).unwrap();
        assert!(!s.stopped_early);
    }

    #[test]
    fn policy_parsing() {
        assert_eq!(Policy::parse("seq-random", 9).unwrap(), Policy::SequentialRandom(9));
        assert_eq!("seq-random:4".parse::<Policy>().unwrap(), Policy::SequentialRandom(4));
        assert!("fifo".parse::<Policy>().is_err());
    }
}
