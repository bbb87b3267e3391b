//! Firing sequences, hitting sets, detector cells, and witnesses that one model simulates another.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fmt::Write;
use std::str::FromStr;

use rustc_hash::{FxHashMap, FxHashSet};

use crate::cell::Cell;
use crate::config::Configuration;
use crate::dynamics::{stabilize, Policy};
use crate::error::{Error, Result};
use crate::lattice::in_convex_hull;
use crate::model::SandpileModel;

/// Why a sequence is not a firing sequence. `condition` is 1, 2 or 3 as in the definition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub condition: u8,
    pub index: usize,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "condition {} fails at position {}: {}", self.condition, self.index, self.detail)
    }
}

/// A replayable sequence of topplings on a start configuration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiringSequence {
    pub cells: Vec<Cell>,
    pub start: Configuration,
    /// Whether a grain was added at the first cell before replaying.
    pub triggered: bool,
}

struct Replay<'a> {
    model: &'a SandpileModel,
    grains: FxHashMap<Cell, u64>,
}

impl<'a> Replay<'a> {
    fn new(model: &'a SandpileModel, c: &Configuration) -> Self {
        Replay { model, grains: c.iter().map(|(x, k)| (x.clone(), k)).collect() }
    }

    fn get(&self, x: &Cell) -> u64 {
        self.grains.get(x).copied().unwrap_or(0)
    }

    fn add(&mut self, x: &Cell, k: u64) {
        *self.grains.entry(x.clone()).or_insert(0) += k;
    }

    /// Caller guarantees the cell holds at least θ.
    fn topple(&mut self, x: &Cell) {
        *self.grains.get_mut(x).expect("unstable cell") -= self.model.threshold();
        for (v, w) in self.model.neighbors() {
            self.add(&(x + v), *w);
        }
    }

    fn untopple(&mut self, x: &Cell) {
        for (v, w) in self.model.neighbors() {
            *self.grains.get_mut(&(x + v)).expect("was hit") -= w;
        }
        self.add(x, self.model.threshold());
    }
}

/// Checks the three conditions: the first cell holds θ−1 and is fired by one added grain,
/// consecutive cells differ by a neighbour vector, and every later cell holds exactly θ when fired.
pub fn validate_firing_sequence(
    model: &SandpileModel,
    c: &Configuration,
    cells: &[Cell],
) -> std::result::Result<(), Violation> {
    let Some(first) = cells.first() else {
        return Ok(());
    };
    let theta = model.threshold();
    if c.get(first) + 1 != theta {
        return Err(Violation { condition: 1, index: 0, detail: format!("{first} holds {}", c.get(first)) });
    }
    let mut r = Replay::new(model, c);
    r.add(first, 1);
    for (i, x) in cells.iter().enumerate() {
        if i > 0 {
            let step = x - &cells[i - 1];
            if !model.contains(&step) {
                return Err(Violation { condition: 2, index: i, detail: format!("step {step} is not a neighbour") });
            }
            if r.get(x) != theta {
                return Err(Violation { condition: 3, index: i, detail: format!("{x} holds {} when fired", r.get(x)) });
            }
        }
        r.topple(x);
    }
    Ok(())
}

impl FiringSequence {
    /// A validated firing sequence.
    pub fn new(model: &SandpileModel, c: &Configuration, cells: Vec<Cell>) -> Result<Self> {
        validate_firing_sequence(model, c, &cells).map_err(|v| Error::NotApplicable(v.to_string()))?;
        Ok(FiringSequence { cells, start: c.clone(), triggered: true })
    }

    /// A sequence that only has to be replayable: each cell is unstable at its turn. The trigger
    /// grain is added only if the first cell is not already unstable.
    pub fn replay(model: &SandpileModel, c: &Configuration, cells: Vec<Cell>) -> Result<Self> {
        let theta = model.threshold();
        let triggered = cells.first().map_or(false, |x| c.get(x) < theta);
        let mut r = Replay::new(model, c);
        if triggered {
            r.add(&cells[0], 1);
        }
        for (i, x) in cells.iter().enumerate() {
            if r.get(x) < theta {
                return Err(Error::NotApplicable(format!("cell {x} at position {i} is stable when fired")));
            }
            r.topple(x);
        }
        Ok(FiringSequence { cells, start: c.clone(), triggered })
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Configuration after replaying the whole sequence.
    pub fn end(&self, model: &SandpileModel) -> Configuration {
        let mut r = Replay::new(model, &self.start);
        if self.triggered {
            if let Some(x) = self.cells.first() {
                r.add(x, 1);
            }
        }
        for x in &self.cells {
            r.topple(x);
        }
        let mut pairs: Vec<_> = r.grains.into_iter().filter(|&(_, k)| k > 0).collect();
        pairs.sort();
        Configuration::from_pairs(self.start.dim(), pairs).expect("same dimension")
    }
}

/// Cells that received grains from the sequence, with total receipts.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct HittingSet {
    pub pairs: BTreeMap<Cell, u64>,
}

impl HittingSet {
    pub fn get(&self, x: &Cell) -> u64 {
        self.pairs.get(x).copied().unwrap_or(0)
    }

    pub fn cells(&self) -> impl Iterator<Item = &Cell> + '_ {
        self.pairs.keys()
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// Receipts of every cell when the listed cells each fire once under `model`.
pub fn receipts(model: &SandpileModel, fired: &[Cell]) -> HittingSet {
    let mut pairs = BTreeMap::new();
    for x in fired {
        for (v, w) in model.neighbors() {
            *pairs.entry(x + v).or_insert(0) += w;
        }
    }
    HittingSet { pairs }
}

pub fn hitting_set(model: &SandpileModel, seq: &FiringSequence) -> HittingSet {
    receipts(model, &seq.cells)
}

/// Hitting-set cells strictly outside the convex hull of the support of `c`.
pub fn detector_cells(model: &SandpileModel, c: &Configuration, seq: &FiringSequence) -> Result<BTreeSet<Cell>> {
    if c.is_empty() {
        return Err(Error::NotApplicable("an empty configuration has no detector cells".into()));
    }
    let support: Vec<Cell> = c.cells().cloned().collect();
    Ok(hitting_set(model, seq).cells().filter(|y| !in_convex_hull(&support, y)).cloned().collect())
}

const SEARCH_BUDGET: usize = 200_000;

/// The avalanche of `c + 1_x` ordered as a firing sequence, preferring lexicographically small
/// next cells. Needs every cell to topple at most once.
pub fn firing_sequence_for(model: &SandpileModel, c: &Configuration, x: &Cell) -> Result<FiringSequence> {
    let theta = model.threshold();
    if !c.is_stable(theta) {
        return Err(Error::InvalidInstance("configuration is not stable".into()));
    }
    if c.get(x) + 1 != theta {
        return Err(Error::NotApplicable(format!("adding a grain at {x} triggers nothing")));
    }
    let s = stabilize(model, &c.add_grain(x)?, Policy::SequentialLexMin)?;
    if s.odometer.max() > 1 {
        return Err(Error::NotApplicable("a cell topples more than once in the avalanche".into()));
    }
    let todo: FxHashSet<Cell> = s.odometer.iter().map(|(z, _)| z.clone()).collect();
    let mut r = Replay::new(model, c);
    r.add(x, 1);
    r.topple(x);
    let mut seq = vec![x.clone()];
    let mut fired: FxHashSet<Cell> = [x.clone()].into_iter().collect();
    let mut budget = SEARCH_BUDGET;
    let mut steps: Vec<Cell> = model.neighbors().iter().map(|(v, _)| v.clone()).collect();
    steps.sort();
    if dfs(&mut r, &todo, &mut fired, &mut seq, &steps, &mut budget, theta) {
        Ok(FiringSequence { cells: seq, start: c.clone(), triggered: true })
    } else if budget == 0 {
        Err(Error::NotApplicable("search budget for a firing sequence exhausted".into()))
    } else {
        Err(Error::NotApplicable("the avalanche admits no neighbour-chained firing order".into()))
    }
}

fn dfs(
    r: &mut Replay,
    todo: &FxHashSet<Cell>,
    fired: &mut FxHashSet<Cell>,
    seq: &mut Vec<Cell>,
    steps: &[Cell],
    budget: &mut usize,
    theta: u64,
) -> bool {
    if fired.len() == todo.len() {
        return true;
    }
    if *budget == 0 {
        return false;
    }
    *budget -= 1;
    // a pending cell already above θ can never be fired at exactly θ
    if todo.iter().any(|z| !fired.contains(z) && r.get(z) > theta) {
        return false;
    }
    let last = seq.last().unwrap().clone();
    let mut next: Vec<Cell> = steps
        .iter()
        .map(|v| &last + v)
        .filter(|z| todo.contains(z) && !fired.contains(z) && r.get(z) == theta)
        .collect();
    next.sort();
    for z in next {
        r.topple(&z);
        fired.insert(z.clone());
        seq.push(z.clone());
        if dfs(r, todo, fired, seq, steps, budget, theta) {
            return true;
        }
        seq.pop();
        fired.remove(&z);
        r.untopple(&z);
    }
    false
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Lemma {
    /// One more neighbour direction with weight one, threshold plus one.
    Extend,
    /// One weight raised by k, threshold plus k.
    Increase,
    /// One weight lowered by k, threshold minus k.
    Decrease,
}

impl FromStr for Lemma {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "extend" => Ok(Lemma::Extend),
            "increase" => Ok(Lemma::Increase),
            "decrease" => Ok(Lemma::Decrease),
            _ => Err(Error::InvalidInstance(format!("unknown lemma {s:?}"))),
        }
    }
}

impl fmt::Display for Lemma {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Lemma::Extend => "extend",
            Lemma::Increase => "increase",
            Lemma::Decrease => "decrease",
        })
    }
}

/// An instance of the simulated model: a stable configuration, the cell receiving the grain,
/// and optionally the detector to watch.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimulationInstance {
    pub configuration: Configuration,
    pub trigger: Cell,
    pub detector: Option<Cell>,
}

impl From<crate::io::InstanceFile> for SimulationInstance {
    fn from(f: crate::io::InstanceFile) -> Self {
        SimulationInstance { configuration: f.configuration, trigger: f.trigger, detector: f.detector }
    }
}

#[derive(Clone, Debug)]
pub struct SimulationWitness {
    pub lemma: Lemma,
    pub reading: Receipts,
    /// The simulated model.
    pub source: SandpileModel,
    /// The simulating model.
    pub target: SandpileModel,
    pub transform: String,
    pub configuration: Configuration,
    pub trigger: Cell,
    pub detector: Cell,
    pub sequence: Vec<Cell>,
    /// Hitting set used to craft the target configuration.
    pub hitting: HittingSet,
    pub crafted: Configuration,
    /// Sequence cells whose crafted content would be negative; they were set to zero.
    pub clamped: Vec<Cell>,
    pub source_result: Configuration,
    pub target_result: Configuration,
}

impl SimulationWitness {
    pub fn source_bit(&self) -> bool {
        self.source_result.get(&self.detector) > 0
    }

    pub fn target_bit(&self) -> bool {
        self.target_result.get(&self.detector) > 0
    }

    /// The simulation contract on this instance.
    pub fn preserved(&self) -> bool {
        !self.source_bit() || self.target_bit()
    }

    pub fn report(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "lemma: {}", self.lemma);
        let _ = writeln!(s, "transform: {}", self.transform);
        let reading = match self.reading {
            Receipts::BeforeFiring => "before firing",
            Receipts::Total => "total",
        };
        let _ = writeln!(s, "receipts: {reading}");
        let _ = writeln!(s, "source threshold: {}", self.source.threshold());
        let _ = writeln!(s, "target threshold: {}", self.target.threshold());
        let _ = writeln!(s, "trigger: {}", self.trigger);
        let _ = writeln!(s, "detector: {}", self.detector);
        let seq: Vec<String> = self.sequence.iter().map(|c| c.to_string()).collect();
        let _ = writeln!(s, "firing sequence: {}", seq.join(" "));
        let _ = writeln!(s, "hitting set size: {}", self.hitting.len());
        if !self.clamped.is_empty() {
            let cl: Vec<String> = self.clamped.iter().map(|c| c.to_string()).collect();
            let _ = writeln!(s, "finding: crafted contents clamped to 0 at {}", cl.join(" "));
        }
        let _ = writeln!(s, "source bit: {}", self.source_bit() as u8);
        let _ = writeln!(s, "target bit: {}", self.target_bit() as u8);
        let verdict = if self.preserved() { "preserved" } else { "COUNTEREXAMPLE: detector bit lost" };
        let _ = writeln!(s, "verdict: {verdict}");
        s
    }
}

/// The source side of every lemma: firing sequence, hitting set, detector, stable result.
struct SourceRun {
    seq: FiringSequence,
    detector: Cell,
    result: Configuration,
}

fn source_run(model: &SandpileModel, inst: &SimulationInstance) -> Result<SourceRun> {
    let c = &inst.configuration;
    let seq = firing_sequence_for(model, c, &inst.trigger)?;
    let detectors = detector_cells(model, c, &seq)?;
    let detector = match &inst.detector {
        Some(y) if detectors.contains(y) => y.clone(),
        Some(y) => return Err(Error::NotApplicable(format!("{y} is not a detector cell"))),
        None => detectors
            .iter()
            .next()
            .cloned()
            .ok_or_else(|| Error::NotApplicable("the avalanche has no detector cell".into()))?,
    };
    let result = seq.end(model);
    Ok(SourceRun { seq, detector, result })
}

/// Which receipts of a sequence cell the crafted configuration subtracts from θ.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Receipts {
    /// Grains received from the cells fired before it.
    #[default]
    BeforeFiring,
    /// All grains received over the whole sequence.
    Total,
}

impl FromStr for Receipts {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "before-firing" | "prefix" => Ok(Receipts::BeforeFiring),
            "total" => Ok(Receipts::Total),
            _ => Err(Error::InvalidInstance(format!("unknown receipts reading {s:?}"))),
        }
    }
}

/// Receipts of each sequence cell under `model` according to `reading`.
fn sequence_receipts(model: &SandpileModel, seq: &[Cell], reading: Receipts) -> Vec<u64> {
    let total = receipts(model, seq);
    seq.iter()
        .enumerate()
        .map(|(i, z)| match reading {
            Receipts::Total => total.get(z),
            Receipts::BeforeFiring => seq[..i].iter().map(|x| model.weight(&(z - x))).sum(),
        })
        .collect()
}

/// Trigger at θ−1, sequence cells at θ minus their receipts, everything else empty.
fn craft(theta: u64, dim: usize, trigger: &Cell, seq: &[Cell], got: &[u64]) -> (Configuration, Vec<Cell>) {
    let mut grains = BTreeMap::new();
    let mut clamped = Vec::new();
    for (z, &v) in seq.iter().zip(got).skip(1) {
        if v > theta {
            clamped.push(z.clone());
        }
        grains.insert(z.clone(), theta.saturating_sub(v));
    }
    grains.insert(trigger.clone(), theta - 1);
    let c = Configuration::from_pairs(dim, grains.into_iter().filter(|&(_, k)| k > 0)).expect("same dimension");
    (c, clamped)
}

#[allow(clippy::too_many_arguments)]
fn finish(
    lemma: Lemma,
    source: &SandpileModel,
    target: SandpileModel,
    transform: String,
    inst: &SimulationInstance,
    run: SourceRun,
    weights: &SandpileModel,
    reading: Receipts,
) -> Result<SimulationWitness> {
    let got = sequence_receipts(weights, &run.seq.cells, reading);
    let hitting = receipts(weights, &run.seq.cells);
    let (crafted, clamped) = craft(target.threshold(), target.dim(), &inst.trigger, &run.seq.cells, &got);
    if !crafted.is_stable(target.threshold()) {
        return Err(Error::InvariantViolation("crafted configuration is unstable".into()));
    }
    let target_result = stabilize(&target, &crafted.add_grain(&inst.trigger)?, Policy::SequentialLexMin)?.configuration;
    Ok(SimulationWitness {
        lemma,
        reading,
        source: source.clone(),
        target,
        transform,
        configuration: inst.configuration.clone(),
        trigger: inst.trigger.clone(),
        detector: run.detector,
        sequence: run.seq.cells,
        hitting,
        crafted,
        clamped,
        source_result: run.result,
        target_result,
    })
}

fn check_instance(model: &SandpileModel, inst: &SimulationInstance) -> Result<()> {
    if inst.configuration.dim() != model.dim() || inst.trigger.dim() != model.dim() {
        return Err(Error::DimensionMismatch { expected: model.dim(), found: inst.configuration.dim() });
    }
    if !model.is_complete() {
        return Err(Error::IncompleteModel);
    }
    Ok(())
}

/// `m2` is simulated by the model with `u` added (weight 1, threshold plus one). The crafted
/// configuration uses the receipts under `m2`.
pub fn simulate_extend_neighborhood(m2: &SandpileModel, u: &Cell, inst: &SimulationInstance) -> Result<SimulationWitness> {
    extend(m2, u, inst, Receipts::default())
}

fn extend(m2: &SandpileModel, u: &Cell, inst: &SimulationInstance, reading: Receipts) -> Result<SimulationWitness> {
    check_instance(m2, inst)?;
    if u.is_zero() || m2.contains(u) {
        return Err(Error::InvalidModel(format!("{u} must be a new non-zero neighbour")));
    }
    let mut nb = m2.neighbors().to_vec();
    nb.push((u.clone(), 1));
    let m1 = SandpileModel::new_complete(m2.dim(), nb)?;
    let run = source_run(m2, inst)?;
    finish(Lemma::Extend, m2, m1, format!("add neighbour {u} with weight 1"), inst, run, m2, reading)
}

fn reweighted(
    lemma: Lemma,
    m1: &SandpileModel,
    u: &Cell,
    k: u64,
    inst: &SimulationInstance,
    reading: Receipts,
) -> Result<SimulationWitness> {
    check_instance(m1, inst)?;
    if k == 0 {
        return Err(Error::InvalidInstance("k must be positive".into()));
    }
    let w = m1.weight(u);
    if w == 0 {
        return Err(Error::InvalidModel(format!("{u} is not a neighbour")));
    }
    let nw = match lemma {
        Lemma::Increase => w + k,
        _ if w > k => w - k,
        _ => return Err(Error::InvalidModel(format!("weight {w} of {u} cannot drop by {k}"))),
    };
    let m2 = m1.with_weight(u, nw)?;
    let run = source_run(m1, inst)?;
    // receipts replayed under the simulating model's weights
    let weights = m2.clone();
    finish(lemma, m1, m2, format!("weight of {u}: {w} -> {nw}"), inst, run, &weights, reading)
}

/// `m1` is simulated by the model with the weight of `u` and the threshold raised by `k`.
pub fn simulate_increase_distribution(m1: &SandpileModel, u: &Cell, k: u64, inst: &SimulationInstance) -> Result<SimulationWitness> {
    reweighted(Lemma::Increase, m1, u, k, inst, Receipts::default())
}

/// `m1` is simulated by the model with the weight of `u` and the threshold lowered by `k`.
pub fn simulate_decrease_distribution(m1: &SandpileModel, u: &Cell, k: u64, inst: &SimulationInstance) -> Result<SimulationWitness> {
    reweighted(Lemma::Decrease, m1, u, k, inst, Receipts::default())
}

/// Any lemma with an explicit receipts reading.
pub fn simulate(
    lemma: Lemma,
    model: &SandpileModel,
    u: &Cell,
    k: u64,
    inst: &SimulationInstance,
    reading: Receipts,
) -> Result<SimulationWitness> {
    match lemma {
        Lemma::Extend => extend(model, u, inst, reading),
        _ => reweighted(lemma, model, u, k, inst, reading),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn btw() -> SandpileModel {
        SandpileModel::von_neumann(1, 1).unwrap()
    }

    fn cfg(pairs: &[(i64, u64)]) -> Configuration {
        Configuration::from_pairs(1, pairs.iter().map(|&(x, k)| ([x], k))).unwrap()
    }

    fn c1(x: i64) -> Cell {
        Cell::new(&[x])
    }

    #[test]
    fn validation() {
        let m = btw();
        let c = cfg(&[(0, 1), (1, 1)]);
        assert!(validate_firing_sequence(&m, &c, &[c1(0), c1(1)]).is_ok());
        assert_eq!(validate_firing_sequence(&m, &c, &[c1(0), c1(5)]).unwrap_err().condition, 2);
        assert!(validate_firing_sequence(&m, &c, &[]).is_ok());
        assert_eq!(validate_firing_sequence(&m, &cfg(&[(0, 0), (1, 1)]), &[c1(1), c1(0)]).unwrap_err().condition, 3);
        assert_eq!(validate_firing_sequence(&m, &cfg(&[(1, 1)]), &[c1(0)]).unwrap_err().condition, 1);
    }

    #[test]
    fn hitting_and_detectors() {
        let m = btw();
        let c = cfg(&[(0, 1), (1, 1)]);
        let one = FiringSequence::new(&m, &c, vec![c1(0)]).unwrap();
        let h = hitting_set(&m, &one);
        assert_eq!(h.pairs, [(c1(-1), 1), (c1(1), 1)].into_iter().collect());
        let empty = FiringSequence::new(&m, &c, vec![]).unwrap();
        assert!(hitting_set(&m, &empty).is_empty());
        let seq = firing_sequence_for(&m, &c, &c1(0)).unwrap();
        assert_eq!(seq.cells, vec![c1(0), c1(1)]);
        let det = detector_cells(&m, &c, &seq).unwrap();
        assert_eq!(det, [c1(-1), c1(2)].into_iter().collect());
        assert!(detector_cells(&m, &Configuration::new(1), &empty).is_err());
    }

    #[test]
    fn hitting_set_matches_replay() {
        let m = btw();
        let c = cfg(&[(0, 1), (1, 1), (2, 1), (3, 1)]);
        let seq = firing_sequence_for(&m, &c, &c1(0)).unwrap();
        let h = hitting_set(&m, &seq);
        // receipts = end - start - trigger + θ·fired
        let end = seq.end(&m);
        for x in (-2..6).map(c1) {
            let fired = seq.cells.iter().filter(|z| **z == x).count() as u64;
            let trig = (x == seq.cells[0]) as u64;
            assert_eq!(h.get(&x), end.get(&x) + 2 * fired - c.get(&x) - trig, "{x}");
        }
    }

    #[test]
    fn lemma_examples() {
        let m = btw();
        let inst = SimulationInstance { configuration: cfg(&[(0, 1), (1, 1)]), trigger: c1(0), detector: Some(c1(2)) };
        let w = simulate_extend_neighborhood(&m, &c1(2), &inst).unwrap();
        assert_eq!(w.target.threshold(), 3);
        assert!(w.source_bit() && w.preserved());
        assert!(simulate_increase_distribution(&m, &c1(1), 1, &inst).unwrap().preserved());
        assert!(matches!(simulate_increase_distribution(&m, &c1(1), 0, &inst), Err(Error::InvalidInstance(_))));
        assert!(simulate_decrease_distribution(&m, &c1(1), 1, &inst).is_err());
        let heavy = SandpileModel::new(1, vec![(c1(-1), 2), (c1(1), 2)]).unwrap();
        let inst2 = SimulationInstance { configuration: cfg(&[(0, 3), (1, 2)]), trigger: c1(0), detector: None };
        assert!(simulate_decrease_distribution(&heavy, &c1(1), 1, &inst2).unwrap().preserved());
        // under the total-receipts reading a cell hit again after firing never reaches θ
        let back = SimulationInstance { configuration: cfg(&[(-2, 1), (-1, 1), (0, 1)]), trigger: c1(0), detector: Some(c1(-3)) };
        let w = simulate(Lemma::Extend, &m, &c1(2), 0, &back, Receipts::Total).unwrap();
        assert!(w.source_bit() && !w.preserved());
        assert!(simulate_extend_neighborhood(&m, &c1(2), &back).unwrap().preserved());
        // nothing topples
        let flat = SimulationInstance { configuration: cfg(&[(0, 0), (1, 1)]), trigger: c1(5), detector: None };
        assert!(matches!(simulate_extend_neighborhood(&m, &c1(2), &flat), Err(Error::NotApplicable(_))));
    }
}
