//! Routing a layered circuit onto a grid of macrocells and placing the grid in a model.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use num_traits::{One, Zero};

use crate::cell::Cell;
use crate::config::Configuration;
use crate::dynamics::{stabilize_with, Options, Policy};
use crate::error::{Error, Result};
use crate::lattice::{coordinates_in_span3, rank};
use crate::model::SandpileModel;

use super::gadget::{gadget, Dir, MacroKind};
use super::CircuitInstance;

/// Three model vectors spanning the sublattice that carries the layout.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Basis {
    pub x: Cell,
    pub y: Cell,
    pub z: Cell,
    /// Candidate triples examined before this one was accepted.
    pub tried: usize,
}

impl Basis {
    pub fn new(x: Cell, y: Cell, z: Cell) -> Self {
        Basis { x, y, z, tried: 1 }
    }

    /// The first three unit vectors of `Z^d`.
    pub fn units(d: usize) -> Self {
        Basis::new(Cell::axis(d, 0, 1), Cell::axis(d, 1, 1), Cell::axis(d, 2, 1))
    }

    pub fn identity() -> Self {
        Basis::units(3)
    }

    pub fn dir(&self, d: Dir) -> &Cell {
        match d {
            Dir::X => &self.x,
            Dir::Y => &self.y,
            Dir::Z => &self.z,
        }
    }

    pub fn map(&self, p: [i64; 3]) -> Cell {
        let d = self.x.dim();
        Cell::from(
            (0..d)
                .map(|i| p[0] * self.x[i] + p[1] * self.y[i] + p[2] * self.z[i])
                .collect::<Vec<i64>>(),
        )
    }

    /// The vectors are neighbours, independent, and no other neighbour is an integer
    /// combination of them.
    pub fn check(&self, model: &SandpileModel) -> Result<()> {
        let d = model.dim();
        if d < 3 || [&self.x, &self.y, &self.z].iter().any(|v| v.dim() != d) {
            return Err(Error::Unsupported("circuits need a model of dimension at least 3".into()));
        }
        if ![&self.x, &self.y, &self.z].iter().all(|v| model.contains(v)) {
            return Err(Error::BasisSelectionFailed("basis vectors must be neighbours".into()));
        }
        if rank(&[self.x.clone(), self.y.clone(), self.z.clone()], d) < 3 {
            return Err(Error::BasisSelectionFailed("basis vectors are dependent".into()));
        }
        if let Some(v) = exclusion_witness(model, &self.x, &self.y, &self.z) {
            return Err(Error::BasisSelectionFailed(format!("neighbour {v} lies on the sublattice")));
        }
        Ok(())
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x={} y={} z={}", self.x, self.y, self.z)
    }
}

/// A neighbour that is an integer combination of x, y, z other than a signed unit.
pub fn exclusion_witness(model: &SandpileModel, x: &Cell, y: &Cell, z: &Cell) -> Option<Cell> {
    model.neighbors().iter().map(|(v, _)| v).find(|v| {
        let Some(co) = coordinates_in_span3(x, y, z, v) else {
            return false;
        };
        if !co.iter().all(|q| q.is_integer()) {
            return false;
        }
        let nonzero: Vec<_> = co.iter().filter(|q| !q.is_zero()).collect();
        !(nonzero.len() == 1 && (nonzero[0].is_one() || (-nonzero[0].clone()).is_one()))
    }).cloned()
}

/// Exact fraction `num / den` with `den > 0`.
#[derive(Clone, Copy)]
struct Frac(i128, i128);

impl Frac {
    fn cmp(self, o: Frac) -> Ordering {
        (self.0 * o.1).cmp(&(o.0 * self.1))
    }
}

/// Squared length of the part of `u` orthogonal to `x`.
fn perp1(u: &Cell, x: &Cell) -> Frac {
    let xx = x.norm2_sq();
    let ux = u.dot(x);
    Frac(u.norm2_sq() * xx - ux * ux, xx)
}

/// Squared length of the part of `u` orthogonal to `x` and `y`.
fn perp2(u: &Cell, x: &Cell, y: &Cell) -> Frac {
    let (xx, yy, xy) = (x.norm2_sq(), y.norm2_sq(), x.dot(y));
    let det = xx * yy - xy * xy;
    let (a, b) = (u.dot(x), u.dot(y));
    Frac(u.norm2_sq() * det - (a * a * yy - 2 * a * b * xy + b * b * xx), det)
}

fn ranked<F: Fn(&Cell) -> Frac>(cands: &[Cell], score: F) -> Vec<Cell> {
    let mut v: Vec<(Frac, Cell)> = cands.iter().map(|c| (score(c), c.clone())).filter(|(s, _)| s.0 > 0).collect();
    v.sort_by(|(s, a), (t, b)| t.cmp(*s).then_with(|| b.cmp(a)));
    v.into_iter().map(|(_, c)| c).collect()
}

/// Picks x of maximal length, y maximising the part orthogonal to x, z maximising the part
/// orthogonal to both. If the exclusion property fails the next candidates are tried in the
/// same order until one passes.
pub fn select_basis(model: &SandpileModel) -> Result<Basis> {
    if model.dim() < 3 {
        return Err(Error::Unsupported("circuits need a model of dimension at least 3".into()));
    }
    let cands: Vec<Cell> = model.neighbors().iter().map(|(v, _)| v.clone()).collect();
    let mut tried = 0;
    for x in ranked(&cands, |u| Frac(u.norm2_sq(), 1)) {
        for y in ranked(&cands, |u| perp1(u, &x)) {
            for z in ranked(&cands, |u| perp2(u, &x, &y)) {
                tried += 1;
                if exclusion_witness(model, &x, &y, &z).is_none() {
                    return Ok(Basis { x, y, z, tried });
                }
            }
        }
    }
    Err(Error::BasisSelectionFailed(format!("none of {tried} candidate triples isolates the sublattice")))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum TriggerStyle {
    /// The trigger must be the lexicographically least non-empty cell.
    #[default]
    FirstColumn,
    Free,
}

impl FromStr for TriggerStyle {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "first-column" | "firstcol" => Ok(TriggerStyle::FirstColumn),
            "free" => Ok(TriggerStyle::Free),
            _ => Err(Error::InvalidInstance(format!("unknown trigger style {s:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct PlacedMacro {
    pub col: i64,
    pub row: i64,
    pub kind: MacroKind,
}

/// Macro grid for a circuit, without the input bus, which depends on the constants.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Layout {
    pub macros: Vec<PlacedMacro>,
    pub input_rows: Vec<i64>,
    pub probe: (i64, i64),
    pub crossings: usize,
}

#[derive(Default)]
struct Grid {
    fixed: BTreeMap<(i64, i64), MacroKind>,
    horiz: BTreeSet<(i64, i64)>,
    vert: BTreeSet<(i64, i64)>,
}

impl Grid {
    fn put(&mut self, col: i64, row: i64, kind: MacroKind) -> Result<()> {
        match self.fixed.insert((col, row), kind) {
            Some(old) if old != kind => Err(Error::Layout(format!("{old} and {kind} collide at ({col},{row})"))),
            _ => Ok(()),
        }
    }

    fn finish(self) -> Result<Vec<PlacedMacro>> {
        let mut out: BTreeMap<(i64, i64), MacroKind> = self.fixed;
        for &p in self.horiz.union(&self.vert) {
            let kind = match (self.horiz.contains(&p), self.vert.contains(&p)) {
                (true, true) => MacroKind::Cross,
                (true, false) => MacroKind::WireH,
                _ => MacroKind::WireV,
            };
            if let Some(k) = out.insert(p, kind) {
                return Err(Error::Layout(format!("{k} and a passing channel collide at {p:?}")));
            }
        }
        Ok(out.into_iter().map(|((col, row), kind)| PlacedMacro { col, row, kind }).collect())
    }
}

impl Layout {
    pub fn build(circuit: &CircuitInstance) -> Result<Layout> {
        let gates = circuit.gates();
        let n = gates.len();
        let mut row_of = vec![0i64; n];
        let mut col_of = vec![0i64; n];
        let inputs = circuit.inputs();
        for (i, &g) in inputs.iter().enumerate() {
            row_of[g] = 1 + i as i64;
        }
        let mut grid = Grid::default();
        let mut consumers = vec![Vec::new(); n];
        for (i, g) in gates.iter().enumerate() {
            for &j in &g.inputs {
                consumers[j].push(i);
            }
        }
        let mut stub = 1;
        for k in 1..circuit.layers() {
            let prev = circuit.layer(k - 1);
            let mut sources: Vec<usize> = prev.iter().copied().filter(|&s| !consumers[s].is_empty()).collect();
            sources.sort_by_key(|&s| row_of[s]);
            let base = prev.iter().map(|&s| row_of[s]).max().unwrap_or(0) + 1;
            let a0 = stub + 1 + sources.len() as i64;
            let (a1, gcol) = (a0 + 1, a0 + 2);
            // sink rows per source
            let mut sinks: BTreeMap<usize, Vec<i64>> = BTreeMap::new();
            for (i, g) in circuit.layer(k).into_iter().enumerate() {
                let j = base + 3 * i as i64 + 2;
                row_of[g] = j;
                col_of[g] = gcol;
                let ins = &gates[g].inputs;
                if ins.len() == 2 {
                    sinks.entry(ins[0]).or_default().push(j - 2);
                    sinks.entry(ins[1]).or_default().push(j - 1);
                    grid.put(a0, j - 2, MacroKind::TurnWN)?;
                    grid.put(a0, j - 1, MacroKind::Cross)?;
                    grid.put(a0, j, MacroKind::DiodeSE)?;
                    grid.put(a1, j, MacroKind::WireH)?;
                    grid.put(a1, j - 1, MacroKind::WireH)?;
                    grid.put(gcol, j - 1, MacroKind::DiodeWN)?;
                    let kind = if gates[g].kind == super::GateKind::And { MacroKind::And } else { MacroKind::Or };
                    grid.put(gcol, j, kind)?;
                } else {
                    sinks.entry(ins[0]).or_default().push(j - 1);
                    grid.put(a0, j - 1, MacroKind::WireH)?;
                    grid.put(a1, j - 1, MacroKind::WireH)?;
                    grid.put(gcol, j - 1, MacroKind::DiodeWN)?;
                    grid.put(gcol, j, MacroKind::TurnSE)?;
                }
            }
            for (t, &s) in sources.iter().enumerate() {
                let track = stub + 1 + t as i64;
                let r0 = row_of[s];
                grid.put(stub, r0, MacroKind::WireH)?;
                for c in stub + 1..track {
                    grid.horiz.insert((c, r0));
                }
                grid.put(track, r0, MacroKind::TurnWN)?;
                let rows = &sinks[&s];
                let top = *rows.iter().max().unwrap();
                for r in r0 + 1..=top {
                    if rows.contains(&r) {
                        grid.put(track, r, if r == top { MacroKind::TurnSE } else { MacroKind::MultS })?;
                        for c in track + 1..a0 {
                            grid.horiz.insert((c, r));
                        }
                    } else {
                        grid.vert.insert((track, r));
                    }
                }
            }
            stub = gcol + 1;
        }
        let out = circuit.output();
        let probe = (col_of[out] + 1, row_of[out]);
        grid.fixed.insert(probe, MacroKind::Probe);
        let macros = grid.finish()?;
        let crossings = macros.iter().filter(|m| m.kind == MacroKind::Cross).count();
        let input_rows = inputs.iter().map(|&g| row_of[g]).collect();
        Ok(Layout { macros, input_rows, probe, crossings })
    }

    /// Column 0: the trigger and the bus feeding the inputs set to one.
    pub fn bus(&self, assignment: &[bool]) -> Vec<PlacedMacro> {
        let mut v = vec![PlacedMacro { col: 0, row: 0, kind: MacroKind::Trigger }];
        let top = self.input_rows.iter().zip(assignment).filter(|(_, &b)| b).map(|(&r, _)| r).max();
        if let Some(top) = top {
            for row in 1..=top {
                let one = self.input_rows.iter().zip(assignment).any(|(&r, &b)| b && r == row);
                let kind = match (one, row == top) {
                    (true, true) => MacroKind::TurnSE,
                    (true, false) => MacroKind::MultS,
                    _ => MacroKind::WireV,
                };
                v.push(PlacedMacro { col: 0, row, kind });
            }
        }
        v
    }

    /// Places every macro. Returns the configuration, the trigger and the question cell.
    pub fn materialize(
        &self,
        model: &SandpileModel,
        basis: &Basis,
        assignment: &[bool],
    ) -> Result<(Configuration, Cell, Cell)> {
        if assignment.len() != self.input_rows.len() {
            return Err(Error::InvalidInstance("assignment length mismatch".into()));
        }
        let mut grains: BTreeMap<Cell, u64> = BTreeMap::new();
        for m in self.bus(assignment).iter().chain(&self.macros) {
            let origin = [5 * m.col, 5 * m.row, 2 * m.col];
            for (cell, v) in gadget(m.kind).place(model, basis, origin) {
                if grains.insert(cell.clone(), v).is_some() {
                    return Err(Error::Layout(format!("two gadgets claim cell {cell}")));
                }
            }
        }
        let (pc, pr) = self.probe;
        let question = basis.map([5 * pc + 2, 5 * pr + 2, 2 * pc]);
        let conf = Configuration::from_pairs(model.dim(), grains.into_iter().filter(|(_, v)| *v > 0))?;
        Ok((conf, basis.map([2, 2, 0]), question))
    }
}

/// A compiled circuit: adding one grain at `trigger` makes `question` topple iff the circuit
/// outputs one.
#[derive(Clone, Debug)]
pub struct Compiled {
    pub configuration: Configuration,
    pub trigger: Cell,
    pub question: Cell,
    pub basis: Basis,
    pub macros: usize,
    pub crossings: usize,
}

impl Compiled {
    /// Runs the avalanche and reports whether the question cell toppled.
    pub fn run(&self, model: &SandpileModel) -> Result<bool> {
        let c = self.configuration.add_grain(&self.trigger)?;
        let mut opts = Options::new(Policy::SequentialLexMin);
        opts.stop_when_unstable = Some(self.question.clone());
        let s = stabilize_with(model, &c, &opts)?;
        Ok(s.stopped_early || s.odometer.get(&self.question) > 0)
    }

    /// Like [`run`](Self::run) but stabilizes completely and returns the largest toppling count.
    pub fn run_full(&self, model: &SandpileModel) -> Result<(bool, u64)> {
        let c = self.configuration.add_grain(&self.trigger)?;
        let s = stabilize_with(model, &c, &Options::new(Policy::SequentialLexMin))?;
        Ok((s.odometer.get(&self.question) > 0, s.odometer.max()))
    }
}

pub fn compile_with_basis(
    circuit: &CircuitInstance,
    model: &SandpileModel,
    basis: &Basis,
    style: TriggerStyle,
) -> Result<Compiled> {
    basis.check(model)?;
    let layout = Layout::build(circuit)?;
    let (configuration, trigger, question) = layout.materialize(model, basis, &circuit.assignment())?;
    if style == TriggerStyle::FirstColumn && configuration.min_cell() != Some(&trigger) {
        return Err(Error::Layout("the trigger is not the least cell under this basis".into()));
    }
    Ok(Compiled {
        configuration,
        trigger,
        question,
        basis: basis.clone(),
        macros: layout.macros.len() + layout.bus(&circuit.assignment()).len(),
        crossings: layout.crossings,
    })
}

/// Compiles a circuit into a model of dimension at least 3. The basis comes from
/// [`select_basis`]; for the nearest-neighbour model it is the standard one.
pub fn compile(circuit: &CircuitInstance, model: &SandpileModel, style: TriggerStyle) -> Result<Compiled> {
    let basis = select_basis(model)?;
    compile_with_basis(circuit, model, &basis, style)
}

/// The same layout transplanted into an arbitrary complete model of dimension at least 3.
pub fn embed_general(model: &SandpileModel, circuit: &CircuitInstance) -> Result<Compiled> {
    compile(circuit, model, TriggerStyle::Free)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::gadget::verify_gadget;
    use crate::circuit::CircuitInstance;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn brute_exclusion(model: &SandpileModel, b: &Basis, box_r: i64) -> bool {
        for a in -box_r..=box_r {
            for bb in -box_r..=box_r {
                for c in -box_r..=box_r {
                    let units = a.abs() + bb.abs() + c.abs() == 1;
                    if !units && (a, bb, c) != (0, 0, 0) && model.contains(&b.map([a, bb, c])) {
                        return false;
                    }
                }
            }
        }
        true
    }

    #[test]
    fn von_neumann_basis_is_standard() {
        let m = SandpileModel::von_neumann(3, 1).unwrap();
        let b = select_basis(&m).unwrap();
        assert_eq!((b.x.clone(), b.y.clone(), b.z.clone()), (Basis::identity().x, Basis::identity().y, Basis::identity().z));
        assert_eq!(b.tried, 1);
    }

    #[test]
    fn basis_selection_matches_brute_force() {
        let models = [
            SandpileModel::moore(3, 1).unwrap(),
            SandpileModel::moore(4, 1).unwrap(),
            SandpileModel::von_neumann(4, 1).unwrap(),
            SandpileModel::von_neumann(3, 2).unwrap(),
        ];
        for m in &models {
            let b = select_basis(m).unwrap();
            assert!(brute_exclusion(m, &b, 6), "{b}");
            assert!(b.check(m).is_ok());
            for k in MacroKind::ALL {
                verify_gadget(k, m, &b).unwrap_or_else(|e| panic!("{k} in {b}: {e}"));
            }
        }
    }

    #[test]
    fn bad_basis_is_rejected() {
        let m = SandpileModel::moore(3, 1).unwrap();
        assert!(matches!(Basis::identity().check(&m), Err(Error::BasisSelectionFailed(_))));
        assert!(select_basis(&SandpileModel::von_neumann(2, 1).unwrap()).is_err());
    }

    #[test]
    fn compiled_circuit_agrees_with_evaluation() {
        let c = CircuitInstance::parse(crate::circuit::tests::AND_OR).unwrap();
        let m = SandpileModel::von_neumann(3, 1).unwrap();
        for bits in 0..8u32 {
            let a: Vec<bool> = (0..3).map(|i| bits >> i & 1 == 1).collect();
            let ci = c.with_assignment(&a).unwrap();
            let comp = compile(&ci, &m, TriggerStyle::FirstColumn).unwrap();
            let (ans, max) = comp.run_full(&m).unwrap();
            assert_eq!(ans, ci.evaluate(), "{a:?}");
            assert!(max <= 1);
        }
    }

    #[test]
    fn random_circuits_route_and_cross() {
        let m = SandpileModel::von_neumann(3, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut crossings = 0;
        for _ in 0..10 {
            let c = CircuitInstance::random(&mut rng, 4, 3, 3);
            let comp = compile(&c, &m, TriggerStyle::FirstColumn).unwrap();
            crossings += comp.crossings;
            let (ans, max) = comp.run_full(&m).unwrap();
            assert_eq!(ans, c.evaluate());
            assert!(max <= 1);
            assert!(comp.configuration.max_count() < m.threshold());
        }
        assert!(crossings > 0);
    }

    #[test]
    fn embedding_in_other_models() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for m in [SandpileModel::moore(3, 1).unwrap(), SandpileModel::von_neumann(4, 1).unwrap()] {
            for _ in 0..4 {
                let c = CircuitInstance::random(&mut rng, 3, 2, 2);
                let comp = embed_general(&m, &c).unwrap();
                let (ans, max) = comp.run_full(&m).unwrap();
                assert_eq!(ans, c.evaluate());
                assert!(max <= 1);
            }
        }
    }
}
