//! 5x5 macrocells. Every gadget cell waits for grains from exactly the neighbours its role names.
//!
//! Local coordinates are `(a, b, c)` in units of the basis vectors. A macro whose west side is an
//! input climbs from `c = -2` to `c = 0` through a short riser, so horizontally adjacent macros sit
//! two levels apart and only touch through their port cells.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use crate::cell::Cell;
use crate::config::{Configuration, Odometer};
use crate::dynamics::{stabilize_with, Options, Policy};
use crate::error::{Error, Result};
use crate::model::SandpileModel;

use super::layout::Basis;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Dir {
    X,
    Y,
    Z,
}

/// What a non-empty cell waits for.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Role {
    Wire(Dir),
    And(Dir, Dir),
    Or(Dir, Dir),
    Trigger,
}

impl Role {
    pub fn content(self, model: &SandpileModel, basis: &Basis) -> u64 {
        let w = |d: Dir| model.weight(basis.dir(d));
        let t = model.threshold();
        match self {
            Role::Wire(d) => t - w(d),
            Role::And(a, b) => t - w(a) - w(b),
            Role::Or(a, b) => t - w(a).min(w(b)),
            Role::Trigger => t - 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Port {
    W,
    S,
    E,
    N,
    /// The grain added by the trigger.
    T,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MacroKind {
    WireH,
    WireV,
    TurnWN,
    TurnSE,
    MultW,
    MultS,
    And,
    Or,
    DiodeWN,
    DiodeSE,
    Cross,
    Trigger,
    Probe,
}

pub type GadgetKind = MacroKind;

impl MacroKind {
    pub const ALL: [MacroKind; 13] = [
        MacroKind::WireH,
        MacroKind::WireV,
        MacroKind::TurnWN,
        MacroKind::TurnSE,
        MacroKind::MultW,
        MacroKind::MultS,
        MacroKind::And,
        MacroKind::Or,
        MacroKind::DiodeWN,
        MacroKind::DiodeSE,
        MacroKind::Cross,
        MacroKind::Trigger,
        MacroKind::Probe,
    ];

    pub fn inputs(self) -> &'static [Port] {
        use MacroKind::*;
        match self {
            WireH | TurnWN | MultW | DiodeWN | Probe => &[Port::W],
            WireV | TurnSE | MultS | DiodeSE => &[Port::S],
            And | Or | Cross => &[Port::W, Port::S],
            Trigger => &[Port::T],
        }
    }

    pub fn outputs(self) -> &'static [Port] {
        use MacroKind::*;
        match self {
            WireH | TurnSE | DiodeSE | And | Or | Probe => &[Port::E],
            WireV | TurnWN | DiodeWN | Trigger => &[Port::N],
            MultW | MultS | Cross => &[Port::E, Port::N],
        }
    }

    /// Which outputs fire for a set of active inputs.
    pub fn truth(self, active: &[Port]) -> Vec<Port> {
        let on = |p| active.contains(&p);
        let mut out = Vec::new();
        match self {
            MacroKind::And => {
                if on(Port::W) && on(Port::S) {
                    out.push(Port::E)
                }
            }
            MacroKind::Cross => {
                if on(Port::W) {
                    out.push(Port::E)
                }
                if on(Port::S) {
                    out.push(Port::N)
                }
            }
            _ => {
                if !active.is_empty() {
                    out.extend_from_slice(self.outputs())
                }
            }
        }
        out
    }

    pub fn is_diode(self) -> bool {
        matches!(self, MacroKind::DiodeWN | MacroKind::DiodeSE)
    }
}

impl fmt::Display for MacroKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use MacroKind::*;
        f.write_str(match self {
            WireH => "wire-h",
            WireV => "wire-v",
            TurnWN => "turn-wn",
            TurnSE => "turn-se",
            MultW => "mult-w",
            MultS => "mult-s",
            And => "and",
            Or => "or",
            DiodeWN => "diode-wn",
            DiodeSE => "diode-se",
            Cross => "cross",
            Trigger => "trigger",
            Probe => "probe",
        })
    }
}

impl FromStr for MacroKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        MacroKind::ALL
            .iter()
            .copied()
            .find(|k| k.to_string() == s)
            .ok_or_else(|| Error::InvalidInstance(format!("unknown gadget {s:?}")))
    }
}

/// Cell receiving the stimulus of an input port, and the stimulus direction.
pub fn input_cell(p: Port) -> ([i64; 3], Option<Dir>) {
    match p {
        Port::W => ([0, 2, -2], Some(Dir::X)),
        Port::S => ([2, 0, 0], Some(Dir::Y)),
        Port::T => ([2, 2, 0], None),
        _ => panic!("{p:?} is not an input port"),
    }
}

/// Cell whose toppling means the output port fired.
pub fn output_cell(p: Port) -> [i64; 3] {
    match p {
        Port::E => [4, 2, 0],
        Port::N => [2, 4, 0],
        _ => panic!("{p:?} is not an output port"),
    }
}

/// The cell of the neighbouring macro next to a port.
fn interface_cell(p: Port) -> [i64; 3] {
    match p {
        Port::E => [5, 2, 0],
        Port::N => [2, 5, 0],
        Port::W => [-1, 2, -2],
        Port::S => [2, -1, 0],
        Port::T => [2, 2, 0],
    }
}

/// Could a cell of a neighbouring macro sit here?
fn in_neighbour_box(p: [i64; 3]) -> bool {
    let [a, b, c] = p;
    let inside = |v: i64, lo: i64, hi: i64| v >= lo && v <= hi;
    let ab = inside(a, 0, 4) && inside(b, 0, 4);
    !ab && ((inside(a, -5, -1) && inside(b, 0, 4) && inside(c, -4, -2))
        || (inside(a, 5, 9) && inside(b, 0, 4) && inside(c, 0, 2))
        || (inside(b, -5, -1) && inside(a, 0, 4) && inside(c, -2, 0))
        || (inside(b, 5, 9) && inside(a, 0, 4) && inside(c, -2, 0)))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Macrocell {
    pub kind: MacroKind,
    pub cells: Vec<([i64; 3], Role)>,
}

impl Macrocell {
    /// Contents placed at `origin` (in basis coordinates).
    pub fn place(&self, model: &SandpileModel, basis: &Basis, origin: [i64; 3]) -> Vec<(Cell, u64)> {
        self.cells
            .iter()
            .map(|&(p, role)| {
                let q = [p[0] + origin[0], p[1] + origin[1], p[2] + origin[2]];
                (basis.map(q), role.content(model, basis))
            })
            .collect()
    }

    /// The cell probed by a `Probe` macro.
    pub fn question(&self) -> Option<[i64; 3]> {
        (self.kind == MacroKind::Probe).then_some([2, 2, 0])
    }
}

const RISER: [([i64; 3], Role); 3] = [
    ([0, 2, -2], Role::Wire(Dir::X)),
    ([0, 2, -1], Role::Wire(Dir::Z)),
    ([0, 2, 0], Role::Wire(Dir::Z)),
];

pub fn gadget(kind: MacroKind) -> Macrocell {
    use Dir::*;
    let x = |a: i64, b: i64| ([a, b, 0], Role::Wire(X));
    let y = |a: i64, b: i64| ([a, b, 0], Role::Wire(Y));
    let mut cells = Vec::new();
    match kind {
        MacroKind::WireH | MacroKind::Probe => {
            cells.extend(RISER);
            cells.extend((1..=4).map(|a| x(a, 2)));
        }
        MacroKind::WireV => cells.extend((0..=4).map(|b| y(2, b))),
        MacroKind::TurnWN => {
            cells.extend(RISER);
            cells.extend([x(1, 2), x(2, 2), y(2, 3), y(2, 4)]);
        }
        MacroKind::TurnSE => cells.extend([y(2, 0), y(2, 1), y(2, 2), x(3, 2), x(4, 2)]),
        MacroKind::MultW => {
            cells.extend(RISER);
            cells.extend([x(1, 2), x(2, 2), x(3, 2), x(4, 2), y(2, 3), y(2, 4)]);
        }
        MacroKind::MultS => cells.extend([y(2, 0), y(2, 1), y(2, 2), x(3, 2), x(4, 2), y(2, 3), y(2, 4)]),
        MacroKind::And | MacroKind::Or => {
            let centre = if kind == MacroKind::And { Role::And(X, Y) } else { Role::Or(X, Y) };
            cells.extend(RISER);
            cells.extend([x(1, 2), y(2, 0), y(2, 1), ([2, 2, 0], centre), x(3, 2), x(4, 2)]);
        }
        MacroKind::DiodeWN => {
            cells.extend(RISER);
            cells.extend([x(1, 2), x(2, 2), y(1, 3), ([2, 3, 0], Role::And(X, Y)), y(2, 4)]);
        }
        MacroKind::DiodeSE => {
            cells.extend([y(2, 0), y(2, 1), x(3, 1), y(2, 2), ([3, 2, 0], Role::And(X, Y)), x(4, 2)]);
        }
        MacroKind::Cross => {
            cells.extend((0..=4).map(|a| ([a, 2, -2], Role::Wire(X))));
            cells.extend([([4, 2, -1], Role::Wire(Z)), ([4, 2, 0], Role::Wire(Z))]);
            cells.extend((0..=4).map(|b| y(2, b)));
        }
        MacroKind::Trigger => cells.extend([([2, 2, 0], Role::Trigger), y(2, 3), y(2, 4)]),
    }
    Macrocell { kind, cells }
}

pub fn all_macrocells() -> Vec<Macrocell> {
    MacroKind::ALL.iter().map(|&k| gadget(k)).collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GadgetReport {
    pub kind: MacroKind,
    /// Stabilizations run.
    pub runs: usize,
    pub cells: usize,
    pub max_topplings: u64,
}

struct Run {
    odometer: Odometer,
    /// Grains received per local position.
    received: HashMap<[i64; 3], u64>,
    /// Toppled cells that do not lie on the basis sublattice near the gadget.
    stray: usize,
}

struct Bench<'a> {
    model: &'a SandpileModel,
    basis: &'a Basis,
    mac: &'a Macrocell,
    perturb: Option<(usize, i64)>,
    local: HashMap<Cell, [i64; 3]>,
    gadget_cells: HashSet<[i64; 3]>,
}

impl<'a> Bench<'a> {
    fn new(model: &'a SandpileModel, basis: &'a Basis, mac: &'a Macrocell, perturb: Option<(usize, i64)>) -> Self {
        let mut local = HashMap::new();
        for a in -6..=10 {
            for b in -6..=10 {
                for c in -5..=3 {
                    local.insert(basis.map([a, b, c]), [a, b, c]);
                }
            }
        }
        let gadget_cells = mac.cells.iter().map(|c| c.0).collect();
        Bench { model, basis, mac, perturb, local, gadget_cells }
    }

    fn defect(&self, what: String) -> Error {
        Error::GadgetDefect { gadget: self.mac.kind.to_string(), defect: what }
    }

    fn resting(&self) -> Result<Configuration> {
        let mut c = Configuration::new(self.model.dim());
        for (i, (cell, v)) in self.mac.place(self.model, self.basis, [0, 0, 0]).into_iter().enumerate() {
            let v = match self.perturb {
                Some((j, d)) if j == i => v.checked_add_signed(d).unwrap_or(0),
                _ => v,
            };
            c.set(&cell, v)?;
        }
        if !c.is_stable(self.model.threshold()) {
            return Err(self.defect("unstable before any stimulus".into()));
        }
        Ok(c)
    }

    fn run(&self, stimuli: &[([i64; 3], u64)]) -> Result<Run> {
        let mut c = self.resting()?;
        for &(p, amount) in stimuli {
            c.add(&self.basis.map(p), amount)?;
        }
        let s = stabilize_with(self.model, &c, &Options::new(Policy::SequentialLexMin).checked())?;
        let mut received: HashMap<[i64; 3], u64> = HashMap::new();
        let mut stray = 0;
        for (t, k) in s.odometer.iter() {
            if !self.local.contains_key(t) {
                stray += 1;
            }
            for (v, w) in self.model.neighbors() {
                if let Some(&p) = self.local.get(&(t + v)) {
                    *received.entry(p).or_default() += k * w;
                }
            }
        }
        Ok(Run { odometer: s.odometer, received, stray })
    }

    fn fired(&self, r: &Run, p: [i64; 3]) -> bool {
        r.odometer.get(&self.basis.map(p)) > 0
    }

    fn stimulus(&self, p: Port) -> ([i64; 3], u64) {
        let (cell, dir) = input_cell(p);
        (cell, dir.map_or(1, |d| self.model.weight(self.basis.dir(d))))
    }

    /// Common checks on any run; `allowed` lists the interface cells grains may reach.
    fn check_run(&self, r: &Run, allowed: &[[i64; 3]], label: &str) -> Result<()> {
        if r.odometer.max() > 1 {
            return Err(self.defect(format!("{label}: a cell toppled more than once")));
        }
        if r.stray > 0 {
            return Err(self.defect(format!("{label}: a cell off the gadget toppled")));
        }
        for (t, _) in r.odometer.iter() {
            let p = self.local[t];
            if !self.gadget_cells.contains(&p) {
                return Err(self.defect(format!("{label}: empty cell {p:?} toppled")));
            }
        }
        for (&p, &g) in &r.received {
            if g > 0 && in_neighbour_box(p) && !allowed.contains(&p) {
                return Err(self.defect(format!("{label}: grains leaked to {p:?}")));
            }
        }
        Ok(())
    }

    fn verify(&self) -> Result<GadgetReport> {
        let kind = self.mac.kind;
        let ins = kind.inputs();
        let mut runs = 0;
        let mut max_topplings = 0;
        let mut by_mask = Vec::new();
        for mask in 0u32..1 << ins.len() {
            let active: Vec<Port> = (0..ins.len()).filter(|&i| mask >> i & 1 == 1).map(|i| ins[i]).collect();
            let stimuli: Vec<_> = active.iter().map(|&p| self.stimulus(p)).collect();
            let r = self.run(&stimuli)?;
            runs += 1;
            let expect = kind.truth(&active);
            for &o in kind.outputs() {
                if self.fired(&r, output_cell(o)) != expect.contains(&o) {
                    return Err(self.defect(format!("wrong value on port {o:?} for inputs {active:?}")));
                }
            }
            let mut allowed: Vec<[i64; 3]> = ins.iter().filter(|&&p| p != Port::T).map(|&p| interface_cell(p)).collect();
            allowed.extend(expect.iter().map(|&o| interface_cell(o)));
            self.check_run(&r, &allowed, &format!("inputs {active:?}"))?;
            max_topplings = max_topplings.max(r.odometer.total() as u64);
            by_mask.push(r.odometer);
        }
        if kind == MacroKind::Cross {
            let (w, s, both) = (&by_mask[1], &by_mask[2], &by_mask[3]);
            let disjoint = w.iter().all(|(c, _)| s.get(c) == 0);
            let sum: Vec<_> = {
                let mut m = w.iter().map(|(c, k)| (c.clone(), k)).collect::<Vec<_>>();
                m.extend(s.iter().map(|(c, k)| (c.clone(), k)));
                m.sort();
                m
            };
            let joint: Vec<_> = both.iter().map(|(c, k)| (c.clone(), k)).collect();
            if !disjoint || sum != joint {
                return Err(self.defect("the two channels interact".into()));
            }
        }
        if kind.is_diode() {
            let (out, back_dir, input_side): (Port, Cell, Vec<[i64; 3]>) = match kind {
                MacroKind::DiodeWN => {
                    (Port::N, -self.basis.dir(Dir::Y), vec![[0, 2, -2], [0, 2, -1], [0, 2, 0], [1, 2, 0]])
                }
                _ => (Port::E, -self.basis.dir(Dir::X), vec![[2, 0, 0], [2, 1, 0]]),
            };
            let back = (output_cell(out), self.model.weight(&back_dir));
            for forward in [false, true] {
                let mut stimuli = vec![back];
                if forward {
                    stimuli.push(self.stimulus(ins[0]));
                }
                let r = self.run(&stimuli)?;
                runs += 1;
                let label = if forward { "backward and forward" } else { "backward" };
                if !forward && input_side.iter().any(|&p| self.fired(&r, p)) {
                    return Err(self.defect("signal passed backwards".into()));
                }
                if forward && !self.fired(&r, output_cell(out)) {
                    return Err(self.defect("forward signal lost under backward stimulus".into()));
                }
                let mut allowed = vec![interface_cell(out)];
                if forward {
                    allowed.push(interface_cell(ins[0]));
                }
                self.check_run(&r, &allowed, label)?;
            }
        }
        Ok(GadgetReport { kind, runs, cells: self.mac.cells.len(), max_topplings })
    }
}

/// Checks a gadget in isolation: truth table, single toppling, silent empty cells, no leakage
/// except through its ports, and for diodes and the cross-over their extra guarantees.
pub fn verify_gadget(kind: MacroKind, model: &SandpileModel, basis: &Basis) -> Result<GadgetReport> {
    verify_macrocell(&gadget(kind), model, basis, None)
}

/// As [`verify_gadget`], optionally with cell `i` of the gadget shifted by `delta` grains.
pub fn verify_macrocell(
    mac: &Macrocell,
    model: &SandpileModel,
    basis: &Basis,
    perturb: Option<(usize, i64)>,
) -> Result<GadgetReport> {
    basis.check(model)?;
    Bench::new(model, basis, mac, perturb).verify()
}

/// Every perturbation of one gadget cell by one or two grains.
pub fn mutants() -> Vec<(MacroKind, usize, i64)> {
    let mut v = Vec::new();
    for k in MacroKind::ALL {
        for i in 0..gadget(k).cells.len() {
            v.extend([-2, -1, 1, 2].map(|d| (k, i, d)));
        }
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::SandpileModel;

    #[test]
    fn all_gadgets_pass_on_von_neumann() {
        let m = SandpileModel::von_neumann(3, 1).unwrap();
        let b = Basis::identity();
        for k in MacroKind::ALL {
            let r = verify_gadget(k, &m, &b).unwrap_or_else(|e| panic!("{k}: {e}"));
            assert!(r.max_topplings as usize <= r.cells);
        }
    }

    #[test]
    fn contents_are_small() {
        let m = SandpileModel::von_neumann(3, 1).unwrap();
        let b = Basis::identity();
        for mac in all_macrocells() {
            for (_, v) in mac.place(&m, &b, [0, 0, 0]) {
                assert!(v == 4 || v == 5, "{}: {v}", mac.kind);
            }
        }
    }

    #[test]
    fn mutants_are_caught() {
        let m = SandpileModel::von_neumann(3, 1).unwrap();
        let b = Basis::identity();
        let all = mutants();
        let mut survived = Vec::new();
        for &(k, i, d) in &all {
            if verify_macrocell(&gadget(k), &m, &b, Some((i, d))).is_ok() {
                survived.push((k, i, d));
            }
        }
        assert!(all.len() >= 200);
        assert!(survived.is_empty(), "{survived:?}");
    }

    #[test]
    fn cross_is_not_a_wire() {
        // swapping a cross for a plain wire must be caught by the leak check or truth table
        let m = SandpileModel::von_neumann(3, 1).unwrap();
        let mut mac = gadget(MacroKind::WireH);
        mac.kind = MacroKind::Cross;
        assert!(verify_macrocell(&mac, &m, &Basis::identity(), None).is_err());
    }
}
