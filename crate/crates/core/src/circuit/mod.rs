//! Layered monotone circuits and their compilation into sandpile configurations.

pub mod gadget;
pub mod layout;

use std::collections::HashMap;
use std::fmt;
use std::fmt::Write;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};

pub use gadget::{all_macrocells, gadget, verify_gadget, Dir, GadgetKind, GadgetReport, MacroKind, Macrocell, Port, Role};
pub use layout::{compile, compile_with_basis, embed_general, select_basis, Basis, Compiled, Layout, TriggerStyle};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GateKind {
    Const0,
    Const1,
    And,
    Or,
    Wire,
    Fanout,
    Turn,
}

impl GateKind {
    pub fn arity(self) -> usize {
        match self {
            GateKind::Const0 | GateKind::Const1 => 0,
            GateKind::Wire | GateKind::Fanout | GateKind::Turn => 1,
            GateKind::And | GateKind::Or => 2,
        }
    }

    pub fn is_const(self) -> bool {
        self.arity() == 0
    }
}

impl FromStr for GateKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "const0" | "0" => GateKind::Const0,
            "const1" | "1" => GateKind::Const1,
            "and" => GateKind::And,
            "or" => GateKind::Or,
            "wire" => GateKind::Wire,
            "fanout" | "multiplier" => GateKind::Fanout,
            "turn" => GateKind::Turn,
            "cross" | "cross-over" => {
                return Err(Error::InvalidInstance(
                    "cross-overs are inserted by the router and cannot be declared".into(),
                ))
            }
            _ => return Err(Error::InvalidInstance(format!("unknown gate kind {s:?}"))),
        })
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GateKind::Const0 => "const0",
            GateKind::Const1 => "const1",
            GateKind::And => "and",
            GateKind::Or => "or",
            GateKind::Wire => "wire",
            GateKind::Fanout => "fanout",
            GateKind::Turn => "turn",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Gate {
    pub id: String,
    pub kind: GateKind,
    pub layer: usize,
    /// Position inside the layer; only the order matters.
    pub row: i64,
    /// Indices of the input gates in the previous layer.
    pub inputs: Vec<usize>,
}

/// A layered monotone circuit with fan-in and fan-out at most two.
/// Layer 0 holds exactly the constants.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CircuitInstance {
    gates: Vec<Gate>,
    output: usize,
}

impl CircuitInstance {
    pub fn new(gates: Vec<Gate>, output: usize) -> Result<Self> {
        let bad = |m: String| Err(Error::InvalidInstance(m));
        if output >= gates.len() {
            return bad("output gate out of range".into());
        }
        let mut ids = HashMap::new();
        let mut slots = HashMap::new();
        let mut fanout = vec![0usize; gates.len()];
        for (i, g) in gates.iter().enumerate() {
            if ids.insert(g.id.as_str(), i).is_some() {
                return bad(format!("duplicate gate id {:?}", g.id));
            }
            if slots.insert((g.layer, g.row), i).is_some() {
                return bad(format!("two gates at layer {} row {}", g.layer, g.row));
            }
            if g.kind.is_const() != (g.layer == 0) {
                return bad(format!("gate {:?}: constants live exactly on layer 0", g.id));
            }
            if g.inputs.len() != g.kind.arity() {
                return bad(format!("gate {:?}: {} takes {} inputs", g.id, g.kind, g.kind.arity()));
            }
            for &j in &g.inputs {
                if j >= gates.len() || gates[j].layer + 1 != g.layer {
                    return bad(format!("gate {:?}: inputs must come from the previous layer", g.id));
                }
                fanout[j] += 1;
            }
        }
        if let Some(i) = fanout.iter().position(|&f| f > 2) {
            return bad(format!("gate {:?} has fan-out above 2", gates[i].id));
        }
        Ok(CircuitInstance { gates, output })
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn output(&self) -> usize {
        self.output
    }

    pub fn layers(&self) -> usize {
        self.gates.iter().map(|g| g.layer).max().unwrap_or(0) + 1
    }

    /// Layer-0 gates in row order.
    pub fn inputs(&self) -> Vec<usize> {
        self.layer(0)
    }

    /// Gates of a layer in row order.
    pub fn layer(&self, k: usize) -> Vec<usize> {
        let mut v: Vec<usize> = (0..self.gates.len()).filter(|&i| self.gates[i].layer == k).collect();
        v.sort_by_key(|&i| self.gates[i].row);
        v
    }

    /// The constants of the input gates, in row order.
    pub fn assignment(&self) -> Vec<bool> {
        self.inputs().iter().map(|&i| self.gates[i].kind == GateKind::Const1).collect()
    }

    /// Values of every gate under the given input bits (row order).
    pub fn values(&self, assignment: &[bool]) -> Result<Vec<bool>> {
        let inputs = self.inputs();
        if assignment.len() != inputs.len() {
            return Err(Error::InvalidInstance(format!(
                "assignment has {} bits, circuit has {} inputs",
                assignment.len(),
                inputs.len()
            )));
        }
        let mut val = vec![false; self.gates.len()];
        for (&i, &b) in inputs.iter().zip(assignment) {
            val[i] = b;
        }
        for k in 1..self.layers() {
            for i in self.layer(k) {
                let g = &self.gates[i];
                val[i] = match g.kind {
                    GateKind::And => val[g.inputs[0]] && val[g.inputs[1]],
                    GateKind::Or => val[g.inputs[0]] || val[g.inputs[1]],
                    _ => val[g.inputs[0]],
                };
            }
        }
        Ok(val)
    }

    /// Direct evaluation with the circuit's own constants.
    pub fn evaluate(&self) -> bool {
        self.evaluate_with(&self.assignment()).expect("own assignment fits")
    }

    pub fn evaluate_with(&self, assignment: &[bool]) -> Result<bool> {
        Ok(self.values(assignment)?[self.output])
    }

    /// Same circuit with the input constants replaced.
    pub fn with_assignment(&self, assignment: &[bool]) -> Result<CircuitInstance> {
        let inputs = self.inputs();
        if assignment.len() != inputs.len() {
            return Err(Error::InvalidInstance("assignment length mismatch".into()));
        }
        let mut c = self.clone();
        for (&i, &b) in inputs.iter().zip(assignment) {
            c.gates[i].kind = if b { GateKind::Const1 } else { GateKind::Const0 };
        }
        Ok(c)
    }

    /// Parses the `circuit v1` text format.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter_map(|(i, l)| {
            let l = l.split('#').next().unwrap_or("").trim();
            (!l.is_empty()).then_some((i + 1, l))
        });
        match lines.next() {
            Some((_, "circuit v1")) => {}
            Some((no, l)) => return Err(Error::parse(no, format!("expected `circuit v1`, found {l:?}"))),
            None => return Err(Error::parse(1, "empty circuit file")),
        }
        let mut raw: Vec<(usize, Vec<&str>)> = Vec::new();
        let mut output = None;
        for (no, l) in lines {
            let toks: Vec<&str> = l.split_whitespace().collect();
            if toks[0] == "output" {
                if toks.len() != 2 {
                    return Err(Error::parse(no, "expected `output <id>`"));
                }
                output = Some((no, toks[1]));
            } else {
                raw.push((no, toks));
            }
        }
        let index: HashMap<&str, usize> = raw.iter().enumerate().map(|(i, (_, t))| (t[0], i)).collect();
        let mut gates = Vec::new();
        for (no, t) in &raw {
            if t.len() < 4 {
                return Err(Error::parse(*no, "expected `<id> <kind> <layer> <row> [<in1> <in2>]`"));
            }
            let kind: GateKind = t[1].parse().map_err(|e: Error| Error::parse(*no, e.to_string()))?;
            let layer = t[2].parse().map_err(|_| Error::parse(*no, format!("bad layer {:?}", t[2])))?;
            let row = t[3].parse().map_err(|_| Error::parse(*no, format!("bad row {:?}", t[3])))?;
            let inputs = t[4..]
                .iter()
                .map(|s| index.get(s).copied().ok_or_else(|| Error::parse(*no, format!("unknown gate {s:?}"))))
                .collect::<Result<Vec<_>>>()?;
            gates.push(Gate { id: t[0].to_string(), kind, layer, row, inputs });
        }
        let (no, out) = output.ok_or_else(|| Error::parse(0, "missing `output <id>` line"))?;
        let output = *index.get(out).ok_or_else(|| Error::parse(no, format!("unknown output gate {out:?}")))?;
        CircuitInstance::new(gates, output)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::from("circuit v1\n");
        let mut order: Vec<usize> = (0..self.gates.len()).collect();
        order.sort_by_key(|&i| (self.gates[i].layer, self.gates[i].row));
        for i in order {
            let g = &self.gates[i];
            let _ = write!(s, "{} {} {} {}", g.id, g.kind, g.layer, g.row);
            for &j in &g.inputs {
                let _ = write!(s, " {}", self.gates[j].id);
            }
            s.push('\n');
        }
        let _ = writeln!(s, "output {}", self.gates[self.output].id);
        s
    }

    /// A random layered circuit: `inputs` constants, `layers` gate layers after them, the last
    /// layer reduced to the single output gate. Wiring is shuffled so channels cross.
    pub fn random<R: Rng>(rng: &mut R, inputs: usize, layers: usize, max_width: usize) -> CircuitInstance {
        assert!(inputs >= 1 && layers >= 1 && max_width >= 1);
        let mut gates: Vec<Gate> = (0..inputs)
            .map(|i| Gate {
                id: format!("x{i}"),
                kind: if rng.gen_bool(0.5) { GateKind::Const1 } else { GateKind::Const0 },
                layer: 0,
                row: i as i64,
                inputs: vec![],
            })
            .collect();
        let mut prev: Vec<usize> = (0..inputs).collect();
        for k in 1..=layers {
            let width = if k == layers { 1 } else { rng.gen_range(1..=max_width) };
            // each previous gate can feed two slots; shuffle the slots
            let mut pool: Vec<usize> = prev.iter().flat_map(|&p| [p, p]).collect();
            pool.shuffle(rng);
            let mut cur = Vec::new();
            for row in 0..width {
                if pool.is_empty() {
                    break;
                }
                let two = pool.len() >= 2 && rng.gen_bool(0.8);
                let (kind, ins) = if two {
                    let a = pool.pop().unwrap();
                    // prefer two distinct sources
                    let pos = pool.iter().position(|&b| b != a).unwrap_or(pool.len() - 1);
                    let b = pool.remove(pos);
                    (if rng.gen_bool(0.5) { GateKind::And } else { GateKind::Or }, vec![a, b])
                } else {
                    let kinds = [GateKind::Wire, GateKind::Fanout, GateKind::Turn];
                    (kinds[rng.gen_range(0..3)], vec![pool.pop().unwrap()])
                };
                gates.push(Gate { id: format!("g{k}_{row}"), kind, layer: k, row: row as i64, inputs: ins });
                cur.push(gates.len() - 1);
            }
            prev = cur;
        }
        let output = gates.len() - 1;
        CircuitInstance::new(gates, output).expect("generator respects the invariants")
    }
}

/// Parses a bit string such as `1011` into an assignment.
pub fn parse_bits(s: &str) -> Result<Vec<bool>> {
    s.chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            _ => Err(Error::InvalidInstance(format!("bad bit {c:?} in assignment"))),
        })
        .collect()
}
