//! Avalanches and the lexicographically minimal avalanche process.

use rustc_hash::FxHashMap;

use crate::cell::Cell;
use crate::config::{Configuration, Odometer};
use crate::dynamics::{stabilize_with, Options, Policy};
use crate::error::{Error, Result};
use crate::model::SandpileModel;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AvalancheProcess {
    pub source: Cell,
    /// Toppling order z_1..z_t, always the smallest unstable cell first.
    pub sequence: Vec<Cell>,
    pub odometer: Odometer,
}

impl AvalancheProcess {
    pub fn len(&self) -> usize {
        self.sequence.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sequence.is_empty()
    }
}

/// The avalanche generated by adding one grain at `y` to the stable `c`.
pub fn avalanche(model: &SandpileModel, c: &Configuration, y: &Cell) -> Result<AvalancheProcess> {
    if !c.is_stable(model.threshold()) {
        return Err(Error::InvalidInstance("avalanche needs a stable configuration".into()));
    }
    let mut o = Options::new(Policy::SequentialLexMin);
    o.record_sequence = true;
    let s = stabilize_with(model, &c.add_grain(y)?, &o)?;
    Ok(AvalancheProcess { source: y.clone(), sequence: s.sequence.unwrap_or_default(), odometer: s.odometer })
}

/// True iff no cell toppled more than once.
pub fn check_single_toppling(p: &AvalancheProcess) -> bool {
    p.odometer.iter().all(|(_, k)| k <= 1)
}

/// True iff `y` is a most-toppled cell after every prefix of the lexmin process.
pub fn check_most_toppled(model: &SandpileModel, c: &Configuration, y: &Cell) -> Result<bool> {
    let p = avalanche(model, c, y)?;
    let mut odo: FxHashMap<&Cell, u64> = FxHashMap::default();
    let mut max = 0;
    let mut at_y = 0;
    for z in &p.sequence {
        let e = odo.entry(z).or_insert(0);
        *e += 1;
        max = max.max(*e);
        if z == y {
            at_y = *e;
        }
        if at_y < max {
            return Ok(false);
        }
    }
    Ok(true)
}
