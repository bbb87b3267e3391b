//! Solvers for the prediction problems: PRED, S-PRED, first-column S-PRED and compute.

use std::fmt;
use std::str::FromStr;

use crate::cell::Cell;
use crate::config::Configuration;
use crate::dynamics::{stabilize, stabilize_with, Options, Policy};
use crate::error::{Error, Result};
use crate::model::SandpileModel;

/// Translates `c` so that its bounding box starts at the origin.
/// Returns the translated configuration, the offset and the hypercube side n.
pub fn normalize(c: &Configuration) -> (Configuration, Cell, u64) {
    match c.bounding_box() {
        None => (c.clone(), Cell::origin(c.dim()), 0),
        Some((lo, hi)) => {
            let n = lo.iter().zip(hi.iter()).map(|(a, b)| (b - a + 1) as u64).max().unwrap_or(0);
            (c.translated(&lo), lo, n)
        }
    }
}

/// Does `x` ever become unstable while `c` stabilizes? True if it is unstable at time 0.
pub fn solve_pred(model: &SandpileModel, c: &Configuration, x: &Cell) -> Result<bool> {
    check_cell(model, x)?;
    let mut o = Options::new(Policy::SequentialLexMin);
    o.stop_when_unstable = Some(x.clone());
    Ok(stabilize_with(model, c, &o)?.stopped_early)
}

/// PRED answered from the complete odometer, without early exit.
pub fn solve_pred_full(model: &SandpileModel, c: &Configuration, x: &Cell) -> Result<bool> {
    check_cell(model, x)?;
    if c.get(x) >= model.threshold() {
        return Ok(true);
    }
    Ok(stabilize(model, c, Policy::SequentialLexMin)?.odometer.get(x) > 0)
}

/// Does `x` become unstable after one grain is added at `y` to the stable `c`?
pub fn solve_s_pred(model: &SandpileModel, c: &Configuration, x: &Cell, y: &Cell) -> Result<bool> {
    check_stable(model, c)?;
    check_cell(model, y)?;
    solve_pred(model, &c.add_grain(y)?, x)
}

/// S-PRED with the grain added at the lexicographically minimal nonzero cell of `c`.
pub fn solve_first_col(model: &SandpileModel, c: &Configuration, x: &Cell) -> Result<bool> {
    let y = first_col_cell(c)?;
    solve_s_pred(model, c, x, &y)
}

fn first_col_cell(c: &Configuration) -> Result<Cell> {
    c.min_cell()
        .cloned()
        .ok_or_else(|| Error::InvalidInstance("first-column prediction needs a nonempty configuration".into()))
}

/// The stable configuration reached from `c`.
pub fn solve_compute(model: &SandpileModel, c: &Configuration) -> Result<Configuration> {
    Ok(stabilize(model, c, Policy::SequentialLexMin)?.configuration)
}

fn check_cell(model: &SandpileModel, x: &Cell) -> Result<()> {
    if x.dim() != model.dim() {
        return Err(Error::DimensionMismatch { expected: model.dim(), found: x.dim() });
    }
    Ok(())
}

fn check_stable(model: &SandpileModel, c: &Configuration) -> Result<()> {
    if !c.is_stable(model.threshold()) {
        return Err(Error::InvalidInstance("configuration must be stable".into()));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variant {
    Pred,
    SPred,
    FirstCol,
    Compute,
}

impl FromStr for Variant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pred" => Ok(Variant::Pred),
            "spred" | "s-pred" => Ok(Variant::SPred),
            "firstcol" | "first-col" => Ok(Variant::FirstCol),
            "compute" => Ok(Variant::Compute),
            _ => Err(Error::InvalidInstance(format!("unknown variant {s:?}"))),
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Pred => "pred",
            Variant::SPred => "spred",
            Variant::FirstCol => "firstcol",
            Variant::Compute => "compute",
        })
    }
}

#[derive(Clone, Debug)]
pub struct PredictionInstance {
    pub model: SandpileModel,
    pub configuration: Configuration,
    pub variant: Variant,
    pub target: Option<Cell>,
    pub addition: Option<Cell>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Answer {
    Bool(bool),
    Config(Configuration),
}

impl PredictionInstance {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidInstance(m.into()));
        match (self.variant, &self.target, &self.addition) {
            (Variant::Pred, Some(_), None) => Ok(()),
            (Variant::SPred, Some(_), Some(_)) | (Variant::FirstCol, Some(_), None) => {
                check_stable(&self.model, &self.configuration)
            }
            (Variant::Compute, None, None) => Ok(()),
            (Variant::Pred, _, _) => bad("pred takes a target and no addition"),
            (Variant::SPred, _, _) => bad("s-pred takes a target and an addition"),
            (Variant::FirstCol, _, _) => bad("first-col takes a target and no addition"),
            (Variant::Compute, _, _) => bad("compute takes neither target nor addition"),
        }
    }

    pub fn solve(&self) -> Result<Answer> {
        self.validate()?;
        let (m, c) = (&self.model, &self.configuration);
        match self.variant {
            Variant::Pred => solve_pred(m, c, self.target.as_ref().unwrap()).map(Answer::Bool),
            Variant::SPred => {
                solve_s_pred(m, c, self.target.as_ref().unwrap(), self.addition.as_ref().unwrap()).map(Answer::Bool)
            }
            Variant::FirstCol => solve_first_col(m, c, self.target.as_ref().unwrap()).map(Answer::Bool),
            Variant::Compute => solve_compute(m, c).map(Answer::Config),
        }
    }
}

/// One step up the hierarchy: first-col becomes s-pred, s-pred becomes pred; pred and compute are kept.
pub fn reduce_hierarchy(inst: &PredictionInstance) -> Result<PredictionInstance> {
    inst.validate()?;
    let mut out = inst.clone();
    match inst.variant {
        Variant::FirstCol => {
            out.variant = Variant::SPred;
            out.addition = Some(first_col_cell(&inst.configuration)?);
        }
        Variant::SPred => {
            out.variant = Variant::Pred;
            out.configuration = inst.configuration.add_grain(inst.addition.as_ref().unwrap())?;
            out.addition = None;
        }
        Variant::Pred | Variant::Compute => {}
    }
    Ok(out)
}
