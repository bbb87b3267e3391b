//! A quick run of every property check, reported as a table.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::avalanche::{avalanche, check_most_toppled, check_single_toppling};
use crate::cell::Cell;
use crate::circuit::{compile, gadget::verify_gadget, select_basis, CircuitInstance, MacroKind, TriggerStyle};
use crate::config::{Configuration, Odometer};
use crate::dynamics::{stabilize, stabilize_with, Options, Policy};
use crate::error::Result;
use crate::gen::{random_config, random_line, random_simulation_instance, random_stable};
use crate::model::SandpileModel;
use crate::parallel1d::predict_1d;
use crate::prediction::solve_first_col;
use crate::simulation::simulate_extend_neighborhood;

#[derive(Clone, Debug)]
pub struct CheckRow {
    pub name: &'static str,
    pub cases: usize,
    pub passed: bool,
    pub detail: String,
    pub millis: u128,
}

/// `|odo(x) - odo(y)| <= total grains` for every toppled x and neighbour y.
pub fn neighbor_odometer_bound(model: &SandpileModel, c: &Configuration, odo: &Odometer) -> bool {
    let total = c.total();
    odo.iter().all(|(x, k)| {
        model.neighbors().iter().all(|(v, _)| (k as i128 - odo.get(&(x + v)) as i128).unsigned_abs() <= total)
    })
}

/// Grains of the result stay within `|x|_inf <= 4 θ r n^d` of the origin.
pub fn support_bound(model: &SandpileModel, n: u64, result: &Configuration) -> bool {
    let lim = 4u128 * model.threshold() as u128 * model.radius() as u128 * (n as u128).pow(model.dim() as u32);
    result.cells().all(|x| x.norm_inf() as u128 <= lim)
}

fn models() -> Vec<SandpileModel> {
    vec![
        SandpileModel::von_neumann(1, 1).unwrap(),
        SandpileModel::kadanoff(2).unwrap(),
        SandpileModel::von_neumann(2, 1).unwrap(),
        SandpileModel::moore(2, 1).unwrap(),
        SandpileModel::von_neumann(3, 1).unwrap(),
    ]
}

fn row(name: &'static str, cases: usize, start: Instant, res: Result<Option<String>>) -> CheckRow {
    let (passed, detail) = match res {
        Ok(None) => (true, String::new()),
        Ok(Some(why)) => (false, why),
        Err(e) => (false, e.to_string()),
    };
    CheckRow { name, cases, passed, detail, millis: start.elapsed().as_millis() }
}

pub fn selftest(seed: u64) -> Vec<CheckRow> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::new();
    let ms = models();

    let t = Instant::now();
    let mut instances = Vec::new();
    for _ in 0..40 {
        let m = ms[rng.gen_range(0..ms.len())].clone();
        let n = if m.dim() == 3 { 3 } else { 5 };
        let c = random_config(&mut rng, m.dim(), n, 2 * m.threshold() - 1, 0.7);
        instances.push((m, c, n as u64));
    }
    let res = (|| {
        for (m, c, _) in &instances {
            let a = stabilize_with(m, c, &Options::new(Policy::Parallel).checked())?;
            let b = stabilize_with(m, c, &Options::new(Policy::SequentialLexMin).checked())?;
            let r = stabilize_with(m, c, &Options::new(Policy::SequentialRandom(seed)).checked())?;
            if a.configuration != b.configuration || a.odometer != b.odometer || r.odometer != b.odometer {
                return Ok(Some(format!("policies disagree on {} grains", c.total())));
            }
        }
        Ok(None)
    })();
    rows.push(row("abelian determinism", instances.len(), t, res));

    let t = Instant::now();
    let res = (|| {
        for (m, c, _) in &instances {
            let s = stabilize_with(m, c, &Options::new(Policy::Parallel).checked())?;
            if s.configuration.total() != c.total() {
                return Ok(Some("grain count changed".into()));
            }
        }
        Ok(None)
    })();
    rows.push(row("conservation and 2θ bound", instances.len(), t, res));

    let t = Instant::now();
    let res = (|| {
        for (m, c, _) in &instances {
            let s = stabilize(m, c, Policy::SequentialLexMin)?;
            if s.steps as u128 > s.watchdog_bound {
                return Ok(Some(format!("{} steps exceed {}", s.steps, s.watchdog_bound)));
            }
        }
        Ok(None)
    })();
    rows.push(row("termination bound", instances.len(), t, res));

    let t = Instant::now();
    let res = (|| {
        for (m, c, n) in &instances {
            let s = stabilize(m, c, Policy::SequentialLexMin)?;
            if !neighbor_odometer_bound(m, c, &s.odometer) || !support_bound(m, *n, &s.configuration) {
                return Ok(Some(format!("bound fails on {} grains", c.total())));
            }
        }
        Ok(None)
    })();
    rows.push(row("odometer and support bounds", instances.len(), t, res));

    let t = Instant::now();
    let mut cases = 0;
    let res = (|| {
        for _ in 0..30 {
            let m = ms[rng.gen_range(0..4)].clone();
            let mut c = random_stable(&mut rng, &m, 5, 0.8);
            let o = Cell::origin(m.dim());
            c.set(&o, m.threshold() - 1)?;
            cases += 1;
            if !check_single_toppling(&avalanche(&m, &c, &o)?) {
                return Ok(Some("first-column avalanche toppled a cell twice".into()));
            }
            let y = c.cells().nth(rng.gen_range(0..c.len())).unwrap().clone();
            if !check_most_toppled(&m, &c, &y)? {
                return Ok(Some(format!("source {y} is not the most toppled cell")));
            }
        }
        Ok(None)
    })();
    rows.push(row("first-column monotonicity, most-toppled source", cases, t, res));

    let t = Instant::now();
    let line_models = [
        SandpileModel::von_neumann(1, 1).unwrap(),
        SandpileModel::kadanoff(3).unwrap(),
        SandpileModel::new(1, vec![(Cell::new(&[-2]), 1), (Cell::new(&[-1]), 1), (Cell::new(&[3]), 1)]).unwrap(),
    ];
    let res = (|| {
        for i in 0..60 {
            let m = &line_models[i % 3];
            let n = rng.gen_range(1..64);
            let c = random_line(&mut rng, m, n, 0.8);
            let x = rng.gen_range(-2..n + 2);
            if predict_1d(m, &c, x)? != solve_first_col(m, &c, &Cell::new(&[x]))? {
                return Ok(Some(format!("mismatch at {x} on a line of {n}")));
            }
        }
        Ok(None)
    })();
    rows.push(row("parallel 1D prediction", 60, t, res));

    let t = Instant::now();
    let m3 = SandpileModel::von_neumann(3, 1).unwrap();
    let res = (|| {
        let b = select_basis(&m3)?;
        for k in MacroKind::ALL {
            verify_gadget(k, &m3, &b)?;
        }
        Ok(None)
    })();
    rows.push(row("gadget certification", MacroKind::ALL.len(), t, res));

    let t = Instant::now();
    let res = (|| {
        for _ in 0..5 {
            let c = CircuitInstance::random(&mut rng, 4, 3, 3);
            for bits in 0..16u32 {
                let a: Vec<bool> = (0..4).map(|i| bits >> i & 1 == 1).collect();
                let ci = c.with_assignment(&a)?;
                if compile(&ci, &m3, TriggerStyle::FirstColumn)?.run(&m3)? != ci.evaluate() {
                    return Ok(Some(format!("circuit verdict differs for {a:?}")));
                }
            }
        }
        Ok(None)
    })();
    rows.push(row("circuit compilation", 80, t, res));

    let t = Instant::now();
    let mut cases = 0;
    let res = (|| {
        let m = SandpileModel::von_neumann(1, 1).unwrap();
        for _ in 0..10 {
            let Some(inst) = random_simulation_instance(&mut rng, &m, 6, 200) else { continue };
            cases += 1;
            let w = simulate_extend_neighborhood(&m, &Cell::new(&[2]), &inst)?;
            if !w.preserved() {
                return Ok(Some(w.report()));
            }
        }
        Ok(None)
    })();
    rows.push(row("neighbourhood extension simulation", cases, t, res));

    let t = Instant::now();
    let res = (|| {
        let ok = SandpileModel::new(1, vec![(Cell::new(&[-1]), 1), (Cell::new(&[2]), 1)])?.is_complete();
        let bad = SandpileModel::new(1, vec![(Cell::new(&[-2]), 1), (Cell::new(&[2]), 1)])?.is_complete();
        Ok((!ok || bad).then(|| "completeness misjudged".to_string()))
    })();
    rows.push(row("completeness", 2, t, res));
    rows
}

pub fn format_table(rows: &[CheckRow]) -> String {
    let w = rows.iter().map(|r| r.name.len()).max().unwrap_or(0);
    let mut s = String::new();
    for r in rows {
        let status = if r.passed { "PASS" } else { "FAIL" };
        s.push_str(&format!("{:<w$}  {status}  {:>4} cases  {:>6} ms", r.name, r.cases, r.millis));
        if !r.detail.is_empty() {
            s.push_str(&format!("  {}", r.detail.lines().next().unwrap_or("")));
        }
        s.push('\n');
    }
    s
}
