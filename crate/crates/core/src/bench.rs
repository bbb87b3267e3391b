//! Timing sweeps over seeded instance streams.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::cell::Cell;
use crate::config::Configuration;
use crate::dynamics::{stabilize, Policy};
use crate::error::Result;
use crate::gen::{random_line, random_stable};
use crate::model::{Family, SandpileModel};
use crate::parallel1d::{predict_1d_with, Predict1dOptions};

#[derive(Clone, Debug)]
pub struct BenchSpec {
    pub family: Family,
    pub dim: usize,
    pub r: i64,
    pub sizes: Vec<i64>,
    pub density: f64,
    /// Instances per size.
    pub seeds: u64,
    pub seed: u64,
    pub threads: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchRow {
    pub n: i64,
    pub seed: u64,
    pub grains: u128,
    pub topplings: u128,
    /// Table entries for the 1D predictor, `n^d` otherwise.
    pub work: u64,
    pub seq_us: f64,
    pub par_us: Option<f64>,
}

pub const CSV_HEADER: &str = "family,d,r,n,seed,grains,topplings,work,seq_us,par1d_us,speedup";

impl BenchRow {
    pub fn to_csv(&self, spec: &BenchSpec) -> String {
        let par = self.par_us.map_or(String::new(), |p| format!("{p:.1}"));
        let speed = self.par_us.map_or(String::new(), |p| format!("{:.3}", self.seq_us / p.max(1e-3)));
        format!(
            "{},{},{},{},{},{},{},{},{:.1},{},{}",
            family_name(spec.family),
            spec.dim,
            spec.r,
            self.n,
            self.seed,
            self.grains,
            self.topplings,
            self.work,
            self.seq_us,
            par,
            speed
        )
    }
}

fn family_name(f: Family) -> &'static str {
    match f {
        Family::VonNeumann => "von-neumann",
        Family::Moore => "moore",
        Family::Kadanoff1d => "kadanoff-1d",
        Family::Decreasing1d => "decreasing-1d",
    }
}

impl BenchSpec {
    pub fn model(&self) -> Result<SandpileModel> {
        SandpileModel::builtin(self.family, self.dim, self.r, &[(1, 1)])
    }

    /// The instance stream: `(n, seed, configuration)` with the minimal cell at the origin.
    pub fn instances(&self) -> Result<Vec<(i64, u64, Configuration)>> {
        let model = self.model()?;
        let mut out = Vec::new();
        for &n in &self.sizes {
            if n <= 0 {
                continue;
            }
            for s in 0..self.seeds {
                let seed = self.seed.wrapping_add(s).wrapping_mul(0x9E37_79B9).wrapping_add(n as u64);
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let c = if model.dim() == 1 {
                    random_line(&mut rng, &model, n, self.density)
                } else {
                    let mut c = random_stable(&mut rng, &model, n, self.density);
                    let o = Cell::origin(model.dim());
                    if c.get(&o) == 0 {
                        c.set(&o, 1)?;
                    }
                    c
                };
                out.push((n, seed, c));
            }
        }
        Ok(out)
    }
}

/// Sequential first-column stabilization, plus the parallel 1D predictor in dimension one.
pub fn run_bench(spec: &BenchSpec) -> Result<Vec<BenchRow>> {
    let model = spec.model()?;
    let mut rows = Vec::new();
    for (n, seed, c) in spec.instances()? {
        let origin = Cell::origin(model.dim());
        let t = Instant::now();
        let s = stabilize(&model, &c.add_grain(&origin)?, Policy::SequentialLexMin)?;
        let seq_us = t.elapsed().as_secs_f64() * 1e6;
        let (work, par_us) = if model.dim() == 1 {
            let opts = Predict1dOptions { threads: spec.threads, ..Default::default() };
            let t = Instant::now();
            let (_, stats) = predict_1d_with(&model, &c, n - 1, &opts)?;
            (stats.work, Some(t.elapsed().as_secs_f64() * 1e6))
        } else {
            ((n as u64).saturating_pow(model.dim() as u32), None)
        };
        rows.push(BenchRow { n, seed, grains: c.total(), topplings: s.topplings, work, seq_us, par_us });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(sizes: Vec<i64>) -> BenchSpec {
        BenchSpec {
            family: Family::VonNeumann,
            dim: 1,
            r: 1,
            sizes,
            density: 0.7,
            seeds: 2,
            seed: 42,
            threads: Some(1),
        }
    }

    #[test]
    fn empty_and_repeatable() {
        assert!(run_bench(&spec(vec![0])).unwrap().is_empty());
        assert_eq!(spec(vec![8, 16]).instances().unwrap(), spec(vec![8, 16]).instances().unwrap());
    }

    #[test]
    fn work_grows_with_n() {
        let rows = run_bench(&spec((4..9).map(|k| 1 << k).collect())).unwrap();
        assert!(rows.windows(2).all(|w| w[0].work <= w[1].work));
        assert!(rows.iter().all(|r| r.to_csv(&spec(vec![])).split(',').count() == 11));
    }
}
