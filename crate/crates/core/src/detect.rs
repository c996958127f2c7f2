//! Low-rank signal detection with cycle statistics.
//!
//! Under H0 the matrix is pure Gaussian noise; under H1 a hollow rank-2
//! signal `lambda1 xi1 xi1' + lambda2 xi2 xi2'` (diagonal removed) is added.
//! For each order the ideal-threshold sum of Type I and Type II error rates
//! is reported.

use std::fmt;

use ndarray::{Array1, Array2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::{eval_formulas, SymMatrix};
use crate::exec::Exec;
use crate::expr::{compile, Formula};
use crate::DEFAULT_MAX_ORDER;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectionConfig {
    pub n: usize,
    pub lambda1: f64,
    pub lambda2: f64,
    pub orders: Vec<usize>,
    pub reps: usize,
    pub seed: u64,
}

impl Default for DetectionConfig {
    fn default() -> Self {
        DetectionConfig {
            n: 300,
            lambda1: 1.5,
            lambda2: 1.0,
            orders: vec![3, 4, 5, 6, 7],
            reps: 100,
            seed: 2019,
        }
    }
}

impl DetectionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.reps < 2 {
            return Err(Error::Config(format!("reps must be at least 2, got {}", self.reps)));
        }
        if self.orders.is_empty() {
            return Err(Error::Config("no orders requested".into()));
        }
        for &m in &self.orders {
            if !(3..=DEFAULT_MAX_ORDER).contains(&m) {
                return Err(Error::order(
                    m,
                    format!("supported orders are 3..={DEFAULT_MAX_ORDER}"),
                ));
            }
        }
        let max = *self.orders.iter().max().unwrap();
        if self.n < max {
            return Err(Error::Config(format!("n = {} is below the largest order {max}", self.n)));
        }
        if !self.lambda1.is_finite() || !self.lambda2.is_finite() {
            return Err(Error::Config("signal eigenvalues must be finite".into()));
        }
        Ok(())
    }
}

fn unit_normal(n: usize, rng: &mut ChaCha8Rng) -> Array1<f64> {
    let v: Array1<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
    let norm = v.dot(&v).sqrt();
    v / norm
}

/// The instance for hypothesis `a` (0 or 1) in replication `rep`. Each
/// `(seed, rep, a)` has its own random stream.
pub fn generate_instance(cfg: &DetectionConfig, a: u8, rep: usize) -> SymMatrix {
    let n = cfg.n;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(rep as u64 * 2 + u64::from(a));
    let xi1 = unit_normal(n, &mut rng);
    let xi2 = unit_normal(n, &mut rng);
    let noise = Normal::new(0.0, (1.0 / n as f64).sqrt()).expect("positive variance");
    let mut m = Array2::<f64>::zeros((n, n));
    for i in 0..n {
        for j in i + 1..n {
            let z = noise.sample(&mut rng);
            let signal = cfg.lambda1 * xi1[i] * xi1[j] + cfg.lambda2 * xi2[i] * xi2[j];
            let x = f64::from(a) * signal + z;
            m[[i, j]] = x;
            m[[j, i]] = x;
        }
    }
    SymMatrix::Float(m)
}

/// Smallest achievable (false alarms + misses) fraction over all thresholds
/// and both rejection directions.
pub fn sum_error(h0: &[f64], h1: &[f64]) -> f64 {
    assert!(!h0.is_empty() && !h1.is_empty(), "sum_error needs two non-empty samples");
    let mut pooled: Vec<f64> = h0.iter().chain(h1).copied().collect();
    pooled.sort_by(f64::total_cmp);
    let mut cuts = Vec::with_capacity(pooled.len() + 1);
    cuts.push(pooled[0] - 1.0);
    for w in pooled.windows(2) {
        cuts.push(w[0] + (w[1] - w[0]) / 2.0);
    }
    cuts.push(pooled[pooled.len() - 1] + 1.0);
    let (n0, n1) = (h0.len(), h1.len());
    let above = |xs: &[f64], c: f64| xs.iter().filter(|&&x| x > c).count();
    let rate = |count: usize, len: usize| count as f64 / len as f64;
    cuts.into_iter()
        .map(|c| {
            let (a0, a1) = (above(h0, c), above(h1, c));
            // Reject above c, or reject below c.
            let upper = rate(a0, n0) + rate(n1 - a1, n1);
            let lower = rate(n0 - a0, n0) + rate(a1, n1);
            upper.min(lower)
        })
        .fold(f64::INFINITY, f64::min)
}

#[derive(Clone, Debug, Serialize)]
pub struct SeRow {
    pub m: usize,
    pub se: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DetectionReport {
    pub config: DetectionConfig,
    pub results: Vec<SeRow>,
}

impl DetectionReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

impl fmt::Display for DetectionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = &self.config;
        writeln!(
            f,
            "n={} lambda1={} lambda2={} reps={} seed={}",
            c.n, c.lambda1, c.lambda2, c.reps, c.seed
        )?;
        writeln!(f, "{:>4} {:>8}", "m", "SE")?;
        for r in &self.results {
            writeln!(f, "{:>4} {:>8.2}", r.m, r.se)?;
        }
        Ok(())
    }
}

/// Runs the study, compiling the formulas for `cfg.orders`.
pub fn run_experiment(cfg: &DetectionConfig, exec: Exec) -> Result<DetectionReport> {
    cfg.validate()?;
    let formulas = cfg
        .orders
        .iter()
        .map(|&m| compile(m, exec))
        .collect::<Result<Vec<_>>>()?;
    run_with_formulas(cfg, &formulas, exec)
}

/// Runs the study with precompiled formulas, one per entry of `cfg.orders`.
pub fn run_with_formulas(cfg: &DetectionConfig, formulas: &[Formula], exec: Exec) -> Result<DetectionReport> {
    cfg.validate()?;
    if formulas.len() != cfg.orders.len() || formulas.iter().zip(&cfg.orders).any(|(f, &m)| f.m != m) {
        return Err(Error::Config("formulas do not match the requested orders".into()));
    }
    // stats[rep] = (h0 values, h1 values), one per order.
    let stats = exec.map_range(cfg.reps, |rep| -> Result<[Vec<f64>; 2]> {
        let mut out = [Vec::new(), Vec::new()];
        for a in 0..2u8 {
            let x = generate_instance(cfg, a, rep);
            out[a as usize] = eval_formulas(formulas, &x, Exec::Sequential)?
                .into_iter()
                .map(|v| v.as_f64())
                .collect();
        }
        Ok(out)
    });
    let stats = stats.into_iter().collect::<Result<Vec<_>>>()?;
    let results = cfg
        .orders
        .iter()
        .enumerate()
        .map(|(i, &m)| {
            let h0: Vec<f64> = stats.iter().map(|s| s[0][i]).collect();
            let h1: Vec<f64> = stats.iter().map(|s| s[1][i]).collect();
            SeRow { m, se: sum_error(&h0, &h1) }
        })
        .collect();
    Ok(DetectionReport {
        config: cfg.clone(),
        results,
    })
}
