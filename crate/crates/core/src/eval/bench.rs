use std::fmt;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{brute_force_value, eval_formula, falling_factorial, SymMatrix, BRUTE_FORCE_BUDGET};
use crate::error::Result;
use crate::exec::Exec;
use crate::expr::Formula;

#[derive(Clone, Debug, Serialize)]
pub struct BenchRow {
    pub n: usize,
    pub formula_secs: f64,
    pub brute_secs: f64,
    /// False when `brute_secs` is extrapolated from a calibration run.
    pub brute_measured: bool,
    pub speedup: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct BenchReport {
    pub m: usize,
    pub rows: Vec<BenchRow>,
    /// Least-squares slope of log time against log n.
    pub growth_exponent: Option<f64>,
}

impl fmt::Display for BenchReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "m = {}", self.m)?;
        writeln!(f, "{:>8} {:>14} {:>14} {:>12}", "n", "formula (s)", "brute (s)", "speedup")?;
        for r in &self.rows {
            let mark = if r.brute_measured { " " } else { "~" };
            writeln!(
                f,
                "{:>8} {:>14.6} {:>13.6e}{mark} {:>12.3e}",
                r.n, r.formula_secs, r.brute_secs, r.speedup
            )?;
        }
        match self.growth_exponent {
            Some(g) => writeln!(f, "growth exponent: {g:.3}"),
            None => writeln!(f, "growth exponent: n/a"),
        }
    }
}

/// Minimum wall time over a few runs, stopping once enough time is spent.
fn time_min(mut run: impl FnMut() -> Result<()>) -> Result<f64> {
    let mut best = f64::INFINITY;
    let mut spent = 0.0;
    for i in 0..7 {
        let t = Instant::now();
        run()?;
        let dt = t.elapsed().as_secs_f64();
        best = best.min(dt);
        spent += dt;
        if i >= 2 && spent > 0.5 {
            break;
        }
    }
    Ok(best)
}

pub fn log_log_slope(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Times `f` against the brute-force sum on seeded Gaussian matrices of each
/// size. Brute force beyond the default budget is extrapolated from a run at
/// the largest size that fits.
pub fn bench(f: &Formula, sizes: &[usize], seed: u64, exec: Exec) -> Result<BenchReport> {
    let m = f.m;
    let mut rows = Vec::with_capacity(sizes.len());
    let mut per_tuple: Option<f64> = None;
    for (i, &n) in sizes.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        let a = SymMatrix::random_normal(n, &mut rng);
        let formula_secs = time_min(|| eval_formula(f, &a, exec).map(drop))?;
        let tuples = falling_factorial(n as u64, m as u64) as f64;
        let (brute_secs, brute_measured) = if (n as f64).powi(m as i32) <= BRUTE_FORCE_BUDGET {
            let x = a.to_float();
            let t = time_min(|| brute_force_value(&x, m, BRUTE_FORCE_BUDGET, exec).map(drop))?;
            (t, true)
        } else {
            let unit = match per_tuple {
                Some(u) => u,
                None => {
                    let u = calibrate(m, seed, exec)?;
                    per_tuple = Some(u);
                    u
                }
            };
            (unit * tuples, false)
        };
        rows.push(BenchRow {
            n,
            formula_secs,
            brute_secs,
            brute_measured,
            speedup: brute_secs / formula_secs,
        });
    }
    let points: Vec<(f64, f64)> = rows.iter().map(|r| (r.n as f64, r.formula_secs)).collect();
    Ok(BenchReport {
        m,
        rows,
        growth_exponent: log_log_slope(&points),
    })
}

/// Seconds per enumerated tuple at the largest size within about a tenth of
/// the budget.
fn calibrate(m: usize, seed: u64, exec: Exec) -> Result<f64> {
    let target = BRUTE_FORCE_BUDGET / 10.0;
    let mut n = m.max(3);
    while ((n + 1) as f64).powi(m as i32) <= target {
        n += 1;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let a = SymMatrix::random_normal(n, &mut rng).to_float();
    let t = time_min(|| brute_force_value(&a, m, BRUTE_FORCE_BUDGET, exec).map(drop))?;
    Ok(t / falling_factorial(n as u64, m as u64).max(1) as f64)
}
