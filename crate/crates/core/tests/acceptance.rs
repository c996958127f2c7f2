//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

mod common;

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use ceef::catalog::{build_catalog, mobius_finest, Catalog};
use ceef::detect::{run_with_formulas, DetectionConfig};
use ceef::eval::{bench, brute_force_cm, eval_formula, falling_factorial, SymMatrix, Value};
use ceef::expr::{MatrixExpr, TermBody, VectorExpr};
use ceef::partition::Partition;
use ceef::prune::{compile_catalog, prune_to_completion, prune_with_policy, Lmg, Outcome};
use ceef::{Exec, Formula};
use common::{naive_lmg_fs, relative_error, same_pattern_up_to_renaming, all_partitions, has_adjacent, MobiusOracle};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const TERM_COUNTS: [(usize, usize); 3] = [(4, 3), (8, 44), (12, 1900)];
const M8_LIMIT: Duration = Duration::from_secs(10);
const M12_LIMIT: Duration = Duration::from_secs(15 * 60);
const ORACLE_REL_TOL: f64 = 1e-8;
const ORACLE_LIMIT: Duration = Duration::from_secs(120);
const PRUNE_REL_TOL: f64 = 1e-10;
const SE_CEILING: f64 = 0.25;
const DETECT_LIMIT: Duration = Duration::from_secs(10 * 60);
const GROWTH_RANGE: (f64, f64) = (3.0, 4.5);
const BENCH_SIZES: [usize; 3] = [50, 100, 200];

/// Reference signed coefficients of the order-8 formula.
const C8_COEFFICIENTS: [i64; 44] = [
    36, -96, -36, -112, 32, 72, 16, 80, 32, 192, 32, 4, 64, 5, 22, -16, -64, -8, -64, -16, -12, -16, -96, -4,
    -24, -32, -64, -16, 8, 16, 8, 16, 24, 12, 8, 16, 4, 4, 24, 2, -8, -8, -4, 1,
];

struct Ctx {
    catalogs: BTreeMap<usize, Catalog>,
    formulas: BTreeMap<usize, Formula>,
}

impl Ctx {
    fn formula(&mut self, m: usize) -> &Formula {
        if !self.formulas.contains_key(&m) {
            let f = compile_catalog(self.catalog(m), Exec::Parallel).unwrap();
            self.formulas.insert(m, f);
        }
        &self.formulas[&m]
    }

    fn catalog(&mut self, m: usize) -> &Catalog {
        self.catalogs
            .entry(m)
            .or_insert_with(|| build_catalog(m, Exec::Parallel).unwrap())
    }
}

type Check = fn(&mut Ctx) -> Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn term_counts(ctx: &mut Ctx) -> Result<String, String> {
    let mut detail = Vec::new();
    for (m, want) in TERM_COUNTS {
        let t = Instant::now();
        let catalog = build_catalog(m, Exec::Parallel).map_err(|e| e.to_string())?;
        let f = compile_catalog(&catalog, Exec::Parallel).map_err(|e| e.to_string())?;
        let dt = t.elapsed();
        ensure(f.terms.len() == want, || format!("m={m}: {} terms, expected {want}", f.terms.len()))?;
        let limit = match m {
            8 => Some(M8_LIMIT),
            12 => Some(M12_LIMIT),
            _ => None,
        };
        if let Some(limit) = limit {
            ensure(dt < limit, || format!("m={m} took {dt:.1?}, limit {limit:?}"))?;
        }
        detail.push(format!("m={m}: {want} terms in {dt:.2?}"));
        ctx.catalogs.insert(m, catalog);
        ctx.formulas.insert(m, f);
    }
    Ok(detail.join(", "))
}

fn c4_closed_form(ctx: &mut Ctx) -> Result<String, String> {
    use MatrixExpr::A;
    let ones = VectorExpr::Ones;
    let aa = MatrixExpr::hadamard([A, A]);
    let mut want = vec![
        (1, VectorExpr::matvec(MatrixExpr::hadamard([A, MatrixExpr::power(3)]), ones.clone())),
        (-2, VectorExpr::matvec(aa.clone(), VectorExpr::matvec(aa, ones.clone()))),
        (1, VectorExpr::matvec(MatrixExpr::hadamard([A, A, A, A]), ones)),
    ];
    let mut got = Vec::new();
    for t in &ctx.formula(4).terms {
        match &t.body {
            TermBody::Sea(v) => got.push((t.coefficient, v.normalize())),
            TermBody::Ifs(_) => return Err("m=4 formula has an IFS term".into()),
        }
    }
    want.sort();
    got.sort();
    ensure(got == want, || format!("got {got:?}"))?;
    Ok("tr(A^4) - 2 1'(A o A)^2 1 + 1'(A o A o A o A)1".into())
}

fn c8_coefficients(ctx: &mut Ctx) -> Result<String, String> {
    use MatrixExpr::A;
    let f = ctx.formula(8);
    let ifs: Vec<_> = f.terms.iter().filter(|t| !t.is_sea()).collect();
    ensure(ifs.len() == 1, || format!("{} IFS terms", ifs.len()))?;
    ensure(ifs[0].coefficient == 22, || format!("IFS coefficient {}", ifs[0].coefficient))?;
    let TermBody::Ifs(body) = &ifs[0].body else { unreachable!() };
    let aa = MatrixExpr::hadamard([A, A]);
    let pattern = [
        (1, 2, aa.clone()),
        (1, 3, A),
        (1, 4, A),
        (2, 3, A),
        (2, 4, A),
        (3, 4, aa),
    ];
    ensure(body.layers == 4 && same_pattern_up_to_renaming(body, &pattern), || {
        format!("IFS factors {:?}", body.factors)
    })?;
    let mut got: Vec<i64> = f.terms.iter().map(|t| t.coefficient).collect();
    let mut want = C8_COEFFICIENTS.to_vec();
    got.sort_unstable();
    want.sort_unstable();
    ensure(got == want, || format!("coefficients {got:?}"))?;
    Ok("one IFS term +22 with the expected factor pattern; 44 coefficients match".into())
}

fn brute_force_oracle(ctx: &mut Ctx) -> Result<String, String> {
    let t = Instant::now();
    let mut worst: f64 = 0.0;
    for m in 3..=8 {
        let f = ctx.formula(m).clone();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        rng.set_stream(m as u64);
        for trial in 0..10 {
            let a = SymMatrix::random_normal(m + 2, &mut rng);
            let got = eval_formula(&f, &a, Exec::Parallel).map_err(|e| e.to_string())?.as_f64();
            let want = brute_force_cm(&a, m, Exec::Parallel).map_err(|e| e.to_string())?.as_f64();
            let err = relative_error(got, want);
            worst = worst.max(err);
            ensure(err < ORACLE_REL_TOL, || format!("m={m} trial {trial}: {got} vs {want}"))?;
        }
    }
    let dt = t.elapsed();
    ensure(dt < ORACLE_LIMIT, || format!("took {dt:.1?}"))?;
    Ok(format!("max relative error {worst:.2e} in {dt:.2?}"))
}

fn exact_binary(ctx: &mut Ctx) -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let graphs: Vec<SymMatrix> = (0..20).map(|i| SymMatrix::erdos_renyi(6 + i % 5, 0.5, &mut rng)).collect();
    let mut nonzero = 0;
    for m in 3..=8 {
        let f = ctx.formula(m).clone();
        for (i, g) in graphs.iter().enumerate() {
            let got = eval_formula(&f, g, Exec::Parallel).map_err(|e| e.to_string())?;
            let want = brute_force_cm(g, m, Exec::Parallel).map_err(|e| e.to_string())?;
            ensure(got == want, || format!("m={m} graph {i}: {got} vs {want}"))?;
            let Value::Integer(v) = got else {
                return Err("integer input evaluated in floating point".into());
            };
            ensure(v % (2 * m as i128) == 0, || format!("m={m} graph {i}: {v} not divisible by {}", 2 * m))?;
            nonzero += usize::from(v != 0);
        }
    }
    Ok(format!("120 exact matches, {nonzero} non-zero"))
}

fn complete_graph(ctx: &mut Ctx) -> Result<String, String> {
    let mut checked = 0;
    for m in 3..=8 {
        let f = ctx.formula(m).clone();
        for n in m..=8 {
            let got = eval_formula(&f, &SymMatrix::complete(n), Exec::Parallel).map_err(|e| e.to_string())?;
            let want = Value::Integer(falling_factorial(n as u64, m as u64) as i128);
            ensure(got == want, || format!("m={m} n={n}: {got} vs {want}"))?;
            checked += 1;
        }
    }
    Ok(format!("{checked} (m, n) pairs exact"))
}

fn mobius_identity(_: &mut Ctx) -> Result<String, String> {
    let mut oracle = MobiusOracle::new();
    let mut checked = 0;
    for m in 3..=8 {
        for rgs in all_partitions(m) {
            if has_adjacent(&rgs) {
                continue;
            }
            let k = *rgs.iter().max().unwrap() as usize + 1;
            let h: i64 = (0..k)
                .map(|b| {
                    let g = rgs.iter().filter(|&&x| x as usize == b).count() as i64;
                    (1..g).product::<i64>()
                })
                .product();
            let closed = if (m - k) % 2 == 0 { h } else { -h };
            let recursive = oracle.mu(&rgs);
            ensure(recursive == closed, || format!("{rgs:?}: recursive {recursive}, closed {closed}"))?;
            let p = Partition::from_assignment(rgs.clone()).map_err(|e| e.to_string())?;
            ensure(mobius_finest(&p) == closed, || format!("{rgs:?}: library {}", mobius_finest(&p)))?;
            checked += 1;
        }
    }
    Ok(format!("{checked} admissible partitions"))
}

fn pruning_invariance(ctx: &mut Ctx) -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let a = SymMatrix::random_normal(5, &mut rng).to_float();
    let mut steps = 0;
    let mut worst: f64 = 0.0;
    for m in 3..=8 {
        for class in ctx.catalog(m).classes.clone() {
            let mut reference = None;
            let mut failure = None;
            prune_with_policy(&class.representative, Lmg::find_pendant, |lmg| {
                let fs = naive_lmg_fs(lmg, &a);
                match reference {
                    None => reference = Some(fs),
                    Some(r) => {
                        steps += 1;
                        let err = relative_error(fs, r);
                        worst = worst.max(err);
                        if err >= PRUNE_REL_TOL && failure.is_none() {
                            failure = Some(format!("m={m} k={} t={}: {fs} vs {r}", class.k, class.t));
                        }
                    }
                }
            })
            .map_err(|e| e.to_string())?;
            if let Some(f) = failure {
                return Err(f);
            }
        }
    }
    Ok(format!("{steps} pruning steps, max relative change {worst:.2e}"))
}

fn dichotomy(ctx: &mut Ctx) -> Result<String, String> {
    let mut sea = 0;
    let mut ifs = 0;
    for m in 3..=12 {
        for class in &ctx.catalog(m).classes {
            let r = prune_to_completion(&class.representative).map_err(|e| e.to_string())?;
            match &r.outcome {
                Outcome::Sea(_) => {
                    ensure(r.layers == 1, || "SEA with more than one node".into())?;
                    sea += 1;
                }
                Outcome::Ifs(lmg) => {
                    let tag = format!("m={m} k={} t={}", class.k, class.t);
                    ensure(lmg.node_count() >= 4, || format!("{tag}: IFS with {} nodes", lmg.node_count()))?;
                    ensure(lmg.min_distinct_neighbors() >= 3, || format!("{tag}: node with < 3 neighbours"))?;
                    ensure(r.layers <= m / 2, || format!("{tag}: {} layers", r.layers))?;
                    ifs += 1;
                }
            }
        }
    }
    Ok(format!("{sea} SEA and {ifs} IFS classes for m <= 12"))
}

fn detection_trend(ctx: &mut Ctx) -> Result<String, String> {
    let cfg = DetectionConfig::default();
    let formulas: Vec<Formula> = cfg.orders.iter().map(|&m| ctx.formula(m).clone()).collect();
    let t = Instant::now();
    let report = run_with_formulas(&cfg, &formulas, Exec::Parallel).map_err(|e| e.to_string())?;
    let dt = t.elapsed();
    let se = |m: usize| report.results.iter().find(|r| r.m == m).unwrap().se;
    let table: Vec<String> = report.results.iter().map(|r| format!("{}:{:.2}", r.m, r.se)).collect();
    let table = table.join(" ");
    ensure(se(7) < se(3), || format!("SE(7) not below SE(3): {table}"))?;
    ensure(se(7) <= SE_CEILING, || format!("SE(7) above {SE_CEILING}: {table}"))?;
    ensure(dt < DETECT_LIMIT, || format!("took {dt:.1?}"))?;
    Ok(format!("SE {table} in {dt:.1?}"))
}

fn complexity(ctx: &mut Ctx) -> Result<String, String> {
    let f = ctx.formula(8).clone();
    let report = bench(&f, &BENCH_SIZES, 11, Exec::Parallel).map_err(|e| e.to_string())?;
    let g = report.growth_exponent.ok_or("no growth exponent")?;
    let times: Vec<String> = report.rows.iter().map(|r| format!("n={}:{:.3}s", r.n, r.formula_secs)).collect();
    ensure((GROWTH_RANGE.0..=GROWTH_RANGE.1).contains(&g), || {
        format!("growth exponent {g:.3} ({})", times.join(" "))
    })?;
    Ok(format!("growth exponent {g:.3} ({})", times.join(" ")))
}

fn main() {
    let checks: [(&str, Check); 11] = [
        ("term counts", term_counts),
        ("C4 closed form", c4_closed_form),
        ("C8 coefficients", c8_coefficients),
        ("brute-force oracle", brute_force_oracle),
        ("exact binary", exact_binary),
        ("complete graph", complete_graph),
        ("Mobius identity", mobius_identity),
        ("pruning invariance", pruning_invariance),
        ("pruning dichotomy", dichotomy),
        ("detection trend", detection_trend),
        ("complexity", complexity),
    ];
    let mut ctx = Ctx {
        catalogs: BTreeMap::new(),
        formulas: BTreeMap::new(),
    };
    let mut failed = 0;
    for (i, (name, check)) in checks.iter().enumerate() {
        let t = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(|| check(&mut ctx)))
            .unwrap_or_else(|_| Err("panicked".into()));
        let dt = t.elapsed();
        match result {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} [{dt:.1?}]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail} [{dt:.1?}]", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", checks.len() - failed, checks.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
