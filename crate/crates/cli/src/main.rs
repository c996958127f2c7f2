use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use ceef::cache;
use ceef::detect::{run_with_formulas, DetectionConfig};
use ceef::eval::{bench, brute_force_cm, eval_formula, falling_factorial, SymMatrix, Value};
use ceef::expr::{emit_json, emit_latex, emit_text};
use ceef::prune::compile_catalog;
use ceef::{Catalog, Error, Exec, Formula, DEFAULT_MAX_ORDER, HARD_MAX_ORDER};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const VALIDATE_REL_TOL: f64 = 1e-8;

#[derive(Parser)]
#[command(name = "ceef", version, about = "Cycle-count formula compiler and evaluator")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Run every loop on the calling thread.
    #[arg(long, global = true)]
    sequential: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compile the formula for C_m.
    Generate {
        #[arg(long)]
        m: usize,
        #[arg(long, value_enum, default_value_t = Format::Latex)]
        format: Format,
        /// Write to a file instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        cache: CacheArgs,
    },
    /// List the multigraph classes for order m.
    Catalog {
        #[arg(long)]
        m: usize,
        #[arg(long, value_enum, default_value_t = CatalogFormat::Text)]
        format: CatalogFormat,
        #[command(flatten)]
        cache: CacheArgs,
    },
    /// Check compiled formulas against brute-force sums.
    Validate {
        /// Order or inclusive range, e.g. `5` or `3..8`.
        #[arg(long, value_parser = parse_range)]
        m: (usize, usize),
        #[arg(long, default_value_t = 10)]
        n: usize,
        #[arg(long, default_value_t = 10)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        cache: CacheArgs,
    },
    /// Time formula evaluation against brute force.
    Bench {
        #[arg(long)]
        m: usize,
        #[arg(long, value_delimiter = ',', default_values_t = [50, 100, 200])]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Print the report as JSON.
        #[arg(long)]
        json: bool,
        #[command(flatten)]
        cache: CacheArgs,
    },
    /// Run the low-rank detection experiment.
    Detect {
        #[arg(long, default_value_t = 300)]
        n: usize,
        #[arg(long, default_value_t = 1.5, allow_negative_numbers = true)]
        lambda1: f64,
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        lambda2: f64,
        #[arg(long, value_delimiter = ',', default_values_t = [3, 4, 5, 6, 7])]
        orders: Vec<usize>,
        #[arg(long, default_value_t = 100)]
        reps: usize,
        #[arg(long, default_value_t = 2019)]
        seed: u64,
        /// Print the report as JSON.
        #[arg(long)]
        json: bool,
        #[command(flatten)]
        cache: CacheArgs,
    },
    /// Evaluate C_m on a matrix file (first line `n`, or `n integer`).
    Eval {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        matrix: PathBuf,
        /// Also compute the brute-force sum.
        #[arg(long)]
        brute: bool,
        #[command(flatten)]
        cache: CacheArgs,
    },
}

#[derive(Args)]
struct CacheArgs {
    /// Catalog cache directory [default: $CEEF_CACHE, else the user cache dir].
    #[arg(long)]
    cache: Option<PathBuf>,
    /// Neither read nor write the catalog cache.
    #[arg(long)]
    no_cache: bool,
    /// Largest order accepted.
    #[arg(long, default_value_t = DEFAULT_MAX_ORDER)]
    max_order: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Latex,
    Json,
    Text,
}

#[derive(Clone, Copy, ValueEnum)]
enum CatalogFormat {
    Text,
    Json,
}

fn parse_range(s: &str) -> Result<(usize, usize), String> {
    let num = |x: &str| x.trim().parse::<usize>().map_err(|_| format!("`{x}` is not an order"));
    let (lo, hi) = match s.split_once("..") {
        Some((a, b)) => (num(a)?, num(b.trim_start_matches('='))?),
        None => {
            let m = num(s)?;
            (m, m)
        }
    };
    if lo > hi {
        return Err(format!("empty range {s}"));
    }
    Ok((lo, hi))
}

/// Command failure with its exit status.
enum Failure {
    Usage(String),
    Check(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(_) | Error::Contract(_) => Failure::Check(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

type Outcome = Result<(), Failure>;

impl CacheArgs {
    fn catalog(&self, m: usize, exec: Exec) -> Result<Catalog, Failure> {
        let limit = self.max_order.min(HARD_MAX_ORDER);
        if !(3..=limit).contains(&m) {
            return Err(Failure::Usage(format!("order {m} outside the supported range 3..={limit}")));
        }
        let dir = if self.no_cache {
            None
        } else {
            self.cache.clone().or_else(cache::default_dir)
        };
        Ok(cache::get_or_build(dir.as_deref(), m, limit, exec)?)
    }

    fn formula(&self, m: usize, exec: Exec) -> Result<Formula, Failure> {
        Ok(compile_catalog(&self.catalog(m, exec)?, exec)?)
    }
}

fn generate(m: usize, format: Format, out: Option<PathBuf>, cache: &CacheArgs, exec: Exec) -> Outcome {
    let catalog = cache.catalog(m, exec)?;
    let f = compile_catalog(&catalog, exec)?;
    let text = match format {
        Format::Latex => emit_latex(&f),
        Format::Json => emit_json(&f),
        Format::Text => emit_text(&f, Some(&catalog)),
    };
    match out {
        Some(path) => fs::write(&path, text).map_err(|e| Failure::Check(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn catalog(m: usize, format: CatalogFormat, cache: &CacheArgs, exec: Exec) -> Outcome {
    let c = cache.catalog(m, exec)?;
    match format {
        CatalogFormat::Json => print!("{}", cache::catalog_to_json(&c)),
        CatalogFormat::Text => {
            println!("k\tt\td\th\ta\tgraph\tweights");
            for g in &c.classes {
                let rows: Vec<String> = g
                    .representative
                    .weights()
                    .iter()
                    .map(|r| r.iter().map(u32::to_string).collect::<Vec<_>>().join(" "))
                    .collect();
                println!(
                    "{}\t{}\t{}\t{}\t{}\t{}\t{}",
                    g.k,
                    g.t,
                    g.d,
                    g.h,
                    g.a,
                    g.representative.to_edge_string(),
                    rows.join(" / ")
                );
            }
        }
    }
    Ok(())
}

fn validate(range: (usize, usize), n: usize, trials: usize, seed: u64, cache: &CacheArgs, exec: Exec) -> Outcome {
    if trials == 0 {
        return Err(Failure::Usage("trials must be positive".into()));
    }
    let mut failures = 0;
    let mut executed = 0;
    println!("m\tn\ttrials\tmax_rel_error\tbinary\tcomplete\tstatus");
    for m in range.0..=range.1 {
        let f = cache.formula(m, exec)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(m as u64);
        let mut worst: f64 = 0.0;
        let mut binary_ok = true;
        let mut skipped = None;
        for _ in 0..trials {
            let a = SymMatrix::random_normal(n, &mut rng);
            let want = match brute_force_cm(&a, m, exec) {
                Ok(v) => v.as_f64(),
                Err(e @ Error::BudgetExceeded { .. }) => {
                    skipped = Some(e);
                    break;
                }
                Err(e) => return Err(e.into()),
            };
            let got = eval_formula(&f, &a, exec)?.as_f64();
            worst = worst.max((got - want).abs() / want.abs().max(1.0));
            let g = SymMatrix::erdos_renyi(n, 0.5, &mut rng);
            binary_ok &= eval_formula(&f, &g, exec)? == brute_force_cm(&g, m, exec)?;
        }
        if let Some(e) = skipped {
            eprintln!("warning: m={m} skipped: {e}");
            println!("{m}\t{n}\t0\t-\t-\t-\tskipped");
            continue;
        }
        let complete_ok = n < m || {
            let want = Value::Integer(falling_factorial(n as u64, m as u64) as i128);
            eval_formula(&f, &SymMatrix::complete(n), exec)? == want
        };
        let ok = worst < VALIDATE_REL_TOL && binary_ok && complete_ok;
        executed += 1;
        failures += usize::from(!ok);
        let mark = |b: bool| if b { "exact" } else { "MISMATCH" };
        println!(
            "{m}\t{n}\t{trials}\t{worst:.3e}\t{}\t{}\t{}",
            mark(binary_ok),
            if n < m { "-" } else { mark(complete_ok) },
            if ok { "pass" } else { "FAIL" }
        );
    }
    if failures > 0 {
        return Err(Failure::Check(format!("{failures} of {executed} orders failed")));
    }
    Ok(())
}

fn run(cli: Cli) -> Outcome {
    let exec = if cli.sequential { Exec::Sequential } else { Exec::Parallel };
    if let Some(threads) = cli.threads {
        if threads == 0 {
            return Err(Failure::Usage("--threads must be positive".into()));
        }
        #[cfg(feature = "parallel")]
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Failure::Check(e.to_string()))?;
    }
    match cli.command {
        Command::Generate { m, format, out, cache } => generate(m, format, out, &cache, exec),
        Command::Catalog { m, format, cache } => catalog(m, format, &cache, exec),
        Command::Validate {
            m,
            n,
            trials,
            seed,
            cache,
        } => validate(m, n, trials, seed, &cache, exec),
        Command::Bench {
            m,
            sizes,
            seed,
            json,
            cache,
        } => {
            let f = cache.formula(m, exec)?;
            let report = bench(&f, &sizes, seed, exec)?;
            if json {
                println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
            } else {
                print!("{report}");
            }
            Ok(())
        }
        Command::Detect {
            n,
            lambda1,
            lambda2,
            orders,
            reps,
            seed,
            json,
            cache,
        } => {
            let cfg = DetectionConfig {
                n,
                lambda1,
                lambda2,
                orders,
                reps,
                seed,
            };
            cfg.validate()?;
            let formulas = cfg
                .orders
                .iter()
                .map(|&m| cache.formula(m, exec))
                .collect::<Result<Vec<_>, _>>()?;
            let report = run_with_formulas(&cfg, &formulas, exec)?;
            if json {
                print!("{}", report.to_json());
            } else {
                print!("{report}");
            }
            Ok(())
        }
        Command::Eval { m, matrix, brute, cache } => {
            let text = fs::read_to_string(&matrix)
                .map_err(|e| Failure::Usage(format!("{}: {e}", matrix.display())))?;
            let a = SymMatrix::parse(&text)?;
            let f = cache.formula(m, exec)?;
            println!("{}", eval_formula(&f, &a, exec)?);
            if brute {
                println!("{}", brute_force_cm(&a, m, exec)?);
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
