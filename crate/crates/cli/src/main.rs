//! `hybridsat`: solve DIMACS instances, build covers, inspect QBall
//! circuits, tabulate runtime exponents and run benchmark sweeps.

mod bench;
mod circuit;
mod config;
mod estimate;
mod solve;

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use hybridsat::cnf::to_dimacs;
use hybridsat::cover::{build_binary_cover, CoverCache, Rho};
use hybridsat::gen::{certified_unsat, pigeonhole, planted_3sat, random_3sat, rng};
use hybridsat::resource::QubitModel;

use config::{Format, RunConfig, StrategyArgs, SCHEMA_VERSION};

#[derive(Parser)]
#[command(name = "hybridsat", version, about)]
struct Cli {
    /// Root seed; every random choice derives from it
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Write results here instead of stdout
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Decide DIMACS instances. Exit code 10 SAT, 20 UNSAT, 0 unknown.
    Solve {
        #[arg(required = true)]
        instances: Vec<PathBuf>,
        #[command(flatten)]
        strategy: StrategyArgs,
    },
    /// Runtime exponents over a grid of device fractions c and slacks
    Estimate {
        #[arg(long, default_value = estimate::DEFAULT_C)]
        c: String,
        #[arg(long, default_value = estimate::DEFAULT_SLACK)]
        slack: String,
        /// n used for the r_tilde column (M = c·n)
        #[arg(long, default_value_t = 10_000)]
        n: usize,
    },
    /// Build QBall₁/QBall₂ for an instance and self-check them
    Circuit {
        instance: PathBuf,
        #[arg(long)]
        r: usize,
        /// Ball center as a 0/1 string (default all zeros)
        #[arg(long)]
        center: Option<String>,
        #[arg(long, value_enum, default_value_t = circuit::Verify::Sample)]
        verify: circuit::Verify,
        /// Write program listings to PREFIX.qball1.txt and PREFIX.qball2.txt
        #[arg(long)]
        dump: Option<PathBuf>,
    },
    /// Run a JSON-lines manifest and write per-run counters as CSV
    Bench {
        manifest: PathBuf,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Also write growth-per-radius fits as CSV
        #[arg(long)]
        fits: Option<PathBuf>,
    },
    /// Build (or load from $HYBRIDSAT_CACHE) a binary covering code
    Cover {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value = "1/4")]
        rho: String,
        #[arg(long, default_value_t = 1)]
        d: usize,
        /// Exhaustively check coverage
        #[arg(long)]
        verify: bool,
        /// Include the centers in the output
        #[arg(long)]
        centers: bool,
    },
    /// Write generated instances as DIMACS files
    Gen {
        #[arg(long, value_enum)]
        kind: GenKind,
        #[arg(long)]
        n: usize,
        /// Clause count (default ⌊4.26·n⌋); holes for pigeonhole
        #[arg(long)]
        clauses: Option<usize>,
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum GenKind {
    Random,
    Planted,
    Unsat,
    Pigeonhole,
}

fn sink(output: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match output {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn cover(n: usize, rho: &str, d: usize, verify: bool, centers: bool) -> Result<serde_json::Value> {
    let rho: Rho = rho.parse()?;
    let c = match std::env::var_os("HYBRIDSAT_CACHE") {
        Some(dir) => CoverCache::new(dir).get_or_build(n, rho, d)?,
        None => build_binary_cover(n, rho, d)?,
    };
    let verified = if verify { Some(c.verify()?) } else { None };
    if verified == Some(false) {
        bail!("cover n={n} rho={rho} d={d} fails verification");
    }
    let mut doc = serde_json::json!({
        "schema_version": SCHEMA_VERSION,
        "n": n,
        "rho": rho.to_string(),
        "d": d,
        "radius": c.radius,
        "block_sizes": c.block_sizes,
        "block_radii": c.block_radii,
        "size": c.len(),
        "overhead_bits": c.overhead(),
        "verified": verified,
    });
    if centers {
        doc["centers"] = c.centers.iter().map(|x| x.to_string()).collect();
    }
    Ok(doc)
}

fn generate(kind: GenKind, n: usize, clauses: Option<usize>, count: usize, out: &PathBuf, seed: u64) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out)?;
    let mut g = rng(seed);
    let l = clauses.unwrap_or((4.26 * n as f64) as usize);
    let mut paths = Vec::new();
    for i in 0..count {
        let (f, note) = match kind {
            GenKind::Random => (random_3sat(n, l, &mut g), String::new()),
            GenKind::Planted => {
                let (f, plant) = planted_3sat(n, l, &mut g);
                (f, format!("c planted {plant}\n"))
            }
            GenKind::Unsat => {
                if n > 24 {
                    bail!("certified UNSAT instances need n <= 24");
                }
                (certified_unsat(n, l, &mut g), "c certified unsatisfiable\n".into())
            }
            GenKind::Pigeonhole => (pigeonhole(n), String::new()),
        };
        let name = format!("{}_n{}_{i:03}.cnf", format!("{kind:?}").to_lowercase(), f.num_vars());
        let p = out.join(name);
        fs::write(&p, format!("c hybridsat gen seed {seed}\n{note}{}", to_dimacs(&f)))?;
        paths.push(p);
    }
    Ok(paths)
}

fn run(cli: Cli) -> Result<i32> {
    if let Cmd::Solve { instances, strategy } = &cli.cmd {
        let cfg = RunConfig::new(instances.clone(), strategy, cli.seed, cli.output.clone(), cli.format)?;
        let mut out = sink(&cfg.output)?;
        let code = solve::run(&cfg, &mut out)?;
        out.flush()?;
        return Ok(code);
    }
    let mut out = sink(&cli.output)?;
    let code = match cli.cmd {
        Cmd::Solve { .. } => unreachable!(),
        Cmd::Estimate { c, slack, n } => {
            let rows = estimate::table(&estimate::parse_grid(&c)?, &estimate::parse_grid(&slack)?, n, &QubitModel::default())?;
            estimate::write(&mut out, &rows, cli.format)?;
            0
        }
        Cmd::Circuit { instance, r, center, verify, dump } => {
            let f = solve::read_formula(&instance)?;
            let report = circuit::run(circuit::CircuitArgs {
                formula: &f,
                r,
                center: center.as_deref(),
                verify,
                dump: dump.as_deref(),
                seed: cli.seed,
            })?;
            circuit::write(&mut out, &report, cli.format)?;
            0
        }
        Cmd::Bench { manifest, jobs, fits } => {
            let entries = bench::read_manifest(&manifest)?;
            let records = bench::run(&entries, cli.seed, jobs)?;
            bench::write_records(&mut out, &records)?;
            let fitted = bench::fits(&records);
            for f in &fitted {
                log::info!("{} qubits={:?} {}: growth {:.3} per unit r over {} radii", f.strategy, f.qubits, f.counter, f.growth_per_r, f.radii);
            }
            if let Some(p) = fits {
                bench::write_fits(&mut File::create(&p).with_context(|| format!("creating {}", p.display()))?, &fitted)?;
            }
            0
        }
        Cmd::Cover { n, rho, d, verify, centers } => {
            let doc = cover(n, &rho, d, verify, centers)?;
            writeln!(out, "{}", serde_json::to_string_pretty(&doc)?)?;
            0
        }
        Cmd::Gen { kind, n, clauses, count, out: dir } => {
            for p in generate(kind, n, clauses, count, &dir, cli.seed)? {
                writeln!(out, "{}", p.display())?;
            }
            0
        }
    };
    out.flush()?;
    Ok(code)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
