//! CLI exposing bound evaluation, optimization, simulation, the exact/MC
//! oracles, the T1/T2 comparison, and the convergence-rate profile.
//!
//! Output is JSON (mirroring the library types) or CSV (one row per case,
//! floats at 17 significant digits). Identical invocations, including the
//! seed, produce byte-identical output.

use std::fmt::Write as _;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use wilks::model::Model;
use wilks::optimizer::{self, Direction};
use wilks::oracle::{self, CdfEstimate};
use wilks::special::chi2_cdf;
use wilks::{bounds, Error};

#[derive(Parser)]
#[command(name = "wilks", version, about = "Finite-sample bounds on the CDF of the log-likelihood ratio")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Dir {
    UpperMin,
    LowerMax,
}

#[derive(Args)]
struct Common {
    /// Full probability vector, comma separated (e.g. 0.4,0.6)
    #[arg(long, value_delimiter = ',', required = true)]
    theta: Vec<f64>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Write the report here instead of stdout
    #[arg(long)]
    out: Option<std::path::PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the two-sided CDF sandwich at one point
    Bound {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_parser = parse_count)]
        n: u64,
        #[arg(long)]
        a: f64,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        delta_prime: Option<f64>,
        /// Search (delta, delta') instead of supplying them
        #[arg(long, conflicts_with_all = ["delta", "delta_prime"])]
        optimize: bool,
    },
    /// Search (delta, delta') for the tightest bound
    Optimize {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_parser = parse_count)]
        n: u64,
        #[arg(long)]
        a: f64,
        #[arg(long, value_enum, default_value = "upper-min")]
        direction: Dir,
    },
    /// Empirical CDF of the statistic next to its chi-square limit
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_parser = parse_count)]
        n: u64,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Threshold grid, start:stop:linK or start:stop:logK
        #[arg(long, value_parser = parse_grid)]
        a_grid: Grid,
    },
    /// Ground-truth P(Lambda_n < a): exact enumeration, or Monte Carlo when --trials is given
    Oracle {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_parser = parse_count)]
        n: u64,
        #[arg(long)]
        a: f64,
        #[arg(long)]
        trials: Option<u64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.01)]
        alpha: f64,
    },
    /// Per-n optimized gap curves T1 and T2 over an n grid
    Compare {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_parser = parse_grid)]
        n_grid: Grid,
        #[arg(long)]
        a: f64,
        /// Fix k instead of optimizing it per n
        #[arg(long)]
        k: Option<f64>,
    },
    /// Slope of the optimized slack mu* against n
    Profile {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_parser = parse_grid)]
        n_grid: Grid,
        #[arg(long, default_value_t = 1.0)]
        a: f64,
    },
}

/// start:stop:logK (log-spaced) or start:stop:linK (linear), K points.
#[derive(Clone)]
struct Grid(Vec<f64>);

fn parse_grid(s: &str) -> Result<Grid, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [start, stop, spec] = parts[..] else {
        return Err(format!("expected start:stop:linK or start:stop:logK, got `{s}`"));
    };
    let start: f64 = start.parse().map_err(|e| format!("bad start `{start}`: {e}"))?;
    let stop: f64 = stop.parse().map_err(|e| format!("bad stop `{stop}`: {e}"))?;
    let (log, k) = if let Some(k) = spec.strip_prefix("log") {
        (true, k)
    } else if let Some(k) = spec.strip_prefix("lin") {
        (false, k)
    } else {
        return Err(format!("grid spec must start with lin or log, got `{spec}`"));
    };
    let k: usize = k.parse().map_err(|e| format!("bad point count `{k}`: {e}"))?;
    if k < 1 || (k == 1 && start != stop) {
        return Err("grid needs at least 2 points unless start == stop".into());
    }
    if log && (start <= 0.0 || stop <= 0.0) {
        return Err("log grids require positive endpoints".into());
    }
    let points = (0..k)
        .map(|i| {
            let t = if k == 1 { 0.0 } else { i as f64 / (k - 1) as f64 };
            if log {
                (start.ln() + (stop.ln() - start.ln()) * t).exp()
            } else {
                start + (stop - start) * t
            }
        })
        .collect();
    Ok(Grid(points))
}

fn parse_count(s: &str) -> Result<u64, String> {
    // accept scientific notation (1e8) for sample sizes
    let v: f64 = s.parse().map_err(|e| format!("bad integer `{s}`: {e}"))?;
    if !(v >= 1.0 && v.fract() == 0.0 && v <= u64::MAX as f64) {
        return Err(format!("`{s}` is not a positive integer"));
    }
    Ok(v as u64)
}

fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn csv_row(fields: &[String]) -> String {
    fields.join(",")
}

struct Report {
    json: serde_json::Value,
    csv_header: Vec<&'static str>,
    csv_rows: Vec<Vec<String>>,
}

fn run(cli: Cli) -> Result<(), Error> {
    let (common, report) = match cli.command {
        Command::Bound {
            common,
            n,
            a,
            delta,
            delta_prime,
            optimize,
        } => {
            let m = Model::new(&common.theta)?;
            let (delta, delta_prime) = if optimize {
                let opt = optimizer::optimize_theorem(&m, n, a, Direction::UpperMin);
                (opt.delta, opt.delta_prime)
            } else {
                match (delta, delta_prime) {
                    (Some(d), Some(dp)) => (d, dp),
                    _ => {
                        return Err(Error::DomainError(
                            "bound requires --delta and --delta-prime unless --optimize is set"
                                .into(),
                        ))
                    }
                }
            };
            let b = bounds::theorem_bounds(&m, n, a, delta, delta_prime)?;
            let row = vec![
                n.to_string(),
                fmt_float(a),
                fmt_float(delta),
                fmt_float(delta_prime),
                fmt_float(b.lower),
                fmt_float(b.upper),
                fmt_float(b.raw_lower),
                fmt_float(b.raw_upper),
                fmt_float(b.table.mu),
                fmt_float(b.table.delta_n),
            ];
            (
                common,
                Report {
                    json: serde_json::to_value(&b).expect("serializable"),
                    csv_header: vec![
                        "n", "a", "delta", "delta_prime", "lower", "upper", "raw_lower",
                        "raw_upper", "mu", "delta_n",
                    ],
                    csv_rows: vec![row],
                },
            )
        }
        Command::Optimize {
            common,
            n,
            a,
            direction,
        } => {
            let m = Model::new(&common.theta)?;
            let dir = match direction {
                Dir::UpperMin => Direction::UpperMin,
                Dir::LowerMax => Direction::LowerMax,
            };
            let opt = optimizer::optimize_theorem(&m, n, a, dir);
            let b = bounds::theorem_bounds(&m, n, a, opt.delta, opt.delta_prime)?;
            let row = vec![
                n.to_string(),
                fmt_float(a),
                fmt_float(opt.delta),
                fmt_float(opt.delta_prime),
                fmt_float(opt.objective),
                opt.evaluations.to_string(),
                fmt_float(b.lower),
                fmt_float(b.upper),
            ];
            (
                common,
                Report {
                    json: serde_json::json!({ "optimum": opt, "bound": b }),
                    csv_header: vec![
                        "n",
                        "a",
                        "delta",
                        "delta_prime",
                        "objective",
                        "evaluations",
                        "lower",
                        "upper",
                    ],
                    csv_rows: vec![row],
                },
            )
        }
        Command::Simulate {
            common,
            n,
            trials,
            seed,
            a_grid,
        } => {
            let m = Model::new(&common.theta)?;
            let rows = oracle::wilks_curve(&m, n, trials, seed, &a_grid.0)?;
            let csv_rows = rows
                .iter()
                .map(|&(a, fhat, f)| vec![fmt_float(a), fmt_float(fhat), fmt_float(f)])
                .collect();
            (
                common,
                Report {
                    json: serde_json::json!(rows
                        .iter()
                        .map(|&(a, empirical, chi2)| {
                            serde_json::json!({ "a": a, "empirical": empirical, "chi2": chi2 })
                        })
                        .collect::<Vec<_>>()),
                    csv_header: vec!["a", "empirical", "chi2"],
                    csv_rows,
                },
            )
        }
        Command::Oracle {
            common,
            n,
            a,
            trials,
            seed,
            alpha,
        } => {
            let m = Model::new(&common.theta)?;
            let est: CdfEstimate = match trials {
                Some(t) => oracle::mc_cdf(&m, n, a, t, seed, alpha)?,
                None => oracle::exact_cdf(&m, n, a)?,
            };
            let row = vec![
                n.to_string(),
                fmt_float(a),
                fmt_float(est.value),
                fmt_float(est.half_width),
                match est.method {
                    oracle::Method::Exact => "exact".into(),
                    oracle::Method::MonteCarlo => "monte-carlo".into(),
                },
                est.trials.to_string(),
                est.seed.map_or(String::new(), |s| s.to_string()),
            ];
            (
                common,
                Report {
                    json: serde_json::to_value(&est).expect("serializable"),
                    csv_header: vec!["n", "a", "value", "half_width", "method", "trials", "seed"],
                    csv_rows: vec![row],
                },
            )
        }
        Command::Compare {
            common,
            n_grid,
            a,
            k,
        } => {
            let m = Model::new(&common.theta)?;
            let f_a = chi2_cdf(m.r(), a)?;
            let mut csv_rows = Vec::new();
            let mut json_rows = Vec::new();
            for &nf in &n_grid.0 {
                let n = nf.round() as u64;
                let opt = optimizer::optimize_theorem(&m, n, a, Direction::UpperMin);
                let t1 = opt.objective.min(1.0) - f_a;
                let (k_star, t2) = match k {
                    Some(k) => (
                        k,
                        bounds::comparator_t1_t2(&m, n, a, opt.delta, opt.delta_prime, k)?.t2,
                    ),
                    None => optimizer::optimize_k(m.r(), n, a),
                };
                json_rows.push(serde_json::json!({
                    "n": n, "t1": t1, "t2": t2,
                    "delta": opt.delta, "delta_prime": opt.delta_prime, "k": k_star,
                }));
                csv_rows.push(vec![
                    n.to_string(),
                    fmt_float(t1),
                    fmt_float(t2),
                    fmt_float(opt.delta),
                    fmt_float(opt.delta_prime),
                    fmt_float(k_star),
                ]);
            }
            (
                common,
                Report {
                    json: serde_json::json!(json_rows),
                    csv_header: vec!["n", "t1", "t2", "delta", "delta_prime", "k"],
                    csv_rows,
                },
            )
        }
        Command::Profile { common, n_grid, a } => {
            let m = Model::new(&common.theta)?;
            let grid: Vec<u64> = n_grid.0.iter().map(|&x| x.round() as u64).collect();
            let profile = bounds::rate_probe(&m, &grid, a)?;
            let csv_rows = profile
                .points
                .iter()
                .map(|p| {
                    vec![
                        p.n.to_string(),
                        fmt_float(p.mu_star),
                        fmt_float(p.delta),
                        fmt_float(p.delta_prime),
                        fmt_float(profile.slope),
                    ]
                })
                .collect();
            (
                common,
                Report {
                    json: serde_json::to_value(&profile).expect("serializable"),
                    csv_header: vec!["n", "mu_star", "delta", "delta_prime", "slope"],
                    csv_rows,
                },
            )
        }
    };
    emit(&common, report)
}

fn emit(common: &Common, report: Report) -> Result<(), Error> {
    let mut out = String::new();
    match common.format {
        Format::Json => {
            out.push_str(&serde_json::to_string_pretty(&report.json).expect("serializable"));
            out.push('\n');
        }
        Format::Csv => {
            writeln!(out, "{}", report.csv_header.join(",")).unwrap();
            for row in &report.csv_rows {
                writeln!(out, "{}", csv_row(row)).unwrap();
            }
        }
    }
    match &common.out {
        Some(path) => std::fs::write(path, out)
            .map_err(|e| Error::DomainError(format!("cannot write {}: {e}", path.display())))?,
        None => print!("{out}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse(); // clap exits with status 2 on usage errors
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
