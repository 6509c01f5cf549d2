//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 infeasible
//! configuration.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::eval::{metrics_table_csv, mse, sweep_k};
use crate::io::{
    generate_synthetic, ingest_csv, read_depots, write_assignment, write_depots, write_outputs,
    write_plot, write_waypoints,
};
use crate::model::{BalanceMode, CostExponent};
use crate::pipeline::{assign_to_depots, run_two_phase, RunConfig};
use crate::verify::cross_check;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "facility-planner",
    version,
    about = "Two-phase depot placement and balanced assignment"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Full two-phase run: split, place depots, assign everything.
    Run {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        k: usize,
        #[command(flatten)]
        opts: PlanOpts,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
        /// Record wall-clock runtimes in summary.json (breaks byte-reproducibility).
        #[arg(long)]
        timing: bool,
    },
    /// Same-size k-means over every waypoint in the input.
    Phase1 {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        k: usize,
        #[command(flatten)]
        opts: PlanOpts,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
    },
    /// Optimal balanced assignment to depots read from a depots.csv file.
    Phase2 {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        depots: PathBuf,
        #[command(flatten)]
        opts: PlanOpts,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
    },
    /// Full runs over a range of K (`3..10` inclusive, or `3,5,9`).
    Sweep {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_parser = parse_k_list)]
        k: KList,
        #[command(flatten)]
        opts: PlanOpts,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
    },
    /// Write a synthetic worldwide dataset of Gaussian blobs.
    Synth {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 40)]
        clusters: usize,
        #[arg(long, default_value_t = 3.0)]
        spread: f64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        output: PathBuf,
    },
    /// Cross-check the exact solver against brute force and Hungarian oracles.
    Verify {
        #[arg(long, default_value_t = 200)]
        small: usize,
        #[arg(long, default_value_t = 50)]
        medium: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
}

#[derive(Args, Debug, Clone)]
struct PlanOpts {
    #[arg(long, default_value_t = 0.05)]
    gamma: f64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    max_iters: usize,
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u32).range(1..=2))]
    cost_exponent: u32,
    #[arg(long, value_enum, default_value_t = Balance::Strict)]
    balance: Balance,
    /// Independent Phase I seedings; the best objective wins.
    #[arg(long, default_value_t = 1)]
    restarts: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Balance {
    Strict,
    WithinOne,
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct KList(Vec<usize>);

fn parse_k_list(s: &str) -> std::result::Result<KList, String> {
    let bad = || format!("`{s}` is not a K range like 3..10 or a list like 3,5,9");
    let ks: Vec<usize> = if let Some((a, b)) = s.split_once("..") {
        let a: usize = a.trim().parse().map_err(|_| bad())?;
        let b: usize = b
            .trim()
            .trim_start_matches('=')
            .parse()
            .map_err(|_| bad())?;
        if a > b {
            return Err(bad());
        }
        (a..=b).collect()
    } else {
        s.split(',')
            .map(|t| t.trim().parse::<usize>().map_err(|_| bad()))
            .collect::<std::result::Result<_, _>>()?
    };
    if ks.contains(&0) {
        return Err("K must be at least 1".into());
    }
    Ok(KList(ks))
}

impl PlanOpts {
    fn config(&self, k: usize) -> Result<RunConfig> {
        Ok(RunConfig {
            k,
            gamma: self.gamma,
            seed: self.seed,
            cost_exponent: CostExponent::from_int(self.cost_exponent)?,
            balance_mode: match self.balance {
                Balance::Strict => BalanceMode::Strict,
                Balance::WithinOne => BalanceMode::WithinOne,
            },
            max_iters: self.max_iters,
            restarts: self.restarts,
            ..RunConfig::default()
        })
    }
}

/// Parse `argv` (including the program name) and execute.
pub fn run_cli<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(rendered.as_bytes())
            } else {
                out.write_all(rendered.as_bytes())
            };
            return code;
        }
    };
    match execute(cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) => EXIT_INFEASIBLE,
        _ => EXIT_DATA,
    }
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::Io {
        path: dir.to_path_buf(),
        source: e,
    })
}

fn execute(command: Command, out: &mut dyn Write) -> Result<i32> {
    let say = |out: &mut dyn Write, s: String| {
        let _ = writeln!(out, "{s}");
    };
    match command {
        Command::Run {
            input,
            k,
            opts,
            out_dir,
            timing,
        } => {
            let config = opts.config(k)?;
            let all = ingest_csv(&input)?;
            let result = run_two_phase(&all, &config)?;
            write_outputs(&result, &config, &out_dir, timing)?;
            let m = &result.metrics;
            say(
                out,
                format!(
                    "K={} N_I={} N_II={} MSE_I={:.6} MSE_II={:.6} change={:.6} -> {}",
                    m.k,
                    m.n_phase1,
                    m.n_phase2,
                    m.mse_phase1,
                    m.mse_phase2,
                    m.pct_change,
                    out_dir.display()
                ),
            );
        }
        Command::Phase1 {
            input,
            k,
            opts,
            out_dir,
        } => {
            let config = opts.config(k)?;
            let all = ingest_csv(&input)?;
            let (run, _) = crate::pipeline::place_depots(&all, &config)?;
            ensure_dir(&out_dir)?;
            write_depots(&run.centroids, out_dir.join("depots.csv"))?;
            write_assignment(
                &all,
                &run.plan,
                &run.centroids,
                config.cost_exponent,
                out_dir.join("assignment.csv"),
            )?;
            write_plot(&all, &run.plan, out_dir.join("plot.csv"))?;
            say(
                out,
                format!(
                    "K={k} N={} objective={:.6} MSE={:.6} iterations={}",
                    all.len(),
                    run.objective(),
                    mse(&run.plan, &all, &run.centroids)?,
                    run.iterations
                ),
            );
        }
        Command::Phase2 {
            input,
            depots,
            opts,
            out_dir,
        } => {
            let depot_set = read_depots(&depots)?;
            let config = opts.config(depot_set.k())?;
            let all = ingest_csv(&input)?;
            let (plan, objective) = assign_to_depots(&all, &depot_set, &config)?;
            ensure_dir(&out_dir)?;
            write_assignment(
                &all,
                &plan,
                &depot_set,
                config.cost_exponent,
                out_dir.join("assignment.csv"),
            )?;
            write_plot(&all, &plan, out_dir.join("plot.csv"))?;
            say(
                out,
                format!(
                    "K={} N={} objective={objective:.6} MSE={:.6}",
                    depot_set.k(),
                    all.len(),
                    mse(&plan, &all, &depot_set)?
                ),
            );
        }
        Command::Sweep {
            input,
            k,
            opts,
            out_dir,
        } => {
            let base = opts.config(k.0.first().copied().unwrap_or(1))?;
            let all = ingest_csv(&input)?;
            let rows = sweep_k(&all, &k.0, &base);
            ensure_dir(&out_dir)?;
            for row in &rows {
                if let Ok(result) = &row.outcome {
                    let cfg = RunConfig {
                        k: row.k,
                        ..base.clone()
                    };
                    write_outputs(result, &cfg, out_dir.join(format!("k{}", row.k)), false)?;
                }
            }
            let table = metrics_table_csv(&rows);
            let path = out_dir.join("metrics.csv");
            fs::write(&path, &table).map_err(|e| Error::Io { path, source: e })?;
            let _ = out.write_all(table.as_bytes());
            if rows.iter().any(|r| r.outcome.is_err()) {
                return Ok(EXIT_INFEASIBLE);
            }
        }
        Command::Synth {
            n,
            clusters,
            spread,
            seed,
            output,
        } => {
            let data = generate_synthetic(n, clusters, spread, seed)?;
            if let Some(parent) = output.parent().filter(|p| !p.as_os_str().is_empty()) {
                ensure_dir(parent)?;
            }
            write_waypoints(&data, &output)?;
            say(out, format!("wrote {n} waypoints to {}", output.display()));
        }
        Command::Verify {
            small,
            medium,
            seed,
        } => {
            let checks = cross_check(small, medium, seed, Default::default())?;
            let failed: Vec<_> = checks.iter().filter(|c| !c.passed(1e-9)).collect();
            for c in &failed {
                say(
                    out,
                    format!(
                        "MISMATCH {} N={} K={}: solver {:.9} vs oracle {:.9}",
                        c.oracle, c.n, c.k, c.solver, c.reference
                    ),
                );
            }
            say(
                out,
                format!(
                    "{} of {} oracle checks passed",
                    checks.len() - failed.len(),
                    checks.len()
                ),
            );
            if !failed.is_empty() {
                return Ok(EXIT_DATA);
            }
        }
    }
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k_lists() {
        assert_eq!(
            parse_k_list("3..10").unwrap().0,
            (3..=10).collect::<Vec<_>>()
        );
        assert_eq!(parse_k_list("3..=5").unwrap().0, vec![3, 4, 5]);
        assert_eq!(parse_k_list("2,7").unwrap().0, vec![2, 7]);
        assert_eq!(parse_k_list("4").unwrap().0, vec![4]);
        assert!(parse_k_list("5..3").is_err());
        assert!(parse_k_list("x").is_err());
        assert!(parse_k_list("0..2").is_err());
    }

    fn call(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let argv = std::iter::once("facility-planner").chain(args.iter().copied());
        let code = run_cli(argv, &mut out, &mut err);
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(call(&[]).0, EXIT_USAGE);
        assert_eq!(call(&["run", "--k", "3"]).0, EXIT_USAGE);
        assert_eq!(
            call(&[
                "run",
                "--input",
                "x.csv",
                "--k",
                "3",
                "--cost-exponent",
                "3"
            ])
            .0,
            EXIT_USAGE
        );
        assert_eq!(call(&["--help"]).0, EXIT_OK);
    }

    #[test]
    fn missing_input_is_data_error() {
        let (code, _, err) = call(&["run", "--input", "/nonexistent/pts.csv", "--k", "3"]);
        assert_eq!(code, EXIT_DATA);
        assert!(err.contains("/nonexistent/pts.csv"));
    }
}
