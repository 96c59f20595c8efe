use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use mindisp::demos::{translation_witness_point, DEPIERRO_X0};
use mindisp::files::{estimate_json, write_residual_csv, write_text, write_tuple_csv};
use mindisp::report::{CheckRecord, ExperimentReport};
use mindisp::{emit_trace, parse_operator_file, run_demo, run_random_suite, RunOptions, SuiteConfig};
use mindisp_core::{estimate_displacement_observed, exact_displacement, EstimatorConfig, Vector64};
use serde_json::json;

const USAGE_ERROR: u8 = 3;

#[derive(Parser)]
#[command(name = "mindisp", version, about = "Minimal displacement vector experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Iteration budget for every estimator and orbit
    #[arg(long, global = true)]
    max_iter: Option<usize>,
    /// Stopping tolerance on the change of successive differences
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Write the JSON report here
    #[arg(long, global = true, value_name = "OUT")]
    json: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run a named demo: translations, convex-combo, depierro-cyclic, depierro-noncyclic, witness
    Demo {
        name: String,
        /// For `witness`: write the translation witness tuple as CSV
        #[arg(long, value_name = "PATH")]
        tuple_csv: Option<PathBuf>,
    },
    /// Randomized composition, convex-combination and rotation checks
    Suite {
        #[arg(long)]
        trials: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, value_delimiter = ',', default_value = "1,2,5")]
        dims: Vec<usize>,
        #[arg(long = "m", value_delimiter = ',', default_value = "2,3,4")]
        m_values: Vec<usize>,
    },
    /// Estimate the minimal displacement vector of an operator file
    Estimate {
        #[arg(long, value_name = "FILE")]
        op: PathBuf,
        /// Comma-separated starting point (default: origin)
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        x0: Option<Vec<f64>>,
        /// Residual history as CSV (n, residual, iterate coordinates)
        #[arg(long, value_name = "PATH")]
        csv: Option<PathBuf>,
    },
    /// Record every stage of a planar composition as CSV and SVG
    Trace {
        #[arg(long, value_name = "FILE")]
        op: PathBuf,
        #[arg(long)]
        steps: usize,
        #[arg(long, value_name = "PATH")]
        csv: PathBuf,
        #[arg(long, value_name = "PATH")]
        svg: Option<PathBuf>,
        /// Comma-separated starting point (default: -3,0.5)
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        x0: Option<Vec<f64>>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { USAGE_ERROR } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(USAGE_ERROR)
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    let options = RunOptions {
        max_iter: cli.common.max_iter,
        tol: cli.common.tol,
    };
    let json_out = cli.common.json.as_deref();
    match cli.command {
        Command::Demo { name, tuple_csv } => {
            let report = run_demo(&name, &options)?;
            if let Some(path) = tuple_csv {
                if name != "witness" {
                    bail!("--tuple-csv only applies to the witness demo");
                }
                write_tuple_csv(&path, &translation_witness_point(&options)?)?;
            }
            finish(&report, json_out)
        }
        Command::Suite {
            trials,
            seed,
            dims,
            m_values,
        } => {
            let config = SuiteConfig {
                trials,
                seed,
                dims,
                m_values,
                options,
            };
            finish(&run_random_suite(&config)?, json_out)
        }
        Command::Estimate { op, x0, csv } => estimate(&op, x0, csv.as_deref(), &options, json_out),
        Command::Trace {
            op,
            steps,
            csv,
            svg,
            x0,
        } => {
            let operator = parse_operator_file(&op).with_context(|| format!("parsing {}", op.display()))?;
            let x0 = Vector64::from_f64(&x0.unwrap_or(DEPIERRO_X0.to_vec())).context("invalid --x0")?;
            let records = emit_trace(&operator, &x0, steps, &csv, svg.as_deref())?;
            if let Some(last) = records.last() {
                println!(
                    "{} points, last {} = ({}, {})",
                    records.len(),
                    last.stage,
                    last.point[0],
                    last.point[1]
                );
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn estimate(
    path: &Path,
    x0: Option<Vec<f64>>,
    csv: Option<&Path>,
    options: &RunOptions,
    json_out: Option<&Path>,
) -> anyhow::Result<ExitCode> {
    let op = parse_operator_file(path).with_context(|| format!("parsing {}", path.display()))?;
    let mut cfg: EstimatorConfig<f64> = options.estimator(EstimatorConfig::<f64>::default().max_iter);
    if let Some(x0) = &x0 {
        cfg = cfg.with_x0(Vector64::from_f64(x0).context("invalid --x0")?);
    }
    let started = std::time::Instant::now();
    let mut rows = Vec::new();
    let est = estimate_displacement_observed(&op, &cfg, |n, residual, x| {
        if csv.is_some() {
            rows.push((n, residual, x.to_f64()));
        }
    })?;
    if let Some(csv) = csv {
        write_residual_csv(csv, &rows)?;
    }
    let exact = exact_displacement(&op);
    let record = CheckRecord::new("estimate", "estimator converged")
        .metric("v_hat", est.v_hat.coords())
        .metric("upper_bound", est.upper_bound)
        .metric("iterations", est.iterations)
        .metric("wrapped", est.wrapped)
        .metric("final_iterate", est.final_iterate.coords())
        .metric("exact", exact.as_ref().map(|v| v.to_f64()))
        .passed(est.converged)
        .converged(est.converged);
    let inputs = json!({
        "operator": mindisp_core::dsl::operator_to_json(&op),
        "x0": x0,
        "options": {"max_iter": cfg.max_iter, "tol": cfg.tol_residual_change},
    });
    let report = ExperimentReport::new("estimate", 0, inputs, vec![record], started.elapsed().as_secs_f64());
    if json_out.is_none() {
        println!(
            "{}",
            estimate_json(&mindisp_core::DisplacementEstimate {
                residual_history: Vec::new(),
                ..est
            })
        );
    }
    finish(&report, json_out)
}

fn finish(report: &ExperimentReport, json_out: Option<&Path>) -> anyhow::Result<ExitCode> {
    // large suites: summaries and anything that did not pass
    let terse = report.results.len() > 20;
    for r in report
        .results
        .iter()
        .filter(|r| !terse || r.name.starts_with("summary/") || !r.passed || !r.converged)
    {
        let status = match (r.passed, r.converged) {
            (_, false) => "UNCONVERGED",
            (true, true) => "PASS",
            (false, true) => "FAIL",
        };
        println!("{status:<11} {}", r.name);
    }
    println!("verdict: {}", report.verdict.as_str());
    if let Some(path) = json_out {
        write_text(path, &report.to_json())?;
    }
    Ok(report.verdict.exit_code())
}
