//! Drivers behind the `deltabox` binary: `solve`, `sweep` and `converge`.
//!
//! Each command reads a [`RunConfig`], validates it completely before any
//! numerical work, writes its results into the output directory and returns a
//! process exit code: 0 on success, 1 for configuration (or output) problems,
//! 2 when the numerics fail.

mod config;
pub mod output;
pub mod svg;

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use log::info;
use serde::Serialize;

pub use config::RunConfig;

use crate::error::{Error, Result};
use crate::observables::OutcomeReport;
use crate::sweep::{run_convergence, run_sweep, ConvergenceStudy, SweepResult};
use output::OutcomeRow;
use svg::{Chart, Series};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_SOLVER: i32 = 2;

/// Sweeps with a smaller fraction of successful points exit with
/// [`EXIT_SOLVER`].
pub const SWEEP_SUCCESS_FRACTION: f64 = 0.99;

/// Command-line overrides applied on top of the config file.
#[derive(Debug, Clone, Default)]
pub struct Options {
    pub out: PathBuf,
    pub workers: Option<usize>,
    pub mem_budget_gib: Option<f64>,
    pub svg: Option<bool>,
}

impl Options {
    pub fn new(out: impl Into<PathBuf>) -> Self {
        Self {
            out: out.into(),
            ..Self::default()
        }
    }

    fn apply(&self, config: &RunConfig) -> RunConfig {
        let mut config = config.clone();
        if self.workers.is_some() {
            config.workers = self.workers;
        }
        if self.mem_budget_gib.is_some() {
            config.mem_budget_gib = self.mem_budget_gib;
        }
        if self.svg.is_some() {
            config.svg = self.svg;
        }
        config
    }
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::InvalidConfig(_)
        | Error::ThresholdChannel { .. }
        | Error::TruncationTooSmall { .. }
        | Error::Io(_) => EXIT_CONFIG,
        _ => EXIT_SOLVER,
    }
}

fn report_error(command: &str, err: &Error) -> i32 {
    let code = exit_code(err);
    let kind = if code == EXIT_CONFIG { "configuration error" } else { "solver error" };
    eprintln!("deltabox {command}: {kind}: {err}");
    code
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    std::fs::write(&path, contents)?;
    info!("wrote {}", path.display());
    Ok(path)
}

#[derive(Serialize)]
struct SolveBody<'a> {
    records: &'a [OutcomeRow],
    report: &'a OutcomeReport,
    diagnostics: &'a crate::nystrom::SolveDiagnostics,
}

/// Result of [`run_solve`].
#[derive(Debug, Clone)]
pub struct SolveOutput {
    pub report: OutcomeReport,
    pub rows: Vec<OutcomeRow>,
    pub csv: PathBuf,
    pub json: PathBuf,
}

pub fn run_solve(config: &RunConfig, opts: &Options) -> Result<SolveOutput> {
    let config = opts.apply(config);
    let problem = config.problem()?;
    let truncation = config.truncation();
    let nodes = config.nodes()?;
    let strategy = config.solver();
    let bytes = strategy.memory_bytes(nodes, truncation);
    let budget = config.memory_budget()?;
    if bytes > budget {
        return Err(Error::Resource {
            dimension: nodes * truncation,
            bytes,
        });
    }
    let sol = crate::solve_config(&problem, truncation, nodes, strategy)?;
    let report = crate::probabilities(&sol);
    let diagnostics = *sol.diagnostics();
    let lk0 = problem.to_dimensionless().lk0;
    let rows = output::report_rows(lk0, &report, diagnostics.condition_estimate, "ok");
    let csv = write_file(&opts.out, "solve.csv", &output::solve_csv(&rows))?;
    let body = SolveBody {
        records: &rows,
        report: &report,
        diagnostics: &diagnostics,
    };
    let json = write_file(&opts.out, "solve.json", &output::json_document("solve", &config, body))?;
    Ok(SolveOutput {
        report,
        rows,
        csv,
        json,
    })
}

pub fn cmd_solve(config: &RunConfig, opts: &Options) -> i32 {
    match run_solve(config, opts) {
        Ok(out) => {
            println!("open channels: {}", out.report.open_count());
            println!("unitarity defect: {:e}", out.report.unitarity_defect);
            println!("flux left/right: {:?} / {:?}", out.report.flux_left, out.report.flux_right);
            for o in &out.report.outcomes {
                println!(
                    "  n = {:>3}  k_n = {:<22}  p+ = {:<24}  p- = {:<24}",
                    o.n,
                    output::num(o.k),
                    output::num(o.p_plus),
                    output::num(o.p_minus)
                );
            }
            println!("wrote {} and {}", out.csv.display(), out.json.display());
            EXIT_OK
        }
        Err(e) => report_error("solve", &e),
    }
}

#[derive(Serialize)]
struct RecordsBody<'a, T: Serialize> {
    records: &'a [T],
}

/// Result of [`run_sweep_command`].
#[derive(Debug, Clone)]
pub struct SweepOutput {
    pub result: SweepResult,
    pub rows: Vec<OutcomeRow>,
    pub files: Vec<PathBuf>,
}

/// One chart per panel quantity, one series per outcome channel.
pub fn sweep_charts(rows: &[OutcomeRow], n0: usize, include_incident: bool, log_y: bool) -> Vec<(&'static str, Chart)> {
    let mut lk0s: Vec<f64> = rows.iter().map(|r| r.lk0).collect();
    lk0s.dedup();
    let mut channels: Vec<usize> = rows
        .iter()
        .filter_map(|r| r.n)
        .filter(|&n| include_incident || n != n0)
        .collect();
    channels.sort_unstable();
    channels.dedup();
    let by_point: HashMap<(u64, usize), &OutcomeRow> = rows
        .iter()
        .filter_map(|r| r.n.map(|n| ((r.lk0.to_bits(), n), r)))
        .collect();
    let panels: [(&'static str, &str, fn(&OutcomeRow) -> Option<f64>); 3] = [
        ("p_total", "total probability p_n", |r| r.p_total),
        ("p_minus", "reflection probability p_n^-", |r| r.p_minus),
        ("p_plus", "transmission probability p_n^+", |r| r.p_plus),
    ];
    panels
        .into_iter()
        .map(|(key, title, field)| {
            let series = channels
                .iter()
                .map(|&n| Series {
                    label: format!("n = {n}"),
                    points: lk0s
                        .iter()
                        .map(|&x| {
                            by_point
                                .get(&(x.to_bits(), n))
                                .and_then(|r| field(r).map(|y| (x, y)))
                        })
                        .collect(),
                })
                .collect();
            let chart = Chart {
                title: format!("{title}, n0 = {n0}"),
                x_label: "L k0".into(),
                y_label: key.into(),
                log_y,
                series,
            };
            (key, chart)
        })
        .collect()
}

pub fn run_sweep_command(config: &RunConfig, opts: &Options) -> Result<SweepOutput> {
    let config = opts.apply(config);
    let plan = config.sweep_plan()?;
    let start = Instant::now();
    let result = run_sweep(&plan)?;
    info!(
        "{} points on {} workers in {:.2?}",
        result.points.len(),
        result.workers,
        start.elapsed()
    );
    let rows = output::sweep_rows(&result);
    let mut files = vec![
        write_file(&opts.out, "sweep.csv", &output::sweep_csv(&rows))?,
        write_file(
            &opts.out,
            "sweep.json",
            &output::json_document("sweep", &config, RecordsBody { records: &rows }),
        )?,
    ];
    if config.svg.unwrap_or(true) {
        let charts = sweep_charts(
            &rows,
            plan.base.n0,
            config.svg_include_incident.unwrap_or(false),
            config.svg_log_scale.unwrap_or(false),
        );
        for (key, chart) in charts {
            files.push(write_file(&opts.out, &format!("sweep_{key}.svg"), &chart.render())?);
        }
    }
    Ok(SweepOutput { result, rows, files })
}

pub fn cmd_sweep(config: &RunConfig, opts: &Options) -> i32 {
    match run_sweep_command(config, opts) {
        Ok(out) => {
            let total = out.result.points.len();
            let ok = out.result.points.iter().filter(|p| p.status.is_success()).count();
            let nudged = out.result.points.iter().filter(|p| p.nudged).count();
            println!("grid points: {total}, solved: {ok}, nudged: {nudged}, workers: {}", out.result.workers);
            for f in &out.files {
                println!("wrote {}", f.display());
            }
            if out.result.success_fraction() >= SWEEP_SUCCESS_FRACTION {
                EXIT_OK
            } else {
                eprintln!("deltabox sweep: only {ok} of {total} points solved");
                EXIT_SOLVER
            }
        }
        Err(e) => report_error("sweep", &e),
    }
}

#[derive(Serialize)]
struct ConvergeRecord {
    #[serde(rename = "T")]
    t: usize,
    diff: f64,
}

#[derive(Serialize)]
struct ConvergeBody {
    records: Vec<ConvergeRecord>,
    slope: f64,
    intercept: f64,
    defects: Vec<(usize, f64)>,
}

#[derive(Debug, Clone)]
pub struct ConvergeOutput {
    pub study: ConvergenceStudy,
    pub csv: PathBuf,
    pub json: PathBuf,
}

pub fn run_converge_command(config: &RunConfig, opts: &Options) -> Result<ConvergeOutput> {
    let config = opts.apply(config);
    let plan = config.convergence_plan()?;
    let study = run_convergence(&plan)?;
    let csv = write_file(&opts.out, "converge.csv", &output::converge_csv(&study))?;
    let body = ConvergeBody {
        records: study.pairs.iter().map(|&(t, diff)| ConvergeRecord { t, diff }).collect(),
        slope: study.slope,
        intercept: study.intercept,
        defects: study
            .levels
            .iter()
            .map(|l| (l.truncation, l.report.unitarity_defect))
            .collect(),
    };
    let json = write_file(&opts.out, "converge.json", &output::json_document("converge", &config, body))?;
    Ok(ConvergeOutput { study, csv, json })
}

pub fn cmd_converge(config: &RunConfig, opts: &Options) -> i32 {
    match run_converge_command(config, opts) {
        Ok(out) => {
            for &(t, d) in &out.study.pairs {
                println!("T = {t:>4}  max |dp_n| = {}", output::num(d));
            }
            println!("slope: {}", output::num(out.study.slope));
            println!("wrote {} and {}", out.csv.display(), out.json.display());
            EXIT_OK
        }
        Err(e) => report_error("converge", &e),
    }
}

/// Loads the config file and runs `command`; unreadable or malformed files
/// exit with [`EXIT_CONFIG`].
pub fn run_command(command: &str, config_path: &Path, opts: &Options) -> i32 {
    let config = match RunConfig::from_path(config_path) {
        Ok(c) => c,
        Err(e) => return report_error(command, &e),
    };
    match command {
        "solve" => cmd_solve(&config, opts),
        "sweep" => cmd_sweep(&config, opts),
        "converge" => cmd_converge(&config, opts),
        other => report_error(other, &Error::InvalidConfig(format!("unknown command `{other}`"))),
    }
}
