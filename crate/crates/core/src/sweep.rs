//! Wavenumber sweeps and truncation refinement studies.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use log::{info, warn};
use serde::Serialize;

use crate::channels::{build_channels, ProblemConfig};
use crate::error::{Error, Result};
use crate::kernel::KernelContext;
use crate::nystrom::{self, Discretization, SolveDiagnostics, SolverStrategy, DEFAULT_MEMORY_BUDGET};
use crate::observables::{probabilities, OutcomeReport};

pub const DEFAULT_TRUNCATION: usize = 50;
pub const DEFAULT_GRID_POINTS: usize = 500;
pub const DEFAULT_GRID_MAX: f64 = 30.0;
/// Differences below this mean the refinement has saturated.
pub const DEGENERATE_DIFFERENCE: f64 = 1e-14;

/// `count` evenly spaced interior points of the open interval `(lo, hi)`:
/// `lo + (hi - lo) i / (count + 1)`, `i = 1..=count`.
pub fn open_interval_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    (1..=count)
        .map(|i| lo + (hi - lo) * i as f64 / (count + 1) as f64)
        .collect()
}

/// `30 i / 501`, `i = 1..=500`.
pub fn default_lk0_grid() -> Vec<f64> {
    open_interval_grid(0.0, DEFAULT_GRID_MAX, DEFAULT_GRID_POINTS)
}

fn hardware_threads() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPlan {
    /// Masses, box, coupling and `n0`. `k0` is replaced at every grid point.
    pub base: ProblemConfig,
    /// Values of `L k0`, strictly increasing.
    pub lk0_grid: Vec<f64>,
    pub truncation: usize,
    pub nodes: usize,
    pub strategy: SolverStrategy,
    pub workers: usize,
    pub memory_budget: u128,
}

impl SweepPlan {
    pub fn new(base: ProblemConfig) -> Self {
        Self {
            base,
            lk0_grid: default_lk0_grid(),
            truncation: DEFAULT_TRUNCATION,
            nodes: 2 * DEFAULT_TRUNCATION,
            strategy: SolverStrategy::default(),
            workers: hardware_threads(),
            memory_budget: DEFAULT_MEMORY_BUDGET,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        if self.lk0_grid.is_empty() {
            return Err(Error::InvalidConfig("sweep grid is empty".into()));
        }
        if let Some(bad) = self.lk0_grid.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::InvalidConfig(format!("grid value {bad} is not a positive number")));
        }
        if self.lk0_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidConfig("sweep grid must be strictly increasing".into()));
        }
        if self.truncation < self.base.n0 {
            return Err(Error::InvalidConfig(format!(
                "truncation {} is below n0 = {}",
                self.truncation, self.base.n0
            )));
        }
        if self.nodes < 2 {
            return Err(Error::InvalidConfig("need at least 2 quadrature nodes".into()));
        }
        Ok(())
    }

    fn config_at(&self, lk0: f64) -> ProblemConfig {
        self.base.with_k0(lk0 / self.base.box_length)
    }

    /// Workers actually used: the request, capped so that the resident
    /// systems fit in the memory budget, and never below one.
    pub fn effective_workers(&self) -> usize {
        let per_solve = self.strategy.memory_bytes(self.nodes, self.truncation).max(1);
        let fit = (self.memory_budget / per_solve).min(usize::MAX as u128) as usize;
        self.workers.max(1).min(fit.max(1)).min(self.lk0_grid.len().max(1))
    }
}

fn at_threshold(config: &ProblemConfig, truncation: usize) -> bool {
    let tolerance = config.threshold_tolerance();
    (1..=truncation).any(|n| config.channel_a(n).abs() <= tolerance)
}

/// Moves a grid point off a channel threshold.
///
/// The offset starts at `1e-9` of the local grid spacing and doubles until no
/// channel is within the threshold band; it never exceeds half a spacing.
fn nudge(plan: &SweepPlan, index: usize) -> (f64, bool) {
    let grid = &plan.lk0_grid;
    let lk0 = grid[index];
    if !at_threshold(&plan.config_at(lk0), plan.truncation) {
        return (lk0, false);
    }
    let spacing = match (index.checked_sub(1).map(|i| grid[i]), grid.get(index + 1)) {
        (_, Some(next)) => next - lk0,
        (Some(prev), None) => lk0 - prev,
        (None, None) => lk0,
    };
    let mut offset = 1e-9 * spacing;
    while offset <= 0.5 * spacing {
        let moved = lk0 + offset;
        if !at_threshold(&plan.config_at(moved), plan.truncation) {
            warn!("Lk0 = {lk0:?} sits on a channel threshold, nudged to {moved:?}");
            return (moved, true);
        }
        offset *= 2.0;
    }
    (lk0, false)
}

#[derive(Debug, Clone, Serialize)]
pub struct PointSolution {
    pub report: OutcomeReport,
    pub diagnostics: SolveDiagnostics,
}

#[derive(Debug, Clone)]
pub struct SweepPoint {
    /// Grid value requested by the plan.
    pub requested: f64,
    /// Value actually solved, differs from `requested` only after a nudge.
    pub lk0: f64,
    pub nudged: bool,
    pub outcome: std::result::Result<PointSolution, String>,
    pub status: PointStatus,
    pub wall_time: Duration,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PointStatus {
    Ok,
    /// Solved after being moved off a threshold.
    Nudged,
    Threshold,
    Singular,
    Resource,
    Failed,
}

impl PointStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Ok => "ok",
            Self::Nudged => "nudged",
            Self::Threshold => "threshold",
            Self::Singular => "singular",
            Self::Resource => "resource",
            Self::Failed => "failed",
        }
    }

    pub fn is_success(self) -> bool {
        matches!(self, Self::Ok | Self::Nudged)
    }

    fn of_error(err: &Error) -> Self {
        match err {
            Error::ThresholdChannel { .. } => Self::Threshold,
            Error::SingularSystem { .. } => Self::Singular,
            Error::Resource { .. } => Self::Resource,
            _ => Self::Failed,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub plan: SweepPlan,
    /// One entry per grid point, in grid order.
    pub points: Vec<SweepPoint>,
    pub workers: usize,
}

impl SweepResult {
    pub fn success_fraction(&self) -> f64 {
        let ok = self.points.iter().filter(|p| p.status.is_success()).count();
        ok as f64 / self.points.len().max(1) as f64
    }
}

fn solve_one(plan: &SweepPlan, lk0: f64) -> Result<PointSolution> {
    let bytes = plan.strategy.memory_bytes(plan.nodes, plan.truncation);
    if bytes > plan.memory_budget {
        return Err(Error::Resource {
            dimension: plan.nodes * plan.truncation,
            bytes,
        });
    }
    let config = plan.config_at(lk0);
    let ctx = KernelContext::new(config, build_channels(&config, plan.truncation)?);
    let disc = Discretization::trapezoid(config.box_length, plan.nodes)?;
    let sol = match plan.strategy {
        SolverStrategy::Block => nystrom::solve(nystrom::assemble_within(&ctx, &disc, plan.memory_budget)?)?,
        SolverStrategy::Reduced => nystrom::solve_reduced(&ctx, &disc)?,
    };
    Ok(PointSolution {
        report: probabilities(&sol),
        diagnostics: *sol.diagnostics(),
    })
}

fn run_point(plan: &SweepPlan, index: usize) -> SweepPoint {
    let start = Instant::now();
    let requested = plan.lk0_grid[index];
    let (lk0, nudged) = nudge(plan, index);
    let outcome = solve_one(plan, lk0);
    let status = match &outcome {
        Ok(_) if nudged => PointStatus::Nudged,
        Ok(_) => PointStatus::Ok,
        Err(e) => {
            warn!("Lk0 = {lk0:?}: {e}");
            PointStatus::of_error(e)
        }
    };
    SweepPoint {
        requested,
        lk0,
        nudged,
        outcome: outcome.map_err(|e| e.to_string()),
        status,
        wall_time: start.elapsed(),
    }
}

/// Solves every grid point. Points are independent; their results and order
/// do not depend on the number of workers.
pub fn run_sweep(plan: &SweepPlan) -> Result<SweepResult> {
    plan.validate()?;
    let workers = plan.effective_workers();
    if workers < plan.workers {
        info!("using {workers} of {} requested workers", plan.workers);
    }
    let count = plan.lk0_grid.len();
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<SweepPoint>>> = Mutex::new(vec![None; count]);
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let index = next.fetch_add(1, Ordering::Relaxed);
                if index >= count {
                    break;
                }
                let point = run_point(plan, index);
                slots.lock().unwrap()[index] = Some(point);
            });
        }
    });
    let points = slots
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|p| p.expect("every grid point is visited"))
        .collect();
    Ok(SweepResult {
        plan: plan.clone(),
        points,
        workers,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergencePlan {
    pub config: ProblemConfig,
    /// Strictly increasing truncation orders.
    pub t_list: Vec<usize>,
    /// `N = nodes_per_truncation * T`.
    pub nodes_per_truncation: usize,
    pub strategy: SolverStrategy,
}

impl ConvergencePlan {
    /// `T = 10, 20, ..., 100` with `N = 2T`.
    pub fn new(config: ProblemConfig) -> Self {
        Self {
            config,
            t_list: (1..=10).map(|i| 10 * i).collect(),
            nodes_per_truncation: 2,
            strategy: SolverStrategy::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.config.validate()?;
        if self.t_list.len() < 4 {
            return Err(Error::InvalidConfig(format!(
                "convergence study needs at least 4 truncations, got {}",
                self.t_list.len()
            )));
        }
        if self.t_list.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidConfig("T list must be strictly increasing".into()));
        }
        if self.nodes_per_truncation == 0 {
            return Err(Error::InvalidConfig("nodes_per_truncation must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceLevel {
    pub truncation: usize,
    pub nodes: usize,
    pub report: OutcomeReport,
    pub diagnostics: SolveDiagnostics,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceStudy {
    pub levels: Vec<ConvergenceLevel>,
    /// `(T_{i+1}, max_n |p_n^{i+1} - p_n^i|)`.
    pub pairs: Vec<(usize, f64)>,
    /// Least-squares slope of `log diff` against `log T`.
    pub slope: f64,
    pub intercept: f64,
}

/// Least-squares line through `(ln x, ln y)`, returns `(slope, intercept)`.
pub fn fit_loglog(points: &[(f64, f64)]) -> Result<(f64, f64)> {
    if points.len() < 2 {
        return Err(Error::DegenerateFit("need at least two points".into()));
    }
    if let Some(p) = points.iter().find(|(x, y)| !(*x > 0.0 && *y > 0.0)) {
        return Err(Error::DegenerateFit(format!("non-positive point {p:?}")));
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|(x, y)| (x.ln(), y.ln())).collect();
    let m = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / m;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(Error::DegenerateFit("all abscissae are equal".into()));
    }
    let slope = sxy / sxx;
    Ok((slope, my - slope * mx))
}

/// Max over channels open in both reports of `|p_n(b) - p_n(a)|`.
pub fn max_probability_change(a: &OutcomeReport, b: &OutcomeReport) -> f64 {
    a.outcomes
        .iter()
        .filter_map(|x| b.outcome(x.n).map(|y| (y.p_total - x.p_total).abs()))
        .fold(0.0, f64::max)
}

/// Solves at every `T` in the plan and fits the decay of successive
/// probability changes. Each change is attributed to the finer level.
pub fn run_convergence(plan: &ConvergencePlan) -> Result<ConvergenceStudy> {
    plan.validate()?;
    let config = plan.config;
    let disc_for = |t: usize| Discretization::trapezoid(config.box_length, plan.nodes_per_truncation * t);
    let levels = plan
        .t_list
        .iter()
        .map(|&t| {
            let ctx = KernelContext::new(config, build_channels(&config, t)?);
            let disc = disc_for(t)?;
            let sol = nystrom::solve_with(&ctx, &disc, plan.strategy)?;
            info!("T = {t}: defect {:.3e}", probabilities(&sol).unitarity_defect);
            Ok(ConvergenceLevel {
                truncation: t,
                nodes: disc.len(),
                report: probabilities(&sol),
                diagnostics: *sol.diagnostics(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let pairs: Vec<(usize, f64)> = levels
        .windows(2)
        .map(|w| (w[1].truncation, max_probability_change(&w[0].report, &w[1].report)))
        .collect();
    if let Some((t, d)) = pairs.iter().find(|(_, d)| !(*d >= DEGENERATE_DIFFERENCE)) {
        return Err(Error::DegenerateFit(format!(
            "probability change {d:.3e} at T = {t} is below {DEGENERATE_DIFFERENCE:e}; refinement saturated"
        )));
    }
    let points: Vec<(f64, f64)> = pairs.iter().map(|&(t, d)| (t as f64, d)).collect();
    let (slope, intercept) = fit_loglog(&points)?;
    Ok(ConvergenceStudy {
        levels,
        pairs,
        slope,
        intercept,
    })
}
