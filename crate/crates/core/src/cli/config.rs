use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::channels::ProblemConfig;
use crate::error::{Error, Result};
use crate::nystrom::{SolverStrategy, DEFAULT_MEMORY_BUDGET};
use crate::sweep::{open_interval_grid, ConvergencePlan, SweepPlan, DEFAULT_GRID_MAX, DEFAULT_GRID_POINTS, DEFAULT_TRUNCATION};

/// Flat run configuration, read from TOML. Unknown keys are rejected.
///
/// The interaction is given either as the dimensionless `g = m1 L mu0 / hbar^2`
/// or as the raw `coupling = mu0`; the incident wavenumber as `lk0 = L k0` or
/// as `k0`. Masses, `box_length` and `hbar` default to one.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub g: Option<f64>,
    pub coupling: Option<f64>,
    pub lk0: Option<f64>,
    pub k0: Option<f64>,
    pub n0: Option<usize>,
    pub mass1: Option<f64>,
    pub mass2: Option<f64>,
    pub box_length: Option<f64>,
    pub hbar: Option<f64>,

    pub truncation: Option<usize>,
    pub nodes: Option<usize>,
    pub nodes_per_truncation: Option<usize>,
    pub solver: Option<SolverStrategy>,

    /// Explicit sweep grid of `L k0` values.
    pub lk0_grid: Option<Vec<f64>>,
    /// Otherwise `lk0_points` evenly spaced values inside `(lk0_min, lk0_max)`.
    pub lk0_min: Option<f64>,
    pub lk0_max: Option<f64>,
    pub lk0_points: Option<usize>,

    pub t_list: Option<Vec<usize>>,

    pub svg: Option<bool>,
    pub svg_log_scale: Option<bool>,
    /// Also plot the incident channel `n0`.
    pub svg_include_incident: Option<bool>,

    pub workers: Option<usize>,
    pub mem_budget_gib: Option<f64>,
}

fn either(a: Option<f64>, b: Option<f64>, names: (&str, &str)) -> Result<Option<(f64, bool)>> {
    match (a, b) {
        (Some(_), Some(_)) => Err(Error::InvalidConfig(format!(
            "give either `{}` or `{}`, not both",
            names.0, names.1
        ))),
        (Some(v), None) => Ok(Some((v, true))),
        (None, Some(v)) => Ok(Some((v, false))),
        (None, None) => Ok(None),
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string().trim().to_string()))
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidConfig(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    fn base_physics(&self) -> ProblemConfig {
        ProblemConfig {
            mass1: self.mass1.unwrap_or(1.0),
            mass2: self.mass2.unwrap_or(1.0),
            box_length: self.box_length.unwrap_or(1.0),
            coupling: 0.0,
            hbar: self.hbar.unwrap_or(1.0),
            k0: 1.0,
            n0: self.n0.unwrap_or(1),
        }
    }

    /// `mu0` from `g` or `coupling`.
    fn resolved_coupling(&self, base: &ProblemConfig) -> Result<f64> {
        match either(self.g, self.coupling, ("g", "coupling"))? {
            Some((g, true)) => Ok(g * base.hbar * base.hbar / (base.mass1 * base.box_length)),
            Some((mu0, false)) => Ok(mu0),
            None => Err(Error::InvalidConfig("missing key `g` (or `coupling`)".into())),
        }
    }

    /// Physics of a single point; needs the interaction and the wavenumber.
    pub fn problem(&self) -> Result<ProblemConfig> {
        let mut config = self.base_physics();
        config.coupling = self.resolved_coupling(&config)?;
        config.k0 = match either(self.lk0, self.k0, ("lk0", "k0"))? {
            Some((lk0, true)) => lk0 / config.box_length,
            Some((k0, false)) => k0,
            None => return Err(Error::InvalidConfig("missing key `lk0` (or `k0`)".into())),
        };
        config.validate()?;
        Ok(config)
    }

    pub fn truncation(&self) -> usize {
        self.truncation.unwrap_or(DEFAULT_TRUNCATION)
    }

    pub fn nodes_per_truncation(&self) -> usize {
        self.nodes_per_truncation.unwrap_or(2)
    }

    /// `nodes`, or `nodes_per_truncation * T`.
    pub fn nodes(&self) -> Result<usize> {
        if self.nodes.is_some() && self.nodes_per_truncation.is_some() {
            return Err(Error::InvalidConfig(
                "give either `nodes` or `nodes_per_truncation`, not both".into(),
            ));
        }
        Ok(self
            .nodes
            .unwrap_or(self.nodes_per_truncation() * self.truncation()))
    }

    pub fn solver(&self) -> SolverStrategy {
        self.solver.unwrap_or_default()
    }

    pub fn memory_budget(&self) -> Result<u128> {
        match self.mem_budget_gib {
            None => Ok(DEFAULT_MEMORY_BUDGET),
            Some(gib) if gib.is_finite() && gib > 0.0 => Ok((gib * (1u64 << 30) as f64) as u128),
            Some(gib) => Err(Error::InvalidConfig(format!("mem_budget_gib must be positive, got {gib}"))),
        }
    }

    pub fn lk0_grid(&self) -> Result<Vec<f64>> {
        let ranged = self.lk0_min.is_some() || self.lk0_max.is_some() || self.lk0_points.is_some();
        match &self.lk0_grid {
            Some(_) if ranged => Err(Error::InvalidConfig(
                "`lk0_grid` cannot be combined with `lk0_min`/`lk0_max`/`lk0_points`".into(),
            )),
            Some(grid) => Ok(grid.clone()),
            None => {
                let lo = self.lk0_min.unwrap_or(0.0);
                let hi = self.lk0_max.unwrap_or(DEFAULT_GRID_MAX);
                if !(hi > lo) {
                    return Err(Error::InvalidConfig(format!("lk0_max {hi} must exceed lk0_min {lo}")));
                }
                Ok(open_interval_grid(lo, hi, self.lk0_points.unwrap_or(DEFAULT_GRID_POINTS)))
            }
        }
    }

    pub fn sweep_plan(&self) -> Result<SweepPlan> {
        if self.lk0.is_some() || self.k0.is_some() {
            return Err(Error::InvalidConfig(
                "`lk0`/`k0` fix a single point; a sweep takes `lk0_grid` or `lk0_min`/`lk0_max`/`lk0_points`".into(),
            ));
        }
        let mut base = self.base_physics();
        base.coupling = self.resolved_coupling(&base)?;
        base.validate()?;
        let mut plan = SweepPlan::new(base);
        plan.lk0_grid = self.lk0_grid()?;
        plan.truncation = self.truncation();
        plan.nodes = self.nodes()?;
        plan.strategy = self.solver();
        plan.memory_budget = self.memory_budget()?;
        if let Some(w) = self.workers {
            plan.workers = w;
        }
        plan.validate()?;
        Ok(plan)
    }

    pub fn convergence_plan(&self) -> Result<ConvergencePlan> {
        if self.nodes.is_some() || self.truncation.is_some() {
            return Err(Error::InvalidConfig(
                "a convergence study takes `t_list` and `nodes_per_truncation`, not `truncation`/`nodes`".into(),
            ));
        }
        let mut plan = ConvergencePlan::new(self.problem()?);
        if let Some(list) = &self.t_list {
            plan.t_list = list.clone();
        }
        plan.nodes_per_truncation = self.nodes_per_truncation();
        plan.strategy = self.solver();
        plan.validate()?;
        Ok(plan)
    }
}
