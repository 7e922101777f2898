//! Nyström discretization of the truncated coupled system and its solution.
//!
//! The unknowns `Phi_n(x_j)` are stored channel-major: all `N` nodes of
//! channel 1, then channel 2, and so on, so block `(n1, n2)` of the system
//! matrix occupies rows `(n1-1)N..n1 N` and columns `(n2-1)N..n2 N`.
//!
//! Two solution routes produce the same discrete solution:
//!
//! * [`assemble`] + [`solve`] form the dense `NT x NT` block matrix
//!   `B = I + K W` and factor it directly.
//! * [`solve_reduced`] uses the fact that the channel coupling is separable
//!   (see `operator.rs`) and factors an `N x N` matrix instead, then recovers
//!   every channel by back-substitution. Cost and memory no longer grow with
//!   `T^2`, which is what makes sweeps at `T = 50` and refinement studies up to
//!   `T = 100` practical.

mod condition;
mod dump;
mod grid;
mod lu;
mod operator;

use log::warn;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channels::{ChannelKind, ChannelTable, ProblemConfig};
use crate::error::{Error, Result};
use crate::kernel::KernelContext;

pub use dump::{read_dump, DumpedSystem, DUMP_MAGIC};
pub use grid::Discretization;

use condition::inverse_norm1_estimate;
use lu::DenseLu;
use operator::CoupledOperator;

/// Pivots smaller than this times `||B||_inf` flag a singular system.
pub const SINGULAR_PIVOT_RELATIVE: f64 = 1e-14;

/// Backward error every successful solve is expected to meet.
pub const BACKWARD_ERROR_TARGET: f64 = 1e-10;

/// Default cap on the dense block matrix, 8 GiB.
pub const DEFAULT_MEMORY_BUDGET: u128 = 8 << 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverStrategy {
    /// Dense `NT x NT` LU of the block matrix.
    Block,
    /// Exact `N x N` reduction followed by back-substitution.
    #[default]
    Reduced,
}

impl SolverStrategy {
    /// Bytes held by one solve of this kind, dominated by the factored matrix.
    pub fn memory_bytes(self, n_nodes: usize, truncation: usize) -> u128 {
        let nt = (n_nodes * truncation) as u128;
        let n = n_nodes as u128;
        let tables = 40 * nt;
        match self {
            Self::Block => 16 * nt * nt + tables,
            Self::Reduced => 16 * n * n + tables,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveDiagnostics {
    pub strategy: SolverStrategy,
    /// `NT`.
    pub dimension: usize,
    /// Size of the matrix that was actually factored.
    pub factored_dimension: usize,
    /// `||B Phi - f||_inf / (||B||_inf ||Phi||_inf + ||f||_inf)`.
    pub backward_error: f64,
    /// Estimate of the 1-norm condition number of `B`.
    pub condition_estimate: f64,
    pub min_pivot: f64,
    pub norm_inf: f64,
}

/// Discrete solution `Phi_n(x_j)`, `n = 1..=T`, `j = 1..=N`.
#[derive(Debug, Clone)]
pub struct ScatteringSolution {
    config: ProblemConfig,
    table: ChannelTable,
    disc: Discretization,
    amplitudes: Vec<Complex64>,
    diagnostics: SolveDiagnostics,
}

impl ScatteringSolution {
    pub fn config(&self) -> &ProblemConfig {
        &self.config
    }

    pub fn table(&self) -> &ChannelTable {
        &self.table
    }

    pub fn discretization(&self) -> &Discretization {
        &self.disc
    }

    pub fn diagnostics(&self) -> &SolveDiagnostics {
        &self.diagnostics
    }

    /// All amplitudes, channel-major.
    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// Grid values of channel `n` (1-based).
    pub fn channel(&self, n: usize) -> &[Complex64] {
        let len = self.disc.len();
        &self.amplitudes[(n - 1) * len..n * len]
    }

    /// `Phi_n(0)`.
    pub fn left(&self, n: usize) -> Complex64 {
        self.channel(n)[0]
    }

    /// `Phi_n(L)`.
    pub fn right(&self, n: usize) -> Complex64 {
        self.channel(n)[self.disc.len() - 1]
    }
}

/// Dense block system `B Phi = f`.
#[derive(Debug, Clone)]
pub struct BlockSystem {
    ctx: KernelContext,
    disc: Discretization,
    operator: CoupledOperator,
    /// Column-major `NT x NT`.
    matrix: Vec<Complex64>,
}

impl BlockSystem {
    /// `NT`.
    pub fn dimension(&self) -> usize {
        self.operator.dim()
    }

    pub fn n_nodes(&self) -> usize {
        self.operator.n_nodes()
    }

    pub fn truncation(&self) -> usize {
        self.operator.truncation()
    }

    /// Flat 0-based index of channel `n` (1-based) at node `j` (0-based).
    pub fn index(&self, n: usize, j: usize) -> usize {
        (n - 1) * self.n_nodes() + j
    }

    /// `B[row, col]`, 0-based.
    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.matrix[col * self.dimension() + row]
    }

    /// Stacked `f_n(x_i)`.
    pub fn rhs(&self) -> &[Complex64] {
        self.operator.rhs()
    }

    pub fn context(&self) -> &KernelContext {
        &self.ctx
    }

    pub fn discretization(&self) -> &Discretization {
        &self.disc
    }

    /// Writes the `DBOX` debug dump (see [`read_dump`]).
    pub fn write_dump(&self, out: impl std::io::Write) -> Result<()> {
        dump::write_dump(self, out)
    }

    /// Matrix-free `B v` from the kernel tables.
    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        self.operator.apply(v)
    }
}

/// Assembles `B` and `f`, refusing matrices above [`DEFAULT_MEMORY_BUDGET`].
pub fn assemble(ctx: &KernelContext, disc: &Discretization) -> Result<BlockSystem> {
    assemble_within(ctx, disc, DEFAULT_MEMORY_BUDGET)
}

/// Assembles `B` and `f` if the dense matrix fits in `budget_bytes`.
pub fn assemble_within(
    ctx: &KernelContext,
    disc: &Discretization,
    budget_bytes: u128,
) -> Result<BlockSystem> {
    let dimension = disc.len() * ctx.truncation();
    let bytes = 16 * (dimension as u128) * (dimension as u128);
    let resource = || Error::Resource { dimension, bytes };
    if bytes > budget_bytes {
        return Err(resource());
    }
    let mut matrix = Vec::new();
    matrix
        .try_reserve_exact(dimension * dimension)
        .map_err(|_| resource())?;
    let operator = CoupledOperator::new(ctx, disc);
    operator.fill_dense(&mut matrix);
    Ok(BlockSystem {
        ctx: ctx.clone(),
        disc: disc.clone(),
        operator,
        matrix,
    })
}

fn dense_norms(matrix: &[Complex64], dim: usize) -> (f64, f64) {
    let mut rows = vec![0.0; dim];
    let mut norm_one = 0.0f64;
    for col in matrix.chunks_exact(dim) {
        let mut sum = 0.0;
        for (r, v) in rows.iter_mut().zip(col) {
            let a = v.norm();
            *r += a;
            sum += a;
        }
        norm_one = norm_one.max(sum);
    }
    (rows.into_iter().fold(0.0, f64::max), norm_one)
}

fn max_abs(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn backward_error(op: &CoupledOperator, phi: &[Complex64], norm_inf: f64) -> f64 {
    let f = op.rhs();
    let residual: f64 = op
        .apply(phi)
        .iter()
        .zip(f)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    let scale = norm_inf * max_abs(phi) + max_abs(f);
    if scale == 0.0 {
        residual
    } else {
        residual / scale
    }
}

fn check_pivot(lu: &DenseLu, norm_inf: f64) -> Result<f64> {
    let pivot = lu.min_pivot();
    let threshold = SINGULAR_PIVOT_RELATIVE * norm_inf;
    if !(pivot >= threshold) {
        return Err(Error::SingularSystem { pivot, threshold });
    }
    Ok(pivot)
}

fn finish(
    ctx: &KernelContext,
    disc: &Discretization,
    op: &CoupledOperator,
    amplitudes: Vec<Complex64>,
    mut diagnostics: SolveDiagnostics,
) -> ScatteringSolution {
    diagnostics.backward_error = backward_error(op, &amplitudes, diagnostics.norm_inf);
    if !(diagnostics.backward_error <= BACKWARD_ERROR_TARGET) {
        warn!(
            "backward error {:.3e} above target {:.1e} (condition estimate {:.3e})",
            diagnostics.backward_error, BACKWARD_ERROR_TARGET, diagnostics.condition_estimate
        );
    }
    ScatteringSolution {
        config: *ctx.config(),
        table: ctx.table().clone(),
        disc: disc.clone(),
        amplitudes,
        diagnostics,
    }
}

/// Solves the dense block system by partial-pivoting LU.
pub fn solve(system: BlockSystem) -> Result<ScatteringSolution> {
    let BlockSystem {
        ctx,
        disc,
        operator,
        matrix,
    } = system;
    let dim = operator.dim();
    let (norm_inf, norm_one) = dense_norms(&matrix, dim);
    let lu = DenseLu::factor(matrix, dim);
    let min_pivot = check_pivot(&lu, norm_inf)?;

    let mut phi = operator.rhs().to_vec();
    lu.solve_in_place(&mut phi);
    let inverse_norm = inverse_norm1_estimate(
        dim,
        |v| lu.solve_in_place(v),
        |v| lu.solve_adjoint_in_place(v),
    );
    let diagnostics = SolveDiagnostics {
        strategy: SolverStrategy::Block,
        dimension: dim,
        factored_dimension: lu.dim(),
        backward_error: f64::NAN,
        condition_estimate: norm_one * inverse_norm,
        min_pivot,
        norm_inf,
    };
    Ok(finish(&ctx, &disc, &operator, phi, diagnostics))
}

/// Solves the same discrete system through the `N x N` reduction.
///
/// With `psi_j = sum_n s_n(x_j) Phi_n(x_j)` the block system becomes
/// `(I + V U) psi = V f`, after which `Phi = f - U psi`. The singularity test
/// applies to the pivots of the reduced matrix relative to its own norm;
/// `det B = det(I + V U)`, so both matrices are singular together.
pub fn solve_reduced(ctx: &KernelContext, disc: &Discretization) -> Result<ScatteringSolution> {
    let op = CoupledOperator::new(ctx, disc);
    let n = op.n_nodes();
    let reduced = op.reduced_matrix();
    let (reduced_norm, _) = dense_norms(&reduced, n);
    let lu = DenseLu::factor(reduced, n);
    let min_pivot = check_pivot(&lu, reduced_norm)?;

    let mut psi = op.contract(op.rhs());
    lu.solve_in_place(&mut psi);
    let mut phi = op.spread(&psi);
    for (p, f) in phi.iter_mut().zip(op.rhs()) {
        *p = f - *p;
    }

    // Woodbury: B^{-1} = I - U R^{-1} V and B^{-H} = I - V^H R^{-H} U^H.
    let inverse_norm = inverse_norm1_estimate(
        op.dim(),
        |y| {
            let mut t = op.contract(y);
            lu.solve_in_place(&mut t);
            for (a, b) in y.iter_mut().zip(op.spread(&t)) {
                *a -= b;
            }
        },
        |y| {
            let mut t = op.spread_adjoint(y);
            lu.solve_adjoint_in_place(&mut t);
            for (a, b) in y.iter_mut().zip(op.contract_adjoint(&t)) {
                *a -= b;
            }
        },
    );
    let diagnostics = SolveDiagnostics {
        strategy: SolverStrategy::Reduced,
        dimension: op.dim(),
        factored_dimension: n,
        backward_error: f64::NAN,
        condition_estimate: op.norm_one() * inverse_norm,
        min_pivot,
        norm_inf: op.norm_inf(),
    };
    Ok(finish(ctx, disc, &op, phi, diagnostics))
}

/// Solves with the chosen strategy.
pub fn solve_with(
    ctx: &KernelContext,
    disc: &Discretization,
    strategy: SolverStrategy,
) -> Result<ScatteringSolution> {
    match strategy {
        SolverStrategy::Block => solve(assemble(ctx, disc)?),
        SolverStrategy::Reduced => solve_reduced(ctx, disc),
    }
}

/// Scattered amplitudes `Phi_n(x)` outside the box, one per channel.
///
/// Open channels continue as outgoing waves, closed ones decay:
/// `Phi_n(L) e^{i k_n (x-L)}` / `Phi_n(L) e^{-lambda_n (x-L)}` for `x >= L`
/// and `Phi_n(0) e^{-i k_n x}` / `Phi_n(0) e^{lambda_n x}` for `x <= 0`.
pub fn extend_solution(sol: &ScatteringSolution, x: f64) -> Result<Vec<Complex64>> {
    let length = sol.config.box_length;
    let (offset, right) = if x >= length {
        (x - length, true)
    } else if x <= 0.0 {
        (-x, false)
    } else {
        return Err(Error::Domain {
            x,
            domain: "x <= 0 or x >= L",
        });
    };
    Ok(sol
        .table
        .channels()
        .iter()
        .map(|c| {
            let boundary = if right { sol.right(c.index) } else { sol.left(c.index) };
            let factor = match c.kind {
                ChannelKind::Open { k } => Complex64::cis(k * offset),
                ChannelKind::Closed { lambda } => Complex64::new((-lambda * offset).exp(), 0.0),
            };
            boundary * factor
        })
        .collect())
}

/// Full channel functions `phi_n(x) = delta_{n n0} e^{i k0 x} + Phi_n(x)`
/// outside the box.
pub fn extend_total(sol: &ScatteringSolution, x: f64) -> Result<Vec<Complex64>> {
    let mut values = extend_solution(sol, x)?;
    values[sol.config.n0 - 1] += Complex64::cis(sol.config.k0 * x);
    Ok(values)
}
