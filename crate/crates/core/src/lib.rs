//! Scattering of a free particle off a second particle confined to a box,
//! interacting through a contact potential.
//!
//! The two-particle problem is expanded in box eigenstates, which turns it
//! into a coupled system of Fredholm integral equations for the scattered
//! channel amplitudes. [`nystrom`] discretizes and solves that system,
//! [`observables`] turns the solution into outcome probabilities, and
//! [`sweep`] drives parameter sweeps and refinement studies.
//!
//! ```
//! use deltabox::{solve_point, SolverStrategy};
//!
//! let config = deltabox::ProblemConfig::dimensionless(1.0, 3.0, 1)?;
//! let report = solve_point(&config, 10, 20, SolverStrategy::Reduced)?;
//! assert_eq!(report.outcomes.len(), 1);
//! assert!(report.unitarity_defect < 1e-10);
//! # Ok::<(), deltabox::Error>(())
//! ```

pub mod channels;
pub mod cli;
mod error;
pub mod kernel;
pub mod nystrom;
pub mod observables;
pub mod oracle;
pub mod sweep;

pub use channels::{build_channels, ChannelTable, ProblemConfig};
pub use error::{Error, Result};
pub use kernel::KernelContext;
pub use nystrom::{Discretization, ScatteringSolution, SolverStrategy};
pub use observables::{probabilities, OutcomeReport};

/// Solves one configuration with `T` channels on `N` trapezoid nodes.
pub fn solve_config(
    config: &ProblemConfig,
    truncation: usize,
    nodes: usize,
    strategy: SolverStrategy,
) -> Result<ScatteringSolution> {
    let ctx = KernelContext::new(*config, build_channels(config, truncation)?);
    let disc = Discretization::trapezoid(config.box_length, nodes)?;
    nystrom::solve_with(&ctx, &disc, strategy)
}

/// [`solve_config`] followed by [`probabilities`].
pub fn solve_point(
    config: &ProblemConfig,
    truncation: usize,
    nodes: usize,
    strategy: SolverStrategy,
) -> Result<OutcomeReport> {
    solve_config(config, truncation, nodes, strategy).map(|sol| probabilities(&sol))
}
