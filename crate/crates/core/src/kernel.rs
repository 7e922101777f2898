//! Green's functions, the channel coupling `A_{nn'}` and the right-hand side
//! of the coupled integral equations
//!
//! ```text
//! Phi_n(x) + sum_n' int_0^L G_n(x - x') A_{nn'}(x') Phi_n'(x') dx' = f_n(x)
//! f_n(x) = - int_0^L G_n(x - x') A_{n n0}(x') exp(i k0 x') dx'
//! ```

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::channels::{Channel, ChannelKind, ChannelTable, ProblemConfig};
use crate::error::{Error, Result};
use crate::nystrom::Discretization;

/// `sin(n pi x / L)`, exactly zero at `x = 0` and `x = L`.
pub fn box_sine(n: usize, x: f64, length: f64) -> f64 {
    // Phase in units of pi, reduced to [0, 2).
    let phase = (n as f64 * (x / length)).rem_euclid(2.0);
    if phase == 0.0 || phase == 1.0 {
        0.0
    } else {
        (PI * phase).sin()
    }
}

/// Outgoing (open) or decaying (closed) Green's function of
/// `-G'' + a_n G = delta(x)`.
pub fn greens(channel: &Channel, x: f64) -> Complex64 {
    let r = x.abs();
    match channel.kind {
        // -e^{ik|x|} / (2ik) = (i / 2k) e^{ik|x|}
        ChannelKind::Open { k } => Complex64::new(0.0, 0.5 / k) * Complex64::cis(k * r),
        ChannelKind::Closed { lambda } => Complex64::new((-lambda * r).exp() / (2.0 * lambda), 0.0),
    }
}

/// Immutable data shared by every kernel evaluation of one problem.
#[derive(Debug, Clone)]
pub struct KernelContext {
    config: ProblemConfig,
    table: ChannelTable,
    coupling_prefactor: f64,
}

impl KernelContext {
    pub fn new(config: ProblemConfig, table: ChannelTable) -> Self {
        let coupling_prefactor = 4.0 * config.mass1 * config.coupling
            / (config.hbar * config.hbar * config.box_length);
        Self {
            config,
            table,
            coupling_prefactor,
        }
    }

    pub fn config(&self) -> &ProblemConfig {
        &self.config
    }

    pub fn table(&self) -> &ChannelTable {
        &self.table
    }

    /// `4 m1 mu0 / (hbar^2 L)`.
    pub fn coupling_prefactor(&self) -> f64 {
        self.coupling_prefactor
    }

    pub fn truncation(&self) -> usize {
        self.table.truncation()
    }

    fn check_inside(&self, x: f64) -> Result<()> {
        if (0.0..=self.config.box_length).contains(&x) {
            Ok(())
        } else {
            Err(Error::Domain { x, domain: "[0, L]" })
        }
    }

    fn check_channel(&self, n: usize) -> Result<&Channel> {
        self.table.get(n).ok_or_else(|| {
            Error::InvalidConfig(format!(
                "channel {n} outside 1..={}",
                self.table.truncation()
            ))
        })
    }

    /// Incident plane wave `exp(i k0 x)`.
    pub fn incident_wave(&self, x: f64) -> Complex64 {
        Complex64::cis(self.config.k0 * x)
    }

    /// `A_{nn'}(x)` for `x` in `[0, L]`.
    pub fn interaction(&self, n: usize, nprime: usize, x: f64) -> Result<f64> {
        self.check_inside(x)?;
        let l = self.config.box_length;
        Ok(self.coupling_prefactor * (box_sine(n, x, l) * box_sine(nprime, x, l)))
    }

    /// `K^{ij}_{n1 n2} = G_{n1}(x_i - x_j) A_{n1 n2}(x_j)`.
    pub fn nystrom_kernel(&self, n1: usize, n2: usize, xi: f64, xj: f64) -> Result<Complex64> {
        self.check_inside(xi)?;
        let channel = self.check_channel(n1)?;
        Ok(greens(channel, xi - xj) * self.interaction(n1, n2, xj)?)
    }

    /// `f_n(x)` by the trapezoid rule of `quad`.
    pub fn rhs(&self, n: usize, x: f64, quad: &Discretization) -> Result<Complex64> {
        self.check_inside(x)?;
        let channel = self.check_channel(n)?;
        let n0 = self.config.n0;
        let mut acc = Complex64::new(0.0, 0.0);
        for (&xj, &wj) in quad.nodes().iter().zip(quad.weights()) {
            let a = self.interaction(n, n0, xj)?;
            if a != 0.0 {
                acc += greens(channel, x - xj) * (a * wj) * self.incident_wave(xj);
            }
        }
        Ok(-acc)
    }
}
