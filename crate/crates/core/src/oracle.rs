//! Independent reference computations for tests.
//!
//! Nothing here goes through [`crate::kernel`] or [`crate::nystrom`]: the
//! transfer-matrix solver integrates the single-channel Schrödinger equation
//! directly, and [`fine_rhs`] evaluates the driving term with its own Green's
//! function and quadrature.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::channels::ProblemConfig;
use crate::error::{Error, Result};

pub const MIN_STEPS: usize = 100;
pub const MAX_STEPS: usize = 1 << 20;
/// Doubling stops once `|r|` moves by less than this.
pub const STEP_TOLERANCE: f64 = 1e-10;
/// Change in `|r|` at [`MAX_STEPS`] beyond which the oracle gives up.
pub const CAP_TOLERANCE: f64 = 1e-6;

/// Channel `n0` on its own: a particle of mass `m1` scattering off
/// `V(x) = (2 mu0 / L) sin^2(n0 pi x / L)` on `[0, L]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingleChannelProblem {
    pub coupling: f64,
    pub box_length: f64,
    pub k0: f64,
    pub mass1: f64,
    pub hbar: f64,
    pub n0: usize,
}

impl SingleChannelProblem {
    pub fn from_config(config: &ProblemConfig) -> Self {
        Self {
            coupling: config.coupling,
            box_length: config.box_length,
            k0: config.k0,
            mass1: config.mass1,
            hbar: config.hbar,
            n0: config.n0,
        }
    }

    pub fn potential(&self, x: f64) -> f64 {
        if !(0.0..=self.box_length).contains(&x) {
            return 0.0;
        }
        let s = (self.n0 as f64 * PI * x / self.box_length).sin();
        2.0 * self.coupling / self.box_length * s * s
    }

    /// `k0^2 - 2 m1 V(x) / hbar^2`.
    fn local_q2(&self, x: f64) -> f64 {
        self.k0 * self.k0 - 2.0 * self.mass1 * self.potential(x) / (self.hbar * self.hbar)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferResult {
    /// Reflection amplitude of `e^{i k0 x}` incident from the left.
    pub r: Complex64,
    pub t: Complex64,
    /// Slab count of the accepted solution.
    pub steps: usize,
}

impl TransferResult {
    pub fn reflection(&self) -> f64 {
        self.r.norm_sqr()
    }

    pub fn transmission(&self) -> f64 {
        self.t.norm_sqr()
    }
}

/// Steps `(phi, phi')` backwards across a slab of width `h` with constant
/// `phi'' = -q2 phi`.
fn step_back(q2: f64, h: f64, phi: Complex64, dphi: Complex64) -> (Complex64, Complex64) {
    // forward propagator [[c, s], [-q2 s, c]] with s = sin(qh)/q; the inverse
    // is the same matrix evaluated at -h.
    let (c, s) = if q2 > 0.0 {
        let q = q2.sqrt();
        ((q * h).cos(), -(q * h).sin() / q)
    } else if q2 < 0.0 {
        let kappa = (-q2).sqrt();
        ((kappa * h).cosh(), -(kappa * h).sinh() / kappa)
    } else {
        (1.0, -h)
    };
    (c * phi + s * dphi, -q2 * s * phi + c * dphi)
}

fn transfer_once(prob: &SingleChannelProblem, steps: usize) -> TransferResult {
    let (l, k0) = (prob.box_length, prob.k0);
    let h = l / steps as f64;
    // Only the transmitted wave exists for x >= L.
    let mut phi = Complex64::cis(k0 * l);
    let mut dphi = Complex64::i() * k0 * phi;
    for i in (0..steps).rev() {
        let mid = (i as f64 + 0.5) * h;
        (phi, dphi) = step_back(prob.local_q2(mid), h, phi, dphi);
    }
    // phi = A e^{ik0x} + B e^{-ik0x} at x = 0
    let ratio = dphi / (Complex64::i() * k0);
    let incident = (phi + ratio) / 2.0;
    let reflected = (phi - ratio) / 2.0;
    TransferResult {
        r: reflected / incident,
        t: Complex64::new(1.0, 0.0) / incident,
        steps,
    }
}

/// Piecewise-constant transfer-matrix solution, refined by step doubling.
pub fn transfer_matrix_solve(prob: &SingleChannelProblem, steps: usize) -> Result<TransferResult> {
    if steps < MIN_STEPS {
        return Err(Error::InvalidConfig(format!(
            "transfer matrix needs at least {MIN_STEPS} steps, got {steps}"
        )));
    }
    if !(prob.k0 > 0.0 && prob.box_length > 0.0 && prob.mass1 > 0.0 && prob.hbar > 0.0) {
        return Err(Error::InvalidConfig(format!("invalid single-channel problem {prob:?}")));
    }
    let mut current = transfer_once(prob, steps);
    let mut steps = steps;
    loop {
        let next_steps = steps * 2;
        let next = transfer_once(prob, next_steps);
        let change = (next.r.norm() - current.r.norm()).abs();
        if change <= STEP_TOLERANCE {
            return Ok(next);
        }
        if next_steps >= MAX_STEPS {
            if change > CAP_TOLERANCE {
                return Err(Error::NonConvergence {
                    steps: next_steps,
                    change,
                });
            }
            return Ok(next);
        }
        current = next;
        steps = next_steps;
    }
}

/// Subintervals on each side of the kink at `x' = x`.
const FINE_INTERVALS: usize = 12800;

fn oracle_green(config: &ProblemConfig, n: usize, d: f64) -> Complex64 {
    let q = PI / config.box_length;
    let a = config.mass1 / config.mass2 * q * q * ((n * n) as f64 - (config.n0 * config.n0) as f64)
        - config.k0 * config.k0;
    if a < 0.0 {
        let k = (-a).sqrt();
        Complex64::i() * Complex64::cis(k * d.abs()) / (2.0 * k)
    } else {
        let lambda = a.sqrt();
        Complex64::new((-lambda * d.abs()).exp() / (2.0 * lambda), 0.0)
    }
}

fn integrand(config: &ProblemConfig, n: usize, x: f64, xp: f64) -> Complex64 {
    let l = config.box_length;
    let c = 4.0 * config.mass1 * config.coupling / (config.hbar * config.hbar * l);
    let coupling = c * (n as f64 * PI * xp / l).sin() * (config.n0 as f64 * PI * xp / l).sin();
    oracle_green(config, n, x - xp) * coupling * Complex64::cis(config.k0 * xp)
}

fn trapezoid(a: f64, b: f64, m: usize, f: impl Fn(f64) -> Complex64) -> Complex64 {
    if b <= a {
        return Complex64::new(0.0, 0.0);
    }
    let h = (b - a) / m as f64;
    let interior: Complex64 = (1..m).map(|i| f(a + i as f64 * h)).sum();
    (interior + (f(a) + f(b)) / 2.0) * h
}

/// `f_n(x) = -int_0^L G_n(x - x') A_{n n0}(x') e^{i k0 x'} dx'`, by composite
/// trapezoid on `[0, x]` and `[x, L]` with one Richardson step.
pub fn fine_rhs(config: &ProblemConfig, n: usize, x: f64) -> Result<Complex64> {
    let l = config.box_length;
    if !(0.0..=l).contains(&x) {
        return Err(Error::Domain { x, domain: "[0, L]" });
    }
    if n == 0 {
        return Err(Error::InvalidConfig("channel index must be >= 1".into()));
    }
    let f = |xp: f64| integrand(config, n, x, xp);
    let at = |m: usize| trapezoid(0.0, x, m, f) + trapezoid(x, l, m, f);
    let fine = at(FINE_INTERVALS);
    let coarse = at(FINE_INTERVALS / 2);
    Ok(-(4.0 * fine - coarse) / 3.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{build_channels, ChannelTable};
    use crate::kernel::KernelContext;
    use crate::nystrom::{solve_reduced, Discretization};
    use crate::observables::probabilities;

    fn problem(g: f64, lk0: f64) -> SingleChannelProblem {
        SingleChannelProblem::from_config(&ProblemConfig::dimensionless(g, lk0, 1).unwrap())
    }

    #[test]
    fn potential_vanishes_at_walls() {
        let p = problem(3.0, 2.0);
        assert_eq!(p.potential(0.0), 0.0);
        assert!(p.potential(1.0).abs() < 1e-30);
        assert!((p.potential(0.5) - 6.0).abs() < 1e-15);
    }

    #[test]
    fn free_propagation() {
        let res = transfer_matrix_solve(&problem(0.0, 2.5), 100).unwrap();
        assert!(res.r.norm() < 1e-14);
        assert!((res.t - 1.0).norm() < 1e-13);
    }

    #[test]
    fn unitary_and_stable() {
        for (g, lk0) in [(1.0, 3.0), (-5.0, 0.7), (5.0, 5.3), (40.0, 2.0), (-40.0, 4.0)] {
            let p = problem(g, lk0);
            let res = transfer_matrix_solve(&p, 100).unwrap();
            assert!((res.reflection() + res.transmission() - 1.0).abs() <= 1e-8);
            let again = transfer_matrix_solve(&p, res.steps).unwrap();
            assert!((again.reflection() - res.reflection()).abs() <= 1e-6);
        }
    }

    #[test]
    fn rejects_too_few_steps() {
        assert!(transfer_matrix_solve(&problem(1.0, 3.0), 99).is_err());
    }

    #[test]
    fn matches_single_channel_nystrom() {
        let config = ProblemConfig::dimensionless(1.0, 3.0, 1).unwrap();
        let ctx = KernelContext::new(config, ChannelTable::forced(&config, 1).unwrap());
        let sol = solve_reduced(&ctx, &Discretization::trapezoid(1.0, 401).unwrap()).unwrap();
        let report = probabilities(&sol);
        let oracle = transfer_matrix_solve(&SingleChannelProblem::from_config(&config), 100).unwrap();
        assert!((report.outcomes[0].p_minus - oracle.reflection()).abs() <= 1e-4);
        assert!((report.outcomes[0].p_plus - oracle.transmission()).abs() <= 1e-4);
    }

    #[test]
    fn fine_rhs_zero_without_coupling() {
        let config = ProblemConfig::dimensionless(0.0, 7.0, 2).unwrap();
        assert_eq!(fine_rhs(&config, 3, 0.4).unwrap(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn fine_rhs_agrees_with_kernel_quadrature() {
        // trapezoid error grows like (n pi h)^2, so at N = 401 the 1e-4 bound
        // holds for the low channels only
        let config = ProblemConfig::dimensionless(1.0, 3.0, 1).unwrap();
        let ctx = KernelContext::new(config, build_channels(&config, 6).unwrap());
        let quad = Discretization::trapezoid(1.0, 401).unwrap();
        for n in 1..=3 {
            for x in [0.0, 0.1, 0.37, 0.5, 0.8125, 1.0] {
                let exact = fine_rhs(&config, n, x).unwrap();
                let approx = ctx.rhs(n, x, &quad).unwrap();
                assert!((exact - approx).norm() <= 1e-4 * exact.norm().max(1e-12), "n={n} x={x}");
            }
        }
    }

    #[test]
    fn kernel_quadrature_converges_to_fine_rhs_at_least_second_order() {
        let config = ProblemConfig::dimensionless(2.0, 9.0, 1).unwrap();
        let ctx = KernelContext::new(config, build_channels(&config, 8).unwrap());
        let grids: Vec<_> = [201, 401, 801].iter().map(|&n| Discretization::trapezoid(1.0, n).unwrap()).collect();
        for n in 1..=7 {
            for x in [0.25, 0.5, 0.75] {
                let exact = fine_rhs(&config, n, x).unwrap();
                let err: Vec<f64> = grids.iter().map(|q| (ctx.rhs(n, x, q).unwrap() - exact).norm()).collect();
                let order = (err[1] / err[2]).log2();
                // symmetric points can superconverge
                assert!(order > 1.9, "n={n} x={x} errors {err:?}");
                assert!(err[0] / err[1] > 3.6);
            }
        }
    }

    #[test]
    fn open_channel_rhs_is_complex() {
        let config = ProblemConfig::dimensionless(2.0, 9.0, 1).unwrap();
        for n in [1, 2] {
            assert!(fine_rhs(&config, n, 0.37).unwrap().im.abs() > 1e-3);
        }
    }
}
