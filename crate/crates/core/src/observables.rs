//! Outcome probabilities and flux diagnostics of a solved configuration.
//!
//! For an open channel `n` the particle leaves to the right with probability
//!
//! ```text
//! p_n^+ = (k_n / k0) |Phi_n(L) + delta_{n n0} e^{i k0 L}|^2
//! ```
//!
//! and to the left with `p_n^- = (k_n / k0) |Phi_n(0)|^2`. Closed channels
//! carry no flux and are never reported.

use num_complex::Complex64;
use serde::Serialize;

use crate::nystrom::ScatteringSolution;

/// One realizable outcome: free particle with wavenumber `k`, confined
/// particle in box state `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Outcome {
    pub n: usize,
    pub k: f64,
    /// Recomputed from `(k, n)`, so that `energy == incident_energy` is a
    /// genuine check.
    pub energy: f64,
    pub p_plus: f64,
    pub p_minus: f64,
    pub p_total: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutcomeReport {
    /// Open channels in increasing `n`.
    pub outcomes: Vec<Outcome>,
    /// `|sum_n (p_n^+ + p_n^-) - 1|`.
    pub unitarity_defect: f64,
    pub flux_left: f64,
    pub flux_right: f64,
    pub incident_energy: f64,
}

impl OutcomeReport {
    pub fn outcome(&self, n: usize) -> Option<&Outcome> {
        self.outcomes.iter().find(|o| o.n == n)
    }

    /// `p_n`, zero for channels that are not open.
    pub fn total(&self, n: usize) -> f64 {
        self.outcome(n).map_or(0.0, |o| o.p_total)
    }

    pub fn open_count(&self) -> usize {
        self.outcomes.len()
    }

    /// Largest `|E_n - E_0| / E_0` over the reported outcomes.
    pub fn max_energy_error(&self) -> f64 {
        self.outcomes
            .iter()
            .map(|o| (o.energy - self.incident_energy).abs() / self.incident_energy)
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// `x < 0`.
    Left,
    /// `x > L`.
    Right,
}

/// Outgoing amplitude at `x = L` including the unscattered incident wave.
fn transmitted(sol: &ScatteringSolution, n: usize) -> Complex64 {
    let config = sol.config();
    let mut amp = sol.right(n);
    if n == config.n0 {
        amp += Complex64::cis(config.k0 * config.box_length);
    }
    amp
}

pub fn probabilities(sol: &ScatteringSolution) -> OutcomeReport {
    let config = sol.config();
    let outcomes: Vec<Outcome> = sol
        .table()
        .open_channels()
        .map(|c| {
            let k = c.wavenumber().unwrap();
            let ratio = k / config.k0;
            let p_plus = ratio * transmitted(sol, c.index).norm_sqr();
            let p_minus = ratio * sol.left(c.index).norm_sqr();
            Outcome {
                n: c.index,
                k,
                energy: config.outcome_energy(c.index, k),
                p_plus,
                p_minus,
                p_total: p_plus + p_minus,
            }
        })
        .collect();
    let sum: f64 = outcomes.iter().map(|o| o.p_total).sum();
    OutcomeReport {
        outcomes,
        unitarity_defect: (sum - 1.0).abs(),
        flux_left: flux(sol, Side::Left),
        flux_right: flux(sol, Side::Right),
        incident_energy: config.total_energy(),
    }
}

/// Probability flux `F(x)` on one side of the box divided by the incident
/// flux `2 hbar k0 / (L m1)`.
pub fn flux(sol: &ScatteringSolution, side: Side) -> f64 {
    let config = sol.config();
    let unit = 2.0 * config.hbar / (config.box_length * config.mass1);
    let incident = unit * config.k0;
    let channel_flux = |amp: &dyn Fn(usize) -> Complex64| -> f64 {
        sol.table()
            .open_channels()
            .map(|c| unit * c.wavenumber().unwrap() * amp(c.index).norm_sqr())
            .sum()
    };
    let value = match side {
        Side::Right => channel_flux(&|n| transmitted(sol, n)),
        Side::Left => incident - channel_flux(&|n| sol.left(n)),
    };
    value / incident
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{build_channels, ProblemConfig};
    use crate::kernel::KernelContext;
    use crate::nystrom::{solve_reduced, Discretization};
    use proptest::prelude::*;

    fn solve(config: ProblemConfig, t: usize, n: usize) -> ScatteringSolution {
        let ctx = KernelContext::new(config, build_channels(&config, t).unwrap());
        solve_reduced(&ctx, &Discretization::trapezoid(config.box_length, n).unwrap()).unwrap()
    }

    fn report(g: f64, lk0: f64, n0: usize, t: usize) -> OutcomeReport {
        probabilities(&solve(ProblemConfig::dimensionless(g, lk0, n0).unwrap(), t, 2 * t))
    }

    #[test]
    fn zero_coupling_is_pure_transmission() {
        for (lk0, n0) in [(20.0, 1), (7.5, 3), (0.3, 5)] {
            let r = report(0.0, lk0, n0, 40);
            for o in &r.outcomes {
                let expected = if o.n == n0 { 1.0 } else { 0.0 };
                assert!((o.p_plus - expected).abs() <= 1e-15);
                assert_eq!(o.p_minus, 0.0);
            }
            assert!(r.unitarity_defect <= 1e-12);
            assert!((r.flux_left - 1.0).abs() <= 1e-15 && (r.flux_right - 1.0).abs() <= 1e-15);
        }
    }

    #[test]
    fn single_open_channel_sums_to_one() {
        for g in [-50.0, -1.0, 0.3, 5.0, 1e4] {
            let r = report(g, 3.0, 1, 10);
            assert_eq!(r.open_count(), 1);
            assert!((r.total(1) - 1.0).abs() <= 1e-10, "g={g}: {}", r.total(1));
        }
    }

    #[test]
    fn flux_is_conserved() {
        // Left and right flux agree with each other and with the summed
        // probabilities. The matched trapezoid discretization is itself a
        // conservative scheme, so this holds to roundoff at every resolution.
        for (g, lk0, t) in [(80.0, 20.0, 10), (80.0, 20.0, 30), (-3.0, 11.0, 20), (1e3, 26.0, 40)] {
            let r = report(g, lk0, 1, t);
            assert!((r.flux_left - r.flux_right).abs() <= 1e-11, "{r:?}");
            let sum: f64 = r.outcomes.iter().map(|o| o.p_plus).sum();
            assert!((r.flux_right - sum).abs() <= 1e-13);
            assert!(r.unitarity_defect <= 1e-11);
        }
    }

    #[test]
    fn outcome_energies_match_incident_energy() {
        let config = ProblemConfig {
            mass1: 1.0,
            mass2: 3.5,
            box_length: 2.0,
            coupling: 4.0,
            hbar: 0.7,
            k0: 9.0,
            n0: 2,
        };
        let r = probabilities(&solve(config, 40, 60));
        assert!(r.open_count() > 3);
        assert!(r.max_energy_error() <= 1e-12);
    }

    #[test]
    fn strong_coupling_sign_symmetry() {
        for lk0 in [4.0, 11.0, 23.0] {
            let plus = report(1e4, lk0, 1, 30);
            let minus = report(-1e4, lk0, 1, 30);
            for (a, b) in plus.outcomes.iter().zip(&minus.outcomes) {
                assert!((a.p_total - b.p_total).abs() <= 1e-3);
            }
        }
    }

    #[test]
    fn weak_coupling_scales_quadratically() {
        let a = report(1e-8, 10.0, 1, 20);
        let b = report(2e-8, 10.0, 1, 20);
        for (x, y) in a.outcomes.iter().zip(&b.outcomes).filter(|(x, _)| x.n != 1) {
            let ratio = y.p_total / x.p_total;
            assert!((ratio - 4.0).abs() <= 0.04, "n={} ratio={ratio}", x.n);
        }
    }

    #[test]
    fn below_first_threshold_stays_in_ground_state() {
        for lk0 in [0.5, 2.0, 5.4] {
            let r = report(7.0, lk0, 1, 10);
            assert_eq!(r.open_count(), 1);
            assert!((r.total(1) - 1.0).abs() <= r.unitarity_defect + 1e-12);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn report_invariants(g in -100.0f64..100.0, lk0 in 0.5f64..25.0, n0 in 1usize..4) {
            let config = ProblemConfig::dimensionless(g, lk0, n0).unwrap();
            let Ok(table) = build_channels(&config, 16) else { return Ok(()) };
            let ctx = KernelContext::new(config, table);
            let sol = solve_reduced(&ctx, &Discretization::trapezoid(1.0, 32).unwrap()).unwrap();
            let r = probabilities(&sol);
            prop_assert_eq!(r.open_count(), sol.table().open_count());
            for o in &r.outcomes {
                prop_assert!(o.p_plus >= 0.0 && o.p_minus >= 0.0);
                prop_assert!(sol.table().channel(o.n).is_open());
            }
            prop_assert!(r.max_energy_error() <= 1e-12);
            prop_assert!(r.unitarity_defect <= 1e-9);
        }
    }
}
