//! Strong repulsive and attractive contact interactions give nearly the same
//! outcome probabilities; weak ones scale with the square of the strength.

use deltabox::sweep::open_interval_grid;
use deltabox::{solve_point, ProblemConfig, SolverStrategy};

fn main() -> deltabox::Result<()> {
    println!("strong coupling, g = +-1e4, n0 = 1");
    for lk0 in open_interval_grid(1.0, 30.0, 8) {
        let plus = solve_point(&ProblemConfig::dimensionless(1e4, lk0, 1)?, 50, 100, SolverStrategy::Reduced)?;
        let minus = solve_point(&ProblemConfig::dimensionless(-1e4, lk0, 1)?, 50, 100, SolverStrategy::Reduced)?;
        let worst = plus
            .outcomes
            .iter()
            .zip(&minus.outcomes)
            .map(|(a, b)| (a.p_total - b.p_total).abs())
            .fold(0.0, f64::max);
        println!("  Lk0 {lk0:>7.3}: {} open, max |p(+g) - p(-g)| = {worst:.2e}", plus.open_count());
    }

    println!("weak coupling, Lk0 = 10, n0 = 1");
    let a = solve_point(&ProblemConfig::dimensionless(1e-8, 10.0, 1)?, 50, 100, SolverStrategy::Reduced)?;
    let b = solve_point(&ProblemConfig::dimensionless(2e-8, 10.0, 1)?, 50, 100, SolverStrategy::Reduced)?;
    for (x, y) in a.outcomes.iter().zip(&b.outcomes).filter(|(x, _)| x.n != 1) {
        println!("  n = {}: p(2g) / p(g) = {:.6}", x.n, y.p_total / x.p_total);
    }
    Ok(())
}
