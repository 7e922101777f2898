//! Solve one configuration and print the outcome table.
//!
//! cargo run --example single_solve -- [g] [Lk0] [n0]

use deltabox::nystrom::extend_total;
use deltabox::{solve_config, ProblemConfig, SolverStrategy};

fn main() -> deltabox::Result<()> {
    let args: Vec<f64> = std::env::args().skip(1).map(|a| a.parse().expect("number")).collect();
    let g = args.first().copied().unwrap_or(80.0);
    let lk0 = args.get(1).copied().unwrap_or(20.0);
    let n0 = args.get(2).copied().unwrap_or(1.0) as usize;

    let config = ProblemConfig::dimensionless(g, lk0, n0)?;
    let sol = solve_config(&config, 50, 100, SolverStrategy::Reduced)?;
    let report = deltabox::probabilities(&sol);

    println!("g = {g}, Lk0 = {lk0}, n0 = {n0}, epsilon = {:.4}", config.to_dimensionless().epsilon);
    println!("{:>3} {:>12} {:>14} {:>14} {:>14}", "n", "k_n", "p+", "p-", "p");
    for o in &report.outcomes {
        println!("{:>3} {:>12.6} {:>14.6e} {:>14.6e} {:>14.6e}", o.n, o.k, o.p_plus, o.p_minus, o.p_total);
    }
    println!("unitarity defect {:.3e}", report.unitarity_defect);
    println!("flux left {:.15} right {:.15}", report.flux_left, report.flux_right);
    let d = sol.diagnostics();
    println!("backward error {:.2e}, condition estimate {:.3e}", d.backward_error, d.condition_estimate);

    // channel amplitudes just past the box; closed channels have decayed
    let outside = extend_total(&sol, 1.5 * config.box_length)?;
    let closed: f64 = sol
        .table()
        .channels()
        .iter()
        .filter(|c| !c.is_open())
        .map(|c| outside[c.index - 1].norm())
        .fold(0.0, f64::max);
    println!("largest closed-channel amplitude at x = 1.5 L: {closed:.3e}");
    Ok(())
}
