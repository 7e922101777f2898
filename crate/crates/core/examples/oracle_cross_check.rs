//! Compare the Nyström solver, cut to the incident channel alone, with a
//! transfer-matrix integration of the same single-channel problem.

use deltabox::channels::ChannelTable;
use deltabox::nystrom::{solve_reduced, Discretization};
use deltabox::oracle::{transfer_matrix_solve, SingleChannelProblem};
use deltabox::sweep::open_interval_grid;
use deltabox::{probabilities, KernelContext, ProblemConfig};

fn main() -> deltabox::Result<()> {
    let disc = Discretization::trapezoid(1.0, 401)?;
    println!("{:>6} {:>8} {:>14} {:>14} {:>10} {:>8}", "g", "Lk0", "|r|^2 nystrom", "|r|^2 oracle", "diff", "steps");
    for g in [1.0, -1.0, 5.0, -5.0] {
        for lk0 in open_interval_grid(0.5, 5.4, 5) {
            let config = ProblemConfig::dimensionless(g, lk0, 1)?;
            let ctx = KernelContext::new(config, ChannelTable::forced(&config, 1)?);
            let main = probabilities(&solve_reduced(&ctx, &disc)?);
            let oracle = transfer_matrix_solve(&SingleChannelProblem::from_config(&config), 100)?;
            let r2 = main.outcomes[0].p_minus;
            println!(
                "{g:>6} {lk0:>8.4} {r2:>14.8} {:>14.8} {:>10.2e} {:>8}",
                oracle.reflection(),
                (r2 - oracle.reflection()).abs(),
                oracle.steps
            );
        }
    }
    Ok(())
}
