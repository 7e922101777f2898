//! Refinement in the truncation order T with N = 2T nodes, fitting the decay
//! of the largest change in any outcome probability.

use deltabox::sweep::{run_convergence, ConvergencePlan};
use deltabox::ProblemConfig;

fn main() -> deltabox::Result<()> {
    let config = ProblemConfig::dimensionless(80.0, 20.0, 1)?;
    let study = run_convergence(&ConvergencePlan::new(config))?;
    println!("{:>5} {:>14} {:>12}", "T", "max |dp_n|", "defect");
    for (level, (t, diff)) in study.levels.iter().skip(1).zip(&study.pairs) {
        println!("{t:>5} {diff:>14.6e} {:>12.2e}", level.report.unitarity_defect);
    }
    println!("log-log slope {:.3}", study.slope);
    Ok(())
}
