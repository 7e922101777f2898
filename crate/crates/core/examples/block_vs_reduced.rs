//! The same discrete system solved twice: dense LU of the NT x NT block
//! matrix, and the N x N reduction. Also writes the block system as a DBOX
//! dump for inspection with other tools.

use std::time::Instant;

use deltabox::nystrom::{assemble, read_dump, solve, solve_reduced, Discretization};
use deltabox::{build_channels, KernelContext, ProblemConfig};

fn main() -> deltabox::Result<()> {
    let config = ProblemConfig::dimensionless(80.0, 20.0, 1)?;
    for t in [10, 20, 30] {
        let ctx = KernelContext::new(config, build_channels(&config, t)?);
        let disc = Discretization::trapezoid(1.0, 2 * t)?;

        let start = Instant::now();
        let block = solve(assemble(&ctx, &disc)?)?;
        let block_time = start.elapsed();
        let start = Instant::now();
        let reduced = solve_reduced(&ctx, &disc)?;
        let reduced_time = start.elapsed();

        let diff = block
            .amplitudes()
            .iter()
            .zip(reduced.amplitudes())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        let (b, r) = (block.diagnostics(), reduced.diagnostics());
        println!(
            "T = {t:>3}: NT = {:>5}  block {block_time:>10.2?} (cond {:.2e}, berr {:.1e})  reduced {reduced_time:>10.2?} (cond {:.2e}, berr {:.1e})  max |dPhi| {diff:.1e}",
            b.dimension, b.condition_estimate, b.backward_error, r.condition_estimate, r.backward_error
        );
    }

    let ctx = KernelContext::new(config, build_channels(&config, 10)?);
    let system = assemble(&ctx, &Discretization::trapezoid(1.0, 20)?)?;
    let path = std::env::temp_dir().join("deltabox_T10_N20.dbox");
    system.write_dump(std::fs::File::create(&path)?)?;
    let back = read_dump(std::fs::File::open(&path)?)?;
    println!("wrote {} ({} x {} system)", path.display(), back.dimension(), back.dimension());
    Ok(())
}
