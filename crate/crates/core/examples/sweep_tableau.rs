//! Outcome probabilities across L k0 for strong, moderate and weak coupling,
//! written as CSV and SVG panels under `target/tableaux/`.
//!
//! cargo run --release --example sweep_tableau -- [n0]

use deltabox::cli::{run_sweep_command, Options, RunConfig};

fn main() -> deltabox::Result<()> {
    let n0: usize = std::env::args().nth(1).map_or(1, |a| a.parse().expect("integer n0"));
    for (name, g, log) in [("high", 1e4, false), ("moderate", 1.0, true), ("low", 1e-8, true)] {
        let mut config = RunConfig::from_toml(&format!("g = {g:?}\nn0 = {n0}\n"))?;
        config.svg_log_scale = Some(log);
        let out_dir = format!("target/tableaux/n0_{n0}_{name}");
        let out = run_sweep_command(&config, &Options::new(&out_dir))?;
        let max_open = out
            .result
            .points
            .iter()
            .filter_map(|p| p.outcome.as_ref().ok())
            .map(|s| s.report.open_count())
            .max()
            .unwrap_or(0);
        let worst_defect = out
            .rows
            .iter()
            .filter_map(|r| r.defect)
            .fold(0.0, f64::max);
        println!(
            "{name:>9} g = {g:e}: {} points, up to {max_open} open channels, max defect {worst_defect:.1e} -> {out_dir}",
            out.result.points.len()
        );
    }
    Ok(())
}
