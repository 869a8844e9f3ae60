//! Synthesize observer gains from the default weights and compare the two
//! strategies.
//!
//! cargo run --example gain_design

use tswind::design::{build_weight_matrices, design_report, relative_gain_difference, synthesize_gains_with, GainDesign, WeightSet};
use tswind::observer::{build_observer_submodels, derived_sector_bounds};
use tswind::params::TurbineParams;

fn main() -> tswind::Result<()> {
    let params = TurbineParams::default();
    let cfg = build_observer_submodels(&params, derived_sector_bounds(&params)?, 18.0)?;
    let weights = build_weight_matrices(&WeightSet::default())?;
    let a = cfg.a_list();

    for strategy in [GainDesign::SharedLyapunov, GainDesign::PerVertex] {
        let g = synthesize_gains_with(&a, &cfg.c, &weights, strategy)?;
        println!("{}", design_report(&weights, &a, &cfg.c, &g));
        println!(
            "relative L1/L2 difference: {:.3e}\n",
            relative_gain_difference(&g.gains[0], &g.gains[1])
        );
    }
    Ok(())
}
