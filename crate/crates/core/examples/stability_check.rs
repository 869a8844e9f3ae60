//! Hurwitz test of the published gains and a grid search for a quadratic
//! certificate of the observer error dynamics.
//!
//! cargo run --example stability_check

use tswind::aero::AeroMap;
use tswind::certificate::{estimate_mu, lmi_feasibility_search, logspace};
use tswind::linalg::spectral_abscissa;
use tswind::observer::{build_observer_submodels, derived_sector_bounds, observer_ts_model, ObserverGains};
use tswind::params::TurbineParams;

fn main() -> tswind::Result<()> {
    let params = TurbineParams::default();
    let bounds = derived_sector_bounds(&params)?;
    let cfg = build_observer_submodels(&params, bounds, 18.0)?;
    let gains = ObserverGains::published_preset();
    let a = cfg.a_list();
    let l = [gains.l1.clone(), gains.l2.clone()];

    for (i, (ai, li)) in a.iter().zip(&l).enumerate() {
        println!("max Re eig(A_{0} - L_{0} C) = {1:.4}", i + 1, spectral_abscissa(&(ai - li * &cfg.c)));
    }

    let model = observer_ts_model(&params, bounds, AeroMap::default(), 0.0)?;
    let state_box = [(0.0, 0.01), (0.5, 1.6), (0.5, 1.6), (1.0, 60.0)];
    let input_box = [(0.0, 4.2e6), (1.0, 60.0)];
    let mu = estimate_mu(&model, &state_box, &input_box, 20_000, 2024)?;
    println!("mu estimate (lower bound) = {mu:.4}");

    let report = lmi_feasibility_search(&a, &l, &cfg.c, mu, &logspace(1e-4, 1e4, 33))?;
    println!(
        "certificate search: {} ({} candidates, best block margin {:.3e})",
        if report.feasible { "feasible" } else { "infeasible" },
        report.candidates,
        report.best_block_margin
    );
    Ok(())
}
