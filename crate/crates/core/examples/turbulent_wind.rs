//! Turbulent wind with a rolling-mean v_bar and optional sensor noise.
//!
//! cargo run --release --example turbulent_wind [seed]

use tswind::sim::config::{ObserverInit, SimConfig, VBarMode};
use tswind::sim::run_closed_loop;
use tswind::wind::WindKind;

fn main() {
    let mut cfg = SimConfig::default();
    cfg.scenario.kind = WindKind::Turbulent;
    cfg.scenario.seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1);
    cfg.initial_observer.mode = ObserverInit::Exact;
    cfg.v_bar.mode = VBarMode::Rolling;
    for noisy in [false, true] {
        cfg.noise.enabled = noisy;
        match run_closed_loop(&cfg) {
            Ok(out) => {
                let m = &out.metrics;
                println!(
                    "noise {noisy:5}: rmse_v = {:.4} m/s  lag = {}  max |err| = {:.3} m/s",
                    m.rmse.v,
                    m.lag.map_or("undefined".into(), |l| format!("{l:.3} s")),
                    m.max_abs_v_error_after_cutoff
                );
            }
            Err(f) => {
                eprintln!("simulation failed after {} rows: {}", f.trace.len(), f.error);
                std::process::exit(2);
            }
        }
    }
}
