//! Extreme operating gust at 18 m/s: estimate lag and tracking error.
//!
//! cargo run --release --example gust_response [out.csv]

use tswind::sim::config::SimConfig;
use tswind::sim::run_closed_loop;
use tswind::wind::WindKind;

fn main() {
    let mut cfg = SimConfig::default();
    cfg.scenario.kind = WindKind::Eog;
    let out = match run_closed_loop(&cfg) {
        Ok(o) => o,
        Err(f) => {
            eprintln!("simulation failed after {} rows: {}", f.trace.len(), f.error);
            std::process::exit(2);
        }
    };
    let gust = cfg.scenario.gust_start..cfg.scenario.gust_start + cfg.scenario.gust_duration + 5.0;
    for r in out.trace.rows.iter().filter(|r| gust.contains(&r.t)).step_by(100) {
        println!(
            "t = {:6.2}  v = {:7.3}  v_hat = {:7.3}  omega_g = {:.4}  beta_d = {:6.2}",
            r.t, r.v_true, r.v_hat, r.omega_g, r.beta_d
        );
    }
    print!("{}", out.metrics.to_text());
    if let Some(path) = std::env::args().nth(1) {
        if let Err(e) = out.trace.emit_csv(&path) {
            eprintln!("{e}");
            std::process::exit(1);
        }
    }
}
