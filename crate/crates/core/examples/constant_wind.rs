//! Constant 18 m/s wind with the observer started far from the truth.
//!
//! cargo run --release --example constant_wind

use tswind::sim::config::SimConfig;
use tswind::sim::run_closed_loop;

fn main() {
    let cfg = SimConfig::default();
    let out = match run_closed_loop(&cfg) {
        Ok(o) => o,
        Err(f) => {
            eprintln!("simulation failed after {} rows: {}", f.trace.len(), f.error);
            std::process::exit(2);
        }
    };
    for t in [0.0, 1.0, 2.0, 5.0, 10.0, 20.0, 40.0, 80.0, 120.0] {
        let k = (t / cfg.dt).round() as usize;
        let r = &out.trace.rows[k.min(out.trace.len() - 1)];
        println!(
            "t = {:6.1}  v_hat = {:8.4}  omega_r = {:.5} ({:.5})  beta = {:7.3}  h1 = {:.4}",
            r.t, r.v_hat, r.omega_r, r.omega_r_hat, r.beta, r.h1
        );
    }
    print!("{}", out.metrics.to_text());
}
