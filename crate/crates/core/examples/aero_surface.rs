//! Analytic power and torque coefficient surface: peak C_P, the C_Q
//! clamp, and the rated-speed trim pitch over the above-rated range.
//!
//! cargo run --example aero_surface

use tswind::aero::{AeroMap, AnalyticAeroMap};
use tswind::params::TurbineParams;
use tswind::sim::controller::ControllerSettings;
use tswind::sim::operating_point;

fn main() -> tswind::Result<()> {
    let surf = AnalyticAeroMap::default();
    let (mut best, mut at) = (0.0, 0.0);
    for k in 0..=400 {
        let l = 0.05 * k as f64;
        let cp = surf.power_coefficient(l, 0.0);
        if cp > best {
            (best, at) = (cp, l);
        }
    }
    println!("max C_P = {best:.4} at lambda = {at:.2}, beta = 0");
    let map = AeroMap::default();
    for l in [2.0, 5.0, 8.0, 11.0, 14.0] {
        let c = map.eval(l, 0.0);
        println!("lambda = {l:4.1}: C_Q = {:.5}  C_T = {:.4}", c.cq, c.ct);
    }
    let params = TurbineParams::default();
    let settings = ControllerSettings::default();
    for v in [12.0, 15.0, 18.0, 21.0, 25.0] {
        match operating_point(v, &params, &map, &settings) {
            Ok(op) => println!("v = {v:4.1} m/s: trim pitch {:.3} deg, tower deflection {:.3} m", op.state.beta, op.state.y_tower),
            Err(e) => println!("v = {v:4.1} m/s: {e}"),
        }
    }
    Ok(())
}
