//! Sector-nonlinearity TS model of the pendulum: vertex matrices, blending
//! at a few angles and agreement with the raw dynamics.
//!
//! cargo run --release --example pendulum_decomposition

use tswind::commands::pendulum_trajectory_deviation;
use tswind::ts::{build_pendulum_fixture, pendulum_f, ts_blend};

fn main() -> tswind::Result<()> {
    let (m, l, g) = (1.0, 1.0, 9.81);
    let model = build_pendulum_fixture(m, l, g)?;
    for (i, s) in model.submodels().iter().enumerate() {
        println!("rule {}: A[1][0] = {:+.4}", i + 1, s.a[(1, 0)]);
    }
    for phi in [0.0, 0.5, 1.5, 3.0] {
        let f = pendulum_f(phi, g, l);
        let h = model.memberships(&[f])?;
        let (a, _) = ts_blend(&model, &h)?;
        println!("phi = {phi:3.1}: h = ({:.4}, {:.4})  blended {:+.6}  exact {:+.6}", h[0], h[1], a[(1, 0)], f);
    }
    let dev = pendulum_trajectory_deviation(20, 10.0, 0.001, 7)?;
    println!("20 trajectories, 10 s: sup |x_ts - x_raw| = {dev:.3e}");
    Ok(())
}
