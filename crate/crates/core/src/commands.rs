//! Command handlers behind the `tswind` binary. Each returns the text it
//! would print; files are written as a side effect.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::aero::AeroMap;
use crate::certificate::{estimate_mu, lmi_feasibility_search, logspace};
use crate::design::{build_weight_matrices, design_report, relative_gain_difference, synthesize_gains_with, GainDesign, WeightSet};
use crate::error::{Error, Result};
use crate::linalg::spectral_abscissa;
use crate::observer::{build_observer_submodels, derived_sector_bounds, observer_ts_model, ObserverGains};
use crate::params::TurbineParams;
use crate::sim::config::SimConfig;
use crate::sim::integrate::rk4_step;
use crate::sim::run_closed_loop;
use crate::structural::{tower_stiffness, TowerModel};
use crate::ts::{build_pendulum_fixture, exactness_check, pendulum_f, pendulum_nonlinear_a, ts_blend, wrap_angle};

/// Box of observer states (θ_s, ω_r, ω_g, v) used for the μ estimate.
pub const OBSERVER_STATE_BOX: [(f64, f64); 4] = [(0.0, 0.01), (0.5, 1.6), (0.5, 1.6), (1.0, 60.0)];
/// Box of observer inputs (T_g, v̄) used for the μ estimate.
pub const OBSERVER_INPUT_BOX: [(f64, f64); 2] = [(0.0, 4.2e6), (1.0, 60.0)];

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Run a configured simulation, writing `trace.csv` and `metrics.txt`
/// into `out_dir`. A numerically failed run still writes the rows it got.
pub fn simulate(config_path: &Path, out_dir: Option<&Path>) -> Result<String> {
    let cfg = SimConfig::from_path(config_path)?;
    let out_dir = out_dir
        .map(Path::to_path_buf)
        .or_else(|| cfg.output.clone())
        .ok_or_else(|| Error::InvalidParameter("no output directory given (--out or `output`)".into()))?;
    create_dir(&out_dir)?;
    let trace_path = out_dir.join("trace.csv");
    match run_closed_loop(&cfg) {
        Ok(out) => {
            out.trace.emit_csv(&trace_path)?;
            let text = out.metrics.to_text();
            let metrics_path = out_dir.join("metrics.txt");
            std::fs::write(&metrics_path, &text).map_err(|e| Error::io(&metrics_path, e))?;
            Ok(format!("wrote {} rows to {}\n{text}", out.trace.len(), trace_path.display()))
        }
        Err(fail) => {
            if !fail.trace.is_empty() {
                fail.trace.emit_csv(&trace_path)?;
                log::error!("partial trace with {} rows written to {}", fail.trace.len(), trace_path.display());
            }
            Err(fail.error)
        }
    }
}

/// Synthesize gains from a weights file (defaults when `None`).
pub fn design_gains(weights_path: Option<&Path>, out: &Path, strategy: GainDesign) -> Result<String> {
    let ws = match weights_path {
        Some(p) => WeightSet::from_path(p)?,
        None => WeightSet::default(),
    };
    let weights = build_weight_matrices(&ws)?;
    let params = TurbineParams::default();
    let cfg = build_observer_submodels(&params, derived_sector_bounds(&params)?, 18.0)?;
    let a = cfg.a_list();
    let result = synthesize_gains_with(&a, &cfg.c, &weights, strategy)?;
    let gains = ObserverGains::new(result.gains[0].clone(), result.gains[1].clone())?;
    let mut report = design_report(&weights, &a, &cfg.c, &result);
    let _ = writeln!(
        report,
        "relative L1/L2 difference: {:.6e}",
        relative_gain_difference(&gains.l1, &gains.l2)
    );
    let text = gains.to_text(&format!("observer gains, strategy {strategy:?}"));
    std::fs::write(out, text).map_err(|e| Error::io(out, e))?;
    let report_path = out.with_extension("report.txt");
    std::fs::write(&report_path, &report).map_err(|e| Error::io(&report_path, e))?;
    Ok(report)
}

/// Verdict of [`verify_stability`].
#[derive(Debug, Clone)]
pub struct StabilityVerdict {
    pub report: String,
    pub hurwitz: bool,
    pub certified: bool,
}

/// Hurwitz test of every vertex and the midpoint, plus the certificate
/// grid search. Gains default to the published preset.
pub fn verify_stability(gains_path: Option<&Path>) -> Result<StabilityVerdict> {
    let gains = match gains_path {
        Some(p) => ObserverGains::from_path(p)?,
        None => ObserverGains::published_preset(),
    };
    let params = TurbineParams::default();
    let bounds = derived_sector_bounds(&params)?;
    let cfg = build_observer_submodels(&params, bounds, 18.0)?;
    let a = cfg.a_list();
    let l = [gains.l1.clone(), gains.l2.clone()];
    let closed: Vec<_> = a.iter().zip(&l).map(|(a, l)| a - l * &cfg.c).collect();
    let mid = (&closed[0] + &closed[1]) * 0.5;
    let mut out = String::new();
    let mut hurwitz = true;
    for (name, m) in [("rule 1", &closed[0]), ("rule 2", &closed[1]), ("midpoint", &mid)] {
        let s = spectral_abscissa(m);
        let ok = s < -crate::linalg::EPS_H;
        hurwitz &= ok;
        let _ = writeln!(out, "{name:9} max Re eig = {s:+.6e}  hurwitz = {ok}");
    }
    let model = observer_ts_model(&params, bounds, AeroMap::default(), 0.0)?;
    let mu = estimate_mu(&model, &OBSERVER_STATE_BOX, &OBSERVER_INPUT_BOX, 20_000, 2024)?;
    let search = lmi_feasibility_search(&a, &l, &cfg.c, mu, &logspace(1e-4, 1e4, 33))?;
    let _ = writeln!(out, "mu estimate = {mu:.6e} (sampled lower bound)");
    let _ = writeln!(
        out,
        "certificate: {} after {} candidates (best block margin {:.3e})",
        if search.feasible { "found" } else { "not found" },
        search.candidates,
        search.best_block_margin
    );
    Ok(StabilityVerdict {
        report: out,
        hurwitz,
        certified: search.feasible,
    })
}

/// Frequency → bending stiffness → spring chain for a tower file, or the
/// built-in reference tower.
pub fn tower_report(tower_path: Option<&Path>) -> Result<String> {
    let tower = match tower_path {
        Some(p) => TowerModel::from_path(p)?,
        None => TowerModel::default(),
    };
    let s = tower_stiffness(&tower)?;
    Ok(format!(
        "segments = {}\nlength_m = {}\ntip_mass_kg = {}\nomega1_rad_s = {:.6}\nmu_total_kg_m = {:.4}\nb_total_nm2 = {:.6e}\nk_spring_n_m = {:.6e}\n",
        tower.segments.len(),
        tower.total_length(),
        tower.tip_mass,
        s.omega1,
        s.mu_total,
        s.b_total,
        s.k_spring
    ))
}

/// Sup-norm deviation between RK4 trajectories of the TS pendulum and the
/// raw nonlinear pendulum from `count` random initial conditions.
pub fn pendulum_trajectory_deviation(count: usize, horizon: f64, dt: f64, seed: u64) -> Result<f64> {
    let (m, l, g) = (1.0, 1.0, 9.81);
    let model = build_pendulum_fixture(m, l, g)?;
    let pi = std::f64::consts::PI;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let steps = (horizon / dt).round() as usize;
    let u = DVector::from_element(1, 0.0);
    let mut worst = 0.0_f64;
    for _ in 0..count {
        let x0 = nalgebra::Vector2::new(rng.random_range(-pi..pi), rng.random_range(-2.0..2.0));
        let (mut xs, mut xr) = (x0, x0);
        for k in 0..steps {
            let t = k as f64 * dt;
            xs = rk4_step(
                |_, x| {
                    let z = DVector::from_column_slice(&[wrap_angle(x[0]), x[1]]);
                    let d = model.derivative(&z, &u);
                    nalgebra::Vector2::new(d[0], d[1])
                },
                &xs,
                t,
                dt,
            )?;
            xr = rk4_step(|_, x| nalgebra::Vector2::new(x[1], -(g / l) * x[0].sin()), &xr, t, dt)?;
            worst = worst.max((xs - xr).amax());
        }
    }
    Ok(worst)
}

/// Pendulum decomposition summary: bounds, vertex matrices, exactness and
/// trajectory agreement.
pub fn decompose_demo() -> Result<String> {
    let (m, l, g) = (1.0, 1.0, 9.81);
    let model = build_pendulum_fixture(m, l, g)?;
    let b = model.bounds()[0];
    let mut out = String::new();
    let _ = writeln!(out, "pendulum m = {m} kg, l = {l} m, g = {g} m/s^2 on [-pi, pi]");
    let _ = writeln!(out, "f(x1) = -(g/l) sin(x1)/x1 in [{}, {}]", b.f_min(), b.f_max());
    for (i, s) in model.submodels().iter().enumerate() {
        let _ = writeln!(out, "A_{} = [[{}, {}], [{}, {}]]", i + 1, s.a[(0, 0)], s.a[(0, 1)], s.a[(1, 0)], s.a[(1, 1)]);
    }
    let pi = std::f64::consts::PI;
    let samples: Vec<f64> = (0..1000).map(|k| -pi + 2.0 * pi * k as f64 / 999.0).collect();
    let dev = exactness_check(&model, &samples, |&x| vec![pendulum_f(x, g, l)], |&x| pendulum_nonlinear_a(x, g, l))?;
    let _ = writeln!(out, "exactness over {} samples: {dev:.3e}", samples.len());
    let h = model.memberships(&[pendulum_f(pi / 2.0, g, l)])?;
    let (a, _) = ts_blend(&model, &h)?;
    let _ = writeln!(
        out,
        "at x1 = pi/2: h = ({:.6}, {:.6}), A(2,1) = {:.12} (direct {:.12})",
        h[0],
        h[1],
        a[(1, 0)],
        -2.0 * g / (l * pi)
    );
    let traj = pendulum_trajectory_deviation(20, 10.0, 0.001, 3)?;
    let _ = writeln!(out, "trajectory sup deviation (20 runs, 10 s): {traj:.3e}");
    Ok(out)
}
