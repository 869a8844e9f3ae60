//! Closed-loop simulation of plant, pitch controller and observer.
//!
//! Each step of length dt:
//! 1. the plant is advanced by RK4 with the control input held and the
//!    wind sampled at the stage times;
//! 2. measurements are formed, θ_s by trapezoidal integration of ω_r − ω_g;
//! 3. the observer is advanced by RK4 with the measurement interpolated
//!    linearly across the step, and v̂ is clamped to its envelope;
//! 4. the controller consumes the new generator speed measurement.

pub mod config;
pub mod controller;
pub mod integrate;
pub mod metrics;
pub mod trace;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::aero::AeroMap;
use crate::design::{build_weight_matrices, synthesize_gains_with};
use crate::error::{Error, Result};
use crate::observer::{
    build_observer_submodels, derived_sector_bounds, observer_memberships,
    observer_rate_with_memberships, Measurement, ObserverConfig, ObserverGains, ObserverState,
};
use crate::params::TurbineParams;
use crate::plant::{aero_forces, plant_derivative, ControlInput, PlantState};
use crate::wind::{RollingMean, WindSignal};

use self::config::{GainPreset, InitMode, ObserverInit, SimConfig, VBarMode};
use self::controller::{ControllerSettings, PitchController};
use self::integrate::rk4_step;
use self::metrics::{compute_metrics, MetricsReport};
use self::trace::{SimTrace, TraceRow};

/// Steady operating point at constant wind with rated speed and torque.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatingPoint {
    pub v: f64,
    pub state: PlantState,
    pub t_gen: f64,
}

/// Pitch balancing the aerodynamic torque against rated torque at rated
/// speed, on the largest-pitch branch, with static tower, blade and shaft
/// deflections.
pub fn operating_point(
    v: f64,
    params: &TurbineParams,
    aero: &AeroMap,
    settings: &ControllerSettings,
) -> Result<OperatingPoint> {
    let w = settings.rated_speed;
    let tq = settings.rated_torque;
    let excess = |beta: f64| aero_forces(v, w, beta, params, aero).torque - tq;
    let step = 0.25;
    let mut hi = settings.max_pitch;
    if excess(hi) > 0.0 {
        return Err(Error::InvalidParameter(format!(
            "no trim at {v} m/s: torque exceeds rating even at maximum pitch"
        )));
    }
    let mut lo = hi;
    loop {
        lo = (lo - step).max(settings.min_pitch);
        if excess(lo) >= 0.0 {
            break;
        }
        if lo <= settings.min_pitch {
            return Err(Error::InvalidParameter(format!(
                "no trim at {v} m/s: wind is below rated for the configured torque"
            )));
        }
        hi = lo;
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if excess(mid) >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let beta = 0.5 * (lo + hi);
    let f = aero_forces(v, w, beta, params, aero);
    let n = params.n_blades;
    let k_b = crate::plant::effective_blade_stiffness(w, params);
    let state = PlantState {
        y_tower: f.thrust / params.k_tower,
        y_blade: f.thrust / (n * k_b),
        theta_s: f.torque / params.k_shaft,
        dy_tower: 0.0,
        dy_blade: 0.0,
        omega_r: w,
        omega_g: w,
        beta,
    };
    Ok(OperatingPoint {
        v,
        state,
        t_gen: f.torque,
    })
}

/// Resolved inputs of one simulation run.
#[derive(Debug, Clone)]
pub struct SimSetup {
    pub config: SimConfig,
    pub params: TurbineParams,
    pub aero: AeroMap,
    pub wind: WindSignal,
    pub observer: ObserverConfig,
    pub gains: ObserverGains,
    pub controller: PitchController,
    pub plant0: PlantState,
    pub observer0: ObserverState,
}

impl SimSetup {
    pub fn new(config: &SimConfig) -> Result<Self> {
        config.validate()?;
        let params = config.turbine;
        let aero = config.aero.build()?;
        let wind = WindSignal::from_scenario(&config.scenario)?;
        let v_mean = config.scenario.v_mean;
        let v_bar = config.v_bar.value.unwrap_or(v_mean);
        let bounds = derived_sector_bounds(&params)?;
        let observer = build_observer_submodels(&params, bounds, v_bar)?;
        let gains = match config.gains.preset {
            GainPreset::Published => ObserverGains::published_preset(),
            GainPreset::File => ObserverGains::from_path(config.gains.file.as_ref().expect("validated"))?,
            GainPreset::Synthesized => {
                let w = build_weight_matrices(&config.gains.weights)?;
                let s = synthesize_gains_with(&observer.a_list(), &observer.c, &w, config.gains.design)?;
                ObserverGains::new(s.gains[0].clone(), s.gains[1].clone())?
            }
        };
        let observer = observer.with_gains(gains.clone());

        let trim = match (config.initial_plant.mode, config.controller.bias) {
            (InitMode::Trim, _) | (_, None) => {
                Some(operating_point(wind.at(0.0), &params, &aero, &config.controller)?)
            }
            _ => None,
        };
        let plant0 = match config.initial_plant.mode {
            InitMode::Trim => trim.expect("computed for trim mode").state,
            InitMode::Explicit => config.initial_plant.state(),
        };
        let bias = config
            .controller
            .bias
            .unwrap_or_else(|| trim.expect("computed without bias").state.beta);
        let controller =
            PitchController::new(config.controller.clone(), bias.clamp(config.controller.min_pitch, config.controller.max_pitch))?;
        let o = &config.initial_observer;
        let observer0 = match o.mode {
            ObserverInit::Explicit => ObserverState {
                theta_s_hat: o.theta_s_hat,
                omega_r_hat: o.omega_r_hat,
                omega_g_hat: o.omega_g_hat,
                v_hat: o.v_hat,
            },
            ObserverInit::Exact => ObserverState {
                theta_s_hat: plant0.theta_s,
                omega_r_hat: plant0.omega_r,
                omega_g_hat: plant0.omega_g,
                v_hat: wind.at(0.0),
            },
        };
        Ok(Self {
            config: config.clone(),
            params,
            aero,
            wind,
            observer,
            gains,
            controller,
            plant0,
            observer0,
        })
    }
}

#[derive(Debug, Clone)]
pub struct SimOutput {
    pub trace: SimTrace,
    pub metrics: MetricsReport,
    /// Times at which the v̂ clamp engaged (s)
    pub clamp_times: Vec<f64>,
}

/// A run aborted by a numerical failure, with everything recorded before it.
#[derive(Debug)]
pub struct SimFailure {
    pub error: Error,
    pub trace: SimTrace,
}

impl From<Error> for SimFailure {
    fn from(error: Error) -> Self {
        Self {
            error,
            trace: SimTrace::default(),
        }
    }
}

pub fn run_closed_loop(config: &SimConfig) -> std::result::Result<SimOutput, SimFailure> {
    let setup = SimSetup::new(config)?;
    run_setup(setup)
}

fn noise_source(cfg: &config::NoiseConfig) -> Result<Option<(ChaCha8Rng, [Normal<f64>; 3])>> {
    if !cfg.enabled {
        return Ok(None);
    }
    let mk = |s: f64| Normal::new(0.0, s).map_err(|e| Error::InvalidParameter(format!("noise: {e}")));
    Ok(Some((
        ChaCha8Rng::seed_from_u64(cfg.seed),
        [mk(cfg.theta_s)?, mk(cfg.omega_r)?, mk(cfg.omega_g)?],
    )))
}

pub fn run_setup(setup: SimSetup) -> std::result::Result<SimOutput, SimFailure> {
    let SimSetup {
        config,
        params,
        aero,
        wind,
        observer,
        gains,
        mut controller,
        plant0,
        observer0,
    } = setup;
    let dt = config.dt;
    let steps = (config.duration / dt).round() as usize;
    let mut noise = noise_source(&config.noise)?;
    let mut measure = |x: &PlantState, theta: f64| {
        let mut y = Measurement {
            theta_s: theta,
            omega_r: x.omega_r,
            omega_g: x.omega_g,
        };
        if let Some((rng, d)) = noise.as_mut() {
            y.theta_s += d[0].sample(rng);
            y.omega_r += d[1].sample(rng);
            y.omega_g += d[2].sample(rng);
        }
        y
    };

    let mut trace = SimTrace {
        dt,
        rows: Vec::with_capacity(steps + 1),
    };
    let mut clamp_times = Vec::new();
    let mut x = plant0;
    let mut xh = observer0;
    if xh.clamp_wind() {
        clamp_times.push(0.0);
    }
    let mut theta_meas = x.theta_s;
    let mut y = measure(&x, theta_meas);
    let mut u: ControlInput = controller.output();
    let mut v_bar = observer.v_bar;
    let mut rolling = match config.v_bar.mode {
        VBarMode::Rolling => Some(RollingMean::new(dt, config.v_bar.window)?),
        VBarMode::Fixed => None,
    };
    if let Some(r) = rolling.as_mut() {
        r.push(v_bar);
    }
    let mut warned_reverse = false;

    let record = |t: f64, x: &PlantState, xh: &ObserverState, u: &ControlInput| TraceRow {
        t,
        v_true: wind.at(t),
        v_hat: xh.v_hat,
        omega_r: x.omega_r,
        omega_r_hat: xh.omega_r_hat,
        omega_g: x.omega_g,
        omega_g_hat: xh.omega_g_hat,
        theta_s: x.theta_s,
        theta_s_hat: xh.theta_s_hat,
        beta: x.beta,
        beta_d: u.beta_d,
        t_g: u.t_gen,
        h1: observer_memberships(xh, u.beta_d, &observer, &params, &aero).0,
    };
    trace.rows.push(record(0.0, &x, &xh, &u));

    for k in 0..steps {
        let t = k as f64 * dt;
        let plant = rk4_step(
            |s, xs| plant_derivative(&PlantState::from_vector(xs), &u, wind.at(s), &params, &aero).to_vector(),
            &x.to_vector(),
            t,
            dt,
        );
        let x1 = match plant {
            Ok(v) => PlantState::from_vector(&v),
            Err(error) => return Err(SimFailure { error, trace }),
        };
        let theta1 = theta_meas + 0.5 * dt * ((x.omega_r - x.omega_g) + (x1.omega_r - x1.omega_g));
        let y1 = measure(&x1, theta1);
        let y0 = y;
        let obs = rk4_step(
            |s, xs| {
                let ys = y0.lerp(&y1, (s - t) / dt);
                let st = ObserverState::from_vector(xs);
                let h = observer_memberships(&st, u.beta_d, &observer, &params, &aero);
                observer_rate_with_memberships(xs, &ys, u.t_gen, v_bar, h, &observer, &gains)
            },
            &xh.to_vector(),
            t,
            dt,
        );
        let mut xh1 = match obs {
            Ok(v) => ObserverState::from_vector(&v),
            Err(error) => return Err(SimFailure { error, trace }),
        };
        let t1 = (k + 1) as f64 * dt;
        if xh1.clamp_wind() {
            if clamp_times.is_empty() || t1 >= config.transient_cutoff {
                log::debug!("v_hat clamped at t = {t1:.3} s");
            }
            clamp_times.push(t1);
        }
        if x1.omega_r < 0.0 && !warned_reverse {
            log::warn!("rotor speed became negative at t = {t1:.3} s");
            warned_reverse = true;
        }
        if let Some(r) = rolling.as_mut() {
            v_bar = r.push(xh1.v_hat);
        }
        u = controller.update(y1.omega_g, dt);
        x = x1;
        xh = xh1;
        theta_meas = theta1;
        y = y1;
        if !(x.is_finite() && xh.is_finite()) {
            return Err(SimFailure {
                error: Error::NonFinite {
                    t: t1,
                    what: "plant or observer state".into(),
                },
                trace,
            });
        }
        trace.rows.push(record(t1, &x, &xh, &u));
    }
    if !clamp_times.is_empty() {
        log::info!("v_hat clamp engaged {} times", clamp_times.len());
    }
    let metrics = match compute_metrics(&trace, config.transient_cutoff, config.settle_band, &clamp_times) {
        Ok(m) => m,
        Err(error) => return Err(SimFailure { error, trace }),
    };
    Ok(SimOutput {
        trace,
        metrics,
        clamp_times,
    })
}
