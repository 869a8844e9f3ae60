//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any
//! failure. Runs without the libtest harness.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tswind::aero::{AeroMap, CQ_MAX, CQ_MIN};
use tswind::certificate::{
    estimate_mu, lmi_feasibility_search, logspace, observer_lmi_check, StabilityCertificate,
};
use tswind::commands::{pendulum_trajectory_deviation, OBSERVER_INPUT_BOX, OBSERVER_STATE_BOX};
use tswind::design::{
    build_weight_matrices, care_residual, care_solve, relative_gain_difference, synthesize_gains,
    WeightSet,
};
use tswind::linalg::{is_hurwitz, spectral_abscissa};
use tswind::observer::{
    build_observer_submodels, derived_sector_bounds, observer_system_matrix, observer_ts_model,
    premise_f, premise_from_cq, ObserverGains,
};
use tswind::params::TurbineParams;
use tswind::sim::config::{ObserverInit, SimConfig};
use tswind::sim::metrics::{envelope_decays, error_envelope};
use tswind::sim::run_closed_loop;
use tswind::structural::{tower_stiffness, TowerModel};
use tswind::ts::{build_pendulum_fixture, exactness_check, pendulum_f, pendulum_nonlinear_a};
use tswind::wind::WindKind;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome, Duration);

fn within(x: f64, target: f64, rel: f64) -> bool {
    ((x - target) / target).abs() <= rel
}

fn verdict(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn observer_vertices() -> Result<([DMatrix<f64>; 2], DMatrix<f64>), String> {
    let p = TurbineParams::default();
    let bounds = derived_sector_bounds(&p).map_err(|e| e.to_string())?;
    let cfg = build_observer_submodels(&p, bounds, 18.0).map_err(|e| e.to_string())?;
    Ok((cfg.a_list(), cfg.c))
}

fn sector_bounds() -> Outcome {
    let p = TurbineParams::default();
    let b = derived_sector_bounds(&p).map_err(|e| e.to_string())?;
    // a constant map pins C_Q regardless of λ and β
    let hi = premise_f(60.0, 1.0, 0.0, &p, &AeroMap::constant(CQ_MAX, 0.0), &b);
    let lo = premise_f(1.0, 1.0, 0.0, &p, &AeroMap::constant(CQ_MIN, 0.0), &b);
    verdict(
        within(hi, 0.0559, 2e-3) && within(lo, 1.2414e-5, 2e-3),
        format!("f_max = {hi:.6e}, f_min = {lo:.6e}"),
    )
}

fn tower_chain() -> Outcome {
    let s = tower_stiffness(&TowerModel::default()).map_err(|e| e.to_string())?;
    verdict(
        (2.08..=2.20).contains(&s.omega1) && within(s.b_total, 4.44e11, 0.01) && within(s.k_spring, 1.98e6, 0.02),
        format!("omega1 = {:.4} rad/s, B = {:.4e} N m^2, k = {:.4e} N/m", s.omega1, s.b_total, s.k_spring),
    )
}

fn published_gains() -> Outcome {
    let (a, c) = observer_vertices()?;
    let g = ObserverGains::published_preset();
    let s1 = spectral_abscissa(&(&a[0] - &g.l1 * &c));
    let s2 = spectral_abscissa(&(&a[1] - &g.l2 * &c));
    verdict(s1 < -1e-9 && s2 < -1e-9, format!("max Re eig: {s1:.4}, {s2:.4}"))
}

fn synthesized_gains() -> Outcome {
    let (a, c) = observer_vertices()?;
    let w = build_weight_matrices(&WeightSet::default()).map_err(|e| e.to_string())?;
    let g = synthesize_gains(&a, &c, &w).map_err(|e| e.to_string())?;
    let diff = relative_gain_difference(&g.gains[0], &g.gains[1]);
    let h1 = is_hurwitz(&(&a[0] - &g.gains[0] * &c));
    let h2 = is_hurwitz(&(&a[1] - &g.gains[1] * &c));
    verdict(diff < 0.05 && h1 && h2, format!("relative difference {diff:.3e}, hurwitz {h1}/{h2}"))
}

fn exactness() -> Outcome {
    let (l, g) = (1.0, 9.81);
    let pend = build_pendulum_fixture(1.0, l, g).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let pi = std::f64::consts::PI;
    let xs: Vec<f64> = (0..1000).map(|_| rng.random_range(-pi..pi)).collect();
    let d_pend = exactness_check(&pend, &xs, |&x| vec![pendulum_f(x, g, l)], |&x| pendulum_nonlinear_a(x, g, l))
        .map_err(|e| e.to_string())?;

    let p = TurbineParams::default();
    let aero = AeroMap::default();
    let bounds = derived_sector_bounds(&p).map_err(|e| e.to_string())?;
    let mut d_obs = 0.0_f64;
    for _ in 0..1000 {
        let (v, w, beta) = (rng.random_range(1.0..60.0), rng.random_range(0.3..1.6), rng.random_range(0.0..30.0));
        let model = observer_ts_model(&p, bounds, aero.clone(), beta).map_err(|e| e.to_string())?;
        let x = nalgebra::DVector::from_column_slice(&[0.0, w, w, v]);
        let u = nalgebra::DVector::zeros(2);
        let cq = aero.eval(p.radius * w / v, beta).cq;
        let d = exactness_check(
            &model,
            &[()],
            |_| model.premise_values(&x, &u),
            |_| observer_system_matrix(premise_from_cq(v, cq, &p), &p),
        )
        .map_err(|e| e.to_string())?;
        d_obs = d_obs.max(d);
    }
    verdict(
        d_pend <= 1e-12 && d_obs <= 1e-12,
        format!("pendulum {d_pend:.2e}, observer {d_obs:.2e} over 1000 samples each"),
    )
}

fn pendulum_trajectories() -> Outcome {
    let dev = pendulum_trajectory_deviation(20, 10.0, 0.001, 7).map_err(|e| e.to_string())?;
    verdict(dev <= 1e-6, format!("sup deviation {dev:.3e} over 20 runs"))
}

fn constant_convergence() -> Outcome {
    let cfg = SimConfig::default();
    let out = run_closed_loop(&cfg).map_err(|f| f.error.to_string())?;
    let worst = out
        .trace
        .rows
        .iter()
        .filter(|r| r.t > 20.0)
        .map(|r| (r.v_hat - 18.0).abs())
        .fold(0.0, f64::max);
    let env = error_envelope(&out.trace, 0.0, 10.0).map_err(|e| e.to_string())?;
    let decays = envelope_decays(&env, 1e-12);
    verdict(
        worst < 0.2 && decays,
        format!("max |v_hat - 18| after 20 s = {worst:.3e}, envelope non-increasing = {decays}"),
    )
}

fn gust_lag() -> Outcome {
    let mut cfg = SimConfig::default();
    cfg.scenario.kind = WindKind::Eog;
    cfg.initial_observer.mode = ObserverInit::Exact;
    let out = run_closed_loop(&cfg).map_err(|f| f.error.to_string())?;
    match out.metrics.lag {
        Some(l) => verdict((0.0..=1.0).contains(&l), format!("lag {l:.4} s")),
        None => Err("no significant correlation peak".into()),
    }
}

fn care() -> Outcome {
    let mut worst = 0.0_f64;
    // scalar: 2ap − b²p²/r + q = 0, stabilizing root p = r(a + √(a² + b²q/r))/b²
    let mut oracle_err = 0.0_f64;
    for (a, b, q, r) in [(1.0, 1.0, 1.0, 1.0), (-2.0, 0.5, 3.0, 0.25)] {
        let m = |x: f64| DMatrix::from_element(1, 1, x);
        let sol = care_solve(&m(a), &m(b), &m(q), &m(r)).map_err(|e| e.to_string())?;
        let p = r * (a + (a * a + b * b * q / r).sqrt()) / (b * b);
        oracle_err = oracle_err.max(((sol.p[(0, 0)] - p) / p).abs());
        worst = worst.max(sol.residual);
    }
    // dual problems of the observer design
    let (a, c) = observer_vertices()?;
    let w = build_weight_matrices(&WeightSet::default()).map_err(|e| e.to_string())?;
    let r_inv = w.r.clone().try_inverse().ok_or("R is singular")?;
    for ai in &a {
        let sol = care_solve(&ai.transpose(), &c.transpose(), &w.w, &w.r).map_err(|e| e.to_string())?;
        worst = worst.max(care_residual(&ai.transpose(), &c.transpose(), &w.w, &r_inv, &sol.p));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..20 {
        let a = DMatrix::from_fn(4, 4, |_, _| rng.random_range(-2.0..2.0));
        let b = DMatrix::from_fn(4, 2, |_, _| rng.random_range(-1.0..1.0));
        let g = DMatrix::from_fn(4, 4, |_, _| rng.random_range(-1.0..1.0));
        let q = &g * g.transpose() + DMatrix::identity(4, 4) * 0.1;
        let r = DMatrix::identity(2, 2);
        let sol = care_solve(&a, &b, &q, &r).map_err(|e| e.to_string())?;
        worst = worst.max(sol.residual);
    }
    verdict(
        worst < 1e-8 && oracle_err <= 1e-12,
        format!("max residual {worst:.2e}, scalar oracle relative error {oracle_err:.1e}"),
    )
}

fn certificate_checker() -> Outcome {
    let m = |x: f64| DMatrix::from_element(1, 1, x);
    let check = |a: f64, p: f64, q: f64, mu: f64| -> Result<bool, String> {
        let cert = StabilityCertificate::new(m(p), m(q), mu).map_err(|e| e.to_string())?;
        observer_lmi_check(&cert, &[m(a)], &[m(0.0)], &m(1.0)).map_err(|e| e.to_string())
    };
    // A = −2, P = 1, Q = 2, μ = 0.5: 2PA + Q = −2 and Q − μ² − P² = 0.75
    let accepts = check(-2.0, 1.0, 2.0, 0.5)?;
    let mut rejects = true;
    for (q, mu) in [(2.0, 2.0f64.sqrt()), (2.0, 1.5), (0.5, 1.0), (4.0, 2.0), (4.0, 10.0)] {
        rejects &= !check(-10.0, 0.01, q, mu)?;
    }
    let (a, c) = observer_vertices()?;
    let g = ObserverGains::published_preset();
    let p = TurbineParams::default();
    let bounds = derived_sector_bounds(&p).map_err(|e| e.to_string())?;
    let model = observer_ts_model(&p, bounds, AeroMap::default(), 0.0).map_err(|e| e.to_string())?;
    let mu = estimate_mu(&model, &OBSERVER_STATE_BOX, &OBSERVER_INPUT_BOX, 20_000, 2024).map_err(|e| e.to_string())?;
    let search = lmi_feasibility_search(&a, &[g.l1, g.l2], &c, mu, &logspace(1e-4, 1e4, 33)).map_err(|e| e.to_string())?;
    verdict(
        accepts && rejects && !search.feasible,
        format!(
            "scalar feasible accepted = {accepts}, mu^2 >= lambda_max(Q) rejected = {rejects}, observer grid feasible = {} (mu = {mu:.3e}, {} candidates)",
            search.feasible, search.candidates
        ),
    )
}

fn determinism() -> Outcome {
    let mut detail = Vec::new();
    let mut ok = true;
    for (name, kind) in [("turbulent", WindKind::Turbulent), ("eog", WindKind::Eog)] {
        let mut cfg = SimConfig::default();
        cfg.scenario.kind = kind;
        cfg.scenario.seed = 1234;
        cfg.duration = 60.0;
        cfg.noise.enabled = kind == WindKind::Turbulent;
        let a = run_closed_loop(&cfg).map_err(|f| f.error.to_string())?.trace.to_csv_string().map_err(|e| e.to_string())?;
        let b = run_closed_loop(&cfg).map_err(|f| f.error.to_string())?.trace.to_csv_string().map_err(|e| e.to_string())?;
        ok &= a == b;
        detail.push(format!("{name} identical = {}", a == b));
    }
    verdict(ok, detail.join(", "))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("sector-bound reproduction", sector_bounds, Duration::from_secs(1)),
        ("tower stiffness chain", tower_chain, Duration::from_secs(1)),
        ("published gains Hurwitz", published_gains, Duration::from_secs(1)),
        ("synthesized gains", synthesized_gains, Duration::from_secs(1)),
        ("TS exactness", exactness, Duration::from_secs(1)),
        ("pendulum trajectory equivalence", pendulum_trajectories, Duration::from_secs(30)),
        ("closed-loop convergence", constant_convergence, Duration::from_secs(10)),
        ("gust lag", gust_lag, Duration::from_secs(10)),
        ("CARE correctness", care, Duration::from_secs(1)),
        ("certificate checker soundness", certificate_checker, Duration::from_secs(5)),
        ("determinism", determinism, Duration::from_secs(20)),
    ];
    let mut failed = 0;
    for (k, (name, run, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let took = start.elapsed();
        let (ok, detail) = match outcome {
            Ok(d) => (took <= *budget, d),
            Err(d) => (false, d),
        };
        if !ok {
            failed += 1;
        }
        println!(
            "{} {:2} {name}: {detail} [{:.2} s, budget {} s]",
            if ok { "PASS" } else { "FAIL" },
            k + 1,
            took.as_secs_f64(),
            budget.as_secs()
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
