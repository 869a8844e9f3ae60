//! Four-state TS disturbance observer for (θ_s, ω_r, ω_g, v).
//!
//! The wind speed is modelled as a first-order lag toward a mean v̄ and
//! enters the rotor equation through f(v̂, ω̂_r, β_d) · v̂ with
//! f = ρπR³ v̂ C_Q(λ̂, β_d) / (2 J_r). Two rules cover f ∈ [f_min, f_max]:
//! rule 1 sits at f_max, rule 2 at f_min.

use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SVector};

use crate::aero::{AeroMap, CQ_MAX, CQ_MIN};
use crate::error::{Error, Result};
use crate::params::TurbineParams;
use crate::plant::tip_speed_ratio;
use crate::ts::{sector_weights, PremiseFn, SectorBounds, SectorTerm, TsModel};

/// Lower edge of the wind-speed envelope (m/s).
pub const V_HAT_MIN: f64 = 1.0;
/// Upper edge of the wind-speed envelope (m/s).
pub const V_HAT_MAX: f64 = 60.0;

pub type ObserverVector = SVector<f64, 4>;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ObserverState {
    pub theta_s_hat: f64,
    pub omega_r_hat: f64,
    pub omega_g_hat: f64,
    pub v_hat: f64,
}

impl ObserverState {
    pub fn to_vector(&self) -> ObserverVector {
        ObserverVector::new(self.theta_s_hat, self.omega_r_hat, self.omega_g_hat, self.v_hat)
    }

    pub fn from_vector(x: &ObserverVector) -> Self {
        Self {
            theta_s_hat: x[0],
            omega_r_hat: x[1],
            omega_g_hat: x[2],
            v_hat: x[3],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.to_vector().iter().all(|v| v.is_finite())
    }

    /// Clamp v̂ into [[`V_HAT_MIN`], [`V_HAT_MAX`]]; true if it moved.
    pub fn clamp_wind(&mut self) -> bool {
        let c = self.v_hat.clamp(V_HAT_MIN, V_HAT_MAX);
        let moved = c != self.v_hat;
        self.v_hat = c;
        moved
    }
}

/// Measured outputs y = C x.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Measurement {
    pub theta_s: f64,
    pub omega_r: f64,
    pub omega_g: f64,
}

impl Measurement {
    pub fn to_vector(&self) -> SVector<f64, 3> {
        SVector::<f64, 3>::new(self.theta_s, self.omega_r, self.omega_g)
    }

    /// Componentwise `a + s (b − a)`.
    pub fn lerp(&self, other: &Measurement, s: f64) -> Measurement {
        Measurement {
            theta_s: self.theta_s + s * (other.theta_s - self.theta_s),
            omega_r: self.omega_r + s * (other.omega_r - self.omega_r),
            omega_g: self.omega_g + s * (other.omega_g - self.omega_g),
        }
    }
}

/// L_1 and L_2, each 4×3.
#[derive(Debug, Clone, PartialEq)]
pub struct ObserverGains {
    pub l1: DMatrix<f64>,
    pub l2: DMatrix<f64>,
}

impl ObserverGains {
    pub fn new(l1: DMatrix<f64>, l2: DMatrix<f64>) -> Result<Self> {
        for (name, l) in [("L1", &l1), ("L2", &l2)] {
            if l.shape() != (4, 3) {
                return Err(Error::Dimension(format!("{name} is {:?}, expected (4, 3)", l.shape())));
            }
            if l.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} has non-finite entries")));
            }
        }
        Ok(Self { l1, l2 })
    }

    pub fn as_slice(&self) -> [&DMatrix<f64>; 2] {
        [&self.l1, &self.l2]
    }

    /// The published rounded gains; the same matrix serves both rules.
    pub fn published_preset() -> Self {
        let l = DMatrix::from_row_slice(
            4,
            3,
            &[
                0.147, -176.5, 143.6, //
                -0.022, 133.0, -28.6, //
                0.183, -286.1, 303.2, //
                0.08, 6698.1, 741.2,
            ],
        );
        Self { l1: l.clone(), l2: l }
    }

    /// Parse the gain file format: eight rows of three numbers, L1 then L2,
    /// with `#` starting a comment and blank lines ignored.
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let mut values = Vec::with_capacity(24);
        let mut rows = 0;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let row: Vec<f64> = line
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|s| !s.is_empty())
                .map(|s| {
                    s.parse::<f64>().map_err(|e| {
                        Error::parse(origin, format!("line {}: '{s}': {e}", lineno + 1))
                    })
                })
                .collect::<Result<_>>()?;
            if row.len() != 3 {
                return Err(Error::parse(
                    origin,
                    format!("line {}: expected 3 columns, found {}", lineno + 1, row.len()),
                ));
            }
            values.extend(row);
            rows += 1;
        }
        if rows != 8 {
            return Err(Error::parse(origin, format!("expected 8 gain rows, found {rows}")));
        }
        let l1 = DMatrix::from_row_slice(4, 3, &values[..12]);
        let l2 = DMatrix::from_row_slice(4, 3, &values[12..]);
        Self::new(l1, l2).map_err(|e| Error::parse(origin, e.to_string()))
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    /// Serialize in the format read by [`ObserverGains::parse`]. `comment`
    /// lines are written first, each prefixed with `# `.
    pub fn to_text(&self, comment: &str) -> String {
        let mut out = String::new();
        for line in comment.lines() {
            let _ = writeln!(out, "# {line}");
        }
        for (name, l) in [("L1", &self.l1), ("L2", &self.l2)] {
            let _ = writeln!(out, "# {name}");
            for i in 0..4 {
                let _ = writeln!(out, "{} {} {}", l[(i, 0)], l[(i, 1)], l[(i, 2)]);
            }
        }
        out
    }
}

/// ρπR³/(2 J_r), so that f = c · v̂ · C_Q.
pub fn premise_scale(params: &TurbineParams) -> f64 {
    params.torque_factor() / params.j_rotor
}

/// [f_min, f_max] from the wind envelope and the torque-coefficient clamp.
pub fn derived_sector_bounds(params: &TurbineParams) -> Result<SectorBounds> {
    let c = premise_scale(params);
    SectorBounds::new(c * V_HAT_MIN * CQ_MIN, c * V_HAT_MAX * CQ_MAX)
}

/// Unclamped f for a given torque coefficient.
pub fn premise_from_cq(v_hat: f64, cq: f64, params: &TurbineParams) -> f64 {
    premise_scale(params) * v_hat * cq
}

/// f(v̂, ω̂_r, β_d) clamped into `bounds` (1/(m·s)).
pub fn premise_f(
    v_hat: f64,
    omega_r_hat: f64,
    beta_d: f64,
    params: &TurbineParams,
    aero: &AeroMap,
    bounds: &SectorBounds,
) -> f64 {
    let lambda = tip_speed_ratio(omega_r_hat, v_hat, params);
    let cq = aero.eval(lambda, beta_d).cq;
    bounds.clamp(premise_from_cq(v_hat, cq, params))
}

/// −(v̂ − v̄)/τ_v.
pub fn wind_model_derivative(v_hat: f64, v_bar: f64, tau_v: f64) -> f64 {
    -(v_hat - v_bar) / tau_v
}

/// Observer system matrix A(f).
pub fn observer_system_matrix(f: f64, params: &TurbineParams) -> DMatrix<f64> {
    let p = params;
    let mut a = DMatrix::zeros(4, 4);
    a[(0, 1)] = 1.0;
    a[(0, 2)] = -1.0;
    a[(1, 0)] = -p.k_shaft / p.j_rotor;
    a[(1, 1)] = -p.d_shaft / p.j_rotor;
    a[(1, 2)] = p.d_shaft / p.j_rotor;
    a[(1, 3)] = f;
    a[(2, 0)] = p.k_shaft / p.j_gen;
    a[(2, 1)] = p.d_shaft / p.j_gen;
    a[(2, 2)] = -p.d_shaft / p.j_gen;
    a[(3, 3)] = -1.0 / p.tau_wind;
    a
}

/// Input matrix for u = (T_g, v̄).
pub fn observer_input_matrix(params: &TurbineParams) -> DMatrix<f64> {
    let mut b = DMatrix::zeros(4, 2);
    b[(2, 0)] = -1.0 / params.j_gen;
    b[(3, 1)] = 1.0 / params.tau_wind;
    b
}

/// C = [I₃ | 0].
pub fn observer_output_matrix() -> DMatrix<f64> {
    DMatrix::from_fn(3, 4, |i, j| if i == j { 1.0 } else { 0.0 })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObserverConfig {
    pub a1: DMatrix<f64>,
    pub a2: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub c: DMatrix<f64>,
    pub gains: Option<ObserverGains>,
    pub bounds: SectorBounds,
    pub tau_v: f64,
    /// Fixed mean wind used when no rolling mean is supplied (m/s)
    pub v_bar: f64,
}

impl ObserverConfig {
    pub fn with_gains(mut self, gains: ObserverGains) -> Self {
        self.gains = Some(gains);
        self
    }

    pub fn a_list(&self) -> [DMatrix<f64>; 2] {
        [self.a1.clone(), self.a2.clone()]
    }
}

/// Vertex matrices without gains, with v̄ initialised to `v_bar`.
pub fn build_observer_submodels(
    params: &TurbineParams,
    bounds: SectorBounds,
    v_bar: f64,
) -> Result<ObserverConfig> {
    params.validate()?;
    Ok(ObserverConfig {
        a1: observer_system_matrix(bounds.f_max(), params),
        a2: observer_system_matrix(bounds.f_min(), params),
        b: observer_input_matrix(params),
        c: observer_output_matrix(),
        gains: None,
        bounds,
        tau_v: params.tau_wind,
        v_bar,
    })
}

/// Generic TS model of the observer plant with β_d frozen at `beta_d`.
/// State is (θ̂_s, ω̂_r, ω̂_g, v̂), input is (T_g, v̄).
pub fn observer_ts_model(
    params: &TurbineParams,
    bounds: SectorBounds,
    aero: AeroMap,
    beta_d: f64,
) -> Result<TsModel> {
    let mut a_dir = DMatrix::zeros(4, 4);
    a_dir[(1, 3)] = 1.0;
    let p = *params;
    let premise: PremiseFn = Arc::new(move |x: &DVector<f64>, _u: &DVector<f64>| {
        vec![premise_f(x[3], x[1], beta_d, &p, &aero, &bounds)]
    });
    TsModel::from_sector_terms(
        observer_system_matrix(0.0, params),
        observer_input_matrix(params),
        observer_output_matrix(),
        vec![SectorTerm {
            bounds,
            a_dir,
            b_dir: None,
        }],
        premise,
    )
}

/// Memberships (h_1, h_2) at the current estimate.
pub fn observer_memberships(
    x_hat: &ObserverState,
    beta_d: f64,
    config: &ObserverConfig,
    params: &TurbineParams,
    aero: &AeroMap,
) -> (f64, f64) {
    let f = premise_f(x_hat.v_hat, x_hat.omega_r_hat, beta_d, params, aero, &config.bounds);
    sector_weights(f, &config.bounds)
}

/// Σ h_i (A_i x̂ + B u + L_i (y − C x̂)) with fixed memberships `h`.
pub fn observer_rate_with_memberships(
    x_hat: &ObserverVector,
    y: &Measurement,
    t_gen: f64,
    v_bar: f64,
    h: (f64, f64),
    config: &ObserverConfig,
    gains: &ObserverGains,
) -> ObserverVector {
    let x = DVector::from_column_slice(x_hat.as_slice());
    let u = DVector::from_column_slice(&[t_gen, v_bar]);
    let e = DVector::from_column_slice(y.to_vector().as_slice()) - &config.c * &x;
    let bu = &config.b * &u;
    let r1 = &config.a1 * &x + &bu + &gains.l1 * &e;
    let r2 = &config.a2 * &x + &bu + &gains.l2 * &e;
    let r = r1 * h.0 + r2 * h.1;
    ObserverVector::from_column_slice(r.as_slice())
}

/// Observer right-hand side for u = (T_g, v̄) and exogenous β_d.
#[allow(clippy::too_many_arguments)]
pub fn observer_derivative(
    x_hat: &ObserverState,
    y: &Measurement,
    t_gen: f64,
    v_bar: f64,
    beta_d: f64,
    config: &ObserverConfig,
    params: &TurbineParams,
    aero: &AeroMap,
) -> Result<ObserverVector> {
    let gains = config
        .gains
        .as_ref()
        .ok_or_else(|| Error::InvalidParameter("observer gains are not set".into()))?;
    let h = observer_memberships(x_hat, beta_d, config, params, aero);
    Ok(observer_rate_with_memberships(
        &x_hat.to_vector(),
        y,
        t_gen,
        v_bar,
        h,
        config,
        gains,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::is_hurwitz;
    use crate::ts::ts_blend;

    fn p() -> TurbineParams {
        TurbineParams::default()
    }

    fn config() -> ObserverConfig {
        let p = p();
        build_observer_submodels(&p, derived_sector_bounds(&p).unwrap(), 18.0)
            .unwrap()
            .with_gains(ObserverGains::published_preset())
    }

    #[test]
    fn sector_bound_values() {
        let b = derived_sector_bounds(&p()).unwrap();
        assert!((b.f_max() - 0.0559).abs() / 0.0559 < 2e-3);
        assert!((b.f_min() - 1.2414e-5).abs() / 1.2414e-5 < 2e-3);
        let f18 = premise_from_cq(18.0, 0.04, &p());
        assert!((f18 - 8.938e-3).abs() / 8.938e-3 < 1e-3);
    }

    #[test]
    fn premise_is_clamped() {
        let b = derived_sector_bounds(&p()).unwrap();
        let hi = AeroMap::constant(0.0751, 0.0);
        assert_eq!(premise_f(200.0, 1.0, 0.0, &p(), &hi, &b), b.f_max());
        let lo = AeroMap::constant(0.001, 0.0);
        assert_eq!(premise_f(0.2, 1.0, 0.0, &p(), &lo, &b), b.f_min());
    }

    #[test]
    fn submodel_layout() {
        let c = config();
        assert_eq!(c.a1[(0, 1)], 1.0);
        assert_eq!(c.a1[(0, 2)], -1.0);
        assert_eq!(c.a1[(3, 3)], -0.25);
        assert!((c.b[(2, 0)] + 1.9899e-7).abs() < 1e-11);
        let diff = &c.a1 - &c.a2;
        for i in 0..4 {
            for j in 0..4 {
                if (i, j) != (1, 3) {
                    assert_eq!(diff[(i, j)], 0.0);
                }
            }
        }
        assert_eq!(c.c, observer_output_matrix());
        assert_eq!(c.c[(2, 2)], 1.0);
        assert_eq!(c.c.column(3).amax(), 0.0);
    }

    #[test]
    fn wind_model() {
        assert_eq!(wind_model_derivative(18.0, 18.0, 4.0), 0.0);
        assert_eq!(wind_model_derivative(1.0, 18.0, 4.0), 4.25);
    }

    #[test]
    fn published_gains_stabilize_every_fixed_membership() {
        let c = config();
        let l = ObserverGains::published_preset();
        for h in [(1.0, 0.0), (0.0, 1.0), (0.5, 0.5)] {
            let m = (&c.a1 - &l.l1 * &c.c) * h.0 + (&c.a2 - &l.l2 * &c.c) * h.1;
            assert!(is_hurwitz(&m), "h = {h:?}");
        }
    }

    #[test]
    fn correction_vanishes_on_matching_output() {
        let c = config();
        let aero = AeroMap::default();
        let x = ObserverState {
            theta_s_hat: 1e-3,
            omega_r_hat: 1.2,
            omega_g_hat: 1.21,
            v_hat: 15.0,
        };
        let y = Measurement {
            theta_s: x.theta_s_hat,
            omega_r: x.omega_r_hat,
            omega_g: x.omega_g_hat,
        };
        let rate = observer_derivative(&x, &y, 4e6, 18.0, 5.0, &c, &p(), &aero).unwrap();
        let model = observer_ts_model(&p(), c.bounds, aero, 5.0).unwrap();
        let xv = DVector::from_column_slice(x.to_vector().as_slice());
        let open = model.derivative(&xv, &DVector::from_column_slice(&[4e6, 18.0]));
        for i in 0..4 {
            assert!((rate[i] - open[i]).abs() <= 1e-12 * open[i].abs().max(1.0));
        }
    }

    #[test]
    fn correction_isolates_first_gain_column() {
        let c = config();
        let y = Measurement {
            theta_s: 1.0,
            ..Measurement::default()
        };
        let r = observer_rate_with_memberships(
            &ObserverVector::zeros(),
            &y,
            0.0,
            0.0,
            (1.0, 0.0),
            &c,
            c.gains.as_ref().unwrap(),
        );
        for i in 0..4 {
            assert_eq!(r[i], c.gains.as_ref().unwrap().l1[(i, 0)]);
        }
    }

    #[test]
    fn missing_gains_are_rejected() {
        let p = p();
        let c = build_observer_submodels(&p, derived_sector_bounds(&p).unwrap(), 18.0).unwrap();
        let r = observer_derivative(
            &ObserverState::default(),
            &Measurement::default(),
            0.0,
            18.0,
            0.0,
            &c,
            &p,
            &AeroMap::default(),
        );
        assert!(matches!(r, Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn steady_state_under_constant_inputs() {
        // Newton on F(x) = rate with finite-difference Jacobian
        let c = config();
        let aero = AeroMap::default();
        let p = p();
        let y = Measurement {
            theta_s: 4.8e-3,
            omega_r: 1.267,
            omega_g: 1.267,
        };
        let (tg, vb, bd) = (4.18e6, 18.0, 10.0);
        let rate = |x: &ObserverVector| {
            observer_derivative(&ObserverState::from_vector(x), &y, tg, vb, bd, &c, &p, &aero).unwrap()
        };
        let mut x = ObserverVector::new(y.theta_s, y.omega_r, y.omega_g, 18.0);
        for _ in 0..50 {
            let f0 = rate(&x);
            let mut jac = nalgebra::SMatrix::<f64, 4, 4>::zeros();
            for j in 0..4 {
                let h = 1e-7 * x[j].abs().max(1e-3);
                let mut xp = x;
                xp[j] += h;
                jac.set_column(j, &((rate(&xp) - f0) / h));
            }
            let dx = jac.lu().solve(&(-f0)).unwrap();
            x += dx;
            if dx.amax() < 1e-14 {
                break;
            }
        }
        assert!(rate(&x).amax() < 1e-9, "residual {}", rate(&x).amax());
    }

    #[test]
    fn exactness_over_premise_samples() {
        let p = p();
        let b = derived_sector_bounds(&p).unwrap();
        let aero = AeroMap::default();
        let mut samples = Vec::new();
        for i in 0..40 {
            for j in 0..30 {
                let v = 1.0 + 59.0 * i as f64 / 39.0;
                let beta = 30.0 * j as f64 / 29.0;
                samples.push((v, 0.3 + 0.05 * j as f64, beta));
            }
        }
        let model = observer_ts_model(&p, b, aero.clone(), 0.0).unwrap();
        // β_d varies per sample, so the premise is evaluated directly
        let dev = crate::ts::exactness_check(
            &model,
            &samples,
            |&(v, w, beta)| vec![premise_f(v, w, beta, &p, &aero, &b)],
            |&(v, w, beta)| observer_system_matrix(premise_f(v, w, beta, &p, &aero, &b), &p),
        )
        .unwrap();
        assert!(dev <= 1e-12, "deviation {dev}");
        let h = model.memberships(&[b.f_max()]).unwrap();
        assert_eq!(ts_blend(&model, &h).unwrap().0, c_a1());
    }

    fn c_a1() -> DMatrix<f64> {
        config().a1
    }

    #[test]
    fn gain_file_round_trip() {
        let g = ObserverGains::published_preset();
        let text = g.to_text("published preset\nrounded");
        assert!(text.starts_with("# published preset\n# rounded\n"));
        assert_eq!(ObserverGains::parse(&text, "mem").unwrap(), g);
    }

    #[test]
    fn gain_file_rejects_bad_shape() {
        assert!(ObserverGains::parse("1 2 3\n", "mem").is_err());
        let mut text = ObserverGains::published_preset().to_text("");
        text.push_str("1 2\n");
        assert!(ObserverGains::parse(&text, "mem").is_err());
        assert!(ObserverGains::parse(&"1 2 x\n".repeat(8), "mem").is_err());
    }
}
