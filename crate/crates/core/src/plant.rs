//! Reduced-order nonlinear turbine: tower fore-aft, blade flap, two-mass
//! drivetrain and first-order pitch actuator.

use nalgebra::{SMatrix, SVector};

use crate::aero::AeroMap;
use crate::params::TurbineParams;

/// Below this wind speed (m/s) the rotor sees no aerodynamic load.
pub const V_FLOOR: f64 = 0.5;
/// Tip speed ratio reported when the wind speed is below [`V_FLOOR`].
pub const LAMBDA_CAP: f64 = 20.0;

pub type PlantVector = SVector<f64, 8>;

/// Plant state. Pitch is in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PlantState {
    /// Tower-top fore-aft deflection (m)
    pub y_tower: f64,
    /// Blade-tip flapwise deflection (m)
    pub y_blade: f64,
    /// Shaft torsion angle θ_r − θ_g (rad)
    pub theta_s: f64,
    /// Tower-top velocity (m/s)
    pub dy_tower: f64,
    /// Blade-tip velocity (m/s)
    pub dy_blade: f64,
    /// Rotor speed (rad/s)
    pub omega_r: f64,
    /// Generator speed, rotor side (rad/s)
    pub omega_g: f64,
    /// Pitch angle (deg)
    pub beta: f64,
}

impl PlantState {
    pub fn to_vector(&self) -> PlantVector {
        PlantVector::from([
            self.y_tower,
            self.y_blade,
            self.theta_s,
            self.dy_tower,
            self.dy_blade,
            self.omega_r,
            self.omega_g,
            self.beta,
        ])
    }

    pub fn from_vector(x: &PlantVector) -> Self {
        Self {
            y_tower: x[0],
            y_blade: x[1],
            theta_s: x[2],
            dy_tower: x[3],
            dy_blade: x[4],
            omega_r: x[5],
            omega_g: x[6],
            beta: x[7],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.to_vector().iter().all(|v| v.is_finite())
    }
}

/// Demanded pitch (deg) and generator torque (N·m).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ControlInput {
    pub beta_d: f64,
    pub t_gen: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AeroForces {
    /// Rotor thrust (N)
    pub thrust: f64,
    /// Aerodynamic rotor torque (N·m)
    pub torque: f64,
}

pub fn tip_speed_ratio(omega_r: f64, v: f64, params: &TurbineParams) -> f64 {
    if v < V_FLOOR {
        LAMBDA_CAP
    } else {
        params.radius * omega_r / v
    }
}

pub fn aero_forces(
    v: f64,
    omega_r: f64,
    beta_deg: f64,
    params: &TurbineParams,
    aero: &AeroMap,
) -> AeroForces {
    if v < V_FLOOR {
        return AeroForces {
            thrust: 0.0,
            torque: 0.0,
        };
    }
    let c = aero.eval(tip_speed_ratio(omega_r, v, params), beta_deg);
    forces_from_coefficients(v, c.cq, c.ct, params)
}

/// F_T = (ρπR²/2) C_T v², T_a = (ρπR³/2) C_Q v².
pub fn forces_from_coefficients(v: f64, cq: f64, ct: f64, params: &TurbineParams) -> AeroForces {
    let v2 = v * v;
    AeroForces {
        thrust: params.thrust_factor() * ct * v2,
        torque: params.torque_factor() * cq * v2,
    }
}

/// Centrifugal blade stiffening α m_B r_B ω_r² (N/m).
pub fn centrifugal_stiffness(omega_r: f64, params: &TurbineParams) -> f64 {
    params.alpha * params.m_blade * params.r_blade * omega_r * omega_r
}

/// Effective blade stiffness k_B + α m_B r_B ω_r².
pub fn effective_blade_stiffness(omega_r: f64, params: &TurbineParams) -> f64 {
    params.k_blade + centrifugal_stiffness(omega_r, params)
}

/// State derivative with explicitly supplied aerodynamic loads.
pub fn derivative_with_forces(
    x: &PlantState,
    u: &ControlInput,
    forces: AeroForces,
    params: &TurbineParams,
) -> PlantState {
    let p = params;
    let n = p.n_blades;
    let k_b = effective_blade_stiffness(x.omega_r, p);
    let coupling = (p.m_tower + n * p.m_blade) / (p.m_blade * p.m_tower);
    let shaft = p.d_shaft * (x.omega_r - x.omega_g) + p.k_shaft * x.theta_s;
    PlantState {
        y_tower: x.dy_tower,
        y_blade: x.dy_blade,
        theta_s: x.omega_r - x.omega_g,
        dy_tower: (-p.k_tower * x.y_tower + n * k_b * x.y_blade - p.d_tower * x.dy_tower
            + n * p.d_blade * x.dy_blade)
            / p.m_tower,
        dy_blade: p.k_tower / p.m_tower * x.y_tower - coupling * k_b * x.y_blade
            + p.d_tower / p.m_tower * x.dy_tower
            - (1.0 / p.m_blade + n / p.m_tower) * p.d_blade * x.dy_blade
            + forces.thrust / (n * p.m_blade),
        omega_r: (forces.torque - shaft) / p.j_rotor,
        omega_g: (shaft - u.t_gen) / p.j_gen,
        beta: (u.beta_d - x.beta) / p.tau_pitch,
    }
}

/// Full nonlinear state derivative at wind speed `v`.
pub fn plant_derivative(
    x: &PlantState,
    u: &ControlInput,
    v: f64,
    params: &TurbineParams,
    aero: &AeroMap,
) -> PlantState {
    let forces = aero_forces(v, x.omega_r, x.beta, params, aero);
    derivative_with_forces(x, u, forces, params)
}

/// Constant system and input matrices of ẋ = A x + B u + g(x, v).
pub fn linear_matrices(params: &TurbineParams) -> (SMatrix<f64, 8, 8>, SMatrix<f64, 8, 2>) {
    let p = params;
    let n = p.n_blades;
    let coupling = (p.m_tower + n * p.m_blade) / (p.m_blade * p.m_tower);
    let mut a = SMatrix::<f64, 8, 8>::zeros();
    a[(0, 3)] = 1.0;
    a[(1, 4)] = 1.0;
    a[(2, 5)] = 1.0;
    a[(2, 6)] = -1.0;
    a[(3, 0)] = -p.k_tower / p.m_tower;
    a[(3, 1)] = n * p.k_blade / p.m_tower;
    a[(3, 3)] = -p.d_tower / p.m_tower;
    a[(3, 4)] = n * p.d_blade / p.m_tower;
    a[(4, 0)] = p.k_tower / p.m_tower;
    a[(4, 1)] = -coupling * p.k_blade;
    a[(4, 3)] = p.d_tower / p.m_tower;
    a[(4, 4)] = -(1.0 / p.m_blade + n / p.m_tower) * p.d_blade;
    a[(5, 2)] = -p.k_shaft / p.j_rotor;
    a[(5, 5)] = -p.d_shaft / p.j_rotor;
    a[(5, 6)] = p.d_shaft / p.j_rotor;
    a[(6, 2)] = p.k_shaft / p.j_gen;
    a[(6, 5)] = p.d_shaft / p.j_gen;
    a[(6, 6)] = -p.d_shaft / p.j_gen;
    a[(7, 7)] = -1.0 / p.tau_pitch;

    let mut b = SMatrix::<f64, 8, 2>::zeros();
    b[(6, 1)] = -1.0 / p.j_gen;
    b[(7, 0)] = 1.0 / p.tau_pitch;
    (a, b)
}

/// Nonlinear part g(x, v): centrifugal stiffening and aerodynamic loads.
pub fn nonlinear_term(
    x: &PlantState,
    v: f64,
    params: &TurbineParams,
    aero: &AeroMap,
) -> PlantVector {
    let p = params;
    let n = p.n_blades;
    let kc = centrifugal_stiffness(x.omega_r, p);
    let coupling = (p.m_tower + n * p.m_blade) / (p.m_blade * p.m_tower);
    let f = aero_forces(v, x.omega_r, x.beta, p, aero);
    let mut g = PlantVector::zeros();
    g[3] = n / p.m_tower * kc * x.y_blade;
    g[4] = -coupling * kc * x.y_blade + f.thrust / (n * p.m_blade);
    g[5] = f.torque / p.j_rotor;
    g
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> TurbineParams {
        TurbineParams::default()
    }

    #[test]
    fn tip_speed_ratio_examples() {
        assert!((tip_speed_ratio(1.267, 18.0, &p()) - 4.4345).abs() < 1e-9);
        assert_eq!(tip_speed_ratio(0.0, 18.0, &p()), 0.0);
        assert_eq!(tip_speed_ratio(1.267, 0.0, &p()), LAMBDA_CAP);
        assert_eq!(tip_speed_ratio(1.267, 0.49, &p()), LAMBDA_CAP);
    }

    #[test]
    fn thrust_at_18_mps() {
        let f = forces_from_coefficients(18.0, 0.04, 0.1, &p());
        // (1.225 π 63² / 2) · 0.1 · 18²
        let expected = 0.5 * 1.225 * std::f64::consts::PI * 3969.0 * 0.1 * 324.0;
        assert!((f.thrust - expected).abs() < 1e-6);
        assert!((f.thrust - 2.4745e5).abs() / 2.4745e5 < 2e-4);
        let aero = AeroMap::constant(0.04, 0.1);
        assert_eq!(aero_forces(18.0, 1.267, 0.0, &p(), &aero), f);
    }

    #[test]
    fn no_wind_no_force() {
        let f = aero_forces(0.0, 1.267, 3.0, &p(), &AeroMap::default());
        assert_eq!((f.thrust, f.torque), (0.0, 0.0));
    }

    #[test]
    fn max_torque_reproduces_upper_sector_bound() {
        let f = forces_from_coefficients(60.0, 0.0751, 0.0, &p());
        let fmax = f.torque / (p().j_rotor * 60.0);
        assert!((fmax - 0.0559).abs() / 0.0559 < 2e-3, "{fmax}");
    }

    #[test]
    fn centrifugal_examples() {
        assert_eq!(centrifugal_stiffness(0.0, &p()), 0.0);
        let k = centrifugal_stiffness(1.267, &p());
        assert!((k - 3129.0).abs() < 1.0, "{k}");
        let k2 = centrifugal_stiffness(2.0 * 1.267, &p());
        assert!((k2 - 4.0 * k).abs() < 1e-9);
    }

    #[test]
    fn origin_is_equilibrium_without_wind() {
        let d = plant_derivative(
            &PlantState::default(),
            &ControlInput::default(),
            0.0,
            &p(),
            &AeroMap::default(),
        );
        assert_eq!(d, PlantState::default());
    }

    #[test]
    fn shaft_term_isolation() {
        let x = PlantState {
            theta_s: 0.003,
            omega_r: 1.3,
            omega_g: 1.1,
            ..Default::default()
        };
        let zero = AeroForces {
            thrust: 0.0,
            torque: 0.0,
        };
        let d = derivative_with_forces(&x, &ControlInput::default(), zero, &p());
        let pp = p();
        let expected = -(pp.d_shaft * (1.3 - 1.1) + pp.k_shaft * 0.003) / pp.j_rotor;
        assert_eq!(d.omega_r, expected);
    }

    #[test]
    fn pitch_lag() {
        let x = PlantState {
            beta: 2.0,
            ..Default::default()
        };
        let u = ControlInput {
            beta_d: 5.0,
            t_gen: 0.0,
        };
        let d = plant_derivative(&x, &u, 0.0, &p(), &AeroMap::default());
        assert!((d.beta - 30.0).abs() < 1e-12);
    }
}
