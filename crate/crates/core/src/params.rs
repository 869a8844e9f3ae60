//! Physical constants of the reduced-order NREL 5 MW turbine model.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Plant and observer constants.
///
/// Gearbox ratio is 1, so generator quantities are referred to the rotor
/// side. Defaults are the NREL 5 MW reference values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TurbineParams {
    /// Number of blades
    pub n_blades: f64,
    /// Rotor radius (m)
    pub radius: f64,
    /// Air density (kg/m³)
    pub air_density: f64,
    /// Rotor inertia (kg·m²)
    pub j_rotor: f64,
    /// Generator inertia, rotor side (kg·m²)
    pub j_gen: f64,
    /// Shaft torsional stiffness (N·m/rad)
    pub k_shaft: f64,
    /// Shaft torsional damping (N·m·s/rad)
    pub d_shaft: f64,
    /// Tower-top fore-aft stiffness (N/m)
    pub k_tower: f64,
    /// Blade-tip flapwise stiffness (N/m)
    pub k_blade: f64,
    /// Tower damping (N·s/m)
    pub d_tower: f64,
    /// Blade damping (N·s/m)
    pub d_blade: f64,
    /// Effective tower-nacelle mass (kg)
    pub m_tower: f64,
    /// Effective blade mass (kg)
    pub m_blade: f64,
    /// Centrifugal stiffening constant (1/m)
    pub alpha: f64,
    /// Blade root to blade centre of mass (m)
    pub r_blade: f64,
    /// Pitch actuator lag (s)
    pub tau_pitch: f64,
    /// Wind model time constant (s)
    pub tau_wind: f64,
}

impl Default for TurbineParams {
    fn default() -> Self {
        Self {
            n_blades: 3.0,
            radius: 63.0,
            air_density: 1.225,
            j_rotor: 38_759_227.0,
            j_gen: 5_025_347.0,
            k_shaft: 867_637_000.0,
            d_shaft: 6_215_000.0,
            k_tower: 1.98e6,
            k_blade: 40_000.0,
            d_tower: 7.0e4,
            d_blade: 2.0e4,
            m_tower: 436_865.0,
            m_blade: 4_435.0,
            alpha: 0.02,
            r_blade: 21.975,
            tau_pitch: 0.1,
            tau_wind: 4.0,
        }
    }
}

impl TurbineParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("n_blades", self.n_blades),
            ("radius", self.radius),
            ("air_density", self.air_density),
            ("j_rotor", self.j_rotor),
            ("j_gen", self.j_gen),
            ("k_shaft", self.k_shaft),
            ("d_shaft", self.d_shaft),
            ("k_tower", self.k_tower),
            ("k_blade", self.k_blade),
            ("d_tower", self.d_tower),
            ("d_blade", self.d_blade),
            ("m_tower", self.m_tower),
            ("m_blade", self.m_blade),
            ("r_blade", self.r_blade),
            ("tau_pitch", self.tau_pitch),
            ("tau_wind", self.tau_wind),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be finite and > 0, got {value}"
                )));
            }
        }
        if !(self.alpha.is_finite() && self.alpha >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "alpha must be finite and >= 0, got {}",
                self.alpha
            )));
        }
        Ok(())
    }

    /// ρπR²/2, the thrust prefactor (kg/m).
    pub fn thrust_factor(&self) -> f64 {
        0.5 * self.air_density * std::f64::consts::PI * self.radius.powi(2)
    }

    /// ρπR³/2, the torque prefactor (kg).
    pub fn torque_factor(&self) -> f64 {
        self.thrust_factor() * self.radius
    }
}
