//! TOML simulation configuration.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::aero::{AeroMap, TabularAeroMap};
use crate::design::{GainDesign, WeightSet};
use crate::error::{Error, Result};
use crate::params::TurbineParams;
use crate::plant::PlantState;
use crate::sim::controller::ControllerSettings;
use crate::wind::WindScenario;

/// Largest accepted integration step (s).
pub const MAX_DT: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AeroBackend {
    #[default]
    Analytic,
    Tabular,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AeroConfig {
    pub backend: AeroBackend,
    /// `lambda,beta,cq,ct` grid for the tabular backend
    pub file: Option<PathBuf>,
}

impl AeroConfig {
    pub fn build(&self) -> Result<AeroMap> {
        match self.backend {
            AeroBackend::Analytic => Ok(AeroMap::default()),
            AeroBackend::Tabular => {
                let path = self
                    .file
                    .as_ref()
                    .ok_or_else(|| Error::InvalidParameter("tabular aero backend needs `file`".into()))?;
                Ok(AeroMap::Tabular(TabularAeroMap::from_path(path)?))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitMode {
    /// Steady operating point at the scenario mean wind
    #[default]
    Trim,
    Explicit,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InitialPlant {
    pub mode: InitMode,
    pub y_tower: f64,
    pub y_blade: f64,
    pub theta_s: f64,
    pub dy_tower: f64,
    pub dy_blade: f64,
    pub omega_r: f64,
    pub omega_g: f64,
    pub beta: f64,
}

impl InitialPlant {
    pub fn state(&self) -> PlantState {
        PlantState {
            y_tower: self.y_tower,
            y_blade: self.y_blade,
            theta_s: self.theta_s,
            dy_tower: self.dy_tower,
            dy_blade: self.dy_blade,
            omega_r: self.omega_r,
            omega_g: self.omega_g,
            beta: self.beta,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObserverInit {
    #[default]
    Explicit,
    /// Start at the true drivetrain state and scenario mean wind
    Exact,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InitialObserver {
    pub mode: ObserverInit,
    pub theta_s_hat: f64,
    pub omega_r_hat: f64,
    pub omega_g_hat: f64,
    pub v_hat: f64,
}

impl Default for InitialObserver {
    fn default() -> Self {
        Self {
            mode: ObserverInit::Explicit,
            theta_s_hat: 0.1,
            omega_r_hat: 0.0,
            omega_g_hat: 0.0,
            v_hat: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GainPreset {
    #[default]
    Published,
    Synthesized,
    File,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GainConfig {
    pub preset: GainPreset,
    pub file: Option<PathBuf>,
    pub design: GainDesign,
    pub weights: WeightSet,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VBarMode {
    #[default]
    Fixed,
    /// Trailing mean of the estimate itself
    Rolling,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VBarConfig {
    pub mode: VBarMode,
    /// Fixed mean, or the initial value of the rolling mean; defaults to
    /// the scenario mean
    pub value: Option<f64>,
    /// (s)
    pub window: f64,
}

impl Default for VBarConfig {
    fn default() -> Self {
        Self {
            mode: VBarMode::Fixed,
            value: None,
            window: 600.0,
        }
    }
}

/// Additive Gaussian measurement noise, standard deviations per channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseConfig {
    pub enabled: bool,
    /// (rad)
    pub theta_s: f64,
    /// (rad/s)
    pub omega_r: f64,
    /// (rad/s)
    pub omega_g: f64,
    pub seed: u64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            enabled: false,
            theta_s: 1e-4,
            omega_r: 1e-3,
            omega_g: 1e-3,
            seed: 7,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimConfig {
    /// (s)
    pub dt: f64,
    /// (s)
    pub duration: f64,
    /// Metrics ignore t below this (s)
    pub transient_cutoff: f64,
    /// Band on |v̂ − v| defining the end of the transient (m/s)
    pub settle_band: f64,
    pub scenario: WindScenario,
    pub turbine: TurbineParams,
    pub aero: AeroConfig,
    pub initial_plant: InitialPlant,
    pub initial_observer: InitialObserver,
    pub gains: GainConfig,
    pub controller: ControllerSettings,
    pub v_bar: VBarConfig,
    pub noise: NoiseConfig,
    /// Default output directory
    pub output: Option<PathBuf>,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            dt: 0.005,
            duration: 120.0,
            transient_cutoff: 20.0,
            settle_band: 0.2,
            scenario: WindScenario::default(),
            turbine: TurbineParams::default(),
            aero: AeroConfig::default(),
            initial_plant: InitialPlant::default(),
            initial_observer: InitialObserver::default(),
            gains: GainConfig::default(),
            controller: ControllerSettings::default(),
            v_bar: VBarConfig::default(),
            noise: NoiseConfig::default(),
            output: None,
        }
    }
}

impl SimConfig {
    pub fn from_toml_str(text: &str, origin: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::parse(origin, e.to_string()))?;
        Ok(cfg)
    }

    /// Parse a file; relative data paths are taken relative to its folder.
    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_toml_str(&text, &path.display().to_string())?;
        if let Some(base) = path.parent() {
            cfg.resolve_paths(base);
        }
        Ok(cfg)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        for p in [
            &mut self.aero.file,
            &mut self.gains.file,
            &mut self.scenario.file,
            &mut self.output,
        ]
        .into_iter()
        .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if !(self.dt > 0.0 && self.dt <= MAX_DT) {
            return bad(format!("dt must lie in (0, {MAX_DT}], got {}", self.dt));
        }
        if !(self.duration.is_finite() && self.duration >= 10.0 * self.dt) {
            return bad(format!("duration must be >= 10 dt, got {}", self.duration));
        }
        if !(self.transient_cutoff.is_finite() && self.transient_cutoff >= 0.0) {
            return bad(format!("transient_cutoff must be >= 0, got {}", self.transient_cutoff));
        }
        if !(self.settle_band.is_finite() && self.settle_band > 0.0) {
            return bad(format!("settle_band must be > 0, got {}", self.settle_band));
        }
        self.scenario.validate()?;
        self.turbine.validate()?;
        self.controller.validate()?;
        if self.gains.preset == GainPreset::File && self.gains.file.is_none() {
            return bad("gain preset `file` needs `gains.file`".into());
        }
        if let Some(v) = self.v_bar.value {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("v_bar.value must be > 0, got {v}"));
            }
        }
        if self.v_bar.mode == VBarMode::Rolling && !(self.v_bar.window >= self.dt) {
            return bad(format!("v_bar.window must be >= dt, got {}", self.v_bar.window));
        }
        let o = &self.initial_observer;
        if ![o.theta_s_hat, o.omega_r_hat, o.omega_g_hat, o.v_hat].iter().all(|v| v.is_finite()) {
            return bad("initial observer state must be finite".into());
        }
        if !self.initial_plant.state().is_finite() {
            return bad("initial plant state must be finite".into());
        }
        if self.noise.enabled
            && ![self.noise.theta_s, self.noise.omega_r, self.noise.omega_g]
                .iter()
                .all(|v| v.is_finite() && *v >= 0.0)
        {
            return bad("noise standard deviations must be >= 0".into());
        }
        Ok(())
    }
}
