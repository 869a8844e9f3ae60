//! Baseline gain-scheduled PI pitch controller holding rated rotor speed.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::plant::ControlInput;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ControllerSettings {
    /// Proportional gain (deg per rad/s of speed error)
    pub kp: f64,
    /// Integral gain (deg per rad of integrated speed error)
    pub ki: f64,
    /// Pitch at which the scheduled gain has halved (deg)
    pub schedule_pitch: f64,
    /// (rad/s)
    pub rated_speed: f64,
    /// Generator torque held above rated wind (N·m)
    pub rated_torque: f64,
    /// (deg)
    pub min_pitch: f64,
    /// (deg)
    pub max_pitch: f64,
    /// (deg/s)
    pub rate_limit: f64,
    /// Pitch bias; `None` trims it from the scenario mean wind
    pub bias: Option<f64>,
}

impl Default for ControllerSettings {
    fn default() -> Self {
        let deg = 180.0 / std::f64::consts::PI;
        Self {
            // 5 MW reference gains referred to the rotor side
            kp: 0.018_826_81 * 97.0 * deg,
            ki: 0.008_068_634 * 97.0 * deg,
            schedule_pitch: 6.302_336,
            rated_speed: 1.267_1,
            rated_torque: 5.296_61e6 / 1.267_1,
            min_pitch: 0.0,
            max_pitch: 90.0,
            rate_limit: 8.0,
            bias: None,
        }
    }
}

impl ControllerSettings {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        for (name, v) in [
            ("kp", self.kp),
            ("ki", self.ki),
            ("schedule_pitch", self.schedule_pitch),
            ("rated_speed", self.rated_speed),
            ("rate_limit", self.rate_limit),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("controller {name} must be > 0, got {v}"));
            }
        }
        if !(self.rated_torque.is_finite() && self.rated_torque >= 0.0) {
            return bad(format!("rated_torque must be >= 0, got {}", self.rated_torque));
        }
        if !(self.min_pitch.is_finite() && self.max_pitch.is_finite() && self.min_pitch < self.max_pitch) {
            return bad(format!(
                "pitch limits need min < max, got [{}, {}]",
                self.min_pitch, self.max_pitch
            ));
        }
        if let Some(b) = self.bias {
            if !(b >= self.min_pitch && b <= self.max_pitch) {
                return bad(format!("pitch bias {b} outside the pitch limits"));
            }
        }
        Ok(())
    }
}

/// β_d = β₀ + G(β_d) (K_p e + K_i ∫e) with e = ω_g − ω_rated and
/// G(β) = 1 / (1 + β/β_K), solved for β_d in closed form so the command is
/// monotone in the PI term. The integrator is frozen while the command is
/// saturated in the direction of the error.
#[derive(Debug, Clone)]
pub struct PitchController {
    settings: ControllerSettings,
    bias: f64,
    integral: f64,
    beta_d: f64,
}

impl PitchController {
    pub fn new(settings: ControllerSettings, bias: f64) -> Result<Self> {
        settings.validate()?;
        if !(bias >= settings.min_pitch && bias <= settings.max_pitch) {
            return Err(Error::InvalidParameter(format!("pitch bias {bias} outside the pitch limits")));
        }
        Ok(Self {
            settings,
            bias,
            integral: 0.0,
            beta_d: bias,
        })
    }

    pub fn settings(&self) -> &ControllerSettings {
        &self.settings
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    pub fn integral(&self) -> f64 {
        self.integral
    }

    /// Current command without advancing the controller.
    pub fn output(&self) -> ControlInput {
        ControlInput {
            beta_d: self.beta_d,
            t_gen: self.settings.rated_torque,
        }
    }

    pub fn gain_schedule(&self, beta: f64) -> f64 {
        1.0 / (1.0 + beta / self.settings.schedule_pitch)
    }

    /// Root of (β − β₀)(β_K + β) = X β_K on the branch through β₀.
    fn scheduled_command(&self, x: f64) -> f64 {
        let k = self.settings.schedule_pitch;
        let b = self.bias;
        let disc = (k + b).powi(2) + 4.0 * k * x;
        if disc <= 0.0 {
            return -k;
        }
        0.5 * (-(k - b) + disc.sqrt())
    }

    /// Advance by `dt` with measured generator speed `omega_g`.
    pub fn update(&mut self, omega_g: f64, dt: f64) -> ControlInput {
        let (kp, ki, lo, hi, rate) = {
            let s = &self.settings;
            (s.kp, s.ki, s.min_pitch, s.max_pitch, s.rate_limit)
        };
        let e = omega_g - self.settings.rated_speed;
        let raw = self.scheduled_command(kp * e + ki * self.integral);
        let windup = (raw >= hi && e > 0.0) || (raw <= lo && e < 0.0);
        if !windup {
            self.integral += e * dt;
        }
        let target = self.scheduled_command(kp * e + ki * self.integral).clamp(lo, hi);
        let step = rate * dt;
        self.beta_d = (self.beta_d + (target - self.beta_d).clamp(-step, step)).clamp(lo, hi);
        self.output()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_error_keeps_bias() {
        let s = ControllerSettings::default();
        let mut c = PitchController::new(s.clone(), 12.0).unwrap();
        for _ in 0..100 {
            let u = c.update(s.rated_speed, 0.01);
            assert_eq!(u.beta_d, 12.0);
            assert_eq!(u.t_gen, s.rated_torque);
        }
    }

    #[test]
    fn positive_error_raises_pitch_to_saturation() {
        let s = ControllerSettings::default();
        let mut c = PitchController::new(s.clone(), 5.0).unwrap();
        let mut prev = c.output().beta_d;
        let mut hit = false;
        for _ in 0..60_000 {
            let b = c.update(s.rated_speed * 1.1, 0.01).beta_d;
            assert!(b >= prev);
            assert!(b - prev <= s.rate_limit * 0.01 + 1e-12);
            prev = b;
            hit |= b == s.max_pitch;
        }
        assert!(hit);
        // integrator frozen at saturation
        let i = c.integral();
        c.update(s.rated_speed * 1.1, 0.01);
        assert_eq!(c.integral(), i);
    }

    #[test]
    fn command_matches_scheduled_law() {
        let s = ControllerSettings::default();
        let c = PitchController::new(s.clone(), 12.0).unwrap();
        for x in [-5.0, 0.0, 3.0, 40.0] {
            let b = c.scheduled_command(x);
            assert!((b - (12.0 + c.gain_schedule(b) * x)).abs() < 1e-9);
        }
    }

    #[test]
    fn settings_validation() {
        let s = ControllerSettings {
            min_pitch: 10.0,
            max_pitch: 5.0,
            ..ControllerSettings::default()
        };
        assert!(s.validate().is_err());
        assert!(PitchController::new(ControllerSettings::default(), 95.0).is_err());
    }
}
