//! Wind inputs: constant, extreme operating gust, first-order turbulence
//! and file-driven series, plus the causal rolling mean used for v̄.

use std::collections::VecDeque;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WindKind {
    #[default]
    Constant,
    Eog,
    Turbulent,
    File,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WindScenario {
    pub kind: WindKind,
    /// Mean wind speed (m/s)
    pub v_mean: f64,
    /// Gust magnitude V_gust (m/s)
    pub gust_amplitude: f64,
    /// Gust onset (s)
    pub gust_start: f64,
    /// Gust length T (s)
    pub gust_duration: f64,
    /// Turbulence intensity, stationary std / mean
    pub intensity: f64,
    /// Correlation time of the turbulence process (s)
    pub tau: f64,
    pub seed: u64,
    /// Sample spacing of generated series (s)
    pub dt: f64,
    /// Series length (s)
    pub duration: f64,
    /// `t,v` CSV for the file kind
    pub file: Option<PathBuf>,
}

impl Default for WindScenario {
    fn default() -> Self {
        Self {
            kind: WindKind::Constant,
            v_mean: 18.0,
            gust_amplitude: 6.0,
            gust_start: 40.0,
            gust_duration: 10.5,
            intensity: 0.1,
            tau: 4.0,
            seed: 1,
            dt: 0.005,
            duration: 120.0,
            file: None,
        }
    }
}

impl WindScenario {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if !(self.v_mean.is_finite() && self.v_mean >= 1.0) {
            return bad(format!("v_mean must be >= 1 m/s, got {}", self.v_mean));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return bad(format!("dt must be > 0, got {}", self.dt));
        }
        if !(self.duration.is_finite() && self.duration > 0.0) {
            return bad(format!("duration must be > 0, got {}", self.duration));
        }
        match self.kind {
            WindKind::Eog => {
                if !(self.gust_duration.is_finite() && self.gust_duration > 0.0) {
                    return bad(format!("gust_duration must be > 0, got {}", self.gust_duration));
                }
                if !(self.gust_amplitude.is_finite() && self.gust_amplitude >= 0.0) {
                    return bad(format!("gust_amplitude must be >= 0, got {}", self.gust_amplitude));
                }
                if !self.gust_start.is_finite() {
                    return bad("gust_start must be finite".into());
                }
            }
            WindKind::Turbulent => {
                if !(self.intensity.is_finite() && self.intensity >= 0.0) {
                    return bad(format!("intensity must be >= 0, got {}", self.intensity));
                }
                if !(self.tau.is_finite() && self.tau > 0.5 * self.dt) {
                    return bad(format!("tau must exceed dt/2, got {}", self.tau));
                }
            }
            WindKind::File => {
                if self.file.is_none() {
                    return bad("file scenario needs a `file` path".into());
                }
            }
            WindKind::Constant => {}
        }
        Ok(())
    }
}

/// Extreme operating gust at time `t`.
pub fn eog(t: f64, scenario: &WindScenario) -> f64 {
    let s = t - scenario.gust_start;
    let big_t = scenario.gust_duration;
    let v = if s > 0.0 && s < big_t {
        let pi = std::f64::consts::PI;
        scenario.v_mean
            - 0.37 * scenario.gust_amplitude * (3.0 * pi * s / big_t).sin() * (1.0 - (2.0 * pi * s / big_t).cos())
    } else {
        scenario.v_mean
    };
    v.max(0.0)
}

fn sample_count(scenario: &WindScenario) -> usize {
    (scenario.duration / scenario.dt).round() as usize + 1
}

/// First-order turbulence around `v_mean`, one sample per `dt` starting at
/// v_mean. The noise scale is set so the stationary standard deviation of
/// the discrete process is `intensity · v_mean`.
pub fn turbulent_series(scenario: &WindScenario) -> Vec<f64> {
    let n = sample_count(scenario);
    let dt = scenario.dt;
    let a = 1.0 - dt / scenario.tau;
    let sigma = scenario.intensity * scenario.v_mean * ((1.0 - a * a) / dt).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed);
    let mut v = scenario.v_mean;
    let mut out = Vec::with_capacity(n);
    out.push(v);
    for _ in 1..n {
        let xi: f64 = StandardNormal.sample(&mut rng);
        v = v - dt / scenario.tau * (v - scenario.v_mean) + sigma * dt.sqrt() * xi;
        v = v.max(0.0);
        out.push(v);
    }
    out
}

/// Trailing average over `window` seconds (window/dt + 1 samples); shorter
/// prefixes average what is available.
pub fn rolling_mean(series: &[f64], dt: f64, window: f64) -> Result<Vec<f64>> {
    if series.is_empty() {
        return Err(Error::InvalidParameter("rolling mean of an empty series".into()));
    }
    let mut rm = RollingMean::new(dt, window)?;
    Ok(series.iter().map(|&v| rm.push(v)).collect())
}

/// Streaming form of [`rolling_mean`].
#[derive(Debug, Clone)]
pub struct RollingMean {
    cap: usize,
    buf: VecDeque<f64>,
    sum: f64,
}

impl RollingMean {
    pub fn new(dt: f64, window: f64) -> Result<Self> {
        if !(dt > 0.0 && window.is_finite() && window >= dt) {
            return Err(Error::InvalidParameter(format!(
                "rolling window {window} s must be >= dt = {dt} s"
            )));
        }
        let cap = (window / dt).round() as usize + 1;
        Ok(Self {
            cap,
            buf: VecDeque::with_capacity(cap),
            sum: 0.0,
        })
    }

    pub fn push(&mut self, v: f64) -> f64 {
        if self.buf.len() == self.cap {
            let old = self.buf.pop_front().expect("full buffer");
            self.sum -= old;
        }
        self.buf.push_back(v);
        self.sum += v;
        self.sum / self.buf.len() as f64
    }
}

/// `t,v` samples with strictly increasing t.
pub fn read_wind_csv(path: impl AsRef<Path>) -> Result<(Vec<f64>, Vec<f64>)> {
    let path = path.as_ref();
    let origin = path.display().to_string();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_wind_csv(file, &origin)
}

pub fn parse_wind_csv<R: std::io::Read>(reader: R, origin: &str) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header = rdr.headers().map_err(|e| Error::parse(origin, e.to_string()))?;
    if header.iter().collect::<Vec<_>>() != ["t", "v"] {
        return Err(Error::parse(origin, "header must be `t,v`"));
    }
    let mut ts = Vec::new();
    let mut vs = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::parse(origin, e.to_string()))?;
        let num = |i: usize| -> Result<f64> {
            rec.get(i)
                .ok_or_else(|| Error::parse(origin, format!("row {}: missing column", k + 1)))?
                .parse::<f64>()
                .map_err(|e| Error::parse(origin, format!("row {}: {e}", k + 1)))
        };
        let (t, v) = (num(0)?, num(1)?);
        if !(t.is_finite() && v.is_finite() && v >= 0.0) {
            return Err(Error::parse(origin, format!("row {}: need finite t and v >= 0", k + 1)));
        }
        if ts.last().is_some_and(|&last| t <= last) {
            return Err(Error::parse(origin, format!("row {}: t must increase strictly", k + 1)));
        }
        ts.push(t);
        vs.push(v);
    }
    if ts.is_empty() {
        return Err(Error::parse(origin, "no samples"));
    }
    Ok((ts, vs))
}

/// Wind speed as a function of time, ready for the simulation loop.
#[derive(Debug, Clone, PartialEq)]
pub enum WindSignal {
    Constant(f64),
    Eog(WindScenario),
    /// Uniform samples starting at t = 0
    Uniform { dt: f64, values: Vec<f64> },
    /// Arbitrary breakpoints
    Table { t: Vec<f64>, v: Vec<f64> },
}

impl WindSignal {
    pub fn from_scenario(scenario: &WindScenario) -> Result<Self> {
        scenario.validate()?;
        Ok(match scenario.kind {
            WindKind::Constant => WindSignal::Constant(scenario.v_mean),
            WindKind::Eog => WindSignal::Eog(scenario.clone()),
            WindKind::Turbulent => WindSignal::Uniform {
                dt: scenario.dt,
                values: turbulent_series(scenario),
            },
            WindKind::File => {
                let (t, v) = read_wind_csv(scenario.file.as_ref().expect("validated"))?;
                WindSignal::Table { t, v }
            }
        })
    }

    /// Linear interpolation between samples, held constant past either end.
    pub fn at(&self, t: f64) -> f64 {
        match self {
            WindSignal::Constant(v) => *v,
            WindSignal::Eog(s) => eog(t, s),
            WindSignal::Uniform { dt, values } => {
                let x = (t / dt).max(0.0);
                let i = x.floor() as usize;
                if i + 1 >= values.len() {
                    return *values.last().expect("non-empty series");
                }
                let s = x - i as f64;
                values[i] + s * (values[i + 1] - values[i])
            }
            WindSignal::Table { t: ts, v } => {
                if t <= ts[0] {
                    return v[0];
                }
                let k = ts.partition_point(|&x| x <= t);
                if k >= ts.len() {
                    return *v.last().expect("non-empty table");
                }
                let s = (t - ts[k - 1]) / (ts[k] - ts[k - 1]);
                v[k - 1] + s * (v[k] - v[k - 1])
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gust() -> WindScenario {
        WindScenario {
            kind: WindKind::Eog,
            ..WindScenario::default()
        }
    }

    #[test]
    fn eog_window_edges() {
        let s = gust();
        assert_eq!(eog(s.gust_start, &s), s.v_mean);
        assert_eq!(eog(s.gust_start + s.gust_duration, &s), s.v_mean);
        assert_eq!(eog(0.0, &s), s.v_mean);
    }

    #[test]
    fn eog_dips_and_peaks_inside_window() {
        let s = gust();
        let step = s.dt / 10.0;
        let (mut lo, mut hi, mut t_lo, mut t_hi) = (f64::MAX, f64::MIN, 0.0, 0.0);
        let mut t = 0.0;
        while t < 80.0 {
            let v = eog(t, &s);
            if v < lo {
                lo = v;
                t_lo = t;
            }
            if v > hi {
                hi = v;
                t_hi = t;
            }
            t += step;
        }
        assert!(lo < s.v_mean && hi > s.v_mean);
        let inside = |t: f64| t > s.gust_start && t < s.gust_start + s.gust_duration;
        assert!(inside(t_lo) && inside(t_hi));
    }

    #[test]
    fn eog_is_continuous() {
        let s = gust();
        let pi = std::f64::consts::PI;
        let big_t = s.gust_duration;
        // |d/ds| ≤ 0.37 V (3π/T · 2 + 2π/T · 1)
        let slope = 0.37 * s.gust_amplitude * (6.0 * pi + 2.0 * pi) / big_t;
        let n = (80.0 / s.dt) as usize;
        let mut prev = eog(0.0, &s);
        for k in 1..=n {
            let v = eog(k as f64 * s.dt, &s);
            assert!((v - prev).abs() <= slope * s.dt);
            prev = v;
        }
    }

    #[test]
    fn turbulence_without_intensity_is_constant() {
        let s = WindScenario {
            kind: WindKind::Turbulent,
            intensity: 0.0,
            duration: 10.0,
            ..WindScenario::default()
        };
        assert!(turbulent_series(&s).iter().all(|&v| v == 18.0));
    }

    #[test]
    fn turbulence_mean_and_determinism() {
        let s = WindScenario {
            kind: WindKind::Turbulent,
            duration: 600.0,
            seed: 42,
            ..WindScenario::default()
        };
        let a = turbulent_series(&s);
        assert_eq!(a, turbulent_series(&s));
        let mean = a.iter().sum::<f64>() / a.len() as f64;
        assert!((mean - 18.0).abs() < 0.5, "mean {mean}");
        assert!(a.iter().all(|v| v.is_finite() && *v >= 0.0));
        let other = turbulent_series(&WindScenario { seed: 43, ..s });
        assert_ne!(a, other);
    }

    #[test]
    fn rolling_mean_examples() {
        let dt = 0.1;
        assert!(rolling_mean(&[5.0; 40], dt, 1.0).unwrap().iter().all(|&v| (v - 5.0).abs() < 1e-12));
        let k0 = 20;
        let step: Vec<f64> = (0..60).map(|k| if k < k0 { 10.0 } else { 20.0 }).collect();
        let rm = rolling_mean(&step, dt, 1.0).unwrap();
        assert!((rm[k0 + 10] - 20.0).abs() < 1e-12);
        assert!(rm[k0 + 9] < 20.0);
        let r = 0.7;
        let ramp: Vec<f64> = (0..100).map(|k| r * k as f64 * dt).collect();
        let rm = rolling_mean(&ramp, dt, 2.0).unwrap();
        for (k, m) in rm.iter().enumerate().skip(20) {
            let t = k as f64 * dt;
            assert!((m - r * (t - 1.0)).abs() < 1e-9);
        }
        assert!(rolling_mean(&[], dt, 1.0).is_err());
        assert!(rolling_mean(&[1.0], dt, 0.01).is_err());
    }

    #[test]
    fn file_series_interpolates() {
        let (t, v) = parse_wind_csv("t,v\n0,10\n2,14\n3,14\n".as_bytes(), "mem").unwrap();
        let w = WindSignal::Table { t, v };
        assert_eq!(w.at(-1.0), 10.0);
        assert_eq!(w.at(1.0), 12.0);
        assert_eq!(w.at(2.5), 14.0);
        assert_eq!(w.at(9.0), 14.0);
        assert!(parse_wind_csv("t,v\n0,1\n0,2\n".as_bytes(), "mem").is_err());
        assert!(parse_wind_csv("time,v\n0,1\n".as_bytes(), "mem").is_err());
        assert!(parse_wind_csv("t,v\n0,-1\n".as_bytes(), "mem").is_err());
    }

    #[test]
    fn uniform_signal_interpolates() {
        let w = WindSignal::Uniform {
            dt: 0.5,
            values: vec![0.0, 1.0, 3.0],
        };
        assert_eq!(w.at(0.25), 0.5);
        assert_eq!(w.at(0.75), 2.0);
        assert_eq!(w.at(5.0), 3.0);
    }

    #[test]
    fn scenario_validation() {
        assert!(WindScenario { v_mean: 0.5, ..WindScenario::default() }.validate().is_err());
        assert!(WindScenario { kind: WindKind::File, ..WindScenario::default() }.validate().is_err());
        assert!(WindScenario { dt: 0.0, ..WindScenario::default() }.validate().is_err());
    }
}
