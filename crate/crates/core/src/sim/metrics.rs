//! Post-transient error statistics and estimate lag.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::sim::trace::SimTrace;

/// Largest shift examined by [`compute_lag`] (s).
pub const MAX_LAG: f64 = 5.0;
/// A correlation peak below `LAG_SIGNIFICANCE / √N` is treated as noise.
pub const LAG_SIGNIFICANCE: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SignalRmse {
    pub v: f64,
    pub omega_r: f64,
    pub omega_g: f64,
    pub theta_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    pub transient_cutoff: f64,
    pub rmse: SignalRmse,
    /// Delay of v̂ behind the true wind (s); `None` when no significant
    /// correlation peak exists
    pub lag: Option<f64>,
    /// Time after which |v̂ − v| stays within `settle_band` (s)
    pub transient_duration: f64,
    pub settle_band: f64,
    pub max_abs_v_error_after_cutoff: f64,
    pub clamp_activations: usize,
    pub clamp_activations_after_cutoff: usize,
}

impl MetricsReport {
    pub fn to_text(&self) -> String {
        let lag = self
            .lag
            .map_or_else(|| "undefined".to_string(), |l| format!("{l:.4}"));
        format!(
            "transient_cutoff_s = {}\n\
             rmse_v = {:.6e}\nrmse_omega_r = {:.6e}\nrmse_omega_g = {:.6e}\nrmse_theta_s = {:.6e}\n\
             lag_s = {lag}\n\
             transient_duration_s = {:.4}\nsettle_band_mps = {}\n\
             max_abs_v_error_after_cutoff = {:.6e}\n\
             clamp_activations = {}\nclamp_activations_after_cutoff = {}\n",
            self.transient_cutoff,
            self.rmse.v,
            self.rmse.omega_r,
            self.rmse.omega_g,
            self.rmse.theta_s,
            self.transient_duration,
            self.settle_band,
            self.max_abs_v_error_after_cutoff,
            self.clamp_activations,
            self.clamp_activations_after_cutoff,
        )
    }
}

pub fn rmse(a: &[f64], b: &[f64]) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    (a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>() / a.len() as f64).sqrt()
}

/// Shift (s) maximizing the normalized cross-correlation of `v_hat`
/// against `v_true` over ±[`MAX_LAG`], refined by a parabola through the
/// peak and its neighbours. Positive means `v_hat` trails `v_true`.
pub fn compute_lag(v_true: &[f64], v_hat: &[f64], dt: f64) -> Result<Option<f64>> {
    if v_true.len() != v_hat.len() {
        return Err(Error::Dimension(format!(
            "series lengths differ: {} vs {}",
            v_true.len(),
            v_hat.len()
        )));
    }
    if !(dt > 0.0) {
        return Err(Error::InvalidParameter(format!("dt must be > 0, got {dt}")));
    }
    let n = v_true.len();
    if n < 3 {
        return Err(Error::InvalidParameter("need at least 3 samples".into()));
    }
    let var = |s: &[f64]| {
        let m = s.iter().sum::<f64>() / n as f64;
        s.iter().map(|x| (x - m).powi(2)).sum::<f64>()
    };
    if var(v_true) <= 0.0 || var(v_hat) <= 0.0 {
        return Err(Error::InvalidParameter("zero-variance series".into()));
    }
    let max_shift = ((MAX_LAG / dt).round() as usize).min(n - 3);
    // Pearson correlation of v_true[i] with v_hat[i + k] over the overlap
    let corr = |k: isize| -> (f64, usize) {
        let (a, b) = if k >= 0 {
            (&v_true[..n - k as usize], &v_hat[k as usize..])
        } else {
            (&v_true[(-k) as usize..], &v_hat[..n - (-k) as usize])
        };
        let m = a.len() as f64;
        let ma = a.iter().sum::<f64>() / m;
        let mb = b.iter().sum::<f64>() / m;
        let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
        for (x, y) in a.iter().zip(b) {
            let (dx, dy) = (x - ma, y - mb);
            sab += dx * dy;
            saa += dx * dx;
            sbb += dy * dy;
        }
        let r = if saa > 0.0 && sbb > 0.0 { sab / (saa * sbb).sqrt() } else { 0.0 };
        (r, a.len())
    };
    let shifts: Vec<isize> = (-(max_shift as isize)..=max_shift as isize).collect();
    let r: Vec<(f64, usize)> = shifts.iter().map(|&k| corr(k)).collect();
    let (imax, (rmax, overlap)) = r
        .iter()
        .copied()
        .enumerate()
        .max_by(|x, y| x.1 .0.total_cmp(&y.1 .0))
        .expect("non-empty shift range");
    if rmax < LAG_SIGNIFICANCE / (overlap as f64).sqrt() {
        return Ok(None);
    }
    let mut k = shifts[imax] as f64;
    if imax > 0 && imax + 1 < r.len() {
        let (rm, rp) = (r[imax - 1].0, r[imax + 1].0);
        let den = rm - 2.0 * rmax + rp;
        if den < 0.0 {
            k += 0.5 * (rm - rp) / den;
        }
    }
    Ok(Some(k * dt))
}

/// Metrics over rows with t ≥ `cutoff`.
pub fn compute_metrics(
    trace: &SimTrace,
    cutoff: f64,
    settle_band: f64,
    clamp_times: &[f64],
) -> Result<MetricsReport> {
    let post: Vec<_> = trace.rows.iter().filter(|r| r.t >= cutoff).collect();
    let col = |f: &dyn Fn(&&crate::sim::trace::TraceRow) -> f64| post.iter().map(f).collect::<Vec<f64>>();
    let rm = |x: Vec<f64>, y: Vec<f64>| rmse(&x, &y);
    let rmse = SignalRmse {
        v: rm(col(&|r| r.v_true), col(&|r| r.v_hat)),
        omega_r: rm(col(&|r| r.omega_r), col(&|r| r.omega_r_hat)),
        omega_g: rm(col(&|r| r.omega_g), col(&|r| r.omega_g_hat)),
        theta_s: rm(col(&|r| r.theta_s), col(&|r| r.theta_s_hat)),
    };
    let lag = if post.len() >= 3 {
        match compute_lag(&col(&|r| r.v_true), &col(&|r| r.v_hat), trace.dt) {
            Ok(l) => l,
            Err(Error::InvalidParameter(_)) => None,
            Err(e) => return Err(e),
        }
    } else {
        None
    };
    let transient_duration = trace
        .rows
        .iter()
        .rev()
        .find(|r| (r.v_hat - r.v_true).abs() > settle_band)
        .map_or(0.0, |r| r.t + trace.dt);
    let max_err = post
        .iter()
        .map(|r| (r.v_hat - r.v_true).abs())
        .fold(0.0, f64::max);
    Ok(MetricsReport {
        transient_cutoff: cutoff,
        rmse,
        lag,
        transient_duration,
        settle_band,
        max_abs_v_error_after_cutoff: max_err,
        clamp_activations: clamp_times.len(),
        clamp_activations_after_cutoff: clamp_times.iter().filter(|&&t| t >= cutoff).count(),
    })
}

/// Max |error| of (v̂, ω̂_r, ω̂_g, θ̂_s) in consecutive windows of `window`
/// seconds, starting at `from`. The last partial window is dropped.
pub fn error_envelope(trace: &SimTrace, from: f64, window: f64) -> Result<Vec<[f64; 4]>> {
    if !(window > 0.0 && window.is_finite()) {
        return Err(Error::InvalidParameter(format!("envelope window must be > 0, got {window}")));
    }
    let n = (window / trace.dt).round().max(1.0) as usize;
    let post: Vec<_> = trace.rows.iter().filter(|r| r.t >= from).collect();
    Ok(post
        .chunks_exact(n)
        .map(|w| {
            let mut m = [0.0_f64; 4];
            for r in w {
                let e = [
                    r.v_hat - r.v_true,
                    r.omega_r_hat - r.omega_r,
                    r.omega_g_hat - r.omega_g,
                    r.theta_s_hat - r.theta_s,
                ];
                for (mk, ek) in m.iter_mut().zip(e) {
                    *mk = mk.max(ek.abs());
                }
            }
            m
        })
        .collect())
}

/// True when every component of the windowed envelope is non-increasing,
/// up to an absolute roundoff floor.
pub fn envelope_decays(envelope: &[[f64; 4]], floor: f64) -> bool {
    envelope
        .windows(2)
        .all(|p| (0..4).all(|k| p[1][k] <= p[0][k].max(floor)))
}
