//! Observer gain synthesis on the dual system (Aᵢᵀ, Cᵀ).
//!
//! Gains come from continuous algebraic Riccati equations solved by
//! Kleinman–Newton iteration. The default [`GainDesign::SharedLyapunov`]
//! strategy uses a single Riccati matrix for every rule, which makes the
//! rule gains coincide; [`GainDesign::PerVertex`] solves one Riccati
//! equation per submodel.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{is_hurwitz, max_sym_eigenvalue, solve_lyapunov, symmetrize};

/// Iteration cap for [`care_solve`].
pub const CARE_MAX_ITER: usize = 200;
/// Residual at which the Newton iteration stops early.
pub const CARE_TARGET_RESIDUAL: f64 = 1e-10;
/// Largest residual accepted as a solution.
pub const CARE_ACCEPT_RESIDUAL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct CareSolution {
    pub p: DMatrix<f64>,
    /// ‖AᵀP + PA − PBR⁻¹BᵀP + Q‖_max
    pub residual: f64,
    pub iterations: usize,
    /// σ of the initial gain K₀ = σBᵀ, or the Bass shift when that fails
    pub initial_shift: f64,
}

pub fn care_residual(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    q: &DMatrix<f64>,
    r_inv: &DMatrix<f64>,
    p: &DMatrix<f64>,
) -> f64 {
    let pb = p * b;
    (a.transpose() * p + p * a - &pb * r_inv * pb.transpose() + q).amax()
}

/// Stabilizing K₀ and the shift used to find it. First K₀ = σBᵀ with σ
/// doubled until A − BK₀ is Hurwitz; when no σ works (BBᵀ can be rank
/// deficient against the unstable modes) fall back to Bass's construction
/// K₀ = BᵀZ⁻¹ with (A + σI)Z + Z(A + σI)ᵀ = 2BBᵀ and −(A + σI) Hurwitz.
fn initial_gain(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<(DMatrix<f64>, f64)> {
    let bt = b.transpose();
    if is_hurwitz(a) {
        return Ok((&bt * 0.0, 0.0));
    }
    let mut sigma = 1e-6 * a.amax().max(1.0);
    while sigma <= 1e14 {
        if is_hurwitz(&(a - b * &bt * sigma)) {
            return Ok((&bt * sigma, sigma));
        }
        sigma *= 2.0;
    }
    let n = a.nrows();
    let shift = a.norm() + 1.0;
    let shifted = a + DMatrix::identity(n, n) * shift;
    let z = solve_lyapunov(&(-shifted.transpose()), &(b * &bt * 2.0))?;
    let k = z
        .clone()
        .try_inverse()
        .map(|zi| &bt * zi)
        .filter(|k| is_hurwitz(&(a - b * k)))
        .ok_or_else(|| {
            Error::Numerical("no stabilizing initial gain found; (A, B) may not be stabilizable".into())
        })?;
    Ok((k, shift))
}

/// Stabilizing solution of AᵀP + PA − PBR⁻¹BᵀP + Q = 0.
pub fn care_solve(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    q: &DMatrix<f64>,
    r: &DMatrix<f64>,
) -> Result<CareSolution> {
    let n = a.nrows();
    let m = b.ncols();
    if !a.is_square() || b.nrows() != n || q.shape() != (n, n) || r.shape() != (m, m) {
        return Err(Error::Dimension(format!(
            "care: A {:?}, B {:?}, Q {:?}, R {:?}",
            a.shape(),
            b.shape(),
            q.shape(),
            r.shape()
        )));
    }
    let r_inv = r
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::InvalidParameter("R is singular".into()))?;
    let bt = b.transpose();

    let (mut k, sigma) = initial_gain(a, b)?;
    let mut best: Option<(DMatrix<f64>, f64)> = None;
    let mut stalled = 0;
    let mut iterations = 0;
    for it in 1..=CARE_MAX_ITER {
        iterations = it;
        let ak = a - b * &k;
        let qk = q + k.transpose() * r * &k;
        let p = solve_lyapunov(&ak, &qk)?;
        k = &r_inv * &bt * &p;
        let residual = care_residual(a, b, q, &r_inv, &p);
        if !residual.is_finite() {
            break;
        }
        let improved = best.as_ref().is_none_or(|(_, r0)| residual < 0.5 * r0);
        if best.as_ref().is_none_or(|(_, r0)| residual < *r0) {
            best = Some((p, residual));
        }
        if residual < CARE_TARGET_RESIDUAL {
            break;
        }
        stalled = if improved { 0 } else { stalled + 1 };
        if stalled >= 5 {
            break;
        }
    }
    let (p, residual) = best.ok_or(Error::RiccatiNonConvergence {
        iterations,
        residual: f64::NAN,
    })?;
    if residual >= CARE_ACCEPT_RESIDUAL {
        return Err(Error::RiccatiNonConvergence {
            iterations,
            residual,
        });
    }
    Ok(CareSolution {
        p: symmetrize(&p),
        residual,
        iterations,
        initial_shift: sigma,
    })
}

/// Raw weights and normalizing maxima for the dual-system design.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WeightSet {
    /// W_1..W_4 for (θ_s, ω_r, ω_g, v)
    pub state_weights: [f64; 4],
    /// R_1..R_3 for (θ_s, ω_r, ω_g)
    pub output_weights: [f64; 3],
    /// θ_s,max (rad), ω_r,max, ω_g,max (rad/s), v_max (m/s)
    pub normalizers: [f64; 4],
}

impl Default for WeightSet {
    // rounded published weights, not π/2
    #[allow(clippy::approx_constant)]
    fn default() -> Self {
        let omega_max = 15.0 * std::f64::consts::PI / 30.0;
        Self {
            state_weights: [0.25, 15.708, 1.5708, 60e7],
            output_weights: [0.05, 0.1571, 1.5708],
            normalizers: [0.01, omega_max, omega_max, 60.0],
        }
    }
}

impl WeightSet {
    pub fn from_toml_str(text: &str, origin: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::parse(origin, e.to_string()))
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text, &path.display().to_string())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignWeights {
    /// State weight, diagonal n×n
    pub w: DMatrix<f64>,
    /// Output weight, diagonal p×p
    pub r: DMatrix<f64>,
    pub source: WeightSet,
}

/// W_kk = W_k / max_k², R_kk = R_k / max_k².
pub fn build_weight_matrices(ws: &WeightSet) -> Result<DesignWeights> {
    let all = ws
        .state_weights
        .iter()
        .chain(&ws.output_weights)
        .chain(&ws.normalizers);
    if let Some(bad) = all.into_iter().find(|v| !(v.is_finite() && **v > 0.0)) {
        return Err(Error::InvalidParameter(format!(
            "design weights and normalizers must be > 0, got {bad}"
        )));
    }
    let w = DMatrix::from_fn(4, 4, |i, j| {
        if i == j {
            ws.state_weights[i] / ws.normalizers[i].powi(2)
        } else {
            0.0
        }
    });
    let r = DMatrix::from_fn(3, 3, |i, j| {
        if i == j {
            ws.output_weights[i] / ws.normalizers[i].powi(2)
        } else {
            0.0
        }
    });
    Ok(DesignWeights {
        w,
        r,
        source: ws.clone(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GainDesign {
    /// One Riccati matrix for all rules: the vertex solution with the
    /// smallest worst-case Riccati-inequality violation over all vertices.
    #[default]
    SharedLyapunov,
    /// An independent Riccati solution per submodel.
    PerVertex,
}

#[derive(Debug, Clone)]
pub struct SynthesizedGains {
    pub strategy: GainDesign,
    /// L_i, one n×p matrix per rule
    pub gains: Vec<DMatrix<f64>>,
    /// Dual Riccati solution for each vertex
    pub riccati: Vec<CareSolution>,
    /// Vertex whose Riccati matrix is shared (shared strategy only)
    pub design_vertex: Option<usize>,
    /// Worst-case normalized Riccati-inequality violation per vertex solution
    pub violation: Vec<f64>,
}

/// Gains with the default [`GainDesign::SharedLyapunov`] strategy.
pub fn synthesize_gains(
    a_list: &[DMatrix<f64>],
    c: &DMatrix<f64>,
    weights: &DesignWeights,
) -> Result<SynthesizedGains> {
    synthesize_gains_with(a_list, c, weights, GainDesign::default())
}

pub fn synthesize_gains_with(
    a_list: &[DMatrix<f64>],
    c: &DMatrix<f64>,
    weights: &DesignWeights,
    strategy: GainDesign,
) -> Result<SynthesizedGains> {
    if a_list.is_empty() {
        return Err(Error::InvalidParameter("no submodels".into()));
    }
    let ct = c.transpose();
    let r_inv = weights
        .r
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::InvalidParameter("output weight is singular".into()))?;
    let riccati = a_list
        .iter()
        .enumerate()
        .map(|(index, a)| {
            care_solve(&a.transpose(), &ct, &weights.w, &weights.r).map_err(|e| Error::Synthesis {
                index,
                source: Box::new(e),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let gain_of = |p: &DMatrix<f64>| p * &ct * &r_inv;

    // λ_max(A_i P + P A_iᵀ − P Cᵀ R⁻¹ C P + W) / ‖W‖, worst over i
    let w_scale = weights.w.amax();
    let violation: Vec<f64> = riccati
        .iter()
        .map(|sol| {
            a_list
                .iter()
                .map(|a| {
                    let pc = &sol.p * &ct;
                    let m = a * &sol.p + &sol.p * a.transpose() - &pc * &r_inv * pc.transpose()
                        + &weights.w;
                    max_sym_eigenvalue(&m) / w_scale
                })
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();

    let (gains, design_vertex) = match strategy {
        GainDesign::PerVertex => (riccati.iter().map(|s| gain_of(&s.p)).collect(), None),
        GainDesign::SharedLyapunov => {
            let j = violation
                .iter()
                .enumerate()
                .min_by(|a, b| a.1.total_cmp(b.1))
                .map(|(j, _)| j)
                .expect("non-empty");
            let l = gain_of(&riccati[j].p);
            (vec![l; a_list.len()], Some(j))
        }
    };

    for (index, (a, l)) in a_list.iter().zip(&gains).enumerate() {
        if !is_hurwitz(&(a - l * c)) {
            return Err(Error::Synthesis {
                index,
                source: Box::new(Error::Numerical(
                    "closed-loop observer matrix is not Hurwitz".into(),
                )),
            });
        }
    }
    let n = a_list.len() as f64;
    let a_mid = a_list.iter().fold(DMatrix::zeros(a_list[0].nrows(), a_list[0].ncols()), |acc, a| acc + a) / n;
    let l_mid = gains.iter().fold(DMatrix::zeros(gains[0].nrows(), gains[0].ncols()), |acc, l| acc + l) / n;
    if !is_hurwitz(&(&a_mid - &l_mid * c)) {
        return Err(Error::Numerical("midpoint blend of the closed loop is not Hurwitz".into()));
    }
    Ok(SynthesizedGains {
        strategy,
        gains,
        riccati,
        design_vertex,
        violation,
    })
}

/// Largest |L_1 − L_2| entry relative to the largest |L_1| entry.
pub fn relative_gain_difference(l1: &DMatrix<f64>, l2: &DMatrix<f64>) -> f64 {
    (l1 - l2).amax() / l1.amax()
}

fn write_matrix(out: &mut String, name: &str, m: &DMatrix<f64>) {
    let _ = writeln!(out, "{name} =");
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| format!("{:>14.6e}", m[(i, j)])).collect();
        let _ = writeln!(out, "  {}", row.join(" "));
    }
}

/// Plain-text dump of the weights, Riccati residuals, gains and closed-loop
/// eigenvalues.
pub fn design_report(
    weights: &DesignWeights,
    a_list: &[DMatrix<f64>],
    c: &DMatrix<f64>,
    result: &SynthesizedGains,
) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# observer gain design");
    let _ = writeln!(out, "strategy: {:?}", result.strategy);
    if let Some(j) = result.design_vertex {
        let _ = writeln!(out, "shared riccati matrix from submodel {}", j + 1);
    }
    let _ = writeln!(out, "initial observer error e0 = (0 0 0 0) (recorded, not used)");
    write_matrix(&mut out, "W", &weights.w);
    write_matrix(&mut out, "R", &weights.r);
    for (i, sol) in result.riccati.iter().enumerate() {
        let _ = writeln!(
            out,
            "submodel {}: riccati residual {:.3e}, {} newton iterations, initial shift {:.3e}, inequality violation {:.3e}",
            i + 1,
            sol.residual,
            sol.iterations,
            sol.initial_shift,
            result.violation[i]
        );
    }
    for (i, (a, l)) in a_list.iter().zip(&result.gains).enumerate() {
        write_matrix(&mut out, &format!("L_{}", i + 1), l);
        let mut ev: Vec<_> = (a - l * c).complex_eigenvalues().iter().copied().collect();
        ev.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
        let txt: Vec<String> = ev.iter().map(|z| format!("{:.4}{:+.4}i", z.re, z.im)).collect();
        let _ = writeln!(out, "eig(A_{0} - L_{0} C) = [{1}]", i + 1, txt.join(", "));
    }
    out
}
