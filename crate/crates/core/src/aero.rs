//! Rotor aero maps C_Q(λ, β) and C_T(λ, β).
//!
//! Two backends: a rectangular lookup table (bilinear, clamped to the grid
//! hull) and a closed-form exponential power-coefficient surface. Pitch is
//! in degrees on both.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// Lower clamp on the torque coefficient.
pub const CQ_MIN: f64 = 0.001;
/// Upper clamp on the torque coefficient.
pub const CQ_MAX: f64 = 0.0751;

/// Header of the tabular aero map CSV format.
pub const AERO_CSV_HEADER: [&str; 4] = ["lambda", "beta", "cq", "ct"];

/// Torque and thrust coefficient pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coefficients {
    pub cq: f64,
    pub ct: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum AeroMap {
    Tabular(TabularAeroMap),
    Analytic(AnalyticAeroMap),
}

impl Default for AeroMap {
    fn default() -> Self {
        AeroMap::Analytic(AnalyticAeroMap::default())
    }
}

impl AeroMap {
    /// Evaluate (C_Q, C_T) at tip speed ratio `lambda` and pitch `beta_deg`.
    /// C_Q is always returned inside [`CQ_MIN`, `CQ_MAX`].
    pub fn eval(&self, lambda: f64, beta_deg: f64) -> Coefficients {
        let raw = match self {
            AeroMap::Tabular(t) => t.eval_raw(lambda, beta_deg),
            AeroMap::Analytic(a) => a.eval_raw(lambda, beta_deg),
        };
        Coefficients {
            cq: raw.cq.clamp(CQ_MIN, CQ_MAX),
            ct: raw.ct.max(0.0),
        }
    }

    /// Constant-coefficient table, handy for isolating formula terms.
    pub fn constant(cq: f64, ct: f64) -> Self {
        AeroMap::Tabular(
            TabularAeroMap::new(vec![0.0, 1.0], vec![0.0, 1.0], vec![cq; 4], vec![ct; 4])
                .expect("constant grid is well-formed"),
        )
    }
}

/// Exponential-in-1/λᵢ power coefficient family
///
/// ```text
/// 1/λᵢ = 1/(λ + 0.08β) − 0.035/(β³ + 1)
/// C_P  = c1 (c2/λᵢ − c3 β − c4) exp(−c5/λᵢ) + c6 λ
/// C_Q  = C_P / λ
/// ```
///
/// The default coefficients are the usual (0.5176, 116, 0.4, 5, 21, 0.0068)
/// set with c1 and c6 scaled by [`AnalyticAeroMap::CQ_CALIBRATION`] so the
/// β = 0 torque coefficient peaks at exactly `CQ_MAX`, reached at
/// λ* = [`AnalyticAeroMap::LAMBDA_CQ_OPT`].
///
/// Thrust comes from actuator-disc momentum theory: the axial induction `a`
/// solving 4a(1−a)² = C_P on a ∈ [0, 1/3] gives C_T = 4a(1−a).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticAeroMap {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    pub c5: f64,
    pub c6: f64,
    /// Tip speed ratios above this are evaluated at the cap.
    pub lambda_max: f64,
}

impl AnalyticAeroMap {
    pub const CQ_CALIBRATION: f64 = 1.160_947_903_788_084;
    pub const LAMBDA_CQ_OPT: f64 = 6.745_137_377_616_071;

    pub fn power_coefficient(&self, lambda: f64, beta_deg: f64) -> f64 {
        let lambda = lambda.clamp(0.0, self.lambda_max);
        let denom = lambda + 0.08 * beta_deg;
        if denom <= 1e-9 {
            return 0.0;
        }
        let inv_li = 1.0 / denom - 0.035 / (beta_deg.powi(3) + 1.0);
        if inv_li <= 0.0 {
            return self.c6 * lambda;
        }
        self.c1 * (self.c2 * inv_li - self.c3 * beta_deg - self.c4) * (-self.c5 * inv_li).exp()
            + self.c6 * lambda
    }

    fn eval_raw(&self, lambda: f64, beta_deg: f64) -> Coefficients {
        let cp = self.power_coefficient(lambda, beta_deg);
        let lambda_c = lambda.clamp(0.0, self.lambda_max);
        let cq = if lambda_c < 1e-6 { CQ_MIN } else { cp / lambda_c };
        Coefficients {
            cq,
            ct: momentum_thrust(cp),
        }
    }
}

impl Default for AnalyticAeroMap {
    fn default() -> Self {
        Self {
            c1: 0.5176 * Self::CQ_CALIBRATION,
            c2: 116.0,
            c3: 0.4,
            c4: 5.0,
            c5: 21.0,
            c6: 0.0068 * Self::CQ_CALIBRATION,
            lambda_max: 20.0,
        }
    }
}

/// C_T = 4a(1−a) with 4a(1−a)² = C_P, restricted to the a ≤ 1/3 branch.
fn momentum_thrust(cp: f64) -> f64 {
    const CP_BETZ: f64 = 16.0 / 27.0;
    if cp <= 0.0 {
        return 0.0;
    }
    if cp >= CP_BETZ {
        return 8.0 / 9.0;
    }
    let (mut lo, mut hi) = (0.0_f64, 1.0 / 3.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if 4.0 * mid * (1.0 - mid).powi(2) < cp {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let a = 0.5 * (lo + hi);
    4.0 * a * (1.0 - a)
}

/// Rectangular (λ, β) grid, values stored λ-major.
#[derive(Debug, Clone, PartialEq)]
pub struct TabularAeroMap {
    lambdas: Vec<f64>,
    betas: Vec<f64>,
    cq: Vec<f64>,
    ct: Vec<f64>,
}

impl TabularAeroMap {
    pub fn new(lambdas: Vec<f64>, betas: Vec<f64>, cq: Vec<f64>, ct: Vec<f64>) -> Result<Self> {
        check_axis("lambda", &lambdas)?;
        check_axis("beta", &betas)?;
        let n = lambdas.len() * betas.len();
        if cq.len() != n || ct.len() != n {
            return Err(Error::Dimension(format!(
                "aero grid {}x{} needs {n} values, got cq={} ct={}",
                lambdas.len(),
                betas.len(),
                cq.len(),
                ct.len()
            )));
        }
        if let Some(bad) = cq.iter().chain(ct.iter()).find(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!("non-finite aero value {bad}")));
        }
        if let Some(bad) = ct.iter().find(|&&v| v < 0.0) {
            return Err(Error::InvalidParameter(format!("negative thrust coefficient {bad}")));
        }
        Ok(Self {
            lambdas,
            betas,
            cq,
            ct,
        })
    }

    /// Sample another map on the given grid.
    pub fn tabulate(source: &AeroMap, lambdas: Vec<f64>, betas: Vec<f64>) -> Result<Self> {
        let mut cq = Vec::with_capacity(lambdas.len() * betas.len());
        let mut ct = Vec::with_capacity(cq.capacity());
        for &l in &lambdas {
            for &b in &betas {
                let c = source.eval(l, b);
                cq.push(c.cq);
                ct.push(c.ct);
            }
        }
        Self::new(lambdas, betas, cq, ct)
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn betas(&self) -> &[f64] {
        &self.betas
    }

    /// Stored value at grid node (i, j).
    pub fn node(&self, i: usize, j: usize) -> Coefficients {
        let k = i * self.betas.len() + j;
        Coefficients {
            cq: self.cq[k],
            ct: self.ct[k],
        }
    }

    fn eval_raw(&self, lambda: f64, beta_deg: f64) -> Coefficients {
        let (i, tl) = locate(&self.lambdas, lambda);
        let (j, tb) = locate(&self.betas, beta_deg);
        let nb = self.betas.len();
        let bilinear = |v: &[f64]| {
            let v00 = v[i * nb + j];
            let v01 = v[i * nb + j + 1];
            let v10 = v[(i + 1) * nb + j];
            let v11 = v[(i + 1) * nb + j + 1];
            (1.0 - tl) * ((1.0 - tb) * v00 + tb * v01) + tl * ((1.0 - tb) * v10 + tb * v11)
        };
        Coefficients {
            cq: bilinear(&self.cq),
            ct: bilinear(&self.ct),
        }
    }

    pub fn read_csv<R: Read>(reader: R, origin: &str) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let header = rdr
            .headers()
            .map_err(|e| Error::parse(origin, e.to_string()))?
            .clone();
        if header.iter().collect::<Vec<_>>() != AERO_CSV_HEADER {
            return Err(Error::parse(
                origin,
                format!("expected header `{}`", AERO_CSV_HEADER.join(",")),
            ));
        }
        let mut rows: Vec<[f64; 4]> = Vec::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| Error::parse(origin, e.to_string()))?;
            if rec.len() != 4 {
                return Err(Error::parse(origin, format!("row {} has {} fields", line + 2, rec.len())));
            }
            let mut row = [0.0; 4];
            for (k, field) in rec.iter().enumerate() {
                row[k] = field
                    .parse()
                    .map_err(|_| Error::parse(origin, format!("row {}: bad number `{field}`", line + 2)))?;
            }
            rows.push(row);
        }
        if rows.is_empty() {
            return Err(Error::parse(origin, "no data rows"));
        }
        let mut lambdas: Vec<f64> = Vec::new();
        for r in &rows {
            if lambdas.last() != Some(&r[0]) {
                lambdas.push(r[0]);
            }
        }
        let nb = rows.len() / lambdas.len();
        if nb * lambdas.len() != rows.len() {
            return Err(Error::parse(origin, "grid is not rectangular"));
        }
        let betas: Vec<f64> = rows[..nb].iter().map(|r| r[1]).collect();
        for (k, r) in rows.iter().enumerate() {
            if r[0] != lambdas[k / nb] || r[1] != betas[k % nb] {
                return Err(Error::parse(
                    origin,
                    format!("row {} breaks the (lambda, beta) grid ordering", k + 2),
                ));
            }
        }
        let cq = rows.iter().map(|r| r[2]).collect();
        let ct = rows.iter().map(|r| r[3]).collect();
        Self::new(lambdas, betas, cq, ct).map_err(|e| Error::parse(origin, e.to_string()))
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_csv(file, &path.display().to_string())
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let io = |e: csv::Error| Error::Numerical(format!("csv write failed: {e}"));
        w.write_record(AERO_CSV_HEADER).map_err(io)?;
        for (i, l) in self.lambdas.iter().enumerate() {
            for (j, b) in self.betas.iter().enumerate() {
                let c = self.node(i, j);
                w.write_record([l.to_string(), b.to_string(), c.cq.to_string(), c.ct.to_string()])
                    .map_err(io)?;
            }
        }
        w.flush().map_err(|e| Error::Numerical(format!("csv flush failed: {e}")))?;
        Ok(())
    }
}

fn check_axis(name: &str, axis: &[f64]) -> Result<()> {
    if axis.len() < 2 {
        return Err(Error::InvalidParameter(format!("{name} axis needs at least 2 nodes")));
    }
    if axis.iter().any(|v| !v.is_finite()) || axis.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter(format!("{name} axis must be strictly increasing")));
    }
    Ok(())
}

/// Cell index and fractional position, with clamping to the hull.
fn locate(axis: &[f64], x: f64) -> (usize, f64) {
    let last = axis.len() - 1;
    if !(x > axis[0]) {
        return (0, 0.0);
    }
    if x >= axis[last] {
        return (last - 1, 1.0);
    }
    let i = axis.partition_point(|&a| a <= x) - 1;
    (i, (x - axis[i]) / (axis[i + 1] - axis[i]))
}
