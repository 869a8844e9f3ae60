//! Tower bending via the transfer-matrix method and its reduction to an
//! equivalent translational spring at the tower top.
//!
//! The field vector is (w, ψ, M, Q): deflection, slope, bending moment and
//! shear force. Each Euler–Bernoulli segment maps the field at its lower
//! end to its upper end; the tower is clamped at the base and carries a
//! lumped rotor-nacelle mass at the free tip.

use std::path::Path;

use nalgebra::{Matrix2, Matrix4};

use crate::error::{Error, Result};

/// First clamped-free root of 1 + cos x cosh x = 0.
pub const CANTILEVER_ROOT: f64 = 1.875_104_068_711_961;
/// First mode wavenumber of the reference tower (1/m).
pub const KAPPA1: f64 = 1.423e-2;
/// Search range for the first eigenfrequency (rad/s).
pub const OMEGA_SEARCH: (f64, f64) = (0.1, 50.0);
const SCAN_STEP: f64 = 0.01;
const BISECT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamSegment {
    /// (m)
    pub length: f64,
    /// Mass per unit length (kg/m)
    pub mu: f64,
    /// Bending stiffness (N·m²)
    pub ei: f64,
}

impl BeamSegment {
    pub fn new(length: f64, mu: f64, ei: f64) -> Result<Self> {
        for (name, v) in [("length", length), ("mu", mu), ("EI", ei)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!("segment {name} must be > 0, got {v}")));
            }
        }
        Ok(Self { length, mu, ei })
    }

    /// Field transfer matrix at angular frequency `omega`.
    pub fn transfer_matrix(&self, omega: f64) -> Matrix4<f64> {
        let ei = self.ei;
        let l = self.length;
        let b4 = self.mu * omega * omega / ei;
        let b = b4.powf(0.25);
        let x = b * l;
        let (ch, c, sh, s) = (x.cosh(), x.cos(), x.sinh(), x.sin());
        let ss = 0.5 * (ch + c);
        // T/β, U/β², V/β³ with their static limits near β = 0
        let (t1, u2, v3) = if x < 1e-3 {
            (l, 0.5 * l * l, l.powi(3) / 6.0)
        } else {
            (0.5 * (sh + s) / b, 0.5 * (ch - c) / (b * b), 0.5 * (sh - s) / b.powi(3))
        };
        Matrix4::new(
            ss, t1, u2 / ei, v3 / ei, //
            b4 * v3, ss, t1 / ei, u2 / ei, //
            ei * b4 * u2, ei * b4 * v3, ss, t1, //
            ei * b4 * t1, ei * b4 * u2, b4 * v3, ss,
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TowerModel {
    /// Base to top
    pub segments: Vec<BeamSegment>,
    /// Rotor-nacelle mass at the tip (kg)
    pub tip_mass: f64,
}

/// Reference 5 MW tower: 11 equal segments, mass scaled to 347 640 kg and
/// stiffness scaled so the first mode with the rotor-nacelle mass sits at
/// 2.14 rad/s.
const DEFAULT_SEGMENTS: [(f64, f64); 11] = [
    (5431.3172, 5.945867e11),
    (5109.5427, 5.232267e11),
    (4797.4070, 4.584154e11),
    (4494.9136, 3.997414e11),
    (4202.0571, 3.468169e11),
    (3918.8448, 2.992603e11),
    (3646.3300, 2.572101e11),
    (3383.4594, 2.197118e11),
    (3130.2330, 1.864288e11),
    (2886.6380, 1.570441e11),
    (2652.6818, 1.312381e11),
];

impl Default for TowerModel {
    fn default() -> Self {
        let length = 87.6 / DEFAULT_SEGMENTS.len() as f64;
        Self {
            segments: DEFAULT_SEGMENTS
                .iter()
                .map(|&(mu, ei)| BeamSegment { length, mu, ei })
                .collect(),
            tip_mass: 350_000.0,
        }
    }
}

impl TowerModel {
    pub fn new(segments: Vec<BeamSegment>, tip_mass: f64) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::InvalidParameter("tower needs at least one segment".into()));
        }
        for s in &segments {
            BeamSegment::new(s.length, s.mu, s.ei)?;
        }
        if !(tip_mass.is_finite() && tip_mass >= 0.0) {
            return Err(Error::InvalidParameter(format!("tip mass must be >= 0, got {tip_mass}")));
        }
        Ok(Self { segments, tip_mass })
    }

    pub fn total_length(&self) -> f64 {
        self.segments.iter().map(|s| s.length).sum()
    }

    pub fn total_mass(&self) -> f64 {
        self.segments.iter().map(|s| s.mu * s.length).sum()
    }

    /// Tower mass per unit length averaged over the height (kg/m).
    pub fn mean_mass_per_length(&self) -> f64 {
        self.total_mass() / self.total_length()
    }

    /// Product of the segment matrices, base to tip.
    pub fn transfer_matrix(&self, omega: f64) -> Matrix4<f64> {
        self.segments
            .iter()
            .fold(Matrix4::identity(), |acc, s| s.transfer_matrix(omega) * acc)
    }

    /// Boundary determinant: base field (0, 0, M₀, Q₀) mapped to the tip,
    /// where M = 0 and Q + m_tip ω² w = 0.
    pub fn frequency_determinant(&self, omega: f64) -> f64 {
        let t = self.transfer_matrix(omega);
        let mw = self.tip_mass * omega * omega;
        Matrix2::new(
            t[(2, 2)],
            t[(2, 3)],
            t[(3, 2)] + mw * t[(0, 2)],
            t[(3, 3)] + mw * t[(0, 3)],
        )
        .determinant()
    }

    /// Tower description: a `tipmass,<kg>` line, then `length,mu,EI` rows
    /// (an optional `length,mu,EI` header row is accepted).
    pub fn parse_csv(text: &str, origin: &str) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(text.as_bytes());
        let mut tip_mass = None;
        let mut segments = Vec::new();
        for (k, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| Error::parse(origin, e.to_string()))?;
            let fields: Vec<&str> = rec.iter().collect();
            let row = k + 1;
            let num = |s: &str| {
                s.parse::<f64>()
                    .map_err(|e| Error::parse(origin, format!("row {row}: '{s}': {e}")))
            };
            match fields.as_slice() {
                ["tipmass", m] if tip_mass.is_none() && segments.is_empty() => tip_mass = Some(num(m)?),
                ["length", "mu", "EI"] if segments.is_empty() => {}
                [l, m, e] => {
                    let seg = BeamSegment::new(num(l)?, num(m)?, num(e)?)
                        .map_err(|err| Error::parse(origin, format!("row {row}: {err}")))?;
                    segments.push(seg);
                }
                _ => return Err(Error::parse(origin, format!("row {row}: expected `length,mu,EI`"))),
            }
        }
        let tip_mass = tip_mass.ok_or_else(|| Error::parse(origin, "missing `tipmass,<kg>` line"))?;
        Self::new(segments, tip_mass).map_err(|e| Error::parse(origin, e.to_string()))
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_csv(&text, &path.display().to_string())
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("tipmass,{}\nlength,mu,EI\n", self.tip_mass);
        for s in &self.segments {
            out.push_str(&format!("{},{},{:e}\n", s.length, s.mu, s.ei));
        }
        out
    }
}

/// Smallest ω in [`OMEGA_SEARCH`] where the boundary determinant changes
/// sign, scanned at 0.01 rad/s and bisected.
pub fn first_eigenfrequency(tower: &TowerModel) -> Result<f64> {
    let (lo, hi) = OMEGA_SEARCH;
    let det = |w: f64| tower.frequency_determinant(w);
    let steps = ((hi - lo) / SCAN_STEP).round() as usize;
    let mut a = lo;
    let mut da = det(a);
    for k in 1..=steps {
        let b = lo + k as f64 * SCAN_STEP;
        let db = det(b);
        if !(da.is_finite() && db.is_finite()) {
            return Err(Error::Numerical(format!("non-finite determinant near {b} rad/s")));
        }
        if da == 0.0 {
            return Ok(a);
        }
        if da.signum() != db.signum() {
            let (mut x0, mut x1, mut d0) = (a, b, da);
            while x1 - x0 > BISECT_TOL {
                let m = 0.5 * (x0 + x1);
                let dm = det(m);
                if dm.signum() == d0.signum() {
                    x0 = m;
                    d0 = dm;
                } else {
                    x1 = m;
                }
            }
            let root = 0.5 * (x0 + x1);
            // a sign change through a pole would leave a large residual
            if det(root).abs() <= da.abs().max(db.abs()) {
                return Ok(root);
            }
        }
        a = b;
        da = db;
    }
    Err(Error::NoEigenfrequency { lo, hi })
}

/// B_total = ω₁² μ_total / κ₁⁴ (N·m²).
pub fn equivalent_bending_stiffness(omega1: f64, mu_total: f64, kappa1: f64) -> f64 {
    omega1 * omega1 * mu_total / kappa1.powi(4)
}

/// k = 3 B_total / l³ (N/m).
pub fn equivalent_spring_stiffness(b_total: f64, length: f64) -> Result<f64> {
    if !(length.is_finite() && length > 0.0) {
        return Err(Error::InvalidParameter(format!("length must be > 0, got {length}")));
    }
    Ok(3.0 * b_total / length.powi(3))
}

/// Results of the frequency → bending stiffness → spring chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TowerStiffness {
    pub omega1: f64,
    pub mu_total: f64,
    pub b_total: f64,
    pub k_spring: f64,
}

pub fn tower_stiffness(tower: &TowerModel) -> Result<TowerStiffness> {
    let omega1 = first_eigenfrequency(tower)?;
    let mu_total = tower.mean_mass_per_length();
    let b_total = equivalent_bending_stiffness(omega1, mu_total, KAPPA1);
    let k_spring = equivalent_spring_stiffness(b_total, tower.total_length())?;
    Ok(TowerStiffness {
        omega1,
        mu_total,
        b_total,
        k_spring,
    })
}
