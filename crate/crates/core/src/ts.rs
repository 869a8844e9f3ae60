//! Takagi-Sugeno models built with the sector-nonlinearity approach.
//!
//! Each scalar nonlinearity f_j(z) bounded by [f_min, f_max] is split into
//! the weights w1 = (f − f_min)/(f_max − f_min) and w2 = 1 − w1. With N_l
//! nonlinearities the model has 2^N_l vertex submodels whose memberships
//! are products of one weight per nonlinearity. Rule `i` takes the `f_max`
//! vertex of nonlinearity `j` when bit `j` of `i` is clear, so for a single
//! nonlinearity rule 0 is the `f_max` submodel.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Tolerance on Σh_i = 1 accepted by [`ts_blend`].
pub const PARTITION_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectorBounds {
    f_min: f64,
    f_max: f64,
}

impl SectorBounds {
    pub fn new(f_min: f64, f_max: f64) -> Result<Self> {
        if !(f_min.is_finite() && f_max.is_finite() && f_min < f_max) {
            return Err(Error::InvalidParameter(format!(
                "sector bounds need f_min < f_max, got [{f_min}, {f_max}]"
            )));
        }
        Ok(Self { f_min, f_max })
    }

    pub fn f_min(&self) -> f64 {
        self.f_min
    }

    pub fn f_max(&self) -> f64 {
        self.f_max
    }

    pub fn clamp(&self, f: f64) -> f64 {
        f.clamp(self.f_min, self.f_max)
    }

    pub fn contains(&self, f: f64) -> bool {
        f >= self.f_min && f <= self.f_max
    }
}

/// Sector weights (w1, w2) of `f`, computed after clamping into the sector.
pub fn sector_weights(f: f64, bounds: &SectorBounds) -> (f64, f64) {
    let f = bounds.clamp(f);
    let span = bounds.f_max - bounds.f_min;
    let w1 = (f - bounds.f_min) / span;
    let w2 = (bounds.f_max - f) / span;
    (w1, w2)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TsSubmodel {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
}

/// Maps (state, input) to the values of each nonlinearity.
pub type PremiseFn = Arc<dyn Fn(&DVector<f64>, &DVector<f64>) -> Vec<f64> + Send + Sync>;

/// One scalar nonlinearity entering the system as `f(z) · a_dir` (and
/// optionally `f(z) · b_dir` in the input matrix).
#[derive(Debug, Clone)]
pub struct SectorTerm {
    pub bounds: SectorBounds,
    pub a_dir: DMatrix<f64>,
    pub b_dir: Option<DMatrix<f64>>,
}

#[derive(Clone)]
pub struct TsModel {
    submodels: Vec<TsSubmodel>,
    c: DMatrix<f64>,
    bounds: Vec<SectorBounds>,
    premise: PremiseFn,
}

impl fmt::Debug for TsModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TsModel")
            .field("submodels", &self.submodels)
            .field("c", &self.c)
            .field("bounds", &self.bounds)
            .finish_non_exhaustive()
    }
}

impl TsModel {
    pub fn new(
        submodels: Vec<TsSubmodel>,
        c: DMatrix<f64>,
        bounds: Vec<SectorBounds>,
        premise: PremiseFn,
    ) -> Result<Self> {
        let expected = 1usize
            .checked_shl(bounds.len() as u32)
            .ok_or_else(|| Error::InvalidParameter("too many nonlinearities".into()))?;
        if submodels.len() != expected {
            return Err(Error::Dimension(format!(
                "{} nonlinearities need {expected} submodels, got {}",
                bounds.len(),
                submodels.len()
            )));
        }
        let n = submodels[0].a.nrows();
        let m = submodels[0].b.ncols();
        for (i, s) in submodels.iter().enumerate() {
            if s.a.shape() != (n, n) || s.b.shape() != (n, m) {
                return Err(Error::Dimension(format!(
                    "submodel {i}: A is {:?}, B is {:?}, expected ({n}, {n}) and ({n}, {m})",
                    s.a.shape(),
                    s.b.shape()
                )));
            }
        }
        if c.ncols() != n {
            return Err(Error::Dimension(format!(
                "C has {} columns, state dimension is {n}",
                c.ncols()
            )));
        }
        Ok(Self {
            submodels,
            c,
            bounds,
            premise,
        })
    }

    /// Build all 2^N_l vertex submodels of `A(z) = a0 + Σ f_j(z) a_dir_j`
    /// (and likewise for B).
    pub fn from_sector_terms(
        a0: DMatrix<f64>,
        b0: DMatrix<f64>,
        c: DMatrix<f64>,
        terms: Vec<SectorTerm>,
        premise: PremiseFn,
    ) -> Result<Self> {
        for (j, t) in terms.iter().enumerate() {
            if t.a_dir.shape() != a0.shape() {
                return Err(Error::Dimension(format!("term {j}: a_dir shape mismatch")));
            }
            if let Some(bd) = &t.b_dir {
                if bd.shape() != b0.shape() {
                    return Err(Error::Dimension(format!("term {j}: b_dir shape mismatch")));
                }
            }
        }
        let rules = 1usize << terms.len();
        let submodels = (0..rules)
            .map(|i| {
                let mut a = a0.clone();
                let mut b = b0.clone();
                for (j, t) in terms.iter().enumerate() {
                    let f = if i >> j & 1 == 0 {
                        t.bounds.f_max
                    } else {
                        t.bounds.f_min
                    };
                    a += &t.a_dir * f;
                    if let Some(bd) = &t.b_dir {
                        b += bd * f;
                    }
                }
                TsSubmodel { a, b }
            })
            .collect();
        let bounds = terms.iter().map(|t| t.bounds).collect();
        Self::new(submodels, c, bounds, premise)
    }

    pub fn submodels(&self) -> &[TsSubmodel] {
        &self.submodels
    }

    pub fn output_matrix(&self) -> &DMatrix<f64> {
        &self.c
    }

    pub fn bounds(&self) -> &[SectorBounds] {
        &self.bounds
    }

    pub fn n_rules(&self) -> usize {
        self.submodels.len()
    }

    pub fn n_states(&self) -> usize {
        self.submodels[0].a.nrows()
    }

    pub fn n_inputs(&self) -> usize {
        self.submodels[0].b.ncols()
    }

    pub fn premise_values(&self, x: &DVector<f64>, u: &DVector<f64>) -> Vec<f64> {
        (self.premise)(x, u)
    }

    /// Membership vector h for the given nonlinearity values.
    pub fn memberships(&self, values: &[f64]) -> Result<Vec<f64>> {
        if values.len() != self.bounds.len() {
            return Err(Error::Dimension(format!(
                "expected {} premise values, got {}",
                self.bounds.len(),
                values.len()
            )));
        }
        let weights: Vec<(f64, f64)> = values
            .iter()
            .zip(&self.bounds)
            .map(|(&f, b)| sector_weights(f, b))
            .collect();
        Ok((0..self.n_rules())
            .map(|i| {
                weights
                    .iter()
                    .enumerate()
                    .map(|(j, &(w1, w2))| if i >> j & 1 == 0 { w1 } else { w2 })
                    .product()
            })
            .collect())
    }

    pub fn memberships_at(&self, x: &DVector<f64>, u: &DVector<f64>) -> Vec<f64> {
        self.memberships(&self.premise_values(x, u))
            .expect("premise function returns one value per nonlinearity")
    }

    /// Σ h_i (A_i x + B_i u).
    pub fn derivative(&self, x: &DVector<f64>, u: &DVector<f64>) -> DVector<f64> {
        let h = self.memberships_at(x, u);
        let (a, b) = ts_blend(self, &h).expect("memberships have model length");
        a * x + b * u
    }
}

/// Convex combination (Σ h_i A_i, Σ h_i B_i) of the submodel matrices.
pub fn ts_blend(model: &TsModel, h: &[f64]) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    if h.len() != model.n_rules() {
        return Err(Error::Dimension(format!(
            "membership vector has length {}, model has {} rules",
            h.len(),
            model.n_rules()
        )));
    }
    let sum: f64 = h.iter().sum();
    if (sum - 1.0).abs() > PARTITION_TOL {
        return Err(Error::InvalidParameter(format!(
            "memberships sum to {sum}, not 1"
        )));
    }
    let n = model.n_states();
    let m = model.n_inputs();
    let mut a = DMatrix::zeros(n, n);
    let mut b = DMatrix::zeros(n, m);
    for (hi, s) in h.iter().zip(&model.submodels) {
        a += &s.a * *hi;
        b += &s.b * *hi;
    }
    Ok((a, b))
}

/// Max over samples of ‖A_blend − A_nl‖ / ‖A_nl‖ in the max-abs norm
/// (absolute deviation where ‖A_nl‖ = 0).
pub fn exactness_check<S>(
    model: &TsModel,
    samples: &[S],
    premise_of: impl Fn(&S) -> Vec<f64>,
    nonlinear_a: impl Fn(&S) -> DMatrix<f64>,
) -> Result<f64> {
    let mut worst = 0.0_f64;
    for s in samples {
        let h = model.memberships(&premise_of(s))?;
        let (a_blend, _) = ts_blend(model, &h)?;
        let a_nl = nonlinear_a(s);
        if a_nl.shape() != a_blend.shape() {
            return Err(Error::Dimension("nonlinear matrix shape mismatch".into()));
        }
        let scale = a_nl.amax();
        let dev = (&a_blend - &a_nl).amax();
        worst = worst.max(if scale > 0.0 { dev / scale } else { dev });
    }
    Ok(worst)
}

/// Pendulum nonlinearity f(x1) = −(g/l) sin(x1)/x1, equal to −g/l at 0.
pub fn pendulum_f(x1: f64, g: f64, l: f64) -> f64 {
    if x1 == 0.0 {
        -g / l
    } else {
        -(g / l) * x1.sin() / x1
    }
}

/// Pendulum A(x) = [[0, 1], [f(x1), 0]].
pub fn pendulum_nonlinear_a(x1: f64, g: f64, l: f64) -> DMatrix<f64> {
    DMatrix::from_row_slice(2, 2, &[0.0, 1.0, pendulum_f(x1, g, l), 0.0])
}

/// Angle mapped into [−π, π). The pendulum dynamics are 2π-periodic in
/// the angle, so the TS pendulum evaluated on the wrapped angle covers
/// trajectories that swing over the top.
pub fn wrap_angle(x: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    x - two_pi * ((x + std::f64::consts::PI) / two_pi).floor()
}

/// Raw pendulum dynamics φ̈ = −(g/l) sin φ + M/(m l²).
pub fn pendulum_rhs(x: &DVector<f64>, torque: f64, m: f64, l: f64, g: f64) -> DVector<f64> {
    DVector::from_vec(vec![x[1], -(g / l) * x[0].sin() + torque / (m * l * l)])
}

/// Two-rule TS pendulum on φ ∈ [−π, π], where f ranges over [−g/l, 0].
pub fn build_pendulum_fixture(m: f64, l: f64, g: f64) -> Result<TsModel> {
    if !(m > 0.0 && l > 0.0) {
        return Err(Error::InvalidParameter("pendulum needs m, l > 0".into()));
    }
    let bounds = SectorBounds::new(-g / l, 0.0)?;
    let a0 = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
    let b0 = DMatrix::from_row_slice(2, 1, &[0.0, 1.0 / (m * l * l)]);
    let mut a_dir = DMatrix::zeros(2, 2);
    a_dir[(1, 0)] = 1.0;
    let premise: PremiseFn = Arc::new(move |x, _u| vec![pendulum_f(x[0], g, l)]);
    TsModel::from_sector_terms(
        a0,
        b0,
        DMatrix::from_row_slice(1, 2, &[1.0, 0.0]),
        vec![SectorTerm {
            bounds,
            a_dir,
            b_dir: None,
        }],
        premise,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn bounds() -> SectorBounds {
        SectorBounds::new(-2.0, 3.0).unwrap()
    }

    #[test]
    fn weights_at_boundaries_and_midpoint() {
        assert_eq!(sector_weights(-2.0, &bounds()), (0.0, 1.0));
        assert_eq!(sector_weights(3.0, &bounds()), (1.0, 0.0));
        assert_eq!(sector_weights(0.5, &bounds()), (0.5, 0.5));
    }

    #[test]
    fn weights_clamp_outside_sector() {
        assert_eq!(sector_weights(-10.0, &bounds()), (0.0, 1.0));
        assert_eq!(sector_weights(10.0, &bounds()), (1.0, 0.0));
    }

    #[test]
    fn degenerate_bounds_rejected() {
        assert!(SectorBounds::new(1.0, 1.0).is_err());
        assert!(SectorBounds::new(2.0, 1.0).is_err());
        assert!(SectorBounds::new(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn blend_vertex_and_midpoint() {
        let model = build_pendulum_fixture(1.0, 1.0, 9.81).unwrap();
        let s = model.submodels();
        let (a, b) = ts_blend(&model, &[1.0, 0.0]).unwrap();
        assert_eq!((a, b), (s[0].a.clone(), s[0].b.clone()));
        let (a, _) = ts_blend(&model, &[0.5, 0.5]).unwrap();
        assert_eq!(a, (&s[0].a + &s[1].a) * 0.5);
    }

    #[test]
    fn blend_rejects_bad_memberships() {
        let model = build_pendulum_fixture(1.0, 1.0, 9.81).unwrap();
        assert!(ts_blend(&model, &[1.0]).is_err());
        assert!(ts_blend(&model, &[0.7, 0.7]).is_err());
    }

    #[test]
    fn pendulum_blend_at_quarter_turn() {
        let (g, l) = (9.81, 1.0);
        let model = build_pendulum_fixture(1.0, l, g).unwrap();
        let x1 = PI / 2.0;
        let h = model.memberships(&[pendulum_f(x1, g, l)]).unwrap();
        let (a, _) = ts_blend(&model, &h).unwrap();
        let expected = -2.0 * g / (l * PI);
        assert!((a[(1, 0)] - expected).abs() < 1e-14);
    }

    #[test]
    fn pendulum_fixture_structure() {
        let model = build_pendulum_fixture(2.0, 1.0, 9.81).unwrap();
        let s = model.submodels();
        assert_eq!(s[0].a[(0, 1)], 1.0);
        assert_eq!(s[1].a[(0, 1)], 1.0);
        assert_eq!(s[0].a[(1, 0)], 0.0);
        assert_eq!(s[1].a[(1, 0)], -9.81);
        assert_eq!(s[0].b[(1, 0)], 0.5);
        assert_eq!(pendulum_f(0.0, 9.81, 1.0), -9.81);
        assert!(build_pendulum_fixture(0.0, 1.0, 9.81).is_err());
    }

    #[test]
    fn pendulum_bounds_by_dense_sampling() {
        let (g, l) = (9.81, 1.0);
        let n = 200_001;
        let (mut lo, mut hi) = (f64::MAX, f64::MIN);
        for k in 0..n {
            let x = -PI + 2.0 * PI * k as f64 / (n - 1) as f64;
            let f = pendulum_f(x, g, l);
            lo = lo.min(f);
            hi = hi.max(f);
        }
        let b = build_pendulum_fixture(1.0, l, g).unwrap().bounds()[0];
        assert!((lo - b.f_min()).abs() < 1e-9);
        assert!((hi - b.f_max()).abs() < 1e-9);
    }

    #[test]
    fn single_sample_exactness() {
        let (g, l) = (9.81, 1.0);
        let model = build_pendulum_fixture(1.0, l, g).unwrap();
        let dev = exactness_check(
            &model,
            &[0.7],
            |&x| vec![pendulum_f(x, g, l)],
            |&x| pendulum_nonlinear_a(x, g, l),
        )
        .unwrap();
        assert!(dev <= 1e-15);
        // a wrong reference matrix shows up only at that state
        let dev = exactness_check(
            &model,
            &[0.7],
            |&x| vec![pendulum_f(x, g, l)],
            |_| DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]),
        )
        .unwrap();
        assert!((dev - (pendulum_f(0.7, g, l) + 1.0).abs()).abs() < 1e-12);
    }

    #[test]
    fn permutation_builder_two_nonlinearities() {
        let a0 = DMatrix::<f64>::zeros(2, 2);
        let b0 = DMatrix::<f64>::zeros(2, 1);
        let mut d1 = DMatrix::zeros(2, 2);
        d1[(0, 0)] = 1.0;
        let mut d2 = DMatrix::zeros(2, 2);
        d2[(1, 1)] = 1.0;
        let terms = vec![
            SectorTerm {
                bounds: SectorBounds::new(-1.0, 1.0).unwrap(),
                a_dir: d1,
                b_dir: None,
            },
            SectorTerm {
                bounds: SectorBounds::new(0.0, 4.0).unwrap(),
                a_dir: d2,
                b_dir: None,
            },
        ];
        let premise: PremiseFn = Arc::new(|x, _| vec![x[0].sin(), x[1] * x[1]]);
        let model =
            TsModel::from_sector_terms(a0, b0, DMatrix::identity(2, 2), terms, premise).unwrap();
        assert_eq!(model.n_rules(), 4);
        let diag: Vec<(f64, f64)> = model
            .submodels()
            .iter()
            .map(|s| (s.a[(0, 0)], s.a[(1, 1)]))
            .collect();
        assert_eq!(diag, vec![(1.0, 4.0), (-1.0, 4.0), (1.0, 0.0), (-1.0, 0.0)]);
        let x = DVector::from_vec(vec![0.3, 1.2]);
        let u = DVector::from_vec(vec![0.0]);
        let h = model.memberships_at(&x, &u);
        let (a, _) = ts_blend(&model, &h).unwrap();
        assert!((a[(0, 0)] - 0.3_f64.sin()).abs() < 1e-15);
        assert!((a[(1, 1)] - 1.44).abs() < 1e-15);
    }

    #[test]
    fn rule_count_must_match() {
        let s = TsSubmodel {
            a: DMatrix::zeros(2, 2),
            b: DMatrix::zeros(2, 1),
        };
        let premise: PremiseFn = Arc::new(|_, _| vec![0.0]);
        let r = TsModel::new(
            vec![s.clone(), s.clone(), s],
            DMatrix::identity(2, 2),
            vec![SectorBounds::new(0.0, 1.0).unwrap()],
            premise,
        );
        assert!(r.is_err());
    }
}
