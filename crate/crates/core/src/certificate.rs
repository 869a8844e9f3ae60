//! Quadratic stability certificates for TS systems and observers.
//!
//! With an unmeasured premise the error dynamics carry the perturbation
//! Δ(z, ẑ) = Σ (h_i(z) − h_i(ẑ)) (A_i x + B_i u), assumed bounded by μ‖e‖.
//! The observer certificate is a triple (P, Q, μ) with
//! P (A_i − L_i C) + (A_i − L_i C)ᵀ P ⪯ −Q for every rule and
//! [[Q − μ² I, P], [P, I]] ≻ 0.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{is_symmetric, max_sym_eigenvalue, min_sym_eigenvalue, solve_lyapunov, EPS_H};
use crate::ts::TsModel;

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityCertificate {
    pub p: DMatrix<f64>,
    pub q: DMatrix<f64>,
    pub mu: f64,
}

impl StabilityCertificate {
    pub fn new(p: DMatrix<f64>, q: DMatrix<f64>, mu: f64) -> Result<Self> {
        if !p.is_square() || p.shape() != q.shape() {
            return Err(Error::Dimension(format!(
                "P is {:?}, Q is {:?}",
                p.shape(),
                q.shape()
            )));
        }
        if !(mu.is_finite() && mu >= 0.0) {
            return Err(Error::InvalidParameter(format!("mu must be >= 0, got {mu}")));
        }
        for (name, m) in [("P", &p), ("Q", &q)] {
            if !is_symmetric(m) {
                return Err(Error::InvalidParameter(format!("{name} is not symmetric")));
            }
            if min_sym_eigenvalue(m) <= EPS_H {
                return Err(Error::InvalidParameter(format!("{name} is not positive definite")));
            }
        }
        Ok(Self { p, q, mu })
    }
}

/// P ≻ 0 and Aᵢᵀ P + P Aᵢ ≺ 0 for every matrix in `a_list`.
pub fn lyapunov_negativity_check(p: &DMatrix<f64>, a_list: &[DMatrix<f64>]) -> Result<bool> {
    if !is_symmetric(p) {
        return Err(Error::InvalidParameter("P is not symmetric".into()));
    }
    if let Some(a) = a_list.iter().find(|a| a.shape() != p.shape()) {
        return Err(Error::Dimension(format!(
            "A is {:?}, P is {:?}",
            a.shape(),
            p.shape()
        )));
    }
    if min_sym_eigenvalue(p) <= EPS_H {
        return Ok(false);
    }
    Ok(a_list
        .iter()
        .all(|a| max_sym_eigenvalue(&(a.transpose() * p + p * a)) < -EPS_H))
}

/// Both observer matrix inequalities for every rule.
pub fn observer_lmi_check(
    cert: &StabilityCertificate,
    a_list: &[DMatrix<f64>],
    l_list: &[DMatrix<f64>],
    c: &DMatrix<f64>,
) -> Result<bool> {
    let n = cert.p.nrows();
    if a_list.len() != l_list.len() {
        return Err(Error::Dimension(format!(
            "{} system matrices but {} gains",
            a_list.len(),
            l_list.len()
        )));
    }
    if c.ncols() != n {
        return Err(Error::Dimension(format!("C has {} columns, P is {n}×{n}", c.ncols())));
    }
    for (a, l) in a_list.iter().zip(l_list) {
        if a.shape() != (n, n) || l.shape() != (n, c.nrows()) {
            return Err(Error::Dimension(format!(
                "A is {:?}, L is {:?}, expected ({n}, {n}) and ({n}, {})",
                a.shape(),
                l.shape(),
                c.nrows()
            )));
        }
    }
    let p = &cert.p;
    for (a, l) in a_list.iter().zip(l_list) {
        let acl = a - l * c;
        let m = p * &acl + acl.transpose() * p + &cert.q;
        if max_sym_eigenvalue(&m) > EPS_H {
            return Ok(false);
        }
    }
    let mut block = DMatrix::zeros(2 * n, 2 * n);
    let qm = &cert.q - DMatrix::identity(n, n) * cert.mu.powi(2);
    block.view_mut((0, 0), (n, n)).copy_from(&qm);
    block.view_mut((0, n), (n, n)).copy_from(p);
    block.view_mut((n, 0), (n, n)).copy_from(p);
    block
        .view_mut((n, n), (n, n))
        .copy_from(&DMatrix::identity(n, n));
    Ok(min_sym_eigenvalue(&block) > EPS_H)
}

fn check_box(name: &str, b: &[(f64, f64)]) -> Result<()> {
    if let Some((lo, hi)) = b.iter().find(|(lo, hi)| !(lo.is_finite() && hi.is_finite() && lo < hi)) {
        return Err(Error::InvalidParameter(format!("{name} box has degenerate side [{lo}, {hi}]")));
    }
    Ok(())
}

fn uniform_in(rng: &mut ChaCha8Rng, b: &[(f64, f64)]) -> DVector<f64> {
    DVector::from_iterator(b.len(), b.iter().map(|&(lo, hi)| rng.random_range(lo..hi)))
}

/// Empirical sup of ‖Δ(z, ẑ)‖ / ‖x − x̂‖ over `samples` random pairs
/// (x, x̂) drawn uniformly from `state_box`. For each pair the input is
/// maximized over the corners of `input_box`, where the supremum of a
/// premise-independent input lies. This is a lower bound on the true μ.
pub fn estimate_mu(
    model: &TsModel,
    state_box: &[(f64, f64)],
    input_box: &[(f64, f64)],
    samples: usize,
    seed: u64,
) -> Result<f64> {
    let n = model.n_states();
    let m = model.n_inputs();
    if state_box.len() != n || input_box.len() != m {
        return Err(Error::Dimension(format!(
            "boxes have {} and {} sides, model has {n} states and {m} inputs",
            state_box.len(),
            input_box.len()
        )));
    }
    check_box("state", state_box)?;
    check_box("input", input_box)?;
    if m > 16 {
        return Err(Error::InvalidParameter("too many inputs for corner enumeration".into()));
    }
    let subs = model.submodels();
    let corners: Vec<DVector<f64>> = (0..1usize << m)
        .map(|k| {
            DVector::from_iterator(
                m,
                input_box
                    .iter()
                    .enumerate()
                    .map(|(j, &(lo, hi))| if k >> j & 1 == 0 { lo } else { hi }),
            )
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = 0.0_f64;
    for _ in 0..samples {
        let x = uniform_in(&mut rng, state_box);
        let xh = uniform_in(&mut rng, state_box);
        let e = (&x - &xh).norm();
        if e < 1e-12 {
            continue;
        }
        for u in &corners {
            let h = model.memberships_at(&x, u);
            let hh = model.memberships_at(&xh, u);
            // Σ d_i = 0, so only the offsets from rule 0 contribute
            let mut delta = DVector::zeros(n);
            for i in 1..subs.len() {
                let d = h[i] - hh[i];
                delta += ((&subs[i].a - &subs[0].a) * &x + (&subs[i].b - &subs[0].b) * u) * d;
            }
            best = best.max(delta.norm() / e);
        }
    }
    Ok(best)
}

/// Outcome of the grid search for an observer certificate.
#[derive(Debug, Clone)]
pub struct FeasibilityReport {
    pub feasible: bool,
    pub certificate: Option<StabilityCertificate>,
    pub mu: f64,
    /// Candidates with a positive definite P that were tested
    pub candidates: usize,
    /// Best smallest eigenvalue of Q − μ²I − P² seen (block test margin)
    pub best_block_margin: f64,
}

/// `count` log-spaced values on [lo, hi].
pub fn logspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.log10(), hi.log10());
    (0..count)
        .map(|k| 10f64.powf(a + (b - a) * k as f64 / (count - 1) as f64))
        .collect()
}

/// Search Q = q I over `q_grid`; for each q and each anchor closed loop
/// (every vertex and the midpoint blend) take P from the Lyapunov equation
/// anchorᵀ P + P anchor + Q = 0, then test the certificate.
pub fn lmi_feasibility_search(
    a_list: &[DMatrix<f64>],
    l_list: &[DMatrix<f64>],
    c: &DMatrix<f64>,
    mu: f64,
    q_grid: &[f64],
) -> Result<FeasibilityReport> {
    if a_list.is_empty() || a_list.len() != l_list.len() {
        return Err(Error::Dimension("need one gain per system matrix".into()));
    }
    let n = a_list[0].nrows();
    let closed: Vec<DMatrix<f64>> = a_list.iter().zip(l_list).map(|(a, l)| a - l * c).collect();
    let k = closed.len() as f64;
    let mut anchors = closed.clone();
    anchors.push(closed.iter().fold(DMatrix::zeros(n, n), |s, m| s + m) / k);
    let mut report = FeasibilityReport {
        feasible: false,
        certificate: None,
        mu,
        candidates: 0,
        best_block_margin: f64::NEG_INFINITY,
    };
    for &q in q_grid {
        let qm = DMatrix::identity(n, n) * q;
        for anchor in &anchors {
            let Ok(p) = solve_lyapunov(anchor, &qm) else {
                continue;
            };
            let Ok(cert) = StabilityCertificate::new(p, qm.clone(), mu) else {
                continue;
            };
            report.candidates += 1;
            let margin = min_sym_eigenvalue(&(&cert.q - &cert.p * &cert.p))
                - mu * mu;
            report.best_block_margin = report.best_block_margin.max(margin);
            if observer_lmi_check(&cert, a_list, l_list, c)? {
                report.feasible = true;
                report.certificate = Some(cert);
                return Ok(report);
            }
        }
    }
    Ok(report)
}
