//! Small dense linear algebra helpers shared by the design and certificate
//! modules.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Strictness margin for every definiteness and Hurwitz decision.
pub const EPS_H: f64 = 1e-9;

/// Largest real part among the eigenvalues of `m`.
pub fn spectral_abscissa(m: &DMatrix<f64>) -> f64 {
    m.complex_eigenvalues()
        .iter()
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// All eigenvalue real parts are below −[`EPS_H`].
pub fn is_hurwitz(m: &DMatrix<f64>) -> bool {
    assert!(m.is_square(), "is_hurwitz needs a square matrix");
    spectral_abscissa(m) < -EPS_H
}

pub fn is_symmetric(m: &DMatrix<f64>) -> bool {
    if !m.is_square() {
        return false;
    }
    let tol = 1e-12 * m.amax().max(1.0);
    (m - m.transpose()).amax() <= tol
}

pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Eigenvalues of the symmetric part of `m`, ascending.
pub fn sym_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let mut ev: Vec<f64> = symmetrize(m)
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .collect();
    ev.sort_by(f64::total_cmp);
    ev
}

pub fn min_sym_eigenvalue(m: &DMatrix<f64>) -> f64 {
    sym_eigenvalues(m)[0]
}

pub fn max_sym_eigenvalue(m: &DMatrix<f64>) -> f64 {
    *sym_eigenvalues(m).last().expect("non-empty matrix")
}

/// Solve Aᵀ P + P A + Q = 0 through the n²×n² Kronecker system, with one
/// step of iterative refinement. Intended for the n ≤ 10 systems used here.
pub fn solve_lyapunov(a: &DMatrix<f64>, q: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    if !a.is_square() || q.shape() != (n, n) {
        return Err(Error::Dimension(format!(
            "lyapunov: A is {:?}, Q is {:?}",
            a.shape(),
            q.shape()
        )));
    }
    let at = a.transpose();
    let eye = DMatrix::<f64>::identity(n, n);
    // vec(Aᵀ P + P A) = (I ⊗ Aᵀ + Aᵀ ⊗ I) vec(P) for column-major vec
    let k = eye.kronecker(&at) + at.kronecker(&eye);
    let lu = k.lu();
    let rhs = -DMatrix::from_column_slice(n * n, 1, q.as_slice());
    let mut x = lu
        .solve(&rhs)
        .ok_or_else(|| Error::Numerical("lyapunov operator is singular".into()))?;
    for _ in 0..2 {
        let p = DMatrix::from_column_slice(n, n, x.as_slice());
        let r = &at * &p + &p * a + q;
        let r = DMatrix::from_column_slice(n * n, 1, r.as_slice());
        match lu.solve(&(-r)) {
            Some(dx) => x += dx,
            None => break,
        }
    }
    let p = DMatrix::from_column_slice(n, n, x.as_slice());
    if p.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("lyapunov solution is not finite".into()));
    }
    Ok(symmetrize(&p))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hurwitz_examples() {
        assert!(is_hurwitz(&DMatrix::from_diagonal(&nalgebra::dvector![-1.0, -2.0])));
        assert!(!is_hurwitz(&DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0])));
        assert!(!is_hurwitz(&DMatrix::from_row_slice(1, 1, &[-1e-10])));
    }

    #[test]
    fn lyapunov_small() {
        let a = DMatrix::from_row_slice(2, 2, &[-1.0, 2.0, 0.0, -3.0]);
        let q = DMatrix::identity(2, 2);
        let p = solve_lyapunov(&a, &q).unwrap();
        let r = a.transpose() * &p + &p * &a + &q;
        assert!(r.amax() < 1e-14);
        assert!(min_sym_eigenvalue(&p) > 0.0);
    }

    #[test]
    fn symmetric_checks() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(is_symmetric(&m));
        assert_eq!(sym_eigenvalues(&m), vec![-1.0, 3.0]);
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 1.0]);
        assert!(!is_symmetric(&m));
    }
}
