//! Fixed-step classical Runge–Kutta.

use nalgebra::SVector;

use crate::error::{Error, Result};

/// One RK4 step of ẋ = f(t, x). Fails if any stage derivative or the
/// result is not finite.
pub fn rk4_step<const N: usize>(
    mut f: impl FnMut(f64, &SVector<f64, N>) -> SVector<f64, N>,
    x: &SVector<f64, N>,
    t: f64,
    dt: f64,
) -> Result<SVector<f64, N>> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidParameter(format!("step size must be > 0, got {dt}")));
    }
    let check = |k: &SVector<f64, N>, stage: usize| -> Result<()> {
        if k.iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(Error::NonFinite {
                t,
                what: format!("derivative at RK4 stage {stage}"),
            })
        }
    };
    let h2 = 0.5 * dt;
    let k1 = f(t, x);
    check(&k1, 1)?;
    let k2 = f(t + h2, &(x + k1 * h2));
    check(&k2, 2)?;
    let k3 = f(t + h2, &(x + k2 * h2));
    check(&k3, 3)?;
    let k4 = f(t + dt, &(x + k3 * dt));
    check(&k4, 4)?;
    let next = x + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
    check(&next, 5)?;
    Ok(next)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{Matrix2, Vector1, Vector2};

    #[test]
    fn decay_one_step() {
        let x = rk4_step(|_, x| -x, &Vector1::new(1.0), 0.0, 0.1).unwrap();
        // 1 − h + h²/2 − h³/6 + h⁴/24
        assert!((x[0] - 0.904_837_5).abs() < 1e-12);
    }

    #[test]
    fn zero_rate_keeps_state() {
        let x0 = Vector2::new(3.0, -1.5);
        assert_eq!(rk4_step(|_, _| Vector2::zeros(), &x0, 0.0, 0.5).unwrap(), x0);
    }

    #[test]
    fn fourth_order_convergence() {
        let a = Matrix2::new(0.0, 1.0, -4.0, -0.4);
        let x0 = Vector2::new(1.0, 0.0);
        let exact = (a * 1.0).exp() * x0;
        let err = |n: usize| {
            let dt = 1.0 / n as f64;
            let mut x = x0;
            for k in 0..n {
                x = rk4_step(|_, x| a * x, &x, k as f64 * dt, dt).unwrap();
            }
            (x - exact).norm()
        };
        let ratio = err(20) / err(40);
        assert!((ratio - 16.0).abs() < 1.5, "ratio {ratio}");
    }

    #[test]
    fn non_finite_derivative_aborts() {
        let r = rk4_step(|_, _| Vector1::new(f64::NAN), &Vector1::new(0.0), 2.0, 0.1);
        assert!(matches!(r, Err(Error::NonFinite { .. })));
        assert!(rk4_step(|_, x| -x, &Vector1::new(1.0), 0.0, 0.0).is_err());
    }
}
