use nalgebra::DVector;

use crate::error::{check_dim, Error, Result};

/// A convex function exposed through its value and proximal oracles.
///
/// Oracles are treated as exact; `prox(x, 0)` must return `x`.
pub trait ProxFunction: Send + Sync + std::fmt::Debug {
    fn value(&self, x: &DVector<f64>) -> f64;

    /// `argmin_y |y - x|^2 / (2 tau) + f(y)` for `tau >= 0`.
    fn prox(&self, x: &DVector<f64>, tau: f64) -> DVector<f64>;

    /// Moreau envelope computed from the proximal point.
    fn moreau_envelope(&self, x: &DVector<f64>, tau: f64) -> f64 {
        if tau <= 0.0 {
            return self.value(x);
        }
        let p = self.prox(x, tau);
        (x - &p).norm_squared() / (2.0 * tau) + self.value(&p)
    }
}

fn check_tau(tau: f64) -> Result<()> {
    if tau > 0.0 && tau.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("prox step must be positive, got {tau}")))
    }
}

/// `f(y) = sum_i |y_i|`.
#[derive(Debug, Clone, Copy, Default)]
pub struct AbsValue;

/// `f(y) = |y|_2`.
#[derive(Debug, Clone, Copy, Default)]
pub struct L2Norm;

/// `f(y) = a^T y + b`.
#[derive(Debug, Clone)]
pub struct LinearFunction {
    pub a: DVector<f64>,
    pub b: f64,
}

/// `f(y) = (scale / 2) |y|^2`.
#[derive(Debug, Clone, Copy)]
pub struct QuadraticNorm {
    pub scale: f64,
}

impl ProxFunction for AbsValue {
    fn value(&self, x: &DVector<f64>) -> f64 {
        x.iter().map(|v| v.abs()).sum()
    }

    fn prox(&self, x: &DVector<f64>, tau: f64) -> DVector<f64> {
        x.map(|v| v.signum() * (v.abs() - tau).max(0.0))
    }
}

impl ProxFunction for L2Norm {
    fn value(&self, x: &DVector<f64>) -> f64 {
        x.norm()
    }

    fn prox(&self, x: &DVector<f64>, tau: f64) -> DVector<f64> {
        let n = x.norm();
        if n <= tau {
            DVector::zeros(x.len())
        } else {
            x * (1.0 - tau / n)
        }
    }
}

impl ProxFunction for LinearFunction {
    fn value(&self, x: &DVector<f64>) -> f64 {
        self.a.dot(x) + self.b
    }

    fn prox(&self, x: &DVector<f64>, tau: f64) -> DVector<f64> {
        x - &self.a * tau
    }
}

impl ProxFunction for QuadraticNorm {
    fn value(&self, x: &DVector<f64>) -> f64 {
        0.5 * self.scale * x.norm_squared()
    }

    fn prox(&self, x: &DVector<f64>, tau: f64) -> DVector<f64> {
        x / (1.0 + self.scale * tau)
    }
}

/// Soft thresholding.
pub fn prox_abs(x: &DVector<f64>, tau: f64) -> Result<DVector<f64>> {
    check_tau(tau)?;
    Ok(AbsValue.prox(x, tau))
}

/// Block soft thresholding.
pub fn prox_l2norm(x: &DVector<f64>, tau: f64) -> Result<DVector<f64>> {
    check_tau(tau)?;
    Ok(L2Norm.prox(x, tau))
}

pub fn prox_linear(a: &DVector<f64>, x: &DVector<f64>, tau: f64) -> Result<DVector<f64>> {
    check_tau(tau)?;
    check_dim(a.len(), x.len())?;
    Ok(x - a * tau)
}

/// Prox of `(scale / 2) |y|^2`.
pub fn prox_quadratic(scale: f64, x: &DVector<f64>, tau: f64) -> Result<DVector<f64>> {
    check_tau(tau)?;
    Ok(QuadraticNorm { scale }.prox(x, tau))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn v(xs: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(xs)
    }

    #[test]
    fn catalog_examples() {
        assert_eq!(prox_abs(&v(&[3.0]), 1.0).unwrap(), v(&[2.0]));
        assert_eq!(prox_abs(&v(&[0.5]), 1.0).unwrap(), v(&[0.0]));
        assert_eq!(prox_quadratic(1.0, &v(&[2.0]), 1.0).unwrap(), v(&[1.0]));
        assert!(prox_abs(&v(&[1.0]), 0.0).is_err());
        assert!(prox_l2norm(&v(&[1.0]), -1.0).is_err());
        assert!(prox_linear(&v(&[1.0, 2.0]), &v(&[1.0]), 1.0).is_err());
    }

    /// The prox point minimizes the proximal objective: check against small
    /// perturbations in every coordinate direction.
    #[test]
    fn prox_optimality_residual() {
        let fs: Vec<Box<dyn ProxFunction>> = vec![
            Box::new(AbsValue),
            Box::new(L2Norm),
            Box::new(LinearFunction { a: v(&[0.3, -1.2, 0.7]), b: 0.5 }),
            Box::new(QuadraticNorm { scale: 2.5 }),
        ];
        let x = v(&[1.3, -0.2, 0.05]);
        for f in &fs {
            for &tau in &[0.1, 0.7, 3.0] {
                let p = f.prox(&x, tau);
                let obj = |y: &DVector<f64>| (y - &x).norm_squared() / (2.0 * tau) + f.value(y);
                let base = obj(&p);
                for i in 0..3 {
                    for &h in &[1e-4, -1e-4] {
                        let mut y = p.clone();
                        y[i] += h;
                        assert!(obj(&y) >= base - 1e-12, "{f:?} tau={tau}");
                    }
                }
            }
        }
    }

    #[test]
    fn moreau_envelope_of_quadratic() {
        // (1/2)|y|^2 has envelope |x|^2 / (2 (1 + tau))
        let x = v(&[2.0, -1.0]);
        let e = QuadraticNorm { scale: 1.0 }.moreau_envelope(&x, 0.5);
        assert_abs_diff_eq!(e, 5.0 / 3.0, epsilon = 1e-14);
    }
}
