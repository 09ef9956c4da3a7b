use nalgebra::{DMatrix, DVector};

use crate::error::{check_dim, Error, Result};
use crate::operators::SmoothFunction;

/// `log cosh(a^T x - b)`.
#[derive(Debug, Clone)]
pub struct LogCosh {
    pub a: DVector<f64>,
    pub b: f64,
}

fn log_cosh(u: f64) -> f64 {
    let a = u.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

impl SmoothFunction for LogCosh {
    fn dim(&self) -> usize {
        self.a.len()
    }

    fn value(&self, x: &DVector<f64>) -> f64 {
        log_cosh(self.a.dot(x) - self.b)
    }

    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.a * (self.a.dot(x) - self.b).tanh()
    }

    fn smoothness(&self) -> f64 {
        self.a.norm_squared()
    }
}

/// `(1/N) sum_i log(1 + exp(-y_i x_i^T w)) + (ridge / 2) |w|^2`.
#[derive(Debug, Clone)]
pub struct LogisticLoss {
    features: DMatrix<f64>,
    labels: DVector<f64>,
    ridge: f64,
    smoothness: f64,
}

fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

impl LogisticLoss {
    /// `features` holds one sample per row; labels must be +1 or -1.
    pub fn new(features: DMatrix<f64>, labels: DVector<f64>, ridge: f64) -> Result<Self> {
        check_dim(features.nrows(), labels.len())?;
        if features.nrows() == 0 {
            return Err(Error::InvalidParameter("logistic loss needs at least one sample".into()));
        }
        if labels.iter().any(|&y| y != 1.0 && y != -1.0) {
            return Err(Error::InvalidParameter("labels must be +1 or -1".into()));
        }
        if !(ridge >= 0.0) {
            return Err(Error::InvalidParameter(format!("ridge weight must be nonnegative, got {ridge}")));
        }
        let n = features.nrows() as f64;
        let spectral = features.singular_values().max();
        let smoothness = spectral * spectral / (4.0 * n) + ridge;
        Ok(Self { features, labels, ridge, smoothness })
    }

    pub fn sample_count(&self) -> usize {
        self.features.nrows()
    }

    fn margins(&self, w: &DVector<f64>) -> DVector<f64> {
        (&self.features * w).component_mul(&self.labels)
    }
}

impl SmoothFunction for LogisticLoss {
    fn dim(&self) -> usize {
        self.features.ncols()
    }

    fn value(&self, w: &DVector<f64>) -> f64 {
        let n = self.sample_count() as f64;
        self.margins(w).iter().map(|&z| softplus(-z)).sum::<f64>() / n + 0.5 * self.ridge * w.norm_squared()
    }

    fn gradient(&self, w: &DVector<f64>) -> DVector<f64> {
        let n = self.sample_count() as f64;
        let coef = self.margins(w).zip_map(&self.labels, |z, y| -y * sigmoid(-z) / n);
        self.features.tr_mul(&coef) + w * self.ridge
    }

    fn smoothness(&self) -> f64 {
        self.smoothness
    }
}

/// `c^T x + offset`.
#[derive(Debug, Clone)]
pub struct LinearObjective {
    pub c: DVector<f64>,
    pub offset: f64,
}

impl SmoothFunction for LinearObjective {
    fn dim(&self) -> usize {
        self.c.len()
    }

    fn value(&self, x: &DVector<f64>) -> f64 {
        self.c.dot(x) + self.offset
    }

    fn gradient(&self, _x: &DVector<f64>) -> DVector<f64> {
        self.c.clone()
    }

    fn smoothness(&self) -> f64 {
        0.0
    }
}

/// `(1/2) x^T H x + b^T x` with symmetric positive semidefinite `H`.
#[derive(Debug, Clone)]
pub struct QuadraticObjective {
    h: DMatrix<f64>,
    b: DVector<f64>,
    smoothness: f64,
}

impl QuadraticObjective {
    pub fn new(h: DMatrix<f64>, b: DVector<f64>) -> Result<Self> {
        check_dim(h.nrows(), h.ncols())?;
        check_dim(h.nrows(), b.len())?;
        if (&h - h.transpose()).amax() > 1e-12 * (1.0 + h.amax()) {
            return Err(Error::InvalidParameter("quadratic term must be symmetric".into()));
        }
        let eig = h.clone().symmetric_eigenvalues();
        if eig.min() < -1e-12 * (1.0 + eig.amax()) {
            return Err(Error::InvalidParameter("quadratic term must be positive semidefinite".into()));
        }
        Ok(Self { smoothness: eig.max().max(0.0), h, b })
    }

    pub fn hessian(&self) -> &DMatrix<f64> {
        &self.h
    }

    pub fn linear_term(&self) -> &DVector<f64> {
        &self.b
    }
}

impl SmoothFunction for QuadraticObjective {
    fn dim(&self) -> usize {
        self.b.len()
    }

    fn value(&self, x: &DVector<f64>) -> f64 {
        0.5 * x.dot(&(&self.h * x)) + self.b.dot(x)
    }

    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.h * x + &self.b
    }

    fn smoothness(&self) -> f64 {
        self.smoothness
    }
}
