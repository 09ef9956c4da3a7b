use nalgebra::DMatrix;

use crate::error::{check_dim, Error, Result};
use crate::graph::GossipPair;

/// Scalars entering the DAGP analysis matrices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralParams {
    /// Smoothness constant of the local objectives.
    pub l: f64,
    pub mu: f64,
    pub rho: f64,
    pub alpha: f64,
    /// Consensus weight that appears only in the analysis.
    pub eta: f64,
    pub beta: f64,
}

/// `R`, `S`, `P` of the aggregate bound and the pencil
/// `F_beta(z) = F0 + z F1 = [[z S, I - z R^T], [z I - R, -P P^T / beta]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralModel {
    pub r: DMatrix<f64>,
    pub s: DMatrix<f64>,
    pub p: DMatrix<f64>,
    pub beta: f64,
    pub f0: DMatrix<f64>,
    pub f1: DMatrix<f64>,
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")))
    }
}

impl SpectralModel {
    /// Assembles the pencil from `R`, `S`, `P` and `beta`.
    pub fn from_parts(r: DMatrix<f64>, s: DMatrix<f64>, p: DMatrix<f64>, beta: f64) -> Result<Self> {
        positive("beta", beta)?;
        let n = r.nrows();
        check_dim(n, r.ncols())?;
        check_dim(n, s.nrows())?;
        check_dim(n, s.ncols())?;
        check_dim(n, p.nrows())?;
        let ppt = &p * p.transpose();
        let eye = DMatrix::<f64>::identity(n, n);
        let mut f0 = DMatrix::zeros(2 * n, 2 * n);
        f0.view_mut((0, n), (n, n)).copy_from(&eye);
        f0.view_mut((n, 0), (n, n)).copy_from(&(-&r));
        f0.view_mut((n, n), (n, n)).copy_from(&(-ppt / beta));
        let mut f1 = DMatrix::zeros(2 * n, 2 * n);
        f1.view_mut((0, 0), (n, n)).copy_from(&s);
        f1.view_mut((0, n), (n, n)).copy_from(&(-r.transpose()));
        f1.view_mut((n, 0), (n, n)).copy_from(&eye);
        Ok(Self { r, s, p, beta, f0, f1 })
    }

    /// Same `R`, `S`, `P` with another `beta`.
    pub fn with_beta(&self, beta: f64) -> Result<Self> {
        Self::from_parts(self.r.clone(), self.s.clone(), self.p.clone(), beta)
    }

    /// Size of `R`.
    pub fn state_dim(&self) -> usize {
        self.r.nrows()
    }

    /// `F_beta(z)` for real `z`.
    pub fn pencil_at(&self, z: f64) -> DMatrix<f64> {
        &self.f0 + &self.f1 * z
    }

    /// Smallest eigenvalue of the symmetric `S`.
    pub fn lambda_min_s(&self) -> f64 {
        self.s.clone().symmetric_eigenvalues().min()
    }

    /// `max(0, -lambda_min(S)) + 1e-9`, the constant of the aggregate bound.
    pub fn bound_constant(&self) -> f64 {
        (-self.lambda_min_s()).max(0.0) + 1e-9
    }
}

/// Builds `R`, `S`, `P` for DAGP on `M = gossip.node_count()` nodes.
pub fn build_spectral_model(gossip: &GossipPair, prm: &SpectralParams) -> Result<SpectralModel> {
    for (name, v) in [("L", prm.l), ("mu", prm.mu), ("rho", prm.rho), ("alpha", prm.alpha), ("eta", prm.eta)] {
        positive(name, v)?;
    }
    let m = gossip.node_count();
    check_dim(m, gossip.w.ncols())?;
    check_dim(m, gossip.q.nrows())?;
    check_dim(m, gossip.q.ncols())?;
    let SpectralParams { l, mu, rho, alpha, eta, beta } = *prm;
    let eye = DMatrix::<f64>::identity(m, m);
    let iw = &eye - &gossip.w;
    let centering = &eye - DMatrix::from_element(m, m, 1.0 / m as f64);
    let n = 4 * m;
    let mut r = DMatrix::zeros(n, n);
    let put = |mat: &mut DMatrix<f64>, bi: usize, bj: usize, block: &DMatrix<f64>| {
        mat.view_mut((bi * m, bj * m), (m, m)).copy_from(block);
    };
    let k = rho / mu;
    put(&mut r, 1, 0, &eye);
    put(&mut r, 2, 0, &(&eye * -k));
    put(&mut r, 2, 1, &(&iw * k));
    put(&mut r, 2, 2, &eye);
    put(&mut r, 2, 3, &(&eye * alpha));
    put(&mut r, 3, 0, &(&eye * k));
    put(&mut r, 3, 1, &(&iw * -k));
    put(&mut r, 3, 3, &(&eye * (1.0 - alpha) - &gossip.q));
    let mut s = DMatrix::zeros(n, n);
    put(&mut s, 0, 0, &(&eye * (1.0 - l * mu / 2.0) - &centering * (m as f64 * eta)));
    put(&mut s, 0, 1, &(&iw * -0.5 + &eye * (l * mu / 2.0)));
    put(&mut s, 1, 0, &(iw.transpose() * -0.5 + &eye * (l * mu / 2.0)));
    put(&mut s, 1, 1, &(&eye * (-l * mu / 2.0)));
    put(&mut s, 0, 2, &(&eye * (-mu / 2.0)));
    put(&mut s, 2, 0, &(&eye * (-mu / 2.0)));
    let mut p = DMatrix::zeros(n, m);
    p.view_mut((0, 0), (m, m)).copy_from(&eye);
    SpectralModel::from_parts(r, s, p, beta)
}

/// The two-by-two matrices of the gradient-descent special case.
pub fn build_gd_model(l: f64, mu: f64, beta: f64) -> Result<SpectralModel> {
    positive("L", l)?;
    positive("mu", mu)?;
    let r = DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 1.0, 0.0]);
    let off = (l * mu - 1.0) / (2.0 * mu);
    let s = DMatrix::from_row_slice(2, 2, &[(2.0 - l * mu) / (2.0 * mu), off, off, -l / 2.0]);
    let p = DMatrix::from_column_slice(2, 1, &[1.0, 0.0]);
    SpectralModel::from_parts(r, s, p, beta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_gossip_matrices, DirectedGraph};

    pub(crate) fn scan_params(mu: f64) -> SpectralParams {
        SpectralParams { l: 0.1, mu, rho: 1e-6, alpha: 0.5, eta: 0.1, beta: 1.0 }
    }

    #[test]
    fn pencil_matches_block_formula() {
        let gossip = build_gossip_matrices(&DirectedGraph::complete(3).unwrap()).unwrap();
        let model = build_spectral_model(&gossip, &scan_params(0.01)).unwrap();
        let n = model.state_dim();
        assert_eq!(n, 12);
        for z in [-2.5, 0.3, 1.7] {
            let f = model.pencil_at(z);
            let eye = DMatrix::<f64>::identity(n, n);
            assert!((f.view((0, 0), (n, n)) - &model.s * z).amax() < 1e-15);
            assert!((f.view((0, n), (n, n)) - (&eye - model.r.transpose() * z)).amax() < 1e-15);
            assert!((f.view((n, 0), (n, n)) - (&eye * z - &model.r)).amax() < 1e-15);
            let ppt = &model.p * model.p.transpose();
            assert!((f.view((n, n), (n, n)) + ppt / model.beta).amax() < 1e-15);
        }
        assert!((&model.s - model.s.transpose()).amax() < 1e-12);
        // identity in block (2, 1) of R
        assert_eq!(model.r.view((3, 0), (3, 3)).clone_owned(), DMatrix::<f64>::identity(3, 3));
    }

    #[test]
    fn single_node_centering_vanishes() {
        let model = build_spectral_model(&GossipPair::isolated(1), &scan_params(0.5)).unwrap();
        assert!((model.s[(0, 0)] - (1.0 - 0.1 * 0.5 / 2.0)).abs() < 1e-15);
    }

    #[test]
    fn gd_matrices() {
        let m = build_gd_model(1.0, 0.5, 1.0).unwrap();
        assert_eq!(m.s, DMatrix::from_row_slice(2, 2, &[1.5, -0.5, -0.5, -0.5]));
        assert_eq!(&m.r * &m.r, DMatrix::zeros(2, 2));
        assert!(m.r.amax() > 0.0);
        assert!(m.bound_constant() + m.lambda_min_s() > 0.0);
        assert!(build_gd_model(0.0, 0.5, 1.0).is_err());
        assert!(build_gd_model(1.0, 0.5, 0.0).is_err());
    }
}
