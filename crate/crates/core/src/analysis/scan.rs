use std::fmt::Write as _;

use rayon::prelude::*;

use super::{build_spectral_model, check_lemma_conditions_at, LemmaVerdict, SpectralParams};
use crate::error::{Error, Result};
use crate::graph::GossipPair;

/// Verdict at one step size.
#[derive(Debug, Clone, PartialEq)]
pub struct MuScanPoint {
    pub mu: f64,
    pub verdict: LemmaVerdict,
}

impl MuScanPoint {
    pub fn pass(&self) -> bool {
        self.verdict.certified()
    }
}

/// Step-size scan with the estimated upper end `mu0` of the feasible interval.
#[derive(Debug, Clone, PartialEq)]
pub struct MuScan {
    pub points: Vec<MuScanPoint>,
    /// Largest grid value below the first failure; `None` when the smallest
    /// grid value already fails, the last grid value when nothing fails.
    pub mu0: Option<f64>,
}

impl MuScan {
    pub fn mask(&self) -> Vec<bool> {
        self.points.iter().map(MuScanPoint::pass).collect()
    }

    /// `mu,beta,pass` rows, one per step size and probed `beta`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("mu,beta,pass\n");
        for p in &self.points {
            for b in &p.verdict.probes {
                let _ = writeln!(out, "{:e},{:e},{}", p.mu, b.beta, u8::from(b.certified()));
            }
        }
        out
    }
}

/// 2-D feasibility mask over `(rho, alpha)` at a fixed step size.
#[derive(Debug, Clone, PartialEq)]
pub struct RhoAlphaScan {
    pub mu: f64,
    pub rhos: Vec<f64>,
    pub alphas: Vec<f64>,
    /// `pass[i][j]` for `rhos[i]`, `alphas[j]`.
    pub pass: Vec<Vec<bool>>,
}

impl RhoAlphaScan {
    /// `rho,alpha,pass` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("rho,alpha,pass\n");
        for (i, rho) in self.rhos.iter().enumerate() {
            for (j, alpha) in self.alphas.iter().enumerate() {
                let _ = writeln!(out, "{:e},{:e},{}", rho, alpha, u8::from(self.pass[i][j]));
            }
        }
        out
    }

    pub fn feasible_count(&self) -> usize {
        self.pass.iter().flatten().filter(|&&p| p).count()
    }
}

fn check_grid(name: &str, grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter(format!("{name} grid is empty")));
    }
    if grid.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(Error::InvalidParameter(format!("{name} grid must be positive")));
    }
    Ok(())
}

/// Evaluates the root conditions at every step size in `mus` (sorted
/// ascending first); `base.mu` is ignored.
pub fn scan_mu_region(gossip: &GossipPair, base: &SpectralParams, mus: &[f64], betas: &[f64]) -> Result<MuScan> {
    check_grid("mu", mus)?;
    let mut grid = mus.to_vec();
    grid.sort_by(f64::total_cmp);
    let points = grid
        .par_iter()
        .map(|&mu| {
            let model = build_spectral_model(gossip, &SpectralParams { mu, ..*base })?;
            Ok(MuScanPoint { mu, verdict: check_lemma_conditions_at(&model, betas)? })
        })
        .collect::<Result<Vec<_>>>()?;
    let mu0 = match points.iter().position(|p| !p.pass()) {
        Some(0) => None,
        Some(i) => Some(points[i - 1].mu),
        None => points.last().map(|p| p.mu),
    };
    Ok(MuScan { points, mu0 })
}

/// Evaluates the root conditions on the `(rho, alpha)` grid at `base.mu`.
pub fn scan_rho_alpha_region(
    gossip: &GossipPair,
    base: &SpectralParams,
    rhos: &[f64],
    alphas: &[f64],
    betas: &[f64],
) -> Result<RhoAlphaScan> {
    check_grid("rho", rhos)?;
    check_grid("alpha", alphas)?;
    let cells: Vec<(usize, usize)> = (0..rhos.len()).flat_map(|i| (0..alphas.len()).map(move |j| (i, j))).collect();
    let verdicts = cells
        .par_iter()
        .map(|&(i, j)| {
            let model = build_spectral_model(gossip, &SpectralParams { rho: rhos[i], alpha: alphas[j], ..*base })?;
            Ok(check_lemma_conditions_at(&model, betas)?.certified())
        })
        .collect::<Result<Vec<bool>>>()?;
    let pass = verdicts.chunks(alphas.len()).map(<[bool]>::to_vec).collect();
    Ok(RhoAlphaScan { mu: base.mu, rhos: rhos.to_vec(), alphas: alphas.to_vec(), pass })
}

/// `n` log-spaced values from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi >= lo && n >= 1) {
        return Err(Error::InvalidParameter(format!("log grid needs 0 < lo <= hi and n >= 1, got {lo}, {hi}, {n}")));
    }
    if n == 1 {
        return Ok(vec![lo]);
    }
    let (a, b) = (lo.ln(), hi.ln());
    Ok((0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GossipPair;

    fn single_node() -> (GossipPair, SpectralParams) {
        (GossipPair::isolated(1), SpectralParams { l: 1.0, mu: 0.1, rho: 0.1, alpha: 0.5, eta: 0.1, beta: 1.0 })
    }

    #[test]
    fn log_grid_endpoints() {
        let g = log_grid(1e-3, 10.0, 5).unwrap();
        assert_eq!(g.len(), 5);
        assert!((g[0] - 1e-3).abs() < 1e-15 && (g[4] - 10.0).abs() < 1e-12);
        assert!((g[1] - 1e-2).abs() < 1e-15);
        assert!(log_grid(0.0, 1.0, 3).is_err());
    }

    #[test]
    fn mu0_rule() {
        let (g, base) = single_node();
        let scan = scan_mu_region(&g, &base, &[0.3, 0.1, 0.2], &[1.0]).unwrap();
        let mus: Vec<f64> = scan.points.iter().map(|p| p.mu).collect();
        assert_eq!(mus, vec![0.1, 0.2, 0.3]);
        let mask = scan.mask();
        let expected = match mask.iter().position(|p| !p) {
            Some(0) => None,
            Some(i) => Some(mus[i - 1]),
            None => Some(0.3),
        };
        assert_eq!(scan.mu0, expected);
        assert_eq!(scan.to_csv().lines().count(), 4);
    }

    #[test]
    fn rho_alpha_csv_shape() {
        let (g, base) = single_node();
        let scan = scan_rho_alpha_region(&g, &base, &[1e-3, 1e-2], &[0.2, 0.5, 0.8], &[1.0]).unwrap();
        assert_eq!(scan.pass.len(), 2);
        assert!(scan.pass.iter().all(|r| r.len() == 3));
        let csv = scan.to_csv();
        assert!(csv.starts_with("rho,alpha,pass\n"));
        assert_eq!(csv.lines().count(), 7);
        assert!(scan_rho_alpha_region(&g, &base, &[], &[0.5], &[1.0]).is_err());
    }
}
