use faer::Mat;
use nalgebra::{DMatrix, DVector};

use super::SpectralModel;
use crate::error::{Error, Result};
use crate::linalg::{rank_abs, svd_right};

/// A root counts as real when `|im| <= REAL_TOL * (1 + |re|)`.
pub const REAL_TOL: f64 = 1e-8;
/// Simplicity needs the second singular value of `F(z)` above this times `|F(z)|`.
pub const SIMPLE_MARGIN: f64 = 1e-6;
/// Simplicity also needs the nearest other root further away than this.
pub const ROOT_GAP: f64 = 1e-8;
/// Absolute singular-value threshold of the independence checks.
pub const RANK_TOL: f64 = 1e-8;
/// Roots closer than `CLUSTER_TOL * (1 + |z|)` are reported as one cluster.
pub const CLUSTER_TOL: f64 = 1e-6;
/// Eigenvalues with `|z| <= CLASSIFY_TOL` count as zero roots and those with
/// `|z| >= 1 / CLASSIFY_TOL` as infinite. Roots come in pairs `(z, 1/z)`, so
/// the cut is symmetric.
pub const CLASSIFY_TOL: f64 = 1e-7;

/// One nonzero finite root of `det F_beta(z)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PencilRoot {
    pub re: f64,
    pub im: f64,
    pub real: bool,
    /// Number of roots in the same cluster, this one included.
    pub multiplicity: usize,
    /// Distance to the nearest other nonzero root.
    pub gap: f64,
    /// Second-smallest singular value of `F(re)` over its largest one.
    pub simplicity_margin: f64,
    pub simple: bool,
    /// Unit null vector of `F(re)`; clustered roots get distinct
    /// singular vectors of the cluster.
    pub null_vector: DVector<f64>,
}

impl PencilRoot {
    /// `(z n_psi, n_lambda)` where `n_psi` is the first half of the null vector.
    pub fn shifted_null_vector(&self) -> DVector<f64> {
        let mut v = self.null_vector.clone();
        let half = v.len() / 2;
        v.rows_mut(0, half).scale_mut(self.re);
        v
    }
}

/// Roots of `det F_beta(z)` with their diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct RootReport {
    pub beta: f64,
    /// Nonzero finite roots sorted by real part.
    pub roots: Vec<PencilRoot>,
    pub zero_count: usize,
    pub infinite_count: usize,
}

impl RootReport {
    pub fn all_real(&self) -> bool {
        self.roots.iter().all(|r| r.real)
    }

    pub fn all_simple(&self) -> bool {
        self.roots.iter().all(|r| r.simple)
    }

    pub fn min_gap(&self) -> f64 {
        self.roots.iter().map(|r| r.gap).fold(f64::INFINITY, f64::min)
    }

    /// Rank test of the stacked null vectors `n_i`.
    pub fn null_vectors_independent(&self) -> bool {
        independent(self.roots.iter().map(|r| r.null_vector.clone()).collect())
    }

    /// Rank test of the stacked `n_i' = (z_i n_psi, n_lambda)`.
    pub fn shifted_null_vectors_independent(&self) -> bool {
        independent(self.roots.iter().map(PencilRoot::shifted_null_vector).collect())
    }

    /// Plain-text listing: one line per root with `z`, `|imag|` and the simplicity margin.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "beta = {:e}\nzero roots = {}\ninfinite roots = {}\n",
            self.beta, self.zero_count, self.infinite_count
        );
        out.push_str("re,abs_imag,multiplicity,gap,simplicity_margin,real,simple\n");
        for r in &self.roots {
            out.push_str(&format!(
                "{:e},{:e},{},{:e},{:e},{},{}\n",
                r.re,
                r.im.abs(),
                r.multiplicity,
                r.gap,
                r.simplicity_margin,
                r.real,
                r.simple
            ));
        }
        out
    }
}

fn independent(cols: Vec<DVector<f64>>) -> bool {
    if cols.is_empty() {
        return true;
    }
    let n = cols.len();
    let mat = DMatrix::from_columns(&cols);
    if mat.nrows() < n {
        return false;
    }
    rank_abs(&mat, RANK_TOL) == n
}

/// Finite generalized eigenvalues of `(-F0, F1)` as complex numbers `(re, im)`,
/// plus the number of infinite ones.
pub fn pencil_eigenvalues(model: &SpectralModel) -> Result<(Vec<(f64, f64)>, usize)> {
    let n = model.f0.nrows();
    let a = Mat::<f64>::from_fn(n, n, |i, j| -model.f0[(i, j)]);
    let b = Mat::<f64>::from_fn(n, n, |i, j| model.f1[(i, j)]);
    let ev = a
        .generalized_eigen(&b)
        .map_err(|e| Error::IllConditionedPencil(format!("generalized eigensolver failed: {e:?}")))?;
    let sa = ev.S_a().column_vector();
    let sb = ev.S_b().column_vector();
    let mut finite = Vec::with_capacity(n);
    let mut infinite = 0;
    for i in 0..n {
        let (x, y) = (sa[i], sb[i]);
        if !(x.re.is_finite() && x.im.is_finite() && y.re.is_finite() && y.im.is_finite()) {
            return Err(Error::IllConditionedPencil("non-finite eigenvalue pair".into()));
        }
        let (na, nb) = (x.re.hypot(x.im), y.re.hypot(y.im));
        if na == 0.0 && nb == 0.0 {
            return Err(Error::IllConditionedPencil("singular pencil".into()));
        }
        if nb * (1.0 / CLASSIFY_TOL) <= na {
            infinite += 1;
            continue;
        }
        if na <= CLASSIFY_TOL * nb {
            finite.push((0.0, 0.0));
            continue;
        }
        let bb = y.re * y.re + y.im * y.im;
        finite.push(((x.re * y.re + x.im * y.im) / bb, (x.im * y.re - x.re * y.im) / bb));
    }
    Ok((finite, infinite))
}

/// Nonzero roots of `det F_beta(z)` with realness, simplicity and null vectors.
pub fn pencil_roots(model: &SpectralModel) -> Result<RootReport> {
    let (finite, infinite_count) = pencil_eigenvalues(model)?;
    let zero_count = finite.iter().filter(|z| z.0 == 0.0 && z.1 == 0.0).count();
    let mut zs: Vec<(f64, f64)> = finite.into_iter().filter(|z| z.0 != 0.0 || z.1 != 0.0).collect();
    zs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let dist = |a: (f64, f64), b: (f64, f64)| (a.0 - b.0).hypot(a.1 - b.1);
    // clusters of numerically coincident roots, in sorted order
    let mut cluster_of = vec![usize::MAX; zs.len()];
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for i in 0..zs.len() {
        if cluster_of[i] != usize::MAX {
            continue;
        }
        let id = clusters.len();
        let mut members = vec![i];
        cluster_of[i] = id;
        for j in i + 1..zs.len() {
            if cluster_of[j] == usize::MAX && dist(zs[i], zs[j]) <= CLUSTER_TOL * (1.0 + zs[i].0.hypot(zs[i].1)) {
                cluster_of[j] = id;
                members.push(j);
            }
        }
        clusters.push(members);
    }
    let mut roots: Vec<Option<PencilRoot>> = vec![None; zs.len()];
    for members in &clusters {
        let re = members.iter().map(|&i| zs[i].0).sum::<f64>() / members.len() as f64;
        let f = model.pencil_at(re);
        let (sv, v) = svd_right(&f);
        let mut order: Vec<usize> = (0..sv.len()).collect();
        order.sort_by(|&a, &b| sv[a].total_cmp(&sv[b]));
        let smax = sv[order[order.len() - 1]];
        let second = sv[order[1.min(order.len() - 1)]];
        let margin = if smax > 0.0 { second / smax } else { 0.0 };
        for (rank, &i) in members.iter().enumerate() {
            let gap = (0..zs.len())
                .filter(|&j| j != i)
                .map(|j| dist(zs[i], zs[j]))
                .fold(f64::INFINITY, f64::min);
            let (zr, zi) = zs[i];
            let real = zi.abs() <= REAL_TOL * (1.0 + zr.abs());
            let col = order[rank.min(order.len() - 1)];
            roots[i] = Some(PencilRoot {
                re: zr,
                im: zi,
                real,
                multiplicity: members.len(),
                gap,
                simplicity_margin: margin,
                simple: margin > SIMPLE_MARGIN && gap > ROOT_GAP,
                null_vector: v.column(col).into_owned(),
            });
        }
    }
    Ok(RootReport {
        beta: model.beta,
        roots: roots.into_iter().map(|r| r.expect("every root is in a cluster")).collect(),
        zero_count,
        infinite_count,
    })
}
