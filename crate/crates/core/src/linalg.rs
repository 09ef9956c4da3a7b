//! Small dense linear-algebra helpers shared by the graph and analysis code.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub(crate) fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Singular values together with the right singular vectors (as columns).
pub(crate) fn svd_right(mat: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let n = mat.ncols();
    // Pad wide matrices so the decomposition returns a full right basis.
    let padded = if mat.nrows() < n {
        let mut p = DMatrix::zeros(n, n);
        p.view_mut((0, 0), (mat.nrows(), n)).copy_from(mat);
        p
    } else {
        mat.clone()
    };
    let svd = padded.svd(false, true);
    let v = svd.v_t.expect("requested v_t").transpose();
    (svd.singular_values, v)
}

/// Orthonormal basis (columns) of the right null space, using a singular-value
/// cutoff of `rel_threshold * sigma_max`.
pub(crate) fn null_space(mat: &DMatrix<f64>, rel_threshold: f64) -> DMatrix<f64> {
    let (sv, v) = svd_right(mat);
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    let cut = rel_threshold * smax;
    let cols: Vec<DVector<f64>> = sv
        .iter()
        .enumerate()
        .filter(|(_, &s)| s <= cut)
        .map(|(i, _)| v.column(i).into_owned())
        .collect();
    if cols.is_empty() {
        DMatrix::zeros(mat.ncols(), 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}

/// Smallest and second-smallest singular values plus the right singular
/// vector of the smallest one.
pub(crate) fn smallest_singular(mat: &DMatrix<f64>) -> (f64, f64, DVector<f64>) {
    let (sv, v) = svd_right(mat);
    let mut idx: Vec<usize> = (0..sv.len()).collect();
    idx.sort_by(|&a, &b| sv[a].total_cmp(&sv[b]));
    let second = if idx.len() > 1 { sv[idx[1]] } else { f64::INFINITY };
    (sv[idx[0]], second, v.column(idx[0]).into_owned())
}

/// Numerical rank with an absolute singular-value threshold.
pub(crate) fn rank_abs(mat: &DMatrix<f64>, threshold: f64) -> usize {
    if mat.ncols() == 0 {
        return 0;
    }
    let sv = mat.clone().svd(false, false).singular_values;
    sv.iter().filter(|&&s| s > threshold).count()
}

/// Determinant via LU, returned as (sign-carrying mantissa, log10 scale) to
/// avoid overflow on the 8M x 8M pencils.
#[cfg(test)]
pub(crate) fn scaled_det(mat: &DMatrix<f64>) -> (f64, f64) {
    let lu = mat.clone().lu();
    let u = lu.u();
    let mut mantissa = 1.0f64;
    let mut exp10 = 0.0f64;
    for i in 0..u.nrows() {
        let d = u[(i, i)];
        if d == 0.0 {
            return (0.0, 0.0);
        }
        mantissa *= d;
        let e = mantissa.abs().log10().floor();
        mantissa /= 10f64.powf(e);
        exp10 += e;
    }
    let sign: f64 = lu.p().determinant();
    (sign * mantissa, exp10)
}

/// Nonnegative least squares `min |A x - b|, x >= 0` (Lawson-Hanson active set).
pub(crate) fn nnls(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let n = a.ncols();
    let mut x = DVector::zeros(n);
    if n == 0 {
        return x;
    }
    let mut passive = vec![false; n];
    let tol = 1e-13 * (1.0 + a.amax()) * (1.0 + b.amax());
    let solve_passive = |passive: &[bool]| -> DVector<f64> {
        let cols: Vec<usize> = (0..n).filter(|&j| passive[j]).collect();
        let sub = a.select_columns(&cols);
        let sol = sub.svd(true, true).solve(b, 1e-14).expect("svd computed with u and v");
        let mut full = DVector::zeros(n);
        for (k, &j) in cols.iter().enumerate() {
            full[j] = sol[k];
        }
        full
    };
    for _ in 0..3 * n + 10 {
        let w = a.tr_mul(&(b - a * &x));
        let cand = (0..n).filter(|&j| !passive[j] && w[j] > tol).max_by(|&i, &j| w[i].total_cmp(&w[j]));
        let Some(j) = cand else { break };
        passive[j] = true;
        loop {
            let s = solve_passive(&passive);
            if (0..n).filter(|&i| passive[i]).all(|i| s[i] > 0.0) {
                x = s;
                break;
            }
            let mut step = 1.0_f64;
            for i in (0..n).filter(|&i| passive[i] && s[i] <= 0.0) {
                step = step.min(x[i] / (x[i] - s[i]));
            }
            x += (s - &x) * step;
            for i in 0..n {
                if passive[i] && x[i] <= tol {
                    passive[i] = false;
                    x[i] = 0.0;
                }
            }
            if !passive.iter().any(|&p| p) {
                break;
            }
        }
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nnls_matches_unconstrained_when_positive() {
        let a = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 1.0, 1.0]);
        let b = DVector::from_column_slice(&[1.0, 2.0, 3.0]);
        let x = nnls(&a, &b);
        assert!((x - DVector::from_column_slice(&[1.0, 2.0])).norm() < 1e-12);
    }

    #[test]
    fn nnls_clips_negative_directions() {
        let a = DMatrix::<f64>::identity(2, 2);
        let b = DVector::from_column_slice(&[-1.0, 2.0]);
        assert_eq!(nnls(&a, &b), DVector::from_column_slice(&[0.0, 2.0]));
        // brute force over supports for a small random-looking instance
        let a = DMatrix::from_row_slice(3, 3, &[1.0, 2.0, -1.0, 0.5, -1.0, 2.0, 1.0, 1.0, 1.0]);
        let b = DVector::from_column_slice(&[0.3, -2.0, 1.0]);
        let x = nnls(&a, &b);
        let mut best = f64::INFINITY;
        for mask in 0u32..8 {
            let cols: Vec<usize> = (0..3).filter(|i| mask >> i & 1 == 1).collect();
            let mut full = DVector::zeros(3);
            if !cols.is_empty() {
                let sub = a.select_columns(&cols);
                let s = sub.svd(true, true).solve(&b, 1e-14).unwrap();
                if s.iter().any(|&v| v < 0.0) {
                    continue;
                }
                for (k, &j) in cols.iter().enumerate() {
                    full[j] = s[k];
                }
            }
            best = best.min((&a * full - &b).norm());
        }
        assert!(x.iter().all(|&v| v >= 0.0));
        assert!((&a * x - &b).norm() <= best + 1e-12);
    }

    #[test]
    fn null_space_and_det() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let ns = null_space(&m, 1e-10);
        assert_eq!(ns.ncols(), 1);
        assert!((&m * ns).norm() < 1e-12);
        let (mant, e) = scaled_det(&DMatrix::from_row_slice(2, 2, &[0.0, 3.0, 200.0, 0.0]));
        assert!((mant * 10f64.powf(e) + 600.0).abs() < 1e-9);
        let (s1, s2, _) = smallest_singular(&DMatrix::from_diagonal(&DVector::from_column_slice(&[3.0, 1.0, 2.0])));
        assert_eq!((s1, s2), (1.0, 2.0));
        assert_eq!(rank_abs(&m, 1e-8), 1);
    }
}
