use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::analysis::{build_gd_model, pencil_roots, ROOT_GAP};
use crate::error::Result;

/// Relative tolerance between pencil roots and the closed form.
pub const GD_MATCH_TOL: f64 = 1e-8;

/// Real roots of `(1 - L mu)(z - 1)^2 = 2 beta mu z`, ascending, or `None`
/// when they are complex or `L mu = 1`.
pub fn gd_closed_form_roots(l: f64, mu: f64, beta: f64) -> Option<(f64, f64)> {
    let a = 1.0 - l * mu;
    if a == 0.0 {
        return None;
    }
    let c = 2.0 * beta * mu / a;
    let disc = c * (c + 4.0);
    if disc < 0.0 {
        return None;
    }
    let s = disc.sqrt();
    let b = 2.0 + c;
    // product of the roots is one
    let big = if b >= 0.0 { (b + s) / 2.0 } else { (b - s) / 2.0 };
    let small = 1.0 / big;
    Some(if small <= big { (small, big) } else { (big, small) })
}

/// Outcome of one gradient-descent pencil check.
#[derive(Debug, Clone, PartialEq)]
pub struct GdCheck {
    pub l: f64,
    pub mu: f64,
    pub beta: f64,
    /// Nonzero finite roots as `(re, im)`, ascending by real part.
    pub roots: Vec<(f64, f64)>,
    pub real: bool,
    pub positive: bool,
    pub distinct: bool,
    /// Largest relative deviation from the closed form; infinite when it has no real roots.
    pub max_error: f64,
}

impl GdCheck {
    pub fn pass(&self) -> bool {
        self.roots.len() == 2 && self.real && self.positive && self.distinct && self.max_error <= GD_MATCH_TOL
    }

    pub fn csv_row(&self, index: usize) -> String {
        format!(
            "{index},{:e},{:e},{:e},{},{},{},{},{:e},{}",
            self.l,
            self.beta,
            self.mu,
            self.roots.len(),
            self.real,
            self.positive,
            self.distinct,
            self.max_error,
            self.pass()
        )
    }
}

pub const GD_CSV_HEADER: &str = "pair,l,beta,mu,roots,real,positive,distinct,max_rel_error,pass";

/// Locates the nonzero pencil roots of the gradient-descent model and
/// compares them with [`gd_closed_form_roots`].
pub fn gd_check_pair(l: f64, mu: f64, beta: f64) -> Result<GdCheck> {
    let report = pencil_roots(&build_gd_model(l, mu, beta)?)?;
    let roots: Vec<(f64, f64)> = report.roots.iter().map(|r| (r.re, r.im)).collect();
    let real = report.all_real();
    let positive = report.roots.iter().all(|r| r.re > 0.0);
    let distinct = roots.len() == 2 && (roots[1].0 - roots[0].0).hypot(roots[1].1 - roots[0].1) > ROOT_GAP;
    let max_error = match gd_closed_form_roots(l, mu, beta) {
        Some((a, b)) if roots.len() == 2 => [(roots[0], a), (roots[1], b)]
            .iter()
            .map(|&((re, im), t)| (re - t).hypot(im) / t.abs().max(1.0))
            .fold(0.0, f64::max),
        _ => f64::INFINITY,
    };
    Ok(GdCheck { l, mu, beta, roots, real, positive, distinct, max_error })
}

/// `pairs` random `(L, beta)` with `L` log-uniform on `[0.1, 10]` and `beta`
/// log-uniform on `[0.01, 1]`.
pub fn random_gd_pairs(pairs: usize, seed: u64) -> Vec<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..pairs)
        .map(|_| (10f64.powf(rng.random_range(-1.0..1.0)), 10f64.powf(rng.random_range(-2.0..0.0))))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_instance() {
        let (a, b) = gd_closed_form_roots(1.0, 0.5, 1.0).unwrap();
        assert!((a - (2.0 - 3f64.sqrt())).abs() < 1e-14);
        assert!((b - (2.0 + 3f64.sqrt())).abs() < 1e-14);
        let c = gd_check_pair(1.0, 0.5, 1.0).unwrap();
        assert!(c.pass(), "{c:?}");
    }

    #[test]
    fn step_beyond_inverse_smoothness_fails() {
        for (l, beta) in random_gd_pairs(10, 3) {
            assert!(gd_check_pair(l, 0.99 / l, beta).unwrap().pass());
            assert!(!gd_check_pair(l, 1.01 / l, beta).unwrap().pass());
        }
    }
}
