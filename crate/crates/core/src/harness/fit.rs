use crate::error::{Error, Result};
use crate::solvers::TraceRecord;

/// Minimum number of usable records for a fit.
pub const MIN_FIT_POINTS: usize = 10;
/// Objective change allowed between consecutive records at convergence.
pub const OT_OBJECTIVE_TOL: f64 = 1e-7;
/// Distance to every constraint allowed at convergence.
pub const OT_DISTANCE_TOL: f64 = 1e-4;

/// A trace column to fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    /// `|obj_gap|`.
    AbsObjGap,
    FeasMax,
    FeasSum,
    Consensus,
    GsumNorm,
}

impl Metric {
    pub fn of(self, r: &TraceRecord) -> f64 {
        match self {
            Metric::AbsObjGap => r.obj_gap.abs(),
            Metric::FeasMax => r.feas_max,
            Metric::FeasSum => r.feas_sum,
            Metric::Consensus => r.consensus,
            Metric::GsumNorm => r.gsum_norm,
        }
    }
}

/// Least-squares line `y = slope * x + intercept` with its coefficient of determination.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: usize,
}

fn least_squares(pts: &[(f64, f64)]) -> Result<RateFit> {
    if pts.len() < MIN_FIT_POINTS {
        return Err(Error::InsufficientData(format!("{} usable records, need {MIN_FIT_POINTS}", pts.len())));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientData("all records share one abscissa".into()));
    }
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(RateFit { slope, intercept: my - slope * mx, r_squared, points: pts.len() })
}

/// Slope of `log metric` against `log K` over records with `lo <= K <= hi`
/// and a positive metric.
pub fn fit_rate(records: &[TraceRecord], metric: Metric, lo: usize, hi: usize) -> Result<RateFit> {
    let pts: Vec<(f64, f64)> = records
        .iter()
        .filter(|r| r.iter >= lo.max(1) && r.iter <= hi)
        .map(|r| (r.iter, metric.of(r)))
        .filter(|&(_, v)| v > 0.0 && v.is_finite())
        .map(|(k, v)| ((k as f64).ln(), v.ln()))
        .collect();
    least_squares(&pts)
}

/// Slope of `log metric` against `k` over records with `lo <= k <= hi` and
/// a metric above `floor`; a linear rate shows as a straight line.
pub fn fit_linear_rate(records: &[TraceRecord], metric: Metric, lo: usize, hi: usize, floor: f64) -> Result<RateFit> {
    let pts: Vec<(f64, f64)> = records
        .iter()
        .filter(|r| r.iter >= lo && r.iter <= hi)
        .map(|r| (r.iter, metric.of(r)))
        .filter(|&(_, v)| v > floor && v > 0.0 && v.is_finite())
        .map(|(k, v)| (k as f64, v.ln()))
        .collect();
    least_squares(&pts)
}

/// True when the objective moved by less than [`OT_OBJECTIVE_TOL`] between
/// every pair of consecutive records and the last record is within
/// [`OT_DISTANCE_TOL`] of every constraint. `feas_max` holds squared distances.
pub fn ot_stopping_check(window: &[TraceRecord]) -> bool {
    let Some(last) = window.last() else { return false };
    window.len() >= 2
        && window.windows(2).all(|p| (p[1].obj_gap - p[0].obj_gap).abs() < OT_OBJECTIVE_TOL)
        && last.feas_max.sqrt() < OT_DISTANCE_TOL
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(iter: usize, obj_gap: f64, feas: f64) -> TraceRecord {
        TraceRecord { iter, obj_gap, feas_max: feas, feas_sum: feas, consensus: 0.0, gsum_norm: 0.0, wallclock_s: 0.0 }
    }

    #[test]
    fn power_laws() {
        let inv: Vec<TraceRecord> = (1..=1000).map(|k| rec(k, 0.0, 3.0 / k as f64)).collect();
        let f = fit_rate(&inv, Metric::FeasSum, 10, 1000).unwrap();
        assert!((f.slope + 1.0).abs() < 0.01);
        assert!(f.r_squared > 0.999);
        let sq: Vec<TraceRecord> = (1..=1000).map(|k| rec(k, -2.0 / (k as f64).sqrt(), 0.0)).collect();
        let f = fit_rate(&sq, Metric::AbsObjGap, 10, 1000).unwrap();
        assert!((f.slope + 0.5).abs() < 0.01);
    }

    #[test]
    fn geometric_decay_is_linear_in_k() {
        let t: Vec<TraceRecord> = (1..=200).map(|k| rec(k, 0.9f64.powi(k as i32), 0.0)).collect();
        let f = fit_linear_rate(&t, Metric::AbsObjGap, 1, 200, 0.0).unwrap();
        assert!((f.slope - 0.9f64.ln()).abs() < 1e-10);
        assert!(f.r_squared > 0.999_999);
    }

    #[test]
    fn too_few_points() {
        let t: Vec<TraceRecord> = (1..=9).map(|k| rec(k, 1.0, 1.0)).collect();
        assert!(matches!(fit_rate(&t, Metric::FeasMax, 1, 9), Err(Error::InsufficientData(_))));
        let t: Vec<TraceRecord> = (1..=50).map(|k| rec(k, 1.0, 0.0)).collect();
        assert!(matches!(fit_rate(&t, Metric::FeasMax, 1, 50), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn stopping_rule() {
        assert!(ot_stopping_check(&[rec(1, 0.5, 0.0), rec(2, 0.5, 0.0)]));
        assert!(!ot_stopping_check(&[rec(1, 0.5, 0.0), rec(2, 0.5 + 1e-6, 0.0)]));
        assert!(!ot_stopping_check(&[rec(1, 0.5, 0.0), rec(2, 0.5, 1e-6)]));
        assert!(ot_stopping_check(&[rec(1, 0.5, 0.0), rec(2, 0.5, 1e-9)]));
        assert!(!ot_stopping_check(&[rec(1, 0.5, 0.0)]));
    }
}
