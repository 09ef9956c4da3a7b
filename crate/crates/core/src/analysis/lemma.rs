use super::{pencil_roots, RootReport, SpectralModel, ROOT_GAP};
use crate::error::Result;
use crate::linalg::smallest_singular;

/// Default `beta` probe set.
pub const DEFAULT_BETAS: [f64; 4] = [1e-2, 1e-4, 1e-6, 1.0];
/// Decreasing `beta` sequence used for the `beta -> 0` limit condition.
pub const LIMIT_BETAS: [f64; 3] = [1e-2, 1e-4, 1e-6];
/// Points at which `|z F(z)^{-1}|` is sampled.
pub const LIMIT_PROBES: [f64; 3] = [1e-2, 1e-3, 1e-4];
/// Largest allowed growth factor of `|z F(z)^{-1}|` between successive probes.
pub const LIMIT_GROWTH: f64 = 2.0;

/// Checks at one `beta`.
#[derive(Debug, Clone, PartialEq)]
pub struct BetaVerdict {
    pub beta: f64,
    pub root_count: usize,
    pub real: bool,
    pub simple: bool,
    /// Null vectors `n_i` are linearly independent.
    pub independent: bool,
    /// Shifted vectors `n_i'` are linearly independent.
    pub shifted_independent: bool,
    /// `|z F(z)^{-1}|` at the probe points, heuristic evidence for a finite limit.
    pub limit_norms: Vec<f64>,
    pub bounded_near_zero: bool,
}

impl BetaVerdict {
    /// Realness, simplicity and both independence checks.
    pub fn certified(&self) -> bool {
        self.real && self.simple && self.independent && self.shifted_independent
    }
}

/// Behaviour of the roots along a decreasing `beta` sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitVerdict {
    pub betas: Vec<f64>,
    /// Same number of nonzero roots at every `beta`.
    pub counts_match: bool,
    /// Largest displacement of a continuity-matched root between successive `beta`.
    pub displacements: Vec<f64>,
    /// Displacements shrink, so the roots settle.
    pub settles: bool,
    /// Roots at the smallest `beta` are pairwise distinct.
    pub distinct: bool,
    /// Both null-vector families are independent at the smallest `beta`.
    pub independent: bool,
}

impl LimitVerdict {
    pub fn holds(&self) -> bool {
        self.counts_match && self.settles && self.distinct && self.independent
    }
}

/// Verdicts for the five root conditions, with condition 2 kept separate as a heuristic.
#[derive(Debug, Clone, PartialEq)]
pub struct LemmaVerdict {
    pub probes: Vec<BetaVerdict>,
    pub limit: LimitVerdict,
    pub reports: Vec<RootReport>,
}

impl LemmaVerdict {
    /// Condition 1 at every probed `beta`.
    pub fn real_and_simple(&self) -> bool {
        self.probes.iter().all(|p| p.real && p.simple)
    }

    /// Realness alone at every probed `beta`.
    pub fn real(&self) -> bool {
        self.probes.iter().all(|p| p.real)
    }

    /// Condition 3 at every probed `beta`.
    pub fn independent(&self) -> bool {
        self.probes.iter().all(|p| p.independent)
    }

    /// Condition 4 at every probed `beta`.
    pub fn shifted_independent(&self) -> bool {
        self.probes.iter().all(|p| p.shifted_independent)
    }

    /// Condition 5.
    pub fn limit_holds(&self) -> bool {
        self.limit.holds()
    }

    /// Conditions 1, 3, 4 and 5.
    pub fn certified(&self) -> bool {
        self.real_and_simple() && self.independent() && self.shifted_independent() && self.limit_holds()
    }

    /// Condition 2, sampled only.
    pub fn heuristic(&self) -> bool {
        self.probes.iter().all(|p| p.bounded_near_zero)
    }

    pub fn to_text(&self) -> String {
        let betas: Vec<String> = self.probes.iter().map(|p| format!("{:e}", p.beta)).collect();
        let mut out = format!("probed beta = {}\n", betas.join(", "));
        out.push_str(&format!("condition 1 (real and simple) = {}\n", self.real_and_simple()));
        out.push_str(&format!("condition 2 (heuristic, sampled |z F(z)^-1|) = {}\n", self.heuristic()));
        out.push_str(&format!("condition 3 (null vectors independent) = {}\n", self.independent()));
        out.push_str(&format!("condition 4 (shifted null vectors independent) = {}\n", self.shifted_independent()));
        out.push_str(&format!("condition 5 (beta -> 0 limit) = {}\n", self.limit_holds()));
        out.push_str(&format!("certified = {}\n", self.certified()));
        for p in &self.probes {
            out.push_str(&format!(
                "beta = {:e}: roots = {}, real = {}, simple = {}, independent = {}, shifted_independent = {}, bounded_near_zero = {}\n",
                p.beta, p.root_count, p.real, p.simple, p.independent, p.shifted_independent, p.bounded_near_zero
            ));
        }
        out
    }
}

fn limit_norms(model: &SpectralModel) -> Vec<f64> {
    LIMIT_PROBES
        .iter()
        .map(|&z| {
            let (smin, _, _) = smallest_singular(&model.pencil_at(z));
            if smin > 0.0 {
                z / smin
            } else {
                f64::INFINITY
            }
        })
        .collect()
}

fn probe(model: &SpectralModel) -> Result<(BetaVerdict, RootReport)> {
    let report = pencil_roots(model)?;
    let norms = limit_norms(model);
    let bounded = norms.iter().all(|n| n.is_finite()) && norms.windows(2).all(|w| w[1] <= LIMIT_GROWTH * w[0]);
    let verdict = BetaVerdict {
        beta: model.beta,
        root_count: report.roots.len(),
        real: report.all_real(),
        simple: report.all_simple(),
        independent: report.null_vectors_independent(),
        shifted_independent: report.shifted_null_vectors_independent(),
        limit_norms: norms,
        bounded_near_zero: bounded,
    };
    Ok((verdict, report))
}

/// Greedy nearest-neighbour matching; returns the largest displacement.
fn match_roots(from: &RootReport, to: &RootReport) -> f64 {
    let mut used = vec![false; to.roots.len()];
    let mut worst: f64 = 0.0;
    for r in &from.roots {
        let best = to
            .roots
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .map(|(j, s)| (j, (r.re - s.re).hypot(r.im - s.im)))
            .min_by(|a, b| a.1.total_cmp(&b.1));
        match best {
            Some((j, d)) => {
                used[j] = true;
                worst = worst.max(d);
            }
            None => return f64::INFINITY,
        }
    }
    worst
}

fn limit_verdict(reports: &[RootReport]) -> LimitVerdict {
    let counts_match = reports.windows(2).all(|w| w[0].roots.len() == w[1].roots.len());
    let displacements: Vec<f64> = reports.windows(2).map(|w| match_roots(&w[0], &w[1])).collect();
    let settles = counts_match
        && displacements.iter().all(|d| d.is_finite())
        && displacements.windows(2).all(|w| w[1] <= w[0].max(ROOT_GAP));
    let last = reports.last().expect("at least one beta");
    LimitVerdict {
        betas: reports.iter().map(|r| r.beta).collect(),
        counts_match,
        displacements,
        settles,
        distinct: last.min_gap() > ROOT_GAP && last.all_simple(),
        independent: last.null_vectors_independent() && last.shifted_null_vectors_independent(),
    }
}

/// Evaluates the root conditions at [`DEFAULT_BETAS`].
pub fn check_lemma_conditions(model: &SpectralModel) -> Result<LemmaVerdict> {
    check_lemma_conditions_at(model, &DEFAULT_BETAS)
}

/// Evaluates the root conditions at the given `beta` probes; the limit
/// condition always uses [`LIMIT_BETAS`].
pub fn check_lemma_conditions_at(model: &SpectralModel, betas: &[f64]) -> Result<LemmaVerdict> {
    let mut probes = Vec::with_capacity(betas.len());
    let mut reports = Vec::with_capacity(betas.len());
    for &b in betas {
        let (v, r) = probe(&model.with_beta(b)?)?;
        probes.push(v);
        reports.push(r);
    }
    let mut limit_reports = Vec::with_capacity(LIMIT_BETAS.len());
    for &b in &LIMIT_BETAS {
        match reports.iter().find(|r| r.beta == b) {
            Some(r) => limit_reports.push(r.clone()),
            None => limit_reports.push(pencil_roots(&model.with_beta(b)?)?),
        }
    }
    Ok(LemmaVerdict { probes, limit: limit_verdict(&limit_reports), reports })
}
