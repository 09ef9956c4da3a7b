use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::{epigraph_project, EpigraphOptions, ProxFunction};
use crate::error::{check_dim, Error, Result};

/// Membership tolerance used by [`normal_cone_residual`].
pub const MEMBERSHIP_TOL: f64 = 1e-8;

const ACTIVE_TOL: f64 = 1e-8;
const DYKSTRA_TOL: f64 = 1e-15;
const DYKSTRA_MAX_CYCLES: usize = 200_000;
const NEWTON_TOL: f64 = 1e-14;
const NEWTON_MAX_ITER: usize = 100;

type Step<'a> = Box<dyn Fn(&mut DVector<f64>) -> Result<()> + 'a>;

/// `{x : sum_{i in indices} x_i = mass, x_i >= 0 for i in indices}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SliceGroup {
    pub indices: Vec<usize>,
    pub mass: f64,
}

/// A closed convex set in `R^dim`.
#[derive(Debug, Clone)]
pub enum ConstraintSet {
    /// `{x : c^T x <= d}`.
    Halfspace { c: DVector<f64>, d: f64 },
    /// `{x >= 0 : 1^T x = radius}`.
    ScaledSimplex { dim: usize, radius: f64 },
    NonnegativeOrthant { dim: usize },
    /// Intersection of [`SliceGroup`]s; coordinates outside every group are free.
    AffineThenNonneg { dim: usize, groups: Vec<SliceGroup> },
    /// `{(y, s) : f(y) <= s}` in `R^(dim + 1)`, the last coordinate being `s`.
    Epigraph { f: Arc<dyn ProxFunction>, dim: usize, options: EpigraphOptions },
    WholeSpace { dim: usize },
}

impl ConstraintSet {
    pub fn halfspace(c: DVector<f64>, d: f64) -> Self {
        Self::Halfspace { c, d }
    }

    pub fn scaled_simplex(dim: usize, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidParameter(format!("simplex radius must be positive, got {radius}")));
        }
        Ok(Self::ScaledSimplex { dim, radius })
    }

    pub fn slice_groups(dim: usize, groups: Vec<SliceGroup>) -> Result<Self> {
        for g in &groups {
            if g.indices.is_empty() {
                return Err(Error::InvalidParameter("slice group has no coordinates".into()));
            }
            if let Some(&i) = g.indices.iter().find(|&&i| i >= dim) {
                return Err(Error::InvalidParameter(format!("slice index {i} out of range for dimension {dim}")));
            }
            if !(g.mass >= 0.0 && g.mass.is_finite()) {
                return Err(Error::InvalidParameter(format!("slice mass must be nonnegative, got {}", g.mass)));
            }
        }
        Ok(Self::AffineThenNonneg { dim, groups })
    }

    pub fn epigraph(f: Arc<dyn ProxFunction>, dim: usize) -> Self {
        Self::Epigraph { f, dim, options: EpigraphOptions::default() }
    }

    /// Ambient dimension of the set.
    pub fn dim(&self) -> usize {
        match self {
            Self::Halfspace { c, .. } => c.len(),
            Self::ScaledSimplex { dim, .. }
            | Self::NonnegativeOrthant { dim }
            | Self::AffineThenNonneg { dim, .. }
            | Self::WholeSpace { dim } => *dim,
            Self::Epigraph { dim, .. } => dim + 1,
        }
    }

    pub fn is_whole_space(&self) -> bool {
        match self {
            Self::WholeSpace { .. } => true,
            Self::Halfspace { c, d } => c.norm() == 0.0 && *d >= 0.0,
            Self::AffineThenNonneg { groups, .. } => groups.is_empty(),
            _ => false,
        }
    }

    /// Largest violation of the defining constraints at `x`.
    pub fn violation(&self, x: &DVector<f64>) -> Result<f64> {
        check_dim(self.dim(), x.len())?;
        Ok(match self {
            Self::Halfspace { c, d } => {
                let nc = c.norm();
                let excess = (c.dot(x) - d).max(0.0);
                if nc > 0.0 {
                    excess / nc
                } else if excess > 0.0 {
                    f64::INFINITY
                } else {
                    0.0
                }
            }
            Self::ScaledSimplex { radius, .. } => {
                let neg = x.iter().fold(0.0_f64, |m, &v| m.max(-v));
                neg.max((x.sum() - radius).abs())
            }
            Self::NonnegativeOrthant { .. } => x.iter().fold(0.0_f64, |m, &v| m.max(-v)),
            Self::AffineThenNonneg { groups, .. } => groups.iter().fold(0.0_f64, |m, g| {
                let sum: f64 = g.indices.iter().map(|&i| x[i]).sum();
                let neg = g.indices.iter().fold(0.0_f64, |a, &i| a.max(-x[i]));
                m.max(neg).max((sum - g.mass).abs())
            }),
            Self::Epigraph { f, dim, .. } => {
                let y = x.rows(0, *dim).into_owned();
                (f.value(&y) - x[*dim]).max(0.0)
            }
            Self::WholeSpace { .. } => 0.0,
        })
    }

    /// Euclidean distance from `x` to the set.
    pub fn distance(&self, x: &DVector<f64>) -> Result<f64> {
        Ok((x - project(self, x)?).norm())
    }

    pub fn contains(&self, x: &DVector<f64>, tol: f64) -> Result<bool> {
        Ok(self.violation(x)? <= tol)
    }
}

/// Euclidean projection of `x` onto `set`.
pub fn project(set: &ConstraintSet, x: &DVector<f64>) -> Result<DVector<f64>> {
    check_dim(set.dim(), x.len())?;
    match set {
        ConstraintSet::Halfspace { c, d } => {
            let nc2 = c.norm_squared();
            if nc2 == 0.0 {
                return if *d >= 0.0 { Ok(x.clone()) } else { Err(Error::EmptySet) };
            }
            let excess = c.dot(x) - d;
            if excess <= 0.0 {
                Ok(x.clone())
            } else {
                Ok(x - c * (excess / nc2))
            }
        }
        ConstraintSet::ScaledSimplex { radius, .. } => project_simplex(x, *radius),
        ConstraintSet::NonnegativeOrthant { .. } => Ok(x.map(|v| v.max(0.0))),
        ConstraintSet::AffineThenNonneg { groups, .. } => project_groups(groups, x),
        ConstraintSet::Epigraph { f, dim, options } => {
            let y = x.rows(0, *dim).into_owned();
            let (p, s) = epigraph_project(f.as_ref(), &y, x[*dim], options)?;
            let mut out = DVector::zeros(dim + 1);
            out.rows_mut(0, *dim).copy_from(&p);
            out[*dim] = s;
            Ok(out)
        }
        ConstraintSet::WholeSpace { .. } => Ok(x.clone()),
    }
}

/// Projection onto `{x >= 0 : 1^T x = radius}` by sorting and thresholding.
pub fn project_simplex(y: &DVector<f64>, radius: f64) -> Result<DVector<f64>> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::InvalidParameter(format!("simplex radius must be positive, got {radius}")));
    }
    if y.is_empty() {
        return Err(Error::EmptySet);
    }
    Ok(simplex_slice(y.as_slice(), radius))
}

fn simplex_threshold(y: &[f64], radius: f64) -> f64 {
    let mut u = y.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (j, &uj) in u.iter().enumerate() {
        cum += uj;
        let t = (cum - radius) / (j + 1) as f64;
        if uj - t > 0.0 {
            theta = t;
        }
    }
    theta
}

// radius may be zero here (a slice carrying no mass)
fn simplex_slice(y: &[f64], radius: f64) -> DVector<f64> {
    if radius == 0.0 {
        return DVector::zeros(y.len());
    }
    let theta = simplex_threshold(y, radius);
    DVector::from_iterator(y.len(), y.iter().map(|v| (v - theta).max(0.0)))
}

fn project_group(g: &SliceGroup, x: &mut DVector<f64>) {
    let vals: Vec<f64> = g.indices.iter().map(|&i| x[i]).collect();
    let p = simplex_slice(&vals, g.mass);
    for (k, &i) in g.indices.iter().enumerate() {
        x[i] = p[k];
    }
}

fn groups_disjoint(groups: &[SliceGroup]) -> bool {
    let mut seen = std::collections::HashSet::new();
    groups.iter().flat_map(|g| g.indices.iter()).all(|i| seen.insert(*i))
}

fn project_groups(groups: &[SliceGroup], x: &DVector<f64>) -> Result<DVector<f64>> {
    let mut out = x.clone();
    if groups_disjoint(groups) {
        for g in groups {
            project_group(g, &mut out);
        }
        return Ok(out);
    }
    if let Some(p) = groups_newton(groups, x) {
        return Ok(p);
    }
    let steps: Vec<Step<'_>> = groups
        .iter()
        .map(|g| {
            Box::new(move |v: &mut DVector<f64>| {
                project_group(g, v);
                Ok(())
            }) as Step<'_>
        })
        .collect();
    dykstra(x, &steps, "slice-group projection")
}

/// Overlapping groups through the dual in the group multipliers `l`:
/// `x_i = max(y_i - sum_{g owns i} l_g, 0)` on covered coordinates, with a
/// semismooth Newton ascent and Armijo backtracking. `None` when it stalls.
fn groups_newton(groups: &[SliceGroup], y: &DVector<f64>) -> Option<DVector<f64>> {
    let ng = groups.len();
    let mut owners: Vec<Vec<usize>> = vec![Vec::new(); y.len()];
    for (g, grp) in groups.iter().enumerate() {
        for &i in &grp.indices {
            owners[i].push(g);
        }
    }
    let covered: Vec<usize> = (0..y.len()).filter(|&i| !owners[i].is_empty()).collect();
    let masses = DVector::from_iterator(ng, groups.iter().map(|g| g.mass));
    let tol = NEWTON_TOL * (1.0 + masses.amax() + y.amax());
    let shifted = |lam: &DVector<f64>, i: usize| y[i] - owners[i].iter().map(|&g| lam[g]).sum::<f64>();
    let dual = |lam: &DVector<f64>| {
        -0.5 * covered.iter().map(|&i| shifted(lam, i).max(0.0).powi(2)).sum::<f64>() - lam.dot(&masses)
    };
    let residual = |lam: &DVector<f64>| {
        let mut r = -masses.clone();
        for &i in &covered {
            let u = shifted(lam, i);
            if u > 0.0 {
                for &g in &owners[i] {
                    r[g] += u;
                }
            }
        }
        r.amax()
    };
    // start from each group's own simplex threshold, shared among owners
    let mut lam = DVector::from_iterator(
        ng,
        groups.iter().map(|g| {
            let vals: Vec<f64> = g.indices.iter().map(|&i| y[i]).collect();
            let share = g.indices.iter().map(|&i| owners[i].len()).max().unwrap_or(1) as f64;
            if g.mass > 0.0 { simplex_threshold(&vals, g.mass) / share } else { vals.iter().cloned().fold(0.0, f64::max) }
        }),
    );
    for _ in 0..NEWTON_MAX_ITER {
        let mut grad = -masses.clone();
        let mut hess = DMatrix::<f64>::zeros(ng, ng);
        for &i in &covered {
            let u = shifted(&lam, i);
            if u > 0.0 {
                for &g in &owners[i] {
                    grad[g] += u;
                    for &h in &owners[i] {
                        hess[(g, h)] += 1.0;
                    }
                }
            }
        }
        if grad.amax() <= tol {
            let mut out = y.clone();
            for &i in &covered {
                out[i] = shifted(&lam, i).max(0.0);
            }
            return Some(out);
        }
        let reg = 1e-10 * (1.0 + hess.diagonal().amax());
        for g in 0..ng {
            hess[(g, g)] += reg;
        }
        let dir = hess.cholesky()?.solve(&grad);
        let d0 = dual(&lam);
        let r0 = grad.amax();
        let slope = grad.dot(&dir);
        let mut t = 1.0;
        loop {
            let trial = &lam + &dir * t;
            // near the solution the dual is flat to rounding, so residual decrease also counts
            if dual(&trial) >= d0 + 1e-4 * t * slope || residual(&trial) < 0.5 * r0 || t < 1e-12 {
                lam = trial;
                break;
            }
            t *= 0.5;
        }
    }
    None
}

/// Projection onto the intersection of several sets of equal dimension.
pub fn project_intersection(sets: &[&ConstraintSet], x: &DVector<f64>) -> Result<DVector<f64>> {
    for s in sets {
        check_dim(s.dim(), x.len())?;
    }
    let active: Vec<&ConstraintSet> = sets.iter().copied().filter(|s| !s.is_whole_space()).collect();
    match active.len() {
        0 => Ok(x.clone()),
        1 => project(active[0], x),
        _ => {
            let steps: Vec<Step<'_>> = active
                .iter()
                .map(|s| {
                    Box::new(move |v: &mut DVector<f64>| {
                        *v = project(s, v)?;
                        Ok(())
                    }) as Step<'_>
                })
                .collect();
            dykstra(x, &steps, "intersection projection")
        }
    }
}

/// Dykstra's alternating projections onto an intersection of convex sets.
fn dykstra(x: &DVector<f64>, steps: &[Step<'_>], what: &'static str) -> Result<DVector<f64>> {
    let n = x.len();
    let mut cur = x.clone();
    let mut incr = vec![DVector::<f64>::zeros(n); steps.len()];
    let scale = 1.0 + x.amax();
    let mut change = f64::INFINITY;
    for _ in 0..DYKSTRA_MAX_CYCLES {
        change = 0.0;
        for (step, p) in steps.iter().zip(incr.iter_mut()) {
            let mut y = &cur + &*p;
            step(&mut y)?;
            let new_p = &cur + &*p - &y;
            change = change.max((&y - &cur).amax()).max((&new_p - &*p).amax());
            *p = new_p;
            cur = y;
        }
        if change <= DYKSTRA_TOL * scale {
            return Ok(cur);
        }
    }
    if change <= 1e-12 * scale {
        return Ok(cur);
    }
    Err(Error::NonConvergence { what, iterations: DYKSTRA_MAX_CYCLES, residual: change })
}

/// Distance from `v` to the normal cone of `set` at `x`, which equals the
/// norm of the projection of `v` onto the tangent cone.
pub fn normal_cone_residual(set: &ConstraintSet, x: &DVector<f64>, v: &DVector<f64>) -> Result<f64> {
    check_dim(set.dim(), v.len())?;
    let viol = set.violation(x)?;
    if viol > MEMBERSHIP_TOL {
        return Err(Error::NotAMember(viol));
    }
    match set {
        ConstraintSet::Halfspace { c, d } => {
            let nc2 = c.norm_squared();
            if nc2 == 0.0 {
                return Ok(v.norm());
            }
            let active = d - c.dot(x) <= ACTIVE_TOL * (1.0 + d.abs()) * c.norm().max(1.0);
            if !active {
                return Ok(v.norm());
            }
            let s = c.dot(v).max(0.0);
            Ok((v - c * (s / nc2)).norm())
        }
        ConstraintSet::NonnegativeOrthant { .. } => Ok(x
            .iter()
            .zip(v.iter())
            .map(|(&xi, &vi)| if xi <= ACTIVE_TOL { vi.max(0.0) } else { vi })
            .map(|t| t * t)
            .sum::<f64>()
            .sqrt()),
        ConstraintSet::ScaledSimplex { radius, .. } => {
            let idx: Vec<usize> = (0..x.len()).collect();
            let g = SliceGroup { indices: idx, mass: *radius };
            let mut t = v.clone();
            tangent_group(&g, x, &mut t);
            Ok(t.norm())
        }
        ConstraintSet::AffineThenNonneg { groups, .. } => {
            if groups_disjoint(groups) {
                let mut t = v.clone();
                for g in groups {
                    tangent_group(g, x, &mut t);
                }
                return Ok(t.norm());
            }
            let steps: Vec<Step<'_>> = groups
                .iter()
                .map(|g| {
                    Box::new(move |w: &mut DVector<f64>| {
                        tangent_group(g, x, w);
                        Ok(())
                    }) as Step<'_>
                })
                .collect();
            Ok(dykstra(v, &steps, "tangent cone projection")?.norm())
        }
        ConstraintSet::Epigraph { .. } => {
            let p = project(set, &(x + v))?;
            Ok((p - x).norm())
        }
        ConstraintSet::WholeSpace { .. } => Ok(v.norm()),
    }
}

/// Projects the group's coordinates of `w` onto the tangent cone
/// `{d : sum d = 0, d_i >= 0 where x_i = 0}`.
fn tangent_group(g: &SliceGroup, x: &DVector<f64>, w: &mut DVector<f64>) {
    let tol = ACTIVE_TOL * g.mass.max(1.0);
    let (active, free): (Vec<usize>, Vec<usize>) = g.indices.iter().partition(|&&i| x[i] <= tol);
    if free.is_empty() {
        for &i in &active {
            w[i] = 0.0;
        }
        return;
    }
    // d_i = w_i - s on free coordinates, max(0, w_i - s) on active ones,
    // with s chosen so that the group sums to zero
    let free_sum: f64 = free.iter().map(|&i| w[i]).sum();
    let mut act: Vec<f64> = active.iter().map(|&i| w[i]).collect();
    act.sort_by(|a, b| b.total_cmp(a));
    let mut s = free_sum / free.len() as f64;
    let mut top = 0.0;
    for k in 0..=act.len() {
        let cand = (free_sum + top) / (free.len() + k) as f64;
        let above_ok = k == 0 || act[k - 1] > cand;
        let below_ok = k == act.len() || act[k] <= cand;
        if above_ok && below_ok {
            s = cand;
            break;
        }
        if k < act.len() {
            top += act[k];
        }
    }
    for &i in &free {
        w[i] -= s;
    }
    for &i in &active {
        w[i] = (w[i] - s).max(0.0);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{AbsValue, QuadraticNorm};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn v(xs: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(xs)
    }

    /// Exhaustive active-set oracle for the simplex: for every support set,
    /// solve the equality-constrained projection and keep the nearest
    /// feasible candidate.
    fn simplex_oracle(y: &[f64], r: f64) -> Vec<f64> {
        let n = y.len();
        let mut best: Option<(f64, Vec<f64>)> = None;
        for mask in 1u32..(1 << n) {
            let sup: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
            let shift = (sup.iter().map(|&i| y[i]).sum::<f64>() - r) / sup.len() as f64;
            let mut cand = vec![0.0; n];
            for &i in &sup {
                cand[i] = y[i] - shift;
            }
            if cand.iter().any(|&c| c < -1e-12) {
                continue;
            }
            let d: f64 = cand.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
            if best.as_ref().is_none_or(|(bd, _)| d < *bd) {
                best = Some((d, cand));
            }
        }
        best.unwrap().1
    }

    #[test]
    fn halfspace_examples() {
        let h = ConstraintSet::halfspace(v(&[1.0, 0.0]), 1.0);
        assert_eq!(project(&h, &v(&[2.0, 0.0])).unwrap(), v(&[1.0, 0.0]));
        assert_eq!(project(&h, &v(&[-3.0, 4.0])).unwrap(), v(&[-3.0, 4.0]));
        let empty = ConstraintSet::halfspace(v(&[0.0, 0.0]), -1.0);
        assert_eq!(project(&empty, &v(&[0.0, 0.0])), Err(Error::EmptySet));
        let all = ConstraintSet::halfspace(v(&[0.0, 0.0]), 0.0);
        assert_eq!(project(&all, &v(&[5.0, 1.0])).unwrap(), v(&[5.0, 1.0]));
        assert!(matches!(project(&h, &v(&[1.0])), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn simplex_examples() {
        assert_eq!(project_simplex(&v(&[0.2, 0.8]), 1.0).unwrap(), v(&[0.2, 0.8]));
        assert_eq!(project_simplex(&v(&[1.0, 1.0]), 1.0).unwrap(), v(&[0.5, 0.5]));
        let p = project_simplex(&v(&[2.0, -1.0, 0.0]), 1.0).unwrap();
        let o = simplex_oracle(&[2.0, -1.0, 0.0], 1.0);
        assert_eq!(p, v(&[1.0, 0.0, 0.0]));
        assert!((p - v(&o)).norm() < 1e-14);
        assert!(project_simplex(&v(&[1.0]), 0.0).is_err());
        assert!(project_simplex(&v(&[1.0]), -2.0).is_err());
    }

    #[test]
    fn normal_cone_examples() {
        let h = ConstraintSet::halfspace(v(&[1.0, 0.0]), 1.0);
        assert_eq!(normal_cone_residual(&h, &v(&[0.0, 0.0]), &v(&[0.0, 0.0])).unwrap(), 0.0);
        assert_eq!(normal_cone_residual(&h, &v(&[1.0, 0.0]), &v(&[2.0, 0.0])).unwrap(), 0.0);
        assert_abs_diff_eq!(normal_cone_residual(&h, &v(&[1.0, 0.0]), &v(&[0.0, 1.0])).unwrap(), 1.0);
        assert!(matches!(
            normal_cone_residual(&h, &v(&[2.0, 0.0]), &v(&[0.0, 1.0])),
            Err(Error::NotAMember(_))
        ));
    }

    #[test]
    fn simplex_normal_cone() {
        let s = ConstraintSet::scaled_simplex(3, 1.0).unwrap();
        let x = v(&[1.0, 0.0, 0.0]);
        // normal cone at a vertex: v_0 >= v_1, v_0 >= v_2
        assert_abs_diff_eq!(normal_cone_residual(&s, &x, &v(&[1.0, -2.0, 0.5])).unwrap(), 0.0, epsilon = 1e-14);
        assert!(normal_cone_residual(&s, &x, &v(&[0.0, 1.0, 0.0])).unwrap() > 0.1);
        // residual equals the distance to the cone, via the projection identity
        let w = v(&[0.3, 0.9, -0.4]);
        let r = normal_cone_residual(&s, &x, &w).unwrap();
        let p = project(&s, &(&x + &w)).unwrap();
        assert!(r >= (p - &x).norm() - 1e-12);
    }

    #[test]
    fn overlapping_slice_groups() {
        // rows and one column of a 2x2 plan sharing coordinate 0
        let set = ConstraintSet::slice_groups(
            4,
            vec![
                SliceGroup { indices: vec![0, 1], mass: 0.5 },
                SliceGroup { indices: vec![0, 2], mass: 0.5 },
            ],
        )
        .unwrap();
        let x = v(&[0.9, 0.4, -0.3, 7.0]);
        let p = project(&set, &x).unwrap();
        assert!(set.violation(&p).unwrap() < 1e-12);
        assert_eq!(p[3], 7.0);
        // variational inequality against vertices and the free direction
        let r = &x - &p;
        for q in [v(&[0.5, 0.0, 0.0, 0.0]), v(&[0.0, 0.5, 0.5, 0.0]), v(&[0.25, 0.25, 0.25, 1.0])] {
            assert!(r.dot(&(q - &p)) <= 1e-10);
        }
        assert!(ConstraintSet::slice_groups(2, vec![SliceGroup { indices: vec![3], mass: 1.0 }]).is_err());
    }

    #[test]
    fn epigraph_set_roundtrip() {
        let set = ConstraintSet::epigraph(Arc::new(AbsValue), 1);
        assert_eq!(set.dim(), 2);
        let p = project(&set, &v(&[3.0, 0.0])).unwrap();
        assert!((p.clone() - v(&[1.5, 1.5])).norm() < 1e-10);
        assert!(normal_cone_residual(&set, &p, &v(&[1.5, -1.5])).unwrap() < 1e-9);
    }

    fn sets() -> Vec<ConstraintSet> {
        vec![
            ConstraintSet::halfspace(v(&[1.0, -2.0, 0.5, 0.0]), 0.3),
            ConstraintSet::scaled_simplex(4, 2.0).unwrap(),
            ConstraintSet::NonnegativeOrthant { dim: 4 },
            ConstraintSet::slice_groups(
                4,
                vec![
                    SliceGroup { indices: vec![0, 1], mass: 0.4 },
                    SliceGroup { indices: vec![1, 2, 3], mass: 0.7 },
                ],
            )
            .unwrap(),
            ConstraintSet::epigraph(Arc::new(QuadraticNorm { scale: 1.5 }), 3),
            ConstraintSet::WholeSpace { dim: 4 },
        ]
    }

    proptest! {
        #[test]
        fn projection_idempotent_and_nonexpansive(
            a in proptest::collection::vec(-5.0f64..5.0, 4),
            b in proptest::collection::vec(-5.0f64..5.0, 4),
        ) {
            let (x, y) = (v(&a), v(&b));
            for set in sets() {
                let px = project(&set, &x).unwrap();
                let py = project(&set, &y).unwrap();
                prop_assert!(set.violation(&px).unwrap() <= 1e-9, "{set:?} {}", set.violation(&px).unwrap());
                let ppx = project(&set, &px).unwrap();
                prop_assert!((&ppx - &px).norm() <= 1e-10, "{set:?}");
                prop_assert!((&px - &py).norm() <= (&x - &y).norm() + 1e-9, "{set:?}");
            }
        }

        #[test]
        fn newton_groups_match_alternating_projection(
            a in proptest::collection::vec(-3.0f64..3.0, 6),
            m in proptest::collection::vec(0.0f64..2.0, 2),
            frac in 0.0f64..1.0,
        ) {
            // a 2x3 plan with both rows and the first column constrained
            let groups = vec![
                SliceGroup { indices: vec![0, 1, 2], mass: m[0] },
                SliceGroup { indices: vec![3, 4, 5], mass: m[1] },
                SliceGroup { indices: vec![0, 3], mass: frac * (m[0] + m[1]) },
            ];
            let x = v(&a);
            let fast = groups_newton(&groups, &x);
            let steps: Vec<Step<'_>> = groups
                .iter()
                .map(|g| Box::new(move |y: &mut DVector<f64>| { project_group(g, y); Ok(()) }) as Step<'_>)
                .collect();
            let slow = dykstra(&x, &steps, "test").unwrap();
            prop_assert!((fast.unwrap() - slow).amax() < 1e-9);
        }

        #[test]
        fn simplex_matches_active_set_oracle(a in proptest::collection::vec(-3.0f64..3.0, 1..6), r in 0.1f64..4.0) {
            let p = project_simplex(&v(&a), r).unwrap();
            let o = simplex_oracle(&a, r);
            prop_assert!((p.clone() - v(&o)).norm() < 1e-10);
            prop_assert!((p.sum() - r).abs() < 1e-12);
            prop_assert!(p.iter().all(|&t| t >= 0.0));
        }

        #[test]
        fn projection_residual_lies_in_normal_cone(a in proptest::collection::vec(-5.0f64..5.0, 4)) {
            let x = v(&a);
            for set in sets() {
                let p = project(&set, &x).unwrap();
                let r = normal_cone_residual(&set, &p, &(&x - &p)).unwrap();
                prop_assert!(r < 1e-6 * (1.0 + (&x - &p).norm()), "{set:?} r={r}");
            }
        }
    }
}
