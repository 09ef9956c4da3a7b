use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::problems::OtInstance;

/// Largest number of plan cells accepted by [`solve_transport_lp`].
pub const LP_MAX_CELLS: usize = 36;

const FEAS_TOL: f64 = 1e-12;

/// Exact transport LP by enumerating every basis of the transportation
/// polytope (spanning trees of the bipartite row/column graph), solving each
/// basis and keeping the cheapest nonnegative one. Exponential; meant as a
/// reference for small instances only.
pub fn solve_transport_lp(instance: &OtInstance) -> Result<(DMatrix<f64>, f64)> {
    let (ns, nt) = (instance.rows(), instance.cols());
    if ns * nt > LP_MAX_CELLS {
        return Err(Error::InvalidParameter(format!(
            "exhaustive LP limited to {LP_MAX_CELLS} cells, got {}",
            ns * nt
        )));
    }
    let mut search = Search {
        inst: instance,
        cells: (0..ns).flat_map(|i| (0..nt).map(move |j| (i, j))).collect(),
        need: ns + nt - 1,
        best: None,
    };
    let parent: Vec<usize> = (0..ns + nt).collect();
    let mut chosen = Vec::with_capacity(search.need);
    search.dfs(0, &mut chosen, parent);
    search.best.map(|(c, p)| (p, c)).ok_or_else(|| Error::InvalidMarginal("no feasible basis".into()))
}

struct Search<'a> {
    inst: &'a OtInstance,
    cells: Vec<(usize, usize)>,
    need: usize,
    best: Option<(f64, DMatrix<f64>)>,
}

fn find(parent: &[usize], mut a: usize) -> usize {
    while parent[a] != a {
        a = parent[a];
    }
    a
}

impl Search<'_> {
    fn dfs(&mut self, next: usize, chosen: &mut Vec<usize>, parent: Vec<usize>) {
        if chosen.len() == self.need {
            self.evaluate(chosen);
            return;
        }
        if self.cells.len() - next < self.need - chosen.len() {
            return;
        }
        let ns = self.inst.rows();
        let (i, j) = self.cells[next];
        let (ri, rj) = (find(&parent, i), find(&parent, ns + j));
        if ri != rj {
            let mut joined = parent.clone();
            joined[ri] = rj;
            chosen.push(next);
            self.dfs(next + 1, chosen, joined);
            chosen.pop();
        }
        self.dfs(next + 1, chosen, parent);
    }

    /// Solves the basis by peeling leaves of the tree.
    fn evaluate(&mut self, chosen: &[usize]) {
        let (ns, nt) = (self.inst.rows(), self.inst.cols());
        let mut remaining: Vec<f64> = self.inst.source.iter().chain(self.inst.target.iter()).copied().collect();
        let mut degree = vec![0usize; ns + nt];
        for &c in chosen {
            let (i, j) = self.cells[c];
            degree[i] += 1;
            degree[ns + j] += 1;
        }
        let mut open: Vec<bool> = vec![true; chosen.len()];
        let mut plan = DMatrix::zeros(ns, nt);
        for _ in 0..chosen.len() {
            let Some(leaf) = (0..ns + nt).find(|&a| degree[a] == 1) else { return };
            let Some(e) = (0..chosen.len()).find(|&e| {
                let (i, j) = self.cells[chosen[e]];
                open[e] && (i == leaf || ns + j == leaf)
            }) else {
                return;
            };
            let (i, j) = self.cells[chosen[e]];
            let flow = remaining[leaf];
            if flow < -FEAS_TOL {
                return;
            }
            plan[(i, j)] = flow.max(0.0);
            let other = if leaf == i { ns + j } else { i };
            remaining[leaf] = 0.0;
            remaining[other] -= flow;
            degree[i] -= 1;
            degree[ns + j] -= 1;
            open[e] = false;
        }
        let cost = self.inst.cost_of(&plan);
        if self.best.as_ref().is_none_or(|(b, _)| cost < *b) {
            self.best = Some((cost, plan));
        }
    }
}
