//! Directed communication graphs and the gossip matrix pair.
//!
//! An edge `(i, j)` means node `i` receives from node `j`. Self-loops are never
//! stored; the nonzero diagonals of `W` and `Q` come from the Laplacian
//! scaling in [`build_gossip_matrices`].

use std::collections::BTreeSet;
use std::fmt::Write as _;

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{null_space, seeded_rng};

/// Relative singular-value cutoff used when extracting null spaces.
pub const KERNEL_REL_THRESHOLD: f64 = 1e-10;

/// Tolerance on the zero row/column sums of a gossip pair.
pub const GOSSIP_SUM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectedGraph {
    node_count: usize,
    edges: BTreeSet<(usize, usize)>,
}

impl DirectedGraph {
    pub fn new(node_count: usize) -> Result<Self> {
        if node_count == 0 {
            return Err(Error::InvalidParameter("graph needs at least one node".into()));
        }
        Ok(Self {
            node_count,
            edges: BTreeSet::new(),
        })
    }

    pub fn from_edges(node_count: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Self::new(node_count)?;
        for &(r, s) in edges {
            g.add_edge(r, s)?;
        }
        Ok(g)
    }

    /// Adds "`receiver` can receive from `sender`".
    pub fn add_edge(&mut self, receiver: usize, sender: usize) -> Result<()> {
        if receiver >= self.node_count || sender >= self.node_count {
            return Err(Error::InvalidParameter(format!(
                "edge ({receiver}, {sender}) out of range for {} nodes",
                self.node_count
            )));
        }
        if receiver == sender {
            return Err(Error::InvalidParameter(format!(
                "self-loop at node {receiver} is implicit and may not be stored"
            )));
        }
        self.edges.insert((receiver, sender));
        Ok(())
    }

    /// Every ordered pair of distinct nodes.
    pub fn complete(node_count: usize) -> Result<Self> {
        let mut g = Self::new(node_count)?;
        for i in 0..node_count {
            for j in 0..node_count {
                if i != j {
                    g.edges.insert((i, j));
                }
            }
        }
        Ok(g)
    }

    /// Node `i` receives from node `i - 1` (cyclically).
    pub fn directed_cycle(node_count: usize) -> Result<Self> {
        let mut g = Self::new(node_count)?;
        if node_count > 1 {
            for i in 0..node_count {
                g.add_edge(i, (i + node_count - 1) % node_count)?;
            }
        }
        Ok(g)
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn contains(&self, receiver: usize, sender: usize) -> bool {
        self.edges.contains(&(receiver, sender))
    }

    /// `a[i][j] = 1` iff `i` receives from `j`.
    pub fn adjacency(&self) -> DMatrix<f64> {
        let n = self.node_count;
        let mut a = DMatrix::zeros(n, n);
        for &(r, s) in &self.edges {
            a[(r, s)] = 1.0;
        }
        a
    }

    pub fn in_degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.node_count];
        for &(r, _) in &self.edges {
            d[r] += 1;
        }
        d
    }

    pub fn out_degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.node_count];
        for &(_, s) in &self.edges {
            d[s] += 1;
        }
        d
    }

    /// In-neighbours of `v` (the nodes it receives from).
    pub fn in_neighbors(&self, v: usize) -> Vec<usize> {
        self.edges
            .range((v, 0)..(v + 1, 0))
            .map(|&(_, s)| s)
            .collect()
    }

    pub fn is_strongly_connected(&self) -> bool {
        let n = self.node_count;
        let reach = |forward: bool| {
            let mut seen = vec![false; n];
            let mut stack = vec![0usize];
            seen[0] = true;
            while let Some(u) = stack.pop() {
                for &(r, s) in &self.edges {
                    let (from, to) = if forward { (s, r) } else { (r, s) };
                    if from == u && !seen[to] {
                        seen[to] = true;
                        stack.push(to);
                    }
                }
            }
            seen.into_iter().all(|b| b)
        };
        reach(true) && reach(false)
    }

    /// Edge-list text: a `nodes M` header then one `receiver sender` pair per
    /// line, zero-based.
    pub fn to_edge_list(&self) -> String {
        let mut out = format!("nodes {}\n", self.node_count);
        for &(r, s) in &self.edges {
            let _ = writeln!(out, "{r} {s}");
        }
        out
    }

    pub fn from_edge_list(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty edge list".into()))?;
        let mut parts = header.split_whitespace();
        let node_count = match (parts.next(), parts.next(), parts.next()) {
            (Some("nodes"), Some(m), None) => m
                .parse::<usize>()
                .map_err(|e| Error::Parse(format!("bad node count `{m}`: {e}")))?,
            _ => return Err(Error::Parse(format!("expected `nodes M`, got `{header}`"))),
        };
        let mut g = Self::new(node_count)?;
        for line in lines {
            let nums: Vec<usize> = line
                .split_whitespace()
                .map(|t| {
                    t.parse::<usize>()
                        .map_err(|e| Error::Parse(format!("bad index `{t}`: {e}")))
                })
                .collect::<Result<_>>()?;
            if nums.len() != 2 {
                return Err(Error::Parse(format!("expected `receiver sender`, got `{line}`")));
            }
            g.add_edge(nums[0], nums[1])?;
        }
        Ok(g)
    }
}

/// The pair of gossip matrices: `W` with zero row sums mixes solutions and
/// `Q` with zero column sums mixes the tracking variables.
#[derive(Debug, Clone, PartialEq)]
pub struct GossipPair {
    pub w: DMatrix<f64>,
    pub q: DMatrix<f64>,
}

impl GossipPair {
    /// Validates the zero row/column sums.
    pub fn new(w: DMatrix<f64>, q: DMatrix<f64>) -> Result<Self> {
        if !w.is_square() || w.shape() != q.shape() {
            return Err(Error::DimensionMismatch {
                expected: w.nrows(),
                found: q.nrows(),
            });
        }
        let pair = Self { w, q };
        let (rows, cols) = (pair.max_row_sum(), pair.max_col_sum());
        if rows > GOSSIP_SUM_TOL * 10.0 || cols > GOSSIP_SUM_TOL * 10.0 {
            return Err(Error::InvalidParameter(format!(
                "gossip pair sums not zero (W rows {rows:e}, Q cols {cols:e})"
            )));
        }
        Ok(pair)
    }

    /// Zero matrices: the pair for a network with a single agent.
    pub fn isolated(node_count: usize) -> Self {
        Self {
            w: DMatrix::zeros(node_count, node_count),
            q: DMatrix::zeros(node_count, node_count),
        }
    }

    pub fn node_count(&self) -> usize {
        self.w.nrows()
    }

    pub fn max_row_sum(&self) -> f64 {
        self.w
            .row_iter()
            .map(|r| r.sum().abs())
            .fold(0.0, f64::max)
    }

    pub fn max_col_sum(&self) -> f64 {
        self.q
            .column_iter()
            .map(|c| c.sum().abs())
            .fold(0.0, f64::max)
    }

    /// `I - W`, row stochastic for Laplacian-built pairs.
    pub fn row_stochastic(&self) -> DMatrix<f64> {
        DMatrix::identity(self.node_count(), self.node_count()) - &self.w
    }

    /// `I - Q`, column stochastic for Laplacian-built pairs.
    pub fn column_stochastic(&self) -> DMatrix<f64> {
        DMatrix::identity(self.node_count(), self.node_count()) - &self.q
    }
}

/// `W = L_in / (2 d_in_max)`, `Q = L_out / (2 d_out_max)`.
pub fn build_gossip_matrices(g: &DirectedGraph) -> Result<GossipPair> {
    let a = g.adjacency();
    let din = g.in_degrees();
    let dout = g.out_degrees();
    let din_max = din.iter().copied().max().unwrap_or(0);
    let dout_max = dout.iter().copied().max().unwrap_or(0);
    if din_max == 0 || dout_max == 0 {
        return Err(Error::DegenerateGraph(format!(
            "max in-degree {din_max}, max out-degree {dout_max}"
        )));
    }
    let n = g.node_count();
    let mut w = -a.clone();
    let mut q = -a;
    for i in 0..n {
        w[(i, i)] += din[i] as f64;
        q[(i, i)] += dout[i] as f64;
    }
    w /= 2.0 * din_max as f64;
    q /= 2.0 * dout_max as f64;
    Ok(GossipPair { w, q })
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelReport {
    pub holds: bool,
    pub dim_ker_q: usize,
    pub dim_ker_wt: usize,
    /// Spectral norm of the difference of the two null-space projectors.
    pub projector_gap: f64,
}

/// Decides `ker(Q) == ker(W^T)` by comparing orthonormal null-space bases.
pub fn check_kernel_condition(p: &GossipPair) -> KernelReport {
    let nq = null_space(&p.q, KERNEL_REL_THRESHOLD);
    let nw = null_space(&p.w.transpose(), KERNEL_REL_THRESHOLD);
    let dim_ker_q = nq.ncols();
    let dim_ker_wt = nw.ncols();
    let proj_q = &nq * nq.transpose();
    let proj_w = &nw * nw.transpose();
    let diff = proj_q - proj_w;
    let projector_gap = if diff.is_empty() {
        0.0
    } else {
        diff.clone()
            .svd(false, false)
            .singular_values
            .iter()
            .cloned()
            .fold(0.0, f64::max)
    };
    KernelReport {
        holds: dim_ker_q == dim_ker_wt && projector_gap <= 1e-8,
        dim_ker_q,
        dim_ker_wt,
        projector_gap,
    }
}

/// A random Hamiltonian cycle plus independently sampled bidirectional links.
///
/// Every node ends up with equal in- and out-degree, so the all-ones vector
/// spans both `ker(Q)` and `ker(W^T)`.
pub fn random_strongly_connected_graph(
    node_count: usize,
    extra_edge_probability: f64,
    seed: u64,
) -> Result<DirectedGraph> {
    if node_count < 2 {
        return Err(Error::InvalidParameter(format!(
            "need at least 2 nodes, got {node_count}"
        )));
    }
    if !(0.0..=1.0).contains(&extra_edge_probability) {
        return Err(Error::InvalidParameter(format!(
            "edge probability {extra_edge_probability} outside [0, 1]"
        )));
    }
    let mut rng = seeded_rng(seed);
    let mut order: Vec<usize> = (0..node_count).collect();
    order.shuffle(&mut rng);
    let mut g = DirectedGraph::new(node_count)?;
    for k in 0..node_count {
        let receiver = order[(k + 1) % node_count];
        g.add_edge(receiver, order[k])?;
    }
    // extra links are added in both directions so every node keeps equal in-
    // and out-degree; pairs already joined by the cycle are skipped
    for a in 0..node_count {
        for b in a + 1..node_count {
            let linked = g.contains(a, b) || g.contains(b, a);
            if rng.random::<f64>() < extra_edge_probability && !linked {
                g.edges.insert((a, b));
                g.edges.insert((b, a));
            }
        }
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn two_node_pair() {
        let g = DirectedGraph::from_edges(2, &[(0, 1), (1, 0)]).unwrap();
        let p = build_gossip_matrices(&g).unwrap();
        let expected = DMatrix::from_row_slice(2, 2, &[0.5, -0.5, -0.5, 0.5]);
        assert_abs_diff_eq!(p.w, expected, epsilon = 1e-15);
        assert_abs_diff_eq!(p.q, expected, epsilon = 1e-15);
    }

    #[test]
    fn isolated_node_is_degenerate() {
        let g = DirectedGraph::new(1).unwrap();
        assert!(matches!(
            build_gossip_matrices(&g),
            Err(Error::DegenerateGraph(_))
        ));
    }

    #[test]
    fn directed_cycle_is_half_identity_minus_shift() {
        let g = DirectedGraph::directed_cycle(3).unwrap();
        let p = build_gossip_matrices(&g).unwrap();
        let a = g.adjacency();
        let expected = (DMatrix::identity(3, 3) - a) / 2.0;
        assert_abs_diff_eq!(p.w, expected, epsilon = 1e-15);
        assert!(p.max_row_sum() <= GOSSIP_SUM_TOL);
        let rep = check_kernel_condition(&p);
        assert!(rep.holds);
        assert_eq!((rep.dim_ker_q, rep.dim_ker_wt), (1, 1));
    }

    #[test]
    fn complete_graph_kernel() {
        let p = build_gossip_matrices(&DirectedGraph::complete(4).unwrap()).unwrap();
        assert!(check_kernel_condition(&p).holds);
    }

    #[test]
    fn single_edge_kernels_differ() {
        // node 1 receives from node 0 only
        let g = DirectedGraph::from_edges(2, &[(1, 0)]).unwrap();
        let p = build_gossip_matrices(&g).unwrap();
        let rep = check_kernel_condition(&p);
        assert!(!rep.holds);
        assert_eq!((rep.dim_ker_q, rep.dim_ker_wt), (1, 1));
    }

    #[test]
    fn random_graph_errors_and_two_cycle() {
        assert!(random_strongly_connected_graph(1, 0.1, 0).is_err());
        assert!(random_strongly_connected_graph(5, 1.5, 0).is_err());
        let g = random_strongly_connected_graph(2, 0.0, 99).unwrap();
        assert_eq!(g.edge_count(), 2);
        assert!(g.contains(0, 1) && g.contains(1, 0));
    }

    #[test]
    fn random_graph_passes_kernel_check() {
        let g = random_strongly_connected_graph(20, 0.3, 7).unwrap();
        assert!(g.is_strongly_connected());
        let p = build_gossip_matrices(&g).unwrap();
        assert!(check_kernel_condition(&p).holds);
        let again = random_strongly_connected_graph(20, 0.3, 7).unwrap();
        assert_eq!(g, again);
    }

    /// Strong connectivity alone does not align the two kernels once in- and
    /// out-degrees differ.
    #[test]
    fn unbalanced_strongly_connected_graph_can_fail_kernel_check() {
        let g = DirectedGraph::from_edges(3, &[(1, 0), (2, 1), (0, 2), (2, 0)]).unwrap();
        assert!(g.is_strongly_connected());
        let report = check_kernel_condition(&build_gossip_matrices(&g).unwrap());
        assert_eq!((report.dim_ker_q, report.dim_ker_wt), (1, 1));
        assert!(!report.holds);
    }

    #[test]
    fn random_graphs_are_degree_balanced() {
        for seed in 0..10 {
            let g = random_strongly_connected_graph(9, 0.4, seed).unwrap();
            assert_eq!(g.in_degrees(), g.out_degrees());
            let report = check_kernel_condition(&build_gossip_matrices(&g).unwrap());
            assert!(report.holds, "{report:?}");
        }
    }

    #[test]
    fn stochastic_complements_are_nonnegative() {
        let g = random_strongly_connected_graph(12, 0.2, 3).unwrap();
        let p = build_gossip_matrices(&g).unwrap();
        let r = p.row_stochastic();
        let c = p.column_stochastic();
        assert!(r.iter().all(|&x| x >= 0.0) && c.iter().all(|&x| x >= 0.0));
        for i in 0..12 {
            assert_abs_diff_eq!(r.row(i).sum(), 1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(c.column(i).sum(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn edge_list_round_trip() {
        let g = random_strongly_connected_graph(6, 0.4, 11).unwrap();
        let back = DirectedGraph::from_edge_list(&g.to_edge_list()).unwrap();
        assert_eq!(g, back);
        assert!(DirectedGraph::from_edge_list("nodes 2\n0 0\n").is_err());
        assert!(DirectedGraph::from_edge_list("2\n").is_err());
    }
}
