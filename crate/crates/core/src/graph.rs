//! Row-stochastic weighted digraphs in CSR layout.
//!
//! A [`Graph`] stores the transition probabilities `p_ij` of a random walk.
//! Absorbing vertices are sinks: their rows are empty, so the interior block
//! of the transition matrix is substochastic.

use std::collections::VecDeque;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-vertex real function `u: V -> R`.
pub type Vector = Vec<f64>;

/// Row sums within this distance of 1 are stored as given.
pub const STOCHASTIC_TOL: f64 = 1e-12;

/// Rows are processed in parallel above this order. Each row is reduced
/// sequentially in CSR order, so the result does not depend on the pool size.
const PAR_ROWS: usize = 2048;

/// Anything that can push a function through one step of the walk.
///
/// `apply` computes `(Pu)(i) = sum_j p_ij u(j)`. Sink rows produce 0.
pub trait TransitionOperator: Sync {
    fn order(&self) -> usize;
    fn is_absorbing(&self, v: usize) -> bool;
    fn has_absorbing(&self) -> bool;
    fn apply(&self, u: &[f64], out: &mut [f64]);
}

#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    n: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    weights: Vec<f64>,
    absorbing: Vec<usize>,
    sink: Vec<bool>,
}

/// Canonical JSON form of a graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphDump {
    pub n: usize,
    pub row_offsets: Vec<usize>,
    pub col_indices: Vec<usize>,
    pub weights: Vec<f64>,
    pub absorbing: Vec<usize>,
}

/// Diagonal entry of `L` and absolute sum of the off-diagonal entries in the same row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GershgorinRow {
    pub diagonal: f64,
    pub off_diagonal: f64,
}

/// Builds a canonical graph from weighted edges.
///
/// Rows of non-absorbing vertices are divided by their sum unless that sum is
/// already within [`STOCHASTIC_TOL`] of 1. Edges leaving absorbing vertices
/// are validated and then dropped.
pub fn build_graph(n: usize, edges: &[(usize, usize, f64)], absorbing: &[usize]) -> Result<Graph> {
    if n == 0 {
        return Err(Error::EmptyGraph);
    }
    let mut sink = vec![false; n];
    for &a in absorbing {
        if a >= n {
            return Err(Error::IndexOutOfRange { id: a, n });
        }
        sink[a] = true;
    }
    let mut sorted: Vec<(usize, usize, f64)> = Vec::with_capacity(edges.len());
    for &(src, dst, weight) in edges {
        for id in [src, dst] {
            if id >= n {
                return Err(Error::IndexOutOfRange { id, n });
            }
        }
        if !(weight > 0.0) || !weight.is_finite() {
            return Err(Error::NonPositiveWeight { src, dst, weight });
        }
        sorted.push((src, dst, weight));
    }
    sorted.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
    for w in sorted.windows(2) {
        if w[0].0 == w[1].0 && w[0].1 == w[1].1 {
            return Err(Error::DuplicateEdge { src: w[0].0, dst: w[0].1 });
        }
    }

    let mut row_offsets = Vec::with_capacity(n + 1);
    let mut col_indices = Vec::with_capacity(sorted.len());
    let mut weights = Vec::with_capacity(sorted.len());
    row_offsets.push(0);
    let mut cursor = 0;
    for row in 0..n {
        let start = cursor;
        while cursor < sorted.len() && sorted[cursor].0 == row {
            cursor += 1;
        }
        if sink[row] {
            row_offsets.push(col_indices.len());
            continue;
        }
        let entries = &sorted[start..cursor];
        if entries.is_empty() {
            return Err(Error::EmptyRow { vertex: row });
        }
        let sum: f64 = entries.iter().map(|e| e.2).sum();
        let rescale = (sum - 1.0).abs() > STOCHASTIC_TOL;
        for e in entries {
            col_indices.push(e.1);
            weights.push(if rescale { e.2 / sum } else { e.2 });
        }
        row_offsets.push(col_indices.len());
    }

    let absorbing: Vec<usize> = (0..n).filter(|&i| sink[i]).collect();
    Ok(Graph { n, row_offsets, col_indices, weights, absorbing, sink })
}

impl Graph {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.col_indices.len()
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Sorted absorbing vertex ids.
    pub fn absorbing(&self) -> &[usize] {
        &self.absorbing
    }

    pub fn absorbing_mask(&self) -> &[bool] {
        &self.sink
    }

    /// Neighbours and transition probabilities of row `i`.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let (a, b) = (self.row_offsets[i], self.row_offsets[i + 1]);
        (&self.col_indices[a..b], &self.weights[a..b])
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        let (cols, ws) = self.row(i);
        match cols.binary_search(&j) {
            Ok(k) => ws[k],
            Err(_) => 0.0,
        }
    }

    /// All stored edges in CSR order.
    pub fn edges(&self) -> Vec<(usize, usize, f64)> {
        (0..self.n)
            .flat_map(|i| {
                let (cols, ws) = self.row(i);
                cols.iter().zip(ws).map(move |(&j, &w)| (i, j, w))
            })
            .collect()
    }

    /// Same edges with a different absorbing set. Rows of new sinks are emptied.
    pub fn with_absorbing(&self, absorbing: &[usize]) -> Result<Graph> {
        build_graph(self.n, &self.edges(), absorbing)
    }

    pub fn row_sum(&self, i: usize) -> f64 {
        self.row(i).1.iter().sum()
    }

    fn row_dot(&self, i: usize, u: &[f64]) -> f64 {
        let (cols, ws) = self.row(i);
        cols.iter().zip(ws).map(|(&j, &w)| w * u[j]).sum()
    }

    /// `out = P^T v`, i.e. `out(j) = sum_i v(i) p_ij`, accumulated in row order.
    pub fn apply_transpose(&self, v: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for i in 0..self.n {
            let vi = v[i];
            let (cols, ws) = self.row(i);
            for (&j, &w) in cols.iter().zip(ws) {
                out[j] += vi * w;
            }
        }
    }

    /// Checks that `u` has one finite entry per vertex.
    pub fn check_vector(&self, u: &[f64]) -> Result<()> {
        if u.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: u.len() });
        }
        if let Some(index) = u.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(())
    }

    pub fn to_dump(&self) -> GraphDump {
        GraphDump {
            n: self.n,
            row_offsets: self.row_offsets.clone(),
            col_indices: self.col_indices.clone(),
            weights: self.weights.clone(),
            absorbing: self.absorbing.clone(),
        }
    }

    /// Rebuilds from a dump, re-validating every invariant.
    pub fn from_dump(dump: &GraphDump) -> Result<Graph> {
        if dump.row_offsets.len() != dump.n + 1
            || dump.col_indices.len() != dump.weights.len()
            || dump.row_offsets.last() != Some(&dump.col_indices.len())
            || dump.row_offsets.windows(2).any(|w| w[0] > w[1])
        {
            return Err(Error::InvalidParameter("inconsistent CSR arrays".into()));
        }
        let mut edges = Vec::with_capacity(dump.weights.len());
        for i in 0..dump.n {
            for k in dump.row_offsets[i]..dump.row_offsets[i + 1] {
                edges.push((i, dump.col_indices[k], dump.weights[k]));
            }
        }
        build_graph(dump.n, &edges, &dump.absorbing)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_dump()).expect("graph dump serializes")
    }

    pub fn from_json(s: &str) -> Result<Graph> {
        Graph::from_dump(&serde_json::from_str(s)?)
    }
}

impl TransitionOperator for Graph {
    fn order(&self) -> usize {
        self.n
    }

    fn is_absorbing(&self, v: usize) -> bool {
        self.sink[v]
    }

    fn has_absorbing(&self) -> bool {
        !self.absorbing.is_empty()
    }

    fn apply(&self, u: &[f64], out: &mut [f64]) {
        if self.n >= PAR_ROWS {
            out.par_iter_mut().enumerate().for_each(|(i, o)| *o = self.row_dot(i, u));
        } else {
            out.iter_mut().enumerate().for_each(|(i, o)| *o = self.row_dot(i, u));
        }
    }
}

fn reached_from(n: usize, roots: &[usize], adj: impl Fn(usize) -> Vec<usize>) -> Vec<bool> {
    let mut seen = vec![false; n];
    let mut queue: VecDeque<usize> = VecDeque::new();
    for &r in roots {
        if !seen[r] {
            seen[r] = true;
            queue.push_back(r);
        }
    }
    while let Some(v) = queue.pop_front() {
        for w in adj(v) {
            if !seen[w] {
                seen[w] = true;
                queue.push_back(w);
            }
        }
    }
    seen
}

fn reverse_adjacency(g: &Graph) -> Vec<Vec<usize>> {
    let mut rev = vec![Vec::new(); g.n];
    for (i, j, _) in g.edges() {
        rev[j].push(i);
    }
    rev
}

/// Without an absorbing set: strong connectivity of the support of `P`.
/// With one: every vertex reaches some absorbing vertex.
pub fn check_reachability(g: &Graph) -> bool {
    let rev = reverse_adjacency(g);
    if g.has_absorbing() {
        return reached_from(g.n, &g.absorbing, |v| rev[v].clone()).into_iter().all(|x| x);
    }
    let forward = reached_from(g.n, &[0], |v| g.row(v).0.to_vec());
    let backward = reached_from(g.n, &[0], |v| rev[v].clone());
    forward.into_iter().zip(backward).all(|(a, b)| a && b)
}

/// Gershgorin data of `L = I - P` per row. Sink rows of `L` are zero.
pub fn laplacian_row_sums(g: &Graph) -> Vec<GershgorinRow> {
    (0..g.n)
        .map(|i| {
            if g.sink[i] {
                return GershgorinRow { diagonal: 0.0, off_diagonal: 0.0 };
            }
            let (cols, ws) = g.row(i);
            let mut p_ii = 0.0;
            let mut off = 0.0;
            for (&j, &w) in cols.iter().zip(ws) {
                if j == i {
                    p_ii = w;
                } else {
                    off += w;
                }
            }
            GershgorinRow { diagonal: 1.0 - p_ii, off_diagonal: off }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_cycle() {
        let g = build_graph(2, &[(0, 1, 1.0), (1, 0, 1.0)], &[]).unwrap();
        assert_eq!(g.weight(0, 1), 1.0);
        assert_eq!(g.weight(1, 0), 1.0);
        assert!(check_reachability(&g));
    }

    #[test]
    fn rows_are_normalized() {
        let g = build_graph(2, &[(0, 1, 3.0), (0, 0, 1.0), (1, 0, 1.0)], &[]).unwrap();
        assert_eq!(g.row(0).0, &[0, 1]);
        assert_eq!(g.weight(0, 1), 0.75);
        assert_eq!(g.weight(0, 0), 0.25);
    }

    #[test]
    fn rejects_bad_edges() {
        let e = build_graph(3, &[(0, 1, 1.0), (1, 2, 1.0), (2, 0, 1.0), (2, 1, 0.0)], &[]);
        assert!(matches!(e, Err(Error::NonPositiveWeight { src: 2, dst: 1, .. })));
        let e = build_graph(2, &[(0, 1, 1.0), (0, 1, 2.0), (1, 0, 1.0)], &[]);
        assert_eq!(e, Err(Error::DuplicateEdge { src: 0, dst: 1 }));
        let e = build_graph(2, &[(0, 2, 1.0)], &[]);
        assert_eq!(e, Err(Error::IndexOutOfRange { id: 2, n: 2 }));
        let e = build_graph(2, &[(0, 1, 1.0)], &[]);
        assert_eq!(e, Err(Error::EmptyRow { vertex: 1 }));
        assert_eq!(build_graph(2, &[(0, 1, 1.0)], &[5]), Err(Error::IndexOutOfRange { id: 5, n: 2 }));
        assert_eq!(build_graph(0, &[], &[]), Err(Error::EmptyGraph));
        let e = build_graph(1, &[(0, 0, f64::NAN)], &[]);
        assert!(matches!(e, Err(Error::NonPositiveWeight { .. })));
    }

    #[test]
    fn absorbing_rows_are_emptied() {
        let g = build_graph(2, &[(0, 1, 1.0), (1, 0, 1.0)], &[1]).unwrap();
        assert!(g.row(1).0.is_empty());
        assert_eq!(g.absorbing(), &[1]);
        let rows = laplacian_row_sums(&g);
        assert_eq!(rows[1], GershgorinRow { diagonal: 0.0, off_diagonal: 0.0 });
    }

    #[test]
    fn reachability() {
        let cycle = build_graph(3, &[(0, 1, 1.0), (1, 2, 1.0), (2, 0, 1.0)], &[]).unwrap();
        assert!(check_reachability(&cycle));
        let loops = build_graph(2, &[(0, 0, 1.0), (1, 1, 1.0)], &[]).unwrap();
        assert!(!check_reachability(&loops));
        let path = build_graph(3, &[(0, 1, 1.0), (1, 2, 1.0)], &[2]).unwrap();
        assert!(check_reachability(&path));
        let trapped = build_graph(3, &[(0, 1, 1.0), (1, 0, 1.0), (2, 2, 1.0)], &[0]).unwrap();
        // vertex 2 only loops on itself
        assert!(!check_reachability(&trapped));
    }

    #[test]
    fn gershgorin_two_cycle() {
        let g = build_graph(2, &[(0, 1, 1.0), (1, 0, 1.0)], &[]).unwrap();
        for r in laplacian_row_sums(&g) {
            assert_eq!(r, GershgorinRow { diagonal: 1.0, off_diagonal: 1.0 });
        }
    }

    #[test]
    fn gershgorin_complete_with_loops() {
        let edges: Vec<_> = (0..4).flat_map(|i| (0..4).map(move |j| (i, j, 1.0))).collect();
        let g = build_graph(4, &edges, &[]).unwrap();
        for r in laplacian_row_sums(&g) {
            assert_eq!(r.diagonal, 0.75);
            assert!((r.off_diagonal - 0.75).abs() < 1e-15);
        }
    }

    #[test]
    fn transpose_matches_dense() {
        let g = build_graph(3, &[(0, 1, 2.0), (0, 2, 1.0), (1, 2, 1.0), (2, 0, 1.0), (2, 1, 3.0)], &[])
            .unwrap();
        let v = [0.2, 0.3, 0.5];
        let mut out = [0.0; 3];
        g.apply_transpose(&v, &mut out);
        for j in 0..3 {
            let expect: f64 = (0..3).map(|i| v[i] * g.weight(i, j)).sum();
            assert!((out[j] - expect).abs() < 1e-15);
        }
    }

    #[test]
    fn json_round_trip() {
        let g = build_graph(3, &[(0, 1, 1.0), (0, 2, 2.0), (1, 0, 1.0), (2, 1, 1.0)], &[1]).unwrap();
        let back = Graph::from_json(&g.to_json()).unwrap();
        assert_eq!(g, back);
        assert!(Graph::from_json(r#"{"n":2,"row_offsets":[0,1],"col_indices":[1],"weights":[1.0],"absorbing":[]}"#).is_err());
    }

    #[test]
    fn check_vector_errors() {
        let g = build_graph(2, &[(0, 1, 1.0), (1, 0, 1.0)], &[]).unwrap();
        assert_eq!(g.check_vector(&[1.0]), Err(Error::DimensionMismatch { expected: 2, got: 1 }));
        assert_eq!(g.check_vector(&[1.0, f64::INFINITY]), Err(Error::NonFinite { index: 1 }));
    }
}
