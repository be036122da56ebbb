//! Deterministic and seeded constructors for the graph families used as
//! examples and extremizers.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{build_graph, Graph, TransitionOperator};

/// A graph family with its parameters. Randomized families carry a seed,
/// deterministic ones cannot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum GenSpec {
    Path { n: usize },
    Cycle { n: usize },
    CompleteAbsorbing { n: usize },
    CyclePlusBoundary { n: usize, eps: f64 },
    TwoCompleteBridge { n: usize },
    SmallWorldRing { n: usize, n_boundary: usize, expected_extra_edges: f64, seed: u64 },
    /// `points` samples from the dumbbell domain, k-NN symmetrized.
    KnnDumbbell { points: usize, k: usize, seed: u64 },
}

impl GenSpec {
    pub fn build(&self) -> Result<Graph> {
        match *self {
            GenSpec::Path { n } => gen_path(n),
            GenSpec::Cycle { n } => gen_cycle(n),
            GenSpec::CompleteAbsorbing { n } => gen_complete_absorbing(n),
            GenSpec::CyclePlusBoundary { n, eps } => gen_cycle_plus_boundary(n, eps),
            GenSpec::TwoCompleteBridge { n } => gen_two_complete_bridge(n),
            GenSpec::SmallWorldRing { n, n_boundary, expected_extra_edges, seed } => {
                gen_small_world_ring(n, n_boundary, expected_extra_edges, seed)
            }
            GenSpec::KnnDumbbell { points, k, seed } => {
                gen_knn_point_cloud(&sample_dumbbell(points, seed), k)
            }
        }
    }

    pub fn family_name(&self) -> &'static str {
        match self {
            GenSpec::Path { .. } => "path",
            GenSpec::Cycle { .. } => "cycle",
            GenSpec::CompleteAbsorbing { .. } => "complete_absorbing",
            GenSpec::CyclePlusBoundary { .. } => "cycle_plus_boundary",
            GenSpec::TwoCompleteBridge { .. } => "two_complete_bridge",
            GenSpec::SmallWorldRing { .. } => "small_world_ring",
            GenSpec::KnnDumbbell { .. } => "knn_point_cloud",
        }
    }

    /// Same family with its primary size parameter replaced.
    pub fn with_size(&self, size: usize) -> GenSpec {
        let mut s = self.clone();
        match &mut s {
            GenSpec::Path { n }
            | GenSpec::Cycle { n }
            | GenSpec::CompleteAbsorbing { n }
            | GenSpec::CyclePlusBoundary { n, .. }
            | GenSpec::TwoCompleteBridge { n }
            | GenSpec::SmallWorldRing { n, .. } => *n = size,
            GenSpec::KnnDumbbell { points, .. } => *points = size,
        }
        s
    }
}

fn ensure_size(got: usize, min: usize) -> Result<()> {
    if got < min {
        Err(Error::SizeTooSmall { got, min })
    } else {
        Ok(())
    }
}

/// Simple random walk on `0..n`. End vertices step to their only neighbour.
pub fn gen_path(n: usize) -> Result<Graph> {
    ensure_size(n, 3)?;
    let mut edges = Vec::with_capacity(2 * n);
    for i in 0..n - 1 {
        edges.push((i, i + 1, 1.0));
        edges.push((i + 1, i, 1.0));
    }
    build_graph(n, &edges, &[])
}

/// Simple random walk on the cycle `C_n`.
pub fn gen_cycle(n: usize) -> Result<Graph> {
    ensure_size(n, 3)?;
    let edges: Vec<_> = (0..n)
        .flat_map(|i| [(i, (i + 1) % n, 1.0), (i, (i + n - 1) % n, 1.0)])
        .collect();
    build_graph(n, &edges, &[])
}

/// `K_n` with self-loops, every weight `1/n`, vertex `n - 1` absorbing.
pub fn gen_complete_absorbing(n: usize) -> Result<Graph> {
    ensure_size(n, 2)?;
    let edges: Vec<_> = (0..n - 1).flat_map(|i| (0..n).map(move |j| (i, j, 1.0))).collect();
    build_graph(n, &edges, &[n - 1])
}

/// Cycle `0..n` where every vertex leaks `eps` to the absorbing vertex `n`.
pub fn gen_cycle_plus_boundary(n: usize, eps: f64) -> Result<Graph> {
    ensure_size(n, 3)?;
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::BadEpsilon(eps));
    }
    let side = (1.0 - eps) / 2.0;
    let mut edges = Vec::with_capacity(3 * n);
    for i in 0..n {
        edges.push((i, (i + 1) % n, side));
        edges.push((i, (i + n - 1) % n, side));
        edges.push((i, n, eps));
    }
    build_graph(n + 1, &edges, &[n])
}

/// Two copies of `K_n` (with self-loops) joined through a bridge vertex `2n`
/// that is adjacent to all other vertices.
pub fn gen_two_complete_bridge(n: usize) -> Result<Graph> {
    ensure_size(n, 2)?;
    let bridge = 2 * n;
    let mut edges = Vec::new();
    for block in 0..2 {
        let base = block * n;
        for i in base..base + n {
            for j in base..base + n {
                edges.push((i, j, 1.0));
            }
            edges.push((i, bridge, 1.0));
            edges.push((bridge, i, 1.0));
        }
    }
    build_graph(2 * n + 1, &edges, &[])
}

/// Ring plus i.i.d. chords with `absorbing` boundary vertices.
#[derive(Debug, Clone)]
pub struct SmallWorld {
    pub graph: Graph,
    /// Chords added on top of the ring, as `(i, j)` with `i < j`.
    pub chords: Vec<(usize, usize)>,
}

/// Ring on `n` vertices; every unordered pair gets a chord with probability
/// `expected_extra_edges / C(n, 2)` (pairs already on the ring stay single
/// edges); `n_boundary` uniformly chosen vertices become absorbing.
pub fn gen_small_world(n: usize, n_boundary: usize, expected_extra_edges: f64, seed: u64) -> Result<SmallWorld> {
    ensure_size(n, 8)?;
    if n_boundary == 0 || n_boundary >= n {
        return Err(Error::BadBoundaryCount { count: n_boundary, n });
    }
    let pairs = (n * (n - 1) / 2) as f64;
    let q = expected_extra_edges / pairs;
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::InvalidParameter(format!(
            "expected_extra_edges must lie in [0, {pairs}], got {expected_extra_edges}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chords = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let on_ring = j == i + 1 || (i == 0 && j == n - 1);
            // one draw per pair keeps the stream layout independent of the ring test
            let hit = rng.gen::<f64>() < q;
            if hit && !on_ring {
                chords.push((i, j));
            }
        }
    }
    let mut boundary = sample(&mut rng, n, n_boundary).into_vec();
    boundary.sort_unstable();

    let mut edges = Vec::with_capacity(2 * (n + chords.len()));
    for i in 0..n {
        let j = (i + 1) % n;
        edges.push((i, j, 1.0));
        edges.push((j, i, 1.0));
    }
    for &(i, j) in &chords {
        edges.push((i, j, 1.0));
        edges.push((j, i, 1.0));
    }
    let graph = build_graph(n, &edges, &boundary)?;
    Ok(SmallWorld { graph, chords })
}

pub fn gen_small_world_ring(n: usize, n_boundary: usize, expected_extra_edges: f64, seed: u64) -> Result<Graph> {
    gen_small_world(n, n_boundary, expected_extra_edges, seed).map(|s| s.graph)
}

fn dist2(a: [f64; 2], b: [f64; 2]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    dx * dx + dy * dy
}

/// Exact Euclidean k-NN graph, symmetrized by union, unit weights.
/// Neighbour ties are broken by vertex id.
pub fn gen_knn_point_cloud(points: &[[f64; 2]], k: usize) -> Result<Graph> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    let n = points.len();
    if n <= k {
        return Err(Error::TooFewPoints { points: n, k });
    }
    let mut adjacent = vec![Vec::with_capacity(2 * k); n];
    let mut cand: Vec<(f64, usize)> = Vec::with_capacity(n);
    for i in 0..n {
        cand.clear();
        for j in 0..n {
            if j == i {
                continue;
            }
            let d = dist2(points[i], points[j]);
            if d == 0.0 {
                return Err(Error::DuplicatePoints(i.min(j), i.max(j)));
            }
            cand.push((d, j));
        }
        cand.select_nth_unstable_by(k - 1, |a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        for &(_, j) in &cand[..k] {
            adjacent[i].push(j);
            adjacent[j].push(i);
        }
    }
    let mut edges = Vec::new();
    for (i, list) in adjacent.iter_mut().enumerate() {
        list.sort_unstable();
        list.dedup();
        edges.extend(list.iter().map(|&j| (i, j, 1.0)));
    }
    build_graph(n, &edges, &[])
}

/// Two unit squares `[0,1]x[0,1]` and `[1.5,2.5]x[0,1]` joined by the neck
/// `[1,1.5]x[0.4,0.6]`.
pub fn in_dumbbell(p: [f64; 2]) -> bool {
    let [x, y] = p;
    if !(0.0..=1.0).contains(&y) {
        return false;
    }
    (0.0..=1.0).contains(&x) || (1.5..=2.5).contains(&x) || ((1.0..=1.5).contains(&x) && (0.4..=0.6).contains(&y))
}

/// Uniform samples from the dumbbell domain by rejection.
pub fn sample_dumbbell(count: usize, seed: u64) -> Vec<[f64; 2]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let p = [rng.gen::<f64>() * 2.5, rng.gen::<f64>()];
        if in_dumbbell(p) {
            out.push(p);
        }
    }
    out
}

/// Matrix-free form of [`gen_complete_absorbing`], for sizes where the dense
/// `n^2` edge list is impractical. Vertex `n - 1` is absorbing.
#[derive(Debug, Clone, Copy)]
pub struct CompleteAbsorbingOperator {
    n: usize,
}

impl CompleteAbsorbingOperator {
    pub fn new(n: usize) -> Result<Self> {
        ensure_size(n, 2)?;
        Ok(Self { n })
    }
}

impl TransitionOperator for CompleteAbsorbingOperator {
    fn order(&self) -> usize {
        self.n
    }

    fn is_absorbing(&self, v: usize) -> bool {
        v == self.n - 1
    }

    fn has_absorbing(&self) -> bool {
        true
    }

    fn apply(&self, u: &[f64], out: &mut [f64]) {
        let w = 1.0 / self.n as f64;
        let mean: f64 = u.iter().map(|&x| w * x).sum();
        out.iter_mut().for_each(|o| *o = mean);
        out[self.n - 1] = 0.0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::check_reachability;

    #[test]
    fn path_weights() {
        let g = gen_path(3).unwrap();
        assert_eq!(g.weight(1, 0), 0.5);
        assert_eq!(g.weight(1, 2), 0.5);
        assert_eq!(g.weight(0, 1), 1.0);
        assert_eq!(gen_path(2), Err(Error::SizeTooSmall { got: 2, min: 3 }));
    }

    #[test]
    fn complete_absorbing_rows() {
        let g = gen_complete_absorbing(4).unwrap();
        for i in 0..3 {
            let (cols, ws) = g.row(i);
            assert_eq!(cols, &[0, 1, 2, 3]);
            assert!(ws.iter().all(|&w| w == 0.25));
        }
        assert!(g.row(3).0.is_empty());
        let g2 = gen_complete_absorbing(2).unwrap();
        assert_eq!((g2.weight(0, 0), g2.weight(0, 1)), (0.5, 0.5));
        assert!(gen_complete_absorbing(1).is_err());
    }

    #[test]
    fn cycle_plus_boundary_rows() {
        let g = gen_cycle_plus_boundary(4, 0.5).unwrap();
        for i in 0..4 {
            assert_eq!(g.weight(i, (i + 1) % 4), 0.25);
            assert_eq!(g.weight(i, (i + 3) % 4), 0.25);
            assert_eq!(g.weight(i, 4), 0.5);
        }
        assert_eq!(g.absorbing(), &[4]);
        assert_eq!(gen_cycle_plus_boundary(4, 1.0), Err(Error::BadEpsilon(1.0)));
        assert_eq!(gen_cycle_plus_boundary(4, 0.0), Err(Error::BadEpsilon(0.0)));
    }

    #[test]
    fn bridge_rows() {
        let g = gen_two_complete_bridge(2).unwrap();
        assert_eq!(g.n(), 5);
        let (cols, ws) = g.row(4);
        assert_eq!(cols, &[0, 1, 2, 3]);
        assert!(ws.iter().all(|&w| w == 0.25));
        assert_eq!(g.weight(0, 2), 0.0);
        assert!(check_reachability(&g));
        assert!(gen_two_complete_bridge(1).is_err());
    }

    #[test]
    fn small_world_degenerate() {
        let g = gen_small_world_ring(16, 1, 0.0, 3).unwrap();
        assert_eq!(g.absorbing().len(), 1);
        assert_eq!(g.nnz(), 2 * 15);
        assert!(check_reachability(&g));
        assert_eq!(
            gen_small_world_ring(16, 16, 4.0, 3),
            Err(Error::BadBoundaryCount { count: 16, n: 16 })
        );
        assert!(gen_small_world_ring(7, 1, 0.0, 3).is_err());
    }

    #[test]
    fn small_world_is_reproducible() {
        let a = gen_small_world_ring(128, 8, 64.0, 11).unwrap();
        let b = gen_small_world_ring(128, 8, 64.0, 11).unwrap();
        let c = gen_small_world_ring(128, 8, 64.0, 12).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn knn_collinear() {
        let g = gen_knn_point_cloud(&[[0.0, 0.0], [1.0, 0.0], [3.0, 0.0]], 1).unwrap();
        assert_eq!(g.row(1).0, &[0, 2]);
        assert_eq!(g.row(2).0, &[1]);
        assert!(gen_knn_point_cloud(&[[0.0, 0.0], [1.0, 0.0]], 0).is_err());
        assert_eq!(
            gen_knn_point_cloud(&[[0.0, 0.0], [1.0, 0.0]], 2),
            Err(Error::TooFewPoints { points: 2, k: 2 })
        );
        assert_eq!(
            gen_knn_point_cloud(&[[0.0, 0.0], [1.0, 0.0], [0.0, 0.0]], 1),
            Err(Error::DuplicatePoints(0, 2))
        );
    }

    #[test]
    fn knn_tie_break_by_id() {
        // 0 is equidistant from 1 and 2, neither of which picks 0 back
        let pts = [[0.0, 0.0], [1.0, 0.0], [-1.0, 0.0], [-1.5, 0.0], [1.5, 0.0]];
        let g = gen_knn_point_cloud(&pts, 1).unwrap();
        assert_eq!(g.row(0).0, &[1]);
        assert_eq!(g.row(2).0, &[3]);
    }

    #[test]
    fn dumbbell_samples_stay_inside() {
        let pts = sample_dumbbell(500, 9);
        assert!(pts.iter().all(|&p| in_dumbbell(p)));
        assert_eq!(pts, sample_dumbbell(500, 9));
    }

    #[test]
    fn implicit_complete_matches_csr() {
        let g = gen_complete_absorbing(7).unwrap();
        let op = CompleteAbsorbingOperator::new(7).unwrap();
        let u: Vec<f64> = (0..7).map(|i| (i as f64 * 0.7).sin()).collect();
        let (mut a, mut b) = (vec![0.0; 7], vec![0.0; 7]);
        g.apply(&u, &mut a);
        op.apply(&u, &mut b);
        for i in 0..7 {
            assert!((a[i] - b[i]).abs() < 1e-15);
        }
    }
}
