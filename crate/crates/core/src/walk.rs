//! Seeded random walks.
//!
//! Every walker owns a ChaCha stream keyed by the run seed and addressed by
//! `(start vertex, walker index)`, so results never depend on how walkers are
//! scheduled across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Inverse-CDF sampler over the rows of a graph.
pub struct WalkSampler<'a> {
    graph: &'a Graph,
    cumulative: Vec<f64>,
}

impl<'a> WalkSampler<'a> {
    pub fn new(graph: &'a Graph) -> Self {
        let mut cumulative = Vec::with_capacity(graph.nnz());
        for i in 0..graph.n() {
            let mut acc = 0.0;
            for &w in graph.row(i).1 {
                acc += w;
                cumulative.push(acc);
            }
        }
        Self { graph, cumulative }
    }

    pub fn graph(&self) -> &Graph {
        self.graph
    }

    /// Next vertex from `i`, or `None` at a sink.
    pub fn step<R: Rng>(&self, i: usize, rng: &mut R) -> Option<usize> {
        let offsets = self.graph.row_offsets();
        let (a, b) = (offsets[i], offsets[i + 1]);
        if a == b {
            return None;
        }
        let cum = &self.cumulative[a..b];
        let x = rng.gen::<f64>() * cum[cum.len() - 1];
        let k = cum.partition_point(|&c| c <= x).min(cum.len() - 1);
        Some(self.graph.col_indices()[a + k])
    }
}

/// Independent stream for walker `walker` started at `start`.
pub fn walker_rng(seed: u64, start: usize, walker: usize) -> ChaCha8Rng {
    debug_assert!(start <= u32::MAX as usize && walker <= u32::MAX as usize);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((start as u64) << 32) | walker as u64);
    rng
}

/// Sample mean of `u(x_steps)` over walks from `start`, and its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanEstimate {
    pub mean: f64,
    pub std_error: f64,
}

/// Monte Carlo estimate of `E[u(x_steps) | x_0 = start]`. Walkers stuck at a
/// sink keep reporting the sink's value.
pub fn walk_mean(g: &Graph, u: &[f64], start: usize, steps: usize, walkers: usize, seed: u64) -> Result<MeanEstimate> {
    g.check_vector(u)?;
    if start >= g.n() {
        return Err(Error::IndexOutOfRange { id: start, n: g.n() });
    }
    if walkers < 2 {
        return Err(Error::InvalidParameter("need at least two walkers".into()));
    }
    let sampler = WalkSampler::new(g);
    let values: Vec<f64> = (0..walkers)
        .into_par_iter()
        .map(|w| {
            let mut rng = walker_rng(seed, start, w);
            let mut x = start;
            for _ in 0..steps {
                match sampler.step(x, &mut rng) {
                    Some(y) => x = y,
                    None => break,
                }
            }
            u[x]
        })
        .collect();
    let n = walkers as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok(MeanEstimate { mean, std_error: (var / n).sqrt() })
}
