//! Cycle with a leak of weight `eps` into one absorbing vertex.
//!
//! The first Dirichlet eigenvector is constant on the cycle with
//! `lambda = eps`, so `d * log(1/(1-eps)) / log 2` measures how tight the
//! bound is. The distance is a ceiling, which makes the ratio oscillate
//! rather than fall monotonically.

use graph_diffusion::generators::GenSpec;
use graph_diffusion::theorems::sharpness_sweep;

fn main() -> graph_diffusion::Result<()> {
    let specs: Vec<GenSpec> =
        [0.5, 0.2, 0.05, 0.01, 0.002].into_iter().map(|eps| GenSpec::CyclePlusBoundary { n: 128, eps }).collect();
    for row in sharpness_sweep(&specs)? {
        if let GenSpec::CyclePlusBoundary { eps, .. } = row.spec {
            println!("eps={eps:<6} lambda={:.6} d={:<4} ratio={:.6}", row.lambda, row.max_d, row.ratio);
        }
    }
    Ok(())
}
