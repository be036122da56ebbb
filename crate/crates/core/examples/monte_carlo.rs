//! Random-walk estimates next to the exact recursions.
//!
//! Distances from simulated first-hit times, and the identity
//! `E[u(x_t)] = (1 - lambda)^t u(x_0)` for an eigenvector `u`.

use graph_diffusion::diffusion::{diffusion_distance, mc_diffusion_distance};
use graph_diffusion::generators::gen_cycle_plus_boundary;
use graph_diffusion::spectral::{absorbing_dominant_eigenpair, DEFAULT_MAX_ITERS, DEFAULT_TOL};
use graph_diffusion::walk::walk_mean;

fn main() -> graph_diffusion::Result<()> {
    let g = gen_cycle_plus_boundary(16, 0.05)?;
    let exact = diffusion_distance(&g, &[16], 0.5, 10_000)?;
    let mc = mc_diffusion_distance(&g, &[16], 0.5, 20_000, 10_000, 42)?;
    println!("exact d = {}, simulated d = {} (95% CI at d: {:.4}..{:.4})", exact.d[0], mc.field.d[0], mc.ci[0].0, mc.ci[0].1);

    let pair = absorbing_dominant_eigenpair(&g, DEFAULT_TOL, DEFAULT_MAX_ITERS)?;
    for t in [1, 5, 10] {
        let est = walk_mean(&g, &pair.u, 0, t, 100_000, 42)?;
        let want = (1.0 - pair.lambda).powi(t as i32) * pair.u[0];
        println!("t={t:<2} simulated {:.5} +- {:.5}, exact {want:.5}", est.mean, est.std_error);
    }
    Ok(())
}
