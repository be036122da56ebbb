//! Ring of 128 vertices with random chords and 8 absorbing vertices.
//!
//! Compares the first Dirichlet eigenvector with the distance to the
//! boundary. Pass a seed as the first argument.

use graph_diffusion::analysis::correlation;
use graph_diffusion::diffusion::default_kmax;
use graph_diffusion::generators::gen_small_world;
use graph_diffusion::spectral::{absorbing_dominant_eigenpair_checked, DEFAULT_MAX_ITERS, DEFAULT_TOL};
use graph_diffusion::theorems::check_theorem2;

fn main() -> graph_diffusion::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1);
    let sw = gen_small_world(128, 8, 64.0, seed)?;
    let g = &sw.graph;
    println!("seed {seed}: {} chords, boundary {:?}", sw.chords.len(), g.absorbing());

    let pair = absorbing_dominant_eigenpair_checked(g, DEFAULT_TOL, DEFAULT_MAX_ITERS)?;
    let rep = check_theorem2(g, &pair, default_kmax(g.n()))?;
    let d: Vec<f64> = rep.rows.iter().map(|r| r.d as f64).collect();
    let abs_u: Vec<f64> = pair.u.iter().map(|x| x.abs()).collect();

    let top = (0..g.n()).max_by(|&a, &b| abs_u[a].total_cmp(&abs_u[b]).then(b.cmp(&a))).unwrap();
    println!("lambda_1 = {:.6}", pair.lambda);
    println!("max d = {}", d.iter().cloned().fold(0.0, f64::max));
    println!("at the eigenvector maximum: d = {}, bound = {:.2}", rep.rows[top].d, rep.rows[top].rhs / rep.inputs.rate);
    println!("r(|u|, d) = {:.4}", correlation(&abs_u, &d, None)?);
    println!("violations: {}, min slack {:.4}", rep.summary.violations, rep.summary.min_slack);
    Ok(())
}
