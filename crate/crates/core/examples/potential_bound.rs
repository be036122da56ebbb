//! Ground state of a discrete Schrodinger operator and its distance bound.
//!
//! Starting from a potential that is 0.02 at one vertex and 0.01 elsewhere,
//! the Perron vector of `P + W` solves `Lu = W'u` for `W' = W + sigma`; the
//! bound then uses `|W'|_inf`.

use graph_diffusion::generators::gen_complete_absorbing;
use graph_diffusion::spectral::{schrodinger_ground_state, DEFAULT_MAX_ITERS, DEFAULT_TOL};
use graph_diffusion::theorems::check_corollary1;

fn main() -> graph_diffusion::Result<()> {
    let g = gen_complete_absorbing(100)?;
    let mut w = vec![0.01; 100];
    w[0] = 0.02;
    w[99] = 0.0;
    let (u, potential) = schrodinger_ground_state(&g, &w, DEFAULT_TOL, DEFAULT_MAX_ITERS)?;
    let rep = check_corollary1(&g, &potential, &u, 10_000)?;
    println!("|W|_inf = {:.6}", rep.inputs.spectral_value);
    println!("u(0) = {:.6}, u(1) = {:.6}", u[0], u[1]);
    println!("d = {}, min slack = {:.3e}, all hold: {}", rep.rows[1].d, rep.summary.min_slack, rep.all_hold());
    Ok(())
}
