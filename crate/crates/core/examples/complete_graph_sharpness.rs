//! K_n with one absorbing vertex: the Dirichlet bound is attained in the limit.
//!
//! Run with `--release` for the n = 10000 point; that size uses the
//! matrix-free operator instead of a dense edge list.

use graph_diffusion::generators::GenSpec;
use graph_diffusion::theorems::sharpness_sweep;

fn main() -> graph_diffusion::Result<()> {
    let specs: Vec<GenSpec> = [10, 100, 1000, 10_000].into_iter().map(|n| GenSpec::CompleteAbsorbing { n }).collect();
    println!("{:>6} {:>12} {:>6} {:>10} {:>10}", "n", "lambda", "d", "d/n", "ratio");
    for row in sharpness_sweep(&specs)? {
        let n = row.vertices as f64;
        println!(
            "{:>6} {:>12.3e} {:>6} {:>10.6} {:>10.6}",
            row.vertices,
            row.lambda,
            row.max_d,
            row.max_d as f64 / n,
            row.ratio
        );
    }
    println!("log 2 = {:.6}", std::f64::consts::LN_2);
    Ok(())
}
