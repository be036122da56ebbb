//! Diffusion distance on the 10-vertex path with both endpoints as target.
//!
//! Prints the cumulative hitting probabilities for the first few steps and
//! the resulting median hitting times.

use graph_diffusion::analysis::mean_first_hit;
use graph_diffusion::diffusion::{diffusion_distance, hitting_profile};
use graph_diffusion::generators::gen_path;

fn main() -> graph_diffusion::Result<()> {
    let g = gen_path(10)?;
    let target = [0, 9];

    let profile = hitting_profile(&g, &target, 4)?;
    for (k, h) in profile.h.iter().enumerate() {
        let row: Vec<String> = h.iter().map(|x| format!("{x:.4}")).collect();
        println!("h_{k}: {}", row.join(" "));
    }

    let field = diffusion_distance(&g, &target, 0.5, 1000)?;
    let mean = mean_first_hit(&g, &target, 10_000)?;
    println!("\nvertex  d  mean");
    for i in 0..g.n() {
        println!("{i:>6} {:>2}  {:.1}", field.d[i], mean.mean[i]);
    }
    Ok(())
}
