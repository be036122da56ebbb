//! Two complete blocks joined through one bridge vertex. The sign of the
//! first nontrivial eigenvector recovers the blocks; the bridge is its root.

use graph_diffusion::analysis::{sign_classifier, spectral_embedding};
use graph_diffusion::generators::gen_two_complete_bridge;

fn main() -> graph_diffusion::Result<()> {
    let n = 10;
    let g = gen_two_complete_bridge(n)?;
    let e = spectral_embedding(&g, 2, 1e-10)?;
    println!("eigenvalues: {:?}", e.eigenvalues);
    let labels = sign_classifier(&e.column(0));
    println!("block A labels: {:?}", &labels[..n]);
    println!("block B labels: {:?}", &labels[n..2 * n]);
    println!("bridge: u = {:.2e}", e.coords[2 * n][0]);
    Ok(())
}
