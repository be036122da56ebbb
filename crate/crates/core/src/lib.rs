//! Diffusion geometry of averaging graph Laplacians.
//!
//! The crate works with random walks on directed weighted graphs: the
//! operator `(Lu)(i) = -sum_j p_ij (u(j) - u(i))`, its eigenpairs, the
//! median hitting-time distance `d_B` to a vertex set, and vertex-by-vertex
//! checks of the lower bounds that tie `|u|` to `d_B`.
//!
//! | module | contents |
//! |--------|----------|
//! | [`graph`] | CSR graph, validation, reachability, Gershgorin data |
//! | [`generators`] | path, cycle, absorbing complete graph, small-world ring, k-NN dumbbell, ... |
//! | [`spectral`] | `L` application, stationary vector, deflated power iteration |
//! | [`diffusion`] | exact hitting profiles, `d_B^(p)`, Monte Carlo estimates |
//! | [`walk`] | seeded per-walker random walks |
//! | [`theorems`] | per-vertex bound reports and sharpness sweeps |
//! | [`analysis`] | embeddings, sign classifier, correlations, experiment presets |
//! | [`io`] | edge-list TSV, vertex sets, point clouds, CSV writers |

pub mod analysis;
pub mod diffusion;
pub mod error;
pub mod generators;
pub mod graph;
pub mod io;
pub mod spectral;
pub mod theorems;
pub mod walk;

pub use error::{Error, Result};
pub use graph::{build_graph, check_reachability, laplacian_row_sums, Graph, TransitionOperator, Vector};
pub use spectral::EigenPair;
