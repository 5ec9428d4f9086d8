//! Exact solvers for the six-vertex model in the free-fermion regime.
//!
//! The crate computes partition functions, joint vertex-type probabilities,
//! and infinite-volume vertex-type frequencies for the six-vertex model on
//! the discrete torus 𝕋_n and on ℤ², combining:
//!
//! * exact geometry of mid-edges with half-integer coordinates ([`lattice`]),
//! * brute-force enumeration oracles at desk scale ([`sixvertex`]),
//! * the bijection between six-vertex configurations and signed ensembles of
//!   mid-edge permutations ([`snake`]),
//! * twisted Kasteleyn determinants and their inverse kernels ([`kasteleyn`]),
//! * contour-integral correlation kernels in infinite volume ([`kernel`]).
//!
//! Every production path is cross-checked against an independent oracle in
//! [`verify`], which the `icekernel` CLI and the integration tests share.

pub mod error;
pub mod kasteleyn;
pub mod kernel;
pub mod lattice;
pub mod sixvertex;
pub mod snake;
pub mod verify;

mod linalg;
mod sum;

pub use error::{Error, Result};

/// Caps the worker threads used by the parallel internals. Takes effect
/// once per process and must run before the first parallel computation;
/// later calls fail.
pub fn set_worker_threads(threads: usize) -> Result<()> {
    if threads == 0 {
        return Err(Error::InvalidParameters("worker thread count must be at least 1".into()));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Error::InvalidParameters(format!("worker pool: {e}")))
}
