//! Band structures, effective-mass tensors, and spectral bounds for
//! Laplacians on Z^d-periodic discrete graphs, with the exact conjugation
//! onto equilateral metric-graph spectra.
//!
//! The pipeline: describe a periodic graph by its fundamental graph and
//! integer edge indices ([`graph`]), assemble the Hermitian fiber matrices
//! of the normalized or combinatorial Laplacian over the quasimomentum
//! torus ([`floquet`]), sample and refine band structures ([`spectrum`]),
//! compute band-edge effective forms and mass tensors together with all
//! their geometric two-sided bounds ([`effmass`]), and map everything to
//! the equilateral metric graph ([`metric`]).
//!
//! All computations are pure functions of immutable inputs; grid and
//! direction sweeps parallelize internally and assemble deterministically.

pub mod directions;
pub mod effmass;
pub mod error;
pub mod fixtures;
pub mod floquet;
pub mod graph;
pub mod linalg;
pub mod metric;
mod optimize;
pub mod report;
pub mod spectrum;

pub use error::{ComputeError, GraphError};
pub use floquet::{Flavor, Quasimomentum};
pub use graph::{parse_graph, FundamentalGraph};
