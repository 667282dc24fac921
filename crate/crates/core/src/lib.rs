//! Continuous-time quantum walk search on the weighted simplex of complete graphs.
//!
//! The graph consists of `M + 1` clusters, each a complete graph on `M`
//! vertices with unit-weight edges. Vertex `(i, j)` (cluster `i`, port `j`)
//! is joined to vertex `(j, i)` by an edge of weight `w`. Searching for a
//! single marked vertex with the Hamiltonian `H = -γA - |a⟩⟨a|` evolves in a
//! seven-dimensional invariant subspace, so the two-stage search can be
//! simulated exactly at any `M`.
//!
//! | Module | Contents |
//! |--------|----------|
//! | [`graph`] | graph construction, vertex classes, edge census, Laplacian |
//! | [`subspace`] | 7D basis, reduced Hamiltonian, project / lift maps |
//! | [`spectral`] | symmetric eigensolver, overlaps, γ sweeps, crossings |
//! | [`dynamics`] | exact time evolution, schedules, peaks, width scans |
//! | [`theory`] | closed-form predictions used as independent oracles |
//! | [`cli`] | command-line front end and CSV/JSON writers |

pub mod cli;
pub mod dynamics;
pub mod error;
pub mod graph;
pub mod spectral;
pub mod subspace;
pub mod theory;

pub use error::{Error, Result};
pub use graph::{GraphSpec, VertexClass, VertexId, WeightedMatrix};
pub use subspace::StateVector;
