//! Bounded-degree regular graphs whose second eigenvalue is a prescribed
//! value of growing multiplicity, built from random graph factors and
//! 2-lifts, together with the equiangular line systems such graphs induce.
//!
//! Module map:
//!
//! * [`graph`]: simple graphs, signings, 2-lifts, graph lifts of a
//!   block-degree matrix, and the edge-list text format.
//! * [`spectral`]: dense symmetric eigenanalysis, tolerance clustering and
//!   exact multiplicity certification over the integers.
//! * [`factors`]: short-cycle partitions, the half-factor distribution and
//!   the recursive `a`-factor distribution with its auxiliary matrix.
//! * [`lifts`]: Ramanujan signing search, iterated lifts and the
//!   multiplicity-incrementing lift.
//! * [`pipeline`]: admissible matrix triples, the two explicit families and
//!   the iterated construction.
//! * [`equiangular`]: Gram matrices, line extraction and verification.
//! * [`cli`]: batch commands and run manifests.

pub mod cli;
pub mod equiangular;
pub mod factors;
pub mod graph;
pub mod lifts;
pub mod pipeline;
pub mod report;
pub mod rng;
pub mod spectral;

pub use graph::{Graph, GraphError, Signing};
pub use spectral::{SpectralSummary, SpectralTarget};
