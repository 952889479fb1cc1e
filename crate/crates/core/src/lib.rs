//! Estimation of intrinsic volumes and Minkowski tensors from finite point
//! samples, in particular binary digital images `K ∩ aZ^d`.
//!
//! The pipeline has four layers:
//!
//! * [`symtensor`]: symmetric tensors over `R^d` stored by multi-index.
//! * [`cells`]: ball-restricted Voronoi cells `B(x,R) ∩ V_x(K_0)` and their
//!   monomial moments (exact in the plane, seeded Monte Carlo otherwise).
//! * [`measures`]: Voronoi tensor measures assembled from per-cell moments,
//!   shell measures for direction-restricted regions, and the
//!   boundary-filtered variant for lattice samples.
//! * [`estimators`]: inversion of the Steiner system that turns measures at
//!   several radii into Minkowski tensor estimates.
//!
//! [`shapes`] provides analytic reference sets, digitization, and ground
//! truth; [`cli`] is the command-line front end.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cells;
pub mod cli;
pub mod error;
pub mod estimators;
pub mod measures;
pub mod shapes;
pub mod symtensor;

pub use error::{Error, Result};

/// Version tag written into every report and table.
pub const SCHEMA_VERSION: u32 = 1;
