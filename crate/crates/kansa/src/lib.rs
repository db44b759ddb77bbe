//! Unsymmetric radial-basis-function collocation for the planar
//! Poisson-Dirichlet problem, plus an experiment harness that probes when
//! and why the collocation matrix stays nonsingular.
//!
//! The solver side is classic unsymmetric (Kansa) collocation: one global
//! expansion in MultiQuadric or Inverse MultiQuadric kernels, PDE conditions
//! enforced at random interior points, boundary conditions at fixed boundary
//! points. The harness side treats invertibility itself as the object under
//! study: Monte Carlo campaigns over point configurations, step-by-step
//! induction chains, determinant expansions in a single matrix coupling, and
//! complex-line probes of the kernel's branch points.
//!
//! Module map:
//! - [`geometry`]: domains (boxes, balls), interior membership, boundary
//!   point generation;
//! - [`kernels`]: MQ/IMQ values, planar Laplacians, complex continuation;
//! - [`sampler`]: seeded acceptance-rejection sampling of interior points;
//! - [`system`]: block-matrix assembly, augmentation, dense solve,
//!   diagnostics;
//! - [`experiments`]: the verification campaigns and their report types.

pub mod error;
pub mod experiments;
pub mod geometry;
pub mod kernels;
pub mod sampler;
pub mod system;

pub use error::{Error, Result};
pub use geometry::{boundary_points, BoundarySet, BoundaryStrategy, Domain, Point};
pub use kernels::{complex_squared_distance, KernelKind, KernelSpec};
pub use sampler::{acceptance_rate, sample_interior, Density, SeedSpec};
pub use system::{assemble, assemble_rhs, evaluate_solution, KansaSystem, SolveReport};

// The matrix types in public signatures come from here; re-exported so
// callers can name them without pinning their own copy.
pub use nalgebra;
