//! First-order conic optimization through the radial transformation.
//!
//! Given a conic program `min c·x  s.t.  Ax = b, x ∈ K` with a known strictly
//! feasible point `e`, the problem is equivalent to maximizing the concave,
//! Lipschitz-continuous boundary map `x ↦ λ_min(x)` over a single affine
//! slice, after which radial projection from `e` recovers feasible points.
//! Two projected supgradient methods solve the transformed problem:
//!
//! * **Algorithm 1** (known optimal value): Polyak-type steps
//!   `x ← x − (λ_min(x)/‖g‖²) g` on the slice `c·x = z*`.
//! * **Algorithm 2** (general): fixed ε-steps `x ← x + (ε/2‖g‖²) g` with a
//!   restart to the cone boundary whenever the projected objective gap grows
//!   by the factor 4/3.
//!
//! The crate also ships the machinery around the methods: cone oracles for
//! orthant/PSD/second-order/halfspace blocks and their products, the
//! preprocessed nullspace projector, a self-dual primal-dual embedding that
//! manufactures instances with optimal value zero, an epigraph lifting for
//! max-of-affine objectives over simple sets, brute-force ground-truth
//! oracles at desk scale, and a JSON problem-file front end.

pub mod cones;
pub mod epigraph;
pub mod io;
pub mod linalg;
pub mod oracles;
pub mod projection;
pub mod solvers;
pub mod transform;

pub use cones::{ConeError, ConeSpec, DistinguishedDirection, PrimitiveCone};
pub use solvers::{run, Algorithm, RunConfig, RunReport, Termination};
pub use transform::{validate_instance, ConicInstance};
