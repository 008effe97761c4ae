//! Numerics for interpolating sequences of nonnegative measures whose total
//! masses differ, using unbalanced optimal transport and cubic splines on the
//! position-mass cone.
//!
//! The crate is organized bottom-up:
//!
//! - [`cone`] — exact primitives on the cone over ℝ^d: the cone distance, the
//!   Riemannian inner product, and closed-form constant-speed geodesics.
//! - [`curvature`] — numerical differential geometry of cone paths: covariant
//!   acceleration by finite differences and quadrature of the curvature cost.
//! - [`measure`] — weighted point clouds for nonnegative measures, grid-based
//!   density discretizations, and lifts to/projections from the cone.
//! - [`solver`] — the entropic scaling solver for the softly-constrained
//!   unbalanced transport problem, with distances, barycentric maps, and
//!   density ratios.
//! - [`spline`] — Euclidean natural cubic splines, used to estimate knot
//!   velocities for positions and masses.
//! - [`bezier`] — cubic De Casteljau curves on the cone: control points from
//!   prescribed endpoint velocities, evaluation by nested geodesic
//!   interpolation, and closed-form endpoint derivatives.
//! - [`pipeline`] — the end-to-end transport spline: consecutive entropic
//!   solves, particle tracking, velocity estimation, feasibility rescaling,
//!   and sampling of the interpolating curve of measures.
//! - [`verify`] — a numerical certification harness for the geometric
//!   identities the construction relies on (flow-map ODEs, the pointwise
//!   covariant-acceleration identity, and equality of the Eulerian and
//!   path-wise curvature energies).
//!
//! # no_std
//!
//! The crate is `no_std`-compatible (an allocator is required). Disable the
//! default `std` feature and enable `libm` to supply the float transcendentals:
//!
//! ```toml
//! wfr-spline-core = { version = "0.1", default-features = false, features = ["libm"] }
//! ```
//!
//! All computation is on `f64`. Every public operation is a pure function of
//! immutable values and safe to call concurrently.

#![cfg_attr(not(feature = "std"), no_std)]
#![deny(unsafe_code)]
#![warn(missing_docs)]

extern crate alloc;

#[cfg(all(not(feature = "std"), not(feature = "libm")))]
compile_error!("wfr-spline-core requires either the `std` or the `libm` feature");

pub mod bezier;
pub mod cone;
pub mod curvature;
pub mod measure;
pub mod pipeline;
pub mod solver;
pub mod spline;
pub mod verify;

pub(crate) mod math;
pub(crate) mod vecn;

pub use cone::{ConePoint, ConeTangent};
pub use measure::DiscreteMeasure;
