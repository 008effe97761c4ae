//! Exact primitives on the position-mass cone over ℝ^d.
//!
//! A cone point is a pair `(x, r)` of a position `x ∈ ℝ^d` and a nonnegative
//! mass coordinate `r`; the whole slice `r = 0` is collapsed to a single
//! vertex. The squared distance between two cone points is
//!
//! ```text
//! d((x₀,r₀),(x₁,r₁))² = r₀² + r₁² − 2·r₀·r₁·cos(|x₀−x₁| ∧ π)
//! ```
//!
//! which is the planar law of cosines after developing the cone onto ℝ²:
//! `(x,r)` maps to the polar point with radius `r` and angle `|x − x_ref|`.
//! That development also gives the closed-form constant-speed geodesics
//! implemented here — a geodesic on the cone is a straight segment in the
//! developed plane, re-read in polar coordinates.
//!
//! Geodesic evaluation is restricted to endpoint separations below π/2; the
//! distance itself uses the full `∧ π` formula. See [`geodesic_eval`].

use alloc::vec;
use alloc::vec::Vec;

use core::f64::consts::{FRAC_PI_2, PI};

use crate::math;
use crate::vecn;

/// Position separations below this use series limits for the geodesic's
/// angular fraction and for sinc-type factors; above it the direct closed
/// forms are numerically safe. The switch point balances the O(θ²) series
/// truncation against cancellation in the trigonometric expressions.
pub(crate) const SMALL_ANGLE: f64 = 1e-6;

/// Errors from cone-geometry operations.
///
/// The distance is a total function and never fails; everything involving the
/// Riemannian structure (inner products, geodesics, differentiation along
/// paths) degenerates at the vertex or at large separations and reports it.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GeometryError {
    /// The Riemannian metric degenerates at the vertex (r = 0).
    #[error("inner product is undefined at the cone vertex (r = 0)")]
    VertexBase,
    /// Geodesic endpoints separated by θ ≥ π/2, outside the spline domain.
    #[error("geodesic endpoints are separated by {theta} ≥ π/2")]
    GeodesicSeparation {
        /// Euclidean distance between the endpoint positions.
        theta: f64,
    },
    /// A geodesic from/to the vertex with distinct positions has no
    /// well-defined angular interpolation.
    #[error("geodesic endpoint at the vertex with positive separation {theta}")]
    GeodesicVertexEndpoint {
        /// Euclidean distance between the endpoint positions.
        theta: f64,
    },
    /// An intermediate interpolation pair of a De Casteljau cascade left the
    /// π/2 ball; reported with the cascade level (1–3) that failed.
    #[error("De Casteljau cascade level {level} hit separation {theta} ≥ π/2")]
    CascadeSeparation {
        /// Cascade level (1 = control polygon, 3 = final point).
        level: usize,
        /// Offending separation.
        theta: f64,
    },
    /// A finite-difference stencil at `t` with step `h` leaves `[0, 1]`.
    #[error("finite-difference stencil at t = {t} with step {h} leaves [0, 1]")]
    StencilOutOfRange {
        /// Requested evaluation time.
        t: f64,
        /// Step size.
        h: f64,
    },
    /// A path reached the vertex (r ≤ 0) where differentiation was requested.
    #[error("path mass coordinate {r} is not positive at t = {t}")]
    VertexOnPath {
        /// Evaluation time.
        t: f64,
        /// Offending mass coordinate.
        r: f64,
    },
}

/// A point `(x, r)` on the cone: position `x ∈ ℝ^d` and mass coordinate
/// `r ≥ 0`.
///
/// All points with `r = 0` are the same vertex; construction canonicalizes
/// their position to the zero vector so equality and ordering treat every
/// vertex representative identically.
#[derive(Debug, Clone, PartialEq)]
pub struct ConePoint {
    x: Vec<f64>,
    r: f64,
}

impl ConePoint {
    /// Creates a cone point from a position and a nonnegative mass
    /// coordinate.
    ///
    /// # Panics
    ///
    /// Panics if `r` is negative or any component is non-finite; both are
    /// contract violations rather than recoverable states.
    pub fn new(x: Vec<f64>, r: f64) -> Self {
        assert!(r.is_finite() && r >= 0.0, "mass coordinate must be finite and ≥ 0, got {r}");
        assert!(x.iter().all(|c| c.is_finite()), "position components must be finite");
        if r == 0.0 {
            Self::vertex(x.len())
        } else {
            Self { x, r }
        }
    }

    /// The cone vertex in ambient dimension `dim` (canonical position 0).
    pub fn vertex(dim: usize) -> Self {
        Self { x: vec![0.0; dim], r: 0.0 }
    }

    /// Position vector.
    pub fn x(&self) -> &[f64] {
        &self.x
    }

    /// Mass coordinate (≥ 0; 0 exactly at the vertex).
    pub fn r(&self) -> f64 {
        self.r
    }

    /// Ambient dimension of the position.
    pub fn dim(&self) -> usize {
        self.x.len()
    }

    /// Whether this point is the vertex.
    pub fn is_vertex(&self) -> bool {
        self.r == 0.0
    }
}

/// A tangent vector `(v, p)` at a cone point: spatial velocity `v ∈ ℝ^d` and
/// mass rate `p`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConeTangent {
    /// Spatial velocity.
    pub v: Vec<f64>,
    /// Mass-coordinate rate.
    pub p: f64,
}

impl ConeTangent {
    /// Creates a tangent from finite components.
    ///
    /// # Panics
    ///
    /// Panics on non-finite components.
    pub fn new(v: Vec<f64>, p: f64) -> Self {
        assert!(p.is_finite() && v.iter().all(|c| c.is_finite()), "tangent components must be finite");
        Self { v, p }
    }

    /// Zero tangent in dimension `dim`.
    pub fn zero(dim: usize) -> Self {
        Self { v: vec![0.0; dim], p: 0.0 }
    }

    /// Norm of this tangent in the cone metric at `base`:
    /// `√(r²·|v|² + p²)`.
    ///
    /// # Errors
    ///
    /// [`GeometryError::VertexBase`] when `base` is the vertex.
    pub fn cone_norm(&self, base: &ConePoint) -> Result<f64, GeometryError> {
        cone_inner(base, self, self).map(math::sqrt)
    }
}

/// Distance between two cone points:
/// `√(r₀² + r₁² − 2·r₀·r₁·cos(|x₀−x₁| ∧ π))`.
///
/// Total and symmetric; zero exactly when the points coincide under the
/// vertex identification. Beyond separation π the distance saturates at
/// `r₀ + r₁`, the cost of shrinking to the vertex and growing back.
///
/// # Panics
///
/// Panics if the points have different ambient dimensions.
pub fn cone_distance(a: &ConePoint, b: &ConePoint) -> f64 {
    assert_eq!(a.dim(), b.dim(), "cone points must share an ambient dimension");
    let theta = vecn::dist(&a.x, &b.x).min(PI);
    let d2 = a.r * a.r + b.r * b.r - 2.0 * a.r * b.r * math::cos(theta);
    // Rounding can push the radicand a hair below zero when the points
    // nearly coincide.
    math::sqrt(d2.max(0.0))
}

/// Riemannian inner product of two tangents at `base`:
/// `⟨u.v, w.v⟩·r² + u.p·w.p`.
///
/// # Errors
///
/// [`GeometryError::VertexBase`] when `base` is the vertex, where the metric
/// degenerates.
pub fn cone_inner(base: &ConePoint, u: &ConeTangent, w: &ConeTangent) -> Result<f64, GeometryError> {
    if base.is_vertex() {
        return Err(GeometryError::VertexBase);
    }
    debug_assert_eq!(u.v.len(), base.dim());
    debug_assert_eq!(w.v.len(), base.dim());
    Ok(vecn::dot(&u.v, &w.v) * base.r * base.r + u.p * w.p)
}

/// A precomputed constant-speed geodesic between two admissible cone points.
///
/// Evaluation develops the cone onto the plane: the geodesic is the straight
/// segment between the developed endpoints, read back in polar coordinates.
/// For endpoints `(x₀,r₀)`, `(x₁,r₁)` at position separation `θ`:
///
/// ```text
/// r(t)² = (1−t)²·r₀² + t²·r₁² + 2t(1−t)·r₀·r₁·cos θ
/// x(t)  = (1−ρ(t))·x₀ + ρ(t)·x₁,   ρ(t) = angle(L(t)) / θ
/// ```
///
/// where `L(t)` linearly interpolates the developed endpoints. `ρ` is the
/// *local time*: the fraction of the angular arc traversed, which runs ahead
/// of or behind `t` depending on the mass ratio.
#[derive(Debug, Clone)]
pub struct ConeGeodesic {
    z0: ConePoint,
    z1: ConePoint,
    theta: f64,
    cos_theta: f64,
    sin_theta: f64,
}

impl ConeGeodesic {
    /// Builds the geodesic, validating the spline-domain restrictions.
    ///
    /// # Errors
    ///
    /// - [`GeometryError::GeodesicSeparation`] when `|x₀−x₁| ≥ π/2`. The
    ///   construction stays restricted to the π/2 ball; pairs in `[π/2, π)`
    ///   are rejected rather than accepted with a warning.
    /// - [`GeometryError::GeodesicVertexEndpoint`] when an endpoint sits at
    ///   the vertex while the positions differ (the angular fraction is then
    ///   undefined).
    ///
    /// # Panics
    ///
    /// Panics if the endpoints have different ambient dimensions.
    pub fn new(z0: ConePoint, z1: ConePoint) -> Result<Self, GeometryError> {
        assert_eq!(z0.dim(), z1.dim(), "geodesic endpoints must share an ambient dimension");
        let theta = vecn::dist(&z0.x, &z1.x);
        if theta >= FRAC_PI_2 {
            return Err(GeometryError::GeodesicSeparation { theta });
        }
        if theta > 0.0 && (z0.is_vertex() || z1.is_vertex()) {
            return Err(GeometryError::GeodesicVertexEndpoint { theta });
        }
        Ok(Self { cos_theta: math::cos(theta), sin_theta: math::sin(theta), z0, z1, theta })
    }

    /// Start point.
    pub fn start(&self) -> &ConePoint {
        &self.z0
    }

    /// End point.
    pub fn end(&self) -> &ConePoint {
        &self.z1
    }

    /// Position separation `|x₀ − x₁|`.
    pub fn separation(&self) -> f64 {
        self.theta
    }

    /// Length of the geodesic (equals the cone distance of its endpoints).
    pub fn length(&self) -> f64 {
        cone_distance(&self.z0, &self.z1)
    }

    /// Evaluates the geodesic at `t ∈ [0, 1]`; endpoints are reproduced
    /// exactly.
    ///
    /// # Panics
    ///
    /// Panics if `t` is outside `[0, 1]`.
    pub fn eval(&self, t: f64) -> ConePoint {
        assert!((0.0..=1.0).contains(&t), "geodesic parameter {t} outside [0, 1]");
        if t == 0.0 {
            return self.z0.clone();
        }
        if t == 1.0 {
            return self.z1.clone();
        }
        let (r0, r1) = (self.z0.r, self.z1.r);
        if self.theta == 0.0 {
            // Degenerate pair: the closed form reduces to linear mass
            // interpolation at a fixed position (continuous limit θ → 0).
            return ConePoint::new(self.z0.x.clone(), (1.0 - t) * r0 + t * r1);
        }
        // Developed-plane interpolation: L(t) = (1−t)·(r₀, 0) + t·(r₁cosθ, r₁sinθ).
        let lx = (1.0 - t) * r0 + t * r1 * self.cos_theta;
        let ly = t * r1 * self.sin_theta;
        let r = math::hypot(lx, ly);
        let rho = if self.theta < SMALL_ANGLE {
            // Series limit of atan2(ly, lx)/θ; the O(θ²) correction is below
            // double rounding here.
            t * r1 / ((1.0 - t) * r0 + t * r1)
        } else {
            math::atan2(ly, lx) / self.theta
        };
        ConePoint::new(vecn::lerp(&self.z0.x, &self.z1.x, rho), r)
    }
}

/// Evaluates the constant-speed geodesic between `z0` and `z1` at `t`.
///
/// Convenience wrapper over [`ConeGeodesic::new`] + [`ConeGeodesic::eval`];
/// see there for the closed form, the domain restriction to separations
/// below π/2, and the error cases. The resulting curve satisfies
/// `cone_distance(z(s), z(t)) = |t−s|·cone_distance(z0, z1)`.
///
/// # Errors
///
/// As for [`ConeGeodesic::new`].
pub fn geodesic_eval(z0: &ConePoint, z1: &ConePoint, t: f64) -> Result<ConePoint, GeometryError> {
    Ok(ConeGeodesic::new(z0.clone(), z1.clone())?.eval(t))
}
