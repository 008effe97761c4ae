//! Covariant differentiation and curvature cost along cone paths.
//!
//! A path `z(t) = (x(t), r(t))` on the cone has covariant acceleration
//!
//! ```text
//! z̈ = ( ẍ + 2·(ṙ/r)·ẋ ,  r̈ − r·|ẋ|² )
//! ```
//!
//! whose squared cone norm `|r·ẍ + 2·ṙ·ẋ|² + (r̈ − r·|ẋ|²)²` is the
//! pointwise curvature density. Geodesics are exactly the curves with
//! vanishing covariant acceleration, so this module doubles as the
//! autoparallelism test bed: closed-form geodesics fed through the
//! finite-difference stencils must come back with residuals at the
//! truncation-error level.
//!
//! Derivatives are estimated by second-order finite differences: central
//! stencils in the interior, one-sided stencils of the same order at the
//! exact endpoints `t ∈ {0, 1}` so curvature is measurable on the whole
//! closed interval.

use alloc::vec::Vec;

use crate::cone::{cone_inner, ConeGeodesic, ConePoint, ConeTangent, GeometryError};
use crate::vecn;

/// Default finite-difference step. For second-order stencils in double
/// precision the truncation error O(h²) and the round-off error O(ulp/h²)
/// balance near h ≈ 10⁻⁴.
pub const DEFAULT_FD_STEP: f64 = 1e-4;

/// A twice-differentiable (piecewise C²) curve `[0, 1] → cone`.
///
/// Implementors guarantee evaluability at every `t ∈ [0, 1]`; evaluation may
/// still fail for geometric reasons (a De Casteljau cascade leaving its
/// domain, for example), which is why `at` returns a `Result`.
pub trait ConePath {
    /// Evaluates the curve at `t ∈ [0, 1]`.
    fn at(&self, t: f64) -> Result<ConePoint, GeometryError>;

    /// Ambient dimension of the positions.
    fn dim(&self) -> usize;
}

impl ConePath for ConeGeodesic {
    fn at(&self, t: f64) -> Result<ConePoint, GeometryError> {
        Ok(self.eval(t))
    }

    fn dim(&self) -> usize {
        self.start().dim()
    }
}

impl<P: ConePath + ?Sized> ConePath for &P {
    fn at(&self, t: f64) -> Result<ConePoint, GeometryError> {
        (**self).at(t)
    }

    fn dim(&self) -> usize {
        (**self).dim()
    }
}

/// First and second derivative estimates of a path at one time.
pub(crate) struct PathJet {
    pub(crate) base: ConePoint,
    pub(crate) x_dot: Vec<f64>,
    pub(crate) x_ddot: Vec<f64>,
    pub(crate) r_dot: f64,
    pub(crate) r_ddot: f64,
}

/// Differentiates `path` at `t` with step `h`: central second-order stencils
/// in the interior, one-sided second-order stencils at `t ∈ {0, 1}`.
pub(crate) fn differentiate<P: ConePath + ?Sized>(
    path: &P,
    t: f64,
    h: f64,
) -> Result<PathJet, GeometryError> {
    assert!(h > 0.0 && h.is_finite(), "finite-difference step must be positive, got {h}");
    assert!((0.0..=1.0).contains(&t), "evaluation time {t} outside [0, 1]");
    let dim = path.dim();

    // Sampled values and the stencil coefficients for f' (scaled by 1/2h)
    // and f'' (scaled by 1/h²).
    let (samples, d1_coeffs, d2_coeffs): (Vec<ConePoint>, [f64; 4], [f64; 4]) = if t == 0.0 {
        if 3.0 * h > 1.0 {
            return Err(GeometryError::StencilOutOfRange { t, h });
        }
        let s = [path.at(0.0)?, path.at(h)?, path.at(2.0 * h)?, path.at(3.0 * h)?];
        (s.into_iter().collect(), [-3.0, 4.0, -1.0, 0.0], [2.0, -5.0, 4.0, -1.0])
    } else if t == 1.0 {
        if 3.0 * h > 1.0 {
            return Err(GeometryError::StencilOutOfRange { t, h });
        }
        let s = [path.at(1.0)?, path.at(1.0 - h)?, path.at(1.0 - 2.0 * h)?, path.at(1.0 - 3.0 * h)?];
        // Mirrored stencil: odd derivatives flip sign.
        (s.into_iter().collect(), [3.0, -4.0, 1.0, 0.0], [2.0, -5.0, 4.0, -1.0])
    } else {
        if t - h < 0.0 || t + h > 1.0 {
            return Err(GeometryError::StencilOutOfRange { t, h });
        }
        let s = [path.at(t)?, path.at(t + h)?, path.at(t - h)?];
        // f' ≈ (f₊ − f₋)/2h, f'' ≈ (f₊ − 2f₀ + f₋)/h².
        (s.into_iter().collect(), [0.0, 1.0, -1.0, 0.0], [-2.0, 1.0, 1.0, 0.0])
    };

    let base = samples[0].clone();
    if base.r() <= 0.0 {
        return Err(GeometryError::VertexOnPath { t, r: base.r() });
    }

    let mut x_dot = vec_zeros(dim);
    let mut x_ddot = vec_zeros(dim);
    let mut r_dot = 0.0;
    let mut r_ddot = 0.0;
    for (k, z) in samples.iter().enumerate() {
        let (c1, c2) = (d1_coeffs[k], d2_coeffs[k]);
        vecn::axpy_in(&mut x_dot, c1, z.x());
        vecn::axpy_in(&mut x_ddot, c2, z.x());
        r_dot += c1 * z.r();
        r_ddot += c2 * z.r();
    }
    let inv_2h = 1.0 / (2.0 * h);
    let inv_h2 = 1.0 / (h * h);
    vecn::scale_in(&mut x_dot, inv_2h);
    vecn::scale_in(&mut x_ddot, inv_h2);
    r_dot *= inv_2h;
    r_ddot *= inv_h2;

    Ok(PathJet { base, x_dot, x_ddot, r_dot, r_ddot })
}

fn vec_zeros(dim: usize) -> Vec<f64> {
    alloc::vec![0.0; dim]
}

/// Covariant acceleration `z̈ = (ẍ + 2(ṙ/r)ẋ, r̈ − r|ẋ|²)` of a path at `t`,
/// with derivatives estimated by finite differences of step `h`.
///
/// The result is a tangent at `path.at(t)`; measure it with
/// [`ConeTangent::cone_norm`] at that base point.
///
/// # Errors
///
/// - [`GeometryError::StencilOutOfRange`] when the stencil leaves `[0, 1]`
///   (`t ± h` for interior `t`; `3h > 1` at the endpoints).
/// - [`GeometryError::VertexOnPath`] when `r(t) ≤ 0`.
/// - Any error from evaluating the path itself.
///
/// # Panics
///
/// Panics if `h ≤ 0` or `t ∉ [0, 1]`.
pub fn covariant_acceleration<P: ConePath + ?Sized>(
    path: &P,
    t: f64,
    h: f64,
) -> Result<ConeTangent, GeometryError> {
    let jet = differentiate(path, t, h)?;
    let r = jet.base.r();
    let speed2 = vecn::dot(&jet.x_dot, &jet.x_dot);
    let mut v = jet.x_ddot;
    vecn::axpy_in(&mut v, 2.0 * jet.r_dot / r, &jet.x_dot);
    let p = jet.r_ddot - r * speed2;
    // Built directly (not via `new`): near-vertex bases can push components
    // to overflow, which should surface as a non-finite norm downstream
    // rather than a panic here.
    Ok(ConeTangent { v, p })
}

/// Curvature cost `∫₀¹ ‖z̈(t)‖²_{z(t)} dt` of a path, by the composite
/// trapezoid rule on `n_steps` uniform intervals with finite-difference
/// step `h`.
///
/// Geodesics and constant paths score ≈ 0 (up to stencil truncation error);
/// the value is the single-trajectory contribution to the energy that cone
/// splines minimize.
///
/// # Errors
///
/// Propagates [`covariant_acceleration`] errors from any quadrature node.
///
/// # Panics
///
/// Panics if `n_steps < 2`.
pub fn path_curvature_cost<P: ConePath + ?Sized>(
    path: &P,
    n_steps: usize,
    h: f64,
) -> Result<f64, GeometryError> {
    assert!(n_steps >= 2, "quadrature needs at least 2 intervals, got {n_steps}");
    let dt = 1.0 / n_steps as f64;
    let mut total = 0.0;
    for k in 0..=n_steps {
        // k/n hits 0 and 1 exactly, so the endpoint stencils engage there.
        let t = if k == n_steps { 1.0 } else { k as f64 * dt };
        let acc = covariant_acceleration(path, t, h)?;
        let base = path.at(t)?;
        let density = cone_inner(&base, &acc, &acc)?;
        let w = if k == 0 || k == n_steps { 0.5 } else { 1.0 };
        total += w * density;
    }
    Ok(total * dt)
}
