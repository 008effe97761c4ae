//! Cubic Bézier curves on the mass–position cone via De Casteljau's
//! cascade of geodesic interpolations.
//!
//! A segment carries four cone points — two knots and two control points —
//! and evaluates by three levels of geodesic interpolation: the pairs of
//! consecutive control points are interpolated at `t`, then the pairs of
//! those intermediates, then the final pair. Because every level uses exact
//! cone geodesics, the curve interpolates its knots exactly and stays on the
//! cone by construction.
//!
//! Control points are not free parameters here: [`control_points`] solves
//! for them from prescribed knot velocities (a spatial velocity vector and a
//! scalar mass rate per knot) so that the segment leaves each knot with
//! exactly the requested derivative. The solve is only possible when the
//! mass rates respect strict bounds tied to the segment duration; violating
//! data is rejected with an error naming the failed bound, and
//! [`feasible_rescale`] offers the standard remedy — shrink the spatial
//! diameter and damp the velocities until every bound holds.

use alloc::vec::Vec;

use crate::cone::{geodesic_eval, ConePoint, GeometryError, SMALL_ANGLE};
use crate::curvature::ConePath;
use crate::math;
use crate::vecn;

/// Half π: the separation ceiling for every geodesic the cascade builds.
const HALF_PI: f64 = core::f64::consts::FRAC_PI_2;

/// Errors from control-point construction and feasibility checks.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BezierError {
    /// The start mass rate is at or below the feasibility floor
    /// `−3·r_start/δ`; the control-point solve would need a non-positive
    /// arctangent denominator.
    #[error("start mass rate {rate} is at or below the feasible floor {bound}")]
    InfeasibleStartRate {
        /// Prescribed mass rate at the start knot.
        rate: f64,
        /// Exclusive lower bound `−3·r_start/δ`.
        bound: f64,
    },
    /// The end mass rate is at or above the feasibility ceiling
    /// `3·r_end/δ`.
    #[error("end mass rate {rate} is at or above the feasible ceiling {bound}")]
    InfeasibleEndRate {
        /// Prescribed mass rate at the end knot.
        rate: f64,
        /// Exclusive upper bound `3·r_end/δ`.
        bound: f64,
    },
    /// Two consecutive points of the control polygon are separated by π/2
    /// or more, so the first-level geodesics do not exist.
    #[error("control polygon pair ({pair}, {next}) separated by {theta} ≥ π/2", next = pair + 1)]
    ControlSeparation {
        /// Index of the first point of the offending pair (0–2).
        pair: usize,
        /// Euclidean distance between the two positions.
        theta: f64,
    },
    /// Segment durations must be positive.
    #[error("segment duration {delta} is not positive")]
    NonPositiveDuration {
        /// Offending duration.
        delta: f64,
    },
}

/// A prescribed knot derivative: spatial velocity `v` and mass rate `s`,
/// both per unit of *physical* time.
#[derive(Debug, Clone, PartialEq)]
pub struct KnotVelocity {
    /// Spatial velocity vector.
    pub v: Vec<f64>,
    /// Mass-coordinate rate.
    pub s: f64,
}

impl KnotVelocity {
    /// Builds a knot velocity, checking finiteness.
    ///
    /// # Panics
    ///
    /// Panics if any component is non-finite.
    pub fn new(v: Vec<f64>, s: f64) -> Self {
        assert!(
            v.iter().all(|c| c.is_finite()) && s.is_finite(),
            "knot velocity must be finite"
        );
        Self { v, s }
    }

    /// The zero velocity in dimension `dim`.
    pub fn zero(dim: usize) -> Self {
        Self { v: alloc::vec![0.0; dim], s: 0.0 }
    }
}

/// A cubic Bézier segment on the cone: knots `z₀`, `z₃`, control points
/// `z₁`, `z₂`, and the physical duration `δ` the unit parameter interval
/// represents.
#[derive(Debug, Clone, PartialEq)]
pub struct ConeSplineSegment {
    points: [ConePoint; 4],
    delta: f64,
}

impl ConeSplineSegment {
    /// Builds a segment from an explicit control polygon.
    ///
    /// # Errors
    ///
    /// - [`BezierError::NonPositiveDuration`] unless `delta > 0`.
    /// - [`BezierError::ControlSeparation`] if consecutive polygon positions
    ///   are separated by π/2 or more.
    ///
    /// # Panics
    ///
    /// Panics if the points disagree in dimension or any mass coordinate
    /// vanishes: the cascade needs strictly positive masses.
    pub fn new(
        z0: ConePoint,
        z1: ConePoint,
        z2: ConePoint,
        z3: ConePoint,
        delta: f64,
    ) -> Result<Self, BezierError> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(BezierError::NonPositiveDuration { delta });
        }
        let points = [z0, z1, z2, z3];
        for p in &points {
            assert_eq!(p.dim(), points[0].dim(), "control polygon dimensions disagree");
            assert!(p.r() > 0.0, "control polygon mass coordinates must be positive");
        }
        for pair in 0..3 {
            let theta = vecn::dist(points[pair].x(), points[pair + 1].x());
            if theta >= HALF_PI {
                return Err(BezierError::ControlSeparation { pair, theta });
            }
        }
        Ok(Self { points, delta })
    }

    /// Start knot `z₀`.
    pub fn start(&self) -> &ConePoint {
        &self.points[0]
    }

    /// End knot `z₃`.
    pub fn end(&self) -> &ConePoint {
        &self.points[3]
    }

    /// The full control polygon `z₀, z₁, z₂, z₃`.
    pub fn polygon(&self) -> &[ConePoint; 4] {
        &self.points
    }

    /// Physical duration represented by `t ∈ [0, 1]`.
    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Position dimension.
    pub fn dim(&self) -> usize {
        self.points[0].dim()
    }
}

impl ConePath for ConeSplineSegment {
    fn at(&self, t: f64) -> Result<ConePoint, GeometryError> {
        decasteljau_eval(self, t)
    }

    fn dim(&self) -> usize {
        self.points[0].dim()
    }
}

/// Geodesic interpolation `z₀ #ₜ z₁`: the point a fraction `t` along the
/// cone geodesic. Alias of [`geodesic_eval`] so spline code can use the
/// interpolation-operator reading.
pub fn geodesic_midop(z0: &ConePoint, z1: &ConePoint, t: f64) -> Result<ConePoint, GeometryError> {
    geodesic_eval(z0, z1, t)
}

/// One cascade level: interpolate a consecutive pair, converting a
/// separation failure into a cascade-domain error tagged with its level.
fn cascade_step(
    a: &ConePoint,
    b: &ConePoint,
    t: f64,
    level: usize,
) -> Result<ConePoint, GeometryError> {
    match geodesic_midop(a, b, t) {
        Ok(p) => Ok(p),
        Err(GeometryError::GeodesicSeparation { theta }) => {
            Err(GeometryError::CascadeSeparation { level, theta })
        }
        Err(e) => Err(e),
    }
}

/// Evaluates the segment at `t ∈ [0, 1]` by the three-level geodesic
/// cascade. The knots are reproduced exactly at `t = 0` and `t = 1`.
///
/// # Errors
///
/// [`GeometryError::CascadeSeparation`] if an intermediate interpolation
/// pair is separated by π/2 or more. Construction bounds the control
/// polygon, but the intermediate points it generates are not confined to
/// the polygon's pairwise balls, so each level re-checks.
///
/// # Panics
///
/// Panics if `t` is outside `[0, 1]`.
pub fn decasteljau_eval(seg: &ConeSplineSegment, t: f64) -> Result<ConePoint, GeometryError> {
    assert!((0.0..=1.0).contains(&t), "curve parameter {t} outside [0, 1]");
    let [z0, z1, z2, z3] = &seg.points;
    let w0 = cascade_step(z0, z1, t, 1)?;
    let w1 = cascade_step(z1, z2, t, 1)?;
    let w2 = cascade_step(z2, z3, t, 1)?;
    let u0 = cascade_step(&w0, &w1, t, 2)?;
    let u1 = cascade_step(&w1, &w2, t, 2)?;
    cascade_step(&u0, &u1, t, 3)
}

/// `sin θ / θ` with the removable singularity filled by its series.
fn sinc(theta: f64) -> f64 {
    if theta < SMALL_ANGLE {
        1.0 - theta * theta / 6.0
    } else {
        math::sin(theta) / theta
    }
}

/// Solves for the control points of the segment that leaves `z_start` and
/// arrives at `z_end` with the prescribed physical knot velocities over a
/// duration of `delta`.
///
/// The first control point sits at an angular offset
/// `c₁ = arctan(‖v‖ / (s/r + 3/δ))` from the start knot along the velocity
/// direction, with mass coordinate scaled by
/// `c₂ = (δ/3)·√(‖v‖² + (s/r + 3/δ)²)`; the second control point mirrors
/// the construction from the end knot. Differentiating the cascade at the
/// endpoints recovers exactly `δ`-times the prescribed velocities (the
/// cascade runs on unit time), which is the defining property of the solve.
///
/// # Errors
///
/// - [`BezierError::InfeasibleStartRate`] unless `s_start > −3·r_start/δ`.
/// - [`BezierError::InfeasibleEndRate`] unless `s_end < 3·r_end/δ`.
///   Equality is rejected too: the arctangent argument diverges and the
///   control point escapes every bounded ball.
/// - [`BezierError::ControlSeparation`] if the solved polygon violates the
///   π/2 separation bound (large velocities or distant knots); see
///   [`feasible_rescale`].
/// - [`BezierError::NonPositiveDuration`] unless `delta > 0`.
///
/// # Panics
///
/// Panics if a knot sits at the cone vertex or dimensions disagree.
pub fn control_points(
    z_start: &ConePoint,
    z_end: &ConePoint,
    vel_start: &KnotVelocity,
    vel_end: &KnotVelocity,
    delta: f64,
) -> Result<ConeSplineSegment, BezierError> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(BezierError::NonPositiveDuration { delta });
    }
    assert!(z_start.r() > 0.0 && z_end.r() > 0.0, "knots must have positive mass");
    assert_eq!(z_start.dim(), z_end.dim(), "knot dimensions disagree");
    assert_eq!(vel_start.v.len(), z_start.dim(), "start velocity dimension mismatch");
    assert_eq!(vel_end.v.len(), z_end.dim(), "end velocity dimension mismatch");

    // Start side: the arctangent denominator s/r + 3/δ must stay positive.
    let r0 = z_start.r();
    let fwd = vel_start.s / r0 + 3.0 / delta;
    if fwd <= 0.0 {
        return Err(BezierError::InfeasibleStartRate {
            rate: vel_start.s,
            bound: -3.0 * r0 / delta,
        });
    }
    let speed0 = vecn::norm(&vel_start.v);
    let c1 = math::atan(speed0 / fwd);
    let c2 = delta / 3.0 * math::hypot(speed0, fwd);
    let x1 = if speed0 > 0.0 {
        vecn::axpy(z_start.x(), c1 / speed0, &vel_start.v)
    } else {
        z_start.x().to_vec()
    };
    let z1 = ConePoint::new(x1, c2 * r0);

    // End side, mirrored: the denominator is 3/δ − s/r.
    let r3 = z_end.r();
    let bwd = 3.0 / delta - vel_end.s / r3;
    if bwd <= 0.0 {
        return Err(BezierError::InfeasibleEndRate { rate: vel_end.s, bound: 3.0 * r3 / delta });
    }
    let speed1 = vecn::norm(&vel_end.v);
    let c3 = math::atan(speed1 / bwd);
    let c4 = delta / 3.0 * math::hypot(speed1, bwd);
    let x2 = if speed1 > 0.0 {
        vecn::axpy(z_end.x(), -c3 / speed1, &vel_end.v)
    } else {
        z_end.x().to_vec()
    };
    let z2 = ConePoint::new(x2, c4 * r3);

    ConeSplineSegment::new(z_start.clone(), z1, z2, z_end.clone(), delta)
}

/// Closed-form curve derivatives at the segment endpoints, per unit of
/// *curve parameter* (divide by [`ConeSplineSegment::delta`] for physical
/// rates):
///
/// ```text
/// ẋ(0) = 3·(r₁/r₀)·(sin θ₀/θ₀)·(x₁ − x₀)    ṙ(0) = 3·(r₁·cos θ₀ − r₀)
/// ẋ(1) = 3·(r₂/r₃)·(sin θ₂/θ₂)·(x₃ − x₂)    ṙ(1) = 3·(r₃ − r₂·cos θ₂)
/// ```
///
/// with `θᵢ = |xᵢ₊₁ − xᵢ|` and the `sin θ/θ` factor continuously extended
/// to 1 at coincident positions.
pub fn endpoint_velocities(seg: &ConeSplineSegment) -> (KnotVelocity, KnotVelocity) {
    let [z0, z1, z2, z3] = &seg.points;

    let theta0 = vecn::dist(z0.x(), z1.x());
    let gain0 = 3.0 * (z1.r() / z0.r()) * sinc(theta0);
    let v0 = vecn::scale(&vecn::sub(z1.x(), z0.x()), gain0);
    let s0 = 3.0 * (z1.r() * math::cos(theta0) - z0.r());

    let theta2 = vecn::dist(z2.x(), z3.x());
    let gain1 = 3.0 * (z2.r() / z3.r()) * sinc(theta2);
    let v1 = vecn::scale(&vecn::sub(z3.x(), z2.x()), gain1);
    let s1 = 3.0 * (z3.r() - z2.r() * math::cos(theta2));

    (KnotVelocity::new(v0, s0), KnotVelocity::new(v1, s1))
}

/// One knot of a particle trajectory: a time stamp, a cone point, and the
/// prescribed physical velocity there.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryKnot {
    /// Knot time.
    pub time: f64,
    /// Cone point at the knot.
    pub point: ConePoint,
    /// Prescribed physical velocity at the knot.
    pub velocity: KnotVelocity,
}

/// Position shrink and velocity damping that make a trajectory feasible
/// for [`control_points`] on every segment, with `margin` of slack.
///
/// Returns `(space_scale, time_scale)`:
///
/// - `space_scale ≤ 1` multiplies all positions so every pairwise knot
///   distance is at most `(π/2)·(1 − margin)`. Outputs map back through
///   division by it.
/// - `time_scale ≥ 1` (a power of two) divides all velocities: the knots
///   are treated as if they were that much further apart in time, which
///   leaves the interpolated points fixed but relaxes every rate bound —
///   the bounds are homogeneous of degree −1 in the dilation. Spatial
///   velocities pick up the space scale as well, `v ↦ v·space/time`.
///
/// The dilation search also caps each control point's angular offset by the
/// segment's share of the π/2 ball, `c ≤ ((π/2)·(1 − margin/2) − θ)/2` with
/// `θ` the scaled knot separation. Every point the cascade generates has
/// its position inside the convex hull of the polygon positions, so the cap
/// bounds all intermediate separations by `(π/2)·(1 − margin/2)` and
/// evaluation cannot hit a cascade-domain error.
///
/// Bound checks here are closed (`≥`/`≤`) against the margin-shrunk bounds;
/// with any positive margin the strict bounds of [`control_points`] follow.
///
/// # Panics
///
/// Panics on fewer than two knots, non-increasing times, vertex knots, or
/// `margin` outside `[0, 1)`.
pub fn required_scales(knots: &[TrajectoryKnot], margin: f64) -> (f64, f64) {
    assert!(knots.len() >= 2, "need at least two trajectory knots");
    assert!((0.0..1.0).contains(&margin), "margin {margin} outside [0, 1)");
    for (k, knot) in knots.iter().enumerate() {
        assert!(knot.point.r() > 0.0, "trajectory knot {k} sits at the cone vertex");
        if k > 0 {
            assert!(knots[k - 1].time < knot.time, "knot times must strictly increase");
        }
    }

    let mut max_dist: f64 = 0.0;
    for i in 0..knots.len() {
        for j in i + 1..knots.len() {
            max_dist = max_dist.max(vecn::dist(knots[i].point.x(), knots[j].point.x()));
        }
    }
    let reach = HALF_PI * (1.0 - margin);
    let space = if max_dist > reach { reach / max_dist } else { 1.0 };

    let mut time = 1.0;
    // Doubling always terminates: damped rates approach 0 (inside the rate
    // bounds) and damped speeds send both angular offsets to 0 (inside the
    // cap). 64 doublings overshoot any finite input.
    for _ in 0..64 {
        if trajectory_feasible(knots, margin, space, time) {
            return (space, time);
        }
        time *= 2.0;
    }
    unreachable!("time dilation search failed to terminate");
}

/// Checks every segment of the trajectory against the margin-shrunk rate
/// bounds and the angular-offset cap under the given scales.
pub(crate) fn trajectory_feasible(
    knots: &[TrajectoryKnot],
    margin: f64,
    space: f64,
    time: f64,
) -> bool {
    let hull = HALF_PI * (1.0 - margin / 2.0);
    for seg in 0..knots.len() - 1 {
        let (a, b) = (&knots[seg], &knots[seg + 1]);
        let delta = b.time - a.time;
        let (ra, rb) = (a.point.r(), b.point.r());
        let (sa, sb) = (a.velocity.s / time, b.velocity.s / time);
        let limit = 3.0 * (1.0 - margin) / delta;
        if sa < -limit * ra || sb > limit * rb {
            return false;
        }
        let theta = space * vecn::dist(a.point.x(), b.point.x());
        let cap = (hull - theta) / 2.0;
        let offset = |speed: f64, fwd: f64| -> f64 {
            if speed == 0.0 {
                0.0
            } else if fwd <= 0.0 {
                HALF_PI
            } else {
                math::atan(speed / fwd)
            }
        };
        let c1 = offset(space / time * vecn::norm(&a.velocity.v), sa / ra + 3.0 / delta);
        let c3 = offset(space / time * vecn::norm(&b.velocity.v), 3.0 / delta - sb / rb);
        if c1 > cap || c3 > cap {
            return false;
        }
    }
    true
}

/// Applies a scale pair from [`required_scales`] to a trajectory: positions
/// shrink by `space_scale`, velocities damp to `v·space/time` and `s/time`;
/// times and mass coordinates are untouched.
pub fn apply_rescale(
    knots: &[TrajectoryKnot],
    space_scale: f64,
    time_scale: f64,
) -> Vec<TrajectoryKnot> {
    knots
        .iter()
        .map(|k| TrajectoryKnot {
            time: k.time,
            point: ConePoint::new(vecn::scale(k.point.x(), space_scale), k.point.r()),
            velocity: KnotVelocity::new(
                vecn::scale(&k.velocity.v, space_scale / time_scale),
                k.velocity.s / time_scale,
            ),
        })
        .collect()
}

/// Computes and applies the feasibility rescale for one trajectory; see
/// [`required_scales`] for the transform law and guarantees.
pub fn feasible_rescale(
    knots: &[TrajectoryKnot],
    margin: f64,
) -> (f64, f64, Vec<TrajectoryKnot>) {
    let (space, time) = required_scales(knots, margin);
    (space, time, apply_rescale(knots, space, time))
}
