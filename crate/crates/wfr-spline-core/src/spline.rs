//! Euclidean natural cubic splines, used to estimate knot velocities.
//!
//! Positions and mass coordinates of transported particles are interpolated
//! knot-to-knot on the cone, but the *velocities* at the knots come from the
//! classical Euclidean construction: fit the natural cubic spline through the
//! knot values and differentiate it at the knots. Only those derivatives
//! leave this module; the interpolant itself is exposed for diagnostics and
//! for the flat-limit tests, where cone splines must collapse onto their
//! Euclidean counterparts.
//!
//! The fit solves the standard tridiagonal *moment* system (moments = second
//! derivatives `Mᵢ`) with natural boundaries `M₀ = M_N = 0`:
//!
//! ```text
//! (hᵢ₋₁/6)·Mᵢ₋₁ + ((hᵢ₋₁+hᵢ)/3)·Mᵢ + (hᵢ/6)·Mᵢ₊₁ = dᵢ − dᵢ₋₁
//! ```
//!
//! with `hᵢ = tᵢ₊₁ − tᵢ` and divided differences `dᵢ = (yᵢ₊₁ − yᵢ)/hᵢ`.
//! Vector-valued knots share one factorization of the system; only the
//! right-hand sides differ per component.

use alloc::vec::Vec;

/// Errors from knot-series construction and spline evaluation.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SplineError {
    /// Knot times must be strictly increasing.
    #[error("knot times must be strictly increasing (offending index {index})")]
    NonMonotoneTimes {
        /// Index `i` with `times[i] ≤ times[i−1]`.
        index: usize,
    },
    /// At least two knots are required.
    #[error("need at least two knots, got {got}")]
    TooFewKnots {
        /// Number of knots supplied.
        got: usize,
    },
    /// Evaluation outside the knot span.
    #[error("evaluation time {t} outside the knot span [{t0}, {t1}]")]
    OutOfRange {
        /// Requested time.
        t: f64,
        /// First knot time.
        t0: f64,
        /// Last knot time.
        t1: f64,
    },
}

/// Time-stamped knot values in ℝ^m with strictly increasing times.
#[derive(Debug, Clone, PartialEq)]
pub struct KnotSeries {
    times: Vec<f64>,
    /// Knot values, row-major `len × value_dim`.
    values: Vec<f64>,
    value_dim: usize,
}

impl KnotSeries {
    /// Builds a knot series from times and row-major values.
    ///
    /// # Errors
    ///
    /// - [`SplineError::TooFewKnots`] with fewer than two knots.
    /// - [`SplineError::NonMonotoneTimes`] unless times strictly increase.
    ///
    /// # Panics
    ///
    /// Panics if the value buffer length is not `times.len() × value_dim` or
    /// any entry is non-finite.
    pub fn new(times: Vec<f64>, values: Vec<f64>, value_dim: usize) -> Result<Self, SplineError> {
        if times.len() < 2 {
            return Err(SplineError::TooFewKnots { got: times.len() });
        }
        for i in 1..times.len() {
            if times[i] <= times[i - 1] {
                return Err(SplineError::NonMonotoneTimes { index: i });
            }
        }
        assert!(value_dim > 0, "value dimension must be positive");
        assert_eq!(values.len(), times.len() * value_dim, "value buffer length mismatch");
        assert!(times.iter().chain(values.iter()).all(|v| v.is_finite()), "knot data must be finite");
        Ok(Self { times, values, value_dim })
    }

    /// Knot times.
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// Number of knots.
    pub fn len(&self) -> usize {
        self.times.len()
    }

    /// Never true: construction requires two knots.
    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Dimension of the knot values.
    pub fn value_dim(&self) -> usize {
        self.value_dim
    }

    /// Value vector at knot `i`.
    pub fn value(&self, i: usize) -> &[f64] {
        &self.values[i * self.value_dim..(i + 1) * self.value_dim]
    }
}

/// A fitted natural cubic spline: the knots plus per-knot first derivatives
/// and moments (second derivatives).
#[derive(Debug, Clone, PartialEq)]
pub struct CubicFit {
    series: KnotSeries,
    /// First derivatives, row-major `len × value_dim`.
    velocities: Vec<f64>,
    /// Second derivatives (moments), row-major; zero in the first and last
    /// rows by the natural boundary condition.
    moments: Vec<f64>,
}

impl CubicFit {
    /// The underlying knot series.
    pub fn series(&self) -> &KnotSeries {
        &self.series
    }

    /// First derivative of the interpolant at knot `i`.
    pub fn velocity(&self, i: usize) -> &[f64] {
        let m = self.series.value_dim;
        &self.velocities[i * m..(i + 1) * m]
    }
}

/// Fits the natural cubic spline through a knot series, returning exact knot
/// velocities. Two knots degrade to the straight line with both velocities
/// equal to the divided difference.
pub fn natural_cubic_fit(series: &KnotSeries) -> CubicFit {
    let n = series.len();
    let m = series.value_dim;
    let t = &series.times;
    let h: Vec<f64> = (0..n - 1).map(|i| t[i + 1] - t[i]).collect();

    // Factorize the tridiagonal moment system once (interior unknowns
    // M₁..M_{n−2}; natural boundary pins M₀ = M_{n−1} = 0). `denom` and the
    // normalized super-diagonal are shared by every value component.
    let interior = n - 2;
    let mut denom = alloc::vec![0.0; interior];
    let mut upper = alloc::vec![0.0; interior];
    for k in 0..interior {
        let i = k + 1;
        let diag = (h[i - 1] + h[i]) / 3.0;
        let sub = if k == 0 { 0.0 } else { h[i - 1] / 6.0 };
        denom[k] = diag - sub * upper[k.saturating_sub(1)];
        upper[k] = (h[i] / 6.0) / denom[k];
    }

    let mut moments = alloc::vec![0.0; n * m];
    let mut rhs = alloc::vec![0.0; interior];
    for c in 0..m {
        let y = |i: usize| series.values[i * m + c];
        let d = |i: usize| (y(i + 1) - y(i)) / h[i];
        // Forward sweep.
        for k in 0..interior {
            let i = k + 1;
            let r = d(i) - d(i - 1);
            let sub = if k == 0 { 0.0 } else { h[i - 1] / 6.0 };
            rhs[k] = (r - sub * rhs[k.saturating_sub(1)]) / denom[k];
        }
        // Back substitution.
        for k in (0..interior).rev() {
            let next = if k + 1 < interior { rhs[k + 1] } else { 0.0 };
            rhs[k] -= upper[k] * next;
            moments[(k + 1) * m + c] = rhs[k];
        }
    }

    // Knot velocities from the moments.
    let mut velocities = alloc::vec![0.0; n * m];
    for c in 0..m {
        let y = |i: usize| series.values[i * m + c];
        let mom = |i: usize| moments[i * m + c];
        for i in 0..n - 1 {
            let d = (y(i + 1) - y(i)) / h[i];
            velocities[i * m + c] = d - h[i] * (2.0 * mom(i) + mom(i + 1)) / 6.0;
        }
        let last = n - 1;
        let d = (y(last) - y(last - 1)) / h[last - 1];
        velocities[last * m + c] = d + h[last - 1] * (mom(last - 1) + 2.0 * mom(last)) / 6.0;
    }

    CubicFit { series: series.clone(), velocities, moments }
}

/// Evaluates a fitted spline at `t ∈ [t₀, t_N]`; knots are reproduced
/// exactly.
///
/// # Errors
///
/// [`SplineError::OutOfRange`] outside the knot span.
pub fn cubic_eval(fit: &CubicFit, t: f64) -> Result<Vec<f64>, SplineError> {
    let series = &fit.series;
    let times = series.times();
    let (t0, t1) = (times[0], times[times.len() - 1]);
    if !(t0..=t1).contains(&t) {
        return Err(SplineError::OutOfRange { t, t0, t1 });
    }
    let m = series.value_dim;
    if t == t1 {
        return Ok(series.value(times.len() - 1).to_vec());
    }
    // partition_point returns the first index with times[i] > t; the segment
    // starts one before.
    let seg = times.partition_point(|&ti| ti <= t) - 1;
    let h = times[seg + 1] - times[seg];
    let tau = t - times[seg];
    let mut out = Vec::with_capacity(m);
    for c in 0..m {
        let y = series.values[seg * m + c];
        let v = fit.velocities[seg * m + c];
        let m0 = fit.moments[seg * m + c];
        let m1 = fit.moments[(seg + 1) * m + c];
        out.push(y + v * tau + 0.5 * m0 * tau * tau + (m1 - m0) / (6.0 * h) * tau * tau * tau);
    }
    Ok(out)
}
