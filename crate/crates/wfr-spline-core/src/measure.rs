//! Discrete nonnegative measures, their cone lifts, and grid constructors.
//!
//! A [`DiscreteMeasure`] is a weighted point cloud in ℝ^d with no
//! normalization requirement — total masses are arbitrary, which is the whole
//! point of unbalanced transport. A [`LiftedMeasure`] places those points on
//! the position-mass cone; projecting back weights each particle by `r²`:
//!
//! ```text
//! ∫ f(x) d(𝔓λ)(x) = ∫ r²·f(x) dλ(x, r)
//! ```
//!
//! so many lifts project to the same measure (the projection is invariant
//! under `(r, w) ↦ (r/c, c²·w)`). The canonical lift puts every particle at
//! `r = 1`.
//!
//! Grid-based constructors use cell-centered (midpoint-rule) quadrature: grid
//! points are the centers of a uniform partition and kernel values are
//! multiplied by the cell volume, so discrete masses approximate density
//! integrals stably across resolutions.

use alloc::vec::Vec;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::cone::ConePoint;
use crate::math;
use crate::vecn;

/// Errors from measure construction and resampling.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MeasureError {
    /// A Gaussian bump was requested with a nonpositive scale.
    #[error("gaussian scale must be positive, got {sigma}")]
    InvalidScale {
        /// Offending scale.
        sigma: f64,
    },
    /// Subsampling needs at least one support point with positive weight.
    #[error("measure has no positive-weight support point")]
    EmptySupport,
}

/// A uniform rectangular grid of cell centers with its quadrature weight.
///
/// `uniform(lo, hi, n)` partitions the box `[lo, hi]` into `n₁ × … × n_d`
/// equal cells and stores their centers in row-major order (last axis
/// fastest). The constant `cell_volume` turns density samples at the centers
/// into a midpoint-rule approximation of the density's integral.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    coords: Vec<f64>,
    dim: usize,
    cell_volume: f64,
}

impl Grid {
    /// Uniform grid of cell centers over the box `[lo, hi]` with `n[k]` cells
    /// along axis `k`.
    ///
    /// # Panics
    ///
    /// Panics if the slices' lengths differ, any `n[k]` is zero, or any
    /// `hi[k] ≤ lo[k]`.
    pub fn uniform(lo: &[f64], hi: &[f64], n: &[usize]) -> Self {
        assert!(!lo.is_empty() && lo.len() == hi.len() && lo.len() == n.len(), "inconsistent grid spec");
        let dim = lo.len();
        let mut steps = Vec::with_capacity(dim);
        let mut cell_volume = 1.0;
        let mut total = 1usize;
        for k in 0..dim {
            assert!(n[k] > 0, "grid needs at least one cell per axis");
            assert!(hi[k] > lo[k], "degenerate grid axis [{}, {}]", lo[k], hi[k]);
            let step = (hi[k] - lo[k]) / n[k] as f64;
            steps.push(step);
            cell_volume *= step;
            total = total.checked_mul(n[k]).expect("grid size overflow");
        }
        let mut coords = Vec::with_capacity(total * dim);
        let mut index = alloc::vec![0usize; dim];
        for _ in 0..total {
            for k in 0..dim {
                coords.push(lo[k] + (index[k] as f64 + 0.5) * steps[k]);
            }
            // Row-major increment: last axis fastest.
            for k in (0..dim).rev() {
                index[k] += 1;
                if index[k] < n[k] {
                    break;
                }
                index[k] = 0;
            }
        }
        Self { coords, dim, cell_volume }
    }

    /// One-dimensional grid of `n` cell centers over `[a, b]`.
    pub fn line(a: f64, b: f64, n: usize) -> Self {
        Self::uniform(&[a], &[b], &[n])
    }

    /// Number of grid points.
    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    /// Whether the grid is empty (never true for constructed grids).
    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    /// Ambient dimension.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Volume of one grid cell.
    pub fn cell_volume(&self) -> f64 {
        self.cell_volume
    }

    /// Coordinates of grid point `i`.
    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    /// Iterates over the grid points.
    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.dim)
    }
}

/// How a Gaussian bump is truncated around its center.
///
/// Both windows cut the kernel at a radius around the bump center; they
/// differ in whether that radius scales with σ or is an absolute length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TruncationWindow {
    /// Keep `‖x − center‖ ≤ k·σ` — the one-dimensional convention
    /// (`k = 2` cuts at two standard deviations).
    Scaled {
        /// Radius in units of σ.
        k: f64,
    },
    /// Keep `‖x − center‖ ≤ radius` — the two-dimensional convention with an
    /// absolute cut length independent of σ.
    Fixed {
        /// Radius in position units.
        radius: f64,
    },
}

impl TruncationWindow {
    /// The conventional default for ambient dimension `dim`: two standard
    /// deviations in 1D, an absolute radius of 2 otherwise.
    pub fn default_for_dim(dim: usize) -> Self {
        if dim == 1 {
            Self::Scaled { k: 2.0 }
        } else {
            Self::Fixed { radius: 2.0 }
        }
    }

    fn cut_radius(&self, sigma: f64) -> f64 {
        match *self {
            Self::Scaled { k } => k * sigma,
            Self::Fixed { radius } => radius,
        }
    }
}

/// Truncated Gaussian density value
/// `amplitude·exp(−‖x−center‖²/(2σ²))·𝟙{‖x−center‖ ≤ cut}`.
///
/// The building block of the test measures; combine several to form
/// mixtures before feeding them to [`DiscreteMeasure::from_density`].
pub fn gaussian_density(
    center: &[f64],
    sigma: f64,
    amplitude: f64,
    window: TruncationWindow,
    x: &[f64],
) -> f64 {
    let d = vecn::dist(x, center);
    if d > window.cut_radius(sigma) {
        0.0
    } else {
        amplitude * math::exp(-d * d / (2.0 * sigma * sigma))
    }
}

/// A nonnegative discrete measure: weighted points in ℝ^d.
///
/// Point coordinates are stored row-major in a flat buffer. Total mass is
/// whatever the weights sum to; nothing here normalizes.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    coords: Vec<f64>,
    weights: Vec<f64>,
    dim: usize,
}

impl DiscreteMeasure {
    /// Empty measure in ambient dimension `dim`.
    pub fn new(dim: usize) -> Self {
        assert!(dim > 0, "ambient dimension must be positive");
        Self { coords: Vec::new(), weights: Vec::new(), dim }
    }

    /// Builds a measure from a flat row-major coordinate buffer and weights.
    ///
    /// # Panics
    ///
    /// Panics if lengths are inconsistent, any weight is negative, or any
    /// value is non-finite.
    pub fn from_parts(dim: usize, coords: Vec<f64>, weights: Vec<f64>) -> Self {
        assert!(dim > 0, "ambient dimension must be positive");
        assert_eq!(coords.len(), weights.len() * dim, "coordinate/weight length mismatch");
        assert!(coords.iter().all(|c| c.is_finite()), "coordinates must be finite");
        assert!(weights.iter().all(|w| w.is_finite() && *w >= 0.0), "weights must be finite and ≥ 0");
        Self { coords, weights, dim }
    }

    /// Samples a density on a grid: `weight[i] = f(gridᵢ)·cell_volume`.
    ///
    /// # Panics
    ///
    /// Panics if the density returns a negative or non-finite value.
    pub fn from_density<F: Fn(&[f64]) -> f64>(grid: &Grid, f: F) -> Self {
        let mut weights = Vec::with_capacity(grid.len());
        for x in grid.iter() {
            let v = f(x);
            assert!(v.is_finite() && v >= 0.0, "density must be finite and ≥ 0, got {v}");
            weights.push(v * grid.cell_volume());
        }
        Self { coords: grid.coords.clone(), weights, dim: grid.dim }
    }

    /// Appends one weighted point.
    ///
    /// # Panics
    ///
    /// Panics on dimension mismatch, negative weight, or non-finite values.
    pub fn push(&mut self, point: &[f64], weight: f64) {
        assert_eq!(point.len(), self.dim, "point dimension mismatch");
        assert!(point.iter().all(|c| c.is_finite()), "coordinates must be finite");
        assert!(weight.is_finite() && weight >= 0.0, "weight must be finite and ≥ 0");
        self.coords.extend_from_slice(point);
        self.weights.push(weight);
    }

    /// Number of support points (zero-weight points included).
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    /// Whether the measure has no support points at all.
    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Ambient dimension.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Coordinates of point `i`.
    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    /// Weight of point `i`.
    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    /// All weights.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Flat row-major coordinate buffer.
    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Iterates over `(point, weight)` pairs.
    pub fn iter(&self) -> impl Iterator<Item = (&[f64], f64)> {
        self.coords.chunks_exact(self.dim).zip(self.weights.iter().copied())
    }

    /// Total mass `Σᵢ weightᵢ` (0 for the empty measure).
    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Returns the measure with every weight multiplied by `c ≥ 0`.
    ///
    /// # Panics
    ///
    /// Panics if `c` is negative or non-finite.
    pub fn scale_weights(&self, c: f64) -> Self {
        assert!(c.is_finite() && c >= 0.0, "scale must be finite and ≥ 0");
        Self {
            coords: self.coords.clone(),
            weights: self.weights.iter().map(|w| c * w).collect(),
            dim: self.dim,
        }
    }

    /// Pointwise sum with a measure on the identical support.
    ///
    /// # Panics
    ///
    /// Panics if the supports differ (coordinates compared exactly).
    pub fn add_weights(&self, other: &Self) -> Self {
        assert_eq!(self.coords, other.coords, "measures must share their support points");
        Self {
            coords: self.coords.clone(),
            weights: self.weights.iter().zip(&other.weights).map(|(a, b)| a + b).collect(),
            dim: self.dim,
        }
    }

    /// Concatenation: the sum measure on the disjoint union of supports.
    ///
    /// # Panics
    ///
    /// Panics on dimension mismatch.
    pub fn concat(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "ambient dimension mismatch");
        let mut coords = self.coords.clone();
        coords.extend_from_slice(&other.coords);
        let mut weights = self.weights.clone();
        weights.extend_from_slice(&other.weights);
        Self { coords, weights, dim: self.dim }
    }

    /// Canonical lift: one particle per support point at mass coordinate
    /// `r = 1`, carrying the point's weight. Projecting back reproduces the
    /// measure exactly.
    pub fn canonical_lift(&self) -> LiftedMeasure {
        let particles = self
            .iter()
            .map(|(x, w)| (ConePoint::new(x.to_vec(), 1.0), w))
            .collect();
        LiftedMeasure::new(particles, self.dim)
    }

    /// Drops every point whose weight falls below `rel_floor` times the
    /// maximum weight, keeping coordinates and surviving weights unchanged.
    ///
    /// Densities sampled on fine grids carry far-tail weights many orders
    /// below resolution (and below what double-precision transport can
    /// distinguish from zero); those points bloat solver supports and
    /// pollute uniform support subsampling. A relative floor of `1e-12`
    /// removes only that dust.
    ///
    /// # Panics
    ///
    /// Panics unless `0 ≤ rel_floor < 1`.
    pub fn prune_relative(&self, rel_floor: f64) -> Self {
        assert!(
            (0.0..1.0).contains(&rel_floor),
            "relative floor {rel_floor} outside [0, 1)"
        );
        let max = self.weights.iter().fold(0.0f64, |a, &w| a.max(w));
        let cut = rel_floor * max;
        let mut out = Self::new(self.dim);
        for (x, w) in self.iter() {
            if w >= cut && w > 0.0 {
                out.push(x, w);
            }
        }
        out
    }

    /// Draws `n` support points uniformly from the positive-weight support,
    /// without replacement (with replacement when `n` exceeds the support
    /// size), each carrying `total_mass / n`. Deterministic in `seed`.
    ///
    /// # Errors
    ///
    /// [`MeasureError::EmptySupport`] when no point has positive weight.
    ///
    /// # Panics
    ///
    /// Panics if `n = 0`.
    pub fn subsample_support(&self, n: usize, seed: u64) -> Result<Self, MeasureError> {
        assert!(n > 0, "subsample size must be positive");
        let mut support: Vec<usize> = (0..self.len()).filter(|&i| self.weights[i] > 0.0).collect();
        if support.is_empty() {
            return Err(MeasureError::EmptySupport);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let chosen: Vec<usize> = if n <= support.len() {
            // Partial Fisher–Yates: shuffle just the prefix we keep.
            for i in 0..n {
                let j = rng.random_range(i..support.len());
                support.swap(i, j);
            }
            support[..n].to_vec()
        } else {
            (0..n).map(|_| support[rng.random_range(0..support.len())]).collect()
        };
        let w = self.total_mass() / n as f64;
        let mut out = Self::new(self.dim);
        for i in chosen {
            out.push(self.point(i), w);
        }
        Ok(out)
    }
}

/// A nonnegative measure on the cone: weighted particles `((x, r), w)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftedMeasure {
    particles: Vec<(ConePoint, f64)>,
    dim: usize,
}

impl LiftedMeasure {
    /// Builds a lifted measure from particles sharing the dimension `dim`.
    ///
    /// # Panics
    ///
    /// Panics on negative/non-finite weights or mismatched dimensions.
    pub fn new(particles: Vec<(ConePoint, f64)>, dim: usize) -> Self {
        for (z, w) in &particles {
            assert_eq!(z.dim(), dim, "particle dimension mismatch");
            assert!(w.is_finite() && *w >= 0.0, "particle weights must be finite and ≥ 0");
        }
        Self { particles, dim }
    }

    /// The particles as `(point, weight)` pairs.
    pub fn particles(&self) -> &[(ConePoint, f64)] {
        &self.particles
    }

    /// Number of particles.
    pub fn len(&self) -> usize {
        self.particles.len()
    }

    /// Whether there are no particles.
    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    /// Ambient dimension.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Projects back to a discrete measure: point `x` with weight `w·r²` per
    /// particle. Vertex particles contribute zero mass.
    pub fn project_lift(&self) -> DiscreteMeasure {
        let mut out = DiscreteMeasure::new(self.dim);
        for (z, w) in &self.particles {
            out.push(z.x(), w * z.r() * z.r());
        }
        out
    }
}

/// Truncated Gaussian bump sampled on a grid with the dimension-conventional
/// window (see [`TruncationWindow::default_for_dim`]).
///
/// Weights are `amplitude·exp(−‖xᵢ−center‖²/(2σ²))·cell_volume` inside the
/// window and 0 outside, so the total mass approximates the density's
/// integral.
///
/// # Errors
///
/// [`MeasureError::InvalidScale`] when `sigma ≤ 0`.
pub fn gaussian_bump(
    center: &[f64],
    sigma: f64,
    amplitude: f64,
    grid: &Grid,
) -> Result<DiscreteMeasure, MeasureError> {
    gaussian_bump_with(center, sigma, amplitude, grid, TruncationWindow::default_for_dim(grid.dim()))
}

/// [`gaussian_bump`] with an explicit truncation window.
///
/// # Errors
///
/// [`MeasureError::InvalidScale`] when `sigma ≤ 0`.
pub fn gaussian_bump_with(
    center: &[f64],
    sigma: f64,
    amplitude: f64,
    grid: &Grid,
    window: TruncationWindow,
) -> Result<DiscreteMeasure, MeasureError> {
    if sigma.is_nan() || sigma <= 0.0 {
        return Err(MeasureError::InvalidScale { sigma });
    }
    assert_eq!(center.len(), grid.dim(), "center dimension mismatch");
    assert!(amplitude >= 0.0 && amplitude.is_finite(), "amplitude must be finite and ≥ 0");
    Ok(DiscreteMeasure::from_density(grid, |x| {
        gaussian_density(center, sigma, amplitude, window, x)
    }))
}
