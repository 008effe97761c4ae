//! Built-in experiment measure families.
//!
//! Two families of synthetic inputs exercise the full pipeline without any
//! external data: a one-dimensional family (a Gaussian bump splitting into
//! two, doubling its mass, then relaxing to a flat block) and a
//! two-dimensional family (a wide blob scattering into clusters and
//! re-merging off-center). Total masses differ across the knots by design;
//! that is the regime the transport model exists for.
//!
//! All densities are sampled on uniform grids and pruned of numerically
//! dead support points before use.

use wfr_spline_core::measure::{
    gaussian_density, DiscreteMeasure, Grid, TruncationWindow,
};

/// Kernel width of the one-dimensional family.
pub const ONE_DIM_SIGMA: f64 = 0.06;

/// Kernel width of the two-dimensional family.
pub const TWO_DIM_SIGMA: f64 = 0.01;

/// Relative weight floor applied when materializing preset measures.
///
/// Grid sampling leaves far-tail cells holding masses hundreds of orders of
/// magnitude below the peak. They contribute nothing to transport but
/// inflate cost matrices quadratically and would let support subsampling
/// draw numerically dead points, so preset materialization drops every
/// weight below this fraction of the measure's largest weight. At 10⁻¹²
/// the discarded mass is far below solver tolerance.
pub const PRUNE_FLOOR: f64 = 1e-12;

/// Default grid of the one-dimensional family: 512 cells on [−0.2, 1.2].
pub fn one_dim_grid() -> Grid {
    one_dim_grid_n(512)
}

/// The one-dimensional family's domain [−0.2, 1.2] at a chosen resolution.
pub fn one_dim_grid_n(n: usize) -> Grid {
    Grid::line(-0.2, 1.2, n)
}

/// Default grid of the two-dimensional family: 96×96 cells on
/// [−0.35, 0.35]².
pub fn two_dim_grid() -> Grid {
    two_dim_grid_n([96, 96])
}

/// The two-dimensional family's domain [−0.35, 0.35]² at a chosen
/// resolution.
pub fn two_dim_grid_n(n: [usize; 2]) -> Grid {
    Grid::uniform(&[-0.35, -0.35], &[0.35, 0.35], &n)
}

/// The four one-dimensional knot measures on `grid`, in knot order:
///
/// 1. one bump at ½,
/// 2. half-height bumps at 0.3 and 0.7,
/// 3. full-height bumps at 0.3 and 0.7 (twice the mass of knot 2),
/// 4. the flat block ½·𝟙₍₀,₁₎.
///
/// Bumps are truncated at two standard deviations.
///
/// # Panics
///
/// Panics unless `grid` is one-dimensional and `sigma` is positive.
pub fn one_dim_measures(sigma: f64, grid: &Grid) -> Vec<DiscreteMeasure> {
    assert_eq!(grid.dim(), 1, "one-dimensional family needs a 1D grid");
    assert!(sigma > 0.0 && sigma.is_finite(), "sigma must be positive");
    let window = TruncationWindow::default_for_dim(1);
    let bump = move |center: f64, amplitude: f64, x: &[f64]| {
        gaussian_density(&[center], sigma, amplitude, window, x)
    };
    [
        DiscreteMeasure::from_density(grid, |x| bump(0.5, 1.0, x)),
        DiscreteMeasure::from_density(grid, |x| bump(0.3, 0.5, x) + bump(0.7, 0.5, x)),
        DiscreteMeasure::from_density(grid, |x| bump(0.3, 1.0, x) + bump(0.7, 1.0, x)),
        DiscreteMeasure::from_density(grid, |x| {
            if (0.0..=1.0).contains(&x[0]) {
                0.5
            } else {
                0.0
            }
        }),
    ]
    .iter()
    .map(|m| m.prune_relative(PRUNE_FLOOR))
    .collect()
}

/// The four two-dimensional knot measures on `grid`, in knot order:
///
/// 1. a wide (2σ) bump at the origin, amplitude ¾,
/// 2. three σ-bumps near the origin, amplitude 0.65 each,
/// 3. two σ-bumps at (0.15, ±0.15), amplitude ¾ each,
/// 4. a wide (2σ) bump at (0.2, 0), amplitude 1.
///
/// Bumps are truncated at an absolute radius of 2, which keeps every grid
/// point inside the window; pruning supplies the effective support.
///
/// # Panics
///
/// Panics unless `grid` is two-dimensional and `sigma` is positive.
pub fn two_dim_measures(sigma: f64, grid: &Grid) -> Vec<DiscreteMeasure> {
    assert_eq!(grid.dim(), 2, "two-dimensional family needs a 2D grid");
    assert!(sigma > 0.0 && sigma.is_finite(), "sigma must be positive");
    let window = TruncationWindow::default_for_dim(2);
    let bump = move |center: [f64; 2], width: f64, amplitude: f64, x: &[f64]| {
        gaussian_density(&center, width, amplitude, window, x)
    };
    let c = core::f64::consts::SQRT_2 / 20.0;
    [
        DiscreteMeasure::from_density(grid, |x| bump([0.0, 0.0], 2.0 * sigma, 0.75, x)),
        DiscreteMeasure::from_density(grid, |x| {
            bump([c, c], sigma, 0.65, x)
                + bump([0.0, -c], sigma, 0.65, x)
                + bump([c, -c], sigma, 0.65, x)
        }),
        DiscreteMeasure::from_density(grid, |x| {
            bump([0.15, 0.15], sigma, 0.75, x) + bump([0.15, -0.15], sigma, 0.75, x)
        }),
        DiscreteMeasure::from_density(grid, |x| bump([0.2, 0.0], 2.0 * sigma, 1.0, x)),
    ]
    .iter()
    .map(|m| m.prune_relative(PRUNE_FLOOR))
    .collect()
}

/// Knot-time sets of the one-dimensional family: front-loaded, uniform, and
/// back-loaded spacings over [0, 10], each under the output slug it runs
/// as.
pub fn one_dim_time_sets() -> Vec<(&'static str, Vec<f64>)> {
    vec![
        ("knots-early", vec![0.0, 1.0, 2.0, 10.0]),
        ("knots-uniform", vec![0.0, 10.0 / 3.0, 20.0 / 3.0, 10.0]),
        ("knots-late", vec![0.0, 8.0, 9.0, 10.0]),
    ]
}

/// Knot-time sets of the two-dimensional family: uniform spacing.
pub fn two_dim_time_sets() -> Vec<(&'static str, Vec<f64>)> {
    vec![("knots-uniform", vec![0.0, 1.0, 2.0, 3.0])]
}
