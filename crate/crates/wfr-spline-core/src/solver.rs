//! Entropic scaling solver for the static KL-penalized transport problem.
//!
//! The squared distance between two nonnegative measures is the infimum of
//!
//! ```text
//! KL(η₀‖μ₀) + KL(η₁‖μ₁) + Σᵢⱼ c(xᵢ, yⱼ)·ηᵢⱼ,   c(x,y) = −2·log cos(|x−y| ∧ π/2)
//! ```
//!
//! over couplings η with marginals η₀, η₁. Adding ε·KL(η‖μ₀⊗μ₁) makes the
//! problem smooth and yields the scaling form η = a ⊗ b · K · (μ₀ ⊗ μ₁) with
//! the Gibbs kernel K = exp(−c/ε) = cos^{2/ε}(|x−y| ∧ π/2), solvable by
//! alternating closed-form marginal updates with exponent 1/(1+ε) (the
//! proximal step for a unit-weight KL marginal penalty).
//!
//! # Numerics
//!
//! - The kernel is built in log form directly from `(2/ε)·log cos θ`, never
//!   through the cost, so separations near π/2 underflow cleanly to an exact
//!   zero kernel entry instead of overflowing the cost.
//! - Scalings live in the log domain. A multiplicative fast path runs between
//!   *absorption* events: when a log scaling drifts beyond ±50 it is absorbed
//!   into the kernel and the scaling reset to 1, so small ε cannot overflow.
//! - Inputs are support-pruned: weights below 10⁻¹² of the largest weight are
//!   dropped from the active sets (their KL contribution is retained in the
//!   objective). Dense grids with near-underflow Gaussian tails shrink from
//!   thousands of points to the few hundred that carry mass.
//! - Nonconvergence is not an error: the returned plan carries the final
//!   residual and iteration count for the caller to judge.
//!
//! Distances are reported from the **unregularized** primal objective of the
//! converged plan (debiasing by re-evaluation), so the O(ε) entropy offset
//! never reaches the caller.

use alloc::vec::Vec;

use core::f64::consts::FRAC_PI_2;

use crate::math;
use crate::measure::DiscreteMeasure;
use crate::vecn;

/// Default iteration cap for [`solve_entropic`].
pub const DEFAULT_MAX_ITERS: usize = 10_000;

/// Default sup-norm tolerance on the per-iteration change of log scalings.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Relative weight floor for support pruning: points lighter than this
/// fraction of the heaviest weight are excluded from the active solve.
pub const SUPPORT_FLOOR: f64 = 1e-12;

/// Log-scaling magnitude that triggers absorption into the kernel.
const ABSORB_THRESHOLD: f64 = 50.0;

/// Which marginal of a plan an operation refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverSide {
    /// The first (row) marginal.
    Source,
    /// The second (column) marginal.
    Target,
}

/// Errors from the transport solver and its derived quantities.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolverError {
    /// Source and target live in different ambient dimensions.
    #[error("measures have ambient dimensions {source_dim} and {target_dim}")]
    DimensionMismatch {
        /// Source dimension.
        source_dim: usize,
        /// Target dimension.
        target_dim: usize,
    },
    /// A measure with zero total mass cannot be coupled.
    #[error("{side:?} measure has zero total mass")]
    EmptyMeasure {
        /// Which argument was empty.
        side: SolverSide,
    },
    /// A plan was combined with measures it was not produced from.
    #[error("plan of shape {plan_source}×{plan_target} does not match measures of size {got_source}×{got_target}")]
    ShapeMismatch {
        /// Source size recorded in the plan.
        plan_source: usize,
        /// Target size recorded in the plan.
        plan_target: usize,
        /// Source size supplied.
        got_source: usize,
        /// Target size supplied.
        got_target: usize,
    },
    /// A barycentric map was requested for a source row carrying no plan
    /// mass (the pipeline treats such particles as vanishing).
    #[error("source point {row} carries no plan mass")]
    DanglingSource {
        /// Index of the dangling row in the original source measure.
        row: usize,
    },
    /// A map query lies ≥ π/2 away from every target support point.
    #[error("query point is ≥ π/2 away from the entire target support")]
    QueryOutOfRange,
}

/// Transport cost `c(x, y) = −2·log cos(|x−y| ∧ π/2)`; `+∞` at and beyond
/// separation π/2.
pub fn transport_cost(theta: f64) -> f64 {
    if theta >= FRAC_PI_2 {
        f64::INFINITY
    } else {
        -2.0 * math::ln(math::cos(theta))
    }
}

/// Log Gibbs kernel `log exp(−c/ε) = (2/ε)·log cos(|x−y| ∧ π/2)`; `−∞` where
/// the cost is infinite.
fn log_kernel(theta: f64, epsilon: f64) -> f64 {
    if theta >= FRAC_PI_2 {
        f64::NEG_INFINITY
    } else {
        (2.0 / epsilon) * math::ln(math::cos(theta))
    }
}

/// Dense matrix of transport costs between two supports.
#[derive(Debug, Clone)]
pub struct CostMatrix {
    entries: Vec<f64>,
    n_source: usize,
    n_target: usize,
}

impl CostMatrix {
    /// Cost entry `c(xᵢ, yⱼ)` (possibly `+∞`).
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n_target + j]
    }

    /// Number of source points.
    pub fn n_source(&self) -> usize {
        self.n_source
    }

    /// Number of target points.
    pub fn n_target(&self) -> usize {
        self.n_target
    }
}

/// Builds the dense cost matrix `c(xᵢ, yⱼ) = −2·log cos(|xᵢ−yⱼ| ∧ π/2)`.
///
/// # Errors
///
/// [`SolverError::DimensionMismatch`] when the measures' ambient dimensions
/// differ.
pub fn cost_matrix(source: &DiscreteMeasure, target: &DiscreteMeasure) -> Result<CostMatrix, SolverError> {
    if source.dim() != target.dim() {
        return Err(SolverError::DimensionMismatch { source_dim: source.dim(), target_dim: target.dim() });
    }
    let mut entries = Vec::with_capacity(source.len() * target.len());
    for i in 0..source.len() {
        for j in 0..target.len() {
            entries.push(transport_cost(vecn::dist(source.point(i), target.point(j))));
        }
    }
    Ok(CostMatrix { entries, n_source: source.len(), n_target: target.len() })
}

/// An entropic transport plan between two discrete measures.
///
/// The coupling is stored densely on the *active* supports (the points that
/// survive pruning); `source_support`/`target_support` map active indices
/// back to positions in the original measures. Marginal accessors return
/// full-length vectors with zeros at pruned points.
#[derive(Debug, Clone)]
pub struct TransportPlan {
    /// Coupling weights, row-major over active source × active target.
    eta: Vec<f64>,
    /// Log Gibbs kernel on the active supports (−∞ encodes infinite cost).
    log_k: Vec<f64>,
    /// Total log scaling per active source point.
    log_a: Vec<f64>,
    /// Total log scaling per active target point.
    log_b: Vec<f64>,
    source_support: Vec<usize>,
    target_support: Vec<usize>,
    source_len: usize,
    target_len: usize,
    dim: usize,
    epsilon: f64,
    iterations: usize,
    converged: bool,
    residual: f64,
    objective: f64,
}

impl TransportPlan {
    /// Regularization strength the plan was solved with.
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Scaling iterations performed.
    pub fn iterations(&self) -> usize {
        self.iterations
    }

    /// Whether the final residual fell below the tolerance.
    pub fn converged(&self) -> bool {
        self.converged
    }

    /// Final sup-norm change of the log scalings.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    /// Unregularized primal objective of the plan at solve time:
    /// `KL(η₀‖μ₀) + KL(η₁‖μ₁) + Σ c·η`.
    pub fn objective(&self) -> f64 {
        self.objective
    }

    /// Active source indices (positions into the original source measure).
    pub fn source_support(&self) -> &[usize] {
        &self.source_support
    }

    /// Active target indices (positions into the original target measure).
    pub fn target_support(&self) -> &[usize] {
        &self.target_support
    }

    /// Original source measure size.
    pub fn source_len(&self) -> usize {
        self.source_len
    }

    /// Original target measure size.
    pub fn target_len(&self) -> usize {
        self.target_len
    }

    /// Ambient dimension.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Coupling weight between active source row `i` and active target
    /// column `j`.
    pub fn eta(&self, i: usize, j: usize) -> f64 {
        self.eta[i * self.target_support.len() + j]
    }

    /// Total log scaling per active source point.
    pub fn source_log_scalings(&self) -> &[f64] {
        &self.log_a
    }

    /// Total log scaling per active target point.
    pub fn target_log_scalings(&self) -> &[f64] {
        &self.log_b
    }

    /// Total coupled mass `Σᵢⱼ ηᵢⱼ`.
    pub fn total_mass(&self) -> f64 {
        self.eta.iter().sum()
    }

    /// Plan mass per original source point (zeros at pruned points).
    pub fn source_marginal(&self) -> Vec<f64> {
        let nt = self.target_support.len();
        let mut out = alloc::vec![0.0; self.source_len];
        for (row, &orig) in self.source_support.iter().enumerate() {
            out[orig] = self.eta[row * nt..(row + 1) * nt].iter().sum();
        }
        out
    }

    /// Plan mass per original target point (zeros at pruned points).
    pub fn target_marginal(&self) -> Vec<f64> {
        let nt = self.target_support.len();
        let mut out = alloc::vec![0.0; self.target_len];
        for (col, &orig) in self.target_support.iter().enumerate() {
            out[orig] = (0..self.source_support.len()).map(|row| self.eta[row * nt + col]).sum();
        }
        out
    }

    /// The plan with every coupling weight multiplied by `c > 0`.
    ///
    /// Both log scalings absorb `log(c)/2` so the scaling representation
    /// stays consistent; solve-time diagnostics (`objective`, `residual`,
    /// `iterations`) still describe the originating solve.
    ///
    /// # Panics
    ///
    /// Panics if `c` is not strictly positive and finite.
    pub fn scaled(&self, c: f64) -> Self {
        assert!(c > 0.0 && c.is_finite(), "plan scale must be positive and finite");
        let mut out = self.clone();
        let half_log = math::ln(c) / 2.0;
        for w in &mut out.eta {
            *w *= c;
        }
        for la in &mut out.log_a {
            *la += half_log;
        }
        for lb in &mut out.log_b {
            *lb += half_log;
        }
        out
    }
}

/// Active (pruned) view of one measure: original indices, weights, and a
/// flat coordinate buffer.
struct ActiveSupport {
    indices: Vec<usize>,
    weights: Vec<f64>,
    coords: Vec<f64>,
}

fn prune(mu: &DiscreteMeasure) -> ActiveSupport {
    let max_w = mu.weights().iter().copied().fold(0.0_f64, f64::max);
    let floor = max_w * SUPPORT_FLOOR;
    let mut indices = Vec::new();
    let mut weights = Vec::new();
    let mut coords = Vec::new();
    for (i, (x, w)) in mu.iter().enumerate() {
        if w > floor {
            indices.push(i);
            weights.push(w);
            coords.extend_from_slice(x);
        }
    }
    ActiveSupport { indices, weights, coords }
}

/// `KL(p‖q) = Σ p log(p/q) − p + q` over paired weights, with `0·log 0 = 0`.
fn kl_divergence(p: &[f64], q: &[f64]) -> f64 {
    debug_assert_eq!(p.len(), q.len());
    let mut total = 0.0;
    for (&pi, &qi) in p.iter().zip(q) {
        if pi > 0.0 {
            total += pi * math::ln(pi / qi) - pi + qi;
        } else {
            total += qi;
        }
    }
    total
}

/// Unregularized primal objective of a coupling `eta` on the active supports,
/// including the KL contribution of pruned-away source/target mass.
fn primal_objective(
    eta: &[f64],
    log_k: &[f64],
    epsilon: f64,
    src: &ActiveSupport,
    tgt: &ActiveSupport,
    pruned_mass: f64,
) -> f64 {
    let (ns, nt) = (src.weights.len(), tgt.weights.len());
    let mut row_mass = alloc::vec![0.0; ns];
    let mut col_mass = alloc::vec![0.0; nt];
    let mut transport = 0.0;
    for i in 0..ns {
        for j in 0..nt {
            let w = eta[i * nt + j];
            if w > 0.0 {
                row_mass[i] += w;
                col_mass[j] += w;
                // c = −ε·log K on the plan's support (log K finite there).
                transport += w * (-epsilon * log_k[i * nt + j]);
            }
        }
    }
    kl_divergence(&row_mass, &src.weights) + kl_divergence(&col_mass, &tgt.weights) + transport + pruned_mass
}

/// Materializes `η = exp(log a + log b + log K)·(μ ⊗ ν)` on active supports.
fn materialize(log_a: &[f64], log_b: &[f64], log_k: &[f64], src: &ActiveSupport, tgt: &ActiveSupport) -> Vec<f64> {
    let (ns, nt) = (src.weights.len(), tgt.weights.len());
    let mut eta = Vec::with_capacity(ns * nt);
    for i in 0..ns {
        for j in 0..nt {
            eta.push(math::exp(log_a[i] + log_b[j] + log_k[i * nt + j]) * src.weights[i] * tgt.weights[j]);
        }
    }
    eta
}

/// Solves the entropically regularized problem by alternating marginal
/// scalings; see the module docs for the scheme.
///
/// Convergence is declared when the sup-norm change of the total log
/// scalings over one iteration (both half-updates) drops below `tol`;
/// otherwise the solve stops at `max_iters` and the plan reports
/// `converged() == false` with the last residual. Points whose kernel row is
/// identically zero keep a log scaling of 0 and are excluded from the
/// residual (their coupling is zero no matter the scaling).
///
/// # Errors
///
/// - [`SolverError::DimensionMismatch`] for measures in different ambient
///   dimensions.
/// - [`SolverError::EmptyMeasure`] when either total mass is zero.
///
/// # Panics
///
/// Panics if `epsilon ≤ 0`.
pub fn solve_entropic(
    mu0: &DiscreteMeasure,
    mu1: &DiscreteMeasure,
    epsilon: f64,
    max_iters: usize,
    tol: f64,
) -> Result<TransportPlan, SolverError> {
    solve_inner(mu0, mu1, epsilon, max_iters, tol, None).map(|(plan, _)| plan)
}

/// [`solve_entropic`] that additionally records the unregularized primal
/// objective at the initial plan and after every iteration — the hook for
/// verifying that the scaling updates do not increase the true objective.
///
/// Tracing materializes the full coupling each iteration; reserve it for
/// small diagnostic instances.
///
/// # Errors
///
/// As for [`solve_entropic`].
pub fn solve_entropic_with_trace(
    mu0: &DiscreteMeasure,
    mu1: &DiscreteMeasure,
    epsilon: f64,
    max_iters: usize,
    tol: f64,
) -> Result<(TransportPlan, Vec<f64>), SolverError> {
    let mut trace = Vec::new();
    let (plan, _) = solve_inner(mu0, mu1, epsilon, max_iters, tol, Some(&mut trace))?;
    Ok((plan, trace))
}

/// Stable `log Σ exp(termᵢ)` over an iterator of log terms (−∞ allowed).
fn log_sum_exp(terms: impl Iterator<Item = f64> + Clone) -> f64 {
    let shift = terms.clone().fold(f64::NEG_INFINITY, f64::max);
    if shift == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    shift + math::ln(terms.map(|t| math::exp(t - shift)).sum())
}

#[allow(clippy::too_many_lines)]
fn solve_inner(
    mu0: &DiscreteMeasure,
    mu1: &DiscreteMeasure,
    epsilon: f64,
    max_iters: usize,
    tol: f64,
    mut trace: Option<&mut Vec<f64>>,
) -> Result<(TransportPlan, ()), SolverError> {
    assert!(epsilon > 0.0 && epsilon.is_finite(), "regularization must be positive, got {epsilon}");
    if mu0.dim() != mu1.dim() {
        return Err(SolverError::DimensionMismatch { source_dim: mu0.dim(), target_dim: mu1.dim() });
    }
    let source_mass = mu0.total_mass();
    if source_mass.is_nan() || source_mass <= 0.0 {
        return Err(SolverError::EmptyMeasure { side: SolverSide::Source });
    }
    let target_mass = mu1.total_mass();
    if target_mass.is_nan() || target_mass <= 0.0 {
        return Err(SolverError::EmptyMeasure { side: SolverSide::Target });
    }

    let dim = mu0.dim();
    let src = prune(mu0);
    let tgt = prune(mu1);
    let (ns, nt) = (src.weights.len(), tgt.weights.len());
    let pruned_mass = (mu0.total_mass() - src.weights.iter().sum::<f64>())
        + (mu1.total_mass() - tgt.weights.iter().sum::<f64>());

    // Log Gibbs kernel on the active supports.
    let mut log_k = Vec::with_capacity(ns * nt);
    for i in 0..ns {
        let xi = &src.coords[i * dim..(i + 1) * dim];
        for j in 0..nt {
            let yj = &tgt.coords[j * dim..(j + 1) * dim];
            log_k.push(log_kernel(vecn::dist(xi, yj), epsilon));
        }
    }

    // Rows/columns with an identically zero kernel can never carry mass;
    // freeze their scaling at log 1 = 0.
    let row_alive: Vec<bool> =
        (0..ns).map(|i| log_k[i * nt..(i + 1) * nt].iter().any(|&v| v > f64::NEG_INFINITY)).collect();
    let col_alive: Vec<bool> =
        (0..nt).map(|j| (0..ns).any(|i| log_k[i * nt + j] > f64::NEG_INFINITY)).collect();

    // Absorbed kernel K̂ = exp(U + V + log K) together with the multiplicative
    // remainders å = exp(log a − U), b̊ = exp(log b − V); total log scalings
    // are log a and log b. Absorption (refreshing U, V and rebuilding K̂) runs
    // after each half-update as soon as a remainder's log magnitude passes
    // the threshold, so the remainders stay representable by construction.
    let ln_mu: Vec<f64> = src.weights.iter().map(|&w| math::ln(w)).collect();
    let ln_nu: Vec<f64> = tgt.weights.iter().map(|&w| math::ln(w)).collect();
    let mut k_hat: Vec<f64> = log_k.iter().map(|&v| math::exp(v)).collect();
    let mut absorbed_u = alloc::vec![0.0; ns];
    let mut absorbed_v = alloc::vec![0.0; nt];
    let mut a_rem = alloc::vec![1.0; ns];
    let mut b_rem = alloc::vec![1.0; nt];
    let mut log_a = alloc::vec![0.0; ns];
    let mut log_b = alloc::vec![0.0; nt];

    let rebuild = |k_hat: &mut [f64], u: &[f64], v: &[f64]| {
        for i in 0..ns {
            for j in 0..nt {
                k_hat[i * nt + j] = math::exp(u[i] + v[j] + log_k[i * nt + j]);
            }
        }
    };

    if let Some(t) = trace.as_deref_mut() {
        let eta = materialize(&log_a, &log_b, &log_k, &src, &tgt);
        t.push(primal_objective(&eta, &log_k, epsilon, &src, &tgt, pruned_mass));
    }

    let damp = 1.0 / (1.0 + epsilon);
    let mut residual = f64::INFINITY;
    let mut converged = false;
    let mut iterations = 0;
    let mut scratch = alloc::vec![0.0; ns.max(nt)];

    for _ in 0..max_iters {
        let mut step = 0.0_f64;

        // Source half-update: log a ← −(1/(1+ε))·log Σⱼ Kᵢⱼ νⱼ bⱼ.
        for (j, s) in scratch[..nt].iter_mut().enumerate() {
            *s = tgt.weights[j] * b_rem[j];
        }
        for i in 0..ns {
            if !row_alive[i] {
                continue;
            }
            let row = &k_hat[i * nt..(i + 1) * nt];
            let sum: f64 = row.iter().zip(&scratch[..nt]).map(|(k, t)| k * t).sum();
            // The absorbed U cancels from the true log marginal sum. When the
            // absorbed kernel row underflows entirely (early iterations at
            // small ε), fall back to an exact log-sum-exp of the totals.
            let log_sum = if sum > 0.0 {
                math::ln(sum) - absorbed_u[i]
            } else {
                log_sum_exp((0..nt).map(|j| log_k[i * nt + j] + ln_nu[j] + log_b[j]))
            };
            let new_log_a = -log_sum * damp;
            step = step.max((new_log_a - log_a[i]).abs());
            log_a[i] = new_log_a;
        }
        let drift = log_a.iter().zip(&absorbed_u).fold(0.0_f64, |m, (l, u)| m.max((l - u).abs()));
        if drift > ABSORB_THRESHOLD {
            absorbed_u.copy_from_slice(&log_a);
            rebuild(&mut k_hat, &absorbed_u, &absorbed_v);
        }
        for i in 0..ns {
            a_rem[i] = math::exp(log_a[i] - absorbed_u[i]);
        }

        // Target half-update with the fresh source scalings.
        for (i, s) in scratch[..ns].iter_mut().enumerate() {
            *s = src.weights[i] * a_rem[i];
        }
        for j in 0..nt {
            if !col_alive[j] {
                continue;
            }
            let sum: f64 = (0..ns).map(|i| k_hat[i * nt + j] * scratch[i]).sum();
            let log_sum = if sum > 0.0 {
                math::ln(sum) - absorbed_v[j]
            } else {
                log_sum_exp((0..ns).map(|i| log_k[i * nt + j] + ln_mu[i] + log_a[i]))
            };
            let new_log_b = -log_sum * damp;
            step = step.max((new_log_b - log_b[j]).abs());
            log_b[j] = new_log_b;
        }
        let drift = log_b.iter().zip(&absorbed_v).fold(0.0_f64, |m, (l, v)| m.max((l - v).abs()));
        if drift > ABSORB_THRESHOLD {
            absorbed_v.copy_from_slice(&log_b);
            rebuild(&mut k_hat, &absorbed_u, &absorbed_v);
        }
        for j in 0..nt {
            b_rem[j] = math::exp(log_b[j] - absorbed_v[j]);
        }

        iterations += 1;
        residual = step;

        if let Some(t) = trace.as_deref_mut() {
            let eta = materialize(&log_a, &log_b, &log_k, &src, &tgt);
            t.push(primal_objective(&eta, &log_k, epsilon, &src, &tgt, pruned_mass));
        }

        if residual < tol {
            converged = true;
            break;
        }
    }

    let eta = materialize(&log_a, &log_b, &log_k, &src, &tgt);
    let objective = primal_objective(&eta, &log_k, epsilon, &src, &tgt, pruned_mass);

    Ok((
        TransportPlan {
            eta,
            log_k,
            log_a,
            log_b,
            source_support: src.indices,
            target_support: tgt.indices,
            source_len: mu0.len(),
            target_len: mu1.len(),
            dim,
            epsilon,
            iterations,
            converged,
            residual,
            objective,
        },
        (),
    ))
}

/// Default regularization for a pair of measures:
/// `10⁻³ × (diameter of the joint positive support)²`, the diameter measured
/// as the bounding-box diagonal.
///
/// # Panics
///
/// Panics if the joint support is empty or a single point (no finite scale
/// to set).
pub fn default_epsilon(mu0: &DiscreteMeasure, mu1: &DiscreteMeasure) -> f64 {
    assert_eq!(mu0.dim(), mu1.dim(), "measures must share an ambient dimension");
    let dim = mu0.dim();
    let mut lo = alloc::vec![f64::INFINITY; dim];
    let mut hi = alloc::vec![f64::NEG_INFINITY; dim];
    for mu in [mu0, mu1] {
        for (x, w) in mu.iter() {
            if w > 0.0 {
                for k in 0..dim {
                    lo[k] = lo[k].min(x[k]);
                    hi[k] = hi[k].max(x[k]);
                }
            }
        }
    }
    let diag2: f64 = lo.iter().zip(&hi).map(|(a, b)| (b - a) * (b - a)).sum();
    assert!(diag2 > 0.0, "joint support has no positive extent");
    1e-3 * diag2
}

/// Square root of the plan's unregularized primal objective against the
/// measures it was solved for — the distance estimate.
///
/// # Errors
///
/// [`SolverError::ShapeMismatch`] when the measures' sizes do not match the
/// plan.
pub fn wfr_distance(plan: &TransportPlan, mu0: &DiscreteMeasure, mu1: &DiscreteMeasure) -> Result<f64, SolverError> {
    check_shape(plan, mu0.len(), mu1.len())?;
    let nt = plan.target_support.len();
    let mut transport = 0.0;
    for i in 0..plan.source_support.len() {
        for j in 0..nt {
            let w = plan.eta[i * nt + j];
            if w > 0.0 {
                transport += w * (-plan.epsilon * plan.log_k[i * nt + j]);
            }
        }
    }
    let row = plan.source_marginal();
    let col = plan.target_marginal();
    let obj = kl_divergence(&row, mu0.weights()) + kl_divergence(&col, mu1.weights()) + transport;
    // Tiny negative round-off is possible for near-identical measures.
    Ok(math::sqrt(obj.max(0.0)))
}

fn check_shape(plan: &TransportPlan, n0: usize, n1: usize) -> Result<(), SolverError> {
    if plan.source_len != n0 || plan.target_len != n1 {
        return Err(SolverError::ShapeMismatch {
            plan_source: plan.source_len,
            plan_target: plan.target_len,
            got_source: n0,
            got_target: n1,
        });
    }
    Ok(())
}

/// Barycentric map `T(xᵢ) = Σⱼ ηᵢⱼ·yⱼ / Σⱼ ηᵢⱼ` for every active source row,
/// returned as a flat row-major buffer aligned with
/// [`TransportPlan::source_support`].
///
/// # Errors
///
/// - [`SolverError::ShapeMismatch`] when `target` does not match the plan.
/// - [`SolverError::DanglingSource`] when an active row carries no mass
///   (reported with the *original* source index).
pub fn barycentric_map(plan: &TransportPlan, target: &DiscreteMeasure) -> Result<Vec<f64>, SolverError> {
    check_shape(plan, plan.source_len, target.len())?;
    let (d, nt) = (plan.dim, plan.target_support.len());
    let mut out = alloc::vec![0.0; plan.source_support.len() * d];
    for (row, &orig) in plan.source_support.iter().enumerate() {
        let mut mass = 0.0;
        let pos = &mut out[row * d..(row + 1) * d];
        for (col, &tgt_orig) in plan.target_support.iter().enumerate() {
            let w = plan.eta[row * nt + col];
            if w > 0.0 {
                mass += w;
                vecn::axpy_in(pos, w, target.point(tgt_orig));
            }
        }
        if mass <= 0.0 {
            return Err(SolverError::DanglingSource { row: orig });
        }
        vecn::scale_in(pos, 1.0 / mass);
    }
    Ok(out)
}

/// Out-of-sample barycentric map: the entropic conditional expectation at an
/// arbitrary query position,
///
/// ```text
/// T(q) = Σⱼ wⱼ·yⱼ / Σⱼ wⱼ,    wⱼ ∝ νⱼ·exp(log bⱼ − c(q, yⱼ)/ε),
/// ```
///
/// stabilized by shifting out the largest log weight. At a source support
/// point this reproduces the row barycenter of [`barycentric_map`] exactly
/// (the source scaling is a common factor of all weights).
///
/// # Errors
///
/// - [`SolverError::ShapeMismatch`] when `target` does not match the plan.
/// - [`SolverError::QueryOutOfRange`] when every target support point is
///   ≥ π/2 away from `query`.
///
/// # Panics
///
/// Panics if `query` has the wrong dimension.
pub fn map_extend(plan: &TransportPlan, target: &DiscreteMeasure, query: &[f64]) -> Result<Vec<f64>, SolverError> {
    check_shape(plan, plan.source_len, target.len())?;
    assert_eq!(query.len(), plan.dim, "query dimension mismatch");

    // Log weights up to a common shift.
    let mut log_w = Vec::with_capacity(plan.target_support.len());
    let mut shift = f64::NEG_INFINITY;
    for (col, &orig) in plan.target_support.iter().enumerate() {
        let lw = plan.log_b[col] + log_kernel(vecn::dist(query, target.point(orig)), plan.epsilon);
        log_w.push(lw);
        shift = shift.max(lw);
    }
    if shift == f64::NEG_INFINITY {
        return Err(SolverError::QueryOutOfRange);
    }

    let mut mass = 0.0;
    let mut pos = alloc::vec![0.0; plan.dim];
    for (col, &orig) in plan.target_support.iter().enumerate() {
        let w = target.weight(orig) * math::exp(log_w[col] - shift);
        if w > 0.0 {
            mass += w;
            vecn::axpy_in(&mut pos, w, target.point(orig));
        }
    }
    if mass <= 0.0 {
        return Err(SolverError::QueryOutOfRange);
    }
    vecn::scale_in(&mut pos, 1.0 / mass);
    Ok(pos)
}

/// Kernel-smoothed average of per-support-point values at an arbitrary
/// query position, with the entropic weights of [`map_extend`]:
///
/// ```text
/// f(q) = Σₖ wₖ·valuesₖ / Σₖ wₖ,    wₖ ∝ μₖ·exp(log scalingₖ − c(q, xₖ)/ε)
/// ```
///
/// over the support points of `measure` on the chosen `side` of the plan
/// (target side uses exactly the [`map_extend`] weights; source side the
/// mirrored ones). `values` is indexed by original support index, the
/// layout of [`DensityRatio::values`]. At a support point of the side
/// measure the average concentrates on the entropic neighbourhood of that
/// point; a constant `values` vector is reproduced exactly.
///
/// # Errors
///
/// - [`SolverError::ShapeMismatch`] when `measure` or `values` does not
///   match the plan's side.
/// - [`SolverError::QueryOutOfRange`] when every support point is ≥ π/2
///   away from `query` or no weight survives.
///
/// # Panics
///
/// Panics if `query` has the wrong dimension.
pub fn kernel_smooth(
    plan: &TransportPlan,
    measure: &DiscreteMeasure,
    side: SolverSide,
    query: &[f64],
    values: &[f64],
) -> Result<f64, SolverError> {
    let (support, log_scaling, expect) = match side {
        SolverSide::Source => (&plan.source_support, &plan.log_a, plan.source_len),
        SolverSide::Target => (&plan.target_support, &plan.log_b, plan.target_len),
    };
    if measure.len() != expect || values.len() != expect {
        return Err(SolverError::ShapeMismatch {
            plan_source: plan.source_len,
            plan_target: plan.target_len,
            got_source: if side == SolverSide::Source { measure.len() } else { plan.source_len },
            got_target: if side == SolverSide::Target { measure.len() } else { plan.target_len },
        });
    }
    assert_eq!(query.len(), plan.dim, "query dimension mismatch");

    let mut log_w = Vec::with_capacity(support.len());
    let mut shift = f64::NEG_INFINITY;
    for (k, &orig) in support.iter().enumerate() {
        let lw =
            log_scaling[k] + log_kernel(vecn::dist(query, measure.point(orig)), plan.epsilon);
        log_w.push(lw);
        shift = shift.max(lw);
    }
    if shift == f64::NEG_INFINITY {
        return Err(SolverError::QueryOutOfRange);
    }

    let mut mass = 0.0;
    let mut acc = 0.0;
    for (k, &orig) in support.iter().enumerate() {
        let w = measure.weight(orig) * math::exp(log_w[k] - shift);
        if w > 0.0 {
            mass += w;
            acc += w * values[orig];
        }
    }
    if mass <= 0.0 {
        return Err(SolverError::QueryOutOfRange);
    }
    Ok(acc / mass)
}

/// Density ratio of one marginal: `σ` with `μ = σ·η_marginal + μ^⊥`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityRatio {
    /// Ratio `σ(x_k) = μ_k / η_k` per original support point; 0 where the
    /// plan marginal vanishes.
    pub values: Vec<f64>,
    /// Indices carrying μ-mass that the plan marginal misses entirely (the
    /// singular part μ^⊥).
    pub singular: Vec<usize>,
}

/// Computes the density ratio `σ = dμ/d(η marginal)` on one side of a plan.
///
/// σ is defined so that `Σ σₖ·ηₖ` recovers the μ-mass of the absolutely
/// continuous part exactly. When the distances between mass scales matter
/// (they do in the spline pipeline), rescale the plan to unit total mass
/// first — σ simply scales inversely with the plan.
///
/// # Errors
///
/// [`SolverError::ShapeMismatch`] when `mu`'s size does not match the plan's
/// side.
pub fn density_ratio(plan: &TransportPlan, mu: &DiscreteMeasure, side: SolverSide) -> Result<DensityRatio, SolverError> {
    let (marginal, expect) = match side {
        SolverSide::Source => (plan.source_marginal(), plan.source_len),
        SolverSide::Target => (plan.target_marginal(), plan.target_len),
    };
    if mu.len() != expect {
        return Err(SolverError::ShapeMismatch {
            plan_source: plan.source_len,
            plan_target: plan.target_len,
            got_source: if side == SolverSide::Source { mu.len() } else { plan.source_len },
            got_target: if side == SolverSide::Target { mu.len() } else { plan.target_len },
        });
    }
    let mut values = alloc::vec![0.0; expect];
    let mut singular = Vec::new();
    for k in 0..expect {
        if marginal[k] > 0.0 {
            values[k] = mu.weight(k) / marginal[k];
        } else if mu.weight(k) > 0.0 {
            singular.push(k);
        }
    }
    Ok(DensityRatio { values, singular })
}
