//! Run configuration: the JSON config file schema, flag-level overrides,
//! and validation shared by every subcommand.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use wfr_spline_core::measure::Grid;
use wfr_spline_core::pipeline::{InteriorMarginalRule, MassRule, PipelineOptions};

use crate::CliError;

/// A uniform-grid specification: a box `[lo, hi]` per axis, with a per-axis
/// resolution. One or two axes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    /// Lower corner, one entry per axis.
    pub lo: Vec<f64>,
    /// Upper corner, one entry per axis.
    pub hi: Vec<f64>,
    /// Cells per axis.
    pub n: Vec<usize>,
}

impl GridSpec {
    /// Checks the box is well-formed: one or two axes, matching lengths,
    /// finite `lo < hi`, and at least two cells per axis.
    pub fn validate(&self) -> Result<(), CliError> {
        let d = self.lo.len();
        if !(1..=2).contains(&d) || self.hi.len() != d || self.n.len() != d {
            return Err(CliError::Input(format!(
                "grid spec needs 1 or 2 axes with equal-length lo/hi/n, got {}/{}/{}",
                self.lo.len(),
                self.hi.len(),
                self.n.len()
            )));
        }
        for k in 0..d {
            if !(self.lo[k].is_finite() && self.hi[k].is_finite() && self.lo[k] < self.hi[k]) {
                return Err(CliError::Input(format!(
                    "grid axis {k} has degenerate bounds [{}, {}]",
                    self.lo[k], self.hi[k]
                )));
            }
            if self.n[k] < 2 {
                return Err(CliError::Input(format!(
                    "grid axis {k} needs a resolution of at least 2, got {}",
                    self.n[k]
                )));
            }
        }
        Ok(())
    }

    /// Materializes the grid. Call [`GridSpec::validate`] first.
    pub fn build(&self) -> Grid {
        Grid::uniform(&self.lo, &self.hi, &self.n)
    }
}

/// Uniform support subsampling applied to generated preset measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubsampleSpec {
    /// Points to draw per measure.
    pub count: usize,
    /// RNG seed; runs are deterministic in it.
    #[serde(default)]
    pub seed: u64,
}

/// How particles receive their mass coordinate at each knot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
pub enum MassAssignment {
    /// Square root of the density ratio between the knot measure and the
    /// coupling marginal (the default; exact bookkeeping at the knots).
    #[serde(rename = "sigma")]
    Sigma,
    /// Square root of the raw knot weight, leaving particle weights at 1.
    #[serde(rename = "sqrt-mu")]
    SqrtMu,
}

impl MassAssignment {
    /// The core pipeline rule this selects.
    pub fn to_core(self) -> MassRule {
        match self {
            MassAssignment::Sigma => MassRule::MarginalRatio,
            MassAssignment::SqrtMu => MassRule::RootWeight,
        }
    }
}

/// Which coupling supplies an interior knot's mass table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
pub enum InteriorRule {
    /// The coupling leaving the knot (the default).
    #[serde(rename = "forward")]
    Forward,
    /// Mean of the couplings entering and leaving the knot.
    #[serde(rename = "average")]
    Average,
}

impl InteriorRule {
    /// The core pipeline rule this selects.
    pub fn to_core(self) -> InteriorMarginalRule {
        match self {
            InteriorRule::Forward => InteriorMarginalRule::Forward,
            InteriorRule::Average => InteriorMarginalRule::Average,
        }
    }
}

/// Full configuration of a run, loadable from a JSON file (`--config`) with
/// individual flags overriding fields.
///
/// Every field has a default, so a config file may state only what it
/// changes. Unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// Measure CSV paths, one per knot.
    pub measures: Vec<PathBuf>,
    /// Knot times, one per measure, strictly increasing.
    pub times: Vec<f64>,
    /// Entropic regularization; defaults to 10⁻³ times the squared support
    /// bounding-box diagonal when absent.
    pub epsilon: Option<f64>,
    /// Solver iteration cap.
    pub max_iters: usize,
    /// Solver stopping tolerance on the marginal residual.
    pub tol: f64,
    /// Curve samples per knot segment (the closing knot is added once).
    pub samples_per_segment: usize,
    /// Feasibility margin for the position shrink and velocity damping.
    pub margin: f64,
    /// Forced position shrink; computed from the trajectories when absent.
    pub space_scale: Option<f64>,
    /// Forced velocity damping; computed from the trajectories when absent.
    pub time_scale: Option<f64>,
    /// Kernel width for preset measure generation.
    pub sigma: Option<f64>,
    /// Grid for preset measure generation.
    pub grid: Option<GridSpec>,
    /// Uniform support subsampling for preset measures.
    pub subsample: Option<SubsampleSpec>,
    /// Particle mass-coordinate rule.
    pub mass_rule: MassAssignment,
    /// Interior knot mass-table rule.
    pub interior_marginal: InteriorRule,
    /// Output directory.
    pub output: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            measures: Vec::new(),
            times: Vec::new(),
            epsilon: None,
            // The damped scaling iteration needs O(ln(1/tol)/ε) rounds; the
            // built-in experiments land between 5·10³ and 2·10⁴ at their
            // default epsilon, so 5·10⁴ leaves real headroom without letting
            // a hopeless solve spin forever.
            max_iters: 50_000,
            tol: 1e-9,
            samples_per_segment: 40,
            margin: 0.05,
            space_scale: None,
            time_scale: None,
            sigma: None,
            grid: None,
            subsample: None,
            mass_rule: MassAssignment::Sigma,
            interior_marginal: InteriorRule::Forward,
            output: None,
        }
    }
}

impl RunConfig {
    /// Loads a config from a JSON file.
    ///
    /// # Errors
    ///
    /// [`CliError::Input`] on unreadable files, malformed JSON, or unknown
    /// keys.
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Input(format!("invalid config {}: {e}", path.display())))
    }

    /// Checks every cross-field invariant that does not need file contents:
    /// strictly increasing times matching the measure count, positive
    /// epsilon/tolerance, sane scales and margins, grid well-formedness.
    ///
    /// # Errors
    ///
    /// [`CliError::Input`] describing the first violated invariant.
    pub fn validate(&self) -> Result<(), CliError> {
        if !self.measures.is_empty() || !self.times.is_empty() {
            if self.measures.len() != self.times.len() {
                return Err(CliError::Input(format!(
                    "got {} measures but {} knot times",
                    self.measures.len(),
                    self.times.len()
                )));
            }
            if self.measures.len() < 2 {
                return Err(CliError::Input(format!(
                    "need at least two measures, got {}",
                    self.measures.len()
                )));
            }
        }
        for (i, pair) in self.times.windows(2).enumerate() {
            let ordered = pair[0].is_finite() && pair[1].is_finite() && pair[1] > pair[0];
            if !ordered {
                return Err(CliError::Input(format!(
                    "knot times must be finite and strictly increasing (offending index {})",
                    i + 1
                )));
            }
        }
        if let Some(eps) = self.epsilon {
            if !(eps > 0.0 && eps.is_finite()) {
                return Err(CliError::Input(format!("epsilon must be positive, got {eps}")));
            }
        }
        if self.max_iters == 0 {
            return Err(CliError::Input("max_iters must be at least 1".into()));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(CliError::Input(format!("tol must be positive, got {}", self.tol)));
        }
        if self.samples_per_segment == 0 {
            return Err(CliError::Input("samples_per_segment must be at least 1".into()));
        }
        if !(0.0..1.0).contains(&self.margin) {
            return Err(CliError::Input(format!(
                "margin must lie in [0, 1), got {}",
                self.margin
            )));
        }
        for (name, scale) in [("space_scale", self.space_scale), ("time_scale", self.time_scale)] {
            if let Some(s) = scale {
                if !(s > 0.0 && s.is_finite()) {
                    return Err(CliError::Input(format!(
                        "{name} must be positive and finite, got {s}"
                    )));
                }
            }
        }
        if let Some(sigma) = self.sigma {
            if !(sigma > 0.0 && sigma.is_finite()) {
                return Err(CliError::Input(format!("sigma must be positive, got {sigma}")));
            }
        }
        if let Some(grid) = &self.grid {
            grid.validate()?;
        }
        if let Some(sub) = &self.subsample {
            if sub.count == 0 {
                return Err(CliError::Input("subsample count must be at least 1".into()));
            }
        }
        Ok(())
    }

    /// The solver/pipeline options this config selects.
    pub fn pipeline_options(&self) -> PipelineOptions {
        PipelineOptions {
            epsilon: self.epsilon,
            max_iters: self.max_iters,
            tol: self.tol,
            margin: self.margin,
            interior_marginal: self.interior_marginal.to_core(),
            mass_rule: self.mass_rule.to_core(),
        }
    }
}

/// Flag-level overrides, applied on top of a config file (or the defaults).
#[derive(Debug, Clone, Default, clap::Args)]
pub struct Overrides {
    /// Entropic regularization strength.
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Solver iteration cap.
    #[arg(long)]
    pub max_iters: Option<usize>,
    /// Solver stopping tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Curve samples per knot segment.
    #[arg(long = "samples")]
    pub samples_per_segment: Option<usize>,
    /// Feasibility margin in [0, 1).
    #[arg(long)]
    pub margin: Option<f64>,
    /// Force the position shrink instead of computing it.
    #[arg(long)]
    pub space_scale: Option<f64>,
    /// Force the velocity damping instead of computing it.
    #[arg(long)]
    pub time_scale: Option<f64>,
    /// Kernel width for preset generation.
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Per-axis preset grid resolution (comma-separated).
    #[arg(long, value_delimiter = ',')]
    pub resolution: Option<Vec<usize>>,
    /// Subsample each preset measure to this many support points.
    #[arg(long)]
    pub subsample: Option<usize>,
    /// Seed for support subsampling.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Particle mass-coordinate rule.
    #[arg(long, value_enum)]
    pub mass_rule: Option<MassAssignment>,
    /// Interior knot mass-table rule.
    #[arg(long, value_enum)]
    pub interior_marginal: Option<InteriorRule>,
    /// Output directory.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

impl Overrides {
    /// Writes every present override into `config`.
    ///
    /// The grid resolution override applies to an explicit grid spec here;
    /// preset commands consult [`Overrides::resolution`] directly when they
    /// build their default grids.
    pub fn apply(&self, config: &mut RunConfig) {
        if let Some(v) = self.epsilon {
            config.epsilon = Some(v);
        }
        if let Some(v) = self.max_iters {
            config.max_iters = v;
        }
        if let Some(v) = self.tol {
            config.tol = v;
        }
        if let Some(v) = self.samples_per_segment {
            config.samples_per_segment = v;
        }
        if let Some(v) = self.margin {
            config.margin = v;
        }
        if let Some(v) = self.space_scale {
            config.space_scale = Some(v);
        }
        if let Some(v) = self.time_scale {
            config.time_scale = Some(v);
        }
        if let Some(v) = self.sigma {
            config.sigma = Some(v);
        }
        if let Some(n) = &self.resolution {
            if let Some(grid) = &mut config.grid {
                grid.n.clone_from(n);
            }
        }
        if let Some(count) = self.subsample {
            let seed = config.subsample.map(|s| s.seed).unwrap_or(0);
            config.subsample = Some(SubsampleSpec { count, seed });
        }
        if let Some(seed) = self.seed {
            if let Some(sub) = &mut config.subsample {
                sub.seed = seed;
            }
        }
        if let Some(v) = self.mass_rule {
            config.mass_rule = v;
        }
        if let Some(v) = self.interior_marginal {
            config.interior_marginal = v;
        }
        if let Some(v) = &self.output {
            config.output = Some(v.clone());
        }
    }
}
