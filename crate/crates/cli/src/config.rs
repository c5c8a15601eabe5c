//! Scenario files: the JSON schema, semantic validation, and conversion into
//! core measure types.
//!
//! A scenario is a single JSON object:
//!
//! ```json
//! {
//!   "name": "two-blocks",
//!   "dimension": 1,
//!   "seed": 7,
//!   "output": "out/two-blocks",
//!   "measure": {
//!     "plus":  { "densities": [ { "lo": [-2.0], "hi": [2.0], "resolution": [2000], "uniform": 1.0 } ] },
//!     "minus": { "densities": [ { "lo": [-0.25], "hi": [0.25], "resolution": [500], "uniform": 4.0 } ] }
//!   },
//!   "task": { "type": "solve_k", "k": 2 }
//! }
//! ```
//!
//! Every scenario carries an explicit seed; nothing is ever seeded from the
//! clock.  Unknown fields are rejected so typos surface as config errors
//! with a line number instead of silently-ignored settings.

use serde::{Deserialize, Serialize};
use siglo_core::measure::{Atom, GridBox, GriddedDensity, MeasureComponent};
use siglo_core::solve_k::GridSpec;
use siglo_core::SignedMeasure;

use crate::CliError;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub dimension: usize,
    pub seed: u64,
    /// Output directory; defaults to `siglo-out/<name>`.
    #[serde(default)]
    pub output: Option<String>,
    #[serde(default)]
    pub measure: Option<MeasureSpec>,
    pub task: TaskSpec,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureSpec {
    #[serde(default)]
    pub plus: ComponentSpec,
    #[serde(default)]
    pub minus: ComponentSpec,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentSpec {
    #[serde(default)]
    pub atoms: Vec<AtomSpec>,
    #[serde(default)]
    pub densities: Vec<DensitySpec>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomSpec {
    pub location: Vec<f64>,
    pub weight: f64,
}

/// A box-supported density on a uniform grid.  Exactly one of `uniform`
/// (constant value) and `values` (row-major cell values, last axis fastest)
/// must be present.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensitySpec {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub resolution: Vec<usize>,
    #[serde(default)]
    pub uniform: Option<f64>,
    #[serde(default)]
    pub values: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BallSpec {
    pub center: Vec<f64>,
    pub radius: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpecConfig {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub per_axis: Vec<usize>,
}

impl GridSpecConfig {
    pub fn to_core(&self) -> GridSpec {
        GridSpec { lo: self.lo.clone(), hi: self.hi.clone(), per_axis: self.per_axis.clone() }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum TaskSpec {
    /// Best `k` sites for the signed measure.  With `candidates` present the
    /// minimum is exact over all subsets of the listed points; otherwise the
    /// multistart descent runs with the given (or default) solver knobs.
    SolveK {
        k: usize,
        #[serde(default)]
        restarts: Option<usize>,
        #[serde(default)]
        max_iters: Option<usize>,
        #[serde(default)]
        init_step: Option<f64>,
        #[serde(default)]
        step_decay: Option<f64>,
        #[serde(default)]
        tol: Option<f64>,
        #[serde(default)]
        candidate_grid: Option<GridSpecConfig>,
        #[serde(default)]
        candidates: Option<Vec<Vec<f64>>>,
    },
    /// Optimize ball radii around the repulsion atoms and report the
    /// first-order optimality certificates for the resulting region.
    Region {
        #[serde(default)]
        init_radius: Option<f64>,
        #[serde(default)]
        mesh: Option<f64>,
        #[serde(default)]
        max_iters: Option<usize>,
        /// Quadrature refinement step for the certificate stage; defaults to
        /// the coarsest native cell side (no refinement).
        #[serde(default)]
        cert_mesh: Option<f64>,
    },
    /// Quantization coefficient estimate for the scenario dimension.
    Theta {
        k: usize,
        #[serde(default)]
        restarts: Option<usize>,
        #[serde(default)]
        grid_res: Option<usize>,
    },
    /// Asymptotic placement density on the complement of the given balls
    /// (all of space when `balls` is empty), written to density.csv.
    Density {
        #[serde(default)]
        balls: Vec<BallSpec>,
    },
    /// Solver sweep over a strictly increasing `k` schedule, compared
    /// against the region spanned by `balls` and its limit density.
    Converge {
        schedule: Vec<usize>,
        balls: Vec<BallSpec>,
        #[serde(default)]
        restarts: Option<usize>,
        #[serde(default)]
        max_iters: Option<usize>,
        #[serde(default)]
        init_step: Option<f64>,
        #[serde(default)]
        step_decay: Option<f64>,
        #[serde(default)]
        tol: Option<f64>,
        #[serde(default)]
        candidate_grid: Option<GridSpecConfig>,
        /// Override for the quantization coefficient used in the limit
        /// value; required in dimension 3, where no closed form is known.
        #[serde(default)]
        theta: Option<f64>,
    },
    /// Full invariant suite plus the acceptance battery.
    Validate {
        #[serde(default)]
        trials: Option<usize>,
    },
    /// One of the built-in scenarios by name.
    Example { name: String },
}

impl TaskSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            TaskSpec::SolveK { .. } => "solve_k",
            TaskSpec::Region { .. } => "region",
            TaskSpec::Theta { .. } => "theta",
            TaskSpec::Density { .. } => "density",
            TaskSpec::Converge { .. } => "converge",
            TaskSpec::Validate { .. } => "validate",
            TaskSpec::Example { .. } => "example",
        }
    }
}

/// Parses and semantically validates a scenario file.  Parse failures keep
/// serde's line/column anchor; semantic failures name the offending field.
pub fn load_scenario(path: &std::path::Path) -> Result<Scenario, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Invalid(format!("cannot read config {}: {e}", path.display())))?;
    let scenario: Scenario = serde_json::from_str(&text)
        .map_err(|e| CliError::Invalid(format!("invalid config {}: {e}", path.display())))?;
    check_scenario(&scenario)?;
    Ok(scenario)
}

fn invalid(msg: String) -> CliError {
    CliError::Invalid(msg)
}

fn check_scenario(s: &Scenario) -> Result<(), CliError> {
    if !(1..=3).contains(&s.dimension) {
        return Err(invalid(format!("dimension must be 1, 2, or 3, got {}", s.dimension)));
    }
    if s.name.is_empty()
        || !s.name.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'))
    {
        return Err(invalid(format!(
            "name must be non-empty and use only [A-Za-z0-9._-], got {:?}",
            s.name
        )));
    }
    if let Some(m) = &s.measure {
        check_component(&m.plus, s.dimension, "measure.plus")?;
        check_component(&m.minus, s.dimension, "measure.minus")?;
    }
    check_task(s)?;
    Ok(())
}

fn check_component(c: &ComponentSpec, dim: usize, path: &str) -> Result<(), CliError> {
    for (i, a) in c.atoms.iter().enumerate() {
        if a.location.len() != dim {
            return Err(invalid(format!(
                "{path}.atoms[{i}]: location has {} coordinates, scenario dimension is {dim}",
                a.location.len()
            )));
        }
        if !(a.weight > 0.0 && a.weight.is_finite()) {
            return Err(invalid(format!(
                "{path}.atoms[{i}]: weight must be strictly positive and finite, got {}",
                a.weight
            )));
        }
    }
    for (i, d) in c.densities.iter().enumerate() {
        let p = format!("{path}.densities[{i}]");
        if d.lo.len() != dim || d.hi.len() != dim || d.resolution.len() != dim {
            return Err(invalid(format!("{p}: lo/hi/resolution must all have length {dim}")));
        }
        match (&d.uniform, &d.values) {
            (Some(_), Some(_)) | (None, None) => {
                return Err(invalid(format!("{p}: give exactly one of `uniform` and `values`")));
            }
            (Some(u), None) if !(u.is_finite() && *u >= 0.0) => {
                return Err(invalid(format!("{p}: uniform value must be nonnegative, got {u}")));
            }
            _ => {}
        }
        if let Some(vs) = &d.values {
            let cells: usize = d.resolution.iter().product();
            if vs.len() != cells {
                return Err(invalid(format!(
                    "{p}: {} values for {} grid cells",
                    vs.len(),
                    cells
                )));
            }
        }
    }
    Ok(())
}

fn check_task(s: &Scenario) -> Result<(), CliError> {
    let dim = s.dimension;
    let check_balls = |balls: &[BallSpec], path: &str| -> Result<(), CliError> {
        for (i, b) in balls.iter().enumerate() {
            if b.center.len() != dim {
                return Err(invalid(format!(
                    "{path}[{i}]: center has {} coordinates, scenario dimension is {dim}",
                    b.center.len()
                )));
            }
            if !(b.radius > 0.0 && b.radius.is_finite()) {
                return Err(invalid(format!(
                    "{path}[{i}]: radius must be strictly positive, got {}",
                    b.radius
                )));
            }
        }
        Ok(())
    };
    let check_grid = |g: &Option<GridSpecConfig>, path: &str| -> Result<(), CliError> {
        if let Some(g) = g {
            if g.lo.len() != dim || g.hi.len() != dim || g.per_axis.len() != dim {
                return Err(invalid(format!("{path}: lo/hi/per_axis must all have length {dim}")));
            }
            if g.per_axis.iter().any(|&r| r == 0) {
                return Err(invalid(format!("{path}: per_axis entries must be positive")));
            }
        }
        Ok(())
    };
    match &s.task {
        TaskSpec::SolveK { k, candidate_grid, candidates, .. } => {
            if *k < 1 {
                return Err(invalid("task.k must be at least 1".into()));
            }
            check_grid(candidate_grid, "task.candidate_grid")?;
            if let Some(cands) = candidates {
                if cands.is_empty() {
                    return Err(invalid("task.candidates must be non-empty when present".into()));
                }
                for (i, p) in cands.iter().enumerate() {
                    if p.len() != dim {
                        return Err(invalid(format!(
                            "task.candidates[{i}] has {} coordinates, scenario dimension is {dim}",
                            p.len()
                        )));
                    }
                }
            }
            require_measure(s)?;
        }
        TaskSpec::Region { mesh, cert_mesh, .. } => {
            for (label, m) in [("mesh", mesh), ("cert_mesh", cert_mesh)] {
                if let Some(m) = m {
                    if !(*m > 0.0 && m.is_finite()) {
                        return Err(invalid(format!("task.{label} must be positive, got {m}")));
                    }
                }
            }
            require_measure(s)?;
        }
        TaskSpec::Theta { k, .. } => {
            if *k < 1 {
                return Err(invalid("task.k must be at least 1".into()));
            }
        }
        TaskSpec::Density { balls } => {
            check_balls(balls, "task.balls")?;
            require_measure(s)?;
        }
        TaskSpec::Converge { schedule, balls, candidate_grid, theta, .. } => {
            if schedule.is_empty() || schedule.windows(2).any(|w| w[1] <= w[0]) {
                return Err(invalid(
                    "task.schedule must be non-empty and strictly increasing".into(),
                ));
            }
            if balls.is_empty() {
                return Err(invalid("task.balls must list at least one ball".into()));
            }
            check_balls(balls, "task.balls")?;
            check_grid(candidate_grid, "task.candidate_grid")?;
            if dim == 3 && theta.is_none() {
                return Err(invalid(
                    "task.theta is required in dimension 3 (no closed-form coefficient)".into(),
                ));
            }
            require_measure(s)?;
        }
        TaskSpec::Validate { .. } => {}
        TaskSpec::Example { name } => {
            if crate::examples::lookup(name).is_none() {
                return Err(invalid(format!(
                    "unknown example {name:?}; available: {}",
                    crate::examples::NAMES.join(", ")
                )));
            }
        }
    }
    Ok(())
}

fn require_measure(s: &Scenario) -> Result<(), CliError> {
    match &s.measure {
        Some(m) if !(m.plus.atoms.is_empty() && m.plus.densities.is_empty()) => Ok(()),
        _ => Err(invalid(format!(
            "task {:?} needs a measure with a non-empty plus component",
            s.task.kind()
        ))),
    }
}

/// Builds the signed measure a scenario describes.  Assumes
/// [`load_scenario`]-level checks already passed; core constructors catch
/// anything that slipped through (non-finite coordinates, bad boxes).
pub fn build_measure(spec: &MeasureSpec, dim: usize) -> Result<SignedMeasure, CliError> {
    let build = |c: &ComponentSpec, path: &str| -> Result<MeasureComponent, CliError> {
        let mut atoms = Vec::with_capacity(c.atoms.len());
        for (i, a) in c.atoms.iter().enumerate() {
            atoms.push(
                Atom::new(a.location.clone(), a.weight)
                    .map_err(|e| invalid(format!("{path}.atoms[{i}]: {e}")))?,
            );
        }
        let mut comp = MeasureComponent::from_atoms(atoms);
        for (i, d) in c.densities.iter().enumerate() {
            let p = format!("{path}.densities[{i}]");
            let bounds = GridBox::new(d.lo.clone(), d.hi.clone())
                .map_err(|e| invalid(format!("{p}: {e}")))?;
            let density = match (&d.uniform, &d.values) {
                (Some(u), None) => GriddedDensity::uniform(bounds, d.resolution.clone(), *u),
                (None, Some(vs)) => GriddedDensity::new(bounds, d.resolution.clone(), vs.clone()),
                _ => unreachable!("checked in load_scenario"),
            }
            .map_err(|e| invalid(format!("{p}: {e}")))?;
            comp.densities.push(density);
        }
        Ok(comp)
    };
    let plus = build(&spec.plus, "measure.plus")?;
    let minus = build(&spec.minus, "measure.minus")?;
    SignedMeasure::new(plus, minus, dim).map_err(|e| invalid(format!("measure: {e}")))
}
