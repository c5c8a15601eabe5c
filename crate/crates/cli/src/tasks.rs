//! Task runners: one function per task type, each producing the standard
//! file set (results.json, points.csv, density.csv, plotdata/*.csv, log.txt).

use serde::Serialize;
use serde_json::{json, Value};
use siglo_core::asymptotics::{
    convergence_report, estimate_theta, gamma_limit_value, limit_density, theta_constant,
    theta_lower_bound, ConvergenceRow, DensityField,
};
use siglo_core::objective::eval_f;
use siglo_core::region::{
    balanced_projection_residual, ball_mass, first_variation, mass_check, optimize_radii,
    separation_check,
};
use siglo_core::solve_k::{brute_force, local_search};
use siglo_core::validate::{CheckOutcome, Constants};
use siglo_core::{BallComplementRegion, PointConfig, SignedMeasure, SolveReport, SolverConfig};

use crate::config::{build_measure, BallSpec, GridSpecConfig, Scenario, TaskSpec};
use crate::output::{echo_measure, Approx, MeasureEcho, RunDir, Versions};
use crate::CliError;
use std::path::PathBuf;

#[derive(Serialize)]
pub struct ScenarioEcho {
    pub name: String,
    pub dimension: usize,
    pub seed: u64,
    pub output: String,
    pub measure: Option<MeasureEcho>,
    pub task: Value,
}

#[derive(Serialize)]
pub struct ResultsFile {
    pub name: String,
    pub task: &'static str,
    pub seed: u64,
    pub versions: Versions,
    pub scenario: ScenarioEcho,
    pub results: Value,
}

pub fn resolve_output(scenario: &Scenario, cli_override: Option<PathBuf>) -> PathBuf {
    cli_override
        .or_else(|| scenario.output.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("siglo-out").join(&scenario.name))
}

/// Refuses tasks whose minimizing configurations can escape to infinity:
/// the solvers assume the attraction mass strictly dominates.
fn require_dominant_mass(phi: &SignedMeasure) -> Result<(), CliError> {
    let (p, m) = (phi.mass_plus(), phi.mass_minus());
    if p <= m {
        return Err(CliError::Precondition(format!(
            "attraction mass must strictly dominate repulsion mass: m+ = {p} does not exceed \
             m- = {m}, so far-away configurations are at least as good as nearby ones and \
             no minimizer is guaranteed to exist"
        )));
    }
    Ok(())
}

pub fn run_scenario(scenario: &Scenario, cli_output: Option<PathBuf>) -> Result<(), CliError> {
    let out_path = resolve_output(scenario, cli_output);
    match &scenario.task {
        TaskSpec::Example { name } => crate::examples::run(name, scenario.seed, out_path),
        TaskSpec::Validate { trials } => {
            let opts = ValidateOpts {
                trials: trials.unwrap_or(1000),
                theta1: None,
                theta2: None,
                only: None,
                output: Some(out_path),
            };
            run_validate(&opts)
        }
        _ => run_measure_task(scenario, out_path),
    }
}

fn run_measure_task(scenario: &Scenario, out_path: PathBuf) -> Result<(), CliError> {
    let mut out = RunDir::create(out_path)?;
    let phi = match &scenario.measure {
        Some(spec) => Some((spec, build_measure(spec, scenario.dimension)?)),
        None => None,
    };
    out.mark("build measure");

    let (task_kind, task_echo, results) = match &scenario.task {
        TaskSpec::SolveK {
            k,
            restarts,
            max_iters,
            init_step,
            step_decay,
            tol,
            candidate_grid,
            candidates,
        } => {
            let phi = &phi.as_ref().expect("presence checked at load time").1;
            let mut cfg = SolverConfig::new(*k);
            cfg.seed = scenario.seed;
            if let Some(v) = restarts {
                cfg.restarts = *v;
            }
            if let Some(v) = max_iters {
                cfg.max_iters = *v;
            }
            if let Some(v) = init_step {
                cfg.init_step = *v;
            }
            if let Some(v) = step_decay {
                cfg.step_decay = *v;
            }
            if let Some(v) = tol {
                cfg.tol = *v;
            }
            cfg.candidate_grid = candidate_grid.as_ref().map(GridSpecConfig::to_core);
            let (echo_v, results) = solve_k_results(phi, &cfg, candidates.as_deref(), &mut out)?;
            ("solve_k", echo_v, results)
        }
        TaskSpec::Region { init_radius, mesh, max_iters, cert_mesh } => {
            let phi = &phi.as_ref().expect("presence checked at load time").1;
            let (echo_v, results) = region_results(
                phi,
                *init_radius,
                mesh.unwrap_or(1e-3),
                max_iters.unwrap_or(100),
                *cert_mesh,
                &mut out,
            )?;
            ("region", echo_v, results)
        }
        TaskSpec::Theta { k, restarts, grid_res } => {
            let restarts = restarts.unwrap_or(8);
            let grid_res = grid_res.unwrap_or(256);
            let results =
                theta_results(scenario.dimension, *k, restarts, scenario.seed, grid_res, &mut out)?;
            out.write_points(scenario.dimension, &[])?;
            out.write_density(None, scenario.dimension)?;
            let echo_v = json!({
                "type": "theta",
                "n": scenario.dimension,
                "k": k,
                "restarts": restarts,
                "grid_res": grid_res,
                "seed": scenario.seed,
            });
            ("theta", echo_v, results)
        }
        TaskSpec::Density { balls } => {
            let phi = &phi.as_ref().expect("presence checked at load time").1;
            let (echo_v, results) = density_results(phi, balls, &mut out)?;
            ("density", echo_v, results)
        }
        TaskSpec::Converge {
            schedule,
            balls,
            restarts,
            max_iters,
            init_step,
            step_decay,
            tol,
            candidate_grid,
            theta,
        } => {
            let phi = &phi.as_ref().expect("presence checked at load time").1;
            let mut cfg = SolverConfig::new(schedule[0]);
            cfg.seed = scenario.seed;
            if let Some(v) = restarts {
                cfg.restarts = *v;
            }
            if let Some(v) = max_iters {
                cfg.max_iters = *v;
            }
            if let Some(v) = init_step {
                cfg.init_step = *v;
            }
            if let Some(v) = step_decay {
                cfg.step_decay = *v;
            }
            if let Some(v) = tol {
                cfg.tol = *v;
            }
            cfg.candidate_grid = candidate_grid.as_ref().map(GridSpecConfig::to_core);
            let (echo_v, results) = converge_results(phi, schedule, balls, &cfg, *theta, &mut out)?;
            ("converge", echo_v, results)
        }
        TaskSpec::Validate { .. } | TaskSpec::Example { .. } => unreachable!("handled above"),
    };

    let file = ResultsFile {
        name: scenario.name.clone(),
        task: task_kind,
        seed: scenario.seed,
        versions: Versions::current(),
        scenario: ScenarioEcho {
            name: scenario.name.clone(),
            dimension: scenario.dimension,
            seed: scenario.seed,
            output: out.path().display().to_string(),
            measure: phi.as_ref().map(|(spec, phi)| echo_measure(spec, phi)),
            task: task_echo,
        },
        results,
    };
    out.write_results(&file)?;
    println!("wrote {}", out.path().join("results.json").display());
    out.finish()
}

// ---------------------------------------------------------------------------
// solve_k
// ---------------------------------------------------------------------------

pub(crate) fn best_restart(report: &SolveReport) -> usize {
    report
        .per_restart_values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap_or(0)
}

fn solve_k_results(
    phi: &SignedMeasure,
    cfg: &SolverConfig,
    candidates: Option<&[Vec<f64>]>,
    out: &mut RunDir,
) -> Result<(Value, Value), CliError> {
    require_dominant_mass(phi)?;
    let (method, report) = match candidates {
        Some(cands) => {
            let config = PointConfig::new(cands.to_vec())
                .map_err(|e| CliError::Invalid(format!("task.candidates: {e}")))?;
            ("enumeration", brute_force(phi, &config, cfg.k, None)?)
        }
        None => ("descent", local_search(phi, cfg)?),
    };
    out.mark("solve");
    let obj = eval_f(&report.best, phi)?;
    let restart = best_restart(&report);

    let rows: Vec<(usize, usize, &[f64])> =
        report.best.points.iter().map(|p| (cfg.k, restart, p.as_slice())).collect();
    out.write_points(phi.dim, &rows)?;
    out.write_density(None, phi.dim)?;
    let trace: Vec<(f64, f64)> = report
        .traces
        .get(restart)
        .map(|t| t.iter().enumerate().map(|(i, v)| (i as f64, *v)).collect())
        .unwrap_or_default();
    out.write_series("trace.csv", ("sweep", "objective"), &trace)?;

    let echo_v = json!({
        "type": "solve_k",
        "method": method,
        "solver": cfg,
        "candidates": candidates,
    });
    let bounding_radius = if report.bounding_radius.is_finite() {
        let margin = phi.mass_plus() - phi.mass_minus();
        json!(Approx::new(report.bounding_radius, obj.distance_error_bound / margin))
    } else {
        Value::Null
    };
    let results = json!({
        "objective": {
            "value": obj.value,
            "quadrature_step": obj.quadrature_step,
            "distance_error_bound": obj.distance_error_bound,
            "convergence_tol": if method == "descent" { json!(cfg.tol) } else { Value::Null },
        },
        "site_count": report.best.distinct_count(),
        "best_restart": restart,
        "per_restart_values": report.per_restart_values,
        "per_restart_error_bound": obj.distance_error_bound,
        "bounding_radius": bounding_radius,
        "iterations_used": report.iterations_used,
        "separation": separation_check(phi),
    });
    println!(
        "solve_k ({method}): F = {} over {} site(s)",
        obj.value,
        report.best.distinct_count()
    );
    Ok((echo_v, results))
}

// ---------------------------------------------------------------------------
// region
// ---------------------------------------------------------------------------

/// Pushforward atom count for one component at the given refinement, i.e.
/// the size of the transport problem the balanced-projection certificate
/// would have to solve.
fn pushed_atoms(c: &siglo_core::MeasureComponent, m: &BallComplementRegion, mesh: f64) -> usize {
    let nodes = c.node_set_refined(mesh);
    (0..nodes.len()).filter(|&j| m.margin(nodes.point(j)) < 0.0).count()
}

fn region_results(
    phi: &SignedMeasure,
    init_radius: Option<f64>,
    mesh: f64,
    max_iters: usize,
    cert_mesh: Option<f64>,
    out: &mut RunDir,
) -> Result<(Value, Value), CliError> {
    require_dominant_mass(phi)?;
    if !phi.minus.densities.is_empty() || phi.minus.atoms.is_empty() {
        return Err(CliError::Invalid(
            "the region task optimizes one ball per repulsion atom; the minus component \
             must consist of atoms only, and at least one"
                .into(),
        ));
    }
    let (_, scene_radius) = siglo_core::measure::bounding_ball(phi)?;
    let r0 = init_radius.unwrap_or_else(|| (0.5 * scene_radius).max(2.0 * mesh));
    let centers: Vec<Vec<f64>> = phi.minus.atoms.iter().map(|a| a.location.clone()).collect();
    let init = BallComplementRegion::new(centers, vec![r0; phi.minus.atoms.len()])?;
    let (region, obj) = optimize_radii(phi, &init, mesh, max_iters)?;
    out.mark("optimize radii");

    let plus_nodes = phi.plus.node_set();
    let ball_rows: Vec<Value> = region
        .centers
        .iter()
        .zip(&region.radii)
        .zip(&phi.minus.atoms)
        .map(|((c, r), atom)| {
            let mass = ball_mass(&plus_nodes, c, *r);
            json!({
                "center": c,
                "radius": Approx::new(*r, mesh),
                "plus_mass_inside": mass,
                "atom_weight": atom.weight,
                "mass_gap": mass - atom.weight,
            })
        })
        .collect();

    let fv_mesh = mesh.max(obj.quadrature_step);
    let mut fv_values = Vec::new();
    let mut fv_dropped = 0.0f64;
    for axis in 0..phi.dim {
        let dim = phi.dim;
        let unit = move |_: &[f64]| {
            let mut e = vec![0.0; dim];
            e[axis] = 1.0;
            e
        };
        let (v, dropped) = first_variation(&region, phi, &unit, fv_mesh)?;
        fv_values.push(v);
        fv_dropped = fv_dropped.max(dropped);
    }
    out.mark("first variation");

    // Balanced-projection residual ladder.  The transport problem is exact,
    // so its size has to stay modest outside dimension 1.
    let native_step = obj.quadrature_step;
    let cmesh = cert_mesh.unwrap_or(if native_step > 0.0 { native_step } else { mesh });
    let budget = 30_000usize;
    let pushed = pushed_atoms(&phi.plus, &region, cmesh) + pushed_atoms(&phi.minus, &region, cmesh);
    let (balanced, balanced_note) = if phi.dim >= 2 && pushed > budget {
        (
            Value::Null,
            json!(format!(
                "skipped: {pushed} pushforward atoms exceed the exact-transport budget {budget}; \
                 pass a coarser cert_mesh or a smaller instance"
            )),
        )
    } else {
        let mut rows = Vec::new();
        let mut series = Vec::new();
        for scale in [4.0, 2.0, 1.0] {
            let m = cmesh * scale;
            let rep = balanced_projection_residual(&region, phi, m)?;
            series.push((m, rep.residual));
            rows.push(json!({
                "mesh": m,
                "residual": rep.residual,
                "mass_gap": rep.mass_gap,
                "region_mass_gap": rep.region_mass_gap,
            }));
        }
        out.write_series("residual_vs_mesh.csv", ("mesh", "residual"), &series)?;
        let note = if fv_dropped > 0.0 {
            // The repulsion atoms sit at their ball centers, so their
            // boundary pushforward is an arbitrary point of the sphere; the
            // residual then stays of order the radius even at an optimum.
            json!(
                "repulsion atoms lie on projection ridges (see \
                 first_variation.dropped_ridge_mass); the transport residual \
                 compares a spread attraction pushforward against point \
                 masses and does not shrink with the mesh"
            )
        } else {
            Value::Null
        };
        (Value::Array(rows), note)
    };
    out.mark("balanced projection");

    out.write_points(phi.dim, &[])?;
    out.write_density(None, phi.dim)?;

    let region_mass_gap = mass_check(&region, phi);
    println!("region: F = {} with radii {:?}", obj.value, region.radii);

    let echo_v = json!({
        "type": "region",
        "init_radius": r0,
        "mesh": mesh,
        "max_iters": max_iters,
        "cert_mesh": cmesh,
    });
    let results = json!({
        "region": {
            "centers": &region.centers,
            "radii": region.radii.iter().map(|r| Approx::new(*r, mesh)).collect::<Vec<_>>(),
        },
        "objective": obj,
        "certificates": {
            "mass_gap": { "value": region_mass_gap, "quadrature_step": native_step },
            "balls": ball_rows,
            "first_variation": {
                "per_axis_values": fv_values,
                "dropped_ridge_mass": fv_dropped,
                "mesh": fv_mesh,
            },
            "balanced_projection": balanced,
            "balanced_projection_note": balanced_note,
        },
    });
    Ok((echo_v, results))
}

// ---------------------------------------------------------------------------
// theta
// ---------------------------------------------------------------------------

pub fn theta_results(
    n: usize,
    k: usize,
    restarts: usize,
    seed: u64,
    grid_res: usize,
    out: &mut RunDir,
) -> Result<Value, CliError> {
    let est = estimate_theta(n, k, restarts, seed, grid_res)?;
    out.mark("estimate");
    let reference = theta_constant(n);
    let lb = theta_lower_bound(n);
    println!("theta (n = {n}, k = {k}): {est}");
    Ok(json!({
        "theta": Approx::new(est, (est - lb).abs()),
        "tolerance_basis": "distance to the rigorous asymptotic lower bound",
        "reference": reference,
        "relative_error_vs_reference": reference.map(|r| (est - r).abs() / r),
        "lower_bound": lb,
    }))
}

/// `siglo theta ...` without a scenario file: wraps the same computation in
/// a synthetic scenario so the output contract is identical.
pub fn run_theta_command(
    n: usize,
    k: usize,
    restarts: usize,
    seed: u64,
    grid_res: usize,
    output: Option<PathBuf>,
) -> Result<(), CliError> {
    if !(1..=3).contains(&n) {
        return Err(CliError::Invalid(format!("--n must be 1, 2, or 3, got {n}")));
    }
    if k < 1 {
        return Err(CliError::Invalid("--k must be at least 1".into()));
    }
    let name = format!("theta-n{n}-k{k}");
    let out_path = output.unwrap_or_else(|| PathBuf::from("siglo-out").join(&name));
    let mut out = RunDir::create(out_path)?;
    let results = theta_results(n, k, restarts, seed, grid_res, &mut out)?;
    out.write_points(n, &[])?;
    out.write_density(None, n)?;
    let file = ResultsFile {
        name: name.clone(),
        task: "theta",
        seed,
        versions: Versions::current(),
        scenario: ScenarioEcho {
            name,
            dimension: n,
            seed,
            output: out.path().display().to_string(),
            measure: None,
            task: json!({
                "type": "theta",
                "n": n,
                "k": k,
                "restarts": restarts,
                "grid_res": grid_res,
                "seed": seed,
            }),
        },
        results,
    };
    out.write_results(&file)?;
    println!("wrote {}", out.path().join("results.json").display());
    out.finish()
}

// ---------------------------------------------------------------------------
// density
// ---------------------------------------------------------------------------

fn single_plus_density<'a>(
    phi: &'a SignedMeasure,
    task: &str,
) -> Result<&'a siglo_core::GriddedDensity, CliError> {
    if phi.plus.densities.len() != 1 || !phi.plus.atoms.is_empty() {
        return Err(CliError::Invalid(format!(
            "the {task} task needs the plus component to be exactly one gridded density \
             (got {} densities and {} atoms)",
            phi.plus.densities.len(),
            phi.plus.atoms.len()
        )));
    }
    Ok(&phi.plus.densities[0])
}

fn balls_to_region(balls: &[BallSpec]) -> Result<BallComplementRegion, CliError> {
    let centers = balls.iter().map(|b| b.center.clone()).collect();
    let radii = balls.iter().map(|b| b.radius).collect();
    BallComplementRegion::new(centers, radii)
        .map_err(|e| CliError::Invalid(format!("task.balls: {e}")))
}

/// A ball strictly outside the grid box: its complement then covers every
/// cell midpoint, which is how "no region constraint" is expressed to the
/// region-aware routines.
fn off_grid_ball(g: &siglo_core::GriddedDensity) -> BallComplementRegion {
    let diam = g.bounds.diameter().max(1.0);
    let center: Vec<f64> = g.bounds.hi.iter().map(|h| h + 2.0 * diam).collect();
    BallComplementRegion::new(vec![center], vec![0.5 * diam]).expect("static geometry is valid")
}

fn density_results(
    phi: &SignedMeasure,
    balls: &[BallSpec],
    out: &mut RunDir,
) -> Result<(Value, Value), CliError> {
    let g = single_plus_density(phi, "density")?;
    let field = DensityField::raw(g.clone());
    let m = if balls.is_empty() { off_grid_ball(g) } else { balls_to_region(balls)? };
    let rho = limit_density(&field, &m)?;
    out.mark("limit density");
    let support_cells = rho.density.values.iter().filter(|v| **v > 0.0).count();
    out.write_points(phi.dim, &[])?;
    out.write_density(Some(&rho.density), phi.dim)?;
    let n = phi.dim as f64;
    let echo_v = json!({
        "type": "density",
        "balls": balls,
        "exponent": n / (n + 1.0),
    });
    let results = json!({
        "mass": rho.mass(),
        "cell_count": rho.density.cell_count(),
        "support_cells": support_cells,
        "max_value": rho.density.values.iter().cloned().fold(0.0f64, f64::max),
        "quadrature_step": rho.density.max_cell_side(),
    });
    println!(
        "density: {support_cells} of {} cells carry the placement density",
        rho.density.cell_count()
    );
    Ok((echo_v, results))
}

// ---------------------------------------------------------------------------
// converge
// ---------------------------------------------------------------------------

fn converge_results(
    phi: &SignedMeasure,
    schedule: &[usize],
    balls: &[BallSpec],
    cfg: &SolverConfig,
    theta_override: Option<f64>,
    out: &mut RunDir,
) -> Result<(Value, Value), CliError> {
    require_dominant_mass(phi)?;
    let g = single_plus_density(phi, "converge")?;
    let f_field = DensityField::raw(g.clone());
    let m_star = balls_to_region(balls)?;
    let rho_star = limit_density(&f_field, &m_star)?;
    let theta = match theta_override.or_else(|| theta_constant(phi.dim)) {
        Some(t) if t > 0.0 && t.is_finite() => t,
        Some(t) => return Err(CliError::Invalid(format!("task.theta must be positive, got {t}"))),
        None => unreachable!("dimension 3 without theta is rejected at load time"),
    };
    let limit_value = gamma_limit_value(&rho_star, &m_star, &f_field, theta);
    let rows = convergence_report(phi, schedule, cfg, &m_star, &rho_star)?;
    out.mark("convergence sweep");

    let series = |f: &dyn Fn(&ConvergenceRow) -> f64| {
        rows.iter().map(|r| (r.k as f64, f(r))).collect::<Vec<_>>()
    };
    out.write_series("convergence_value.csv", ("k", "objective"), &series(&|r| r.f_value))?;
    out.write_series("convergence_gap.csv", ("k", "rescaled_gap"), &series(&|r| r.rescaled_gap))?;
    out.write_series("convergence_w1.csv", ("k", "w1_to_limit_density"), &series(&|r| r.w1_to_rho))?;
    out.write_series(
        "convergence_hausdorff.csv",
        ("k", "hausdorff_to_region"),
        &series(&|r| r.hausdorff_to_m),
    )?;
    out.write_points(phi.dim, &[])?;
    out.write_density(Some(&rho_star.density), phi.dim)?;

    let echo_v = json!({
        "type": "converge",
        "schedule": schedule,
        "balls": balls,
        "theta": theta,
        "solver": {
            "restarts": cfg.restarts,
            "seed": cfg.seed,
            "max_iters": cfg.max_iters,
            "init_step": cfg.init_step,
            "step_decay": cfg.step_decay,
            "tol": cfg.tol,
            "candidate_grid": &cfg.candidate_grid,
        },
    });
    let row_values: Vec<Value> = rows
        .iter()
        .map(|r| {
            json!({
                "k": r.k,
                "f_value": r.f_value,
                "rescaled_gap": r.rescaled_gap,
                "gap_over_limit": if limit_value.is_finite() {
                    json!(r.rescaled_gap / limit_value)
                } else {
                    Value::Null
                },
                "hausdorff_to_region": r.hausdorff_to_m,
                "w1_to_limit_density": r.w1_to_rho,
            })
        })
        .collect();
    if let Some(last) = rows.last() {
        println!(
            "converge: k = {} reaches rescaled gap {} against limit value {}",
            last.k, last.rescaled_gap, limit_value
        );
    }
    // The k^{-1/n} rescaling and the limit value are rigorous only from
    // dimension 2 up; a 1-D sweep applies the same formulas and says so.
    let extrapolation_note = if phi.dim == 1 {
        json!(
            "the rescaled-gap limit and the limit density are established for \
             dimension >= 2; this one-dimensional sweep applies the same \
             formulas as an extrapolation"
        )
    } else {
        Value::Null
    };
    let results = json!({
        "rows": row_values,
        "limit_value": { "value": limit_value, "quadrature_step": g.max_cell_side() },
        "theta": theta,
        "quadrature_step": g.max_cell_side(),
        "convergence_tol": cfg.tol,
        "extrapolation_note": extrapolation_note,
    });
    Ok((echo_v, results))
}

// ---------------------------------------------------------------------------
// validate
// ---------------------------------------------------------------------------

pub struct ValidateOpts {
    pub trials: usize,
    pub theta1: Option<f64>,
    pub theta2: Option<f64>,
    pub only: Option<String>,
    pub output: Option<PathBuf>,
}

type Check<'a> = (&'static str, Box<dyn FnOnce() -> CheckOutcome + 'a>);

/// Runs the invariant suites and the acceptance battery, streaming one table
/// line per check.  Fails (exit 1) iff any check fails.
pub fn run_validate(opts: &ValidateOpts) -> Result<(), CliError> {
    let mut consts = Constants::default();
    if let Some(t) = opts.theta1 {
        consts.theta1 = t;
    }
    if let Some(t) = opts.theta2 {
        consts.theta2 = t;
    }
    let trials = opts.trials;
    use siglo_core::validate as v;
    let c = &consts;
    let checks: Vec<Check> = vec![
        ("measure-invariants", Box::new(move || v::measure_invariants(trials))),
        ("geometry-invariants", Box::new(move || v::geometry_invariants(trials))),
        ("objective-invariants", Box::new(move || v::objective_invariants(trials))),
        ("solver-invariants", Box::new(move || v::solver_invariants(trials))),
        ("region-invariants", Box::new(move || v::region_invariants(trials))),
        ("asymptotics-invariants", Box::new(move || v::asymptotics_invariants(trials))),
        ("theta1-recovery", Box::new(move || v::check_theta1(c))),
        ("theta2-recovery", Box::new(move || v::check_theta2(c))),
        ("line-instance-exact", Box::new(v::check_line_instance)),
        ("stationary-radius", Box::new(v::check_stationary_radius)),
        ("nonexistence-probe", Box::new(v::check_nonexistence_probe)),
        ("certificates-1d", Box::new(v::check_certificates_1d)),
        ("gamma-limit-1d", Box::new(move || v::check_gamma_limit_1d(c))),
        ("gamma-trend-2d", Box::new(move || v::check_gamma_trend_2d(c))),
        ("net-bounds", Box::new(v::check_net_bounds)),
    ];
    let mut outcomes = Vec::new();
    for (id, run) in checks {
        if let Some(f) = &opts.only {
            if !id.contains(f.as_str()) {
                continue;
            }
        }
        let outcome = run();
        println!("{}", outcome.line());
        outcomes.push(outcome);
    }
    if outcomes.is_empty() {
        return Err(CliError::Invalid(format!(
            "--only {:?} matched no checks",
            opts.only.as_deref().unwrap_or("")
        )));
    }
    let failed: Vec<String> = outcomes.iter().filter(|o| !o.passed).map(|o| o.id.clone()).collect();
    println!("{}/{} checks passed", outcomes.len() - failed.len(), outcomes.len());

    if let Some(dir) = &opts.output {
        let out = RunDir::create(dir.clone())?;
        let rows: Vec<Value> = outcomes
            .iter()
            .map(|o| json!({ "id": o.id, "passed": o.passed, "details": o.details }))
            .collect();
        let file = ResultsFile {
            name: "validate".into(),
            task: "validate",
            seed: 0,
            versions: Versions::current(),
            scenario: ScenarioEcho {
                name: "validate".into(),
                dimension: 1,
                seed: 0,
                output: out.path().display().to_string(),
                measure: None,
                task: json!({
                    "type": "validate",
                    "trials": trials,
                    "theta1": consts.theta1,
                    "theta2": consts.theta2,
                    "only": opts.only,
                }),
            },
            results: json!({ "checks": rows, "all_passed": failed.is_empty() }),
        };
        out.write_results(&file)?;
        out.write_points(1, &[])?;
        out.write_density(None, 1)?;
        out.finish()?;
    }
    if !failed.is_empty() {
        return Err(CliError::ChecksFailed(failed));
    }
    Ok(())
}
