//! The acceptance battery and randomized invariant suites behind
//! `siglo validate`.
//!
//! Every check returns a [`CheckOutcome`] with a stable id, the wall-clock
//! duration, and a one-line summary, so callers can render a pass/fail
//! table.  All randomness is seeded; reruns give identical verdicts.

use std::time::Instant;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::asymptotics::{
    convergence_report, empirical_measure, estimate_theta, gamma_limit_value, limit_density,
    smooth_empirical, theta_constant, theta_lower_bound, DensityField,
};
use crate::geometry::{
    external_ball_check, surface_net, volume_net, BallComplementRegion, PointConfig,
    RegionDistance,
};
use crate::instances;
use crate::measure::{
    discretize, w1_distance, w1_distance_flow, Atom, GridBox, GriddedDensity, MeasureComponent,
    SignedMeasure,
};
use crate::objective::{eval_f, eval_f_region};
use crate::region::{
    balanced_projection_residual, ball_mass, canonicalize, first_variation, mass_check,
    optimize_radii,
};
use crate::solve_k::{brute_force, local_search, GridSpec, SolverConfig};
use crate::util::{dist, kahan_sum};

/// Reference constants the battery checks estimates against.  Overridable so
/// a deliberately wrong value demonstrates that the checks can fail.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Constants {
    pub theta1: f64,
    pub theta2: f64,
}

impl Default for Constants {
    fn default() -> Self {
        Self {
            theta1: theta_constant(1).expect("known"),
            theta2: theta_constant(2).expect("known"),
        }
    }
}

/// One row of the validation table.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub id: String,
    pub passed: bool,
    pub seconds: f64,
    pub details: String,
}

impl CheckOutcome {
    /// `[PASS] id (1.23s): details` — the table line for this check.
    pub fn line(&self) -> String {
        format!(
            "[{}] {} ({:.2}s): {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.seconds,
            self.details
        )
    }
}

fn finish(
    id: &str,
    started: Instant,
    budget: Option<f64>,
    passed: bool,
    mut details: String,
) -> CheckOutcome {
    let seconds = started.elapsed().as_secs_f64();
    let mut passed = passed;
    if let Some(b) = budget {
        if seconds > b {
            passed = false;
            details.push_str(&format!("; exceeded the {b:.0}s budget"));
        }
    }
    CheckOutcome { id: id.to_string(), passed, seconds, details }
}

fn fail(id: &str, started: Instant, err: impl std::fmt::Display) -> CheckOutcome {
    finish(id, started, None, false, format!("error: {err}"))
}

// ---------------------------------------------------------------------------
// Acceptance battery
// ---------------------------------------------------------------------------

/// Check 1: the 1-D quantization constant from a 32-point run.
pub fn check_theta1(consts: &Constants) -> CheckOutcome {
    let t0 = Instant::now();
    match estimate_theta(1, 32, 2, 0, 512) {
        Ok(est) => {
            let tol = 0.005 * consts.theta1;
            let ok = (est - consts.theta1).abs() <= tol;
            finish(
                "theta1-recovery",
                t0,
                Some(1.0),
                ok,
                format!("estimate {est:.6} vs {:.4} ± 0.5%", consts.theta1),
            )
        }
        Err(e) => fail("theta1-recovery", t0, e),
    }
}

/// Check 2: the planar quantization constant from a 256-point run.
pub fn check_theta2(consts: &Constants) -> CheckOutcome {
    let t0 = Instant::now();
    match estimate_theta(2, 256, 8, 0, 256) {
        Ok(est) => {
            let lower = theta_lower_bound(2) - 0.005;
            let ok = (est - consts.theta2).abs() <= 0.05 * consts.theta2 && est >= lower;
            finish(
                "theta2-recovery",
                t0,
                Some(300.0),
                ok,
                format!("estimate {est:.5} vs {:.5} ± 5%, lower bound {lower:.5}", consts.theta2),
            )
        }
        Err(e) => fail("theta2-recovery", t0, e),
    }
}

/// Check 3: the four-atom line instance has the known exact optimum {0, 8}.
pub fn check_line_instance() -> CheckOutcome {
    let t0 = Instant::now();
    let id = "line-instance-exact";
    let phi = instances::line_atoms();
    let candidates = match PointConfig::new((0..=16).map(|i| vec![0.5 * i as f64]).collect()) {
        Ok(c) => c,
        Err(e) => return fail(id, t0, e),
    };
    let exact = match brute_force(&phi, &candidates, 2, None) {
        Ok(r) => r,
        Err(e) => return fail(id, t0, e),
    };
    let mut cfg = SolverConfig::new(2);
    cfg.restarts = 6;
    cfg.max_iters = 200;
    let local = match local_search(&phi, &cfg) {
        Ok(r) => r,
        Err(e) => return fail(id, t0, e),
    };
    let ok = exact.value == -14.0
        && exact.best.points == vec![vec![0.0], vec![8.0]]
        && (local.value + 14.0).abs() <= 1e-3;
    finish(
        id,
        t0,
        Some(10.0),
        ok,
        format!(
            "enumerated best {:?} at {}, descent at {:.6}",
            exact.best.points, exact.value, local.value
        ),
    )
}

/// Check 4: stationary ball radii — √2 on the disk instance, 1/2 on the
/// interval instance — found by radius optimization.
pub fn check_stationary_radius() -> CheckOutcome {
    let t0 = Instant::now();
    let id = "stationary-radius";
    let run = || -> Result<(f64, f64, f64), crate::region::RegionError> {
        let disk = instances::disk_uniform(400);
        let init = BallComplementRegion::new(vec![vec![0.0, 0.0]], vec![0.5])?;
        let (m2, _) = optimize_radii(&disk, &init, 1e-3, 80)?;
        let r2 = m2.max_radius();
        let covered = ball_mass(&disk.plus.node_set(), &[0.0, 0.0], r2);

        let line = instances::interval_uniform(40_000);
        let init1 = BallComplementRegion::new(vec![vec![0.0]], vec![0.3])?;
        let (m1, _) = optimize_radii(&line, &init1, 1e-4, 80)?;
        Ok((r2, covered, m1.max_radius()))
    };
    match run() {
        Ok((r2, covered, r1)) => {
            let ok = (r2 - 2.0f64.sqrt()).abs() <= 1e-3
                && (covered - 1.0).abs() <= 1e-3
                && (r1 - 0.5).abs() <= 1e-4;
            finish(
                id,
                t0,
                None,
                ok,
                format!(
                    "disk radius {r2:.5} (target {:.5}), covered mass {covered:.5}, \
                     interval radius {r1:.6}",
                    2.0f64.sqrt()
                ),
            )
        }
        Err(e) => fail(id, t0, e),
    }
}

/// Check 5: the circle-vs-center probe is strictly decreasing, with the two
/// closed-form values at r = 0 and r = 1.
pub fn check_nonexistence_probe() -> CheckOutcome {
    let t0 = Instant::now();
    let id = "nonexistence-probe";
    let radii: Vec<f64> = (0..21).map(|i| 0.5 * i as f64).collect();
    let report = crate::solve_k::nonexistence_probe(&radii, 4096);
    let f0 = report.table[0].1;
    let f1 = report.table[2].1;
    let target1 = 4.0 / std::f64::consts::PI - 1.0;
    let ok = (f0 - 1.0).abs() <= 1e-3
        && (f1 - target1).abs() <= 1e-3
        && report.strictly_decreasing;
    finish(
        id,
        t0,
        None,
        ok,
        format!(
            "f(0) = {f0:.5}, f(1) = {f1:.5} (target {target1:.5}), strictly decreasing: {}",
            report.strictly_decreasing
        ),
    )
}

/// Check 6: optimality certificates on the 1-D block instance whose optimal
/// region is the complement of (−1, 1).
pub fn check_certificates_1d() -> CheckOutcome {
    let t0 = Instant::now();
    let id = "certificates-1d";
    let phi = instances::block_instance(2000, 500);
    let run = || -> Result<(f64, f64, f64, f64), crate::region::RegionError> {
        let m_opt = BallComplementRegion::new(vec![vec![0.0]], vec![1.0])?;
        let gap = mass_check(&m_opt, &phi);
        let coarse = balanced_projection_residual(&m_opt, &phi, 1e-3)?.residual;
        let fine = balanced_projection_residual(&m_opt, &phi, 5e-4)?.residual;
        let m_off = BallComplementRegion::new(vec![vec![0.0]], vec![1.5])?;
        let off = balanced_projection_residual(&m_off, &phi, 1e-3)?.residual;
        Ok((gap, coarse, fine, off))
    };
    match run() {
        Ok((gap, coarse, fine, off)) => {
            // On this symmetric instance both residuals can sit at the
            // floating-point floor, where a ratio is meaningless; the decay
            // requirement applies once the residual is above that floor.
            let decays = fine <= coarse / 1.5 || fine <= 1e-9;
            let ok = gap.abs() <= 1e-3 && coarse <= 0.02 && decays && off >= 0.2;
            finish(
                id,
                t0,
                None,
                ok,
                format!(
                    "mass gap {gap:.2e}, residual {coarse:.2e} -> {fine:.2e} on mesh halving, \
                     off-optimum residual {off:.3}"
                ),
            )
        }
        Err(e) => fail(id, t0, e),
    }
}

/// Check 7: the 1-D limit energy is exactly 1 and the rescaled gaps approach
/// it along k = 16, 64.
pub fn check_gamma_limit_1d(consts: &Constants) -> CheckOutcome {
    let t0 = Instant::now();
    let id = "gamma-limit-1d";
    let phi = instances::block_instance(2000, 500);
    let run = || -> Result<(f64, Vec<f64>), Box<dyn std::error::Error>> {
        let m = BallComplementRegion::new(vec![vec![0.0]], vec![1.0])?;
        let f_plus = DensityField::raw(phi.plus.densities[0].clone());
        let rho = limit_density(&f_plus, &m)?;
        let limit = gamma_limit_value(&rho, &m, &f_plus, consts.theta1);

        // Large initial step: interior points must march out of the ball
        // through their own quantization barriers, and short steps get
        // pinned before the evacuation finishes.
        let mut cfg = SolverConfig::new(1);
        cfg.restarts = 8;
        cfg.max_iters = 800;
        cfg.init_step = 0.2;
        cfg.tol = 1e-7;
        cfg.candidate_grid =
            Some(GridSpec { lo: vec![-2.0], hi: vec![2.0], per_axis: vec![16] });
        let rows = convergence_report(&phi, &[16, 64], &cfg, &m, &rho)?;
        Ok((limit, rows.iter().map(|r| r.rescaled_gap).collect()))
    };
    match run() {
        Ok((limit, gaps)) => {
            let ok = (limit - 1.0).abs() <= 1e-9
                && (gaps[0] - 1.0).abs() <= 0.35
                && (gaps[1] - 1.0).abs() <= 0.20;
            finish(
                id,
                t0,
                Some(120.0),
                ok,
                format!(
                    "limit energy {limit:.9}, rescaled gaps {:.3} (k=16), {:.3} (k=64)",
                    gaps[0], gaps[1]
                ),
            )
        }
        Err(e) => fail(id, t0, e),
    }
}

/// Check 8: the 2-D limit-energy trend over k = 16, 64, 256 against the
/// plug-in target θ₂·(16−π)^{3/2}.
pub fn check_gamma_trend_2d(consts: &Constants) -> CheckOutcome {
    let t0 = Instant::now();
    let id = "gamma-trend-2d";
    let phi = instances::square_with_central_atom(64);
    let target = consts.theta2 * (16.0 - std::f64::consts::PI).powf(1.5);
    let run = || -> Result<Vec<crate::asymptotics::ConvergenceRow>, Box<dyn std::error::Error>> {
        let m = BallComplementRegion::new(vec![vec![0.0, 0.0]], vec![1.0])?;
        let f_plus = DensityField::raw(phi.plus.densities[0].clone());
        let rho = limit_density(&f_plus, &m)?;
        let mut cfg = SolverConfig::new(16);
        cfg.restarts = 2;
        cfg.max_iters = 800;
        cfg.init_step = 0.2;
        cfg.tol = 1e-6;
        cfg.candidate_grid = Some(GridSpec {
            lo: vec![-2.0, -2.0],
            hi: vec![2.0, 2.0],
            per_axis: vec![4, 4],
        });
        Ok(convergence_report(&phi, &[16, 64, 256], &cfg, &m, &rho)?)
    };
    match run() {
        Ok(rows) => {
            let gap = rows[2].rescaled_gap;
            let w1: Vec<f64> = rows.iter().map(|r| r.w1_to_rho).collect();
            let ok = (gap - target).abs() <= 0.30 * target && w1[0] > w1[1] && w1[1] > w1[2];
            finish(
                id,
                t0,
                Some(900.0),
                ok,
                format!(
                    "rescaled gap {gap:.2} vs target {target:.2} ± 30%, \
                     transport distances {:.3} > {:.3} > {:.3}",
                    w1[0], w1[1], w1[2]
                ),
            )
        }
        Err(e) => fail(id, t0, e),
    }
}

/// Check 9: net cardinality bounds and the covering property on 50 random
/// planar regions.
pub fn check_net_bounds() -> CheckOutcome {
    let t0 = Instant::now();
    let id = "net-bounds";
    let mut rng = seeded(0x0900);
    let delta = 0.05;
    let eps = 0.1;
    let mut worst_fill = 0.0f64;
    let mut failures = Vec::new();
    for case in 0..50 {
        let m = random_region(&mut rng, 2, 4);
        let surf = surface_net(&m, delta);
        let vol = volume_net(&m, eps, delta);
        if (surf.len() as f64) > surf.cardinality_bound {
            failures.push(format!("case {case}: surface net size over bound"));
        }
        if (vol.len() as f64) > vol.cardinality_bound {
            failures.push(format!("case {case}: volume net size over bound"));
        }
        worst_fill = worst_fill.max(surf.len() as f64 / surf.cardinality_bound);
        for draw in 0..1000 {
            let Some((p, shell)) = sample_shell_point(&mut rng, &m, if draw % 2 == 0 { 0.0 } else { eps })
            else {
                continue;
            };
            let net = if shell { &vol } else { &surf };
            if net.min_dist(&p) > delta + 1e-9 {
                failures.push(format!("case {case}: point escapes the net covering"));
                break;
            }
        }
        if failures.len() > 4 {
            break;
        }
    }
    let ok = failures.is_empty();
    finish(
        id,
        t0,
        None,
        ok,
        if ok {
            format!("50 regions, 1000 samples each; worst size/bound ratio {worst_fill:.2e}")
        } else {
            failures.join("; ")
        },
    )
}

/// Runs the nine closed-form and trend checks in order.
pub fn acceptance_battery(consts: &Constants) -> Vec<CheckOutcome> {
    vec![
        check_theta1(consts),
        check_theta2(consts),
        check_line_instance(),
        check_stationary_radius(),
        check_nonexistence_probe(),
        check_certificates_1d(),
        check_gamma_limit_1d(consts),
        check_gamma_trend_2d(consts),
        check_net_bounds(),
    ]
}

// ---------------------------------------------------------------------------
// Randomized invariant suites
// ---------------------------------------------------------------------------

fn seeded(tag: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(0x5163_1000 ^ tag)
}

fn rand_point(rng: &mut ChaCha8Rng, n: usize, half: f64) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-half..half)).collect()
}

fn rand_unit(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    loop {
        let v = rand_point(rng, n, 1.0);
        let len = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if len > 0.2 && len <= 1.0 {
            return v.into_iter().map(|x| x / len).collect();
        }
    }
}

fn rand_atoms(rng: &mut ChaCha8Rng, n: usize, count: usize, half: f64, w_max: f64) -> Vec<Atom> {
    (0..count)
        .map(|_| {
            Atom::new(rand_point(rng, n, half), rng.gen_range(0.05..w_max)).expect("finite")
        })
        .collect()
}

/// Random ball-complement region with transversal sphere intersections:
/// near-tangent pairs are rejected so the boundary has no degenerate
/// features at the net scales the suites use.
fn random_region(rng: &mut ChaCha8Rng, n: usize, max_balls: usize) -> BallComplementRegion {
    loop {
        let count = rng.gen_range(1..=max_balls);
        let centers: Vec<Vec<f64>> = (0..count).map(|_| rand_point(rng, n, 1.0)).collect();
        let radii: Vec<f64> = (0..count).map(|_| rng.gen_range(0.25..0.9)).collect();
        let mut transversal = true;
        for i in 0..count {
            for j in i + 1..count {
                let d = dist(&centers[i], &centers[j]);
                if (d - (radii[i] + radii[j])).abs() < 0.05
                    || (d - (radii[i] - radii[j]).abs()).abs() < 0.05
                {
                    transversal = false;
                }
            }
        }
        if transversal {
            return BallComplementRegion::new(centers, radii).expect("positive radii");
        }
    }
}

/// A point of ∂M (depth 0) or of the boundary shell (depth up to `eps`),
/// found by pushing off a random sphere; `None` if the draw keeps landing
/// inside other balls.
fn sample_shell_point(
    rng: &mut ChaCha8Rng,
    m: &BallComplementRegion,
    eps: f64,
) -> Option<(Vec<f64>, bool)> {
    let n = m.dim();
    for _ in 0..60 {
        let i = rng.gen_range(0..m.ball_count());
        let u = rand_unit(rng, n);
        let t = if eps > 0.0 { rng.gen_range(0.0..eps) } else { 0.0 };
        let p: Vec<f64> = m.centers[i]
            .iter()
            .zip(&u)
            .map(|(c, d)| c + (m.radii[i] + t) * d)
            .collect();
        if m.margin(&p) >= -1e-9 {
            return Some((p, eps > 0.0));
        }
    }
    None
}

/// Measure invariants: discretization conserves mass, transport distances
/// satisfy the metric axioms and the grid-coarsening bound, and the 1-D
/// closed form agrees with the generic flow solver.
pub fn measure_invariants(trials: usize) -> CheckOutcome {
    let t0 = Instant::now();
    let id = "measure-invariants";
    let mut rng = seeded(0x0A01);
    let mut fails: Vec<String> = Vec::new();
    for t in 0..trials {
        let n = 1 + t % 3;
        let atoms = rand_atoms(&mut rng, n, 1 + t % 6, 5.0, 2.0);
        let c = MeasureComponent::from_atoms(atoms.clone());
        let step = rng.gen_range(0.1..2.5);

        let coarse = match discretize(&c, step) {
            Ok(v) => v,
            Err(e) => {
                fails.push(format!("trial {t}: discretize failed: {e}"));
                break;
            }
        };
        let mass = c.total_mass();
        let coarse_mass = kahan_sum(coarse.iter().map(|a| a.weight));
        if (coarse_mass - mass).abs() > 1e-12 * (1.0 + mass) {
            fails.push(format!("trial {t}: discretization lost mass"));
        }

        // Unit-mass copy for the W1 coarsening bound.
        let unit: Vec<Atom> = atoms
            .iter()
            .map(|a| Atom::new(a.location.clone(), a.weight / mass).expect("finite"))
            .collect();
        let unit_c = MeasureComponent::from_atoms(unit.clone());
        let unit_coarse = discretize(&unit_c, step).expect("positive step");
        match w1_distance(&unit, &unit_coarse) {
            Ok(d) => {
                if d > step * (n as f64).sqrt() + 1e-9 {
                    fails.push(format!("trial {t}: coarsening moved mass beyond step·√n"));
                }
            }
            Err(e) => fails.push(format!("trial {t}: w1 failed: {e}")),
        }

        // Metric axioms on three unit-mass clouds.
        let cloud = |rng: &mut ChaCha8Rng| -> Vec<Atom> {
            let raw = rand_atoms(rng, n, 3 + t % 4, 4.0, 1.0);
            let total: f64 = raw.iter().map(|a| a.weight).sum();
            raw.into_iter()
                .map(|a| Atom::new(a.location, a.weight / total).expect("finite"))
                .collect()
        };
        let mu = cloud(&mut rng);
        let nu = cloud(&mut rng);
        let rho = cloud(&mut rng);
        let d_mn = w1_distance(&mu, &nu).expect("equal masses");
        let d_nm = w1_distance(&nu, &mu).expect("equal masses");
        let d_mr = w1_distance(&mu, &rho).expect("equal masses");
        let d_rn = w1_distance(&rho, &nu).expect("equal masses");
        if (d_mn - d_nm).abs() > 1e-12 * (1.0 + d_mn) {
            fails.push(format!("trial {t}: w1 asymmetric"));
        }
        if d_mn > d_mr + d_rn + 1e-9 * (1.0 + d_mn) {
            fails.push(format!("trial {t}: triangle inequality violated"));
        }
        if w1_distance(&mu, &mu).expect("same").abs() > 1e-12 {
            fails.push(format!("trial {t}: self-distance nonzero"));
        }
        if t % 5 == 0 {
            let shifted: Vec<Atom> = mu
                .iter()
                .map(|a| {
                    let mut loc = a.location.clone();
                    loc[0] += 20.0;
                    Atom::new(loc, a.weight).expect("finite")
                })
                .collect();
            if w1_distance(&mu, &shifted).expect("equal masses") <= 1e-6 {
                fails.push(format!("trial {t}: distinct supports at zero distance"));
            }
        }

        if n == 1 {
            let flow = w1_distance_flow(&mu, &nu).expect("equal masses");
            if (d_mn - flow).abs() > 1e-9 * (1.0 + d_mn) {
                fails.push(format!("trial {t}: CDF and flow transport disagree"));
            }
        }
        if fails.len() > 4 {
            break;
        }
    }
    let ok = fails.is_empty();
    finish(
        id,
        t0,
        None,
        ok,
        if ok { format!("{trials} trials") } else { fails.join("; ") },
    )
}

/// Geometry invariants: distance queries against independent reference nets,
/// projection consistency, net cardinality bounds, and the external-ball
/// property of every ball complement.
pub fn geometry_invariants(trials: usize) -> CheckOutcome {
    let t0 = Instant::now();
    let id = "geometry-invariants";
    let mut rng = seeded(0x0B02);
    let dims = [2, 2, 2, 2, 2, 2, 2, 2, 2, 2, 2, 2, 1, 1, 1, 1, 3, 3, 3, 3];
    let queries = (trials * 10 / dims.len()).max(20);
    let mut fails: Vec<String> = Vec::new();
    let mut cases = 0usize;
    for (r_idx, &n) in dims.iter().enumerate() {
        let m = random_region(&mut rng, n, if n == 3 { 2 } else { 3 });
        let delta_ref = if n == 3 { 3e-2 } else { 1e-3 };
        let reference = surface_net(&m, delta_ref);
        let scale = m.scene_diameter().max(1.0);
        // One evaluator per region so the fallback net is built at most once.
        let rd = RegionDistance::new(&m, 0.01);
        for _ in 0..queries {
            cases += 1;
            let x = rand_point(&mut rng, n, 2.2);
            let (d, bound) = rd.eval(&x);
            let reference_d = if m.contains(&x) { 0.0 } else { reference.min_dist(&x) };
            if (d - reference_d).abs() > bound + delta_ref + 1e-9 {
                fails.push(format!(
                    "region {r_idx}: query disagrees with the reference net \
                     ({d:.6} vs {reference_d:.6}, bound {bound:.1e})"
                ));
                break;
            }
            let (p, _) = rd.project(&x);
            if (dist(&x, &p) - d).abs() > bound + 1e-9 {
                fails.push(format!("region {r_idx}: projection length mismatch"));
                break;
            }
            if m.margin(&p) < -1e-6 * scale {
                fails.push(format!("region {r_idx}: projection lands outside the region"));
                break;
            }
        }
        let surf = surface_net(&m, 0.05);
        if (surf.len() as f64) > surf.cardinality_bound {
            fails.push(format!("region {r_idx}: surface net over its bound"));
        }
        let vol = volume_net(&m, 0.08, 0.04);
        if (vol.len() as f64) > vol.cardinality_bound {
            fails.push(format!("region {r_idx}: volume net over its bound"));
        }
        if !external_ball_check(&m, m.min_radius(), 200) {
            fails.push(format!("region {r_idx}: external ball check failed"));
        }
        if fails.len() > 4 {
            break;
        }
    }
    let ok = fails.is_empty();
    finish(
        id,
        t0,
        None,
        ok,
        if ok {
            format!("{} regions, {cases} distance cases", dims.len())
        } else {
            fails.join("; ")
        },
    )
}

fn shift_atoms(atoms: &[Atom], v: &[f64]) -> Vec<Atom> {
    atoms
        .iter()
        .map(|a| {
            let loc: Vec<f64> = a.location.iter().zip(v).map(|(x, d)| x + d).collect();
            Atom::new(loc, a.weight).expect("finite")
        })
        .collect()
}

fn scale_atoms(atoms: &[Atom], lambda: f64) -> Vec<Atom> {
    atoms
        .iter()
        .map(|a| {
            let loc: Vec<f64> = a.location.iter().map(|x| lambda * x).collect();
            Atom::new(loc, a.weight).expect("finite")
        })
        .collect()
}

/// Objective invariants: adding a point only helps each attraction term,
/// the functional is translation-equivariant and 1-homogeneous, and region
/// evaluation agrees with a dense point-set evaluation.
pub fn objective_invariants(trials: usize) -> CheckOutcome {
    let t0 = Instant::now();
    let id = "objective-invariants";
    let mut rng = seeded(0x0C03);
    let mut fails: Vec<String> = Vec::new();
    for t in 0..trials {
        let n = 1 + t % 3;
        let plus = rand_atoms(&mut rng, n, 2 + t % 5, 4.0, 1.5);
        let minus = rand_atoms(&mut rng, n, t % 3, 4.0, 0.4);
        let phi = SignedMeasure::new(
            MeasureComponent::from_atoms(plus.clone()),
            MeasureComponent::from_atoms(minus.clone()),
            n,
        )
        .expect("consistent dims");
        let plus_only = SignedMeasure::positive(phi.plus.clone(), n).expect("consistent");
        let minus_only = SignedMeasure::positive(phi.minus.clone(), n).expect("consistent");

        let sigma_pts: Vec<Vec<f64>> = (0..1 + t % 3).map(|_| rand_point(&mut rng, n, 4.0)).collect();
        let sigma = PointConfig::new(sigma_pts.clone()).expect("non-empty");
        let mut grown_pts = sigma_pts.clone();
        grown_pts.push(rand_point(&mut rng, n, 4.0));
        let grown = PointConfig::new(grown_pts).expect("non-empty");

        let term = |m: &SignedMeasure, s: &PointConfig| eval_f(s, m).expect("dims").value;
        let p0 = term(&plus_only, &sigma);
        let p1 = term(&plus_only, &grown);
        if p1 > p0 + 1e-12 * (1.0 + p0.abs()) {
            fails.push(format!("trial {t}: attraction term grew when a point was added"));
        }
        if !minus.is_empty() {
            let m0 = term(&minus_only, &sigma);
            let m1 = term(&minus_only, &grown);
            if m1 > m0 + 1e-12 * (1.0 + m0.abs()) {
                fails.push(format!("trial {t}: repulsion term grew when a point was added"));
            }
        } else {
            let f0 = term(&phi, &sigma);
            let f1 = term(&phi, &grown);
            if f1 > f0 + 1e-12 * (1.0 + f0.abs()) {
                fails.push(format!("trial {t}: F grew when a point was added (no repulsion)"));
            }
        }

        // Translation equivariance, with magnitudes kept small enough that
        // the stated absolute 1e-12 holds through rounding.
        let v = rand_point(&mut rng, n, 2.0);
        let shifted_phi = SignedMeasure::new(
            MeasureComponent::from_atoms(shift_atoms(&plus, &v)),
            MeasureComponent::from_atoms(shift_atoms(&minus, &v)),
            n,
        )
        .expect("consistent dims");
        let shifted_sigma = PointConfig::new(
            sigma_pts.iter().map(|p| p.iter().zip(&v).map(|(x, d)| x + d).collect()).collect(),
        )
        .expect("non-empty");
        let f_base = term(&phi, &sigma);
        let f_shift = term(&shifted_phi, &shifted_sigma);
        if (f_base - f_shift).abs() > 1e-12 {
            fails.push(format!("trial {t}: translation changed F by {:.1e}", f_base - f_shift));
        }

        // 1-homogeneity under geometric scaling.
        let lambda = rng.gen_range(0.3..3.0);
        let scaled_phi = SignedMeasure::new(
            MeasureComponent::from_atoms(scale_atoms(&plus, lambda)),
            MeasureComponent::from_atoms(scale_atoms(&minus, lambda)),
            n,
        )
        .expect("consistent dims");
        let scaled_sigma = PointConfig::new(
            sigma_pts.iter().map(|p| p.iter().map(|x| lambda * x).collect()).collect(),
        )
        .expect("non-empty");
        let f_scaled = term(&scaled_phi, &scaled_sigma);
        if (f_scaled - lambda * f_base).abs() > 1e-12 * (1.0 + lambda * f_base.abs()) {
            fails.push(format!("trial {t}: scaling broke 1-homogeneity"));
        }

        // Region evaluation vs a dense point-set stand-in for the region.
        if t % 20 == 0 {
            let n2 = 1 + (t / 20) % 2;
            let m = random_region(&mut rng, n2, 2);
            let phi2 = SignedMeasure::new(
                MeasureComponent::from_atoms(rand_atoms(&mut rng, n2, 4, 2.0, 1.0)),
                MeasureComponent::from_atoms(rand_atoms(&mut rng, n2, 2, 2.0, 0.3)),
                n2,
            )
            .expect("consistent dims");
            let step: f64 = if n2 == 1 { 0.005 } else { 0.06 };
            let mut net_pts: Vec<Vec<f64>> = Vec::new();
            let cells = (6.0 / step).ceil() as i64;
            let mut idx = vec![0i64; n2];
            'cells: loop {
                let p: Vec<f64> = idx.iter().map(|&i| -3.0 + (i as f64 + 0.5) * step).collect();
                if m.contains(&p) {
                    net_pts.push(p);
                }
                for a in 0..n2 {
                    idx[a] += 1;
                    if idx[a] < cells {
                        continue 'cells;
                    }
                    idx[a] = 0;
                }
                break;
            }
            let sigma_net = PointConfig::new(net_pts).expect("non-empty");
            let lhs = eval_f(&sigma_net, &phi2).expect("dims");
            let rhs = eval_f_region(&m, &phi2, 1e-3).expect("dims");
            let mass = phi2.mass_plus() + phi2.mass_minus();
            // Midpoint-net covering radius: the cell holding the nearest
            // region point can have its midpoint inside a ball, so a
            // neighbouring cell may have to stand in.
            let cover = 1.5 * step * (n2 as f64).sqrt();
            let slack = cover * mass + rhs.distance_error_bound + 1e-9;
            if (lhs.value - rhs.value).abs() > slack {
                fails.push(format!(
                    "trial {t}: region value {:.6} vs dense net value {:.6} beyond {slack:.1e}",
                    rhs.value, lhs.value
                ));
            }
        }
        if fails.len() > 4 {
            break;
        }
    }
    let ok = fails.is_empty();
    finish(
        id,
        t0,
        None,
        ok,
        if ok { format!("{trials} trials") } else { fails.join("; ") },
    )
}

/// Solver invariants: enumeration really is exhaustive, descent brackets the
/// enumerated value on a convex instance, values improve with k, and
/// everything is bit-deterministic.
pub fn solver_invariants(trials: usize) -> CheckOutcome {
    let t0 = Instant::now();
    let id = "solver-invariants";
    let mut rng = seeded(0x0D04);
    let mut fails: Vec<String> = Vec::new();

    let cert_trials = (trials * 3 / 10).max(50);
    for t in 0..cert_trials {
        let n = 1 + t % 2;
        let phi = SignedMeasure::new(
            MeasureComponent::from_atoms(rand_atoms(&mut rng, n, 3 + t % 4, 3.0, 1.5)),
            MeasureComponent::from_atoms(rand_atoms(&mut rng, n, t % 2, 3.0, 0.3)),
            n,
        )
        .expect("consistent dims");
        let cand_pts: Vec<Vec<f64>> = (0..4 + t % 4).map(|_| rand_point(&mut rng, n, 3.0)).collect();
        let cands = PointConfig::new(cand_pts.clone()).expect("non-empty");
        let k = 1 + t % 3;
        let report = match brute_force(&phi, &cands, k, None) {
            Ok(r) => r,
            Err(e) => {
                fails.push(format!("cert trial {t}: {e}"));
                break;
            }
        };
        // Exhaustive cross-check against every subset of size ≤ k.
        let mut best = f64::INFINITY;
        let mut stack: Vec<(usize, Vec<usize>)> = vec![(0, Vec::new())];
        while let Some((start, chosen)) = stack.pop() {
            if !chosen.is_empty() {
                let pts: Vec<Vec<f64>> = chosen.iter().map(|&i| cand_pts[i].clone()).collect();
                let cfgp = PointConfig::new(pts).expect("non-empty");
                let v = eval_f(&cfgp, &phi).expect("dims").value;
                if report.value > v + 1e-12 * (1.0 + v.abs()) {
                    fails.push(format!("cert trial {t}: enumeration missed a better subset"));
                    break;
                }
                best = best.min(v);
            }
            if chosen.len() < k {
                for i in start..cand_pts.len() {
                    let mut next = chosen.clone();
                    next.push(i);
                    stack.push((i + 1, next));
                }
            }
        }
        if (report.value - best).abs() > 1e-12 * (1.0 + best.abs()) {
            fails.push(format!("cert trial {t}: enumerated value differs from direct minimum"));
        }
        if fails.len() > 4 {
            break;
        }
    }

    // Two-sided bracket on single-point instances, where the objective is
    // convex and descent is globally convergent.
    let band_trials = (trials / 5).max(40);
    for t in 0..band_trials {
        if fails.len() > 4 {
            break;
        }
        let n = 1 + t % 2;
        let phi = SignedMeasure::positive(
            MeasureComponent::from_atoms(rand_atoms(&mut rng, n, 2 + t % 4, 2.0, 1.5)),
            n,
        )
        .expect("consistent dims");
        let grid = GridSpec { lo: vec![-2.5; n], hi: vec![2.5; n], per_axis: vec![9; n] };
        let cands = PointConfig::new(grid.midpoints()).expect("non-empty");
        let exact = brute_force(&phi, &cands, 1, None).expect("dominant plus");
        let mut cfg = SolverConfig::new(1);
        cfg.restarts = 2;
        cfg.max_iters = 80;
        cfg.seed = t as u64;
        let local = local_search(&phi, &cfg).expect("dominant plus");
        let lip = phi.mass_plus();
        let grid_slack = lip * (5.0 / 9.0) * (n as f64).sqrt() / 2.0 + 1e-9;
        if local.value < exact.value - grid_slack {
            fails.push(format!("band trial {t}: descent below the grid optimum minus slack"));
        }
        if local.value > exact.value + 1e-3 * (1.0 + lip) {
            fails.push(format!("band trial {t}: descent failed to reach the convex optimum"));
        }
    }

    let mono_trials = (trials / 10).max(30);
    for t in 0..mono_trials {
        if fails.len() > 4 {
            break;
        }
        let n = 1 + t % 2;
        let phi = SignedMeasure::new(
            MeasureComponent::from_atoms(rand_atoms(&mut rng, n, 3 + t % 3, 3.0, 1.5)),
            MeasureComponent::from_atoms(rand_atoms(&mut rng, n, t % 2, 3.0, 0.2)),
            n,
        )
        .expect("consistent dims");
        let mut last = f64::INFINITY;
        for k in 1..=3 {
            let mut cfg = SolverConfig::new(k);
            cfg.restarts = 4;
            cfg.max_iters = 60;
            cfg.seed = 17 * t as u64;
            let v = local_search(&phi, &cfg).expect("dominant plus").value;
            if v > last + 1e-9 {
                fails.push(format!("monotone trial {t}: value rose from k={} to k={k}", k - 1));
            }
            last = v;
        }
    }

    let det_trials = (trials / 20).max(20);
    for t in 0..det_trials {
        if fails.len() > 4 {
            break;
        }
        let n = 1 + t % 2;
        let phi = SignedMeasure::positive(
            MeasureComponent::from_atoms(rand_atoms(&mut rng, n, 3, 3.0, 1.5)),
            n,
        )
        .expect("consistent dims");
        let mut cfg = SolverConfig::new(2);
        cfg.restarts = 3;
        cfg.max_iters = 40;
        cfg.seed = 1000 + t as u64;
        let a = local_search(&phi, &cfg).expect("dominant plus");
        let b = local_search(&phi, &cfg).expect("dominant plus");
        if format!("{a:?}") != format!("{b:?}") {
            fails.push(format!("determinism trial {t}: reruns differ"));
        }
    }

    let ok = fails.is_empty();
    finish(
        id,
        t0,
        None,
        ok,
        if ok {
            format!(
                "{cert_trials} enumeration, {band_trials} bracket, {mono_trials} monotone, \
                 {det_trials} determinism trials"
            )
        } else {
            fails.join("; ")
        },
    )
}

/// A 1-D instance with a tilted attraction density and a block repulsion,
/// together with the exactly optimal single-ball region (center and radius
/// solve the stationarity system in closed form).
struct TiltedInstance {
    phi: SignedMeasure,
    m: BallComplementRegion,
    center: f64,
    radius: f64,
    minus_mass: f64,
}

fn tilted_instance(rng: &mut ChaCha8Rng) -> TiltedInstance {
    loop {
        let a = rng.gen_range(0.6..1.4);
        let b = rng.gen_range(-0.15..0.15);
        let c = rng.gen_range(-0.8..0.8);
        let mu = rng.gen_range(0.3..0.8);
        // Stationarity: the ball holds attraction mass μ and balances the
        // signed mass on each side of its center.
        let mut z: f64 = c;
        let mut r: f64 = mu / (2.0 * (a + b * c));
        let s = 0.4 * r;
        for _ in 0..80 {
            z = c - s * b * r * r / mu;
            r = mu / (2.0 * (a + b * z));
        }
        if !(0.15..0.6).contains(&r) || (z - c).abs() + s >= 0.9 * r || z.abs() + r > 1.6 {
            continue;
        }
        let box_plus = GridBox::new(vec![-2.0], vec![2.0]).expect("valid box");
        let plus = GriddedDensity::from_fn(box_plus, vec![1000], |x| a + b * x[0])
            .expect("positive density");
        let box_minus = GridBox::new(vec![c - s], vec![c + s]).expect("valid box");
        let minus =
            GriddedDensity::uniform(box_minus, vec![250], mu / (2.0 * s)).expect("valid density");
        let phi = SignedMeasure::new(
            MeasureComponent::from_density(plus),
            MeasureComponent::from_density(minus),
            1,
        )
        .expect("consistent dims");
        let m = BallComplementRegion::new(vec![vec![z]], vec![r]).expect("positive radius");
        return TiltedInstance { phi, m, center: z, radius: r, minus_mass: mu };
    }
}

/// Region invariants: canonicalization preserves repulsion distances and
/// never hurts attraction, radius optimization lands on the mass-balance
/// radius, the boundary-balance residual decays with the mesh at exact
/// optima, and the first variation flags descent directions.
pub fn region_invariants(trials: usize) -> CheckOutcome {
    let t0 = Instant::now();
    let id = "region-invariants";
    let mut rng = seeded(0x0E05);
    let mut fails: Vec<String> = Vec::new();

    let sandwich_trials = (trials / 4).max(60);
    for t in 0..sandwich_trials {
        let n = 1 + t % 3;
        let sigma_pts: Vec<Vec<f64>> = (0..1 + t % 3).map(|_| rand_point(&mut rng, n, 3.0)).collect();
        let sigma = PointConfig::new(sigma_pts.clone()).expect("non-empty");
        let mut minus_atoms = Vec::new();
        while minus_atoms.len() < 1 + t % 3 {
            let a = rand_atoms(&mut rng, n, 1, 3.0, 0.5).pop().expect("one");
            if sigma_pts.iter().all(|p| dist(p, &a.location) > 0.05) {
                minus_atoms.push(a);
            }
        }
        let phi = SignedMeasure::new(
            MeasureComponent::from_atoms(rand_atoms(&mut rng, n, 3 + t % 3, 3.0, 1.5)),
            MeasureComponent::from_atoms(minus_atoms),
            n,
        )
        .expect("consistent dims");
        let m = match canonicalize(&sigma, &phi) {
            Ok(m) => m,
            Err(e) => {
                fails.push(format!("sandwich trial {t}: {e}"));
                break;
            }
        };
        let scale = m.scene_diameter().max(1.0);
        if sigma_pts.iter().any(|p| m.margin(p) < -1e-12 * scale) {
            fails.push(format!("sandwich trial {t}: a site left the canonical region"));
        }
        // Coarse meshes: the sandwich inequality carries the evaluator's own
        // error bound, and fine 3-D fallback nets are needlessly expensive.
        let mesh = if n == 3 { 0.03 * scale } else { 0.005 * scale };
        let plus_only = SignedMeasure::positive(phi.plus.clone(), n).expect("consistent");
        let minus_only = SignedMeasure::positive(phi.minus.clone(), n).expect("consistent");
        let p_sig = eval_f(&sigma, &plus_only).expect("dims").value;
        let m_sig = eval_f(&sigma, &minus_only).expect("dims").value;
        let p_reg = eval_f_region(&m, &plus_only, mesh).expect("dims");
        let m_reg = eval_f_region(&m, &minus_only, mesh).expect("dims");
        if (m_reg.value - m_sig).abs() > m_reg.distance_error_bound + 1e-9 {
            fails.push(format!("sandwich trial {t}: repulsion distances changed"));
        }
        if p_reg.value > p_sig + p_reg.distance_error_bound + 1e-9 {
            fails.push(format!("sandwich trial {t}: attraction got worse"));
        }
        if fails.len() > 4 {
            break;
        }
    }

    let stat_trials = (trials / 25).max(20);
    for t in 0..stat_trials {
        if fails.len() > 4 {
            break;
        }
        let a = rng.gen_range(0.6..1.6);
        let mu = rng.gen_range(0.3..1.0);
        let c = rng.gen_range(-0.5..0.5);
        let plus = GriddedDensity::uniform(
            GridBox::new(vec![-2.0], vec![2.0]).expect("valid box"),
            vec![1500],
            a,
        )
        .expect("valid density");
        let phi = SignedMeasure::new(
            MeasureComponent::from_density(plus),
            MeasureComponent::from_atoms(vec![Atom::new(vec![c], mu).expect("finite")]),
            1,
        )
        .expect("consistent dims");
        let init = BallComplementRegion::new(vec![vec![c]], vec![0.2]).expect("positive radius");
        let (m, _) = optimize_radii(&phi, &init, 1e-3, 60).expect("valid instance");
        let covered = ball_mass(&phi.plus.node_set(), &[c], m.max_radius());
        let tol = 0.02 * mu + 8.0 * a * (4.0 / 1500.0);
        if (covered - mu).abs() > tol {
            fails.push(format!(
                "stationarity trial {t}: covered mass {covered:.4} vs target {mu:.4}"
            ));
        }
    }

    // Residual decay, measured in aggregate: at an exactly optimal region the
    // boundary-balance residual is pure quadrature noise, so individual mesh
    // halvings fluctuate but the batch mean must shrink by ≥ 1.5x.
    let ratio_trials = (trials / 5).max(60);
    let mut coarse_sum = 0.0;
    let mut fine_sum = 0.0;
    for t in 0..ratio_trials {
        if fails.len() > 4 {
            break;
        }
        let inst = tilted_instance(&mut rng);
        let coarse = balanced_projection_residual(&inst.m, &inst.phi, 4e-3)
            .expect("valid mesh")
            .residual;
        let fine = balanced_projection_residual(&inst.m, &inst.phi, 2e-3)
            .expect("valid mesh")
            .residual;
        coarse_sum += coarse;
        fine_sum += fine;
        if coarse > 0.5 {
            fails.push(format!("residual trial {t}: residual {coarse:.3} far from zero"));
        }

        // Descent sanity: an outward radial field sees nothing at the
        // optimum and a definite signal at a 10% larger radius.
        let z = inst.center;
        let outward = move |p: &[f64]| vec![if p[0] >= z { 1.0 } else { -1.0 }];
        let (v_opt, drop_opt) =
            first_variation(&inst.m, &inst.phi, &outward, 2e-3).expect("valid mesh");
        let m_pert =
            BallComplementRegion::new(vec![vec![z]], vec![1.1 * inst.radius]).expect("radius");
        let (v_pert, _) = first_variation(&m_pert, &inst.phi, &outward, 2e-3).expect("valid mesh");
        if drop_opt > 1e-12 {
            fails.push(format!("variation trial {t}: unexpected ridge mass"));
        }
        if v_opt.abs() > 5.0 * v_pert.abs() + 1e-9 {
            fails.push(format!(
                "variation trial {t}: optimum signal {v_opt:.2e} above 5x the perturbed {v_pert:.2e}"
            ));
        }
        let _ = inst.minus_mass;
    }
    if fails.is_empty() && fine_sum > coarse_sum / 1.5 && fine_sum > 1e-9 * ratio_trials as f64 {
        fails.push(format!(
            "mean residual only fell from {:.2e} to {:.2e} on mesh halving",
            coarse_sum / ratio_trials as f64,
            fine_sum / ratio_trials as f64
        ));
    }

    let ok = fails.is_empty();
    finish(
        id,
        t0,
        None,
        ok,
        if ok {
            format!(
                "{sandwich_trials} canonicalization, {stat_trials} stationarity, \
                 {ratio_trials} residual trials"
            )
        } else {
            fails.join("; ")
        },
    )
}

/// Asymptotics invariants: more restarts never hurt the constant estimate,
/// the limit density is scale-free, the limit energy is linear in θ and
/// consistent with its closed form, and solver output at moderate k already
/// carries at least the smoothed limit energy.
pub fn asymptotics_invariants(trials: usize) -> CheckOutcome {
    let t0 = Instant::now();
    let id = "asymptotics-invariants";
    let mut rng = seeded(0x0F06);
    let mut fails: Vec<String> = Vec::new();

    let restart_trials = (trials / 150).max(4);
    for t in 0..restart_trials {
        let seed = 31 * t as u64;
        let values: Vec<f64> = [1usize, 2, 4]
            .iter()
            .map(|&r| estimate_theta(1, 8, r, seed, 128).expect("valid call"))
            .collect();
        if values[1] > values[0] || values[2] > values[1] {
            fails.push(format!("restart trial {t}: estimate got worse with more restarts"));
        }
        if fails.len() > 4 {
            break;
        }
    }

    let mut field_trials = 0usize;
    for t in 0..trials {
        if fails.len() > 4 {
            break;
        }
        let n = 1 + t % 2;
        let res = 6 + t % 7;
        let lo = rand_point(&mut rng, n, 1.0);
        let hi: Vec<f64> = lo.iter().map(|x| x + rng.gen_range(1.0..2.5)).collect();
        let bounds = GridBox::new(lo, hi).expect("valid box");
        let zero_rate = rng.gen_range(0.0..0.4);
        let cells = res.pow(n as u32);
        let values: Vec<f64> = (0..cells)
            .map(|_| {
                if rng.gen::<f64>() < zero_rate {
                    0.0
                } else {
                    rng.gen_range(0.2..2.0)
                }
            })
            .collect();
        let density =
            GriddedDensity::new(bounds.clone(), vec![res; n], values).expect("valid density");
        let mut doubled = density.clone();
        for v in doubled.values.iter_mut() {
            *v *= 2.0;
        }
        let center: Vec<f64> =
            bounds.lo.iter().zip(&bounds.hi).map(|(a, b)| 0.5 * (a + b)).collect();
        let m = BallComplementRegion::new(
            vec![center],
            vec![rng.gen_range(0.2..0.8)],
        )
        .expect("positive radius");
        let f = DensityField::raw(density);
        let f2 = DensityField::raw(doubled);
        let (rho, rho2) = match (limit_density(&f, &m), limit_density(&f2, &m)) {
            (Ok(a), Ok(b)) => (a, b),
            _ => continue, // support entirely swallowed by the ball
        };
        field_trials += 1;
        for (a, b) in rho.density.values.iter().zip(&rho2.density.values) {
            if (a - b).abs() > 1e-14 * (1.0 + a.abs()) {
                fails.push(format!("density trial {t}: pointwise doubling changed the shape"));
                break;
            }
        }

        let theta = rng.gen_range(0.2..0.5);
        let v1 = gamma_limit_value(&rho, &m, &f, theta);
        let v2 = gamma_limit_value(&rho, &m, &f, 2.0 * theta);
        if v2.to_bits() != (2.0 * v1).to_bits() {
            fails.push(format!("energy trial {t}: doubling theta is not exactly linear"));
        }

        // Closed form for the energy at the limit density itself.
        if v1.is_finite() {
            let p = n as f64 / (n as f64 + 1.0);
            let vol = f.density.cell_volume();
            let mut mid = vec![0.0; n];
            let mut s = crate::util::KahanSum::new();
            for idx in 0..f.density.values.len() {
                let fv = f.density.values[idx];
                if fv <= 0.0 {
                    continue;
                }
                f.density.cell_midpoint(idx, &mut mid);
                if m.contains(&mid) {
                    s.add(fv.powf(p) * vol);
                }
            }
            let oracle = theta * s.total().powf((n as f64 + 1.0) / n as f64);
            if (v1 - oracle).abs() > 1e-6 * (1.0 + oracle.abs()) {
                fails.push(format!(
                    "energy trial {t}: value {v1:.8} vs closed form {oracle:.8}"
                ));
            }
        }
    }

    // Solver output at k = 64 on the uniform square dominates the smoothed
    // limit energy up to 10%.
    let lower_ok = (|| -> Result<(f64, f64), Box<dyn std::error::Error>> {
        let phi = instances::unit_cube_uniform(2, 64);
        let mut cfg = SolverConfig::new(64);
        cfg.restarts = 2;
        cfg.max_iters = 25;
        cfg.init_step = 0.0625;
        cfg.tol = 1e-5;
        cfg.candidate_grid =
            Some(GridSpec { lo: vec![0.0; 2], hi: vec![1.0; 2], per_axis: vec![8; 2] });
        let report = local_search(&phi, &cfg)?;
        let lhs = 8.0 * report.value;
        let template = GriddedDensity::uniform(
            GridBox::new(vec![0.0; 2], vec![1.0; 2])?,
            vec![4, 4],
            1.0,
        )?;
        let smoothed = smooth_empirical(&empirical_measure(&report.best), &template)?;
        let far = BallComplementRegion::new(vec![vec![10.0, 10.0]], vec![0.5])?;
        let f_coarse = DensityField::raw(template.clone());
        let energy = gamma_limit_value(&smoothed, &far, &f_coarse, theta_constant(2).expect("known"));
        Ok((lhs, energy))
    })();
    match lower_ok {
        Ok((lhs, energy)) => {
            if !(lhs >= 0.9 * energy) {
                fails.push(format!(
                    "lower-bound check: rescaled cost {lhs:.4} under 90% of smoothed energy {energy:.4}"
                ));
            }
        }
        Err(e) => fails.push(format!("lower-bound check: {e}")),
    }

    let ok = fails.is_empty();
    finish(
        id,
        t0,
        None,
        ok,
        if ok {
            format!("{restart_trials} restart, {field_trials} density/energy trials")
        } else {
            fails.join("; ")
        },
    )
}

/// Runs all module invariant suites with roughly `trials` randomized trials
/// each (solver-backed suites scale the count down to stay within budget;
/// each outcome reports its own tally).
pub fn property_suite(trials: usize) -> Vec<CheckOutcome> {
    vec![
        measure_invariants(trials),
        geometry_invariants(trials),
        objective_invariants(trials),
        solver_invariants(trials),
        region_invariants(trials),
        asymptotics_invariants(trials),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn outcome_lines_render() {
        let ok = CheckOutcome {
            id: "x".into(),
            passed: true,
            seconds: 0.5,
            details: "fine".into(),
        };
        assert!(ok.line().starts_with("[PASS] x"));
        let bad = CheckOutcome { passed: false, ..ok };
        assert!(bad.line().starts_with("[FAIL] x"));
    }

    #[test]
    fn wrong_reference_constant_fails_the_theta_check() {
        let consts = Constants { theta1: 0.3, ..Constants::default() };
        assert!(!check_theta1(&consts).passed);
    }


    #[test]
    fn small_property_slices_pass() {
        for outcome in property_suite(40) {
            assert!(outcome.passed, "{}", outcome.line());
        }
    }
}
