//! Large-`k` behavior: quantization-constant estimation, the limit density
//! of optimally placed points, the rescaled limit energy, and `k`-sweep
//! experiments tracking how solver output approaches the region optimum.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{hausdorff, BallComplementRegion, GeometryError, PointConfig};
use crate::measure::{
    discretize, Atom, GriddedDensity, MeasureComponent, MeasureError, SignedMeasure,
};
use crate::objective::{eval_f_region, rescaled_gap, ObjectiveError};
use crate::solve_k::{local_search, GridSpec, SolveError, SolverConfig};
use crate::util::{kahan_sum, unit_ball_volume, KahanSum};

#[derive(Debug, Error)]
pub enum AsymptoticsError {
    #[error("dimension {0} not supported here; expected 1, 2, or 3")]
    BadDimension(usize),
    #[error("k schedule must be non-empty and strictly increasing")]
    BadSchedule,
    #[error("candidate region list is empty")]
    EmptyCandidates,
    #[error("the density integrates to zero over the region; no limit density exists there")]
    ZeroSupportMass,
    #[error("density grids do not match (same box and resolution required)")]
    GridMismatch,
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Objective(#[from] ObjectiveError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// A gridded density with an explicit normalization claim.  `normalized`
/// means the values integrate to 1 (within 1e-9), which is what the limit
/// objects require.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityField {
    pub density: GriddedDensity,
    pub normalized: bool,
}

impl DensityField {
    /// Wraps a density without normalizing it.
    pub fn raw(density: GriddedDensity) -> Self {
        Self { density, normalized: false }
    }

    /// Rescales the values so the field integrates to exactly 1.
    pub fn normalized(mut density: GriddedDensity) -> Result<Self, AsymptoticsError> {
        let mass = density.mass();
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(AsymptoticsError::ZeroSupportMass);
        }
        for v in density.values.iter_mut() {
            *v /= mass;
        }
        Ok(Self { density, normalized: true })
    }

    pub fn mass(&self) -> f64 {
        self.density.mass()
    }

    fn same_grid(&self, other: &DensityField) -> bool {
        self.density.bounds == other.density.bounds
            && self.density.resolution == other.density.resolution
    }
}

/// Uniform probability measure on a configuration: weight `1/#Σ` per point,
/// duplicates merged.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalMeasure {
    pub atoms: Vec<Atom>,
}

impl EmpiricalMeasure {
    pub fn total_mass(&self) -> f64 {
        kahan_sum(self.atoms.iter().map(|a| a.weight))
    }
}

pub fn empirical_measure(sigma: &PointConfig) -> EmpiricalMeasure {
    let w = 1.0 / sigma.len() as f64;
    let mut atoms: Vec<Atom> = Vec::new();
    for p in &sigma.points {
        match atoms.iter_mut().find(|a| a.location == *p) {
            Some(a) => a.weight += w,
            None => atoms.push(Atom { location: p.clone(), weight: w }),
        }
    }
    EmpiricalMeasure { atoms }
}

/// Known values of the unit-cube quantization constant: exact in 1-D, the
/// closed form `(4 + 3·ln 3)/(6·√2·3^{3/4})` ≈ 0.377 for the plane, unknown
/// beyond.
pub fn theta_constant(n: usize) -> Option<f64> {
    match n {
        1 => Some(0.25),
        2 => Some((4.0 + 3.0 * 3.0f64.ln()) / (6.0 * 2.0f64.sqrt() * 3.0f64.powf(0.75))),
        _ => None,
    }
}

/// Monte-Carlo-free estimate of θ_n: place `k` points against the uniform
/// density on `[0,1]^n` (no repulsion) with the multistart solver and return
/// `k^{1/n}` times the best average distance.  Restart 0 starts from the
/// `k`-point lattice of cell midpoints.
pub fn estimate_theta(
    n: usize,
    k: usize,
    restarts: usize,
    seed: u64,
    grid_res: usize,
) -> Result<f64, AsymptoticsError> {
    if !(1..=3).contains(&n) {
        return Err(AsymptoticsError::BadDimension(n));
    }
    let density = GriddedDensity::uniform(
        crate::measure::GridBox::new(vec![0.0; n], vec![1.0; n])?,
        vec![grid_res; n],
        1.0,
    )?;
    let phi = SignedMeasure::positive(MeasureComponent::from_density(density), n)?;

    let side = (k as f64).powf(1.0 / n as f64).round().max(1.0) as usize;
    let per_axis = if side.pow(n as u32) >= k { side } else { side + 1 };
    let spacing = 1.0 / per_axis as f64;

    let mut cfg = SolverConfig::new(k);
    cfg.restarts = restarts;
    cfg.seed = seed;
    cfg.max_iters = if n == 1 { 60 } else { 8 };
    cfg.init_step = 0.5 * spacing;
    cfg.step_decay = 0.5;
    cfg.tol = 1e-4 * spacing;
    cfg.candidate_grid = Some(GridSpec {
        lo: vec![0.0; n],
        hi: vec![1.0; n],
        per_axis: vec![per_axis; n],
    });

    let report = local_search(&phi, &cfg)?;
    Ok((k as f64).powf(1.0 / n as f64) * report.value)
}

/// Lower bound `ω_n^{−1/n}·n/(n+1)` that any θ_n estimate must respect.
pub fn theta_lower_bound(n: usize) -> f64 {
    unit_ball_volume(n).powf(-1.0 / n as f64) * n as f64 / (n as f64 + 1.0)
}

/// The asymptotic placement density on a region: proportional to
/// `(f⁺)^{n/(n+1)}` on cells whose midpoint lies in `M`, zero elsewhere,
/// normalized to unit mass.
pub fn limit_density(
    f_plus: &DensityField,
    m: &BallComplementRegion,
) -> Result<DensityField, AsymptoticsError> {
    let n = f_plus.density.bounds.dim();
    let exponent = n as f64 / (n as f64 + 1.0);
    let mut shaped = f_plus.density.clone();
    let mut mid = vec![0.0; n];
    for idx in 0..shaped.values.len() {
        shaped.cell_midpoint(idx, &mut mid);
        let v = shaped.values[idx];
        shaped.values[idx] = if m.contains(&mid) && v > 0.0 { v.powf(exponent) } else { 0.0 };
    }
    DensityField::normalized(shaped)
}

/// Rescaled limit energy `θ·∫_M f⁺/ρ^{1/n}`: the cellwise sum over midpoints
/// in `M`, with `+∞` as soon as the placement density vanishes somewhere the
/// mass does not.
pub fn gamma_limit_value(
    rho: &DensityField,
    m: &BallComplementRegion,
    f_plus: &DensityField,
    theta: f64,
) -> f64 {
    assert!(theta > 0.0, "theta must be positive");
    assert!(rho.same_grid(f_plus), "rho and f_plus must share a grid");
    let n = f_plus.density.bounds.dim();
    let vol = f_plus.density.cell_volume();
    let mut acc = KahanSum::new();
    let mut mid = vec![0.0; n];
    for idx in 0..f_plus.density.values.len() {
        let f = f_plus.density.values[idx];
        if f <= 0.0 {
            continue;
        }
        f_plus.density.cell_midpoint(idx, &mut mid);
        if !m.contains(&mid) {
            continue;
        }
        let r = rho.density.values[idx];
        if r <= 0.0 {
            return f64::INFINITY;
        }
        acc.add(f * r.powf(-1.0 / n as f64) * vol);
    }
    theta * acc.total()
}

/// Measures accepted by [`g_infinity`]: an absolutely continuous density or
/// a purely atomic empirical measure (whose a.c. part vanishes).
#[derive(Debug, Clone, Copy)]
pub enum GammaMeasure<'a> {
    Density(&'a DensityField),
    Empirical(&'a EmpiricalMeasure),
}

impl GammaMeasure<'_> {
    fn mass_outside(&self, m: &BallComplementRegion) -> f64 {
        match self {
            GammaMeasure::Density(d) => {
                let n = d.density.bounds.dim();
                let vol = d.density.cell_volume();
                let mut mid = vec![0.0; n];
                let mut acc = KahanSum::new();
                for (idx, v) in d.density.values.iter().enumerate() {
                    if *v <= 0.0 {
                        continue;
                    }
                    d.density.cell_midpoint(idx, &mut mid);
                    if !m.contains(&mid) {
                        acc.add(v * vol);
                    }
                }
                acc.total()
            }
            GammaMeasure::Empirical(e) => {
                let mut acc = KahanSum::new();
                for a in &e.atoms {
                    if !m.contains(&a.location) {
                        acc.add(a.weight);
                    }
                }
                acc.total()
            }
        }
    }
}

/// Smallest limit energy over the candidate regions that actually carry the
/// measure (mass outside ≤ `support_tol`).  An empirical measure has no
/// absolutely continuous part, so its energy is `+∞` wherever `f⁺` lives;
/// smooth it onto a grid first ([`smooth_empirical`]) for a finite reading.
pub fn g_infinity(
    mu: GammaMeasure<'_>,
    candidates: &[BallComplementRegion],
    f_plus: &DensityField,
    theta: f64,
    support_tol: f64,
) -> Result<f64, AsymptoticsError> {
    if candidates.is_empty() {
        return Err(AsymptoticsError::EmptyCandidates);
    }
    let mut best = f64::INFINITY;
    for m in candidates {
        if mu.mass_outside(m) > support_tol {
            continue;
        }
        let value = match mu {
            GammaMeasure::Density(rho) => gamma_limit_value(rho, m, f_plus, theta),
            GammaMeasure::Empirical(_) => {
                // Zero a.c. part: finite only if the positive density
                // vanishes on the candidate.
                let n = f_plus.density.bounds.dim();
                let mut mid = vec![0.0; n];
                let mut any = false;
                for (idx, v) in f_plus.density.values.iter().enumerate() {
                    if *v > 0.0 {
                        f_plus.density.cell_midpoint(idx, &mut mid);
                        if m.contains(&mid) {
                            any = true;
                            break;
                        }
                    }
                }
                if any {
                    f64::INFINITY
                } else {
                    0.0
                }
            }
        };
        best = best.min(value);
    }
    Ok(best)
}

/// Histogram of an empirical measure on the template grid, normalized to a
/// probability density.  Atoms outside the box are clamped to the nearest
/// cell.
pub fn smooth_empirical(
    mu: &EmpiricalMeasure,
    template: &GriddedDensity,
) -> Result<DensityField, AsymptoticsError> {
    let mut hist = template.clone();
    for v in hist.values.iter_mut() {
        *v = 0.0;
    }
    let vol = hist.cell_volume();
    let b = hist.bounds.clone();
    for a in &mu.atoms {
        let clamped: Vec<f64> = a
            .location
            .iter()
            .enumerate()
            .map(|(i, &x)| x.clamp(b.lo[i], b.hi[i]))
            .collect();
        let idx = hist.cell_index_of(&clamped).expect("clamped into the box");
        hist.values[idx] += a.weight / vol;
    }
    DensityField::normalized(hist)
}

/// One row of a `k`-sweep: solver value, rescaled gap to the region optimum,
/// Hausdorff distance to the (support-restricted) region, and transport
/// distance between the empirical measure and the limit density.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub k: usize,
    pub f_value: f64,
    pub rescaled_gap: f64,
    pub hausdorff_to_m: f64,
    pub w1_to_rho: f64,
}

/// Runs the solver across the schedule and compares each configuration
/// against the region optimum `m_star` and the limit density `rho_star`.
/// Rows are reported as computed — heuristic non-monotonicity included.
pub fn convergence_report(
    phi: &SignedMeasure,
    k_schedule: &[usize],
    cfg: &SolverConfig,
    m_star: &BallComplementRegion,
    rho_star: &DensityField,
) -> Result<Vec<ConvergenceRow>, AsymptoticsError> {
    if k_schedule.is_empty() || k_schedule.windows(2).any(|w| w[1] <= w[0]) {
        return Err(AsymptoticsError::BadSchedule);
    }
    let n = phi.dim;
    let mesh = 1e-4 * m_star.scene_diameter().max(1.0);
    let f_ref = eval_f_region(m_star, phi, mesh)?.value;

    // Point cloud for the Hausdorff comparison: midpoints of cells where the
    // limit density is positive, i.e. the region clipped to the support.
    let mut cloud: Vec<Vec<f64>> = Vec::new();
    {
        let mut mid = vec![0.0; n];
        for (idx, v) in rho_star.density.values.iter().enumerate() {
            if *v > 0.0 {
                rho_star.density.cell_midpoint(idx, &mut mid);
                cloud.push(mid.clone());
            }
        }
    }

    let rho_component = MeasureComponent::from_density(rho_star.density.clone());
    let extent: f64 = {
        let b = &rho_star.density.bounds;
        (0..n).map(|i| b.hi[i] - b.lo[i]).fold(0.0, f64::max)
    };

    let rows: Vec<Result<ConvergenceRow, AsymptoticsError>> = k_schedule
        .par_iter()
        .map(|&k| {
            let mut cfg_k = cfg.clone();
            cfg_k.k = k;
            if let Some(grid) = &mut cfg_k.candidate_grid {
                let side = (k as f64).powf(1.0 / n as f64).round().max(1.0) as usize;
                let side = if side.pow(n as u32) >= k { side } else { side + 1 };
                grid.per_axis = vec![side; n];
            }
            let report = local_search(phi, &cfg_k)?;
            let gap = rescaled_gap(k, report.value, f_ref, n);
            let h = hausdorff(&cloud, &report.best.points)?;
            let step = extent * (k as f64).powf(-1.0 / n as f64);
            let rho_atoms = discretize(&rho_component, step)?;
            let empirical = empirical_measure(&report.best);
            let w1 = crate::measure::w1_distance(&empirical.atoms, &rho_atoms)?;
            Ok(ConvergenceRow {
                k,
                f_value: report.value,
                rescaled_gap: gap,
                hausdorff_to_m: h,
                w1_to_rho: w1,
            })
        })
        .collect();
    rows.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::GridBox;

    fn unit_interval_density(res: usize, f: impl Fn(f64) -> f64) -> GriddedDensity {
        GriddedDensity::from_fn(GridBox::new(vec![0.0], vec![1.0]).unwrap(), vec![res], |x| {
            f(x[0])
        })
        .unwrap()
    }

    fn far_region(dim: usize) -> BallComplementRegion {
        // A ball far away: the region contains every point of interest.
        BallComplementRegion::new(vec![vec![50.0; dim]], vec![1.0]).unwrap()
    }

    #[test]
    fn empirical_measure_merges_duplicates() {
        let sigma =
            PointConfig::new(vec![vec![0.0], vec![1.0], vec![0.0], vec![2.0]]).unwrap();
        let mu = empirical_measure(&sigma);
        assert_eq!(mu.atoms.len(), 3);
        assert_eq!(mu.atoms[0].weight, 0.5);
        assert!((mu.total_mass() - 1.0).abs() < 1e-15);

        let single = empirical_measure(&PointConfig::new(vec![vec![3.0, 4.0]]).unwrap());
        assert_eq!(single.atoms.len(), 1);
        assert_eq!(single.atoms[0].weight, 1.0);
    }

    #[test]
    fn theta_constants() {
        assert_eq!(theta_constant(1), Some(0.25));
        let t2 = theta_constant(2).unwrap();
        assert!((t2 - 0.377).abs() < 5e-4, "t2 = {t2}");
        assert_eq!(theta_constant(3), None);
        // Estimates can never undercut the isoperimetric-style lower bound.
        assert!(theta_lower_bound(2) < t2);
        assert!((theta_lower_bound(2) - 2.0 / (3.0 * std::f64::consts::PI.sqrt())).abs() < 1e-12);
    }

    #[test]
    fn theta_one_dimensional_exact() {
        let est = estimate_theta(1, 32, 1, 7, 512).unwrap();
        assert!((est - 0.25).abs() < 0.25 * 0.005, "est = {est}");
    }

    #[test]
    fn theta_monotone_in_restarts() {
        let few = estimate_theta(1, 8, 1, 11, 128).unwrap();
        let more = estimate_theta(1, 8, 3, 11, 128).unwrap();
        assert!(more <= few + 1e-12, "few {few} more {more}");
    }

    #[test]
    fn limit_density_power_law() {
        // f⁺(x) = x on [0,1] → ρ = (3/2)√x.
        let f = DensityField::raw(unit_interval_density(1000, |x| x));
        let m = far_region(1);
        let rho = limit_density(&f, &m).unwrap();
        assert!(rho.normalized);
        assert!((rho.mass() - 1.0).abs() < 1e-12);
        let idx = rho.density.cell_index_of(&[0.25]).unwrap();
        let mut mid = vec![0.0];
        rho.density.cell_midpoint(idx, &mut mid);
        let expect = 1.5 * mid[0].sqrt();
        let got = rho.density.values[idx];
        assert!((got - expect).abs() < 1e-3, "got {got} expect {expect}");
    }

    #[test]
    fn limit_density_ignores_pointwise_scaling() {
        let f = DensityField::raw(unit_interval_density(100, |x| 1.0 + x));
        let doubled = DensityField::raw(unit_interval_density(100, |x| 2.0 * (1.0 + x)));
        let m = far_region(1);
        let a = limit_density(&f, &m).unwrap();
        let b = limit_density(&doubled, &m).unwrap();
        for (x, y) in a.density.values.iter().zip(&b.density.values) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn limit_density_zero_overlap_errors() {
        let f = DensityField::raw(unit_interval_density(100, |_| 1.0));
        // Region that swallows the whole support: the complement ball covers
        // [0,1], leaving nothing.
        let m = BallComplementRegion::new(vec![vec![0.5]], vec![10.0]).unwrap();
        assert!(matches!(limit_density(&f, &m), Err(AsymptoticsError::ZeroSupportMass)));
    }

    #[test]
    fn gamma_value_closed_form() {
        // f⁺ ≡ 1 on [−2,2] restricted to M = (−1,1)^c: Φ(ρ*) = θ₁·(∫1)² =
        // 0.25·4 = 1 on the length-2 remainder with ρ* = 1/2.
        let b = GridBox::new(vec![-2.0], vec![2.0]).unwrap();
        let f = DensityField::raw(GriddedDensity::uniform(b, vec![400], 1.0).unwrap());
        let m = BallComplementRegion::new(vec![vec![0.0]], vec![1.0]).unwrap();
        let rho = limit_density(&f, &m).unwrap();
        let phi_value = gamma_limit_value(&rho, &m, &f, 0.25);
        assert!((phi_value - 1.0).abs() < 1e-12, "value = {phi_value}");
        // Doubling θ doubles the value exactly.
        assert_eq!(gamma_limit_value(&rho, &m, &f, 0.5), 2.0 * phi_value);
    }

    #[test]
    fn gamma_value_matches_variational_form() {
        // Φ at ρ* must equal θ·(∫_M (f⁺)^{n/(n+1)})^{(n+1)/n}.
        let f = DensityField::raw(unit_interval_density(2000, |x| 1.0 + x * x));
        let m = far_region(1);
        let rho = limit_density(&f, &m).unwrap();
        let theta = 0.25;
        let phi_value = gamma_limit_value(&rho, &m, &f, theta);
        let vol = f.density.cell_volume();
        let integral = kahan_sum(f.density.values.iter().map(|v| v.sqrt() * vol));
        let oracle = theta * integral.powf(2.0);
        assert!(
            (phi_value - oracle).abs() < 1e-6 * oracle,
            "phi {phi_value} oracle {oracle}"
        );
    }

    #[test]
    fn gamma_value_infinite_on_starved_cells() {
        let f = DensityField::raw(unit_interval_density(100, |_| 1.0));
        let m = far_region(1);
        let mut rho = limit_density(&f, &m).unwrap();
        rho.density.values[50] = 0.0;
        assert_eq!(gamma_limit_value(&rho, &m, &f, 0.25), f64::INFINITY);
    }

    #[test]
    fn limit_density_beats_perturbations() {
        use rand::{Rng, SeedableRng};
        let f = DensityField::raw(unit_interval_density(200, |x| 1.0 + x));
        let m = far_region(1);
        let rho = limit_density(&f, &m).unwrap();
        let best = gamma_limit_value(&rho, &m, &f, 0.25);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(13);
        for _ in 0..20 {
            let mut perturbed = rho.density.clone();
            for v in perturbed.values.iter_mut() {
                *v *= 1.0 + 0.5 * (rng.gen::<f64>() - 0.5);
            }
            let candidate = DensityField::normalized(perturbed).unwrap();
            let value = gamma_limit_value(&candidate, &m, &f, 0.25);
            assert!(value >= best - 1e-9, "perturbed {value} < optimal {best}");
        }
    }

    #[test]
    fn g_infinity_selects_supported_candidate() {
        let f = DensityField::raw(unit_interval_density(100, |_| 1.0));
        let m_far = far_region(1);
        let rho = limit_density(&f, &m_far).unwrap();
        // A second candidate that removes the support entirely.
        let m_covering = BallComplementRegion::new(vec![vec![0.5]], vec![5.0]).unwrap();
        let v = g_infinity(
            GammaMeasure::Density(&rho),
            &[m_covering.clone(), m_far.clone()],
            &f,
            0.25,
            1e-9,
        )
        .unwrap();
        let direct = gamma_limit_value(&rho, &m_far, &f, 0.25);
        assert_eq!(v, direct);
        // Mass outside every candidate → +∞.
        let v = g_infinity(GammaMeasure::Density(&rho), &[m_covering], &f, 0.25, 1e-9).unwrap();
        assert_eq!(v, f64::INFINITY);
        assert!(matches!(
            g_infinity(GammaMeasure::Density(&rho), &[], &f, 0.25, 1e-9),
            Err(AsymptoticsError::EmptyCandidates)
        ));
    }

    #[test]
    fn g_infinity_null_patch_invariance() {
        // Two regions differing only where f⁺ = 0 give the same value.
        let b = GridBox::new(vec![-2.0], vec![2.0]).unwrap();
        let f = DensityField::raw(
            GriddedDensity::from_fn(b, vec![400], |x| if x[0].abs() >= 1.0 { 1.0 } else { 0.0 })
                .unwrap(),
        );
        let m1 = BallComplementRegion::new(vec![vec![0.0]], vec![1.0]).unwrap();
        let m2 = BallComplementRegion::new(vec![vec![0.0]], vec![0.5]).unwrap();
        let rho = limit_density(&f, &m1).unwrap();
        let v1 = g_infinity(GammaMeasure::Density(&rho), &[m1], &f, 0.25, 1e-9).unwrap();
        let v2 = g_infinity(GammaMeasure::Density(&rho), &[m2], &f, 0.25, 1e-9).unwrap();
        assert!((v1 - v2).abs() < 1e-9, "v1 {v1} v2 {v2}");
    }

    #[test]
    fn empirical_measure_has_infinite_energy() {
        let f = DensityField::raw(unit_interval_density(100, |_| 1.0));
        let m = far_region(1);
        let sigma = PointConfig::new(vec![vec![0.25], vec![0.75]]).unwrap();
        let mu = empirical_measure(&sigma);
        let v = g_infinity(GammaMeasure::Empirical(&mu), &[m], &f, 0.25, 1e-9).unwrap();
        assert_eq!(v, f64::INFINITY);
    }

    #[test]
    fn smoothing_recovers_a_density() {
        let sigma = PointConfig::new((0..10).map(|i| vec![0.05 + 0.1 * i as f64]).collect())
            .unwrap();
        let mu = empirical_measure(&sigma);
        let template = unit_interval_density(10, |_| 0.0);
        let smoothed = smooth_empirical(&mu, &template).unwrap();
        assert!((smoothed.mass() - 1.0).abs() < 1e-12);
        for v in &smoothed.density.values {
            assert!((v - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn convergence_report_schedule_validation() {
        let phi = SignedMeasure::positive(
            MeasureComponent::from_atoms(vec![Atom::new(vec![0.0], 1.0).unwrap()]),
            1,
        )
        .unwrap();
        let m = far_region(1);
        let rho = DensityField::normalized(unit_interval_density(10, |_| 1.0)).unwrap();
        let cfg = SolverConfig::new(1);
        assert!(matches!(
            convergence_report(&phi, &[], &cfg, &m, &rho),
            Err(AsymptoticsError::BadSchedule)
        ));
        assert!(matches!(
            convergence_report(&phi, &[4, 4], &cfg, &m, &rho),
            Err(AsymptoticsError::BadSchedule)
        ));
    }

    #[test]
    fn convergence_report_small_sweep() {
        // φ⁺ ≡ 1 on [−2,2], φ⁻ = 2δ₀, optimum M = (−1,1)^c.
        let b = GridBox::new(vec![-2.0], vec![2.0]).unwrap();
        let plus = MeasureComponent::from_density(
            GriddedDensity::uniform(b.clone(), vec![500], 1.0).unwrap(),
        );
        let minus =
            MeasureComponent::from_atoms(vec![Atom::new(vec![0.0], 2.0).unwrap()]);
        let phi = SignedMeasure::new(plus, minus, 1).unwrap();
        let m = BallComplementRegion::new(vec![vec![0.0]], vec![1.0]).unwrap();
        let f = DensityField::raw(GriddedDensity::uniform(b, vec![500], 1.0).unwrap());
        let rho = limit_density(&f, &m).unwrap();

        let mut cfg = SolverConfig::new(1);
        cfg.restarts = 2;
        cfg.seed = 5;
        cfg.max_iters = 60;
        cfg.init_step = 0.3;
        cfg.candidate_grid =
            Some(GridSpec { lo: vec![-2.0], hi: vec![2.0], per_axis: vec![4] });

        let rows = convergence_report(&phi, &[4, 8], &cfg, &m, &rho).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].k, 4);
        assert_eq!(rows[1].k, 8);
        for row in &rows {
            assert!(row.f_value.is_finite());
            assert!(row.hausdorff_to_m >= 0.0);
            assert!(row.w1_to_rho >= 0.0);
        }
        // More points serve the attraction term better.
        assert!(rows[1].f_value <= rows[0].f_value + 1e-9);
    }
}
