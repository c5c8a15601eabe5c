//! The unconstrained relaxation: replace a point configuration by the
//! complement of a union of balls around the repulsive atoms, optimize the
//! radii, and certify (near-)optimality through first-variation, projection
//! balance, and mass checks.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{
    dist_to_config, BallComplementRegion, GeometryError, PointConfig, RegionDistance,
};
use crate::measure::{
    w1_distance, Atom, MeasureComponent, MeasureError, SignedMeasure,
};
use crate::objective::{eval_f_region, ObjectiveError, ObjectiveValue};
use crate::solve_k::{boundedness_certificate, SolveError};
use crate::util::{dist, KahanSum};

#[derive(Debug, Error)]
pub enum RegionError {
    #[error("the negative part must be purely atomic; discretize it first")]
    NotAtomic,
    #[error("negative atom {index} lies on the configuration; its ball would be empty")]
    DegenerateRadius { index: usize },
    #[error("target mass {target} must lie strictly between 0 and the total mass {total}")]
    BadTarget { target: f64, total: f64 },
    #[error("mesh must be positive, got {0}")]
    BadMesh(f64),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Objective(#[from] ObjectiveError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Solve(#[from] SolveError),
}

/// Certificate bundle assembled by the callers that run the full battery.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimalityReport {
    /// One first-variation value per supplied test field.
    pub first_variation_values: Vec<f64>,
    pub balanced_projection_residual: f64,
    pub mass_gap: f64,
    pub dropped_ridge_mass: f64,
}

/// Replaces `Σ` by the region `M = (∪_y B_{dist(y,Σ)}(y))^c`, one ball per
/// negative atom.  `Σ ⊂ M`, each atom keeps its distance
/// (`dist(y, M) = dist(y, Σ)` exactly), and the positive attraction term can
/// only improve, so the region is at least as good as the configuration.
pub fn canonicalize(
    sigma: &PointConfig,
    phi: &SignedMeasure,
) -> Result<BallComplementRegion, RegionError> {
    if !phi.minus.densities.is_empty() {
        return Err(RegionError::NotAtomic);
    }
    let mut centers = Vec::with_capacity(phi.minus.atoms.len());
    let mut radii = Vec::with_capacity(phi.minus.atoms.len());
    for (index, atom) in phi.minus.atoms.iter().enumerate() {
        let r = dist_to_config(&atom.location, sigma);
        if r <= 0.0 {
            return Err(RegionError::DegenerateRadius { index });
        }
        centers.push(atom.location.clone());
        radii.push(r);
    }
    Ok(BallComplementRegion::new(centers, radii)?)
}

/// Quadrature mass of the closed ball `B_r(center)`.
pub fn ball_mass(nodes: &crate::measure::NodeSet, center: &[f64], r: f64) -> f64 {
    let mut acc = KahanSum::new();
    for j in 0..nodes.len() {
        if dist(nodes.point(j), center) <= r {
            acc.add(nodes.weights[j]);
        }
    }
    acc.total()
}

/// Radius `r` with `φ⁺(B_r(center)) = target_mass`, by bisection on the
/// monotone quadrature mass.  The mass is a step function of the radius, so
/// the bracket is driven essentially to floating-point width; `tol` is the
/// mass defect at which an already-tight bracket is accepted early.
pub fn stationary_radius(
    phi_plus: &MeasureComponent,
    center: &[f64],
    target_mass: f64,
    tol: f64,
) -> Result<f64, RegionError> {
    let total = phi_plus.total_mass();
    if !(target_mass > 0.0 && target_mass < total) {
        return Err(RegionError::BadTarget { target: target_mass, total });
    }
    let nodes = phi_plus.node_set();
    let mut lo = 0.0f64;
    let mut hi = 1.0f64;
    while ball_mass(&nodes, center, hi) < target_mass {
        hi *= 2.0;
        if hi > 1e12 {
            return Err(RegionError::BadTarget { target: target_mass, total });
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let m = ball_mass(&nodes, center, mid);
        let tight = hi - lo <= 1.5e-8 * hi.max(1.0);
        if tight && (m - target_mass).abs() <= tol {
            return Ok(mid);
        }
        if m < target_mass {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * hi.max(1.0) {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn golden_section(mut lo: f64, mut hi: f64, tol: f64, mut g: impl FnMut(f64) -> f64) -> (f64, f64) {
    const INVPHI: f64 = 0.618_033_988_749_894_9;
    let mut a = hi - INVPHI * (hi - lo);
    let mut b = lo + INVPHI * (hi - lo);
    let mut ga = g(a);
    let mut gb = g(b);
    while hi - lo > tol {
        if ga <= gb {
            hi = b;
            b = a;
            gb = ga;
            a = hi - INVPHI * (hi - lo);
            ga = g(a);
        } else {
            lo = a;
            a = b;
            ga = gb;
            b = lo + INVPHI * (hi - lo);
            gb = g(b);
        }
    }
    if ga <= gb {
        (a, ga)
    } else {
        (b, gb)
    }
}

/// Cyclic coordinate descent over the ball radii: each radius is updated by
/// golden-section minimization of the region objective over
/// `[mesh, R_out + scene diameter]`, keeping a change only when it improves.
/// Stops when a full sweep moves every radius by less than `mesh`.
/// Expects the negative part to be atomic with atoms at `init.centers`.
pub fn optimize_radii(
    phi: &SignedMeasure,
    init: &BallComplementRegion,
    mesh: f64,
    max_iters: usize,
) -> Result<(BallComplementRegion, ObjectiveValue), RegionError> {
    if !(mesh > 0.0 && mesh.is_finite()) {
        return Err(RegionError::BadMesh(mesh));
    }
    let mut region = init.clone();
    let mut current = eval_f_region(&region, phi, mesh)?;
    let scene = region.scene_diameter();
    let r_hi = match boundedness_certificate(phi, current.value) {
        Ok(r_out) => r_out + scene,
        Err(_) => 2.0 * scene.max(1.0),
    };

    for _ in 0..max_iters {
        let mut max_change = 0.0f64;
        for i in 0..region.radii.len() {
            let old = region.radii[i];
            let (r_new, f_new) = golden_section(mesh, r_hi.max(mesh * 2.0), mesh * 0.1, |r| {
                let mut probe = region.clone();
                probe.radii[i] = r;
                eval_f_region(&probe, phi, mesh).map_or(f64::INFINITY, |v| v.value)
            });
            if f_new < current.value {
                region.radii[i] = r_new;
                current = eval_f_region(&region, phi, mesh)?;
                max_change = max_change.max((r_new - old).abs());
            }
        }
        if max_change < mesh {
            break;
        }
    }
    Ok((region, current))
}

/// Quadrature of `⟨X(π(x)), (π(x) − x)/|π(x) − x|⟩ dφ` over the nodes
/// strictly outside `M` whose nearest-point projection is unique.  Nodes on
/// the equidistance ridge have no well-defined projection; they are skipped
/// and their absolute mass is returned alongside the value.
pub fn first_variation(
    m: &BallComplementRegion,
    phi: &SignedMeasure,
    field: &dyn Fn(&[f64]) -> Vec<f64>,
    mesh: f64,
) -> Result<(f64, f64), RegionError> {
    if !(mesh > 0.0 && mesh.is_finite()) {
        return Err(RegionError::BadMesh(mesh));
    }
    let rd = RegionDistance::new(m, mesh);
    let scale = m.scene_diameter().max(1.0);
    let mut acc = KahanSum::new();
    let mut dropped = KahanSum::new();
    let mut visit = |component: &MeasureComponent, sign: f64| {
        let nodes = component.node_set();
        for j in 0..nodes.len() {
            let x = nodes.point(j);
            if m.margin(x) >= 0.0 {
                continue;
            }
            let w = sign * nodes.weights[j];
            let (p, unique) = rd.project(x);
            let d = dist(&p, x);
            if !unique || d <= 1e-15 * scale {
                dropped.add(w.abs());
                continue;
            }
            let x_field = field(&p);
            let mut dot = 0.0;
            for a in 0..x.len() {
                dot += x_field[a] * (p[a] - x[a]) / d;
            }
            acc.add(w * dot);
        }
    };
    visit(&phi.plus, 1.0);
    visit(&phi.minus, -1.0);
    Ok((acc.total(), dropped.total()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BalanceReport {
    /// Transport distance between the two boundary pushforwards after
    /// padding the lighter one at its own barycenter.
    pub residual: f64,
    /// Pushforward mass mismatch `φ⁺(M^c) − φ⁻(M^c)` before padding.
    pub mass_gap: f64,
    /// `φ⁺(M) − (m⁺ − m⁻)`; nonnegative (up to quadrature) at an optimum.
    pub region_mass_gap: f64,
}

fn barycenter(atoms: &[Atom]) -> Option<Vec<f64>> {
    let first = atoms.first()?;
    let mut c = vec![0.0; first.location.len()];
    let mut mass = 0.0;
    for a in atoms {
        for (ci, xi) in c.iter_mut().zip(&a.location) {
            *ci += a.weight * xi;
        }
        mass += a.weight;
    }
    if mass <= 0.0 {
        return None;
    }
    for ci in c.iter_mut() {
        *ci /= mass;
    }
    Some(c)
}

/// Pushes `φ⁺⌊M^c` and `φ⁻⌊M^c` to the boundary along nearest-point
/// projections (quadrature nodes refined to the mesh) and measures how far
/// the two boundary measures are from coinciding.
pub fn balanced_projection_residual(
    m: &BallComplementRegion,
    phi: &SignedMeasure,
    mesh: f64,
) -> Result<BalanceReport, RegionError> {
    if !(mesh > 0.0 && mesh.is_finite()) {
        return Err(RegionError::BadMesh(mesh));
    }
    let rd = RegionDistance::new(m, mesh);
    let push = |component: &MeasureComponent| -> Vec<Atom> {
        let nodes = component.node_set_refined(mesh);
        let mut atoms = Vec::new();
        for j in 0..nodes.len() {
            let x = nodes.point(j);
            if m.margin(x) >= 0.0 {
                continue;
            }
            let (p, _) = rd.project(x);
            atoms.push(Atom { location: p, weight: nodes.weights[j] });
        }
        atoms
    };
    let mut plus_push = push(&phi.plus);
    let mut minus_push = push(&phi.minus);
    let mass = |atoms: &[Atom]| {
        let mut acc = KahanSum::new();
        for a in atoms {
            acc.add(a.weight);
        }
        acc.total()
    };
    let mp = mass(&plus_push);
    let mm = mass(&minus_push);
    let mass_gap = mp - mm;

    // Pad the lighter side at its own barycenter so the transport problem is
    // balanced; an empty side borrows the other's barycenter.
    let pad = |atoms: &mut Vec<Atom>, deficit: f64, fallback: &[Atom]| {
        if deficit <= 0.0 {
            return;
        }
        let at = barycenter(atoms)
            .or_else(|| barycenter(fallback))
            .unwrap_or_else(|| vec![0.0; m.dim()]);
        atoms.push(Atom { location: at, weight: deficit });
    };
    if mass_gap > 0.0 {
        let plus_snapshot = plus_push.clone();
        pad(&mut minus_push, mass_gap, &plus_snapshot);
    } else {
        let minus_snapshot = minus_push.clone();
        pad(&mut plus_push, -mass_gap, &minus_snapshot);
    }

    let residual = if plus_push.is_empty() && minus_push.is_empty() {
        0.0
    } else {
        w1_distance(&plus_push, &minus_push)?
    };
    Ok(BalanceReport { residual, mass_gap, region_mass_gap: mass_check(m, phi) })
}

/// `φ⁺(M) − (m⁺ − m⁻)` by quadrature; negative values beyond the quadrature
/// tolerance disqualify `M` from being optimal.
pub fn mass_check(m: &BallComplementRegion, phi: &SignedMeasure) -> f64 {
    let nodes = phi.plus.node_set();
    let mut inside = KahanSum::new();
    for j in 0..nodes.len() {
        if m.margin(nodes.point(j)) >= 0.0 {
            inside.add(nodes.weights[j]);
        }
    }
    inside.total() - (phi.mass_plus() - phi.mass_minus())
}

/// Sufficient conditions for the region problem to avoid the negative
/// support entirely; `None` means neither test fired (not a refutation).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeparationStatus {
    HullsDisjoint,
    DistanceExceedsDiameter,
    None,
}

fn hull_vertex(points: &[Vec<f64>], direction: &[f64], maximize: bool) -> usize {
    let mut best = 0usize;
    let mut best_dot = f64::NEG_INFINITY;
    for (i, p) in points.iter().enumerate() {
        let mut dot = 0.0;
        for (a, b) in p.iter().zip(direction) {
            dot += a * b;
        }
        let dot = if maximize { dot } else { -dot };
        if dot > best_dot {
            best_dot = dot;
            best = i;
        }
    }
    best
}

/// Frank–Wolfe approximation of the closest pair between two convex hulls,
/// followed by an exact certificate test on the resulting direction: the
/// hulls are declared disjoint only when the direction strictly separates
/// every node of one set from every node of the other.
fn hulls_strictly_separated(p: &[Vec<f64>], q: &[Vec<f64>]) -> bool {
    let dim = p[0].len();
    let mut x = p[0].clone();
    let mut y = q[0].clone();
    for it in 0..400 {
        let g: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a - b).collect();
        let vp = &p[hull_vertex(p, &g, false)];
        let wq = &q[hull_vertex(q, &g, true)];
        let step = 2.0 / (it as f64 + 2.0);
        for a in 0..dim {
            x[a] += step * (vp[a] - x[a]);
            y[a] += step * (wq[a] - y[a]);
        }
    }
    let axis: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a - b).collect();
    if axis.iter().all(|&c| c == 0.0) {
        return false;
    }
    let dot = |v: &[f64]| {
        let mut s = 0.0;
        for (a, b) in v.iter().zip(&axis) {
            s += a * b;
        }
        s
    };
    let p_min = p.iter().map(|v| dot(v)).fold(f64::INFINITY, f64::min);
    let q_max = q.iter().map(|v| dot(v)).fold(f64::NEG_INFINITY, f64::max);
    let scale = p
        .iter()
        .chain(q)
        .map(|v| dot(v).abs())
        .fold(0.0f64, f64::max)
        .max(1.0);
    p_min > q_max + 1e-12 * scale
}

/// Tests, in order: (1) the convex hulls of the two quadrature supports are
/// strictly separated; (2) the distance between the supports exceeds the
/// diameter of the positive support.  Returns the first condition that
/// holds.
pub fn separation_check(phi: &SignedMeasure) -> SeparationStatus {
    let plus = phi.plus.node_set();
    let minus = phi.minus.node_set();
    if plus.is_empty() {
        return SeparationStatus::None;
    }
    if minus.is_empty() {
        return SeparationStatus::HullsDisjoint;
    }
    let p: Vec<Vec<f64>> = (0..plus.len()).map(|j| plus.point(j).to_vec()).collect();
    let q: Vec<Vec<f64>> = (0..minus.len()).map(|j| minus.point(j).to_vec()).collect();

    if hulls_strictly_separated(&p, &q) {
        return SeparationStatus::HullsDisjoint;
    }

    let mut diam_plus = 0.0f64;
    for (i, a) in p.iter().enumerate() {
        for b in &p[i + 1..] {
            diam_plus = diam_plus.max(dist(a, b));
        }
    }
    let mut support_dist = f64::INFINITY;
    for a in &p {
        for b in &q {
            support_dist = support_dist.min(dist(a, b));
        }
    }
    if support_dist > diam_plus {
        return SeparationStatus::DistanceExceedsDiameter;
    }
    SeparationStatus::None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{Atom, GridBox, GriddedDensity, MeasureComponent};
    use crate::objective::eval_f;

    fn atoms(pts: &[(&[f64], f64)]) -> MeasureComponent {
        MeasureComponent::from_atoms(
            pts.iter().map(|(p, w)| Atom::new(p.to_vec(), *w).unwrap()).collect(),
        )
    }

    fn uniform_1d(lo: f64, hi: f64, value: f64, res: usize) -> MeasureComponent {
        let density = GriddedDensity::uniform(
            GridBox::new(vec![lo], vec![hi]).unwrap(),
            vec![res],
            value,
        )
        .unwrap();
        MeasureComponent::from_density(density)
    }

    /// φ⁺ ≡ 1 on [−2,2], φ⁻ = 2δ₀; region optimum is the complement of
    /// (−1, 1).
    fn block_atomic(res: usize) -> SignedMeasure {
        SignedMeasure::new(uniform_1d(-2.0, 2.0, 1.0, res), atoms(&[(&[0.0], 2.0)]), 1).unwrap()
    }

    #[test]
    fn canonicalize_single_atom() {
        let phi = SignedMeasure::new(
            atoms(&[(&[5.0], 3.0)]),
            atoms(&[(&[0.0], 1.0)]),
            1,
        )
        .unwrap();
        let sigma = PointConfig::new(vec![vec![2.0]]).unwrap();
        let m = canonicalize(&sigma, &phi).unwrap();
        assert_eq!(m.centers, vec![vec![0.0]]);
        assert_eq!(m.radii, vec![2.0]);
        assert!(m.contains(&[2.0]));
    }

    #[test]
    fn canonicalize_nested_intervals() {
        let phi = SignedMeasure::new(
            atoms(&[(&[5.0], 3.0)]),
            atoms(&[(&[0.0], 1.0), (&[1.0], 1.0)]),
            1,
        )
        .unwrap();
        let sigma = PointConfig::new(vec![vec![3.0]]).unwrap();
        let m = canonicalize(&sigma, &phi).unwrap();
        assert_eq!(m.radii, vec![3.0, 2.0]);
        // Union of the two balls is exactly (−3, 3).
        assert!(m.margin(&[2.9]) < 0.0);
        assert!(m.contains(&[3.0]));
        assert!(m.contains(&[-3.0]));
    }

    #[test]
    fn canonicalize_rejects_degenerate_and_nonatomic() {
        let phi = SignedMeasure::new(
            atoms(&[(&[5.0], 3.0)]),
            atoms(&[(&[0.0], 1.0)]),
            1,
        )
        .unwrap();
        let on_atom = PointConfig::new(vec![vec![0.0]]).unwrap();
        assert!(matches!(
            canonicalize(&on_atom, &phi),
            Err(RegionError::DegenerateRadius { index: 0 })
        ));

        let phi_dense = SignedMeasure::new(
            atoms(&[(&[5.0], 3.0)]),
            uniform_1d(-0.25, 0.25, 4.0, 10),
            1,
        )
        .unwrap();
        let sigma = PointConfig::new(vec![vec![2.0]]).unwrap();
        assert!(matches!(canonicalize(&sigma, &phi_dense), Err(RegionError::NotAtomic)));
    }

    #[test]
    fn canonicalization_never_hurts() {
        let phi = SignedMeasure::new(
            uniform_1d(-2.0, 2.0, 1.0, 400),
            atoms(&[(&[0.0], 1.0), (&[0.5], 0.5)]),
            1,
        )
        .unwrap();
        for sigma_pts in [vec![vec![1.5]], vec![vec![-1.0], vec![2.0]], vec![vec![0.9], vec![1.7]]]
        {
            let sigma = PointConfig::new(sigma_pts).unwrap();
            let f_sigma = eval_f(&sigma, &phi).unwrap().value;
            let m = canonicalize(&sigma, &phi).unwrap();
            let f_region = eval_f_region(&m, &phi, 1e-3).unwrap();
            // Repulsion term is preserved exactly; attraction can only drop.
            assert!(
                f_region.value <= f_sigma + f_region.quadrature_step + 1e-9,
                "region {} vs config {}",
                f_region.value,
                f_sigma
            );
            // Every configuration point stays in the region.
            for p in &sigma.points {
                assert!(m.contains(p));
            }
        }
    }

    #[test]
    fn stationary_radius_uniform_line() {
        let plus = uniform_1d(-2.0, 2.0, 1.0, 40_000);
        let r = stationary_radius(&plus, &[0.0], 1.0, 1e-3).unwrap();
        assert!((r - 0.5).abs() <= 1e-4, "r = {r}");
        let mass = ball_mass(&plus.node_set(), &[0.0], r);
        assert!((mass - 1.0).abs() <= 1e-3, "mass = {mass}");
    }

    #[test]
    fn stationary_radius_disk() {
        let b = GridBox::new(vec![-2.0, -2.0], vec![2.0, 2.0]).unwrap();
        let density = GriddedDensity::from_fn(b, vec![200, 200], |x| {
            if x[0] * x[0] + x[1] * x[1] <= 4.0 {
                1.0 / (2.0 * std::f64::consts::PI)
            } else {
                0.0
            }
        })
        .unwrap();
        let plus = MeasureComponent::from_density(density);
        let r = stationary_radius(&plus, &[0.0, 0.0], 1.0, 1e-2).unwrap();
        assert!((r - std::f64::consts::SQRT_2).abs() < 5e-3, "r = {r}");
    }

    #[test]
    fn stationary_radius_edge_cases() {
        let plus = uniform_1d(-2.0, 2.0, 1.0, 1000);
        assert!(matches!(
            stationary_radius(&plus, &[0.0], 4.0, 1e-3),
            Err(RegionError::BadTarget { .. })
        ));
        assert!(matches!(
            stationary_radius(&plus, &[0.0], 5.0, 1e-3),
            Err(RegionError::BadTarget { .. })
        ));
        let tiny = stationary_radius(&plus, &[0.0], 1e-2, 1e-3).unwrap();
        assert!(tiny < 0.02, "tiny = {tiny}");
    }

    #[test]
    fn optimize_radii_single_atom_uniform() {
        let phi = SignedMeasure::new(
            uniform_1d(-2.0, 2.0, 1.0, 4000),
            atoms(&[(&[0.0], 1.0)]),
            1,
        )
        .unwrap();
        let init = BallComplementRegion::new(vec![vec![0.0]], vec![1.5]).unwrap();
        let (m, value) = optimize_radii(&phi, &init, 1e-3, 50).unwrap();
        assert!((m.radii[0] - 0.5).abs() < 3e-3, "r = {}", m.radii[0]);
        assert!((value.value - (-0.25)).abs() < 3e-3, "F = {}", value.value);
    }

    #[test]
    fn optimize_radii_block_instance() {
        let phi = block_atomic(4000);
        let init = BallComplementRegion::new(vec![vec![0.0]], vec![0.3]).unwrap();
        let (m, value) = optimize_radii(&phi, &init, 1e-3, 50).unwrap();
        assert!((m.radii[0] - 1.0).abs() < 2e-3, "r = {}", m.radii[0]);
        // F(r) = r² − 2r has minimum −1 at r = 1.
        assert!((value.value - (-1.0)).abs() < 3e-3, "F = {}", value.value);
    }

    #[test]
    fn first_variation_empty_domain() {
        let phi = SignedMeasure::positive(atoms(&[(&[3.0], 1.0)]), 1).unwrap();
        let m = BallComplementRegion::new(vec![vec![0.0]], vec![1.0]).unwrap();
        let (v, dropped) = first_variation(&m, &phi, &|_| vec![1.0], 1e-3).unwrap();
        assert_eq!(v, 0.0);
        assert_eq!(dropped, 0.0);
    }

    #[test]
    fn first_variation_cancels_at_symmetric_optimum() {
        let phi = block_atomic(4000);
        let m = BallComplementRegion::new(vec![vec![0.0]], vec![1.0]).unwrap();
        let (v, dropped) = first_variation(&m, &phi, &|_| vec![1.0], 1e-3).unwrap();
        assert!(v.abs() < 1e-6, "v = {v}");
        // The negative atom sits at the ball center, equidistant from the
        // whole boundary: no unique projection, so its mass is set aside.
        assert_eq!(dropped, 2.0);
    }

    #[test]
    fn first_variation_outward_field_matches_radius_derivative() {
        // φ⁺ ≡ 1 on [−2,2], φ⁻ ≡ 4 on [−0.25,0.25]; r = 0.8 is suboptimal
        // (the minimizing radius is 1), so the variation against the outward
        // field must reproduce dF/dr = 2r − 2.
        let phi = SignedMeasure::new(
            uniform_1d(-2.0, 2.0, 1.0, 8000),
            uniform_1d(-0.25, 0.25, 4.0, 1000),
            1,
        )
        .unwrap();
        let r = 0.8;
        let m = BallComplementRegion::new(vec![vec![0.0]], vec![r]).unwrap();
        let outward = |p: &[f64]| vec![p[0].signum()];
        let (v, dropped) = first_variation(&m, &phi, &outward, 1e-3).unwrap();
        assert_eq!(dropped, 0.0);
        // Central difference of F(M_r) in the radius.
        let h = 1e-3;
        let f = |rr: f64| {
            let mm = BallComplementRegion::new(vec![vec![0.0]], vec![rr]).unwrap();
            eval_f_region(&mm, &phi, 1e-4).unwrap().value
        };
        let dfdr = (f(r + h) - f(r - h)) / (2.0 * h);
        assert!(
            (v - dfdr).abs() <= 0.05 * dfdr.abs().max(0.05),
            "variation {v} vs derivative {dfdr}"
        );
    }

    #[test]
    fn balance_residual_small_at_optimum_large_off_optimum() {
        let phi = SignedMeasure::new(
            uniform_1d(-2.0, 2.0, 1.0, 400),
            uniform_1d(-0.25, 0.25, 4.0, 50),
            1,
        )
        .unwrap();
        let opt = BallComplementRegion::new(vec![vec![0.0]], vec![1.0]).unwrap();
        let report = balanced_projection_residual(&opt, &phi, 1e-3).unwrap();
        assert!(report.residual < 0.02, "residual {}", report.residual);
        assert!(report.mass_gap.abs() < 5e-3, "gap {}", report.mass_gap);
        assert!(report.region_mass_gap.abs() < 5e-3);

        let wide = BallComplementRegion::new(vec![vec![0.0]], vec![1.5]).unwrap();
        let report = balanced_projection_residual(&wide, &phi, 1e-3).unwrap();
        assert!(report.residual > 0.4, "residual {}", report.residual);
    }

    #[test]
    fn balance_residual_empty_outside() {
        let phi = SignedMeasure::positive(atoms(&[(&[5.0], 1.0)]), 1).unwrap();
        let m = BallComplementRegion::new(vec![vec![0.0]], vec![1.0]).unwrap();
        let report = balanced_projection_residual(&m, &phi, 1e-2).unwrap();
        assert_eq!(report.residual, 0.0);
        assert_eq!(report.mass_gap, 0.0);
    }

    #[test]
    fn mass_check_cases() {
        let phi = SignedMeasure::new(
            uniform_1d(-2.0, 2.0, 1.0, 4000),
            atoms(&[(&[0.0], 1.0)]),
            1,
        )
        .unwrap();
        let opt = BallComplementRegion::new(vec![vec![0.0]], vec![0.5]).unwrap();
        assert!(mass_check(&opt, &phi).abs() < 2e-3);
        let oversized = BallComplementRegion::new(vec![vec![0.0]], vec![1.5]).unwrap();
        assert!(mass_check(&oversized, &phi) < -0.5);
    }

    #[test]
    fn separation_cases() {
        // Separated clusters.
        let phi = SignedMeasure::new(
            atoms(&[(&[0.0, 0.0], 1.0), (&[0.0, 1.0], 1.0)]),
            atoms(&[(&[5.0, 0.0], 0.5)]),
            2,
        )
        .unwrap();
        assert_eq!(separation_check(&phi), SeparationStatus::HullsDisjoint);

        // Hulls overlap on the line: [1,8] contains {0 is outside, 4 inside}.
        let line = SignedMeasure::new(
            atoms(&[(&[1.0], 2.0), (&[8.0], 6.0)]),
            atoms(&[(&[0.0], 1.0), (&[4.0], 4.0)]),
            1,
        )
        .unwrap();
        assert_eq!(separation_check(&line), SeparationStatus::None);

        // Tight positive cluster inside the hull of two distant negative
        // atoms: hull test fails, distance/diameter test fires.
        let pierced = SignedMeasure::new(
            atoms(&[(&[0.0, 0.01], 1.0), (&[0.01, 0.0], 1.0)]),
            atoms(&[(&[-10.0, 0.0], 0.5), (&[10.0, 0.0], 0.5)]),
            2,
        )
        .unwrap();
        assert_eq!(separation_check(&pierced), SeparationStatus::DistanceExceedsDiameter);

        // Circle against its center.
        let n = 64;
        let circle: Vec<Atom> = (0..n)
            .map(|i| {
                let a = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
                Atom::new(vec![a.cos(), a.sin()], 1.0 / n as f64).unwrap()
            })
            .collect();
        let probe = SignedMeasure::new(
            MeasureComponent::from_atoms(circle),
            atoms(&[(&[0.0, 0.0], 1.0)]),
            2,
        )
        .unwrap();
        assert_eq!(separation_check(&probe), SeparationStatus::None);
    }
}
