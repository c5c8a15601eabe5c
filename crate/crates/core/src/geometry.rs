//! Point configurations, ball-complement regions, and their discretizations.
//!
//! The central shape is `M = (∪_i B_{r_i}(y_i))^c`: the complement of a
//! finite union of open balls.  Distances to `M`, projections onto `M`, and
//! finite nets covering `∂M` (or a boundary shell of thickness `ε` inside
//! `M`) are computed here.  Distance queries are tiered: for a point covered
//! by some ball, the radial projection onto a covering sphere is an *exact*
//! nearest point whenever it lands in `M`; otherwise the query falls back to
//! a surface net and reports the net mesh as its error bound.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::util::{dist, unit_ball_volume};

/// Slack for "lies on no open ball" membership tests of net points.
const MEMBER_SLACK: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("point set must be non-empty")]
    EmptyPointSet,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("coordinates must be finite")]
    NonFiniteCoordinate,
    #[error("radius must be strictly positive and finite, got {0}")]
    BadRadius(f64),
    #[error("centers and radii must be non-empty lists of equal length")]
    BadRegionSpec,
    #[error("enlargement radius must be strictly positive and finite, got {0}")]
    BadEps(f64),
}

/// A finite candidate configuration Σ.  Duplicates are allowed;
/// [`Self::distinct_count`] is the cardinality that matters for `#Σ ≤ k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointConfig {
    pub points: Vec<Vec<f64>>,
}

impl PointConfig {
    pub fn new(points: Vec<Vec<f64>>) -> Result<Self, GeometryError> {
        let dim = match points.first() {
            Some(p) => p.len(),
            None => return Err(GeometryError::EmptyPointSet),
        };
        for p in &points {
            if p.len() != dim {
                return Err(GeometryError::DimensionMismatch { expected: dim, got: p.len() });
            }
            if !p.iter().all(|c| c.is_finite()) {
                return Err(GeometryError::NonFiniteCoordinate);
            }
        }
        Ok(Self { points })
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false // constructor rejects empty sets
    }

    pub fn distinct_count(&self) -> usize {
        let mut seen: Vec<&Vec<f64>> = Vec::new();
        for p in &self.points {
            if !seen.iter().any(|q| q.as_slice() == p.as_slice()) {
                seen.push(p);
            }
        }
        seen.len()
    }

    /// Index and distance of the nearest configuration point.
    pub fn nearest(&self, x: &[f64]) -> (usize, f64) {
        let mut best = (0usize, f64::INFINITY);
        for (i, p) in self.points.iter().enumerate() {
            let d = dist(x, p);
            if d < best.1 {
                best = (i, d);
            }
        }
        best
    }

    /// Indices and distances of the two nearest points (`i1 == i2` only when
    /// the configuration is a single point).
    pub fn nearest_two(&self, x: &[f64]) -> (usize, f64, usize, f64) {
        let (mut i1, mut d1) = (0usize, f64::INFINITY);
        let (mut i2, mut d2) = (0usize, f64::INFINITY);
        for (i, p) in self.points.iter().enumerate() {
            let d = dist(x, p);
            if d < d1 {
                i2 = i1;
                d2 = d1;
                i1 = i;
                d1 = d;
            } else if d < d2 {
                i2 = i;
                d2 = d;
            }
        }
        if self.points.len() == 1 {
            (i1, d1, i1, d1)
        } else {
            (i1, d1, i2, d2)
        }
    }
}

/// `dist(x, Σ) = min_{y∈Σ} |x − y|`.
pub fn dist_to_config(x: &[f64], sigma: &PointConfig) -> f64 {
    sigma.nearest(x).1
}

/// Hausdorff distance between two finite point sets.
pub fn hausdorff(a: &[Vec<f64>], b: &[Vec<f64>]) -> Result<f64, GeometryError> {
    if a.is_empty() || b.is_empty() {
        return Err(GeometryError::EmptyPointSet);
    }
    let directed = |from: &[Vec<f64>], to: &[Vec<f64>]| {
        from.iter()
            .map(|p| to.iter().map(|q| dist(p, q)).fold(f64::INFINITY, f64::min))
            .fold(0.0f64, f64::max)
    };
    Ok(directed(a, b).max(directed(b, a)))
}

/// `M = (∪_i B_{r_i}(y_i))^c`, the closed complement of finitely many open
/// balls.  `M` is unbounded and satisfies a uniform external ball condition
/// with radius `min_i r_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallComplementRegion {
    pub centers: Vec<Vec<f64>>,
    pub radii: Vec<f64>,
}

impl BallComplementRegion {
    pub fn new(centers: Vec<Vec<f64>>, radii: Vec<f64>) -> Result<Self, GeometryError> {
        if centers.is_empty() || centers.len() != radii.len() {
            return Err(GeometryError::BadRegionSpec);
        }
        let dim = centers[0].len();
        for c in &centers {
            if c.len() != dim {
                return Err(GeometryError::DimensionMismatch { expected: dim, got: c.len() });
            }
            if !c.iter().all(|v| v.is_finite()) {
                return Err(GeometryError::NonFiniteCoordinate);
            }
        }
        for &r in &radii {
            if !(r > 0.0 && r.is_finite()) {
                return Err(GeometryError::BadRadius(r));
            }
        }
        Ok(Self { centers, radii })
    }

    pub fn dim(&self) -> usize {
        self.centers[0].len()
    }

    pub fn ball_count(&self) -> usize {
        self.radii.len()
    }

    pub fn min_radius(&self) -> f64 {
        self.radii.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_radius(&self) -> f64 {
        self.radii.iter().copied().fold(0.0, f64::max)
    }

    /// Signed clearance: `min_i (|x − y_i| − r_i)`.  Nonnegative exactly on
    /// `M`; for `x ∈ M` it equals `dist(x, M^c)`.
    pub fn margin(&self, x: &[f64]) -> f64 {
        self.centers
            .iter()
            .zip(&self.radii)
            .map(|(c, r)| dist(x, c) - r)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.margin(x) >= 0.0
    }

    /// Diameter of the removed union `∪_i B̄_{r_i}(y_i)`:
    /// `max_{i,j} (|y_i − y_j| + r_i + r_j)` (exact, including `i = j`).
    pub fn scene_diameter(&self) -> f64 {
        let mut d: f64 = 0.0;
        for (i, (ci, ri)) in self.centers.iter().zip(&self.radii).enumerate() {
            for (cj, rj) in self.centers.iter().zip(&self.radii).skip(i) {
                d = d.max(dist(ci, cj) + ri + rj);
            }
        }
        d
    }

    /// Diameter of the center set alone.
    pub fn centers_diameter(&self) -> f64 {
        let mut d: f64 = 0.0;
        for (i, ci) in self.centers.iter().enumerate() {
            for cj in &self.centers[i + 1..] {
                d = d.max(dist(ci, cj));
            }
        }
        d
    }
}

/// Upper bound `n·ω_n·(diam K + R′)^n / R` on the surface area of `∂M`,
/// where `K` is the center set, `R′ = max_i r_i`, `R = min_i r_i`, and
/// `ω_n` is the unit-ball volume.  For a single ball this is exactly the
/// sphere area.
pub fn perimeter_bound(m: &BallComplementRegion) -> f64 {
    let n = m.dim();
    n as f64 * unit_ball_volume(n) * (m.centers_diameter() + m.max_radius()).powi(n as i32)
        / m.min_radius()
}

/// Grid constant appearing in the net cardinality bounds.  Nets bucket their
/// samples on a cubic grid of step `0.75·δ/√n` and resolve features at scale
/// `δ/8`; cells touching the target set then number at most
/// `c_grid·perimeter_bound/δ^{n−1}` for the boundary itself and
/// `c_grid·perimeter_bound·(ε+2δ)·(√n/δ)^n` for a shell of thickness `ε`.
pub fn grid_constant(n: usize) -> f64 {
    let s = (n as f64).sqrt();
    6.0 * s * (4.0 * s / 3.0).powi(n as i32 - 1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NetKind {
    Surface,
    Volume,
}

/// A finite δ-covering of `∂M` (surface) or of the inner boundary shell
/// `{x ∈ M : dist(x, M^c) ≤ ε}` (volume).  Every target point lies within
/// `mesh` of some net point; `len() ≤ cardinality_bound`.
#[derive(Debug, Clone, PartialEq)]
pub struct Net {
    pub kind: NetKind,
    pub mesh: f64,
    pub points: Vec<Vec<f64>>,
    pub cardinality_bound: f64,
}

impl Net {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn min_dist(&self, x: &[f64]) -> f64 {
        self.points.iter().map(|p| dist(x, p)).fold(f64::INFINITY, f64::min)
    }
}

fn level_grid(eps: f64, h: f64) -> Vec<f64> {
    let mut out = vec![0.0];
    if eps > 0.0 {
        let mut t = h;
        while t < eps {
            out.push(t);
            t += h;
        }
        out.push(eps);
    }
    out
}

/// Unit directions resolving arcs of length `h` on a sphere of radius
/// `radius`.  Dimensions 1–3 are deterministic constructions (endpoints,
/// uniform angles, Fibonacci spiral); higher dimensions fall back to a
/// seeded pseudo-random direction set, which makes the covering property of
/// nets only probabilistic there.
fn sphere_directions(dim: usize, radius: f64, h: f64, salt: u64) -> Vec<Vec<f64>> {
    match dim {
        1 => vec![vec![1.0], vec![-1.0]],
        2 => {
            let count = ((2.0 * std::f64::consts::PI * radius / h).ceil() as usize).max(8);
            (0..count)
                .map(|j| {
                    let a = 2.0 * std::f64::consts::PI * j as f64 / count as f64;
                    vec![a.cos(), a.sin()]
                })
                .collect()
        }
        3 => {
            let count = ((16.0 * (radius / h).powi(2)).ceil() as usize).clamp(32, 2_000_000);
            let golden = std::f64::consts::PI * (3.0 - 5.0f64.sqrt());
            (0..count)
                .map(|j| {
                    let z = 1.0 - (2.0 * j as f64 + 1.0) / count as f64;
                    let rho = (1.0 - z * z).max(0.0).sqrt();
                    let a = golden * j as f64;
                    vec![rho * a.cos(), rho * a.sin(), z]
                })
                .collect()
        }
        n => {
            let want = (4.0 * radius * (n as f64).sqrt() / h).powi(n as i32 - 1);
            let count = (want.min(200_000.0).ceil() as usize).max(64);
            let mut rng = ChaCha8Rng::seed_from_u64(0x6e65_7464 ^ salt);
            let mut out = Vec::with_capacity(count);
            while out.len() < count {
                let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0f64..1.0)).collect();
                let len = v.iter().map(|c| c * c).sum::<f64>().sqrt();
                if len > 1e-3 {
                    out.push(v.into_iter().map(|c| c / len).collect());
                }
            }
            out
        }
    }
}

/// Transversal intersection data of spheres `i` and `j` in 2-D: the two
/// crossing points of the circles, if any.
fn circle_corners(ci: &[f64], ri: f64, cj: &[f64], rj: f64) -> Vec<Vec<f64>> {
    let d = dist(ci, cj);
    if d <= 1e-15 || d >= ri + rj || d <= (ri - rj).abs() {
        return Vec::new();
    }
    let a = (d * d + ri * ri - rj * rj) / (2.0 * d);
    let h2 = ri * ri - a * a;
    if h2 <= 0.0 {
        return Vec::new();
    }
    let h = h2.sqrt();
    let ux = (cj[0] - ci[0]) / d;
    let uy = (cj[1] - ci[1]) / d;
    let bx = ci[0] + a * ux;
    let by = ci[1] + a * uy;
    vec![vec![bx - h * uy, by + h * ux], vec![bx + h * uy, by - h * ux]]
}

/// Orthonormal pair spanning the plane orthogonal to `axis` (3-D).
fn plane_basis(axis: &[f64]) -> ([f64; 3], [f64; 3]) {
    let n = crate::util::norm(axis);
    let u = [axis[0] / n, axis[1] / n, axis[2] / n];
    // Seed with the axis of smallest component to avoid degeneracy.
    let seed = if u[0].abs() <= u[1].abs() && u[0].abs() <= u[2].abs() {
        [1.0, 0.0, 0.0]
    } else if u[1].abs() <= u[2].abs() {
        [0.0, 1.0, 0.0]
    } else {
        [0.0, 0.0, 1.0]
    };
    let dot = seed[0] * u[0] + seed[1] * u[1] + seed[2] * u[2];
    let mut e1 = [seed[0] - dot * u[0], seed[1] - dot * u[1], seed[2] - dot * u[2]];
    let l1 = (e1[0] * e1[0] + e1[1] * e1[1] + e1[2] * e1[2]).sqrt();
    e1 = [e1[0] / l1, e1[1] / l1, e1[2] / l1];
    let e2 = [
        u[1] * e1[2] - u[2] * e1[1],
        u[2] * e1[0] - u[0] * e1[2],
        u[0] * e1[1] - u[1] * e1[0],
    ];
    (e1, e2)
}

/// Fan of sample points `base + t·u(s)` over the wedge of directions between
/// the unit vectors `u1` and `u2` (through their bisector), at the given
/// radial levels.  Covers the region whose nearest point of the removed
/// union is `base` — a reentrant corner shadow.
fn corner_fan(base: &[f64], u1: &[f64], u2: &[f64], levels: &[f64], h: f64, out: &mut Vec<Vec<f64>>) {
    let dim = base.len();
    let dot: f64 = u1.iter().zip(u2).map(|(a, b)| a * b).sum();
    let mut b: Vec<f64> = u2.iter().zip(u1).map(|(v, a)| v - dot * a).collect();
    let bl = crate::util::norm(&b);
    if bl < 1e-12 {
        // Nearly antipodal normals: internal near-tangency; fan degenerates.
        out.push(base.to_vec());
        return;
    }
    for c in &mut b {
        *c /= bl;
    }
    let span = dot.clamp(-1.0, 1.0).acos();
    for &t in levels {
        let steps = if t <= h { 1 } else { ((span * t / h).ceil() as usize).max(1) };
        for s in 0..=steps {
            let ang = span * s as f64 / steps as f64;
            let (ca, sa) = (ang.cos(), ang.sin());
            let p: Vec<f64> = (0..dim).map(|a| base[a] + t * (ca * u1[a] + sa * b[a])).collect();
            out.push(p);
        }
    }
}

/// All shell samples before grid bucketing: radial extrusions of every
/// sphere, plus corner fans at sphere–sphere crossings (2-D points, 3-D
/// circles).  Triple-sphere corners in 3-D are not fanned; coverage near
/// them is approximate.
fn shell_samples(m: &BallComplementRegion, eps: f64, h: f64) -> Vec<Vec<f64>> {
    let dim = m.dim();
    let levels = level_grid(eps, h);
    let mut raw: Vec<Vec<f64>> = Vec::new();

    for (i, (c, &r)) in m.centers.iter().zip(&m.radii).enumerate() {
        let dirs = sphere_directions(dim, r + eps, h, i as u64);
        for u in &dirs {
            for &t in &levels {
                let p: Vec<f64> = (0..dim).map(|a| c[a] + (r + t) * u[a]).collect();
                raw.push(p);
            }
        }
    }

    if dim == 2 {
        for i in 0..m.ball_count() {
            for j in i + 1..m.ball_count() {
                for corner in
                    circle_corners(&m.centers[i], m.radii[i], &m.centers[j], m.radii[j])
                {
                    if m.margin(&corner) < -MEMBER_SLACK {
                        continue;
                    }
                    let u1: Vec<f64> =
                        (0..2).map(|a| (corner[a] - m.centers[i][a]) / m.radii[i]).collect();
                    let u2: Vec<f64> =
                        (0..2).map(|a| (corner[a] - m.centers[j][a]) / m.radii[j]).collect();
                    corner_fan(&corner, &u1, &u2, &levels, h, &mut raw);
                    // Near-tangent crossings leave a wider shadow than the
                    // wedge; patch with a small full-angle fan.
                    let cross = (u1[0] * u2[1] - u1[1] * u2[0]).abs();
                    if cross < 0.25 {
                        let cap = eps.min(16.0 * h);
                        for &t in levels.iter().filter(|&&t| t <= cap && t > 0.0) {
                            let steps = ((2.0 * std::f64::consts::PI * t / h).ceil() as usize)
                                .max(8);
                            for s in 0..steps {
                                let a = 2.0 * std::f64::consts::PI * s as f64 / steps as f64;
                                raw.push(vec![
                                    corner[0] + t * a.cos(),
                                    corner[1] + t * a.sin(),
                                ]);
                            }
                        }
                    }
                }
            }
        }
    } else if dim == 3 {
        for i in 0..m.ball_count() {
            for j in i + 1..m.ball_count() {
                let (ci, ri) = (&m.centers[i], m.radii[i]);
                let (cj, rj) = (&m.centers[j], m.radii[j]);
                let d = dist(ci, cj);
                if d <= 1e-15 || d >= ri + rj || d <= (ri - rj).abs() {
                    continue;
                }
                let a = (d * d + ri * ri - rj * rj) / (2.0 * d);
                let rho2 = ri * ri - a * a;
                if rho2 <= 0.0 {
                    continue;
                }
                let rho = rho2.sqrt();
                let axis: Vec<f64> = (0..3).map(|k| cj[k] - ci[k]).collect();
                let (e1, e2) = plane_basis(&axis);
                let q: Vec<f64> = (0..3).map(|k| ci[k] + a * axis[k] / d).collect();
                let steps = ((2.0 * std::f64::consts::PI * rho / h).ceil() as usize).max(8);
                for s in 0..steps {
                    let ang = 2.0 * std::f64::consts::PI * s as f64 / steps as f64;
                    let corner: Vec<f64> = (0..3)
                        .map(|k| q[k] + rho * (ang.cos() * e1[k] + ang.sin() * e2[k]))
                        .collect();
                    if m.margin(&corner) < -MEMBER_SLACK {
                        continue;
                    }
                    let u1: Vec<f64> = (0..3).map(|k| (corner[k] - ci[k]) / ri).collect();
                    let u2: Vec<f64> = (0..3).map(|k| (corner[k] - cj[k]) / rj).collect();
                    corner_fan(&corner, &u1, &u2, &levels, h, &mut raw);
                }
            }
        }
    }

    // Keep samples outside every open ball; by construction they already lie
    // within the shell depth.
    raw.retain(|p| m.margin(p) >= -MEMBER_SLACK);
    raw
}

fn bucket_samples(samples: Vec<Vec<f64>>, g: f64) -> Vec<Vec<f64>> {
    let mut cells: BTreeMap<Vec<i64>, (f64, Vec<f64>)> = BTreeMap::new();
    for p in samples {
        let key: Vec<i64> = p.iter().map(|&x| (x / g).floor() as i64).collect();
        let d2: f64 = key
            .iter()
            .zip(&p)
            .map(|(&k, &x)| {
                let mid = (k as f64 + 0.5) * g;
                (x - mid) * (x - mid)
            })
            .sum();
        match cells.get_mut(&key) {
            Some(slot) => {
                if d2 < slot.0 {
                    *slot = (d2, p);
                }
            }
            None => {
                cells.insert(key, (d2, p));
            }
        }
    }
    cells.into_values().map(|(_, p)| p).collect()
}

/// δ-covering of the shell `{x ∈ M : dist(x, M^c) ≤ eps}`.  One point per
/// cubic grid cell of step `0.75·δ/√n` (the sample closest to the cell
/// midpoint), with samples resolved at scale `δ/8` so that cell diameter
/// plus sampling gap stays below `δ`.  Output order is canonical
/// (lexicographic by cell index).
///
/// Panics if `delta ≤ 0` or `eps < 0`.
pub fn volume_net(m: &BallComplementRegion, eps: f64, delta: f64) -> Net {
    assert!(delta > 0.0 && delta.is_finite(), "net mesh must be positive");
    assert!(eps >= 0.0 && eps.is_finite(), "shell thickness must be nonnegative");
    let n = m.dim();
    let g = 0.75 * delta / (n as f64).sqrt();
    let h = delta / 8.0;
    let points = bucket_samples(shell_samples(m, eps, h), g);
    let bound = grid_constant(n) * perimeter_bound(m) * (eps + 2.0 * delta)
        * ((n as f64).sqrt() / delta).powi(n as i32);
    Net { kind: NetKind::Volume, mesh: delta, points, cardinality_bound: bound }
}

/// δ-covering of `∂M`: the zero-thickness volume net.  Every point lies on
/// at least one sphere and inside no ball (slack 1e-9).
///
/// Panics if `delta ≤ 0`.
pub fn surface_net(m: &BallComplementRegion, delta: f64) -> Net {
    assert!(delta > 0.0 && delta.is_finite(), "net mesh must be positive");
    let n = m.dim();
    let g = 0.75 * delta / (n as f64).sqrt();
    let h = delta / 8.0;
    let points = bucket_samples(shell_samples(m, 0.0, h), g);
    let bound = grid_constant(n) * perimeter_bound(m) / delta.powi(n as i32 - 1);
    Net { kind: NetKind::Surface, mesh: delta, points, cardinality_bound: bound }
}

/// Distance and projection queries against one region with a lazily built
/// fallback net, shared across many evaluation points.
pub struct RegionDistance<'a> {
    region: &'a BallComplementRegion,
    mesh: f64,
    tie_tol: f64,
    exact_slack: f64,
    net: OnceLock<Net>,
}

impl<'a> RegionDistance<'a> {
    /// Panics if `mesh ≤ 0`.
    pub fn new(region: &'a BallComplementRegion, mesh: f64) -> Self {
        assert!(mesh > 0.0 && mesh.is_finite(), "mesh must be positive");
        let scene = region.scene_diameter();
        Self {
            region,
            mesh,
            tie_tol: 1e-7 * scene,
            exact_slack: 1e-12 * scene,
            net: OnceLock::new(),
        }
    }

    pub fn region(&self) -> &BallComplementRegion {
        self.region
    }

    pub fn mesh(&self) -> f64 {
        self.mesh
    }

    fn fallback_net(&self) -> &Net {
        self.net.get_or_init(|| surface_net(self.region, self.mesh))
    }

    /// Radial candidates on the spheres of balls covering `x` that land in
    /// `M`, as `(point, distance from x)`.  Any such candidate is an exact
    /// nearest point: for every covering ball, points of `M` are at least
    /// `r_i − |x − y_i|` away, and a candidate in `M` attains one of these
    /// lower bounds while being bounded below by all of them.
    fn exact_candidates(&self, x: &[f64]) -> Vec<(Vec<f64>, f64)> {
        let dim = self.region.dim();
        let mut out = Vec::new();
        for (c, &r) in self.region.centers.iter().zip(&self.region.radii) {
            let d = dist(x, c);
            if d >= r {
                continue;
            }
            if d <= self.exact_slack {
                // At (or vanishingly near) the center every direction is
                // radial; probe the axis directions.
                for axis in 0..dim {
                    for sign in [1.0f64, -1.0] {
                        let mut p = c.clone();
                        p[axis] += sign * r;
                        if self.region.margin(&p) >= -self.exact_slack {
                            out.push((p, r));
                        }
                    }
                }
            } else {
                let scale = r / d;
                let p: Vec<f64> = (0..dim).map(|a| c[a] + scale * (x[a] - c[a])).collect();
                if self.region.margin(&p) >= -self.exact_slack {
                    out.push((p, r - d));
                }
            }
        }
        out
    }

    /// `(dist(x, M), error bound)`.  Exact (bound 0) for `x ∈ M` and
    /// whenever a radial candidate lands in `M`; otherwise the minimum
    /// distance to the surface net with bound equal to the mesh.
    pub fn eval(&self, x: &[f64]) -> (f64, f64) {
        if self.region.margin(x) >= 0.0 {
            return (0.0, 0.0);
        }
        let cands = self.exact_candidates(x);
        if !cands.is_empty() {
            let v = cands.iter().map(|(_, d)| *d).fold(f64::INFINITY, f64::min);
            return (v, 0.0);
        }
        let net = self.fallback_net();
        let v = net.min_dist(x);
        debug_assert!(v.is_finite(), "surface net is never empty");
        (v, self.mesh)
    }

    /// Nearest point of `M` and a uniqueness flag.  The flag turns false
    /// when two candidates within `tie_tol = 1e-7·scene diameter` of the
    /// minimum are mutually farther apart than `tie_tol` — `x` is then at or
    /// near the ridge of non-unique projections.
    pub fn project(&self, x: &[f64]) -> (Vec<f64>, bool) {
        if self.region.margin(x) >= 0.0 {
            return (x.to_vec(), true);
        }
        let cands = self.exact_candidates(x);
        let pool: Vec<(Vec<f64>, f64)> = if !cands.is_empty() {
            cands
        } else {
            let net = self.fallback_net();
            net.points.iter().map(|p| (p.clone(), dist(x, p))).collect()
        };
        let best = pool.iter().map(|(_, d)| *d).fold(f64::INFINITY, f64::min);
        let near: Vec<&Vec<f64>> =
            pool.iter().filter(|(_, d)| *d <= best + self.tie_tol).map(|(p, _)| p).collect();
        let mut unique = true;
        'outer: for (i, p) in near.iter().enumerate() {
            for q in &near[i + 1..] {
                if dist(p, q) > self.tie_tol {
                    unique = false;
                    break 'outer;
                }
            }
        }
        let mut best_point = None;
        for (p, d) in &pool {
            if *d <= best {
                best_point = Some(p.clone());
                break;
            }
        }
        (best_point.expect("non-empty candidate pool"), unique)
    }
}

/// One-shot `dist(x, M)` with error bound; see [`RegionDistance::eval`].
pub fn dist_to_region(x: &[f64], m: &BallComplementRegion, mesh: f64) -> (f64, f64) {
    RegionDistance::new(m, mesh).eval(x)
}

/// One-shot nearest point of `M`; see [`RegionDistance::project`].
pub fn project_region(x: &[f64], m: &BallComplementRegion, mesh: f64) -> (Vec<f64>, bool) {
    RegionDistance::new(m, mesh).project(x)
}

/// Checks the uniform external ball condition with radius `r_ext`: every
/// boundary point of `M` must admit a ball of radius `r_ext` tangent at it
/// whose interior avoids `M`.  For ball complements this holds exactly when
/// `r_ext ≤ min_i r_i`; the analytic test is additionally verified on
/// `samples` sampled boundary points by probing the tangent ball's interior
/// and boundary.
pub fn external_ball_check(m: &BallComplementRegion, r_ext: f64, samples: usize) -> bool {
    assert!(samples >= 1, "need at least one sample");
    assert!(r_ext > 0.0 && r_ext.is_finite(), "external radius must be positive");
    let analytic = r_ext <= m.min_radius() * (1.0 + 1e-12);
    if !analytic {
        return false;
    }

    let dim = m.dim();
    let scene = m.scene_diameter();
    let tol_near = 0.05 * r_ext + 1e-9 * scene;

    // Deterministic boundary sample: uncovered sphere points, round-robin.
    let mut boundary: Vec<(usize, Vec<f64>)> = Vec::new();
    let per_ball = (samples / m.ball_count()).max(4);
    for (i, (c, &r)) in m.centers.iter().zip(&m.radii).enumerate() {
        let h = 2.0 * std::f64::consts::PI * r / per_ball as f64;
        for u in sphere_directions(dim, r, h.max(1e-9 * r), i as u64) {
            let p: Vec<f64> = (0..dim).map(|a| c[a] + r * u[a]).collect();
            if m.margin(&p) >= -MEMBER_SLACK {
                boundary.push((i, p));
            }
            if boundary.len() >= samples * 2 {
                break;
            }
        }
    }
    boundary.truncate(samples);

    for (i, x) in &boundary {
        let c = &m.centers[*i];
        let r = m.radii[*i];
        // Tangent ball center: step from x toward the sphere center.
        let z: Vec<f64> = (0..dim).map(|a| x[a] + r_ext * (c[a] - x[a]) / r).collect();
        for shell in [0.9f64, 1.0] {
            for u in sphere_directions(dim, r_ext, r_ext / 8.0, 0xb411) {
                let p: Vec<f64> = (0..dim).map(|a| z[a] + shell * r_ext * u[a]).collect();
                let covered = m.margin(&p) <= MEMBER_SLACK * (1.0 + scene);
                if !covered && dist(&p, x) > tol_near {
                    return false;
                }
            }
        }
    }
    true
}

/// Base set of an ε-enlargement.
#[derive(Debug, Clone)]
pub enum EnlargeBase {
    Points(PointConfig),
    /// The removed union `M^c` of a ball-complement region.
    RegionComplement(BallComplementRegion),
}

/// Open ε-enlargement `(E)_ε = ∪_{x∈E} B_ε(x)` as a membership predicate.
#[derive(Debug, Clone)]
pub struct Enlargement {
    base: EnlargeBase,
    eps: f64,
}

impl Enlargement {
    pub fn new(base: EnlargeBase, eps: f64) -> Result<Self, GeometryError> {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(GeometryError::BadEps(eps));
        }
        Ok(Self { base, eps })
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// Strict membership in the open enlargement.
    pub fn contains(&self, x: &[f64]) -> bool {
        match &self.base {
            EnlargeBase::Points(cfg) => dist_to_config(x, cfg) < self.eps,
            // (M^c)_ε = ∪ B_{r_i+ε}(y_i): margin below ε.
            EnlargeBase::RegionComplement(m) => m.margin(x) < self.eps,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ball(center: Vec<f64>, r: f64) -> BallComplementRegion {
        BallComplementRegion::new(vec![center], vec![r]).unwrap()
    }

    #[test]
    fn dist_to_config_cases() {
        let sigma = PointConfig::new(vec![vec![3.0, 4.0]]).unwrap();
        assert_eq!(dist_to_config(&[0.0, 0.0], &sigma), 5.0);
        assert_eq!(dist_to_config(&[3.0, 4.0], &sigma), 0.0);
    }

    #[test]
    fn nearest_two_orders_by_distance() {
        let sigma = PointConfig::new(vec![vec![0.0], vec![10.0], vec![3.0]]).unwrap();
        let (i1, d1, i2, d2) = sigma.nearest_two(&[2.0]);
        assert_eq!((i1, i2), (2, 0));
        assert_eq!((d1, d2), (1.0, 2.0));
    }

    #[test]
    fn hausdorff_cases() {
        let a = vec![vec![0.0]];
        let b = vec![vec![3.0]];
        assert_eq!(hausdorff(&a, &a).unwrap(), 0.0);
        assert_eq!(hausdorff(&a, &b).unwrap(), 3.0);
        let c = vec![vec![0.0], vec![1.0]];
        let d = vec![vec![1.0], vec![2.0]];
        assert_eq!(hausdorff(&c, &d).unwrap(), 1.0);
        assert!(hausdorff(&[], &a).is_err());
    }

    #[test]
    fn dist_to_region_in_region_is_zero() {
        let m = ball(vec![0.0, 0.0], 1.0);
        assert_eq!(dist_to_region(&[2.0, 0.0], &m, 0.1), (0.0, 0.0));
    }

    #[test]
    fn dist_to_region_center_is_radius_exact() {
        let m = ball(vec![0.0, 0.0], 1.5);
        let (v, e) = dist_to_region(&[0.0, 0.0], &m, 0.1);
        assert_eq!(e, 0.0);
        assert!((v - 1.5).abs() < 1e-12);
    }

    #[test]
    fn dist_to_region_interval_case() {
        // Two 1-D balls whose union is (−3, 3).
        let m = BallComplementRegion::new(vec![vec![-1.0], vec![1.0]], vec![2.0, 2.0]).unwrap();
        let (v, e) = dist_to_region(&[1.0], &m, 0.05);
        assert_eq!(e, 0.0);
        assert!((v - 2.0).abs() < 1e-12);
    }

    #[test]
    fn dist_to_region_lens_fallback() {
        // Overlapping disks of radius 2 at (±1, 0): from the lens midpoint
        // the nearest region points are the circle crossings (0, ±√3).
        let m = BallComplementRegion::new(
            vec![vec![-1.0, 0.0], vec![1.0, 0.0]],
            vec![2.0, 2.0],
        )
        .unwrap();
        let mesh = 0.01;
        let (v, e) = dist_to_region(&[0.0, 0.0], &m, mesh);
        assert_eq!(e, mesh);
        let exact = 3.0f64.sqrt();
        assert!(v >= exact - 1e-9, "net points lie in M, got {v}");
        assert!(v <= exact + mesh, "covering bound violated, got {v}");
    }

    #[test]
    fn project_region_cases() {
        let m = ball(vec![0.0], 1.0);
        let (p, unique) = project_region(&[5.0], &m, 0.1);
        assert_eq!(p, vec![5.0]);
        assert!(unique);

        // Ball center in 1-D: two antipodal nearest points.
        let (_, unique) = project_region(&[0.0], &m, 0.1);
        assert!(!unique);

        // Off-center in 2-D: unique radial projection.
        let m2 = ball(vec![0.0, 0.0], 2.0);
        let (p, unique) = project_region(&[1.0, 0.0], &m2, 0.1);
        assert!(unique);
        assert!((p[0] - 2.0).abs() < 1e-12 && p[1].abs() < 1e-12);
    }

    #[test]
    fn surface_net_1d_is_exact() {
        let m = ball(vec![0.0], 1.25);
        let net = surface_net(&m, 0.1);
        assert_eq!(net.points, vec![vec![-1.25], vec![1.25]]);
        assert!(net.len() as f64 <= net.cardinality_bound);
    }

    #[test]
    fn surface_net_2d_single_ball() {
        let m = ball(vec![0.0, 0.0], 1.0);
        let delta = 0.1;
        let net = surface_net(&m, delta);
        let circumference_cells = 2.0 * std::f64::consts::PI / delta;
        assert!(net.len() as f64 >= circumference_cells * 0.8);
        assert!(net.len() as f64 <= circumference_cells * 4.0);
        assert!(net.len() as f64 <= net.cardinality_bound);
        for p in &net.points {
            assert!((crate::util::norm(p) - 1.0).abs() <= 1e-9);
        }
        // Covering: boundary points within delta of the net.
        for j in 0..500 {
            let a = 2.0 * std::f64::consts::PI * (j as f64 + 0.37) / 500.0;
            assert!(net.min_dist(&[a.cos(), a.sin()]) <= delta);
        }
    }

    #[test]
    fn volume_net_zero_eps_matches_surface_net() {
        let m = BallComplementRegion::new(
            vec![vec![0.0, 0.0], vec![1.5, 0.2]],
            vec![1.0, 0.8],
        )
        .unwrap();
        let v = volume_net(&m, 0.0, 0.12);
        let s = surface_net(&m, 0.12);
        assert_eq!(v.points, s.points);
        assert_eq!(v.kind, NetKind::Volume);
        assert_eq!(s.kind, NetKind::Surface);
    }

    #[test]
    fn volume_net_1d_shell() {
        let r = 1.0;
        let (eps, delta) = (0.2, 0.05);
        let m = ball(vec![0.0], r);
        let net = volume_net(&m, eps, delta);
        assert!(net.len() as f64 <= net.cardinality_bound);
        // Shell [r, r+eps] and its mirror are covered within delta.
        let mut t = 0.0;
        while t <= eps {
            assert!(net.min_dist(&[r + t]) <= delta);
            assert!(net.min_dist(&[-r - t]) <= delta);
            t += eps / 40.0;
        }
        // All net points lie in the shell.
        for p in &net.points {
            let margin = m.margin(p);
            assert!(margin >= -1e-9 && margin <= eps + 1e-9);
        }
    }

    #[test]
    fn perimeter_bound_cases() {
        let m2 = ball(vec![0.0, 0.0], 3.0);
        assert!((perimeter_bound(&m2) - 2.0 * std::f64::consts::PI * 3.0).abs() < 1e-12);
        let m1 = ball(vec![0.0], 5.0);
        assert!((perimeter_bound(&m1) - 2.0).abs() < 1e-12);

        // Nondecreasing in the spread of centers.
        let near = BallComplementRegion::new(
            vec![vec![0.0, 0.0], vec![1.0, 0.0]],
            vec![1.0, 1.0],
        )
        .unwrap();
        let far = BallComplementRegion::new(
            vec![vec![0.0, 0.0], vec![4.0, 0.0]],
            vec![1.0, 1.0],
        )
        .unwrap();
        assert!(perimeter_bound(&far) > perimeter_bound(&near));
    }

    #[test]
    fn external_ball_cases() {
        let m = BallComplementRegion::new(
            vec![vec![0.0, 0.0], vec![1.2, 0.0]],
            vec![1.0, 1.0],
        )
        .unwrap();
        assert!(external_ball_check(&m, 1.0, 64));
        assert!(external_ball_check(&m, 1e-6, 64));
        assert!(!external_ball_check(&m, 2.0, 64));
    }

    #[test]
    fn enlargement_membership() {
        let cfg = PointConfig::new(vec![vec![0.0]]).unwrap();
        let e = Enlargement::new(EnlargeBase::Points(cfg.clone()), 1.0).unwrap();
        assert!(e.contains(&[0.0]));
        assert!(e.contains(&[0.999]));
        assert!(!e.contains(&[1.0]));

        let wider = Enlargement::new(EnlargeBase::Points(cfg), 2.0).unwrap();
        for x in [-1.5, -0.5, 0.3, 0.99] {
            if e.contains(&[x]) {
                assert!(wider.contains(&[x]));
            }
        }
    }

    #[test]
    fn enlarged_complement_is_inflated_union() {
        let m = ball(vec![0.0, 0.0], 1.0);
        let e = Enlargement::new(EnlargeBase::RegionComplement(m), 0.5).unwrap();
        assert!(e.contains(&[1.4, 0.0]));
        assert!(!e.contains(&[1.6, 0.0]));
    }
}
