//! Solvers for the k-point problem: exact subset enumeration at small scale,
//! seeded multistart descent at medium scale, plus the boundedness
//! certificate that confines minimizing configurations to a computable ball
//! and a probe instance demonstrating that minimizers need not exist when
//! the negative mass matches the positive mass.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{GeometryError, PointConfig};
use crate::measure::{
    bounding_ball, support_norm_bound, Atom, MeasureComponent, MeasureError, NodeSet,
    SignedMeasure,
};
use crate::objective::{eval_f, ObjectiveError};
use crate::util::{dist, kahan_sum, lex_cmp, norm, sort_points, KahanSum};

#[derive(Debug, Error)]
pub enum SolveError {
    #[error(
        "positive mass {plus} does not exceed negative mass {minus}; \
         minimizing configurations can escape to infinity in that regime"
    )]
    MassDominance { plus: f64, minus: f64 },
    #[error("{combos:.3e} candidate subsets exceed the enumeration cap {cap:.3e}; use local_search")]
    EnumerationCap { combos: f64, cap: f64 },
    #[error("invalid solver configuration: {0}")]
    BadConfig(String),
    #[error(transparent)]
    Objective(#[from] ObjectiveError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
}

/// Uniform rectangular lattice specification; generates cell midpoints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub per_axis: Vec<usize>,
}

impl GridSpec {
    /// Cell midpoints in row-major order (last axis fastest).
    pub fn midpoints(&self) -> Vec<Vec<f64>> {
        let dim = self.lo.len();
        let total: usize = self.per_axis.iter().product();
        let mut out = Vec::with_capacity(total);
        for idx in 0..total {
            let mut rem = idx;
            let mut p = vec![0.0; dim];
            for axis in (0..dim).rev() {
                let r = self.per_axis[axis];
                let i = rem % r;
                rem /= r;
                let side = (self.hi[axis] - self.lo[axis]) / r as f64;
                p[axis] = self.lo[axis] + (i as f64 + 0.5) * side;
            }
            out.push(p);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub k: usize,
    pub restarts: usize,
    pub seed: u64,
    pub max_iters: usize,
    pub init_step: f64,
    pub step_decay: f64,
    pub tol: f64,
    /// When present, restart 0 starts from this lattice's midpoints instead
    /// of a weighted sample of the positive quadrature nodes.
    pub candidate_grid: Option<GridSpec>,
}

impl SolverConfig {
    pub fn new(k: usize) -> Self {
        Self {
            k,
            restarts: 4,
            seed: 0,
            max_iters: 100,
            init_step: 0.1,
            step_decay: 0.5,
            tol: 1e-6,
            candidate_grid: None,
        }
    }

    fn validate(&self) -> Result<(), SolveError> {
        if self.k < 1 {
            return Err(SolveError::BadConfig("k must be at least 1".into()));
        }
        if self.restarts < 1 {
            return Err(SolveError::BadConfig("restarts must be at least 1".into()));
        }
        if !(self.step_decay > 0.0 && self.step_decay < 1.0) {
            return Err(SolveError::BadConfig(format!(
                "step_decay must lie in (0, 1), got {}",
                self.step_decay
            )));
        }
        if !(self.init_step > 0.0 && self.init_step.is_finite()) {
            return Err(SolveError::BadConfig(format!(
                "init_step must be positive, got {}",
                self.init_step
            )));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(SolveError::BadConfig(format!("tol must be positive, got {}", self.tol)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub best: PointConfig,
    pub value: f64,
    pub per_restart_values: Vec<f64>,
    /// Total descent sweeps across restarts (subsets evaluated, for the
    /// enumerative solver).
    pub iterations_used: usize,
    /// Certified radius: some point of any configuration at least as good as
    /// this one lies within this distance of the origin.  Infinite when no
    /// certificate exists.
    pub bounding_radius: f64,
    pub seed: u64,
    /// Objective value after each sweep, one trace per restart;
    /// non-increasing within each trace.
    pub traces: Vec<Vec<f64>>,
}

/// Radius `R_out = (F_bound + R·(m⁺ + m⁻)) / (m⁺ − m⁻)`, where `R` bounds
/// the support norm: any configuration whose essential value is at most
/// `F_bound` has a point within `R_out` of the origin.  Requires strictly
/// dominant positive mass.
pub fn boundedness_certificate(phi: &SignedMeasure, f_bound: f64) -> Result<f64, SolveError> {
    let m_plus = phi.mass_plus();
    let m_minus = phi.mass_minus();
    if m_plus <= m_minus {
        return Err(SolveError::MassDominance { plus: m_plus, minus: m_minus });
    }
    let r = support_norm_bound(phi)?;
    Ok((f_bound + r * (m_plus + m_minus)) / (m_plus - m_minus))
}

fn binomial_total(m: usize, k: usize) -> f64 {
    // Σ_{s=1..k} C(m, s), saturating.
    let mut total = 0.0f64;
    for s in 1..=k.min(m) {
        let mut c = 1.0f64;
        for i in 0..s {
            c *= (m - i) as f64 / (i + 1) as f64;
            if !c.is_finite() {
                return f64::INFINITY;
            }
        }
        total += c;
    }
    total
}

/// Exact minimum of the objective over all subsets of at most `k` candidate
/// points.  Subsets are enumerated by increasing size, lexicographically
/// within each size; the earliest minimizer wins ties.  Errors when the
/// subset count exceeds `cap` (default 10⁷).
pub fn brute_force(
    phi: &SignedMeasure,
    candidates: &PointConfig,
    k: usize,
    cap: Option<f64>,
) -> Result<SolveReport, SolveError> {
    if k < 1 {
        return Err(SolveError::BadConfig("k must be at least 1".into()));
    }
    let cap = cap.unwrap_or(1e7);
    let m = candidates.len();
    let combos = binomial_total(m, k);
    if combos > cap {
        return Err(SolveError::EnumerationCap { combos, cap });
    }

    let nodes = NodeSet::signed(phi);
    if nodes.is_empty() {
        return Err(SolveError::Objective(ObjectiveError::EmptyMeasure));
    }
    // Distance matrix candidate × node.
    let dmat: Vec<Vec<f64>> = candidates
        .points
        .iter()
        .map(|p| (0..nodes.len()).map(|j| dist(p, nodes.point(j))).collect())
        .collect();

    let mut best_subset: Vec<usize> = Vec::new();
    let mut best_value = f64::INFINITY;
    let mut evaluated = 0usize;

    // Depth-first over combinations, carrying the running per-node minimum.
    fn descend(
        start: usize,
        remaining: usize,
        chosen: &mut Vec<usize>,
        mins: &[f64],
        dmat: &[Vec<f64>],
        weights: &[f64],
        best_subset: &mut Vec<usize>,
        best_value: &mut f64,
        evaluated: &mut usize,
    ) {
        if remaining == 0 {
            let value = kahan_sum(mins.iter().zip(weights).map(|(d, w)| w * d));
            *evaluated += 1;
            if value < *best_value {
                *best_value = value;
                *best_subset = chosen.clone();
            }
            return;
        }
        for c in start..dmat.len() {
            let row = &dmat[c];
            let new_mins: Vec<f64> =
                mins.iter().zip(row).map(|(m, d)| m.min(*d)).collect();
            chosen.push(c);
            descend(
                c + 1,
                remaining - 1,
                chosen,
                &new_mins,
                dmat,
                weights,
                best_subset,
                best_value,
                evaluated,
            );
            chosen.pop();
        }
    }

    for size in 1..=k.min(m) {
        let mins = vec![f64::INFINITY; nodes.len()];
        let mut chosen = Vec::with_capacity(size);
        descend(
            0,
            size,
            &mut chosen,
            &mins,
            &dmat,
            &nodes.weights,
            &mut best_subset,
            &mut best_value,
            &mut evaluated,
        );
    }

    let mut points: Vec<Vec<f64>> =
        best_subset.iter().map(|&c| candidates.points[c].clone()).collect();
    sort_points(&mut points);
    let best = PointConfig::new(points)?;
    let value = eval_f(&best, phi)?.value;
    let bounding_radius = boundedness_certificate(phi, value).map_or(f64::INFINITY, |r| r);
    Ok(SolveReport {
        best,
        value,
        per_restart_values: vec![value],
        iterations_used: evaluated,
        bounding_radius,
        seed: 0,
        traces: Vec::new(),
    })
}

/// Incremental objective bookkeeping for one configuration: per node, the
/// distance and index of its nearest and second-nearest configuration
/// points.  Trial moves of a single point then cost one pass over the nodes.
struct Descent<'a> {
    nodes: &'a NodeSet,
    points: Vec<Vec<f64>>,
    d1: Vec<f64>,
    i1: Vec<usize>,
    d2: Vec<f64>,
    i2: Vec<usize>,
}

const NO_POINT: usize = usize::MAX;

impl<'a> Descent<'a> {
    fn new(nodes: &'a NodeSet, points: Vec<Vec<f64>>) -> Self {
        let n = nodes.len();
        let mut s = Self {
            nodes,
            points,
            d1: vec![f64::INFINITY; n],
            i1: vec![NO_POINT; n],
            d2: vec![f64::INFINITY; n],
            i2: vec![NO_POINT; n],
        };
        for j in 0..n {
            s.rescan(j);
        }
        s
    }

    fn rescan(&mut self, j: usize) {
        let x = self.nodes.point(j);
        let (mut d1, mut i1, mut d2, mut i2) = (f64::INFINITY, NO_POINT, f64::INFINITY, NO_POINT);
        for (i, p) in self.points.iter().enumerate() {
            let d = dist(x, p);
            if d < d1 {
                d2 = d1;
                i2 = i1;
                d1 = d;
                i1 = i;
            } else if d < d2 {
                d2 = d;
                i2 = i;
            }
        }
        self.d1[j] = d1;
        self.i1[j] = i1;
        self.d2[j] = d2;
        self.i2[j] = i2;
    }

    fn value(&self) -> f64 {
        kahan_sum(self.d1.iter().zip(&self.nodes.weights).map(|(d, w)| w * d))
    }

    /// Objective change if point `i` moved to `q`; does not mutate.
    fn delta(&self, i: usize, q: &[f64]) -> f64 {
        let mut acc = KahanSum::new();
        for j in 0..self.nodes.len() {
            let dq = dist(self.nodes.point(j), q);
            let dn = if self.i1[j] == i { dq.min(self.d2[j]) } else { self.d1[j].min(dq) };
            acc.add(self.nodes.weights[j] * (dn - self.d1[j]));
        }
        acc.total()
    }

    fn apply(&mut self, i: usize, q: Vec<f64>) {
        self.points[i] = q;
        for j in 0..self.nodes.len() {
            let dq = dist(self.nodes.point(j), &self.points[i]);
            if self.i1[j] == i {
                if dq <= self.d2[j] {
                    self.d1[j] = dq;
                } else {
                    self.rescan(j);
                }
            } else if dq < self.d1[j] {
                self.d2[j] = self.d1[j];
                self.i2[j] = self.i1[j];
                self.d1[j] = dq;
                self.i1[j] = i;
            } else if self.i2[j] == i {
                if dq <= self.d2[j] {
                    self.d2[j] = dq;
                } else {
                    self.rescan(j);
                }
            } else if dq < self.d2[j] {
                self.d2[j] = dq;
                self.i2[j] = i;
            }
        }
    }
}

fn clip_to_ball(q: &mut [f64], radius: f64) {
    let n = norm(q);
    if n > radius {
        let s = radius / n;
        for c in q.iter_mut() {
            *c *= s;
        }
    }
}

/// Heaviest repulsion nodes, used as escape-move sources: a concentrated
/// negative node ties several points at the same nearest distance, and no
/// single-point move can then increase that distance.  Deterministic order:
/// weight ascending (most negative first), position as tie-break.
fn escape_sources(nodes: &NodeSet) -> Vec<usize> {
    let mut neg: Vec<usize> = (0..nodes.len()).filter(|&j| nodes.weights[j] < 0.0).collect();
    neg.sort_by(|&a, &b| {
        nodes.weights[a]
            .total_cmp(&nodes.weights[b])
            .then_with(|| lex_cmp(nodes.point(a), nodes.point(b)))
    });
    neg.truncate(16);
    neg
}

/// Pushes every point tied for the nearest distance to one repulsion source
/// radially outward in a single joint proposal; accepts on strict total
/// improvement, otherwise rolls the group back.  Returns whether a move was
/// accepted.
fn try_group_escape(
    state: &mut Descent,
    sources: &[usize],
    step: f64,
    clip_radius: f64,
    f: &mut f64,
) -> bool {
    let dim = state.nodes.dim;
    for &src in sources {
        let y = state.nodes.point(src).to_vec();
        let d_min = state.points.iter().map(|p| dist(p, &y)).fold(f64::INFINITY, f64::min);
        if !(d_min > 1e-12) {
            continue;
        }
        let window = 1e-3 * d_min;
        let group: Vec<usize> = (0..state.points.len())
            .filter(|&i| {
                let d = dist(&state.points[i], &y);
                d <= d_min + window && d > 1e-12
            })
            .collect();
        if group.len() < 2 {
            continue; // single-point moves already handle a lone minimizer
        }
        for back in 0..3 {
            let s = step * 0.5f64.powi(back);
            let saved: Vec<(usize, Vec<f64>)> =
                group.iter().map(|&i| (i, state.points[i].clone())).collect();
            let mut total = 0.0;
            for &i in &group {
                let d = dist(&state.points[i], &y);
                let mut q: Vec<f64> = (0..dim)
                    .map(|a| state.points[i][a] + s * (state.points[i][a] - y[a]) / d)
                    .collect();
                clip_to_ball(&mut q, clip_radius);
                total += state.delta(i, &q);
                state.apply(i, q);
            }
            if total < -1e-12 * (1.0 + f.abs()) {
                *f += total;
                return true;
            }
            for (i, p) in saved.into_iter().rev() {
                state.apply(i, p);
            }
        }
    }
    false
}

/// Weighted sample of `k` node positions without replacement
/// (Efraimidis–Spirakis keys); cycles when there are fewer nodes than `k`.
fn weighted_init(nodes: &NodeSet, k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let mut keyed: Vec<(f64, usize)> = (0..nodes.len())
        .map(|j| {
            let u: f64 = rng.gen::<f64>().max(1e-308);
            (u.ln() / nodes.weights[j], j)
        })
        .collect();
    keyed.sort_by(|a, b| b.0.total_cmp(&a.0));
    (0..k).map(|i| nodes.point(keyed[i % keyed.len()].1).to_vec()).collect()
}

struct RestartOutcome {
    points: Vec<Vec<f64>>,
    value: f64,
    sweeps: usize,
    trace: Vec<f64>,
}

fn run_restart(
    nodes: &NodeSet,
    init: Vec<Vec<f64>>,
    cfg: &SolverConfig,
    clip_radius: f64,
) -> RestartOutcome {
    let dim = nodes.dim;
    let mut state = Descent::new(nodes, init);
    let mut f = state.value();
    let mut step = cfg.init_step;
    let h = cfg.tol; // differencing offset; also nudges off kinks
    let sources = escape_sources(nodes);
    let mut trace = Vec::new();
    let mut sweeps = 0usize;

    for _ in 0..cfg.max_iters {
        sweeps += 1;
        let mut accepted = false;
        for i in 0..state.points.len() {
            // Central-difference subgradient at point i.
            let mut g = vec![0.0; dim];
            let mut gnorm2 = 0.0;
            for a in 0..dim {
                let mut fwd = state.points[i].clone();
                fwd[a] += h;
                let mut bwd = state.points[i].clone();
                bwd[a] -= h;
                let ga = (state.delta(i, &fwd) - state.delta(i, &bwd)) / (2.0 * h);
                g[a] = ga;
                gnorm2 += ga * ga;
            }
            if gnorm2 <= 0.0 || !gnorm2.is_finite() {
                continue;
            }
            let gnorm = gnorm2.sqrt();
            let f_eps = 1e-12 * (1.0 + f.abs());
            for back in 0..3 {
                let s = step * 0.5f64.powi(back);
                let mut q: Vec<f64> = (0..dim)
                    .map(|a| state.points[i][a] - s * g[a] / gnorm)
                    .collect();
                clip_to_ball(&mut q, clip_radius);
                let delta = state.delta(i, &q);
                if delta < -f_eps {
                    state.apply(i, q);
                    f += delta;
                    accepted = true;
                    break;
                }
            }
        }
        if !accepted {
            // Chain escapes: a freed ring usually re-ties a little farther
            // out, and waiting a full sweep per push is needlessly slow.
            let mut chain = 0;
            while chain < 32 && try_group_escape(&mut state, &sources, step, clip_radius, &mut f)
            {
                accepted = true;
                chain += 1;
            }
        }
        trace.push(f);
        if !accepted {
            step *= cfg.step_decay;
            if step < cfg.tol {
                break;
            }
        }
    }

    let mut points = state.points;
    sort_points(&mut points);
    RestartOutcome { points, value: f, sweeps, trace }
}

/// Multistart descent for the k-point problem.
///
/// Each restart owns a generator seeded `seed ⊕ restart index`, initializes
/// `k` points (restart 0 from `candidate_grid` midpoints when configured,
/// otherwise a weight-proportional sample of positive quadrature nodes), and
/// runs sweeps of per-point subgradient steps with backtracking, accepting
/// only strict improvements.  When a sweep stalls, a joint escape move
/// pushes any group of points tied for the nearest distance to a heavy
/// repulsion node radially outward — single-point moves cannot increase a
/// tied minimum.  Points are clipped to the certificate ball.  Restarts run
/// in parallel; the merge is deterministic (smallest value, then
/// lexicographically smallest sorted configuration).
pub fn local_search(phi: &SignedMeasure, cfg: &SolverConfig) -> Result<SolveReport, SolveError> {
    cfg.validate()?;
    let m_plus = phi.mass_plus();
    let m_minus = phi.mass_minus();
    if m_plus <= m_minus {
        return Err(SolveError::MassDominance { plus: m_plus, minus: m_minus });
    }

    let plus_nodes = phi.plus.node_set();
    if plus_nodes.is_empty() {
        return Err(SolveError::Objective(ObjectiveError::EmptyMeasure));
    }

    // With nothing to repel, sitting on every node is globally optimal.
    if phi.minus.is_empty() {
        let mut distinct: Vec<Vec<f64>> = Vec::new();
        for j in 0..plus_nodes.len() {
            let p = plus_nodes.point(j);
            if !distinct.iter().any(|q| q.as_slice() == p) {
                distinct.push(p.to_vec());
            }
            if distinct.len() > cfg.k {
                break;
            }
        }
        if distinct.len() <= cfg.k {
            sort_points(&mut distinct);
            let best = PointConfig::new(distinct)?;
            let value = eval_f(&best, phi)?.value;
            let bounding_radius = boundedness_certificate(phi, value)?;
            return Ok(SolveReport {
                best,
                value,
                per_restart_values: vec![value],
                iterations_used: 0,
                bounding_radius,
                seed: cfg.seed,
                traces: Vec::new(),
            });
        }
    }

    let signed_nodes = NodeSet::signed(phi);
    let support_radius = {
        let (c, r) = bounding_ball(phi)?;
        norm(&c) + r
    };

    let inits: Vec<Vec<Vec<f64>>> = (0..cfg.restarts)
        .map(|restart| {
            if restart == 0 {
                if let Some(grid) = &cfg.candidate_grid {
                    let mut pts = grid.midpoints();
                    if pts.len() > cfg.k {
                        pts.truncate(cfg.k);
                    } else {
                        let mut i = 0;
                        while pts.len() < cfg.k {
                            pts.push(pts[i % pts.len()].clone());
                            i += 1;
                        }
                    }
                    return pts;
                }
            }
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ restart as u64);
            weighted_init(&plus_nodes, cfg.k, &mut rng)
        })
        .collect();

    let outcomes: Vec<(RestartOutcome, f64)> = inits
        .into_par_iter()
        .map(|init| {
            let init_cfg = PointConfig::new(init.clone()).expect("non-empty init");
            let f_init = eval_f(&init_cfg, phi).expect("dims checked").value;
            let r_out = boundedness_certificate(phi, f_init).expect("dominance checked");
            let clip_radius = r_out + 2.0 * support_radius;
            (run_restart(&signed_nodes, init, cfg, clip_radius), f_init)
        })
        .collect();

    let mut best_idx = 0usize;
    for i in 1..outcomes.len() {
        let (a, b) = (&outcomes[i].0, &outcomes[best_idx].0);
        let better = a.value < b.value
            || (a.value == b.value && {
                let flat_a: Vec<f64> = a.points.iter().flatten().copied().collect();
                let flat_b: Vec<f64> = b.points.iter().flatten().copied().collect();
                lex_cmp(&flat_a, &flat_b) == std::cmp::Ordering::Less
            });
        if better {
            best_idx = i;
        }
    }

    let best = PointConfig::new(outcomes[best_idx].0.points.clone())?;
    let value = eval_f(&best, phi)?.value;
    let bounding_radius = boundedness_certificate(phi, outcomes[best_idx].1)?;
    Ok(SolveReport {
        best,
        value,
        per_restart_values: outcomes.iter().map(|(o, _)| o.value).collect(),
        iterations_used: outcomes.iter().map(|(o, _)| o.sweeps).sum(),
        bounding_radius,
        seed: cfg.seed,
        traces: outcomes.iter().map(|(o, _)| o.trace.clone()).collect(),
    })
}

/// Probe table for the instance with unit mass spread uniformly over the
/// unit circle against a unit point mass at the origin.  `f(r)` is the
/// objective of the single point `(r, 0)`; it decreases strictly in `r`, so
/// no single-point minimizer exists — the infimum walks off to infinity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub table: Vec<(f64, f64)>,
    pub strictly_decreasing: bool,
}

/// Evaluates the probe instance at the given radii, discretizing the circle
/// into `circle_nodes` equal atoms.  Panics if `circle_nodes < 8`.
pub fn nonexistence_probe(radii: &[f64], circle_nodes: usize) -> ProbeReport {
    assert!(circle_nodes >= 8, "need at least 8 circle nodes");
    let w = 1.0 / circle_nodes as f64;
    let atoms: Vec<Atom> = (0..circle_nodes)
        .map(|i| {
            let a = 2.0 * std::f64::consts::PI * i as f64 / circle_nodes as f64;
            Atom::new(vec![a.cos(), a.sin()], w).expect("finite")
        })
        .collect();
    let phi = SignedMeasure::new(
        MeasureComponent::from_atoms(atoms),
        MeasureComponent::from_atoms(vec![Atom::new(vec![0.0, 0.0], 1.0).expect("finite")]),
        2,
    )
    .expect("consistent dims");

    let table: Vec<(f64, f64)> = radii
        .iter()
        .map(|&r| {
            let sigma = PointConfig::new(vec![vec![r, 0.0]]).expect("finite");
            (r, eval_f(&sigma, &phi).expect("dims match").value)
        })
        .collect();
    let strictly_decreasing = table.windows(2).all(|w| w[1].1 < w[0].1);
    ProbeReport { table, strictly_decreasing }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{Atom, MeasureComponent};

    fn atoms(pts: &[(&[f64], f64)]) -> MeasureComponent {
        MeasureComponent::from_atoms(
            pts.iter().map(|(p, w)| Atom::new(p.to_vec(), *w).unwrap()).collect(),
        )
    }

    fn line_instance() -> SignedMeasure {
        SignedMeasure::new(
            atoms(&[(&[1.0], 2.0), (&[8.0], 6.0)]),
            atoms(&[(&[0.0], 1.0), (&[4.0], 4.0)]),
            1,
        )
        .unwrap()
    }

    #[test]
    fn brute_force_line_instance() {
        let phi = line_instance();
        let candidates =
            PointConfig::new((0..17).map(|i| vec![0.5 * i as f64]).collect()).unwrap();
        let report = brute_force(&phi, &candidates, 2, None).unwrap();
        assert_eq!(report.best.points, vec![vec![0.0], vec![8.0]]);
        assert_eq!(report.value, -14.0);
    }

    #[test]
    fn brute_force_sits_on_atoms_when_unopposed() {
        let phi = SignedMeasure::positive(
            atoms(&[(&[0.0, 0.0], 1.0), (&[1.0, 1.0], 1.0)]),
            2,
        )
        .unwrap();
        let candidates =
            PointConfig::new(vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![0.5, 0.5]]).unwrap();
        let report = brute_force(&phi, &candidates, 2, None).unwrap();
        assert_eq!(report.value, 0.0);
    }

    #[test]
    fn brute_force_respects_cap() {
        let phi = line_instance();
        let candidates =
            PointConfig::new((0..100).map(|i| vec![i as f64 * 0.08]).collect()).unwrap();
        match brute_force(&phi, &candidates, 3, Some(1000.0)) {
            Err(SolveError::EnumerationCap { .. }) => {}
            other => panic!("expected cap error, got {other:?}"),
        }
    }

    #[test]
    fn brute_force_monotone_in_k() {
        let phi = line_instance();
        let candidates =
            PointConfig::new((0..9).map(|i| vec![i as f64]).collect()).unwrap();
        let mut prev = f64::INFINITY;
        for k in 1..=4 {
            let v = brute_force(&phi, &candidates, k, None).unwrap().value;
            assert!(v <= prev + 1e-12);
            prev = v;
        }
    }

    #[test]
    fn local_search_single_atom() {
        let phi = SignedMeasure::positive(atoms(&[(&[0.7, -0.3], 1.0)]), 2).unwrap();
        let mut cfg = SolverConfig::new(1);
        cfg.seed = 42;
        let report = local_search(&phi, &cfg).unwrap();
        assert!(report.value <= cfg.tol, "value {}", report.value);
    }

    #[test]
    fn local_search_matches_brute_force_on_line() {
        let phi = line_instance();
        let mut cfg = SolverConfig::new(2);
        cfg.seed = 7;
        cfg.restarts = 3;
        cfg.init_step = 0.5;
        cfg.max_iters = 80;
        cfg.tol = 1e-6;
        let report = local_search(&phi, &cfg).unwrap();
        assert!((report.value - (-14.0)).abs() < 1e-3, "value {}", report.value);
    }

    #[test]
    fn local_search_traces_non_increasing() {
        let phi = line_instance();
        let mut cfg = SolverConfig::new(2);
        cfg.seed = 3;
        cfg.restarts = 2;
        cfg.init_step = 0.4;
        let report = local_search(&phi, &cfg).unwrap();
        for trace in &report.traces {
            for w in trace.windows(2) {
                assert!(w[1] <= w[0] + 1e-12);
            }
        }
    }

    #[test]
    fn local_search_rejects_dominated_mass() {
        let phi = SignedMeasure::new(
            atoms(&[(&[1.0], 1.0)]),
            atoms(&[(&[0.0], 2.0)]),
            1,
        )
        .unwrap();
        match local_search(&phi, &SolverConfig::new(1)) {
            Err(SolveError::MassDominance { plus, minus }) => {
                assert_eq!(plus, 1.0);
                assert_eq!(minus, 2.0);
            }
            other => panic!("expected mass dominance error, got {other:?}"),
        }
    }

    #[test]
    fn local_search_nodes_shortcut() {
        let phi = SignedMeasure::positive(
            atoms(&[(&[0.0], 1.0), (&[5.0], 2.0)]),
            1,
        )
        .unwrap();
        let report = local_search(&phi, &SolverConfig::new(4)).unwrap();
        assert_eq!(report.value, 0.0);
        assert_eq!(report.best.points, vec![vec![0.0], vec![5.0]]);
    }

    #[test]
    fn certificate_example() {
        let phi = SignedMeasure::positive(atoms(&[(&[1.0], 1.0)]), 1).unwrap();
        let r = boundedness_certificate(&phi, 0.0).unwrap();
        assert!((r - 1.0).abs() < 1e-12);
        let r2 = boundedness_certificate(&phi, 2.0).unwrap();
        assert!(r2 > r);
    }

    #[test]
    fn certificate_requires_dominance() {
        let phi = SignedMeasure::new(
            atoms(&[(&[1.0], 1.0)]),
            atoms(&[(&[0.0], 1.0)]),
            1,
        )
        .unwrap();
        assert!(matches!(
            boundedness_certificate(&phi, 0.0),
            Err(SolveError::MassDominance { .. })
        ));
    }

    #[test]
    fn probe_values_and_decrease() {
        let radii: Vec<f64> = (0..21).map(|i| 0.5 * i as f64).collect();
        let probe = nonexistence_probe(&radii, 10_000);
        assert!((probe.table[0].1 - 1.0).abs() < 1e-9);
        let f1 = probe.table[2].1; // r = 1
        assert!((f1 - (4.0 / std::f64::consts::PI - 1.0)).abs() < 1e-3);
        assert!(probe.strictly_decreasing);
    }

    #[test]
    fn determinism_bitwise() {
        let phi = line_instance();
        let mut cfg = SolverConfig::new(2);
        cfg.seed = 99;
        cfg.restarts = 3;
        let a = local_search(&phi, &cfg).unwrap();
        let b = local_search(&phi, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn result_within_certificate_ball() {
        let phi = line_instance();
        let mut cfg = SolverConfig::new(2);
        cfg.seed = 5;
        let report = local_search(&phi, &cfg).unwrap();
        let min_norm = report
            .best
            .points
            .iter()
            .map(|p| norm(p))
            .fold(f64::INFINITY, f64::min);
        assert!(min_norm <= report.bounding_radius + 1e-9);
    }
}
