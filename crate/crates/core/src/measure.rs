//! Signed measures as atoms plus gridded densities, with midpoint quadrature.
//!
//! A [`MeasureComponent`] is a finite nonnegative measure given by point
//! atoms and piecewise-constant densities on axis-aligned grids.  A
//! [`SignedMeasure`] is a pair of components `φ⁺, φ⁻`.  Every integral in this
//! crate is taken against the component's *quadrature nodes*: atoms verbatim,
//! plus one node per grid cell at the cell midpoint carrying
//! `value · cell volume`.  Node order is fixed (atoms first, then densities in
//! row-major cell order) so that summation is reproducible bit-for-bit.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::util::{dist, kahan_sum, norm, KahanSum};

/// Relative tolerance under which two total masses are considered equal for
/// transport purposes.
pub const MASS_MATCH_RTOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum MeasureError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("atom weight must be strictly positive and finite, got {0}")]
    BadWeight(f64),
    #[error("coordinates must be finite")]
    NonFiniteCoordinate,
    #[error("grid box must satisfy lo < hi on every axis")]
    BadBox,
    #[error("grid resolution must be positive on every axis and match the value count")]
    BadResolution,
    #[error("grid values must be nonnegative and finite")]
    BadDensityValue,
    #[error("measure has empty support")]
    EmptySupport,
    #[error("discretization step must be strictly positive and finite, got {0}")]
    BadStep(f64),
    #[error("total masses differ beyond tolerance: {mu} vs {nu}")]
    MassMismatch { mu: f64, nu: f64 },
}

/// A weighted point.  Weights are strictly positive; "negative atoms" only
/// exist as members of the minus component of a [`SignedMeasure`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub location: Vec<f64>,
    pub weight: f64,
}

impl Atom {
    pub fn new(location: Vec<f64>, weight: f64) -> Result<Self, MeasureError> {
        if !location.iter().all(|c| c.is_finite()) {
            return Err(MeasureError::NonFiniteCoordinate);
        }
        if !(weight > 0.0 && weight.is_finite()) {
            return Err(MeasureError::BadWeight(weight));
        }
        Ok(Self { location, weight })
    }
}

/// Axis-aligned box `[lo₁,hi₁] × … × [loₙ,hiₙ]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl GridBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self, MeasureError> {
        if lo.len() != hi.len() || lo.is_empty() {
            return Err(MeasureError::BadBox);
        }
        let ok = lo
            .iter()
            .zip(&hi)
            .all(|(a, b)| a.is_finite() && b.is_finite() && a < b);
        if !ok {
            return Err(MeasureError::BadBox);
        }
        Ok(Self { lo, hi })
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn extent(&self, axis: usize) -> f64 {
        self.hi[axis] - self.lo[axis]
    }

    pub fn diameter(&self) -> f64 {
        (0..self.dim()).map(|a| self.extent(a).powi(2)).sum::<f64>().sqrt()
    }
}

/// Piecewise-constant density on a uniform grid over a box.
///
/// `values` is row-major with the **last axis fastest**: the flat index of the
/// cell with per-axis indices `(i₀, …, i_{n−1})` on a resolution
/// `(r₀, …, r_{n−1})` grid is `((i₀·r₁ + i₁)·r₂ + …)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GriddedDensity {
    pub bounds: GridBox,
    pub resolution: Vec<usize>,
    pub values: Vec<f64>,
}

impl GriddedDensity {
    pub fn new(
        bounds: GridBox,
        resolution: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self, MeasureError> {
        if resolution.len() != bounds.dim() || resolution.iter().any(|&r| r == 0) {
            return Err(MeasureError::BadResolution);
        }
        let cells: usize = resolution.iter().product();
        if values.len() != cells {
            return Err(MeasureError::BadResolution);
        }
        if !values.iter().all(|v| v.is_finite() && *v >= 0.0) {
            return Err(MeasureError::BadDensityValue);
        }
        Ok(Self { bounds, resolution, values })
    }

    /// Density with `f` evaluated at each cell midpoint; negative evaluations
    /// are clamped to zero.
    pub fn from_fn(
        bounds: GridBox,
        resolution: Vec<usize>,
        f: impl Fn(&[f64]) -> f64,
    ) -> Result<Self, MeasureError> {
        if resolution.len() != bounds.dim() || resolution.iter().any(|&r| r == 0) {
            return Err(MeasureError::BadResolution);
        }
        let cells: usize = resolution.iter().product();
        let mut values = Vec::with_capacity(cells);
        let mut mid = vec![0.0; bounds.dim()];
        let proto = Self {
            bounds: bounds.clone(),
            resolution: resolution.clone(),
            values: vec![0.0; cells],
        };
        for idx in 0..cells {
            proto.cell_midpoint(idx, &mut mid);
            values.push(f(&mid).max(0.0));
        }
        Self::new(bounds, resolution, values)
    }

    pub fn uniform(
        bounds: GridBox,
        resolution: Vec<usize>,
        value: f64,
    ) -> Result<Self, MeasureError> {
        let cells: usize = resolution.iter().product();
        Self::new(bounds, resolution, vec![value; cells])
    }

    pub fn dim(&self) -> usize {
        self.bounds.dim()
    }

    pub fn cell_count(&self) -> usize {
        self.values.len()
    }

    pub fn cell_side(&self, axis: usize) -> f64 {
        self.bounds.extent(axis) / self.resolution[axis] as f64
    }

    pub fn cell_volume(&self) -> f64 {
        (0..self.dim()).map(|a| self.cell_side(a)).product()
    }

    pub fn max_cell_side(&self) -> f64 {
        (0..self.dim()).map(|a| self.cell_side(a)).fold(0.0, f64::max)
    }

    /// Writes the midpoint of the cell with flat index `idx` into `out`.
    pub fn cell_midpoint(&self, idx: usize, out: &mut [f64]) {
        let mut rem = idx;
        for axis in (0..self.dim()).rev() {
            let r = self.resolution[axis];
            let i = rem % r;
            rem /= r;
            out[axis] = self.bounds.lo[axis] + (i as f64 + 0.5) * self.cell_side(axis);
        }
    }

    pub fn mass(&self) -> f64 {
        let vol = self.cell_volume();
        kahan_sum(self.values.iter().map(|v| v * vol))
    }

    /// Flat index of the cell containing `x`, or `None` outside the box.
    /// Points on the upper face are assigned to the last cell.
    pub fn cell_index_of(&self, x: &[f64]) -> Option<usize> {
        let mut idx = 0usize;
        for axis in 0..self.dim() {
            if x[axis] < self.bounds.lo[axis] || x[axis] > self.bounds.hi[axis] {
                return None;
            }
            let side = self.cell_side(axis);
            let mut i = ((x[axis] - self.bounds.lo[axis]) / side) as usize;
            i = i.min(self.resolution[axis] - 1);
            idx = idx * self.resolution[axis] + i;
        }
        Some(idx)
    }
}

/// Finite nonnegative measure: atoms plus gridded densities.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MeasureComponent {
    pub atoms: Vec<Atom>,
    pub densities: Vec<GriddedDensity>,
}

impl MeasureComponent {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn from_atoms(atoms: Vec<Atom>) -> Self {
        Self { atoms, densities: Vec::new() }
    }

    pub fn from_density(density: GriddedDensity) -> Self {
        Self { atoms: Vec::new(), densities: vec![density] }
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty() && self.densities.iter().all(|d| d.values.iter().all(|&v| v == 0.0))
    }

    /// Common dimension of the support, or `None` for an empty component.
    pub fn dim(&self) -> Option<usize> {
        self.atoms
            .first()
            .map(|a| a.location.len())
            .or_else(|| self.densities.first().map(|d| d.dim()))
    }

    fn check_dim(&self, dim: usize) -> Result<(), MeasureError> {
        for a in &self.atoms {
            if a.location.len() != dim {
                return Err(MeasureError::DimensionMismatch { expected: dim, got: a.location.len() });
            }
        }
        for d in &self.densities {
            if d.dim() != dim {
                return Err(MeasureError::DimensionMismatch { expected: dim, got: d.dim() });
            }
        }
        Ok(())
    }

    /// Total mass, accumulated in canonical node order with compensated
    /// summation.
    pub fn total_mass(&self) -> f64 {
        let mut acc = KahanSum::new();
        for a in &self.atoms {
            acc.add(a.weight);
        }
        for d in &self.densities {
            let vol = d.cell_volume();
            for v in &d.values {
                acc.add(v * vol);
            }
        }
        acc.total()
    }

    /// Quadrature nodes in canonical order: atoms verbatim, then for each
    /// density its positive-mass cells row-major as `(midpoint, value·vol)`.
    /// Zero-value cells carry no mass and are skipped.
    pub fn quadrature_nodes(&self) -> Vec<(Vec<f64>, f64)> {
        let mut out = Vec::new();
        for a in &self.atoms {
            out.push((a.location.clone(), a.weight));
        }
        for d in &self.densities {
            let vol = d.cell_volume();
            let mut mid = vec![0.0; d.dim()];
            for (idx, v) in d.values.iter().enumerate() {
                if *v > 0.0 {
                    d.cell_midpoint(idx, &mut mid);
                    out.push((mid.clone(), v * vol));
                }
            }
        }
        out
    }

    /// Flat quadrature node storage for inner loops.
    pub fn node_set(&self) -> NodeSet {
        let dim = self.dim().unwrap_or(0);
        let mut set = NodeSet { dim, positions: Vec::new(), weights: Vec::new() };
        for a in &self.atoms {
            set.positions.extend_from_slice(&a.location);
            set.weights.push(a.weight);
        }
        for d in &self.densities {
            let vol = d.cell_volume();
            let mut mid = vec![0.0; d.dim()];
            for (idx, v) in d.values.iter().enumerate() {
                if *v > 0.0 {
                    d.cell_midpoint(idx, &mut mid);
                    set.positions.extend_from_slice(&mid);
                    set.weights.push(v * vol);
                }
            }
        }
        set
    }

    /// Like [`Self::node_set`], but every density cell wider than `max_step`
    /// is split into congruent subcells first (atoms pass through).  Used when
    /// an operation's accuracy is driven by its own mesh rather than by the
    /// measure's native grid.
    pub fn node_set_refined(&self, max_step: f64) -> NodeSet {
        let dim = self.dim().unwrap_or(0);
        let mut set = NodeSet { dim, positions: Vec::new(), weights: Vec::new() };
        for a in &self.atoms {
            set.positions.extend_from_slice(&a.location);
            set.weights.push(a.weight);
        }
        for d in &self.densities {
            let splits: Vec<usize> = (0..d.dim())
                .map(|a| ((d.cell_side(a) / max_step).ceil() as usize).max(1))
                .collect();
            let sub_per_cell: usize = splits.iter().product();
            let vol = d.cell_volume() / sub_per_cell as f64;
            let mut mid = vec![0.0; d.dim()];
            let mut sub = vec![0.0; d.dim()];
            for (idx, v) in d.values.iter().enumerate() {
                if *v <= 0.0 {
                    continue;
                }
                d.cell_midpoint(idx, &mut mid);
                for s in 0..sub_per_cell {
                    let mut rem = s;
                    for axis in (0..d.dim()).rev() {
                        let m = splits[axis];
                        let j = rem % m;
                        rem /= m;
                        let side = d.cell_side(axis) / m as f64;
                        sub[axis] =
                            mid[axis] - d.cell_side(axis) / 2.0 + (j as f64 + 0.5) * side;
                    }
                    set.positions.extend_from_slice(&sub);
                    set.weights.push(v * vol);
                }
            }
        }
        set
    }

    /// Mass of the component restricted to points where `keep` holds, in
    /// quadrature (a cell counts entirely by its midpoint).
    pub fn mass_where(&self, keep: impl Fn(&[f64]) -> bool) -> f64 {
        let nodes = self.node_set();
        let mut acc = KahanSum::new();
        for i in 0..nodes.len() {
            if keep(nodes.point(i)) {
                acc.add(nodes.weights[i]);
            }
        }
        acc.total()
    }
}

/// Flat storage of quadrature nodes: `positions` has stride `dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeSet {
    pub dim: usize,
    pub positions: Vec<f64>,
    pub weights: Vec<f64>,
}

impl NodeSet {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    #[inline]
    pub fn point(&self, i: usize) -> &[f64] {
        &self.positions[i * self.dim..(i + 1) * self.dim]
    }

    /// Signed node set of `φ`: plus nodes first with positive weights, then
    /// minus nodes with negated weights.
    pub fn signed(phi: &SignedMeasure) -> NodeSet {
        let mut set = phi.plus.node_set();
        set.dim = phi.dim;
        let minus = phi.minus.node_set();
        set.positions.extend_from_slice(&minus.positions);
        set.weights.extend(minus.weights.iter().map(|w| -w));
        set
    }
}

/// Signed measure `φ = φ⁺ − φ⁻` on `R^dim`, both parts finite with compact
/// support.  The decomposition is taken as given; no mutual-singularity
/// reduction is attempted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignedMeasure {
    pub plus: MeasureComponent,
    pub minus: MeasureComponent,
    pub dim: usize,
}

impl SignedMeasure {
    pub fn new(
        plus: MeasureComponent,
        minus: MeasureComponent,
        dim: usize,
    ) -> Result<Self, MeasureError> {
        if dim == 0 {
            return Err(MeasureError::BadBox);
        }
        plus.check_dim(dim)?;
        minus.check_dim(dim)?;
        Ok(Self { plus, minus, dim })
    }

    pub fn positive(plus: MeasureComponent, dim: usize) -> Result<Self, MeasureError> {
        Self::new(plus, MeasureComponent::empty(), dim)
    }

    pub fn mass_plus(&self) -> f64 {
        self.plus.total_mass()
    }

    pub fn mass_minus(&self) -> f64 {
        self.minus.total_mass()
    }
}

/// Center and radius of a closed ball containing the whole support (atoms and
/// the closure of every positive-value cell).  The center is the midpoint of
/// the support's bounding box, which keeps the radius within √n of optimal.
pub fn bounding_ball(phi: &SignedMeasure) -> Result<(Vec<f64>, f64), MeasureError> {
    let dim = phi.dim;
    let mut lo = vec![f64::INFINITY; dim];
    let mut hi = vec![f64::NEG_INFINITY; dim];
    let mut corners: Vec<(Vec<f64>, Vec<f64>)> = Vec::new();

    for comp in [&phi.plus, &phi.minus] {
        for a in &comp.atoms {
            for (axis, &c) in a.location.iter().enumerate() {
                lo[axis] = lo[axis].min(c);
                hi[axis] = hi[axis].max(c);
            }
            corners.push((a.location.clone(), a.location.clone()));
        }
        for d in &comp.densities {
            let mut mid = vec![0.0; dim];
            for (idx, v) in d.values.iter().enumerate() {
                if *v > 0.0 {
                    d.cell_midpoint(idx, &mut mid);
                    let half: Vec<f64> = (0..dim).map(|a| d.cell_side(a) / 2.0).collect();
                    let clo: Vec<f64> = (0..dim).map(|a| mid[a] - half[a]).collect();
                    let chi: Vec<f64> = (0..dim).map(|a| mid[a] + half[a]).collect();
                    for axis in 0..dim {
                        lo[axis] = lo[axis].min(clo[axis]);
                        hi[axis] = hi[axis].max(chi[axis]);
                    }
                    corners.push((clo, chi));
                }
            }
        }
    }

    if corners.is_empty() {
        return Err(MeasureError::EmptySupport);
    }

    let center: Vec<f64> = (0..dim).map(|a| 0.5 * (lo[a] + hi[a])).collect();
    // Farthest support point from the center is attained at a cell corner.
    let mut radius: f64 = 0.0;
    for (clo, chi) in &corners {
        let mut s = 0.0;
        for axis in 0..dim {
            let d = (center[axis] - clo[axis]).abs().max((center[axis] - chi[axis]).abs());
            s += d * d;
        }
        radius = radius.max(s.sqrt());
    }
    Ok((center, radius))
}

/// Norm bound for the support: radius of a ball centered at the origin that
/// contains all of `supp φ`.
pub fn support_norm_bound(phi: &SignedMeasure) -> Result<f64, MeasureError> {
    let (center, radius) = bounding_ball(phi)?;
    Ok(norm(&center) + radius)
}

/// Collapses a component onto a uniform grid of the given step (anchored at
/// the origin): one atom per grid cell with positive mass, located at the
/// mass-weighted centroid of the cell's quadrature nodes and clamped to the
/// cell.  Output is ordered by cell index, lexicographically.
///
/// Total mass is preserved up to reproducible compensated-summation rounding;
/// the transport cost between the node measure and its discretization is at
/// most `step·√n` since no node leaves its cell.
pub fn discretize(c: &MeasureComponent, step: f64) -> Result<Vec<Atom>, MeasureError> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(MeasureError::BadStep(step));
    }
    let dim = c.dim().ok_or(MeasureError::EmptySupport)?;
    let nodes = c.node_set();
    if nodes.is_empty() {
        return Err(MeasureError::EmptySupport);
    }

    struct CellAcc {
        weight: KahanSum,
        moment: Vec<KahanSum>,
    }

    let mut cells: std::collections::BTreeMap<Vec<i64>, CellAcc> = std::collections::BTreeMap::new();
    for i in 0..nodes.len() {
        let p = nodes.point(i);
        let w = nodes.weights[i];
        if w <= 0.0 {
            continue;
        }
        let key: Vec<i64> = p.iter().map(|&x| (x / step).floor() as i64).collect();
        let acc = cells.entry(key).or_insert_with(|| CellAcc {
            weight: KahanSum::new(),
            moment: vec![KahanSum::new(); dim],
        });
        acc.weight.add(w);
        for (axis, &x) in p.iter().enumerate() {
            acc.moment[axis].add(w * x);
        }
    }

    let mut out = Vec::with_capacity(cells.len());
    for (key, acc) in cells {
        let w = acc.weight.total();
        if w <= 0.0 {
            continue;
        }
        let mut loc: Vec<f64> = acc.moment.iter().map(|m| m.total() / w).collect();
        // Clamp the centroid into its cell; roundoff can push it out by ulps.
        for axis in 0..dim {
            let lo = key[axis] as f64 * step;
            let hi = lo + step;
            loc[axis] = loc[axis].clamp(lo, hi);
        }
        out.push(Atom { location: loc, weight: w });
    }
    Ok(out)
}

fn total_atom_mass(atoms: &[Atom]) -> f64 {
    kahan_sum(atoms.iter().map(|a| a.weight))
}

fn check_transport_pair(mu: &[Atom], nu: &[Atom]) -> Result<(usize, f64, f64), MeasureError> {
    let m_mu = total_atom_mass(mu);
    let m_nu = total_atom_mass(nu);
    let scale = m_mu.abs().max(m_nu.abs());
    if (m_mu - m_nu).abs() > MASS_MATCH_RTOL * scale.max(f64::MIN_POSITIVE) {
        return Err(MeasureError::MassMismatch { mu: m_mu, nu: m_nu });
    }
    let dim = mu
        .iter()
        .chain(nu)
        .map(|a| a.location.len())
        .next()
        .unwrap_or(1);
    for a in mu.iter().chain(nu) {
        if a.location.len() != dim {
            return Err(MeasureError::DimensionMismatch { expected: dim, got: a.location.len() });
        }
    }
    Ok((dim, m_mu, m_nu))
}

/// Exact 1-Wasserstein distance between equal-mass atomic measures.
///
/// Masses must agree to relative [`MASS_MATCH_RTOL`]; nothing is rescaled.
/// Dimension 1 uses the sorted-CDF formula; higher dimensions solve the
/// transport problem exactly with [`w1_distance_flow`].
pub fn w1_distance(mu: &[Atom], nu: &[Atom]) -> Result<f64, MeasureError> {
    let (dim, m_mu, m_nu) = check_transport_pair(mu, nu)?;
    if m_mu == 0.0 && m_nu == 0.0 {
        return Ok(0.0);
    }
    if dim == 1 {
        w1_cdf_1d(mu, nu)
    } else {
        w1_distance_flow(mu, nu)
    }
}

/// `∫ |F_μ − F_ν|` over the merged support line.
fn w1_cdf_1d(mu: &[Atom], nu: &[Atom]) -> Result<f64, MeasureError> {
    // (coordinate, signed weight): μ positive, ν negative; the running sum of
    // signed weights between consecutive coordinates is F_μ − F_ν there.
    let mut events: Vec<(f64, f64)> = Vec::with_capacity(mu.len() + nu.len());
    events.extend(mu.iter().map(|a| (a.location[0], a.weight)));
    events.extend(nu.iter().map(|a| (a.location[0], -a.weight)));
    events.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut acc = KahanSum::new();
    let mut cdf_gap = KahanSum::new();
    let mut prev_x = match events.first() {
        Some(&(x, _)) => x,
        None => return Ok(0.0),
    };
    for &(x, w) in &events {
        acc.add(cdf_gap.total().abs() * (x - prev_x));
        cdf_gap.add(w);
        prev_x = x;
    }
    Ok(acc.total())
}

/// Exact transport in any dimension: successive shortest augmenting paths
/// with node potentials on the complete bipartite supply/demand graph.
/// Works in dimension 1 as well, which gives an independent cross-check of
/// the CDF route.
pub fn w1_distance_flow(mu: &[Atom], nu: &[Atom]) -> Result<f64, MeasureError> {
    let (_, m_mu, m_nu) = check_transport_pair(mu, nu)?;
    let total = m_mu.max(m_nu);
    if total == 0.0 {
        return Ok(0.0);
    }

    let mut supply: Vec<f64> = mu.iter().map(|a| a.weight).collect();
    let mut demand: Vec<f64> = nu.iter().map(|a| a.weight).collect();
    let ns = supply.len();
    let nd = demand.len();
    if ns == 0 || nd == 0 {
        // Masses matched within tolerance, so both are (numerically) zero.
        return Ok(0.0);
    }

    let cost: Vec<f64> = (0..ns)
        .flat_map(|i| (0..nd).map(move |j| (i, j)))
        .map(|(i, j)| dist(&mu[i].location, &nu[j].location))
        .collect();
    let at = |i: usize, j: usize| cost[i * nd + j];

    // flow[i*nd + j] > 0 admits a residual arc j -> i with cost −c(i,j).
    let mut flow = vec![0.0f64; ns * nd];
    let mut pot_u = vec![0.0f64; ns]; // supply-side potentials
    let mut pot_v = vec![0.0f64; nd]; // demand-side potentials
    let floor = 1e-13 * total;

    loop {
        let active: Vec<usize> = (0..ns).filter(|&i| supply[i] > floor).collect();
        if active.is_empty() {
            break;
        }
        // Dijkstra over the bipartite residual graph with reduced costs.
        let inf = f64::INFINITY;
        let mut dist_u = vec![inf; ns];
        let mut dist_v = vec![inf; nd];
        let mut par_v: Vec<usize> = vec![usize::MAX; nd]; // arriving arc i -> j
        let mut par_u: Vec<usize> = vec![usize::MAX; ns]; // arriving residual j -> i
        let mut done_u = vec![false; ns];
        let mut done_v = vec![false; nd];
        for &i in &active {
            dist_u[i] = 0.0;
        }

        loop {
            // Pick the unfinished node (either side) with smallest label.
            let mut best = (inf, usize::MAX, false); // (label, index, is_demand)
            for i in 0..ns {
                if !done_u[i] && dist_u[i] < best.0 {
                    best = (dist_u[i], i, false);
                }
            }
            for j in 0..nd {
                if !done_v[j] && dist_v[j] < best.0 {
                    best = (dist_v[j], j, true);
                }
            }
            if best.1 == usize::MAX {
                break;
            }
            if best.2 {
                let j = best.1;
                done_v[j] = true;
                // Residual arcs j -> i exist where flow(i, j) > 0.
                for i in 0..ns {
                    if done_u[i] || flow[i * nd + j] <= floor {
                        continue;
                    }
                    let rc = dist_v[j] + (-(at(i, j)) - pot_v[j] + pot_u[i]).max(0.0);
                    if rc < dist_u[i] {
                        dist_u[i] = rc;
                        par_u[i] = j;
                    }
                }
            } else {
                let i = best.1;
                done_u[i] = true;
                for j in 0..nd {
                    if done_v[j] {
                        continue;
                    }
                    let rc = dist_u[i] + (at(i, j) - pot_u[i] + pot_v[j]).max(0.0);
                    if rc < dist_v[j] {
                        dist_v[j] = rc;
                        par_v[j] = i;
                    }
                }
            }
        }

        // Cheapest reachable demand node with spare capacity.
        let mut target = usize::MAX;
        let mut target_dist = inf;
        for j in 0..nd {
            if demand[j] > floor && dist_v[j] < target_dist {
                target_dist = dist_v[j];
                target = j;
            }
        }
        if target == usize::MAX {
            break; // leftover below tolerance
        }

        // Walk the path back, find the bottleneck, then push.
        let mut bottleneck = demand[target];
        let mut j = target;
        loop {
            let i = par_v[j];
            debug_assert_ne!(i, usize::MAX);
            if par_u[i] == usize::MAX {
                bottleneck = bottleneck.min(supply[i]);
                break;
            }
            let j_prev = par_u[i];
            bottleneck = bottleneck.min(flow[i * nd + j_prev]);
            j = j_prev;
        }
        let mut j = target;
        loop {
            let i = par_v[j];
            flow[i * nd + j] += bottleneck;
            if par_u[i] == usize::MAX {
                supply[i] -= bottleneck;
                break;
            }
            let j_prev = par_u[i];
            flow[i * nd + j_prev] -= bottleneck;
            j = j_prev;
        }
        demand[target] -= bottleneck;

        // Fold the labels into the potentials (reduced cost of arc i -> j is
        // c − pot_u[i] + pot_v[j], so both sides absorb their label with a
        // minus sign); tree arcs land at reduced cost zero.
        for i in 0..ns {
            if dist_u[i] < inf {
                pot_u[i] -= dist_u[i];
            }
        }
        for j in 0..nd {
            if dist_v[j] < inf {
                pot_v[j] -= dist_v[j];
            }
        }
    }

    let mut acc = KahanSum::new();
    for i in 0..ns {
        for j in 0..nd {
            let f = flow[i * nd + j];
            if f > 0.0 {
                acc.add(f * at(i, j));
            }
        }
    }
    Ok(acc.total())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn atom(loc: &[f64], w: f64) -> Atom {
        Atom::new(loc.to_vec(), w).unwrap()
    }

    #[test]
    fn uniform_density_quadrature_nodes() {
        let d = GriddedDensity::uniform(
            GridBox::new(vec![0.0], vec![1.0]).unwrap(),
            vec![2],
            2.0,
        )
        .unwrap();
        let c = MeasureComponent::from_density(d);
        let nodes = c.quadrature_nodes();
        assert_eq!(nodes.len(), 2);
        assert_eq!(nodes[0], (vec![0.25], 1.0));
        assert_eq!(nodes[1], (vec![0.75], 1.0));
        assert!((c.total_mass() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn atoms_and_density_mix_in_canonical_order() {
        let d = GriddedDensity::uniform(
            GridBox::new(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap(),
            vec![1, 2],
            4.0,
        )
        .unwrap();
        let c = MeasureComponent { atoms: vec![atom(&[5.0, 5.0], 3.0)], densities: vec![d] };
        let nodes = c.quadrature_nodes();
        assert_eq!(nodes[0].0, vec![5.0, 5.0]);
        // row-major over (axis0, axis1): last axis fastest
        assert_eq!(nodes[1].0, vec![0.5, 0.25]);
        assert_eq!(nodes[2].0, vec![0.5, 0.75]);
        assert!((nodes[1].1 - 2.0).abs() < 1e-15);
    }

    #[test]
    fn discretize_weighted_centroid() {
        let c = MeasureComponent::from_atoms(vec![atom(&[0.1], 1.0), atom(&[0.2], 2.0)]);
        let atoms = discretize(&c, 1.0).unwrap();
        assert_eq!(atoms.len(), 1);
        assert!((atoms[0].weight - 3.0).abs() < 1e-15);
        let expected = (0.1 + 0.4) / 3.0; // 1/6
        assert!((atoms[0].location[0] - expected).abs() < 1e-15);
    }

    #[test]
    fn discretize_refines_to_identity() {
        // A pure-atomic component at generic positions survives a fine grid.
        let c = MeasureComponent::from_atoms(vec![atom(&[0.11, 0.71], 1.5), atom(&[2.3, -0.4], 0.5)]);
        let atoms = discretize(&c, 1e-3).unwrap();
        assert_eq!(atoms.len(), 2);
        let wsum: f64 = atoms.iter().map(|a| a.weight).sum();
        assert!((wsum - 2.0).abs() < 1e-14);
    }

    #[test]
    fn discretize_rejects_bad_step() {
        let c = MeasureComponent::from_atoms(vec![atom(&[0.0], 1.0)]);
        assert!(matches!(discretize(&c, 0.0), Err(MeasureError::BadStep(_))));
    }

    #[test]
    fn w1_point_masses() {
        let mu = vec![atom(&[0.0], 1.0)];
        let nu = vec![atom(&[1.0], 1.0)];
        assert!((w1_distance(&mu, &nu).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn w1_split_mass() {
        let mu = vec![atom(&[0.0], 0.5), atom(&[2.0], 0.5)];
        let nu = vec![atom(&[1.0], 1.0)];
        assert!((w1_distance(&mu, &nu).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn w1_mass_mismatch_reports_both_masses() {
        let mu = vec![atom(&[0.0], 1.0)];
        let nu = vec![atom(&[1.0], 2.0)];
        match w1_distance(&mu, &nu) {
            Err(MeasureError::MassMismatch { mu, nu }) => {
                assert_eq!(mu, 1.0);
                assert_eq!(nu, 2.0);
            }
            other => panic!("expected mass mismatch, got {other:?}"),
        }
    }

    #[test]
    fn w1_flow_matches_cdf_on_line() {
        let mu = vec![atom(&[0.0], 0.3), atom(&[1.0], 0.7), atom(&[4.0], 1.0)];
        let nu = vec![atom(&[0.5], 1.2), atom(&[3.0], 0.8)];
        let a = w1_cdf_1d(&mu, &nu).unwrap();
        let b = w1_distance_flow(&mu, &nu).unwrap();
        assert!((a - b).abs() < 1e-9, "cdf {a} vs flow {b}");
    }

    #[test]
    fn w1_flow_2d_rectangle() {
        // Two unit masses swapped along one side of a rectangle: optimal plan
        // moves each along the short side.
        let mu = vec![atom(&[0.0, 0.0], 1.0), atom(&[3.0, 0.0], 1.0)];
        let nu = vec![atom(&[0.0, 1.0], 1.0), atom(&[3.0, 1.0], 1.0)];
        assert!((w1_distance(&mu, &nu).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn bounding_ball_examples() {
        let phi = SignedMeasure::positive(
            MeasureComponent::from_atoms(vec![atom(&[0.0], 1.0), atom(&[2.0], 1.0)]),
            1,
        )
        .unwrap();
        let (c, r) = bounding_ball(&phi).unwrap();
        assert_eq!(c, vec![1.0]);
        assert!((r - 1.0).abs() < 1e-15);

        let single = SignedMeasure::positive(
            MeasureComponent::from_atoms(vec![atom(&[3.0, -1.0], 2.0)]),
            2,
        )
        .unwrap();
        let (c, r) = bounding_ball(&single).unwrap();
        assert_eq!(c, vec![3.0, -1.0]);
        assert_eq!(r, 0.0);
    }

    #[test]
    fn bounding_ball_empty_errors() {
        let phi =
            SignedMeasure::new(MeasureComponent::empty(), MeasureComponent::empty(), 2).unwrap();
        assert!(matches!(bounding_ball(&phi), Err(MeasureError::EmptySupport)));
    }

    #[test]
    fn refined_nodes_preserve_mass() {
        let d = GriddedDensity::uniform(
            GridBox::new(vec![-1.0, -1.0], vec![1.0, 1.0]).unwrap(),
            vec![4, 4],
            0.7,
        )
        .unwrap();
        let c = MeasureComponent::from_density(d);
        let fine = c.node_set_refined(0.13);
        let total: f64 = kahan_sum(fine.weights.iter().copied());
        assert!((total - c.total_mass()).abs() < 1e-12);
        assert!(fine.len() > c.node_set().len());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn conservation_under_discretization(
            coords in proptest::collection::vec((-50.0f64..50.0, 1e-3f64..10.0), 1..40),
            step in 0.05f64..5.0,
        ) {
            let atoms: Vec<Atom> =
                coords.iter().map(|&(x, w)| atom(&[x], w)).collect();
            let c = MeasureComponent::from_atoms(atoms);
            let before = c.total_mass();
            let after_atoms = discretize(&c, step).unwrap();
            let after = total_atom_mass(&after_atoms);
            // Exact up to compensated-summation regrouping (a few ulps).
            prop_assert!((before - after).abs() <= 1e-14 * before.abs().max(1.0));
        }

        #[test]
        fn w1_metric_axioms_on_line(
            xs in proptest::collection::vec((-20.0f64..20.0, 0.01f64..2.0), 1..6),
            ys in proptest::collection::vec(-20.0f64..20.0, 1..6),
            zs in proptest::collection::vec(-20.0f64..20.0, 1..6),
        ) {
            // Build three measures with identical total mass.
            let total: f64 = xs.iter().map(|&(_, w)| w).sum();
            let mu: Vec<Atom> = xs.iter().map(|&(x, w)| atom(&[x], w)).collect();
            let nu: Vec<Atom> =
                ys.iter().map(|&y| atom(&[y], total / ys.len() as f64)).collect();
            let rho: Vec<Atom> =
                zs.iter().map(|&z| atom(&[z], total / zs.len() as f64)).collect();

            let d_mn = w1_distance(&mu, &nu).unwrap();
            let d_nm = w1_distance(&nu, &mu).unwrap();
            let d_mr = w1_distance(&mu, &rho).unwrap();
            let d_rn = w1_distance(&rho, &nu).unwrap();

            prop_assert!(d_mn >= 0.0);
            prop_assert!((d_mn - d_nm).abs() <= 1e-9 * (1.0 + d_mn));
            prop_assert!(d_mn <= d_mr + d_rn + 1e-9 * (1.0 + d_mn));
            prop_assert!((w1_distance(&mu, &mu).unwrap()).abs() <= 1e-12);
        }

        #[test]
        fn w1_discretize_within_step_sqrt_n(
            coords in proptest::collection::vec(
                ((-10.0f64..10.0), (-10.0f64..10.0), 0.01f64..2.0), 1..20),
            step in 0.1f64..3.0,
        ) {
            let atoms: Vec<Atom> =
                coords.iter().map(|&(x, y, w)| atom(&[x, y], w)).collect();
            let c = MeasureComponent::from_atoms(atoms.clone());
            let coarse = discretize(&c, step).unwrap();
            let d = w1_distance(&atoms, &coarse).unwrap();
            // Every atom stays inside its own cell, whose diameter is
            // step·√2, so the (unnormalized) cost is at most mass times that.
            let mass: f64 = coords.iter().map(|&(_, _, w)| w).sum();
            prop_assert!(d <= mass * step * 2.0f64.sqrt() + 1e-9);
        }
    }
}
