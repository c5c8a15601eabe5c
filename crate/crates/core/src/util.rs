//! Small numeric helpers shared across modules.

/// Euclidean distance between two points of equal dimension.
#[inline]
pub(crate) fn dist(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut s = 0.0;
    for (x, y) in a.iter().zip(b) {
        let d = x - y;
        s += d * d;
    }
    s.sqrt()
}

#[inline]
pub(crate) fn norm(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Compensated (Neumaier) summation.  Used wherever a total must be stable
/// under regrouping — conservation checks compare sums accumulated through
/// different groupings, and plain left-to-right addition drifts too much on
/// large grids.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.comp += (self.sum - t) + value;
        } else {
            self.comp += (value - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

pub(crate) fn kahan_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut acc = KahanSum::new();
    for v in values {
        acc.add(v);
    }
    acc.total()
}

/// Sum of `term(0..len)` with a fixed reduction order independent of thread
/// count: fixed-size chunks are compensated-summed in parallel, then the
/// chunk totals are combined sequentially.  Bit-identical across runs.
pub(crate) fn deterministic_par_sum(len: usize, term: impl Fn(usize) -> f64 + Sync) -> f64 {
    const CHUNK: usize = 4096;
    if len <= CHUNK {
        return kahan_sum((0..len).map(term));
    }
    use rayon::prelude::*;
    let chunks = len.div_ceil(CHUNK);
    let partials: Vec<f64> = (0..chunks)
        .into_par_iter()
        .map(|ci| {
            let lo = ci * CHUNK;
            let hi = (lo + CHUNK).min(len);
            kahan_sum((lo..hi).map(&term))
        })
        .collect();
    kahan_sum(partials)
}

/// Volume of the unit ball in `R^n` (ω₀ = 1, ω₁ = 2, ω₂ = π, ω₃ = 4π/3, …).
pub(crate) fn unit_ball_volume(n: usize) -> f64 {
    match n {
        0 => 1.0,
        1 => 2.0,
        _ => unit_ball_volume(n - 2) * 2.0 * std::f64::consts::PI / n as f64,
    }
}

/// Lexicographic comparison of coordinate slices with a total order on f64.
pub(crate) fn lex_cmp(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        let c = x.total_cmp(y);
        if c != std::cmp::Ordering::Equal {
            return c;
        }
    }
    a.len().cmp(&b.len())
}

/// Sorts a point list in place into canonical (lexicographic) order.
pub(crate) fn sort_points(points: &mut [Vec<f64>]) {
    points.sort_by(|a, b| lex_cmp(a, b));
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kahan_recovers_small_terms() {
        let mut acc = KahanSum::new();
        acc.add(1e16);
        for _ in 0..1000 {
            acc.add(1.0);
        }
        acc.add(-1e16);
        assert_eq!(acc.total(), 1000.0);
    }

    #[test]
    fn ball_volumes() {
        assert_eq!(unit_ball_volume(1), 2.0);
        assert!((unit_ball_volume(2) - std::f64::consts::PI).abs() < 1e-15);
        assert!((unit_ball_volume(3) - 4.0 * std::f64::consts::PI / 3.0).abs() < 1e-15);
    }

    #[test]
    fn lex_order_on_points() {
        let mut pts = vec![vec![1.0, 0.0], vec![0.0, 2.0], vec![0.0, 1.0]];
        sort_points(&mut pts);
        assert_eq!(pts, vec![vec![0.0, 1.0], vec![0.0, 2.0], vec![1.0, 0.0]]);
    }
}
