//! Ready-made test instances with known optima, shared by the validation
//! battery and the command-line examples.

use crate::measure::{Atom, GridBox, GriddedDensity, MeasureComponent, SignedMeasure};

fn atom(location: Vec<f64>, weight: f64) -> Atom {
    Atom::new(location, weight).expect("static instance data is finite")
}

/// Four atoms on a line: attraction 2δ₁ + 6δ₈ against repulsion δ₀ + 4δ₄.
/// With two sites the exact optimum is {0, 8} at value −14.
pub fn line_atoms() -> SignedMeasure {
    SignedMeasure::new(
        MeasureComponent::from_atoms(vec![atom(vec![1.0], 2.0), atom(vec![8.0], 6.0)]),
        MeasureComponent::from_atoms(vec![atom(vec![0.0], 1.0), atom(vec![4.0], 4.0)]),
        1,
    )
    .expect("consistent dimensions")
}

/// Unit mass spread over `nodes` equal atoms on the unit circle against a
/// unit atom at the origin.  Single-site values decrease in the site radius
/// without bound, so no one-point minimizer exists.
pub fn circle_vs_center(nodes: usize) -> SignedMeasure {
    assert!(nodes >= 8, "need at least 8 circle nodes");
    let w = 1.0 / nodes as f64;
    let circle: Vec<Atom> = (0..nodes)
        .map(|i| {
            let a = 2.0 * std::f64::consts::PI * i as f64 / nodes as f64;
            atom(vec![a.cos(), a.sin()], w)
        })
        .collect();
    SignedMeasure::new(
        MeasureComponent::from_atoms(circle),
        MeasureComponent::from_atoms(vec![atom(vec![0.0, 0.0], 1.0)]),
        2,
    )
    .expect("consistent dimensions")
}

/// Density `1/(2π)` on the disk of radius 2 (total mass 2) against a unit
/// atom at the origin.  The stationary ball radius is √2.
pub fn disk_uniform(res: usize) -> SignedMeasure {
    let b = GridBox::new(vec![-2.0, -2.0], vec![2.0, 2.0]).expect("valid box");
    let density = GriddedDensity::from_fn(b, vec![res, res], |x| {
        if x[0] * x[0] + x[1] * x[1] <= 4.0 {
            1.0 / (2.0 * std::f64::consts::PI)
        } else {
            0.0
        }
    })
    .expect("valid density");
    SignedMeasure::new(
        MeasureComponent::from_density(density),
        MeasureComponent::from_atoms(vec![atom(vec![0.0, 0.0], 1.0)]),
        2,
    )
    .expect("consistent dimensions")
}

/// Density 1 on `[−2,2]` against a unit atom at the origin; the stationary
/// ball radius is 1/2 with value −1/4.
pub fn interval_uniform(res: usize) -> SignedMeasure {
    let b = GridBox::new(vec![-2.0], vec![2.0]).expect("valid box");
    SignedMeasure::new(
        MeasureComponent::from_density(
            GriddedDensity::uniform(b, vec![res], 1.0).expect("valid density"),
        ),
        MeasureComponent::from_atoms(vec![atom(vec![0.0], 1.0)]),
        1,
    )
    .expect("consistent dimensions")
}

/// Density 1 on `[−2,2]` (mass 4) against density 4 on `[−0.25,0.25]`
/// (mass 2); the optimal region is the complement of `(−1,1)`.
pub fn block_instance(res_plus: usize, res_minus: usize) -> SignedMeasure {
    let plus = GriddedDensity::uniform(
        GridBox::new(vec![-2.0], vec![2.0]).expect("valid box"),
        vec![res_plus],
        1.0,
    )
    .expect("valid density");
    let minus = GriddedDensity::uniform(
        GridBox::new(vec![-0.25], vec![0.25]).expect("valid box"),
        vec![res_minus],
        4.0,
    )
    .expect("valid density");
    SignedMeasure::new(
        MeasureComponent::from_density(plus),
        MeasureComponent::from_density(minus),
        1,
    )
    .expect("consistent dimensions")
}

/// Same attraction/repulsion layout with the repulsion collapsed to a single
/// atom of mass 2 at the origin; shares the optimal region with
/// [`block_instance`].
pub fn block_instance_atomic(res_plus: usize) -> SignedMeasure {
    let plus = GriddedDensity::uniform(
        GridBox::new(vec![-2.0], vec![2.0]).expect("valid box"),
        vec![res_plus],
        1.0,
    )
    .expect("valid density");
    SignedMeasure::new(
        MeasureComponent::from_density(plus),
        MeasureComponent::from_atoms(vec![atom(vec![0.0], 2.0)]),
        1,
    )
    .expect("consistent dimensions")
}

/// Density 1 on `[−2,2]²` (mass 16) against an atom of mass π at the
/// origin; the optimal region is the complement of the unit disk.
pub fn square_with_central_atom(res: usize) -> SignedMeasure {
    let b = GridBox::new(vec![-2.0, -2.0], vec![2.0, 2.0]).expect("valid box");
    SignedMeasure::new(
        MeasureComponent::from_density(
            GriddedDensity::uniform(b, vec![res, res], 1.0).expect("valid density"),
        ),
        MeasureComponent::from_atoms(vec![atom(vec![0.0, 0.0], std::f64::consts::PI)]),
        2,
    )
    .expect("consistent dimensions")
}

/// Uniform probability density on the unit cube, the measure used to
/// estimate quantization constants.
pub fn unit_cube_uniform(n: usize, res: usize) -> SignedMeasure {
    let b = GridBox::new(vec![0.0; n], vec![1.0; n]).expect("valid box");
    SignedMeasure::positive(
        MeasureComponent::from_density(
            GriddedDensity::uniform(b, vec![res; n], 1.0).expect("valid density"),
        ),
        n,
    )
    .expect("consistent dimensions")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn masses_are_as_documented() {
        let line = line_atoms();
        assert_eq!(line.mass_plus(), 8.0);
        assert_eq!(line.mass_minus(), 5.0);

        let probe = circle_vs_center(1000);
        assert!((probe.mass_plus() - 1.0).abs() < 1e-12);
        assert_eq!(probe.mass_minus(), 1.0);

        let disk = disk_uniform(200);
        assert!((disk.mass_plus() - 2.0).abs() < 0.02);

        let block = block_instance(400, 50);
        assert!((block.mass_plus() - 4.0).abs() < 1e-12);
        assert!((block.mass_minus() - 2.0).abs() < 1e-12);

        let square = square_with_central_atom(64);
        assert!((square.mass_plus() - 16.0).abs() < 1e-10);

        let cube = unit_cube_uniform(2, 32);
        assert!((cube.mass_plus() - 1.0).abs() < 1e-12);
        assert!(cube.minus.is_empty());
    }
}
