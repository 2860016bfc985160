//! Hilbert–Samuel functions of chart stalks at distinguished points.
//!
//! The function is computed from the staircase of initial exponents of a
//! standard basis: `H(l)` counts monomials of degree at most `l` outside the
//! staircase ideal, by inclusion–exclusion over the staircase generators.
//! Smooth extra directions (surviving torus coordinates, or the arithmetic
//! direction of the integers) enter as additional free dimensions, which is
//! the same as taking iterated partial sums.

use crate::binomial::ChartIdeal;
use crate::error::{EngineError, Result};
use crate::standard_basis::{standard_basis, CompletionCaps, StandardBasis};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HsFunction {
    /// Number of divisor variables of the staircase exponents.
    pub r: usize,
    /// Free smooth dimensions beyond the divisor variables.
    pub free: usize,
    /// Minimal staircase generators (length-`r` exponents).
    pub vertices: Vec<Vec<u64>>,
}

fn choose(n: i128, k: i128) -> i128 {
    if n < 0 || k < 0 || n < k {
        return 0;
    }
    let k = k.min(n - k);
    let mut c: i128 = 1;
    for i in 1..=k {
        c = c * (n - k + i) / i;
    }
    c
}

/// Remove dominated generators and duplicates; sort for canonical form.
fn minimalize(mut vertices: Vec<Vec<u64>>) -> Vec<Vec<u64>> {
    vertices.sort();
    vertices.dedup();
    let keep: Vec<Vec<u64>> = vertices
        .iter()
        .filter(|v| {
            !vertices
                .iter()
                .any(|w| w != *v && w.iter().zip(v.iter()).all(|(&a, &b)| a <= b))
        })
        .cloned()
        .collect();
    keep
}

impl HsFunction {
    pub fn new(r: usize, free: usize, vertices: Vec<Vec<u64>>) -> Self {
        HsFunction { r, free, vertices: minimalize(vertices) }
    }

    pub fn dims(&self) -> usize {
        self.r + self.free
    }

    /// Degree past which the function agrees with its Hilbert polynomial.
    pub fn regularity(&self) -> u64 {
        self.vertices.iter().map(|v| v.iter().sum::<u64>()).sum::<u64>() + 1
    }

    /// Length of the stalk modulo the `(l+1)`-st power of the maximal ideal.
    pub fn eval(&self, l: u64) -> u128 {
        let d = self.dims() as i128;
        let l = l as i128;
        let m = self.vertices.len();
        let mut total: i128 = 0;
        for mask in 0u64..(1u64 << m) {
            let mut deg: i128 = 0;
            if m > 0 {
                let mut max = vec![0u64; self.vertices[0].len()];
                for (i, v) in self.vertices.iter().enumerate() {
                    if mask & (1 << i) != 0 {
                        for (t, &x) in v.iter().enumerate() {
                            max[t] = max[t].max(x);
                        }
                    }
                }
                deg = max.iter().sum::<u64>() as i128;
            }
            let sign = if mask.count_ones() % 2 == 0 { 1 } else { -1 };
            total += sign * choose(d + l - deg, d);
        }
        debug_assert!(total >= 0);
        total as u128
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum HsComparison {
    Less,
    Equal,
    Greater,
    /// The functions cross: neither dominates the other.
    Incomparable,
}

/// Pointwise comparison on the finite window that determines the order:
/// both functions are polynomial past their regularity, so checking up to
/// `max(regularity) + max(dims) + 1` decides domination everywhere.
pub fn compare_hs(a: &HsFunction, b: &HsFunction) -> HsComparison {
    let l_max = a.regularity().max(b.regularity())
        + (a.dims().max(b.dims()) as u64)
        + 1;
    let (mut some_less, mut some_greater) = (false, false);
    for l in 0..=l_max {
        let (va, vb) = (a.eval(l), b.eval(l));
        if va < vb {
            some_less = true;
        }
        if va > vb {
            some_greater = true;
        }
    }
    match (some_less, some_greater) {
        (false, false) => HsComparison::Equal,
        (true, false) => HsComparison::Less,
        (false, true) => HsComparison::Greater,
        (true, true) => HsComparison::Incomparable,
    }
}

/// Stalk data of a chart at its distinguished point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HsStalk {
    pub basis: StandardBasis,
    /// Hilbert–Samuel function of every fiber of the stalk (the staircase
    /// makes it independent of the residue characteristic).
    pub fiber: HsFunction,
    /// Rank of the torus relation lattice: codimension cut out of the torus.
    pub nu: usize,
    /// The distinguished point does not lie on the scheme.
    pub off_scheme: bool,
}

/// Compute the stalk invariants of a chart at its distinguished point. The
/// staircase takes the initial exponents of both the nonlinear and the
/// linear part; a collapsed basis yields the zero function.
pub fn hs_at_distinguished(chart: &ChartIdeal, caps: &CompletionCaps) -> Result<HsStalk> {
    let basis = standard_basis(chart, caps)?;
    let nu = basis.torus.rank();
    if nu > chart.q() {
        return Err(EngineError::InvalidChart(
            "torus relation rank exceeds torus dimension".into(),
        ));
    }
    let free = chart.q() - nu;
    let off_scheme = basis.is_collapsed();
    let vertices: Vec<Vec<u64>> = if off_scheme {
        vec![vec![0; chart.r()]]
    } else {
        basis
            .nonlinear
            .iter()
            .chain(basis.linear.iter())
            .map(|b| b.alpha.clone())
            .collect()
    };
    let fiber = HsFunction::new(chart.r(), free, vertices);
    Ok(HsStalk { basis, fiber, nu, off_scheme })
}

/// The same stalk seen over the integers: one extra free (arithmetic)
/// dimension, so the function is the partial-sum transform of the fiber one.
pub fn mixed_hs(fiber: &HsFunction) -> HsFunction {
    HsFunction { r: fiber.r, free: fiber.free + 1, vertices: fiber.vertices.clone() }
}

/// Values `(mixed, fiber + k)` of the Hilbert–Samuel functions of a smooth
/// `(n+1)`-dimensional mixed local ring and a smooth `n`-dimensional fiber
/// one shifted by `k`, at degree `k`: the mixed value always dominates.
pub fn mixed_affine_hs(n: usize, k: u64) -> (u128, u128) {
    let lhs = choose((n as i128) + 1 + (k as i128), (n as i128) + 1);
    let rhs = choose((n as i128) + (k as i128), n as i128) + (k as i128);
    (lhs as u128, rhs as u128)
}

#[cfg(test)]
mod test {
    use super::*;
    use crate::binomial::EmbeddingState;
    use crate::fan::RegularFan;

    #[test]
    fn plane_curve_multiplicity_two() {
        let h = HsFunction::new(2, 0, vec![vec![0, 2]]);
        for l in 0..8u64 {
            assert_eq!(h.eval(l), (2 * l + 1) as u128);
        }
        assert_eq!(h.eval(0), 1);
    }

    #[test]
    fn monomial_curve_is_multiplicity_three() {
        let h = HsFunction::new(
            3,
            0,
            vec![vec![0, 2, 0], vec![0, 1, 1], vec![0, 0, 2]],
        );
        for l in 1..8u64 {
            assert_eq!(h.eval(l), (3 * l + 1) as u128);
        }
    }

    #[test]
    fn free_dimensions_take_partial_sums() {
        let base = HsFunction::new(2, 0, vec![vec![0, 2]]);
        let lifted = HsFunction::new(2, 1, vec![vec![0, 2]]);
        for l in 0..8u64 {
            let expect: u128 = (0..=l).map(|i| base.eval(i)).sum();
            assert_eq!(lifted.eval(l), expect);
            assert_eq!(lifted.eval(l), ((l + 1) * (l + 1)) as u128);
        }
        assert_eq!(mixed_hs(&base), lifted);
    }

    #[test]
    fn eval_matches_direct_enumeration() {
        // Direct count of monomials of degree <= l outside the staircase.
        let vertices = vec![vec![1, 2, 0], vec![0, 0, 3], vec![2, 0, 1]];
        let h = HsFunction::new(3, 0, vertices.clone());
        for l in 0..9u64 {
            let mut count = 0u128;
            for a in 0..=l {
                for b in 0..=(l - a) {
                    for c in 0..=(l - a - b) {
                        let m = [a, b, c];
                        let inside = vertices
                            .iter()
                            .any(|v| v.iter().zip(&m).all(|(&x, &y)| x <= y));
                        if !inside {
                            count += 1;
                        }
                    }
                }
            }
            assert_eq!(h.eval(l), count, "degree {l}");
        }
    }

    #[test]
    fn zero_vertex_kills_the_function() {
        let h = HsFunction::new(2, 3, vec![vec![0, 0]]);
        for l in 0..6u64 {
            assert_eq!(h.eval(l), 0);
        }
    }

    #[test]
    fn comparison_outcomes() {
        let cusp = HsFunction::new(2, 0, vec![vec![0, 2]]);
        let smooth = HsFunction::new(2, 0, vec![vec![1, 0]]);
        assert_eq!(compare_hs(&smooth, &cusp), HsComparison::Less);
        assert_eq!(compare_hs(&cusp, &smooth), HsComparison::Greater);
        assert_eq!(compare_hs(&cusp, &cusp.clone()), HsComparison::Equal);
        // A line vs a fat point: values cross.
        let line = HsFunction::new(2, 0, vec![vec![1, 0]]);
        let fat = HsFunction::new(2, 0, vec![vec![0, 2], vec![2, 0]]);
        assert_eq!(compare_hs(&line, &fat), HsComparison::Incomparable);
    }

    #[test]
    fn stalk_of_the_cusp_chart() {
        let rays = vec![vec![1, 0], vec![0, 1]];
        let fan = RegularFan { dim: 2, rays, max_cones: vec![vec![0, 1]] };
        let state = EmbeddingState::from_generators(
            fan,
            vec![vec![(vec![0, 2], vec![3, 0], vec![])]],
        )
        .unwrap();
        let stalk = hs_at_distinguished(&state.charts[0], &CompletionCaps::default()).unwrap();
        assert!(!stalk.off_scheme);
        assert_eq!(stalk.nu, 0);
        assert_eq!(stalk.fiber.vertices, vec![vec![0, 2]]);
        assert_eq!(stalk.fiber.eval(3), 7);
    }

    #[test]
    fn mixed_inequality_samples() {
        for n in 0..=6usize {
            for k in 0..=10u64 {
                let (lhs, rhs) = mixed_affine_hs(n, k);
                assert!(lhs >= rhs, "n={n} k={k}: {lhs} < {rhs}");
            }
        }
        assert_eq!(mixed_affine_hs(2, 2), (10, 8));
    }
}
