//! Hilbert–Samuel stratification of the embedded scheme: stalks at the
//! distinguished points of all faces, the smoothness gate, the Samuel
//! stratum ideal at a point, and the highest stratum of the fan.

use crate::binomial::{restrict_to_face, ChartBinomial, ChartIdeal, EmbeddingState, TorusLattice};
use crate::error::{EngineError, Result};
use crate::fan::deduplicated_faces;
use crate::hasse::hasse_monomials;
use crate::hilbert::{compare_hs, hs_at_distinguished, HsComparison, HsFunction, HsStalk};
use crate::standard_basis::{CompletionCaps, StandardBasis};
use serde::{Deserialize, Serialize};

/// A chart stalk is smooth at its distinguished point when the point is off
/// the scheme or the standard basis has no nonlinear part (the local ring is
/// a power series ring over the surviving torus directions).
pub fn is_smooth_stalk(stalk: &HsStalk) -> bool {
    stalk.off_scheme || stalk.basis.nonlinear.is_empty()
}

pub fn is_smooth_chart(chart: &ChartIdeal, caps: &CompletionCaps) -> Result<bool> {
    Ok(is_smooth_stalk(&hs_at_distinguished(chart, caps)?))
}

#[derive(Debug, Clone)]
pub struct FaceStalk {
    /// Global ray ids of the face.
    pub face: Vec<usize>,
    /// Index of the chart the stalk was computed in.
    pub chart: usize,
    /// The restricted chart ideal at the face.
    pub restricted: ChartIdeal,
    pub stalk: HsStalk,
}

/// Stalks at the distinguished points of every deduplicated face of the fan,
/// each computed in the first chart containing the face (gluing makes the
/// choice immaterial).
pub fn face_stalks(state: &EmbeddingState, caps: &CompletionCaps) -> Result<Vec<FaceStalk>> {
    let mut out = Vec::new();
    for face in deduplicated_faces(&state.fan) {
        let (ci, chart) = state
            .charts
            .iter()
            .enumerate()
            .find(|(_, c)| face.iter().all(|id| c.cone.binary_search(id).is_ok()))
            .expect("faces come from maximal cones");
        let restricted = restrict_to_face(chart, &face)?;
        let stalk = hs_at_distinguished(&restricted, caps)?;
        out.push(FaceStalk { face, chart: ci, restricted, stalk });
    }
    Ok(out)
}

pub fn all_stalks_smooth(stalks: &[FaceStalk]) -> bool {
    stalks.iter().all(|f| is_smooth_stalk(&f.stalk))
}

/// Generators of the Samuel stratum of a stalk inside its chart: the torus
/// relations, the linear basis elements, and every derivative monomial of
/// each nonlinear element of order below its initial degree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StratumIdeal {
    pub torus: TorusLattice,
    pub linear: Vec<ChartBinomial>,
    /// Divisor-variable exponents; minimal set.
    pub monomials: Vec<Vec<u64>>,
}

pub fn samuel_stratum_ideal(basis: &StandardBasis) -> Result<StratumIdeal> {
    let mut monomials: Vec<Vec<u64>> = Vec::new();
    for f in &basis.nonlinear {
        let d = f.lead_degree();
        for m in hasse_monomials(f, d)? {
            monomials.push(m.exponent);
        }
    }
    monomials.sort();
    monomials.dedup();
    let minimal: Vec<Vec<u64>> = monomials
        .iter()
        .filter(|v| {
            !monomials
                .iter()
                .any(|w| w != *v && w.iter().zip(v.iter()).all(|(&a, &b)| a <= b))
        })
        .cloned()
        .collect();
    Ok(StratumIdeal {
        torus: basis.torus.clone(),
        linear: basis.linear.clone(),
        monomials: minimal,
    })
}

/// The local model after eliminating linear pivots: the surviving divisor
/// variables and the nonlinear basis elements re-indexed onto them. The
/// torus block contributes its free directions unchanged.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalModel {
    /// Chart slot positions of the surviving divisor variables.
    pub kept_positions: Vec<usize>,
    /// Nonlinear elements with exponents over `kept_positions`.
    pub nonlinear: Vec<ChartBinomial>,
    /// Free torus dimensions (torus rank minus relation rank).
    pub free: usize,
}

pub fn build_local_model(chart: &ChartIdeal, basis: &StandardBasis) -> Result<LocalModel> {
    if basis.is_collapsed() {
        return Err(EngineError::InvalidChart(
            "no local model at a point off the scheme".into(),
        ));
    }
    let r = chart.r();
    let pivots: Vec<usize> = basis
        .linear
        .iter()
        .map(|f| f.alpha.iter().position(|&x| x == 1).unwrap())
        .collect();
    let kept_positions: Vec<usize> = (0..r).filter(|p| !pivots.contains(p)).collect();
    let mut nonlinear = Vec::new();
    for f in &basis.nonlinear {
        let escaped = (0..r).any(|p| {
            pivots.contains(&p) && (f.alpha[p] > 0 || f.beta[p] > 0)
        });
        if escaped {
            return Err(EngineError::InvalidChart(
                "nonlinear element still mentions an eliminated pivot".into(),
            ));
        }
        nonlinear.push(ChartBinomial {
            alpha: kept_positions.iter().map(|&p| f.alpha[p]).collect(),
            beta: kept_positions.iter().map(|&p| f.beta[p]).collect(),
            gamma: f.gamma.clone(),
        });
    }
    let free = chart.q() - basis.torus.rank();
    Ok(LocalModel { kept_positions, nonlinear, free })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZMaximum {
    pub hs: HsFunction,
    /// Faces attaining the maximum, in enumeration order (size, then lex).
    pub faces: Vec<Vec<usize>>,
}

/// The largest Hilbert–Samuel function among the on-scheme stalks. Fails
/// with `IncomparableMaxima` when the maximal functions do not agree.
pub fn z_maximal_hs(stalks: &[FaceStalk]) -> Result<Option<ZMaximum>> {
    let candidates: Vec<&FaceStalk> =
        stalks.iter().filter(|f| !f.stalk.off_scheme).collect();
    if candidates.is_empty() {
        return Ok(None);
    }
    let mut maximal: Vec<&FaceStalk> = Vec::new();
    'outer: for c in &candidates {
        for other in &candidates {
            if compare_hs(&c.stalk.fiber, &other.stalk.fiber) == HsComparison::Less {
                continue 'outer;
            }
        }
        maximal.push(c);
    }
    let top = &maximal[0];
    for m in &maximal[1..] {
        if compare_hs(&top.stalk.fiber, &m.stalk.fiber) != HsComparison::Equal {
            return Err(EngineError::IncomparableMaxima);
        }
    }
    Ok(Some(ZMaximum {
        hs: top.stalk.fiber.clone(),
        faces: maximal.iter().map(|f| f.face.clone()).collect(),
    }))
}

#[cfg(test)]
mod test {
    use super::*;
    use crate::fan::RegularFan;

    fn orthant_state(
        n: usize,
        gens: Vec<(Vec<u64>, Vec<u64>, Vec<i64>)>,
    ) -> EmbeddingState {
        let rays: Vec<Vec<i64>> =
            (0..n).map(|i| (0..n).map(|j| i64::from(i == j)).collect()).collect();
        let fan = RegularFan { dim: n, rays, max_cones: vec![(0..n).collect()] };
        EmbeddingState::from_generators(fan, vec![gens]).unwrap()
    }

    #[test]
    fn cusp_z_maximum_is_the_origin() {
        let state = orthant_state(2, vec![(vec![0, 2], vec![3, 0], vec![])]);
        let stalks = face_stalks(&state, &CompletionCaps::default()).unwrap();
        assert_eq!(stalks.len(), 3);
        assert!(!all_stalks_smooth(&stalks));
        let z = z_maximal_hs(&stalks).unwrap().unwrap();
        assert_eq!(z.faces, vec![vec![0, 1]]);
        assert_eq!(z.hs.eval(1), 3);
    }

    #[test]
    fn cusp_times_line_attains_on_the_whole_edge() {
        // x1^2 - x0^3 seen in rank three: the stalks at the edge {0,1} and at
        // the origin have equal Hilbert–Samuel functions, and the edge comes
        // first in enumeration order.
        let state = orthant_state(3, vec![(vec![0, 2, 0], vec![3, 0, 0], vec![])]);
        let stalks = face_stalks(&state, &CompletionCaps::default()).unwrap();
        let z = z_maximal_hs(&stalks).unwrap().unwrap();
        assert_eq!(z.faces, vec![vec![0, 1], vec![0, 1, 2]]);
    }

    #[test]
    fn monomial_curve_strata() {
        let state = orthant_state(
            3,
            vec![
                (vec![1, 0, 1], vec![0, 2, 0], vec![]),
                (vec![0, 1, 1], vec![3, 0, 0], vec![]),
                (vec![0, 0, 2], vec![2, 1, 0], vec![]),
            ],
        );
        let stalks = face_stalks(&state, &CompletionCaps::default()).unwrap();
        // Proper faces are off the scheme; only the origin is on it.
        let on: Vec<&FaceStalk> =
            stalks.iter().filter(|f| !f.stalk.off_scheme).collect();
        assert_eq!(on.len(), 1);
        assert_eq!(on[0].face, vec![0, 1, 2]);
        let z = z_maximal_hs(&stalks).unwrap().unwrap();
        assert_eq!(z.faces, vec![vec![0, 1, 2]]);
        assert_eq!(z.hs.eval(2), 7);

        let stratum = samuel_stratum_ideal(&on[0].stalk.basis).unwrap();
        assert!(stratum.linear.is_empty());
        // The stratum monomial set cuts exactly the origin.
        assert_eq!(
            stratum.monomials,
            vec![vec![0, 0, 1], vec![0, 1, 0], vec![1, 0, 0]]
        );
    }

    #[test]
    fn local_model_eliminates_pivots() {
        // {x0 - x2^2, x1 - x0}: after completion both are linear; the model
        // keeps only x2 and has no nonlinear part.
        let state = orthant_state(
            3,
            vec![
                (vec![1, 0, 0], vec![0, 0, 2], vec![]),
                (vec![0, 1, 0], vec![1, 0, 0], vec![]),
            ],
        );
        let chart = &state.charts[0];
        let stalk = hs_at_distinguished(chart, &CompletionCaps::default()).unwrap();
        let model = build_local_model(chart, &stalk.basis).unwrap();
        assert_eq!(model.kept_positions, vec![2]);
        assert!(model.nonlinear.is_empty());
        assert!(is_smooth_stalk(&stalk));
    }

    #[test]
    fn smooth_gate_passes_resolved_states() {
        let state = orthant_state(2, vec![(vec![0, 1], vec![2, 0], vec![])]);
        let stalks = face_stalks(&state, &CompletionCaps::default()).unwrap();
        assert!(all_stalks_smooth(&stalks));
    }
}
