//! Blow-up of the embedded scheme at a face of its fan: star subdivision of
//! the fan, substitution of chart variables, strict transform of the
//! binomial generators, and propagation of chart frames.
//!
//! In the child chart that drops ray `e_i` of the centre, the substitution is
//! `x_j -> w x_j` for the other centre variables and `x_i -> w` for the
//! dropped one, where `w` is the exceptional variable of the barycentre.
//! Exponent bookkeeping happens in the parent's slot order (the dropped slot
//! holds `w`) and is permuted into the child's sorted ray order at the end.

use crate::binomial::{normalize, ChartFrame, ChartIdeal, EmbeddingState, Normalized};
use crate::error::{EngineError, Result};
use crate::fan::star_subdivision;
use serde::{Deserialize, Serialize};

/// Exponent vector of one side of a binomial after the total transform,
/// in parent slot order with `removed_position` now holding the exceptional
/// variable: that slot receives the side's total degree along the centre.
pub fn total_transform_side(
    exp: &[u64],
    delta_positions: &[usize],
    removed_position: usize,
) -> Vec<u64> {
    let delta_degree: u64 = delta_positions.iter().map(|&p| exp[p]).sum();
    let mut out = exp.to_vec();
    out[removed_position] = delta_degree;
    out
}

/// Strict transform of both sides: total transform, then division by the
/// largest common power of the exceptional variable. Returns the transformed
/// sides (parent slot order) and the subtracted power.
pub fn strict_transform_sides(
    alpha: &[u64],
    beta: &[u64],
    delta_positions: &[usize],
    removed_position: usize,
) -> (Vec<u64>, Vec<u64>, u64) {
    let mut a = total_transform_side(alpha, delta_positions, removed_position);
    let mut b = total_transform_side(beta, delta_positions, removed_position);
    let m = a[removed_position].min(b[removed_position]);
    a[removed_position] -= m;
    b[removed_position] -= m;
    (a, b, m)
}

/// Bookkeeping for one child chart of one blown-up parent chart. Positions
/// named "parent" refer to the parent's sorted slot order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransformRecord {
    pub old_chart: usize,
    pub new_chart: usize,
    /// Parent slot of the centre ray this child drops (the slot that holds
    /// the exceptional variable before re-sorting).
    pub removed_position: usize,
    pub removed_ray: usize,
    /// Slot of the exceptional variable in the child's sorted order.
    pub exceptional_position: usize,
    /// Parent slots of the centre rays.
    pub delta_positions: Vec<usize>,
    /// Exceptional power divided out of each parent generator, in order.
    pub subtracted: Vec<u64>,
}

#[derive(Debug, Clone)]
pub struct BlowUpOutcome {
    pub state: EmbeddingState,
    pub barycentre_id: usize,
    /// One record per child chart of each subdivided parent.
    pub records: Vec<TransformRecord>,
}

/// Blow up the embedded scheme at the face `delta` (global ray ids). A
/// single-ray centre is the identity. Charts whose cone does not contain the
/// centre are carried over unchanged.
pub fn blow_up(state: &EmbeddingState, delta: &[usize]) -> Result<BlowUpOutcome> {
    let sub = star_subdivision(&state.fan, delta)?;
    if sub.split.is_empty() {
        return Ok(BlowUpOutcome {
            state: state.clone(),
            barycentre_id: sub.barycentre_id,
            records: Vec::new(),
        });
    }
    let b_id = sub.barycentre_id;
    let mut charts: Vec<Option<ChartIdeal>> = vec![None; sub.fan.max_cones.len()];
    for &(old_idx, new_idx) in &sub.kept {
        charts[new_idx] = Some(state.charts[old_idx].clone());
    }
    let mut records = Vec::new();
    for split in &sub.split {
        let parent = &state.charts[split.old_idx];
        let delta_positions: Vec<usize> = split
            .charts
            .iter()
            .map(|c| c.removed_position)
            .collect();
        for chart_info in &split.charts {
            let p_i = chart_info.removed_position;
            let child_cone = sub.fan.max_cones[chart_info.new_idx].clone();
            // Ray ids in parent slot order, with the dropped slot holding
            // the barycentre.
            let mut slot_ids: Vec<usize> = parent.cone.clone();
            slot_ids[p_i] = b_id;
            let perm: Vec<usize> = child_cone
                .iter()
                .map(|id| slot_ids.iter().position(|s| s == id).unwrap())
                .collect();
            // Frame in parent slot order: the dropped slot keeps its parent
            // character (it pairs correctly with the barycentre); the other
            // centre slots lose that character once.
            let mut x_slots: Vec<Vec<i64>> = parent.frame.x.clone();
            let w_char = parent.frame.x[p_i].clone();
            for &j in &delta_positions {
                if j != p_i {
                    for (t, w) in w_char.iter().enumerate() {
                        x_slots[j][t] -= w;
                    }
                }
            }
            let frame = ChartFrame {
                x: perm.iter().map(|&j| x_slots[j].clone()).collect(),
                y: parent.frame.y.clone(),
            };
            let mut child = ChartIdeal {
                cone: child_cone.clone(),
                frame,
                binomials: Vec::new(),
                torus: parent.torus.clone(),
            };
            let mut subtracted = Vec::new();
            for bin in &parent.binomials {
                let (a_pp, b_pp, m) =
                    strict_transform_sides(&bin.alpha, &bin.beta, &delta_positions, p_i);
                subtracted.push(m);
                let a: Vec<u64> = perm.iter().map(|&j| a_pp[j]).collect();
                let b: Vec<u64> = perm.iter().map(|&j| b_pp[j]).collect();
                match normalize(&a, &b, &bin.gamma)? {
                    Normalized::Binomial(nb) => child.binomials.push(nb),
                    Normalized::TorusRelation(_) => {
                        return Err(EngineError::InvalidChart(
                            "strict transform degenerated to a torus relation".into(),
                        ))
                    }
                }
            }
            let exceptional_position = child_cone.binary_search(&b_id).unwrap();
            records.push(TransformRecord {
                old_chart: split.old_idx,
                new_chart: chart_info.new_idx,
                removed_position: p_i,
                removed_ray: chart_info.removed_ray,
                exceptional_position,
                delta_positions: delta_positions.clone(),
                subtracted,
            });
            charts[chart_info.new_idx] = Some(child);
        }
    }
    let charts: Vec<ChartIdeal> = charts.into_iter().map(|c| c.unwrap()).collect();
    Ok(BlowUpOutcome {
        state: EmbeddingState { fan: sub.fan, charts },
        barycentre_id: b_id,
        records,
    })
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
    fn cusp_blow_up_charts() {
        // x1^2 - x0^3 on the plane, blown up at the origin.
        let state = orthant_state(2, vec![(vec![0, 2], vec![3, 0], vec![])]);
        let out = blow_up(&state, &[0, 1]).unwrap();
        assert_eq!(out.state.fan.rays[out.barycentre_id], vec![1, 1]);
        assert_eq!(out.state.fan.max_cones, vec![vec![1, 2], vec![0, 2]]);
        let c0 = &out.state.charts[0]; // dropped ray 0
        assert_eq!(c0.binomials[0].alpha, vec![0, 1]);
        assert_eq!(c0.binomials[0].beta, vec![2, 0]);
        let c1 = &out.state.charts[1]; // dropped ray 1
        assert_eq!(c1.binomials[0].alpha, vec![0, 0]);
        assert_eq!(c1.binomials[0].beta, vec![3, 1]);
        assert_eq!(out.records[0].subtracted, vec![2]);
        assert_eq!(out.records[1].subtracted, vec![2]);
        out.state.validate().unwrap();
        out.state.check_gluing().unwrap();
    }

    #[test]
    fn quadric_cone_blow_up_charts() {
        // x0^2 - x1 x2 in rank three, blown up at the origin.
        let state = orthant_state(3, vec![(vec![2, 0, 0], vec![0, 1, 1], vec![])]);
        assert_eq!(state.charts[0].binomials[0].alpha, vec![0, 1, 1]);
        assert_eq!(state.charts[0].binomials[0].beta, vec![2, 0, 0]);
        let out = blow_up(&state, &[0, 1, 2]).unwrap();
        assert_eq!(out.state.fan.rays[out.barycentre_id], vec![1, 1, 1]);
        // Children in removed-ray order 0, 1, 2 with cones sorted.
        assert_eq!(
            out.state.fan.max_cones,
            vec![vec![1, 2, 3], vec![0, 2, 3], vec![0, 1, 3]]
        );
        let b0 = &out.state.charts[0].binomials[0];
        assert_eq!((b0.alpha.clone(), b0.beta.clone()), (vec![0, 0, 0], vec![1, 1, 0]));
        let b1 = &out.state.charts[1].binomials[0];
        assert_eq!((b1.alpha.clone(), b1.beta.clone()), (vec![0, 1, 0], vec![2, 0, 0]));
        let b2 = &out.state.charts[2].binomials[0];
        assert_eq!((b2.alpha.clone(), b2.beta.clone()), (vec![0, 1, 0], vec![2, 0, 0]));
        out.state.validate().unwrap();
        out.state.check_gluing().unwrap();
    }

    #[test]
    fn single_ray_centre_is_identity() {
        let state = orthant_state(2, vec![(vec![0, 2], vec![3, 0], vec![])]);
        let out = blow_up(&state, &[1]).unwrap();
        assert_eq!(out.state, state);
        assert!(out.records.is_empty());
    }

    #[test]
    fn kept_charts_are_untouched() {
        let fan = RegularFan {
            dim: 2,
            rays: vec![vec![1, 0], vec![0, 1], vec![-1, 0]],
            max_cones: vec![vec![0, 1], vec![1, 2]],
        };
        let gens = vec![
            vec![(vec![0, 2], vec![3, 0], vec![])],
            vec![(vec![2, 0], vec![0, 3], vec![])],
        ];
        let state = EmbeddingState::from_generators(fan, gens).unwrap();
        let out = blow_up(&state, &[0, 1]).unwrap();
        assert_eq!(out.state.fan.max_cones.len(), 3);
        // The kept chart keeps its position data and generators.
        let kept = out
            .state
            .charts
            .iter()
            .find(|c| c.cone == vec![1, 2])
            .unwrap();
        assert_eq!(kept, &state.charts[1]);
        out.state.validate().unwrap();
    }

    #[test]
    fn characters_are_preserved_by_total_transform() {
        // The character of each side's monomial is intrinsic: after the
        // total transform it must be unchanged; the strict transform shifts
        // both sides by the subtracted multiple of the exceptional character.
        let state = orthant_state(3, vec![(vec![2, 0, 0], vec![0, 1, 1], vec![])]);
        let parent = &state.charts[0];
        let out = blow_up(&state, &[0, 1, 2]).unwrap();
        for rec in &out.records {
            let child = &out.state.charts[rec.new_chart];
            for (k, bin) in parent.binomials.iter().enumerate() {
                let m = rec.subtracted[k] as i64;
                let cb = &child.binomials[k];
                let w_char = &child.frame.x[rec.exceptional_position];
                let as_i64 = |v: &[u64]| -> Vec<i64> { v.iter().map(|&x| x as i64).collect() };
                // Character difference beta - alpha is intrinsic to the
                // binomial; under strict transform it may flip orientation.
                let parent_diff = parent
                    .frame
                    .character(
                        &bin.beta
                            .iter()
                            .zip(&bin.alpha)
                            .map(|(&b, &a)| b as i64 - a as i64)
                            .collect::<Vec<_>>(),
                        &bin.gamma,
                    );
                let child_diff = child.frame.character(
                    &cb.beta
                        .iter()
                        .zip(&cb.alpha)
                        .map(|(&b, &a)| b as i64 - a as i64)
                        .collect::<Vec<_>>(),
                    &cb.gamma,
                );
                let matches_direct = parent_diff == child_diff;
                let matches_flipped =
                    parent_diff.iter().zip(&child_diff).all(|(a, b)| *a == -b);
                assert!(matches_direct || matches_flipped);
                // And each side individually: child alpha side character +
                // m * w equals one of the parent side characters.
                let child_alpha_char = child.frame.character(&as_i64(&cb.alpha), &[]);
                let lift: Vec<i64> = child_alpha_char
                    .iter()
                    .zip(w_char)
                    .map(|(c, w)| c + m * w)
                    .collect();
                let pa = parent.frame.character(&as_i64(&bin.alpha), &[]);
                let pb = parent.frame.character(&as_i64(&bin.beta), &[]);
                assert!(lift == pa || lift == pb);
            }
        }
    }

    #[test]
    fn total_transform_slot_arithmetic() {
        let exp = vec![1, 2, 0, 4];
        // centre occupies slots 0, 1, 3; child drops slot 1
        let t = total_transform_side(&exp, &[0, 1, 3], 1);
        assert_eq!(t, vec![1, 7, 0, 4]);
        let (a, b, m) = strict_transform_sides(&[0, 2], &[3, 0], &[0, 1], 0);
        assert_eq!((a, b, m), (vec![0, 2], vec![1, 0], 2));
    }
}
