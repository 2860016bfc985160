//! The general resolution driver: find the highest Hilbert–Samuel stratum,
//! assemble the marked ideal of its Samuel stratum, order-reduce it on its
//! own little fan, and replay the centres into the global fan, repeating
//! until every stalk is smooth.

use crate::binomial::EmbeddingState;
use crate::blowup::blow_up;
use crate::error::{EngineError, Result};
use crate::fan::star_subdivision;
use crate::marked::assemble_marked_ideal;
use crate::standard_basis::CompletionCaps;
use crate::strata::{all_stalks_smooth, face_stalks, is_smooth_stalk, z_maximal_hs};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneralStep {
    /// Face whose stalk attained the Hilbert–Samuel maximum this round.
    pub attaining_face: Vec<usize>,
    /// Global ray ids of the blow-up centre.
    pub center: Vec<usize>,
    pub center_rays: Vec<Vec<i64>>,
    pub barycentre_id: usize,
}

#[derive(Debug, Clone)]
pub struct GeneralTrace {
    pub steps: Vec<GeneralStep>,
    pub final_state: EmbeddingState,
}

pub fn resolve_general(
    state: &EmbeddingState,
    caps: &CompletionCaps,
    max_steps: usize,
) -> Result<GeneralTrace> {
    let mut state = state.clone();
    let mut steps: Vec<GeneralStep> = Vec::new();
    loop {
        let stalks = face_stalks(&state, caps)?;
        if all_stalks_smooth(&stalks) {
            return Ok(GeneralTrace { steps, final_state: state });
        }
        let zmax = z_maximal_hs(&stalks)?
            .expect("a singular stalk is on the scheme");
        let target = zmax
            .faces
            .iter()
            .find_map(|face| {
                stalks
                    .iter()
                    .find(|s| &s.face == face && !is_smooth_stalk(&s.stalk))
            })
            .ok_or_else(|| {
                EngineError::InvariantViolation(
                    "the top Hilbert–Samuel stratum contains only smooth points"
                        .into(),
                )
            })?;
        let assembled = assemble_marked_ideal(&target.restricted, &target.stalk.basis)?;
        let mut little = assembled.ideal;
        let mut ray_map = assembled.ray_map;
        let attaining = target.face.clone();
        while let Some(centre) = little.max_order_centre() {
            if steps.len() >= max_steps {
                return Err(EngineError::NonTermination(format!(
                    "no smooth model after {max_steps} blow-ups"
                )));
            }
            let mut global_face: Vec<usize> =
                centre.iter().map(|&id| ray_map[id]).collect();
            global_face.sort_unstable();
            let little_b = if centre.len() == 1 {
                centre[0]
            } else {
                star_subdivision(&little.fan, &centre)?.barycentre_id
            };
            let outcome = blow_up(&state, &global_face)?;
            if little_b == ray_map.len() {
                ray_map.push(outcome.barycentre_id);
            } else if ray_map[little_b] != outcome.barycentre_id {
                return Err(EngineError::InvariantViolation(
                    "replayed subdivision fell out of step with the global fan"
                        .into(),
                ));
            }
            steps.push(GeneralStep {
                attaining_face: attaining.clone(),
                center: global_face.clone(),
                center_rays: global_face
                    .iter()
                    .map(|&id| outcome.state.fan.rays[id].clone())
                    .collect(),
                barycentre_id: outcome.barycentre_id,
            });
            state = outcome.state;
            little = little.transform(&centre)?;
        }
    }
}
