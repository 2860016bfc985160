//! JSON documents for problems and resolution traces.
//!
//! Field order is fixed by declaration order, every number is an exact
//! integer, and `canonical_json` output parses back to an equal document.
//! Validation reports point at offending fields with JSON-pointer paths.

use serde::{Deserialize, Serialize};
use toric_res_core::binomial::normalize;
use toric_res_core::{
    blow_up, EmbeddingState, EngineError, InvariantTriple, RegularFan, Result,
};

use crate::fiber::FiberCheckDocument;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemDocument {
    pub lattice_rank: usize,
    pub rays: Vec<Vec<i64>>,
    pub maximal_cones: Vec<Vec<usize>>,
    pub charts: Vec<ChartDocument>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChartDocument {
    pub binomials: Vec<BinomialDocument>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub torus_relations: Vec<Vec<i64>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BinomialDocument {
    pub alpha: Vec<u64>,
    pub beta: Vec<u64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub gamma: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    /// JSON pointer into the problem document.
    pub path: String,
    pub message: String,
}

fn violation(path: impl Into<String>, message: impl std::fmt::Display) -> Violation {
    Violation { path: path.into(), message: message.to_string() }
}

impl ProblemDocument {
    #[allow(dead_code)] // exercised by the round-trip tests
    pub fn canonical_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("document serializes");
        s.push('\n');
        s
    }

    /// Structural checks that do not need the engine: dimensions, index
    /// ranges, cone ordering, generator shapes, normal-form admissibility.
    pub fn shape_violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let n = self.lattice_rank;
        if n == 0 {
            out.push(violation("/lattice_rank", "lattice rank must be positive"));
        }
        for (i, ray) in self.rays.iter().enumerate() {
            if ray.len() != n {
                out.push(violation(
                    format!("/rays/{i}"),
                    format!("ray has {} entries, expected {}", ray.len(), n),
                ));
            }
        }
        for (i, cone) in self.maximal_cones.iter().enumerate() {
            let path = format!("/maximal_cones/{i}");
            if cone.is_empty() {
                out.push(violation(&path, "maximal cone lists no rays"));
                continue;
            }
            if cone.len() > n {
                out.push(violation(
                    &path,
                    format!("cone has {} rays in a rank-{} lattice", cone.len(), n),
                ));
            }
            if cone.windows(2).any(|w| w[0] >= w[1]) {
                out.push(violation(&path, "ray ids must be strictly increasing"));
            }
            if let Some(&bad) = cone.iter().find(|&&id| id >= self.rays.len()) {
                out.push(violation(&path, format!("ray id {bad} out of range")));
            }
        }
        if self.charts.len() != self.maximal_cones.len() {
            out.push(violation(
                "/charts",
                format!(
                    "{} charts for {} maximal cones",
                    self.charts.len(),
                    self.maximal_cones.len()
                ),
            ));
            return out;
        }
        for (c, (chart, cone)) in self.charts.iter().zip(&self.maximal_cones).enumerate() {
            let r = cone.len();
            let q = n.saturating_sub(r);
            for (b, gen) in chart.binomials.iter().enumerate() {
                let base = format!("/charts/{c}/binomials/{b}");
                if gen.alpha.len() != r {
                    out.push(violation(
                        format!("{base}/alpha"),
                        format!("{} entries, expected {} (cone size)", gen.alpha.len(), r),
                    ));
                }
                if gen.beta.len() != r {
                    out.push(violation(
                        format!("{base}/beta"),
                        format!("{} entries, expected {} (cone size)", gen.beta.len(), r),
                    ));
                }
                if gen.gamma.len() != q {
                    out.push(violation(
                        format!("{base}/gamma"),
                        format!("{} entries, expected {} (torus rank)", gen.gamma.len(), q),
                    ));
                }
                if gen.alpha.len() == r && gen.beta.len() == r && gen.gamma.len() == q {
                    if let Err(e) = normalize(&gen.alpha, &gen.beta, &gen.gamma) {
                        out.push(violation(base, e));
                    }
                }
            }
            for (t, row) in chart.torus_relations.iter().enumerate() {
                if row.len() != q {
                    out.push(violation(
                        format!("/charts/{c}/torus_relations/{t}"),
                        format!("{} entries, expected {} (torus rank)", row.len(), q),
                    ));
                }
            }
        }
        out
    }

    /// Build the engine state, or report every violation found.
    pub fn to_state(&self) -> std::result::Result<EmbeddingState, Vec<Violation>> {
        let shape = self.shape_violations();
        if !shape.is_empty() {
            return Err(shape);
        }
        let fan = RegularFan {
            dim: self.lattice_rank,
            rays: self.rays.clone(),
            max_cones: self.maximal_cones.clone(),
        };
        if let Err(e) = fan.validate() {
            return Err(vec![violation("/rays", e)]);
        }
        let generators = self
            .charts
            .iter()
            .map(|chart| {
                let r = chart.binomials.first().map_or(0, |g| g.alpha.len());
                chart
                    .binomials
                    .iter()
                    .map(|g| (g.alpha.clone(), g.beta.clone(), g.gamma.clone()))
                    .chain(
                        chart
                            .torus_relations
                            .iter()
                            .map(move |row| (vec![0; r], vec![0; r], row.clone())),
                    )
                    .collect()
            })
            .collect();
        let state = EmbeddingState::from_generators(fan, generators)
            .map_err(|e| vec![violation("", e)])?;
        state.validate().map_err(|e| vec![violation("", e)])?;
        state.check_gluing().map_err(|e| vec![violation("", e)])?;
        Ok(state)
    }

    pub fn from_state(state: &EmbeddingState) -> Self {
        ProblemDocument {
            lattice_rank: state.fan.dim,
            rays: state.fan.rays.clone(),
            maximal_cones: state.fan.max_cones.clone(),
            charts: state
                .charts
                .iter()
                .map(|chart| ChartDocument {
                    binomials: chart
                        .binomials
                        .iter()
                        .map(|g| BinomialDocument {
                            alpha: g.alpha.clone(),
                            beta: g.beta.clone(),
                            gamma: g.gamma.clone(),
                        })
                        .collect(),
                    torus_relations: chart.torus.rows.clone(),
                })
                .collect(),
            mode: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InvariantDocument {
    pub gamma: u64,
    pub omega: u64,
    pub attaining: usize,
}

impl From<InvariantTriple> for InvariantDocument {
    fn from(t: InvariantTriple) -> Self {
        InvariantDocument { gamma: t.gamma, omega: t.omega, attaining: t.attaining }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransformDocument {
    pub parent_chart: usize,
    pub child_chart: usize,
    pub removed_ray: usize,
    pub exceptional_position: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepDocument {
    /// Global ray ids of the centre at the time of the step.
    pub center_ray_ids: Vec<usize>,
    pub center_rays: Vec<Vec<i64>>,
    pub barycentre_id: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub invariant_before: Option<InvariantDocument>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub invariant_after: Option<InvariantDocument>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub attaining_face: Option<Vec<usize>>,
    pub chart_transforms: Vec<TransformDocument>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceDocument {
    pub mode: String,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub experimental: bool,
    pub steps: Vec<StepDocument>,
    pub final_problem: ProblemDocument,
    pub smooth_charts: Vec<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub final_invariant: Option<InvariantDocument>,
    /// Finite-fiber cross-checks of the final charts over small primes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fiber_reports: Option<FiberCheckDocument>,
}

impl TraceDocument {
    pub fn canonical_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("document serializes");
        s.push('\n');
        s
    }
}

/// One step's driver metadata, mode-agnostic.
pub struct ReplayStep {
    pub center: Vec<usize>,
    pub center_rays: Vec<Vec<i64>>,
    pub barycentre_id: usize,
    pub invariant_before: Option<InvariantTriple>,
    pub attaining_face: Option<Vec<usize>>,
}

/// Re-run the recorded centres on the initial state to recover per-chart
/// transform records, and require the replay to land exactly on the driver's
/// final state.
pub fn build_trace(
    mode: &str,
    experimental: bool,
    initial: &EmbeddingState,
    steps: Vec<ReplayStep>,
    final_state: &EmbeddingState,
    final_invariant: Option<InvariantTriple>,
    smooth_charts: Vec<bool>,
    fiber_reports: Option<FiberCheckDocument>,
) -> Result<TraceDocument> {
    let mut current = initial.clone();
    let mut docs = Vec::new();
    for step in steps {
        let outcome = blow_up(&current, &step.center)?;
        docs.push(StepDocument {
            center_ray_ids: step.center,
            center_rays: step.center_rays,
            barycentre_id: step.barycentre_id,
            invariant_before: step.invariant_before.map(Into::into),
            invariant_after: None,
            attaining_face: step.attaining_face,
            chart_transforms: outcome
                .records
                .iter()
                .map(|rec| TransformDocument {
                    parent_chart: rec.old_chart,
                    child_chart: rec.new_chart,
                    removed_ray: rec.removed_ray,
                    exceptional_position: rec.exceptional_position,
                })
                .collect(),
        });
        current = outcome.state;
    }
    for k in 0..docs.len() {
        docs[k].invariant_after = if k + 1 < docs.len() {
            docs[k + 1].invariant_before.clone()
        } else {
            final_invariant.map(Into::into)
        };
    }
    if ProblemDocument::from_state(&current) != ProblemDocument::from_state(final_state) {
        return Err(EngineError::InvariantViolation(
            "trace replay does not reproduce the final state".into(),
        ));
    }
    Ok(TraceDocument {
        mode: mode.into(),
        experimental,
        steps: docs,
        final_problem: ProblemDocument::from_state(final_state),
        smooth_charts,
        final_invariant: final_invariant.map(Into::into),
        fiber_reports,
    })
}

#[cfg(test)]
mod test {
    use super::*;

    fn e1_doc() -> ProblemDocument {
        ProblemDocument {
            lattice_rank: 3,
            rays: vec![vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]],
            maximal_cones: vec![vec![0, 1, 2]],
            charts: vec![ChartDocument {
                binomials: vec![BinomialDocument {
                    alpha: vec![0, 1, 1],
                    beta: vec![2, 0, 0],
                    gamma: vec![],
                }],
                torus_relations: vec![],
            }],
            mode: None,
        }
    }

    #[test]
    fn round_trip_is_byte_identical() {
        let doc = e1_doc();
        let text = doc.canonical_json();
        let back: ProblemDocument = serde_json::from_str(&text).unwrap();
        assert_eq!(back, doc);
        assert_eq!(back.canonical_json(), text);
        // Through the engine and back.
        let state = doc.to_state().unwrap();
        let again = ProblemDocument::from_state(&state);
        assert_eq!(again.canonical_json(), text);
    }

    #[test]
    fn empty_gamma_and_torus_rows_are_omitted() {
        let text = e1_doc().canonical_json();
        assert!(!text.contains("gamma"));
        assert!(!text.contains("torus_relations"));
        assert!(!text.contains("mode"));
    }

    #[test]
    fn violations_carry_json_pointers() {
        let mut doc = e1_doc();
        doc.charts[0].binomials[0].beta = vec![1, 1, 0]; // shares slot 0 with alpha
        let errs = doc.to_state().unwrap_err();
        assert_eq!(errs.len(), 1);
        assert_eq!(errs[0].path, "/charts/0/binomials/0");
        let mut doc = e1_doc();
        doc.charts[0].binomials[0].alpha = vec![2, 0];
        let errs = doc.to_state().unwrap_err();
        assert!(errs.iter().any(|v| v.path == "/charts/0/binomials/0/alpha"));
        let mut doc = e1_doc();
        doc.maximal_cones[0] = vec![0, 2, 1];
        let errs = doc.to_state().unwrap_err();
        assert!(errs.iter().any(|v| v.path == "/maximal_cones/0"));
    }

    #[test]
    fn torus_relations_survive_the_round_trip() {
        let doc = ProblemDocument {
            lattice_rank: 3,
            rays: vec![vec![1, 0, 0], vec![0, 1, 0]],
            maximal_cones: vec![vec![0, 1]],
            charts: vec![ChartDocument {
                binomials: vec![BinomialDocument {
                    alpha: vec![1, 0],
                    beta: vec![0, 2],
                    gamma: vec![1],
                }],
                torus_relations: vec![vec![1]],
            }],
            mode: None,
        };
        let state = doc.to_state().unwrap();
        let back = ProblemDocument::from_state(&state);
        assert_eq!(back.charts[0].torus_relations, vec![vec![1]]);
        assert_eq!(back.canonical_json(), doc.canonical_json());
    }
}
