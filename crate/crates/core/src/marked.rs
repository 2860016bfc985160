//! Marked monomial ideals on a small regular fan of their own, and their
//! order reduction by iterated blow-ups. A marked ideal is a monomial ideal
//! together with a mark `e`; its support is the locus where the order is at
//! least `e`, and a transform at a permissible centre divides the ideal by
//! the `e`-th power of the exceptional coordinate.

use crate::binomial::ChartIdeal;
use crate::error::{EngineError, Result};
use crate::fan::{deduplicated_faces, star_subdivision, RegularFan};
use crate::hasse::hasse_monomials;
use crate::matrix::lcm;
use crate::standard_basis::StandardBasis;
use crate::strata::build_local_model;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MarkedChart {
    /// Ray ids of the chart's maximal cone, ascending.
    pub cone: Vec<usize>,
    /// One exponent vector per generator, over `cone` positions. Generator
    /// indices are aligned across charts: entry `i` everywhere describes the
    /// same global generator.
    pub generators: Vec<Vec<u64>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MarkedMonomialIdeal {
    pub fan: RegularFan,
    pub charts: Vec<MarkedChart>,
    pub mark: u64,
}

impl MarkedMonomialIdeal {
    /// A marked ideal on the coordinate orthant: one chart, unit rays.
    pub fn on_orthant(generators: Vec<Vec<u64>>, mark: u64) -> Result<Self> {
        if mark == 0 || generators.is_empty() {
            return Err(EngineError::InvalidInput(
                "marked ideal needs generators and a positive mark".into(),
            ));
        }
        let n = generators[0].len();
        if n == 0 || generators.iter().any(|g| g.len() != n) {
            return Err(EngineError::InvalidInput(
                "generator exponent vectors must share a positive length".into(),
            ));
        }
        let rays: Vec<Vec<i64>> =
            (0..n).map(|i| (0..n).map(|j| i64::from(i == j)).collect()).collect();
        let fan = RegularFan { dim: n, rays, max_cones: vec![(0..n).collect()] };
        let charts = vec![MarkedChart { cone: (0..n).collect(), generators }];
        let ideal = Self { fan, charts, mark };
        ideal.validate()?;
        Ok(ideal)
    }

    pub fn validate(&self) -> Result<()> {
        self.fan.validate()?;
        if self.charts.len() != self.fan.max_cones.len() {
            return Err(EngineError::InvalidInput("one chart per maximal cone".into()));
        }
        let count = self.charts.first().map_or(0, |c| c.generators.len());
        if count == 0 || self.mark == 0 {
            return Err(EngineError::InvalidInput(
                "marked ideal needs generators and a positive mark".into(),
            ));
        }
        for (chart, cone) in self.charts.iter().zip(&self.fan.max_cones) {
            if chart.cone != *cone {
                return Err(EngineError::InvalidInput(
                    "chart cones must follow the fan".into(),
                ));
            }
            if chart.generators.len() != count
                || chart.generators.iter().any(|g| g.len() != cone.len())
            {
                return Err(EngineError::InvalidInput(
                    "generator lists must align across charts".into(),
                ));
            }
        }
        // A shared ray carries the same exponent in every chart.
        for a in 0..self.charts.len() {
            for b in a + 1..self.charts.len() {
                let (ca, cb) = (&self.charts[a], &self.charts[b]);
                for (pa, id) in ca.cone.iter().enumerate() {
                    if let Ok(pb) = cb.cone.binary_search(id) {
                        for i in 0..count {
                            if ca.generators[i][pa] != cb.generators[i][pb] {
                                return Err(EngineError::InvalidInput(format!(
                                    "generator {i} disagrees on shared ray {id}"
                                )));
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// The order of the ideal along a face: the minimum over generators of
    /// the summed exponents on the face's rays. `None` if the id set is not
    /// a face of the fan.
    pub fn order_at(&self, face: &[usize]) -> Option<u64> {
        let chart = self
            .charts
            .iter()
            .find(|c| face.iter().all(|id| c.cone.binary_search(id).is_ok()))?;
        if face.is_empty() {
            return None;
        }
        let positions: Vec<usize> = face
            .iter()
            .map(|id| chart.cone.binary_search(id).unwrap())
            .collect();
        chart
            .generators
            .iter()
            .map(|g| positions.iter().map(|&p| g[p]).sum())
            .min()
    }

    /// Minimal faces along which the order reaches the mark. The order is
    /// monotone in the face, so these generate the whole support.
    pub fn support(&self) -> Vec<Vec<usize>> {
        let hit: Vec<Vec<usize>> = deduplicated_faces(&self.fan)
            .into_iter()
            .filter(|f| self.order_at(f).is_some_and(|o| o >= self.mark))
            .collect();
        hit.iter()
            .filter(|f| {
                !hit.iter().any(|g| {
                    g.len() < f.len() && g.iter().all(|id| f.binary_search(id).is_ok())
                })
            })
            .cloned()
            .collect()
    }

    pub fn is_permissible(&self, face: &[usize]) -> bool {
        self.order_at(face).is_some_and(|o| o >= self.mark)
    }

    /// Blow up a permissible face and divide by the mark-th power of the
    /// exceptional coordinate. A single-ray centre leaves the fan alone and
    /// just divides out the corresponding divisor variable.
    pub fn transform(&self, face: &[usize]) -> Result<Self> {
        let mut face = face.to_vec();
        face.sort_unstable();
        face.dedup();
        if !self.is_permissible(&face) {
            return Err(EngineError::NotPermissible(format!(
                "order along {face:?} is below the mark {}",
                self.mark
            )));
        }
        if face.len() == 1 {
            let ray = face[0];
            let mut charts = self.charts.clone();
            for chart in &mut charts {
                if let Ok(p) = chart.cone.binary_search(&ray) {
                    for g in &mut chart.generators {
                        g[p] = g[p]
                            .checked_sub(self.mark)
                            .expect("permissible centre bounds the mark");
                    }
                }
            }
            return Ok(Self { fan: self.fan.clone(), charts, mark: self.mark });
        }

        let sub = star_subdivision(&self.fan, &face)?;
        let mut charts: Vec<Option<MarkedChart>> = vec![None; sub.fan.max_cones.len()];
        for &(old_idx, new_idx) in &sub.kept {
            charts[new_idx] = Some(self.charts[old_idx].clone());
        }
        for split in &sub.split {
            let parent = &self.charts[split.old_idx];
            let delta_positions: Vec<usize> = face
                .iter()
                .map(|id| parent.cone.binary_search(id).unwrap())
                .collect();
            for child in &split.charts {
                let cone = sub.fan.max_cones[child.new_idx].clone();
                let generators = parent
                    .generators
                    .iter()
                    .map(|g| {
                        let h: u64 = delta_positions.iter().map(|&p| g[p]).sum();
                        let mut slots = g.clone();
                        slots[child.removed_position] = h
                            .checked_sub(self.mark)
                            .expect("permissible centre bounds the mark");
                        cone.iter()
                            .map(|id| {
                                if *id == sub.barycentre_id {
                                    slots[child.removed_position]
                                } else {
                                    slots[parent.cone.binary_search(id).unwrap()]
                                }
                            })
                            .collect()
                    })
                    .collect();
                charts[child.new_idx] = Some(MarkedChart { cone, generators });
            }
        }
        let out = Self {
            fan: sub.fan,
            charts: charts.into_iter().map(|c| c.expect("every cone covered")).collect(),
            mark: self.mark,
        };
        debug_assert!(out.validate().is_ok());
        Ok(out)
    }

    /// The centre the greedy reduction picks next: among minimal support
    /// faces, the one of largest order, ties broken by the smallest id tuple.
    pub fn max_order_centre(&self) -> Option<Vec<usize>> {
        self.support()
            .into_iter()
            .max_by(|a, b| {
                self.order_at(a)
                    .cmp(&self.order_at(b))
                    .then_with(|| b.cmp(a))
            })
    }

    /// Iterate greedy transforms until the support is empty. Returns the
    /// final ideal and the centres in order.
    pub fn order_reduce(&self, max_steps: usize) -> Result<(Self, Vec<Vec<usize>>)> {
        let mut current = self.clone();
        let mut centres = Vec::new();
        while let Some(centre) = current.max_order_centre() {
            if centres.len() >= max_steps {
                return Err(EngineError::NonTermination(format!(
                    "order reduction still has support after {max_steps} steps"
                )));
            }
            current = current.transform(&centre)?;
            centres.push(centre);
        }
        Ok((current, centres))
    }
}

/// The marked ideal of the Samuel stratum at a stalk: every derivative
/// monomial of each nonlinear element, of order below the element's initial
/// degree, scaled to the common mark `lcm(1..=max degree)`. Exponents live
/// on the surviving divisor variables of the local model, and `ray_map`
/// sends each orthant ray to the global ray id it sits over.
pub struct AssembledIdeal {
    pub ideal: MarkedMonomialIdeal,
    pub ray_map: Vec<usize>,
}

pub fn assemble_marked_ideal(
    restricted: &ChartIdeal,
    basis: &StandardBasis,
) -> Result<AssembledIdeal> {
    let model = build_local_model(restricted, basis)?;
    if model.nonlinear.is_empty() {
        return Err(EngineError::InvalidInput(
            "nothing to reduce at a smooth stalk".into(),
        ));
    }
    let d_max = model.nonlinear.iter().map(|f| f.lead_degree()).max().unwrap();
    let mark = (1..=d_max as i128).fold(1, lcm) as u64;
    let mut generators: Vec<Vec<u64>> = Vec::new();
    for f in &model.nonlinear {
        let d = f.lead_degree();
        for m in hasse_monomials(f, d)? {
            let deficiency = d - m.order.iter().sum::<u64>();
            let scale = mark / deficiency;
            generators.push(m.exponent.iter().map(|&x| x * scale).collect());
        }
    }
    generators.sort();
    generators.dedup();
    let minimal: Vec<Vec<u64>> = generators
        .iter()
        .filter(|v| {
            !generators
                .iter()
                .any(|w| w != *v && w.iter().zip(v.iter()).all(|(&a, &b)| a <= b))
        })
        .cloned()
        .collect();
    let ideal = MarkedMonomialIdeal::on_orthant(minimal, mark)?;
    let ray_map: Vec<usize> =
        model.kept_positions.iter().map(|&p| restricted.cone[p]).collect();
    Ok(AssembledIdeal { ideal, ray_map })
}

#[cfg(test)]
mod test {
    use super::*;

    #[test]
    fn cusp_shaped_ideal_reduces_in_one_step() {
        let ideal =
            MarkedMonomialIdeal::on_orthant(vec![vec![0, 2], vec![3, 0]], 2).unwrap();
        assert_eq!(ideal.support(), vec![vec![0, 1]]);
        assert!(ideal.is_permissible(&[0, 1]));
        assert!(!ideal.is_permissible(&[0]));
        let (reduced, centres) = ideal.order_reduce(16).unwrap();
        assert_eq!(centres, vec![vec![0, 1]]);
        assert!(reduced.support().is_empty());
        reduced.validate().unwrap();
    }

    #[test]
    fn exceptional_ray_takes_a_divisor_division() {
        // (x^4, y^4) marked 2: the first blow-up leaves order two on the
        // exceptional ray, cleared by dividing out that divisor.
        let ideal =
            MarkedMonomialIdeal::on_orthant(vec![vec![4, 0], vec![0, 4]], 2).unwrap();
        let (reduced, centres) = ideal.order_reduce(16).unwrap();
        assert_eq!(centres, vec![vec![0, 1], vec![2]]);
        assert!(reduced.support().is_empty());
        // The single-ray step kept the fan fixed.
        assert_eq!(reduced.fan.rays.len(), 3);
    }

    #[test]
    fn transform_needs_a_permissible_centre() {
        let ideal =
            MarkedMonomialIdeal::on_orthant(vec![vec![4, 0], vec![0, 4]], 2).unwrap();
        assert!(matches!(
            ideal.transform(&[0]),
            Err(EngineError::NotPermissible(_))
        ));
    }

    #[test]
    fn orders_follow_monotone_faces() {
        let ideal = MarkedMonomialIdeal::on_orthant(
            vec![vec![2, 0, 1], vec![0, 3, 0]],
            2,
        )
        .unwrap();
        assert_eq!(ideal.order_at(&[0]), Some(0));
        assert_eq!(ideal.order_at(&[0, 1]), Some(2));
        assert_eq!(ideal.order_at(&[0, 1, 2]), Some(3));
        assert_eq!(ideal.support(), vec![vec![0, 1]]);
    }

    #[test]
    fn misaligned_charts_fail_validation() {
        let mut ideal =
            MarkedMonomialIdeal::on_orthant(vec![vec![1, 1]], 1).unwrap();
        let transformed = ideal.transform(&[0, 1]).unwrap();
        ideal = transformed;
        // Bump the exponent on the shared exceptional ray in one chart only.
        let p = ideal.charts[0].cone.binary_search(&2).unwrap();
        ideal.charts[0].generators[0][p] += 1;
        assert!(ideal.validate().is_err());
    }

    #[test]
    fn assembled_curve_ideal_blows_up_the_origin_once() {
        use crate::binomial::EmbeddingState;
        use crate::hilbert::hs_at_distinguished;
        use crate::standard_basis::CompletionCaps;

        let rays = vec![vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]];
        let fan = RegularFan { dim: 3, rays, max_cones: vec![vec![0, 1, 2]] };
        let state = EmbeddingState::from_generators(
            fan,
            vec![vec![
                (vec![1, 0, 1], vec![0, 2, 0], vec![]),
                (vec![0, 1, 1], vec![3, 0, 0], vec![]),
                (vec![0, 0, 2], vec![2, 1, 0], vec![]),
            ]],
        )
        .unwrap();
        let chart = &state.charts[0];
        let stalk = hs_at_distinguished(chart, &CompletionCaps::default()).unwrap();
        let assembled = assemble_marked_ideal(chart, &stalk.basis).unwrap();
        assert_eq!(assembled.ray_map, vec![0, 1, 2]);
        assert_eq!(assembled.ideal.mark, 2);
        assert_eq!(
            assembled.ideal.charts[0].generators,
            vec![
                vec![0, 0, 2],
                vec![0, 1, 1],
                vec![0, 2, 0],
                vec![1, 0, 1],
                vec![2, 0, 0],
            ]
        );
        let (_, centres) = assembled.ideal.order_reduce(16).unwrap();
        assert_eq!(centres, vec![vec![0, 1, 2]]);
    }
}
