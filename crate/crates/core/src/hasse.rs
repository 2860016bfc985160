//! Divided-power (Hasse) derivative monomials of binomial generators, the
//! multiplicity invariants they induce on the faces of the fan, and the
//! hypersurface resolution driver.
//!
//! For a binomial `x^alpha - x^beta y^gamma` with disjoint supports, every
//! nonzero derivative of order `delta != 0` touches exactly one side: it is
//! `C(alpha, delta) x^(alpha-delta)` when `delta <= alpha`, the mirrored
//! expression when `delta <= beta`, and zero otherwise. The coefficient is a
//! product of binomial coefficients and can vanish modulo a prime, which is
//! why each monomial carries its exact coefficient.

use crate::binomial::{ChartBinomial, EmbeddingState};
use crate::blowup::blow_up;
use crate::error::{EngineError, Result};
use crate::fan::deduplicated_faces;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    /// The `alpha` (lead) side.
    Lead,
    /// The `beta` side; its monomial carries the `y^gamma` factor.
    Trail,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HasseMonomial {
    pub side: Side,
    /// Derivative order `delta`.
    pub order: Vec<u64>,
    /// Remaining exponent on the divisor variables, `side exponent - delta`.
    pub exponent: Vec<u64>,
    /// Exact coefficient `prod_i C(exp_i, delta_i)`.
    pub coefficient: u128,
}

pub fn binomial_coefficient(n: u64, k: u64) -> Result<u128> {
    if k > n {
        return Ok(0);
    }
    let k = k.min(n - k);
    let mut c: u128 = 1;
    for i in 1..=k {
        c = c
            .checked_mul(u128::from(n - k + i))
            .ok_or_else(|| EngineError::InvalidInput("binomial coefficient overflow".into()))?;
        c /= u128::from(i);
    }
    Ok(c)
}

/// All vectors `0 <= delta <= bounds` with `|delta| <= total_max`, in
/// lexicographic order.
fn bounded_orders(bounds: &[u64], total_max: u64) -> Vec<Vec<u64>> {
    let mut out = Vec::new();
    let mut current = vec![0u64; bounds.len()];
    fn rec(
        bounds: &[u64],
        total_max: u64,
        pos: usize,
        used: u64,
        current: &mut Vec<u64>,
        out: &mut Vec<Vec<u64>>,
    ) {
        if pos == bounds.len() {
            out.push(current.clone());
            return;
        }
        let cap = bounds[pos].min(total_max - used);
        for v in 0..=cap {
            current[pos] = v;
            rec(bounds, total_max, pos + 1, used + v, current, out);
        }
        current[pos] = 0;
    }
    rec(bounds, total_max, 0, 0, &mut current, &mut out);
    out
}

/// Derivative monomials of one side for all orders `0 <= |delta| <= d - 1`.
fn side_monomials(exp: &[u64], d: u64, side: Side) -> Result<Vec<HasseMonomial>> {
    if d == 0 {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    for delta in bounded_orders(exp, d - 1) {
        let mut coeff: u128 = 1;
        for (&e, &o) in exp.iter().zip(&delta) {
            coeff = coeff
                .checked_mul(binomial_coefficient(e, o)?)
                .ok_or_else(|| {
                    EngineError::InvalidInput("binomial coefficient overflow".into())
                })?;
        }
        let exponent: Vec<u64> = exp.iter().zip(&delta).map(|(&e, &o)| e - o).collect();
        out.push(HasseMonomial { side, order: delta, exponent, coefficient: coeff });
    }
    Ok(out)
}

/// The derivative monomial system of `f` for orders below `d`: every nonzero
/// derivative of order `0 < |delta| < d` is one of these monomials times its
/// coefficient (lead side) or times the unit `y^gamma` (trail side); the
/// order-zero entries are the two sides of `f` itself.
pub fn hasse_monomials(f: &ChartBinomial, d: u64) -> Result<Vec<HasseMonomial>> {
    let mut out = side_monomials(&f.alpha, d, Side::Lead)?;
    out.extend(side_monomials(&f.beta, d, Side::Trail)?);
    Ok(out)
}

/// Monomials whose coefficient survives reduction modulo `p`.
pub fn hasse_monomials_mod_p(f: &ChartBinomial, d: u64, p: u64) -> Result<Vec<HasseMonomial>> {
    Ok(hasse_monomials(f, d)?
        .into_iter()
        .filter(|m| m.coefficient % u128::from(p) != 0)
        .collect())
}

/// A face (given by chart slot positions) is admissible for `f` at order `d`
/// when the lead support lies inside the face and the trail side vanishes to
/// order at least `d` along it.
pub fn is_admissible(f: &ChartBinomial, positions: &[usize], d: u64) -> bool {
    let supp_in = f
        .alpha
        .iter()
        .enumerate()
        .all(|(i, &a)| a == 0 || positions.contains(&i));
    let beta_face: u64 = positions.iter().map(|&p| f.beta[p]).sum();
    supp_in && beta_face >= d
}

/// An admissible face is minimal when dropping any of its trail-support
/// slots destroys admissibility: `beta_face - beta_i < |alpha|` for each such
/// slot `i`.
pub fn is_minimal_center(f: &ChartBinomial, positions: &[usize]) -> bool {
    let alpha_deg = f.lead_degree();
    let beta_face: u64 = positions.iter().map(|&p| f.beta[p]).sum();
    positions
        .iter()
        .filter(|&&p| f.beta[p] > 0)
        .all(|&p| beta_face - f.beta[p] < alpha_deg)
}

/// Multiplicity of the (single) chart generator along a face, given by slot
/// positions: the smaller of the two side degrees over the face.
pub fn face_multiplicity(f: &ChartBinomial, positions: &[usize]) -> u64 {
    let a: u64 = positions.iter().map(|&p| f.alpha[p]).sum();
    let b: u64 = positions.iter().map(|&p| f.beta[p]).sum();
    a.min(b)
}

fn face_degrees(f: &ChartBinomial, positions: &[usize]) -> (u64, u64) {
    let a: u64 = positions.iter().map(|&p| f.alpha[p]).sum();
    let b: u64 = positions.iter().map(|&p| f.beta[p]).sum();
    (a.min(b), a.max(b))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct InvariantTriple {
    /// Largest face multiplicity in the fan.
    pub gamma: u64,
    /// Largest secondary degree among minimal attaining faces.
    pub omega: u64,
    /// Number of minimal faces attaining both.
    pub attaining: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GlobalInvariant {
    pub triple: InvariantTriple,
    /// Lexicographically smallest attaining face; `None` once `gamma <= 1`.
    pub center: Option<Vec<usize>>,
}

/// Compute the fan-wide invariant of a hypersurface state (exactly one
/// generator per chart). Faces are deduplicated across charts; the gluing
/// conditions make the per-face data chart-independent.
pub fn global_invariant(state: &EmbeddingState) -> Result<GlobalInvariant> {
    for (i, chart) in state.charts.iter().enumerate() {
        if chart.binomials.len() != 1 {
            return Err(EngineError::InvalidInput(format!(
                "chart {i} has {} generators; the hypersurface driver needs exactly one",
                chart.binomials.len()
            )));
        }
    }
    let faces = deduplicated_faces(&state.fan);
    let mut per_face: Vec<(Vec<usize>, u64, u64)> = Vec::new();
    for face in faces {
        let (ci, chart) = state
            .charts
            .iter()
            .enumerate()
            .find(|(_, c)| face.iter().all(|id| c.cone.binary_search(id).is_ok()))
            .expect("face enumeration stays inside maximal cones");
        let _ = ci;
        let positions: Vec<usize> = face
            .iter()
            .map(|id| chart.cone.binary_search(id).unwrap())
            .collect();
        let (g, o) = face_degrees(&chart.binomials[0], &positions);
        per_face.push((face, g, o));
    }
    let gamma = per_face.iter().map(|&(_, g, _)| g).max().unwrap_or(0);
    let attaining_gamma: Vec<&(Vec<usize>, u64, u64)> =
        per_face.iter().filter(|&&(_, g, _)| g == gamma).collect();
    // Minimal by inclusion among the attaining faces.
    let minimal: Vec<&(Vec<usize>, u64, u64)> = attaining_gamma
        .iter()
        .filter(|(face, _, _)| {
            !attaining_gamma.iter().any(|(other, _, _)| {
                other.len() < face.len() && other.iter().all(|id| face.contains(id))
            })
        })
        .copied()
        .collect();
    let omega = minimal.iter().map(|&&(_, _, o)| o).max().unwrap_or(0);
    let attaining: Vec<&Vec<usize>> = minimal
        .iter()
        .filter(|&&&(_, _, o)| o == omega)
        .map(|&&(ref f, _, _)| f)
        .collect();
    let triple = InvariantTriple { gamma, omega, attaining: attaining.len() };
    let center = if gamma >= 2 {
        Some(attaining.iter().min().map(|f| (*f).clone()).unwrap())
    } else {
        None
    };
    Ok(GlobalInvariant { triple, center })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResolutionStep {
    /// Centre face as global ray ids at the time of the step.
    pub center: Vec<usize>,
    /// Ray vectors of the centre (stable under later re-indexing).
    pub center_rays: Vec<Vec<i64>>,
    pub barycentre_id: usize,
    /// Invariant before the step; absent for steps driven by other engines.
    pub triple: Option<InvariantTriple>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResolutionTrace {
    pub steps: Vec<ResolutionStep>,
    pub final_state: EmbeddingState,
    pub final_triple: InvariantTriple,
}

/// Resolve a hypersurface state: repeatedly blow up the lexicographically
/// smallest minimal face of maximal multiplicity until every face has
/// multiplicity at most one. The invariant triple must strictly decrease at
/// every step; a violation or exceeding `max_steps` is an error.
pub fn resolve_hypersurface(
    state: &EmbeddingState,
    max_steps: usize,
) -> Result<ResolutionTrace> {
    let mut current = state.clone();
    let mut steps = Vec::new();
    let mut previous: Option<InvariantTriple> = None;
    loop {
        let inv = global_invariant(&current)?;
        if let Some(prev) = previous {
            if inv.triple >= prev {
                return Err(EngineError::InvariantViolation(format!(
                    "{:?} does not decrease below {:?}",
                    inv.triple, prev
                )));
            }
        }
        let Some(center) = inv.center else {
            return Ok(ResolutionTrace {
                steps,
                final_state: current,
                final_triple: inv.triple,
            });
        };
        if steps.len() >= max_steps {
            return Err(EngineError::NonTermination(format!(
                "no resolution within {max_steps} blow-ups"
            )));
        }
        previous = Some(inv.triple);
        let center_rays: Vec<Vec<i64>> =
            center.iter().map(|&id| current.fan.rays[id].clone()).collect();
        let out = blow_up(&current, &center)?;
        steps.push(ResolutionStep {
            center,
            center_rays,
            barycentre_id: out.barycentre_id,
            triple: Some(inv.triple),
        });
        current = out.state;
    }
}

/// Inclusion-minimal admissible faces of a chart for its single generator:
/// the orbit closures these faces cut out are exactly the components of the
/// derivative-monomial locus. Faces are returned as sorted slot positions.
pub fn hasse_locus_components(f: &ChartBinomial) -> Result<Vec<Vec<usize>>> {
    let d = f.lead_degree();
    if d < 2 {
        return Err(EngineError::InvalidInput(format!(
            "locus components need multiplicity at least two, got {d}"
        )));
    }
    let lead_supp: Vec<usize> =
        (0..f.alpha.len()).filter(|&i| f.alpha[i] > 0).collect();
    let trail_supp: Vec<usize> =
        (0..f.beta.len()).filter(|&i| f.beta[i] > 0).collect();
    let mut out = Vec::new();
    for mask in 1u64..(1 << trail_supp.len()) {
        let mut face = lead_supp.clone();
        for (k, &pos) in trail_supp.iter().enumerate() {
            if mask & (1 << k) != 0 {
                face.push(pos);
            }
        }
        face.sort_unstable();
        if is_admissible(f, &face, d) && is_minimal_center(f, &face) {
            out.push(face);
        }
    }
    out.sort();
    Ok(out)
}

/// Replace a derivative order by one whose coefficient is `1`: each slot is
/// pushed to the full side exponent or to zero, so every variable surviving
/// in the witness monomial also survives in the original one.
pub fn derivative_order_witness(beta: &[u64], delta: &[u64]) -> Result<Vec<u64>> {
    if beta.len() != delta.len() || delta.iter().zip(beta).any(|(d, b)| d > b) {
        return Err(EngineError::InvalidOrder(format!(
            "order {delta:?} does not divide the side {beta:?}"
        )));
    }
    Ok(beta
        .iter()
        .zip(delta)
        .map(|(&b, &d)| if d == b { b } else { 0 })
        .collect())
}

/// Drop duplicate and componentwise-dominated exponents from a monomial
/// generating set.
fn reduce_monomials(mut gens: Vec<Vec<u64>>) -> Vec<Vec<u64>> {
    gens.sort();
    gens.dedup();
    gens.iter()
        .filter(|g| {
            !gens.iter().any(|h| {
                h != *g && h.iter().zip(g.iter()).all(|(a, b)| a <= b)
            })
        })
        .cloned()
        .collect()
}

/// Per-chart monomial generators of the glued derivative ideal: `None` is
/// the unit ideal on charts whose generator multiplicity is below the
/// fan-wide maximum, otherwise the reduced derivative monomials of order
/// below that maximum. Restrictions to shared faces are checked to agree.
pub fn glue_hasse_ideal(
    state: &EmbeddingState,
) -> Result<Vec<Option<Vec<Vec<u64>>>>> {
    let inv = global_invariant(state)?;
    let gamma = inv.triple.gamma;
    if gamma < 2 {
        return Err(EngineError::InvalidInput(format!(
            "the derivative ideal needs multiplicity at least two, got {gamma}"
        )));
    }
    let mut ideals: Vec<Option<Vec<Vec<u64>>>> = Vec::new();
    for chart in &state.charts {
        let f = &chart.binomials[0];
        let everything: Vec<usize> = (0..chart.r()).collect();
        if face_multiplicity(f, &everything) < gamma {
            ideals.push(None);
            continue;
        }
        let monos = hasse_monomials(f, gamma)?;
        ideals.push(Some(reduce_monomials(
            monos.into_iter().map(|m| m.exponent).collect(),
        )));
    }
    // On every chart overlap the two restrictions must generate the same
    // monomial ideal; variables outside the shared face become invertible,
    // so restriction just drops their exponents.
    let restrict = |chart: &crate::binomial::ChartIdeal,
                    gens: &Option<Vec<Vec<u64>>>,
                    shared: &[usize]|
     -> Vec<Vec<u64>> {
        let positions: Vec<usize> = shared
            .iter()
            .map(|id| chart.cone.binary_search(id).unwrap())
            .collect();
        let raw = match gens {
            None => vec![vec![0; positions.len()]],
            Some(gs) => gs
                .iter()
                .map(|g| positions.iter().map(|&p| g[p]).collect())
                .collect(),
        };
        reduce_monomials(raw)
    };
    for i in 0..state.charts.len() {
        for j in i + 1..state.charts.len() {
            let a = &state.charts[i];
            let b = &state.charts[j];
            let shared: Vec<usize> = a
                .cone
                .iter()
                .filter(|id| b.cone.binary_search(id).is_ok())
                .copied()
                .collect();
            let ra = restrict(a, &ideals[i], &shared);
            let rb = restrict(b, &ideals[j], &shared);
            if ra != rb {
                return Err(EngineError::InvariantViolation(format!(
                    "derivative ideals of charts {i} and {j} disagree on \
                     their shared face: {ra:?} vs {rb:?}"
                )));
            }
        }
    }
    Ok(ideals)
}
