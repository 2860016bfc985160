//! Standard bases of chart ideals at a distinguished point, under the local
//! exponent order `(total degree, entries) lexicographic` on the divisor
//! variables (smaller key = initial side).
//!
//! Completion is head-only Buchberger on binomials: an S-pair or reduction
//! step always yields two monomial sides again; the shared divisor-variable
//! factor is divided out (saturation), the torus exponent is reduced to its
//! canonical coset representative, and a step whose sides cancel entirely
//! surrenders a torus relation, which enriches the chart's relation lattice.
//! Tail rewriting is restricted to linear pivots, whose substitution into
//! other generators terminates; unrestricted tail reduction does not
//! terminate in a power-series order.

use crate::binomial::{ChartBinomial, ChartIdeal, TorusLattice};
use crate::error::{EngineError, Result};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, VecDeque};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CompletionCaps {
    pub max_pairs: usize,
    pub max_basis: usize,
    pub max_reduction_steps: usize,
    pub max_rounds: usize,
}

impl Default for CompletionCaps {
    fn default() -> Self {
        CompletionCaps {
            max_pairs: 4096,
            max_basis: 512,
            max_reduction_steps: 512,
            max_rounds: 64,
        }
    }
}

/// Completed and classified basis of a chart ideal at its distinguished
/// point. A nonempty `unit_like` list means the ideal contains a local unit:
/// the point is not on the scheme and the whole basis collapses to it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StandardBasis {
    /// Elements with initial degree at least two.
    pub nonlinear: Vec<ChartBinomial>,
    /// Elements `x_i - x^beta y^gamma`; the pivot `x_i` occurs in no other
    /// element of the basis.
    pub linear: Vec<ChartBinomial>,
    /// Elements `1 - x^beta y^gamma` (initial exponent zero).
    pub unit_like: Vec<ChartBinomial>,
    /// The chart's torus relation lattice, including relations discovered
    /// during completion.
    pub torus: TorusLattice,
}

impl StandardBasis {
    pub fn is_collapsed(&self) -> bool {
        !self.unit_like.is_empty()
    }

    /// Initial exponents of the nonlinear part: the staircase generators.
    pub fn staircase_vertices(&self) -> Vec<Vec<u64>> {
        if self.is_collapsed() {
            // A unit in the ideal makes every exponent initial.
            return vec![vec![0; self.unit_like[0].alpha.len()]];
        }
        self.nonlinear.iter().map(|b| b.alpha.clone()).collect()
    }
}

enum Processed {
    Zero,
    Relation(Vec<i64>),
    Keep(ChartBinomial),
}

/// Saturate shared divisor factors, orient, and reduce the torus exponent.
fn process_raw(
    mut u: Vec<u64>,
    mut v: Vec<u64>,
    c: Vec<i64>,
    torus: &TorusLattice,
) -> Processed {
    for i in 0..u.len() {
        let w = u[i].min(v[i]);
        u[i] -= w;
        v[i] -= w;
    }
    let (mut a, mut b, mut g) = (u, v, c);
    if crate::binomial::degree_key(&b) < crate::binomial::degree_key(&a) {
        std::mem::swap(&mut a, &mut b);
        for x in g.iter_mut() {
            *x = -*x;
        }
    }
    if a == b {
        // Both sides vanished: pure torus content.
        let g = torus.reduce(&g);
        if g.iter().all(|&x| x == 0) {
            return Processed::Zero;
        }
        return Processed::Relation(g);
    }
    Processed::Keep(ChartBinomial { alpha: a, beta: b, gamma: torus.reduce(&g) })
}

fn divides(a: &[u64], b: &[u64]) -> bool {
    a.iter().zip(b).all(|(&x, &y)| x <= y)
}

/// Head-reduce a raw triple against the basis until its initial side is not
/// divisible by any basis head. Discovered relations go straight into the
/// lattice (the caller re-canonicalizes stored exponents afterwards).
fn reduce_fully(
    u: Vec<u64>,
    v: Vec<u64>,
    c: Vec<i64>,
    basis: &[ChartBinomial],
    torus: &mut TorusLattice,
    caps: &CompletionCaps,
) -> Result<Option<ChartBinomial>> {
    let mut current = (u, v, c);
    for _ in 0..caps.max_reduction_steps {
        match process_raw(current.0, current.1, current.2, torus) {
            Processed::Zero => return Ok(None),
            Processed::Relation(g) => {
                torus.insert(&g);
                return Ok(None);
            }
            Processed::Keep(b) => {
                let reducer = basis.iter().find(|f| divides(&f.alpha, &b.alpha));
                match reducer {
                    None => return Ok(Some(b)),
                    Some(f) => {
                        let nu: Vec<u64> = b
                            .alpha
                            .iter()
                            .zip(&f.alpha)
                            .zip(&f.beta)
                            .map(|((&x, &a), &fb)| x - a + fb)
                            .collect();
                        let nc: Vec<i64> =
                            b.gamma.iter().zip(&f.gamma).map(|(&x, &y)| x - y).collect();
                        current = (nu, b.beta, nc);
                    }
                }
            }
        }
    }
    Err(EngineError::NonTermination(
        "head reduction exceeded its step bound".into(),
    ))
}

fn s_pair_raw(
    f: &ChartBinomial,
    g: &ChartBinomial,
) -> (Vec<u64>, Vec<u64>, Vec<i64>) {
    let m: Vec<u64> = f.alpha.iter().zip(&g.alpha).map(|(&a, &b)| a.max(b)).collect();
    let u: Vec<u64> = m.iter().zip(&f.alpha).zip(&f.beta).map(|((&m, &a), &b)| m - a + b).collect();
    let v: Vec<u64> = m.iter().zip(&g.alpha).zip(&g.beta).map(|((&m, &a), &b)| m - a + b).collect();
    let c: Vec<i64> = g.gamma.iter().zip(&f.gamma).map(|(&gg, &fg)| gg - fg).collect();
    (u, v, c)
}

fn canonicalize(basis: &mut Vec<ChartBinomial>, torus: &TorusLattice) {
    for b in basis.iter_mut() {
        b.gamma = torus.reduce(&b.gamma);
    }
    basis.sort();
    basis.dedup();
}

/// Compute the standard basis of a chart ideal at its distinguished point:
/// Buchberger completion with head-only reduction, saturation, torus
/// relation discovery, and linear-pivot elimination, followed by
/// interreduction and classification. Fails with `TorsionError` when the
/// accumulated torus lattice has a non-free quotient and with
/// `NonTermination` when a safety cap is exceeded.
pub fn standard_basis(chart: &ChartIdeal, caps: &CompletionCaps) -> Result<StandardBasis> {
    let mut torus = chart.torus.clone();
    let mut basis: Vec<ChartBinomial> = Vec::new();
    let mut pending: VecDeque<(Vec<u64>, Vec<u64>, Vec<i64>)> = chart
        .binomials
        .iter()
        .map(|b| (b.alpha.clone(), b.beta.clone(), b.gamma.clone()))
        .collect();
    let mut processed_pairs: BTreeSet<(ChartBinomial, ChartBinomial)> = BTreeSet::new();
    let mut pairs_done = 0usize;

    let collapse = |unit: ChartBinomial, torus: TorusLattice| -> Result<StandardBasis> {
        torus.check_torsion_free()?;
        Ok(StandardBasis {
            nonlinear: Vec::new(),
            linear: Vec::new(),
            unit_like: vec![unit],
            torus,
        })
    };

    for _round in 0..caps.max_rounds {
        let mut changed = false;
        // Absorb pending candidates.
        while let Some((u, v, c)) = pending.pop_front() {
            let before = torus.rank();
            if let Some(b) = reduce_fully(u, v, c, &basis, &mut torus, caps)? {
                if b.alpha.iter().all(|&x| x == 0) {
                    return collapse(b, torus);
                }
                if !basis.contains(&b) {
                    basis.push(b);
                    changed = true;
                }
            }
            if torus.rank() != before {
                canonicalize(&mut basis, &torus);
                changed = true;
            }
            if basis.len() > caps.max_basis {
                return Err(EngineError::NonTermination(
                    "basis exceeded its size bound".into(),
                ));
            }
        }
        // S-pairs over the current basis.
        let snapshot = basis.clone();
        for i in 0..snapshot.len() {
            for j in (i + 1)..snapshot.len() {
                let key = if snapshot[i] <= snapshot[j] {
                    (snapshot[i].clone(), snapshot[j].clone())
                } else {
                    (snapshot[j].clone(), snapshot[i].clone())
                };
                if processed_pairs.contains(&key) {
                    continue;
                }
                processed_pairs.insert(key);
                pairs_done += 1;
                if pairs_done > caps.max_pairs {
                    return Err(EngineError::NonTermination(
                        "S-pair processing exceeded its bound".into(),
                    ));
                }
                pending.push_back(s_pair_raw(&snapshot[i], &snapshot[j]));
                changed = true;
            }
        }
        // Linear pivot elimination: substitute each pivot into every other
        // element that mentions it.
        if pending.is_empty() {
            let pivots: Vec<ChartBinomial> = basis
                .iter()
                .filter(|b| b.lead_degree() == 1)
                .cloned()
                .collect();
            for f in &pivots {
                let i = f.alpha.iter().position(|&x| x == 1).unwrap();
                let mut keep = Vec::new();
                for g in basis.drain(..) {
                    if g == *f || (g.alpha[i] == 0 && g.beta[i] == 0) {
                        keep.push(g);
                        continue;
                    }
                    let (ai, bi) = (g.alpha[i], g.beta[i]);
                    let mut u = g.alpha.clone();
                    let mut v = g.beta.clone();
                    u[i] = 0;
                    v[i] = 0;
                    for (t, &fb) in f.beta.iter().enumerate() {
                        u[t] += ai * fb;
                        v[t] += bi * fb;
                    }
                    let c: Vec<i64> = g
                        .gamma
                        .iter()
                        .zip(&f.gamma)
                        .map(|(&gc, &fg)| gc + (bi as i64 - ai as i64) * fg)
                        .collect();
                    pending.push_back((u, v, c));
                    changed = true;
                }
                basis = keep;
            }
        }
        if !changed && pending.is_empty() {
            // Interreduce: every element must stay irreducible against the
            // others; re-run the loop if anything moves.
            let snapshot = basis.clone();
            let mut stable = true;
            for b in snapshot {
                let pos = basis.iter().position(|x| *x == b);
                let Some(pos) = pos else { continue };
                basis.remove(pos);
                let before = torus.rank();
                let red = reduce_fully(
                    b.alpha.clone(),
                    b.beta.clone(),
                    b.gamma.clone(),
                    &basis,
                    &mut torus,
                    caps,
                )?;
                match red {
                    Some(nb) => {
                        if nb.alpha.iter().all(|&x| x == 0) {
                            return collapse(nb, torus);
                        }
                        if nb != b {
                            stable = false;
                        }
                        if !basis.contains(&nb) {
                            basis.push(nb);
                        } else {
                            stable = false;
                        }
                    }
                    None => stable = false,
                }
                if torus.rank() != before {
                    canonicalize(&mut basis, &torus);
                    stable = false;
                }
            }
            if stable {
                torus.check_torsion_free()?;
                let mut out = StandardBasis {
                    nonlinear: Vec::new(),
                    linear: Vec::new(),
                    unit_like: Vec::new(),
                    torus,
                };
                for b in basis {
                    match b.lead_degree() {
                        0 => out.unit_like.push(b),
                        1 => out.linear.push(b),
                        _ => out.nonlinear.push(b),
                    }
                }
                out.nonlinear.sort();
                out.linear.sort();
                out.unit_like.sort();
                // Post-condition: pivots are eliminated everywhere else.
                for f in &out.linear {
                    let i = f.alpha.iter().position(|&x| x == 1).unwrap();
                    let clean = out
                        .nonlinear
                        .iter()
                        .chain(out.linear.iter())
                        .filter(|g| *g != f)
                        .all(|g| g.alpha[i] == 0 && g.beta[i] == 0);
                    if !clean {
                        return Err(EngineError::NonTermination(
                            "pivot elimination did not stabilize".into(),
                        ));
                    }
                }
                return Ok(out);
            }
        }
    }
    Err(EngineError::NonTermination(
        "completion exceeded its round bound".into(),
    ))
}
