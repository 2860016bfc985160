//! Finite-fiber cross-checks over small primes.
//!
//! Three independent properties of a chart are compared against direct
//! enumeration over `F_p^r x (F_p^*)^q`:
//!  * the torus relation lattice keeps its rank mod `p` (no hidden torsion),
//!  * on charts the engine calls smooth, the Jacobian has full expected rank
//!    at every `F_p`-point of the scheme,
//!  * the full derivative-monomial locus of each generator agrees with the
//!    locus of the mod-`p`-filtered monomials together with the generator.

use serde::{Deserialize, Serialize};
use toric_res_core::hasse::{hasse_monomials, hasse_monomials_mod_p};
use toric_res_core::matrix::{smith, Mat};
use toric_res_core::strata::is_smooth_chart;
use toric_res_core::{
    hs_at_distinguished, ChartIdeal, CompletionCaps, EmbeddingState, Result,
};

/// Upper bound on enumerated points per chart and prime.
const MAX_POINTS: u64 = 200_000;

fn pow_mod(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut acc = 1 % p;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    acc
}

/// `b^e mod p` for a unit `b` and a possibly negative exponent.
fn unit_pow_mod(b: u64, e: i64, p: u64) -> u64 {
    debug_assert!(b % p != 0);
    let e = e.rem_euclid(p as i64 - 1) as u64;
    pow_mod(b, e, p)
}

pub fn rank_mod_p(rows: &[Vec<i64>], p: u64) -> usize {
    let p = p as i64;
    let mut m: Vec<Vec<i64>> = rows
        .iter()
        .map(|r| r.iter().map(|&x| x.rem_euclid(p)).collect())
        .collect();
    let cols = m.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..cols {
        let Some(piv) = (rank..m.len()).find(|&i| m[i][c] != 0) else {
            continue;
        };
        m.swap(rank, piv);
        let inv = mod_inverse(m[rank][c], p);
        for x in m[rank].iter_mut() {
            *x = *x * inv % p;
        }
        for i in 0..m.len() {
            if i != rank && m[i][c] != 0 {
                let f = m[i][c];
                for j in 0..cols {
                    m[i][j] = (m[i][j] - f * m[rank][j]).rem_euclid(p);
                }
            }
        }
        rank += 1;
    }
    rank
}

fn mod_inverse(a: i64, p: i64) -> i64 {
    pow_mod(a.rem_euclid(p) as u64, (p - 2) as u64, p as u64) as i64
}

fn rank_over_z(rows: &[Vec<i64>]) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let m: Mat = rows
        .iter()
        .map(|r| r.iter().map(|&x| x as i128).collect())
        .collect();
    smith(&m).rank
}

/// A point of `F_p^r x (F_p^*)^q`.
struct Point {
    x: Vec<u64>,
    y: Vec<u64>,
}

fn points(r: usize, q: usize, p: u64) -> Option<Vec<Point>> {
    let mut count: u64 = 1;
    for _ in 0..r {
        count = count.checked_mul(p)?;
    }
    for _ in 0..q {
        count = count.checked_mul(p - 1)?;
    }
    if count > MAX_POINTS {
        return None;
    }
    let mut out = Vec::with_capacity(count as usize);
    let mut digits = vec![0u64; r + q];
    loop {
        out.push(Point {
            x: digits[..r].to_vec(),
            y: digits[r..].iter().map(|&d| d + 1).collect(),
        });
        let mut k = 0;
        loop {
            if k == digits.len() {
                return Some(out);
            }
            let base = if k < r { p } else { p - 1 };
            digits[k] += 1;
            if digits[k] < base {
                break;
            }
            digits[k] = 0;
            k += 1;
        }
    }
}

/// Value of `x^a` at the point (torus part handled separately).
fn x_monomial(pt: &Point, a: &[u64], p: u64) -> u64 {
    let mut acc = 1 % p;
    for (&xi, &ai) in pt.x.iter().zip(a) {
        if ai == 0 {
            continue;
        }
        if xi % p == 0 {
            return 0;
        }
        acc = acc * pow_mod(xi, ai, p) % p;
    }
    acc
}

fn y_monomial(pt: &Point, g: &[i64], p: u64) -> u64 {
    let mut acc = 1 % p;
    for (&yj, &gj) in pt.y.iter().zip(g) {
        acc = acc * unit_pow_mod(yj, gj, p) % p;
    }
    acc
}

fn on_scheme(chart: &ChartIdeal, pt: &Point, p: u64) -> bool {
    for f in &chart.binomials {
        let lead = x_monomial(pt, &f.alpha, p);
        let trail = x_monomial(pt, &f.beta, p) * y_monomial(pt, &f.gamma, p) % p;
        if lead != trail {
            return false;
        }
    }
    for row in &chart.torus.rows {
        if y_monomial(pt, row, p) != 1 % p {
            return false;
        }
    }
    true
}

/// `coef * x^(exps - e_i)` with the convention that a zero coefficient kills
/// the term before the exponent drops.
fn partial_term(pt: &Point, coef: u64, exps: &[u64], i: usize, p: u64) -> u64 {
    if coef % p == 0 {
        return 0;
    }
    let mut e = exps.to_vec();
    e[i] -= 1;
    coef % p * x_monomial(pt, &e, p) % p
}

/// Jacobian of the chart's generators at an on-scheme point, as rows over
/// `F_p` in the variable order `x_0..x_{r-1}, y_0..y_{q-1}`.
fn jacobian(chart: &ChartIdeal, pt: &Point, p: u64) -> Vec<Vec<i64>> {
    let (r, q) = (chart.r(), chart.q());
    let mut rows = Vec::new();
    for f in &chart.binomials {
        let ytrail = y_monomial(pt, &f.gamma, p);
        let mut row = vec![0i64; r + q];
        for i in 0..r {
            let lead = if f.alpha[i] > 0 {
                partial_term(pt, f.alpha[i], &f.alpha, i, p)
            } else {
                0
            };
            let trail = if f.beta[i] > 0 {
                partial_term(pt, f.beta[i], &f.beta, i, p) * ytrail % p
            } else {
                0
            };
            row[i] = ((lead + p - trail) % p) as i64;
        }
        let xtrail = x_monomial(pt, &f.beta, p);
        for j in 0..q {
            let coef = f.gamma[j].rem_euclid(p as i64) as u64;
            if coef == 0 || xtrail == 0 {
                continue;
            }
            let mut g = f.gamma.to_vec();
            g[j] -= 1;
            let t = coef * xtrail % p * y_monomial(pt, &g, p) % p;
            row[r + j] = ((p - t) % p) as i64;
        }
        rows.push(row);
    }
    for lam in &chart.torus.rows {
        let mut row = vec![0i64; r + q];
        for j in 0..q {
            let coef = lam[j].rem_euclid(p as i64) as u64;
            if coef == 0 {
                continue;
            }
            let mut g = lam.to_vec();
            g[j] -= 1;
            let t = coef * y_monomial(pt, &g, p) % p;
            row[r + j] = ((p - t) % p) as i64;
        }
        rows.push(row);
    }
    rows
}

/// Expected codimension: rank over the integers of the exponent differences.
fn expected_codim(chart: &ChartIdeal) -> usize {
    let (r, q) = (chart.r(), chart.q());
    let mut rows = Vec::new();
    for f in &chart.binomials {
        let mut row = Vec::with_capacity(r + q);
        for i in 0..r {
            row.push(f.beta[i] as i64 - f.alpha[i] as i64);
        }
        row.extend_from_slice(&f.gamma);
        rows.push(row);
    }
    for lam in &chart.torus.rows {
        let mut row = vec![0i64; r];
        row.extend_from_slice(lam);
        rows.push(row);
    }
    rank_over_z(&rows)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChartReport {
    pub chart: usize,
    /// Torus lattice rank mod `p` equals its rank over the integers.
    pub torus_rank_stable: bool,
    /// Full vs filtered derivative-locus agreement; `null` when the point
    /// count guard skipped the enumeration.
    pub derivative_locus_match: Option<bool>,
    /// Pointwise Jacobian rank check; `null` when the chart is not smooth by
    /// the engine's criterion or the enumeration was skipped.
    pub smooth_fiber: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimeReport {
    pub prime: u64,
    pub charts: Vec<ChartReport>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiberCheckDocument {
    pub primes: Vec<u64>,
    pub reports: Vec<PrimeReport>,
    pub all_passed: bool,
}

fn derivative_locus_match(chart: &ChartIdeal, pts: &[Point], p: u64) -> Result<bool> {
    for f in &chart.binomials {
        let d = f.lead_degree();
        if d == 0 {
            continue;
        }
        let full = hasse_monomials(f, d)?;
        let filtered = hasse_monomials_mod_p(f, d, p)?;
        for pt in pts {
            let all_vanish = full.iter().all(|m| x_monomial(pt, &m.exponent, p) == 0);
            let lead = x_monomial(pt, &f.alpha, p);
            let trail = x_monomial(pt, &f.beta, p) * y_monomial(pt, &f.gamma, p) % p;
            let filtered_vanish = lead == trail
                && filtered.iter().all(|m| x_monomial(pt, &m.exponent, p) == 0);
            if all_vanish != filtered_vanish {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn smooth_fiber(chart: &ChartIdeal, pts: &[Point], p: u64) -> bool {
    let c = expected_codim(chart);
    pts.iter()
        .filter(|pt| on_scheme(chart, pt, p))
        .all(|pt| rank_mod_p(&jacobian(chart, pt, p), p) == c)
}

pub fn check_state(
    state: &EmbeddingState,
    primes: &[u64],
    caps: &CompletionCaps,
) -> Result<FiberCheckDocument> {
    let mut per_chart = Vec::new();
    for chart in &state.charts {
        let stalk = hs_at_distinguished(chart, caps)?;
        let smooth = is_smooth_chart(chart, caps)?;
        per_chart.push((stalk, smooth));
    }
    let mut reports = Vec::new();
    let mut all_passed = true;
    for &p in primes {
        let mut charts = Vec::new();
        for (ci, chart) in state.charts.iter().enumerate() {
            let (stalk, smooth) = &per_chart[ci];
            let torus_rank_stable =
                rank_mod_p(&stalk.basis.torus.rows, p) == stalk.nu;
            let pts = points(chart.r(), chart.q(), p);
            let derivative = match &pts {
                Some(pts) => Some(derivative_locus_match(chart, pts, p)?),
                None => None,
            };
            let fiber = match (&pts, smooth) {
                (Some(pts), true) => Some(smooth_fiber(chart, pts, p)),
                _ => None,
            };
            all_passed &= torus_rank_stable
                && derivative != Some(false)
                && fiber != Some(false);
            charts.push(ChartReport {
                chart: ci,
                torus_rank_stable,
                derivative_locus_match: derivative,
                smooth_fiber: fiber,
            });
        }
        reports.push(PrimeReport { prime: p, charts });
    }
    Ok(FiberCheckDocument { primes: primes.to_vec(), reports, all_passed })
}

#[cfg(test)]
mod test {
    use super::*;
    use toric_res_core::{resolve_hypersurface, EmbeddingState, RegularFan};

    fn e1_state() -> EmbeddingState {
        let fan = RegularFan {
            dim: 3,
            rays: vec![vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]],
            max_cones: vec![vec![0, 1, 2]],
        };
        EmbeddingState::from_generators(
            fan,
            vec![vec![(vec![2, 0, 0], vec![0, 1, 1], vec![])]],
        )
        .unwrap()
    }

    #[test]
    fn unit_powers_handle_negative_exponents() {
        for p in [2u64, 3, 5, 7] {
            for b in 1..p {
                for e in -6i64..=6 {
                    let direct = {
                        let inv = pow_mod(b, p - 2, p);
                        let (base, reps) = if e < 0 { (inv, -e) } else { (b, e) };
                        (0..reps).fold(1 % p, |acc, _| acc * base % p)
                    };
                    assert_eq!(unit_pow_mod(b, e, p), direct);
                }
            }
        }
    }

    #[test]
    fn rank_mod_p_matches_hand_cases() {
        assert_eq!(rank_mod_p(&[vec![2, 0], vec![0, 2]], 3), 2);
        assert_eq!(rank_mod_p(&[vec![2, 0], vec![0, 2]], 2), 0);
        assert_eq!(rank_mod_p(&[vec![1, 2], vec![2, 4]], 5), 1);
        assert_eq!(rank_mod_p(&[], 5), 0);
    }

    #[test]
    fn singular_input_fails_the_jacobian_at_the_origin() {
        let state = e1_state();
        let chart = &state.charts[0];
        let pts = points(3, 0, 3).unwrap();
        // The origin is on the scheme and singular there.
        assert!(!smooth_fiber(chart, &pts, 3));
        // But the chart is not claimed smooth, so the report skips it.
        let doc = check_state(&state, &[2, 3], &CompletionCaps::default()).unwrap();
        assert!(doc.all_passed);
        assert_eq!(doc.reports[0].charts[0].smooth_fiber, None);
        assert_eq!(doc.reports[0].charts[0].derivative_locus_match, Some(true));
    }

    #[test]
    fn resolved_state_passes_all_checks() {
        let trace = resolve_hypersurface(&e1_state(), 50).unwrap();
        let doc =
            check_state(&trace.final_state, &[2, 3, 5], &CompletionCaps::default())
                .unwrap();
        assert!(doc.all_passed);
        for report in &doc.reports {
            for chart in &report.charts {
                assert!(chart.torus_rank_stable);
                assert_eq!(chart.smooth_fiber, Some(true));
            }
        }
    }
}
