//! Chart-level data: binomial generators `x^alpha - x^beta y^gamma`, torus
//! relation lattices, the dual frame of a chart, restriction to faces, and
//! the frame-free gluing check between charts.
//!
//! Exponent vectors are positional in the chart's sorted ray list. A stored
//! binomial always has disjoint `alpha`/`beta` supports and is oriented so
//! that `(|alpha|, alpha) <= (|beta|, beta)` lexicographically; in particular
//! `beta` is never zero, while `alpha = 0` (a unit minus a monomial) is legal.

use crate::error::{EngineError, Result};
use crate::fan::{self, RegularFan};
use crate::matrix::{self, hnf_reduce, hnf_rows, smith, Mat};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ChartBinomial {
    pub alpha: Vec<u64>,
    pub beta: Vec<u64>,
    pub gamma: Vec<i64>,
}

impl ChartBinomial {
    /// Total degree of the lead side; the candidate order of the generator.
    pub fn lead_degree(&self) -> u64 {
        self.alpha.iter().sum()
    }

    pub fn beta_degree(&self) -> u64 {
        self.beta.iter().sum()
    }
}

/// Lexicographic key `(total degree, entries)` used to orient binomials and
/// to pick initial exponents.
pub fn degree_key(v: &[u64]) -> (u64, Vec<u64>) {
    (v.iter().sum(), v.to_vec())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Normalized {
    Binomial(ChartBinomial),
    /// `1 - y^gamma`; belongs in the torus lattice, not the generator list.
    TorusRelation(Vec<i64>),
}

/// Bring a raw `(alpha, beta, gamma)` triple to normal form, or classify it
/// as a torus relation. Shared `x` support and the zero binomial are errors.
pub fn normalize(alpha: &[u64], beta: &[u64], gamma: &[i64]) -> Result<Normalized> {
    if alpha.len() != beta.len() {
        return Err(EngineError::InvalidInput(
            "alpha and beta have different lengths".into(),
        ));
    }
    let shared: Vec<usize> = (0..alpha.len())
        .filter(|&i| alpha[i] > 0 && beta[i] > 0)
        .collect();
    if !shared.is_empty() {
        return Err(EngineError::SharedSupport(format!("positions {shared:?}")));
    }
    let azero = alpha.iter().all(|&a| a == 0);
    let bzero = beta.iter().all(|&b| b == 0);
    if azero && bzero {
        if gamma.iter().all(|&g| g == 0) {
            return Err(EngineError::ZeroBinomial);
        }
        return Ok(Normalized::TorusRelation(gamma.to_vec()));
    }
    let (mut a, mut b, mut g) = (alpha.to_vec(), beta.to_vec(), gamma.to_vec());
    if degree_key(&b) < degree_key(&a) {
        std::mem::swap(&mut a, &mut b);
        for x in g.iter_mut() {
            *x = -*x;
        }
    }
    Ok(Normalized::Binomial(ChartBinomial { alpha: a, beta: b, gamma: g }))
}

/// Subgroup of `Z^q` spanned by the exponents of known torus relations
/// `1 - y^gamma`, kept as a canonical Hermite basis.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TorusLattice {
    pub q: usize,
    pub rows: Vec<Vec<i64>>,
}

impl TorusLattice {
    pub fn new(q: usize) -> Self {
        TorusLattice { q, rows: Vec::new() }
    }

    pub fn from_rows(q: usize, rows: &[Vec<i64>]) -> Result<Self> {
        for r in rows {
            if r.len() != q {
                return Err(EngineError::InvalidInput(format!(
                    "torus relation has length {} in a chart with {} torus coordinates",
                    r.len(),
                    q
                )));
            }
        }
        let mat: Mat = rows.iter().map(|r| matrix::to_i128_vec(r)).collect();
        let canon = hnf_rows(&mat);
        Ok(TorusLattice {
            q,
            rows: canon.iter().map(|r| matrix::to_i64_vec(r)).collect(),
        })
    }

    fn mat(&self) -> Mat {
        self.rows.iter().map(|r| matrix::to_i128_vec(r)).collect()
    }

    /// Add a relation; returns true when the lattice actually grew.
    pub fn insert(&mut self, gamma: &[i64]) -> bool {
        if self.contains(gamma) {
            return false;
        }
        let mut m = self.mat();
        m.push(matrix::to_i128_vec(gamma));
        let canon = hnf_rows(&m);
        self.rows = canon.iter().map(|r| matrix::to_i64_vec(r)).collect();
        true
    }

    pub fn contains(&self, gamma: &[i64]) -> bool {
        self.reduce(gamma).iter().all(|&x| x == 0)
    }

    /// Canonical coset representative of `gamma` modulo the lattice.
    pub fn reduce(&self, gamma: &[i64]) -> Vec<i64> {
        matrix::to_i64_vec(&hnf_reduce(&self.mat(), &matrix::to_i128_vec(gamma)))
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// The quotient `Z^q / L` must be free for the scheme to avoid roots of
    /// unity; a Smith invariant factor above one is the obstruction.
    pub fn check_torsion_free(&self) -> Result<()> {
        if self.rows.is_empty() {
            return Ok(());
        }
        let s = smith(&self.mat());
        if let Some(&f) = s.factors.iter().find(|&&f| f != 1) {
            return Err(EngineError::TorsionError(f as i64));
        }
        Ok(())
    }
}

/// Characters of the chart variables: `x[i]` pairs as the identity with the
/// chart cone's rays, `y[k]` annihilates them; together a dual basis.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChartFrame {
    pub x: Vec<Vec<i64>>,
    pub y: Vec<Vec<i64>>,
}

impl ChartFrame {
    pub fn dim(&self) -> usize {
        self.x.first().or_else(|| self.y.first()).map_or(0, |v| v.len())
    }

    /// Character of the Laurent monomial `x^xs * y^ys` in the ambient dual
    /// lattice.
    pub fn character(&self, xs: &[i64], ys: &[i64]) -> Vec<i64> {
        let n = self.dim();
        let mut out = vec![0i64; n];
        for (c, row) in xs.iter().zip(&self.x) {
            for (o, v) in out.iter_mut().zip(row) {
                *o += c * v;
            }
        }
        for (c, row) in ys.iter().zip(&self.y) {
            for (o, v) in out.iter_mut().zip(row) {
                *o += c * v;
            }
        }
        out
    }
}

/// One chart of the embedded scheme: the cone, the dual frame, the binomial
/// generators, and the chart's torus relation lattice.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChartIdeal {
    pub cone: Vec<usize>,
    pub frame: ChartFrame,
    pub binomials: Vec<ChartBinomial>,
    pub torus: TorusLattice,
}

impl ChartIdeal {
    pub fn r(&self) -> usize {
        self.cone.len()
    }

    pub fn q(&self) -> usize {
        self.torus.q
    }

    /// Normalize and store a generator, routing torus relations into the
    /// lattice. Zero binomials are rejected by `normalize`.
    pub fn push_generator(&mut self, alpha: &[u64], beta: &[u64], gamma: &[i64]) -> Result<()> {
        if alpha.len() != self.r() || gamma.len() != self.q() {
            return Err(EngineError::InvalidChart(format!(
                "generator shape ({}, {}) does not match chart shape ({}, {})",
                alpha.len(),
                gamma.len(),
                self.r(),
                self.q()
            )));
        }
        match normalize(alpha, beta, gamma)? {
            Normalized::Binomial(b) => self.binomials.push(b),
            Normalized::TorusRelation(g) => {
                self.torus.insert(&g);
            }
        }
        Ok(())
    }

    pub fn validate(&self, fan: &RegularFan) -> Result<()> {
        let n = fan.dim;
        let (r, q) = (self.r(), self.q());
        if self.frame.x.len() != r || self.frame.y.len() != q || r + q != n {
            return Err(EngineError::InvalidChart(format!(
                "frame shape ({}, {}) does not match cone size {} in rank {}",
                self.frame.x.len(),
                self.frame.y.len(),
                r,
                n
            )));
        }
        let pair = |u: &[i64], v: &[i64]| -> i64 { u.iter().zip(v).map(|(a, b)| a * b).sum() };
        for (i, xi) in self.frame.x.iter().enumerate() {
            for (j, &id) in self.cone.iter().enumerate() {
                if pair(xi, &fan.rays[id]) != i64::from(i == j) {
                    return Err(EngineError::InvalidChart(format!(
                        "x character {i} does not pair correctly with ray {id}"
                    )));
                }
            }
        }
        for (k, yk) in self.frame.y.iter().enumerate() {
            for &id in &self.cone {
                if pair(yk, &fan.rays[id]) != 0 {
                    return Err(EngineError::InvalidChart(format!(
                        "y character {k} does not annihilate ray {id}"
                    )));
                }
            }
        }
        // The frame rows must be a basis of the dual lattice.
        let full: Mat = self
            .frame
            .x
            .iter()
            .chain(&self.frame.y)
            .map(|row| matrix::to_i128_vec(row))
            .collect();
        let s = smith(&full);
        if s.rank != n || s.factors.iter().any(|&f| f != 1) {
            return Err(EngineError::InvalidChart(
                "frame rows do not form a dual lattice basis".into(),
            ));
        }
        for b in &self.binomials {
            if b.alpha.len() != r || b.beta.len() != r || b.gamma.len() != q {
                return Err(EngineError::InvalidChart("binomial shape mismatch".into()));
            }
            match normalize(&b.alpha, &b.beta, &b.gamma)? {
                Normalized::Binomial(nb) if nb == *b => {}
                _ => {
                    return Err(EngineError::InvalidChart(format!(
                        "stored binomial {b:?} is not in normal form"
                    )))
                }
            }
        }
        self.torus.check_torsion_free()?;
        Ok(())
    }
}

/// The whole embedded scheme: a regular fan plus one chart ideal per maximal
/// cone, in the same order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmbeddingState {
    pub fan: RegularFan,
    pub charts: Vec<ChartIdeal>,
}

impl EmbeddingState {
    /// Build a state from raw per-chart generators, deriving each chart's
    /// frame canonically from its cone.
    pub fn from_generators(
        fan: RegularFan,
        generators: Vec<Vec<(Vec<u64>, Vec<u64>, Vec<i64>)>>,
    ) -> Result<Self> {
        if generators.len() != fan.max_cones.len() {
            return Err(EngineError::InvalidInput(format!(
                "{} generator lists for {} maximal cones",
                generators.len(),
                fan.max_cones.len()
            )));
        }
        let mut charts = Vec::new();
        for (cone, gens) in fan.max_cones.iter().zip(generators) {
            let (x, y) = fan::frame_basis(&fan, cone)?;
            let q = y.len();
            let mut chart = ChartIdeal {
                cone: cone.clone(),
                frame: ChartFrame { x, y },
                binomials: Vec::new(),
                torus: TorusLattice::new(q),
            };
            for (a, b, g) in gens {
                chart.push_generator(&a, &b, &g)?;
            }
            charts.push(chart);
        }
        Ok(EmbeddingState { fan, charts })
    }

    pub fn validate(&self) -> Result<()> {
        self.fan.validate()?;
        if self.charts.len() != self.fan.max_cones.len() {
            return Err(EngineError::InvalidChart(format!(
                "{} charts for {} maximal cones",
                self.charts.len(),
                self.fan.max_cones.len()
            )));
        }
        for (chart, cone) in self.charts.iter().zip(&self.fan.max_cones) {
            if &chart.cone != cone {
                return Err(EngineError::InvalidChart(format!(
                    "chart cone {:?} does not match fan cone {:?}",
                    chart.cone, cone
                )));
            }
            chart.validate(&self.fan)?;
        }
        Ok(())
    }
}

/// Restrict a chart ideal to a face of its cone (the face's global ray ids;
/// the empty face restricts to the torus). Divisor variables off the face
/// become torus coordinates, prepended to the chart's `y` list; generators
/// are renormalized, with degenerating ones absorbed into the torus lattice.
pub fn restrict_to_face(chart: &ChartIdeal, face: &[usize]) -> Result<ChartIdeal> {
    let mut sel = Vec::new();
    for id in face {
        match chart.cone.binary_search(id) {
            Ok(pos) => sel.push(pos),
            Err(_) => {
                return Err(EngineError::InvalidChart(format!(
                    "ray {id} is not part of the chart cone {:?}",
                    chart.cone
                )))
            }
        }
    }
    sel.sort_unstable();
    let out: Vec<usize> = (0..chart.r()).filter(|p| !sel.contains(p)).collect();
    let frame = ChartFrame {
        x: sel.iter().map(|&p| chart.frame.x[p].clone()).collect(),
        y: out
            .iter()
            .map(|&p| chart.frame.x[p].clone())
            .chain(chart.frame.y.iter().cloned())
            .collect(),
    };
    let new_q = out.len() + chart.q();
    let lifted: Vec<Vec<i64>> = chart
        .torus
        .rows
        .iter()
        .map(|row| {
            let mut v = vec![0i64; out.len()];
            v.extend_from_slice(row);
            v
        })
        .collect();
    let mut restricted = ChartIdeal {
        cone: face.to_vec(),
        frame,
        binomials: Vec::new(),
        torus: TorusLattice::from_rows(new_q, &lifted)?,
    };
    for b in &chart.binomials {
        let a_sel: Vec<u64> = sel.iter().map(|&p| b.alpha[p]).collect();
        let b_sel: Vec<u64> = sel.iter().map(|&p| b.beta[p]).collect();
        let mut g: Vec<i64> = out
            .iter()
            .map(|&p| b.beta[p] as i64 - b.alpha[p] as i64)
            .collect();
        g.extend_from_slice(&b.gamma);
        restricted.push_generator(&a_sel, &b_sel, &g)?;
    }
    Ok(restricted)
}

/// Frame-independent fingerprint of a restricted chart on a shared face:
/// the torus relation lattice as a sublattice of the ambient dual lattice,
/// and each binomial as exponents over the face's rays together with its
/// character difference reduced modulo that lattice.
fn face_fingerprint(
    restricted: &ChartIdeal,
) -> (Mat, Vec<(Vec<u64>, Vec<u64>, Vec<i64>)>) {
    let torus_chars: Mat = restricted
        .torus
        .rows
        .iter()
        .map(|row| matrix::to_i128_vec(&restricted.frame.character(&[], row)))
        .collect();
    let lattice = hnf_rows(&torus_chars);
    let mut items: Vec<(Vec<u64>, Vec<u64>, Vec<i64>)> = restricted
        .binomials
        .iter()
        .map(|b| {
            let xdiff: Vec<i64> = b
                .beta
                .iter()
                .zip(&b.alpha)
                .map(|(&bb, &aa)| bb as i64 - aa as i64)
                .collect();
            let diff = restricted.frame.character(&xdiff, &b.gamma);
            let red = matrix::to_i64_vec(&hnf_reduce(&lattice, &matrix::to_i128_vec(&diff)));
            (b.alpha.clone(), b.beta.clone(), red)
        })
        .collect();
    items.sort();
    items.dedup();
    (lattice, items)
}

impl EmbeddingState {
    /// Verify that every pair of charts induces the same restricted data on
    /// their shared face, compared frame-independently.
    pub fn check_gluing(&self) -> Result<()> {
        for i in 0..self.charts.len() {
            for j in (i + 1)..self.charts.len() {
                let a = &self.charts[i];
                let b = &self.charts[j];
                let shared: Vec<usize> = a
                    .cone
                    .iter()
                    .copied()
                    .filter(|id| b.cone.binary_search(id).is_ok())
                    .collect();
                let ra = restrict_to_face(a, &shared)?;
                let rb = restrict_to_face(b, &shared)?;
                let fa = face_fingerprint(&ra);
                let fb = face_fingerprint(&rb);
                if fa != fb {
                    return Err(EngineError::InvalidChart(format!(
                        "charts {i} and {j} disagree on their shared face {shared:?}"
                    )));
                }
            }
        }
        Ok(())
    }
}
