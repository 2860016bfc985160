//! Regular cones and fans over the integer lattice, star subdivision, and the
//! canonical dual frame attached to each chart.
//!
//! Cones are stored as sorted lists of global ray ids; the ray table is shared
//! by the whole fan and only ever grows. Regularity means the ray vectors
//! extend to a basis of the ambient lattice (full column rank, all Smith
//! invariant factors equal to one).

use crate::error::{EngineError, Result};
use crate::matrix::{
    self, fm_positive_feasible, identity, mat_mul, mat_vec, smith, Mat, Snf,
};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegularFan {
    /// Ambient lattice rank.
    pub dim: usize,
    /// Ray vectors indexed by global ray id.
    pub rays: Vec<Vec<i64>>,
    /// Maximal cones as strictly ascending ray-id lists.
    pub max_cones: Vec<Vec<usize>>,
}

/// Ray matrix of a cone with rays as columns (dim x r).
pub fn ray_matrix(fan: &RegularFan, cone: &[usize]) -> Mat {
    (0..fan.dim)
        .map(|row| cone.iter().map(|&id| i128::from(fan.rays[id][row])).collect())
        .collect()
}

/// Smith data of the ray matrix, with regularity enforced.
pub fn cone_snf(fan: &RegularFan, cone: &[usize]) -> Result<Snf> {
    let s = smith(&ray_matrix(fan, cone));
    if s.rank < cone.len() {
        return Err(EngineError::InvalidInput(format!(
            "cone {cone:?} has linearly dependent rays"
        )));
    }
    if let Some(&f) = s.factors.iter().find(|&&f| f != 1) {
        return Err(EngineError::TorsionError(f as i64));
    }
    Ok(s)
}

pub fn is_regular_cone(fan: &RegularFan, cone: &[usize]) -> bool {
    cone_snf(fan, cone).is_ok()
}

/// Exact membership test for a (possibly lower-dimensional) regular cone.
pub fn cone_contains_point(fan: &RegularFan, cone: &[usize], x: &[i64]) -> bool {
    cone_coordinates(fan, cone, x).is_some()
}

/// Nonnegative integer coordinates of `x` on the cone's rays, if any.
pub fn cone_coordinates(fan: &RegularFan, cone: &[usize], x: &[i64]) -> Option<Vec<i128>> {
    let s = cone_snf(fan, cone).ok()?;
    let r = cone.len();
    let y = mat_vec(&s.u, &matrix::to_i128_vec(x));
    if y[r..].iter().any(|&t| t != 0) {
        return None;
    }
    let c = mat_vec(&s.v, &y[..r].to_vec());
    if c.iter().all(|&t| t >= 0) {
        Some(c)
    } else {
        None
    }
}

pub fn max_cones_containing(fan: &RegularFan, x: &[i64]) -> Vec<usize> {
    (0..fan.max_cones.len())
        .filter(|&i| cone_contains_point(fan, &fan.max_cones[i], x))
        .collect()
}

/// All nonempty faces of a regular cone (every subset of its rays).
pub fn faces_of_cone(cone: &[usize]) -> Vec<Vec<usize>> {
    let r = cone.len();
    let mut out = Vec::with_capacity((1usize << r) - 1);
    for mask in 1u32..(1u32 << r) {
        let f: Vec<usize> =
            (0..r).filter(|&i| mask & (1 << i) != 0).map(|i| cone[i]).collect();
        out.push(f);
    }
    out
}

/// Every nonempty face of every maximal cone, deduplicated, in a
/// deterministic order (by length, then lexicographically).
pub fn deduplicated_faces(fan: &RegularFan) -> Vec<Vec<usize>> {
    let mut all: Vec<Vec<usize>> = fan
        .max_cones
        .iter()
        .flat_map(|c| faces_of_cone(c))
        .collect();
    all.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    all.dedup();
    all
}

pub fn is_face_of_fan(fan: &RegularFan, delta: &[usize]) -> bool {
    !delta.is_empty()
        && fan
            .max_cones
            .iter()
            .any(|c| delta.iter().all(|id| c.binary_search(id).is_ok()))
}

impl RegularFan {
    /// Full structural and geometric validation, intended for external input.
    /// Fans produced by [`star_subdivision`] from a valid fan stay valid.
    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(EngineError::InvalidInput("ambient rank must be positive".into()));
        }
        for (id, ray) in self.rays.iter().enumerate() {
            if ray.len() != self.dim {
                return Err(EngineError::InvalidInput(format!(
                    "ray {id} has length {} in rank {}",
                    ray.len(),
                    self.dim
                )));
            }
            if ray.iter().all(|&x| x == 0) {
                return Err(EngineError::InvalidInput(format!("ray {id} is zero")));
            }
        }
        for (i, a) in self.rays.iter().enumerate() {
            for (j, b) in self.rays.iter().enumerate().skip(i + 1) {
                if a == b {
                    return Err(EngineError::InvalidInput(format!(
                        "rays {i} and {j} are identical"
                    )));
                }
            }
        }
        if self.max_cones.is_empty() {
            return Err(EngineError::InvalidInput("fan has no maximal cones".into()));
        }
        for cone in &self.max_cones {
            if cone.is_empty() {
                return Err(EngineError::InvalidInput("empty maximal cone".into()));
            }
            if cone.windows(2).any(|w| w[0] >= w[1]) {
                return Err(EngineError::InvalidInput(format!(
                    "cone {cone:?} ray ids are not strictly ascending"
                )));
            }
            if cone.iter().any(|&id| id >= self.rays.len()) {
                return Err(EngineError::InvalidInput(format!(
                    "cone {cone:?} references a missing ray"
                )));
            }
            cone_snf(self, cone)?;
        }
        for (i, a) in self.max_cones.iter().enumerate() {
            for (j, b) in self.max_cones.iter().enumerate() {
                if i != j && a.iter().all(|id| b.binary_search(id).is_ok()) {
                    return Err(EngineError::InvalidInput(format!(
                        "cone {a:?} is contained in cone {b:?}, so it is not maximal"
                    )));
                }
            }
        }
        for i in 0..self.max_cones.len() {
            for j in (i + 1)..self.max_cones.len() {
                self.check_pairwise_compatible(i, j)?;
            }
        }
        Ok(())
    }

    /// A pair of cones is compatible when their set intersection is exactly
    /// the cone on their shared rays. Checked exactly: for each ray of the
    /// first cone outside the shared set, the system "point in both cones
    /// with positive weight on that ray" must be infeasible.
    fn check_pairwise_compatible(&self, i: usize, j: usize) -> Result<()> {
        let (a, b) = (&self.max_cones[i], &self.max_cones[j]);
        let shared: Vec<usize> =
            a.iter().copied().filter(|id| b.binary_search(id).is_ok()).collect();
        let (ra, rb) = (a.len(), b.len());
        let nvars = ra + rb;
        let ma = ray_matrix(self, a);
        let mb = ray_matrix(self, b);
        let mut base_rows: Vec<Vec<i128>> = Vec::new();
        for v in 0..nvars {
            let mut row = vec![0i128; nvars];
            row[v] = 1;
            base_rows.push(row);
        }
        for d in 0..self.dim {
            let mut row = vec![0i128; nvars];
            for (k, _) in a.iter().enumerate() {
                row[k] = ma[d][k];
            }
            for (k, _) in b.iter().enumerate() {
                row[ra + k] = -mb[d][k];
            }
            base_rows.push(row.clone());
            base_rows.push(row.into_iter().map(|x| -x).collect());
        }
        for (pos, id) in a.iter().enumerate() {
            if shared.contains(id) {
                continue;
            }
            if fm_positive_feasible(base_rows.clone(), nvars, pos) {
                return Err(EngineError::InvalidInput(format!(
                    "cones {a:?} and {b:?} overlap outside their shared face"
                )));
            }
        }
        Ok(())
    }
}

/// Dual frame of a chart: `x` characters pair as the identity with the cone's
/// rays, `y` characters annihilate them, and together they form a basis of
/// the dual lattice. Deterministic in the fan data.
pub fn frame_basis(fan: &RegularFan, cone: &[usize]) -> Result<(Vec<Vec<i64>>, Vec<Vec<i64>>)> {
    let s = cone_snf(fan, cone)?;
    let (n, r) = (fan.dim, cone.len());
    // With U A V = [I; 0], the inverse of the basis [A | last columns of
    // U^-1] is [[V, 0], [0, I]] * U; its first r rows are the x characters.
    let mut block = identity(n);
    for i in 0..r {
        for j in 0..r {
            block[i][j] = s.v[i][j];
        }
    }
    let binv = mat_mul(&block, &s.u);
    let x: Vec<Vec<i64>> = binv[..r].iter().map(|row| matrix::to_i64_vec(row)).collect();
    let y: Vec<Vec<i64>> = binv[r..].iter().map(|row| matrix::to_i64_vec(row)).collect();
    debug_assert!(x.iter().enumerate().all(|(i, xi)| {
        cone.iter().enumerate().all(|(j, &id)| {
            let p: i64 = xi.iter().zip(&fan.rays[id]).map(|(a, b)| a * b).sum();
            p == i64::from(i == j)
        })
    }));
    debug_assert!(y.iter().all(|yk| {
        cone.iter().all(|&id| {
            yk.iter().zip(&fan.rays[id]).map(|(a, b)| a * b).sum::<i64>() == 0
        })
    }));
    Ok((x, y))
}

/// One replacement chart of a subdivided cone.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitChart {
    /// Index of the child cone in the new fan's `max_cones`.
    pub new_idx: usize,
    /// Position (within the parent's sorted ray list) of the ray the child drops.
    pub removed_position: usize,
    /// Global id of the dropped ray.
    pub removed_ray: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitCone {
    pub old_idx: usize,
    pub charts: Vec<SplitChart>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StarSubdivision {
    pub fan: RegularFan,
    /// Global id of the barycentre ray (for a single-ray centre, that ray).
    pub barycentre_id: usize,
    /// `(old index, new index)` for cones that do not contain the centre.
    pub kept: Vec<(usize, usize)>,
    pub split: Vec<SplitCone>,
}

/// Star subdivision at the face `delta`. Every maximal cone containing the
/// centre is replaced by one child per centre ray; a single-ray centre is the
/// identity. The barycentre (sum of the centre's rays) reuses an existing ray
/// id only on an exact vector match, which cannot occur in fans derived by
/// this routine.
pub fn star_subdivision(fan: &RegularFan, delta: &[usize]) -> Result<StarSubdivision> {
    let mut delta = delta.to_vec();
    delta.sort_unstable();
    delta.dedup();
    if !is_face_of_fan(fan, &delta) {
        return Err(EngineError::InvalidCenter(format!("{delta:?}")));
    }
    if delta.len() == 1 {
        return Ok(StarSubdivision {
            fan: fan.clone(),
            barycentre_id: delta[0],
            kept: (0..fan.max_cones.len()).map(|i| (i, i)).collect(),
            split: Vec::new(),
        });
    }
    let mut e0 = vec![0i64; fan.dim];
    for &id in &delta {
        for (t, &v) in e0.iter_mut().zip(&fan.rays[id]) {
            *t += v;
        }
    }
    let mut new_fan = fan.clone();
    let barycentre_id = match fan.rays.iter().position(|r| *r == e0) {
        Some(id) => id,
        None => {
            new_fan.rays.push(e0);
            new_fan.rays.len() - 1
        }
    };
    let mut max_cones: Vec<Vec<usize>> = Vec::new();
    let mut kept = Vec::new();
    let mut split = Vec::new();
    for (old_idx, cone) in fan.max_cones.iter().enumerate() {
        let contains = delta.iter().all(|id| cone.binary_search(id).is_ok());
        if !contains {
            kept.push((old_idx, max_cones.len()));
            max_cones.push(cone.clone());
            continue;
        }
        let mut charts = Vec::new();
        for &removed_ray in &delta {
            let removed_position = cone.binary_search(&removed_ray).unwrap();
            let mut child: Vec<usize> =
                cone.iter().copied().filter(|&id| id != removed_ray).collect();
            child.push(barycentre_id);
            child.sort_unstable();
            charts.push(SplitChart {
                new_idx: max_cones.len(),
                removed_position,
                removed_ray,
            });
            max_cones.push(child);
        }
        split.push(SplitCone { old_idx, charts });
    }
    new_fan.max_cones = max_cones;
    Ok(StarSubdivision { fan: new_fan, barycentre_id, kept, split })
}
