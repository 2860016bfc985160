//! Exact integer matrix kernels: Smith and Hermite normal forms, unimodular
//! transform tracking, lattice membership / coset reduction, and a small
//! homogeneous Fourier–Motzkin feasibility test.
//!
//! Everything works in `i128`; inputs at desk scale stay far from overflow.

pub type Mat = Vec<Vec<i128>>;

pub fn identity(n: usize) -> Mat {
    (0..n)
        .map(|i| (0..n).map(|j| i128::from(i == j)).collect())
        .collect()
}

pub fn mat_mul(a: &Mat, b: &Mat) -> Mat {
    let (m, k) = (a.len(), if a.is_empty() { 0 } else { a[0].len() });
    let n = if b.is_empty() { 0 } else { b[0].len() };
    debug_assert!(b.len() == k);
    let mut out = vec![vec![0i128; n]; m];
    for i in 0..m {
        for l in 0..k {
            let alk = a[i][l];
            if alk == 0 {
                continue;
            }
            for j in 0..n {
                out[i][j] += alk * b[l][j];
            }
        }
    }
    out
}

pub fn mat_vec(a: &Mat, x: &[i128]) -> Vec<i128> {
    a.iter()
        .map(|row| row.iter().zip(x).map(|(r, v)| r * v).sum())
        .collect()
}

/// Floor division (rounds toward negative infinity). `b` must be nonzero.
pub fn floor_div(a: i128, b: i128) -> i128 {
    let q = a / b;
    if (a % b != 0) && ((a < 0) != (b < 0)) {
        q - 1
    } else {
        q
    }
}

/// Smith normal form `u * a * v = d` with `u`, `v` unimodular and their
/// inverses tracked alongside.
pub struct Snf {
    pub u: Mat,
    pub uinv: Mat,
    pub v: Mat,
    pub vinv: Mat,
    pub d: Mat,
    /// Nonzero diagonal entries, each dividing the next, all positive.
    pub factors: Vec<i128>,
    pub rank: usize,
}

pub fn smith(a: &Mat) -> Snf {
    let m = a.len();
    let n = if m == 0 { 0 } else { a[0].len() };
    let mut d = a.clone();
    let mut u = identity(m);
    let mut uinv = identity(m);
    let mut v = identity(n);
    let mut vinv = identity(n);

    // Row op: row[i] += c * row[j] on d and u; inverse op on uinv columns.
    let row_add = |d: &mut Mat, u: &mut Mat, uinv: &mut Mat, i: usize, j: usize, c: i128| {
        for k in 0..n {
            let t = c * d[j][k];
            d[i][k] += t;
        }
        for k in 0..m {
            let t = c * u[j][k];
            u[i][k] += t;
        }
        for k in 0..m {
            let t = c * uinv[k][i];
            uinv[k][j] -= t;
        }
    };
    let col_add = |d: &mut Mat, v: &mut Mat, vinv: &mut Mat, i: usize, j: usize, c: i128| {
        // col[i] += c * col[j]
        for k in 0..d.len() {
            let t = c * d[k][j];
            d[k][i] += t;
        }
        for k in 0..n {
            let t = c * v[k][j];
            v[k][i] += t;
        }
        for k in 0..n {
            let t = c * vinv[i][k];
            vinv[j][k] -= t;
        }
    };
    let row_swap = |d: &mut Mat, u: &mut Mat, uinv: &mut Mat, i: usize, j: usize| {
        d.swap(i, j);
        u.swap(i, j);
        for row in uinv.iter_mut() {
            row.swap(i, j);
        }
    };
    let col_swap = |d: &mut Mat, v: &mut Mat, vinv: &mut Mat, i: usize, j: usize| {
        for row in d.iter_mut() {
            row.swap(i, j);
        }
        for row in v.iter_mut() {
            row.swap(i, j);
        }
        vinv.swap(i, j);
    };
    let row_neg = |d: &mut Mat, u: &mut Mat, uinv: &mut Mat, i: usize| {
        for x in d[i].iter_mut() {
            *x = -*x;
        }
        for x in u[i].iter_mut() {
            *x = -*x;
        }
        for row in uinv.iter_mut() {
            row[i] = -row[i];
        }
    };

    let mut k = 0;
    while k < m.min(n) {
        // Find a pivot of minimal absolute value in the trailing block.
        let mut pivot: Option<(usize, usize)> = None;
        for i in k..m {
            for j in k..n {
                if d[i][j] != 0
                    && pivot.map_or(true, |(pi, pj)| d[i][j].abs() < d[pi][pj].abs())
                {
                    pivot = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = pivot else { break };
        if pi != k {
            row_swap(&mut d, &mut u, &mut uinv, k, pi);
        }
        if pj != k {
            col_swap(&mut d, &mut v, &mut vinv, k, pj);
        }
        if d[k][k] < 0 {
            row_neg(&mut d, &mut u, &mut uinv, k);
        }
        // Clear the pivot row and column; restart on remainders.
        let mut dirty = false;
        for i in (k + 1)..m {
            if d[i][k] != 0 {
                let q = floor_div(d[i][k], d[k][k]);
                row_add(&mut d, &mut u, &mut uinv, i, k, -q);
                if d[i][k] != 0 {
                    dirty = true;
                }
            }
        }
        for j in (k + 1)..n {
            if d[k][j] != 0 {
                let q = floor_div(d[k][j], d[k][k]);
                col_add(&mut d, &mut v, &mut vinv, j, k, -q);
                if d[k][j] != 0 {
                    dirty = true;
                }
            }
        }
        if dirty {
            continue; // smaller remainders exist; pick pivot again
        }
        // Divisibility sweep: pivot must divide every trailing entry.
        let mut rerun = false;
        'sweep: for i in (k + 1)..m {
            for j in (k + 1)..n {
                if d[i][j] % d[k][k] != 0 {
                    row_add(&mut d, &mut u, &mut uinv, k, i, 1);
                    rerun = true;
                    break 'sweep;
                }
            }
        }
        if rerun {
            continue;
        }
        k += 1;
    }
    let factors: Vec<i128> = (0..m.min(n)).map(|i| d[i][i]).filter(|&x| x != 0).collect();
    let rank = factors.len();
    Snf { u, uinv, v, vinv, d, factors, rank }
}

/// Canonical Hermite normal form of the row lattice: row-echelon, positive
/// pivots, entries above each pivot reduced into `[0, pivot)`, zero rows
/// dropped. Two row sets span the same lattice iff their forms are equal.
pub fn hnf_rows(rows: &Mat) -> Mat {
    let mut work: Mat = rows.iter().filter(|r| r.iter().any(|&x| x != 0)).cloned().collect();
    if work.is_empty() {
        return Vec::new();
    }
    let n = work[0].len();
    let mut pivots: Vec<(usize, usize)> = Vec::new(); // (row index in `out`, column)
    let mut out: Mat = Vec::new();
    for col in 0..n {
        // Eliminate `col` among the remaining working rows by gcd steps.
        loop {
            let mut best: Option<usize> = None;
            for (i, r) in work.iter().enumerate() {
                if r[col] != 0 && best.map_or(true, |b| r[col].abs() < work[b][col].abs()) {
                    best = Some(i);
                }
            }
            let Some(b) = best else { break };
            let nonzero: Vec<usize> =
                (0..work.len()).filter(|&i| i != b && work[i][col] != 0).collect();
            if nonzero.is_empty() {
                // `b` becomes the pivot row for this column.
                let mut piv = work.swap_remove(b);
                if piv[col] < 0 {
                    for x in piv.iter_mut() {
                        *x = -*x;
                    }
                }
                out.push(piv);
                pivots.push((out.len() - 1, col));
                break;
            }
            for i in nonzero {
                let q = floor_div(work[i][col], work[b][col]);
                for j in 0..n {
                    let t = q * work[b][j];
                    work[i][j] -= t;
                }
            }
        }
        work.retain(|r| r.iter().any(|&x| x != 0));
    }
    // Reduce entries above each pivot.
    for idx in 0..pivots.len() {
        let (ri, ci) = pivots[idx];
        for above in 0..ri {
            let q = floor_div(out[above][ci], out[ri][ci]);
            if q != 0 {
                for j in 0..n {
                    let t = q * out[ri][j];
                    out[above][j] -= t;
                }
            }
        }
    }
    out
}

/// Canonical coset representative of `v` modulo the row lattice given in
/// canonical HNF (as produced by [`hnf_rows`]).
pub fn hnf_reduce(hnf: &Mat, v: &[i128]) -> Vec<i128> {
    let mut v = v.to_vec();
    for row in hnf {
        let col = row.iter().position(|&x| x != 0).expect("HNF rows are nonzero");
        let q = floor_div(v[col], row[col]);
        if q != 0 {
            for j in 0..v.len() {
                v[j] -= q * row[j];
            }
        }
    }
    v
}

pub fn lattice_contains(hnf: &Mat, v: &[i128]) -> bool {
    hnf_reduce(hnf, v).iter().all(|&x| x == 0)
}

fn gcd_reduce_row(row: &mut [i128]) {
    let mut g: i128 = 0;
    for &x in row.iter() {
        g = gcd(g, x.abs());
    }
    if g > 1 {
        for x in row.iter_mut() {
            *x /= g;
        }
    }
}

pub fn gcd(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

pub fn lcm(a: i128, b: i128) -> i128 {
    if a == 0 || b == 0 {
        0
    } else {
        (a / gcd(a, b)).abs() * b.abs()
    }
}

/// Homogeneous Fourier–Motzkin feasibility: given the cone
/// `{ c in Q^nvars : row . c >= 0 for every row }`, decide whether it contains
/// a point with `c[target] > 0`. Equality constraints are passed as two
/// opposite inequality rows by the caller.
pub fn fm_positive_feasible(rows: Vec<Vec<i128>>, nvars: usize, target: usize) -> bool {
    let mut rows = rows;
    for var in 0..nvars {
        if var == target {
            continue;
        }
        let mut pos: Vec<Vec<i128>> = Vec::new();
        let mut neg: Vec<Vec<i128>> = Vec::new();
        let mut zero: Vec<Vec<i128>> = Vec::new();
        for r in rows {
            match r[var].cmp(&0) {
                std::cmp::Ordering::Greater => pos.push(r),
                std::cmp::Ordering::Less => neg.push(r),
                std::cmp::Ordering::Equal => zero.push(r),
            }
        }
        for p in &pos {
            for q in &neg {
                // p[var] * q + (-q[var]) * p eliminates `var`.
                let (a, b) = (p[var], -q[var]);
                let mut combo: Vec<i128> =
                    (0..nvars).map(|j| a * q[j] + b * p[j]).collect();
                debug_assert_eq!(combo[var], 0);
                gcd_reduce_row(&mut combo);
                if combo.iter().any(|&x| x != 0) {
                    zero.push(combo);
                }
            }
        }
        zero.sort();
        zero.dedup();
        rows = zero;
    }
    // All remaining rows constrain target alone: k * c_target >= 0.
    rows.iter().all(|r| r[target] >= 0)
}

pub fn to_i128_vec(v: &[i64]) -> Vec<i128> {
    v.iter().map(|&x| i128::from(x)).collect()
}

pub fn to_i64_vec(v: &[i128]) -> Vec<i64> {
    v.iter()
        .map(|&x| i64::try_from(x).expect("entry exceeds i64 range"))
        .collect()
}
