//! Small iterative linear solvers used by the capacity and modulus solvers.

use crate::mmspace::MetricMeasureGraph;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgOutcome {
    pub iterations: usize,
    /// Final residual norm relative to the right-hand side norm.
    pub relative_residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Jacobi-preconditioned conjugate gradients for a symmetric positive
/// (semi)definite operator given as a matrix-vector product.
pub fn pcg<A: Fn(&[f64], &mut [f64])>(
    apply: A,
    diag: &[f64],
    b: &[f64],
    x: &mut [f64],
    rel_tol: f64,
    max_iter: usize,
) -> CgOutcome {
    let n = b.len();
    let bnorm = dot(b, b).sqrt();
    if bnorm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return CgOutcome {
            iterations: 0,
            relative_residual: 0.0,
        };
    }
    let inv: Vec<f64> = diag.iter().map(|&d| if d > 0.0 { 1.0 / d } else { 1.0 }).collect();
    let mut ax = vec![0.0; n];
    apply(x, &mut ax);
    let mut r: Vec<f64> = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
    let mut z: Vec<f64> = r.iter().zip(&inv).map(|(r, m)| r * m).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    let mut it = 0;
    let mut rel = dot(&r, &r).sqrt() / bnorm;
    while it < max_iter && rel > rel_tol {
        apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            break;
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        rel = dot(&r, &r).sqrt() / bnorm;
        it += 1;
        if rel <= rel_tol {
            break;
        }
        for i in 0..n {
            z[i] = r[i] * inv[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    CgOutcome {
        iterations: it,
        relative_residual: rel,
    }
}

/// Solves the Dirichlet problem for the weighted graph Laplacian with edge
/// weights `w`: values are prescribed where `fixed[v]` is `Some`, and the
/// weighted sum of differences vanishes at every other vertex. `u` holds the
/// initial guess on entry.
pub fn laplacian_dirichlet(
    g: &MetricMeasureGraph,
    w: &[f64],
    fixed: &[Option<f64>],
    u: &mut [f64],
    rel_tol: f64,
) -> CgOutcome {
    laplacian_solve(g, w, fixed, None, u, rel_tol)
}

/// As [`laplacian_dirichlet`], with an additional source term: solves
/// `(L_w u)(v) = f(v)` at every free vertex.
pub fn laplacian_solve(
    g: &MetricMeasureGraph,
    w: &[f64],
    fixed: &[Option<f64>],
    f: Option<&[f64]>,
    u: &mut [f64],
    rel_tol: f64,
) -> CgOutcome {
    let n = g.n();
    let free: Vec<usize> = (0..n).filter(|&i| fixed[i].is_none()).collect();
    let mut pos = vec![usize::MAX; n];
    for (k, &i) in free.iter().enumerate() {
        pos[i] = k;
    }
    for i in 0..n {
        if let Some(v) = fixed[i] {
            u[i] = v;
        }
    }
    let mut diag = vec![0.0; free.len()];
    let mut b = vec![0.0; free.len()];
    for (k, e) in g.edges.iter().enumerate() {
        for (a, c) in [(e.u, e.v), (e.v, e.u)] {
            if pos[a] != usize::MAX {
                diag[pos[a]] += w[k];
                if let Some(val) = fixed[c] {
                    b[pos[a]] += w[k] * val;
                }
            }
        }
    }
    if let Some(f) = f {
        for (k, &i) in free.iter().enumerate() {
            b[k] += f[i];
        }
    }
    let apply = |x: &[f64], y: &mut [f64]| {
        for (k, &i) in free.iter().enumerate() {
            let mut s = 0.0;
            for &(j, e) in g.neighbors(i) {
                let xj = if pos[j] != usize::MAX { x[pos[j]] } else { 0.0 };
                s += w[e] * (x[k] - xj);
            }
            y[k] = s;
        }
    };
    let mut x: Vec<f64> = free.iter().map(|&i| u[i]).collect();
    let out = pcg(apply, &diag, &b, &mut x, rel_tol, 20 * free.len() + 100);
    for (k, &i) in free.iter().enumerate() {
        u[i] = x[k];
    }
    out
}


/// Dense tableau simplex for `max 1ᵀx` subject to `A x ≤ b`, `x ≥ 0`, with
/// `b ≥ 0` (so the origin is feasible). Returns `(x, y)` where `y ≥ 0` are the
/// optimal multipliers of the row constraints. Uses Bland's rule.
pub fn simplex_packing(a: &[Vec<f64>], b: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let m = b.len();
    let n = if m == 0 { 0 } else { a[0].len() };
    let width = n + m + 1;
    let mut t = vec![vec![0.0; width]; m + 1];
    for r in 0..m {
        t[r][..n].copy_from_slice(&a[r]);
        t[r][n + r] = 1.0;
        t[r][width - 1] = b[r];
    }
    for j in 0..n {
        t[m][j] = -1.0;
    }
    let mut basis: Vec<usize> = (n..n + m).collect();
    let eps = 1e-12;
    for _ in 0..50 * (n + m + 1) {
        let Some(col) = (0..n + m).find(|&j| t[m][j] < -eps) else {
            break;
        };
        let mut row = None;
        let mut best = f64::INFINITY;
        for r in 0..m {
            if t[r][col] > eps {
                let ratio = t[r][width - 1] / t[r][col];
                if ratio < best - 1e-15 || (ratio <= best + 1e-15 && row.map_or(true, |q: usize| basis[r] < basis[q])) {
                    best = ratio.min(best);
                    row = Some(r);
                }
            }
        }
        let Some(row) = row else { break };
        let piv = t[row][col];
        for v in t[row].iter_mut() {
            *v /= piv;
        }
        let pivot_row = t[row].clone();
        for (r, line) in t.iter_mut().enumerate() {
            if r != row && line[col] != 0.0 {
                let f = line[col];
                for (v, pr) in line.iter_mut().zip(&pivot_row) {
                    *v -= f * pr;
                }
            }
        }
        basis[row] = col;
    }
    let mut x = vec![0.0; n];
    for r in 0..m {
        if basis[r] < n {
            x[basis[r]] = t[r][width - 1];
        }
    }
    let y = (0..m).map(|r| t[m][n + r].max(0.0)).collect();
    (x, y)
}
