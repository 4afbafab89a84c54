//! Hyperbolicity estimates and the uniformized metric `d_ε` and measure
//! `μ_β` obtained from the densities `e^{-ε d(·, z0)}` and `e^{-β d(·, z0)}`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::mmspace::{MetricMeasureGraph, VertexSet};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeltaEstimate {
    /// Four-point constant: the largest value of `(L - M) / 2` where
    /// `L >= M` are the two largest of the three pair sums of a quadruple.
    /// Related to, but not the same number as, the thin-triangle constant.
    pub delta: f64,
    pub quadruples_evaluated: u64,
    pub quadruples_total: f64,
    pub exhaustive: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HyperbolicityReport {
    pub delta: DeltaEstimate,
    pub m: f64,
    pub z0: usize,
}

fn all_pairs(g: &MetricMeasureGraph) -> Vec<Vec<f64>> {
    (0..g.n()).map(|x| g.distances(x)).collect()
}

fn four_point(d: &[Vec<f64>], x: usize, y: usize, z: usize, w: usize) -> f64 {
    let mut s = [d[x][y] + d[z][w], d[x][z] + d[y][w], d[x][w] + d[y][z]];
    s.sort_by(|a, b| b.total_cmp(a));
    (s[0] - s[1]) / 2.0
}

/// Four-point hyperbolicity constant. All ordered quadruples are scanned
/// when `n^4 <= budget`; otherwise `budget` uniformly random quadruples
/// drawn from a generator seeded with `seed`.
pub fn gromov_delta(g: &MetricMeasureGraph, budget: u64, seed: u64) -> DeltaEstimate {
    let n = g.n();
    let d = all_pairs(g);
    let total = (n as f64).powi(4);
    let mut delta: f64 = 0.0;
    if total <= budget as f64 {
        // The defect is symmetric under permutations, so increasing
        // quadruples suffice.
        let mut count = 0u64;
        for x in 0..n {
            for y in x + 1..n {
                for z in y + 1..n {
                    for w in z + 1..n {
                        delta = delta.max(four_point(&d, x, y, z, w));
                        count += 1;
                    }
                }
            }
        }
        return DeltaEstimate {
            delta,
            quadruples_evaluated: count,
            quadruples_total: total,
            exhaustive: true,
        };
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..budget {
        let q: [usize; 4] = std::array::from_fn(|_| rng.gen_range(0..n));
        delta = delta.max(four_point(&d, q[0], q[1], q[2], q[3]));
    }
    DeltaEstimate {
        delta,
        quadruples_evaluated: budget,
        quadruples_total: total,
        exhaustive: false,
    }
}

/// Largest distance from a vertex to the union of shortest paths from `z0`
/// to the frontier vertices (the stand-ins for geodesic rays).
pub fn rough_starlike_constant(g: &MetricMeasureGraph, z0: usize) -> Result<f64> {
    let frontier = g.frontier();
    if frontier.is_empty() {
        return Err(Error::input("graph has no frontier vertices"));
    }
    let sp = g.dijkstra(&[z0], |e| g.edges[e].len);
    let mut on_ray = Vec::new();
    for f in frontier.iter() {
        on_ray.extend(sp.path_to(f).expect("graph is connected"));
    }
    let rays = VertexSet::new(on_ray);
    let d = g.distances_from_set(&rays);
    Ok(d.iter().copied().fold(0.0, f64::max))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UniformizationParams {
    pub z0: usize,
    pub eps: f64,
    pub beta: f64,
}

/// Base graph with the conformally deformed edge lengths `w_eps` and the
/// measures `mu_beta`.
#[derive(Debug, Clone)]
pub struct UniformizedGraph<'a> {
    pub base: &'a MetricMeasureGraph,
    pub params: UniformizationParams,
    /// `d(z0, ·)` in the base metric.
    pub base_dist: Vec<f64>,
    pub w_eps: Vec<f64>,
    pub mu_beta: Vec<f64>,
}

/// Exact integral of `e^{-eps t}` over an edge of length `len` along which
/// the base distance to `z0` runs linearly from `a` to `b`.
fn edge_weight(len: f64, a: f64, b: f64, eps: f64) -> f64 {
    if a == b {
        len * (-eps * a).exp()
    } else {
        len * ((-eps * a).exp() - (-eps * b).exp()) / (eps * (b - a))
    }
}

pub fn uniformized_graph(g: &MetricMeasureGraph, params: UniformizationParams) -> Result<UniformizedGraph<'_>> {
    if !(params.eps > 0.0) || !(params.beta > 0.0) {
        return Err(Error::input("eps and beta must be positive"));
    }
    if params.z0 >= g.n() {
        return Err(Error::UnknownVertex(format!("#{}", params.z0)));
    }
    let base_dist = g.distances(params.z0);
    let w_eps = g
        .edges
        .iter()
        .map(|e| edge_weight(e.len, base_dist[e.u], base_dist[e.v], params.eps))
        .collect();
    let mu_beta = g
        .vertices
        .iter()
        .zip(&base_dist)
        .map(|(v, &d)| (-params.beta * d).exp() * v.mu)
        .collect();
    Ok(UniformizedGraph {
        base: g,
        params,
        base_dist,
        w_eps,
        mu_beta,
    })
}

impl UniformizedGraph<'_> {
    pub fn rho_eps(&self, v: usize) -> f64 {
        (-self.params.eps * self.base_dist[v]).exp()
    }

    /// `d_eps(x, ·)`.
    pub fn d_eps_from(&self, x: usize) -> Vec<f64> {
        self.base.dijkstra(&[x], |e| self.w_eps[e]).dist
    }

    pub fn d_eps(&self, x: usize, y: usize) -> f64 {
        self.d_eps_from(x)[y]
    }

    /// Average of `rho_eps` along edge `e`, so that the `d_eps` length of the
    /// edge is `len * average`.
    pub fn edge_rho_average(&self, e: usize) -> f64 {
        self.w_eps[e] / self.base.edges[e].len
    }

    /// Edge gradients `|Δu| / w_eps(e)` in the deformed metric.
    pub fn gradient(&self, u: &[f64]) -> Vec<f64> {
        self.base
            .edges
            .iter()
            .zip(&self.w_eps)
            .map(|(e, w)| (u[e.u] - u[e.v]).abs() / w)
            .collect()
    }

    pub fn total_mu_beta(&self) -> f64 {
        self.mu_beta.iter().sum()
    }

    /// `d_eps` from every vertex to the frontier set.
    pub fn boundary_distances(&self) -> Result<Vec<f64>> {
        let f = self.base.frontier();
        if f.is_empty() {
            return Err(Error::input("graph has no frontier vertices"));
        }
        Ok(self.base.dijkstra(&f.0, |e| self.w_eps[e]).dist)
    }

    /// Advisory messages about the parameter regime: `beta <= beta0` and
    /// `beta < eps * p`.
    pub fn warnings(&self, beta0: f64, p: f64) -> Vec<String> {
        let mut out = Vec::new();
        if self.params.beta <= beta0 {
            out.push(format!("beta = {} does not exceed beta0 = {beta0}", self.params.beta));
        }
        if self.params.beta < self.params.eps * p {
            out.push(format!(
                "beta = {} is below eps*p = {}; gradient integrability runs the other way",
                self.params.beta,
                self.params.eps * p
            ));
        }
        out
    }
}

/// `d_eps(v, frontier)`.
pub fn boundary_distance(ug: &UniformizedGraph, v: usize) -> Result<f64> {
    if v >= ug.base.n() {
        return Err(Error::UnknownVertex(format!("#{v}")));
    }
    Ok(ug.boundary_distances()?[v])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonSample {
    pub vertex: usize,
    pub rho: f64,
    pub boundary_distance: f64,
    /// `max(rho / dist, dist / rho)`.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonEstimates {
    pub k1: f64,
    pub samples: Vec<ComparisonSample>,
}

/// Empirical comparison constant between `rho_eps` and the distance to the
/// frontier. Frontier vertices (distance 0) are skipped.
pub fn comparison_constants(ug: &UniformizedGraph, sample: &[usize]) -> Result<ComparisonEstimates> {
    let dist = ug.boundary_distances()?;
    let mut samples = Vec::new();
    let mut k1: f64 = 1.0;
    for &v in sample {
        if v >= ug.base.n() {
            return Err(Error::UnknownVertex(format!("#{v}")));
        }
        if ug.base.vertices[v].frontier {
            continue;
        }
        let rho = ug.rho_eps(v);
        let d = dist[v];
        let ratio = (rho / d).max(d / rho);
        k1 = k1.max(ratio);
        samples.push(ComparisonSample {
            vertex: v,
            rho,
            boundary_distance: d,
            ratio,
        });
    }
    Ok(ComparisonEstimates { k1, samples })
}

/// Single-linkage clusters of frontier vertices: two frontier vertices are
/// linked when their `d_eps` distance is at most `eta`.
pub fn boundary_clusters(ug: &UniformizedGraph, eta: f64) -> Result<Vec<VertexSet>> {
    if !(eta > 0.0) {
        return Err(Error::input("eta must be positive"));
    }
    let f: Vec<usize> = ug.base.frontier().0;
    let mut parent: Vec<usize> = (0..f.len()).collect();
    fn root(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for (a, &x) in f.iter().enumerate() {
        let d = ug.d_eps_from(x);
        for (b, &y) in f.iter().enumerate().skip(a + 1) {
            if d[y] <= eta {
                let (ra, rb) = (root(&mut parent, a), root(&mut parent, b));
                parent[ra.max(rb)] = ra.min(rb);
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; f.len()];
    for a in 0..f.len() {
        let r = root(&mut parent, a);
        if slot[r] == usize::MAX {
            slot[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[r]].push(f[a]);
    }
    Ok(groups.into_iter().map(VertexSet::new).collect())
}
