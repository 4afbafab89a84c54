//! Discretized metric measure spaces: weighted graphs with vertex measures,
//! edge lengths and edge measures, plus balls, ends and geometry estimates.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap, HashSet};

use ordered_float::OrderedFloat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VertexSpec {
    pub id: String,
    pub mu: f64,
    #[serde(default)]
    pub frontier: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeSpec {
    pub u: String,
    pub v: String,
    pub len: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
}

/// On-disk graph description.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GraphSpec {
    pub vertices: Vec<VertexSpec>,
    pub edges: Vec<EdgeSpec>,
}

impl GraphSpec {
    pub fn vertex(&mut self, id: impl Into<String>, mu: f64, frontier: bool) {
        self.vertices.push(VertexSpec {
            id: id.into(),
            mu,
            frontier,
        });
    }

    pub fn edge(&mut self, u: impl Into<String>, v: impl Into<String>, len: f64, sigma: Option<f64>) {
        self.edges.push(EdgeSpec {
            u: u.into(),
            v: v.into(),
            len,
            sigma,
        });
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Vertex {
    pub id: String,
    pub mu: f64,
    pub frontier: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub len: f64,
    pub sigma: f64,
}

impl Edge {
    pub fn other(&self, x: usize) -> usize {
        if x == self.u {
            self.v
        } else {
            self.u
        }
    }
}

/// Connected undirected graph with positive vertex measures `mu`, edge
/// lengths `len` and edge measures `sigma`. Vertices are addressed by their
/// insertion index; string ids are kept for IO.
#[derive(Debug, Clone)]
pub struct MetricMeasureGraph {
    pub vertices: Vec<Vertex>,
    pub edges: Vec<Edge>,
    adj: Vec<Vec<(usize, usize)>>,
    index: HashMap<String, usize>,
}

/// Sorted, duplicate-free list of vertex indices.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexSet(pub Vec<usize>);

impl VertexSet {
    pub fn new(mut v: Vec<usize>) -> Self {
        v.sort_unstable();
        v.dedup();
        VertexSet(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, x: usize) -> bool {
        self.0.binary_search(&x).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn is_subset(&self, other: &VertexSet) -> bool {
        self.iter().all(|x| other.contains(x))
    }

    pub fn mask(&self, n: usize) -> Vec<bool> {
        let mut m = vec![false; n];
        for x in self.iter() {
            m[x] = true;
        }
        m
    }

    pub fn complement(&self, n: usize) -> VertexSet {
        let m = self.mask(n);
        VertexSet((0..n).filter(|&i| !m[i]).collect())
    }
}

fn check_positive(x: f64, field: &'static str, location: impl FnOnce() -> String) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(Error::NonPositive {
            field,
            location: location(),
        })
    }
}

/// Validates a graph description and builds the adjacency structure.
/// Missing edge measures default to `len * (mu(u) + mu(v)) / 2`.
pub fn build_graph(spec: &GraphSpec) -> Result<MetricMeasureGraph> {
    if spec.vertices.is_empty() {
        return Err(Error::input("graph has no vertices"));
    }
    let mut index = HashMap::with_capacity(spec.vertices.len());
    let mut vertices = Vec::with_capacity(spec.vertices.len());
    for (i, v) in spec.vertices.iter().enumerate() {
        check_positive(v.mu, "vertex measure", || format!("vertex {:?}", v.id))?;
        if index.insert(v.id.clone(), i).is_some() {
            return Err(Error::input(format!("duplicate vertex id {:?}", v.id)));
        }
        vertices.push(Vertex {
            id: v.id.clone(),
            mu: v.mu,
            frontier: v.frontier,
        });
    }
    let mut seen = HashSet::with_capacity(spec.edges.len());
    let mut edges = Vec::with_capacity(spec.edges.len());
    let mut adj = vec![Vec::new(); vertices.len()];
    for e in &spec.edges {
        let u = *index.get(&e.u).ok_or_else(|| Error::UnknownVertex(e.u.clone()))?;
        let v = *index.get(&e.v).ok_or_else(|| Error::UnknownVertex(e.v.clone()))?;
        let loc = || format!("edge ({:?}, {:?})", e.u, e.v);
        if u == v {
            return Err(Error::input(format!("self-loop at vertex {:?}", e.u)));
        }
        if !seen.insert((u.min(v), u.max(v))) {
            return Err(Error::input(format!("duplicate edge {}", loc())));
        }
        check_positive(e.len, "edge length", loc)?;
        let sigma = match e.sigma {
            Some(s) => {
                check_positive(s, "edge measure", loc)?;
                s
            }
            None => e.len * (vertices[u].mu + vertices[v].mu) / 2.0,
        };
        let k = edges.len();
        edges.push(Edge {
            u,
            v,
            len: e.len,
            sigma,
        });
        adj[u].push((v, k));
        adj[v].push((u, k));
    }
    for list in adj.iter_mut() {
        list.sort_unstable();
    }
    let g = MetricMeasureGraph {
        vertices,
        edges,
        adj,
        index,
    };
    let reach = g.reachable_from(0);
    if reach.iter().any(|r| !r) {
        let comp = g.component_of((0..g.n()).find(|&i| !reach[i]).unwrap());
        return Err(Error::Disconnected(
            comp.iter().map(|i| g.vertices[i].id.clone()).collect(),
        ));
    }
    Ok(g)
}

impl MetricMeasureGraph {
    pub fn n(&self) -> usize {
        self.vertices.len()
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    /// Neighbours of `x` as `(vertex, edge index)` pairs, sorted by vertex.
    pub fn neighbors(&self, x: usize) -> &[(usize, usize)] {
        &self.adj[x]
    }

    pub fn idx(&self, id: &str) -> Result<usize> {
        self.index
            .get(id)
            .copied()
            .ok_or_else(|| Error::UnknownVertex(id.to_string()))
    }

    pub fn set_from_ids<S: AsRef<str>>(&self, ids: &[S]) -> Result<VertexSet> {
        let v = ids.iter().map(|s| self.idx(s.as_ref())).collect::<Result<Vec<_>>>()?;
        Ok(VertexSet::new(v))
    }

    pub fn ids(&self, set: &VertexSet) -> Vec<String> {
        set.iter().map(|i| self.vertices[i].id.clone()).collect()
    }

    pub fn edge_between(&self, a: usize, b: usize) -> Option<usize> {
        self.adj[a]
            .binary_search_by(|&(w, _)| w.cmp(&b))
            .ok()
            .map(|k| self.adj[a][k].1)
    }

    pub fn total_mass(&self) -> f64 {
        self.vertices.iter().map(|v| v.mu).sum()
    }

    pub fn mass(&self, set: &VertexSet) -> f64 {
        set.iter().map(|i| self.vertices[i].mu).sum()
    }

    pub fn frontier(&self) -> VertexSet {
        VertexSet((0..self.n()).filter(|&i| self.vertices[i].frontier).collect())
    }

    pub fn to_spec(&self) -> GraphSpec {
        GraphSpec {
            vertices: self
                .vertices
                .iter()
                .map(|v| VertexSpec {
                    id: v.id.clone(),
                    mu: v.mu,
                    frontier: v.frontier,
                })
                .collect(),
            edges: self
                .edges
                .iter()
                .map(|e| EdgeSpec {
                    u: self.vertices[e.u].id.clone(),
                    v: self.vertices[e.v].id.clone(),
                    len: e.len,
                    sigma: Some(e.sigma),
                })
                .collect(),
        }
    }

    fn reachable_from(&self, s: usize) -> Vec<bool> {
        let mut seen = vec![false; self.n()];
        let mut stack = vec![s];
        seen[s] = true;
        while let Some(x) = stack.pop() {
            for &(y, _) in &self.adj[x] {
                if !seen[y] {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
        seen
    }

    fn component_of(&self, s: usize) -> VertexSet {
        let r = self.reachable_from(s);
        VertexSet((0..self.n()).filter(|&i| r[i]).collect())
    }

    /// Connected components of the subgraph induced on vertices with `keep[v]`.
    pub fn components(&self, keep: &[bool]) -> Vec<VertexSet> {
        let mut label = vec![usize::MAX; self.n()];
        let mut out = Vec::new();
        for s in 0..self.n() {
            if !keep[s] || label[s] != usize::MAX {
                continue;
            }
            let c = out.len();
            let mut members = vec![s];
            label[s] = c;
            let mut stack = vec![s];
            while let Some(x) = stack.pop() {
                for &(y, _) in &self.adj[x] {
                    if keep[y] && label[y] == usize::MAX {
                        label[y] = c;
                        members.push(y);
                        stack.push(y);
                    }
                }
            }
            out.push(VertexSet::new(members));
        }
        out
    }

    /// Multi-source Dijkstra with nonnegative edge costs `cost(edge index)`.
    /// Ties are settled in favour of the smaller vertex index, both in the
    /// pop order and in the choice of predecessor.
    pub fn dijkstra<F: Fn(usize) -> f64>(&self, sources: &[usize], cost: F) -> ShortestPaths {
        let n = self.n();
        let mut dist = vec![f64::INFINITY; n];
        let mut pred: Vec<Option<(usize, usize)>> = vec![None; n];
        let mut done = vec![false; n];
        let mut heap = BinaryHeap::new();
        for &s in sources {
            dist[s] = 0.0;
            heap.push(Reverse((OrderedFloat(0.0), s)));
        }
        while let Some(Reverse((OrderedFloat(d), x))) = heap.pop() {
            if done[x] || d > dist[x] {
                continue;
            }
            done[x] = true;
            for &(y, e) in &self.adj[x] {
                if done[y] {
                    continue;
                }
                let nd = d + cost(e);
                let better = nd < dist[y] || (nd == dist[y] && pred[y].map_or(false, |(p, _)| x < p));
                if better {
                    let improved = nd < dist[y];
                    dist[y] = nd;
                    pred[y] = Some((x, e));
                    if improved {
                        heap.push(Reverse((OrderedFloat(nd), y)));
                    }
                }
            }
        }
        ShortestPaths { dist, pred }
    }

    /// Graph distances from `x` with respect to edge lengths.
    pub fn distances(&self, x: usize) -> Vec<f64> {
        self.dijkstra(&[x], |e| self.edges[e].len).dist
    }

    pub fn distances_from_set(&self, set: &VertexSet) -> Vec<f64> {
        self.dijkstra(&set.0, |e| self.edges[e].len).dist
    }
}

#[derive(Debug, Clone)]
pub struct ShortestPaths {
    pub dist: Vec<f64>,
    /// `(previous vertex, edge)` on a shortest path; `None` for sources and unreachable vertices.
    pub pred: Vec<Option<(usize, usize)>>,
}

impl ShortestPaths {
    /// Vertex sequence from a source to `t`, or `None` if unreachable.
    pub fn path_to(&self, t: usize) -> Option<Vec<usize>> {
        if !self.dist[t].is_finite() {
            return None;
        }
        let mut path = vec![t];
        let mut x = t;
        while let Some((p, _)) = self.pred[x] {
            path.push(p);
            x = p;
        }
        path.reverse();
        Some(path)
    }
}

pub fn ball_from_dist(dist: &[f64], r: f64) -> VertexSet {
    VertexSet((0..dist.len()).filter(|&i| dist[i] < r).collect())
}

/// Open ball `{y : d(x0, y) < r}`.
pub fn ball(g: &MetricMeasureGraph, x0: usize, r: f64) -> Result<VertexSet> {
    if x0 >= g.n() {
        return Err(Error::UnknownVertex(format!("#{x0}")));
    }
    if !(r >= 0.0) {
        return Err(Error::input("ball radius must be nonnegative"));
    }
    Ok(ball_from_dist(&g.distances(x0), r))
}

/// `(r, mu(B(x0, r)))` for each radius.
pub fn volume_growth(g: &MetricMeasureGraph, x0: usize, radii: &[f64]) -> Result<Vec<(f64, f64)>> {
    if radii.is_empty() {
        return Err(Error::input("empty radii list"));
    }
    check_increasing(radii)?;
    let dist = g.distances(x0);
    Ok(radii
        .iter()
        .map(|&r| {
            let v = (0..g.n()).filter(|&i| dist[i] < r).map(|i| g.vertices[i].mu).sum();
            (r, v)
        })
        .collect())
}

fn check_increasing(radii: &[f64]) -> Result<()> {
    if radii.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::input("radii must be strictly increasing"));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EndsDecomposition {
    pub x0: usize,
    pub r: f64,
    pub ends: Vec<VertexSet>,
    pub bounded_components: Vec<VertexSet>,
}

/// Splits the complement of `B(x0, r)` into components; those meeting a
/// frontier vertex stand in for ends.
pub fn detect_ends(g: &MetricMeasureGraph, x0: usize, r: f64) -> Result<EndsDecomposition> {
    let b = ball(g, x0, r)?;
    if b.is_empty() {
        return Err(Error::input("ball is empty"));
    }
    if b.len() == g.n() {
        return Err(Error::input("ball covers the whole graph"));
    }
    let keep: Vec<bool> = b.mask(g.n()).iter().map(|x| !x).collect();
    let (ends, bounded_components) = g
        .components(&keep)
        .into_iter()
        .partition(|c| c.iter().any(|i| g.vertices[i].frontier));
    Ok(EndsDecomposition {
        x0,
        r,
        ends,
        bounded_components,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EndsProfile {
    pub counts: Vec<(f64, usize)>,
    /// Smallest sampled radius from which the end count stays constant
    /// through the last sample.
    pub stabilization_radius: Option<f64>,
}

/// End counts along increasing radii. Radii whose ball is empty or covers
/// the graph are skipped.
pub fn ends_profile(g: &MetricMeasureGraph, x0: usize, radii: &[f64]) -> Result<EndsProfile> {
    check_increasing(radii)?;
    let mut counts = Vec::new();
    for &r in radii {
        match detect_ends(g, x0, r) {
            Ok(d) => counts.push((r, d.ends.len())),
            Err(Error::Input(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    let stabilization_radius = counts.last().map(|&(_, last)| {
        let mut k = counts.len() - 1;
        while k > 0 && counts[k - 1].1 == last {
            k -= 1;
        }
        counts[k].0
    });
    Ok(EndsProfile {
        counts,
        stabilization_radius,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeometryParams {
    pub r0: f64,
    pub c_d: f64,
    /// Lower bound only: the largest Poincaré ratio seen over random test potentials.
    pub c_pi_lower_bound: f64,
    pub lambda: f64,
    /// Lower mass exponent (largest log-log slope of ball volume).
    pub q: f64,
    /// Upper mass exponent (smallest log-log slope of ball volume).
    pub s: f64,
    pub beta0: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeometryOptions {
    pub p: f64,
    pub lambda: f64,
    pub potentials: usize,
    pub seed: u64,
}

impl Default for GeometryOptions {
    fn default() -> Self {
        GeometryOptions {
            p: 2.0,
            lambda: 1.0,
            potentials: 8,
            seed: 0,
        }
    }
}

/// Measure-density threshold `17 log(C_d) / (3 R0)`.
pub fn beta0(c_d: f64, r0: f64) -> f64 {
    17.0 * c_d.ln() / (3.0 * r0)
}

pub fn estimate_geometry(
    g: &MetricMeasureGraph,
    scales: &[f64],
    sample: &VertexSet,
    opts: &GeometryOptions,
) -> Result<GeometryParams> {
    if scales.len() < 2 {
        return Err(Error::input("at least two scales are required"));
    }
    if scales.iter().any(|&r| !(r > 0.0)) {
        return Err(Error::input("scales must be positive"));
    }
    if sample.is_empty() {
        return Err(Error::input("empty sample"));
    }
    if opts.lambda < 1.0 || opts.p < 1.0 {
        return Err(Error::input("need lambda >= 1 and p >= 1"));
    }
    let mut scales = scales.to_vec();
    scales.sort_by(f64::total_cmp);
    scales.dedup();
    let r0 = *scales.last().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut c_d: f64 = 1.0;
    let mut q = f64::NEG_INFINITY;
    let mut s = f64::INFINITY;
    let mut c_pi: f64 = 0.0;
    for x in sample.iter() {
        let dist = g.distances(x);
        let vol = |r: f64| -> f64 { (0..g.n()).filter(|&i| dist[i] < r).map(|i| g.vertices[i].mu).sum() };
        let vols: Vec<f64> = scales.iter().map(|&r| vol(r)).collect();
        for (k, &r) in scales.iter().enumerate() {
            c_d = c_d.max(vol(2.0 * r) / vols[k]);
            for j in k + 1..scales.len() {
                let slope = (vols[j] / vols[k]).ln() / (scales[j] / scales[k]).ln();
                q = q.max(slope);
                s = s.min(slope);
            }
            c_pi = c_pi.max(poincare_ratio(g, &dist, r, opts, &mut rng));
        }
    }
    Ok(GeometryParams {
        r0,
        c_d,
        c_pi_lower_bound: c_pi,
        lambda: opts.lambda,
        q,
        s,
        beta0: beta0(c_d, r0),
    })
}

// Largest ratio  avg_B |u - u_B| / (r (avg_{λB} g_u^p)^{1/p})  over random
// potentials, where g_u(v) is the largest incident difference quotient.
fn poincare_ratio(g: &MetricMeasureGraph, dist: &[f64], r: f64, opts: &GeometryOptions, rng: &mut ChaCha8Rng) -> f64 {
    let inner: Vec<usize> = (0..g.n()).filter(|&i| dist[i] < r).collect();
    let outer: Vec<usize> = (0..g.n()).filter(|&i| dist[i] < opts.lambda * r).collect();
    if inner.len() < 2 {
        return 0.0;
    }
    let mu_in: f64 = inner.iter().map(|&i| g.vertices[i].mu).sum();
    let mu_out: f64 = outer.iter().map(|&i| g.vertices[i].mu).sum();
    let mut best: f64 = 0.0;
    for k in 0..opts.potentials {
        let u: Vec<f64> = if k % 2 == 0 {
            let a = inner[rng.gen_range(0..inner.len())];
            let da = g.distances(a);
            da.iter().map(|d| d.min(2.0 * r)).collect()
        } else {
            (0..g.n()).map(|_| rng.gen::<f64>()).collect()
        };
        let mean = inner.iter().map(|&i| u[i] * g.vertices[i].mu).sum::<f64>() / mu_in;
        let lhs = inner
            .iter()
            .map(|&i| (u[i] - mean).abs() * g.vertices[i].mu)
            .sum::<f64>()
            / mu_in;
        let grad_p = outer
            .iter()
            .map(|&i| {
                let gv = g
                    .neighbors(i)
                    .iter()
                    .map(|&(j, e)| (u[i] - u[j]).abs() / g.edges[e].len)
                    .fold(0.0, f64::max);
                gv.powf(opts.p) * g.vertices[i].mu
            })
            .sum::<f64>()
            / mu_out;
        let rhs = r * grad_p.powf(1.0 / opts.p);
        if rhs > 0.0 {
            best = best.max(lhs / rhs);
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExhaustionSequence {
    pub radii: Vec<f64>,
    pub sets: Vec<VertexSet>,
    /// `gaps[j] = dist(sets[j], X \ sets[j+1])`.
    pub gaps: Vec<f64>,
    /// `shell_measures[j] = mu(sets[j+1] \ sets[j])`.
    pub shell_measures: Vec<f64>,
}

/// Nested balls `B(x0, r_j)` with their gaps and shell measures.
pub fn annular_exhaustion(g: &MetricMeasureGraph, x0: usize, radii: &[f64]) -> Result<ExhaustionSequence> {
    if radii.len() < 2 {
        return Err(Error::input("need at least two radii"));
    }
    check_increasing(radii)?;
    let dist = g.distances(x0);
    let sets: Vec<VertexSet> = radii.iter().map(|&r| ball_from_dist(&dist, r)).collect();
    let mut gaps = Vec::new();
    let mut shell_measures = Vec::new();
    for j in 0..sets.len() - 1 {
        if sets[j] == sets[j + 1] {
            return Err(Error::input(format!("balls {j} and {} coincide", j + 1)));
        }
        if sets[j].is_empty() {
            return Err(Error::input(format!("ball {j} is empty")));
        }
        if sets[j + 1].len() == g.n() {
            return Err(Error::input(format!("ball {} covers the whole graph", j + 1)));
        }
        let d = g.distances_from_set(&sets[j]);
        let inner = sets[j + 1].mask(g.n());
        let gap = (0..g.n())
            .filter(|&i| !inner[i])
            .map(|i| d[i])
            .fold(f64::INFINITY, f64::min);
        gaps.push(gap);
        shell_measures.push(g.mass(&sets[j + 1]) - g.mass(&sets[j]));
    }
    Ok(ExhaustionSequence {
        radii: radii.to_vec(),
        sets,
        gaps,
        shell_measures,
    })
}

pub fn read_graph_json(text: &str) -> Result<MetricMeasureGraph> {
    let spec: GraphSpec = serde_json::from_str(text).map_err(|e| Error::input(format!("graph JSON: {e}")))?;
    build_graph(&spec)
}

pub fn write_graph_json(g: &MetricMeasureGraph) -> String {
    serde_json::to_string_pretty(&g.to_spec()).expect("graph spec serializes")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(n: usize) -> MetricMeasureGraph {
        let mut s = GraphSpec::default();
        for i in 0..n {
            s.vertex(format!("v{i}"), 1.0, false);
        }
        for i in 1..n {
            s.edge(format!("v{}", i - 1), format!("v{i}"), 1.0, None);
        }
        build_graph(&s).unwrap()
    }

    #[test]
    fn minimal_graph() {
        let mut s = GraphSpec::default();
        s.vertex("a", 1.0, false);
        s.vertex("b", 1.0, false);
        s.edge("a", "b", 1.0, Some(1.0));
        let g = build_graph(&s).unwrap();
        assert_eq!(g.m(), 1);
    }

    #[test]
    fn zero_sigma_rejected() {
        let mut s = GraphSpec::default();
        s.vertex("a", 1.0, false);
        s.vertex("b", 1.0, false);
        s.edge("a", "b", 1.0, Some(0.0));
        let err = build_graph(&s).unwrap_err();
        assert!(err.to_string().contains("nonpositive edge measure"), "{err}");
    }

    #[test]
    fn disconnected_rejected() {
        let mut s = GraphSpec::default();
        for id in ["a", "b", "c"] {
            s.vertex(id, 1.0, false);
        }
        s.edge("a", "b", 1.0, None);
        match build_graph(&s) {
            Err(Error::Disconnected(c)) => assert_eq!(c, vec!["c".to_string()]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn default_sigma_averages_measure() {
        let mut s = GraphSpec::default();
        s.vertex("a", 1.0, false);
        s.vertex("b", 3.0, false);
        s.edge("a", "b", 2.0, None);
        let g = build_graph(&s).unwrap();
        assert_eq!(g.edges[0].sigma, 4.0);
    }

    #[test]
    fn strict_balls() {
        let g = path(3);
        assert_eq!(ball(&g, 0, 1.5).unwrap(), VertexSet(vec![0, 1]));
        assert!(ball(&g, 0, 0.0).unwrap().is_empty());
        assert_eq!(ball(&g, 0, 1.0).unwrap(), VertexSet(vec![0]));
    }

    #[test]
    fn volume_on_path() {
        let g = path(7);
        let v = volume_growth(&g, 3, &[1.5, 100.0]).unwrap();
        assert_eq!(v[0].1, 3.0);
        assert_eq!(v[1].1, 7.0);
        assert!(volume_growth(&g, 3, &[]).is_err());
    }

    #[test]
    fn star_has_three_ends() {
        let mut s = GraphSpec::default();
        s.vertex("c", 1.0, false);
        for a in 0..3 {
            for k in 1..=5 {
                s.vertex(format!("r{a}_{k}"), 1.0, k == 5);
                let prev = if k == 1 {
                    "c".to_string()
                } else {
                    format!("r{a}_{}", k - 1)
                };
                s.edge(prev, format!("r{a}_{k}"), 1.0, None);
            }
        }
        let g = build_graph(&s).unwrap();
        let d = detect_ends(&g, 0, 1.0).unwrap();
        assert_eq!(d.ends.len(), 3);
        assert!(d.bounded_components.is_empty());
    }

    #[test]
    fn path_with_one_frontier_end() {
        let mut s = GraphSpec::default();
        for i in 0..9 {
            s.vertex(format!("v{i}"), 1.0, i == 8);
        }
        for i in 1..9 {
            s.edge(format!("v{}", i - 1), format!("v{i}"), 1.0, None);
        }
        let g = build_graph(&s).unwrap();
        let d = detect_ends(&g, 4, 1.5).unwrap();
        assert_eq!(d.ends, vec![VertexSet(vec![6, 7, 8])]);
        assert_eq!(d.bounded_components, vec![VertexSet(vec![0, 1, 2])]);
        assert!(detect_ends(&g, 4, 100.0).is_err());
    }

    #[test]
    fn beta0_value() {
        assert!((beta0(4.0, 1.0) - 17.0 * 4f64.ln() / 3.0).abs() < 1e-15);
        assert!((beta0(4.0, 1.0) - 7.8557).abs() < 1e-4);
        assert_eq!(beta0(1.0, 1.0), 0.0);
    }

    #[test]
    fn doubling_on_path() {
        let g = path(41);
        let sample = VertexSet((10..31).collect());
        let p = estimate_geometry(&g, &[1.0, 2.0, 4.0], &sample, &GeometryOptions::default()).unwrap();
        assert!(p.c_d >= 1.5 && p.c_d <= 3.0, "{}", p.c_d);
        assert!(p.c_pi_lower_bound > 0.0);
        assert!(estimate_geometry(&g, &[1.0], &sample, &GeometryOptions::default()).is_err());
    }

    #[test]
    fn exhaustion_on_path() {
        let g = path(10);
        // Vertex balls B(1,1) = {1}, B(1,2) = {0,1,2}, B(1,3) = {0..3}: the
        // nearest vertex outside the next ball is two unit edges away.
        let ex = annular_exhaustion(&g, 1, &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(ex.gaps, vec![2.0, 2.0]);
        assert_eq!(
            ex.shell_measures.iter().sum::<f64>(),
            g.mass(&ex.sets[2]) - g.mass(&ex.sets[0])
        );
        assert!(annular_exhaustion(&g, 1, &[1.2, 1.8]).is_err());
    }

    #[test]
    fn json_round_trip() {
        let g = path(4);
        let h = read_graph_json(&write_graph_json(&g)).unwrap();
        assert_eq!(h.edges, g.edges);
        assert_eq!(h.vertices, g.vertices);
    }
}
