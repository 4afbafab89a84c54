//! Discrete p-modulus of connecting path families by a cutting-plane method.
//!
//! The separation oracle is a Dijkstra search with edge costs `ρ(e)ℓ(e)`.
//! The restricted problem over the active paths is solved in its dual: one
//! multiplier per path, with `ρ(e) = (c(e) / (p σ(e)))^{1/(p-1)}` where
//! `c(e) = ℓ(e) Σ_{paths ∋ e} λ`. Exact coordinate ascent sweeps are followed
//! by Newton steps on the active multipliers; at `p = 2` the Newton step is
//! the Lagrangian linear system itself. `p = 1` is a linear program and is
//! solved by a dense simplex.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{pcg, simplex_packing};
use crate::mmspace::{MetricMeasureGraph, VertexSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    Connecting,
    /// Paths from the source to any frontier vertex.
    Escape,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveFamilySpec {
    pub source: VertexSet,
    pub target: VertexSet,
    pub kind: FamilyKind,
    pub forbidden: Option<VertexSet>,
}

impl CurveFamilySpec {
    pub fn connecting(source: VertexSet, target: VertexSet) -> Self {
        CurveFamilySpec {
            source,
            target,
            kind: FamilyKind::Connecting,
            forbidden: None,
        }
    }

    pub fn escape(g: &MetricMeasureGraph, source: VertexSet) -> Self {
        CurveFamilySpec {
            source,
            target: g.frontier(),
            kind: FamilyKind::Escape,
            forbidden: None,
        }
    }

    fn validate(&self, g: &MetricMeasureGraph) -> Result<()> {
        if self.source.is_empty() || self.target.is_empty() {
            return Err(Error::input("source and target must be nonempty"));
        }
        if self.source.iter().chain(self.target.iter()).any(|x| x >= g.n()) {
            return Err(Error::input("vertex index out of range"));
        }
        if self.source.iter().any(|x| self.target.contains(x)) {
            return Err(Error::input("source and target intersect"));
        }
        Ok(())
    }
}

/// Edge density, indexed like `MetricMeasureGraph::edges`.
pub type DensityField = Vec<f64>;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModulusResult {
    pub value: f64,
    pub rho: DensityField,
    pub active_paths: Vec<Vec<usize>>,
    /// `1 - (shortest ρ-length)` at termination.
    pub gap: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModulusOptions {
    pub max_iterations: usize,
    /// Violated paths added per cutting-plane round (shortest path to each of
    /// the most violated target vertices).
    pub paths_per_round: usize,
    /// Paths from an earlier solve, reused when they still belong to the family.
    pub warm_start: Vec<Vec<usize>>,
}

impl Default for ModulusOptions {
    fn default() -> Self {
        ModulusOptions {
            max_iterations: 5000,
            paths_per_round: 8,
            warm_start: Vec::new(),
        }
    }
}

fn path_edges(g: &MetricMeasureGraph, path: &[usize]) -> Result<Vec<usize>> {
    path.windows(2)
        .map(|w| {
            g.edge_between(w[0], w[1])
                .ok_or_else(|| Error::input(format!("no edge between #{} and #{}", w[0], w[1])))
        })
        .collect()
}

/// `Σ_{e ∈ path} ρ(e) ℓ(e)` along a vertex walk.
pub fn rho_length(g: &MetricMeasureGraph, rho: &[f64], path: &[usize]) -> Result<f64> {
    Ok(path_edges(g, path)?.into_iter().map(|e| rho[e] * g.edges[e].len).sum())
}

pub fn energy(g: &MetricMeasureGraph, rho: &[f64], p: f64) -> f64 {
    g.edges.iter().zip(rho).map(|(e, r)| e.sigma * r.powf(p)).sum()
}

fn forbidden_mask(g: &MetricMeasureGraph, family: &CurveFamilySpec) -> Vec<bool> {
    family
        .forbidden
        .as_ref()
        .map_or_else(|| vec![false; g.n()], |f| f.mask(g.n()))
}

struct Search {
    dist: Vec<f64>,
    sp: crate::mmspace::ShortestPaths,
}

fn search(g: &MetricMeasureGraph, rho: &[f64], source: &VertexSet, banned: &[bool]) -> Search {
    let sources: Vec<usize> = source.iter().filter(|&s| !banned[s]).collect();
    let sp = g.dijkstra(&sources, |e| {
        let ed = &g.edges[e];
        if banned[ed.u] || banned[ed.v] {
            f64::INFINITY
        } else {
            rho[e] * ed.len
        }
    });
    Search {
        dist: sp.dist.clone(),
        sp,
    }
}

/// A shortest ρ-path from `source` to `target` and its ρ-length.
pub fn shortest_rho_path(
    g: &MetricMeasureGraph,
    rho: &[f64],
    source: &VertexSet,
    target: &VertexSet,
) -> Result<(Vec<usize>, f64)> {
    let banned = vec![false; g.n()];
    let s = search(g, rho, source, &banned);
    let t = target
        .iter()
        .filter(|&t| s.dist[t].is_finite())
        .min_by(|&a, &b| s.dist[a].total_cmp(&s.dist[b]).then(a.cmp(&b)))
        .ok_or(Error::Unreachable)?;
    Ok((s.sp.path_to(t).unwrap(), s.dist[t]))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdmissibilityCheck {
    pub admissible: bool,
    pub shortest_length: f64,
    /// Up to the requested number of shortest paths, most violated first.
    pub worst_paths: Vec<Vec<usize>>,
}

pub fn verify_admissible(
    g: &MetricMeasureGraph,
    rho: &[f64],
    family: &CurveFamilySpec,
    n_paths: usize,
    tol: f64,
) -> Result<AdmissibilityCheck> {
    family.validate(g)?;
    let banned = forbidden_mask(g, family);
    let s = search(g, rho, &family.source, &banned);
    let order = target_order(family, &s.dist, &banned);
    let first = *order.first().ok_or(Error::Unreachable)?;
    let shortest_length = s.dist[first];
    let worst_paths = order.iter().take(n_paths).map(|&t| s.sp.path_to(t).unwrap()).collect();
    Ok(AdmissibilityCheck {
        admissible: shortest_length >= 1.0 - tol,
        shortest_length,
        worst_paths,
    })
}

fn target_order(family: &CurveFamilySpec, dist: &[f64], banned: &[bool]) -> Vec<usize> {
    let mut ts: Vec<usize> = family
        .target
        .iter()
        .filter(|&t| !banned[t] && dist[t].is_finite())
        .collect();
    ts.sort_by(|&a, &b| dist[a].total_cmp(&dist[b]).then(a.cmp(&b)));
    ts
}

/// Active path set and its dual multipliers.
struct Restricted {
    p: f64,
    len: Vec<f64>,
    sigma: Vec<f64>,
    paths: Vec<Vec<usize>>,
    lambda: Vec<f64>,
    c: Vec<f64>,
}

impl Restricted {
    fn new(g: &MetricMeasureGraph, p: f64) -> Self {
        Restricted {
            p,
            len: g.edges.iter().map(|e| e.len).collect(),
            sigma: g.edges.iter().map(|e| e.sigma).collect(),
            paths: Vec::new(),
            lambda: Vec::new(),
            c: vec![0.0; g.m()],
        }
    }

    fn rho_e(&self, e: usize, c: f64) -> f64 {
        if c <= 0.0 {
            0.0
        } else {
            (c / (self.p * self.sigma[e])).powf(1.0 / (self.p - 1.0))
        }
    }

    fn rho(&self) -> Vec<f64> {
        (0..self.c.len()).map(|e| self.rho_e(e, self.c[e])).collect()
    }

    fn slack(&self, i: usize) -> f64 {
        self.paths[i]
            .iter()
            .map(|&e| self.len[e] * self.rho_e(e, self.c[e]))
            .sum::<f64>()
            - 1.0
    }

    fn set_lambda(&mut self, i: usize, t: f64) {
        let d = t - self.lambda[i];
        for &e in &self.paths[i] {
            self.c[e] = (self.c[e] + d * self.len[e]).max(0.0);
        }
        self.lambda[i] = t;
    }

    // Exact maximization of the dual along coordinate i.
    fn coordinate_step(&mut self, i: usize) {
        let base: Vec<f64> = self.paths[i]
            .iter()
            .map(|&e| self.c[e] - self.lambda[i] * self.len[e])
            .collect();
        let h = |t: f64| -> (f64, f64) {
            let mut v = -1.0;
            let mut dv = 0.0;
            for (k, &e) in self.paths[i].iter().enumerate() {
                let c = (base[k] + t * self.len[e]).max(0.0);
                let r = self.rho_e(e, c);
                v += self.len[e] * r;
                if c > 0.0 {
                    dv += self.len[e] * self.len[e] * r / ((self.p - 1.0) * c);
                }
            }
            (v, dv)
        };
        if h(0.0).0 >= 0.0 {
            self.set_lambda(i, 0.0);
            return;
        }
        let mut hi = self.lambda[i].max(1e-300);
        while h(hi).0 < 0.0 {
            hi *= 2.0;
            if !hi.is_finite() {
                return;
            }
        }
        let mut lo = 0.0;
        let mut t = if self.lambda[i] > 0.0 { self.lambda[i] } else { hi };
        for _ in 0..200 {
            let (v, dv) = h(t);
            if v == 0.0 {
                break;
            }
            if v < 0.0 {
                lo = t;
            } else {
                hi = t;
            }
            let newton = if dv > 0.0 { t - v / dv } else { f64::NAN };
            let next = if newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
            if (next - t).abs() <= 1e-15 * t.abs().max(1e-300) {
                t = next;
                break;
            }
            t = next;
        }
        self.set_lambda(i, t);
    }

    fn kkt_violation(&self) -> f64 {
        (0..self.paths.len())
            .map(|i| {
                let s = self.slack(i);
                if self.lambda[i] > 0.0 {
                    s.abs()
                } else {
                    (-s).max(0.0)
                }
            })
            .fold(0.0, f64::max)
    }

    fn residual_norm(&self, act: &[usize]) -> f64 {
        act.iter().map(|&i| self.slack(i).powi(2)).sum::<f64>().sqrt()
    }

    // Newton iterations on the equations slack_i = 0 for paths with λ_i > 0.
    fn newton_polish(&mut self, tol: f64) -> bool {
        let act: Vec<usize> = (0..self.paths.len()).filter(|&i| self.lambda[i] > 0.0).collect();
        if act.is_empty() {
            return false;
        }
        for _ in 0..60 {
            let f: Vec<f64> = act.iter().map(|&i| self.slack(i)).collect();
            let fnorm = f.iter().map(|v| v * v).sum::<f64>().sqrt();
            if f.iter().all(|v| v.abs() <= tol) {
                return true;
            }
            let w: Vec<f64> = (0..self.c.len())
                .map(|e| {
                    if self.c[e] > 0.0 {
                        self.rho_e(e, self.c[e]) / ((self.p - 1.0) * self.c[e])
                    } else {
                        0.0
                    }
                })
                .collect();
            let m = self.c.len();
            let apply = |x: &[f64], y: &mut [f64]| {
                let mut dc = vec![0.0; m];
                for (k, &i) in act.iter().enumerate() {
                    for &e in &self.paths[i] {
                        dc[e] += x[k] * self.len[e];
                    }
                }
                for (k, &i) in act.iter().enumerate() {
                    y[k] = self.paths[i].iter().map(|&e| self.len[e] * w[e] * dc[e]).sum();
                }
            };
            let diag: Vec<f64> = act
                .iter()
                .map(|&i| self.paths[i].iter().map(|&e| self.len[e].powi(2) * w[e]).sum())
                .collect();
            let rhs: Vec<f64> = f.iter().map(|v| -v).collect();
            let mut step = vec![0.0; act.len()];
            pcg(apply, &diag, &rhs, &mut step, 1e-14, 10 * act.len() + 50);
            let old: Vec<f64> = act.iter().map(|&i| self.lambda[i]).collect();
            let mut scale = 1.0;
            let mut accepted = false;
            for _ in 0..40 {
                if old.iter().zip(&step).all(|(l, s)| l + scale * s > 0.0) {
                    for (k, &i) in act.iter().enumerate() {
                        self.set_lambda(i, old[k] + scale * step[k]);
                    }
                    if self.residual_norm(&act) < fnorm {
                        accepted = true;
                        break;
                    }
                }
                scale *= 0.5;
            }
            if !accepted {
                for (k, &i) in act.iter().enumerate() {
                    self.set_lambda(i, old[k]);
                }
                return false;
            }
        }
        false
    }

    fn solve(&mut self, tol: f64) {
        for _round in 0..200 {
            for _ in 0..10 {
                for i in 0..self.paths.len() {
                    self.coordinate_step(i);
                }
            }
            if self.kkt_violation() <= tol {
                return;
            }
            if self.newton_polish(tol * 0.1) && self.kkt_violation() <= tol {
                return;
            }
        }
    }

    fn solve_lp(&mut self, g: &MetricMeasureGraph) -> Vec<f64> {
        let mut used: Vec<usize> = self.paths.iter().flatten().copied().collect();
        used.sort_unstable();
        used.dedup();
        let a: Vec<Vec<f64>> = used
            .iter()
            .map(|&e| {
                self.paths
                    .iter()
                    .map(|p| if p.contains(&e) { g.edges[e].len } else { 0.0 })
                    .collect()
            })
            .collect();
        let b: Vec<f64> = used.iter().map(|&e| g.edges[e].sigma).collect();
        let (_, y) = simplex_packing(&a, &b);
        let mut rho = vec![0.0; g.m()];
        for (k, &e) in used.iter().enumerate() {
            rho[e] = y[k];
        }
        rho
    }
}

/// p-modulus of the family of paths from `family.source` to `family.target`.
pub fn modulus_connecting(
    g: &MetricMeasureGraph,
    family: &CurveFamilySpec,
    p: f64,
    tol: f64,
    opts: &ModulusOptions,
) -> Result<ModulusResult> {
    if !(p >= 1.0) {
        return Err(Error::input("p must be at least 1"));
    }
    if !(tol > 0.0) {
        return Err(Error::input("tol must be positive"));
    }
    family.validate(g)?;
    let banned = forbidden_mask(g, family);
    let target_mask = family.target.mask(g.n());
    let mut rs = Restricted::new(g, p);
    let mut seen = std::collections::HashSet::new();
    for path in &opts.warm_start {
        if let Some(clip) = clip_to_family(path, family, &target_mask, &banned) {
            let edges = path_edges(g, &clip)?;
            if seen.insert(edges.clone()) {
                rs.paths.push(edges);
                rs.lambda.push(0.0);
            }
        }
    }
    let inner_tol = tol / 10.0;
    let mut rho = vec![0.0; g.m()];
    if !rs.paths.is_empty() {
        rho = resolve(&mut rs, g, inner_tol);
    }
    let mut iterations = 0;
    let mut gap;
    let mut converged = false;
    loop {
        let s = search(g, &rho, &family.source, &banned);
        let order = target_order(family, &s.dist, &banned);
        let Some(&first) = order.first() else {
            return Ok(ModulusResult {
                value: 0.0,
                rho: vec![0.0; g.m()],
                active_paths: Vec::new(),
                gap: 0.0,
                iterations,
                converged: true,
            });
        };
        gap = 1.0 - s.dist[first];
        if s.dist[first] >= 1.0 - tol {
            converged = true;
            break;
        }
        if iterations >= opts.max_iterations {
            break;
        }
        iterations += 1;
        let mut added = 0;
        for &t in &order {
            if added >= opts.paths_per_round.max(1) || s.dist[t] >= 1.0 - tol {
                break;
            }
            let path = s.sp.path_to(t).unwrap();
            if path[..path.len() - 1].iter().any(|&x| target_mask[x]) {
                continue;
            }
            let edges = path_edges(g, &path)?;
            if seen.insert(edges.clone()) {
                rs.paths.push(edges);
                rs.lambda.push(0.0);
                added += 1;
            }
        }
        if added == 0 {
            // Every violated path is already active: the inner solve was not tight enough.
            rho = resolve(&mut rs, g, inner_tol * 1e-3);
            let s = search(g, &rho, &family.source, &banned);
            let first = target_order(family, &s.dist, &banned)[0];
            gap = 1.0 - s.dist[first];
            converged = s.dist[first] >= 1.0 - tol;
            break;
        }
        rho = resolve(&mut rs, g, inner_tol);
    }
    let active_paths = rs
        .paths
        .iter()
        .map(|edges| edges_to_vertices(g, edges, &family.source))
        .collect();
    let value = energy(g, &rho, p);
    Ok(ModulusResult {
        value,
        rho,
        active_paths,
        gap,
        iterations,
        converged,
    })
}

fn resolve(rs: &mut Restricted, g: &MetricMeasureGraph, tol: f64) -> Vec<f64> {
    if rs.p == 1.0 {
        rs.solve_lp(g)
    } else {
        rs.solve(tol);
        rs.rho()
    }
}

fn clip_to_family(path: &[usize], family: &CurveFamilySpec, target: &[bool], banned: &[bool]) -> Option<Vec<usize>> {
    if path.is_empty() || !family.source.contains(path[0]) {
        return None;
    }
    let end = path.iter().position(|&x| target[x])?;
    let clip = &path[..=end];
    if clip.iter().any(|&x| banned[x]) {
        return None;
    }
    Some(clip.to_vec())
}

fn edges_to_vertices(g: &MetricMeasureGraph, edges: &[usize], source: &VertexSet) -> Vec<usize> {
    let Some(&e0) = edges.first() else { return Vec::new() };
    let first = &g.edges[e0];
    let mut x = if edges.len() > 1 {
        let second = &g.edges[edges[1]];
        if first.u == second.u || first.u == second.v {
            first.v
        } else {
            first.u
        }
    } else if source.contains(first.u) {
        first.u
    } else {
        first.v
    };
    let mut out = vec![x];
    for &e in edges {
        x = g.edges[e].other(x);
        out.push(x);
    }
    out
}
