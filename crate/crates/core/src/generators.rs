//! Deterministic graph families used by tests, examples and the CLI.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::mmspace::{build_graph, GraphSpec, MetricMeasureGraph};

/// Unit path `v0 - v1 - ... - v{n-1}` with unit measures; the last vertex is
/// frontier.
pub fn path(n: usize) -> Result<MetricMeasureGraph> {
    if n < 2 {
        return Err(Error::input("path needs at least 2 vertices"));
    }
    let mut s = GraphSpec::default();
    for i in 0..n {
        s.vertex(format!("v{i}"), 1.0, i + 1 == n);
    }
    for i in 0..n - 1 {
        s.edge(format!("v{i}"), format!("v{}", i + 1), 1.0, None);
    }
    build_graph(&s)
}

/// Unit cycle on `n` vertices, no frontier.
pub fn cycle(n: usize) -> Result<MetricMeasureGraph> {
    if n < 3 {
        return Err(Error::input("cycle needs at least 3 vertices"));
    }
    let mut s = GraphSpec::default();
    for i in 0..n {
        s.vertex(format!("v{i}"), 1.0, false);
    }
    for i in 0..n {
        s.edge(format!("v{i}"), format!("v{}", (i + 1) % n), 1.0, None);
    }
    build_graph(&s)
}

/// `w x h` unit grid with ids `x_y`. With `boundary_frontier` the outer
/// layer is marked frontier.
pub fn grid(w: usize, h: usize, boundary_frontier: bool) -> Result<MetricMeasureGraph> {
    if w < 2 || h < 2 {
        return Err(Error::input("grid sides must be at least 2"));
    }
    let id = |x: usize, y: usize| format!("{x}_{y}");
    let mut s = GraphSpec::default();
    for y in 0..h {
        for x in 0..w {
            let edge = x == 0 || y == 0 || x + 1 == w || y + 1 == h;
            s.vertex(id(x, y), 1.0, boundary_frontier && edge);
        }
    }
    for y in 0..h {
        for x in 0..w {
            if x + 1 < w {
                s.edge(id(x, y), id(x + 1, y), 1.0, None);
            }
            if y + 1 < h {
                s.edge(id(x, y), id(x, y + 1), 1.0, None);
            }
        }
    }
    build_graph(&s)
}

/// Complete `branching`-ary tree of the given depth, unit data, vertices
/// numbered `n0, n1, ...` in breadth-first order; leaves are frontier.
pub fn tree(branching: usize, depth: usize) -> Result<MetricMeasureGraph> {
    if branching < 1 || depth < 1 {
        return Err(Error::input("tree needs branching >= 1 and depth >= 1"));
    }
    let mut s = GraphSpec::default();
    let mut level = vec![0usize];
    let mut next_id = 1usize;
    s.vertex("n0", 1.0, false);
    for d in 1..=depth {
        let mut next = Vec::with_capacity(level.len() * branching);
        for &parent in &level {
            for _ in 0..branching {
                s.vertex(format!("n{next_id}"), 1.0, d == depth);
                s.edge(format!("n{parent}"), format!("n{next_id}"), 1.0, None);
                next.push(next_id);
                next_id += 1;
            }
        }
        level = next;
    }
    build_graph(&s)
}

/// Two unit rays of `len` edges glued at `z0`; the tips `a{len}` and
/// `b{len}` are frontier.
pub fn double_ray(len: usize) -> Result<MetricMeasureGraph> {
    if len < 1 {
        return Err(Error::input("ray length must be positive"));
    }
    let mut s = GraphSpec::default();
    s.vertex("z0", 1.0, false);
    for side in ["a", "b"] {
        for i in 1..=len {
            s.vertex(format!("{side}{i}"), 1.0, i == len);
            let prev = if i == 1 {
                "z0".to_string()
            } else {
                format!("{side}{}", i - 1)
            };
            s.edge(prev, format!("{side}{i}"), 1.0, None);
        }
    }
    build_graph(&s)
}

/// Polar discretization of the hyperbolic disk of radius `r_max`: a centre
/// vertex `c` plus `m` rings at `r_i = i·Δr`, each with `n_ang` nodes
/// `i_j`. Radial edges have length `Δr`, angular edges `sinh(r)·Δθ`; vertex
/// and edge measures are the hyperbolic areas of their cells. The outer ring
/// is frontier. Only dimension 2 is supported.
pub fn hyperbolic_disk_graph(n: usize, r_max: f64, m: usize, n_ang: usize) -> Result<MetricMeasureGraph> {
    if n != 2 {
        return Err(Error::input("hyperbolic_disk_graph supports n = 2 only"));
    }
    if !(r_max > 0.0) || m < 2 || n_ang < 3 {
        return Err(Error::input("need r_max > 0, at least 2 rings and 3 angles"));
    }
    let dr = r_max / m as f64;
    let dt = 2.0 * PI / n_ang as f64;
    let id = |i: usize, j: usize| format!("{i}_{j}");
    let mut s = GraphSpec::default();
    s.vertex("c", 2.0 * PI * ((dr / 2.0).cosh() - 1.0), false);
    for i in 1..=m {
        let r = i as f64 * dr;
        // The outer ring only carries the inner half of its cell.
        let (lo, hi) = (r - dr / 2.0, if i == m { r } else { r + dr / 2.0 });
        let area = (hi.cosh() - lo.cosh()) * dt;
        for j in 0..n_ang {
            s.vertex(id(i, j), area, i == m);
        }
    }
    for j in 0..n_ang {
        s.edge("c", id(1, j), dr, Some(dr * (dr / 2.0).sinh() * dt));
        for i in 1..m {
            let mid = (i as f64 + 0.5) * dr;
            s.edge(id(i, j), id(i + 1, j), dr, Some(dr * mid.sinh() * dt));
        }
    }
    for i in 1..=m {
        let r = i as f64 * dr;
        let len = r.sinh() * dt;
        let width = if i == m { dr / 2.0 } else { dr };
        for j in 0..n_ang {
            s.edge(id(i, j), id(i, (j + 1) % n_ang), len, Some(len * width));
        }
    }
    build_graph(&s)
}

/// Weighted path with exact measure growth: `x0` of mass `mu0`, then
/// `v1, ..., v{stairs+1}` with `v{i+1}` at distance `2^{i+1} - 1` and mass
/// `c_d (c_d+1)^i mu0`, so that the ball through `v{i}` has mass
/// `(c_d+1)^i mu0`. Each edge carries the mass of its inner endpoint as edge
/// measure. The last vertex is frontier.
pub fn exact_growth_staircase(c_d: f64, stairs: usize, mu0: f64) -> Result<MetricMeasureGraph> {
    if !(c_d > 0.0) || !(mu0 > 0.0) || stairs < 1 {
        return Err(Error::input("need c_d > 0, mu0 > 0 and at least one stair"));
    }
    let mut s = GraphSpec::default();
    s.vertex("x0", mu0, false);
    let mut masses = vec![mu0];
    for i in 0..=stairs {
        let mass = c_d * (c_d + 1.0).powi(i as i32) * mu0;
        masses.push(mass);
        s.vertex(format!("v{}", i + 1), mass, i == stairs);
    }
    let dist = |k: usize| if k == 0 { 0.0 } else { (2f64).powi(k as i32) - 1.0 };
    for k in 0..=stairs {
        let from = if k == 0 { "x0".to_string() } else { format!("v{k}") };
        s.edge(from, format!("v{}", k + 1), dist(k + 1) - dist(k), Some(masses[k]));
    }
    build_graph(&s)
}
