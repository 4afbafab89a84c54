//! Explicit functions with finite `p`-energy for which `f - c` fails to be
//! `p`-integrable for every constant `c`, together with their evaluation:
//! energy, per-annulus deficits `∫_shell |f - c|^p` and divergence verdicts.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::Serialize;

use crate::capacity::{capacity_warm, dirichlet_energy};
use crate::error::{Error, Result};
use crate::mmspace::{ball_from_dist, build_graph, EndsDecomposition, GraphSpec, MetricMeasureGraph, VertexSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessKind {
    Staircase,
    AhlforsMin,
    AhlforsMax,
    PuncturedLog,
    TwoEnds,
    ParabolicStaircase,
}

/// A vertex function together with the annuli it is evaluated on.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WitnessFunction {
    pub kind: WitnessKind,
    /// Exponent the construction was tuned for, if any.
    pub p: Option<f64>,
    pub params: BTreeMap<String, f64>,
    /// Construction radii (`r_i` for the staircase, alternating `r_k, R_k`
    /// for the parabolic staircase).
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
    /// Annuli ordered outward; deficits are reported per entry.
    pub shells: Vec<VertexSet>,
    pub predicted_limit: Option<f64>,
    /// Per-annulus deficit the construction guarantees, when it has one.
    pub deficit_floor: Option<f64>,
    pub stairs: usize,
    /// Per-stair energies (parabolic staircase) or overshoot ratios
    /// `V(r_i) / ((C_d+1) V(r_{i-1}))` (staircase).
    pub stair_data: Vec<f64>,
    pub notes: Vec<String>,
}

/// Shells `{r_j <= d < r_{j+1}}` for consecutive radii, then the remainder
/// `{d >= r_last}` if nonempty.
pub fn distance_shells(dist: &[f64], radii: &[f64]) -> Vec<VertexSet> {
    let mut out = Vec::new();
    for w in radii.windows(2) {
        out.push(VertexSet(
            (0..dist.len()).filter(|&i| dist[i] >= w[0] && dist[i] < w[1]).collect(),
        ));
    }
    if let Some(&last) = radii.last() {
        let rest = VertexSet((0..dist.len()).filter(|&i| dist[i] >= last).collect());
        if !rest.is_empty() {
            out.push(rest);
        }
    }
    out
}

fn unit_shells(dist: &[f64]) -> Vec<VertexSet> {
    let top = dist.iter().copied().fold(0.0, f64::max).floor() as usize;
    let radii: Vec<f64> = (0..=top).map(|k| k as f64).collect();
    distance_shells(dist, &radii)
}

fn check_p(p: f64) -> Result<()> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::input("p must be at least 1"));
    }
    Ok(())
}

/// Staircase witness for doubling growth: radii with
/// `V(r_i) >= (C_d+1) V(r_{i-1})` starting from `r_0 = 1`,
/// `φ(r_i) = Σ_{j<i} (V(r_{j+1}) - V(r_j))^{-1/p}` interpolated linearly,
/// and `f = φ(d(x0, ·))`.
///
/// Balls are strict, so `r_i` is taken as the first vertex distance beyond
/// the shortest closed ball that reaches the mass target. The construction
/// stops when no such distance remains.
pub fn staircase_witness(g: &MetricMeasureGraph, x0: usize, p: f64, c_d: f64) -> Result<WitnessFunction> {
    check_p(p)?;
    if !(c_d > 0.0) {
        return Err(Error::input("c_d must be positive"));
    }
    if x0 >= g.n() {
        return Err(Error::UnknownVertex(format!("#{x0}")));
    }
    let dist = g.distances(x0);
    let mut levels: Vec<f64> = dist.clone();
    levels.sort_by(f64::total_cmp);
    levels.dedup();
    let closed_mass = |t: f64| -> f64 { (0..g.n()).filter(|&i| dist[i] <= t).map(|i| g.vertices[i].mu).sum() };
    let open_mass = |r: f64| -> f64 { g.mass(&ball_from_dist(&dist, r)) };

    let mut radii = vec![1.0];
    let mut masses = vec![open_mass(1.0)];
    let mut overshoot = Vec::new();
    loop {
        let target = (c_d + 1.0) * masses.last().unwrap();
        let prev = *radii.last().unwrap();
        // Relative slack so that exact growth survives rounding in the mass sums.
        let Some(k) = levels
            .iter()
            .position(|&t| t >= prev && closed_mass(t) >= target * (1.0 - 1e-12))
        else {
            break;
        };
        let Some(&r) = levels.get(k + 1) else { break };
        let v = open_mass(r);
        overshoot.push(v / target);
        radii.push(r);
        masses.push(v);
    }
    let stairs = radii.len() - 1;
    if stairs < 3 {
        return Err(Error::input(format!(
            "only {stairs} stairs achievable, need at least 3"
        )));
    }
    let mut phi = vec![0.0];
    for j in 0..stairs {
        phi.push(phi[j] + (masses[j + 1] - masses[j]).powf(-1.0 / p));
    }
    let values = dist
        .iter()
        .map(|&d| {
            if d <= radii[0] {
                return 0.0;
            }
            match radii.iter().position(|&r| r >= d) {
                None => phi[stairs],
                Some(i) => {
                    let t = (d - radii[i - 1]) / (radii[i] - radii[i - 1]);
                    phi[i - 1] + t * (phi[i] - phi[i - 1])
                }
            }
        })
        .collect();
    // Geometric tail under exact growth past the last stair.
    let tail = (c_d * masses[stairs]).powf(-1.0 / p) / (1.0 - (c_d + 1.0).powf(-1.0 / p));
    let mut params = BTreeMap::new();
    params.insert("c_d".into(), c_d);
    params.insert("mu0".into(), masses[0]);
    Ok(WitnessFunction {
        kind: WitnessKind::Staircase,
        p: Some(p),
        params,
        shells: distance_shells(&dist, &radii),
        radii,
        values,
        predicted_limit: Some(phi[stairs] + tail),
        deficit_floor: Some(1.0 / (c_d + 1.0)),
        stairs,
        stair_data: overshoot,
        notes: Vec::new(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AhlforsBranch {
    /// `min{1, d^{-s/q}}`, used when `1/p < 1/q + 1/s`.
    Min,
    /// `max{1, d^{-s/q}}`, used when `1/p > 1/q + 1/s`.
    Max,
}

/// Closed-form radial witness on an Ahlfors `s`-regular space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AhlforsWitness {
    pub s: f64,
    pub p: f64,
    pub q: f64,
    pub branch: AhlforsBranch,
}

pub fn ahlfors_witness(s: f64, p: f64, q: f64) -> Result<AhlforsWitness> {
    check_p(p)?;
    if !(s > 0.0) || !(q >= 1.0) {
        return Err(Error::input("need s > 0 and q >= 1"));
    }
    let lhs = 1.0 / p;
    let rhs = 1.0 / q + 1.0 / s;
    let branch = if lhs < rhs {
        AhlforsBranch::Min
    } else if lhs > rhs {
        AhlforsBranch::Max
    } else {
        return Err(Error::input("1/q + 1/s = 1/p is excluded"));
    };
    Ok(AhlforsWitness { s, p, q, branch })
}

impl AhlforsWitness {
    pub fn kind(&self) -> WitnessKind {
        match self.branch {
            AhlforsBranch::Min => WitnessKind::AhlforsMin,
            AhlforsBranch::Max => WitnessKind::AhlforsMax,
        }
    }

    /// Value at distance `d` from the base point.
    pub fn eval(&self, d: f64) -> f64 {
        let pw = d.powf(-self.s / self.q);
        match self.branch {
            AhlforsBranch::Min => pw.min(1.0),
            AhlforsBranch::Max => pw.max(1.0),
        }
    }

    /// Bound `(s/q) d^{-(s+q)/q}` on the local Lipschitz constant where the
    /// power branch is active, zero on the flat part.
    pub fn lip_bound(&self, d: f64) -> f64 {
        let active = match self.branch {
            AhlforsBranch::Min => d >= 1.0,
            AhlforsBranch::Max => d <= 1.0,
        };
        if active {
            self.s / self.q * d.powf(-(self.s + self.q) / self.q)
        } else {
            0.0
        }
    }

    /// Vertex samples `f(d(x0, ·))` on a graph, with unit distance annuli.
    /// Only the bounded branch can be sampled at the base point.
    pub fn on_graph(&self, g: &MetricMeasureGraph, x0: usize) -> Result<WitnessFunction> {
        if self.branch == AhlforsBranch::Max {
            return Err(Error::input("the max branch is unbounded at the base point"));
        }
        if x0 >= g.n() {
            return Err(Error::UnknownVertex(format!("#{x0}")));
        }
        let dist = g.distances(x0);
        let mut params = BTreeMap::new();
        params.insert("s".into(), self.s);
        params.insert("q".into(), self.q);
        Ok(WitnessFunction {
            kind: self.kind(),
            p: Some(self.p),
            params,
            radii: Vec::new(),
            values: dist.iter().map(|&d| self.eval(d)).collect(),
            shells: unit_shells(&dist),
            predicted_limit: Some(0.0),
            deficit_floor: None,
            stairs: 0,
            stair_data: Vec::new(),
            notes: Vec::new(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PuncturedOptions {
    /// Spacing of the rings in the log variable `t = ln(1/|x|)`.
    pub h: f64,
    pub angular: usize,
}

impl Default for PuncturedOptions {
    fn default() -> Self {
        PuncturedOptions { h: 1.0, angular: 16 }
    }
}

/// Log-spaced polar discretization of the punctured unit disk: rings at
/// `|x| = e^{-k h}` for `k = 0..=mesh`. Edge lengths are quasihyperbolic
/// (Euclidean length over `|x|`), vertex measures are `|x|^{-2}` times the
/// Euclidean cell area, and edge measures are the matching cell measures.
/// The innermost ring is frontier. Vertex ids are `k_j`.
pub fn punctured_disk_graph(mesh: usize, opts: &PuncturedOptions) -> Result<MetricMeasureGraph> {
    if mesh < 2 || opts.angular < 3 || !(opts.h > 0.0) {
        return Err(Error::input("need mesh >= 2, angular >= 3 and h > 0"));
    }
    let (h, n) = (opts.h, opts.angular);
    let dt = 2.0 * PI / n as f64;
    let id = |k: usize, j: usize| format!("{k}_{j}");
    let mut s = GraphSpec::default();
    for k in 0..=mesh {
        // |x|^{-2} times the area between e^{-t-h/2} and e^{-t+h/2}, computed
        // relative to |x| = e^{-t}; the end rings keep only their inner half.
        let outer = if k == 0 { 0.0 } else { h / 2.0 };
        let inner = if k == mesh { 0.0 } else { h / 2.0 };
        let area = 0.5 * ((2.0 * outer).exp() - (-2.0 * inner).exp()) * dt;
        for j in 0..n {
            s.vertex(id(k, j), area, k == mesh);
        }
    }
    let chord = 2.0 * (dt / 2.0).sin();
    for k in 0..=mesh {
        let width = if k == 0 || k == mesh { h / 2.0 } else { h };
        for j in 0..n {
            s.edge(id(k, j), id(k, (j + 1) % n), chord, Some(chord * width));
            if k < mesh {
                s.edge(id(k, j), id(k + 1, j), h, Some(h * dt));
            }
        }
    }
    build_graph(&s)
}

/// `u(x) = [ln(e/|x|)]^q` sampled on [`punctured_disk_graph`]; annuli are
/// the rings, ordered towards the puncture.
pub fn punctured_log_witness(
    q: f64,
    p: f64,
    mesh: usize,
    opts: &PuncturedOptions,
) -> Result<(MetricMeasureGraph, WitnessFunction)> {
    check_p(p)?;
    if q == 0.0 || !(q > -1.0 / p && q < 1.0 - 1.0 / p) {
        return Err(Error::input(format!("q must lie in (-1/p, 1-1/p) without 0, got {q}")));
    }
    let g = punctured_disk_graph(mesh, opts)?;
    let n = opts.angular;
    let values = (0..g.n()).map(|i| (1.0 + (i / n) as f64 * opts.h).powf(q)).collect();
    let shells = (0..=mesh).map(|k| VertexSet((k * n..(k + 1) * n).collect())).collect();
    let mut params = BTreeMap::new();
    params.insert("q".into(), q);
    params.insert("h".into(), opts.h);
    params.insert("log_range".into(), mesh as f64 * opts.h);
    let w = WitnessFunction {
        kind: WitnessKind::PuncturedLog,
        p: Some(p),
        params,
        radii: (0..=mesh).map(|k| (-(k as f64) * opts.h).exp()).collect(),
        values,
        shells,
        predicted_limit: None,
        deficit_floor: None,
        stairs: mesh,
        stair_data: Vec::new(),
        notes: Vec::new(),
    };
    Ok((g, w))
}

/// Witness for two ends: with `F1 = ends[0]` and `S = X \ F1`, sets
/// `u = min{1, dist(·, S)/τ}` where `τ` is the distance from `S` to the
/// unbounded part of `F1` outside the ball of radius `r + step`.
pub fn two_ends_witness(g: &MetricMeasureGraph, ends: &EndsDecomposition, step: f64) -> Result<WitnessFunction> {
    if ends.ends.len() < 2 {
        return Err(Error::input(format!(
            "need at least two ends, found {}",
            ends.ends.len()
        )));
    }
    if !(step > 0.0) {
        return Err(Error::input("step must be positive"));
    }
    let f1 = &ends.ends[0];
    let s_set = f1.complement(g.n());
    let dist0 = g.distances(ends.x0);
    let outer = ball_from_dist(&dist0, ends.r + step).mask(g.n());
    let f1_mask = f1.mask(g.n());
    let keep: Vec<bool> = (0..g.n()).map(|i| f1_mask[i] && !outer[i]).collect();
    let f2: Vec<usize> = g
        .components(&keep)
        .into_iter()
        .filter(|c| c.iter().any(|i| g.vertices[i].frontier))
        .flat_map(|c| c.0)
        .collect();
    if f2.is_empty() {
        return Err(Error::input("first end has no unbounded part beyond r + step"));
    }
    let ds = g.distances_from_set(&s_set);
    let tau = f2.iter().map(|&i| ds[i]).fold(f64::INFINITY, f64::min);
    let values = ds.iter().map(|&d| (d / tau).min(1.0)).collect();
    let mut params = BTreeMap::new();
    params.insert("tau".into(), tau);
    params.insert("r".into(), ends.r);
    params.insert("step".into(), step);
    Ok(WitnessFunction {
        kind: WitnessKind::TwoEnds,
        p: None,
        params,
        radii: vec![ends.r, ends.r + step],
        values,
        shells: unit_shells(&dist0),
        predicted_limit: None,
        deficit_floor: None,
        stairs: 0,
        stair_data: Vec::new(),
        notes: Vec::new(),
    })
}

/// Staircase of capacity potentials for a parabolic graph: for
/// `k = 1, 2, ...` the outer radius `R_k` is pushed out (gap doubling from 1)
/// until `cap_p(B(x0, r_k), X \ B(x0, R_k)) < 2^{-kp}`, `v_k = 1 - u_k` and
/// `f = Σ v_k`. The next inner radius is the first radius past `R_k` whose
/// shell has mass at least 1. Stops after `budget` stairs or when the graph
/// runs out.
pub fn parabolic_staircase_witness(
    g: &MetricMeasureGraph,
    x0: usize,
    p: f64,
    budget: usize,
    tol: f64,
) -> Result<WitnessFunction> {
    check_p(p)?;
    if x0 >= g.n() {
        return Err(Error::UnknownVertex(format!("#{x0}")));
    }
    let dist = g.distances(x0);
    let mut levels = dist.clone();
    levels.sort_by(f64::total_cmp);
    levels.dedup();
    let max_d = *levels.last().unwrap();
    let mut values = vec![0.0; g.n()];
    let mut radii = Vec::new();
    let mut energies = Vec::new();
    let mut notes = Vec::new();
    let Some(&first) = levels.get(1) else {
        return Err(Error::input("graph has a single distance level"));
    };
    let mut r = first;
    let mut warm: Option<Vec<f64>> = None;
    for k in 1..=budget {
        let target = (2f64).powf(-(k as f64) * p);
        let inner = ball_from_dist(&dist, r);
        let mut gap = 1.0;
        let mut found = None;
        while r + gap <= max_d {
            let big_r = r + gap;
            let zeros = ball_from_dist(&dist, big_r).complement(g.n());
            let c = capacity_warm(g, &inner, &zeros, p, tol, warm.as_deref())?;
            if c.value < target {
                found = Some((big_r, c));
                break;
            }
            warm = Some(c.minimizer.u);
            gap *= 2.0;
        }
        let Some((big_r, c)) = found else {
            if k == 1 {
                return Err(Error::input(
                    "first stair unreachable: capacity target not met inside the graph",
                ));
            }
            notes.push(format!(
                "stair {k}: energy target {target:e} not reached inside the graph"
            ));
            break;
        };
        for (f, u) in values.iter_mut().zip(&c.minimizer.u) {
            *f += 1.0 - u;
        }
        radii.push(r);
        radii.push(big_r);
        energies.push(c.value);
        warm = None;
        // First radius past R_k whose shell {R_k <= d < r'} has mass >= 1.
        let mut next = None;
        let mut fallback = None;
        for w in levels.windows(2) {
            if w[0] < big_r {
                continue;
            }
            let shell: f64 = (0..g.n())
                .filter(|&i| dist[i] >= big_r && dist[i] < w[1])
                .map(|i| g.vertices[i].mu)
                .sum();
            fallback = Some(w[1]);
            if shell >= 1.0 {
                next = Some(w[1]);
                break;
            }
        }
        match next.or(fallback) {
            Some(nr) => {
                if next.is_none() {
                    notes.push(format!("shell after stair {k} has mass below 1"));
                }
                r = nr;
            }
            None => break,
        }
    }
    let mut params = BTreeMap::new();
    params.insert("budget".into(), budget as f64);
    Ok(WitnessFunction {
        kind: WitnessKind::ParabolicStaircase,
        p: Some(p),
        params,
        radii,
        values,
        shells: unit_shells(&dist),
        predicted_limit: None,
        deficit_floor: None,
        stairs: energies.len(),
        stair_data: energies,
        notes,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvaluateOptions {
    /// Candidate constants; when `None` a 41-point grid spanning
    /// `[min f - range/4, max f + range/4]` is used.
    pub c_grid: Option<Vec<f64>>,
    /// Number of outermost annuli averaged into the floor.
    pub last_k: usize,
    /// Floor a constant must reach to be called diverging; defaults to the
    /// witness's designed floor, else `1e-6`.
    pub threshold: Option<f64>,
    /// Ahlfors exponent `s > p`, enabling the `L^q` tail with
    /// `1/q = 1/p - 1/s`.
    pub ahlfors_s: Option<f64>,
}

impl Default for EvaluateOptions {
    fn default() -> Self {
        EvaluateOptions {
            c_grid: None,
            last_k: 3,
            threshold: None,
            ahlfors_s: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstantDeficit {
    pub c: f64,
    /// `∫_shell |f - c|^p` per annulus.
    pub deficits: Vec<f64>,
    /// Running sums of `deficits`.
    pub cumulative: Vec<f64>,
    /// Mean deficit over the last `last_k` annuli.
    pub floor: f64,
    pub diverging: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LqTail {
    pub q: f64,
    pub c: f64,
    pub deficits: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WitnessReport {
    pub energy: f64,
    pub p: f64,
    pub last_k: usize,
    pub threshold: f64,
    pub constants: Vec<ConstantDeficit>,
    /// Minimizer of the total deficit and its row.
    pub optimal: ConstantDeficit,
    pub all_diverging: bool,
    pub lq_tail: Option<LqTail>,
}

fn deficit_row(
    g: &MetricMeasureGraph,
    f: &WitnessFunction,
    p: f64,
    c: f64,
    k: usize,
    threshold: f64,
) -> ConstantDeficit {
    let deficits: Vec<f64> = f
        .shells
        .iter()
        .map(|s| {
            s.iter()
                .map(|i| g.vertices[i].mu * (f.values[i] - c).abs().powf(p))
                .sum()
        })
        .collect();
    let mut acc = 0.0;
    let cumulative = deficits
        .iter()
        .map(|d| {
            acc += d;
            acc
        })
        .collect();
    let k = k.min(deficits.len()).max(1);
    let floor = deficits[deficits.len().saturating_sub(k)..].iter().sum::<f64>() / k as f64;
    ConstantDeficit {
        c,
        deficits,
        cumulative,
        floor,
        diverging: floor >= threshold,
    }
}

/// Minimizes the convex map `c -> Σ μ |f - c|^p` over the shells by
/// bisection on its derivative.
fn optimal_constant(g: &MetricMeasureGraph, f: &WitnessFunction, p: f64) -> f64 {
    let pts: Vec<(f64, f64)> = f
        .shells
        .iter()
        .flat_map(|s| s.iter())
        .map(|i| (f.values[i], g.vertices[i].mu))
        .collect();
    let slope = |c: f64| -> f64 {
        pts.iter()
            .map(|&(v, m)| {
                let d = c - v;
                if p == 1.0 {
                    m * d.signum()
                } else {
                    m * d.signum() * d.abs().powf(p - 1.0)
                }
            })
            .sum()
    };
    let (mut lo, mut hi) = pts.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &(v, _)| {
        (a.min(v), b.max(v))
    });
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if slope(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Energy and per-annulus deficits of a witness on its graph.
pub fn evaluate_witness(
    g: &MetricMeasureGraph,
    f: &WitnessFunction,
    p: f64,
    opts: &EvaluateOptions,
) -> Result<WitnessReport> {
    check_p(p)?;
    if f.values.len() != g.n() {
        return Err(Error::input("witness values do not match the graph"));
    }
    if f.values.iter().any(|v| !v.is_finite()) {
        return Err(Error::input("witness has non-finite values"));
    }
    if f.shells.is_empty() {
        return Err(Error::input("witness has no annuli"));
    }
    let mut grid = match &opts.c_grid {
        Some(c) if c.is_empty() => return Err(Error::input("empty c grid")),
        Some(c) => c.clone(),
        None => {
            let lo = f.values.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = f.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let pad = if hi > lo { (hi - lo) / 4.0 } else { 1.0 };
            let (a, b) = (lo - pad, hi + pad);
            (0..41).map(|i| a + (b - a) * i as f64 / 40.0).collect()
        }
    };
    if let Some(c) = f.predicted_limit {
        if !grid.contains(&c) {
            grid.push(c);
        }
    }
    let threshold = opts.threshold.or(f.deficit_floor).unwrap_or(1e-6);
    let constants: Vec<ConstantDeficit> = grid
        .iter()
        .map(|&c| deficit_row(g, f, p, c, opts.last_k, threshold))
        .collect();
    let c_opt = optimal_constant(g, f, p);
    let optimal = deficit_row(g, f, p, c_opt, opts.last_k, threshold);
    let all_diverging = constants.iter().all(|r| r.diverging) && optimal.diverging;
    let lq_tail = match opts.ahlfors_s {
        Some(s) if s > p => {
            let q = 1.0 / (1.0 / p - 1.0 / s);
            let c = f.predicted_limit.unwrap_or(c_opt);
            let deficits = f
                .shells
                .iter()
                .map(|sh| {
                    sh.iter()
                        .map(|i| g.vertices[i].mu * (f.values[i] - c).abs().powf(q))
                        .sum()
                })
                .collect();
            Some(LqTail { q, c, deficits })
        }
        Some(_) => return Err(Error::input("the L^q tail needs s > p")),
        None => None,
    };
    Ok(WitnessReport {
        energy: dirichlet_energy(g, &f.values, p),
        p,
        last_k: opts.last_k,
        threshold,
        constants,
        optimal,
        all_diverging,
        lq_tail,
    })
}
