//! Relative p-capacity by discrete p-Dirichlet minimization, the cap = mod
//! cross-check, and the parabolicity classifier.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{laplacian_dirichlet, laplacian_solve};
use crate::mmspace::{annular_exhaustion, ball_from_dist, MetricMeasureGraph, VertexSet};
use crate::modulus::{modulus_connecting, CurveFamilySpec, ModulusOptions};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Potential {
    pub u: Vec<f64>,
}

impl Potential {
    /// `|u(x) - u(y)| / ℓ(e)` per edge.
    pub fn gradient(&self, g: &MetricMeasureGraph) -> Vec<f64> {
        g.edges
            .iter()
            .map(|e| (self.u[e.u] - self.u[e.v]).abs() / e.len)
            .collect()
    }

    pub fn energy(&self, g: &MetricMeasureGraph, p: f64) -> f64 {
        dirichlet_energy(g, &self.u, p)
    }
}

pub fn dirichlet_energy(g: &MetricMeasureGraph, u: &[f64], p: f64) -> f64 {
    g.edges
        .iter()
        .map(|e| e.sigma * ((u[e.u] - u[e.v]).abs() / e.len).powf(p))
        .sum()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CapacityResult {
    pub value: f64,
    pub minimizer: Potential,
    /// Largest free-vertex gradient component of the energy (CG relative residual at p = 2).
    pub residual: f64,
    pub converged: bool,
}

fn boundary(g: &MetricMeasureGraph, ones: &VertexSet, zeros: &VertexSet) -> Result<Vec<Option<f64>>> {
    if ones.is_empty() || zeros.is_empty() {
        return Err(Error::input("empty boundary set"));
    }
    if ones.iter().chain(zeros.iter()).any(|x| x >= g.n()) {
        return Err(Error::input("vertex index out of range"));
    }
    if ones.iter().any(|x| zeros.contains(x)) {
        return Err(Error::input("overlapping boundary sets"));
    }
    let mut fixed = vec![None; g.n()];
    for x in ones.iter() {
        fixed[x] = Some(1.0);
    }
    for x in zeros.iter() {
        fixed[x] = Some(0.0);
    }
    Ok(fixed)
}

// Energy gradient at free vertices, zero at fixed ones.
fn energy_gradient(g: &MetricMeasureGraph, u: &[f64], p: f64, fixed: &[Option<f64>]) -> Vec<f64> {
    let mut grad = vec![0.0; g.n()];
    for e in &g.edges {
        let d = u[e.u] - u[e.v];
        let t = p * e.sigma / e.len.powf(p) * d.abs().powf(p - 1.0) * d.signum();
        grad[e.u] += t;
        grad[e.v] -= t;
    }
    for (v, f) in grad.iter_mut().zip(fixed) {
        if f.is_some() {
            *v = 0.0;
        }
    }
    grad
}

/// Minimizes `Σ σ(e) (|u(x)-u(y)|/ℓ(e))^p` with `u = 1` on `ones` and `u = 0`
/// on `zeros`. `warm` seeds the free values. Returns the truncated minimizer,
/// its residual and whether the stopping rule was met.
pub fn dirichlet_minimize(
    g: &MetricMeasureGraph,
    ones: &VertexSet,
    zeros: &VertexSet,
    p: f64,
    tol: f64,
    warm: Option<&[f64]>,
) -> Result<(Potential, f64, bool)> {
    if !(p >= 1.0) {
        return Err(Error::input("p must be at least 1"));
    }
    if !(tol > 0.0) {
        return Err(Error::input("tol must be positive"));
    }
    let fixed = boundary(g, ones, zeros)?;
    let lin: Vec<f64> = g.edges.iter().map(|e| e.sigma / (e.len * e.len)).collect();
    let mut u = match warm {
        Some(w) if w.len() == g.n() => w.to_vec(),
        _ => vec![0.5; g.n()],
    };
    let out = laplacian_dirichlet(g, &lin, &fixed, &mut u, 1e-13);
    let (residual, converged) = if p == 2.0 {
        (out.relative_residual, out.relative_residual <= 1e-10)
    } else if p == 1.0 {
        smoothed_newton(g, &mut u, &fixed, tol)
    } else {
        clamp(&mut u);
        newton(g, &mut u, p, &fixed, tol, 0.0)
    };
    clamp(&mut u);
    Ok((Potential { u }, residual, converged))
}

fn clamp(u: &mut [f64]) {
    for v in u.iter_mut() {
        *v = v.clamp(0.0, 1.0);
    }
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

// Damped Newton on the p-energy, optionally with |t| replaced by
// sqrt(t² + eps²) (used for p = 1). Hessian weights are bounded away from
// zero and infinity, which only affects the search direction.
fn newton(g: &MetricMeasureGraph, u: &mut [f64], p: f64, fixed: &[Option<f64>], tol: f64, eps: f64) -> (f64, bool) {
    let smooth = |d: f64| (d * d + eps * eps).sqrt();
    let energy = |u: &[f64]| -> f64 {
        g.edges
            .iter()
            .map(|e| e.sigma / e.len.powf(p) * smooth(u[e.u] - u[e.v]).powf(p))
            .sum()
    };
    let gradient = |u: &[f64]| -> Vec<f64> {
        if eps == 0.0 {
            return energy_gradient(g, u, p, fixed);
        }
        let mut grad = vec![0.0; g.n()];
        for e in &g.edges {
            let d = u[e.u] - u[e.v];
            let t = p * e.sigma / e.len.powf(p) * smooth(d).powf(p - 2.0) * d;
            grad[e.u] += t;
            grad[e.v] -= t;
        }
        for (v, f) in grad.iter_mut().zip(fixed) {
            if f.is_some() {
                *v = 0.0;
            }
        }
        grad
    };
    let mut grad = gradient(u);
    let mut res = inf_norm(&grad);
    let mut e0 = energy(u);
    for _ in 0..500 {
        if res <= tol {
            return (res, true);
        }
        let dmax = g.edges.iter().map(|e| (u[e.u] - u[e.v]).abs()).fold(0.0, f64::max);
        let floor = if p < 2.0 { 1e-9 } else { 1e-4 * dmax.max(1e-12) };
        let w: Vec<f64> = g
            .edges
            .iter()
            .map(|e| {
                let d = smooth(u[e.u] - u[e.v]).max(floor);
                let curv = if eps > 0.0 {
                    // second derivative of (d² + eps²)^{p/2} along d, for p = 1
                    let t = u[e.u] - u[e.v];
                    let s2 = t * t + eps * eps;
                    p * s2.powf(p / 2.0 - 1.0) * (1.0 + (p - 2.0) * t * t / s2)
                } else {
                    p * (p - 1.0) * d.powf(p - 2.0)
                };
                (e.sigma / e.len.powf(p) * curv).max(1e-300)
            })
            .collect();
        let rhs: Vec<f64> = grad.iter().map(|x| -x).collect();
        let zero_fixed: Vec<Option<f64>> = fixed.iter().map(|f| f.map(|_| 0.0)).collect();
        let mut step = vec![0.0; g.n()];
        laplacian_solve(g, &w, &zero_fixed, Some(&rhs), &mut step, 1e-10);
        let slope: f64 = grad.iter().zip(&step).map(|(a, b)| a * b).sum();
        let dir: Vec<f64> = if slope < 0.0 { step } else { rhs.clone() };
        let slope = grad.iter().zip(&dir).map(|(a, b)| a * b).sum::<f64>();
        let mut t = 1.0;
        let mut trial = u.to_vec();
        let mut accepted = false;
        for _ in 0..60 {
            for i in 0..u.len() {
                trial[i] = u[i] + t * dir[i];
            }
            let e1 = energy(&trial);
            if e1 <= e0 + 1e-4 * t * slope {
                e0 = e1;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            return (res, res <= tol);
        }
        u.copy_from_slice(&trial);
        grad = gradient(u);
        res = inf_norm(&grad);
    }
    (res, res <= tol)
}

fn smoothed_newton(g: &MetricMeasureGraph, u: &mut [f64], fixed: &[Option<f64>], tol: f64) -> (f64, bool) {
    let mut eps = 1e-2;
    let mut out = (f64::INFINITY, false);
    while eps >= 1e-8 {
        out = newton(g, u, 1.0, fixed, tol, eps);
        eps *= 0.1;
    }
    out
}

pub fn capacity(
    g: &MetricMeasureGraph,
    ones: &VertexSet,
    zeros: &VertexSet,
    p: f64,
    tol: f64,
) -> Result<CapacityResult> {
    capacity_warm(g, ones, zeros, p, tol, None)
}

pub fn capacity_warm(
    g: &MetricMeasureGraph,
    ones: &VertexSet,
    zeros: &VertexSet,
    p: f64,
    tol: f64,
    warm: Option<&[f64]>,
) -> Result<CapacityResult> {
    let (minimizer, residual, converged) = dirichlet_minimize(g, ones, zeros, p, tol, warm)?;
    let value = minimizer.energy(g, p);
    Ok(CapacityResult {
        value,
        minimizer,
        residual,
        converged,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CapModCheck {
    pub capacity: f64,
    pub modulus: f64,
    pub relative_difference: f64,
    pub modulus_gap: f64,
    pub capacity_residual: f64,
}

/// Capacity and modulus of the condenser `(B(x0, r), X \ B(x0, R))`.
pub fn check_cap_eq_mod(
    g: &MetricMeasureGraph,
    x0: usize,
    r: f64,
    big_r: f64,
    p: f64,
    tol: f64,
) -> Result<CapModCheck> {
    if !(0.0 < r && r < big_r) {
        return Err(Error::input("need 0 < r < R"));
    }
    let (e, f) = condenser(g, x0, r, big_r)?;
    let cap = capacity(g, &e, &f, p, tol)?;
    let m = modulus_connecting(
        g,
        &CurveFamilySpec::connecting(e, f),
        p,
        tol,
        &ModulusOptions::default(),
    )?;
    let scale = cap.value.abs().max(m.value.abs());
    let relative_difference = if scale > 0.0 {
        (cap.value - m.value).abs() / scale
    } else {
        0.0
    };
    Ok(CapModCheck {
        capacity: cap.value,
        modulus: m.value,
        relative_difference,
        modulus_gap: m.gap,
        capacity_residual: cap.residual,
    })
}

/// `(B(x0, r), X \ B(x0, R))`, both required nonempty.
pub fn condenser(g: &MetricMeasureGraph, x0: usize, r: f64, big_r: f64) -> Result<(VertexSet, VertexSet)> {
    if x0 >= g.n() {
        return Err(Error::UnknownVertex(format!("#{x0}")));
    }
    let dist = g.distances(x0);
    let e = ball_from_dist(&dist, r);
    let f = ball_from_dist(&dist, big_r).complement(g.n());
    if e.is_empty() {
        return Err(Error::input("inner ball is empty"));
    }
    if f.is_empty() {
        return Err(Error::input(format!("ball of radius {big_r} covers the whole graph")));
    }
    Ok((e, f))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Thresholds {
    pub divergence: f64,
    /// Capacity floor as a fraction of the first capacity value.
    pub floor_fraction: f64,
    pub plateau_tolerance: f64,
    pub plateau_samples: usize,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            divergence: 10.0,
            floor_fraction: 1e-3,
            plateau_tolerance: 0.05,
            plateau_samples: 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Parabolic,
    Hyperbolic,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassificationReport {
    pub verdict: Verdict,
    pub inner_radius: f64,
    /// `(R_k, cap_p(B(x0, r), X \ B(x0, R_k)))`.
    pub capacities: Vec<(f64, f64)>,
    pub volume_sums: Vec<f64>,
    pub shell_sums: Vec<f64>,
    pub thresholds: Thresholds,
    pub parabolic_evidence: bool,
    pub hyperbolic_evidence: bool,
    /// First scheduled radius whose ball covers the graph, if any.
    pub exhausted_at: Option<f64>,
    /// All capacity solves met their stopping rule.
    pub converged: bool,
}

impl ClassificationReport {
    /// Whole schedule was usable and every solve converged.
    pub fn complete(&self) -> bool {
        self.exhausted_at.is_none() && self.converged
    }
}

/// Runs the capacity sequence, volume test and shell-sum test along the
/// schedule. `radii[0]` is the inner radius; the rest are outer radii.
pub fn classify_parabolic(
    g: &MetricMeasureGraph,
    x0: usize,
    p: f64,
    radii: &[f64],
    thresholds: &Thresholds,
    tol: f64,
) -> Result<ClassificationReport> {
    if radii.len() < 2 {
        return Err(Error::input(
            "schedule needs an inner radius and at least one outer radius",
        ));
    }
    if radii.windows(2).any(|w| !(w[1] > w[0])) || !(radii[0] > 0.0) {
        return Err(Error::input("radii must be positive and strictly increasing"));
    }
    if x0 >= g.n() {
        return Err(Error::UnknownVertex(format!("#{x0}")));
    }
    let dist = g.distances(x0);
    let usable = radii
        .iter()
        .take_while(|&&r| ball_from_dist(&dist, r).len() < g.n())
        .count();
    let exhausted_at = radii.get(usable).copied();
    let inner = ball_from_dist(&dist, radii[0]);
    if inner.is_empty() {
        return Err(Error::input("inner ball is empty"));
    }

    let mut capacities = Vec::new();
    let mut converged = true;
    let mut warm: Option<Vec<f64>> = None;
    for &big_r in &radii[1..usable.max(1)] {
        let zeros = ball_from_dist(&dist, big_r).complement(g.n());
        let c = capacity_warm(g, &inner, &zeros, p, tol, warm.as_deref())?;
        converged &= c.converged;
        capacities.push((big_r, c.value));
        warm = Some(c.minimizer.u);
    }

    let mut volume_sums = Vec::new();
    let mut shell_sums = Vec::new();
    if p > 1.0 {
        let mut acc = 0.0;
        for k in 1..usable {
            let r = radii[k];
            let v: f64 = (0..g.n()).filter(|&i| dist[i] < r).map(|i| g.vertices[i].mu).sum();
            acc += (r / v).powf(1.0 / (p - 1.0)) * (r - radii[k - 1]);
            volume_sums.push(acc);
        }
        if usable >= 2 {
            let ex = annular_exhaustion(g, x0, &radii[..usable])?;
            let mut acc = 0.0;
            for (d, m) in ex.gaps.iter().zip(&ex.shell_measures) {
                acc += (d.powf(p) / m).powf(1.0 / (p - 1.0));
                shell_sums.push(acc);
            }
        }
    }

    let last_sum = |v: &[f64]| v.last().copied().unwrap_or(0.0);
    let divergent = last_sum(&volume_sums) > thresholds.divergence || last_sum(&shell_sums) > thresholds.divergence;
    let k = thresholds.plateau_samples.max(2);
    let (mut decayed, mut plateau) = (false, false);
    if capacities.len() >= k {
        let first = capacities[0].1;
        let last = capacities[capacities.len() - 1].1;
        let floor = thresholds.floor_fraction * first;
        let earlier = capacities[capacities.len() - k].1;
        decayed = last < floor;
        plateau = last >= floor && earlier > 0.0 && (earlier - last) / earlier <= thresholds.plateau_tolerance;
    }
    let parabolic_evidence = divergent || decayed;
    let hyperbolic_evidence = plateau;
    let verdict = match (parabolic_evidence, hyperbolic_evidence) {
        (true, false) => Verdict::Parabolic,
        (false, true) => Verdict::Hyperbolic,
        _ => Verdict::Inconclusive,
    };
    Ok(ClassificationReport {
        verdict,
        inner_radius: radii[0],
        capacities,
        volume_sums,
        shell_sums,
        thresholds: thresholds.clone(),
        parabolic_evidence,
        hyperbolic_evidence,
        exhausted_at,
        converged,
    })
}
