//! Hyperbolic space in polar coordinates `(r, θ) ∈ (0, ∞) × S^{n-1}`, where
//! the metric is `dr² + sinh²(r) g_S` and the volume is `sinh^{n-1}(r) dr dθ`.
//! Functions are sampled on tensor grids; the module evaluates norms, sphere
//! averages, the average and lateral estimates, traces at infinity, the
//! one-dimensional exponential Sobolev inequality and the radial modulus
//! bound, and runs the classification harness on both sides of `p = n - 1`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};

/// Tensor grid. Radial nodes are `r_i = i·Δr`, `i = 1..=M`; the integrand
/// is taken to vanish at `r = 0` (the Jacobian does), which gives every
/// node weight `Δr` except the last (`Δr/2`). Angular nodes are
/// `(i + 1/2)Δθ` on the circle, or colatitude midpoints times longitudes on
/// the 2-sphere with exact cell areas as weights.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolarGrid {
    pub n: usize,
    pub dr: f64,
    pub r: Vec<f64>,
    pub wr: Vec<f64>,
    /// Unit vectors of the angular nodes (3-vectors; `z = 0` when `n = 2`).
    pub dirs: Vec<[f64; 3]>,
    pub wa: Vec<f64>,
    pub n_colat: usize,
    pub n_lon: usize,
}

pub fn make_polar_grid(n: usize, r_max: f64, m: usize, n_ang: usize) -> Result<PolarGrid> {
    if n != 2 && n != 3 {
        return Err(Error::input(format!("dimension {n} unsupported, use 2 or 3")));
    }
    if m < 8 || n_ang < 8 {
        return Err(Error::input("need at least 8 radial and 8 angular nodes"));
    }
    if !(r_max > 0.0) {
        return Err(Error::input("r_max must be positive"));
    }
    let dr = r_max / m as f64;
    let r: Vec<f64> = (1..=m).map(|i| i as f64 * dr).collect();
    let mut wr = vec![dr; m];
    wr[m - 1] = dr / 2.0;
    let (n_colat, n_lon) = if n == 2 { (1, n_ang) } else { (n_ang / 2, n_ang) };
    let dl = 2.0 * PI / n_lon as f64;
    let mut dirs = Vec::with_capacity(n_colat * n_lon);
    let mut wa = Vec::with_capacity(n_colat * n_lon);
    if n == 2 {
        for j in 0..n_lon {
            let t = (j as f64 + 0.5) * dl;
            dirs.push([t.cos(), t.sin(), 0.0]);
            wa.push(dl);
        }
    } else {
        let dp = PI / n_colat as f64;
        for i in 0..n_colat {
            let phi = (i as f64 + 0.5) * dp;
            let band = (phi - dp / 2.0).cos() - (phi + dp / 2.0).cos();
            for j in 0..n_lon {
                let l = (j as f64 + 0.5) * dl;
                dirs.push([phi.sin() * l.cos(), phi.sin() * l.sin(), phi.cos()]);
                wa.push(band * dl);
            }
        }
    }
    Ok(PolarGrid {
        n,
        dr,
        r,
        wr,
        dirs,
        wa,
        n_colat,
        n_lon,
    })
}

impl PolarGrid {
    pub fn m(&self) -> usize {
        self.r.len()
    }

    pub fn a(&self) -> usize {
        self.dirs.len()
    }

    pub fn sphere_volume(&self) -> f64 {
        self.wa.iter().sum()
    }

    /// Index of the radial node equal to `r` (up to rounding).
    pub fn radial_index(&self, r: f64) -> Result<usize> {
        let k = (r / self.dr).round() as usize;
        if k >= 1 && k <= self.m() && (k as f64 * self.dr - r).abs() <= 1e-9 * r.max(1.0) {
            Ok(k - 1)
        } else {
            Err(Error::input(format!("radius {r} is not a grid radius")))
        }
    }

    fn jac(&self, i: usize) -> f64 {
        self.r[i].sinh().powi(self.n as i32 - 1)
    }

    /// Trapezoid weights on the radial nodes `lo..=hi`.
    fn band_weights(&self, lo: usize, hi: usize) -> Vec<(usize, f64)> {
        if lo == hi {
            return vec![(lo, 0.0)];
        }
        (lo..=hi)
            .map(|i| (i, if i == lo || i == hi { self.dr / 2.0 } else { self.dr }))
            .collect()
    }
}

/// Samples `f(r_i, θ_a)` stored row-major by radius, with finite-difference
/// derivatives: `d_r` is `∂_r f`, `d_s` is the norm of the spherical
/// gradient on the unit sphere.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarFunction {
    pub values: Vec<f64>,
    pub d_r: Vec<f64>,
    pub d_s: Vec<f64>,
}

impl PolarFunction {
    pub fn sample<F: Fn(f64, [f64; 3]) -> f64>(grid: &PolarGrid, f: F) -> Self {
        let mut values = Vec::with_capacity(grid.m() * grid.a());
        for &r in &grid.r {
            for d in &grid.dirs {
                values.push(f(r, *d));
            }
        }
        Self::from_values(grid, values).expect("sample has grid shape")
    }

    /// Central differences in the interior, one-sided at the radial ends
    /// and at the extreme colatitudes; longitude is periodic.
    pub fn from_values(grid: &PolarGrid, values: Vec<f64>) -> Result<Self> {
        let (m, a) = (grid.m(), grid.a());
        if values.len() != m * a {
            return Err(Error::input(format!(
                "expected {} samples, got {}",
                m * a,
                values.len()
            )));
        }
        let at = |i: usize, k: usize| values[i * a + k];
        let mut d_r = vec![0.0; m * a];
        for i in 0..m {
            for k in 0..a {
                d_r[i * a + k] = if i == 0 {
                    (at(1, k) - at(0, k)) / grid.dr
                } else if i + 1 == m {
                    (at(m - 1, k) - at(m - 2, k)) / grid.dr
                } else {
                    (at(i + 1, k) - at(i - 1, k)) / (2.0 * grid.dr)
                };
            }
        }
        let (nc, nl) = (grid.n_colat, grid.n_lon);
        let dl = 2.0 * PI / nl as f64;
        let dp = PI / nc as f64;
        let mut d_s = vec![0.0; m * a];
        for i in 0..m {
            for c in 0..nc {
                let phi = (c as f64 + 0.5) * dp;
                for l in 0..nl {
                    let k = c * nl + l;
                    let kp = c * nl + (l + 1) % nl;
                    let km = c * nl + (l + nl - 1) % nl;
                    let dlon = (at(i, kp) - at(i, km)) / (2.0 * dl);
                    d_s[i * a + k] = if grid.n == 2 {
                        dlon.abs()
                    } else {
                        let dphi = if nc == 1 {
                            0.0
                        } else if c == 0 {
                            (at(i, nl + l) - at(i, l)) / dp
                        } else if c + 1 == nc {
                            (at(i, k) - at(i, k - nl)) / dp
                        } else {
                            (at(i, k + nl) - at(i, k - nl)) / (2.0 * dp)
                        };
                        (dphi * dphi + (dlon / phi.sin()).powi(2)).sqrt()
                    };
                }
            }
        }
        Ok(PolarFunction { values, d_r, d_s })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HyperbolicNorms {
    /// `∫ sinh^{n-1} |f|^p`.
    pub lp: f64,
    /// `∫ sinh^{n-1} |∂_r f|^p`.
    pub radial: f64,
    /// `∫ sinh^{n-1-p} |d_S f|^p`.
    pub angular: f64,
}

fn check_shape(f: &PolarFunction, grid: &PolarGrid) -> Result<()> {
    if f.values.len() != grid.m() * grid.a() {
        return Err(Error::input("function does not match the grid"));
    }
    Ok(())
}

fn norms_over(f: &PolarFunction, p: f64, grid: &PolarGrid, rows: &[(usize, f64)], cells: &[usize]) -> HyperbolicNorms {
    let a = grid.a();
    let mut out = HyperbolicNorms {
        lp: 0.0,
        radial: 0.0,
        angular: 0.0,
    };
    for &(i, w) in rows {
        let jac = grid.jac(i);
        let ang = grid.r[i].sinh().powf(grid.n as f64 - 1.0 - p);
        let (mut s0, mut s1, mut s2) = (0.0, 0.0, 0.0);
        for &k in cells {
            let idx = i * a + k;
            s0 += grid.wa[k] * f.values[idx].abs().powf(p);
            s1 += grid.wa[k] * f.d_r[idx].abs().powf(p);
            s2 += grid.wa[k] * f.d_s[idx].powf(p);
        }
        out.lp += w * jac * s0;
        out.radial += w * jac * s1;
        out.angular += w * ang * s2;
    }
    out
}

pub fn hyperbolic_norms(f: &PolarFunction, p: f64, grid: &PolarGrid) -> Result<HyperbolicNorms> {
    check_shape(f, grid)?;
    let rows: Vec<(usize, f64)> = grid.wr.iter().copied().enumerate().collect();
    let cells: Vec<usize> = (0..grid.a()).collect();
    Ok(norms_over(f, p, grid, &rows, &cells))
}

/// As [`hyperbolic_norms`], restricted to the radial band `[lo, hi]`
/// (both grid radii).
pub fn hyperbolic_norms_band(f: &PolarFunction, p: f64, grid: &PolarGrid, lo: f64, hi: f64) -> Result<HyperbolicNorms> {
    check_shape(f, grid)?;
    let (i0, i1) = (grid.radial_index(lo)?, grid.radial_index(hi)?);
    if i0 > i1 {
        return Err(Error::input("band is reversed"));
    }
    let cells: Vec<usize> = (0..grid.a()).collect();
    Ok(norms_over(f, p, grid, &grid.band_weights(i0, i1), &cells))
}

/// Set of angular nodes standing in for a measurable subset of the sphere.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cell {
    pub nodes: Vec<usize>,
    pub measure: f64,
}

impl Cell {
    fn from_nodes(grid: &PolarGrid, nodes: Vec<usize>) -> Result<Cell> {
        if nodes.is_empty() {
            return Err(Error::input("set is empty on the angular grid"));
        }
        let measure = nodes.iter().map(|&k| grid.wa[k]).sum();
        Ok(Cell { nodes, measure })
    }

    pub fn whole(grid: &PolarGrid) -> Cell {
        Cell::from_nodes(grid, (0..grid.a()).collect()).expect("grid is nonempty")
    }

    /// Nodes within angle `alpha` of `center`.
    pub fn cap(grid: &PolarGrid, center: [f64; 3], alpha: f64) -> Result<Cell> {
        let c = normalize(center);
        let nodes = (0..grid.a())
            .filter(|&k| dot(grid.dirs[k], c).clamp(-1.0, 1.0).acos() <= alpha)
            .collect();
        Cell::from_nodes(grid, nodes)
    }
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn normalize(a: [f64; 3]) -> [f64; 3] {
    let s = dot(a, a).sqrt();
    [a[0] / s, a[1] / s, a[2] / s]
}

/// Partition of the sphere into `k` cells: longitude sectors on the circle,
/// colatitude bands on the 2-sphere.
pub fn sphere_partition(grid: &PolarGrid, k: usize) -> Result<Vec<Cell>> {
    let count = if grid.n == 2 { grid.n_lon } else { grid.n_colat };
    if k < 2 || k > count {
        return Err(Error::input(format!("partition size must be in 2..={count}")));
    }
    let mut groups = vec![Vec::new(); k];
    for idx in 0..grid.a() {
        let pos = if grid.n == 2 { idx } else { idx / grid.n_lon };
        groups[pos * k / count].push(idx);
    }
    groups.into_iter().map(|g| Cell::from_nodes(grid, g)).collect()
}

/// Weighted mean of `f(r, ·)` over the cell.
pub fn cap_average(f: &PolarFunction, grid: &PolarGrid, e: &Cell, r: f64) -> Result<f64> {
    check_shape(f, grid)?;
    let i = grid.radial_index(r)?;
    Ok(row_average(f, grid, e, i))
}

fn row_average(f: &PolarFunction, grid: &PolarGrid, e: &Cell, i: usize) -> f64 {
    let a = grid.a();
    e.nodes.iter().map(|&k| grid.wa[k] * f.values[i * a + k]).sum::<f64>() / e.measure
}

/// `‖w‖_{L^{p/(p-1)}([a, b])}`, the sup norm when `p = 1`. Composite
/// Simpson on a fine subdivision of its own.
pub fn dual_norm<F: Fn(f64) -> f64>(w: F, a: f64, b: f64, p: f64) -> f64 {
    let steps = 4000;
    let h = (b - a) / steps as f64;
    if p == 1.0 {
        return (0..=steps).map(|k| w(a + k as f64 * h).abs()).fold(0.0, f64::max);
    }
    let q = p / (p - 1.0);
    let g = |t: f64| w(t).abs().powf(q);
    let mut s = g(a) + g(b);
    for k in 1..steps {
        s += if k % 2 == 1 { 4.0 } else { 2.0 } * g(a + k as f64 * h);
    }
    (s * h / 3.0).powf(1.0 / q)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub norm_factor: f64,
    pub energy: f64,
    pub constant: f64,
    /// The constant's provenance or a branch note.
    pub label: String,
    pub holds: bool,
}

/// Both sides of the average estimate
/// `|u_{E,s} - u_{E,r}| <= vol(E)^{-1/p} ‖sinh^{-(n-1)/p}‖_{L^{p'}([r,s])} (∫_{E×[r,s]} |du|^p)^{1/p}`,
/// with `|du|² = (∂_r f)² + sinh^{-2} |d_S f|²` pointwise.
pub fn cauchy_bound(f: &PolarFunction, grid: &PolarGrid, e: &Cell, r: f64, s: f64, p: f64) -> Result<BoundCheck> {
    check_shape(f, grid)?;
    let (i0, i1) = (grid.radial_index(r)?, grid.radial_index(s)?);
    if i0 >= i1 {
        return Err(Error::input("need r < s"));
    }
    let lhs = (row_average(f, grid, e, i1) - row_average(f, grid, e, i0)).abs();
    let n1 = grid.n as f64 - 1.0;
    let norm_factor = dual_norm(|t| t.sinh().powf(-n1 / p), r, s, p);
    let a = grid.a();
    let mut energy = 0.0;
    for (i, w) in grid.band_weights(i0, i1) {
        let sh = grid.r[i].sinh();
        let row: f64 = e
            .nodes
            .iter()
            .map(|&k| {
                let (gr, gs) = (f.d_r[i * a + k], f.d_s[i * a + k] / sh);
                grid.wa[k] * (gr * gr + gs * gs).powf(p / 2.0)
            })
            .sum();
        energy += w * grid.jac(i) * row;
    }
    let rhs = e.measure.powf(-1.0 / p) * norm_factor * energy.powf(1.0 / p);
    let label = if p == 1.0 {
        "sup-norm dual factor".to_string()
    } else {
        "exact constant 1".to_string()
    };
    Ok(BoundCheck {
        lhs,
        rhs,
        norm_factor,
        energy,
        constant: 1.0,
        label,
        holds: lhs <= rhs * (1.0 + 1e-9),
    })
}

/// Two caps of equal angular radius.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CapPair {
    pub c1: [f64; 3],
    pub c2: [f64; 3],
    pub alpha: f64,
}

impl CapPair {
    /// Angular separation of the centres.
    pub fn separation(&self) -> f64 {
        dot(normalize(self.c1), normalize(self.c2)).clamp(-1.0, 1.0).acos()
    }
}

/// Constant of the lateral estimate obtained by following its proof:
/// `√2` from the twisted path speed, `2^{(p-1)/p}` from splitting
/// `|df|^p` into radial and angular parts, and a final factor 2 from
/// comparing both caps with the rotated intermediate cap.
pub fn lateral_constant(p: f64) -> f64 {
    2.0 * 2f64.sqrt() * 2f64.powf((p - 1.0) / p)
}

/// Both sides of the lateral estimate between two isometric caps at radius
/// `r > asinh(1)`, with energy `∫ sinh^{n-1}|∂_r f|^p + sinh^{n-1-p}|d_S f|^p`
/// over the full band `[r, r + π/2]` (grid nodes inside the band).
pub fn lateral_bound(f: &PolarFunction, grid: &PolarGrid, caps: &CapPair, r: f64, p: f64) -> Result<BoundCheck> {
    check_shape(f, grid)?;
    if !(r > 1f64.asinh()) {
        return Err(Error::input(format!("lateral estimate needs r > asinh(1), got {r}")));
    }
    let sep = caps.separation();
    if !(sep > 0.0) {
        return Err(Error::input("cap centres coincide"));
    }
    let i0 = grid.radial_index(r)?;
    let top = r + PI / 2.0;
    if top > *grid.r.last().unwrap() + 1e-12 {
        return Err(Error::input("band [r, r + π/2] leaves the grid"));
    }
    let i1 = grid.r.iter().rposition(|&t| t <= top + 1e-12).unwrap();
    let c1 = Cell::cap(grid, caps.c1, caps.alpha)?;
    let c2 = Cell::cap(grid, caps.c2, caps.alpha)?;
    let lhs = (row_average(f, grid, &c1, i0) - row_average(f, grid, &c2, i0)).abs();
    let n1 = grid.n as f64 - 1.0;
    let norm_factor = dual_norm(|t| t.sinh().powf(1.0 - n1 / p), r, top, p);
    let cells: Vec<usize> = (0..grid.a()).collect();
    let nb = norms_over(f, p, grid, &grid.band_weights(i0, i1), &cells);
    let energy = nb.radial + nb.angular;
    let constant = lateral_constant(p);
    let rhs = constant * c1.measure.powf(-1.0 / p) * norm_factor * energy.powf(1.0 / p);
    let mut label = "proof-traced constant".to_string();
    if p > n1 {
        label.push_str("; p > n-1, no decay expected");
    }
    Ok(BoundCheck {
        lhs,
        rhs,
        norm_factor,
        energy,
        constant,
        label,
        holds: lhs <= rhs * (1.0 + 1e-9),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceReport {
    pub schedule: Vec<f64>,
    /// `averages[c][t]`: mean over cell `c` at `schedule[t]`.
    pub averages: Vec<Vec<f64>>,
    /// Per-cell Cauchy checks between consecutive scheduled radii.
    pub cauchy: Vec<Vec<BoundCheck>>,
    pub limits: Vec<f64>,
    pub spread: f64,
    pub last_k: usize,
    pub constant: bool,
    pub tolerance: f64,
}

/// Cell averages along the schedule, limits as means of the last `k`
/// samples, and their spread.
pub fn trace_report(
    f: &PolarFunction,
    grid: &PolarGrid,
    cells: &[Cell],
    schedule: &[f64],
    p: f64,
    k: usize,
    tolerance: f64,
) -> Result<TraceReport> {
    check_shape(f, grid)?;
    if k == 0 || schedule.len() < k {
        return Err(Error::input(format!("schedule needs at least {k} radii")));
    }
    if schedule.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::input("schedule must be increasing"));
    }
    let idx: Vec<usize> = schedule.iter().map(|&r| grid.radial_index(r)).collect::<Result<_>>()?;
    let mut averages = Vec::new();
    let mut cauchy = Vec::new();
    let mut limits = Vec::new();
    for c in cells {
        let row: Vec<f64> = idx.iter().map(|&i| row_average(f, grid, c, i)).collect();
        let checks = schedule
            .windows(2)
            .map(|w| cauchy_bound(f, grid, c, w[0], w[1], p))
            .collect::<Result<Vec<_>>>()?;
        limits.push(row[row.len() - k..].iter().sum::<f64>() / k as f64);
        averages.push(row);
        cauchy.push(checks);
    }
    let hi = limits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = limits.iter().copied().fold(f64::INFINITY, f64::min);
    let spread = hi - lo;
    Ok(TraceReport {
        schedule: schedule.to_vec(),
        averages,
        cauchy,
        limits,
        spread,
        last_k: k,
        constant: spread < tolerance,
        tolerance,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SobolevCheck {
    pub kappa: f64,
    pub p: f64,
    /// `∫ |f|^p e^{κt}`.
    pub lhs: f64,
    /// `∫ |f'|^p e^{κt}`.
    pub derivative_integral: f64,
    /// `(p/κ)^p ∫ |f'|^p e^{κt}`.
    pub rhs: f64,
    /// Integrals were computed in closed form (integer `p`).
    pub exact: bool,
    pub pass: bool,
}

/// `∫_a^b (c0 + c1 (t-a))^m e^{κt} dt` for a nonnegative linear factor,
/// via `∫ P e^{κt} = e^{κt} Σ_j (-1)^j P^{(j)} / κ^{j+1}`.
fn poly_exp_integral(c0: f64, c1: f64, m: u32, a: f64, b: f64, kappa: f64) -> f64 {
    let eval = |t: f64| -> f64 {
        let x = c0 + c1 * (t - a);
        let mut s = 0.0;
        let mut falling = 1.0;
        for j in 0..=m {
            let deriv = falling * c1.powi(j as i32) * x.powi((m - j) as i32);
            s += if j % 2 == 0 { 1.0 } else { -1.0 } * deriv / kappa.powi(j as i32 + 1);
            falling *= (m - j) as f64;
        }
        s * (kappa * t).exp()
    };
    eval(b) - eval(a)
}

fn simpson<F: Fn(f64) -> f64>(g: F, a: f64, b: f64, steps: usize) -> f64 {
    let h = (b - a) / steps as f64;
    let mut s = g(a) + g(b);
    for k in 1..steps {
        s += if k % 2 == 1 { 4.0 } else { 2.0 } * g(a + k as f64 * h);
    }
    s * h / 3.0
}

/// Checks `∫|f|^p e^{κt} <= (p/κ)^p ∫|f'|^p e^{κt}` for the piecewise-linear
/// interpolant of `(t_i, f_i)`. The end values must vanish within `1e-12`.
pub fn one_dim_sobolev_check(t: &[f64], f: &[f64], kappa: f64, p: f64) -> Result<SobolevCheck> {
    if t.len() != f.len() || t.len() < 2 {
        return Err(Error::input("need matching knots and values, at least two"));
    }
    if t.windows(2).any(|w| !(w[1] > w[0])) || !(t[0] >= 0.0) {
        return Err(Error::input("knots must be nonnegative and increasing"));
    }
    if !(kappa > 0.0) || !(p >= 1.0) {
        return Err(Error::input("need kappa > 0 and p >= 1"));
    }
    let scale = f.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    if f[0].abs() > 1e-12 * scale || f[f.len() - 1].abs() > 1e-12 * scale {
        return Err(Error::input("f must vanish at both ends"));
    }
    let exact = p.fract() == 0.0;
    let (mut lhs, mut der) = (0.0, 0.0);
    for w in 0..t.len() - 1 {
        let (a, b) = (t[w], t[w + 1]);
        let (fa, fb) = (f[w], f[w + 1]);
        let slope = (fb - fa) / (b - a);
        der += slope.abs().powf(p) * ((kappa * b).exp() - (kappa * a).exp()) / kappa;
        if exact {
            // Split at a sign change so the linear factor keeps one sign.
            let mut pieces = vec![(a, fa, b)];
            if fa * fb < 0.0 {
                let z = a - fa / slope;
                pieces = vec![(a, fa, z), (z, 0.0, b)];
            }
            for (x0, v0, x1) in pieces {
                let mid = v0 + slope * (x1 - x0) / 2.0;
                let sign = if mid < 0.0 { -1.0 } else { 1.0 };
                lhs += poly_exp_integral(sign * v0, sign * slope, p as u32, x0, x1, kappa);
            }
        } else {
            lhs += simpson(|s| (fa + slope * (s - a)).abs().powf(p) * (kappa * s).exp(), a, b, 2000);
        }
    }
    let rhs = (p / kappa).powf(p) * der;
    Ok(SobolevCheck {
        kappa,
        p,
        lhs,
        derivative_integral: der,
        rhs,
        exact,
        pass: lhs <= rhs * (1.0 + 1e-8),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RadialModulusBound {
    pub c_np: f64,
    /// `2^n ρ^{n-1} H(E) / (C^n (1-ρ)^{n-1})`, as displayed in the final step.
    pub bound_power_n: f64,
    /// Same with `C^p`, the power produced by the preceding estimate.
    pub bound_power_p: f64,
}

/// Lower bound for the modulus of radial segments from `ρE` (Euclidean
/// radius `ρ` in the ball model) to the sphere at infinity.
pub fn radial_modulus_lower_bound(e_measure: f64, rho: f64, n: usize, p: f64) -> Result<RadialModulusBound> {
    if !(rho > 0.0 && rho < 1.0) || !(e_measure > 0.0) || n < 2 || !(p >= 1.0) {
        return Err(Error::input("need 0 < rho < 1, E measure > 0, n >= 2, p >= 1"));
    }
    let nf = n as f64;
    let c_np = if p == 1.0 {
        1.0
    } else {
        ((p - 1.0) / (nf - 1.0)).powf((p - 1.0) / p)
    };
    let core = 2f64.powf(nf) * rho.powf(nf - 1.0) * e_measure / (1.0 - rho).powf(nf - 1.0);
    Ok(RadialModulusBound {
        c_np,
        bound_power_n: core / c_np.powf(nf),
        bound_power_p: core / c_np.powf(p),
    })
}

/// Zonal profile used by the cap witness: `ψ = 0` where
/// `(1 - cos α)/2 <= 1/4`, `ψ = 1` where it is `>= 3/4`, smooth between;
/// `α` is the angle to the pole `(1, 0, 0)` on the circle or `(0, 0, 1)` on
/// the 2-sphere.
pub fn cap_profile(alpha: f64) -> f64 {
    smootherstep((0.5 * (1.0 - alpha.cos()) - 0.25) / 0.5)
}

/// Radial cutoff: 0 on `[0, 1/2]`, 1 on `[1, ∞)`.
pub fn radial_cutoff(r: f64) -> f64 {
    smootherstep((r - 0.5) / 0.5)
}

fn smootherstep(x: f64) -> f64 {
    let x = x.clamp(0.0, 1.0);
    x * x * x * (x * (6.0 * x - 15.0) + 10.0)
}

pub fn pole(n: usize) -> [f64; 3] {
    if n == 2 {
        [1.0, 0.0, 0.0]
    } else {
        [0.0, 0.0, 1.0]
    }
}

/// `f(r, θ) = η(r) ψ(θ)`.
pub fn cap_witness(grid: &PolarGrid) -> PolarFunction {
    let pl = pole(grid.n);
    PolarFunction::sample(grid, |r, d| {
        radial_cutoff(r) * cap_profile(dot(d, pl).clamp(-1.0, 1.0).acos())
    })
}

/// Five functions of finite `p`-energy used on the equality side, with the
/// decay rate `a = (n-1)/p + 1/2`.
pub fn equality_suite(grid: &PolarGrid, p: f64) -> Vec<(String, PolarFunction)> {
    let a = (grid.n as f64 - 1.0) / p + 0.5;
    let pl = pole(grid.n);
    let psi = move |d: [f64; 3]| cap_profile(dot(d, pl).clamp(-1.0, 1.0).acos());
    vec![
        ("tanh_r".to_string(), PolarFunction::sample(grid, |r, _| r.tanh())),
        (
            "decaying_cap".to_string(),
            PolarFunction::sample(grid, move |r, d| (-a * r).exp() * psi(d)),
        ),
        (
            "one_minus_decaying_cap".to_string(),
            PolarFunction::sample(grid, move |r, d| 1.0 - (-a * r).exp() * psi(d)),
        ),
        (
            "tanh_plus_dipole".to_string(),
            PolarFunction::sample(grid, move |r, d| r.tanh() + (-a * r).exp() * d[0]),
        ),
        (
            "decaying_quadrupole".to_string(),
            PolarFunction::sample(grid, move |r, d| 2.0 + (-a * r).exp() * d[0] * d[1]),
        ),
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RayLimits {
    pub rays: Vec<usize>,
    pub limits: Vec<f64>,
    /// Each ray passed the radial Cauchy check at every step.
    pub cauchy_ok: Vec<bool>,
    pub common_limit: bool,
    pub tolerance: f64,
}

/// Limits of `f(·, θ)` along sampled rays (mean of the last `k` scheduled
/// values), each step checked against
/// `|f(s,θ) - f(r,θ)| <= ‖sinh^{-(n-1)/p}‖_{L^{p'}([r,s])} (∫_r^s sinh^{n-1} |∂_r f|^p)^{1/p}`.
pub fn limit_along_rays(
    f: &PolarFunction,
    grid: &PolarGrid,
    rays: &[usize],
    schedule: &[f64],
    p: f64,
    k: usize,
    tolerance: f64,
) -> Result<RayLimits> {
    check_shape(f, grid)?;
    if k == 0 || schedule.len() < k || schedule.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::input(format!(
            "schedule must be increasing with at least {k} radii"
        )));
    }
    if rays.iter().any(|&q| q >= grid.a()) {
        return Err(Error::input("ray index out of range"));
    }
    let idx: Vec<usize> = schedule.iter().map(|&r| grid.radial_index(r)).collect::<Result<_>>()?;
    let a = grid.a();
    let n1 = grid.n as f64 - 1.0;
    let mut limits = Vec::new();
    let mut cauchy_ok = Vec::new();
    for &q in rays {
        let vals: Vec<f64> = idx.iter().map(|&i| f.values[i * a + q]).collect();
        limits.push(vals[vals.len() - k..].iter().sum::<f64>() / k as f64);
        let mut ok = true;
        for w in 0..idx.len() - 1 {
            let (i0, i1) = (idx[w], idx[w + 1]);
            let nf = dual_norm(|t| t.sinh().powf(-n1 / p), grid.r[i0], grid.r[i1], p);
            let e: f64 = grid
                .band_weights(i0, i1)
                .into_iter()
                .map(|(i, wt)| wt * grid.jac(i) * f.d_r[i * a + q].abs().powf(p))
                .sum();
            let lhs = (vals[w + 1] - vals[w]).abs();
            // Allow for the trapezoid error of the energy integral.
            ok &= lhs <= nf * e.powf(1.0 / p) * (1.0 + 1e-6) + 1e-12;
        }
        cauchy_ok.push(ok);
    }
    let hi = limits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = limits.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(RayLimits {
        rays: rays.to_vec(),
        limits,
        cauchy_ok,
        common_limit: hi - lo < tolerance,
        tolerance,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum HnSide {
    StrictInclusionObserved,
    EqualityConsistent,
    Inconsistent,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StrictEvidence {
    pub norms: HyperbolicNorms,
    /// Angular energy over `[1, R_max]`.
    pub angular_from_one: f64,
    pub trace: TraceReport,
    pub truncations: Vec<f64>,
    pub c_grid: Vec<f64>,
    /// `l_p_tails[c][t]`: `∫_{r <= truncations[t]} sinh^{n-1} |f - c|^p`.
    pub l_p_tails: Vec<Vec<f64>>,
    pub monotone_unbounded: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EqualityEntry {
    pub name: String,
    pub norms: HyperbolicNorms,
    pub lateral: Vec<BoundCheck>,
    pub trace: TraceReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HnVerdict {
    pub n: usize,
    pub p: f64,
    pub side: HnSide,
    pub strict: Option<StrictEvidence>,
    pub equality: Vec<EqualityEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HarnessOptions {
    pub partition_cells: usize,
    pub last_k: usize,
    /// Trace spread below which the trace counts as constant.
    pub spread_tolerance: f64,
    /// Spread at or above which the trace counts as non-constant.
    pub nonconstant_spread: f64,
    /// Required growth of the truncated tails from `R_max/2` to `R_max`.
    pub growth_factor: f64,
}

impl Default for HarnessOptions {
    fn default() -> Self {
        HarnessOptions {
            partition_cells: 8,
            last_k: 5,
            spread_tolerance: 1e-2,
            nonconstant_spread: 0.9,
            growth_factor: 10.0,
        }
    }
}

/// Runs the side of the classification that `(n, p)` falls on: the cap
/// witness when `p > n - 1`, the equality suite with lateral bounds at
/// every scheduled radius otherwise.
pub fn hn_classification_harness(
    p: f64,
    grid: &PolarGrid,
    caps: &CapPair,
    schedule: &[f64],
    opts: &HarnessOptions,
) -> Result<HnVerdict> {
    let n = grid.n;
    let n1 = n as f64 - 1.0;
    let cells = sphere_partition(grid, opts.partition_cells)?;
    let r_max = *grid.r.last().unwrap();
    if p > n1 {
        let f = cap_witness(grid);
        let norms = hyperbolic_norms(&f, p, grid)?;
        let angular_from_one = hyperbolic_norms_band(&f, p, grid, 1.0, r_max)?.angular;
        let trace = trace_report(&f, grid, &cells, schedule, p, opts.last_k, opts.spread_tolerance)?;
        let m = grid.m();
        let a = grid.a();
        // Truncation radii from R_max/2 to R_max.
        let cut: Vec<usize> = (0..=8).map(|j| m / 2 - 1 + (m - m / 2) * j / 8).collect();
        let truncations: Vec<f64> = cut.iter().map(|&i| grid.r[i]).collect();
        let c_grid: Vec<f64> = (0..=20).map(|j| -0.5 + 2.0 * j as f64 / 20.0).collect();
        let mut l_p_tails = Vec::new();
        let mut monotone_unbounded = true;
        for &c in &c_grid {
            let rows: Vec<f64> = (0..m)
                .map(|i| {
                    grid.jac(i)
                        * (0..a)
                            .map(|q| grid.wa[q] * (f.values[i * a + q] - c).abs().powf(p))
                            .sum::<f64>()
                })
                .collect();
            let row: Vec<f64> = cut
                .iter()
                .map(|&t| grid.dr * (rows[..t].iter().sum::<f64>() + rows[t] / 2.0))
                .collect();
            monotone_unbounded &=
                row.windows(2).all(|w| w[1] > w[0]) && row[row.len() - 1] >= opts.growth_factor * row[0];
            l_p_tails.push(row);
        }
        let finite = norms.radial.is_finite() && norms.angular.is_finite();
        let side = if finite && trace.spread >= opts.nonconstant_spread && monotone_unbounded {
            HnSide::StrictInclusionObserved
        } else {
            HnSide::Inconsistent
        };
        Ok(HnVerdict {
            n,
            p,
            side,
            strict: Some(StrictEvidence {
                norms,
                angular_from_one,
                trace,
                truncations,
                c_grid,
                l_p_tails,
                monotone_unbounded,
            }),
            equality: Vec::new(),
        })
    } else {
        let mut equality = Vec::new();
        let mut ok = true;
        for (name, f) in equality_suite(grid, p) {
            let norms = hyperbolic_norms(&f, p, grid)?;
            let lateral = schedule
                .iter()
                .filter(|&&r| r + PI / 2.0 <= r_max)
                .map(|&r| lateral_bound(&f, grid, caps, r, p))
                .collect::<Result<Vec<_>>>()?;
            let trace = trace_report(&f, grid, &cells, schedule, p, opts.last_k, opts.spread_tolerance)?;
            ok &= lateral.iter().all(|b| b.holds) && trace.constant;
            equality.push(EqualityEntry {
                name,
                norms,
                lateral,
                trace,
            });
        }
        let side = if ok {
            HnSide::EqualityConsistent
        } else {
            HnSide::Inconsistent
        };
        Ok(HnVerdict {
            n,
            p,
            side,
            strict: None,
            equality,
        })
    }
}
