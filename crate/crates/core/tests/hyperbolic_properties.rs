use std::f64::consts::PI;

use potlab::hyperbolic::{
    cap_profile, cap_witness, cauchy_bound, dual_norm, equality_suite, hyperbolic_norms, hyperbolic_norms_band,
    lateral_bound, limit_along_rays, make_polar_grid, one_dim_sobolev_check, pole, radial_modulus_lower_bound,
    sphere_partition, CapPair, Cell, PolarFunction,
};
use proptest::prelude::*;

fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, steps: usize) -> f64 {
    let h = (b - a) / steps as f64;
    let mut s = f(a) + f(b);
    for k in 1..steps {
        s += if k % 2 == 1 { 4.0 } else { 2.0 } * f(a + k as f64 * h);
    }
    s * h / 3.0
}

#[test]
fn ball_volume_in_three_dimensions() {
    let r_max = 4.0;
    let grid = make_polar_grid(3, r_max, 800, 32).unwrap();
    let one = PolarFunction::sample(&grid, |_, _| 1.0);
    let vol = hyperbolic_norms(&one, 1.0, &grid).unwrap().lp;
    let want = 4.0 * PI * ((2.0 * r_max).sinh() / 4.0 - r_max / 2.0);
    assert!((vol - want).abs() < 1e-3 * want, "{vol} vs {want}");
}

#[test]
fn cap_witness_angular_energy_for_n3_p3() {
    // ∫_1^∞ sinh^{-1} = -ln tanh(1/2) = 0.771936...; commonly quoted as 0.77188.
    let tail = -(0.5f64.tanh()).ln();
    assert!((tail - 0.77188).abs() < 1e-4);
    let grid = make_polar_grid(3, 20.0, 200, 256).unwrap();
    let f = cap_witness(&grid);
    let band = hyperbolic_norms_band(&f, 3.0, &grid, 1.0, 20.0).unwrap();
    let dpsi = simpson(
        |a| {
            let d = (cap_profile(a + 1e-6) - cap_profile(a - 1e-6)) / 2e-6;
            d.abs().powi(3) * 2.0 * PI * a.sin()
        },
        0.0,
        PI,
        100_000,
    );
    let ratio = band.angular / dpsi;
    assert!((ratio - tail).abs() < 0.01 * tail, "{ratio} vs {tail}");
}

#[test]
fn dual_norm_matches_coth_difference() {
    // n = 3, p = 2: ‖sinh^{-1}‖_{L^2([r,s])}² = coth r - coth s.
    let coth = |x: f64| 1.0 / x.tanh();
    for (r, s) in [(0.5, 1.0), (1.0, 3.0), (2.0, 10.0)] {
        let got = dual_norm(|t| 1.0 / t.sinh(), r, s, 2.0);
        let want = (coth(r) - coth(s)).sqrt();
        assert!((got - want).abs() < 1e-4 * want, "{got} vs {want}");
    }
    // p = 1 is the sup norm.
    assert!((dual_norm(|t| 1.0 / t.sinh(), 1.0, 2.0, 1.0) - 1.0 / 1f64.sinh()).abs() < 1e-12);
}

#[test]
fn lateral_norm_factor_decays_geometrically() {
    // ‖sinh^{1-(n-1)/p}‖ over [r, r+π/2] shrinks by e^{1-(n-1)/p} per unit of r
    // once sinh is close to e^r / 2.
    for (n, p) in [(3usize, 1.5f64), (3, 1.0), (4, 2.0)] {
        let e = 1.0 - (n as f64 - 1.0) / p;
        let nf = |r: f64| dual_norm(|t| t.sinh().powf(e), r, r + PI / 2.0, p);
        let ratio = nf(9.0) / nf(8.0);
        assert!((ratio - e.exp()).abs() < 1e-4 * e.exp(), "(n,p)=({n},{p}): {ratio}");
    }
}

fn suite_cases() -> Vec<(usize, f64, potlab::hyperbolic::PolarGrid)> {
    vec![
        (3, 2.0, make_polar_grid(3, 8.0, 160, 32).unwrap()),
        (2, 1.0, make_polar_grid(2, 8.0, 160, 64).unwrap()),
        (2, 1.5, make_polar_grid(2, 8.0, 160, 64).unwrap()),
    ]
}

#[test]
fn suite_satisfies_cauchy_and_lateral_bounds() {
    for (n, p, grid) in suite_cases() {
        let pl = pole(n);
        let caps = CapPair {
            c1: pl,
            c2: [-pl[0], -pl[1], -pl[2]],
            alpha: PI / 4.0,
        };
        let cells = sphere_partition(&grid, 4).unwrap();
        for (name, f) in equality_suite(&grid, p) {
            for r in [1.0, 2.0, 3.5, 5.0, 6.0] {
                let b = lateral_bound(&f, &grid, &caps, r, p).unwrap();
                assert!(b.holds, "{name} (n,p)=({n},{p}) r={r}: {b:?}");
                for c in &cells {
                    let cb = cauchy_bound(&f, &grid, c, r, r + 1.5, p).unwrap();
                    assert!(cb.holds, "{name} (n,p)=({n},{p}) r={r}: {cb:?}");
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn cauchy_bound_on_random_smooth_functions(
        coef in prop::collection::vec(-1.0f64..1.0, 4),
        decay in 0.2f64..2.0,
        i0 in 20usize..200,
        steps in 20usize..100,
        p in prop::sample::select(vec![1.0, 1.5, 2.0, 3.0]),
    ) {
        let grid = make_polar_grid(2, 8.0, 320, 64).unwrap();
        let f = PolarFunction::sample(&grid, |t, d| {
            let th = d[1].atan2(d[0]);
            coef[0] * t.tanh() + (coef[1] * th.cos() + coef[2] * (2.0 * th).sin()) * (-decay * t).exp() + coef[3] * (1.0 + t).ln()
        });
        let (r, s) = (grid.r[i0], grid.r[i0 + steps]);
        let cell = Cell::cap(&grid, [1.0, 0.0, 0.0], PI / 3.0).unwrap();
        let b = cauchy_bound(&f, &grid, &cell, r, s, p).unwrap();
        prop_assert!(b.holds, "{b:?}");
        let whole = cauchy_bound(&f, &grid, &Cell::whole(&grid), r, s, p).unwrap();
        prop_assert!(whole.holds, "{whole:?}");
    }

    #[test]
    fn sobolev_holds_for_fractional_exponents(
        vals in prop::collection::vec(-1.0f64..1.0, 1..8),
        kappa in 0.5f64..3.0,
        p in 1.05f64..3.5,
    ) {
        let k = vals.len() + 2;
        let t: Vec<f64> = (0..k).map(|i| i as f64 * 0.7).collect();
        let mut f = vec![0.0];
        f.extend(&vals);
        f.push(0.0);
        let c = one_dim_sobolev_check(&t, &f, kappa, p).unwrap();
        prop_assert_eq!(c.exact, p.fract() == 0.0);
        prop_assert!(c.pass, "{c:?}");
    }
}

#[test]
fn ray_limits_of_separable_functions() {
    let grid = make_polar_grid(2, 10.0, 200, 32).unwrap();
    let schedule: Vec<f64> = (2..=10).map(|r| r as f64).collect();
    let rays = [0, 8, 16, 24];
    let radial = PolarFunction::sample(&grid, |t, _| 1.0 - (-t).exp());
    let l = limit_along_rays(&radial, &grid, &rays, &schedule, 2.0, 3, 1e-3).unwrap();
    assert!(l.common_limit && l.cauchy_ok.iter().all(|&b| b));
    assert!(l.limits.iter().all(|v| (v - 1.0).abs() < 1e-3));
    // A bounded direction-dependent profile keeps distinct limits.
    let lateral = PolarFunction::sample(&grid, |t, d| t.tanh() * d[0]);
    let l = limit_along_rays(&lateral, &grid, &rays, &schedule, 2.0, 3, 1e-3).unwrap();
    assert!(!l.common_limit);
    assert!(l.cauchy_ok.iter().all(|&b| b));
    for (q, v) in rays.iter().zip(&l.limits) {
        let x = grid.dirs[*q][0];
        assert!((v - x).abs() < 1e-3, "ray {q}: {v} vs {x}");
    }
}

#[test]
fn radial_bound_conventions_agree_when_n_equals_p() {
    let b = radial_modulus_lower_bound(4.0 * PI, 0.5, 3, 3.0).unwrap();
    assert_eq!(b.bound_power_n, b.bound_power_p);
    let c = radial_modulus_lower_bound(4.0 * PI, 0.5, 3, 2.0).unwrap();
    assert!(c.bound_power_n != c.bound_power_p);
}
