use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use viscospec::data::random_solenoidal;
use viscospec::experiment::{dispersion_field_error, dispersion_mode_error};
use viscospec::linear::{
    evolve_mode, heat_flow, log_spaced, mixed_system_evolve, prop42_estimate_check, prop43_estimate_check,
    stokes_convection_step, transport_step, MixedModeMatrix, MixedOptions,
};
use viscospec::spectral::ops::divergence;
use viscospec::spectral::random::random_bandlimited;
use viscospec::{DyadicFilterBank, Error, Grid, Scheme, SpectralField, TimeNormAccumulator, VectorField};

type M2 = [[f64; 2]; 2];

fn mul(a: &M2, b: &M2) -> M2 {
    let mut c = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    c
}

/// `exp(tM)` by Taylor series with scaling and squaring.
fn taylor_exp(m: &M2, t: f64) -> M2 {
    let norm = m.iter().flatten().map(|x| x.abs()).sum::<f64>() * t;
    let squarings = norm.max(1.0).log2().ceil() as u32 + 4;
    let h = t / 2f64.powi(squarings as i32);
    let a = [[m[0][0] * h, m[0][1] * h], [m[1][0] * h, m[1][1] * h]];
    let mut sum = [[1.0, 0.0], [0.0, 1.0]];
    let mut term = sum;
    for k in 1..30 {
        term = mul(&term, &a);
        for row in term.iter_mut() {
            for x in row.iter_mut() {
                *x /= k as f64;
            }
        }
        for i in 0..2 {
            for j in 0..2 {
                sum[i][j] += term[i][j];
            }
        }
    }
    for _ in 0..squarings {
        sum = mul(&sum, &sum);
    }
    sum
}

/// `exp(tM) y0` through the eigenvectors `(-λ, |ξ|)` of the mode matrix.
fn eigen_evolve(mu: f64, xi: f64, y0: [f64; 2], t: f64) -> [f64; 2] {
    let b = mu * xi * xi;
    let disc = Complex64::new(b * b - 4.0 * xi * xi, 0.0).sqrt();
    let l = [(-b + disc) / 2.0, (-b - disc) / 2.0];
    // y0 = a0 e0 + a1 e1 with e_i = (-λ_i, ξ)
    let det = (-l[0]) * xi - (-l[1]) * xi;
    let a0 = (y0[0] * xi - (-l[1]) * y0[1]) / det;
    let a1 = ((-l[0]) * y0[1] - xi * y0[0]) / det;
    let (g0, g1) = (a0 * (l[0] * t).exp(), a1 * (l[1] * t).exp());
    [(g0 * -l[0] + g1 * -l[1]).re, (g0 * xi + g1 * xi).re]
}

#[test]
fn closed_form_exponential_matches_taylor_series() {
    for mu in [0.5, 1.0, 2.0] {
        for xi in log_spaced(0.25, 32.0, 13) {
            let m = MixedModeMatrix::new(mu, xi);
            for t in [0.01, 0.3, 1.0] {
                let a = m.exp(t);
                let b = taylor_exp(&m.matrix, t);
                let scale = b.iter().flatten().map(|x| x.abs()).fold(0.0, f64::max);
                // repeated squaring costs the oracle about 2^squarings ulps
                for i in 0..2 {
                    for j in 0..2 {
                        assert!((a[i][j] - b[i][j]).abs() <= 1e-11 * scale, "mu {mu} xi {xi} t {t}");
                    }
                }
            }
        }
    }
}

#[test]
fn closed_form_exponential_golden_value() {
    // 40-digit reference for mu = 1/2, |xi| = 21.357437666720536, t = 1
    let want = [
        [-0.001_197_381_278_492_765, 0.012_673_369_298_884_31],
        [-0.012_673_369_298_884_31, 0.134_137_966_135_632_95],
    ];
    let got = MixedModeMatrix::new(0.5, 21.357437666720536).exp(1.0);
    for i in 0..2 {
        for j in 0..2 {
            assert!((got[i][j] - want[i][j]).abs() <= 1e-15, "{got:?}");
        }
    }
}

#[test]
fn production_mode_update_matches_eigendecomposition() {
    for mu in [0.5, 1.0, 2.0] {
        for xi in log_spaced(0.25, 32.0, 7) {
            for y0 in [[1.0, 0.0], [0.0, 1.0]] {
                let exact = eigen_evolve(mu, xi, y0, 1.0);
                let num = evolve_mode(Scheme::ImexEtdAb2, mu, xi, y0, 1e-4, 1.0);
                let err = ((num[0] - exact[0]).powi(2) + (num[1] - exact[1]).powi(2)).sqrt();
                let size = (exact[0].powi(2) + exact[1].powi(2)).sqrt();
                assert!(err <= 1e-6 * size, "mu {mu} xi {xi}: {err} vs {size}");
            }
        }
    }
    assert!(dispersion_mode_error(&[1.0], &[0.25, 4.0, 32.0], 1e-4, 1.0) <= 1e-6);
}

#[test]
fn crank_nicolson_mode_update_is_second_order() {
    let (mu, xi) = (1.0, 3.0);
    let exact = eigen_evolve(mu, xi, [1.0, 0.0], 1.0);
    let err = |dt: f64| {
        let y = evolve_mode(Scheme::ImexCnAb2, mu, xi, [1.0, 0.0], dt, 1.0);
        ((y[0] - exact[0]).powi(2) + (y[1] - exact[1]).powi(2)).sqrt()
    };
    let p = (err(1e-2) / err(5e-3)).log2();
    assert!((1.9..2.2).contains(&p), "order {p}");
}

#[test]
fn roots_solve_the_characteristic_polynomial() {
    for mu in [0.5, 1.0, 2.0] {
        for xi in log_spaced(0.25, 32.0, 25) {
            let m = MixedModeMatrix::new(mu, xi);
            for l in m.eigenvalues {
                assert!(m.characteristic_residual(l) <= 1e-12);
            }
            let sum = m.eigenvalues[0] + m.eigenvalues[1];
            let prod = m.eigenvalues[0] * m.eigenvalues[1];
            assert!((sum.re + mu * xi * xi).abs() <= 1e-12 * mu * xi * xi);
            assert!((prod.re - xi * xi).abs() <= 1e-12 * xi * xi);
        }
    }
}

#[test]
fn slow_root_follows_its_high_frequency_expansion() {
    // λ = -1/μ - 1/(μ³ξ²) - 2/(μ⁵ξ⁴) + O(ξ^{-6})
    for mu in [0.5, 1.0, 2.0] {
        for xi in [8.0, 16.0, 32.0] {
            let m = MixedModeMatrix::new(mu, xi);
            let slow = m.eigenvalues.iter().map(|l| l.re).fold(f64::NEG_INFINITY, f64::max);
            let approx = -1.0 / mu - 1.0 / (mu.powi(3) * xi * xi) - 2.0 / (mu.powi(5) * xi.powi(4));
            assert!(
                (slow - approx).abs() <= 10.0 / (mu.powi(7) * xi.powi(6)),
                "mu {mu} xi {xi}"
            );
        }
    }
}

#[test]
fn field_evolution_agrees_mode_by_mode() {
    for mu in [0.5, 2.0] {
        let e = dispersion_field_error(32, mu, 1e-3, 0.2, 4).unwrap();
        assert!(e <= 1e-9, "mu {mu}: {e}");
    }
}

fn pair(grid: &Grid, seed: u64) -> (VectorField, VectorField) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v = random_solenoidal(grid, &mut rng, 1.0, 6.0, 1.0).unwrap().scaled(1e-2);
    let c = random_solenoidal(grid, &mut rng, 1.0, 6.0, 1.0).unwrap().scaled(1e-2);
    (v, c)
}

#[test]
fn mixed_estimate_dominates_the_data() {
    let grid = Grid::new(2, 32).unwrap();
    let (v0, c0) = pair(&grid, 1);
    let (u, _) = pair(&grid, 2);
    let traj = mixed_system_evolve(&v0, &c0, Some(&u), None, None, 1.0, 0.2, 1e-3, &MixedOptions::default()).unwrap();
    for rho in [0.5, 1.0, 2.0] {
        let r = prop43_estimate_check(&traj, rho, 1.0).unwrap();
        // the sup includes t = 0 and there is no forcing
        assert!(r.ratio >= 1.0 && r.ratio.is_finite(), "rho {rho}: {}", r.ratio);
        assert!(r.convection_integral > 0.0);
    }
    assert!(matches!(
        prop43_estimate_check(&traj, 2.5, 1.0),
        Err(Error::IndexOutOfRange { .. })
    ));
    let bare = mixed_system_evolve(
        &v0,
        &c0,
        None,
        None,
        None,
        1.0,
        0.05,
        1e-3,
        &MixedOptions {
            record: false,
            ..Default::default()
        },
    )
    .unwrap();
    assert!(prop43_estimate_check(&bare, 1.0, 1.0).is_err());
}

#[test]
fn convected_stokes_estimate_dominates_the_data() {
    let grid = Grid::new(2, 32).unwrap();
    let (u0, v) = pair(&grid, 3);
    let f = VectorField::zeros(&grid);
    let r = prop42_estimate_check(&u0, &v, &f, 1.0, 1.0, 1e-3, 0.1).unwrap();
    assert!(r.ratio >= 1.0 && r.ratio.is_finite(), "{}", r.ratio);
    assert!(prop42_estimate_check(&u0, &v, &f, 1.0, 3.5, 1e-3, 0.1).is_err());
}

fn sampled(grid: &Grid, f: impl Fn([f64; 3]) -> f64) -> SpectralField {
    SpectralField::from_real(grid, &grid.sample(f)).unwrap()
}

fn shear(grid: &Grid, size: f64) -> VectorField {
    VectorField::from_components(vec![sampled(grid, |x| size * x[1].sin()), SpectralField::zeros(grid)]).unwrap()
}

#[test]
fn heat_flow_multiplies_each_mode_by_its_decay() {
    let grid = Grid::new(2, 32).unwrap();
    let (v0, _) = pair(&grid, 7);
    assert_eq!(heat_flow(&v0, 1.0, 0.0).unwrap(), v0);
    let m = SpectralField::single_mode(&grid, [2, 0, 0], Complex64::new(1.0, 0.0)).unwrap();
    let v = VectorField::from_components(vec![SpectralField::zeros(&grid), m]).unwrap();
    let out = heat_flow(&v, 1.0, 0.5).unwrap();
    let idx = grid.mode_index([2, 0, 0]).unwrap();
    assert!((out.comp(1).coeffs()[idx].re - (-2.0f64).exp()).abs() <= 1e-16);
    assert!(heat_flow(&v, 1.0, -0.1).is_err());
}

#[test]
fn heat_smoothing_integral_converges_under_refinement() {
    let grid = Grid::new(2, 32).unwrap();
    let bank = DyadicFilterBank::new(&grid);
    let (v0, _) = pair(&grid, 8);
    // ∫_0^1 ‖v(t)‖_{B^{N/2+1}} dt by the left rule
    let integral = |dt: f64| {
        let steps = (1.0 / dt).round() as usize;
        let mut acc = TimeNormAccumulator::new(&bank, 2.0, 1.0, 1.0);
        for n in 0..steps {
            acc.accumulate(&bank, &heat_flow(&v0, 1.0, n as f64 * dt).unwrap(), dt)
                .unwrap();
        }
        acc.value()
    };
    let (a, b) = (integral(1e-2), integral(5e-3));
    let extrapolated = 2.0 * b - a;
    assert!(extrapolated.is_finite() && extrapolated > 0.0);
    assert!((b - extrapolated).abs() <= 0.1 * extrapolated, "{b} {extrapolated}");
    // the data norm bounds it up to a moderate factor
    let data = bank.spectrum(&v0).besov1(0.0);
    assert!(extrapolated <= 10.0 * data, "{extrapolated} vs {data}");
}

#[test]
fn transport_at_rest_or_with_constant_source() {
    let grid = Grid::new(2, 32).unwrap();
    let f = sampled(&grid, |x| (x[0] + 2.0 * x[1]).cos());
    let rest = VectorField::zeros(&grid);
    let none = SpectralField::zeros(&grid);
    assert_eq!(transport_step(&f, &rest, &none, 1e-2).unwrap(), f);

    let g = SpectralField::single_mode(&grid, [0, 0, 0], Complex64::new(0.3, 0.0)).unwrap();
    let v = shear(&grid, 1.0);
    let mut x = f.clone();
    for n in 1..=10 {
        x = transport_step(&x, &v, &g, 1e-2).unwrap();
        assert!((x.mean().re - 0.3 * 1e-2 * n as f64).abs() <= 1e-15);
    }
    let bad = VectorField::from_components(vec![sampled(&grid, |x| x[0].sin()), none.clone()]).unwrap();
    assert!(matches!(
        transport_step(&f, &bad, &none, 1e-2),
        Err(Error::NotSolenoidal { .. })
    ));
}

#[test]
fn shear_transport_matches_the_characteristics() {
    // f_t + sin(y) f_x = 0 from cos(x): f = cos(x - t sin y)
    let grid = Grid::new(2, 64).unwrap();
    let v = shear(&grid, 1.0);
    let none = SpectralField::zeros(&grid);
    let mut f = sampled(&grid, |x| x[0].cos());
    for _ in 0..100 {
        f = transport_step(&f, &v, &none, 1e-2).unwrap();
    }
    let want = sampled(&grid, |x| (x[0] - x[1].sin()).cos());
    let err = f.sub(&want).unwrap().l2_norm() / want.l2_norm();
    assert!(err <= 1e-8, "{err}");
}

#[test]
fn transport_conserves_the_square_norm_to_high_order() {
    let grid = Grid::new(2, 32).unwrap();
    let v = shear(&grid, 3.0);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let f0 = random_bandlimited(&grid, &mut rng, 1.0, 6.0, 0.0).unwrap();
    let none = SpectralField::zeros(&grid);
    let drift = |dt: f64| {
        let mut f = f0.clone();
        for _ in 0..(0.5 / dt).round() as usize {
            f = transport_step(&f, &v, &none, dt).unwrap();
        }
        (f.l2_norm() / f0.l2_norm() - 1.0).abs()
    };
    let (a, b) = (drift(2e-2), drift(1e-2));
    assert!(a > 0.0 && a <= 1e-3, "{a}");
    assert!((a / b).log2() >= 2.0, "order {}", (a / b).log2());
}

#[test]
fn convected_stokes_reduces_to_heat_flow_and_stays_solenoidal() {
    let grid = Grid::new(2, 32).unwrap();
    let (u, w) = pair(&grid, 5);
    let zero = VectorField::zeros(&grid);
    let step = stokes_convection_step(&u, &zero, &zero, 0.8, 1e-2).unwrap();
    let heat = heat_flow(&u, 0.8, 1e-2).unwrap();
    assert!(step.sub(&heat).unwrap().l2_norm() <= 1e-14 * heat.l2_norm());

    let f = VectorField::from_components(vec![sampled(&grid, |x| x[1].cos()), sampled(&grid, |x| x[0].sin())]).unwrap();
    let out = stokes_convection_step(&u, &w.scaled(50.0), &f, 0.8, 1e-2).unwrap();
    assert!(divergence(&out).l2_norm() <= 1e-13 * out.l2_norm());
    assert!(out.sub(&heat).unwrap().l2_norm() > 1e-6 * heat.l2_norm());
    let bad = VectorField::from_components(vec![sampled(&grid, |x| x[0].sin()), SpectralField::zeros(&grid)]).unwrap();
    assert!(stokes_convection_step(&u, &bad, &f, 0.8, 1e-2).is_err());
}
