use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use viscospec::data::{
    admissible_pair, make_strain_inadmissible, make_velocity, random_solenoidal, scaled_identity_strain, warmup_strain,
    WARMUP_TOLERANCE,
};
use viscospec::experiment::PROPAGATION_TOLERANCE;
use viscospec::spectral::ops::{divergence, velocity_gradient};
use viscospec::system::strain_residuals;
use viscospec::{DataKind, DataSpec, DyadicFilterBank, Grid, TensorField, VectorField};

fn carrier(grid: &Grid, seed: u64, size: f64) -> VectorField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v = random_solenoidal(grid, &mut rng, 1.0, 4.0, 1.0).unwrap();
    let s = size / v.l2_norm();
    v.scaled(s)
}

fn rel(a: &TensorField, b: &TensorField) -> f64 {
    a.sub(b).unwrap().l2_norm() / b.l2_norm()
}

#[test]
fn short_warmup_is_the_velocity_gradient_to_first_order() {
    let grid = Grid::new(2, 32).unwrap();
    let u = carrier(&grid, 1, 0.1);
    let grad = velocity_gradient(&u);
    let defect = |tau: f64| {
        let e = warmup_strain(&u, tau, 64).unwrap();
        rel(&e, &grad.scaled(tau))
    };
    let (a, b) = (defect(0.2), defect(0.1));
    // the defect is O(τ), so halving τ halves it
    assert!((a / b - 2.0).abs() < 0.1, "{a} {b}");
}

#[test]
fn warmup_converges_at_fourth_order() {
    let grid = Grid::new(2, 32).unwrap();
    let u = carrier(&grid, 2, 0.5);
    let reference = warmup_strain(&u, 0.5, 400).unwrap();
    let e1 = rel(&warmup_strain(&u, 0.5, 10).unwrap(), &reference);
    let e2 = rel(&warmup_strain(&u, 0.5, 20).unwrap(), &reference);
    let p = (e1 / e2).log2();
    assert!(p > 3.7, "order {p}");
}

#[test]
fn warmup_data_is_admissible() {
    for (dim, n) in [(2, 32), (2, 64), (3, 16)] {
        let grid = Grid::new(dim, n).unwrap();
        for seed in 0..3 {
            let spec = DataSpec {
                seed,
                band: [1.0, if dim == 3 { 2.0 } else { 4.0 }],
                ..Default::default()
            };
            let (v, e) = admissible_pair(&grid, &spec).unwrap();
            assert!(strain_residuals(&e).within(&WARMUP_TOLERANCE));
            assert!(divergence(&v).l2_norm() <= 1e-14 * v.l2_norm().max(1e-300));
            // ‖E0‖_{B^{N/2}} ≈ amplitude to leading order
            let bank = DyadicFilterBank::new(&grid);
            let size = bank.spectrum(&e).besov1(dim as f64 / 2.0);
            assert!((size / spec.amplitude - 1.0).abs() < 0.05, "{size}");
        }
    }
}

#[test]
fn every_data_kind_is_normalized() {
    let grid = Grid::new(2, 32).unwrap();
    let bank = DyadicFilterBank::new(&grid);
    for kind in [
        DataKind::RandomBandlimited,
        DataKind::SingleMode,
        DataKind::TaylorGreenLike,
    ] {
        let spec = DataSpec {
            kind,
            amplitude: 3e-3,
            ..Default::default()
        };
        let v = make_velocity(&grid, &spec).unwrap();
        assert!((bank.spectrum(&v).besov1(0.0) - 3e-3).abs() <= 1e-15, "{kind:?}");
        assert!(divergence(&v).l2_norm() <= 1e-15);
    }
}

#[test]
fn seeds_select_reproducible_draws() {
    let grid = Grid::new(2, 32).unwrap();
    let a = make_velocity(&grid, &DataSpec::default()).unwrap();
    let b = make_velocity(&grid, &DataSpec::default()).unwrap();
    let c = make_velocity(
        &grid,
        &DataSpec {
            seed: 8,
            ..Default::default()
        },
    )
    .unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn negative_controls_trip_every_monitor() {
    let grid = Grid::new(2, 64).unwrap();
    let tol = PROPAGATION_TOLERANCE;
    for seed in 0..3 {
        let r = strain_residuals(
            &make_strain_inadmissible(
                &grid,
                &DataSpec {
                    seed,
                    ..Default::default()
                },
            )
            .unwrap(),
        );
        assert!(r.det_drift > 10.0 * tol.det_drift);
        assert!(r.div_et > 10.0 * tol.div_et);
        assert!(r.curl_compat > 10.0 * tol.curl_compat);
    }
    // det(I + εI) - 1 = 2ε + ε² in 2D, with no divergence or curl defect
    let r = strain_residuals(&scaled_identity_strain(&grid, 1e-2));
    assert!((r.det_drift - 2.01e-2).abs() < 1e-15);
    assert_eq!((r.div_et, r.curl_compat), (0.0, 0.0));
}

#[test]
fn three_dimensional_velocity_is_normalized_at_its_critical_index() {
    let grid = Grid::new(3, 16).unwrap();
    let bank = DyadicFilterBank::new(&grid);
    for kind in [
        DataKind::RandomBandlimited,
        DataKind::SingleMode,
        DataKind::TaylorGreenLike,
    ] {
        let spec = DataSpec {
            kind,
            amplitude: 2e-2,
            band: [1.0, 3.0],
            ..Default::default()
        };
        let v = make_velocity(&grid, &spec).unwrap();
        assert!((bank.spectrum(&v).besov1(0.5) / 2e-2 - 1.0).abs() <= 1e-12, "{kind:?}");
        assert!(divergence(&v).l2_norm() <= 1e-12 * v.l2_norm());
    }
}

#[test]
fn single_mode_data_is_a_shear() {
    let grid = Grid::new(2, 32).unwrap();
    let spec = DataSpec {
        kind: DataKind::SingleMode,
        band: [3.0, 4.0],
        ..Default::default()
    };
    let v = make_velocity(&grid, &spec).unwrap();
    assert_eq!(v.comp(1).l2_norm(), 0.0);
    let first = v.comp(0).to_real();
    let peak = first.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let shape = grid.sample(|x| peak * (3.0 * x[1]).sin());
    assert!(first.iter().zip(&shape).all(|(a, b)| (a - b).abs() <= 1e-15));
}

#[test]
fn zero_warmup_gives_zero_strain() {
    let grid = Grid::new(2, 32).unwrap();
    let spec = DataSpec {
        warmup_time: 0.0,
        ..Default::default()
    };
    let (v, e) = admissible_pair(&grid, &spec).unwrap();
    assert!(v.l2_norm() > 0.0);
    assert_eq!(e.l2_norm(), 0.0);
    assert_eq!(strain_residuals(&e), Default::default());
}

#[test]
fn admissible_pairs_are_bitwise_reproducible() {
    let grid = Grid::new(2, 32).unwrap();
    let spec = DataSpec {
        seed: 42,
        ..Default::default()
    };
    assert_eq!(
        admissible_pair(&grid, &spec).unwrap(),
        admissible_pair(&grid, &spec).unwrap()
    );
}

#[test]
fn scaled_identity_fails_the_determinant_in_three_dimensions() {
    let grid = Grid::new(3, 16).unwrap();
    let eps = 1e-3;
    let r = strain_residuals(&scaled_identity_strain(&grid, eps));
    assert!((r.det_drift - ((1.0 + eps).powi(3) - 1.0)).abs() <= 1e-15);
    assert!((r.det_drift / (3.0 * eps) - 1.0).abs() < 2e-3);
}
