use std::collections::BTreeMap;

use num_complex::Complex64;
use viscospec::data::admissible_pair;
use viscospec::integrate::{integrate, load_checkpoint, picard_solve, save_checkpoint, step, uniqueness_probe};
use viscospec::linear::heat_flow;
use viscospec::{
    Coupling, DataSpec, DyadicFilterBank, Error, Grid, Integrator, IntegratorConfig, PicardConfig, Scheme,
    SpectralField, State, TensorField, VectorField,
};

fn small_state(n: usize, amplitude: f64) -> State {
    let grid = Grid::new(2, n).unwrap();
    let spec = DataSpec {
        amplitude,
        ..Default::default()
    };
    let (v, e) = admissible_pair(&grid, &spec).unwrap();
    State::new(v, e, 0.0).unwrap()
}

fn critical_gap(a: &State, b: &State) -> f64 {
    let bank = DyadicFilterBank::new(a.grid());
    let half = a.grid().dim() as f64 / 2.0;
    bank.spectrum(&a.v.sub(&b.v).unwrap()).besov1(half - 1.0) + bank.spectrum(&a.e.sub(&b.e).unwrap()).besov1(half)
}

fn rel_l2(a: &VectorField, b: &VectorField) -> f64 {
    a.sub(b).unwrap().l2_norm() / b.l2_norm()
}

#[test]
fn linear_heat_flow_is_reproduced_exactly() {
    let s0 = small_state(32, 1e-2);
    let cfg = IntegratorConfig {
        dt: 1e-2,
        t_end: 0.1,
        nonlinear: false,
        coupling: Coupling::Off,
        ..Default::default()
    };
    let one = step(&s0, &cfg).unwrap();
    let exact = heat_flow(&s0.v, cfg.mu, cfg.dt).unwrap();
    assert!(rel_l2(&one.v, &exact) <= 1e-14, "{}", rel_l2(&one.v, &exact));
    // E has no linear dynamics here: it keeps its value up to roundoff
    let mut e0 = s0.e.clone();
    e0.zero_mean();
    assert!(one.e.sub(&e0).unwrap().l2_norm() <= 1e-15 * e0.l2_norm());

    let end = integrate(&s0, &cfg).unwrap();
    let exact = heat_flow(&s0.v, cfg.mu, end.t).unwrap();
    assert!(rel_l2(&end.v, &exact) <= 1e-14, "{}", rel_l2(&end.v, &exact));
}

#[test]
fn strain_only_data_matches_picard_limit() {
    let grid = Grid::new(2, 32).unwrap();
    let (_, e) = admissible_pair(&grid, &DataSpec::default()).unwrap();
    let s0 = State::new(VectorField::zeros(&grid), e, 0.0).unwrap();
    let cfg = IntegratorConfig {
        dt: 1e-3,
        t_end: 0.05,
        picard: Some(PicardConfig::default()),
        ..Default::default()
    };
    let run = picard_solve(&s0, &cfg).unwrap();
    assert!(run.diagnostics.converged);
    let limit = run.trajectory.last().unwrap();
    assert!(limit.v.l2_norm() > 0.0, "the strain must drive the velocity");

    let explicit = integrate(
        &s0,
        &IntegratorConfig {
            coupling: Coupling::Explicit,
            ..cfg.clone()
        },
    )
    .unwrap();
    assert!(critical_gap(&explicit, limit) <= 1e-8);
    let production = integrate(&s0, &cfg).unwrap();
    assert!(critical_gap(&production, limit) <= 1e-6);
}

#[test]
fn zero_data_converges_in_one_iteration() {
    let grid = Grid::new(2, 16).unwrap();
    let cfg = IntegratorConfig {
        dt: 1e-2,
        t_end: 0.1,
        picard: Some(PicardConfig::default()),
        ..Default::default()
    };
    let run = picard_solve(&State::rest(&grid), &cfg).unwrap();
    assert!(run.diagnostics.converged);
    assert_eq!(run.diagnostics.iterations, 1);
    assert!(run
        .trajectory
        .iter()
        .all(|s| s.v.l2_norm() == 0.0 && s.e.l2_norm() == 0.0));
}

fn richardson_order(scheme: Scheme) -> f64 {
    let s0 = small_state(32, 1e-2);
    let run = |dt: f64| {
        integrate(
            &s0,
            &IntegratorConfig {
                dt,
                t_end: 0.1,
                scheme,
                ..Default::default()
            },
        )
        .unwrap()
    };
    let (a, b, c) = (run(1e-2), run(5e-3), run(2.5e-3));
    (critical_gap(&a, &b) / critical_gap(&b, &c)).log2()
}

#[test]
fn second_order_under_step_halving() {
    for scheme in [Scheme::ImexEtdAb2, Scheme::ImexCnAb2] {
        let p = richardson_order(scheme);
        assert!(p >= 1.9, "{scheme:?}: observed order {p}");
    }
    let p = richardson_order(Scheme::ImexEuler);
    assert!((0.8..1.3).contains(&p), "euler order {p}");
}

/// `x_1 -> -x_1`: `v_1` and the mixed strain components change sign.
fn reflect(s: &State) -> State {
    let grid = s.grid().clone();
    let flip = |f: &SpectralField, sign: f64| {
        let mut out = vec![Complex64::new(0.0, 0.0); grid.len()];
        for (m, z) in f.coeffs().iter().enumerate() {
            let k = grid.wavenumber(m);
            if let Some(r) = grid.mode_index([-k[0], k[1], k[2]]) {
                out[r] = z * sign;
            }
        }
        SpectralField::from_coeffs(&grid, out, true).unwrap()
    };
    let sign = |i: usize| if i == 0 { -1.0 } else { 1.0 };
    let v = VectorField::from_components((0..2).map(|i| flip(s.v.comp(i), sign(i))).collect()).unwrap();
    let mut e = TensorField::zeros(&grid);
    for i in 0..2 {
        for j in 0..2 {
            *e.comp_mut(i, j) = flip(s.e.comp(i, j), sign(i) * sign(j));
        }
    }
    State::new(v, e, s.t).unwrap()
}

#[test]
fn mirror_symmetry_is_preserved() {
    let s0 = small_state(32, 2e-2);
    let cfg = IntegratorConfig {
        dt: 1e-2,
        t_end: 0.2,
        ..Default::default()
    };
    let a = reflect(&integrate(&s0, &cfg).unwrap());
    let b = integrate(&reflect(&s0), &cfg).unwrap();
    let size = critical_gap(&a, &State::rest(a.grid()));
    assert!(critical_gap(&a, &b) <= 1e-13 * size);
}

#[test]
fn reruns_are_bitwise_identical() {
    let s0 = small_state(32, 1e-2);
    let cfg = IntegratorConfig {
        dt: 1e-2,
        t_end: 0.1,
        ..Default::default()
    };
    assert_eq!(integrate(&s0, &cfg).unwrap(), integrate(&s0, &cfg).unwrap());
    let r = uniqueness_probe(&s0, 0.0, 3, &cfg).unwrap();
    assert!(r.identical);
    assert_eq!(r.growth, 1.0);
}

#[test]
fn perturbation_response_is_linear_in_scale() {
    let s0 = small_state(32, 1e-2);
    let cfg = IntegratorConfig {
        dt: 1e-2,
        t_end: 0.2,
        ..Default::default()
    };
    let a = uniqueness_probe(&s0, 1e-6, 3, &cfg).unwrap();
    let b = uniqueness_probe(&s0, 1e-8, 3, &cfg).unwrap();
    assert!((a.final_ratio / b.final_ratio - 1.0).abs() < 1e-3);
    assert!(a.final_ratio < 1.0, "viscosity damps the perturbation");
    assert_eq!(a.distance.len(), b.distance.len());
}

#[test]
fn blow_up_guard_leaves_state_untouched() {
    let s0 = small_state(32, 1e-2);
    let cfg = IntegratorConfig {
        dt: 1e-2,
        t_end: 1.0,
        ..Default::default()
    };
    let bank = DyadicFilterBank::new(s0.grid());
    let size = bank.spectrum(&s0.v).besov1(0.0);
    let mut it = Integrator::new(&cfg, &s0).unwrap().with_blowup_limit(0.5 * size);
    let mut s = s0.clone();
    let err = it.step(&mut s).unwrap_err();
    assert!(matches!(err, Error::BlowUp { .. }), "{err}");
    assert_eq!(s, s0);
}

#[test]
fn overflow_is_reported_with_last_good_time() {
    let s0 = small_state(32, 1e-2);
    let huge = State::new(s0.v.scaled(1e160), s0.e.clone(), 0.25).unwrap();
    let cfg = IntegratorConfig::default();
    let mut it = Integrator::new(&cfg, &huge).unwrap().with_blowup_limit(0.0);
    let mut s = huge.clone();
    match it.step(&mut s) {
        Err(Error::NonFinite { last_good_t, .. }) => assert_eq!(last_good_t, 0.25),
        other => panic!("expected NonFinite, got {other:?}"),
    }
    assert_eq!(s, huge);
}

#[test]
fn cfl_violation_shrinks_the_step() {
    let small = small_state(32, 1e-2);
    let s0 = State::new(small.v.scaled(500.0), small.e, 0.0).unwrap();
    let cfg = IntegratorConfig {
        dt: 0.1,
        t_end: 0.1,
        ..Default::default()
    };
    let mut it = Integrator::new(&cfg, &s0).unwrap();
    let mut s = s0.clone();
    let h = it.step(&mut s).unwrap();
    assert!(h < cfg.dt);
    assert_eq!(it.reduced_steps(), 1);
    assert_eq!(s.t, h);
}

#[test]
fn checkpoints_round_trip() {
    let s0 = small_state(32, 1e-2);
    let s = integrate(
        &s0,
        &IntegratorConfig {
            dt: 1e-2,
            t_end: 0.05,
            ..Default::default()
        },
    )
    .unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("state.vsf");
    let mut extra = BTreeMap::new();
    extra.insert("int_v_high".to_string(), "1.5".to_string());
    save_checkpoint(&path, &s, &IntegratorConfig::default(), &extra).unwrap();
    // snapshots hold physical samples, so the reload carries transform roundoff
    let back = load_checkpoint(&path).unwrap();
    assert_eq!(back.t, s.t);
    assert!(rel_l2(&back.v, &s.v) <= 1e-14);
    assert!(back.e.sub(&s.e).unwrap().l2_norm() <= 1e-14 * s.e.l2_norm());
    let side = std::fs::read_to_string(path.with_extension("txt")).unwrap();
    assert!(side.contains("int_v_high") && side.contains("scheme"));
}

#[test]
fn rest_state_stays_at_rest() {
    for grid in [Grid::new(2, 16).unwrap(), Grid::new(3, 16).unwrap()] {
        let s0 = State::rest(&grid);
        for scheme in [Scheme::ImexEtdAb2, Scheme::ImexCnAb2, Scheme::ImexEuler] {
            let end = integrate(
                &s0,
                &IntegratorConfig {
                    dt: 1e-2,
                    t_end: 0.05,
                    scheme,
                    ..Default::default()
                },
            )
            .unwrap();
            assert_eq!(end.v, s0.v);
            assert_eq!(end.e, s0.e);
            assert_eq!(end.t, 0.05);
        }
    }
}

#[test]
fn runaway_iteration_is_reported_not_fatal() {
    let s0 = small_state(32, 1e-2);
    let cfg = |t_end: f64| IntegratorConfig {
        dt: 1e-2,
        t_end,
        picard: Some(PicardConfig {
            max_iters: 12,
            ..Default::default()
        }),
        ..Default::default()
    };
    // growing differences, then overflowing iterates
    for (scale, t_end) in [(800.0, 1.0), (4000.0, 0.3)] {
        let big = State::new(s0.v.scaled(scale), s0.e.scaled(scale / 10.0), 0.0).unwrap();
        let run = picard_solve(&big, &cfg(t_end)).unwrap();
        let d = &run.diagnostics;
        assert!(d.diverged && !d.converged, "{scale}: {:?}", d.differences);
        assert_eq!(d.ratios.len() + 1, d.differences.len().max(1));
        assert!(run.trajectory.iter().all(State::is_finite));
    }
}
