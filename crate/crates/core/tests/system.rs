use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use viscospec::data::{admissible_pair, make_strain_inadmissible, random_solenoidal, WARMUP_TOLERANCE};
use viscospec::experiment::checks::convolve;
use viscospec::spectral::ops::{divergence, laplacian, leray_project, partial_derivative, row_divergence};
use viscospec::spectral::random::random_bandlimited;
use viscospec::system::{
    constraint_residuals, dissipation_rate, elastic_energy, explicit_terms, pressure_reassembly_residual,
    pressure_recover, rhs_vc, rhs_ve, strain_residuals, to_c,
};
use viscospec::{DataSpec, Error, Grid, Integrator, IntegratorConfig, SpectralField, State, TensorField, VectorField};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_state(grid: &Grid, seed: u64, k_hi: f64, size: f64) -> State {
    let mut r = rng(seed);
    let v = random_solenoidal(grid, &mut r, 1.0, k_hi, 1.0).unwrap();
    let v = v.scaled(size / v.l2_norm());
    let n = grid.dim();
    let mut e = TensorField::zeros(grid);
    for i in 0..n {
        for j in 0..n {
            *e.comp_mut(i, j) = random_bandlimited(grid, &mut r, 1.0, k_hi, 1.0).unwrap();
        }
    }
    let e = e.scaled(size / e.l2_norm());
    State::new(v, e, 0.0).unwrap()
}

fn rel<T: Norm>(a: &T, b: &T) -> f64 {
    a.diff(b) / b.size().max(f64::MIN_POSITIVE)
}

trait Norm {
    fn diff(&self, other: &Self) -> f64;
    fn size(&self) -> f64;
}

impl Norm for VectorField {
    fn diff(&self, other: &Self) -> f64 {
        self.sub(other).unwrap().l2_norm()
    }
    fn size(&self) -> f64 {
        self.l2_norm()
    }
}

impl Norm for TensorField {
    fn diff(&self, other: &Self) -> f64 {
        self.sub(other).unwrap().l2_norm()
    }
    fn size(&self) -> f64 {
        self.l2_norm()
    }
}

impl Norm for SpectralField {
    fn diff(&self, other: &Self) -> f64 {
        self.sub(other).unwrap().l2_norm()
    }
    fn size(&self) -> f64 {
        self.l2_norm()
    }
}

fn d(f: &SpectralField, axis: usize) -> SpectralField {
    partial_derivative(f, axis).unwrap()
}

/// Product by direct lattice convolution.
fn times(a: &SpectralField, b: &SpectralField) -> SpectralField {
    let (p, lost) = convolve(a, b).unwrap();
    assert!(!lost);
    p
}

#[test]
fn rest_state_has_zero_right_hand_side() {
    for grid in [Grid::new(2, 16).unwrap(), Grid::new(3, 16).unwrap()] {
        let s = State::rest(&grid);
        let (dv, de) = rhs_ve(&s, 1.0);
        assert_eq!(dv.l2_norm(), 0.0);
        assert_eq!(de.l2_norm(), 0.0);
        assert_eq!(pressure_recover(&s).l2_norm(), 0.0);
        assert_eq!(elastic_energy(&s), 0.0);
        assert_eq!(constraint_residuals(&s), Default::default());
    }
}

#[test]
fn right_hand_side_matches_term_by_term_convolution() {
    // low band so every product is resolved and no dealiasing cut applies
    for (grid, mu) in [(Grid::new(2, 16).unwrap(), 0.7), (Grid::new(3, 16).unwrap(), 1.3)] {
        let n = grid.dim();
        let s = random_state(&grid, 11, 2.0, 0.3);
        let (dv, de) = rhs_ve(&s, mu);

        let mut mom = Vec::new();
        for i in 0..n {
            let mut acc = SpectralField::zeros(&grid);
            for k in 0..n {
                acc.axpy(-1.0, &times(s.v.comp(k), &d(s.v.comp(i), k)));
            }
            for j in 0..n {
                for k in 0..n {
                    acc.axpy(1.0, &times(s.e.comp(j, k), &d(s.e.comp(i, k), j)));
                }
                acc.axpy(1.0, &d(s.e.comp(i, j), j));
            }
            mom.push(acc);
        }
        let mut want_v = leray_project(&VectorField::from_components(mom).unwrap());
        for i in 0..n {
            want_v.comp_mut(i).axpy(mu, &laplacian(s.v.comp(i)));
        }
        assert!(rel(&dv, &want_v) <= 1e-12, "{}", rel(&dv, &want_v));

        let mut want_e = TensorField::zeros(&grid);
        for i in 0..n {
            for j in 0..n {
                let mut acc = d(s.v.comp(i), j);
                for k in 0..n {
                    acc.axpy(-1.0, &times(s.v.comp(k), &d(s.e.comp(i, j), k)));
                    acc.axpy(1.0, &times(&d(s.v.comp(i), k), s.e.comp(k, j)));
                }
                *want_e.comp_mut(i, j) = acc;
            }
        }
        assert!(rel(&de, &want_e) <= 1e-12, "{}", rel(&de, &want_e));
    }
}

#[test]
fn projected_velocity_tendency_is_solenoidal() {
    let grid = Grid::new(2, 32).unwrap();
    for seed in 0..4 {
        let s = random_state(&grid, seed, 8.0, 1.0);
        let (dv, _) = rhs_ve(&s, 1.0);
        assert!(divergence(&dv).l2_norm() <= 1e-12 * dv.l2_norm());
    }
}

#[test]
fn pure_strain_tendency_is_linear_to_second_order() {
    let grid = Grid::new(2, 32).unwrap();
    let (_, g) = admissible_pair(&grid, &DataSpec::default()).unwrap();
    let zero = VectorField::zeros(&grid);
    let defect = |eps: f64| {
        let e = g.scaled(eps);
        let (dv, de) = rhs_ve(&State::new(zero.clone(), e.clone(), 0.0).unwrap(), 1.0);
        // with v = 0 every strain term carries a factor of v
        assert_eq!(de.l2_norm(), 0.0);
        dv.sub(&leray_project(&row_divergence(&e))).unwrap().l2_norm()
    };
    let (a, b) = (defect(1.0), defect(0.5));
    assert!(a > 0.0);
    assert!((a / b - 4.0).abs() < 1e-9, "{}", a / b);
}

#[test]
fn pressure_of_a_shear_mode_vanishes() {
    let grid = Grid::new(2, 32).unwrap();
    let v1 = grid.sample(|x| (2.0 * x[1]).cos());
    let v = VectorField::from_real(&grid, &[v1, vec![0.0; grid.len()]]).unwrap();
    let s = State::new(v, TensorField::zeros(&grid), 0.0).unwrap();
    assert!(pressure_recover(&s).l2_norm() <= 1e-15);
}

#[test]
fn pressure_of_a_cellular_flow_is_the_classical_one() {
    // v = (sin x cos y, -cos x sin y) has v·∇v = -∇p with p = (cos 2x + cos 2y)/4
    let grid = Grid::new(2, 32).unwrap();
    let v1 = grid.sample(|x| x[0].sin() * x[1].cos());
    let v2 = grid.sample(|x| -x[0].cos() * x[1].sin());
    let v = VectorField::from_real(&grid, &[v1, v2]).unwrap();
    let s = State::new(v, TensorField::zeros(&grid), 0.0).unwrap();
    let want = SpectralField::from_real(
        &grid,
        &grid.sample(|x| 0.25 * ((2.0 * x[0]).cos() + (2.0 * x[1]).cos())),
    )
    .unwrap();
    assert!(rel(&pressure_recover(&s), &want) <= 1e-14);
}

#[test]
fn pressure_reassembles_the_momentum_forcing() {
    for grid in [Grid::new(2, 32).unwrap(), Grid::new(3, 16).unwrap()] {
        for seed in 0..3 {
            let s = random_state(&grid, seed, 4.0, 0.5);
            assert!(pressure_reassembly_residual(&s) <= 1e-10);
        }
    }
}

#[test]
fn strain_free_state_radiates_through_the_coupling_only() {
    let grid = Grid::new(2, 32).unwrap();
    let s = random_state(&grid, 3, 6.0, 1.0);
    let e = TensorField::zeros(&grid);
    let c = to_c(&e).unwrap();
    assert_eq!(c.l2_norm(), 0.0);
    let (_, dc) = rhs_vc(&s.v, &c, &e, 1.0).unwrap();
    let lv = VectorField::from_components(
        s.v.comps()
            .iter()
            .map(|f| f.map_modes(|m| num_complex::Complex64::new(grid.k_abs(m), 0.0)))
            .collect(),
    )
    .unwrap();
    let minus_lv = lv.scaled(-1.0);
    assert!(rel(&dc, &minus_lv) <= 1e-15);
}

#[test]
fn velocity_free_state_has_no_transport() {
    let grid = Grid::new(2, 32).unwrap();
    let (_, e) = admissible_pair(&grid, &DataSpec::default()).unwrap();
    let zero = VectorField::zeros(&grid);
    let c = to_c(&e).unwrap();
    let (dv, dc) = rhs_vc(&zero, &c, &e, 1.0).unwrap();
    assert_eq!(dc.l2_norm(), 0.0);
    let (mut want, _) = explicit_terms(&zero, &e, false, true);
    let lc = VectorField::from_components(
        c.comps()
            .iter()
            .map(|f| f.map_modes(|m| num_complex::Complex64::new(grid.k_abs(m), 0.0)))
            .collect(),
    )
    .unwrap();
    want.axpy(1.0, &leray_project(&lc));
    assert!(rel(&dv, &want) <= 1e-14);
}

#[test]
fn strain_with_a_mean_is_rejected() {
    let grid = Grid::new(2, 16).unwrap();
    let mut e = TensorField::zeros(&grid);
    *e.comp_mut(0, 1) = SpectralField::from_real(&grid, &vec![0.1; grid.len()]).unwrap();
    assert!(matches!(to_c(&e), Err(Error::StrainGauge { row: 0, col: 1, .. })));
    let zero = VectorField::zeros(&grid);
    assert!(matches!(rhs_vc(&zero, &zero, &e, 1.0), Err(Error::StrainGauge { .. })));
}

#[test]
fn residual_monitors_separate_admissible_from_corrupted_strain() {
    let grid = Grid::new(2, 64).unwrap();
    let spec = DataSpec::default();
    let (_, e) = admissible_pair(&grid, &spec).unwrap();
    let r = strain_residuals(&e);
    assert!(r.within(&WARMUP_TOLERANCE));
    assert!(
        r.det_drift <= 1e-8 && r.div_et <= 1e-8 && r.curl_compat <= 1e-8,
        "{r:?}"
    );

    // a symmetric random strain is not a column-divergence-free field
    let mut r8 = rng(5);
    let mut sym = TensorField::zeros(&grid);
    for i in 0..2 {
        for j in i..2 {
            let f = random_bandlimited(&grid, &mut r8, 1.0, 4.0, 1.0).unwrap().scaled(1e-2);
            *sym.comp_mut(i, j) = f.clone();
            *sym.comp_mut(j, i) = f;
        }
    }
    assert!(strain_residuals(&sym).div_et > 0.0);
    assert!(strain_residuals(&make_strain_inadmissible(&grid, &spec).unwrap()).div_et > 0.0);
}

#[test]
fn energy_of_a_single_mode_is_half_its_square() {
    let grid = Grid::new(2, 16).unwrap();
    let v1 = grid.sample(|x| (3.0 * x[1]).sin());
    let v = VectorField::from_real(&grid, &[v1, vec![0.0; grid.len()]]).unwrap();
    let s = State::new(v.clone(), TensorField::zeros(&grid), 0.0).unwrap();
    assert_eq!(elastic_energy(&s), 0.5 * v.l2_norm().powi(2));
    // box-averaged norm of sin(3y) is 1/√2
    assert!((elastic_energy(&s) - 0.25).abs() <= 1e-15);
}

#[test]
fn linear_energy_decays_at_the_viscous_rate() {
    let grid = Grid::new(2, 32).unwrap();
    let (v, e) = admissible_pair(&grid, &DataSpec::default()).unwrap();
    let s0 = State::new(v, e, 0.0).unwrap();
    let cfg = IntegratorConfig {
        dt: 1e-3,
        t_end: 0.2,
        nonlinear: false,
        ..Default::default()
    };
    let mut it = Integrator::new(&cfg, &s0).unwrap();
    let mut states = vec![s0.clone()];
    let mut s = s0;
    for _ in 0..200 {
        it.step(&mut s).unwrap();
        states.push(s.clone());
    }
    let energy: Vec<f64> = states.iter().map(elastic_energy).collect();
    assert!(energy.windows(2).all(|w| w[1] <= w[0]));
    for k in [20, 100, 199] {
        let slope = (energy[k + 1] - energy[k - 1]) / (2.0 * cfg.dt);
        let rate = dissipation_rate(&states[k].v, cfg.mu);
        assert!((slope + rate).abs() <= 1e-2 * rate, "step {k}: {slope} vs {rate}");
    }
}
