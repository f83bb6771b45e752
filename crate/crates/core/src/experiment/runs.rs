use std::collections::BTreeMap;
use std::path::Path;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::checks::{bony_exactness, formulation_consistency, partition_checks, scaling_invariance};
use super::config::{ExperimentConfig, ExperimentKind};
use super::log::{LogRow, TimeSeriesLog};
use super::report::Report;
use crate::data::{admissible_pair, make_strain_inadmissible, random_solenoidal, scaled_identity_strain};
use crate::dyadic::{commutator, inequality_prober, Law, NormVariant, ProbeConfig, TimeNormAccumulator};
use crate::error::{Error, Result};
use crate::integrate::{integrate, picard_solve, save_checkpoint, uniqueness_probe, Integrator};
use crate::linear::{
    dispersion_table, evolve_mode, format_dispersion_table, log_spaced, mixed_system_evolve, Coupling, MixedModeMatrix,
    MixedOptions, Scheme,
};
use crate::spectral::{Grid, TensorField, VectorField};
use crate::system::{strain_residuals, ConstraintResiduals, State};

/// Residual bounds along a production run.
pub const PROPAGATION_TOLERANCE: ConstraintResiduals = ConstraintResiduals {
    det_drift: 1e-4,
    div_et: 1e-6,
    curl_compat: 1e-5,
};

fn initial_state(cfg: &ExperimentConfig, amplitude: f64) -> Result<State> {
    let grid = cfg.grid.build()?;
    let mut spec = cfg.data.clone();
    spec.amplitude = amplitude;
    let (v, e) = admissible_pair(&grid, &spec)?;
    State::new(v, e, 0.0)
}

/// A decay trajectory and its summary.
#[derive(Clone, Debug)]
pub struct DecayOutcome {
    pub log: TimeSeriesLog,
    /// Set when the run stopped early (blow-up guard or non-finite values).
    pub halted: Option<Error>,
    /// Integral columns `(int_v_high, int_e_crit_sq, int_e_hybrid_1)` at `t_end/2`.
    pub half_integrals: [f64; 3],
    pub sup_v_crit: f64,
    pub sup_e_hybrid_inf: f64,
    /// `‖v0‖_{B^{N/2-1}} + ‖E0‖_{B^{N/2}} + ‖E0‖_{B^{N/2-1}}`.
    pub data_norm: f64,
    /// `sup‖v‖_{B^{N/2-1}} + μ∫‖v‖_{B^{N/2+1}} + sup‖E‖_{B̃^{N/2,∞}_μ} + ∫‖E‖_{B̃^{N/2,1}_μ}`.
    pub solution_norm: f64,
    /// Extra norms: `(label, value)`, sup in time or the accumulated time norm.
    pub extra: Vec<(String, f64)>,
}

struct Running {
    int: [f64; 3],
    last: Option<(f64, [f64; 3])>,
}

/// Runs the small-data trajectory at `amplitude`, logging every
/// `cfg.cadence` steps and writing snapshots into `snapshots` if given.
pub fn decay_trajectory(cfg: &ExperimentConfig, amplitude: f64, snapshots: Option<&Path>) -> Result<DecayOutcome> {
    let mut state = initial_state(cfg, amplitude)?;
    let grid = state.grid().clone();
    let half = grid.dim() as f64 / 2.0;
    let mu = cfg.integrator.mu;
    let mut it = Integrator::new(&cfg.integrator, &state)?;
    let bank = it.bank().clone();

    let sv0 = bank.spectrum(&state.v);
    let se0 = bank.spectrum(&state.e);
    let data_norm = sv0.besov1(half - 1.0) + se0.besov1(half) + se0.besov1(half - 1.0);

    let mut extra_acc: Vec<(String, Option<TimeNormAccumulator>, Option<TimeNormAccumulator>, f64)> = cfg
        .norms
        .iter()
        .map(|n| -> Result<_> {
            Ok(match n.variant {
                NormVariant::CheminLerner { .. } => (
                    format!("{n:?}"),
                    Some(TimeNormAccumulator::from_spec(&bank, n)?),
                    Some(TimeNormAccumulator::from_spec(&bank, n)?),
                    0.0,
                ),
                _ => (format!("{n:?}"), None, None, 0.0),
            })
        })
        .collect::<Result<_>>()?;

    let mut log = TimeSeriesLog::default();
    let mut run = Running {
        int: [0.0; 3],
        last: None,
    };
    let mut half_integrals = None;
    let mut sup_v = 0.0f64;
    let mut sup_e = 0.0f64;
    let mut step = 0usize;
    let t_half = 0.5 * cfg.integrator.t_end;
    let cadence = cfg.cadence;
    let snap = cfg.snapshot_cadence;
    let t_end = cfg.integrator.t_end;
    let icfg = cfg.integrator.clone();
    let norms = cfg.norms.clone();

    let result = it.run(&mut state, |s, bank| {
        let sv = bank.spectrum(&s.v);
        let se = bank.spectrum(&s.e);
        let now = [sv.besov1(half + 1.0), se.besov1(half).powi(2), se.hybrid(half, 1.0, mu)];
        if let Some((t0, prev)) = run.last {
            let h = s.t - t0;
            for k in 0..3 {
                run.int[k] += h * prev[k];
            }
            for (_, av, ae, _) in extra_acc.iter_mut() {
                if let (Some(av), Some(ae)) = (av.as_mut(), ae.as_mut()) {
                    av.accumulate(bank, &s.v, h)?;
                    ae.accumulate(bank, &s.e, h)?;
                }
            }
        }
        run.last = Some((s.t, now));
        if half_integrals.is_none() && s.t >= t_half - 1e-9 * icfg.dt {
            half_integrals = Some(run.int);
        }
        let v_crit = sv.besov1(half - 1.0);
        let e_inf = se.hybrid(half, f64::INFINITY, mu);
        sup_v = sup_v.max(v_crit);
        sup_e = sup_e.max(e_inf);
        for (i, (_, av, _, sup)) in extra_acc.iter_mut().enumerate() {
            if av.is_none() {
                let a = sv.evaluate(&norms[i])?;
                let b = se.evaluate(&norms[i])?;
                *sup = sup.max(a + b);
            }
        }
        let last = s.t >= t_end - 1e-9 * icfg.dt;
        if step.is_multiple_of(cadence) || last {
            let r = strain_residuals(&s.e);
            log.push(LogRow {
                t: s.t,
                v_crit,
                v_high: now[0],
                int_v_high: run.int[0],
                e_crit: se.besov1(half),
                e_hybrid_inf: e_inf,
                int_e_crit_sq: run.int[1],
                int_e_hybrid_1: run.int[2],
                det_drift: r.det_drift,
                div_et: r.div_et,
                curl_compat: r.curl_compat,
            });
        }
        if let Some(dir) = snapshots {
            if snap > 0 && step.is_multiple_of(snap) {
                let mut side = BTreeMap::new();
                side.insert("int_v_high".to_string(), format!("{:.17e}", run.int[0]));
                side.insert("int_e_crit_sq".to_string(), format!("{:.17e}", run.int[1]));
                side.insert("int_e_hybrid_1".to_string(), format!("{:.17e}", run.int[2]));
                save_checkpoint(&dir.join(format!("state_{step:07}.vsf")), s, &icfg, &side)?;
            }
        }
        step += 1;
        Ok(())
    });
    let halted = match result {
        Ok(()) => None,
        Err(e @ (Error::BlowUp { .. } | Error::NonFinite { .. })) => Some(e),
        Err(e) => return Err(e),
    };
    let extra = extra_acc
        .into_iter()
        .map(|(label, av, ae, sup)| match (av, ae) {
            (Some(av), Some(ae)) => (label, av.value() + ae.value()),
            _ => (label, sup),
        })
        .collect();
    let solution_norm = sup_v + mu * run.int[0] + sup_e + run.int[2];
    Ok(DecayOutcome {
        log,
        halted,
        half_integrals: half_integrals.unwrap_or(run.int),
        sup_v_crit: sup_v,
        sup_e_hybrid_inf: sup_e,
        data_norm,
        solution_norm,
        extra,
    })
}

fn fmt_e(x: f64) -> String {
    format!("{x:.6e}")
}

/// Small-data run with the time-integrability and amplitude-scaling verdicts.
pub fn run_decay_experiment(cfg: &ExperimentConfig, snapshots: Option<&Path>) -> Result<(TimeSeriesLog, Report)> {
    let mut rep = Report::new("decay");
    rep.fact("grid", cfg.grid.build()?);
    rep.fact("amplitude", cfg.data.amplitude);
    rep.fact("t_end", cfg.integrator.t_end);
    rep.fact("dt", cfg.integrator.dt);
    rep.fact("mu", cfg.integrator.mu);
    let out = decay_trajectory(cfg, cfg.data.amplitude, snapshots)?;
    let mut parts = vec![match &out.halted {
        None => (
            true,
            format!(
                "reached t = {} without tripping the blow-up guard",
                cfg.integrator.t_end
            ),
        ),
        Some(e) => (false, format!("halted: {e}")),
    }];
    let last = out.log.rows.last().copied().unwrap_or_default();
    let totals = [last.int_v_high, last.int_e_crit_sq, last.int_e_hybrid_1];
    let names = ["int_v_high", "int_e_crit_sq", "int_e_hybrid_1"];
    let mut ok = out.halted.is_none() && out.log.integrals_monotone();
    let mut detail = Vec::new();
    for k in 0..3 {
        let gain = if totals[k] > 0.0 {
            (totals[k] - out.half_integrals[k]) / totals[k]
        } else {
            0.0
        };
        ok &= gain < 0.1;
        detail.push(format!("{} final-half gain {:.4}%", names[k], 100.0 * gain));
        rep.fact(names[k], fmt_e(totals[k]));
    }
    parts.push((ok, detail.join(", ")));
    rep.fact("data_norm", fmt_e(out.data_norm));
    rep.fact("solution_norm", fmt_e(out.solution_norm));
    rep.fact(
        "solution_over_data",
        if out.data_norm > 0.0 {
            fmt_e(out.solution_norm / out.data_norm)
        } else {
            "0".into()
        },
    );
    for (label, value) in &out.extra {
        rep.fact(&format!("norm {label}"), fmt_e(*value));
    }
    if cfg.decay.halving_check {
        let half = decay_trajectory(cfg, 0.5 * cfg.data.amplitude, None)?;
        // zero data halves trivially
        let ratio = |a: f64, b: f64| if b == 0.0 && a == 0.0 { 0.5 } else { a / b };
        let rv = ratio(half.sup_v_crit, out.sup_v_crit);
        let re = ratio(half.sup_e_hybrid_inf, out.sup_e_hybrid_inf);
        let within = |r: f64| (r / 0.5 - 1.0).abs() <= 0.1;
        parts.push((
            half.halted.is_none() && within(rv) && within(re),
            format!("half amplitude: sup v ratio {rv:.6}, sup E ratio {re:.6} (expected 0.5 within 10%)"),
        ));
    } else {
        parts.push((false, "amplitude halving check disabled".into()));
    }
    rep.verdict_parts("small_data_global_behavior", parts);
    Ok((out.log, rep))
}

/// Largest relative error of the production mode update against the closed
/// form exponential, over `mus × xis` and both unit initial vectors.
pub fn dispersion_mode_error(mus: &[f64], xis: &[f64], dt: f64, t_end: f64) -> f64 {
    let mut worst = 0.0f64;
    for &mu in mus {
        for &xi in xis {
            let m = MixedModeMatrix::new(mu, xi);
            let ex = m.exp(t_end);
            for y0 in [[1.0, 0.0], [0.0, 1.0]] {
                let exact = [ex[0][0] * y0[0] + ex[0][1] * y0[1], ex[1][0] * y0[0] + ex[1][1] * y0[1]];
                let num = evolve_mode(Scheme::ImexEtdAb2, mu, xi, y0, dt, t_end);
                let err = ((num[0] - exact[0]).powi(2) + (num[1] - exact[1]).powi(2)).sqrt();
                let size = (exact[0].powi(2) + exact[1].powi(2)).sqrt();
                worst = worst.max(err / size);
            }
        }
    }
    worst
}

/// Same comparison through [`mixed_system_evolve`] on every resolved mode
/// of random solenoidal `(v0, c0)` on a 2D grid with `n` points per axis.
pub fn dispersion_field_error(n: usize, mu: f64, dt: f64, t_end: f64, seed: u64) -> Result<f64> {
    let grid = Grid::new(2, n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k_hi = grid.dealias_cutoff() as f64;
    let v0 = random_solenoidal(&grid, &mut rng, 1.0, k_hi, 0.0)?;
    let c0 = random_solenoidal(&grid, &mut rng, 1.0, k_hi, 0.0)?;
    let opts = MixedOptions {
        record: false,
        ..Default::default()
    };
    let traj = mixed_system_evolve(&v0, &c0, None, None, None, mu, t_end, dt, &opts)?;
    let t = traj.t_end();
    let mut worst = 0.0f64;
    for m in 1..grid.len() {
        let size0: f64 = (0..2)
            .map(|i| v0.comp(i).coeffs()[m].norm_sqr() + c0.comp(i).coeffs()[m].norm_sqr())
            .sum();
        if size0 == 0.0 {
            continue;
        }
        let ex = MixedModeMatrix::new(mu, grid.k_abs(m)).exp(t);
        let mut err = 0.0;
        let mut size = 0.0;
        for i in 0..2 {
            let (a, b) = (v0.comp(i).coeffs()[m], c0.comp(i).coeffs()[m]);
            let ev: Complex64 = a * ex[0][0] + b * ex[0][1];
            let ec: Complex64 = a * ex[1][0] + b * ex[1][1];
            err +=
                (traj.v_final.comp(i).coeffs()[m] - ev).norm_sqr() + (traj.c_final.comp(i).coeffs()[m] - ec).norm_sqr();
            size += ev.norm_sqr() + ec.norm_sqr();
        }
        worst = worst.max((err / size).sqrt());
    }
    Ok(worst)
}

/// Dispersion validation: mode updates, lattice modes, root residuals and
/// the slow high-frequency root. Returns the report and the root table.
pub fn run_dispersion_validation(cfg: &ExperimentConfig) -> Result<(Report, String)> {
    let d = &cfg.dispersion;
    let xis = log_spaced(d.xi_min, d.xi_max, d.xi_count);
    let mut rep = Report::new("dispersion");
    rep.fact("mus", format!("{:?}", d.mus));
    rep.fact("xi_range", format!("[{}, {}] x {}", d.xi_min, d.xi_max, d.xi_count));
    rep.fact("dt", d.dt);
    rep.fact("t_end", d.t_end);

    let mut err = dispersion_mode_error(&d.mus, &xis, d.dt, d.t_end);
    rep.fact("mode_update_max_rel_err", fmt_e(err));
    if d.field_n > 0 {
        for &mu in &d.mus {
            let e = dispersion_field_error(d.field_n, mu, d.dt, d.t_end, cfg.data.seed)?;
            rep.fact(&format!("field_max_rel_err mu={mu}"), fmt_e(e));
            err = err.max(e);
        }
    }
    let mut parts = vec![(
        err <= 1e-6,
        format!("max relative error {} (tolerance 1e-6)", fmt_e(err)),
    )];

    let table = dispersion_table(&d.mus, &xis);
    let mut res = 0.0f64;
    for r in &table {
        let m = MixedModeMatrix::new(r.mu, r.xi_abs);
        for l in r.lambda {
            res = res.max(m.characteristic_residual(l));
        }
    }
    let unit = MixedModeMatrix::new(1.0, 1.0).eigenvalues;
    let target = Complex64::new(-0.5, 0.75f64.sqrt());
    let unit_err = unit
        .iter()
        .map(|l| (l - target).norm().min((l - target.conj()).norm()))
        .fold(0.0, f64::max);
    rep.fact("unit_case_root_error", fmt_e(unit_err));
    parts.push((
        res <= 1e-12,
        format!("max scaled root residual {} (tolerance 1e-12)", fmt_e(res)),
    ));
    parts.push((
        unit_err <= 1e-6,
        format!("mu = |xi| = 1 roots off by {} (tolerance 1e-6)", fmt_e(unit_err)),
    ));

    let m = MixedModeMatrix::new(1.0, 8.0);
    let slow = m.eigenvalues.iter().map(|l| l.re).fold(f64::NEG_INFINITY, f64::max);
    let rel = (slow + 1.0).abs();
    parts.push((
        rel <= 0.02,
        format!(
            "slow root {slow:.8} at |xi| = 8, mu = 1, {:.4}% from -1/mu (limit 2%)",
            100.0 * rel
        ),
    ));
    rep.verdict_parts("dispersion_oracle", parts);
    Ok((rep, format_dispersion_table(&table)))
}

/// Inequality probes plus the decomposition exactness checks.
pub fn run_probe(cfg: &ExperimentConfig) -> Result<(Report, String)> {
    let p = &cfg.probe;
    let dim = cfg.grid.dim;
    let mut rep = Report::new("probe");
    let laws: Vec<Law> = if p.laws.is_empty() {
        Law::ALL.to_vec()
    } else {
        p.laws
            .iter()
            .map(|n| Law::parse(n).ok_or_else(|| Error::InvalidParameter(format!("unknown law {n:?}"))))
            .collect::<Result<_>>()?
    };
    let mut table = String::new();
    let mut parts = Vec::new();
    for law in laws {
        let mut pc = ProbeConfig::for_law(law, dim);
        pc.grids = p.grids.clone();
        pc.samples = p.samples;
        pc.seed = cfg.data.seed;
        let r = inequality_prober(&pc)?;
        table.push_str(&format!("{r}\n"));
        let stab = r.stability();
        parts.push((
            r.all_finite() && stab < 2.0,
            format!(
                "{}: finite = {}, refinement change {stab:.4}",
                law.name(),
                r.all_finite()
            ),
        ));
    }

    // the commutator vanishes for constant velocities
    let grid = cfg.grid.build()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.data.seed);
    let mut e = TensorField::zeros(&grid);
    for c in e.comps_mut() {
        *c = crate::spectral::random::random_bandlimited(&grid, &mut rng, 1.0, grid.dealias_cutoff() as f64, 1.0)?;
    }
    let mut u = VectorField::zeros(&grid);
    for (i, c) in u.comps_mut().iter_mut().enumerate() {
        c.coeffs_mut()[0] = Complex64::new(0.3 + i as f64, 0.0);
    }
    let k = commutator(&u, &e)?;
    let zero = k
        .comps()
        .iter()
        .all(|c| c.coeffs().iter().all(|z| z.re == 0.0 && z.im == 0.0));
    parts.push((zero, format!("constant-velocity commutator norm {:e}", k.l2_norm())));
    rep.verdict_parts("inequality_probes", parts);

    let grids: Vec<Grid> = if dim == 2 {
        vec![Grid::new(2, 64)?, Grid::new(3, 32)?]
    } else {
        vec![Grid::new(3, 32)?, Grid::new(2, 64)?]
    };
    let mut bony = 0.0f64;
    for g in &grids {
        let b = bony_exactness(g, p.decomposition_samples, cfg.data.seed)?;
        rep.fact(&format!("bony_max_rel_defect {g}"), fmt_e(b));
        bony = bony.max(b);
    }
    rep.verdict(
        "bony_exactness",
        bony <= 1e-10,
        format!(
            "max relative defect {} over {} pairs per grid (tolerance 1e-10)",
            fmt_e(bony),
            p.decomposition_samples
        ),
    );

    let mut ok = true;
    let mut detail = Vec::new();
    for g in &grids {
        let c = partition_checks(g, cfg.data.seed)?;
        ok &=
            c.partition_deviation <= 1e-12 && c.disjoint_blocks == 0.0 && c.product_localization == 0.0 && !c.truncated;
        detail.push(format!(
            "{g}: partition {:.2e}, |p-q|>=2 blocks {:e}, |p-q|>=5 products {:e}",
            c.partition_deviation, c.disjoint_blocks, c.product_localization
        ));
    }
    rep.verdict("dyadic_partition", ok, detail.join("; "));

    let mut scal = 0.0f64;
    for g in &grids {
        for seed in 0..5 {
            scal = scal.max(scaling_invariance(g, 2, cfg.data.seed + seed)?);
        }
    }
    rep.verdict(
        "critical_scaling_invariance",
        scal <= 1e-8,
        format!(
            "max relative change {} under l = 2 dilation (tolerance 1e-8)",
            fmt_e(scal)
        ),
    );
    Ok((rep, table))
}

/// Picard iteration at small data against the direct integrator.
pub fn run_contraction(cfg: &ExperimentConfig) -> Result<Report> {
    let mut icfg = cfg.integrator.clone();
    if icfg.picard.is_none() {
        icfg.picard = Some(Default::default());
    }
    let state = initial_state(cfg, cfg.data.amplitude)?;
    let half = state.grid().dim() as f64 / 2.0;
    let run = picard_solve(&state, &icfg)?;
    let d = &run.diagnostics;
    let mut rep = Report::new("contraction");
    rep.fact("grid", state.grid());
    rep.fact("t_end", icfg.t_end);
    rep.fact("iterations", d.iterations);
    rep.fact(
        "differences",
        d.differences.iter().map(|x| fmt_e(*x)).collect::<Vec<_>>().join(" "),
    );
    rep.fact(
        "ratios",
        d.ratios.iter().map(|x| format!("{x:.4}")).collect::<Vec<_>>().join(" "),
    );
    let worst = d.max_ratio_from(2);
    let mut parts = vec![(
        d.converged && !d.diverged && worst <= 0.5,
        format!(
            "max d(n+1)/d(n) for n >= 2: {worst:.4} (limit 0.5), converged = {}",
            d.converged
        ),
    )];

    let mut gap = BTreeMap::new();
    for coupling in [icfg.coupling, Coupling::Explicit] {
        if gap.contains_key(&format!("{coupling:?}")) {
            continue;
        }
        let mut c = icfg.clone();
        c.coupling = coupling;
        let mut it = Integrator::new(&c, &state)?;
        let mut s = state.clone();
        let mut m = 0usize;
        let mut worst = 0.0f64;
        it.run(&mut s, |s, bank| {
            let p = run
                .trajectory
                .get(m)
                .ok_or_else(|| Error::InvalidParameter("trajectory length mismatch".into()))?;
            let dv = bank.spectrum(&s.v.sub(&p.v)?).besov1(half - 1.0);
            let de = bank.spectrum(&s.e.sub(&p.e)?).besov1(half);
            worst = worst.max(dv + de);
            m += 1;
            Ok(())
        })?;
        gap.insert(format!("{coupling:?}"), worst);
    }
    for (k, v) in &gap {
        rep.fact(&format!("sup_gap_to_direct {k}"), fmt_e(*v));
    }
    let main = gap[&format!("{:?}", icfg.coupling)];
    parts.push((
        main <= 1e-6,
        format!("sup-in-time gap to the direct run {} (tolerance 1e-6)", fmt_e(main)),
    ));
    rep.verdict_parts("picard_contraction", parts);
    Ok(rep)
}

/// Two-scale continuous-dependence probe and determinism.
pub fn run_uniqueness(cfg: &ExperimentConfig) -> Result<Report> {
    let state = initial_state(cfg, cfg.data.amplitude)?;
    let u = &cfg.uniqueness;
    let mut rep = Report::new("uniqueness");
    rep.fact("t_end", cfg.integrator.t_end);
    let mut growth = Vec::new();
    let mut finals = Vec::new();
    for &scale in &u.scales {
        let r = uniqueness_probe(&state, scale, u.direction_seed, &cfg.integrator)?;
        let fin = r.final_ratio;
        rep.fact(&format!("growth scale={scale:e}"), format!("{:.8}", r.growth));
        rep.fact(&format!("final_ratio scale={scale:e}"), format!("{fin:.8}"));
        rep.fact(
            &format!("convection_integral scale={scale:e}"),
            fmt_e(r.convection_integral),
        );
        growth.push(r.growth);
        finals.push(fin);
    }
    let spread = |x: &[f64]| {
        let hi = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lo = x.iter().cloned().fold(f64::INFINITY, f64::min);
        hi / lo - 1.0
    };
    let (sg, sf) = (spread(&growth), spread(&finals));
    let mut parts = vec![(
        growth.len() >= 2 && sg <= 0.2 && sf <= 0.2,
        format!("growth spread {sg:.3e}, final-ratio spread {sf:.3e} (limit 20%)"),
    )];
    let zero = uniqueness_probe(&state, 0.0, u.direction_seed, &cfg.integrator)?;
    let a = integrate(&state, &cfg.integrator)?;
    let b = integrate(&state, &cfg.integrator)?;
    let same =
        a.v.comps()
            .iter()
            .chain(a.e.comps())
            .zip(b.v.comps().iter().chain(b.e.comps()))
            .all(|(x, y)| {
                x.coeffs()
                    .iter()
                    .zip(y.coeffs())
                    .all(|(p, q)| p.re.to_bits() == q.re.to_bits() && p.im.to_bits() == q.im.to_bits())
            });
    parts.push((
        zero.identical && same,
        format!(
            "zero perturbation identical = {}, repeated run identical = {same}",
            zero.identical
        ),
    ));
    rep.verdict_parts("continuous_dependence", parts);
    Ok(rep)
}

/// Constraint propagation, negative controls and formulation consistency.
pub fn run_constraint_suite(cfg: &ExperimentConfig) -> Result<Report> {
    let mut rep = Report::new("constraints");
    let grid = cfg.grid.build()?;
    let state = initial_state(cfg, cfg.data.amplitude)?;
    let tol = PROPAGATION_TOLERANCE;
    let mut worst = ConstraintResiduals::default();
    let mut step = 0usize;
    let cadence = cfg.cadence;
    let t_end = cfg.integrator.t_end;
    let dt = cfg.integrator.dt;
    let mut it = Integrator::new(&cfg.integrator, &state)?;
    let mut s = state.clone();
    it.run(&mut s, |s, _| {
        if step.is_multiple_of(cadence) || s.t >= t_end - 1e-9 * dt {
            let r = strain_residuals(&s.e);
            worst.det_drift = worst.det_drift.max(r.det_drift);
            worst.div_et = worst.div_et.max(r.div_et);
            worst.curl_compat = worst.curl_compat.max(r.curl_compat);
        }
        step += 1;
        Ok(())
    })?;
    rep.fact("grid", &grid);
    rep.fact("t_end", t_end);
    rep.fact("dt", dt);
    let mut parts = vec![(
        worst.within(&tol),
        format!(
            "max det_drift {}, div_et {}, curl_compat {} (tolerances 1e-4, 1e-6, 1e-5)",
            fmt_e(worst.det_drift),
            fmt_e(worst.div_et),
            fmt_e(worst.curl_compat)
        ),
    )];

    let bad = strain_residuals(&make_strain_inadmissible(&grid, &cfg.data)?);
    let fires = bad.det_drift > 10.0 * tol.det_drift
        && bad.div_et > 10.0 * tol.div_et
        && bad.curl_compat > 10.0 * tol.curl_compat;
    let eps = 1e-2;
    let id = strain_residuals(&scaled_identity_strain(&grid, eps));
    rep.fact("identity_strain_det_drift", fmt_e(id.det_drift));
    parts.push((
        fires && id.det_drift > 10.0 * tol.det_drift,
        format!(
            "inadmissible det_drift {}, div_et {}, curl_compat {}; eps*I det_drift {}",
            fmt_e(bad.det_drift),
            fmt_e(bad.div_et),
            fmt_e(bad.curl_compat),
            fmt_e(id.det_drift)
        ),
    ));
    rep.verdict_parts("constraint_propagation", parts);

    let c = &cfg.constraints;
    let mut cons = 0.0f64;
    if c.consistency_samples > 0 {
        let per = c.consistency_samples.div_ceil(2);
        let g2 = Grid::new(2, c.consistency_n)?;
        let g3 = Grid::new(3, (c.consistency_n / 2).max(16))?;
        cons = cons.max(formulation_consistency(&g2, per, cfg.data.seed, cfg.integrator.mu)?);
        cons = cons.max(formulation_consistency(
            &g3,
            c.consistency_samples - per,
            cfg.data.seed,
            cfg.integrator.mu,
        )?);
    }
    rep.verdict(
        "formulation_consistency",
        cons <= 1e-10,
        format!(
            "max relative mismatch {} over {} states (tolerance 1e-10)",
            fmt_e(cons),
            c.consistency_samples
        ),
    );
    Ok(rep)
}

/// Runs `cfg.experiment` and writes `report.txt` plus the experiment's data
/// files into `cfg.output`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Report> {
    cfg.validate()?;
    let out = &cfg.output;
    std::fs::create_dir_all(out)?;
    std::fs::write(out.join("config.toml"), cfg.to_toml_string())?;
    let report = match cfg.experiment {
        ExperimentKind::Decay => {
            let snaps = if cfg.snapshot_cadence > 0 {
                let d = out.join("snapshots");
                std::fs::create_dir_all(&d)?;
                Some(d)
            } else {
                None
            };
            let (log, rep) = run_decay_experiment(cfg, snaps.as_deref())?;
            log.save_csv(&out.join("timeseries.csv"))?;
            rep
        }
        ExperimentKind::Dispersion => {
            let (rep, table) = run_dispersion_validation(cfg)?;
            std::fs::write(out.join("dispersion.txt"), table)?;
            rep
        }
        ExperimentKind::Probe => {
            let (rep, table) = run_probe(cfg)?;
            std::fs::write(out.join("probe.txt"), table)?;
            rep
        }
        ExperimentKind::Contraction => run_contraction(cfg)?,
        ExperimentKind::Uniqueness => run_uniqueness(cfg)?,
        ExperimentKind::Constraints => run_constraint_suite(cfg)?,
    };
    report.write(&out.join("report.txt"))?;
    Ok(report)
}
