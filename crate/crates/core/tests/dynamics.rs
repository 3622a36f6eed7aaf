mod common;

use fmhd::dynamics::{
    default_dt, rhs, rhs_magnetic, rhs_magnetisation, rhs_velocity, simulate, stability_limit,
    step, DissipationCheck, Scheme, TimeStepper, Truncation,
};
use fmhd::{random_state, Grid, Model, PhysicalField, PhysicalParams, SpectralField, StateVector};

fn params() -> PhysicalParams {
    PhysicalParams::new(0.7, 0.9, 1.3, 0.6).unwrap()
}

fn sin_x_field(g: Grid, comp: usize, amp: f64) -> SpectralField {
    PhysicalField::from_fn(g, |x, _, _| {
        let mut u = [0.0; 3];
        u[comp] = amp * x.sin();
        u
    })
    .to_spectral()
    .unwrap()
}

fn uniform_m(g: Grid) -> SpectralField {
    SpectralField::constant(g, [0.0, 0.0, 1.0])
}

fn max_diff(a: &SpectralField, b: &SpectralField) -> f64 {
    a.sub(b).max_abs()
}

#[test]
fn quiescent_state_has_zero_velocity_rhs() {
    let g = Grid::cube(8).unwrap();
    let z = SpectralField::zeros(g);
    let s = StateVector::new(z.clone(), z, uniform_m(g), 0.0).unwrap();
    let dv = rhs_velocity(&s, &params(), &Truncation::full(&g)).unwrap();
    assert_eq!(dv.max_abs(), 0.0);
    let dm = rhs_magnetisation(&s, &params(), &Truncation::full(&g)).unwrap();
    assert!(dm.max_abs() < 1e-15);
}

#[test]
fn shear_mode_only_diffuses() {
    let g = Grid::cube(8).unwrap();
    let p = params();
    let v = sin_x_field(g, 2, 1.0);
    let s = StateVector::new(v.clone(), SpectralField::zeros(g), uniform_m(g), 0.0).unwrap();
    let dv = rhs_velocity(&s, &p, &Truncation::full(&g)).unwrap();
    assert!(max_diff(&dv, &v.scaled(-p.mu)) < 1e-14);
}

#[test]
fn magnetic_mode_only_diffuses() {
    let g = Grid::cube(8).unwrap();
    let p = params();
    let b = sin_x_field(g, 2, 1.0);
    let z = SpectralField::zeros(g);
    let s = StateVector::new(z.clone(), b.clone(), uniform_m(g), 0.0).unwrap();
    let db = rhs_magnetic(&s, &p, &Truncation::full(&g)).unwrap();
    assert!(max_diff(&db, &b.scaled(-p.eta)) < 1e-14);

    let s = StateVector::new(
        random_state(g, 1, 6.0, 0.5).unwrap().v,
        z,
        uniform_m(g),
        0.0,
    )
    .unwrap();
    assert!(
        rhs_magnetic(&s, &p, &Truncation::full(&g))
            .unwrap()
            .max_abs()
            < 1e-15
    );
}

#[test]
fn uniform_magnetisation_torque() {
    let g = Grid::cube(8).unwrap();
    let p = PhysicalParams::default();
    let z = SpectralField::zeros(g);
    let b = SpectralField::constant(g, [1.0, 0.0, 0.0]);
    let s = StateVector::new(z.clone(), b, uniform_m(g), 0.0).unwrap();
    let dm = rhs_magnetisation(&s, &p, &Truncation::full(&g)).unwrap();
    assert!(max_diff(&dm, &SpectralField::constant(g, [1.0, 1.0, 0.0])) < 1e-15);

    let s = StateVector::new(z.clone(), z, uniform_m(g), 0.0).unwrap();
    assert!(
        rhs_magnetisation(&s, &p, &Truncation::full(&g))
            .unwrap()
            .max_abs()
            < 1e-15
    );
}

#[test]
fn induction_matches_identity_expansion() {
    let g = Grid::cube(16).unwrap();
    let p = params();
    let s = random_state(g, 4, 6.0, 0.5).unwrap();
    let trunc = Truncation::full(&g);
    let db = rhs_magnetic(&s, &p, &trunc).unwrap();
    // (B·∇)v - (v·∇)B, dealiased the same way, plus the diffusion.
    let mut expect = fmhd::calculus::convective(&s.b, &s.v)
        .unwrap()
        .sub(&fmhd::calculus::convective(&s.v, &s.b).unwrap());
    expect.axpy(p.eta, &fmhd::calculus::laplacian(&s.b));
    expect.apply_mask(&trunc.mask(&g));
    let rel = max_diff(&db, &expect) / expect.max_abs();
    assert!(rel < 1e-11, "{rel:e}");
}

#[test]
fn rhs_matches_finite_differences() {
    let g = Grid::cube(32).unwrap();
    let p = params();
    let s = common::band_one_state(g, 11);
    let spectral = rhs(&s, &p, &Truncation::full(&g)).unwrap();
    let fd = common::fd_rhs(&s, &p);
    for (name, a, b) in [
        ("v", &spectral.v, &fd.v),
        ("B", &spectral.b, &fd.b),
        ("m", &spectral.m, &fd.m),
    ] {
        let rel = common::relative_l2(&a.to_physical().unwrap(), b);
        assert!(rel < 1e-4, "{name}: {rel:e}");
    }
}

#[test]
fn rhs_respects_truncation() {
    let g = Grid::cube(16).unwrap();
    let s = random_state(g, 2, 6.0, 0.3).unwrap();
    let trunc = Truncation::new(&g, 3.0).unwrap();
    let r = rhs(&s, &params(), &trunc).unwrap();
    let mask = trunc.mask(&g);
    for f in [&r.v, &r.b, &r.m] {
        for c in 0..3 {
            for (z, keep) in f.component(c).iter().zip(&mask) {
                assert!(*keep || z.norm() == 0.0);
            }
        }
    }
}

#[test]
fn imex_euler_heat_kernel() {
    let g = Grid::cube(8).unwrap();
    let p = PhysicalParams::default().with_model(Model::Diffusion);
    let v = sin_x_field(g, 2, 1.0);
    let z = SpectralField::zeros(g);
    let s = StateVector::new(v.clone(), z, uniform_m(g), 0.0).unwrap();
    let dt = 0.01;
    let trunc = Truncation::full(&g);
    let stepper = TimeStepper::new(Scheme::ImexEuler, dt, &g, &p, &trunc).unwrap();
    let next = step(&s, &stepper, &p, &trunc).unwrap();
    assert!(max_diff(&next.v, &v.scaled((-p.mu * dt).exp())) < 1e-15);
    assert_eq!(next.time, dt);
}

#[test]
fn zero_state_stays_zero() {
    let g = Grid::cube(8).unwrap();
    let z = SpectralField::zeros(g);
    let s = StateVector::new(z.clone(), z.clone(), z, 0.0).unwrap();
    let p = PhysicalParams::default();
    let trunc = Truncation::full(&g);
    for scheme in [Scheme::ImexEuler, Scheme::EtdRk4, Scheme::Rk4Explicit] {
        let stepper = TimeStepper::new(scheme, 0.001, &g, &p, &trunc).unwrap();
        let next = step(&s, &stepper, &p, &trunc).unwrap();
        assert_eq!(next.v.max_abs() + next.b.max_abs() + next.m.max_abs(), 0.0);
    }
}

#[test]
fn explicit_rk4_above_limit_needs_override() {
    let g = Grid::cube(16).unwrap();
    let p = PhysicalParams::default();
    let trunc = Truncation::full(&g);
    let limit = stability_limit(&g, &p, &trunc);
    assert!(TimeStepper::new(Scheme::Rk4Explicit, 0.9 * limit, &g, &p, &trunc).is_ok());
    assert!(TimeStepper::new(Scheme::Rk4Explicit, 1.1 * limit, &g, &p, &trunc).is_err());
    assert!(TimeStepper::new(Scheme::EtdRk4, 10.0 * limit, &g, &p, &trunc).is_ok());
    assert!(TimeStepper::unchecked(Scheme::Rk4Explicit, 1.1 * limit).is_ok());
    assert!(TimeStepper::unchecked(Scheme::Rk4Explicit, 0.0).is_err());
}

#[test]
fn simulate_without_span_records_initial_row_only() {
    let g = Grid::cube(8).unwrap();
    let p = PhysicalParams::default();
    let s = random_state(g, 0, 6.0, 0.01).unwrap();
    let trunc = Truncation::full(&g);
    let stepper = TimeStepper::new(Scheme::EtdRk4, 0.01, &g, &p, &trunc).unwrap();
    let sim = simulate(&s, 0.0, &stepper, &p, &trunc, 1).unwrap();
    assert_eq!(sim.steps, 0);
    assert_eq!(sim.record.len(), 1);
    assert_eq!(sim.trajectory.len(), 1);
}

#[test]
fn zero_amplitude_norms_stay_zero() {
    let g = Grid::cube(8).unwrap();
    let p = PhysicalParams::default();
    let s = random_state(g, 5, 6.0, 0.0).unwrap();
    let trunc = Truncation::full(&g);
    let stepper = TimeStepper::new(Scheme::EtdRk4, default_dt(&g, &p), &g, &p, &trunc).unwrap();
    let sim = simulate(&s, 0.2, &stepper, &p, &trunc, 1).unwrap();
    for name in ["l2_v", "h2_v", "l2_B", "h2_B", "dt_norm_m", "unit_drift_m"] {
        assert_eq!(sim.record.column_max(name).unwrap(), 0.0, "{name}");
    }
}

#[test]
fn simulate_lands_on_end_time() {
    let g = Grid::cube(8).unwrap();
    let p = PhysicalParams::default();
    let s = random_state(g, 5, 6.0, 0.01).unwrap();
    let trunc = Truncation::full(&g);
    let stepper = TimeStepper::new(Scheme::EtdRk4, 0.03, &g, &p, &trunc).unwrap();
    let sim = simulate(&s, 0.1, &stepper, &p, &trunc, 3).unwrap();
    assert_eq!(sim.steps, 4);
    assert_eq!(sim.final_state.time, 0.1);
    let times = sim.record.times();
    assert_eq!(times.len(), 3);
    assert!((times[1] - 0.075).abs() < 1e-15);
    assert_eq!(times[2], 0.1);
}

#[test]
fn resolution_independence_for_band_limited_data() {
    let p = PhysicalParams::default();
    let coarse = Grid::cube(16).unwrap();
    let fine = Grid::cube(32).unwrap();
    let k_max = 3.0;
    let tc = Truncation::new(&coarse, k_max).unwrap();
    let tf = Truncation::new(&fine, k_max).unwrap();
    let (s16, _) =
        fmhd::dynamics::galerkin_initial_data(&random_state(coarse, 8, 6.0, 0.003).unwrap(), &tc)
            .unwrap();

    // Embed the coarse spectrum into the fine grid.
    let embed = |f: &SpectralField| -> SpectralField {
        let mut out = SpectralField::zeros(fine);
        for c in 0..3 {
            for (idx, z) in f.component(c).iter().enumerate() {
                if z.norm() == 0.0 {
                    continue;
                }
                let (ix, iy, iz) = coarse.unflat(idx);
                let to = |i: usize| coarse.mode(i).rem_euclid(32) as usize;
                out.component_mut(c)[fine.flat(to(ix), to(iy), to(iz))] = *z;
            }
        }
        out
    };
    let s32 = StateVector::new(embed(&s16.v), embed(&s16.b), embed(&s16.m), 0.0).unwrap();

    let dt = 0.005;
    let t_end = 0.1;
    let a = simulate(
        &s16,
        t_end,
        &TimeStepper::new(Scheme::EtdRk4, dt, &coarse, &p, &tc).unwrap(),
        &p,
        &tc,
        100,
    )
    .unwrap();
    let b = simulate(
        &s32,
        t_end,
        &TimeStepper::new(Scheme::EtdRk4, dt, &fine, &p, &tf).unwrap(),
        &p,
        &tf,
        100,
    )
    .unwrap();
    let fa = &a.final_state;
    let fb = &b.final_state;
    let fa_up = StateVector::new(embed(&fa.v), embed(&fa.b), embed(&fa.m), fa.time).unwrap();
    let d = fmhd::diagnostics::difference_norm(&fa_up, fb);
    assert!(d < 1e-8, "{d:e}");
}

#[test]
fn energy_law_holds_for_decoupled_mhd() {
    let g = Grid::cube(16).unwrap();
    let p = PhysicalParams::default().with_model(Model::Mhd);
    let mut s = random_state(g, 3, 6.0, 0.1).unwrap();
    s.m = uniform_m(g);
    let dt = default_dt(&g, &p);
    let (check, _) = DissipationCheck::evaluate(&s, dt, &p, &Truncation::full(&g)).unwrap();
    assert!(check.energy_change < 0.0);
    assert!(check.defect() <= 10.0 * check.lte_estimate, "{check:?}");
}

#[test]
fn energy_law_check_detects_coupling() {
    let g = Grid::cube(16).unwrap();
    let p = PhysicalParams::default();
    let s = random_state(g, 3, 6.0, 0.1).unwrap();
    let dt = default_dt(&g, &p);
    let (check, _) = DissipationCheck::evaluate(&s, dt, &p, &Truncation::full(&g)).unwrap();
    assert!(check.defect() > 10.0 * check.lte_estimate, "{check:?}");
}
