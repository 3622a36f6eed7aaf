use std::f64::consts::PI;

use fmhd::diagnostics::{
    breakdown_time, energy_e, energy_j, fit_gronwall_echo, gronwall_bound, sobolev_norm,
    stability_metric, unit_drift, BetaSamples, DiagnosticsRecord, DiagnosticsRow, GSpec,
    GronwallBound, COLUMNS,
};
use fmhd::dynamics::{rhs, simulate, Scheme, TimeStepper, Truncation};
use fmhd::{random_state, Grid, PhysicalField, PhysicalParams, SpectralField, StateVector};
use proptest::prelude::*;

fn volume() -> f64 {
    (2.0 * PI).powi(3)
}

#[test]
fn sobolev_norm_examples() {
    let g = Grid::cube(8).unwrap();
    let z = SpectralField::zeros(g);
    for order in 0..=3 {
        assert_eq!(sobolev_norm(&z, order), 0.0);
    }
    let c = SpectralField::constant(g, [0.6, 0.0, 0.8]);
    for order in 0..=3 {
        assert!((sobolev_norm(&c, order) - volume().sqrt()).abs() < 1e-12);
    }
    let s = PhysicalField::from_fn(g, |x, _, _| [0.0, 0.0, x.sin()])
        .to_spectral()
        .unwrap();
    let ratio = sobolev_norm(&s, 1) / sobolev_norm(&s, 0);
    assert!((ratio - 2f64.sqrt()).abs() < 1e-14);
    // ‖sin x‖² over the box is half the volume.
    assert!((sobolev_norm(&s, 0).powi(2) - 0.5 * volume()).abs() < 1e-10);
}

#[test]
#[should_panic(expected = "Sobolev order")]
fn sobolev_order_above_three_panics() {
    let g = Grid::cube(8).unwrap();
    sobolev_norm(&SpectralField::zeros(g), 4);
}

#[test]
fn energy_functionals() {
    let g = Grid::cube(8).unwrap();
    let p = PhysicalParams::default();
    let t = Truncation::full(&g);
    let z = SpectralField::zeros(g);
    let zero = StateVector::new(z.clone(), z.clone(), z.clone(), 0.0).unwrap();
    let r = rhs(&zero, &p, &t).unwrap();
    assert_eq!(energy_j(&zero, &r), 0.0);
    assert_eq!(energy_e(&zero, &r), 0.0);

    let m = SpectralField::constant(g, [0.0, 0.0, 1.0]);
    let rest = StateVector::new(z.clone(), z, m, 0.0).unwrap();
    let r = rhs(&rest, &p, &t).unwrap();
    assert!((energy_j(&rest, &r) - volume()).abs() < 1e-10);
    assert!((energy_e(&rest, &r) - volume()).abs() < 1e-10);

    let s = random_state(g, 9, 6.0, 0.3).unwrap();
    let r = rhs(&s, &p, &t).unwrap();
    assert!(energy_j(&s, &r) >= energy_e(&s, &r));
}

#[test]
fn unit_drift_examples() {
    let g = Grid::cube(8).unwrap();
    let m = SpectralField::constant(g, [0.0, 1.0, 0.0]);
    assert_eq!(unit_drift(&m), 0.0);
    assert!((unit_drift(&m.scaled(1.1)) - 0.21).abs() < 1e-14);
    let s = random_state(g, 1, 6.0, 0.5).unwrap();
    assert!(unit_drift(&s.m) < 1e-13);
}

#[test]
fn identical_trajectories_are_degenerate() {
    let g = Grid::cube(8).unwrap();
    let p = PhysicalParams::default();
    let t = Truncation::full(&g);
    let s = random_state(g, 2, 6.0, 0.01).unwrap();
    let st = TimeStepper::new(Scheme::EtdRk4, 0.01, &g, &p, &t).unwrap();
    let a = simulate(&s, 0.05, &st, &p, &t, 1).unwrap();
    let m = stability_metric(&a.trajectory, &a.trajectory).unwrap();
    assert!(m.degenerate);
    assert_eq!(m.ratio, 1.0);
    assert_eq!(m.sup_diff, 0.0);
}

#[test]
fn pure_diffusion_differences_contract() {
    let g = Grid::cube(8).unwrap();
    let p = PhysicalParams::default().with_model(fmhd::Model::Diffusion);
    let t = Truncation::full(&g);
    let s = random_state(g, 2, 6.0, 0.01).unwrap();
    let mut s2 = s.clone();
    s2.v = s.v.scaled(1.0 + 1e-6);
    let st = TimeStepper::new(Scheme::EtdRk4, 0.01, &g, &p, &t).unwrap();
    let a = simulate(&s, 0.1, &st, &p, &t, 1).unwrap();
    let b = simulate(&s2, 0.1, &st, &p, &t, 1).unwrap();
    let m = stability_metric(&a.trajectory, &b.trajectory).unwrap();
    assert!(!m.degenerate);
    assert!((m.ratio - 1.0).abs() < 1e-3, "{m:?}");
}

#[test]
fn mismatched_trajectories_are_rejected() {
    let g = Grid::cube(8).unwrap();
    let p = PhysicalParams::default();
    let t = Truncation::full(&g);
    let s = random_state(g, 2, 6.0, 0.01).unwrap();
    let st = TimeStepper::new(Scheme::EtdRk4, 0.01, &g, &p, &t).unwrap();
    let a = simulate(&s, 0.05, &st, &p, &t, 1).unwrap();
    let b = simulate(&s, 0.03, &st, &p, &t, 1).unwrap();
    assert!(stability_metric(&a.trajectory, &b.trajectory).is_err());
}

#[test]
fn record_rows_and_csv() {
    let g = Grid::cube(8).unwrap();
    let p = PhysicalParams::default();
    let t = Truncation::full(&g);
    let s = random_state(g, 2, 6.0, 0.01).unwrap();
    let mut rec = DiagnosticsRecord::new();
    rec.push(DiagnosticsRow::measure(&s, &p, &t).unwrap());
    let mut later = s.clone();
    later.time = 0.5;
    rec.push(DiagnosticsRow::measure(&later, &p, &t).unwrap());
    let csv = rec.to_csv_string().unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), COLUMNS.join(","));
    assert_eq!(lines.clone().count(), 2);
    for line in lines {
        assert_eq!(line.split(',').count(), COLUMNS.len());
    }
    assert_eq!(rec.times(), vec![0.0, 0.5]);
    assert!(rec.column_max("nope").is_none());
}

#[test]
#[should_panic]
fn record_times_must_increase() {
    let g = Grid::cube(8).unwrap();
    let p = PhysicalParams::default();
    let t = Truncation::full(&g);
    let s = random_state(g, 2, 6.0, 0.01).unwrap();
    let mut rec = DiagnosticsRecord::new();
    rec.push(DiagnosticsRow::measure(&s, &p, &t).unwrap());
    rec.push(DiagnosticsRow::measure(&s, &p, &t).unwrap());
}

#[test]
fn gronwall_linear_is_exponential() {
    let beta = BetaSamples::constant(1.0, 0.0, 1.0).unwrap();
    let b = gronwall_bound(1.0, &beta, &GSpec::Power(1.0), 1.0).unwrap();
    assert!((b.value().unwrap() - std::f64::consts::E).abs() < 1e-9);
    assert_eq!(
        breakdown_time(1.0, &beta, &GSpec::Power(1.0)).unwrap(),
        None
    );
}

#[test]
fn gronwall_zero_beta_is_constant() {
    let beta = BetaSamples::constant(0.0, 0.0, 3.0).unwrap();
    for g in [GSpec::Power(1.0), GSpec::Power(15.0)] {
        for t in [0.0, 1.0, 3.0] {
            let b = gronwall_bound(2.5, &beta, &g, t).unwrap();
            assert!((b.value().unwrap() - 2.5).abs() < 1e-12);
        }
    }
}

#[test]
fn gronwall_power_fifteen() {
    let c = 1.0;
    let beta = BetaSamples::constant(c, 0.0, 1.0).unwrap();
    let g = GSpec::Power(15.0);
    for t in [0.01, 0.03, 0.05, 0.07] {
        let exact = (1.0 - 14.0 * c * t).powf(-1.0 / 14.0);
        let got = gronwall_bound(1.0, &beta, &g, t).unwrap().value().unwrap();
        assert!((got / exact - 1.0).abs() < 1e-6, "t={t}: {got} vs {exact}");
    }
    let tb = breakdown_time(1.0, &beta, &g).unwrap().unwrap();
    assert!((tb - 1.0 / 14.0).abs() < 1e-6);
    assert!(matches!(
        gronwall_bound(1.0, &beta, &g, 0.08).unwrap(),
        GronwallBound::OutOfDomain { .. }
    ));
}

#[test]
fn gronwall_tabulated_matches_power_law() {
    // g(s) = s² sampled finely, against the closed form α/(1 - α∫β).
    let s: Vec<f64> = (0..=4000).map(|i| 1.0 + i as f64 * 1e-3).collect();
    let gv: Vec<f64> = s.iter().map(|x| x * x).collect();
    let g = GSpec::Tabulated { s, g: gv };
    let beta = BetaSamples::constant(0.5, 0.0, 1.0).unwrap();
    let got = gronwall_bound(1.0, &beta, &g, 1.0)
        .unwrap()
        .value()
        .unwrap();
    assert!((got - 2.0).abs() < 1e-3, "{got}");
}

#[test]
fn gronwall_rejects_bad_input() {
    let beta = BetaSamples::constant(1.0, 0.0, 1.0).unwrap();
    assert!(gronwall_bound(0.0, &beta, &GSpec::Power(2.0), 0.5).is_err());
    assert!(gronwall_bound(1.0, &beta, &GSpec::Power(0.5), 0.5).is_err());
    assert!(gronwall_bound(1.0, &beta, &GSpec::Power(2.0), 2.0).is_err());
    assert!(BetaSamples::new(vec![0.0, 0.0], vec![1.0, 1.0]).is_err());
    assert!(BetaSamples::new(vec![0.0, 1.0], vec![1.0, -1.0]).is_err());
}

#[test]
fn echo_fit_dominates_its_own_data() {
    let times: Vec<f64> = (0..20).map(|i| i as f64 * 0.05).collect();
    let e: Vec<f64> = times.iter().map(|t| 3.0 * (-t).exp()).collect();
    let echo = fit_gronwall_echo(&times, &e).unwrap();
    assert_eq!(echo.e0, 3.0);
    assert!(echo.dominated);
    let grow: Vec<f64> = times.iter().map(|t| 1.0 + 0.1 * t).collect();
    let echo = fit_gronwall_echo(&times, &grow).unwrap();
    assert!(echo.c_fit > 0.0 && echo.dominated);
    assert!(echo.breakdown.unwrap() > 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn sobolev_norms_are_monotone_in_order(seed in any::<u64>()) {
        let g = Grid::cube(8).unwrap();
        let s = random_state(g, seed, 4.0, 1.0).unwrap();
        for u in [&s.v, &s.b, &s.m] {
            for order in 0..3 {
                prop_assert!(sobolev_norm(u, order) <= sobolev_norm(u, order + 1) * (1.0 + 1e-15));
            }
        }
    }

    #[test]
    fn gronwall_power_closed_form(alpha in 0.2f64..5.0, c in 0.1f64..2.0, p in 1.5f64..6.0, frac in 0.0f64..0.95) {
        // u' = c u^p, u(0) = α: u = (α^{1-p} - (p-1) c t)^{1/(1-p)}
        let t_star = alpha.powf(1.0 - p) / ((p - 1.0) * c);
        let t = frac * t_star;
        let beta = BetaSamples::constant(c, 0.0, t_star * 2.0).unwrap();
        let exact = (alpha.powf(1.0 - p) - (p - 1.0) * c * t).powf(1.0 / (1.0 - p));
        let got = gronwall_bound(alpha, &beta, &GSpec::Power(p), t).unwrap().value().unwrap();
        prop_assert!((got / exact - 1.0).abs() < 1e-6, "{} vs {}", got, exact);
        let tb = breakdown_time(alpha, &beta, &GSpec::Power(p)).unwrap().unwrap();
        prop_assert!((tb / t_star - 1.0).abs() < 1e-9);
    }
}
