use fmhd::checkpoint;
use fmhd::dynamics::stability_limit;
use fmhd::harness::{
    convergence_study, identity_command, parse_config, parse_config_with, run, stability_study,
    CaseStatus, DtChoice, Outcome, StudyKind, DEFAULT_AMPLITUDE,
};
use fmhd::Model;

fn quick(extra: &[&str]) -> fmhd::harness::SimConfig {
    let mut sets = vec!["grid.n=16", "t_end=0.05", "diagnostics_every=2"];
    sets.extend_from_slice(extra);
    parse_config_with("", &sets).unwrap()
}

#[test]
fn empty_config_uses_defaults() {
    let c = parse_config("").unwrap();
    assert_eq!(c.grid.n(), 16);
    assert_eq!(c.t_end, 1.0);
    assert_eq!(c.initial_amplitude, DEFAULT_AMPLITUDE);
    assert_eq!(c.dt, DtChoice::Auto);
    assert_eq!(c.params.model, Model::Full);
    assert!(c.output_dir.is_none());
}

#[test]
fn negative_viscosity_is_rejected() {
    let err = parse_config("[params]\nmu = -1\n").unwrap_err().to_string();
    assert!(err.contains("mu must be positive"), "{err}");
}

#[test]
fn unknown_and_mistyped_keys_are_rejected() {
    assert!(parse_config("[grid]\nsize = 8\n").is_err());
    let err = parse_config("[grid]\nn = \"eight\"\n")
        .unwrap_err()
        .to_string();
    assert!(err.contains("grid.n"), "{err}");
    assert!(parse_config("[grid]\nn = 12\n").is_err());
    assert!(parse_config("[stepper]\nscheme = \"leapfrog\"\n").is_err());
}

#[test]
fn overrides_beat_the_file() {
    let c = parse_config_with("[grid]\nn = 32\n", &["grid.n=8"]).unwrap();
    assert_eq!(c.grid.n(), 8);
}

#[test]
fn emitted_config_parses_back_equal() {
    let text = "truncation = 2.0\nseed = 99\n[grid]\nn = 8\n\
                [params]\nmu = 0.25\ngamma = -2.0\nmodel = \"mhd\"\n\
                [stepper]\nscheme = \"rk4_explicit\"\ndt = 0.001\nallow_unstable = true\n";
    let c = parse_config(text).unwrap();
    let again = parse_config(&c.emit()).unwrap();
    assert_eq!(c, again);
    assert_eq!(c.emit(), again.emit());
}

#[test]
fn zero_amplitude_run_passes_with_zero_drift() {
    let out = run(&quick(&["initial_amplitude=0"]), None).unwrap();
    assert_eq!(out.study.outcome, Outcome::Pass);
    for name in ["div_drift_v", "div_drift_B", "unit_drift_m"] {
        assert_eq!(out.study.case(name).unwrap().get("max"), Some(0.0));
    }
}

#[test]
fn run_writes_artefacts() {
    let dir = tempfile::tempdir().unwrap();
    let config = quick(&[]);
    let out = run(&config, Some(dir.path())).unwrap();
    assert_eq!(out.study.outcome, Outcome::Pass);
    for f in [
        "diagnostics.csv",
        "config.toml",
        "run_summary.txt",
        "run_summary.csv",
    ] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let csv = std::fs::read_to_string(dir.path().join("diagnostics.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + out.simulation.record.len());

    let last = out.simulation.trajectory.states().last().unwrap();
    let back = checkpoint::read(
        &checkpoint::path_for_step(dir.path(), last.0),
        config.grid.dealias_fraction(),
    )
    .unwrap();
    assert_eq!(back, last.1);

    let saved = std::fs::read_to_string(dir.path().join("config.toml")).unwrap();
    assert_eq!(parse_config(&saved).unwrap(), config);
}

#[test]
fn unstable_explicit_step_reports_blow_up() {
    let probe = quick(&[]);
    let limit = stability_limit(&probe.grid, &probe.params, &probe.truncation().unwrap());
    let dt = format!("stepper.dt={}", 3.0 * limit);
    let c = quick(&[
        "stepper.scheme=rk4_explicit",
        &dt,
        "stepper.allow_unstable=true",
        "t_end=5",
        "initial_amplitude=0.1",
    ]);
    let out = run(&c, None).unwrap();
    assert_eq!(out.study.outcome, Outcome::BlowUp);
    let b = out.simulation.blow_up.as_ref().unwrap();
    assert!(b.last_valid_time > 0.0 && b.last_valid_time < 5.0);
    assert!(
        out.study
            .case("final")
            .unwrap()
            .get("t_star_observed")
            .unwrap()
            > 0.0
    );

    // Without the override the config refuses the step size.
    let err = parse_config_with("", &["grid.n=16", "stepper.scheme=rk4_explicit", &dt])
        .unwrap_err()
        .to_string();
    assert!(err.contains("stability limit"), "{err}");
}

#[test]
fn convergence_needs_two_truncations() {
    let err = convergence_study(&quick(&[]), &[2.0])
        .unwrap_err()
        .to_string();
    assert!(err.contains("need ≥ 2 truncations"), "{err}");
    assert!(convergence_study(&quick(&[]), &[2.0, 1.0]).is_err());
}

#[test]
fn linear_dynamics_do_not_couple_truncations() {
    let c = quick(&["params.model=diffusion"]);
    let study = convergence_study(&c, &[1.0, 2.0, 3.0]).unwrap();
    assert_eq!(study.kind, StudyKind::Convergence);
    for label in ["d_00", "d_01"] {
        assert_eq!(study.case(label).unwrap().get("difference"), Some(0.0));
    }
}

#[test]
fn zero_delta_is_degenerate() {
    let study = stability_study(&quick(&[]), &[0.0]).unwrap();
    let case = study.case("delta_0e0").unwrap();
    assert_eq!(case.get("ratio"), Some(1.0));
    assert_eq!(case.get("degenerate"), Some(1.0));
}

#[test]
fn pure_diffusion_twins_contract() {
    let c = quick(&["params.model=diffusion", "initial_amplitude=0.1"]);
    let study = stability_study(&c, &[1e-3, 1e-4, 1e-5, 1e-6]).unwrap();
    assert_eq!(study.outcome, Outcome::Pass);
    for case in study.cases.iter().filter(|c| c.label.starts_with("delta")) {
        assert!(case.get("ratio").unwrap() <= 1.0 + 1e-6, "{case:?}");
    }
}

#[test]
fn identity_command_verdicts() {
    let (_, zero) = identity_command(8, 0, true, false).unwrap();
    assert_eq!(zero.outcome, Outcome::Pass);
    let (report, random) = identity_command(16, 7, false, false).unwrap();
    assert!(report.pass());
    assert_eq!(random.outcome, Outcome::Pass);
    let (_, broken) = identity_command(16, 7, false, true).unwrap();
    assert_eq!(broken.outcome, Outcome::ThresholdFailure);
    assert!(broken.cases.iter().any(|c| c.status == CaseStatus::Fail));
    assert!(identity_command(6, 0, false, false).is_err());
}

#[test]
fn study_tables_are_sorted_and_parseable() {
    let out = run(&quick(&[]), None).unwrap();
    let labels: Vec<&str> = out.study.cases.iter().map(|c| c.label.as_str()).collect();
    let mut sorted = labels.clone();
    sorted.sort();
    assert_eq!(labels, sorted);
    let csv = out.study.to_csv().unwrap();
    let mut rdr = csv::Reader::from_reader(csv.as_bytes());
    assert!(rdr.records().all(|r| r.is_ok()));
    assert!(out.study.table().contains("result: PASS"));
}
