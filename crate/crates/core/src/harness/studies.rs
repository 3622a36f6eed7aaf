use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::calculus::{
    identity_suite_with, IdentityInputs, IdentityOptions, IdentityReport, IDENTITY_THRESHOLD,
};
use crate::checkpoint;
use crate::diagnostics::{stability_metric, StabilityMetric};
use crate::dynamics::{
    galerkin_initial_data, simulate_with, SimulateOptions, Simulation, Truncation,
};
use crate::error::{Error, Result};
use crate::fields::{random_state, StateVector};
use crate::grid::Grid;

use super::config::SimConfig;

/// Largest allowed spectral divergence of `v` and `B` over a run.
pub const DIV_THRESHOLD: f64 = 1e-12;
/// Largest allowed `| |m|² - 1 |` over a run.
pub const UNIT_DRIFT_THRESHOLD: f64 = 1e-6;

const CONVERGENCE_LAST_OVER_FIRST: f64 = 1e-2;
const STABILITY_SPREAD: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StudyKind {
    Run,
    Convergence,
    Stability,
    Identities,
}

impl StudyKind {
    pub fn name(self) -> &'static str {
        match self {
            StudyKind::Run => "run",
            StudyKind::Convergence => "convergence",
            StudyKind::Stability => "stability",
            StudyKind::Identities => "identities",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaseStatus {
    Pass,
    Fail,
    /// Blow-up prevented a verdict.
    Inconclusive,
    /// Reported only; no threshold applies.
    Info,
}

impl CaseStatus {
    pub fn name(self) -> &'static str {
        match self {
            CaseStatus::Pass => "pass",
            CaseStatus::Fail => "fail",
            CaseStatus::Inconclusive => "inconclusive",
            CaseStatus::Info => "info",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CaseSummary {
    pub label: String,
    pub metrics: Vec<(String, f64)>,
    pub status: CaseStatus,
}

impl CaseSummary {
    fn new(label: impl Into<String>, status: CaseStatus) -> Self {
        Self {
            label: label.into(),
            metrics: Vec::new(),
            status,
        }
    }

    fn metric(mut self, name: &str, value: f64) -> Self {
        self.metrics.push((name.to_owned(), value));
        self
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.metrics
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| *v)
    }
}

/// Overall verdict of a study; also the CLI exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Pass = 0,
    ThresholdFailure = 1,
    BlowUp = 2,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyResult {
    pub kind: StudyKind,
    /// Sorted by label; labels are unique.
    pub cases: Vec<CaseSummary>,
    pub outcome: Outcome,
    pub notes: Vec<String>,
}

impl StudyResult {
    fn new(
        kind: StudyKind,
        mut cases: Vec<CaseSummary>,
        outcome: Outcome,
        notes: Vec<String>,
    ) -> Self {
        cases.sort_by(|a, b| a.label.cmp(&b.label));
        debug_assert!(cases.windows(2).all(|w| w[0].label != w[1].label));
        Self {
            kind,
            cases,
            outcome,
            notes,
        }
    }

    pub fn pass(&self) -> bool {
        self.outcome == Outcome::Pass
    }

    pub fn case(&self, label: &str) -> Option<&CaseSummary> {
        self.cases.iter().find(|c| c.label == label)
    }

    /// Plain-text summary.
    pub fn table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "study: {}", self.kind.name());
        for case in &self.cases {
            let _ = writeln!(out, "  {:<24} {}", case.label, case.status.name());
            for (name, value) in &case.metrics {
                let _ = writeln!(out, "      {name:<22} {value:.6e}");
            }
        }
        for note in &self.notes {
            let _ = writeln!(out, "  note: {note}");
        }
        let verdict = match self.outcome {
            Outcome::Pass => "PASS",
            Outcome::ThresholdFailure => "FAIL",
            Outcome::BlowUp => "BLOW-UP",
        };
        let _ = writeln!(out, "result: {verdict}");
        out
    }

    /// Long-format CSV: `label,status,metric,value`.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["label", "status", "metric", "value"])?;
        for case in &self.cases {
            if case.metrics.is_empty() {
                w.write_record([case.label.as_str(), case.status.name(), "", ""])?;
            }
            for (name, value) in &case.metrics {
                w.write_record([
                    case.label.as_str(),
                    case.status.name(),
                    name.as_str(),
                    &format!("{value:?}"),
                ])?;
            }
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
    }
}

/// Writes `summary.txt` and `summary.csv` into `dir`.
pub fn write_study(dir: &Path, study: &StudyResult) -> Result<()> {
    fs::create_dir_all(dir)?;
    let stem = study.kind.name();
    fs::write(dir.join(format!("{stem}_summary.txt")), study.table())?;
    fs::write(dir.join(format!("{stem}_summary.csv")), study.to_csv()?)?;
    Ok(())
}

/// Random initial data from the config, projected onto `trunc`.
/// Returns the state and the unit drift of the truncated `m` before
/// renormalisation.
pub fn initial_state(config: &SimConfig, trunc: &Truncation) -> Result<(StateVector, f64)> {
    let raw = random_state(
        config.grid,
        config.seed,
        config.decay_exponent,
        config.initial_amplitude,
    )?;
    galerkin_initial_data(&raw, trunc)
}

fn simulate_config(
    config: &SimConfig,
    s0: &StateVector,
    trunc: &Truncation,
    keep_states: bool,
) -> Result<Simulation> {
    simulate_with(
        s0,
        config.t_end,
        &config.stepper()?,
        &config.params,
        trunc,
        SimulateOptions {
            diagnostics_every: config.diagnostics_every,
            keep_states,
        },
    )
}

/// A single run and its artefacts.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub study: StudyResult,
    pub simulation: Simulation,
}

/// Simulates the config. With `output_dir` set (`Some`), writes
/// `diagnostics.csv`, one checkpoint per recorded state, and the summary.
pub fn run(config: &SimConfig, output_dir: Option<&Path>) -> Result<RunOutput> {
    let trunc = config.truncation()?;
    let (s0, pre_drift) = initial_state(config, &trunc)?;
    let sim = simulate_config(config, &s0, &trunc, output_dir.is_some())?;

    let rec = &sim.record;
    let div_v = rec.column_max("div_drift_v").unwrap_or(0.0);
    let div_b = rec.column_max("div_drift_B").unwrap_or(0.0);
    let unit = rec.column_max("unit_drift_m").unwrap_or(0.0);
    let status = |ok: bool| {
        if ok {
            CaseStatus::Pass
        } else {
            CaseStatus::Fail
        }
    };
    let mut cases = vec![
        CaseSummary::new("div_drift_v", status(div_v < DIV_THRESHOLD))
            .metric("max", div_v)
            .metric("threshold", DIV_THRESHOLD),
        CaseSummary::new("div_drift_B", status(div_b < DIV_THRESHOLD))
            .metric("max", div_b)
            .metric("threshold", DIV_THRESHOLD),
        CaseSummary::new("unit_drift_m", status(unit < UNIT_DRIFT_THRESHOLD))
            .metric("max", unit)
            .metric("threshold", UNIT_DRIFT_THRESHOLD)
            .metric("initial_truncation_drift", pre_drift),
    ];
    let last = rec.rows().last().expect("initial row is always recorded");
    let mut final_case = CaseSummary::new("final", CaseStatus::Info)
        .metric("time", sim.final_state.time)
        .metric("steps", sim.steps as f64)
        .metric("dt", sim.dt)
        .metric("l2_v", last.l2_v)
        .metric("l2_B", last.l2_b)
        .metric("h1_m", last.h1_m)
        .metric("J", last.j)
        .metric("E", last.e);
    let mut notes = Vec::new();
    let outcome = if let Some(b) = &sim.blow_up {
        final_case = final_case.metric("t_star_observed", b.last_valid_time);
        notes.push(format!(
            "blow-up at t = {}: {}; last valid state at t = {}",
            b.time, b.reason, b.last_valid_time
        ));
        Outcome::BlowUp
    } else if cases.iter().all(|c| c.status == CaseStatus::Pass) {
        Outcome::Pass
    } else {
        Outcome::ThresholdFailure
    };
    cases.push(final_case);
    let study = StudyResult::new(StudyKind::Run, cases, outcome, notes);

    if let Some(dir) = output_dir {
        fs::create_dir_all(dir)?;
        let file = fs::File::create(dir.join("diagnostics.csv"))?;
        sim.record.write_csv(std::io::BufWriter::new(file))?;
        for (step, state) in sim.trajectory.states() {
            checkpoint::write(&checkpoint::path_for_step(dir, *step), state)?;
        }
        fs::write(dir.join("config.toml"), config.emit())?;
        write_study(dir, &study)?;
    }
    Ok(RunOutput {
        study,
        simulation: sim,
    })
}

/// Runs every truncation in `k_list` from the same initial data (projected
/// onto the smallest truncation) and compares consecutive final states:
/// `d_j = ‖u(k_{j+1}) - u(k_j)‖_{L²}` at `t_end`.
pub fn convergence_study(config: &SimConfig, k_list: &[f64]) -> Result<StudyResult> {
    if k_list.len() < 2 {
        return Err(Error::Input("need ≥ 2 truncations".into()));
    }
    if k_list.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Input(
            "truncations must be strictly increasing".into(),
        ));
    }
    let truncs: Vec<Truncation> = k_list
        .iter()
        .map(|&k| Truncation::new(&config.grid, k))
        .collect::<Result<_>>()?;
    let (s0, _) = initial_state(config, &truncs[0])?;

    let mut finals = Vec::with_capacity(truncs.len());
    let mut cases = Vec::new();
    let mut notes = Vec::new();
    let mut blown = false;
    for (k, trunc) in k_list.iter().zip(&truncs) {
        let sim = simulate_config(config, &s0, trunc, false)?;
        if let Some(b) = &sim.blow_up {
            notes.push(format!("k = {k}: blow-up at t = {} ({})", b.time, b.reason));
            blown = true;
        }
        finals.push(sim.final_state);
    }
    let mut d = Vec::new();
    for j in 0..finals.len() - 1 {
        let (a, b) = (&finals[j], &finals[j + 1]);
        let dj = (a.v.sub(&b.v).inner(&a.v.sub(&b.v))
            + a.b.sub(&b.b).inner(&a.b.sub(&b.b))
            + a.m.sub(&b.m).inner(&a.m.sub(&b.m)))
        .sqrt();
        d.push(dj);
        cases.push(
            CaseSummary::new(format!("d_{j:02}"), CaseStatus::Info)
                .metric("k_coarse", k_list[j])
                .metric("k_fine", k_list[j + 1])
                .metric("difference", dj),
        );
    }
    let decreasing = d.windows(2).all(|w| w[1] < w[0]);
    let ratio = d[d.len() - 1] / d[0];
    let status = if blown {
        CaseStatus::Inconclusive
    } else if decreasing && ratio < CONVERGENCE_LAST_OVER_FIRST {
        CaseStatus::Pass
    } else {
        CaseStatus::Fail
    };
    cases.push(
        CaseSummary::new("decay", status)
            .metric("strictly_decreasing", if decreasing { 1.0 } else { 0.0 })
            .metric("last_over_first", ratio)
            .metric("threshold", CONVERGENCE_LAST_OVER_FIRST),
    );
    let outcome = match status {
        CaseStatus::Pass => Outcome::Pass,
        CaseStatus::Inconclusive => Outcome::BlowUp,
        _ => Outcome::ThresholdFailure,
    };
    Ok(StudyResult::new(
        StudyKind::Convergence,
        cases,
        outcome,
        notes,
    ))
}

/// Twin runs: the reference initial data against the same data with `v`
/// scaled by `1 + δ`, one twin per δ.
pub fn stability_study(config: &SimConfig, deltas: &[f64]) -> Result<StudyResult> {
    if deltas.is_empty() {
        return Err(Error::Input("need at least one perturbation size".into()));
    }
    if let Some(d) = deltas.iter().find(|d| !(d.is_finite() && **d >= 0.0)) {
        return Err(Error::Input(format!(
            "perturbation sizes must be nonnegative, got {d}"
        )));
    }
    let trunc = config.truncation()?;
    let (s0, _) = initial_state(config, &trunc)?;
    let reference = simulate_config(config, &s0, &trunc, true)?;

    let mut cases = Vec::new();
    let mut notes = Vec::new();
    let mut ratios = Vec::new();
    for &delta in deltas {
        let label = format!("delta_{delta:e}");
        let mut twin0 = s0.clone();
        // m is untouched, hence still unit length.
        twin0.v = twin0.v.scaled(1.0 + delta);
        let twin = simulate_config(config, &twin0, &trunc, true)?;
        if reference.blow_up.is_some() || twin.blow_up.is_some() {
            notes.push(format!("{label}: blow-up in a twin run"));
            cases.push(CaseSummary::new(label, CaseStatus::Inconclusive).metric("delta", delta));
            continue;
        }
        let StabilityMetric {
            sup_diff,
            initial_diff,
            ratio,
            degenerate,
        } = stability_metric(&reference.trajectory, &twin.trajectory)?;
        let status = if ratio.is_finite() {
            CaseStatus::Pass
        } else {
            CaseStatus::Fail
        };
        if !degenerate {
            ratios.push(ratio);
        }
        cases.push(
            CaseSummary::new(label, status)
                .metric("delta", delta)
                .metric("initial_diff", initial_diff)
                .metric("sup_diff", sup_diff)
                .metric("ratio", ratio)
                .metric("degenerate", if degenerate { 1.0 } else { 0.0 }),
        );
    }
    let spread = if ratios.is_empty() {
        1.0
    } else {
        let max = ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
        max / min
    };
    let spread_ok = spread.is_finite() && spread < STABILITY_SPREAD;
    cases.push(
        CaseSummary::new(
            "spread",
            if spread_ok {
                CaseStatus::Pass
            } else {
                CaseStatus::Fail
            },
        )
        .metric("max_over_min", spread)
        .metric("threshold", STABILITY_SPREAD),
    );
    let outcome = if cases.iter().any(|c| c.status == CaseStatus::Fail) {
        Outcome::ThresholdFailure
    } else if cases.iter().any(|c| c.status == CaseStatus::Inconclusive) && ratios.is_empty() {
        Outcome::BlowUp
    } else {
        Outcome::Pass
    };
    Ok(StudyResult::new(
        StudyKind::Stability,
        cases,
        outcome,
        notes,
    ))
}

/// Identity suite on an `n³` grid.
pub fn identity_command(
    n: usize,
    seed: u64,
    zero: bool,
    mis_signed: bool,
) -> Result<(IdentityReport, StudyResult)> {
    let grid = Grid::cube(n)?;
    let report = identity_suite_with(
        grid,
        IdentityOptions {
            inputs: if zero {
                IdentityInputs::Zero
            } else {
                IdentityInputs::Random { seed }
            },
            threshold: IDENTITY_THRESHOLD,
            mis_signed_curl_cross: mis_signed,
        },
    );
    let cases = report
        .rows
        .iter()
        .map(|r| {
            CaseSummary::new(
                r.name,
                if r.pass() {
                    CaseStatus::Pass
                } else {
                    CaseStatus::Fail
                },
            )
            .metric("residual", r.residual)
            .metric("threshold", r.threshold)
        })
        .collect();
    let outcome = if report.pass() {
        Outcome::Pass
    } else {
        Outcome::ThresholdFailure
    };
    Ok((
        report,
        StudyResult::new(StudyKind::Identities, cases, outcome, Vec::new()),
    ))
}
