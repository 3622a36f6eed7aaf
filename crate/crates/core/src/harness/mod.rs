//! Configuration, experiment drivers and result persistence.

mod config;
mod studies;

pub use config::{
    parse_config, parse_config_with, DtChoice, SimConfig, TruncationChoice, DEFAULT_AMPLITUDE,
    DEFAULT_OUTPUT_DIR, OUTPUT_DIR_ENV,
};
pub use studies::{
    convergence_study, identity_command, initial_state, run, stability_study, write_study,
    CaseStatus, CaseSummary, Outcome, RunOutput, StudyKind, StudyResult, DIV_THRESHOLD,
    UNIT_DRIFT_THRESHOLD,
};
