//! Run configuration: a TOML document, usually written as flat dotted keys
//! (`grid.n = 32`, `params.mu = 0.5`, `t_end = 2.0`).

use std::path::PathBuf;

use serde::Deserialize;

use crate::dynamics::{default_dt, Scheme, TimeStepper, Truncation};
use crate::error::{Error, Result};
use crate::fields::{Model, PhysicalParams};
use crate::grid::Grid;

/// Fallback for `output_dir`.
pub const OUTPUT_DIR_ENV: &str = "FMHD_OUTPUT_DIR";
pub const DEFAULT_OUTPUT_DIR: &str = "fmhd-output";
/// Small enough that truncating the renormalised `m` at t = 0 keeps the
/// unit drift near roundoff.
pub const DEFAULT_AMPLITUDE: f64 = 0.003;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DtChoice {
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TruncationChoice {
    Full,
    KMax(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub grid: Grid,
    pub params: PhysicalParams,
    pub scheme: Scheme,
    pub dt: DtChoice,
    /// Skip the `rk4_explicit` stability check.
    pub allow_unstable: bool,
    pub truncation: TruncationChoice,
    pub t_end: f64,
    pub seed: u64,
    pub initial_amplitude: f64,
    pub decay_exponent: f64,
    pub diagnostics_every: usize,
    pub output_dir: Option<PathBuf>,
}

impl Default for SimConfig {
    fn default() -> Self {
        parse_config("").expect("defaults are valid")
    }
}

impl SimConfig {
    pub fn truncation(&self) -> Result<Truncation> {
        match self.truncation {
            TruncationChoice::Full => Ok(Truncation::full(&self.grid)),
            TruncationChoice::KMax(k) => Truncation::new(&self.grid, k),
        }
    }

    pub fn dt(&self) -> f64 {
        match self.dt {
            DtChoice::Auto => default_dt(&self.grid, &self.params),
            DtChoice::Fixed(dt) => dt,
        }
    }

    pub fn stepper(&self) -> Result<TimeStepper> {
        if self.allow_unstable {
            TimeStepper::unchecked(self.scheme, self.dt())
        } else {
            TimeStepper::new(
                self.scheme,
                self.dt(),
                &self.grid,
                &self.params,
                &self.truncation()?,
            )
        }
    }

    /// `output_dir`, else `$FMHD_OUTPUT_DIR`, else `fmhd-output`.
    pub fn resolved_output_dir(&self) -> PathBuf {
        self.output_dir
            .clone()
            .or_else(|| std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR))
    }

    /// Flat dotted-key text that [`parse_config`] reads back to an equal
    /// config.
    pub fn emit(&self) -> String {
        let mut out = String::new();
        let mut line = |k: &str, v: String| {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(&v);
            out.push('\n');
        };
        let float = |x: f64| format!("{x:?}");
        let string = |s: &str| toml::Value::String(s.to_owned()).to_string();
        line("grid.n", self.grid.n().to_string());
        line("grid.box_length", float(self.grid.box_length()));
        line("grid.dealias_fraction", float(self.grid.dealias_fraction()));
        line("params.mu", float(self.params.mu));
        line("params.eta", float(self.params.eta));
        line("params.gamma", float(self.params.gamma));
        line("params.chi", float(self.params.chi));
        line("params.model", string(self.params.model.name()));
        line("stepper.scheme", string(self.scheme.name()));
        line(
            "stepper.dt",
            match self.dt {
                DtChoice::Auto => string("auto"),
                DtChoice::Fixed(dt) => float(dt),
            },
        );
        line("stepper.allow_unstable", self.allow_unstable.to_string());
        line(
            "truncation",
            match self.truncation {
                TruncationChoice::Full => string("full"),
                TruncationChoice::KMax(k) => float(k),
            },
        );
        line("t_end", float(self.t_end));
        line("seed", self.seed.to_string());
        line("initial_amplitude", float(self.initial_amplitude));
        line("decay_exponent", float(self.decay_exponent));
        line("diagnostics_every", self.diagnostics_every.to_string());
        if let Some(dir) = &self.output_dir {
            line("output_dir", string(&dir.to_string_lossy()));
        }
        out
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default)]
    grid: RawGrid,
    #[serde(default)]
    params: RawParams,
    #[serde(default)]
    stepper: RawStepper,
    truncation: Option<NumberOrName>,
    t_end: Option<f64>,
    seed: Option<u64>,
    initial_amplitude: Option<f64>,
    decay_exponent: Option<f64>,
    diagnostics_every: Option<i64>,
    output_dir: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    n: Option<i64>,
    box_length: Option<f64>,
    dealias_fraction: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParams {
    mu: Option<f64>,
    eta: Option<f64>,
    gamma: Option<f64>,
    chi: Option<f64>,
    model: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStepper {
    scheme: Option<String>,
    dt: Option<NumberOrName>,
    allow_unstable: Option<bool>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum NumberOrName {
    Number(f64),
    Name(String),
}

/// Parses and validates a config document. Missing keys take their
/// defaults.
pub fn parse_config(text: &str) -> Result<SimConfig> {
    parse_config_with::<&str>(text, &[])
}

/// Like [`parse_config`], with `key=value` overrides applied on top of the
/// document. Values are read as TOML scalars, falling back to bare strings.
pub fn parse_config_with<S: AsRef<str>>(text: &str, overrides: &[S]) -> Result<SimConfig> {
    let mut table: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| Error::Config(e.message().trim().to_owned()))?;
    for o in overrides {
        apply_override(&mut table, o.as_ref())?;
    }
    let raw: RawConfig =
        serde_path_to_error::deserialize(toml::Value::Table(table)).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            let msg = inner.message().trim().to_owned();
            if path == "." {
                Error::Config(msg)
            } else {
                Error::Config(format!("{path}: {msg}"))
            }
        })?;
    validate(raw)
}

fn apply_override(table: &mut toml::Table, spec: &str) -> Result<()> {
    let (key, value) = spec
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override `{spec}` is not of the form key=value")))?;
    let key = key.trim();
    let value = value.trim();
    if key.is_empty() {
        return Err(Error::Config(format!("override `{spec}` has an empty key")));
    }
    let parsed = format!("v = {value}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(value.to_owned()));
    let mut parts: Vec<&str> = key.split('.').collect();
    let last = parts.pop().expect("split yields at least one part");
    let mut cur = table;
    for part in parts {
        let entry = cur
            .entry(part.to_owned())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| Error::Config(format!("{key}: `{part}` is not a section")))?;
    }
    cur.insert(last.to_owned(), parsed);
    Ok(())
}

fn invalid(key: &str, msg: impl std::fmt::Display) -> Error {
    Error::Config(format!("{key}: {msg}"))
}

fn validate(raw: RawConfig) -> Result<SimConfig> {
    let n = raw.grid.n.unwrap_or(16);
    if n < 4 {
        return Err(invalid("grid.n", format!("must be at least 4, got {n}")));
    }
    let grid = Grid::new(
        n as usize,
        raw.grid.box_length.unwrap_or(2.0 * std::f64::consts::PI),
        raw.grid.dealias_fraction.unwrap_or(2.0 / 3.0),
    )
    .map_err(|e| invalid("grid", e))?;

    let model = match raw.params.model.as_deref() {
        None => Model::Full,
        Some(s) => Model::parse(s)
            .ok_or_else(|| invalid("params.model", format!("unknown model `{s}`")))?,
    };
    let params = PhysicalParams {
        mu: raw.params.mu.unwrap_or(1.0),
        eta: raw.params.eta.unwrap_or(1.0),
        gamma: raw.params.gamma.unwrap_or(1.0),
        chi: raw.params.chi.unwrap_or(1.0),
        model,
    };
    params.validate().map_err(|e| match e {
        Error::InvalidParameter(msg) => Error::Config(msg),
        other => other,
    })?;

    let scheme = match raw.stepper.scheme.as_deref() {
        None => Scheme::EtdRk4,
        Some(s) => Scheme::parse(s)
            .ok_or_else(|| invalid("stepper.scheme", format!("unknown scheme `{s}`")))?,
    };
    let dt = match raw.stepper.dt {
        None => DtChoice::Auto,
        Some(NumberOrName::Name(s)) if s == "auto" => DtChoice::Auto,
        Some(NumberOrName::Name(s)) => {
            return Err(invalid(
                "stepper.dt",
                format!("expected \"auto\" or a number, got `{s}`"),
            ))
        }
        Some(NumberOrName::Number(x)) if x.is_finite() && x > 0.0 => DtChoice::Fixed(x),
        Some(NumberOrName::Number(x)) => {
            return Err(invalid("stepper.dt", format!("must be positive, got {x}")))
        }
    };
    let truncation = match raw.truncation {
        None => TruncationChoice::Full,
        Some(NumberOrName::Name(s)) if s == "full" => TruncationChoice::Full,
        Some(NumberOrName::Name(s)) => {
            return Err(invalid(
                "truncation",
                format!("expected \"full\" or a number, got `{s}`"),
            ))
        }
        Some(NumberOrName::Number(k)) => {
            Truncation::new(&grid, k).map_err(|e| invalid("truncation", e))?;
            TruncationChoice::KMax(k)
        }
    };

    let t_end = raw.t_end.unwrap_or(1.0);
    if !(t_end.is_finite() && t_end >= 0.0) {
        return Err(invalid(
            "t_end",
            format!("must be nonnegative, got {t_end}"),
        ));
    }
    let initial_amplitude = raw.initial_amplitude.unwrap_or(DEFAULT_AMPLITUDE);
    if !(initial_amplitude.is_finite() && initial_amplitude >= 0.0) {
        return Err(invalid(
            "initial_amplitude",
            format!("must be nonnegative, got {initial_amplitude}"),
        ));
    }
    let decay_exponent = raw.decay_exponent.unwrap_or(6.0);
    if !(decay_exponent.is_finite() && decay_exponent >= 4.0) {
        return Err(invalid(
            "decay_exponent",
            format!("must be at least 4, got {decay_exponent}"),
        ));
    }
    let every = raw.diagnostics_every.unwrap_or(10);
    if every < 1 {
        return Err(invalid(
            "diagnostics_every",
            format!("must be at least 1, got {every}"),
        ));
    }

    let config = SimConfig {
        grid,
        params,
        scheme,
        dt,
        allow_unstable: raw.stepper.allow_unstable.unwrap_or(false),
        truncation,
        t_end,
        seed: raw.seed.unwrap_or(0),
        initial_amplitude,
        decay_exponent,
        diagnostics_every: every as usize,
        output_dir: raw.output_dir.map(PathBuf::from),
    };
    config.stepper().map_err(|e| invalid("stepper.dt", e))?;
    Ok(config)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides_nest_and_fall_back_to_strings() {
        let c = parse_config_with(
            "",
            &["grid.n=8", "stepper.scheme=imex_euler", "truncation = 2"],
        )
        .unwrap();
        assert_eq!(c.grid.n(), 8);
        assert_eq!(c.scheme, Scheme::ImexEuler);
        assert_eq!(c.truncation, TruncationChoice::KMax(2.0));
        assert!(parse_config_with("", &["novalue"]).is_err());
        assert!(parse_config_with("", &["t_end.x=1"]).is_err());
    }

    #[test]
    fn dt_accepts_integers_and_auto() {
        let c = parse_config("stepper.dt = 1").unwrap();
        assert_eq!(c.dt, DtChoice::Fixed(1.0));
        let c = parse_config("[stepper]\ndt = \"auto\"").unwrap();
        assert_eq!(c.dt, DtChoice::Auto);
        assert!(parse_config("stepper.dt = \"fast\"").is_err());
        assert!(parse_config("stepper.dt = -0.1").is_err());
    }
}
