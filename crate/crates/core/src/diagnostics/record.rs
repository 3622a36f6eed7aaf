use std::io::Write;

use crate::dynamics::{divergence_drift, rhs, Truncation};
use crate::error::Result;
use crate::fields::{PhysicalParams, StateVector};

use super::norms::{energy_e, energy_j, sobolev_norm, unit_drift};

/// CSV header, in column order.
pub const COLUMNS: [&str; 18] = [
    "time",
    "l2_v",
    "h1_v",
    "h2_v",
    "l2_B",
    "h1_B",
    "h2_B",
    "h1_m",
    "h2_m",
    "h3_m",
    "dt_norm_v",
    "dt_norm_B",
    "dt_norm_m",
    "J",
    "E",
    "div_drift_v",
    "div_drift_B",
    "unit_drift_m",
];

/// Diagnostics at one recorded time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticsRow {
    pub time: f64,
    pub l2_v: f64,
    pub h1_v: f64,
    pub h2_v: f64,
    pub l2_b: f64,
    pub h1_b: f64,
    pub h2_b: f64,
    pub h1_m: f64,
    pub h2_m: f64,
    pub h3_m: f64,
    /// `‖∂t v‖₂`
    pub dt_norm_v: f64,
    /// `‖∂t B‖₂`
    pub dt_norm_b: f64,
    /// `‖∂t m‖_{H¹}`
    pub dt_norm_m: f64,
    pub j: f64,
    pub e: f64,
    pub div_drift_v: f64,
    pub div_drift_b: f64,
    pub unit_drift_m: f64,
}

impl DiagnosticsRow {
    /// Time derivatives come from the right-hand sides at the same instant.
    pub fn measure(s: &StateVector, p: &PhysicalParams, trunc: &Truncation) -> Result<Self> {
        let sdot = rhs(s, p, trunc)?;
        Ok(Self {
            time: s.time,
            l2_v: sobolev_norm(&s.v, 0),
            h1_v: sobolev_norm(&s.v, 1),
            h2_v: sobolev_norm(&s.v, 2),
            l2_b: sobolev_norm(&s.b, 0),
            h1_b: sobolev_norm(&s.b, 1),
            h2_b: sobolev_norm(&s.b, 2),
            h1_m: sobolev_norm(&s.m, 1),
            h2_m: sobolev_norm(&s.m, 2),
            h3_m: sobolev_norm(&s.m, 3),
            dt_norm_v: sobolev_norm(&sdot.v, 0),
            dt_norm_b: sobolev_norm(&sdot.b, 0),
            dt_norm_m: sobolev_norm(&sdot.m, 1),
            j: energy_j(s, &sdot),
            e: energy_e(s, &sdot),
            div_drift_v: divergence_drift(&s.v),
            div_drift_b: divergence_drift(&s.b),
            unit_drift_m: unit_drift(&s.m),
        })
    }

    pub fn values(&self) -> [f64; 18] {
        [
            self.time,
            self.l2_v,
            self.h1_v,
            self.h2_v,
            self.l2_b,
            self.h1_b,
            self.h2_b,
            self.h1_m,
            self.h2_m,
            self.h3_m,
            self.dt_norm_v,
            self.dt_norm_b,
            self.dt_norm_m,
            self.j,
            self.e,
            self.div_drift_v,
            self.div_drift_b,
            self.unit_drift_m,
        ]
    }

    pub fn is_finite(&self) -> bool {
        self.values().iter().all(|x| x.is_finite())
    }
}

/// Append-only time series of [`DiagnosticsRow`]s.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DiagnosticsRecord {
    rows: Vec<DiagnosticsRow>,
    blow_up_index: Option<usize>,
}

impl DiagnosticsRecord {
    pub fn new() -> Self {
        Self::default()
    }

    /// # Panics
    /// If `row.time` does not exceed the previous recorded time.
    pub fn push(&mut self, row: DiagnosticsRow) {
        if let Some(last) = self.rows.last() {
            assert!(
                row.time > last.time,
                "diagnostics times must increase ({} after {})",
                row.time,
                last.time
            );
        }
        self.rows.push(row);
    }

    /// Marks that the run broke down after the last recorded row.
    pub fn flag_blow_up(&mut self) {
        self.blow_up_index = Some(self.rows.len());
    }

    pub fn blow_up_index(&self) -> Option<usize> {
        self.blow_up_index
    }

    pub fn rows(&self) -> &[DiagnosticsRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.time).collect()
    }

    /// Largest value of one column, by CSV name.
    pub fn column_max(&self, name: &str) -> Option<f64> {
        let col = COLUMNS.iter().position(|c| *c == name)?;
        Some(
            self.rows
                .iter()
                .map(|r| r.values()[col])
                .fold(f64::NEG_INFINITY, f64::max),
        )
    }

    /// RFC 4180 CSV; floats in shortest round-trip form.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(COLUMNS)?;
        for row in &self.rows {
            w.write_record(row.values().iter().map(|x| format!("{x:?}")))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is ASCII"))
    }
}
