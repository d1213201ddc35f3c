//! Per-event attribution tables: which event moved future uncertainty, by how
//! many bits, at which horizon.

use serde::{Deserialize, Serialize};
use zentropy_core::potential::{classify_event, Method};
use zentropy_core::{EventClass, ZEstimate};

use crate::format::{sig, Table};

pub const FILE_CSV: &str = "attribution.csv";
pub const FILE_JSON: &str = "attribution.json";

const HEADER: [&str; 9] = [
    "event",
    "description",
    "t0",
    "horizon",
    "z_bits",
    "class",
    "std_error",
    "method",
    "baseline",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributionRow {
    pub event: String,
    pub description: String,
    pub t0: u64,
    /// Evaluation time `T`.
    pub horizon: u64,
    pub z_bits: f64,
    pub class: EventClass,
    pub std_error: f64,
    pub method: Method,
    pub baseline: String,
}

impl AttributionRow {
    pub fn new(
        event: impl Into<String>,
        description: impl Into<String>,
        z: &ZEstimate,
        tol: f64,
    ) -> Self {
        Self {
            event: event.into(),
            description: description.into(),
            t0: z.horizon.t0(),
            horizon: z.horizon.t(),
            z_bits: z.value,
            class: classify_event(z, tol),
            std_error: z.std_error,
            method: z.method,
            baseline: z.baseline.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributionReport {
    pub config_hash: String,
    pub tolerance: f64,
    pub rows: Vec<AttributionRow>,
}

impl AttributionReport {
    pub fn csv_bytes(&self) -> Vec<u8> {
        let mut t = Table::new(&self.config_hash, &HEADER);
        for r in &self.rows {
            t.row([
                r.event.clone(),
                r.description.clone(),
                r.t0.to_string(),
                r.horizon.to_string(),
                sig(r.z_bits),
                r.class.to_string(),
                sig(r.std_error),
                r.method.to_string(),
                r.baseline.clone(),
            ]);
        }
        t.into_bytes()
    }
}

/// Report order: most beneficial first, ties by event id.
pub fn sort_rows(rows: &mut [AttributionRow]) {
    rows.sort_by(|a, b| {
        a.z_bits
            .total_cmp(&b.z_bits)
            .then_with(|| a.event.cmp(&b.event))
    });
}
