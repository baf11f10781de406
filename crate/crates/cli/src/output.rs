//! Deterministic CSV and JSON emitters.
//!
//! CSV: RFC-4180-style with LF line endings, ASCII headers carrying unit
//! suffixes, '.' decimal separator, and shortest-round-trip float
//! formatting (parsing a written value recovers the exact bits). JSON
//! summaries have a fixed key order from the struct definitions.

use std::fmt::Write as _;
use std::path::Path;

use detopt_core::detection::DetectionBudget;
use detopt_core::fields::HBAR;
use serde::Serialize;

use crate::CliError;

/// One CSV cell: either a number (shortest round-trip) or a plain token.
#[derive(Debug, Clone)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
}

impl Cell {
    fn write(&self, out: &mut String) {
        match self {
            Cell::Num(v) => {
                let _ = write!(out, "{v}");
            }
            Cell::Int(v) => {
                let _ = write!(out, "{v}");
            }
            Cell::Text(t) => {
                debug_assert!(!t.contains([',', '"', '\n']), "cell needs quoting: {t}");
                out.push_str(t);
            }
        }
    }
}

/// Renders a table with the given ASCII header names.
pub fn render_table(headers: &[&str], rows: &[Vec<Cell>]) -> String {
    debug_assert!(headers.iter().all(|h| h.is_ascii()));
    let mut out = String::new();
    out.push_str(&headers.join(","));
    out.push('\n');
    for row in rows {
        debug_assert_eq!(row.len(), headers.len());
        for (i, cell) in row.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            cell.write(&mut out);
        }
        out.push('\n');
    }
    out
}

pub fn write_table(path: &Path, headers: &[&str], rows: &[Vec<Cell>]) -> Result<(), CliError> {
    write_text(path, &render_table(headers, rows))
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text)
        .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))
}

/// Budget block of the summary JSON. Sign conventions are internal, so the
/// sensitivity is reported as a magnitude.
#[derive(Debug, Serialize)]
pub struct BudgetSummary {
    pub eta: f64,
    #[serde(rename = "S_imp_m2_per_Hz")]
    pub s_imp_m2_per_hz: f64,
    #[serde(rename = "S_ideal_m2_per_Hz")]
    pub s_ideal_m2_per_hz: f64,
    #[serde(rename = "S_ba_N2_per_Hz")]
    pub s_ba_n2_per_hz: f64,
    pub sensitivity_abs_per_s_per_m: f64,
    pub noise_per_s: f64,
    pub information_per_s_per_m2: f64,
    pub heisenberg_product_over_hbar2: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta_with_quantum_efficiency: Option<f64>,
}

impl BudgetSummary {
    pub fn new(b: &DetectionBudget, quantum_efficiency: Option<f64>) -> Self {
        Self {
            eta: b.efficiency,
            s_imp_m2_per_hz: b.imprecision,
            s_ideal_m2_per_hz: b.ideal_imprecision,
            s_ba_n2_per_hz: b.back_action,
            sensitivity_abs_per_s_per_m: b.sensitivity.abs(),
            noise_per_s: b.noise,
            information_per_s_per_m2: b.information,
            heisenberg_product_over_hbar2: b.heisenberg_product() / (HBAR * HBAR),
            eta_with_quantum_efficiency: quantum_efficiency.map(|q| q * b.efficiency),
        }
    }
}

/// Top-level summary document; `extra` carries scenario-specific values.
#[derive(Debug, Serialize)]
pub struct Summary<C: Serialize, E: Serialize> {
    pub tool_version: &'static str,
    pub scenario: &'static str,
    pub config: C,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub budget: Option<BudgetSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dde_integral_residual: Option<f64>,
    pub extra: E,
}

pub fn write_summary<C: Serialize, E: Serialize>(
    path: &Path,
    summary: &Summary<C, E>,
) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(summary)
        .map_err(|e| CliError::Runtime(format!("cannot serialize summary: {e}")))?;
    text.push('\n');
    write_text(path, &text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip_bitwise() {
        let values = [
            std::f64::consts::FRAC_2_PI,
            1.0 / 3.0,
            2.5e-34,
            -1.7976931348623157e308,
            5e-324,
        ];
        let rows: Vec<Vec<Cell>> = values.iter().map(|&v| vec![Cell::Num(v)]).collect();
        let text = render_table(&["v"], &rows);
        for (line, &v) in text.lines().skip(1).zip(&values) {
            let parsed: f64 = line.parse().unwrap();
            assert_eq!(parsed.to_bits(), v.to_bits());
        }
    }

    #[test]
    fn empty_rows_emit_header_only() {
        let text = render_table(&["a", "b"], &[]);
        assert_eq!(text, "a,b\n");
    }
}
