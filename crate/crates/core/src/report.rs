//! Stable serialization of experiment reports.
//!
//! Reports serialize to TOML (structured) and CSV. Floats use shortest
//! round-trip formatting in both, so parsing a structured report
//! reproduces the values exactly. The CSV column order is frozen:
//! `epsilon,threshold,empirical_frequency,mc_halfwidth,bound,satisfied`.

use crate::empirics::DeviationReport;
use crate::error::{Error, Result};
use std::fmt::Write;

/// Frozen CSV header for deviation reports.
pub const DEVIATION_CSV_HEADER: &str =
    "epsilon,threshold,empirical_frequency,mc_halfwidth,bound,satisfied";

pub fn deviation_report_toml(report: &DeviationReport) -> Result<String> {
    toml::to_string(report).map_err(|e| Error::InvalidArgument(format!("serialize: {e}")))
}

pub fn deviation_report_from_toml(text: &str) -> Result<DeviationReport> {
    toml::from_str(text).map_err(|e| Error::InvalidArgument(format!("parse report: {e}")))
}

pub fn deviation_report_csv(report: &DeviationReport) -> String {
    let mut out = String::new();
    out.push_str(DEVIATION_CSV_HEADER);
    out.push('\n');
    for r in &report.rows {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            r.epsilon, r.threshold, r.empirical_frequency, r.mc_halfwidth, r.bound, r.satisfied
        )
        .expect("string write");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::empirics::{DeviationRow, Statistic};

    fn sample_report() -> DeviationReport {
        DeviationReport {
            spec_id: "two_state".into(),
            n: 1000,
            trials: 100,
            seed: 7,
            statistic: Statistic::SupNorm,
            stationary: true,
            correction: 0.0,
            delta_mc: 1e-3,
            rows: vec![DeviationRow {
                epsilon: 0.05,
                threshold: 0.1 / 3.0,
                empirical_frequency: 0.02,
                mc_halfwidth: 0.19498,
                bound: (-1.25f64).exp(),
                satisfied: true,
            }],
        }
    }

    #[test]
    fn toml_round_trip_is_exact() {
        let report = sample_report();
        let text = deviation_report_toml(&report).unwrap();
        let back = deviation_report_from_toml(&text).unwrap();
        assert_eq!(report, back);
    }

    #[test]
    fn csv_has_header_plus_one_line_per_row() {
        let report = sample_report();
        let csv = deviation_report_csv(&report);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 1 + report.rows.len());
        assert_eq!(lines[0], DEVIATION_CSV_HEADER);
    }
}
