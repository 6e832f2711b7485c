//! Analytic versus Monte Carlo comparison for a run configuration.

use super::config::RunConfig;
use super::report::trace_records;
use crate::oracle::{estimate_all, OracleConfig, OracleInput, OracleReport};
use crate::Result;

/// Replays the configured trace through the oracle. Records are held in
/// memory, so this is meant for desk-scale traces.
pub fn validate(config: &RunConfig, oracle: &OracleConfig) -> Result<OracleReport> {
    config.validate()?;
    oracle.validate()?;
    let records = trace_records(config)?.collect::<Result<Vec<_>, _>>()?;
    let device = config.device()?;
    let pv = config.pv.enabled.then(|| config.pv_model()).transpose()?;
    let start_ns = config
        .run
        .start_ns
        .or(records.first().map(|r| r.timestamp_ns))
        .unwrap_or(0);
    let end_ns = config
        .run
        .end_ns
        .or(records.last().map(|r| r.timestamp_ns))
        .unwrap_or(start_ns)
        .max(start_ns);
    let input = OracleInput {
        geometry: config.geometry()?,
        vulnerable: config.run.read_disturb_vulnerable,
        device: &device,
        pv: pv.as_ref(),
        records: &records,
        start_ns,
        end_ns,
    };
    estimate_all(&input, oracle)
}

/// Fixed-width pass/fail table.
pub fn format_table(report: &OracleReport) -> String {
    let mut s = format!(
        "{:<6} {:>13} {:>13} {:>27} {:>6}\n",
        "class", "analytic", "empirical", "95% interval", "result"
    );
    for c in &report.classes {
        s.push_str(&format!(
            "{:<6} {:>13.6e} {:>13.6e} [{:>11.4e}, {:>11.4e}] {:>6}\n",
            c.class.label(),
            c.analytic,
            c.estimate,
            c.ci95.0,
            c.ci95.1,
            if c.pass { "PASS" } else { "FAIL" }
        ));
    }
    for w in &report.warnings {
        s.push_str(&format!("warning: {w}\n"));
    }
    s
}
