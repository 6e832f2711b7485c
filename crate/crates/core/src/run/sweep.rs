//! One-parameter sweeps with finite-difference sensitivities.

use serde::Serialize;
use toml::Table;

use super::config::{set_numeric, RunConfig};
use super::report::{run, ReportDocument};
use super::ConfigError;
use crate::Result;

/// Headline figures of one sweep point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub value: f64,
    pub p_rf_cache: f64,
    pub p_rd_cache: f64,
    pub p_wf_cache: f64,
    pub p_total_per_t: f64,
    /// `d p_total_per_t / d value`; central differences inside the range,
    /// one-sided at the ends, absent for a single point.
    pub slope_p_total_per_t: Option<f64>,
    #[serde(skip)]
    pub report: ReportDocument,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepTable {
    pub parameter: String,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            self.parameter.as_str(),
            "p_rf_cache",
            "p_rd_cache",
            "p_wf_cache",
            "p_total_per_t",
            "slope_p_total_per_t",
        ])
        .expect("in-memory csv");
        for r in &self.rows {
            w.write_record([
                r.value.to_string(),
                format!("{:e}", r.p_rf_cache),
                format!("{:e}", r.p_rd_cache),
                format!("{:e}", r.p_wf_cache),
                format!("{:e}", r.p_total_per_t),
                r.slope_p_total_per_t
                    .map_or(String::new(), |s| format!("{s:e}")),
            ])
            .expect("in-memory csv");
        }
        String::from_utf8(w.into_inner().expect("in-memory csv")).expect("csv is utf-8")
    }
}

/// Runs `base` once per value of the numeric field at `path`.
pub fn sweep(base: &RunConfig, path: &str, values: &[f64]) -> Result<SweepTable> {
    if values.is_empty() {
        return Err(ConfigError::Invalid {
            path: path.to_string(),
            reason: "sweep needs at least one value".into(),
        }
        .into());
    }
    let table: Table = base
        .to_toml_string()
        .parse()
        .map_err(|e: toml::de::Error| ConfigError::Parse(e.to_string()))?;
    let mut rows = Vec::with_capacity(values.len());
    for &v in values {
        let mut t = table.clone();
        set_numeric(&mut t, path, v)?;
        let mut config = RunConfig::from_table(t)?;
        config.base_dir = base.base_dir.clone();
        let report = run(&config)?;
        let n = &report.nominal.report;
        rows.push(SweepRow {
            value: v,
            p_rf_cache: n.p_rf_cache,
            p_rd_cache: n.p_rd_cache,
            p_wf_cache: n.p_wf_cache,
            p_total_per_t: n.p_total_per_t,
            slope_p_total_per_t: None,
            report,
        });
    }
    if rows.len() > 1 {
        let slope =
            |a: &SweepRow, b: &SweepRow| (b.p_total_per_t - a.p_total_per_t) / (b.value - a.value);
        let last = rows.len() - 1;
        let slopes: Vec<f64> = (0..rows.len())
            .map(|i| match i {
                0 => slope(&rows[0], &rows[1]),
                i if i == last => slope(&rows[last - 1], &rows[last]),
                i => slope(&rows[i - 1], &rows[i + 1]),
            })
            .collect();
        for (r, s) in rows.iter_mut().zip(slopes) {
            r.slope_p_total_per_t = s.is_finite().then_some(s);
        }
    }
    Ok(SweepTable {
        parameter: path.to_string(),
        rows,
    })
}
