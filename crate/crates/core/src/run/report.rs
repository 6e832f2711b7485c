//! The full pipeline: trace in, versioned report document out.

use log::info;
use serde::Serialize;
use sha2::{Digest, Sha256};

use super::config::{RetentionScenario, RunConfig};
use crate::cache::{AccessRecord, CacheModel, CacheTotals, ModelOptions};
use crate::engine::{
    per_read_block_error, per_unit_time_report, CacheExponents, PerReadError, ReliabilityReport,
};
use crate::logspace::prob_from_log_survival;
use crate::trace::{generate, open_trace, TraceError};
use crate::Result;

pub const REPORT_SCHEMA: &str = "stt-reliability/report";
pub const REPORT_VERSION: u32 = 1;

/// A number and its unit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Quantity {
    pub value: f64,
    pub unit: &'static str,
}

fn q(value: f64, unit: &'static str) -> Quantity {
    Quantity { value, unit }
}

const PROB: &str = "probability";
const FRACTION: &str = "fraction";

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BreakdownSection {
    pub retention: Quantity,
    pub read_disturb: Quantity,
    pub write_failure: Quantity,
}

/// Results of one path (nominal or process-variation).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResultSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_rf_cache: Option<Quantity>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_rf_cache_all_intervals: Option<Quantity>,
    pub p_rd_cache: Quantity,
    pub p_wf_cache: Quantity,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_rf_t: Option<Quantity>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_rf_t_all_intervals: Option<Quantity>,
    pub r_rd_t: Quantity,
    pub r_wf_t: Quantity,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_total_per_t: Option<Quantity>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_total_per_t_all_intervals: Option<Quantity>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub breakdown: Option<BreakdownSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub breakdown_all_intervals: Option<BreakdownSection>,
    /// `|(1 - p_total_per_t) - r_rf_t·r_rd_t·r_wf_t|`, relative.
    pub identity_residual: Quantity,
    /// Raw engine output, kept for programmatic consumers.
    #[serde(skip)]
    pub report: ReliabilityReport,
}

impl ResultSection {
    fn new(r: ReliabilityReport, scenario: RetentionScenario, per_t: &'static str) -> Self {
        let vul = scenario.vulnerable();
        let all = scenario.all();
        let bd = |b: crate::engine::Breakdown| BreakdownSection {
            retention: q(b.retention, FRACTION),
            read_disturb: q(b.read_disturb, FRACTION),
            write_failure: q(b.write_failure, FRACTION),
        };
        Self {
            p_rf_cache: vul.then(|| q(r.p_rf_cache, PROB)),
            p_rf_cache_all_intervals: all.then(|| q(r.p_rf_cache_all_intervals, PROB)),
            p_rd_cache: q(r.p_rd_cache, PROB),
            p_wf_cache: q(r.p_wf_cache, PROB),
            r_rf_t: vul.then(|| q(r.r_rf_t, per_t)),
            r_rf_t_all_intervals: all.then(|| q(r.r_rf_t_all_intervals, per_t)),
            r_rd_t: q(r.r_rd_t, per_t),
            r_wf_t: q(r.r_wf_t, per_t),
            p_total_per_t: vul.then(|| q(r.p_total_per_t, per_t)),
            p_total_per_t_all_intervals: all.then(|| q(r.p_total_per_t_all_intervals, per_t)),
            breakdown: vul.then(|| bd(r.breakdown)),
            breakdown_all_intervals: all.then(|| bd(r.breakdown_all_intervals)),
            identity_residual: q(r.identity_residual(), "relative"),
            report: r,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Metadata {
    pub seed: u64,
    pub config_sha256: String,
    pub trace: String,
    pub records: u64,
    pub t_exe: Quantity,
    pub report_unit: &'static str,
    pub retention_scenario: RetentionScenario,
    pub pv_enabled: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CellSection {
    pub retention_rate: Quantity,
    pub p_rd_cell: Quantity,
    pub p_wf_0to1: Quantity,
    pub p_wf_1to0: Quantity,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CounterSection {
    pub vulnerable_idle_time: Quantity,
    pub all_idle_time: Quantity,
    pub ones_read: Quantity,
    pub reads: Quantity,
    pub writes: Quantity,
    pub transitions_0to1: Quantity,
    pub transitions_1to0: Quantity,
}

impl CounterSection {
    fn new(t: &CacheTotals, unit: f64, label: &'static str) -> Self {
        let time = |ns: u128| q(ns as f64 * 1e-9 / unit, label);
        let n = |c: u128| q(c as f64, "count");
        Self {
            vulnerable_idle_time: time(t.vulnerable_idle_ns),
            all_idle_time: time(t.all_idle_ns),
            ones_read: n(t.ones_read),
            reads: n(t.reads),
            writes: n(t.writes),
            transitions_0to1: n(t.trans_0to1),
            transitions_1to0: n(t.trans_1to0),
        }
    }
}

/// One row of the optional per-read log.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PerReadRow {
    pub timestamp_ns: u64,
    pub address: u64,
    pub set: usize,
    pub way: usize,
    #[serde(flatten)]
    pub error: PerReadError,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportDocument {
    pub schema: &'static str,
    pub version: u32,
    pub metadata: Metadata,
    pub warnings: Vec<String>,
    pub cell: CellSection,
    pub counters: CounterSection,
    pub nominal: ResultSection,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pv: Option<ResultSection>,
    #[serde(skip)]
    pub per_read: Vec<PerReadRow>,
}

impl ReportDocument {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialises");
        s.push('\n');
        s
    }
}

/// SHA-256 of the canonical serialisation of a config.
pub fn config_hash(config: &RunConfig) -> String {
    hex::encode(Sha256::digest(config.to_toml_string().as_bytes()))
}

/// Records of the configured trace source.
pub fn trace_records(
    config: &RunConfig,
) -> Result<Box<dyn Iterator<Item = Result<AccessRecord, TraceError>>>> {
    if let Some(path) = config.trace_path() {
        Ok(Box::new(open_trace(&path, config.cache.block_bytes)?))
    } else {
        let spec = config
            .trace
            .synthetic
            .as_ref()
            .expect("validated config has a trace source");
        Ok(Box::new(generate(spec, config.run.seed)?.map(Ok)))
    }
}

fn trace_label(config: &RunConfig) -> String {
    match config.trace_path() {
        Some(p) => format!("file:{}", p.display()),
        None => "synthetic".to_string(),
    }
}

/// Runs the full pipeline on a config.
pub fn run(config: &RunConfig) -> Result<ReportDocument> {
    config.validate()?;
    run_records(config, trace_records(config)?)
}

/// Runs the pipeline on an explicit record stream.
pub fn run_records<I>(config: &RunConfig, records: I) -> Result<ReportDocument>
where
    I: IntoIterator<Item = Result<AccessRecord, TraceError>>,
{
    let geometry = config.geometry()?;
    let device = config.device()?;
    let pv = config.pv.enabled.then(|| config.pv_model()).transpose()?;
    let rates = device.rates()?;
    let mut records = records.into_iter().peekable();

    let first_ts = match records.peek() {
        Some(Ok(r)) => Some(r.timestamp_ns),
        _ => None,
    };
    let start_ns = config.run.start_ns.or(first_ts).unwrap_or(0);
    let mut model = CacheModel::new(
        geometry,
        ModelOptions {
            vulnerable: config.run.read_disturb_vulnerable,
            track_per_bit: pv.is_some(),
            start_ns,
        },
    )?;
    let mut per_read = Vec::new();
    let mut count = 0u64;
    for rec in records {
        let rec = rec?;
        let out = model.apply_access(&rec)?;
        count += 1;
        if config.run.per_read_log {
            if let (Some(h), Some(frame)) = (out.read, out.frame) {
                per_read.push(PerReadRow {
                    timestamp_ns: rec.timestamp_ns,
                    address: geometry.block_address(rec.address),
                    set: frame.set,
                    way: frame.way,
                    error: per_read_block_error(&rates, geometry.block_bits(), &h),
                });
            }
        }
    }
    let end_ns = config.run.end_ns.unwrap_or(model.clock_ns()).max(start_ns);
    let acct = model.finalize(end_ns)?;
    info!("replayed {count} records over {} ns", acct.t_exe_ns());

    let unit = config.run.report_unit;
    let per_t = match unit.label() {
        "ns" => "per ns",
        "us" => "per us",
        "ms" => "per ms",
        _ => "per s",
    };
    let scenario = config.run.retention_scenario;
    let nominal_exps = CacheExponents::nominal(&device, &acct)?;
    let t_exe = acct.t_exe();
    let section = |exps: &CacheExponents| -> Result<ResultSection> {
        let report = if acct.t_exe_ns() == 0 && *exps == CacheExponents::default() {
            idle_report(unit.seconds())
        } else {
            per_unit_time_report(exps, t_exe, unit.seconds())?
        };
        Ok(ResultSection::new(report, scenario, per_t))
    };
    let nominal = section(&nominal_exps)?;
    let pv_section = match &pv {
        Some(pv) => Some(section(&CacheExponents::with_pv(&device, pv, &acct)?)?),
        None => None,
    };

    let pair = device.write_pair()?;
    let mut warnings = Vec::new();
    if let Some(lint) = pair.asymmetry_lint() {
        warnings.push(lint);
    }
    let totals = acct.totals();
    Ok(ReportDocument {
        schema: REPORT_SCHEMA,
        version: REPORT_VERSION,
        metadata: Metadata {
            seed: config.run.seed,
            config_sha256: config_hash(config),
            trace: trace_label(config),
            records: count,
            t_exe: q(t_exe / unit.seconds(), unit.label()),
            report_unit: unit.label(),
            retention_scenario: scenario,
            pv_enabled: pv.is_some(),
        },
        warnings,
        cell: CellSection {
            retention_rate: q(rates.retention_rate, "per s"),
            p_rd_cell: q(prob_from_log_survival(rates.rd_log_survival), PROB),
            p_wf_0to1: q(pair.p_wf_0to1, PROB),
            p_wf_1to0: q(pair.p_wf_1to0, PROB),
        },
        counters: CounterSection::new(&totals, unit.seconds(), unit.label()),
        nominal,
        pv: pv_section,
        per_read,
    })
}

/// Report of a run in which nothing happened.
fn idle_report(unit: f64) -> ReliabilityReport {
    let mut r = per_unit_time_report(&CacheExponents::default(), 1.0, unit)
        .expect("positive execution time");
    r.t_exe = 0.0;
    r
}
