//! Plot-ready CSV tables, one per failure source plus total and breakdown.

use std::fs::File;
use std::path::{Path, PathBuf};

use super::report::{BreakdownSection, Quantity, ReportDocument, ResultSection};

type Row = (&'static str, &'static str, Quantity);
type RowsOf = fn(&ResultSection) -> Vec<Row>;

fn sections(doc: &ReportDocument) -> Vec<(&'static str, &ResultSection)> {
    let mut v = vec![("nominal", &doc.nominal)];
    if let Some(pv) = &doc.pv {
        v.push(("pv", pv));
    }
    v
}

fn push_opt(rows: &mut Vec<Row>, scenario: &'static str, name: &'static str, q: Option<Quantity>) {
    if let Some(q) = q {
        rows.push((scenario, name, q));
    }
}

fn retention(s: &ResultSection) -> Vec<Row> {
    let mut rows = Vec::new();
    push_opt(&mut rows, "vulnerable", "p_rf_cache", s.p_rf_cache);
    push_opt(&mut rows, "vulnerable", "r_rf_t", s.r_rf_t);
    push_opt(
        &mut rows,
        "all_intervals",
        "p_rf_cache",
        s.p_rf_cache_all_intervals,
    );
    push_opt(&mut rows, "all_intervals", "r_rf_t", s.r_rf_t_all_intervals);
    rows
}

fn read_disturb(s: &ResultSection) -> Vec<Row> {
    vec![("-", "p_rd_cache", s.p_rd_cache), ("-", "r_rd_t", s.r_rd_t)]
}

fn write_fail(s: &ResultSection) -> Vec<Row> {
    vec![("-", "p_wf_cache", s.p_wf_cache), ("-", "r_wf_t", s.r_wf_t)]
}

fn total(s: &ResultSection) -> Vec<Row> {
    let mut rows = Vec::new();
    push_opt(&mut rows, "vulnerable", "p_total_per_t", s.p_total_per_t);
    push_opt(
        &mut rows,
        "all_intervals",
        "p_total_per_t",
        s.p_total_per_t_all_intervals,
    );
    rows
}

fn breakdown(s: &ResultSection) -> Vec<Row> {
    let mut rows = Vec::new();
    let mut add = |scenario, b: &Option<BreakdownSection>| {
        if let Some(b) = b {
            rows.push((scenario, "retention", b.retention));
            rows.push((scenario, "read_disturb", b.read_disturb));
            rows.push((scenario, "write_failure", b.write_failure));
        }
    };
    add("vulnerable", &s.breakdown);
    add("all_intervals", &s.breakdown_all_intervals);
    rows
}

fn write_table(path: &Path, doc: &ReportDocument, rows: RowsOf) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(File::create(path)?);
    w.write_record(["model", "scenario", "quantity", "value", "unit"])?;
    for (model, s) in sections(doc) {
        for (scenario, name, q) in rows(s) {
            w.write_record([model, scenario, name, &format!("{:e}", q.value), q.unit])?;
        }
    }
    w.flush()
}

/// Writes the CSV tables into `dir` and returns their paths.
pub fn write_csv_tables(doc: &ReportDocument, dir: &Path) -> std::io::Result<Vec<PathBuf>> {
    let tables: [(&str, RowsOf); 5] = [
        ("retention.csv", retention),
        ("read_disturb.csv", read_disturb),
        ("write_fail.csv", write_fail),
        ("total.csv", total),
        ("breakdown.csv", breakdown),
    ];
    let mut written = Vec::new();
    for (name, rows) in tables {
        let path = dir.join(name);
        write_table(&path, doc, rows)?;
        written.push(path);
    }
    if !doc.per_read.is_empty() {
        let path = dir.join("per_read.csv");
        let mut w = csv::Writer::from_writer(File::create(&path)?);
        w.write_record([
            "timestamp_ns",
            "address",
            "set",
            "way",
            "p_retention",
            "p_write",
            "p_read_disturb",
            "p_total",
        ])?;
        for r in &doc.per_read {
            w.write_record([
                r.timestamp_ns.to_string(),
                format!("0x{:x}", r.address),
                r.set.to_string(),
                r.way.to_string(),
                format!("{:e}", r.error.p_retention),
                format!("{:e}", r.error.p_write),
                format!("{:e}", r.error.p_read_disturb),
                format!("{:e}", r.error.p_total),
            ])?;
        }
        w.flush()?;
        written.push(path);
    }
    Ok(written)
}
