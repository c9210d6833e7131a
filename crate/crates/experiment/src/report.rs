//! `.rep` (human-readable) and `.dat` (tab-separated) result files.

use std::fmt::Write as _;
use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::PathBuf;

use crate::aggregate::Estimate;
use crate::error::{Error, Result};
use crate::gold::QueryType;

/// Aggregated results of one (method, query-time parameter set) pair for one query type.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodResult {
    pub method: String,
    pub index_params: String,
    pub query_params: String,
    pub num_points: usize,
    pub num_queries: usize,
    pub recall: Estimate,
    pub class_accuracy: Estimate,
    pub rel_pos_error: Estimate,
    pub num_closer: Estimate,
    /// Milliseconds per query.
    pub query_time: Estimate,
    pub dist_comp: Estimate,
    pub impr_efficiency: Estimate,
    pub impr_dist_comp: Estimate,
    pub memory_mb: f64,
    /// Some result positions were clamped at the cached exact-answer depth.
    pub clamped_positions: bool,
}

pub const DAT_HEADER: &[&str] = &[
    "MethodName",
    "IndexParams",
    "QueryTimeParams",
    "Recall",
    "ClassAccuracy",
    "RelPosError",
    "NumCloser",
    "QueryTime",
    "DistComp",
    "ImprEfficiency",
    "ImprDistComp",
    "Mem",
    "NumData",
    "NumQueries",
];

pub fn report_paths(prefix: &str, qt: QueryType) -> (PathBuf, PathBuf) {
    (PathBuf::from(format!("{prefix}_{qt}.rep")), PathBuf::from(format!("{prefix}_{qt}.dat")))
}

fn line(label: &str, e: &Estimate) -> String {
    format!("{:<16}{:<8.4} -> [{:.4} {:.4}]\n", format!("{label}:"), e.mean, e.low, e.high)
}

pub fn format_rep(r: &MethodResult) -> String {
    let bar = "-".repeat(36);
    let mut s = String::new();
    let _ = writeln!(s, "{}", "=".repeat(35));
    if r.index_params.is_empty() {
        let _ = writeln!(s, "{}", r.method);
    } else {
        let _ = writeln!(s, "{}: {}", r.method, r.index_params);
    }
    let _ = writeln!(s, "{}", r.query_params);
    let _ = writeln!(s, "{}", "=".repeat(35));
    let _ = writeln!(s, "# of points: {}", r.num_points);
    let _ = writeln!(s, "# of queries: {}", r.num_queries);
    let _ = writeln!(s, "{bar}");
    s += &line("Recall", &r.recall);
    s += &line("ClassAccuracy", &r.class_accuracy);
    s += &line("RelPosError", &r.rel_pos_error);
    s += &line("NumCloser", &r.num_closer);
    let _ = writeln!(s, "{bar}");
    s += &line("QueryTime", &r.query_time);
    s += &line("DistComp", &r.dist_comp);
    let _ = writeln!(s, "{bar}");
    s += &line("ImprEfficiency", &r.impr_efficiency);
    s += &line("ImprDistComp", &r.impr_dist_comp);
    let _ = writeln!(s, "{bar}");
    let _ = writeln!(s, "{:<16}{:.1} MB", "Memory Usage:", r.memory_mb);
    let _ = writeln!(s, "{bar}");
    if r.clamped_positions {
        s += "* some returned objects ranked below the cached exact answers; their positions were \
              capped at the cache depth, so RelPosError and NumCloser are lower bounds\n";
    }
    s
}

pub fn format_dat_row(r: &MethodResult) -> String {
    [
        r.method.clone(),
        r.index_params.clone(),
        r.query_params.clone(),
        r.recall.mean.to_string(),
        r.class_accuracy.mean.to_string(),
        r.rel_pos_error.mean.to_string(),
        r.num_closer.mean.to_string(),
        r.query_time.mean.to_string(),
        r.dist_comp.mean.to_string(),
        r.impr_efficiency.mean.to_string(),
        r.impr_dist_comp.mean.to_string(),
        r.memory_mb.to_string(),
        r.num_points.to_string(),
        r.num_queries.to_string(),
    ]
    .join("\t")
}

/// Writes the report pair for one query type; with `append`, earlier content is kept.
pub fn write_reports(prefix: &str, qt: QueryType, rows: &[MethodResult], append: bool) -> Result<()> {
    let (rep, dat) = report_paths(prefix, qt);
    let keep_dat = append && fs::metadata(&dat).is_ok_and(|m| m.len() > 0);
    let mut dat_text = String::new();
    if !keep_dat {
        dat_text += &DAT_HEADER.join("\t");
        dat_text.push('\n');
    }
    let mut rep_text = String::new();
    for r in rows {
        dat_text += &format_dat_row(r);
        dat_text.push('\n');
        rep_text += &format_rep(r);
    }
    write_file(&dat, &dat_text, keep_dat)?;
    write_file(&rep, &rep_text, append)
}

fn write_file(path: &PathBuf, text: &str, append: bool) -> Result<()> {
    let mut f = OpenOptions::new()
        .create(true)
        .write(true)
        .append(append)
        .truncate(!append)
        .open(path)
        .map_err(|e| Error::io(path, e))?;
    f.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))
}

/// Parses a `.dat` file into its header and rows of fields.
pub fn read_dat(path: &std::path::Path) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines();
    let header = lines.next().unwrap_or_default().split('\t').map(String::from).collect();
    let rows = lines
        .filter(|l| !l.is_empty())
        .map(|l| l.split('\t').map(String::from).collect())
        .collect();
    Ok((header, rows))
}
