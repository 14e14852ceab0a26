//! CSV output.
//!
//! Summary files have one row per sweep point (strategy x posture x swept
//! values) in expansion order. Column order is fixed by [`SUMMARY_COLUMNS`].
//! Numbers use six decimals; a parameter that does not apply to the row's
//! strategy, or a statistic with no samples, is an empty cell.

use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use super::experiment::{PointResult, RunError};
use super::scenario::ExperimentId;
use crate::channel::{NodeSite, NODE_COUNT};
use crate::metrics::Stat;
use crate::strategies::StrategyKind;

pub const SUMMARY_COLUMNS: [&str; 27] = [
    "scenario_id",
    "experiment",
    "strategy",
    "kind",
    "posture",
    "ttl",
    "k",
    "p",
    "i_s",
    "delta",
    "t_s",
    "q",
    "rate",
    "queue_capacity",
    "seeds",
    "coverage_pct_mean",
    "coverage_pct_std",
    "delay_s_mean",
    "delay_s_std",
    "tx_mean",
    "rx_mean",
    "ctrl_tx_mean",
    "ctrl_rx_mean",
    "deseq_pct_mean",
    "deseq_pct_std",
    "drops_mean",
    "capped_runs",
];

/// Per-node file: the point identification columns, then one delay and one
/// tx+rx column per node in site order.
pub fn node_columns() -> Vec<String> {
    let mut cols: Vec<String> = SUMMARY_COLUMNS[..15].iter().map(|s| s.to_string()).collect();
    for n in NodeSite::ALL {
        cols.push(format!("delay_s_mean_{n}"));
    }
    for n in NodeSite::ALL {
        cols.push(format!("tx_rx_mean_{n}"));
    }
    cols
}

fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.6}")
    } else {
        String::new()
    }
}

fn stat_mean(s: &Stat) -> String {
    if s.n == 0 {
        String::new()
    } else {
        num(s.mean)
    }
}

fn stat_std(s: &Stat) -> String {
    if s.n == 0 {
        String::new()
    } else {
        num(s.std)
    }
}

fn ident(scenario_id: &str, r: &PointResult) -> Vec<String> {
    let p = &r.point;
    let (mut k, mut prob, mut i, mut delta, mut t, mut q) =
        (String::new(), String::new(), String::new(), String::new(), String::new(), String::new());
    match p.strategy.kind {
        StrategyKind::PrunedFlooding { k: x } => k = x.to_string(),
        StrategyKind::ProbabilisticConstant { p: x } => prob = num(x),
        StrategyKind::Ebp { hello_interval } => i = num(hello_interval.as_secs_f64()),
        StrategyKind::Mbp { delta: d, timer, quota } => {
            delta = d.to_string();
            t = num(timer.as_secs_f64());
            q = if quota == u32::MAX { "inf".into() } else { quota.to_string() };
        }
        _ => {}
    }
    vec![
        scenario_id.to_string(),
        p.experiment.to_string(),
        p.strategy.label.clone(),
        p.strategy.kind.name().to_string(),
        p.posture.to_string(),
        p.ttl.to_string(),
        k,
        prob,
        i,
        delta,
        t,
        q,
        p.rate.map(num).unwrap_or_default(),
        p.queue_capacity.to_string(),
        r.aggregate.seeds.to_string(),
    ]
}

pub fn summary_row(scenario_id: &str, r: &PointResult) -> Vec<String> {
    let a = &r.aggregate;
    let mut row = ident(scenario_id, r);
    row.extend([
        stat_mean(&a.coverage_pct),
        stat_std(&a.coverage_pct),
        stat_mean(&a.delay_s),
        stat_std(&a.delay_s),
        stat_mean(&a.data_tx),
        stat_mean(&a.data_rx),
        stat_mean(&a.control_tx),
        stat_mean(&a.control_rx),
        stat_mean(&a.deseq_pct),
        stat_std(&a.deseq_pct),
        stat_mean(&a.drops),
        r.capped_runs.to_string(),
    ]);
    row
}

pub fn node_row(scenario_id: &str, r: &PointResult) -> Vec<String> {
    let a = &r.aggregate;
    let mut row = ident(scenario_id, r);
    row.extend((0..NODE_COUNT).map(|i| stat_mean(&a.node_delay_s[i])));
    row.extend((0..NODE_COUNT).map(|i| stat_mean(&a.node_tx_rx[i])));
    row
}

fn write_rows<W: Write>(w: W, header: &[String], rows: impl Iterator<Item = Vec<String>>) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(header)?;
    for row in rows {
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_summary<W: Write>(w: W, scenario_id: &str, results: &[PointResult]) -> csv::Result<()> {
    let header: Vec<String> = SUMMARY_COLUMNS.iter().map(|s| s.to_string()).collect();
    write_rows(w, &header, results.iter().map(|r| summary_row(scenario_id, r)))
}

pub fn write_nodes<W: Write>(w: W, scenario_id: &str, results: &[PointResult]) -> csv::Result<()> {
    write_rows(w, &node_columns(), results.iter().map(|r| node_row(scenario_id, r)))
}

pub fn summary_path(dir: &Path, id: ExperimentId) -> PathBuf {
    dir.join(format!("{}.csv", id.name().to_lowercase()))
}

pub fn nodes_path(dir: &Path, id: ExperimentId) -> PathBuf {
    dir.join(format!("{}_nodes.csv", id.name().to_lowercase()))
}

fn create(path: &Path) -> Result<File, RunError> {
    File::create(path).map_err(|source| RunError::Io { path: path.to_path_buf(), source })
}

/// Writes the summary file and, when asked, the per-node file. Returns the
/// paths written.
pub fn write_experiment(
    dir: &Path,
    scenario_id: &str,
    id: ExperimentId,
    results: &[PointResult],
    per_node: bool,
) -> Result<Vec<PathBuf>, RunError> {
    std::fs::create_dir_all(dir).map_err(|source| RunError::Io { path: dir.to_path_buf(), source })?;
    let mut written = Vec::new();
    let path = summary_path(dir, id);
    write_summary(create(&path)?, scenario_id, results).map_err(|source| RunError::Csv { path: path.clone(), source })?;
    written.push(path);
    if per_node {
        let path = nodes_path(dir, id);
        write_nodes(create(&path)?, scenario_id, results).map_err(|source| RunError::Csv { path: path.clone(), source })?;
        written.push(path);
    }
    Ok(written)
}
