//! Report generation: long-format metric tables, best-vs-baseline
//! improvement percentages, and the similarity-gap correlation analyses.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use commweave_core::metrics::{improvement_delta, pearson_with_ttest};
use serde::{Deserialize, Serialize};

use crate::pipeline::RunRecord;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DeltaRow {
    pub dataset: String,
    pub metric: String,
    pub best_proposed_name: String,
    pub best_proposed: f64,
    pub best_original_name: String,
    pub best_original: f64,
    /// Percentage improvement, 100 * (proposed - original) / original.
    pub delta_percent: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorrelationRow {
    /// "across_datasets" or "within_dataset:<name>".
    pub grouping: String,
    pub metric: String,
    pub r: f64,
    pub p_value: f64,
    pub n: usize,
}

#[derive(Debug, Default, Serialize, Deserialize)]
pub struct ReportSummary {
    pub deltas: Vec<DeltaRow>,
    pub correlations: Vec<CorrelationRow>,
    pub notices: Vec<String>,
}

fn metric_value(record: &RunRecord, metric: &str) -> Option<f64> {
    match metric {
        "q_weighted" => Some(record.mean_q_weighted),
        "nmi" => record.mean_nmi,
        "ari" => record.mean_ari,
        _ => None,
    }
}

const METRICS: [&str; 3] = ["q_weighted", "nmi", "ari"];

/// Long-format CSV: dataset,rule,method,metric,value.
pub fn write_metric_table(path: &Path, records: &[RunRecord]) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)
        .with_context(|| format!("cannot write {}", path.display()))?;
    writer.write_record(["dataset", "rule", "method", "metric", "value"])?;
    for record in records {
        for metric in METRICS {
            if let Some(value) = metric_value(record, metric) {
                writer.write_record([
                    record.dataset.as_str(),
                    record.rule.as_str(),
                    record.name.as_str(),
                    metric,
                    &format!("{value}"),
                ])?;
            }
        }
    }
    writer.flush()?;
    Ok(())
}

fn best_by(records: &[&RunRecord], metric: &str) -> Option<(String, f64)> {
    records
        .iter()
        .filter_map(|r| Some((r.name.clone(), metric_value(r, metric)?)))
        .max_by(|a, b| a.1.total_cmp(&b.1))
}

/// Per-dataset improvement of the best proposed record over the best
/// original record, per metric.
pub fn compute_deltas(records: &[RunRecord]) -> Vec<DeltaRow> {
    let mut by_dataset: BTreeMap<&str, Vec<&RunRecord>> = BTreeMap::new();
    for record in records {
        by_dataset.entry(&record.dataset).or_default().push(record);
    }
    let mut rows = Vec::new();
    for (dataset, group) in by_dataset {
        let originals: Vec<&RunRecord> = group
            .iter()
            .copied()
            .filter(|r| r.rule == "original")
            .collect();
        let proposed: Vec<&RunRecord> = group
            .iter()
            .copied()
            .filter(|r| r.rule != "original")
            .collect();
        for metric in METRICS {
            let (Some((orig_name, orig)), Some((prop_name, prop))) =
                (best_by(&originals, metric), best_by(&proposed, metric))
            else {
                continue;
            };
            let Ok(delta_percent) = improvement_delta(prop, orig) else {
                continue;
            };
            rows.push(DeltaRow {
                dataset: dataset.to_string(),
                metric: metric.to_string(),
                best_proposed_name: prop_name,
                best_proposed: prop,
                best_original_name: orig_name,
                best_original: orig,
                delta_percent,
            });
        }
    }
    rows
}

/// Correlates the similarity gap with NMI/ARI. Across datasets: one
/// point per dataset (its best proposed record by the metric). Within a
/// dataset: one point per grid cell. Groups with fewer than 3 points are
/// skipped with a notice.
pub fn compute_correlations(records: &[RunRecord]) -> (Vec<CorrelationRow>, Vec<String>) {
    let mut rows = Vec::new();
    let mut notices = Vec::new();
    let proposed: Vec<&RunRecord> = records.iter().filter(|r| r.rule != "original").collect();

    for metric in ["nmi", "ari"] {
        // Across datasets.
        let mut by_dataset: BTreeMap<&str, Vec<&RunRecord>> = BTreeMap::new();
        for record in &proposed {
            by_dataset.entry(&record.dataset).or_default().push(record);
        }
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for group in by_dataset.values() {
            let best = group
                .iter()
                .filter_map(|r| {
                    Some((metric_value(r, metric)?, r.mean_similarity_gap?))
                })
                .max_by(|a, b| a.0.total_cmp(&b.0));
            if let Some((value, gap)) = best {
                xs.push(gap);
                ys.push(value);
            }
        }
        match pearson_with_ttest(&xs, &ys) {
            Ok(result) => rows.push(CorrelationRow {
                grouping: "across_datasets".to_string(),
                metric: metric.to_string(),
                r: result.r,
                p_value: result.p_value,
                n: result.n,
            }),
            Err(_) => notices.push(format!(
                "correlation across datasets for {metric} skipped: need >= 3 datasets \
                 with ground truth and similarity gaps, have {}",
                xs.len()
            )),
        }

        // Within each dataset over its grid cells.
        for (dataset, group) in &by_dataset {
            let (xs, ys): (Vec<f64>, Vec<f64>) = group
                .iter()
                .filter_map(|r| Some((r.mean_similarity_gap?, metric_value(r, metric)?)))
                .unzip();
            match pearson_with_ttest(&xs, &ys) {
                Ok(result) => rows.push(CorrelationRow {
                    grouping: format!("within_dataset:{dataset}"),
                    metric: metric.to_string(),
                    r: result.r,
                    p_value: result.p_value,
                    n: result.n,
                }),
                Err(_) => notices.push(format!(
                    "correlation within {dataset} for {metric} skipped (n = {})",
                    xs.len()
                )),
            }
        }
    }
    (rows, notices)
}

/// Writes the table CSV, delta CSV, and correlation JSON under
/// `out_dir`; returns the summary.
pub fn write_reports(out_dir: &Path, records: &[RunRecord]) -> Result<ReportSummary> {
    std::fs::create_dir_all(out_dir)?;
    write_metric_table(&out_dir.join("metrics.csv"), records)?;

    let deltas = compute_deltas(records);
    let mut writer = csv::Writer::from_path(out_dir.join("improvement.csv"))?;
    writer.write_record([
        "dataset",
        "metric",
        "best_proposed_name",
        "best_proposed",
        "best_original_name",
        "best_original",
        "delta_percent",
    ])?;
    for row in &deltas {
        writer.write_record([
            row.dataset.as_str(),
            row.metric.as_str(),
            row.best_proposed_name.as_str(),
            &format!("{}", row.best_proposed),
            row.best_original_name.as_str(),
            &format!("{}", row.best_original),
            &format!("{}", row.delta_percent),
        ])?;
    }
    writer.flush()?;

    let (correlations, notices) = compute_correlations(records);
    let summary = ReportSummary {
        deltas,
        correlations,
        notices,
    };
    let file = std::fs::File::create(out_dir.join("correlation.json"))?;
    serde_json::to_writer_pretty(std::io::BufWriter::new(file), &summary)?;
    Ok(summary)
}

/// Loads every RunRecord JSON under a directory (one level deep).
pub fn load_records_dir(dir: &Path) -> Result<Vec<RunRecord>> {
    let mut records = Vec::new();
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .with_context(|| format!("cannot read {}", dir.display()))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .collect();
    paths.sort();
    for path in paths {
        if let Ok(record) = crate::pipeline::read_record(&path) {
            records.push(record);
        }
    }
    Ok(records)
}
