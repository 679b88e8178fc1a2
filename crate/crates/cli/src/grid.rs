//! The 16-cell learner x detector grid plus the four original-detector
//! baselines. VC cells run both voting strategies and report the better
//! one under the mode's driving metric.

use anyhow::Result;
use commweave_core::detect::{DetectorConfig, DetectorKind};
use commweave_core::ml::LearnerConfig;
use serde::{Deserialize, Serialize};

use crate::config::{Mode, RunConfig};
use crate::naming::{format_name, ReportLearner};
use crate::pipeline::{run_baseline, run_pipeline, PreparedData, RunRecord};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridFailure {
    pub cell: String,
    pub error: String,
}

#[derive(Debug, Default, Serialize, Deserialize)]
pub struct GridOutcome {
    /// The four original detectors on the unweighted graph.
    pub baselines: Vec<RunRecord>,
    /// The 16 learner x detector cells (VC already collapsed).
    pub cells: Vec<RunRecord>,
    /// Both raw VC strategies per detector, for per-metric re-selection.
    pub vc_variants: Vec<RunRecord>,
    pub failures: Vec<GridFailure>,
}

impl GridOutcome {
    pub fn all_records(&self) -> impl Iterator<Item = &RunRecord> {
        self.baselines.iter().chain(self.cells.iter())
    }

    /// Best mean value of a metric over the given rule filter.
    pub fn best(
        &self,
        metric: impl Fn(&RunRecord) -> Option<f64>,
        baseline: bool,
    ) -> Option<(String, f64)> {
        let records: Box<dyn Iterator<Item = &RunRecord>> = if baseline {
            Box::new(self.baselines.iter())
        } else {
            Box::new(self.cells.iter())
        };
        records
            .filter_map(|r| Some((r.name.clone(), metric(r)?)))
            .max_by(|a, b| a.1.total_cmp(&b.1))
    }
}

/// The metric that picks the better VC strategy: seed-mean weighted
/// modularity in statistical-physics mode, seed-mean NMI when ground
/// truth drives the table.
fn driving_metric(mode: Mode, record: &RunRecord) -> f64 {
    match mode {
        Mode::StatisticalPhysics => record.mean_q_weighted,
        Mode::GroundTruth => record.mean_nmi.unwrap_or(record.mean_q_weighted),
    }
}

/// Runs the full grid. Per-cell failures are recorded and the grid
/// continues.
pub fn run_grid(data: &PreparedData, base: &RunConfig) -> Result<GridOutcome> {
    let mut outcome = GridOutcome::default();

    for detector in DetectorKind::ALL {
        let config = DetectorConfig {
            detector,
            ..base.detector_g.clone()
        };
        match run_baseline(data, &config, &base.seeds) {
            Ok(record) => outcome.baselines.push(record),
            Err(error) => outcome.failures.push(GridFailure {
                cell: crate::naming::detector_label(detector).to_string(),
                error: format!("{error:#}"),
            }),
        }
    }

    for detector in DetectorKind::ALL {
        for learner in ReportLearner::ALL {
            let cell_name = format_name(learner, detector);
            let mut candidates: Vec<RunRecord> = Vec::new();
            for &concrete in learner.constituents() {
                let mut config = base.clone();
                config.detector_b = DetectorConfig {
                    detector,
                    ..base.detector_b.clone()
                };
                config.detector_g = DetectorConfig {
                    detector,
                    ..base.detector_g.clone()
                };
                config.learner = LearnerConfig {
                    learner: concrete,
                    ..base.learner.clone()
                };
                match run_pipeline(data, &config) {
                    Ok((record, _)) => candidates.push(record),
                    Err(error) => outcome.failures.push(GridFailure {
                        cell: format!("{cell_name} ({})", concrete.name()),
                        error: format!("{error:#}"),
                    }),
                }
            }
            if learner == ReportLearner::Vc {
                outcome.vc_variants.extend(candidates.iter().cloned());
            }
            if let Some(best) = candidates.into_iter().max_by(|a, b| {
                driving_metric(base.mode, a).total_cmp(&driving_metric(base.mode, b))
            }) {
                let mut record = best;
                record.name = cell_name;
                outcome.cells.push(record);
            }
        }
    }
    Ok(outcome)
}
