//! The learner-detector naming convention for run records: "RF-Leiden",
//! "VC-Infomap", baseline records carry the bare detector name.

use commweave_core::detect::DetectorKind;
use commweave_core::ml::Learner;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportLearner {
    Dt,
    Rf,
    Xgb,
    /// Best of the soft/hard voting strategies.
    Vc,
}

impl ReportLearner {
    pub const ALL: [ReportLearner; 4] = [
        ReportLearner::Dt,
        ReportLearner::Rf,
        ReportLearner::Xgb,
        ReportLearner::Vc,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            ReportLearner::Dt => "DT",
            ReportLearner::Rf => "RF",
            ReportLearner::Xgb => "XGB",
            ReportLearner::Vc => "VC",
        }
    }

    /// The concrete learners behind a report cell.
    pub fn constituents(&self) -> &'static [Learner] {
        match self {
            ReportLearner::Dt => &[Learner::Dt],
            ReportLearner::Rf => &[Learner::Rf],
            ReportLearner::Xgb => &[Learner::Xgb],
            ReportLearner::Vc => &[Learner::VcSoft, Learner::VcHard],
        }
    }
}

pub fn detector_label(kind: DetectorKind) -> &'static str {
    match kind {
        DetectorKind::Louvain => "Louvain",
        DetectorKind::Leiden => "Leiden",
        DetectorKind::FastGreedy => "FG",
        DetectorKind::Infomap => "Infomap",
    }
}

pub fn parse_detector_label(label: &str) -> Option<DetectorKind> {
    match label {
        "Louvain" => Some(DetectorKind::Louvain),
        "Leiden" => Some(DetectorKind::Leiden),
        "FG" => Some(DetectorKind::FastGreedy),
        "Infomap" => Some(DetectorKind::Infomap),
        _ => None,
    }
}

pub fn format_name(learner: ReportLearner, detector: DetectorKind) -> String {
    format!("{}-{}", learner.label(), detector_label(detector))
}

/// Inverse of [`format_name`]; `None` for baseline (bare detector) names.
pub fn parse_name(name: &str) -> Option<(ReportLearner, DetectorKind)> {
    let (learner, detector) = name.split_once('-')?;
    let learner = match learner {
        "DT" => ReportLearner::Dt,
        "RF" => ReportLearner::Rf,
        "XGB" => ReportLearner::Xgb,
        "VC" => ReportLearner::Vc,
        _ => return None,
    };
    Some((learner, parse_detector_label(detector)?))
}
