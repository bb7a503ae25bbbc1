//! Evaluation surface: hypervolume indicator, language-collapse detection,
//! and per-preference front reports.

pub mod collapse;
pub mod hypervolume;
pub mod report;

pub use collapse::{collapse_rate, detect_collapse, CollapseReason, CollapseVerdict};
pub use hypervolume::hypervolume;
pub use report::{
    read_evaluation_points, summarize_front, write_front_csv, EvaluationPoint, FrontReport,
    FrontRow, HvReference,
};
