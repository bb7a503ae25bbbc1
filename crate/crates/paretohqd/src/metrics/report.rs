//! Evaluation-front reports: normalized hypervolume, per-point tables, and
//! dominated-point flags, exported as plot-ready CSV.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::core::geometry::normalize;
use crate::core::types::{PreferenceVector, RewardBounds, RewardVector};
use crate::error::{Error, Result};
use crate::metrics::hypervolume::hypervolume;
use crate::pareto::dominates;

/// Average test-set rewards for one aligned model under one preference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationPoint {
    pub preference: PreferenceVector,
    pub mean_rewards: RewardVector,
}

/// Reference point policy for the hypervolume computation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HvReference {
    /// Origin of min-max-normalized space (the default).
    NormalizedOrigin,
    /// Explicit reference in raw reward space, normalized alongside the
    /// points.
    Raw(Vec<f64>),
}

impl Default for HvReference {
    fn default() -> Self {
        HvReference::NormalizedOrigin
    }
}

/// One row of the front report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontRow {
    pub preference: PreferenceVector,
    pub mean_rewards: RewardVector,
    pub normalized_rewards: RewardVector,
    /// Strictly dominated by another point in the set (equality is not
    /// domination).
    pub dominated: bool,
}

/// Summary of an evaluation front.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontReport {
    pub rows: Vec<FrontRow>,
    /// Hypervolume of the normalized points against the configured
    /// reference.
    pub hypervolume: f64,
    pub reference: Vec<f64>,
}

/// Normalizes the points, flags dominated ones, and computes the
/// hypervolume against the reference policy.
pub fn summarize_front(
    points: &[EvaluationPoint],
    bounds: &RewardBounds,
    reference: &HvReference,
) -> Result<FrontReport> {
    if points.is_empty() {
        return Err(Error::InvalidArgument("empty evaluation set".into()));
    }
    let m = bounds.arity();
    let normalized: Vec<RewardVector> = points
        .iter()
        .map(|p| normalize(&p.mean_rewards, bounds))
        .collect::<Result<_>>()?;

    let reference_point = match reference {
        HvReference::NormalizedOrigin => RewardVector::new(vec![0.0; m])?,
        HvReference::Raw(raw) => normalize(&RewardVector::new(raw.clone())?, bounds)?,
    };
    let hv = hypervolume(&normalized, &reference_point)?;

    let rows = points
        .iter()
        .zip(normalized.iter())
        .enumerate()
        .map(|(i, (p, norm))| {
            let dominated = normalized
                .iter()
                .enumerate()
                .any(|(j, other)| j != i && dominates(other, norm).unwrap_or(false));
            FrontRow {
                preference: p.preference.clone(),
                mean_rewards: p.mean_rewards.clone(),
                normalized_rewards: norm.clone(),
                dominated,
            }
        })
        .collect();

    Ok(FrontReport {
        rows,
        hypervolume: hv,
        reference: reference_point.values().to_vec(),
    })
}

/// Writes the per-point table as CSV: preference components, raw and
/// normalized mean rewards, dominated flag.
pub fn write_front_csv(
    report: &FrontReport,
    objective_names: &[String],
    path: &Path,
) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let m = objective_names.len();
    let mut writer = csv::Writer::from_path(path).map_err(|e| Error::Config(e.to_string()))?;
    let mut header: Vec<String> = (1..=m).map(|i| format!("preference_{i}")).collect();
    header.extend(objective_names.iter().map(|n| format!("mean_{n}")));
    header.extend(objective_names.iter().map(|n| format!("normalized_{n}")));
    header.push("dominated".into());
    writer
        .write_record(&header)
        .map_err(|e| Error::Config(e.to_string()))?;
    for row in &report.rows {
        let mut record: Vec<String> = row.preference.weights().iter().map(|w| w.to_string()).collect();
        record.extend(row.mean_rewards.values().iter().map(|v| v.to_string()));
        record.extend(row.normalized_rewards.values().iter().map(|v| v.to_string()));
        record.push(row.dominated.to_string());
        writer
            .write_record(&record)
            .map_err(|e| Error::Config(e.to_string()))?;
    }
    writer.flush()?;
    Ok(())
}

/// Reads evaluation points from a JSONL file of
/// `{"preference":[...], "mean_rewards":[...]}` records.
pub fn read_evaluation_points(path: &Path) -> Result<Vec<EvaluationPoint>> {
    let text = std::fs::read_to_string(path)?;
    let mut points = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let point: EvaluationPoint =
            serde_json::from_str(line).map_err(|e| Error::MalformedLine {
                line: idx + 1,
                reason: e.to_string(),
            })?;
        points.push(point);
    }
    Ok(points)
}
