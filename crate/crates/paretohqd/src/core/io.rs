//! Dataset ingestion and serialization.
//!
//! The on-disk format is UTF-8 line-delimited JSON, one record per line with
//! fields `id`, `prompt`, `response` and an optional `rewards` array of M
//! numbers. Unknown fields are preserved on round-trip. Bounds are exported
//! as a single `{"min":[...],"max":[...]}` record.

use std::io::{BufRead, Write};
use std::path::Path;

use crate::core::types::{Dataset, RewardBounds, RewardVector, ScoredExample};
use crate::error::{Error, Result};

/// Parses a line-delimited dataset, validating ids and reward arity.
///
/// The input order is preserved. Errors carry 1-based line numbers.
pub fn ingest_dataset<R: BufRead>(reader: R, objective_names: &[String]) -> Result<Dataset> {
    if objective_names.len() < 2 {
        return Err(Error::TooFewObjectives(objective_names.len()));
    }
    let m = objective_names.len();
    let mut examples: Vec<ScoredExample> = Vec::new();
    let mut seen: std::collections::HashSet<String> = std::collections::HashSet::new();

    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: RawRecord = serde_json::from_str(&line).map_err(|e| Error::MalformedLine {
            line: line_no,
            reason: e.to_string(),
        })?;
        if record.id.is_empty() {
            return Err(Error::MalformedLine {
                line: line_no,
                reason: "empty id".into(),
            });
        }
        if !seen.insert(record.id.clone()) {
            return Err(Error::DuplicateId {
                id: record.id,
                line: line_no,
            });
        }
        let rewards = match record.rewards {
            Some(values) => {
                if values.len() != m {
                    return Err(Error::ArityMismatchAtLine {
                        line: line_no,
                        expected: m,
                        got: values.len(),
                    });
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(Error::NonFiniteReward { line: line_no });
                }
                Some(RewardVector::new(values).map_err(|_| Error::NonFiniteReward { line: line_no })?)
            }
            None => None,
        };
        examples.push(ScoredExample {
            id: record.id,
            prompt: record.prompt,
            response: record.response,
            rewards,
            extra: record.extra,
        });
    }

    Dataset::new(objective_names.to_vec(), examples)
}

/// Raw record as it appears on disk. `rewards: null` is treated as absent.
#[derive(serde::Deserialize)]
struct RawRecord {
    id: String,
    prompt: String,
    response: String,
    #[serde(default)]
    rewards: Option<Vec<f64>>,
    #[serde(flatten)]
    extra: serde_json::Map<String, serde_json::Value>,
}

/// Writes one JSON record per line; the inverse of [`ingest_dataset`].
pub fn write_dataset<W: Write>(dataset: &Dataset, mut writer: W) -> Result<()> {
    for ex in dataset.examples() {
        serde_json::to_writer(&mut writer, ex)?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_dataset_file(path: &Path, objective_names: &[String]) -> Result<Dataset> {
    let file = std::fs::File::open(path)?;
    ingest_dataset(std::io::BufReader::new(file), objective_names)
}

pub fn write_dataset_file(dataset: &Dataset, path: &Path) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let mut buf = Vec::new();
    write_dataset(dataset, &mut buf)?;
    std::fs::write(path, buf)?;
    Ok(())
}

/// Componentwise min/max over all reward vectors in the dataset.
pub fn compute_bounds(dataset: &Dataset) -> Result<RewardBounds> {
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    dataset.require_scored()?;
    let m = dataset.objective_count();
    let mut min = vec![f64::INFINITY; m];
    let mut max = vec![f64::NEG_INFINITY; m];
    for ex in dataset.examples() {
        let r = ex.rewards()?;
        for i in 0..m {
            min[i] = min[i].min(r.get(i));
            max[i] = max[i].max(r.get(i));
        }
    }
    RewardBounds::new(RewardVector::new(min)?, RewardVector::new(max)?)
}

pub fn write_bounds_file(bounds: &RewardBounds, path: &Path) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let json = serde_json::to_string(bounds)?;
    std::fs::write(path, format!("{json}\n"))?;
    Ok(())
}

pub fn read_bounds_file(path: &Path) -> Result<RewardBounds> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}
