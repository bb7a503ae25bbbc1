//! Domain types shared by every module: reward vectors, preference vectors,
//! scored examples, datasets, and reward bounds.
//!
//! All types are immutable after construction. Validation happens in the
//! constructors so the rest of the crate can rely on the invariants.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance for geometric equality checks across the crate.
pub const GEOM_TOLERANCE: f64 = 1e-9;

/// One reward score per alignment objective, all components finite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RewardVector(Vec<f64>);

impl RewardVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidArgument(
                "reward vector must not be empty".into(),
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteComponent);
        }
        Ok(Self(values))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn get(&self, i: usize) -> f64 {
        self.0[i]
    }

    /// Fails unless the vector has exactly `m` components.
    pub fn ensure_arity(&self, m: usize) -> Result<()> {
        if self.0.len() == m {
            Ok(())
        } else {
            Err(Error::ArityMismatch {
                expected: m,
                got: self.0.len(),
            })
        }
    }

    pub fn euclidean_distance(&self, other: &RewardVector) -> Result<f64> {
        other.ensure_arity(self.len())?;
        Ok(self
            .0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt())
    }
}

impl AsRef<[f64]> for RewardVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// Nonnegative objective weights summing to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PreferenceVector(Vec<f64>);

/// Tolerance on the weight sum of a preference vector.
pub const PREFERENCE_SUM_TOLERANCE: f64 = 1e-9;

impl PreferenceVector {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidPreference("empty weight vector".into()));
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::InvalidPreference(
                "weights must be finite".into(),
            ));
        }
        if let Some(w) = weights.iter().find(|w| **w < 0.0 || **w > 1.0) {
            return Err(Error::InvalidPreference(format!(
                "weight {w} outside [0, 1]"
            )));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > PREFERENCE_SUM_TOLERANCE {
            return Err(Error::InvalidPreference(format!(
                "weights sum to {sum}, expected 1"
            )));
        }
        Ok(Self(weights))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.0
    }

    pub fn get(&self, i: usize) -> f64 {
        self.0[i]
    }

    /// The uniform preference `[1/m, ..., 1/m]`.
    pub fn uniform(m: usize) -> Self {
        Self(vec![1.0 / m as f64; m])
    }

    /// Euclidean distance to a raw weight array (targets need not sum to one).
    pub fn distance_to_target(&self, target: &[f64]) -> f64 {
        self.0
            .iter()
            .zip(target.iter())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }
}

/// A prompt/response pair, optionally annotated with reward scores.
///
/// Unknown fields from the dataset file are kept in `extra` so round-trips
/// preserve them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredExample {
    pub id: String,
    pub prompt: String,
    pub response: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rewards: Option<RewardVector>,
    #[serde(flatten, skip_serializing_if = "serde_json::Map::is_empty", default)]
    pub extra: serde_json::Map<String, serde_json::Value>,
}

impl ScoredExample {
    pub fn new(id: impl Into<String>, prompt: impl Into<String>, response: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            prompt: prompt.into(),
            response: response.into(),
            rewards: None,
            extra: serde_json::Map::new(),
        }
    }

    pub fn with_rewards(mut self, rewards: RewardVector) -> Self {
        self.rewards = Some(rewards);
        self
    }

    pub fn rewards(&self) -> Result<&RewardVector> {
        self.rewards.as_ref().ok_or_else(|| Error::UnscoredExample {
            id: self.id.clone(),
        })
    }
}

/// An ordered collection of examples sharing one objective arity.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    objective_names: Vec<String>,
    examples: Vec<ScoredExample>,
}

impl Dataset {
    /// Validates id uniqueness and reward arity against the objective labels.
    pub fn new(objective_names: Vec<String>, examples: Vec<ScoredExample>) -> Result<Self> {
        if objective_names.len() < 2 {
            return Err(Error::TooFewObjectives(objective_names.len()));
        }
        let m = objective_names.len();
        let mut seen: HashSet<&str> = HashSet::with_capacity(examples.len());
        for ex in &examples {
            if ex.id.is_empty() {
                return Err(Error::InvalidArgument("empty example id".into()));
            }
            if !seen.insert(ex.id.as_str()) {
                return Err(Error::DuplicateId {
                    id: ex.id.clone(),
                    line: 0,
                });
            }
            if let Some(r) = &ex.rewards {
                r.ensure_arity(m)?;
            }
        }
        Ok(Self {
            objective_names,
            examples,
        })
    }

    pub fn objective_names(&self) -> &[String] {
        &self.objective_names
    }

    /// The objective count M.
    pub fn objective_count(&self) -> usize {
        self.objective_names.len()
    }

    pub fn examples(&self) -> &[ScoredExample] {
        &self.examples
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    pub fn is_fully_scored(&self) -> bool {
        self.examples.iter().all(|e| e.rewards.is_some())
    }

    /// Fails with the first unscored id if any example lacks rewards.
    pub fn require_scored(&self) -> Result<()> {
        match self.examples.iter().find(|e| e.rewards.is_none()) {
            Some(e) => Err(Error::UnscoredExample { id: e.id.clone() }),
            None => Ok(()),
        }
    }

    /// A new dataset holding the examples at `indices`, in the given order.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            objective_names: self.objective_names.clone(),
            examples: indices.iter().map(|&i| self.examples[i].clone()).collect(),
        }
    }
}

/// Default labels `r1..rM` for datasets ingested without explicit names.
pub fn default_objective_names(m: usize) -> Vec<String> {
    (1..=m).map(|i| format!("r{i}")).collect()
}

/// Componentwise reward minima and maxima over a corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RewardBounds {
    pub min: RewardVector,
    pub max: RewardVector,
}

impl RewardBounds {
    pub fn new(min: RewardVector, max: RewardVector) -> Result<Self> {
        max.ensure_arity(min.len())?;
        for (lo, hi) in min.values().iter().zip(max.values()) {
            if lo > hi {
                return Err(Error::InvalidBounds(format!(
                    "min component {lo} exceeds max component {hi}"
                )));
            }
        }
        Ok(Self { min, max })
    }

    pub fn arity(&self) -> usize {
        self.min.len()
    }

    /// Componentwise range `max - min`.
    pub fn range(&self, i: usize) -> f64 {
        self.max.get(i) - self.min.get(i)
    }

    /// True if `v` lies in the axis-aligned box `[min, max]` up to tolerance.
    pub fn contains(&self, v: &RewardVector) -> bool {
        v.len() == self.arity()
            && v.values().iter().enumerate().all(|(i, &x)| {
                x >= self.min.get(i) - GEOM_TOLERANCE && x <= self.max.get(i) + GEOM_TOLERANCE
            })
    }
}

/// A ray in reward space from the ideal point through the compromise point,
/// encoding one user preference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreferenceDirection {
    /// The ideal reward vector `r^max`.
    pub origin: RewardVector,
    /// The compromise point `W`.
    pub compromise: RewardVector,
    /// The preference that generated this direction.
    pub preference: PreferenceVector,
}
