//! Deterministic two-objective toy worlds with known front geometry, plus a
//! toy generator/scorer pair so the whole pipeline can run without any
//! external model.
//!
//! Responses encode their reward point as text (`POINT x y` with six
//! decimals), which the toy scorer decodes and clips back to the world's
//! feasible region. Everything is seeded and replayable.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::core::types::{Dataset, RewardVector, ScoredExample};
use crate::error::{Error, Result};
use crate::pipeline::adapter::{
    GenerateRequest, GenerateResponse, GeneratorAdapter, ScoreRequest, ScoreResponse,
    ScorerAdapter,
};

/// Shape of the world's Pareto front over the first reward in [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrontShape {
    /// Quarter circle r1^2 + r2^2 = 1; every front point is some weight's
    /// scalarized optimum.
    ConvexCircle,
    /// r2 = 1 - sqrt(r1); interior front points are unreachable by linear
    /// scalarization.
    ConcaveSqrt,
    /// r2 = 1 - r1.
    Linear,
}

impl FrontShape {
    /// Height of the front curve at first-coordinate `x` in [0, 1].
    pub fn front(&self, x: f64) -> f64 {
        let x = x.clamp(0.0, 1.0);
        match self {
            FrontShape::ConvexCircle => (1.0 - x * x).max(0.0).sqrt(),
            FrontShape::ConcaveSqrt => 1.0 - x.sqrt(),
            FrontShape::Linear => 1.0 - x,
        }
    }

    /// True when `(x, y)` lies inside the feasible region
    /// `{0 <= x <= 1, 0 <= y <= front(x)}`.
    pub fn contains(&self, x: f64, y: f64) -> bool {
        (0.0..=1.0).contains(&x) && y >= 0.0 && y <= self.front(x)
    }

    /// Nearest point on the front curve, by coarse scan plus golden-section
    /// refinement.
    pub fn project_to_front(&self, x: f64, y: f64) -> (f64, f64) {
        let d2 = |t: f64| {
            let fy = self.front(t);
            (t - x) * (t - x) + (fy - y) * (fy - y)
        };
        let grid = 2048usize;
        let mut best_t = 0.0;
        let mut best = f64::INFINITY;
        for k in 0..=grid {
            let t = k as f64 / grid as f64;
            let v = d2(t);
            if v < best {
                best = v;
                best_t = t;
            }
        }
        let mut lo = (best_t - 1.0 / grid as f64).max(0.0);
        let mut hi = (best_t + 1.0 / grid as f64).min(1.0);
        let phi = 0.5 * (3.0 - 5f64.sqrt());
        for _ in 0..80 {
            let a = lo + phi * (hi - lo);
            let b = hi - phi * (hi - lo);
            if d2(a) < d2(b) {
                hi = b;
            } else {
                lo = a;
            }
        }
        let t = 0.5 * (lo + hi);
        (t, self.front(t))
    }
}

/// How interior mass is distributed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ImbalanceProfile {
    /// Grid positions along the front, noise pushing inward.
    Uniform,
    /// A minority near the front plus a heavy cluster of mid-score points.
    CenterHeavy,
}

/// Full description of a toy world.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorldSpec {
    pub shape: FrontShape,
    pub population: usize,
    /// Inward noise scale; zero keeps every point exactly on the front.
    pub noise: f64,
    pub imbalance: ImbalanceProfile,
    pub seed: u64,
}

impl WorldSpec {
    fn validate(&self) -> Result<()> {
        if self.population == 0 {
            return Err(Error::InvalidArgument("population must be >= 1".into()));
        }
        if !self.noise.is_finite() || self.noise < 0.0 {
            return Err(Error::InvalidArgument("noise must be finite and >= 0".into()));
        }
        Ok(())
    }
}

/// Fixed prefix for feature-point responses.
pub const FEATURE_PREFIX: &str = "POINT";

/// Encodes a feature point as response text, six decimal places.
pub fn encode_feature(x: f64, y: f64) -> String {
    format!("{FEATURE_PREFIX} {x:.6} {y:.6}")
}

/// Decodes a feature point from response text.
pub fn decode_feature(text: &str) -> Option<(f64, f64)> {
    let mut parts = text.split_whitespace();
    if parts.next()? != FEATURE_PREFIX {
        return None;
    }
    let x: f64 = parts.next()?.parse().ok()?;
    let y: f64 = parts.next()?.parse().ok()?;
    if parts.next().is_some() || !x.is_finite() || !y.is_finite() {
        return None;
    }
    Some((x, y))
}

fn round6(v: f64) -> f64 {
    (v * 1e6).round() / 1e6
}

/// Generates a scored two-objective dataset per the spec. Deterministic in
/// the seed; noise only ever moves points inward, never past the front.
pub fn generate_world(spec: &WorldSpec) -> Result<Dataset> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n = spec.population;
    let front_count = match spec.imbalance {
        ImbalanceProfile::Uniform => n,
        ImbalanceProfile::CenterHeavy => (n as f64 * 0.3).ceil() as usize,
    };

    let mut points: Vec<(f64, f64)> = Vec::with_capacity(n);
    for i in 0..front_count {
        let x = if front_count == 1 {
            0.5
        } else {
            i as f64 / (front_count - 1) as f64
        };
        let fy = spec.shape.front(x);
        let (dx, dy) = if spec.noise > 0.0 {
            let ex: f64 = rng.sample::<f64, _>(StandardNormal) * spec.noise;
            let ey: f64 = rng.sample::<f64, _>(StandardNormal) * spec.noise;
            (ex.abs(), ey.abs())
        } else {
            (0.0, 0.0)
        };
        points.push(((x - dx).max(0.0), (fy - dy).max(0.0)));
    }
    // Mid-score cluster for the imbalanced profile, clipped inside the
    // feasible region.
    let center_x = 0.4;
    let center_y = spec.shape.front(center_x) * 0.5;
    for _ in front_count..n {
        let gx: f64 = rng.sample::<f64, _>(StandardNormal) * 0.12 + center_x;
        let gy: f64 = rng.sample::<f64, _>(StandardNormal) * 0.12 + center_y;
        let x = gx.clamp(0.0, 1.0);
        let y = gy.clamp(0.0, spec.shape.front(x));
        points.push((x, y));
    }

    let examples = points
        .iter()
        .enumerate()
        .map(|(i, &(x, y))| {
            let (x, y) = (round6(x), round6(y));
            let id = format!("w{i:05}");
            ScoredExample {
                id: id.clone(),
                prompt: format!("synthetic prompt {id}"),
                response: encode_feature(x, y),
                rewards: Some(RewardVector::new(vec![x, y])?),
                extra: serde_json::Map::new(),
            }
        })
        .collect::<Result<Vec<_>>>()?;

    Dataset::new(vec!["r1".into(), "r2".into()], examples)
}

/// Generator adapter emitting feature points from a seeded Gaussian fitted
/// to a training set's reward distribution (mean and empirical covariance,
/// eigenvalues floored at 1e-4).
pub struct ToyGenerator {
    mean: [f64; 2],
    chol: [[f64; 2]; 2],
    rng: ChaCha8Rng,
    label: String,
}

impl ToyGenerator {
    pub fn new(training_set: &Dataset, seed: u64) -> Result<Self> {
        if training_set.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if training_set.objective_count() != 2 {
            return Err(Error::InvalidArgument(
                "toy generator requires a two-objective training set".into(),
            ));
        }
        training_set.require_scored()?;
        let n = training_set.len() as f64;
        let mut mean = [0.0f64; 2];
        for ex in training_set.examples() {
            let r = ex.rewards()?;
            mean[0] += r.get(0);
            mean[1] += r.get(1);
        }
        mean[0] /= n;
        mean[1] /= n;

        let mut cov = [[0.0f64; 2]; 2];
        for ex in training_set.examples() {
            let r = ex.rewards()?;
            let dx = r.get(0) - mean[0];
            let dy = r.get(1) - mean[1];
            cov[0][0] += dx * dx;
            cov[0][1] += dx * dy;
            cov[1][1] += dy * dy;
        }
        cov[0][0] /= n;
        cov[0][1] /= n;
        cov[1][1] /= n;
        cov[1][0] = cov[0][1];

        let floored = floor_eigenvalues(cov, 1e-4);
        let chol = cholesky_2x2(floored);
        Ok(Self {
            mean,
            chol,
            rng: ChaCha8Rng::seed_from_u64(seed),
            label: "builtin:toy-generator".into(),
        })
    }
}

/// Clamps the eigenvalues of a symmetric 2x2 matrix from below.
fn floor_eigenvalues(m: [[f64; 2]; 2], floor: f64) -> [[f64; 2]; 2] {
    let (a, b, c) = (m[0][0], m[0][1], m[1][1]);
    let half_trace = 0.5 * (a + c);
    let disc = (0.25 * (a - c) * (a - c) + b * b).sqrt();
    let l1 = (half_trace + disc).max(floor);
    let l2 = (half_trace - disc).max(floor);
    // Eigenvector for the larger eigenvalue.
    let (vx, vy) = if b.abs() > 1e-300 {
        (half_trace + disc - c, b)
    } else if a >= c {
        (1.0, 0.0)
    } else {
        (0.0, 1.0)
    };
    let norm = (vx * vx + vy * vy).sqrt();
    let (vx, vy) = if norm > 0.0 { (vx / norm, vy / norm) } else { (1.0, 0.0) };
    // Reconstruct R diag(l1, l2) R^T with the orthogonal complement (-vy, vx).
    [
        [l1 * vx * vx + l2 * vy * vy, (l1 - l2) * vx * vy],
        [(l1 - l2) * vx * vy, l1 * vy * vy + l2 * vx * vx],
    ]
}

fn cholesky_2x2(m: [[f64; 2]; 2]) -> [[f64; 2]; 2] {
    let l11 = m[0][0].sqrt();
    let l21 = m[0][1] / l11;
    let l22 = (m[1][1] - l21 * l21).max(0.0).sqrt();
    [[l11, 0.0], [l21, l22]]
}

impl GeneratorAdapter for ToyGenerator {
    fn generate_batch(&mut self, batch: &[GenerateRequest]) -> Result<Vec<GenerateResponse>> {
        Ok(batch
            .iter()
            .map(|req| {
                let z1: f64 = self.rng.sample(StandardNormal);
                let z2: f64 = self.rng.sample(StandardNormal);
                let x = self.mean[0] + self.chol[0][0] * z1;
                let y = self.mean[1] + self.chol[1][0] * z1 + self.chol[1][1] * z2;
                GenerateResponse {
                    id: req.id.clone(),
                    response: encode_feature(round6(x), round6(y)),
                }
            })
            .collect())
    }

    fn name(&self) -> &str {
        &self.label
    }
}

/// Scorer adapter decoding feature points and clipping them to the world's
/// feasible region: interior points pass through, points beyond the front
/// project onto it.
pub struct ToyScorer {
    shape: FrontShape,
    label: String,
}

impl ToyScorer {
    pub fn new(shape: FrontShape) -> Self {
        Self {
            shape,
            label: "builtin:toy-scorer".into(),
        }
    }

    fn clip(&self, x: f64, y: f64) -> (f64, f64) {
        let cx = x.clamp(0.0, 1.0);
        let cy = y.max(0.0);
        if cy <= self.shape.front(cx) && (0.0..=1.0).contains(&x) {
            (cx, cy)
        } else {
            let (px, py) = self.shape.project_to_front(cx, cy);
            (round6(px), round6(py))
        }
    }
}

impl ScorerAdapter for ToyScorer {
    fn score_batch(&mut self, batch: &[ScoreRequest]) -> Result<Vec<ScoreResponse>> {
        batch
            .iter()
            .map(|req| {
                let (x, y) = decode_feature(&req.response)
                    .ok_or_else(|| Error::UndecodableResponse { id: req.id.clone() })?;
                let (x, y) = self.clip(x, y);
                Ok(ScoreResponse {
                    id: req.id.clone(),
                    rewards: vec![x, y],
                })
            })
            .collect()
    }

    fn name(&self) -> &str {
        &self.label
    }
}
