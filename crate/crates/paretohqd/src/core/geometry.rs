//! Reward-space geometry: min-max normalization, compromise points,
//! preference directions, and point-to-ray distances.
//!
//! A preference direction is the ray starting at the ideal point `r^max`
//! and passing through the compromise point
//! `W = r^min + w ⊙ (r^max - r^min)`. Proximity to that ray is what ranks
//! candidate training data for a preference.

use crate::core::types::{
    PreferenceDirection, PreferenceVector, RewardBounds, RewardVector,
};
use crate::error::{Error, Result};

/// Maps each component through `(v_i - min_i) / (max_i - min_i)`.
///
/// A degenerate dimension (`max_i == min_i`) maps to 0.5 so it carries no
/// information and contributes nothing to direction geometry.
pub fn normalize(v: &RewardVector, bounds: &RewardBounds) -> Result<RewardVector> {
    v.ensure_arity(bounds.arity())?;
    let values = v
        .values()
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let range = bounds.range(i);
            if range == 0.0 {
                0.5
            } else {
                (x - bounds.min.get(i)) / range
            }
        })
        .collect();
    RewardVector::new(values)
}

/// The compromise point `W = r^min + w ⊙ (r^max - r^min)`.
pub fn compromise_point(w: &PreferenceVector, bounds: &RewardBounds) -> Result<RewardVector> {
    if w.len() != bounds.arity() {
        return Err(Error::ArityMismatch {
            expected: bounds.arity(),
            got: w.len(),
        });
    }
    let values = (0..bounds.arity())
        .map(|i| bounds.min.get(i) + w.get(i) * bounds.range(i))
        .collect();
    RewardVector::new(values)
}

/// Builds the preference direction for `w`: the ray from `r^max` through
/// the compromise point.
pub fn build_direction(w: &PreferenceVector, bounds: &RewardBounds) -> Result<PreferenceDirection> {
    let compromise = compromise_point(w, bounds)?;
    Ok(PreferenceDirection {
        origin: bounds.max.clone(),
        compromise,
        preference: w.clone(),
    })
}

/// Euclidean distance from `v` to the ray
/// `{origin + t (compromise - origin), t >= 0}`.
///
/// With `normalized` set, `v`, the origin and the compromise point are all
/// mapped through [`normalize`] before any geometry. The projection
/// parameter is clamped at zero, so points whose perpendicular foot falls
/// behind the origin take their distance to the origin itself. A zero
/// direction vector degenerates to plain point distance.
pub fn distance_to_direction(
    v: &RewardVector,
    direction: &PreferenceDirection,
    bounds: &RewardBounds,
    normalized: bool,
) -> Result<f64> {
    v.ensure_arity(bounds.arity())?;
    direction.origin.ensure_arity(bounds.arity())?;
    direction.compromise.ensure_arity(bounds.arity())?;

    let (point, origin, compromise) = if normalized {
        (
            normalize(v, bounds)?,
            normalize(&direction.origin, bounds)?,
            normalize(&direction.compromise, bounds)?,
        )
    } else {
        (
            v.clone(),
            direction.origin.clone(),
            direction.compromise.clone(),
        )
    };

    Ok(point_to_ray_distance(
        point.values(),
        origin.values(),
        compromise.values(),
    ))
}

/// Distance from `p` to the ray from `origin` through `through`.
pub(crate) fn point_to_ray_distance(p: &[f64], origin: &[f64], through: &[f64]) -> f64 {
    let dir: Vec<f64> = through
        .iter()
        .zip(origin.iter())
        .map(|(c, o)| c - o)
        .collect();
    let rel: Vec<f64> = p.iter().zip(origin.iter()).map(|(x, o)| x - o).collect();
    let dir_sq: f64 = dir.iter().map(|d| d * d).sum();
    if dir_sq == 0.0 {
        return rel.iter().map(|x| x * x).sum::<f64>().sqrt();
    }
    let t = (rel.iter().zip(dir.iter()).map(|(r, d)| r * d).sum::<f64>() / dir_sq).max(0.0);
    rel.iter()
        .zip(dir.iter())
        .map(|(r, d)| {
            let diff = r - t * d;
            diff * diff
        })
        .sum::<f64>()
        .sqrt()
}
