//! Exact hypervolume indicator under the maximization convention.
//!
//! The hypervolume of a point set against a reference point is the Lebesgue
//! measure of the union of boxes spanned between the reference and each
//! point. Points that do not strictly dominate the reference span a
//! degenerate box and contribute nothing; they are clipped out rather than
//! rejected.

use crate::core::types::RewardVector;
use crate::error::{Error, Result};

/// Exact hypervolume: a line sweep for two objectives, recursive slicing by
/// exclusive contributions for three or more.
pub fn hypervolume(points: &[RewardVector], reference: &RewardVector) -> Result<f64> {
    let m = reference.len();
    for p in points {
        if p.len() != m {
            return Err(Error::ArityMismatch {
                expected: m,
                got: p.len(),
            });
        }
    }
    let kept: Vec<Vec<f64>> = points
        .iter()
        .filter(|p| p.values().iter().zip(reference.values()).all(|(x, r)| x > r))
        .map(|p| p.values().to_vec())
        .collect();
    if kept.is_empty() {
        return Ok(0.0);
    }
    Ok(if m == 2 {
        sweep_2d(&kept, reference.values())
    } else {
        exclusive_slicing(&kept, reference.values())
    })
}

/// 2-D sweep: walk points by descending first coordinate, accumulating the
/// strip each point adds above the best second coordinate seen so far.
pub(crate) fn sweep_2d(points: &[Vec<f64>], reference: &[f64]) -> f64 {
    let mut sorted: Vec<&Vec<f64>> = points.iter().collect();
    sorted.sort_by(|a, b| b[0].partial_cmp(&a[0]).unwrap().then(b[1].partial_cmp(&a[1]).unwrap()));
    let mut hv = 0.0;
    let mut best_y = reference[1];
    for p in sorted {
        if p[1] > best_y {
            hv += (p[0] - reference[0]) * (p[1] - best_y);
            best_y = p[1];
        }
    }
    hv
}

/// General-arity exact hypervolume: sum of each point's contribution
/// exclusive of the points after it, computed by recursive slicing.
pub(crate) fn exclusive_slicing(points: &[Vec<f64>], reference: &[f64]) -> f64 {
    match points.len() {
        0 => 0.0,
        1 => box_volume(&points[0], reference),
        _ => {
            let mut sorted = points.to_vec();
            // Descending first coordinate keeps the intersection chains short.
            sorted.sort_by(|a, b| b[0].partial_cmp(&a[0]).unwrap());
            (0..sorted.len())
                .map(|i| exclusive_volume(&sorted[i], &sorted[i + 1..], reference))
                .sum()
        }
    }
}

fn exclusive_volume(point: &[f64], rest: &[Vec<f64>], reference: &[f64]) -> f64 {
    let own = box_volume(point, reference);
    if rest.is_empty() {
        return own;
    }
    // Each box limited to the part it shares with `point`.
    let limited: Vec<Vec<f64>> = rest
        .iter()
        .map(|q| {
            point
                .iter()
                .zip(q.iter())
                .map(|(a, b)| a.min(*b))
                .collect()
        })
        .collect();
    // Drop limited boxes dominated by another limited box.
    let kept: Vec<Vec<f64>> = limited
        .iter()
        .enumerate()
        .filter(|(i, q)| {
            !limited.iter().enumerate().any(|(j, other)| {
                j != *i
                    && other.iter().zip(q.iter()).all(|(a, b)| a >= b)
                    && (other.iter().zip(q.iter()).any(|(a, b)| a > b) || j < *i)
            })
        })
        .map(|(_, q)| q.clone())
        .collect();
    own - exclusive_slicing(&kept, reference)
}

fn box_volume(point: &[f64], reference: &[f64]) -> f64 {
    point
        .iter()
        .zip(reference.iter())
        .map(|(p, r)| (p - r).max(0.0))
        .product()
}
