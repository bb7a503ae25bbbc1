//! Per-preference training-set extraction for both stages, plus the
//! linear-scalarization baselines.
//!
//! Stage selection takes the k pool examples closest to a preference
//! direction; the baseline ranks by the scalar product of weights and
//! rewards instead. Ties always break by original dataset index so runs
//! are reproducible.

use std::io::Write;
use std::path::Path;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::core::geometry::{distance_to_direction, normalize};
use crate::core::types::{Dataset, PreferenceDirection, PreferenceVector, RewardBounds};
use crate::error::{Error, Result};

/// Outcome of one per-preference selection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    pub preference: PreferenceVector,
    /// Chosen example ids, best first.
    pub chosen: Vec<String>,
    /// Distances (stages, non-decreasing) or scalar values (baseline,
    /// non-increasing), aligned with `chosen`.
    pub distances: Vec<f64>,
    /// Which pool the examples were drawn from.
    pub source_label: String,
}

impl SelectionResult {
    pub fn len(&self) -> usize {
        self.chosen.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chosen.is_empty()
    }
}

/// The k pool examples closest to the preference direction, ties broken by
/// (distance, original index) ascending.
pub fn select_stage1(
    pool: &Dataset,
    direction: &PreferenceDirection,
    k: usize,
    bounds: &RewardBounds,
    normalized: bool,
    source_label: &str,
) -> Result<SelectionResult> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    if pool.is_empty() {
        return Err(Error::EmptyDataset);
    }
    pool.require_scored()?;

    let mut ranked: Vec<(f64, usize)> = pool
        .examples()
        .iter()
        .enumerate()
        .map(|(i, ex)| {
            distance_to_direction(ex.rewards()?, direction, bounds, normalized).map(|d| (d, i))
        })
        .collect::<Result<_>>()?;
    ranked.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    ranked.truncate(k.min(pool.len()));

    Ok(SelectionResult {
        preference: direction.preference.clone(),
        chosen: ranked
            .iter()
            .map(|&(_, i)| pool.examples()[i].id.clone())
            .collect(),
        distances: ranked.iter().map(|&(d, _)| d).collect(),
        source_label: source_label.to_string(),
    })
}

/// Stage-2 selection: identical contract with a halved request,
/// ceil(k / 2) examples.
pub fn select_stage2(
    pool: &Dataset,
    direction: &PreferenceDirection,
    k: usize,
    bounds: &RewardBounds,
    normalized: bool,
    source_label: &str,
) -> Result<SelectionResult> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    select_stage1(pool, direction, k.div_ceil(2), bounds, normalized, source_label)
}

/// For each target in {e_1, ..., e_M, uniform}, the index of the nearest
/// preference by Euclidean distance. Ties break to the lowest index; one
/// index may serve several targets.
pub fn representative_preferences(all: &[PreferenceVector], m: usize) -> Result<Vec<usize>> {
    if all.is_empty() {
        return Err(Error::InvalidArgument(
            "at least one preference required".into(),
        ));
    }
    let mut targets: Vec<Vec<f64>> = (0..m)
        .map(|j| {
            let mut t = vec![0.0; m];
            t[j] = 1.0;
            t
        })
        .collect();
    targets.push(vec![1.0 / m as f64; m]);

    Ok(targets
        .iter()
        .map(|target| {
            all.iter()
                .enumerate()
                .map(|(i, w)| (w.distance_to_target(target), i))
                .min_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)))
                .expect("nonempty")
                .1
        })
        .collect())
}

/// Tolerance used when comparing preference components for pool matching.
const POOL_MATCH_TOLERANCE: f64 = 1e-12;

/// Which augmentation pool a preference draws from: 0-based index into the
/// M+1 pools, where index M is the unbiased pool.
///
/// All components equal -> unbiased pool. A unique maximum component j ->
/// pool j. A partial tie among maxima -> one of the tied pools chosen
/// uniformly by the seeded generator.
pub fn match_stage2_pool(w: &PreferenceVector, seed: u64) -> usize {
    let m = w.len();
    let max = w
        .weights()
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    let tied: Vec<usize> = (0..m)
        .filter(|&i| (w.get(i) - max).abs() <= POOL_MATCH_TOLERANCE)
        .collect();
    if tied.len() == m {
        return m; // unbiased pool
    }
    if tied.len() == 1 {
        return tied[0];
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    *tied.choose(&mut rng).expect("tied is nonempty")
}

/// Human-readable label for a stage-2 pool index returned by
/// [`match_stage2_pool`].
pub fn pool_label(pool_index: usize, objective_names: &[String]) -> String {
    if pool_index < objective_names.len() {
        format!("objective:{}", objective_names[pool_index])
    } else {
        "unbiased".to_string()
    }
}

/// Linear-scalarization baseline: the k examples maximizing the dot product
/// of weights and (optionally normalized) rewards, ties by original index.
/// `distances` carries the scalar values, non-increasing.
pub fn select_ls_topk(
    pool: &Dataset,
    w: &PreferenceVector,
    k: usize,
    bounds: &RewardBounds,
    normalized: bool,
    source_label: &str,
) -> Result<SelectionResult> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    if pool.is_empty() {
        return Err(Error::EmptyDataset);
    }
    pool.require_scored()?;

    let mut ranked: Vec<(f64, usize)> = pool
        .examples()
        .iter()
        .enumerate()
        .map(|(i, ex)| {
            let r = ex.rewards()?;
            let r = if normalized {
                normalize(r, bounds)?
            } else {
                r.clone()
            };
            let scalar: f64 = w
                .weights()
                .iter()
                .zip(r.values())
                .map(|(wi, ri)| wi * ri)
                .sum();
            Ok((scalar, i))
        })
        .collect::<Result<_>>()?;
    ranked.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
    ranked.truncate(k.min(pool.len()));

    Ok(SelectionResult {
        preference: w.clone(),
        chosen: ranked
            .iter()
            .map(|&(_, i)| pool.examples()[i].id.clone())
            .collect(),
        distances: ranked.iter().map(|&(s, _)| s).collect(),
        source_label: source_label.to_string(),
    })
}

/// Sidecar manifest describing where a selection came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionManifest {
    pub preference: PreferenceVector,
    pub stage: u8,
    pub pool: String,
    pub seed: u64,
    pub requested: usize,
    pub selected: usize,
}

/// Writes the `{"id":..., "distance":...}` lines and the sidecar manifest.
pub fn write_selection(
    result: &SelectionResult,
    manifest: &SelectionManifest,
    lines_path: &Path,
    manifest_path: &Path,
) -> Result<()> {
    if let Some(parent) = lines_path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let mut buf = Vec::new();
    for (id, d) in result.chosen.iter().zip(&result.distances) {
        let record = serde_json::json!({"id": id, "distance": d});
        serde_json::to_writer(&mut buf, &record)?;
        buf.push(b'\n');
    }
    std::fs::write(lines_path, buf)?;

    let mut mbuf = Vec::new();
    serde_json::to_writer_pretty(&mut mbuf, manifest)?;
    mbuf.write_all(b"\n")?;
    std::fs::write(manifest_path, mbuf)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core::geometry::build_direction;
    use crate::core::io::compute_bounds;
    use crate::core::types::{default_objective_names, RewardVector, ScoredExample};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn rv(values: &[f64]) -> RewardVector {
        RewardVector::new(values.to_vec()).unwrap()
    }

    fn pv(weights: &[f64]) -> PreferenceVector {
        PreferenceVector::new(weights.to_vec()).unwrap()
    }

    fn dataset_from(points: &[Vec<f64>]) -> Dataset {
        let m = points.first().map(|p| p.len()).unwrap_or(2);
        let examples = points
            .iter()
            .enumerate()
            .map(|(i, p)| ScoredExample::new(format!("e{i}"), "", "").with_rewards(rv(p)))
            .collect();
        Dataset::new(default_objective_names(m), examples).unwrap()
    }

    fn unit_bounds() -> RewardBounds {
        RewardBounds::new(rv(&[0.0, 0.0]), rv(&[1.0, 1.0])).unwrap()
    }

    #[test]
    fn select_stage1_exhausts_small_pool() {
        let ds = dataset_from(&[vec![0.1, 0.2], vec![0.3, 0.4]]);
        let b = unit_bounds();
        let dir = build_direction(&pv(&[0.5, 0.5]), &b).unwrap();
        let sel = select_stage1(&ds, &dir, 10, &b, true, "pool").unwrap();
        assert_eq!(sel.len(), 2);
    }

    #[test]
    fn select_stage1_point_on_ray_wins() {
        let ds = dataset_from(&[vec![0.9, 0.1], vec![0.5, 0.5], vec![0.1, 0.9]]);
        let b = unit_bounds();
        let dir = build_direction(&pv(&[0.5, 0.5]), &b).unwrap();
        let sel = select_stage1(&ds, &dir, 1, &b, true, "pool").unwrap();
        assert_eq!(sel.chosen, vec!["e1"]);
        assert!(sel.distances[0] < 1e-9);
    }

    #[test]
    fn select_stage1_matches_sort_all_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let points: Vec<Vec<f64>> = (0..500)
            .map(|_| vec![rng.random_range(0.0..1.0), rng.random_range(0.0..1.0)])
            .collect();
        let ds = dataset_from(&points);
        let b = compute_bounds(&ds).unwrap();
        let dir = build_direction(&pv(&[0.3, 0.7]), &b).unwrap();
        let sel = select_stage1(&ds, &dir, 100, &b, true, "pool").unwrap();

        // Oracle: rank the full pool by (distance, index) and take the head.
        let mut all: Vec<(f64, usize)> = ds
            .examples()
            .iter()
            .enumerate()
            .map(|(i, ex)| {
                (
                    distance_to_direction(ex.rewards().unwrap(), &dir, &b, true).unwrap(),
                    i,
                )
            })
            .collect();
        all.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
        let oracle_ids: Vec<String> = all[..100]
            .iter()
            .map(|&(_, i)| ds.examples()[i].id.clone())
            .collect();
        assert_eq!(sel.chosen, oracle_ids);

        let mut sorted = sel.distances.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(sel.distances, sorted, "distances non-decreasing");
    }

    #[test]
    fn select_stage2_is_half_of_stage1() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let points: Vec<Vec<f64>> = (0..60)
            .map(|_| vec![rng.random_range(0.0..1.0), rng.random_range(0.0..1.0)])
            .collect();
        let ds = dataset_from(&points);
        let b = compute_bounds(&ds).unwrap();
        let dir = build_direction(&pv(&[0.2, 0.8]), &b).unwrap();
        let s2 = select_stage2(&ds, &dir, 100, &b, true, "pool").unwrap();
        assert_eq!(s2.len(), 50);
        let s1 = select_stage1(&ds, &dir, 50, &b, true, "pool").unwrap();
        assert_eq!(s2, s1);

        // Odd k rounds up.
        let s2 = select_stage2(&ds, &dir, 7, &b, true, "pool").unwrap();
        assert_eq!(s2.len(), 4);

        // Small pool exhausts.
        let small = dataset_from(&points[..10]);
        let s2 = select_stage2(&small, &dir, 100, &b, true, "pool").unwrap();
        assert_eq!(s2.len(), 10);
    }

    #[test]
    fn representative_preferences_on_paper_grid() {
        // The 11-point grid [0.0,1.0], [0.1,0.9], ..., [1.0,0.0].
        let grid: Vec<PreferenceVector> = (0..=10)
            .map(|i| pv(&[i as f64 / 10.0, 1.0 - i as f64 / 10.0]))
            .collect();
        let reps = representative_preferences(&grid, 2).unwrap();
        assert_eq!(reps.len(), 3);
        assert_eq!(grid[reps[0]].weights(), &[1.0, 0.0]);
        assert_eq!(grid[reps[1]].weights(), &[0.0, 1.0]);
        assert_eq!(grid[reps[2]].weights(), &[0.5, 0.5]);
    }

    #[test]
    fn representative_preferences_single_serves_all() {
        let reps = representative_preferences(&[pv(&[0.4, 0.6])], 2).unwrap();
        assert_eq!(reps, vec![0, 0, 0]);
    }

    #[test]
    fn representative_preferences_matches_scan_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..20 {
            let prefs: Vec<PreferenceVector> = (0..7)
                .map(|_| {
                    let raw: Vec<f64> = (0..3).map(|_| rng.random_range(0.01..1.0)).collect();
                    let sum: f64 = raw.iter().sum();
                    pv(&raw.iter().map(|x| x / sum).collect::<Vec<_>>())
                })
                .collect();
            let reps = representative_preferences(&prefs, 3).unwrap();

            let targets = [
                vec![1.0, 0.0, 0.0],
                vec![0.0, 1.0, 0.0],
                vec![0.0, 0.0, 1.0],
                vec![1.0 / 3.0; 3],
            ];
            for (target, &rep) in targets.iter().zip(&reps) {
                let best = prefs
                    .iter()
                    .enumerate()
                    .min_by(|(i, a), (j, b)| {
                        a.distance_to_target(target)
                            .partial_cmp(&b.distance_to_target(target))
                            .unwrap()
                            .then(i.cmp(j))
                    })
                    .unwrap()
                    .0;
                assert_eq!(rep, best);
            }
        }
    }

    #[test]
    fn match_pool_unique_maximum() {
        assert_eq!(match_stage2_pool(&pv(&[0.7, 0.3]), 0), 0);
        assert_eq!(match_stage2_pool(&pv(&[0.2, 0.8]), 0), 1);
    }

    #[test]
    fn match_pool_full_tie_is_unbiased() {
        assert_eq!(match_stage2_pool(&pv(&[0.5, 0.5]), 0), 2);
        assert_eq!(match_stage2_pool(&pv(&[1.0 / 3.0; 3]), 9), 3);
    }

    #[test]
    fn match_pool_partial_tie_splits_evenly_over_seeds() {
        let w = pv(&[0.4, 0.4, 0.2]);
        let mut counts = [0usize; 2];
        for seed in 0..1000u64 {
            let pool = match_stage2_pool(&w, seed);
            assert!(pool == 0 || pool == 1, "tied pools only");
            counts[pool] += 1;
        }
        for c in counts {
            let freq = c as f64 / 1000.0;
            assert!((freq - 0.5).abs() < 0.05, "freq {freq}");
        }
        // Determinism per seed.
        assert_eq!(match_stage2_pool(&w, 123), match_stage2_pool(&w, 123));
    }

    #[test]
    fn ls_topk_axis_preference() {
        let ds = dataset_from(&[vec![0.9, 0.1], vec![0.1, 0.9]]);
        let b = unit_bounds();
        let sel = select_ls_topk(&ds, &pv(&[1.0, 0.0]), 1, &b, true, "pool").unwrap();
        assert_eq!(sel.chosen, vec!["e0"]);
    }

    #[test]
    fn ls_topk_ties_resolved_by_index() {
        // Both points sit on the same scalar contour for the uniform
        // preference; index order decides.
        let ds = dataset_from(&[vec![0.8, 0.2], vec![0.2, 0.8]]);
        let b = unit_bounds();
        let sel = select_ls_topk(&ds, &pv(&[0.5, 0.5]), 1, &b, true, "pool").unwrap();
        assert_eq!(sel.chosen, vec!["e0"]);

        // Swapping the coordinates of both tied points changes nothing.
        let swapped = dataset_from(&[vec![0.2, 0.8], vec![0.8, 0.2]]);
        let sel2 = select_ls_topk(&swapped, &pv(&[0.5, 0.5]), 1, &b, true, "pool").unwrap();
        assert_eq!(sel2.chosen, vec!["e0"]);
    }

    #[test]
    fn ls_topk_matches_sort_all_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let points: Vec<Vec<f64>> = (0..500)
            .map(|_| vec![rng.random_range(0.0..1.0), rng.random_range(0.0..1.0)])
            .collect();
        let ds = dataset_from(&points);
        let b = compute_bounds(&ds).unwrap();
        let w = pv(&[0.3, 0.7]);
        let sel = select_ls_topk(&ds, &w, 100, &b, true, "pool").unwrap();

        let mut all: Vec<(f64, usize)> = ds
            .examples()
            .iter()
            .enumerate()
            .map(|(i, ex)| {
                let r = normalize(ex.rewards().unwrap(), &b).unwrap();
                let s: f64 = w.weights().iter().zip(r.values()).map(|(a, b)| a * b).sum();
                (s, i)
            })
            .collect();
        all.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
        let oracle_ids: Vec<String> = all[..100]
            .iter()
            .map(|&(_, i)| ds.examples()[i].id.clone())
            .collect();
        assert_eq!(sel.chosen, oracle_ids);

        let mut sorted = sel.distances.clone();
        sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
        assert_eq!(sel.distances, sorted, "scalars non-increasing");
    }

    #[test]
    fn direction_distance_separates_contour_ties() {
        // Two points on the uniform-preference contour, asymmetric about the
        // diagonal ray: the baseline cannot tell them apart, the direction
        // distance can.
        let b = unit_bounds();
        let a = vec![0.9, 0.1];
        let c = vec![0.3, 0.7];
        let w = pv(&[0.5, 0.5]);
        let dir = build_direction(&w, &b).unwrap();
        let da = distance_to_direction(&rv(&a), &dir, &b, true).unwrap();
        let dc = distance_to_direction(&rv(&c), &dir, &b, true).unwrap();
        assert!((da - dc).abs() > 1e-9, "distances must differ: {da} vs {dc}");

        let ds = dataset_from(&[a, c]);
        let ls = select_ls_topk(&ds, &w, 2, &b, true, "pool").unwrap();
        assert!((ls.distances[0] - ls.distances[1]).abs() < 1e-12, "scalar tie");
    }

    #[test]
    fn selection_export_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let lines = dir.path().join("sel.jsonl");
        let manifest_path = dir.path().join("sel.manifest.json");
        let result = SelectionResult {
            preference: pv(&[0.5, 0.5]),
            chosen: vec!["a".into(), "b".into()],
            distances: vec![0.1, 0.2],
            source_label: "pareto".into(),
        };
        let manifest = SelectionManifest {
            preference: pv(&[0.5, 0.5]),
            stage: 1,
            pool: "pareto".into(),
            seed: 42,
            requested: 2,
            selected: 2,
        };
        write_selection(&result, &manifest, &lines, &manifest_path).unwrap();
        let text = std::fs::read_to_string(&lines).unwrap();
        assert_eq!(text.lines().count(), 2);
        let parsed: SelectionManifest =
            serde_json::from_str(&std::fs::read_to_string(&manifest_path).unwrap()).unwrap();
        assert_eq!(parsed, manifest);
    }
}
