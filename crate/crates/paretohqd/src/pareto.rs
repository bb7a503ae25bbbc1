//! Dominance relation, layered non-dominated sorting, and construction of
//! the Pareto high-quality dataset.
//!
//! Layer 1 is the non-dominated front of the whole dataset; layer L+1 is the
//! non-dominated front of what remains after peeling layers 1..L. The
//! high-quality dataset is the union of the first L layers, with L minimal
//! such that the union reaches the requested size.

use std::collections::HashMap;
use std::io::Write;
use std::path::Path;

use crate::core::geometry::normalize;
use crate::core::types::{Dataset, RewardBounds, RewardVector};
use crate::error::{Error, Result};

/// True iff `a` weakly improves every component of `b` and strictly improves
/// at least one (maximization).
pub fn dominates(a: &RewardVector, b: &RewardVector) -> Result<bool> {
    b.ensure_arity(a.len())?;
    let mut strict = false;
    for (x, y) in a.values().iter().zip(b.values()) {
        if x < y {
            return Ok(false);
        }
        if x > y {
            strict = true;
        }
    }
    Ok(strict)
}

/// Partition of a dataset into successive non-dominated fronts.
#[derive(Debug, Clone, PartialEq)]
pub struct ParetoLayering {
    /// Example indices per layer; `layers[0]` is the Pareto-optimal front.
    pub layers: Vec<Vec<usize>>,
    /// Example id -> 1-based layer index.
    pub layer_of: HashMap<String, usize>,
}

impl ParetoLayering {
    pub fn layer_count(&self) -> usize {
        self.layers.len()
    }
}

/// Fast non-dominated sort: dominance counts plus dominated-lists, peeled
/// front by front. O(M n^2) worst case, deterministic.
pub fn layer_fronts(dataset: &Dataset) -> Result<ParetoLayering> {
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    dataset.require_scored()?;
    let n = dataset.len();
    let rewards: Vec<&RewardVector> = dataset
        .examples()
        .iter()
        .map(|e| e.rewards().expect("checked above"))
        .collect();

    let mut dominated_by_count = vec![0usize; n];
    let mut dominates_list: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for j in (i + 1)..n {
            if dominates(rewards[i], rewards[j])? {
                dominates_list[i].push(j);
                dominated_by_count[j] += 1;
            } else if dominates(rewards[j], rewards[i])? {
                dominates_list[j].push(i);
                dominated_by_count[i] += 1;
            }
        }
    }

    let mut current: Vec<usize> = (0..n).filter(|&i| dominated_by_count[i] == 0).collect();
    let mut layers: Vec<Vec<usize>> = Vec::new();
    let mut layer_of: HashMap<String, usize> = HashMap::with_capacity(n);
    while !current.is_empty() {
        let layer_idx = layers.len() + 1;
        for &i in &current {
            layer_of.insert(dataset.examples()[i].id.clone(), layer_idx);
        }
        let mut next: Vec<usize> = Vec::new();
        for &i in &current {
            for &j in &dominates_list[i] {
                dominated_by_count[j] -= 1;
                if dominated_by_count[j] == 0 {
                    next.push(j);
                }
            }
        }
        next.sort_unstable();
        layers.push(std::mem::replace(&mut current, next));
    }

    debug_assert_eq!(layers.iter().map(|l| l.len()).sum::<usize>(), n);
    Ok(ParetoLayering { layers, layer_of })
}

/// Result of carving the Pareto high-quality dataset out of a corpus.
#[derive(Debug, Clone)]
pub struct ParetoHq {
    /// Union of the first `layers_used` fronts, in original dataset order.
    pub dataset: Dataset,
    /// Number of fronts included.
    pub layers_used: usize,
    /// Set when the whole corpus was smaller than the requested size.
    pub exhausted: bool,
}

/// Takes the union of the first L layers, L minimal with cumulative size
/// >= `n_p`. If the corpus runs out first, returns everything with the
/// `exhausted` flag set. Original example order is preserved.
pub fn build_pareto_hq(dataset: &Dataset, n_p: usize) -> Result<ParetoHq> {
    if n_p == 0 {
        return Err(Error::InvalidArgument("N_p must be at least 1".into()));
    }
    let layering = layer_fronts(dataset)?;
    let mut included: Vec<usize> = Vec::new();
    let mut layers_used = 0;
    for layer in &layering.layers {
        included.extend_from_slice(layer);
        layers_used += 1;
        if included.len() >= n_p {
            break;
        }
    }
    let exhausted = included.len() < n_p;
    included.sort_unstable();
    Ok(ParetoHq {
        dataset: dataset.subset(&included),
        layers_used,
        exhausted,
    })
}

/// The size threshold N_p = ceil(N * k_t / 2) from the hyperparameter rule,
/// where k_t is the per-preference training-set size of the stage.
pub fn default_pool_threshold(preference_count: usize, k_t: usize) -> usize {
    (preference_count * k_t).div_ceil(2)
}

/// Counts of examples per M-dimensional normalized-reward bin.
#[derive(Debug, Clone, PartialEq)]
pub struct ImbalanceHistogram {
    pub bins_per_axis: usize,
    pub arity: usize,
    /// Flat row-major counts; see [`ImbalanceHistogram::flat_index`].
    pub counts: Vec<u64>,
    /// Bin edges shared by every axis in normalized space.
    pub edges: Vec<f64>,
}

impl ImbalanceHistogram {
    /// Row-major index of an M-tuple of per-axis bin indices.
    pub fn flat_index(&self, bin: &[usize]) -> usize {
        bin.iter().fold(0, |acc, &b| acc * self.bins_per_axis + b)
    }

    pub fn count(&self, bin: &[usize]) -> u64 {
        self.counts[self.flat_index(bin)]
    }
}

/// Histograms normalized rewards on a `bins_per_axis^M` grid. Values at the
/// upper boundary fall in the last bin.
pub fn imbalance_histogram(
    dataset: &Dataset,
    bins_per_axis: usize,
    bounds: &RewardBounds,
) -> Result<ImbalanceHistogram> {
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if bins_per_axis == 0 {
        return Err(Error::InvalidArgument("bins_per_axis must be >= 1".into()));
    }
    dataset.require_scored()?;
    let m = dataset.objective_count();
    let total = bins_per_axis.pow(m as u32);
    let mut counts = vec![0u64; total];
    for ex in dataset.examples() {
        let norm = normalize(ex.rewards()?, bounds)?;
        let mut idx = 0usize;
        for &x in norm.values() {
            let bin = ((x * bins_per_axis as f64).floor() as i64)
                .clamp(0, bins_per_axis as i64 - 1) as usize;
            idx = idx * bins_per_axis + bin;
        }
        counts[idx] += 1;
    }
    let edges = (0..=bins_per_axis)
        .map(|i| i as f64 / bins_per_axis as f64)
        .collect();
    Ok(ImbalanceHistogram {
        bins_per_axis,
        arity: m,
        counts,
        edges,
    })
}

/// Writes the layer assignment file: one `{"id":..., "layer":...}` per line.
pub fn write_layer_assignments(
    dataset: &Dataset,
    layering: &ParetoLayering,
    path: &Path,
) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let mut buf = Vec::new();
    for ex in dataset.examples() {
        let layer = layering.layer_of.get(&ex.id).copied().unwrap_or(0);
        let record = serde_json::json!({"id": ex.id, "layer": layer});
        serde_json::to_writer(&mut buf, &record)?;
        buf.push(b'\n');
    }
    std::fs::write(path, buf)?;
    Ok(())
}

/// Writes the histogram as a CSV grid. For M=2 the first row carries the
/// axis-1 bin edges and each data row is one axis-2 bin; for higher arity
/// each row is a bin-index tuple plus its count.
pub fn write_histogram_csv(hist: &ImbalanceHistogram, path: &Path) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let mut out = Vec::new();
    let edge_list = hist
        .edges
        .iter()
        .map(|e| e.to_string())
        .collect::<Vec<_>>()
        .join(" ");
    if hist.arity == 2 {
        writeln!(out, "bin_edges,{edge_list}")?;
        for b2 in 0..hist.bins_per_axis {
            let row: Vec<String> = (0..hist.bins_per_axis)
                .map(|b1| hist.count(&[b1, b2]).to_string())
                .collect();
            writeln!(out, "{},{}", hist.edges[b2], row.join(","))?;
        }
    } else {
        writeln!(out, "# bin edges per axis: {edge_list}")?;
        let header: Vec<String> = (1..=hist.arity).map(|i| format!("bin{i}")).collect();
        writeln!(out, "{},count", header.join(","))?;
        let mut bin = vec![0usize; hist.arity];
        loop {
            let cells: Vec<String> = bin.iter().map(|b| b.to_string()).collect();
            writeln!(out, "{},{}", cells.join(","), hist.count(&bin))?;
            // Odometer increment over the grid.
            let mut axis = hist.arity;
            loop {
                if axis == 0 {
                    std::fs::write(path, out)?;
                    return Ok(());
                }
                axis -= 1;
                bin[axis] += 1;
                if bin[axis] < hist.bins_per_axis {
                    break;
                }
                bin[axis] = 0;
            }
        }
    }
    std::fs::write(path, out)?;
    Ok(())
}
