//! Domain types, reward-space geometry, and dataset ingestion.

pub mod geometry;
pub mod io;
pub mod types;

pub use geometry::{build_direction, compromise_point, distance_to_direction, normalize};
pub use io::{compute_bounds, ingest_dataset, read_dataset_file, write_dataset, write_dataset_file};
pub use types::{
    default_objective_names, Dataset, PreferenceDirection, PreferenceVector, RewardBounds,
    RewardVector, ScoredExample, GEOM_TOLERANCE,
};
