//! Fixtures shared by the benchmarks.

use reactmotion::motion::{make_synthetic_dataset, SyntheticSpec};
use reactmotion::{InteractionClip, TrainConfig};

/// Two-class synthetic clips with light noise.
pub fn clips(per_class: usize, length: usize) -> Vec<InteractionClip> {
    make_synthetic_dataset(
        &SyntheticSpec {
            classes: 2,
            clips_per_class: per_class,
            length,
            noise: 0.005,
        },
        0,
    )
    .expect("valid synthetic spec")
}

/// A small model that trains in milliseconds per batch.
pub fn small_config(epochs: usize) -> TrainConfig {
    TrainConfig {
        num_classes: 2,
        h_disc: 16,
        epochs,
        batch_size: 4,
        learning_rate: 0.002,
        ..TrainConfig::sbu().with_part_width(8)
    }
}
