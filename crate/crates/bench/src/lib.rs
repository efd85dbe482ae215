//! Fixtures shared by the criterion benches.

use furstenberg_core::{GeneratorMeasure, TrajectorySampler};

pub fn reference_sampler(seed: u64) -> TrajectorySampler {
    TrajectorySampler::new(GeneratorMeasure::reference(), seed, 1).expect("stream_count >= 1")
}
