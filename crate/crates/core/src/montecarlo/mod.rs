//! Seeded sampling of counts, first-arrival times, classical paths and
//! compound sums, with moment summaries and goodness-of-fit helpers.

mod rng;
mod sampling;
mod stats;
mod summary;

pub use rng::{RngSpec, SimRng};
pub use sampling::{
    sample_compound, sample_count, sample_first_arrival, simulate_path_classical, CompoundSampler,
    CountSampler, FirstArrival, FirstArrivalSampler, COUNT_TAIL_LIMIT, FIRST_ARRIVAL_MAX_TIME,
    FIRST_ARRIVAL_REL_TOL,
};
pub use stats::{
    chi_square_counts, ks_critical_value, ks_distance_at, parallel_draws, summarize_batched,
    BatchedSummary, ChiSquareTest, BATCH_SIZE,
};
pub use summary::{summarize, MomentAccumulator, SampleSummary};

#[cfg(test)]
mod tests;
