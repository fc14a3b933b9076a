//! Benchmark fixtures shared by the criterion targets.

use recoflow_core::measure::random_probability;
use recoflow_core::{Measure, ProductSpace};

/// A seeded probability measure on `sizes`.
pub fn fixture(sizes: &[usize], seed: u64) -> Measure {
    random_probability(&ProductSpace::new(sizes.to_vec()).expect("valid sizes"), seed)
}
