//! Shared inputs for the benchmarks.

use couette_core::data::{DataClass, InitialData};
use couette_core::C64;

/// Separated data at `δ₀ = 0.5`, seed 1.
pub fn separated(alpha: f64) -> InitialData {
    InitialData::generate(DataClass::Separated { delta0: 0.5 }, alpha, 1)
}

/// Points spread over the four Airy evaluation regimes: series, Taylor
/// bridge, and both asymptotic sectors.
pub fn airy_points() -> Vec<C64> {
    [(0.5, 0.3), (-1.5, 1.0), (4.0, -3.0), (-6.0, 5.0), (15.0, 2.0), (-30.0, 0.5), (120.0, -80.0), (-400.0, 10.0)]
        .iter()
        .map(|&(r, i)| C64::new(r, i))
        .collect()
}
