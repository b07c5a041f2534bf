//! Deterministic inputs shared by the benchmarks.

use tenscalc::DenseTensor;

/// Smooth pseudo-random entries in `[-1, 1]`; no RNG so runs are comparable.
pub fn filled(shape: &[usize], salt: f64) -> DenseTensor {
    let mut k = 0.0;
    DenseTensor::from_fn(shape, |_| {
        k += 1.0;
        (k * 12.9898 + salt * 78.233).sin()
    })
}
