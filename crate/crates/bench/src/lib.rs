//! Shared fixtures for the benchmarks.

use warpcurv::ModelParams;

/// Parameter sets covering decreasing (n = 3), isochronous (n = 4) and
/// increasing (n >= 5) period functions.
pub fn reference_params() -> Vec<(&'static str, ModelParams)> {
    [
        ("n3", 3, 2.0, 2.0),
        ("n4", 4, 3.0, 3.0),
        ("n5", 5, 2.0, 2.0),
        ("n8", 8, 2.0, 0.5),
    ]
    .into_iter()
    .map(|(name, n, r, rt)| (name, ModelParams::new(n, r, rt).unwrap()))
    .collect()
}

/// Energy at fraction `s` of the way from the center to the critical level.
pub fn energy(p: &ModelParams, s: f64) -> f64 {
    warpcurv::energy_at_fraction(p, s)
}
