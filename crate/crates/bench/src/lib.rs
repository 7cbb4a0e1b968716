//! Fixtures shared by the benchmarks.

use tpsk_core::{ChannelModel, EnsembleParams, QuadratureSpec};

/// A spread of valid ensembles: skewed, near-uniform, and a boundary slice.
pub fn ensembles() -> Vec<EnsembleParams> {
    [
        ([0.5, 0.3, 0.2], 0.6, 0.9),
        ([0.34, 0.33, 0.33], 0.3, 0.2),
        ([0.0, 0.7, 0.3], 0.9, 1.4),
        ([0.1, 0.1, 0.8], 0.95, 0.05),
    ]
    .into_iter()
    .map(|(p, z, theta)| EnsembleParams::new(p, z, theta).expect("valid fixture"))
    .collect()
}

/// Pure-loss and noisy channels at typical amplitudes.
pub fn channels() -> Vec<(&'static str, ChannelModel)> {
    vec![
        ("pure_loss_0.5", ChannelModel::pure_loss(0.5, 0.79).expect("valid fixture")),
        ("noisy_0.8", ChannelModel::new(0.8, 0.01, 0.87, 0.0).expect("valid fixture")),
        ("mixed_0.5", ChannelModel::new(0.5, 0.01, 0.7, 0.001).expect("valid fixture")),
    ]
}

pub fn coarse() -> QuadratureSpec {
    QuadratureSpec::new(64, 64, 8.0, 1e-9).expect("valid fixture")
}
