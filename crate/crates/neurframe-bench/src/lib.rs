//! Shared fixtures for the criterion benchmarks.

use nalgebra::Vector3;
use neurframe_core::Frame;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Deterministic batch of random frames for benchmark inputs.
pub fn random_frames(n: usize, seed: u64) -> Vec<Frame> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| Frame::random(&mut rng)).collect()
}

/// Deterministic batch of unit directions.
pub fn random_directions(n: usize, seed: u64) -> Vec<Vector3<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| Frame::random(&mut rng).axis(0)).collect()
}
