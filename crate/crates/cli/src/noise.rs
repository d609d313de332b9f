//! Seeded additive Gaussian noise.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Generator identity recorded in every manifest.
pub const PRNG_ID: &str = "rand_chacha 0.10 ChaCha8Rng::seed_from_u64 + rand_distr 0.6 StandardNormal";

/// Adds N(0, (sigma_rel·max|y|)²) to every sample of `channels`, drawing in
/// channel order from one stream seeded by `seed`. The maximum runs over all
/// channels. With `sigma_rel == 0` nothing is drawn and the data are untouched.
pub fn add_noise(channels: &mut [&mut [f64]], sigma_rel: f64, seed: u64) {
    if sigma_rel == 0.0 {
        return;
    }
    let peak = channels.iter().flat_map(|c| c.iter()).fold(0.0f64, |m, v| m.max(v.abs()));
    let sigma = sigma_rel * peak;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for c in channels.iter_mut() {
        for v in c.iter_mut() {
            let z: f64 = StandardNormal.sample(&mut rng);
            *v += sigma * z;
        }
    }
}
