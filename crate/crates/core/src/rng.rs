//! Deterministic seed derivation and named noise streams.
//!
//! Every random quantity in a run comes from a ChaCha8 stream whose seed is a
//! pure function of the experiment seed, a stream tag, and an index:
//!
//!   stream_seed = mix64(seed ^ mix64(tag * GOLDEN + index))
//!
//! where `mix64` is the splitmix64 finalizer. Agent `i` owns the
//! `(AGENT_TAG, i)` stream, goal resampling owns `(RESAMPLE_TAG, 0)`, and
//! trial `k` of a multi-trial experiment derives its own experiment seed from
//! `(TRIAL_TAG, k)`. Streams never share state, so trials are reproducible
//! and order-independent, and a trajectory is bitwise reproducible from its
//! seed.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// 64-bit fractional part of the golden ratio, used to spread tags.
const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

const AGENT_TAG: u64 = 1;
const RESAMPLE_TAG: u64 = 2;
const TRIAL_TAG: u64 = 3;

/// splitmix64 finalizer: a bijective 64-bit mix.
pub fn mix64(mut x: u64) -> u64 {
    x = x.wrapping_add(GOLDEN);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

fn derive(seed: u64, tag: u64, index: u64) -> u64 {
    mix64(seed ^ mix64(tag.wrapping_mul(GOLDEN).wrapping_add(index)))
}

/// Seed for trial `index` of an experiment.
pub fn trial_seed(seed: u64, index: u64) -> u64 {
    derive(seed, TRIAL_TAG, index)
}

/// The named streams one generation run consumes: one per agent plus one for
/// goal resampling.
pub struct StreamBundle {
    agents: Vec<ChaCha8Rng>,
    resample: ChaCha8Rng,
}

impl StreamBundle {
    pub fn new(seed: u64, agent_count: usize) -> StreamBundle {
        StreamBundle {
            agents: (0..agent_count)
                .map(|i| ChaCha8Rng::seed_from_u64(derive(seed, AGENT_TAG, i as u64)))
                .collect(),
            resample: ChaCha8Rng::seed_from_u64(derive(seed, RESAMPLE_TAG, 0)),
        }
    }

    pub fn agent_count(&self) -> usize {
        self.agents.len()
    }

    pub fn agent(&mut self, index: usize) -> &mut ChaCha8Rng {
        &mut self.agents[index]
    }

    pub fn resample(&mut self) -> &mut ChaCha8Rng {
        &mut self.resample
    }
}

/// One standard-normal pair, drawn x first, then y.
pub fn normal_pair(rng: &mut impl Rng) -> (f64, f64) {
    let x: f64 = rng.sample(StandardNormal);
    let y: f64 = rng.sample(StandardNormal);
    (x, y)
}

/// Samples an index from an unnormalized weight vector.
pub fn sample_index(rng: &mut impl Rng, weights: &[f64]) -> usize {
    let total: f64 = weights.iter().sum();
    let mut u = rng.gen::<f64>() * total;
    for (i, &w) in weights.iter().enumerate() {
        u -= w;
        if u <= 0.0 && w > 0.0 {
            return i;
        }
    }
    // Floating-point slack: fall back to the last positive weight.
    weights.iter().rposition(|&w| w > 0.0).unwrap_or(weights.len() - 1)
}
