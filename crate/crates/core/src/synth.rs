//! Seeded synthetic data: Zipf-distributed token streams with a known
//! generating distribution, used by tests and benchmarks.

use rand::distr::{weighted::WeightedIndex, Distribution};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// A finite Zipf law over `types` word types: `p_i ∝ i^(-exponent)`.
#[derive(Debug, Clone)]
pub struct ZipfCorpus {
    probabilities: Vec<f64>,
}

impl ZipfCorpus {
    pub fn new(types: usize, exponent: f64) -> Self {
        assert!(types > 0, "a Zipf law needs at least one type");
        let weights: Vec<f64> = (1..=types).map(|i| (i as f64).powf(-exponent)).collect();
        let norm: f64 = weights.iter().sum();
        ZipfCorpus { probabilities: weights.into_iter().map(|w| w / norm).collect() }
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    /// Hill number of the generating distribution itself.
    pub fn true_diversity(&self, k: f64) -> f64 {
        if (k - 1.0).abs() < crate::diversity::SHANNON_EPSILON {
            let h: f64 = self.probabilities.iter().map(|p| -p * p.ln()).sum();
            h.exp()
        } else {
            let s: f64 = self.probabilities.iter().map(|p| p.powf(k)).sum();
            s.powf(1.0 / (1.0 - k))
        }
    }

    /// `len` word forms `w1, w2, ...` drawn independently with a ChaCha8 stream.
    pub fn sample(&self, len: usize, seed: u64) -> Vec<String> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dist = WeightedIndex::new(&self.probabilities).expect("weights are positive");
        (0..len).map(|_| format!("w{}", dist.sample(&mut rng) + 1)).collect()
    }

    /// The sampled tokens joined into space-separated text.
    pub fn sample_text(&self, len: usize, seed: u64) -> String {
        self.sample(len, seed).join(" ")
    }
}
