//! Seeded synthetic label sets for tests, benchmarks and property checks.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{ClassCatalog, Language};
use crate::featurizer::{hash_feature, FeaturizerConfig};

/// Texts with their label vectors.
#[derive(Debug, Clone)]
pub struct SyntheticSet {
    pub catalog: ClassCatalog,
    pub texts: Vec<String>,
    pub labels: Vec<Vec<bool>>,
}

/// Parameters of the two-class imbalanced generator.
#[derive(Debug, Clone, PartialEq)]
pub struct ImbalancedSpec {
    pub rows: usize,
    /// Prior of the majority class.
    pub majority_rate: f64,
    /// Prior of the minority class.
    pub minority_rate: f64,
    /// Fraction of rows whose labels are redrawn from the priors,
    /// independently of their text.
    pub label_noise: f64,
    pub signal_tokens: usize,
    pub noise_vocabulary: usize,
    pub noise_tokens_per_row: usize,
}

impl Default for ImbalancedSpec {
    fn default() -> Self {
        ImbalancedSpec {
            rows: 700,
            majority_rate: 0.5,
            minority_rate: 0.05,
            label_noise: 0.1,
            signal_tokens: 2,
            noise_vocabulary: 200,
            noise_tokens_per_row: 6,
        }
    }
}

fn draw_labels(rng: &mut ChaCha8Rng, spec: &ImbalancedSpec) -> [bool; 2] {
    let minority = rng.random_bool(spec.minority_rate);
    let mut majority = rng.random_bool(spec.majority_rate);
    if !minority && !majority {
        majority = true;
    }
    [majority, minority]
}

/// Two classes (`majority`, `minority`). Each positive latent class
/// contributes `signal_tokens` marker words, so the clean labels are
/// linearly separable; a `label_noise` fraction of rows then gets fresh labels.
pub fn imbalanced(seed: u64, spec: &ImbalancedSpec) -> SyntheticSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise: Vec<String> = (0..spec.noise_vocabulary)
        .map(|i| format!("w{i}"))
        .collect();
    let mut texts = Vec::with_capacity(spec.rows);
    let mut labels = Vec::with_capacity(spec.rows);
    for _ in 0..spec.rows {
        let latent = draw_labels(&mut rng, spec);
        let mut words: Vec<String> = (0..spec.noise_tokens_per_row)
            .map(|_| {
                noise
                    .choose(&mut rng)
                    .expect("non-empty vocabulary")
                    .clone()
            })
            .collect();
        for (prefix, on) in [("maj", latent[0]), ("min", latent[1])] {
            if on {
                words.extend((0..spec.signal_tokens).map(|k| format!("{prefix}{k}")));
            }
        }
        words.shuffle_in_place(&mut rng);
        let observed = if rng.random_bool(spec.label_noise) {
            draw_labels(&mut rng, spec)
        } else {
            latent
        };
        texts.push(words.join(" "));
        labels.push(observed.to_vec());
    }
    SyntheticSet {
        catalog: ClassCatalog::custom(Language::Python, &["majority", "minority"]),
        texts,
        labels,
    }
}

trait ShuffleInPlace {
    fn shuffle_in_place(&mut self, rng: &mut ChaCha8Rng);
}

impl<T> ShuffleInPlace for Vec<T> {
    fn shuffle_in_place(&mut self, rng: &mut ChaCha8Rng) {
        use rand::seq::SliceRandom;
        self.shuffle(rng);
    }
}

/// Two classes with one marker word each, chosen to land in distinct hash
/// buckets under `featurizer`. Every row carries at least one label and the
/// label set is exactly recoverable from the text.
pub fn separable(seed: u64, rows: usize, featurizer: &FeaturizerConfig) -> SyntheticSet {
    let mut used = Vec::new();
    let mut markers = Vec::new();
    for i in 0.. {
        let word = format!("marker{i}");
        let (bucket, _) = hash_feature(&word, featurizer);
        if !used.contains(&bucket) {
            used.push(bucket);
            markers.push(word);
            if markers.len() == 2 {
                break;
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut texts = Vec::with_capacity(rows);
    let mut labels = Vec::with_capacity(rows);
    for _ in 0..rows {
        let y = match rng.random_range(0..3) {
            0 => [true, false],
            1 => [false, true],
            _ => [true, true],
        };
        let words: Vec<&str> = markers
            .iter()
            .zip(y)
            .filter(|(_, on)| *on)
            .map(|(w, _)| w.as_str())
            .collect();
        texts.push(words.join(" "));
        labels.push(y.to_vec());
    }
    SyntheticSet {
        catalog: ClassCatalog::custom(Language::Python, &["first", "second"]),
        texts,
        labels,
    }
}
