//! Fixtures shared by the benchmarks.

use commentweight_core::synthetic::{imbalanced, ImbalancedSpec};
use commentweight_core::{FeaturizedRows, FeaturizerConfig};

/// Synthetic two-class corpus of `rows` comments, already hashed.
pub fn corpus(rows: usize, featurizer: &FeaturizerConfig) -> FeaturizedRows {
    let set = imbalanced(
        17,
        &ImbalancedSpec {
            rows,
            noise_tokens_per_row: 24,
            ..ImbalancedSpec::default()
        },
    );
    FeaturizedRows::from_texts(set.catalog, &set.texts, set.labels, featurizer)
        .expect("synthetic corpus featurizes")
}

pub fn texts(rows: usize) -> Vec<String> {
    imbalanced(
        17,
        &ImbalancedSpec {
            rows,
            noise_tokens_per_row: 24,
            ..ImbalancedSpec::default()
        },
    )
    .texts
}
