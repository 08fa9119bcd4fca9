use anyhow::{Context, Result};
use commentweight_core::weighting::static_weights;
use commentweight_core::{compute_class_stats, ew_weights, Strategy};
use serde::Serialize;

use super::{emit, load_rows, parse_stats_source, parse_strategy, select_split, to_json};
use crate::config::FileConfig;
use crate::manifest::RunManifest;
use crate::{SplitChoice, StatsSource, WeightsArgs};

#[derive(Serialize)]
struct ClassWeight {
    class: String,
    frequency: f64,
    weight: f64,
}

#[derive(Serialize)]
struct WeightsReport {
    language: String,
    strategy: Strategy,
    weight_stats: StatsSource,
    weights: Vec<f64>,
    classes: Vec<ClassWeight>,
    manifest: serde_json::Value,
}

pub fn run(args: WeightsArgs) -> Result<()> {
    let file = FileConfig::load(args.config.as_deref())?;
    let strategy = parse_strategy(&args.strategy)?;
    let source = match args.weight_stats {
        Some(s) => s,
        None => file
            .train
            .weight_stats
            .as_deref()
            .map(parse_stats_source)
            .transpose()?
            .unwrap_or(StatsSource::Train),
    };
    let config = serde_json::json!({
        "language": args.data.language,
        "strategy": strategy,
        "weight_stats": source,
    });
    let mut manifest = RunManifest::start("weights", None, config);
    manifest.add_dataset(&args.data.dataset)?;

    let rows = load_rows(&args.data.dataset, args.data.language)?;
    let split = match source {
        StatsSource::Train => SplitChoice::Train,
        StatsSource::All => SplitChoice::All,
    };
    let stats = compute_class_stats(&select_split(&rows, split)).with_context(|| {
        format!(
            "class statistics over {} rows",
            if split == SplitChoice::Train {
                "train"
            } else {
                "all"
            }
        )
    })?;
    // The adaptive strategy starts from equal weights.
    let weights = match strategy {
        Strategy::Famo => ew_weights(stats.num_classes())?,
        s => static_weights(s, &stats)?,
    };
    let classes = stats
        .catalog
        .class_names
        .iter()
        .enumerate()
        .map(|(c, name)| ClassWeight {
            class: name.clone(),
            frequency: stats.frequency(c),
            weight: weights.w[c],
        })
        .collect();
    let report = WeightsReport {
        language: args.data.language.to_string(),
        strategy,
        weight_stats: source,
        weights: weights.w,
        classes,
        manifest: manifest.finish().to_value(),
    };
    emit(&to_json(&report)?, args.out.as_deref())
}
