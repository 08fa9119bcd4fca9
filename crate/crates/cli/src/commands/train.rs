use anyhow::{bail, Result};
use commentweight_core::trainer::{evaluate_featurized, train_featurized};
use commentweight_core::{compute_class_stats, Checkpoint, FeaturizedRows, Strategy, TrainConfig};
use serde::Serialize;

use super::{
    emit, featurizer_config, load_rows, parse_stats_source, parse_strategy, select_split, to_json,
    write_file,
};
use crate::config::FileConfig;
use crate::manifest::{sha256_hex, RunManifest};
use crate::{SplitChoice, StatsSource, TrainArgs};

/// Adaptive-strategy hyperparameters used when none are configured.
const DEFAULT_FAMO_ALPHA: f64 = 25e-3;
const DEFAULT_FAMO_GAMMA: f64 = 1e-3;

#[derive(Serialize)]
struct Artifact<'a, T: Serialize> {
    #[serde(flatten)]
    body: &'a T,
    manifest: &'a serde_json::Value,
}

fn train_config(args: &TrainArgs, file: &FileConfig) -> Result<TrainConfig> {
    let t = &file.train;
    let d = TrainConfig::default();
    let strategy = match args.strategy.as_deref().or(t.strategy.as_deref()) {
        Some(s) => parse_strategy(s)?,
        None => d.strategy,
    };
    let famo = strategy == Strategy::Famo;
    let cfg = TrainConfig {
        batch_size: args.batch_size.or(t.batch_size).unwrap_or(d.batch_size),
        epochs: args.epochs.or(t.epochs).unwrap_or(d.epochs),
        learning_rate: args.lr.or(t.learning_rate).unwrap_or(d.learning_rate),
        weight_decay: args
            .weight_decay
            .or(t.weight_decay)
            .unwrap_or(d.weight_decay),
        strategy,
        famo_alpha: famo.then(|| {
            args.famo_alpha
                .or(t.famo_alpha)
                .unwrap_or(DEFAULT_FAMO_ALPHA)
        }),
        famo_gamma: famo.then(|| {
            args.famo_gamma
                .or(t.famo_gamma)
                .unwrap_or(DEFAULT_FAMO_GAMMA)
        }),
        seed: args.seed.or(t.seed).unwrap_or(d.seed),
        lr_scale: args.lr_scale.or(t.lr_scale).unwrap_or(d.lr_scale),
        record_batches: args.history_batches,
    };
    cfg.validate()?;
    Ok(cfg)
}

pub fn run(args: TrainArgs) -> Result<()> {
    let file = FileConfig::load(args.config.as_deref())?;
    let featurizer = featurizer_config(&args.featurizer, &file.featurizer)?;
    let config = train_config(&args, &file)?;
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
    let effective = serde_json::json!({
        "language": args.data.language,
        "featurizer": featurizer,
        "train": config,
        "weight_stats": source,
    });
    let mut manifest = RunManifest::start("train", Some(config.seed), effective);
    manifest.add_dataset(&args.data.dataset)?;

    let rows = load_rows(&args.data.dataset, args.data.language)?;
    let train_rows = select_split(&rows, SplitChoice::Train);
    let test_rows = select_split(&rows, SplitChoice::Test);
    if train_rows.is_empty() {
        bail!("{} has no train rows", args.data.dataset.display());
    }
    let all_stats = match source {
        StatsSource::All => Some(compute_class_stats(&rows)?),
        StatsSource::Train => None,
    };
    let train_data = FeaturizedRows::new(&train_rows, &featurizer)?;
    let model = train_featurized(&train_data, all_stats.as_ref(), &config, featurizer.dims)?;
    let report = if test_rows.is_empty() {
        eprintln!("note: no test rows, skipping evaluation");
        None
    } else {
        let test_data = FeaturizedRows::new(&test_rows, &featurizer)?;
        Some(evaluate_featurized(&model.params, &test_data)?)
    };

    let manifest = manifest.finish().to_value();
    let mut checkpoint = Checkpoint::new(
        args.data.language,
        &model.params,
        &featurizer,
        &config,
        &model.loss_weights,
    );
    // Digest of the model alone, unaffected by timestamps.
    let digest = sha256_hex(checkpoint.to_json()?.as_bytes());
    checkpoint.manifest = Some(manifest.clone());

    if let Some(dir) = &args.out {
        write_file(
            &dir.join("checkpoint.json"),
            &(checkpoint.to_json()? + "\n"),
        )?;
        write_file(
            &dir.join("history.json"),
            &to_json(&Artifact {
                body: &model.history,
                manifest: &manifest,
            })?,
        )?;
        if let Some(r) = &report {
            write_file(
                &dir.join("report.json"),
                &to_json(&Artifact {
                    body: r,
                    manifest: &manifest,
                })?,
            )?;
            write_file(&dir.join("report.csv"), &r.render_csv())?;
        }
    }

    if args.json {
        let out = serde_json::json!({
            "model_digest": digest,
            "report": report,
            "manifest": manifest,
        });
        emit(&to_json(&out)?, None)
    } else {
        if let Some(r) = &report {
            print!("{}", r.render_table());
        }
        println!("model digest: {digest}");
        Ok(())
    }
}
