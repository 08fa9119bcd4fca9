use anyhow::{Context, Result};
use commentweight_core::trainer::evaluate_featurized;
use commentweight_core::{Checkpoint, EvalReport, FeaturizedRows};

use super::{emit, load_rows, select_split, to_json, write_file};
use crate::manifest::RunManifest;
use crate::EvaluateArgs;

/// Accepts a bare report or an artifact that wraps one (as `train` writes it).
fn load_baseline(path: &std::path::Path) -> Result<EvalReport> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    let inner = value.get("report").cloned().unwrap_or(value);
    serde_json::from_value(inner)
        .with_context(|| format!("{} is not an evaluation report", path.display()))
}

pub fn run(args: EvaluateArgs) -> Result<()> {
    let checkpoint = Checkpoint::load(&args.checkpoint)?;
    let params = checkpoint.params()?;
    let language = checkpoint.language;
    let config = serde_json::json!({
        "checkpoint": args.checkpoint.display().to_string(),
        "language": language,
        "split": args.split,
        "featurizer": checkpoint.featurizer,
        "baseline": args.baseline.as_ref().map(|p| p.display().to_string()),
    });
    let mut manifest = RunManifest::start("evaluate", Some(checkpoint.train_config.seed), config);
    manifest.add_dataset(&args.checkpoint)?;
    manifest.add_dataset(&args.dataset)?;

    let rows = select_split(&load_rows(&args.dataset, language)?, args.split);
    let data = FeaturizedRows::new(&rows, &checkpoint.featurizer)?;
    let mut report = evaluate_featurized(&params, &data)?;
    if let Some(b) = &args.baseline {
        report = report.with_deltas(&load_baseline(b)?)?;
    }
    let manifest = manifest.finish().to_value();

    if let Some(csv) = &args.csv {
        write_file(csv, &report.render_csv())?;
    }
    let text = if args.output.json {
        to_json(&serde_json::json!({ "report": report, "manifest": manifest }))?
    } else {
        report.render_table()
    };
    emit(&text, args.output.out.as_deref())
}
