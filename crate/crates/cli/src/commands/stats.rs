use anyhow::Result;
use commentweight_core::compute_class_stats;
use commentweight_core::metrics::fmt1;
use serde::Serialize;

use super::{emit, load_rows, select_split, thousands, to_json};
use crate::manifest::RunManifest;
use crate::StatsArgs;

#[derive(Serialize)]
struct ClassRow {
    class: String,
    positives: usize,
    negatives: usize,
    frequency: f64,
    positive_percent: f64,
}

#[derive(Serialize)]
struct StatsReport {
    language: String,
    total: usize,
    classes: Vec<ClassRow>,
    manifest: serde_json::Value,
}

impl StatsReport {
    fn render_table(&self) -> String {
        let mut out = format!(
            "{} ({} rows)\nLabel positives negatives positive%\n",
            self.language,
            thousands(self.total)
        );
        for c in &self.classes {
            out.push_str(&format!(
                "{} {} {} {}%\n",
                c.class,
                thousands(c.positives),
                thousands(c.negatives),
                fmt1(c.positive_percent)
            ));
        }
        out
    }
}

pub fn run(args: StatsArgs) -> Result<()> {
    let config = serde_json::json!({
        "language": args.data.language,
        "split": args.split,
    });
    let mut manifest = RunManifest::start("stats", None, config);
    manifest.add_dataset(&args.data.dataset)?;
    let rows = select_split(
        &load_rows(&args.data.dataset, args.data.language)?,
        args.split,
    );
    let stats = compute_class_stats(&rows)?;
    let classes = stats
        .catalog
        .class_names
        .iter()
        .enumerate()
        .map(|(c, name)| ClassRow {
            class: name.clone(),
            positives: stats.positives[c],
            negatives: stats.negatives(c),
            frequency: stats.frequency(c),
            positive_percent: stats.positive_percent(c),
        })
        .collect();
    let report = StatsReport {
        language: args.data.language.to_string(),
        total: stats.total,
        classes,
        manifest: manifest.finish().to_value(),
    };
    let text = if args.output.json {
        to_json(&report)?
    } else {
        report.render_table()
    };
    emit(&text, args.output.out.as_deref())
}
