use anyhow::{Context, Result};
use commentweight_core::submission_score;

use super::to_json;
use crate::config::{load_formula, FileConfig};
use crate::manifest::RunManifest;
use crate::ScoreArgs;

pub fn run(args: ScoreArgs) -> Result<()> {
    let formula = match &args.formula {
        Some(p) => Some(load_formula(p)?),
        None => FileConfig::load(args.config.as_deref())?.score,
    };
    let score = submission_score(args.f1, args.runtime, args.gflops, formula.as_ref())
        .context("pass --formula FILE or a config with a [score] table")?;
    if args.json {
        let config = serde_json::json!({
            "f1": args.f1,
            "runtime": args.runtime,
            "gflops": args.gflops,
            "formula": formula,
        });
        let manifest = RunManifest::start("score", None, config).finish();
        print!(
            "{}",
            to_json(&serde_json::json!({ "score": score, "manifest": manifest }))?
        );
    } else {
        println!("{score:.4}");
    }
    Ok(())
}
