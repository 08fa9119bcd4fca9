use anyhow::{anyhow, bail, Result};
use commentweight_core::search::{enumerate, rank, run_search, SearchEntry};
use commentweight_core::{
    compute_class_stats, FeaturizedRows, SearchOptions, SearchResult, Strategy,
};
use serde::Serialize;

use super::{
    emit, featurizer_config, load_rows, parse_stats_source, parse_strategy, select_split, to_json,
    write_file,
};
use crate::config::FileConfig;
use crate::manifest::RunManifest;
use crate::{PartialFailure, SearchArgs, SelectMode, SplitChoice, StatsSource};

#[derive(Serialize)]
struct StrategyResult {
    strategy: Strategy,
    configurations: usize,
    result: SearchResult,
}

#[derive(Serialize)]
struct SearchReport {
    select_mode: SelectMode,
    /// Joint mode: every run of every strategy. Per-strategy mode: each
    /// strategy's best run.
    ranking: SearchResult,
    strategies: Vec<StrategyResult>,
    manifest: serde_json::Value,
}

fn strategies(spec: &str) -> Result<Vec<Strategy>> {
    if spec.eq_ignore_ascii_case("all") {
        return Ok(Strategy::ALL.to_vec());
    }
    spec.split(',').map(parse_strategy).collect()
}

fn select_mode(flag: Option<SelectMode>, file: Option<&str>) -> Result<SelectMode> {
    if let Some(m) = flag {
        return Ok(m);
    }
    match file {
        None | Some("joint") => Ok(SelectMode::Joint),
        Some("per-strategy") => Ok(SelectMode::PerStrategy),
        Some(other) => bail!("select_mode must be \"joint\" or \"per-strategy\", got {other:?}"),
    }
}

pub fn run(args: SearchArgs) -> Result<()> {
    let file = FileConfig::load(args.config.as_deref())?;
    let s = &file.search;
    let grid = s.grid.clone().unwrap_or_default();
    let strats = strategies(
        args.strategy
            .as_deref()
            .or(s.strategy.as_deref())
            .unwrap_or("all"),
    )?;

    if args.dry_run {
        let mut total = 0;
        for &st in &strats {
            let n = grid.size(st);
            total += n;
            if strats.len() > 1 {
                println!("{st}: {n} configurations");
            }
        }
        println!("{total} configurations");
        return Ok(());
    }

    let dataset = args
        .dataset
        .as_deref()
        .ok_or_else(|| anyhow!("--dataset is required"))?;
    let language = args
        .language
        .ok_or_else(|| anyhow!("--language is required"))?;
    let featurizer = featurizer_config(&args.featurizer, &file.featurizer)?;
    let mode = select_mode(args.select_mode, s.select_mode.as_deref())?;
    let source = match args.weight_stats {
        Some(v) => v,
        None => file
            .train
            .weight_stats
            .as_deref()
            .map(parse_stats_source)
            .transpose()?
            .unwrap_or(StatsSource::Train),
    };
    let parallelism = args.parallelism.or(s.parallelism).unwrap_or_else(|| {
        std::thread::available_parallelism()
            .map(|n| n.get())
            .unwrap_or(1)
    });
    let options = SearchOptions {
        base_seed: args.seed.or(s.seed).unwrap_or(0),
        lr_scale: args.lr_scale.or(s.lr_scale).unwrap_or(1.0),
        parallelism,
    };
    // Parallelism does not affect results, so it stays out of the manifest.
    let effective = serde_json::json!({
        "language": language,
        "strategies": strats,
        "select_mode": mode,
        "weight_stats": source,
        "featurizer": featurizer,
        "grid": grid,
        "base_seed": options.base_seed,
        "lr_scale": options.lr_scale,
    });
    let mut manifest = RunManifest::start("search", Some(options.base_seed), effective);
    manifest.add_dataset(dataset)?;

    let rows = load_rows(dataset, language)?;
    let train = FeaturizedRows::new(&select_split(&rows, SplitChoice::Train), &featurizer)?;
    let eval = FeaturizedRows::new(&select_split(&rows, SplitChoice::Test), &featurizer)?;
    let all_stats = match source {
        StatsSource::All => Some(compute_class_stats(&rows)?),
        StatsSource::Train => None,
    };

    let mut per_strategy = Vec::new();
    for &st in &strats {
        let configs = enumerate(&grid, st);
        let result = run_search(&train, &eval, &configs, all_stats.as_ref(), &options)?;
        per_strategy.push(StrategyResult {
            strategy: st,
            configurations: configs.len(),
            result,
        });
    }

    let mut ranking: Vec<SearchEntry> = match mode {
        SelectMode::Joint => per_strategy
            .iter()
            .flat_map(|r| r.result.entries.clone())
            .collect(),
        SelectMode::PerStrategy => per_strategy
            .iter()
            .filter_map(|r| r.result.entries.first().cloned())
            .collect(),
    };
    rank(&mut ranking);
    let ranking = SearchResult { entries: ranking };
    let failures: usize = per_strategy.iter().map(|r| r.result.failures()).sum();

    let report = SearchReport {
        select_mode: mode,
        ranking,
        strategies: per_strategy,
        manifest: manifest.finish().to_value(),
    };
    if let Some(out) = &args.out {
        write_file(out, &to_json(&report)?)?;
        write_file(&out.with_extension("csv"), &report.ranking.render_csv())?;
    }
    if args.json {
        emit(&to_json(&report)?, None)?;
    } else {
        print_summary(&report);
    }
    if failures > 0 {
        return Err(PartialFailure(failures).into());
    }
    Ok(())
}

fn print_summary(report: &SearchReport) {
    use commentweight_core::metrics::fmt1;
    for r in &report.strategies {
        let best = r.result.best();
        println!(
            "{}: {} configurations, best average F1 {}",
            r.strategy,
            r.configurations,
            best.and_then(|e| e.average_f1)
                .map(fmt1)
                .unwrap_or_else(|| "n/a".into())
        );
    }
    if let Some(best) = report.ranking.best() {
        let c = &best.config;
        println!(
            "best: {} batch={} epochs={} lr={} wd={}{} seed={} F1={}",
            c.strategy,
            c.batch_size,
            c.epochs,
            c.learning_rate,
            c.weight_decay,
            match (c.famo_alpha, c.famo_gamma) {
                (Some(a), Some(g)) => format!(" alpha={a} gamma={g}"),
                _ => String::new(),
            },
            c.seed,
            best.average_f1.map(fmt1).unwrap_or_default()
        );
    }
}
