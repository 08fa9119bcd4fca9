//! Per-class precision, recall and F1, their averages, baseline deltas and
//! the submission score.
//!
//! All scores are percentages in `[0, 100]`. Undefined ratios (zero
//! denominators) are reported as 0. Rendering rounds half-up to one decimal;
//! everything else keeps full precision.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::corpus::{ClassCatalog, Language};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassCounts {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
}

impl ClassCounts {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }

    pub fn record(&mut self, predicted: bool, actual: bool) {
        match (predicted, actual) {
            (true, true) => self.tp += 1,
            (true, false) => self.fp += 1,
            (false, true) => self.fn_ += 1,
            (false, false) => self.tn += 1,
        }
    }
}

/// Confusion counts for every class of one catalog.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub classes: Vec<ClassCounts>,
}

impl ConfusionCounts {
    pub fn new(num_classes: usize) -> Self {
        ConfusionCounts {
            classes: vec![ClassCounts::default(); num_classes],
        }
    }

    pub fn record(&mut self, predicted: &[bool], actual: &[bool]) -> Result<()> {
        if predicted.len() != self.classes.len() || actual.len() != self.classes.len() {
            return Err(Error::LengthMismatch {
                what: "confusion row",
                expected: self.classes.len(),
                actual: predicted.len().max(actual.len()),
            });
        }
        for ((c, &p), &a) in self.classes.iter_mut().zip(predicted).zip(actual) {
            c.record(p, a);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        100.0 * num as f64 / den as f64
    }
}

/// Harmonic mean of two percentages, 0 when both are 0.
pub fn f1_from(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

pub fn prf(counts: &ClassCounts) -> Prf {
    let precision = ratio(counts.tp, counts.tp + counts.fp);
    let recall = ratio(counts.tp, counts.tp + counts.fn_);
    Prf {
        precision,
        recall,
        f1: f1_from(precision, recall),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassReport {
    pub language: Language,
    pub class: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub counts: Option<ClassCounts>,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Averages {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LanguageAverage {
    pub language: Language,
    #[serde(flatten)]
    pub averages: Averages,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub classes: Vec<ClassReport>,
    pub languages: Vec<LanguageAverage>,
    pub grand: Averages,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub deltas: Option<Vec<f64>>,
}

impl EvalReport {
    pub fn from_counts(catalog: &ClassCatalog, counts: &ConfusionCounts) -> Result<Self> {
        if counts.classes.len() != catalog.len() {
            return Err(Error::CatalogMismatch(format!(
                "{} counts for {} classes",
                counts.classes.len(),
                catalog.len()
            )));
        }
        let classes = catalog
            .class_names
            .iter()
            .zip(&counts.classes)
            .map(|(name, c)| {
                let s = prf(c);
                ClassReport {
                    language: catalog.language,
                    class: name.clone(),
                    counts: Some(*c),
                    precision: s.precision,
                    recall: s.recall,
                    f1: s.f1,
                }
            })
            .collect();
        EvalReport::from_classes(classes)
    }

    /// Builds a report from already computed per-class scores, e.g. a
    /// published baseline.
    pub fn from_classes(classes: Vec<ClassReport>) -> Result<Self> {
        if classes.is_empty() {
            return Err(Error::InvalidConfig(
                "report needs at least one class".into(),
            ));
        }
        let (languages, grand) = averages(&classes);
        Ok(EvalReport {
            classes,
            languages,
            grand,
            deltas: None,
        })
    }

    /// Concatenates per-language reports; the grand average spans all classes.
    pub fn merge(reports: &[EvalReport]) -> Result<Self> {
        let classes = reports.iter().flat_map(|r| r.classes.clone()).collect();
        EvalReport::from_classes(classes)
    }

    pub fn f1_scores(&self) -> Vec<f64> {
        self.classes.iter().map(|c| c.f1).collect()
    }

    pub fn with_deltas(mut self, baseline: &EvalReport) -> Result<Self> {
        self.deltas = Some(delta(&self, baseline)?);
        Ok(self)
    }

    /// Fixed-width text table with one-decimal values.
    pub fn render_table(&self) -> String {
        let width = self
            .classes
            .iter()
            .map(|c| c.class.len() + c.language.to_string().len() + 1)
            .chain([14])
            .max()
            .unwrap_or(14);
        let mut out = String::new();
        let _ = write!(out, "{:<width$} {:>6} {:>6} {:>6}", "class", "P", "R", "F1");
        if self.deltas.is_some() {
            let _ = write!(out, " {:>6}", "dF1");
        }
        out.push('\n');
        for (i, c) in self.classes.iter().enumerate() {
            let label = format!("{} {}", c.language, c.class);
            let _ = write!(
                out,
                "{label:<width$} {:>6} {:>6} {:>6}",
                fmt1(c.precision),
                fmt1(c.recall),
                fmt1(c.f1)
            );
            if let Some(d) = &self.deltas {
                let _ = write!(out, " {:>6}", fmt1(d[i]));
            }
            out.push('\n');
        }
        for l in &self.languages {
            let label = format!("{} average", l.language);
            let _ = writeln!(
                out,
                "{label:<width$} {:>6} {:>6} {:>6}",
                fmt1(l.averages.precision),
                fmt1(l.averages.recall),
                fmt1(l.averages.f1)
            );
        }
        let _ = writeln!(
            out,
            "{:<width$} {:>6} {:>6} {:>6}",
            "grand average",
            fmt1(self.grand.precision),
            fmt1(self.grand.recall),
            fmt1(self.grand.f1)
        );
        out
    }

    /// CSV with columns `language,class,P,R,F1,dF1` (dF1 empty without a baseline).
    pub fn render_csv(&self) -> String {
        let mut out = String::from("language,class,P,R,F1,dF1\n");
        for (i, c) in self.classes.iter().enumerate() {
            let d = self.deltas.as_ref().map(|d| fmt1(d[i])).unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                c.language,
                c.class,
                fmt1(c.precision),
                fmt1(c.recall),
                fmt1(c.f1),
                d
            );
        }
        out
    }
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

fn average_of<'a>(rows: impl Iterator<Item = &'a ClassReport> + Clone) -> Averages {
    Averages {
        precision: mean(rows.clone().map(|c| c.precision)),
        recall: mean(rows.clone().map(|c| c.recall)),
        f1: mean(rows.map(|c| c.f1)),
    }
}

/// Unweighted per-language means (in order of first appearance) and the
/// grand mean over every class.
pub fn averages(classes: &[ClassReport]) -> (Vec<LanguageAverage>, Averages) {
    let mut langs: Vec<Language> = Vec::new();
    for c in classes {
        if !langs.contains(&c.language) {
            langs.push(c.language);
        }
    }
    let per_language = langs
        .into_iter()
        .map(|language| LanguageAverage {
            language,
            averages: average_of(classes.iter().filter(|c| c.language == language)),
        })
        .collect();
    (per_language, average_of(classes.iter()))
}

/// `report.F1_c - baseline.F1_c` for matching catalogs.
pub fn delta(report: &EvalReport, baseline: &EvalReport) -> Result<Vec<f64>> {
    if report.classes.len() != baseline.classes.len() {
        return Err(Error::CatalogMismatch(format!(
            "{} classes vs {} baseline classes",
            report.classes.len(),
            baseline.classes.len()
        )));
    }
    report
        .classes
        .iter()
        .zip(&baseline.classes)
        .map(|(r, b)| {
            if r.language != b.language || r.class != b.class {
                Err(Error::CatalogMismatch(format!(
                    "{} {} vs baseline {} {}",
                    r.language, r.class, b.language, b.class
                )))
            } else {
                Ok(r.f1 - b.f1)
            }
        })
        .collect()
}

/// Rounds half-up (towards +inf) to one decimal.
pub fn round1(x: f64) -> f64 {
    let r = ((x * 10.0) + 0.5 + 1e-9).floor() / 10.0;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

pub fn fmt1(x: f64) -> String {
    format!("{:.1}", round1(x))
}

/// A cost term `weight * (max - measured) / max`, optionally floored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostTerm {
    pub weight: f64,
    pub max: f64,
    #[serde(default)]
    pub floor: Option<f64>,
}

impl CostTerm {
    fn value(&self, measured: f64) -> f64 {
        let raw = (self.max - measured) / self.max;
        let v = match self.floor {
            Some(f) => raw.max(f),
            None => raw,
        };
        self.weight * v
    }
}

/// Coefficients of the competition score. Supplied as configuration; no
/// defaults are built in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreFormula {
    pub f1_weight: f64,
    #[serde(default)]
    pub runtime: Option<CostTerm>,
    #[serde(default)]
    pub gflops: Option<CostTerm>,
}

impl ScoreFormula {
    pub fn validate(&self) -> Result<()> {
        let terms = [&self.runtime, &self.gflops];
        for t in terms.into_iter().flatten() {
            if !(t.max.is_finite() && t.max > 0.0 && t.weight.is_finite()) {
                return Err(Error::InvalidConfig(format!(
                    "cost term needs finite weight and positive max, got {t:?}"
                )));
            }
        }
        if !self.f1_weight.is_finite() {
            return Err(Error::InvalidConfig("f1_weight is not finite".into()));
        }
        Ok(())
    }
}

/// Combines average F1 (a fraction in `[0, 1]`), mean runtime in seconds and
/// mean GFLOPS under `formula`.
pub fn submission_score(
    avg_f1: f64,
    runtime_s: f64,
    gflops: f64,
    formula: Option<&ScoreFormula>,
) -> Result<f64> {
    let formula = formula
        .ok_or_else(|| Error::InvalidConfig("no submission score formula configured".into()))?;
    formula.validate()?;
    let mut score = formula.f1_weight * avg_f1;
    if let Some(t) = &formula.runtime {
        score += t.value(runtime_s);
    }
    if let Some(t) = &formula.gflops {
        score += t.value(gflops);
    }
    Ok(score)
}
