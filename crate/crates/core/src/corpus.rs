//! Labeled comment datasets.
//!
//! A dataset file holds the rows of one language with their train/test
//! assignment. Two encodings are read:
//!
//! * CSV (UTF-8, header row, RFC-4180 quoting) with the columns `id`, `combo`,
//!   `split` and either one `0`/`1` column per class (named as in the
//!   language's [`ClassCatalog`]) or a single `labels` column holding a
//!   bracketed list such as `[0, 1, 0, 0, 0]`.
//! * JSON lines, one object per row:
//!   `{"id": "...", "combo": "...", "split": "train", "labels": [0, 1, 0, 0, 0]}`.
//!
//! The given split is authoritative; rows are never re-split or repaired.

use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Language {
    Java,
    Python,
    Pharo,
}

impl Language {
    pub const ALL: [Language; 3] = [Language::Java, Language::Python, Language::Pharo];

    pub fn catalog(self) -> ClassCatalog {
        ClassCatalog::for_language(self)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Language::Java => "java",
            Language::Python => "python",
            Language::Pharo => "pharo",
        }
    }
}

impl fmt::Display for Language {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Language::Java => "Java",
            Language::Python => "Python",
            Language::Pharo => "Pharo",
        };
        f.write_str(name)
    }
}

impl FromStr for Language {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "java" => Ok(Language::Java),
            "python" => Ok(Language::Python),
            "pharo" => Ok(Language::Pharo),
            _ => Err(Error::UnknownLanguage(s.to_string())),
        }
    }
}

const JAVA_CLASSES: [&str; 7] = [
    "Summary",
    "Ownership",
    "Expand",
    "Usage",
    "Pointer",
    "Deprecation",
    "Rational",
];
const PYTHON_CLASSES: [&str; 5] = [
    "Usage",
    "Parameters",
    "DevelopmentNotes",
    "Expand",
    "Summary",
];
const PHARO_CLASSES: [&str; 7] = [
    "KeyImplementations",
    "Example",
    "Responsibility",
    "ClassReference",
    "Intent",
    "KeyMessage",
    "Collaborators",
];

/// Ordered label names of one language. Label vectors index into this order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassCatalog {
    pub language: Language,
    pub class_names: Vec<String>,
}

impl ClassCatalog {
    pub fn for_language(language: Language) -> Self {
        let names: &[&str] = match language {
            Language::Java => &JAVA_CLASSES,
            Language::Python => &PYTHON_CLASSES,
            Language::Pharo => &PHARO_CLASSES,
        };
        ClassCatalog {
            language,
            class_names: names.iter().map(|s| s.to_string()).collect(),
        }
    }

    /// A catalog with arbitrary class names, tagged with `language`.
    pub fn custom(language: Language, class_names: &[&str]) -> Self {
        ClassCatalog {
            language,
            class_names: class_names.iter().map(|s| s.to_string()).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.class_names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.class_names.is_empty()
    }

    /// Finds a class by name, ignoring case, spaces, dashes and underscores.
    pub fn position(&self, name: &str) -> Option<usize> {
        let key = normalize_name(name);
        self.class_names
            .iter()
            .position(|n| normalize_name(n) == key)
    }
}

fn normalize_name(name: &str) -> String {
    name.chars()
        .filter(|c| !matches!(c, ' ' | '_' | '-'))
        .flat_map(char::to_lowercase)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Test => "test",
        }
    }
}

impl FromStr for Split {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim() {
            "train" => Ok(Split::Train),
            "test" => Ok(Split::Test),
            other => Err(format!("unknown split tag `{other}`")),
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledComment {
    pub id: String,
    pub language: Language,
    /// Comment text, stored verbatim.
    pub combo: String,
    pub labels: Vec<bool>,
    pub split: Split,
}

impl LabeledComment {
    /// Builds a row, checking the label width against the catalog and that
    /// at least one label is set.
    pub fn new(
        id: impl Into<String>,
        language: Language,
        combo: impl Into<String>,
        labels: Vec<bool>,
        split: Split,
    ) -> std::result::Result<Self, String> {
        let combo = combo.into();
        let width = language.catalog().len();
        if labels.len() != width {
            return Err(format!(
                "label vector has width {}, {language} expects {width}",
                labels.len()
            ));
        }
        if combo.trim().is_empty() {
            return Err("empty comment text".to_string());
        }
        if !labels.iter().any(|&b| b) {
            return Err("no label set".to_string());
        }
        Ok(LabeledComment {
            id: id.into(),
            language,
            combo,
            labels,
            split,
        })
    }
}

/// Loads a dataset file, choosing the decoder from the extension
/// (`.jsonl`/`.ndjson` are JSON lines, anything else is CSV).
pub fn load_dataset(path: impl AsRef<Path>, language: Language) -> Result<Vec<LabeledComment>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase);
    match ext.as_deref() {
        Some("jsonl") | Some("ndjson") => read_jsonl(BufReader::new(file), language),
        _ => read_csv(file, language),
    }
}

pub fn split_rows(rows: &[LabeledComment], split: Split) -> Vec<LabeledComment> {
    rows.iter().filter(|r| r.split == split).cloned().collect()
}

enum LabelLayout {
    Columns(Vec<usize>),
    ListColumn(usize),
}

pub fn read_csv<R: Read>(reader: R, language: Language) -> Result<Vec<LabeledComment>> {
    let catalog = language.catalog();
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(reader);

    let headers = match rdr.headers() {
        Ok(h) => h.clone(),
        Err(e) => return Err(Error::MalformedHeader(e.to_string())),
    };
    if headers.is_empty() || (headers.len() == 1 && headers[0].is_empty()) {
        return Ok(Vec::new());
    }

    let find = |name: &str| headers.iter().position(|h| h.trim() == name);
    let id_col = find("id").ok_or_else(|| Error::MalformedHeader("missing `id` column".into()))?;
    let combo_col =
        find("combo").ok_or_else(|| Error::MalformedHeader("missing `combo` column".into()))?;
    let split_col =
        find("split").ok_or_else(|| Error::MalformedHeader("missing `split` column".into()))?;

    let layout = if let Some(col) = find("labels") {
        LabelLayout::ListColumn(col)
    } else {
        let mut cols = Vec::with_capacity(catalog.len());
        for name in &catalog.class_names {
            let col = headers
                .iter()
                .position(|h| normalize_name(h) == normalize_name(name))
                .ok_or_else(|| {
                    Error::MalformedHeader(format!("missing label column `{name}` for {language}"))
                })?;
            cols.push(col);
        }
        LabelLayout::Columns(cols)
    };

    let mut rows = Vec::new();
    for (row, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| Error::MalformedRow {
            row,
            reason: e.to_string(),
        })?;
        let bad = |reason: String| Error::MalformedRow { row, reason };
        let labels = match &layout {
            LabelLayout::Columns(cols) => cols
                .iter()
                .map(|&c| parse_bit(&record[c]))
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(bad)?,
            LabelLayout::ListColumn(c) => parse_bit_list(&record[*c]).map_err(bad)?,
        };
        let split: Split = record[split_col].parse().map_err(bad)?;
        let comment =
            LabeledComment::new(&record[id_col], language, &record[combo_col], labels, split)
                .map_err(bad)?;
        rows.push(comment);
    }
    Ok(rows)
}

fn parse_bit(field: &str) -> std::result::Result<bool, String> {
    match field.trim() {
        "0" => Ok(false),
        "1" => Ok(true),
        other => Err(format!("label value `{other}` is not 0 or 1")),
    }
}

fn parse_bit_list(field: &str) -> std::result::Result<Vec<bool>, String> {
    let inner = field
        .trim()
        .strip_prefix('[')
        .and_then(|s| s.strip_suffix(']'))
        .ok_or_else(|| format!("labels `{field}` is not a bracketed list"))?;
    if inner.trim().is_empty() {
        return Ok(Vec::new());
    }
    inner.split(',').map(parse_bit).collect()
}

#[derive(Deserialize, Serialize)]
struct JsonRow {
    id: String,
    combo: String,
    split: String,
    labels: Vec<u8>,
}

pub fn read_jsonl<R: BufRead>(reader: R, language: Language) -> Result<Vec<LabeledComment>> {
    let mut rows = Vec::new();
    let mut row = 0;
    for line in reader.lines() {
        let line = line.map_err(|e| Error::MalformedRow {
            row,
            reason: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let bad = |reason: String| Error::MalformedRow { row, reason };
        let parsed: JsonRow = serde_json::from_str(&line).map_err(|e| bad(e.to_string()))?;
        let labels = parsed
            .labels
            .iter()
            .map(|&b| match b {
                0 => Ok(false),
                1 => Ok(true),
                v => Err(format!("label value `{v}` is not 0 or 1")),
            })
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(bad)?;
        let split: Split = parsed.split.parse().map_err(bad)?;
        rows.push(
            LabeledComment::new(parsed.id, language, parsed.combo, labels, split).map_err(bad)?,
        );
        row += 1;
    }
    Ok(rows)
}

/// Writes rows as CSV with one boolean column per class.
pub fn write_csv<W: Write>(writer: W, rows: &[LabeledComment], language: Language) -> Result<()> {
    let catalog = language.catalog();
    let mut wtr = csv::Writer::from_writer(writer);
    let io = |e: csv::Error| Error::Io {
        path: "<csv writer>".into(),
        source: e.into(),
    };
    let mut header = vec!["id", "combo", "split"];
    header.extend(catalog.class_names.iter().map(String::as_str));
    wtr.write_record(&header).map_err(io)?;
    for r in rows {
        let mut rec = vec![r.id.clone(), r.combo.clone(), r.split.to_string()];
        rec.extend(
            r.labels
                .iter()
                .map(|&b| if b { "1" } else { "0" }.to_string()),
        );
        wtr.write_record(&rec).map_err(io)?;
    }
    wtr.flush().map_err(|source| Error::Io {
        path: "<csv writer>".into(),
        source,
    })
}

pub fn write_jsonl<W: Write>(mut writer: W, rows: &[LabeledComment]) -> Result<()> {
    for r in rows {
        let row = JsonRow {
            id: r.id.clone(),
            combo: r.combo.clone(),
            split: r.split.to_string(),
            labels: r.labels.iter().map(|&b| b as u8).collect(),
        };
        serde_json::to_writer(&mut writer, &row)?;
        writer.write_all(b"\n").map_err(|source| Error::Io {
            path: "<jsonl writer>".into(),
            source,
        })?;
    }
    Ok(())
}

/// Per-class positive counts of one language's rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassStats {
    pub catalog: ClassCatalog,
    pub total: usize,
    pub positives: Vec<usize>,
}

impl ClassStats {
    pub fn num_classes(&self) -> usize {
        self.positives.len()
    }

    pub fn negatives(&self, class: usize) -> usize {
        self.total - self.positives[class]
    }

    /// Relative frequency `positives / total`.
    pub fn frequency(&self, class: usize) -> f64 {
        self.positives[class] as f64 / self.total as f64
    }

    pub fn frequencies(&self) -> Vec<f64> {
        (0..self.num_classes()).map(|c| self.frequency(c)).collect()
    }

    pub fn positive_percent(&self, class: usize) -> f64 {
        100.0 * self.frequency(class)
    }
}

pub fn compute_class_stats(rows: &[LabeledComment]) -> Result<ClassStats> {
    let first = rows
        .first()
        .ok_or(Error::EmptyDataset("no rows to count"))?;
    let language = first.language;
    let catalog = language.catalog();
    let mut positives = vec![0usize; catalog.len()];
    for r in rows {
        if r.language != language {
            return Err(Error::MixedLanguages(
                language.to_string(),
                r.language.to_string(),
            ));
        }
        for (count, &bit) in positives.iter_mut().zip(&r.labels) {
            *count += bit as usize;
        }
    }
    Ok(ClassStats {
        catalog,
        total: rows.len(),
        positives,
    })
}
