//! Dataset fixtures and helpers for driving the binary.
#![allow(dead_code)]

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_commentweight"));
    cmd.env_remove("COMMENTWEIGHT_PARALLELISM");
    cmd
}

pub fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

pub fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

pub fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

pub fn workspace_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

/// Tiny deterministic generator so fixtures don't need an RNG crate.
struct Lcg(u64);

impl Lcg {
    fn next(&mut self) -> u64 {
        self.0 = self
            .0
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        self.0 >> 33
    }

    fn chance(&mut self, p: f64) -> bool {
        (self.next() % 10_000) as f64 / 10_000.0 < p
    }
}

/// Python-catalog CSV whose labels are signalled by per-class marker words.
/// The first 80% of rows are train, the rest test.
pub fn python_csv(rows: usize, seed: u64) -> String {
    let classes = [
        "Usage",
        "Parameters",
        "DevelopmentNotes",
        "Expand",
        "Summary",
    ];
    let priors = [0.4, 0.3, 0.1, 0.2, 0.06];
    let mut rng = Lcg(seed);
    let mut out = format!("id,combo,split,{}\n", classes.join(","));
    for i in 0..rows {
        let mut labels: Vec<bool> = priors.iter().map(|&p| rng.chance(p)).collect();
        if !labels.iter().any(|&b| b) {
            labels[0] = true;
        }
        let mut words: Vec<String> = classes
            .iter()
            .zip(&labels)
            .filter(|(_, &on)| on)
            .map(|(c, _)| format!("{}{}", c.to_lowercase(), rng.next() % 3))
            .collect();
        for _ in 0..5 {
            words.push(format!("w{}", rng.next() % 40));
        }
        let split = if i * 5 < rows * 4 { "train" } else { "test" };
        let bits: Vec<&str> = labels.iter().map(|&b| if b { "1" } else { "0" }).collect();
        let _ = writeln!(
            out,
            "py{i},\"{}\",{split},{}",
            words.join(" "),
            bits.join(",")
        );
    }
    out
}

/// Java CSV with exactly `positives[c]` positives per class out of `total`
/// rows. Class 0 occupies the first rows; the others follow in contiguous,
/// wrapping blocks, so every row gets at least one label as long as the
/// blocks cover the remainder.
pub fn java_counts_csv(total: usize, positives: &[usize; 7]) -> String {
    let classes = [
        "Summary",
        "Ownership",
        "Expand",
        "Usage",
        "Pointer",
        "Deprecation",
        "Rational",
    ];
    let mut labels = vec![[false; 7]; total];
    for row in labels.iter_mut().take(positives[0]) {
        row[0] = true;
    }
    let mut start = positives[0];
    for c in 1..7 {
        for k in 0..positives[c] {
            labels[(start + k) % total][c] = true;
        }
        start += positives[c];
    }
    let mut out = format!("id,combo,split,{}\n", classes.join(","));
    for (i, row) in labels.iter().enumerate() {
        let bits: Vec<&str> = row.iter().map(|&b| if b { "1" } else { "0" }).collect();
        let split = if i % 5 == 4 { "test" } else { "train" };
        let _ = writeln!(out, "j{i},comment number {i},{split},{}", bits.join(","));
    }
    out
}
