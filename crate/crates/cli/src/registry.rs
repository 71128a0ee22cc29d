//! The benchmark suite: where each dataset lives, how to parse it, how to
//! train it and what the published run reported.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use oscerr::DatasetSchema;
use serde::Deserialize;
use sha2::{Digest, Sha256};

const ENTRIES: [(&str, &str); 10] = [
    ("wine", include_str!("../registry/wine.toml")),
    ("iris", include_str!("../registry/iris.toml")),
    ("zoo", include_str!("../registry/zoo.toml")),
    ("abalone", include_str!("../registry/abalone.toml")),
    ("hayes-roth", include_str!("../registry/hayes-roth.toml")),
    ("liver", include_str!("../registry/liver.toml")),
    (
        "user-modelling",
        include_str!("../registry/user-modelling.toml"),
    ),
    ("banknote", include_str!("../registry/banknote.toml")),
    ("spect", include_str!("../registry/spect.toml")),
    ("letters", include_str!("../registry/letters.toml")),
];

/// Published figures for one dataset.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PublishedResult {
    pub average_error: f64,
    pub best_margin_pct: u32,
    pub correct: usize,
    pub total: usize,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegistryEntry {
    #[serde(skip)]
    pub key: String,
    pub name: String,
    /// 1 for datasets scored on their own training rows, 2 for datasets with
    /// held-out rows.
    pub table: u8,
    pub train: String,
    pub test: Option<String>,
    /// Rows from this index on are held out as the test set.
    pub split_at: Option<usize>,
    pub max_layers: usize,
    pub time_limit_secs: f64,
    /// Misclassification tolerance as a percentage of the row count. The
    /// default is two rows.
    pub tolerance_pct: Option<f64>,
    pub schema: DatasetSchema,
    pub published: PublishedResult,
    #[serde(default)]
    pub sha256: BTreeMap<String, String>,
}

impl RegistryEntry {
    pub fn files(&self) -> Vec<&str> {
        std::iter::once(self.train.as_str())
            .chain(self.test.as_deref())
            .collect()
    }

    pub fn missing_files(&self, suite: &Path) -> Vec<PathBuf> {
        self.files()
            .into_iter()
            .map(|f| suite.join(f))
            .filter(|p| !p.is_file())
            .collect()
    }

    /// Allowed difference from the published correct count.
    pub fn count_tolerance(&self) -> usize {
        match self.tolerance_pct {
            Some(pct) => (self.published.total as f64 * pct / 100.0).floor() as usize,
            None => 2,
        }
    }

    /// Files whose recorded checksum differs from the copy in `suite`.
    pub fn checksum_mismatches(&self, suite: &Path) -> Result<Vec<String>> {
        let mut bad = Vec::new();
        for (file, expected) in &self.sha256 {
            let bytes = std::fs::read(suite.join(file))
                .with_context(|| format!("reading {}", suite.join(file).display()))?;
            if hex::encode(Sha256::digest(&bytes)) != *expected {
                bad.push(file.clone());
            }
        }
        Ok(bad)
    }
}

fn parse(key: &str, text: &str) -> Result<RegistryEntry> {
    let mut entry: RegistryEntry =
        toml::from_str(text).with_context(|| format!("registry entry {key}"))?;
    entry.key = key.to_owned();
    entry.schema.validate()?;
    if entry.test.is_some() && entry.split_at.is_some() {
        bail!("registry entry {key} has both a test file and a split point");
    }
    Ok(entry)
}

/// Every registered dataset in table order.
pub fn entries() -> Vec<RegistryEntry> {
    ENTRIES
        .iter()
        .map(|(key, text)| parse(key, text).expect("embedded registry entries are valid"))
        .collect()
}

/// Looks an entry up by key or display name, ignoring case.
pub fn find(name: &str) -> Option<RegistryEntry> {
    entries()
        .into_iter()
        .find(|e| e.key.eq_ignore_ascii_case(name) || e.name.eq_ignore_ascii_case(name))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_entries_parse() {
        let all = entries();
        assert_eq!(all.len(), 10);
        assert_eq!(all.iter().filter(|e| e.table == 1).count(), 6);
        assert_eq!(all.iter().filter(|e| e.table == 2).count(), 4);
    }

    #[test]
    fn iteration_caps() {
        assert_eq!(find("abalone").unwrap().max_layers, 20);
        assert_eq!(find("liver").unwrap().max_layers, 2);
        assert_eq!(find("Wine").unwrap().max_layers, 10);
    }

    #[test]
    fn letters_split() {
        let letters = find("letters").unwrap();
        assert_eq!(letters.split_at, Some(16000));
        assert_eq!(letters.published.total, 4000);
        assert_eq!(letters.time_limit_secs, 10.0);
    }

    #[test]
    fn tolerances() {
        assert_eq!(find("wine").unwrap().count_tolerance(), 2);
        assert_eq!(find("abalone").unwrap().count_tolerance(), 41);
    }

    #[test]
    fn checksums_are_hex_digests() {
        for e in entries() {
            for (file, digest) in &e.sha256 {
                assert!(e.files().contains(&file.as_str()), "{file}");
                assert_eq!(digest.len(), 64);
                assert!(digest.bytes().all(|b| b.is_ascii_hexdigit()));
            }
        }
    }
}
