use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::corpus::{Corpus, PatentSet};
use crate::error::{Error, Result};
use crate::io::{read_two_columns, write_table};
use crate::text::{normalize_phrase, tokenize, PhraseMatcher};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum KeywordCategory {
    Symbols,
    Learning,
    Robotics,
}

impl fmt::Display for KeywordCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            KeywordCategory::Symbols => "symbols",
            KeywordCategory::Learning => "learning",
            KeywordCategory::Robotics => "robotics",
        })
    }
}

impl FromStr for KeywordCategory {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_lowercase().as_str() {
            "symbols" => Ok(KeywordCategory::Symbols),
            "learning" => Ok(KeywordCategory::Learning),
            "robotics" => Ok(KeywordCategory::Robotics),
            other => Err(Error::Config(format!("unknown keyword category `{other}`"))),
        }
    }
}

// Published keyword list, column by column, duplicates included.
const SYMBOLS: &[&str] = &[
    "natural language processing",
    "image grammars",
    "pattern recognition",
    "image matching",
    "symbolic reasoning",
    "symbolic error analysis",
    "pattern analysis",
    "symbol processing",
    "physical symbol system",
    "natural languages",
    "pattern analysis",
    "image alignment",
    "optimal search",
    "symbolic reasoning",
    "symbolic error analysis",
];

const LEARNING: &[&str] = &[
    "machine learning",
    "neural networks",
    "reinforcement learning",
    "logic theorist",
    "bayesian belief networks",
    "unsupervised learning",
    "deep learning",
    "knowledge representation and reasoning",
    "crowdsourcing and human computation",
    "neuromorphic computing",
    "decision making",
    "machine intelligence",
    "neural network",
];

const ROBOTICS: &[&str] = &[
    "computer vision",
    "robot",
    "robots",
    "robot systems",
    "robotics",
    "robotic",
    "collaborative systems",
    "humanoid robotics",
    "sensor network",
    "sensor networks",
    "sensor data fusion",
    "systems and control theory",
    "layered control systems",
];

/// Keyword phrases with their sub-field, normalized and deduplicated.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeywordTable {
    entries: Vec<(String, KeywordCategory)>,
}

impl KeywordTable {
    /// Normalizes phrases to lowercase token sequences and drops repeats
    /// (first occurrence wins). Errors when nothing usable remains.
    pub fn new<I, S>(entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, KeywordCategory)>,
        S: AsRef<str>,
    {
        let mut out: Vec<(String, KeywordCategory)> = Vec::new();
        for (phrase, cat) in entries {
            let norm = normalize_phrase(phrase.as_ref());
            if norm.is_empty() || out.iter().any(|(p, _)| *p == norm) {
                continue;
            }
            out.push((norm, cat));
        }
        if out.is_empty() {
            return Err(Error::Config("keyword table is empty".into()));
        }
        Ok(KeywordTable { entries: out })
    }

    /// The published symbols / learning / robotics keyword list.
    pub fn default_bundle() -> Self {
        let rows = SYMBOLS
            .iter()
            .map(|p| (*p, KeywordCategory::Symbols))
            .chain(LEARNING.iter().map(|p| (*p, KeywordCategory::Learning)))
            .chain(ROBOTICS.iter().map(|p| (*p, KeywordCategory::Robotics)));
        KeywordTable::new(rows).expect("bundled keywords are non-empty")
    }

    pub fn entries(&self) -> &[(String, KeywordCategory)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn phrases(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(p, _)| p.as_str())
    }

    /// Reads a `phrase<TAB>category` table with a header row.
    pub fn load(path: &Path) -> Result<Self> {
        let rows = read_two_columns(path, ["phrase", "category"])?;
        let mut entries = Vec::with_capacity(rows.len());
        for (line, phrase, cat) in rows {
            let cat = cat.parse().map_err(|e: Error| Error::MalformedRow {
                path: path.to_path_buf(),
                line,
                reason: e.to_string(),
            })?;
            entries.push((phrase, cat));
        }
        KeywordTable::new(entries)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let rows: Vec<Vec<String>> = self
            .entries
            .iter()
            .map(|(p, c)| vec![p.clone(), c.to_string()])
            .collect();
        write_table(path, &["phrase", "category"], &rows)
    }
}

/// Patents whose title, abstract, claims or description contains at least one
/// keyword phrase as a run of consecutive tokens.
pub fn classify_keyword(corpus: &Corpus, table: &KeywordTable) -> PatentSet {
    let matcher = PhraseMatcher::new(table.phrases());
    corpus
        .indices()
        .filter(|&p| {
            corpus
                .record(p)
                .text_fields()
                .iter()
                .flatten()
                .any(|text| matcher.any_in(&tokenize(text)))
        })
        .collect()
}
