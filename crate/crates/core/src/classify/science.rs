use crate::corpus::{Corpus, PatentSet};

/// Web-of-Science category identifying AI research papers.
pub const AI_FIELD_LABEL: &str = "Computer Science; Artificial Intelligence";

/// Science-citation rule: a link must carry `field_label` exactly and a
/// confidence strictly above `min_confidence`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScienceRule {
    pub field_label: String,
    pub min_confidence: u32,
}

impl Default for ScienceRule {
    fn default() -> Self {
        ScienceRule {
            field_label: AI_FIELD_LABEL.to_string(),
            min_confidence: 3,
        }
    }
}

/// Patents with at least one science link to `field_label` whose confidence
/// exceeds `min_confidence`.
pub fn classify_science(corpus: &Corpus, field_label: &str, min_confidence: u32) -> PatentSet {
    let label = field_label.trim();
    corpus
        .indices()
        .filter(|&p| {
            corpus
                .science_links(p)
                .iter()
                .any(|(l, conf)| l == label && *conf > min_confidence)
        })
        .collect()
}
