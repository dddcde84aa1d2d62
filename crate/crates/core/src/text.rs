//! Tokenization and multi-phrase matching on token boundaries.

use std::collections::HashMap;

/// Lowercases `text` and splits it on every non-alphanumeric character.
/// Hyphens, punctuation and whitespace runs all act as a single separator.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

/// Normalized form of a phrase: its tokens joined by single spaces.
pub fn normalize_phrase(phrase: &str) -> String {
    tokenize(phrase).join(" ")
}

/// Matches a fixed set of phrases as consecutive token runs.
///
/// Phrases are bucketed by their first token, so a scan costs one hash lookup
/// per input token plus the comparisons for phrases sharing that token.
#[derive(Debug, Clone, Default)]
pub struct PhraseMatcher {
    phrases: Vec<Vec<String>>,
    by_first: HashMap<String, Vec<usize>>,
}

impl PhraseMatcher {
    pub fn new<I, S>(phrases: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut m = PhraseMatcher::default();
        for p in phrases {
            m.push(p.as_ref());
        }
        m
    }

    /// Adds a phrase and returns its id; empty phrases are ignored.
    pub fn push(&mut self, phrase: &str) -> Option<usize> {
        let tokens = tokenize(phrase);
        let first = tokens.first()?.clone();
        if let Some(existing) = self.phrases.iter().position(|p| *p == tokens) {
            return Some(existing);
        }
        let id = self.phrases.len();
        self.phrases.push(tokens);
        self.by_first.entry(first).or_default().push(id);
        Some(id)
    }

    pub fn len(&self) -> usize {
        self.phrases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phrases.is_empty()
    }

    /// Calls `hit` with the id of every phrase occurring in `tokens`
    /// (possibly more than once per phrase).
    pub fn scan(&self, tokens: &[String], mut hit: impl FnMut(usize)) {
        for (i, tok) in tokens.iter().enumerate() {
            let Some(cands) = self.by_first.get(tok) else {
                continue;
            };
            for &id in cands {
                let p = &self.phrases[id];
                if tokens.len() - i >= p.len() && tokens[i..i + p.len()] == p[..] {
                    hit(id);
                }
            }
        }
    }

    /// True when any phrase occurs in `tokens`.
    pub fn any_in(&self, tokens: &[String]) -> bool {
        tokens.iter().enumerate().any(|(i, tok)| {
            self.by_first.get(tok).is_some_and(|cands| {
                cands.iter().any(|&id| {
                    let p = &self.phrases[id];
                    tokens.len() - i >= p.len() && tokens[i..i + p.len()] == p[..]
                })
            })
        })
    }

    /// Ids of the phrases that occur in `tokens`, sorted and deduplicated.
    pub fn matches(&self, tokens: &[String]) -> Vec<usize> {
        let mut out = Vec::new();
        self.scan(tokens, |id| out.push(id));
        out.sort_unstable();
        out.dedup();
        out
    }
}
