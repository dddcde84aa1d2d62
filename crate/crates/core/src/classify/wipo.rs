use std::collections::BTreeSet;
use std::path::Path;

use crate::corpus::{Corpus, PatentSet};
use crate::error::{Error, Result};
use crate::io::{read_named_rows, write_table};
use crate::text::{normalize_phrase, tokenize, PhraseMatcher};

/// Code / keyword / combined classification rules.
///
/// A patent matches when one of its codes starts with a `code_only` prefix,
/// when its title, abstract or claims contain a `keyword_only` phrase, or
/// when a `combined` pair has both its code prefix and its phrase satisfied.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct WipoRuleSet {
    pub code_only: BTreeSet<String>,
    pub keyword_only: BTreeSet<String>,
    pub combined: BTreeSet<(String, String)>,
}

const COLUMNS: [&str; 3] = ["rule_kind", "code_prefix", "phrase"];

fn norm_prefix(p: &str) -> String {
    p.chars().filter(|c| !c.is_whitespace()).collect::<String>().to_uppercase()
}

impl WipoRuleSet {
    pub fn new<C, K, P>(code_only: C, keyword_only: K, combined: P) -> Result<Self>
    where
        C: IntoIterator,
        C::Item: AsRef<str>,
        K: IntoIterator,
        K::Item: AsRef<str>,
        P: IntoIterator<Item = (String, String)>,
    {
        let rules = WipoRuleSet {
            code_only: code_only.into_iter().map(|c| norm_prefix(c.as_ref())).filter(|c| !c.is_empty()).collect(),
            keyword_only: keyword_only
                .into_iter()
                .map(|k| normalize_phrase(k.as_ref()))
                .filter(|k| !k.is_empty())
                .collect(),
            combined: combined
                .into_iter()
                .map(|(c, k)| (norm_prefix(&c), normalize_phrase(&k)))
                .filter(|(c, k)| !c.is_empty() && !k.is_empty())
                .collect(),
        };
        rules.validate()?;
        Ok(rules)
    }

    pub fn validate(&self) -> Result<()> {
        if self.code_only.is_empty() && self.keyword_only.is_empty() && self.combined.is_empty() {
            return Err(Error::Config("WIPO rule set has no rules".into()));
        }
        Ok(())
    }

    /// A small illustrative rule set. The official tables must be supplied
    /// for real runs.
    pub fn sample() -> Self {
        WipoRuleSet::new(
            ["G06N"],
            ["machine learning", "neural network"],
            [
                ("G06F".to_string(), "expert system".to_string()),
                ("G10L".to_string(), "speech recognition".to_string()),
            ],
        )
        .expect("sample rules are non-empty")
    }

    /// Reads `rule_kind, code_prefix, phrase` rows.
    pub fn load(path: &Path) -> Result<Self> {
        let mut rules = WipoRuleSet::default();
        for (line, row) in read_named_rows(path, &COLUMNS)? {
            let bad = |reason: &str| Error::MalformedRow {
                path: path.to_path_buf(),
                line,
                reason: reason.to_string(),
            };
            let code = norm_prefix(&row["code_prefix"]);
            let phrase = normalize_phrase(&row["phrase"]);
            match row["rule_kind"].as_str() {
                "code" if !code.is_empty() => {
                    rules.code_only.insert(code);
                }
                "keyword" if !phrase.is_empty() => {
                    rules.keyword_only.insert(phrase);
                }
                "combined" if !code.is_empty() && !phrase.is_empty() => {
                    rules.combined.insert((code, phrase));
                }
                "code" | "keyword" | "combined" => return Err(bad("rule is missing its code prefix or phrase")),
                _ => return Err(bad("rule_kind must be code, keyword or combined")),
            }
        }
        rules.validate()?;
        Ok(rules)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut rows = Vec::new();
        for c in &self.code_only {
            rows.push(vec!["code".into(), c.clone(), String::new()]);
        }
        for k in &self.keyword_only {
            rows.push(vec!["keyword".into(), String::new(), k.clone()]);
        }
        for (c, k) in &self.combined {
            rows.push(vec!["combined".into(), c.clone(), k.clone()]);
        }
        write_table(path, &COLUMNS, &rows)
    }
}

/// Applies the rule set. Keyword rules only look at title, abstract and
/// claims.
pub fn classify_wipo(corpus: &Corpus, rules: &WipoRuleSet) -> Result<PatentSet> {
    rules.validate()?;
    let keywords = PhraseMatcher::new(&rules.keyword_only);
    let mut combined = PhraseMatcher::new(Vec::<&str>::new());
    let combined_ids: Vec<(usize, &str)> = rules
        .combined
        .iter()
        .filter_map(|(code, phrase)| combined.push(phrase).map(|id| (id, code.as_str())))
        .collect();

    let set = corpus
        .indices()
        .filter(|&p| {
            let compact: Vec<String> = corpus.codes(p).iter().map(|c| c.compact()).collect();
            let has_prefix = |prefix: &str| compact.iter().any(|c| c.starts_with(prefix));
            if rules.code_only.iter().any(|c| has_prefix(c)) {
                return true;
            }
            let r = corpus.record(p);
            let fields: Vec<Vec<String>> = [r.title.as_deref(), r.abstract_text.as_deref(), r.claims.as_deref()]
                .into_iter()
                .flatten()
                .map(tokenize)
                .collect();
            if !keywords.is_empty() && fields.iter().any(|t| keywords.any_in(t)) {
                return true;
            }
            if combined_ids.is_empty() {
                return false;
            }
            let mut found: Vec<usize> = fields.iter().flat_map(|t| combined.matches(t)).collect();
            found.sort_unstable();
            found.dedup();
            combined_ids
                .iter()
                .any(|(id, code)| found.binary_search(id).is_ok() && has_prefix(code))
        })
        .collect();
    Ok(set)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{CorpusBuilder, PatentId, PatentRecord, YearWindow};
    use crate::cpc::CpcCode;

    fn corpus() -> Corpus {
        let mut b = CorpusBuilder::new(YearWindow::default());
        let rows = [
            ("a", "G06N 3/08", None, None),
            ("b", "G06F", Some("plain widget"), None),
            ("c", "A61B", None, Some("uses machine learning")),
            ("d", "G06F", Some("a neural network chip"), None),
            ("e", "A61B", Some("a neural network chip"), None),
        ];
        for (id, code, abs, desc) in rows {
            let pid = PatentId::new(id).unwrap();
            let mut r = PatentRecord::new(pid.clone(), 2005);
            r.abstract_text = abs.map(str::to_string);
            r.description = desc.map(str::to_string);
            b.add_patent(r).unwrap();
            b.add_cpc(pid, CpcCode::parse(code).unwrap());
        }
        b.build().unwrap().0
    }

    fn run(c: &Corpus, rules: &WipoRuleSet) -> Vec<String> {
        c.ids_of(&classify_wipo(c, rules).unwrap()).into_iter().map(|i| i.to_string()).collect()
    }

    fn none() -> Vec<String> {
        Vec::new()
    }

    #[test]
    fn code_rule_uses_prefix() {
        let c = corpus();
        let r = WipoRuleSet::new(["G06N"], none(), []).unwrap();
        assert_eq!(run(&c, &r), ["a"]);
        let r = WipoRuleSet::new(["G06N3"], none(), []).unwrap();
        assert_eq!(run(&c, &r), ["a"]);
    }

    #[test]
    fn combined_rule_needs_both_parts() {
        let c = corpus();
        let r = WipoRuleSet::new(none(), none(), [("G06".into(), "neural network".into())]).unwrap();
        assert_eq!(run(&c, &r), ["d"]);
    }

    #[test]
    fn keyword_rule_ignores_description() {
        let c = corpus();
        let r = WipoRuleSet::new(none(), ["machine learning"], []).unwrap();
        assert!(run(&c, &r).is_empty());
        let r = WipoRuleSet::new(none(), ["neural network"], []).unwrap();
        assert_eq!(run(&c, &r), ["d", "e"]);
    }

    #[test]
    fn empty_rules_are_a_config_error() {
        assert!(matches!(WipoRuleSet::new(none(), none(), []), Err(Error::Config(_))));
        assert!(matches!(
            classify_wipo(&corpus(), &WipoRuleSet::default()),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn rules_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("wipo_rules.tsv");
        let r = WipoRuleSet::sample();
        r.write(&path).unwrap();
        assert_eq!(WipoRuleSet::load(&path).unwrap(), r);
    }
}
