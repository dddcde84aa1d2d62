//! Seed / anti-seed trained component classifiers.
//!
//! Each AI component gets a seed set from CPC prefix rules, optionally
//! grown along shared subclasses and citation links, and a same-sized random
//! anti-seed from the remaining patents. A logistic scorer is then fitted on
//! bag-of-token features of abstract and claims plus two citation features
//! counting links into the seed.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, PatentIdx, PatentSet};
use crate::cpc::Level;
use crate::error::{Error, Result};
use crate::text::tokenize;

/// The eight AI components, in their customary order.
pub const USPTO_COMPONENTS: [&str; 8] = [
    "machine learning",
    "evolutionary computation",
    "natural language processing",
    "speech",
    "vision",
    "knowledge processing",
    "planning/control",
    "AI hardware",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UsptoConfig {
    pub components: Vec<String>,
    /// CPC prefixes selecting each component's initial seed.
    pub seed_rules: BTreeMap<String, Vec<String>>,
    pub expansion_hops: u32,
    pub vocab_size: usize,
    pub threshold: f64,
    pub epochs: usize,
    pub learning_rate: f64,
    pub rng_seed: u64,
}

impl Default for UsptoConfig {
    fn default() -> Self {
        let rules: [(&str, &[&str]); 8] = [
            ("machine learning", &["G06N20", "G06N3/08"]),
            ("evolutionary computation", &["G06N3/12"]),
            ("natural language processing", &["G06F40"]),
            ("speech", &["G10L15", "G10L25"]),
            ("vision", &["G06V", "G06T7"]),
            ("knowledge processing", &["G06N5"]),
            ("planning/control", &["G05B13", "G05D1"]),
            ("AI hardware", &["G06N3/063"]),
        ];
        UsptoConfig {
            components: USPTO_COMPONENTS.iter().map(|c| c.to_string()).collect(),
            seed_rules: rules
                .iter()
                .map(|(c, p)| (c.to_string(), p.iter().map(|s| s.to_string()).collect()))
                .collect(),
            expansion_hops: 1,
            vocab_size: 2000,
            threshold: 0.5,
            epochs: 200,
            learning_rate: 2.0,
            rng_seed: 17,
        }
    }
}

impl UsptoConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: UsptoConfig = toml::from_str(s).map_err(|e| Error::Config(format!("uspto config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        UsptoConfig::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.components.is_empty() {
            return Err(Error::Config("uspto: no components".into()));
        }
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return Err(Error::Config(format!("uspto: threshold {} not in (0,1)", self.threshold)));
        }
        if self.vocab_size == 0 {
            return Err(Error::Config("uspto: vocab_size must be positive".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config("uspto: learning_rate must be positive".into()));
        }
        for c in &self.components {
            if self.seed_rules.get(c).is_none_or(|r| r.is_empty()) {
                return Err(Error::Config(format!("uspto: component `{c}` has no seed rules")));
            }
        }
        Ok(())
    }
}

/// Training sets for one component.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentSeeds {
    pub component: String,
    pub seed: PatentSet,
    pub anti_seed: PatentSet,
}

fn expand(corpus: &Corpus, seed: &PatentSet) -> PatentSet {
    let mut grown: Vec<PatentIdx> = seed.iter().collect();
    let mut classes: Vec<u32> = seed
        .iter()
        .flat_map(|p| corpus.class_ids(p, Level::Subclass).iter().copied())
        .collect();
    classes.sort_unstable();
    classes.dedup();
    for class in classes {
        let name = corpus.class_name(Level::Subclass, class);
        grown.extend(corpus.patents_with_class(Level::Subclass, name).iter());
    }
    for p in seed.iter() {
        grown.extend_from_slice(corpus.cited_by(p));
        grown.extend_from_slice(corpus.cites(p));
    }
    grown.into_iter().collect()
}

/// Builds seed and anti-seed sets for every configured component.
pub fn build_uspto_seed(corpus: &Corpus, config: &UsptoConfig) -> Result<Vec<ComponentSeeds>> {
    config.validate()?;
    let mut out = Vec::with_capacity(config.components.len());
    for (i, component) in config.components.iter().enumerate() {
        let prefixes = &config.seed_rules[component];
        let mut seed: PatentSet = corpus
            .indices()
            .filter(|&p| corpus.codes(p).iter().any(|c| prefixes.iter().any(|pre| c.has_prefix(pre))))
            .collect();
        if seed.is_empty() {
            return Err(Error::Config(format!(
                "uspto: seed rules for component `{component}` match no patent"
            )));
        }
        for _ in 0..config.expansion_hops {
            seed = expand(corpus, &seed);
        }
        let remaining: Vec<PatentIdx> = corpus.indices().filter(|p| !seed.contains(*p)).collect();
        let amount = seed.len().min(remaining.len());
        let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed.wrapping_add((i as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)));
        let anti_seed: PatentSet = rand::seq::index::sample(&mut rng, remaining.len(), amount)
            .into_iter()
            .map(|k| remaining[k])
            .collect();
        log::debug!("uspto component `{component}`: seed {} anti-seed {}", seed.len(), anti_seed.len());
        out.push(ComponentSeeds {
            component: component.clone(),
            seed,
            anti_seed,
        });
    }
    Ok(out)
}

/// Logistic scorer for one component.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentModel {
    pub component: String,
    pub vocab: Vec<String>,
    vocab_index: HashMap<String, u32>,
    /// token weights followed by the backward and forward citation weights
    pub weights: Vec<f64>,
    pub bias: f64,
    seed: PatentSet,
}

impl ComponentModel {
    fn features(&self, corpus: &Corpus, p: PatentIdx, tokens: &[String]) -> Vec<(usize, f64)> {
        let mut counts: BTreeMap<u32, f64> = BTreeMap::new();
        for t in tokens {
            if let Some(&k) = self.vocab_index.get(t) {
                *counts.entry(k).or_default() += 1.0;
            }
        }
        let norm = counts.values().map(|c| c * c).sum::<f64>().sqrt();
        let mut x: Vec<(usize, f64)> = counts.into_iter().map(|(k, c)| (k as usize, c / norm)).collect();
        let v = self.vocab.len();
        let backward = corpus.cites(p).iter().filter(|q| self.seed.contains(**q)).count();
        let forward = corpus.cited_by(p).iter().filter(|q| self.seed.contains(**q)).count();
        if backward > 0 {
            x.push((v, (backward as f64).ln_1p()));
        }
        if forward > 0 {
            x.push((v + 1, (forward as f64).ln_1p()));
        }
        x
    }

    fn score(&self, x: &[(usize, f64)]) -> f64 {
        sigmoid(self.bias + x.iter().map(|&(k, v)| self.weights[k] * v).sum::<f64>())
    }

    /// Probability that patent `p` belongs to this component.
    pub fn probability(&self, corpus: &Corpus, p: PatentIdx) -> f64 {
        self.score(&self.features(corpus, p, &doc_tokens(corpus, p)))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UsptoModel {
    pub components: Vec<ComponentModel>,
    pub threshold: f64,
}

impl UsptoModel {
    /// Replaces the decision threshold; any value in [0, 1] is accepted here.
    pub fn with_threshold(mut self, threshold: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&threshold) {
            return Err(Error::Config(format!("threshold {threshold} not in [0,1]")));
        }
        self.threshold = threshold;
        Ok(self)
    }

    /// Per-component probabilities for one patent.
    pub fn probabilities(&self, corpus: &Corpus, p: PatentIdx) -> Vec<f64> {
        let tokens = doc_tokens(corpus, p);
        self.components
            .iter()
            .map(|m| m.score(&m.features(corpus, p, &tokens)))
            .collect()
    }
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

fn doc_tokens(corpus: &Corpus, p: PatentIdx) -> Vec<String> {
    let r = corpus.record(p);
    [r.abstract_text.as_deref(), r.claims.as_deref()]
        .into_iter()
        .flatten()
        .flat_map(tokenize)
        .collect()
}

fn train_component(corpus: &Corpus, seeds: &ComponentSeeds, config: &UsptoConfig) -> Result<ComponentModel> {
    let name = &seeds.component;
    if seeds.seed.is_empty() || seeds.anti_seed.is_empty() {
        return Err(Error::Training(format!("component `{name}` needs a non-empty seed and anti-seed")));
    }
    if !seeds.seed.intersection(&seeds.anti_seed).is_empty() {
        return Err(Error::Training(format!("component `{name}`: seed and anti-seed overlap")));
    }
    let examples: Vec<(PatentIdx, f64)> = seeds
        .seed
        .iter()
        .map(|p| (p, 1.0))
        .chain(seeds.anti_seed.iter().map(|p| (p, 0.0)))
        .collect();
    let docs: Vec<Vec<String>> = examples.iter().map(|(p, _)| doc_tokens(corpus, *p)).collect();

    let mut df: HashMap<&str, usize> = HashMap::new();
    for d in &docs {
        let mut uniq: Vec<&str> = d.iter().map(String::as_str).collect();
        uniq.sort_unstable();
        uniq.dedup();
        for t in uniq {
            *df.entry(t).or_default() += 1;
        }
    }
    if df.is_empty() {
        return Err(Error::Training(format!("component `{name}`: vocabulary is empty")));
    }
    let mut ranked: Vec<(&str, usize)> = df.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    ranked.truncate(config.vocab_size);
    let vocab: Vec<String> = ranked.into_iter().map(|(t, _)| t.to_string()).collect();
    let vocab_index = vocab.iter().enumerate().map(|(i, t)| (t.clone(), i as u32)).collect();

    let mut model = ComponentModel {
        component: name.clone(),
        weights: vec![0.0; vocab.len() + 2],
        vocab,
        vocab_index,
        bias: 0.0,
        seed: seeds.seed.clone(),
    };
    let xs: Vec<Vec<(usize, f64)>> = examples
        .iter()
        .zip(&docs)
        .map(|((p, _), d)| model.features(corpus, *p, d))
        .collect();

    // full-batch gradient descent on the mean logistic loss
    let n = xs.len() as f64;
    let mut grad = vec![0.0; model.weights.len()];
    for _ in 0..config.epochs {
        grad.iter_mut().for_each(|g| *g = 0.0);
        let mut grad_b = 0.0;
        for (x, (_, y)) in xs.iter().zip(&examples) {
            let err = model.score(x) - y;
            grad_b += err;
            for &(k, v) in x {
                grad[k] += err * v;
            }
        }
        for (w, g) in model.weights.iter_mut().zip(&grad) {
            *w -= config.learning_rate * g / n;
        }
        model.bias -= config.learning_rate * grad_b / n;
    }
    Ok(model)
}

/// Fits one scorer per component.
pub fn train_uspto(corpus: &Corpus, seeds: &[ComponentSeeds], config: &UsptoConfig) -> Result<UsptoModel> {
    let components = seeds
        .iter()
        .map(|s| train_component(corpus, s, config))
        .collect::<Result<Vec<_>>>()?;
    Ok(UsptoModel {
        components,
        threshold: config.threshold,
    })
}

/// Patents scoring at or above the threshold in at least one component.
pub fn classify_uspto(model: &UsptoModel, corpus: &Corpus) -> PatentSet {
    corpus
        .indices()
        .filter(|&p| model.probabilities(corpus, p).iter().any(|&q| q >= model.threshold))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{CorpusBuilder, PatentId, PatentRecord, YearWindow};
    use crate::cpc::CpcCode;

    /// `n` seed patents (code G10L, marker token) and `n` others.
    fn planted(n: usize) -> Corpus {
        let mut b = CorpusBuilder::new(YearWindow::default());
        for i in 0..2 * n {
            let id = PatentId::new(format!("p{i:04}")).unwrap();
            let mut r = PatentRecord::new(id.clone(), 2000 + (i % 10) as i32);
            let seed = i < n;
            r.abstract_text = Some(if seed {
                format!("filler{} zorbix device {}", i % 7, i % 3)
            } else {
                format!("filler{} plain device {}", i % 7, i % 3)
            });
            b.add_patent(r).unwrap();
            let code = if seed { "G10L 15/22" } else { ["A61B", "B60R", "H04L"][i % 3] };
            b.add_cpc(id, CpcCode::parse(code).unwrap());
        }
        b.build().unwrap().0
    }

    fn config() -> UsptoConfig {
        UsptoConfig {
            components: vec!["speech".into()],
            seed_rules: [("speech".to_string(), vec!["G10L".to_string()])].into_iter().collect(),
            expansion_hops: 0,
            vocab_size: 50,
            threshold: 0.5,
            epochs: 300,
            learning_rate: 2.0,
            rng_seed: 5,
        }
    }

    #[test]
    fn default_config_is_valid_and_round_trips() {
        let cfg = UsptoConfig::default();
        cfg.validate().unwrap();
        assert_eq!(cfg.components.len(), 8);
        assert_eq!(UsptoConfig::from_toml_str(&cfg.to_toml_string()).unwrap(), cfg);
    }

    #[test]
    fn config_validation() {
        let mut cfg = config();
        cfg.threshold = 1.0;
        assert!(cfg.validate().is_err());
        let mut cfg = config();
        cfg.components.push("vision".into());
        assert!(cfg.validate().is_err());
        assert!(UsptoConfig::from_toml_str("bogus = 1").is_err());
    }

    #[test]
    fn no_expansion_keeps_prefix_matches() {
        let c = planted(20);
        let seeds = build_uspto_seed(&c, &config()).unwrap();
        assert_eq!(seeds[0].seed.len(), 20);
        assert_eq!(seeds[0].anti_seed.len(), 20);
        assert!(seeds[0].seed.intersection(&seeds[0].anti_seed).is_empty());
        assert_eq!(build_uspto_seed(&c, &config()).unwrap(), seeds);
    }

    #[test]
    fn citation_expansion() {
        let mut b = CorpusBuilder::new(YearWindow::default());
        let codes = [("p", "G10L"), ("q", "A61B"), ("r", "B60R"), ("s", "H04L")];
        for (id, code) in codes {
            let pid = PatentId::new(id).unwrap();
            b.add_patent(PatentRecord::new(pid.clone(), 2000)).unwrap();
            b.add_cpc(pid, CpcCode::parse(code).unwrap());
        }
        let id = |s: &str| PatentId::new(s).unwrap();
        b.add_citation(id("q"), id("p"), None);
        b.add_citation(id("r"), id("q"), None);
        let (c, _) = b.build().unwrap();
        let mut cfg = config();
        cfg.expansion_hops = 1;
        let seeds = build_uspto_seed(&c, &cfg).unwrap();
        let names: Vec<_> = c.ids_of(&seeds[0].seed).into_iter().map(|i| i.to_string()).collect();
        assert_eq!(names, ["p", "q"]);
        cfg.expansion_hops = 2;
        assert_eq!(build_uspto_seed(&c, &cfg).unwrap()[0].seed.len(), 3);
    }

    #[test]
    fn unmatched_component_is_named() {
        let c = planted(5);
        let mut cfg = config();
        cfg.components.push("vision".into());
        cfg.seed_rules.insert("vision".into(), vec!["G06V".into()]);
        match build_uspto_seed(&c, &cfg) {
            Err(Error::Config(msg)) => assert!(msg.contains("vision")),
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn separable_training_is_perfect_and_deterministic() {
        let c = planted(40);
        let cfg = config();
        let seeds = build_uspto_seed(&c, &cfg).unwrap();
        let model = train_uspto(&c, &seeds, &cfg).unwrap();
        let m = &model.components[0];
        for p in seeds[0].seed.iter() {
            assert!(m.probability(&c, p) >= 0.5);
        }
        for p in seeds[0].anti_seed.iter() {
            assert!(m.probability(&c, p) < 0.5);
        }
        assert_eq!(train_uspto(&c, &seeds, &cfg).unwrap(), model);
        assert_eq!(classify_uspto(&model, &c), seeds[0].seed);
    }

    #[test]
    fn zero_epochs_scores_at_initialization() {
        let c = planted(10);
        let mut cfg = config();
        cfg.epochs = 0;
        let seeds = build_uspto_seed(&c, &cfg).unwrap();
        let model = train_uspto(&c, &seeds, &cfg).unwrap();
        assert!(c.indices().all(|p| model.probabilities(&c, p) == vec![0.5]));
        // 0.5 >= 0.5: everything passes the default threshold
        assert_eq!(classify_uspto(&model, &c).len(), c.len());
        let strict = model.with_threshold(0.6).unwrap();
        assert!(classify_uspto(&strict, &c).is_empty());
    }

    #[test]
    fn zero_threshold_takes_everything() {
        let c = planted(10);
        let cfg = config();
        let seeds = build_uspto_seed(&c, &cfg).unwrap();
        let model = train_uspto(&c, &seeds, &cfg).unwrap().with_threshold(0.0).unwrap();
        assert_eq!(classify_uspto(&model, &c).len(), c.len());
    }

    #[test]
    fn empty_vocabulary_fails_training() {
        let mut b = CorpusBuilder::new(YearWindow::default());
        for (id, code) in [("a", "G10L"), ("b", "A61B")] {
            let pid = PatentId::new(id).unwrap();
            b.add_patent(PatentRecord::new(pid.clone(), 2000)).unwrap();
            b.add_cpc(pid, CpcCode::parse(code).unwrap());
        }
        let (c, _) = b.build().unwrap();
        let seeds = build_uspto_seed(&c, &config()).unwrap();
        assert!(matches!(train_uspto(&c, &seeds, &config()), Err(Error::Training(_))));
    }

    #[test]
    fn overlapping_sets_fail_training() {
        let c = planted(5);
        let mut seeds = build_uspto_seed(&c, &config()).unwrap();
        seeds[0].anti_seed = seeds[0].seed.clone();
        assert!(matches!(train_uspto(&c, &seeds, &config()), Err(Error::Training(_))));
    }
}
