//! Seeded synthetic corpora with planted groups, growth and citation lags.
//!
//! Group membership is allocated by deterministic interleaving, so group
//! sizes and pairwise overlaps are exact up to rounding. Everything else
//! (filler text, background codes, citations) comes from one ChaCha stream
//! seeded by `rng_seed`.

use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::classify::AI_FIELD_LABEL;
use crate::corpus::{Corpus, CorpusBuilder, LoadReport, PatentId, PatentRecord, PatentSet, ScienceLink, YearWindow};
use crate::cpc::CpcCode;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthConfig {
    pub rng_seed: u64,
    pub first_year: i32,
    pub last_year: i32,
    pub volume: VolumeConfig,
    #[serde(default)]
    pub groups: Vec<GroupSpec>,
    #[serde(default)]
    pub overlaps: Vec<OverlapSpec>,
    /// Patents belonging to every group, as a share of the corpus.
    #[serde(default)]
    pub all_way_share: f64,
    #[serde(default)]
    pub citations: CitationModel,
    #[serde(default)]
    pub cpc: CpcModel,
    #[serde(default)]
    pub science: ScienceModel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VolumeConfig {
    /// Patents in the first year.
    pub n0: usize,
    /// Constant yearly growth, used when `schedule` is absent.
    #[serde(default)]
    pub growth: f64,
    /// Growth for each year after the first.
    #[serde(default)]
    pub schedule: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupSpec {
    pub name: String,
    pub share: f64,
    /// Each member carries one of these in its abstract.
    #[serde(default)]
    pub phrases: Vec<String>,
    /// Each member carries one of these codes. They never appear as
    /// background codes.
    #[serde(default)]
    pub codes: Vec<String>,
    /// Members get a high-confidence AI science link.
    #[serde(default)]
    pub science: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OverlapSpec {
    pub groups: [String; 2],
    pub jaccard: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CitationModel {
    pub edges_per_patent: f64,
    /// Relative chance of citing a group member over a non-member.
    pub ai_attraction: f64,
    /// Mean of the geometric lag before truncation.
    pub lag_mean: f64,
}

impl Default for CitationModel {
    fn default() -> Self {
        CitationModel {
            edges_per_patent: 4.0,
            ai_attraction: 3.0,
            lag_mean: 6.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CpcModel {
    /// Background codes per patent, drawn uniformly from 1..=max_codes.
    pub max_codes: usize,
    /// Zipf exponent over the background subclasses.
    pub concentration: f64,
}

impl Default for CpcModel {
    fn default() -> Self {
        CpcModel {
            max_codes: 3,
            concentration: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScienceModel {
    /// Confidence range of member links; must sit above the rule threshold.
    pub member_confidence: [u32; 2],
    /// Chance that a patent gets a decoy link (other field, or low
    /// confidence).
    pub noise_rate: f64,
}

impl Default for ScienceModel {
    fn default() -> Self {
        ScienceModel {
            member_confidence: [4, 9],
            noise_rate: 0.05,
        }
    }
}

impl SynthConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let config: SynthConfig = toml::from_str(s).map_err(|e| Error::Config(format!("synth config: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("synth config serializes")
    }

    pub fn window(&self) -> Result<YearWindow> {
        YearWindow::new(self.first_year, self.last_year)
    }

    pub fn validate(&self) -> Result<()> {
        let cfg = |m: String| Err(Error::Config(m));
        let window = self.window()?;
        if let Some(s) = &self.volume.schedule {
            if s.len() + 1 != window.len() {
                return cfg(format!("growth schedule has {} entries, expected {}", s.len(), window.len() - 1));
            }
        }
        if self.growth_rates(window.len()).any(|g| !(g > -1.0 && g.is_finite())) {
            return cfg("growth rates must be finite and above -1".into());
        }
        let mut names = HashSet::new();
        for g in &self.groups {
            if g.name.trim().is_empty() || !names.insert(g.name.as_str()) {
                return cfg(format!("group name `{}` is empty or repeated", g.name));
            }
            if !(0.0..=1.0).contains(&g.share) {
                return cfg(format!("group {}: share {} outside [0,1]", g.name, g.share));
            }
            for c in &g.codes {
                CpcCode::parse(c)?;
            }
        }
        for o in &self.overlaps {
            for n in &o.groups {
                if !names.contains(n.as_str()) {
                    return cfg(format!("overlap refers to unknown group `{n}`"));
                }
            }
            if o.groups[0] == o.groups[1] || !(0.0..1.0).contains(&o.jaccard) {
                return cfg(format!("overlap {:?}: needs two groups and jaccard in [0,1)", o.groups));
            }
        }
        if !(0.0..=1.0).contains(&self.all_way_share) {
            return cfg("all_way_share outside [0,1]".into());
        }
        let c = &self.citations;
        if c.edges_per_patent < 0.0 || c.ai_attraction <= 0.0 || c.lag_mean < 0.0 {
            return cfg("citation model parameters out of range".into());
        }
        if self.cpc.max_codes == 0 || self.cpc.concentration < 0.0 {
            return cfg("cpc model: max_codes must be positive".into());
        }
        let [lo, hi] = self.science.member_confidence;
        if lo < 1 || lo > hi || !(0.0..=1.0).contains(&self.science.noise_rate) {
            return cfg("science model parameters out of range".into());
        }
        Ok(())
    }

    fn growth_rates(&self, years: usize) -> impl Iterator<Item = f64> + '_ {
        let constant = self.volume.growth;
        let schedule = self.volume.schedule.clone();
        (0..years.saturating_sub(1)).map(move |i| schedule.as_ref().map_or(constant, |s| s[i]))
    }
}

/// Yearly patent counts `floor(n0 * prod(1 + g_t))`.
pub fn plant_growth(config: &SynthConfig) -> Result<Vec<(i32, usize)>> {
    let window = config.window()?;
    let mut level = config.volume.n0 as f64;
    let mut out = vec![(window.first, config.volume.n0)];
    for (year, g) in window.years().skip(1).zip(config.growth_rates(window.len())) {
        level *= 1.0 + g;
        // guard against 0.9999999 style float error before flooring
        out.push((year, (level + 1e-9).floor() as usize));
    }
    Ok(out)
}

/// A generated corpus with its exact group memberships.
#[derive(Debug, Clone)]
pub struct SynthOutput {
    pub corpus: Corpus,
    pub report: LoadReport,
    pub truth: BTreeMap<String, PatentSet>,
}

impl SynthOutput {
    /// Union of all planted groups.
    pub fn planted_union(&self) -> PatentSet {
        self.truth.values().fold(PatentSet::new(), |acc, s| acc.union(s))
    }
}

const SECTIONS: [(char, usize); 9] = [
    ('A', 16),
    ('B', 37),
    ('C', 21),
    ('D', 9),
    ('E', 8),
    ('F', 18),
    ('G', 17),
    ('H', 6),
    ('Y', 4),
];
const SUBCLASS_LETTERS: &[u8] = b"BWFNLKSCAJ";
const UNIVERSE_SUBCLASSES: usize = 674;

/// 674 subclasses spread over 136 classes, shaped like the real scheme's
/// code space.
pub fn background_universe() -> Vec<String> {
    let mut classes = Vec::new();
    for (section, count) in SECTIONS {
        for n in 1..=count {
            // B has no B37 but does have B82
            let n = if section == 'B' && n == count { 82 } else { n };
            classes.push(format!("{section}{n:02}"));
        }
    }
    let base = UNIVERSE_SUBCLASSES / classes.len();
    let extra = UNIVERSE_SUBCLASSES % classes.len();
    let mut out = Vec::with_capacity(UNIVERSE_SUBCLASSES);
    for (i, class) in classes.iter().enumerate() {
        let k = base + usize::from(i < extra);
        out.extend(SUBCLASS_LETTERS[..k].iter().map(|&l| format!("{class}{}", l as char)));
    }
    out
}

const FILLER_CONSONANTS: &[u8] = b"bdfgjklmnpqstvwxz";
const DECOY_LABELS: [&str; 3] = [
    "Computer Science; Information Systems",
    "Engineering, Electrical & Electronic",
    "Biochemistry & Molecular Biology",
];

/// Vowel-free pseudo-words. No keyword phrase token can be formed from them.
fn filler_vocabulary(rng: &mut ChaCha8Rng, size: usize) -> Vec<String> {
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(size);
    while out.len() < size {
        let len = rng.random_range(3..=7);
        let w: String = (0..len)
            .map(|_| FILLER_CONSONANTS[rng.random_range(0..FILLER_CONSONANTS.len())] as char)
            .collect();
        if seen.insert(w.clone()) {
            out.push(w);
        }
    }
    out
}

fn filler(rng: &mut ChaCha8Rng, vocab: &[String], lo: usize, hi: usize) -> Vec<String> {
    let n = rng.random_range(lo..=hi);
    (0..n).map(|_| vocab[rng.random_range(0..vocab.len())].clone()).collect()
}

/// Group-membership patterns with their exact sizes. Pattern 0 is "no
/// group".
fn membership_patterns(config: &SynthConfig, total: usize) -> Result<Vec<(Vec<usize>, usize)>> {
    let k = config.groups.len();
    let sizes: Vec<usize> = config.groups.iter().map(|g| (g.share * total as f64).round() as usize).collect();
    let all_way = if k >= 2 {
        (config.all_way_share * total as f64).round() as usize
    } else {
        0
    };
    let index = |name: &str| config.groups.iter().position(|g| g.name == name).expect("validated");
    let mut patterns: Vec<(Vec<usize>, usize)> = Vec::new();
    if all_way > 0 {
        patterns.push(((0..k).collect(), all_way));
    }
    let mut used = vec![all_way; k];
    for o in &config.overlaps {
        let (a, b) = (index(&o.groups[0]), index(&o.groups[1]));
        let inter = (o.jaccard * (sizes[a] + sizes[b]) as f64 / (1.0 + o.jaccard)).round() as usize;
        if inter < all_way {
            return Err(Error::Config(format!(
                "overlap {}~{}: target jaccard {} is below what the all-way block already implies",
                o.groups[0], o.groups[1], o.jaccard
            )));
        }
        let pair = inter - all_way;
        used[a] += pair;
        used[b] += pair;
        if pair > 0 {
            let mut members = vec![a, b];
            members.sort_unstable();
            patterns.push((members, pair));
        }
    }
    for (g, (&size, &u)) in sizes.iter().zip(&used).enumerate() {
        if u > size {
            return Err(Error::Config(format!(
                "group {}: overlaps need {u} members but the share gives only {size}",
                config.groups[g].name
            )));
        }
        if size > u {
            patterns.push((vec![g], size - u));
        }
    }
    let planted: usize = patterns.iter().map(|p| p.1).sum();
    if planted > total {
        return Err(Error::Config(format!(
            "groups need {planted} distinct patents but the corpus has {total}"
        )));
    }
    patterns.insert(0, (Vec::new(), total - planted));
    Ok(patterns)
}

/// Spreads pattern counts evenly along the patent sequence: each slot goes
/// to the pattern furthest behind its proportional quota.
fn interleave(counts: &[usize], total: usize) -> Vec<usize> {
    let mut assigned = vec![0usize; counts.len()];
    let mut out = Vec::with_capacity(total);
    for i in 0..total {
        let mut best = 0;
        let mut best_deficit = f64::NEG_INFINITY;
        for (k, &c) in counts.iter().enumerate() {
            if assigned[k] >= c {
                continue;
            }
            let deficit = c as f64 * (i + 1) as f64 / total as f64 - assigned[k] as f64;
            if deficit > best_deficit {
                best = k;
                best_deficit = deficit;
            }
        }
        assigned[best] += 1;
        out.push(best);
    }
    out
}

/// Lag in `0..=max` from a geometric law with the given mean, truncated.
fn truncated_geometric(rng: &mut ChaCha8Rng, mean: f64, max: i32) -> i32 {
    if mean <= 0.0 || max == 0 {
        return 0;
    }
    let q = mean / (1.0 + mean);
    let u: f64 = rng.random();
    let mass = 1.0 - q.powi(max + 1);
    let k = ((1.0 - u * mass).ln() / q.ln()).ceil() as i32 - 1;
    k.clamp(0, max)
}

pub fn generate(config: &SynthConfig) -> Result<SynthOutput> {
    config.validate()?;
    let window = config.window()?;
    let yearly = plant_growth(config)?;
    let total: usize = yearly.iter().map(|y| y.1).sum();
    let patterns = membership_patterns(config, total)?;
    let slots = interleave(&patterns.iter().map(|p| p.1).collect::<Vec<_>>(), total);

    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    let vocab = filler_vocabulary(&mut rng, 2000);

    let reserved: HashSet<String> = config
        .groups
        .iter()
        .flat_map(|g| g.codes.iter())
        .map(|c| CpcCode::parse(c).map(|c| c.subclass4().to_string()))
        .collect::<Result<_>>()?;
    let mut background: Vec<String> = background_universe().into_iter().filter(|c| !reserved.contains(c)).collect();
    // shuffle so that Zipf rank is not tied to alphabetical order
    for i in (1..background.len()).rev() {
        background.swap(i, rng.random_range(0..=i));
    }
    let zipf = WeightedIndex::new((1..=background.len()).map(|r| (r as f64).powf(-config.cpc.concentration)))
        .map_err(|e| Error::Config(format!("cpc model: {e}")))?;

    let mut builder = CorpusBuilder::new(window);
    let mut ids = Vec::with_capacity(total);
    let mut years = Vec::with_capacity(total);
    let mut member_of: Vec<&[usize]> = Vec::with_capacity(total);
    let mut truth: Vec<Vec<PatentId>> = vec![Vec::new(); config.groups.len()];
    let mut slot = 0;
    for &(year, n) in &yearly {
        for _ in 0..n {
            let id = PatentId::new(format!("S{slot:08}"))?;
            let groups = patterns[slots[slot]].0.as_slice();
            slot += 1;

            let mut abstract_words = filler(&mut rng, &vocab, 20, 40);
            let mut record = PatentRecord::new(id.clone(), year);
            for &g in groups {
                let spec = &config.groups[g];
                truth[g].push(id.clone());
                if !spec.phrases.is_empty() {
                    let phrase = &spec.phrases[rng.random_range(0..spec.phrases.len())];
                    let at = rng.random_range(0..=abstract_words.len());
                    abstract_words.insert(at, phrase.clone());
                }
                if !spec.codes.is_empty() {
                    let code = &spec.codes[rng.random_range(0..spec.codes.len())];
                    builder.add_cpc(id.clone(), CpcCode::parse(&format!("{code} {}/{:02}", rng.random_range(1..20), rng.random_range(0..100)))?);
                }
                if spec.science {
                    let [lo, hi] = config.science.member_confidence;
                    builder.add_science(ScienceLink {
                        patent: id.clone(),
                        field_label: AI_FIELD_LABEL.to_string(),
                        confidence: rng.random_range(lo..=hi),
                    });
                }
            }
            record.title = Some(filler(&mut rng, &vocab, 3, 6).join(" "));
            record.abstract_text = Some(abstract_words.join(" "));
            record.claims = Some(filler(&mut rng, &vocab, 10, 20).join(" "));
            if rng.random_bool(0.5) {
                record.description = Some(filler(&mut rng, &vocab, 10, 30).join(" "));
            }
            builder.add_patent(record)?;

            for _ in 0..rng.random_range(1..=config.cpc.max_codes) {
                let sub = &background[zipf.sample(&mut rng)];
                builder.add_cpc(id.clone(), CpcCode::parse(&format!("{sub} {}/{:02}", rng.random_range(1..20), rng.random_range(0..100)))?);
            }
            if rng.random_bool(config.science.noise_rate) {
                let (label, confidence) = if rng.random_bool(0.5) {
                    (AI_FIELD_LABEL, rng.random_range(1..config.science.member_confidence[0].max(2)))
                } else {
                    (DECOY_LABELS[rng.random_range(0..DECOY_LABELS.len())], rng.random_range(1..=9))
                };
                builder.add_science(ScienceLink {
                    patent: id.clone(),
                    field_label: label.to_string(),
                    confidence,
                });
            }
            ids.push(id);
            years.push(year);
            member_of.push(groups);
        }
    }

    add_citations(config, window, &mut rng, &mut builder, &ids, &years, &member_of);

    let (corpus, report) = builder.build()?;
    let truth = config
        .groups
        .iter()
        .zip(truth)
        .map(|(g, members)| Ok((g.name.clone(), corpus.set_from_ids(members.iter().map(PatentId::as_str))?)))
        .collect::<Result<_>>()?;
    Ok(SynthOutput { corpus, report, truth })
}

fn add_citations(
    config: &SynthConfig,
    window: YearWindow,
    rng: &mut ChaCha8Rng,
    builder: &mut CorpusBuilder,
    ids: &[PatentId],
    years: &[i32],
    member_of: &[&[usize]],
) {
    let model = &config.citations;
    // per-year slices of (planted, other) patent positions
    let mut by_year: BTreeMap<i32, (Vec<usize>, Vec<usize>)> = BTreeMap::new();
    for (i, &y) in years.iter().enumerate() {
        let entry = by_year.entry(y).or_default();
        if member_of[i].is_empty() {
            entry.1.push(i);
        } else {
            entry.0.push(i);
        }
    }
    let whole = model.edges_per_patent.floor() as usize;
    let frac = model.edges_per_patent - whole as f64;
    for (i, &year) in years.iter().enumerate() {
        let n = whole + usize::from(rng.random_bool(frac));
        let mut chosen = HashSet::new();
        for _ in 0..n {
            for _attempt in 0..8 {
                let lag = truncated_geometric(rng, model.lag_mean, year - window.first);
                let Some((planted, other)) = by_year.get(&(year - lag)) else {
                    continue;
                };
                let wa = model.ai_attraction * planted.len() as f64;
                let wo = other.len() as f64;
                if wa + wo == 0.0 {
                    continue;
                }
                let pool = if rng.random::<f64>() * (wa + wo) < wa { planted } else { other };
                let j = pool[rng.random_range(0..pool.len())];
                if j != i && chosen.insert(j) {
                    builder.add_citation(ids[i].clone(), ids[j].clone(), Some(year));
                    break;
                }
            }
        }
    }
}
