//! Per-group, per-year GPT metrics: counts and shares, growth, overlap,
//! generality, citing-class breadth, code diversity, citation lags and
//! cross-group z-scores.
//!
//! Every function is a pure query over an immutable [`Corpus`]. Undefined
//! values (no citations, empty years) are omitted from series or returned as
//! `None`, never imputed.

use std::collections::BTreeMap;

use crate::corpus::{Corpus, PatentIdx, PatentSet, YearWindow};
use crate::cpc::Level;
use crate::error::{Error, Result};

/// Stable metric names used in file names and series tags.
pub mod names {
    pub const COUNTS: &str = "counts";
    pub const SHARE: &str = "share";
    pub const GROWTH: &str = "growth";
    pub const JACCARD: &str = "jaccard";
    pub const GENERALITY: &str = "generality";
    pub const AVG_CITING_CLASSES: &str = "avg_citing_classes";
    pub const AVG_CITING_CLASSES_CITED: &str = "avg_citing_classes_cited";
    pub const DIVERSITY_SHARE: &str = "diversity_share";
    pub const DIVERSITY_PER_PATENT: &str = "diversity_per_patent";
    pub const CITATION_LAG: &str = "citation_lag";
    pub const ZSCORE: &str = "zscore";
}

/// Number of CPC classes (3 characters) in the reference scheme.
pub const CLASS_UNIVERSE: usize = 136;
/// Number of CPC subclasses (4 characters) in the reference scheme.
pub const SUBCLASS_UNIVERSE: usize = 674;

/// A named per-year series for one group and metric.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupSeries {
    pub group: String,
    pub metric: String,
    /// (year, value) with strictly increasing years and finite values
    pub points: Vec<(i32, f64)>,
}

impl GroupSeries {
    pub fn new(group: impl Into<String>, metric: impl Into<String>, points: Vec<(i32, f64)>) -> Self {
        GroupSeries {
            group: group.into(),
            metric: metric.into(),
            points,
        }
    }

    pub fn value_at(&self, year: i32) -> Option<f64> {
        self.points
            .binary_search_by_key(&year, |p| p.0)
            .ok()
            .map(|i| self.points[i].1)
    }

    pub fn years(&self) -> impl Iterator<Item = i32> + '_ {
        self.points.iter().map(|p| p.0)
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|p| p.1)
    }

    /// Points whose year lies inside `window`.
    pub fn restricted(&self, window: YearWindow) -> GroupSeries {
        GroupSeries {
            group: self.group.clone(),
            metric: self.metric.clone(),
            points: self.points.iter().copied().filter(|(y, _)| window.contains(*y)).collect(),
        }
    }
}

fn mean(values: &[f64]) -> Option<f64> {
    (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
}

fn by_year(corpus: &Corpus, set: &PatentSet) -> BTreeMap<i32, Vec<PatentIdx>> {
    let mut out: BTreeMap<i32, Vec<PatentIdx>> = BTreeMap::new();
    for p in set.iter() {
        out.entry(corpus.grant_year(p)).or_default().push(p);
    }
    out
}

/// Yearly member counts over the whole corpus window, zeros included.
pub fn count_series(corpus: &Corpus, group: &str, set: &PatentSet) -> GroupSeries {
    let years = by_year(corpus, set);
    let points = corpus
        .window()
        .years()
        .map(|y| (y, years.get(&y).map_or(0, Vec::len) as f64))
        .collect();
    GroupSeries::new(group, names::COUNTS, points)
}

/// Pointwise `group / all` ratio. Years where both are zero are omitted.
pub fn share_series(group_counts: &GroupSeries, all_counts: &GroupSeries) -> Result<GroupSeries> {
    let mut points = Vec::new();
    for &(year, n) in &group_counts.points {
        let total = all_counts.value_at(year).unwrap_or(0.0);
        if total == 0.0 {
            if n != 0.0 {
                return Err(Error::Data(format!(
                    "{}: {n} members in {year} but no patents overall",
                    group_counts.group
                )));
            }
            continue;
        }
        points.push((year, n / total));
    }
    Ok(GroupSeries::new(group_counts.group.clone(), names::SHARE, points))
}

/// Year-on-year growth `(N_t - N_{t-1}) / N_{t-1}`. Years without a
/// preceding year, or whose preceding count is zero, are omitted.
pub fn growth_series(counts: &GroupSeries) -> Result<GroupSeries> {
    if counts.points.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "{}: growth needs at least 2 years of counts",
            counts.group
        )));
    }
    let points = counts
        .points
        .windows(2)
        .filter(|w| w[1].0 == w[0].0 + 1 && w[0].1 != 0.0)
        .map(|w| (w[1].0, (w[1].1 - w[0].1) / w[0].1))
        .collect();
    Ok(GroupSeries::new(counts.group.clone(), names::GROWTH, points))
}

/// `|a ∩ b| / |a ∪ b|`, defined as 0 when both sets are empty.
pub fn jaccard(a: &PatentSet, b: &PatentSet) -> f64 {
    let inter = a.intersection(b).len();
    let union = a.len() + b.len() - inter;
    if union == 0 {
        log::debug!("jaccard of two empty sets taken as 0");
        return 0.0;
    }
    inter as f64 / union as f64
}

/// Jaccard similarity of the two sets restricted to each grant year.
pub fn jaccard_by_year(corpus: &Corpus, name: &str, a: &PatentSet, b: &PatentSet) -> GroupSeries {
    let ya = by_year(corpus, a);
    let yb = by_year(corpus, b);
    let empty = Vec::new();
    let points = corpus
        .window()
        .years()
        .map(|y| {
            let sa: PatentSet = ya.get(&y).unwrap_or(&empty).iter().copied().collect();
            let sb: PatentSet = yb.get(&y).unwrap_or(&empty).iter().copied().collect();
            (y, jaccard(&sa, &sb))
        })
        .collect();
    GroupSeries::new(name, names::JACCARD, points)
}

/// Size of the intersection of all sets and its share of their union.
pub fn all_way_overlap(sets: &[PatentSet]) -> Result<(usize, f64)> {
    if sets.len() < 2 {
        return Err(Error::Config("all-way overlap needs at least 2 sets".into()));
    }
    let inter = sets[1..].iter().fold(sets[0].clone(), |acc, s| acc.intersection(s));
    let union = sets[1..].iter().fold(sets[0].clone(), |acc, s| acc.union(s));
    let share = if union.is_empty() {
        0.0
    } else {
        inter.len() as f64 / union.len() as f64
    };
    Ok((inter.len(), share))
}

/// Restriction on the grant year of the cited patents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum YearFilter {
    #[default]
    Any,
    Year(i32),
    Range(YearWindow),
}

impl YearFilter {
    pub fn admits(&self, year: i32) -> bool {
        match self {
            YearFilter::Any => true,
            YearFilter::Year(y) => *y == year,
            YearFilter::Range(w) => w.contains(year),
        }
    }
}

/// Calls `f` for every class of `a` (sorted ids) that is not in `b`.
fn for_each_outside(a: &[u32], b: &[u32], mut f: impl FnMut(u32)) {
    let mut j = 0;
    for &x in a {
        while j < b.len() && b[j] < x {
            j += 1;
        }
        if j < b.len() && b[j] == x {
            continue;
        }
        f(x);
    }
}

/// Citation counts into `set` by class of the citing patent, excluding
/// classes that the cited patent itself carries.
pub fn citations_by_class(corpus: &Corpus, set: &PatentSet, level: Level, filter: YearFilter) -> BTreeMap<String, u64> {
    let counts = class_counts(corpus, set, level, filter);
    counts
        .into_iter()
        .enumerate()
        .filter(|(_, n)| *n > 0)
        .map(|(c, n)| (corpus.class_name(level, c as u32).to_string(), n))
        .collect()
}

fn class_counts(corpus: &Corpus, set: &PatentSet, level: Level, filter: YearFilter) -> Vec<u64> {
    let mut counts = vec![0u64; corpus.class_count(level)];
    for p in set.iter().filter(|&p| filter.admits(corpus.grant_year(p))) {
        let own = corpus.class_ids(p, level);
        for &q in corpus.cited_by(p) {
            for_each_outside(corpus.class_ids(q, level), own, |c| counts[c as usize] += 1);
        }
    }
    counts
}

/// One minus the Herfindahl concentration of `counts`; `None` when the
/// counts sum to zero.
pub fn herfindahl_generality<I: IntoIterator<Item = u64>>(counts: I) -> Option<f64> {
    let counts: Vec<u64> = counts.into_iter().collect();
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return None;
    }
    let total = total as f64;
    Some(1.0 - counts.iter().map(|&n| (n as f64 / total).powi(2)).sum::<f64>())
}

/// Generality of the group: how evenly its forward citations spread over
/// citing classes at `level`, within-class citations excluded.
pub fn generality_index(corpus: &Corpus, set: &PatentSet, level: Level, filter: YearFilter) -> Option<f64> {
    herfindahl_generality(class_counts(corpus, set, level, filter))
}

/// Generality per cited-patent grant-year cohort.
pub fn generality_series(corpus: &Corpus, group: &str, set: &PatentSet, level: Level) -> GroupSeries {
    let points = by_year(corpus, set)
        .into_iter()
        .filter_map(|(year, members)| {
            let cohort: PatentSet = members.into_iter().collect();
            generality_index(corpus, &cohort, level, YearFilter::Any).map(|g| (year, g))
        })
        .collect();
    GroupSeries::new(group, names::GENERALITY, points)
}

/// Number of distinct classes at `level` citing `p`, not counting classes
/// that `p` carries itself.
pub fn citing_class_count(corpus: &Corpus, p: PatentIdx, level: Level) -> usize {
    let own = corpus.class_ids(p, level);
    let mut seen: Vec<u32> = Vec::new();
    for &q in corpus.cited_by(p) {
        for_each_outside(corpus.class_ids(q, level), own, |c| seen.push(c));
    }
    seen.sort_unstable();
    seen.dedup();
    seen.len()
}

/// Average number of citing classes per patent.
#[derive(Debug, Clone, PartialEq)]
pub struct CitingClasses {
    /// Average over all included patents regardless of year.
    pub pooled: Option<f64>,
    /// Average per grant year.
    pub annual: GroupSeries,
    /// Mean of the annual averages.
    pub mean_of_annual: Option<f64>,
}

/// Average citing-class count over the group. With `cited_only` only
/// patents cited at least once enter the averages.
pub fn avg_citing_classes(corpus: &Corpus, group: &str, set: &PatentSet, level: Level, cited_only: bool) -> CitingClasses {
    let mut all = Vec::new();
    let mut points = Vec::new();
    for (year, members) in by_year(corpus, set) {
        let values: Vec<f64> = members
            .into_iter()
            .filter(|&p| !cited_only || !corpus.cited_by(p).is_empty())
            .map(|p| citing_class_count(corpus, p, level) as f64)
            .collect();
        if let Some(m) = mean(&values) {
            points.push((year, m));
        }
        all.extend(values);
    }
    let metric = if cited_only {
        names::AVG_CITING_CLASSES_CITED
    } else {
        names::AVG_CITING_CLASSES
    };
    let annual = GroupSeries::new(group, metric, points);
    let mean_of_annual = mean(&annual.values().collect::<Vec<_>>());
    CitingClasses {
        pooled: mean(&all),
        annual,
        mean_of_annual,
    }
}

/// Reference universe size for the diversity share at `level`.
pub fn default_universe(level: Level) -> Option<usize> {
    match level {
        Level::Class => Some(CLASS_UNIVERSE),
        Level::Subclass => Some(SUBCLASS_UNIVERSE),
        Level::Section => None,
    }
}

fn check_diversity_args(level: Level, universe: usize) -> Result<()> {
    if level == Level::Section {
        return Err(Error::Config("diversity share is defined for levels 3 and 4 only".into()));
    }
    if universe == 0 {
        return Err(Error::Config("diversity universe size must be positive".into()));
    }
    Ok(())
}

/// Share of the `universe` classes at `level` used by the group's patents,
/// per grant year or cumulatively up to each year.
pub fn diversity_share(
    corpus: &Corpus,
    group: &str,
    set: &PatentSet,
    level: Level,
    universe: usize,
    cumulative: bool,
) -> Result<GroupSeries> {
    check_diversity_args(level, universe)?;
    let years = by_year(corpus, set);
    let mut seen = vec![false; corpus.class_count(level)];
    let mut distinct = 0usize;
    let mut points = Vec::new();
    for year in corpus.window().years() {
        if !cumulative {
            seen.iter_mut().for_each(|s| *s = false);
            distinct = 0;
        }
        for &p in years.get(&year).map(Vec::as_slice).unwrap_or(&[]) {
            for &c in corpus.class_ids(p, level) {
                if !std::mem::replace(&mut seen[c as usize], true) {
                    distinct += 1;
                }
            }
        }
        points.push((year, distinct as f64 / universe as f64));
    }
    Ok(GroupSeries::new(group, names::DIVERSITY_SHARE, points))
}

/// Share of the universe covered by the group over the whole period.
pub fn diversity_share_overall(corpus: &Corpus, set: &PatentSet, level: Level, universe: usize) -> Result<f64> {
    check_diversity_args(level, universe)?;
    let mut classes: Vec<u32> = set.iter().flat_map(|p| corpus.class_ids(p, level).iter().copied()).collect();
    classes.sort_unstable();
    classes.dedup();
    Ok(classes.len() as f64 / universe as f64)
}

/// Mean number of distinct classes per patent for each grant year, and the
/// mean of those annual means.
pub fn diversity_per_patent(corpus: &Corpus, group: &str, set: &PatentSet, level: Level) -> (GroupSeries, Option<f64>) {
    let points: Vec<(i32, f64)> = by_year(corpus, set)
        .into_iter()
        .filter_map(|(year, members)| {
            let counts: Vec<f64> = members.iter().map(|&p| corpus.class_ids(p, level).len() as f64).collect();
            mean(&counts).map(|m| (year, m))
        })
        .collect();
    let overall = mean(&points.iter().map(|p| p.1).collect::<Vec<_>>());
    (GroupSeries::new(group, names::DIVERSITY_PER_PATENT, points), overall)
}

/// One observed citation delay.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LagSample {
    pub cited_grant_year: i32,
    pub citing_year: i32,
}

impl LagSample {
    /// Years between grant and citation, clipped at zero.
    pub fn lag(&self) -> i32 {
        (self.citing_year - self.cited_grant_year).max(0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LagMode {
    /// Mean over every citation edge.
    #[default]
    AllCitations,
    /// Mean over cited patents of their earliest citation delay.
    FirstCitation,
}

/// Lag samples of every citation into `p`.
pub fn lag_samples(corpus: &Corpus, p: PatentIdx) -> Vec<LagSample> {
    let cited_grant_year = corpus.grant_year(p);
    corpus
        .cited_by(p)
        .iter()
        .map(|&q| LagSample {
            cited_grant_year,
            citing_year: corpus.grant_year(q),
        })
        .collect()
}

/// Mean citation lag per grant-year range of the cited patents.
pub fn citation_lag(corpus: &Corpus, cited_set: &PatentSet, decades: &[YearWindow], mode: LagMode) -> Vec<Option<f64>> {
    decades
        .iter()
        .map(|decade| {
            let mut values = Vec::new();
            for p in cited_set.iter().filter(|&p| decade.contains(corpus.grant_year(p))) {
                let lags = lag_samples(corpus, p).into_iter().map(|s| s.lag() as f64);
                match mode {
                    LagMode::AllCitations => values.extend(lags),
                    LagMode::FirstCitation => values.extend(lags.reduce(f64::min)),
                }
            }
            mean(&values)
        })
        .collect()
}

/// Standardizes each year across groups: `(v - mean) / population sd`.
/// Years with fewer than two groups or zero spread are omitted.
pub fn zscore_across_groups(series: &[GroupSeries]) -> Result<Vec<GroupSeries>> {
    if series.len() < 2 {
        return Err(Error::Config("z-scores need at least 2 groups".into()));
    }
    let mut out: Vec<GroupSeries> = series
        .iter()
        .map(|s| GroupSeries::new(s.group.clone(), names::ZSCORE, Vec::new()))
        .collect();
    let years: std::collections::BTreeSet<i32> = series.iter().flat_map(|s| s.years()).collect();
    for year in years {
        let present: Vec<(usize, f64)> = series
            .iter()
            .enumerate()
            .filter_map(|(i, s)| s.value_at(year).map(|v| (i, v)))
            .collect();
        if present.len() < 2 {
            continue;
        }
        let n = present.len() as f64;
        let m = present.iter().map(|p| p.1).sum::<f64>() / n;
        let sd = (present.iter().map(|p| (p.1 - m).powi(2)).sum::<f64>() / n).sqrt();
        if sd <= 1e-12 * m.abs().max(1.0) {
            continue;
        }
        for (i, v) in present {
            out[i].points.push((year, (v - m) / sd));
        }
    }
    Ok(out)
}
