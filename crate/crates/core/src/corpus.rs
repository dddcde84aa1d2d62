//! Frozen in-memory patent corpus with year and class indexes.
//!
//! A [`Corpus`] is only obtainable through [`CorpusBuilder::build`], which
//! validates the raw rows, records rejections in a [`LoadReport`] and derives
//! every index. Nothing mutates a corpus afterwards.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use crate::cpc::{CpcCode, Level};
use crate::error::{Error, Result};

/// Opaque patent identifier: non-empty, printable, no tabs or newlines.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PatentId(String);

impl PatentId {
    pub fn new(value: impl Into<String>) -> Result<PatentId> {
        let value = value.into();
        if value.is_empty() {
            return Err(Error::Data("empty patent id".into()));
        }
        if value.chars().any(|c| c.is_control()) {
            return Err(Error::Data(format!("patent id {value:?} contains control characters")));
        }
        Ok(PatentId(value))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for PatentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl AsRef<str> for PatentId {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatentRecord {
    pub id: PatentId,
    pub grant_year: i32,
    pub title: Option<String>,
    pub abstract_text: Option<String>,
    pub claims: Option<String>,
    pub description: Option<String>,
}

impl PatentRecord {
    pub fn new(id: PatentId, grant_year: i32) -> Self {
        PatentRecord {
            id,
            grant_year,
            title: None,
            abstract_text: None,
            claims: None,
            description: None,
        }
    }

    /// The four text fields in title, abstract, claims, description order.
    pub fn text_fields(&self) -> [Option<&str>; 4] {
        [
            self.title.as_deref(),
            self.abstract_text.as_deref(),
            self.claims.as_deref(),
            self.description.as_deref(),
        ]
    }

    pub fn has_text(&self) -> bool {
        self.text_fields().iter().any(|f| f.is_some_and(|s| !s.trim().is_empty()))
    }
}

/// Directed citation link as it appears in the citation table.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CitationEdge {
    pub citing: PatentId,
    pub cited: PatentId,
    pub citing_year: i32,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ScienceLink {
    pub patent: PatentId,
    pub field_label: String,
    pub confidence: u32,
}

/// Inclusive range of calendar years.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct YearWindow {
    pub first: i32,
    pub last: i32,
}

impl Default for YearWindow {
    fn default() -> Self {
        YearWindow { first: 1990, last: 2019 }
    }
}

impl YearWindow {
    pub fn new(first: i32, last: i32) -> Result<Self> {
        if first > last {
            return Err(Error::Config(format!("year range {first}-{last} is empty")));
        }
        Ok(YearWindow { first, last })
    }

    pub fn contains(&self, year: i32) -> bool {
        (self.first..=self.last).contains(&year)
    }

    pub fn years(&self) -> impl Iterator<Item = i32> + Clone {
        self.first..=self.last
    }

    pub fn len(&self) -> usize {
        (self.last - self.first + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

impl fmt::Display for YearWindow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.first, self.last)
    }
}

impl std::str::FromStr for YearWindow {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("expected a year range like 1990-1999, got `{s}`"));
        let (a, b) = s.trim().split_once('-').ok_or_else(bad)?;
        let first = a.trim().parse().map_err(|_| bad())?;
        let last = b.trim().parse().map_err(|_| bad())?;
        YearWindow::new(first, last)
    }
}

/// Dense index of a patent inside one corpus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PatentIdx(u32);

impl PatentIdx {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// A citation edge resolved to corpus indexes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Citation {
    pub citing: PatentIdx,
    pub cited: PatentIdx,
    pub citing_year: i32,
}

/// Sorted, deduplicated set of patents of one corpus.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct PatentSet(Vec<PatentIdx>);

impl PatentSet {
    pub fn new() -> Self {
        PatentSet(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, idx: PatentIdx) -> bool {
        self.0.binary_search(&idx).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = PatentIdx> + '_ {
        self.0.iter().copied()
    }

    pub fn as_slice(&self) -> &[PatentIdx] {
        &self.0
    }

    pub fn intersection(&self, other: &PatentSet) -> PatentSet {
        let (mut i, mut j) = (0, 0);
        let mut out = Vec::new();
        while i < self.0.len() && j < other.0.len() {
            match self.0[i].cmp(&other.0[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    out.push(self.0[i]);
                    i += 1;
                    j += 1;
                }
            }
        }
        PatentSet(out)
    }

    pub fn union(&self, other: &PatentSet) -> PatentSet {
        let mut out = Vec::with_capacity(self.0.len() + other.0.len());
        out.extend_from_slice(&self.0);
        out.extend_from_slice(&other.0);
        out.sort_unstable();
        out.dedup();
        PatentSet(out)
    }

    pub fn difference(&self, other: &PatentSet) -> PatentSet {
        PatentSet(self.iter().filter(|p| !other.contains(*p)).collect())
    }

    pub fn is_subset(&self, other: &PatentSet) -> bool {
        self.iter().all(|p| other.contains(p))
    }
}

impl FromIterator<PatentIdx> for PatentSet {
    fn from_iter<I: IntoIterator<Item = PatentIdx>>(iter: I) -> Self {
        let mut v: Vec<PatentIdx> = iter.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        PatentSet(v)
    }
}

/// Row counts for one input table.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TableReport {
    pub input_rows: usize,
    pub accepted: usize,
    pub rejected: BTreeMap<String, usize>,
}

impl TableReport {
    pub fn rejected_total(&self) -> usize {
        self.rejected.values().sum()
    }

    pub(crate) fn reject(&mut self, reason: &str) {
        *self.rejected.entry(reason.to_string()).or_default() += 1;
    }
}

/// Row accounting produced while loading and validating a corpus.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LoadReport {
    pub patents: TableReport,
    pub cpc: TableReport,
    pub citations: TableReport,
    pub science: TableReport,
    /// Non-fatal observations, e.g. a citing year overridden by the corpus.
    pub warnings: BTreeMap<String, usize>,
}

impl LoadReport {
    pub fn table_mut(&mut self, table: Table) -> &mut TableReport {
        match table {
            Table::Patents => &mut self.patents,
            Table::Cpc => &mut self.cpc,
            Table::Citations => &mut self.citations,
            Table::Science => &mut self.science,
        }
    }

    pub fn table(&self, table: Table) -> &TableReport {
        match table {
            Table::Patents => &self.patents,
            Table::Cpc => &self.cpc,
            Table::Citations => &self.citations,
            Table::Science => &self.science,
        }
    }

    pub(crate) fn warn(&mut self, what: &str) {
        *self.warnings.entry(what.to_string()).or_default() += 1;
    }

    /// Plain-text rendering written to `load-report.txt`.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for table in Table::ALL {
            let t = self.table(table);
            out.push_str(&format!(
                "{}\tinput={}\taccepted={}\trejected={}\n",
                table.name(),
                t.input_rows,
                t.accepted,
                t.rejected_total()
            ));
            for (reason, n) in &t.rejected {
                out.push_str(&format!("{}\trejected:{reason}={n}\n", table.name()));
            }
        }
        for (what, n) in &self.warnings {
            out.push_str(&format!("warning\t{what}={n}\n"));
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Table {
    Patents,
    Cpc,
    Citations,
    Science,
}

impl Table {
    pub const ALL: [Table; 4] = [Table::Patents, Table::Cpc, Table::Citations, Table::Science];

    pub fn name(self) -> &'static str {
        match self {
            Table::Patents => "patents",
            Table::Cpc => "cpc",
            Table::Citations => "citations",
            Table::Science => "science",
        }
    }
}

#[derive(Debug, Clone)]
struct RawCitation {
    citing: PatentId,
    cited: PatentId,
    year: Option<i32>,
}

/// Collects raw rows and turns them into a validated [`Corpus`].
#[derive(Debug, Clone)]
pub struct CorpusBuilder {
    window: YearWindow,
    strict: bool,
    records: Vec<PatentRecord>,
    seen: HashMap<PatentId, ()>,
    cpc: Vec<(PatentId, CpcCode)>,
    citations: Vec<RawCitation>,
    science: Vec<ScienceLink>,
    report: LoadReport,
}

impl CorpusBuilder {
    pub fn new(window: YearWindow) -> Self {
        CorpusBuilder {
            window,
            strict: false,
            records: Vec::new(),
            seen: HashMap::new(),
            cpc: Vec::new(),
            citations: Vec::new(),
            science: Vec::new(),
            report: LoadReport::default(),
        }
    }

    /// In strict mode every rejected row aborts the build.
    pub fn strict(mut self, strict: bool) -> Self {
        self.strict = strict;
        self
    }

    pub fn is_strict(&self) -> bool {
        self.strict
    }

    /// Counts a row that was rejected before it reached the builder, e.g. a
    /// line that did not parse.
    pub fn count_input_rejection(&mut self, table: Table, reason: &str) {
        let t = self.report.table_mut(table);
        t.input_rows += 1;
        t.reject(reason);
    }

    fn reject(&mut self, table: Table, reason: &str, detail: impl FnOnce() -> String) -> Result<()> {
        if self.strict {
            return Err(Error::Data(format!("{} row rejected ({reason}): {}", table.name(), detail())));
        }
        self.report.table_mut(table).reject(reason);
        Ok(())
    }

    /// Adds a patent. Duplicate ids always abort.
    pub fn add_patent(&mut self, record: PatentRecord) -> Result<()> {
        self.report.patents.input_rows += 1;
        if self.seen.contains_key(&record.id) {
            return Err(Error::DuplicatePatent(record.id.0));
        }
        if !self.window.contains(record.grant_year) {
            let (id, year, window) = (record.id.clone(), record.grant_year, self.window);
            return self.reject(Table::Patents, "year_out_of_window", || {
                format!("{id} granted {year} outside {window}")
            });
        }
        self.seen.insert(record.id.clone(), ());
        self.records.push(record);
        Ok(())
    }

    pub fn add_cpc(&mut self, patent: PatentId, code: CpcCode) {
        self.report.cpc.input_rows += 1;
        self.cpc.push((patent, code));
    }

    /// Adds a citation; `year` is the citing year column, if any.
    pub fn add_citation(&mut self, citing: PatentId, cited: PatentId, year: Option<i32>) {
        self.report.citations.input_rows += 1;
        self.citations.push(RawCitation { citing, cited, year });
    }

    pub fn add_science(&mut self, link: ScienceLink) {
        self.report.science.input_rows += 1;
        self.science.push(link);
    }

    /// Validates all rows and freezes the corpus.
    pub fn build(mut self) -> Result<(Corpus, LoadReport)> {
        let mut records = std::mem::take(&mut self.records);
        records.sort_by(|a, b| a.id.cmp(&b.id));
        self.report.patents.accepted = records.len();
        let index: HashMap<PatentId, PatentIdx> = records
            .iter()
            .enumerate()
            .map(|(i, r)| (r.id.clone(), PatentIdx(i as u32)))
            .collect();

        // cpc: dedupe on (patent, subclass4), keeping the smallest raw form
        let mut codes: Vec<Vec<CpcCode>> = vec![Vec::new(); records.len()];
        let mut accepted = 0;
        for (patent, code) in std::mem::take(&mut self.cpc) {
            match index.get(&patent) {
                Some(idx) => codes[idx.index()].push(code),
                None => self.reject(Table::Cpc, "unknown_patent", || patent.to_string())?,
            }
        }
        for list in &mut codes {
            list.sort_by(|a, b| a.subclass4().cmp(b.subclass4()).then_with(|| a.raw().cmp(b.raw())));
            let before = list.len();
            list.dedup_by(|a, b| a.subclass4() == b.subclass4());
            accepted += list.len();
            for _ in list.len()..before {
                self.report.cpc.reject("duplicate");
            }
        }
        self.report.cpc.accepted = accepted;

        let mut citations = Vec::new();
        for raw in std::mem::take(&mut self.citations) {
            let Some(&citing) = index.get(&raw.citing) else {
                self.reject(Table::Citations, "unknown_citing", || raw.citing.to_string())?;
                continue;
            };
            let Some(&cited) = index.get(&raw.cited) else {
                self.reject(Table::Citations, "unknown_cited", || raw.cited.to_string())?;
                continue;
            };
            if citing == cited {
                self.reject(Table::Citations, "self_citation", || raw.citing.to_string())?;
                continue;
            }
            let citing_year = records[citing.index()].grant_year;
            if raw.year.is_some_and(|y| y != citing_year) {
                self.report.warn("citing_year_overridden_by_corpus");
            }
            let cited_year = records[cited.index()].grant_year;
            if citing_year < cited_year {
                self.reject(Table::Citations, "negative_lag", || {
                    format!("{} ({citing_year}) -> {} ({cited_year})", raw.citing, raw.cited)
                })?;
                continue;
            }
            citations.push(Citation {
                citing,
                cited,
                citing_year,
            });
        }
        citations.sort_unstable();
        let before = citations.len();
        citations.dedup();
        for _ in citations.len()..before {
            self.report.citations.reject("duplicate");
        }
        self.report.citations.accepted = citations.len();

        let mut science: Vec<Vec<(String, u32)>> = vec![Vec::new(); records.len()];
        for link in std::mem::take(&mut self.science) {
            let label = link.field_label.trim().to_string();
            let Some(idx) = index.get(&link.patent) else {
                self.reject(Table::Science, "unknown_patent", || link.patent.to_string())?;
                continue;
            };
            if label.is_empty() {
                self.reject(Table::Science, "empty_field_label", || link.patent.to_string())?;
                continue;
            }
            if link.confidence < 1 {
                self.reject(Table::Science, "confidence_below_1", || link.patent.to_string())?;
                continue;
            }
            science[idx.index()].push((label, link.confidence));
        }
        let mut accepted = 0;
        for list in &mut science {
            list.sort();
            let before = list.len();
            list.dedup();
            accepted += list.len();
            for _ in list.len()..before {
                self.report.science.reject("duplicate");
            }
        }
        self.report.science.accepted = accepted;

        let corpus = Corpus::freeze(self.window, records, index, codes, citations, science);
        Ok((corpus, self.report))
    }
}

/// Interned class codes at one level.
#[derive(Debug, Clone, PartialEq, Eq)]
struct LevelIndex {
    names: Vec<String>,
    by_name: HashMap<String, u32>,
    /// per patent, sorted class ids
    of_patent: Vec<Vec<u32>>,
    /// per class id, sorted patents
    members: Vec<Vec<PatentIdx>>,
}

/// Immutable, validated patent corpus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    window: YearWindow,
    records: Vec<PatentRecord>,
    index: HashMap<PatentId, PatentIdx>,
    codes: Vec<Vec<CpcCode>>,
    citations: Vec<Citation>,
    forward: Vec<Vec<PatentIdx>>,
    backward: Vec<Vec<PatentIdx>>,
    science: Vec<Vec<(String, u32)>>,
    year_index: BTreeMap<i32, Vec<PatentIdx>>,
    levels: [LevelIndex; 3],
}

impl Corpus {
    fn freeze(
        window: YearWindow,
        records: Vec<PatentRecord>,
        index: HashMap<PatentId, PatentIdx>,
        codes: Vec<Vec<CpcCode>>,
        citations: Vec<Citation>,
        science: Vec<Vec<(String, u32)>>,
    ) -> Corpus {
        let n = records.len();
        let mut forward = vec![Vec::new(); n];
        let mut backward = vec![Vec::new(); n];
        for c in &citations {
            forward[c.cited.index()].push(c.citing);
            backward[c.citing.index()].push(c.cited);
        }
        for list in forward.iter_mut().chain(backward.iter_mut()) {
            list.sort_unstable();
        }

        let mut year_index: BTreeMap<i32, Vec<PatentIdx>> = BTreeMap::new();
        for (i, r) in records.iter().enumerate() {
            year_index.entry(r.grant_year).or_default().push(PatentIdx(i as u32));
        }

        let levels = Level::ALL.map(|level| {
            let mut all: BTreeSet<&str> = BTreeSet::new();
            for list in &codes {
                all.extend(list.iter().map(|c| c.at(level)));
            }
            let names: Vec<String> = all.into_iter().map(str::to_string).collect();
            let by_name: HashMap<String, u32> =
                names.iter().enumerate().map(|(i, s)| (s.clone(), i as u32)).collect();
            let mut members = vec![Vec::new(); names.len()];
            let of_patent: Vec<Vec<u32>> = codes
                .iter()
                .enumerate()
                .map(|(p, list)| {
                    let mut ids: Vec<u32> = list.iter().map(|c| by_name[c.at(level)]).collect();
                    ids.sort_unstable();
                    ids.dedup();
                    for &id in &ids {
                        members[id as usize].push(PatentIdx(p as u32));
                    }
                    ids
                })
                .collect();
            LevelIndex {
                names,
                by_name,
                of_patent,
                members,
            }
        });

        Corpus {
            window,
            records,
            index,
            codes,
            citations,
            forward,
            backward,
            science,
            year_index,
            levels,
        }
    }

    /// Rebuilds every index from the underlying record, code, citation and
    /// science sets.
    pub fn reindexed(&self) -> Corpus {
        Corpus::freeze(
            self.window,
            self.records.clone(),
            self.index.clone(),
            self.codes.clone(),
            self.citations.clone(),
            self.science.clone(),
        )
    }

    pub fn window(&self) -> YearWindow {
        self.window
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn records(&self) -> &[PatentRecord] {
        &self.records
    }

    pub fn record(&self, idx: PatentIdx) -> &PatentRecord {
        &self.records[idx.index()]
    }

    pub fn id(&self, idx: PatentIdx) -> &PatentId {
        &self.records[idx.index()].id
    }

    pub fn grant_year(&self, idx: PatentIdx) -> i32 {
        self.records[idx.index()].grant_year
    }

    pub fn lookup(&self, id: &PatentId) -> Result<PatentIdx> {
        self.index
            .get(id)
            .copied()
            .ok_or_else(|| Error::UnknownPatent(id.to_string()))
    }

    pub fn lookup_str(&self, id: &str) -> Result<PatentIdx> {
        self.index
            .get(&PatentId(id.to_string()))
            .copied()
            .ok_or_else(|| Error::UnknownPatent(id.to_string()))
    }

    pub fn indices(&self) -> impl Iterator<Item = PatentIdx> + '_ {
        (0..self.records.len() as u32).map(PatentIdx)
    }

    pub fn all_patents(&self) -> PatentSet {
        PatentSet(self.indices().collect())
    }

    /// Builds a set from external ids; unknown ids are an error.
    pub fn set_from_ids<'a, I>(&self, ids: I) -> Result<PatentSet>
    where
        I: IntoIterator<Item = &'a str>,
    {
        ids.into_iter().map(|id| self.lookup_str(id)).collect()
    }

    pub fn ids_of(&self, set: &PatentSet) -> Vec<&PatentId> {
        let mut ids: Vec<&PatentId> = set.iter().map(|p| self.id(p)).collect();
        ids.sort();
        ids
    }

    pub fn codes(&self, idx: PatentIdx) -> &[CpcCode] {
        &self.codes[idx.index()]
    }

    /// Distinct level-`level` truncations of the codes assigned to `patent`.
    pub fn classes_of(&self, patent: &PatentId, level: Level) -> Result<BTreeSet<String>> {
        let idx = self.lookup(patent)?;
        Ok(self.class_ids(idx, level).iter().map(|&c| self.class_name(level, c).to_string()).collect())
    }

    /// Sorted interned class ids of a patent at `level`.
    pub fn class_ids(&self, idx: PatentIdx, level: Level) -> &[u32] {
        &self.levels[level.index()].of_patent[idx.index()]
    }

    pub fn class_name(&self, level: Level, class: u32) -> &str {
        &self.levels[level.index()].names[class as usize]
    }

    pub fn class_count(&self, level: Level) -> usize {
        self.levels[level.index()].names.len()
    }

    /// Patents carrying `code` at `level`; empty when the code is unused.
    pub fn patents_with_class(&self, level: Level, code: &str) -> PatentSet {
        let li = &self.levels[level.index()];
        match li.by_name.get(code) {
            Some(&id) => PatentSet(li.members[id as usize].clone()),
            None => PatentSet::new(),
        }
    }

    pub fn patents_in_year(&self, year: i32) -> PatentSet {
        PatentSet(self.year_index.get(&year).cloned().unwrap_or_default())
    }

    pub fn years_present(&self) -> impl Iterator<Item = i32> + '_ {
        self.year_index.keys().copied()
    }

    pub fn citations(&self) -> &[Citation] {
        &self.citations
    }

    /// Patents citing `idx`.
    pub fn cited_by(&self, idx: PatentIdx) -> &[PatentIdx] {
        &self.forward[idx.index()]
    }

    /// Patents cited by `idx`.
    pub fn cites(&self, idx: PatentIdx) -> &[PatentIdx] {
        &self.backward[idx.index()]
    }

    pub fn citation_edges(&self) -> Vec<CitationEdge> {
        self.citations
            .iter()
            .map(|c| CitationEdge {
                citing: self.id(c.citing).clone(),
                cited: self.id(c.cited).clone(),
                citing_year: c.citing_year,
            })
            .collect()
    }

    /// Science links of a patent as (field label, confidence).
    pub fn science_links(&self, idx: PatentIdx) -> &[(String, u32)] {
        &self.science[idx.index()]
    }

    pub fn all_science_links(&self) -> Vec<ScienceLink> {
        self.indices()
            .flat_map(|p| {
                self.science[p.index()].iter().map(move |(label, conf)| ScienceLink {
                    patent: self.id(p).clone(),
                    field_label: label.clone(),
                    confidence: *conf,
                })
            })
            .collect()
    }

    /// All (patent, code) assignments in patent order.
    pub fn assignments(&self) -> impl Iterator<Item = (&PatentId, &CpcCode)> + '_ {
        self.indices()
            .flat_map(move |p| self.codes[p.index()].iter().map(move |c| (self.id(p), c)))
    }
}
