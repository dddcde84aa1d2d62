//! The four pipeline stages. Each stage reads the corpus plus the previous
//! stage's files from the output directory, so running them one by one
//! gives the same files as a full run.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use aigpt_core::classify::{
    build_uspto_seed, classify_keyword, classify_prefix_group, classify_science, classify_uspto, classify_wipo,
    descendants_of, train_uspto, KeywordTable, UsptoConfig, WipoRuleSet, ALL_GROUP, APPROACHES,
};
use aigpt_core::io::{
    format_value, load_corpus, read_id_list, read_series, write_file, write_id_list, write_series, write_svg_lines,
    write_table, LoadConfig, PlotOptions,
};
use aigpt_core::metrics::{self, names, YearFilter};
use aigpt_core::stats::{lowess, pairwise_compare, summary_stats};
use aigpt_core::synth::{generate, SynthConfig};
use aigpt_core::{Corpus, Error, GroupSeries, Level, LoadReport, PatentSet, Result};
use rayon::prelude::*;

use crate::config::{InputSource, RunConfig};
use crate::manifest::write_manifest;
use crate::runlog::RunLog;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Stage {
    Classify,
    Metrics,
    Stats,
    Report,
}

impl Stage {
    pub const ALL: [Stage; 4] = [Stage::Classify, Stage::Metrics, Stage::Stats, Stage::Report];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Classify => "classify",
            Stage::Metrics => "metrics",
            Stage::Stats => "stats",
            Stage::Report => "report",
        }
    }
}

impl std::str::FromStr for Stage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Stage::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown stage `{s}`")))
    }
}

/// Kind of a classified group, recorded in the group index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupKind {
    Approach,
    Benchmark,
    Descendants,
}

impl GroupKind {
    fn name(self) -> &'static str {
        match self {
            GroupKind::Approach => "approach",
            GroupKind::Benchmark => "benchmark",
            GroupKind::Descendants => "descendants",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        [GroupKind::Approach, GroupKind::Benchmark, GroupKind::Descendants]
            .into_iter()
            .find(|k| k.name() == s)
    }
}

pub const GROUPS_DIR: &str = "groups";
pub const METRICS_DIR: &str = "metrics";
pub const TABLES_DIR: &str = "tables";
pub const STATS_DIR: &str = "stats";
pub const PLOTS_DIR: &str = "plots";
const GROUP_INDEX: &str = "groups/index.tsv";
const DESCENDANT_SUFFIX: &str = "-citing";

pub struct Pipeline {
    pub config: RunConfig,
    pub out: PathBuf,
    pub log: RunLog,
}

struct Group {
    name: String,
    kind: GroupKind,
    set: PatentSet,
}

impl Pipeline {
    pub fn new(config: RunConfig, out: PathBuf) -> Result<Self> {
        fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;
        let log = RunLog::open(&out.join(crate::runlog::RUN_LOG))?;
        Ok(Pipeline { config, out, log })
    }

    pub fn run(&self, stages: &[Stage]) -> Result<()> {
        for &stage in stages {
            let started = Instant::now();
            self.log.info(&format!("stage {} started", stage.name()));
            match stage {
                Stage::Classify => self.classify()?,
                Stage::Metrics => self.metrics()?,
                Stage::Stats => self.stats()?,
                Stage::Report => self.report()?,
            }
            self.log.info(&format!(
                "stage {} finished in {:.2}s",
                stage.name(),
                started.elapsed().as_secs_f64()
            ));
        }
        let n = write_manifest(&self.out)?;
        self.log.info(&format!("manifest lists {n} artifacts"));
        Ok(())
    }

    fn path(&self, rel: &str) -> PathBuf {
        self.out.join(rel)
    }

    /// Fails with a data error naming `path` when a prior stage output is
    /// missing.
    fn require(&self, path: &Path) -> Result<()> {
        if path.is_file() {
            Ok(())
        } else {
            Err(Error::Data(format!(
                "expected prior stage output {} is missing",
                path.display()
            )))
        }
    }

    fn load(&self) -> Result<(Corpus, LoadReport)> {
        let window = self.config.corpus_window()?;
        match self.config.input_source()? {
            InputSource::Tables(paths) => load_corpus(
                &paths,
                &LoadConfig {
                    window,
                    strict: self.config.strict,
                },
            ),
            InputSource::Synth(path) => {
                let synth = SynthConfig::load(&path)?;
                if synth.window()? != window {
                    return Err(Error::Config(format!(
                        "synth years {} differ from the run window {window}",
                        synth.window()?
                    )));
                }
                let out = generate(&synth)?;
                Ok((out.corpus, out.report))
            }
        }
    }

    /// Loads the corpus and copies every load warning and rejection count
    /// into the run log.
    fn load_logged(&self) -> Result<(Corpus, LoadReport)> {
        let (corpus, report) = self.load()?;
        self.log.info(&format!("corpus: {} patents, {} citations", corpus.len(), corpus.citations().len()));
        for line in report.render().lines() {
            self.log.info(line);
        }
        Ok((corpus, report))
    }

    fn classify(&self) -> Result<()> {
        let (corpus, report) = self.load_logged()?;
        write_file(&self.path("load-report.txt"), &report.render())?;
        let c = &self.config;

        let mut groups: Vec<Group> = Vec::new();
        let add = |groups: &mut Vec<Group>, name: &str, kind, set: PatentSet| {
            groups.push(Group {
                name: name.to_string(),
                kind,
                set,
            })
        };
        if c.keyword.enabled {
            let table = match &c.keyword.table {
                Some(p) => KeywordTable::load(p)?,
                None => KeywordTable::default_bundle(),
            };
            add(&mut groups, APPROACHES[0], GroupKind::Approach, classify_keyword(&corpus, &table));
        }
        if c.science.enabled {
            let set = classify_science(&corpus, &c.science.field_label, c.science.min_confidence);
            add(&mut groups, APPROACHES[1], GroupKind::Approach, set);
        }
        if c.wipo.enabled {
            let rules = match &c.wipo.rules {
                Some(p) => WipoRuleSet::load(p)?,
                None => {
                    self.log.warn("wipo: no rules file given, using the sample rule set");
                    WipoRuleSet::sample()
                }
            };
            add(&mut groups, APPROACHES[2], GroupKind::Approach, classify_wipo(&corpus, &rules)?);
        }
        if c.uspto.enabled {
            let mut ucfg = match &c.uspto.config {
                Some(p) => UsptoConfig::load(p)?,
                None => UsptoConfig::default(),
            };
            if let Some(seed) = c.seed {
                ucfg.rng_seed = seed;
            }
            let seeds = build_uspto_seed(&corpus, &ucfg)?;
            for s in &seeds {
                self.log.info(&format!(
                    "uspto component {}: seed {}, anti-seed {}",
                    s.component,
                    s.seed.len(),
                    s.anti_seed.len()
                ));
            }
            let model = train_uspto(&corpus, &seeds, &ucfg)?;
            add(&mut groups, APPROACHES[3], GroupKind::Approach, classify_uspto(&model, &corpus));
        }
        add(&mut groups, ALL_GROUP, GroupKind::Benchmark, corpus.all_patents());
        for prefix in &c.benchmarks.prefixes {
            add(&mut groups, prefix, GroupKind::Benchmark, classify_prefix_group(&corpus, prefix)?);
        }
        let descendants: Vec<(String, PatentSet)> = groups
            .iter()
            .filter(|g| g.kind == GroupKind::Approach)
            .map(|g| (format!("{}{DESCENDANT_SUFFIX}", g.name), descendants_of(&corpus, &g.set)))
            .collect();
        for (name, set) in descendants {
            add(&mut groups, &name, GroupKind::Descendants, set);
        }

        let mut rows = Vec::new();
        for g in &groups {
            write_id_list(&self.path(&format!("{GROUPS_DIR}/{}.ids", g.name)), corpus.ids_of(&g.set))?;
            rows.push(vec![g.name.clone(), g.kind.name().to_string(), g.set.len().to_string()]);
            self.log.info(&format!("group {}: {} patents", g.name, g.set.len()));
        }
        write_table(&self.path(GROUP_INDEX), &["group", "kind", "size"], &rows)
    }

    fn read_groups(&self, corpus: &Corpus) -> Result<Vec<Group>> {
        let index = self.path(GROUP_INDEX);
        self.require(&index)?;
        let text = fs::read_to_string(&index).map_err(|e| Error::io(&index, e))?;
        let mut groups = Vec::new();
        for (i, line) in text.lines().enumerate().skip(1) {
            let f: Vec<&str> = line.split('\t').collect();
            let kind = (f.len() == 3).then(|| GroupKind::parse(f[1])).flatten().ok_or_else(|| Error::MalformedRow {
                path: index.clone(),
                line: i + 1,
                reason: "expected group, kind, size".into(),
            })?;
            let ids_path = self.path(&format!("{GROUPS_DIR}/{}.ids", f[0]));
            self.require(&ids_path)?;
            let ids = read_id_list(&ids_path)?;
            let set = corpus.set_from_ids(ids.iter().map(String::as_str))?;
            groups.push(Group {
                name: f[0].to_string(),
                kind,
                set,
            });
        }
        Ok(groups)
    }

    fn metrics(&self) -> Result<()> {
        let (corpus, _) = self.load_logged()?;
        let groups = self.read_groups(&corpus)?;
        let c = &self.config;
        let level = c.level()?;
        let div_level = c.diversity_level()?;
        let per_patent_level = c.per_patent_level()?;
        let universe = c.metrics.universe.or_else(|| metrics::default_universe(div_level)).expect("level 3 or 4");
        let lag_mode = c.lag_mode()?;
        let decades = c.decades()?;

        let compared: Vec<&Group> = groups.iter().filter(|g| g.kind != GroupKind::Descendants).collect();
        let approaches: Vec<&Group> = groups.iter().filter(|g| g.kind == GroupKind::Approach).collect();
        let all = groups
            .iter()
            .find(|g| g.name == ALL_GROUP)
            .ok_or_else(|| Error::Data(format!("group index lacks the `{ALL_GROUP}` group")))?;
        let metric_path = |m: &str| self.path(&format!("{METRICS_DIR}/{m}.metric.tsv"));
        let table_path = |t: &str| self.path(&format!("{TABLES_DIR}/{t}.table.tsv"));

        let counts: Vec<GroupSeries> = compared.par_iter().map(|g| metrics::count_series(&corpus, &g.name, &g.set)).collect();
        write_series(&metric_path(names::COUNTS), &counts)?;
        let all_counts = metrics::count_series(&corpus, ALL_GROUP, &all.set);
        let shares = counts.iter().map(|s| metrics::share_series(s, &all_counts)).collect::<Result<Vec<_>>>()?;
        write_series(&metric_path(names::SHARE), &shares)?;
        let growth = counts.iter().map(metrics::growth_series).collect::<Result<Vec<_>>>()?;
        write_series(&metric_path(names::GROWTH), &growth)?;

        if approaches.len() >= 2 {
            let mut pairs = Vec::new();
            let mut rows = Vec::new();
            for (i, a) in approaches.iter().enumerate() {
                for b in &approaches[i + 1..] {
                    let name = format!("{}~{}", a.name, b.name);
                    pairs.push(metrics::jaccard_by_year(&corpus, &name, &a.set, &b.set));
                    let inter = a.set.intersection(&b.set).len();
                    let union = a.set.union(&b.set).len();
                    rows.push(vec![
                        a.name.clone(),
                        b.name.clone(),
                        inter.to_string(),
                        union.to_string(),
                        format_value(metrics::jaccard(&a.set, &b.set)),
                    ]);
                }
            }
            let sets: Vec<PatentSet> = approaches.iter().map(|g| g.set.clone()).collect();
            let (count, share) = metrics::all_way_overlap(&sets)?;
            let union = sets.iter().fold(PatentSet::new(), |acc, s| acc.union(s)).len();
            rows.push(vec!["all".into(), "all".into(), count.to_string(), union.to_string(), format_value(share)]);
            write_series(&metric_path(names::JACCARD), &pairs)?;
            write_table(&table_path("overlap"), &["group_a", "group_b", "intersection", "union", "jaccard"], &rows)?;
        }

        let generality: Vec<GroupSeries> = groups
            .par_iter()
            .map(|g| metrics::generality_series(&corpus, &g.name, &g.set, level))
            .collect();
        write_series(&metric_path(names::GENERALITY), &generality)?;
        let approach_generality: Vec<GroupSeries> = generality
            .iter()
            .filter(|s| approaches.iter().any(|a| a.name == s.group))
            .cloned()
            .collect();
        if approach_generality.len() >= 2 {
            write_series(&metric_path(names::ZSCORE), &metrics::zscore_across_groups(&approach_generality)?)?;
        }

        let citing: Vec<_> = compared
            .par_iter()
            .map(|g| {
                (
                    metrics::avg_citing_classes(&corpus, &g.name, &g.set, level, false),
                    metrics::avg_citing_classes(&corpus, &g.name, &g.set, level, true),
                )
            })
            .collect();
        write_series(&metric_path(names::AVG_CITING_CLASSES), &citing.iter().map(|c| c.0.annual.clone()).collect::<Vec<_>>())?;
        write_series(
            &metric_path(names::AVG_CITING_CLASSES_CITED),
            &citing.iter().map(|c| c.1.annual.clone()).collect::<Vec<_>>(),
        )?;

        let diversity = compared
            .par_iter()
            .map(|g| metrics::diversity_share(&corpus, &g.name, &g.set, div_level, universe, c.metrics.cumulative))
            .collect::<Result<Vec<_>>>()?;
        write_series(&metric_path(names::DIVERSITY_SHARE), &diversity)?;
        let per_patent: Vec<_> = compared
            .par_iter()
            .map(|g| metrics::diversity_per_patent(&corpus, &g.name, &g.set, per_patent_level))
            .collect();
        write_series(&metric_path(names::DIVERSITY_PER_PATENT), &per_patent.iter().map(|p| p.0.clone()).collect::<Vec<_>>())?;

        // headline tables over the whole window
        let opt = |v: Option<f64>| v.map(format_value).unwrap_or_default();
        let gen_rows: Vec<Vec<String>> = groups
            .par_iter()
            .map(|g| {
                let mut row = vec![g.name.clone()];
                for l in Level::ALL {
                    row.push(opt(metrics::generality_index(&corpus, &g.set, l, YearFilter::Any)));
                }
                row
            })
            .collect();
        write_table(&table_path(names::GENERALITY), &["group", "section", "class", "subclass"], &gen_rows)?;

        let citing_rows: Vec<Vec<String>> = compared
            .iter()
            .zip(&citing)
            .map(|(g, (all_p, cited))| {
                vec![
                    g.name.clone(),
                    opt(all_p.mean_of_annual),
                    opt(cited.mean_of_annual),
                    opt(all_p.pooled),
                    opt(cited.pooled),
                ]
            })
            .collect();
        write_table(
            &table_path("citing_classes"),
            &["group", "all_patents", "cited_only", "all_patents_pooled", "cited_only_pooled"],
            &citing_rows,
        )?;

        let div_rows = compared
            .par_iter()
            .map(|g| {
                let mut row = vec![g.name.clone()];
                for l in [Level::Class, Level::Subclass] {
                    let n = if l == div_level {
                        universe
                    } else {
                        metrics::default_universe(l).expect("level 3 or 4")
                    };
                    row.push(format_value(metrics::diversity_share_overall(&corpus, &g.set, l, n)?));
                }
                for l in Level::ALL {
                    row.push(opt(metrics::diversity_per_patent(&corpus, &g.name, &g.set, l).1));
                }
                Ok(row)
            })
            .collect::<Result<Vec<_>>>()?;
        write_table(
            &table_path("diversity"),
            &["group", "share_class", "share_subclass", "per_patent_section", "per_patent_class", "per_patent_subclass"],
            &div_rows,
        )?;

        let lag_groups: Vec<&Group> = groups.iter().filter(|g| g.kind != GroupKind::Benchmark || g.name == ALL_GROUP).collect();
        let lag_rows: Vec<Vec<String>> = lag_groups
            .par_iter()
            .map(|g| {
                let mut row = vec![g.name.clone()];
                row.extend(metrics::citation_lag(&corpus, &g.set, &decades, lag_mode).into_iter().map(opt));
                row
            })
            .collect();
        let decade_names: Vec<String> = decades.iter().map(|d| d.to_string()).collect();
        let mut cols = vec!["group"];
        cols.extend(decade_names.iter().map(String::as_str));
        write_table(&table_path(names::CITATION_LAG), &cols, &lag_rows)?;
        Ok(())
    }

    fn stats(&self) -> Result<()> {
        let c = &self.config;
        let index = self.path(GROUP_INDEX);
        self.require(&index)?;
        let compared: Vec<String> = fs::read_to_string(&index)
            .map_err(|e| Error::io(&index, e))?
            .lines()
            .skip(1)
            .filter_map(|l| {
                let f: Vec<&str> = l.split('\t').collect();
                (f.len() == 3 && f[1] != GroupKind::Descendants.name()).then(|| f[0].to_string())
            })
            .collect();
        let periods = c.periods()?;

        for metric in &c.stats.metrics {
            let path = self.path(&format!("{METRICS_DIR}/{metric}.metric.tsv"));
            self.require(&path)?;
            let series: Vec<GroupSeries> = read_series(&path, metric)?
                .into_iter()
                .filter(|s| compared.contains(&s.group))
                .collect();
            if series.len() < 2 {
                self.log.warn(&format!("stats: {metric} has fewer than 2 groups, skipped"));
                continue;
            }
            let mut summary_rows = Vec::new();
            for period in &periods {
                let result = pairwise_compare(&series, *period, c.stats.holm)?;
                let mut rows = Vec::new();
                let mut missing = 0;
                for (i, g) in result.groups.iter().enumerate() {
                    let mut row = vec![g.clone()];
                    for j in 0..i {
                        match result.p_values[i][j] {
                            Some(p) => row.push(format_value(p)),
                            None => {
                                missing += 1;
                                row.push(String::new());
                            }
                        }
                    }
                    rows.push(row);
                }
                if missing > 0 {
                    self.log.warn(&format!("stats: {metric} {period}: {missing} pairs could not be tested"));
                }
                let mut cols = vec!["group"];
                cols.extend(result.groups.iter().map(String::as_str));
                write_table(&self.path(&format!("{STATS_DIR}/{metric}.{period}.pvalues.tsv")), &cols, &rows)?;
                for s in &series {
                    let values: Vec<f64> = s.restricted(*period).values().collect();
                    if let Ok(st) = summary_stats(&values) {
                        summary_rows.push(vec![
                            s.group.clone(),
                            period.to_string(),
                            st.n.to_string(),
                            format_value(st.mean),
                            format_value(st.median),
                            format_value(st.sd),
                        ]);
                    }
                }
            }
            write_table(
                &self.path(&format!("{STATS_DIR}/{metric}.summary.tsv")),
                &["group", "period", "n", "mean", "median", "sd"],
                &summary_rows,
            )?;
        }

        let metric = &c.stats.lowess_metric;
        let path = self.path(&format!("{METRICS_DIR}/{metric}.metric.tsv"));
        self.require(&path)?;
        let mut smoothed = Vec::new();
        for s in read_series(&path, metric)? {
            let xs: Vec<f64> = s.years().map(f64::from).collect();
            let ys: Vec<f64> = s.values().collect();
            match lowess(&xs, &ys, c.stats.lowess_fraction, c.stats.lowess_iters) {
                Ok(fit) => smoothed.push(GroupSeries::new(
                    s.group.clone(),
                    format!("{metric}_lowess"),
                    s.years().zip(fit).collect(),
                )),
                Err(Error::InsufficientData(_)) => {
                    self.log.warn(&format!("stats: {} too short for lowess", s.group));
                }
                Err(e) => return Err(e),
            }
        }
        if !smoothed.is_empty() {
            write_series(&self.path(&format!("{STATS_DIR}/{metric}_lowess.metric.tsv")), &smoothed)?;
        }
        Ok(())
    }

    fn report(&self) -> Result<()> {
        let dir = self.path(METRICS_DIR);
        let mut files: BTreeMap<String, PathBuf> = BTreeMap::new();
        for d in [dir.clone(), self.path(STATS_DIR)] {
            let Ok(entries) = fs::read_dir(&d) else { continue };
            for entry in entries {
                let path = entry.map_err(|e| Error::io(&d, e))?.path();
                let name = path.file_name().and_then(|n| n.to_str()).unwrap_or_default();
                if let Some(metric) = name.strip_suffix(".metric.tsv") {
                    files.insert(metric.to_string(), path.clone());
                }
            }
        }
        if files.is_empty() {
            return Err(Error::Data(format!("no metric files found in {}", dir.display())));
        }
        let mut index = String::from("plot\tmetric\tseries\n");
        for (metric, path) in &files {
            let series = read_series(path, metric)?;
            let options = PlotOptions {
                title: metric.replace('_', " "),
                y_label: metric.clone(),
                ..PlotOptions::default()
            };
            let plot = format!("{PLOTS_DIR}/{metric}.svg");
            match write_svg_lines(&self.path(&plot), &series, &options) {
                Ok(()) => {
                    let _ = writeln!(index, "{plot}\t{metric}\t{}", series.len());
                }
                Err(Error::InsufficientData(m)) => self.log.warn(&format!("report: {metric}: {m}")),
                Err(e) => return Err(e),
            }
        }
        write_file(&self.path("report.tsv"), &index)
    }
}

/// Writes a generated corpus and its ground-truth groups under `out`.
pub fn synth_to_dir(config: &SynthConfig, out: &Path, log: &RunLog) -> Result<()> {
    let generated = generate(config)?;
    aigpt_core::io::write_corpus(&aigpt_core::io::CorpusPaths::in_dir(out), &generated.corpus)?;
    for (name, set) in &generated.truth {
        write_id_list(&out.join(format!("truth/{name}.ids")), generated.corpus.ids_of(set))?;
        log.info(&format!("truth {name}: {} patents", set.len()));
    }
    log.info(&format!(
        "generated {} patents, {} citations",
        generated.corpus.len(),
        generated.corpus.citations().len()
    ));
    let n = write_manifest(out)?;
    log.info(&format!("manifest lists {n} artifacts"));
    Ok(())
}
