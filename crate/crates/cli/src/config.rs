//! Run configuration: a TOML file with one section per group and stage.
//!
//! Relative paths are resolved against the directory holding the config
//! file. Validation checks that every referenced input exists and that the
//! stats periods sit inside the corpus window.

use std::path::{Path, PathBuf};

use aigpt_core::classify::{ScienceRule, BENCHMARK_GROUPS, ALL_GROUP, AI_FIELD_LABEL};
use aigpt_core::io::CorpusPaths;
use aigpt_core::metrics::LagMode;
use aigpt_core::{Error, Level, Result, YearWindow};
use serde::Deserialize;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub out_dir: PathBuf,
    pub strict: bool,
    pub seed: Option<u64>,
    pub window: String,
    pub input: InputConfig,
    pub keyword: KeywordConfig,
    pub science: ScienceConfig,
    pub wipo: WipoConfig,
    pub uspto: UsptoSection,
    pub benchmarks: BenchmarkConfig,
    pub metrics: MetricsConfig,
    pub stats: StatsConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            out_dir: PathBuf::from("out"),
            strict: false,
            seed: None,
            window: YearWindow::default().to_string(),
            input: InputConfig::default(),
            keyword: KeywordConfig::default(),
            science: ScienceConfig::default(),
            wipo: WipoConfig::default(),
            uspto: UsptoSection::default(),
            benchmarks: BenchmarkConfig::default(),
            metrics: MetricsConfig::default(),
            stats: StatsConfig::default(),
        }
    }
}

/// Where the corpus comes from: a directory of the four tables, explicit
/// table paths, or a synth config generated on the fly.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InputConfig {
    pub dir: Option<PathBuf>,
    pub patents: Option<PathBuf>,
    pub cpc: Option<PathBuf>,
    pub citations: Option<PathBuf>,
    pub science: Option<PathBuf>,
    pub synth: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum InputSource {
    Tables(CorpusPaths),
    Synth(PathBuf),
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KeywordConfig {
    pub enabled: bool,
    /// `phrase<TAB>category` table; the bundled list when absent.
    pub table: Option<PathBuf>,
}

impl Default for KeywordConfig {
    fn default() -> Self {
        KeywordConfig {
            enabled: true,
            table: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScienceConfig {
    pub enabled: bool,
    pub field_label: String,
    pub min_confidence: u32,
}

impl Default for ScienceConfig {
    fn default() -> Self {
        let rule = ScienceRule::default();
        ScienceConfig {
            enabled: true,
            field_label: AI_FIELD_LABEL.to_string(),
            min_confidence: rule.min_confidence,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WipoConfig {
    pub enabled: bool,
    /// Rules table; the small sample rule set when absent.
    pub rules: Option<PathBuf>,
}

impl Default for WipoConfig {
    fn default() -> Self {
        WipoConfig {
            enabled: true,
            rules: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UsptoSection {
    pub enabled: bool,
    /// Classifier settings; built-in defaults when absent.
    pub config: Option<PathBuf>,
}

impl Default for UsptoSection {
    fn default() -> Self {
        UsptoSection {
            enabled: true,
            config: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchmarkConfig {
    /// CPC prefixes compared against the AI groups. `All` is always added.
    pub prefixes: Vec<String>,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        BenchmarkConfig {
            prefixes: BENCHMARK_GROUPS
                .iter()
                .filter(|g| **g != ALL_GROUP)
                .map(|g| g.to_string())
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricsConfig {
    /// CPC level (1, 3 or 4) for generality and citing classes.
    pub level: usize,
    /// Level (3 or 4) for the diversity share.
    pub diversity_level: usize,
    /// Level for diversity per patent.
    pub per_patent_level: usize,
    pub cumulative: bool,
    /// Overrides the reference universe size of the diversity share.
    pub universe: Option<usize>,
    pub lag_mode: String,
    pub decades: Vec<String>,
}

impl Default for MetricsConfig {
    fn default() -> Self {
        MetricsConfig {
            level: 1,
            diversity_level: 4,
            per_patent_level: 4,
            cumulative: false,
            universe: None,
            lag_mode: "all_citations".into(),
            decades: vec!["1990-1999".into(), "2000-2009".into(), "2010-2019".into()],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StatsConfig {
    pub metrics: Vec<String>,
    pub periods: Vec<String>,
    pub holm: bool,
    pub exact_cutoff: usize,
    /// Metric whose series get a lowess trend line.
    pub lowess_metric: String,
    pub lowess_fraction: f64,
    pub lowess_iters: usize,
}

impl Default for StatsConfig {
    fn default() -> Self {
        StatsConfig {
            metrics: ["growth", "share", "generality", "avg_citing_classes", "diversity_per_patent"]
                .map(String::from)
                .to_vec(),
            periods: ["1990-2019", "1990-1999", "2000-2009", "2010-2019"].map(String::from).to_vec(),
            holm: true,
            exact_cutoff: aigpt_core::stats::EXACT_CUTOFF,
            lowess_metric: "generality".into(),
            lowess_fraction: aigpt_core::stats::LOWESS_FRACTION,
            lowess_iters: aigpt_core::stats::LOWESS_ROBUST_ITERS,
        }
    }
}

fn level_from(n: usize, what: &str) -> Result<Level> {
    Level::from_width(n).ok_or_else(|| Error::Config(format!("{what}: level must be 1, 3 or 4, got {n}")))
}

fn window_from(s: &str, what: &str) -> Result<YearWindow> {
    s.parse()
        .map_err(|e: Error| Error::Config(format!("{what}: {e}")))
}

impl RunConfig {
    pub fn from_toml_str(text: &str, base: &Path) -> Result<Self> {
        let mut config: RunConfig = toml::from_str(text).map_err(|e| Error::Config(format!("run config: {e}")))?;
        config.resolve(base);
        Ok(config)
    }

    /// Reads, resolves and validates a config file.
    pub fn load(path: &Path) -> Result<Self> {
        if !path.is_file() {
            return Err(Error::Config(format!("config file {} does not exist", path.display())));
        }
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        let config = Self::from_toml_str(&text, base).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })?;
        config.validate()?;
        Ok(config)
    }

    fn resolve(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.out_dir);
        let i = &mut self.input;
        for p in [&mut i.dir, &mut i.patents, &mut i.cpc, &mut i.citations, &mut i.science, &mut i.synth]
            .into_iter()
            .flatten()
        {
            fix(p);
        }
        for p in [&mut self.keyword.table, &mut self.wipo.rules, &mut self.uspto.config]
            .into_iter()
            .flatten()
        {
            fix(p);
        }
    }

    pub fn input_source(&self) -> Result<InputSource> {
        let i = &self.input;
        let explicit = [&i.patents, &i.cpc, &i.citations, &i.science];
        let any_explicit = explicit.iter().any(|p| p.is_some());
        match (&i.synth, &i.dir, any_explicit) {
            (Some(s), None, false) => Ok(InputSource::Synth(s.clone())),
            (None, Some(dir), _) => {
                let mut paths = CorpusPaths::in_dir(dir);
                for (slot, given) in [
                    (&mut paths.patents, &i.patents),
                    (&mut paths.cpc, &i.cpc),
                    (&mut paths.citations, &i.citations),
                    (&mut paths.science, &i.science),
                ] {
                    if let Some(p) = given {
                        *slot = p.clone();
                    }
                }
                Ok(InputSource::Tables(paths))
            }
            (None, None, true) => {
                let missing: Vec<&str> = ["patents", "cpc", "citations", "science"]
                    .into_iter()
                    .zip(explicit)
                    .filter(|(_, p)| p.is_none())
                    .map(|(n, _)| n)
                    .collect();
                if !missing.is_empty() {
                    return Err(Error::Config(format!("input: missing table paths for {}", missing.join(", "))));
                }
                Ok(InputSource::Tables(CorpusPaths {
                    patents: i.patents.clone().unwrap(),
                    cpc: i.cpc.clone().unwrap(),
                    citations: i.citations.clone().unwrap(),
                    science: i.science.clone().unwrap(),
                }))
            }
            (None, None, false) => Err(Error::Config("input: set `dir`, the four table paths, or `synth`".into())),
            _ => Err(Error::Config("input: `synth` cannot be combined with table paths".into())),
        }
    }

    pub fn corpus_window(&self) -> Result<YearWindow> {
        window_from(&self.window, "window")
    }

    pub fn level(&self) -> Result<Level> {
        level_from(self.metrics.level, "metrics.level")
    }

    pub fn diversity_level(&self) -> Result<Level> {
        match level_from(self.metrics.diversity_level, "metrics.diversity_level")? {
            Level::Section => Err(Error::Config("metrics.diversity_level must be 3 or 4".into())),
            l => Ok(l),
        }
    }

    pub fn per_patent_level(&self) -> Result<Level> {
        level_from(self.metrics.per_patent_level, "metrics.per_patent_level")
    }

    pub fn lag_mode(&self) -> Result<LagMode> {
        match self.metrics.lag_mode.as_str() {
            "all_citations" => Ok(LagMode::AllCitations),
            "first_citation" => Ok(LagMode::FirstCitation),
            other => Err(Error::Config(format!(
                "metrics.lag_mode `{other}`: expected all_citations or first_citation"
            ))),
        }
    }

    pub fn decades(&self) -> Result<Vec<YearWindow>> {
        self.metrics.decades.iter().map(|d| window_from(d, "metrics.decades")).collect()
    }

    pub fn periods(&self) -> Result<Vec<YearWindow>> {
        self.stats.periods.iter().map(|p| window_from(p, "stats.periods")).collect()
    }

    pub fn validate(&self) -> Result<()> {
        let window = self.corpus_window()?;
        self.level()?;
        self.diversity_level()?;
        self.per_patent_level()?;
        self.lag_mode()?;
        self.decades()?;
        if self.metrics.universe == Some(0) {
            return Err(Error::Config("metrics.universe must be positive".into()));
        }
        for p in self.periods()? {
            if p.first < window.first || p.last > window.last {
                return Err(Error::Config(format!("stats period {p} lies outside the corpus window {window}")));
            }
        }
        if !(self.stats.lowess_fraction > 0.0 && self.stats.lowess_fraction <= 1.0) {
            return Err(Error::Config("stats.lowess_fraction must be in (0, 1]".into()));
        }
        match self.input_source()? {
            InputSource::Synth(p) => require_file(&p, "input.synth")?,
            InputSource::Tables(paths) => {
                for (name, p) in ["patents", "cpc", "citations", "science"].into_iter().zip(paths.all()) {
                    require_file(p, &format!("input.{name}"))?;
                }
            }
        }
        if self.keyword.enabled {
            if let Some(p) = &self.keyword.table {
                require_file(p, "keyword.table")?;
            }
        }
        if self.wipo.enabled {
            if let Some(p) = &self.wipo.rules {
                require_file(p, "wipo.rules")?;
            }
        }
        if self.uspto.enabled {
            if let Some(p) = &self.uspto.config {
                require_file(p, "uspto.config")?;
            }
        }
        for prefix in &self.benchmarks.prefixes {
            aigpt_core::cpc::parse_level_prefix(prefix)?;
        }
        Ok(())
    }
}

fn require_file(path: &Path, key: &str) -> Result<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(Error::Config(format!("{key}: file {} does not exist", path.display())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_parse_from_minimal_file() {
        let c = RunConfig::from_toml_str("[input]\nsynth = \"desk.synth\"\n", Path::new("/data")).unwrap();
        assert_eq!(c.input_source().unwrap(), InputSource::Synth(PathBuf::from("/data/desk.synth")));
        assert_eq!(c.out_dir, PathBuf::from("/data/out"));
        assert_eq!(c.periods().unwrap().len(), 4);
        assert_eq!(c.benchmarks.prefixes, ["G06", "H04W", "C12", "B82", "Y02"]);
        assert!(c.stats.holm);
    }

    #[test]
    fn table_paths_resolve() {
        let c = RunConfig::from_toml_str("[input]\ndir = \"corpus\"\ncpc = \"/x/codes.tsv\"\n", Path::new("/d")).unwrap();
        let InputSource::Tables(p) = c.input_source().unwrap() else {
            panic!("expected tables");
        };
        assert_eq!(p.patents, PathBuf::from("/d/corpus/patents.tsv"));
        assert_eq!(p.cpc, PathBuf::from("/x/codes.tsv"));
    }

    #[test]
    fn bad_values_are_config_errors() {
        let base = Path::new("/d");
        assert!(RunConfig::from_toml_str("nonsense = 1", base).is_err());
        let c = RunConfig::from_toml_str("[input]\npatents = \"p.tsv\"\n", base).unwrap();
        assert!(matches!(c.input_source(), Err(Error::Config(m)) if m.contains("cpc")));
        let c = RunConfig::from_toml_str("[metrics]\nlevel = 2\n", base).unwrap();
        assert!(c.level().is_err());
        let c = RunConfig::from_toml_str("[stats]\nperiods = [\"1980-1999\"]\n[input]\nsynth = \"s\"\n", base).unwrap();
        assert!(matches!(c.validate(), Err(Error::Config(m)) if m.contains("outside")));
    }

    #[test]
    fn missing_input_file_is_named() {
        let c = RunConfig::from_toml_str("[input]\ndir = \"/nowhere\"\n", Path::new("/")).unwrap();
        match c.validate() {
            Err(Error::Config(m)) => assert!(m.contains("/nowhere/patents.tsv"), "{m}"),
            other => panic!("{other:?}"),
        }
    }
}
