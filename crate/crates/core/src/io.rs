//! Tab-separated loaders and writers for corpus tables and result artifacts.
//!
//! Every table is UTF-8 with a header row. Writers replace tabs and line
//! breaks inside text fields with single spaces and emit rows in a fixed
//! order, so identical inputs always produce byte-identical files.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::corpus::{
    Corpus, CorpusBuilder, LoadReport, PatentId, PatentRecord, ScienceLink, Table, YearWindow,
};
use crate::cpc::CpcCode;
use crate::error::{Error, Result};
use crate::metrics::GroupSeries;

/// Column layout of one of the fixed tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TableSchema {
    pub name: &'static str,
    pub columns: &'static [&'static str],
    pub delimiter: char,
}

pub const PATENTS: TableSchema = TableSchema {
    name: "patents",
    columns: &["id", "grant_year", "title", "abstract", "claims", "description"],
    delimiter: '\t',
};

pub const CPC: TableSchema = TableSchema {
    name: "cpc",
    columns: &["patent_id", "cpc_code"],
    delimiter: '\t',
};

pub const CITATIONS: TableSchema = TableSchema {
    name: "citations",
    columns: &["citing_id", "cited_id", "citing_year"],
    delimiter: '\t',
};

pub const SCIENCE: TableSchema = TableSchema {
    name: "science",
    columns: &["patent_id", "field_label", "confidence"],
    delimiter: '\t',
};

/// Locations of the four corpus tables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusPaths {
    pub patents: PathBuf,
    pub cpc: PathBuf,
    pub citations: PathBuf,
    pub science: PathBuf,
}

impl CorpusPaths {
    /// The conventional file names inside `dir`.
    pub fn in_dir(dir: impl AsRef<Path>) -> Self {
        let dir = dir.as_ref();
        CorpusPaths {
            patents: dir.join("patents.tsv"),
            cpc: dir.join("cpc.tsv"),
            citations: dir.join("citations.tsv"),
            science: dir.join("science.tsv"),
        }
    }

    pub fn all(&self) -> [&Path; 4] {
        [&self.patents, &self.cpc, &self.citations, &self.science]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct LoadConfig {
    pub window: YearWindow,
    /// Abort on the first rejected row instead of skipping it.
    pub strict: bool,
}

fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Splits a table into data rows, checking the header. An empty file counts
/// as a table with no rows.
fn data_rows<'a>(path: &Path, text: &'a str, schema: &TableSchema) -> Result<Vec<(usize, Vec<&'a str>)>> {
    let mut lines = text.lines().enumerate();
    let Some((_, header)) = lines.next() else {
        return Ok(Vec::new());
    };
    let header: Vec<&str> = header.trim_end_matches('\r').split(schema.delimiter).collect();
    if header != schema.columns {
        return Err(Error::MalformedRow {
            path: path.to_path_buf(),
            line: 1,
            reason: format!("expected {} header {:?}, found {:?}", schema.name, schema.columns, header),
        });
    }
    Ok(lines
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r').split(schema.delimiter).collect()))
        .collect())
}

struct RowSink<'a> {
    builder: &'a mut CorpusBuilder,
    path: &'a Path,
    table: Table,
}

impl RowSink<'_> {
    fn malformed(&mut self, line: usize, reason: String) -> Result<()> {
        if self.builder.is_strict() {
            return Err(Error::MalformedRow {
                path: self.path.to_path_buf(),
                line,
                reason,
            });
        }
        log::debug!("{}:{line}: {reason}", self.path.display());
        self.builder.count_input_rejection(self.table, "malformed");
        Ok(())
    }
}

fn opt_text(s: &str) -> Option<String> {
    (!s.is_empty()).then(|| s.to_string())
}

/// Loads and validates the four corpus tables.
pub fn load_corpus(paths: &CorpusPaths, config: &LoadConfig) -> Result<(Corpus, LoadReport)> {
    let mut builder = CorpusBuilder::new(config.window).strict(config.strict);

    let text = read_to_string(&paths.patents)?;
    let rows = data_rows(&paths.patents, &text, &PATENTS)?;
    let mut sink = RowSink {
        builder: &mut builder,
        path: &paths.patents,
        table: Table::Patents,
    };
    for (line, f) in rows {
        if f.len() != PATENTS.columns.len() {
            sink.malformed(line, format!("expected 6 columns, found {}", f.len()))?;
            continue;
        }
        let id = match PatentId::new(f[0]) {
            Ok(id) => id,
            Err(e) => {
                sink.malformed(line, e.to_string())?;
                continue;
            }
        };
        let Ok(year) = f[1].trim().parse::<i32>() else {
            sink.malformed(line, format!("bad grant_year `{}`", f[1]))?;
            continue;
        };
        let record = PatentRecord {
            id,
            grant_year: year,
            title: opt_text(f[2]),
            abstract_text: opt_text(f[3]),
            claims: opt_text(f[4]),
            description: opt_text(f[5]),
        };
        sink.builder.add_patent(record)?;
    }

    let text = read_to_string(&paths.cpc)?;
    let rows = data_rows(&paths.cpc, &text, &CPC)?;
    let mut sink = RowSink {
        builder: &mut builder,
        path: &paths.cpc,
        table: Table::Cpc,
    };
    for (line, f) in rows {
        if f.len() != 2 {
            sink.malformed(line, format!("expected 2 columns, found {}", f.len()))?;
            continue;
        }
        match (PatentId::new(f[0]), CpcCode::parse(f[1])) {
            (Ok(id), Ok(code)) => sink.builder.add_cpc(id, code),
            (Err(e), _) | (_, Err(e)) => sink.malformed(line, e.to_string())?,
        }
    }

    let text = read_to_string(&paths.citations)?;
    let rows = data_rows(&paths.citations, &text, &CITATIONS)?;
    let mut sink = RowSink {
        builder: &mut builder,
        path: &paths.citations,
        table: Table::Citations,
    };
    for (line, f) in rows {
        if f.len() != 3 {
            sink.malformed(line, format!("expected 3 columns, found {}", f.len()))?;
            continue;
        }
        let year = match f[2].trim() {
            "" => None,
            y => match y.parse::<i32>() {
                Ok(y) => Some(y),
                Err(_) => {
                    sink.malformed(line, format!("bad citing_year `{y}`"))?;
                    continue;
                }
            },
        };
        match (PatentId::new(f[0]), PatentId::new(f[1])) {
            (Ok(a), Ok(b)) => sink.builder.add_citation(a, b, year),
            (Err(e), _) | (_, Err(e)) => sink.malformed(line, e.to_string())?,
        }
    }

    let text = read_to_string(&paths.science)?;
    let rows = data_rows(&paths.science, &text, &SCIENCE)?;
    let mut sink = RowSink {
        builder: &mut builder,
        path: &paths.science,
        table: Table::Science,
    };
    for (line, f) in rows {
        if f.len() != 3 {
            sink.malformed(line, format!("expected 3 columns, found {}", f.len()))?;
            continue;
        }
        let Ok(confidence) = f[2].trim().parse::<u32>() else {
            sink.malformed(line, format!("bad confidence `{}`", f[2]))?;
            continue;
        };
        match PatentId::new(f[0]) {
            Ok(patent) => sink.builder.add_science(ScienceLink {
                patent,
                field_label: f[1].to_string(),
                confidence,
            }),
            Err(e) => sink.malformed(line, e.to_string())?,
        }
    }

    let (corpus, report) = builder.build()?;
    log::info!(
        "loaded {} patents, {} codes, {} citations",
        corpus.len(),
        report.cpc.accepted,
        report.citations.accepted
    );
    Ok((corpus, report))
}

/// Replaces tabs and line breaks with single spaces.
pub fn clean_field(s: &str) -> String {
    s.replace(['\t', '\r', '\n'], " ")
}

fn header(schema: &TableSchema) -> String {
    let mut s = schema.columns.join(&schema.delimiter.to_string());
    s.push('\n');
    s
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// Writes the corpus back out as the four tables.
pub fn write_corpus(paths: &CorpusPaths, corpus: &Corpus) -> Result<()> {
    let mut out = header(&PATENTS);
    for r in corpus.records() {
        let text = |f: &Option<String>| f.as_deref().map(clean_field).unwrap_or_default();
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}",
            r.id,
            r.grant_year,
            text(&r.title),
            text(&r.abstract_text),
            text(&r.claims),
            text(&r.description)
        );
    }
    write_file(&paths.patents, &out)?;

    let mut out = header(&CPC);
    for (id, code) in corpus.assignments() {
        let _ = writeln!(out, "{id}\t{code}");
    }
    write_file(&paths.cpc, &out)?;

    let mut out = header(&CITATIONS);
    let mut edges = corpus.citation_edges();
    edges.sort();
    for e in edges {
        let _ = writeln!(out, "{}\t{}\t{}", e.citing, e.cited, e.citing_year);
    }
    write_file(&paths.citations, &out)?;

    let mut out = header(&SCIENCE);
    for l in corpus.all_science_links() {
        let _ = writeln!(out, "{}\t{}\t{}", l.patent, clean_field(&l.field_label), l.confidence);
    }
    write_file(&paths.science, &out)
}

/// Renders a value with six significant digits, rounding half to even, in
/// the style of C's `%g`.
pub fn format_value(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let sci = format!("{v:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        trim_zeros(format!("{v:.decimals$}"))
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa.to_string()), exp.abs())
    }
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn series_column(s: &GroupSeries, single_metric: bool) -> String {
    if single_metric {
        s.group.clone()
    } else {
        format!("{}:{}", s.metric, s.group)
    }
}

/// Writes series as one table: `year` followed by one column per series,
/// sorted by name. Years missing from a series are left empty.
pub fn write_series(path: &Path, series: &[GroupSeries]) -> Result<()> {
    write_file(path, &render_series(series)?)
}

pub fn render_series(series: &[GroupSeries]) -> Result<String> {
    if series.is_empty() {
        return Err(Error::Data("no series to write".into()));
    }
    let single_metric = series.iter().all(|s| s.metric == series[0].metric);
    let mut cols: Vec<(String, &GroupSeries)> =
        series.iter().map(|s| (series_column(s, single_metric), s)).collect();
    cols.sort_by(|a, b| a.0.cmp(&b.0));
    if let Some(w) = cols.windows(2).find(|w| w[0].0 == w[1].0) {
        return Err(Error::Data(format!("duplicate series `{}`", w[0].0)));
    }
    let years: BTreeSet<i32> = series.iter().flat_map(|s| s.years()).collect();
    let mut out = String::from("year");
    for (name, _) in &cols {
        out.push('\t');
        out.push_str(&clean_field(name));
    }
    out.push('\n');
    for year in years {
        out.push_str(&year.to_string());
        for (_, s) in &cols {
            out.push('\t');
            if let Some(v) = s.value_at(year) {
                out.push_str(&format_value(v));
            }
        }
        out.push('\n');
    }
    Ok(out)
}

/// Reads a table written by [`write_series`]; every column becomes a series
/// named after its header, tagged with `metric`.
pub fn read_series(path: &Path, metric: &str) -> Result<Vec<GroupSeries>> {
    let text = read_to_string(path)?;
    let malformed = |line: usize, reason: String| Error::MalformedRow {
        path: path.to_path_buf(),
        line,
        reason,
    };
    let mut lines = text.lines();
    let header: Vec<&str> = lines
        .next()
        .ok_or_else(|| malformed(1, "empty series file".into()))?
        .split('\t')
        .collect();
    if header.first() != Some(&"year") {
        return Err(malformed(1, "first column must be `year`".into()));
    }
    let mut series: Vec<GroupSeries> =
        header[1..].iter().map(|g| GroupSeries::new(*g, metric, Vec::new())).collect();
    for (i, line) in lines.enumerate() {
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() != header.len() {
            return Err(malformed(i + 2, format!("expected {} columns", header.len())));
        }
        let year: i32 = f[0].parse().map_err(|_| malformed(i + 2, format!("bad year `{}`", f[0])))?;
        for (s, cell) in series.iter_mut().zip(&f[1..]) {
            if cell.is_empty() {
                continue;
            }
            let v: f64 = cell.parse().map_err(|_| malformed(i + 2, format!("bad value `{cell}`")))?;
            s.points.push((year, v));
        }
    }
    Ok(series)
}

/// Writes a generic table with a header row.
pub fn write_table(path: &Path, columns: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut out = columns.join("\t");
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|c| clean_field(c)).collect();
        out.push_str(&cells.join("\t"));
        out.push('\n');
    }
    write_file(path, &out)
}

/// Writes ids sorted, one per line.
pub fn write_id_list<'a, I>(path: &Path, ids: I) -> Result<()>
where
    I: IntoIterator<Item = &'a PatentId>,
{
    let sorted: BTreeSet<&str> = ids.into_iter().map(PatentId::as_str).collect();
    let mut out = String::new();
    for id in sorted {
        out.push_str(id);
        out.push('\n');
    }
    write_file(path, &out)
}

pub fn read_id_list(path: &Path) -> Result<Vec<String>> {
    Ok(read_to_string(path)?
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(str::to_string)
        .collect())
}

/// Layout options for [`write_svg_lines`].
#[derive(Debug, Clone, PartialEq)]
pub struct PlotOptions {
    pub title: String,
    pub y_label: String,
    pub width: u32,
    pub height: u32,
}

impl Default for PlotOptions {
    fn default() -> Self {
        PlotOptions {
            title: String::new(),
            y_label: String::new(),
            width: 720,
            height: 420,
        }
    }
}

const PALETTE: &[&str] = &[
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22",
    "#17becf",
];

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Renders series as a static line chart: one polyline per group, axis
/// ticks and a legend in sorted group order.
pub fn render_svg_lines(series: &[GroupSeries], options: &PlotOptions) -> Result<String> {
    let mut drawn: Vec<&GroupSeries> = series.iter().filter(|s| s.points.len() >= 2).collect();
    if drawn.is_empty() {
        return Err(Error::InsufficientData(
            "every series has fewer than 2 points; nothing to plot".into(),
        ));
    }
    drawn.sort_by(|a, b| a.group.cmp(&b.group).then_with(|| a.metric.cmp(&b.metric)));

    let (w, h) = (options.width as f64, options.height as f64);
    let (left, right, top, bottom) = (64.0, 150.0, 36.0, 44.0);
    let (pw, ph) = (w - left - right, h - top - bottom);

    let xs = drawn.iter().flat_map(|s| s.years());
    let (x0, x1) = xs.fold((i32::MAX, i32::MIN), |(lo, hi), x| (lo.min(x), hi.max(x)));
    let ys = drawn.iter().flat_map(|s| s.values());
    let (mut y0, mut y1) = ys.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), y| (lo.min(y), hi.max(y)));
    if y1 - y0 < 1e-12 {
        y0 -= 1.0;
        y1 += 1.0;
    }
    let x_span = ((x1 - x0) as f64).max(1.0);
    let px = |x: i32| left + (x - x0) as f64 / x_span * pw;
    let py = |y: f64| top + (1.0 - (y - y0) / (y1 - y0)) * ph;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="0 0 {} {}" font-family="sans-serif" font-size="11">"#,
        options.width, options.height, options.width, options.height
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    if !options.title.is_empty() {
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="20" text-anchor="middle" font-size="14">{}</text>"#,
            left + pw / 2.0,
            xml_escape(&options.title)
        );
    }
    let _ = writeln!(
        svg,
        r#"<path d="M{left:.2} {top:.2} V{:.2} H{:.2}" fill="none" stroke="black"/>"#,
        top + ph,
        left + pw
    );

    for i in 0..=4 {
        let v = y0 + (y1 - y0) * i as f64 / 4.0;
        let y = py(v);
        let _ = writeln!(
            svg,
            r#"<line x1="{:.2}" y1="{y:.2}" x2="{left:.2}" y2="{y:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            left - 4.0,
            left - 6.0,
            y + 4.0,
            format_value(v)
        );
    }
    let step = (((x1 - x0) as f64 / 6.0).ceil() as i32).max(1);
    let mut x = x0;
    while x <= x1 {
        let xp = px(x);
        let _ = writeln!(
            svg,
            r#"<line x1="{xp:.2}" y1="{:.2}" x2="{xp:.2}" y2="{:.2}" stroke="black"/><text x="{xp:.2}" y="{:.2}" text-anchor="middle">{x}</text>"#,
            top + ph,
            top + ph + 4.0,
            top + ph + 16.0
        );
        x += step;
    }
    if !options.y_label.is_empty() {
        let _ = writeln!(
            svg,
            r#"<text x="14" y="{:.2}" text-anchor="middle" transform="rotate(-90 14 {:.2})">{}</text>"#,
            top + ph / 2.0,
            top + ph / 2.0,
            xml_escape(&options.y_label)
        );
    }

    for (i, s) in drawn.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let pts: Vec<String> = s.points.iter().map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            pts.join(" ")
        );
        let ly = top + 12.0 + i as f64 * 16.0;
        let lx = left + pw + 12.0;
        let _ = writeln!(
            svg,
            r#"<g class="legend"><line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/><text x="{:.2}" y="{:.2}">{}</text></g>"#,
            lx + 18.0,
            lx + 22.0,
            ly + 4.0,
            xml_escape(&s.group)
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

pub fn write_svg_lines(path: &Path, series: &[GroupSeries], options: &PlotOptions) -> Result<()> {
    write_file(path, &render_svg_lines(series, options)?)
}

/// Reads a two-column `phrase, category` keyword table into ordered pairs.
pub(crate) fn read_two_columns(path: &Path, expected: [&str; 2]) -> Result<Vec<(usize, String, String)>> {
    let text = read_to_string(path)?;
    let mut rows = Vec::new();
    let mut lines = text.lines().enumerate();
    let header = lines.next().map(|(_, l)| l.split('\t').collect::<Vec<_>>()).unwrap_or_default();
    if header != expected {
        return Err(Error::MalformedRow {
            path: path.to_path_buf(),
            line: 1,
            reason: format!("expected header {expected:?}"),
        });
    }
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() != 2 {
            return Err(Error::MalformedRow {
                path: path.to_path_buf(),
                line: i + 1,
                reason: "expected 2 columns".into(),
            });
        }
        rows.push((i + 1, f[0].to_string(), f[1].to_string()));
    }
    Ok(rows)
}

/// Reads a small `key<TAB>value` style table with arbitrary columns,
/// returning rows keyed by header name.
pub(crate) fn read_named_rows(path: &Path, columns: &[&str]) -> Result<Vec<(usize, BTreeMap<String, String>)>> {
    let text = read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    let header: Vec<&str> = lines.next().map(|(_, l)| l.split('\t').collect()).unwrap_or_default();
    if header != columns {
        return Err(Error::MalformedRow {
            path: path.to_path_buf(),
            line: 1,
            reason: format!("expected header {columns:?}"),
        });
    }
    let mut rows = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split('\t').collect();
        let mut row = BTreeMap::new();
        for (k, col) in columns.iter().enumerate() {
            row.insert(col.to_string(), f.get(k).map(|s| s.trim().to_string()).unwrap_or_default());
        }
        rows.push((i + 1, row));
    }
    Ok(rows)
}
