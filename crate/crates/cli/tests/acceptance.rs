//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use aigpt_core::classify::{
    build_uspto_seed, classify_keyword, classify_prefix_group, classify_science, classify_uspto, classify_wipo,
    descendants_of, train_uspto, KeywordTable, UsptoConfig, WipoRuleSet, AI_FIELD_LABEL,
};
use aigpt_core::metrics::{
    avg_citing_classes, citation_lag, count_series, generality_index, growth_series, jaccard, zscore_across_groups,
    LagMode, YearFilter,
};
use aigpt_core::stats::{holm_adjust, lowess, wilcoxon_signed_rank, TestMethod, EXACT_CUTOFF};
use aigpt_core::synth::{generate, SynthConfig, SynthOutput};
use aigpt_core::{Corpus, CorpusBuilder, CpcCode, GroupSeries, Level, PatentId, PatentRecord, PatentSet, YearWindow};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = std::result::Result<(), String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Check {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit_secs: f64) -> Check {
    ensure(elapsed.as_secs_f64() < limit_secs, || {
        format!("took {:.2}s, limit {limit_secs}s", elapsed.as_secs_f64())
    })
}

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn desk() -> SynthOutput {
    let config = SynthConfig::load(&fixtures().join("desk.synth")).expect("desk fixture loads");
    generate(&config).expect("desk fixture generates")
}

fn pid(i: usize) -> PatentId {
    PatentId::new(format!("P{i:06}")).unwrap()
}

// ---------------------------------------------------------------- criterion 1

fn generality_cases() -> Check {
    let started = Instant::now();
    let universe = aigpt_core::synth::background_universe();
    for k in [2usize, 3, 4, 10] {
        let mut b = CorpusBuilder::new(YearWindow::default());
        b.add_patent(PatentRecord::new(pid(0), 1995)).unwrap();
        b.add_cpc(pid(0), CpcCode::parse("A01B").unwrap());
        let classes: Vec<&String> = universe.iter().filter(|c| *c != "A01B").take(k).collect();
        let mut next = 1;
        for class in &classes {
            for _ in 0..3 {
                b.add_patent(PatentRecord::new(pid(next), 2000)).unwrap();
                b.add_cpc(pid(next), CpcCode::parse(class).unwrap());
                b.add_citation(pid(next), pid(0), None);
                next += 1;
            }
        }
        let corpus = b.build().unwrap().0;
        let set = corpus.set_from_ids([pid(0).as_str()]).unwrap();
        let g = generality_index(&corpus, &set, Level::Subclass, YearFilter::Any).ok_or("undefined generality")?;
        let want = 1.0 - 1.0 / k as f64;
        ensure((g - want).abs() < 1e-12, || format!("k={k}: {g} vs {want}"))?;
    }
    let mut b = CorpusBuilder::new(YearWindow::default());
    b.add_patent(PatentRecord::new(pid(0), 1995)).unwrap();
    b.add_cpc(pid(0), CpcCode::parse("A01B").unwrap());
    for i in 1..6 {
        b.add_patent(PatentRecord::new(pid(i), 2000)).unwrap();
        b.add_cpc(pid(i), CpcCode::parse("H04W").unwrap());
        b.add_citation(pid(i), pid(0), None);
    }
    let corpus = b.build().unwrap().0;
    let g = generality_index(&corpus, &corpus.set_from_ids([pid(0).as_str()]).unwrap(), Level::Section, YearFilter::Any);
    ensure(g == Some(0.0), || format!("single class gave {g:?}"))?;
    within(started.elapsed(), 1.0)
}

// ---------------------------------------------------------------- criterion 2

/// Raw inputs of a random corpus, kept for the brute-force oracles.
struct RawCorpus {
    years: Vec<i32>,
    codes: Vec<Vec<String>>,
    edges: Vec<(usize, usize)>,
}

fn random_corpus(rng: &mut ChaCha8Rng, max_patents: usize, max_edges: usize) -> (Corpus, RawCorpus) {
    const SUBCLASSES: [&str; 14] = [
        "A01B", "A01C", "A61K", "B82Y", "C12N", "C12Q", "G06F", "G06N", "G06K", "H04L", "H04W", "H01L", "Y02E", "Y02P",
    ];
    let n = rng.random_range(2..=max_patents);
    let mut raw = RawCorpus {
        years: Vec::with_capacity(n),
        codes: Vec::with_capacity(n),
        edges: Vec::new(),
    };
    let mut b = CorpusBuilder::new(YearWindow::default());
    for i in 0..n {
        let year = rng.random_range(1990..=2019);
        b.add_patent(PatentRecord::new(pid(i), year)).unwrap();
        let mut codes = BTreeSet::new();
        for _ in 0..rng.random_range(0..=3) {
            codes.insert(SUBCLASSES[rng.random_range(0..SUBCLASSES.len())].to_string());
        }
        for c in &codes {
            b.add_cpc(pid(i), CpcCode::parse(c).unwrap());
        }
        raw.years.push(year);
        raw.codes.push(codes.into_iter().collect());
    }
    let target = rng.random_range(0..=max_edges.min(n * (n - 1) / 2));
    let mut seen = HashSet::new();
    for _ in 0..target * 2 {
        if raw.edges.len() >= target {
            break;
        }
        let (a, c) = (rng.random_range(0..n), rng.random_range(0..n));
        if a == c || raw.years[a] < raw.years[c] || !seen.insert((a, c)) {
            continue;
        }
        b.add_citation(pid(a), pid(c), None);
        raw.edges.push((a, c));
    }
    (b.build().unwrap().0, raw)
}

fn truncate(codes: &[String], level: Level) -> BTreeSet<String> {
    codes.iter().map(|c| c[..level.width()].to_string()).collect()
}

fn oracle_generality(raw: &RawCorpus, set: &BTreeSet<usize>, level: Level) -> Option<f64> {
    let mut counts: BTreeMap<String, u64> = BTreeMap::new();
    for &(citing, cited) in &raw.edges {
        if !set.contains(&cited) {
            continue;
        }
        let own = truncate(&raw.codes[cited], level);
        for j in truncate(&raw.codes[citing], level) {
            if !own.contains(&j) {
                *counts.entry(j).or_default() += 1;
            }
        }
    }
    let total: u64 = counts.values().sum();
    (total > 0).then(|| 1.0 - counts.values().map(|&n| (n as f64 / total as f64).powi(2)).sum::<f64>())
}

fn oracle_citing_classes(raw: &RawCorpus, set: &BTreeSet<usize>, level: Level, cited_only: bool) -> Option<f64> {
    let mut per_year: BTreeMap<i32, Vec<f64>> = BTreeMap::new();
    for &p in set {
        let own = truncate(&raw.codes[p], level);
        let citers: Vec<usize> = raw.edges.iter().filter(|e| e.1 == p).map(|e| e.0).collect();
        if cited_only && citers.is_empty() {
            continue;
        }
        let classes: BTreeSet<String> = citers
            .iter()
            .flat_map(|&q| truncate(&raw.codes[q], level))
            .filter(|j| !own.contains(j))
            .collect();
        per_year.entry(raw.years[p]).or_default().push(classes.len() as f64);
    }
    if per_year.is_empty() {
        return None;
    }
    let annual: Vec<f64> = per_year.values().map(|v| v.iter().sum::<f64>() / v.len() as f64).collect();
    Some(annual.iter().sum::<f64>() / annual.len() as f64)
}

fn random_subset(rng: &mut ChaCha8Rng, n: usize, p: f64) -> BTreeSet<usize> {
    (0..n).filter(|_| rng.random_bool(p)).collect()
}

fn to_set(corpus: &Corpus, members: &BTreeSet<usize>) -> PatentSet {
    let ids: Vec<PatentId> = members.iter().map(|&i| pid(i)).collect();
    corpus.set_from_ids(ids.iter().map(PatentId::as_str)).unwrap()
}

fn oracle_equivalence() -> Check {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for round in 0..50 {
        let (corpus, raw) = random_corpus(&mut rng, 2000, 10_000);
        let members = random_subset(&mut rng, raw.years.len(), 0.3);
        let set = to_set(&corpus, &members);
        for level in Level::ALL {
            let got = generality_index(&corpus, &set, level, YearFilter::Any);
            let want = oracle_generality(&raw, &members, level);
            ensure(got == want, || format!("round {round} {level:?}: generality {got:?} vs {want:?}"))?;
            for cited_only in [false, true] {
                let got = avg_citing_classes(&corpus, "g", &set, level, cited_only).mean_of_annual;
                let want = oracle_citing_classes(&raw, &members, level, cited_only);
                ensure(got == want, || {
                    format!("round {round} {level:?} cited_only={cited_only}: {got:?} vs {want:?}")
                })?;
            }
        }
    }
    within(started.elapsed(), 30.0)
}

// ---------------------------------------------------------------- criterion 3

fn jaccard_checks() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (corpus, raw) = random_corpus(&mut rng, 400, 0);
    let n = raw.years.len();
    for _ in 0..1000 {
        let (pa, pb) = (rng.random_range(0.0..0.6), rng.random_range(0.0..0.6));
        let a = random_subset(&mut rng, n, pa);
        let b = random_subset(&mut rng, n, pb);
        let inter = a.intersection(&b).count();
        let union = a.union(&b).count();
        let want = if union == 0 { 0.0 } else { inter as f64 / union as f64 };
        let got = jaccard(&to_set(&corpus, &a), &to_set(&corpus, &b));
        ensure(got == want, || format!("{got} vs {want}"))?;
    }
    let a = to_set(&corpus, &(0..n / 2).collect());
    let b = to_set(&corpus, &(n / 2..n).collect());
    ensure(jaccard(&a, &b) == 0.0, || "disjoint sets must give 0".into())?;
    ensure(jaccard(&a, &a) == 1.0, || "identical sets must give 1".into())
}

// ---------------------------------------------------------------- criterion 4

fn growth_checks() -> Check {
    let points: Vec<(i32, f64)> = (0..30).map(|t| (1990 + t, 50.0 * 1.07f64.powi(t))).collect();
    let g = growth_series(&GroupSeries::new("g", "counts", points)).map_err(|e| e.to_string())?;
    for (year, v) in &g.points {
        ensure((v - 0.07).abs() < 1e-12, || format!("{year}: {v}"))?;
    }

    // U-shaped schedule: shrink, stall, then grow
    let mut schedule = vec![-0.06; 8];
    schedule.extend([0.0; 3]);
    schedule.extend([0.05; 8]);
    let mut config = SynthConfig::load(&fixtures().join("desk.synth")).map_err(|e| e.to_string())?;
    config.first_year = 2000;
    config.last_year = 2019;
    config.volume.n0 = 2500;
    config.volume.schedule = Some(schedule.clone());
    config.groups.truncate(1);
    config.groups[0].share = 0.5;
    config.overlaps.clear();
    config.all_way_share = 0.0;
    config.citations.edges_per_patent = 0.0;
    let out = generate(&config).map_err(|e| e.to_string())?;
    let group = out.truth.values().next().unwrap();
    for (name, set) in [("all", out.corpus.all_patents()), ("group", group.clone())] {
        let counts = count_series(&out.corpus, name, &set);
        let growth = growth_series(&counts).map_err(|e| e.to_string())?;
        ensure(growth.points.len() == schedule.len(), || format!("{name}: missing growth years"))?;
        for ((year, got), want) in growth.points.iter().zip(&schedule) {
            let sign_ok = (got.abs() < 0.005 && *want == 0.0) || got.signum() == want.signum() && *want != 0.0;
            ensure(sign_ok, || format!("{name} {year}: sign of {got} vs {want}"))?;
            let prev = counts.value_at(year - 1).unwrap();
            if prev >= 500.0 {
                ensure((got - want).abs() < 0.01, || format!("{name} {year}: {got} vs {want}"))?;
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------- criterion 5

fn enumeration_p(diffs: &[f64]) -> f64 {
    let n = diffs.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| diffs[a].abs().total_cmp(&diffs[b].abs()));
    let mut rank = vec![0.0; n];
    for (r, &i) in order.iter().enumerate() {
        rank[i] = (r + 1) as f64;
    }
    let w: f64 = (0..n).filter(|&i| diffs[i] > 0.0).map(|i| rank[i]).sum();
    let (mut lo, mut hi) = (0u64, 0u64);
    for mask in 0u32..(1 << n) {
        let s: f64 = (0..n).filter(|&i| mask >> i & 1 == 1).map(|i| rank[i]).sum();
        lo += u64::from(s <= w);
        hi += u64::from(s >= w);
    }
    let total = f64::from(1u32 << n);
    (2.0 * (lo as f64 / total).min(hi as f64 / total)).min(1.0)
}

fn wilcoxon_checks() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for i in 0..240 {
        let n = 1 + i % 12;
        // distinct magnitudes with random signs
        let mut mags: Vec<f64> = (1..=n).map(|k| k as f64 + rng.random_range(0.0..0.5)).collect();
        for j in (1..n).rev() {
            mags.swap(j, rng.random_range(0..=j));
        }
        let diffs: Vec<f64> = mags.iter().map(|m| if rng.random_bool(0.5) { *m } else { -m }).collect();
        let zeros = vec![0.0; n];
        let t = wilcoxon_signed_rank(&diffs, &zeros, EXACT_CUTOFF).map_err(|e| e.to_string())?;
        ensure(t.method == TestMethod::Exact, || format!("n={n}: not exact"))?;
        let want = enumeration_p(&diffs);
        ensure((t.p_value - want).abs() < 1e-12, || format!("n={n}: {} vs {want}", t.p_value))?;
    }
    let x: Vec<f64> = (1..=10).map(f64::from).collect();
    let t = wilcoxon_signed_rank(&x, &[0.0; 10], EXACT_CUTOFF).map_err(|e| e.to_string())?;
    ensure((t.p_value - 2.0 / 1024.0).abs() < 1e-15, || format!("monotone n=10 gave {}", t.p_value))?;
    let mut ps = vec![1.0; 45];
    ps[17] = t.p_value;
    let adj = holm_adjust(&ps)[17];
    ensure((adj - 45.0 * 2.0 / 1024.0).abs() < 1e-15, || format!("holm gave {adj}"))?;
    ensure((adj * 100.0).round() / 100.0 == 0.09, || format!("{adj} does not round to 0.09"))?;
    ensure(format!("{adj:.4}") == "0.0879", || format!("{adj} is not 0.0879"))
}

// ---------------------------------------------------------------- criterion 6

fn lowess_checks() -> Check {
    let xs: Vec<f64> = (0..15).map(|i| f64::from(i) * 0.7 - 3.0).collect();
    let ys: Vec<f64> = xs.iter().map(|x| 4.0 - 1.5 * x).collect();
    let fit = lowess(&xs, &ys, 1.0, 0).map_err(|e| e.to_string())?;
    for (f, y) in fit.iter().zip(&ys) {
        ensure((f - y).abs() < 1e-9, || format!("collinear fit {f} vs {y}"))?;
    }

    // three points, full span: the farthest neighbour sits at the bandwidth
    // and gets zero weight, leaving a line through the two nearest points.
    let (xs, ys) = ([0.0, 1.0, 3.0], [1.0, 3.0, 2.0]);
    let fit = lowess(&xs, &ys, 1.0, 0).map_err(|e| e.to_string())?;
    // x=0: h=3, weights 1, (26/27)^3, 0 -> line through (0,1),(1,3)
    // x=1: h=2, weights (7/8)^3, 1, 0   -> same line at 1
    // x=3: h=3, weights 0, (19/27)^3, 1 -> line through (1,3),(3,2)
    let want = [1.0, 3.0, 2.0];
    for (f, w) in fit.iter().zip(want) {
        ensure((f - w).abs() < 1e-9, || format!("3-point fit {fit:?} vs {want:?}"))?;
    }

    let xs: Vec<f64> = (0..20).map(f64::from).collect();
    let line = |x: f64| 2.0 * x + 1.0;
    let mut ys: Vec<f64> = xs.iter().map(|&x| line(x)).collect();
    ys[9] += 60.0;
    let fit = lowess(&xs, &ys, 2.0 / 3.0, 3).map_err(|e| e.to_string())?;
    let range = line(19.0) - line(0.0);
    let worst = (0..20).filter(|&i| i != 9).map(|i| (fit[i] - line(xs[i])).abs()).fold(0.0, f64::max);
    ensure(worst < 0.05 * range, || format!("outlier leaks: max deviation {worst}"))
}

// ---------------------------------------------------------------- criterion 7

fn classification_checks() -> Check {
    let out = desk();
    let c = &out.corpus;
    let truth = |name: &str| out.truth.get(name).cloned().ok_or(format!("no planted group {name}"));
    let exact = |name: &str, got: &PatentSet, want: &PatentSet| {
        ensure(got == want, || {
            let tp = got.intersection(want).len();
            format!("{name}: precision {}/{}, recall {tp}/{}", tp, got.len(), want.len())
        })
    };
    let keywords = KeywordTable::load(&fixtures().join("keywords.tsv")).map_err(|e| e.to_string())?;
    exact("keyword", &classify_keyword(c, &keywords), &truth("Keyword")?)?;
    exact("science", &classify_science(c, AI_FIELD_LABEL, 3), &truth("Science")?)?;
    let rules = WipoRuleSet::load(&fixtures().join("wipo_rules.tsv")).map_err(|e| e.to_string())?;
    exact("wipo", &classify_wipo(c, &rules).map_err(|e| e.to_string())?, &truth("WIPO")?)?;
    for (prefix, group) in [("G06N", "Keyword"), ("G16B", "Science"), ("G05B", "WIPO"), ("G10L", "USPTO")] {
        let got = classify_prefix_group(c, prefix).map_err(|e| e.to_string())?;
        exact(prefix, &got, &truth(group)?)?;
    }

    let config = UsptoConfig::load(&fixtures().join("uspto.config")).map_err(|e| e.to_string())?;
    let seeds = build_uspto_seed(c, &config).map_err(|e| e.to_string())?;
    let model = train_uspto(c, &seeds, &config).map_err(|e| e.to_string())?;
    let got = classify_uspto(&model, c);
    let want = truth("USPTO")?;
    let tp = got.intersection(&want).len() as f64;
    let f1 = 2.0 * tp / (got.len() + want.len()) as f64;
    ensure(f1 >= 0.95, || format!("uspto F1 {f1:.4}"))
}

// ---------------------------------------------------------------- criterion 8

fn descendant_checks() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for round in 0..50 {
        let (corpus, raw) = random_corpus(&mut rng, 1500, 6000);
        let members = random_subset(&mut rng, raw.years.len(), 0.2);
        let got = descendants_of(&corpus, &to_set(&corpus, &members));
        let want: BTreeSet<usize> = raw
            .edges
            .iter()
            .filter(|e| members.contains(&e.1) && !members.contains(&e.0))
            .map(|e| e.0)
            .collect();
        ensure(got.intersection(&to_set(&corpus, &members)).is_empty(), || {
            format!("round {round}: descendants overlap the set")
        })?;
        ensure(got == to_set(&corpus, &want), || format!("round {round}: edge scan disagrees"))?;
    }
    Ok(())
}

// ---------------------------------------------------------------- criterion 9

fn zscore_checks() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut series: Vec<GroupSeries> = (0..5)
        .map(|g| {
            let points = (2000..2020).map(|y| (y, rng.random_range(-5.0..50.0))).collect();
            GroupSeries::new(format!("g{g}"), "m", points)
        })
        .collect();
    for s in &mut series {
        s.points.push((2020, 7.5));
    }
    let z = zscore_across_groups(&series).map_err(|e| e.to_string())?;
    for year in 2000..2020 {
        let v: Vec<f64> = z.iter().filter_map(|s| s.value_at(year)).collect();
        ensure(v.len() == 5, || format!("{year}: {} groups", v.len()))?;
        let mean = v.iter().sum::<f64>() / 5.0;
        let sd = (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / 5.0).sqrt();
        ensure(mean.abs() < 1e-9 && (sd - 1.0).abs() < 1e-9, || format!("{year}: mean {mean}, sd {sd}"))?;
    }
    ensure(z.iter().all(|s| s.value_at(2020).is_none()), || "zero-variance year emitted".into())
}

// ---------------------------------------------------------------- criterion 10

fn aigpt(args: &[&str]) -> std::result::Result<(), String> {
    let status = Command::new(env!("CARGO_BIN_EXE_aigpt"))
        .args(args)
        .status()
        .map_err(|e| e.to_string())?;
    ensure(status.success(), || format!("aigpt {args:?} exited with {status}"))
}

fn manifest(dir: &Path) -> std::result::Result<String, String> {
    std::fs::read_to_string(dir.join("manifest.tsv")).map_err(|e| e.to_string())
}

fn pipeline_checks() -> Check {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let config = fixtures().join("desk.toml");
    let config = config.to_str().unwrap();
    let (a, b, s) = (tmp.path().join("a"), tmp.path().join("b"), tmp.path().join("s"));

    let started = Instant::now();
    aigpt(&["run", "--config", config, "--out", a.to_str().unwrap()])?;
    let elapsed = started.elapsed();
    aigpt(&["run", "--config", config, "--out", b.to_str().unwrap()])?;
    for stage in ["classify", "metrics", "stats", "report"] {
        aigpt(&[stage, "--config", config, "--out", s.to_str().unwrap()])?;
    }
    let (ma, mb, ms) = (manifest(&a)?, manifest(&b)?, manifest(&s)?);
    let artifacts = ma.lines().count() - 1;
    ensure(artifacts >= 12, || format!("only {artifacts} artifacts"))?;
    ensure(ma == mb, || "two runs produced different manifests".into())?;
    ensure(ma == ms, || "stagewise outputs differ from the full run".into())?;
    within(elapsed, 60.0)
}

// ---------------------------------------------------------------- criterion 11

fn lag_checks() -> Check {
    let out = desk();
    let c = &out.corpus;
    let last = c.window().last;
    for p in c.indices() {
        let grant = c.grant_year(p);
        for s in aigpt_core::metrics::lag_samples(c, p) {
            ensure((0..=last - grant).contains(&s.lag()), || {
                format!("{}: lag {} outside [0, {}]", c.id(p), s.lag(), last - grant)
            })?;
        }
    }
    let decades: Vec<YearWindow> = ["1990-1999", "2000-2009", "2010-2019"].iter().map(|d| d.parse().unwrap()).collect();
    for (name, set) in [("planted", out.planted_union()), ("all", c.all_patents())] {
        let lags = citation_lag(c, &set, &decades, LagMode::AllCitations);
        let values: Vec<f64> = lags.iter().map(|l| l.ok_or("decade without citations")).collect::<Result<_, _>>()?;
        ensure(values.windows(2).all(|w| w[1] < w[0]), || format!("{name}: lags {values:?} not decreasing"))?;
    }
    Ok(())
}

fn main() {
    let criteria: [(&str, fn() -> Check); 11] = [
        ("generality analytic cases", generality_cases),
        ("generality and citing classes match the edge-scan oracle", oracle_equivalence),
        ("jaccard matches set arithmetic", jaccard_checks),
        ("growth recovers geometric and planted schedules", growth_checks),
        ("exact signed-rank p and Holm adjustment", wilcoxon_checks),
        ("lowess line, 3-point and outlier cases", lowess_checks),
        ("classifiers recover planted groups", classification_checks),
        ("descendants match the edge scan", descendant_checks),
        ("z-scores are standardized", zscore_checks),
        ("pipeline is deterministic and stage-composable", pipeline_checks),
        ("citation lags are truncated", lag_checks),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let started = Instant::now();
        let result = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let secs = started.elapsed().as_secs_f64();
        match result {
            Ok(()) => println!("criterion {:>2}: PASS  {name} ({secs:.2}s)", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2}: FAIL  {name} ({secs:.2}s): {why}", i + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
