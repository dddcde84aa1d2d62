//! Paired tests, multiplicity adjustment, smoothing and summaries.

use std::fmt;

use statrs::distribution::{ContinuousCDF, Normal};

use crate::corpus::YearWindow;
use crate::error::{Error, Result};
use crate::metrics::GroupSeries;

/// Default largest sample for which the exact null distribution is used.
pub const EXACT_CUTOFF: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TestMethod {
    Exact,
    Normal,
}

impl fmt::Display for TestMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TestMethod::Exact => "exact",
            TestMethod::Normal => "normal",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestResult {
    /// Sum of the ranks of positive differences.
    pub statistic: f64,
    /// Pairs left after dropping zero differences.
    pub n_effective: usize,
    pub p_value: f64,
    pub method: TestMethod,
}

/// Ranks starting at 1, ties sharing their average rank. Returns the ranks
/// in input order and the sizes of tie groups.
fn average_ranks(values: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut ties = Vec::new();
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = avg;
        }
        if j > i {
            ties.push(j - i + 1);
        }
        i = j + 1;
    }
    (ranks, ties)
}

/// Two-sided Wilcoxon signed-rank test of `x - y`.
///
/// Zero differences are dropped. Without ties and with at most
/// `exact_cutoff` pairs the exact null distribution is used; otherwise a
/// tie-corrected normal approximation with continuity correction.
pub fn wilcoxon_signed_rank(x: &[f64], y: &[f64], exact_cutoff: usize) -> Result<TestResult> {
    if x.len() != y.len() {
        return Err(Error::Config(format!(
            "paired samples differ in length ({} vs {})",
            x.len(),
            y.len()
        )));
    }
    let diffs: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).filter(|d| *d != 0.0).collect();
    if diffs.iter().any(|d| !d.is_finite()) {
        return Err(Error::Data("paired samples contain non-finite values".into()));
    }
    let n = diffs.len();
    if n == 0 {
        return Err(Error::DegenerateSample("all paired differences are zero".into()));
    }
    let abs: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
    let (ranks, ties) = average_ranks(&abs);
    let w: f64 = diffs.iter().zip(&ranks).filter(|(d, _)| **d > 0.0).map(|(_, r)| r).sum();

    if n <= exact_cutoff && ties.is_empty() {
        let (lower, upper) = exact_tails(n, w.round() as usize);
        return Ok(TestResult {
            statistic: w,
            n_effective: n,
            p_value: (2.0 * lower.min(upper)).min(1.0),
            method: TestMethod::Exact,
        });
    }

    let nf = n as f64;
    let mean = nf * (nf + 1.0) / 4.0;
    let tie_term: f64 = ties.iter().map(|&t| (t * t * t - t) as f64).sum::<f64>() / 48.0;
    let var = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - tie_term;
    if var <= 0.0 {
        return Err(Error::DegenerateSample("signed-rank variance is zero".into()));
    }
    let dev = w - mean;
    let z = (dev.abs() - 0.5).max(0.0) / var.sqrt();
    let std = Normal::standard();
    Ok(TestResult {
        statistic: w,
        n_effective: n,
        p_value: (2.0 * std.sf(z)).min(1.0),
        method: TestMethod::Normal,
    })
}

/// `P(W <= w)` and `P(W >= w)` under the null with untied ranks `1..=n`.
fn exact_tails(n: usize, w: usize) -> (f64, f64) {
    let max = n * (n + 1) / 2;
    // counts[s] = number of sign patterns with positive-rank sum s
    let mut counts = vec![0u64; max + 1];
    counts[0] = 1;
    for r in 1..=n {
        for s in (r..=max).rev() {
            counts[s] += counts[s - r];
        }
    }
    let total = (1u64 << n) as f64;
    let w = w.min(max);
    let lower: u64 = counts[..=w].iter().sum();
    let upper: u64 = counts[w..].iter().sum();
    (lower as f64 / total, upper as f64 / total)
}

/// Holm step-down adjustment. Output is in input order.
pub fn holm_adjust(p: &[f64]) -> Vec<f64> {
    let m = p.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| p[a].total_cmp(&p[b]));
    let mut out = vec![0.0; m];
    let mut running: f64 = 0.0;
    for (k, &i) in order.iter().enumerate() {
        running = running.max(((m - k) as f64 * p[i]).min(1.0));
        out[i] = running;
    }
    out
}

/// Mean, median and population standard deviation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SummaryStats {
    pub n: usize,
    pub mean: f64,
    pub median: f64,
    pub sd: f64,
}

pub fn summary_stats(values: &[f64]) -> Result<SummaryStats> {
    if values.is_empty() {
        return Err(Error::InsufficientData("summary of an empty sample".into()));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let sd = (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
    Ok(SummaryStats {
        n: values.len(),
        mean,
        median: median(values),
        sd,
    })
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 0 {
        (v[m - 1] + v[m]) / 2.0
    } else {
        v[m]
    }
}

/// Pairwise test results between groups.
#[derive(Debug, Clone, PartialEq)]
pub struct PairwiseResult {
    pub groups: Vec<String>,
    /// Symmetric p-value matrix; `None` on the diagonal and where a test was
    /// impossible.
    pub p_values: Vec<Vec<Option<f64>>>,
    pub tests: Vec<Vec<Option<TestResult>>>,
    pub summaries: Vec<Option<SummaryStats>>,
    pub holm: bool,
}

/// Signed-rank tests for every pair of series over their shared years in
/// `period`. With `holm` the p-values are adjusted jointly over all tested
/// pairs. Pairs with fewer than 2 shared years are left missing.
pub fn pairwise_compare(series: &[GroupSeries], period: YearWindow, holm: bool) -> Result<PairwiseResult> {
    if series.len() < 2 {
        return Err(Error::Config("pairwise comparison needs at least 2 groups".into()));
    }
    let series: Vec<GroupSeries> = series.iter().map(|s| s.restricted(period)).collect();
    let k = series.len();
    let mut tests = vec![vec![None; k]; k];
    let mut tested = Vec::new();
    for i in 0..k {
        for j in i + 1..k {
            let (x, y): (Vec<f64>, Vec<f64>) = series[i]
                .points
                .iter()
                .filter_map(|&(year, v)| series[j].value_at(year).map(|w| (v, w)))
                .unzip();
            if x.len() < 2 {
                log::warn!(
                    "{} vs {}: fewer than 2 common years in {period}",
                    series[i].group,
                    series[j].group
                );
                continue;
            }
            match wilcoxon_signed_rank(&x, &y, EXACT_CUTOFF) {
                Ok(t) => {
                    tests[i][j] = Some(t);
                    tests[j][i] = Some(t);
                    tested.push((i, j, t.p_value));
                }
                Err(Error::DegenerateSample(reason)) => {
                    log::warn!("{} vs {}: {reason}", series[i].group, series[j].group);
                }
                Err(e) => return Err(e),
            }
        }
    }
    let raw: Vec<f64> = tested.iter().map(|t| t.2).collect();
    let adjusted = if holm { holm_adjust(&raw) } else { raw };
    let mut p_values = vec![vec![None; k]; k];
    for (&(i, j, _), p) in tested.iter().zip(adjusted) {
        p_values[i][j] = Some(p);
        p_values[j][i] = Some(p);
    }
    Ok(PairwiseResult {
        groups: series.iter().map(|s| s.group.clone()).collect(),
        p_values,
        tests,
        summaries: series
            .iter()
            .map(|s| summary_stats(&s.values().collect::<Vec<_>>()).ok())
            .collect(),
        holm,
    })
}

fn tricube(u: f64) -> f64 {
    if u >= 1.0 {
        0.0
    } else {
        (1.0 - u * u * u).powi(3)
    }
}

fn bisquare(u: f64) -> f64 {
    if u >= 1.0 {
        0.0
    } else {
        (1.0 - u * u).powi(2)
    }
}

pub const LOWESS_FRACTION: f64 = 2.0 / 3.0;
pub const LOWESS_ROBUST_ITERS: usize = 3;

/// Locally weighted linear regression with `robust_iters` bisquare
/// reweighting passes.
///
/// Each fit uses the `ceil(fraction * n)` nearest neighbours with tricube
/// weights; a neighbour exactly at the bandwidth gets weight zero. Fitted
/// values are returned in input order.
pub fn lowess(xs: &[f64], ys: &[f64], fraction: f64, robust_iters: usize) -> Result<Vec<f64>> {
    if xs.len() != ys.len() {
        return Err(Error::Config("lowess inputs differ in length".into()));
    }
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::Config(format!("lowess fraction {fraction} outside (0, 1]")));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(Error::Data("lowess inputs contain non-finite values".into()));
    }
    let n = xs.len();
    if n < 2 || xs.iter().all(|x| *x == xs[0]) {
        return Err(Error::InsufficientData("lowess needs at least 2 distinct x values".into()));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]).then(ys[a].total_cmp(&ys[b])));
    let pts: Vec<(f64, f64)> = order.iter().map(|&i| (xs[i], ys[i])).collect();
    let q = ((fraction * n as f64).ceil() as usize).clamp(1, n);

    let mut robust = vec![1.0; n];
    let mut fitted = vec![0.0; n];
    for pass in 0..=robust_iters {
        for i in 0..n {
            fitted[i] = local_fit(&pts, &robust, i, q);
        }
        if pass == robust_iters {
            break;
        }
        let resid: Vec<f64> = pts.iter().zip(&fitted).map(|(p, f)| (p.1 - f).abs()).collect();
        let scale = 6.0 * median(&resid);
        if scale <= 0.0 {
            break;
        }
        for (r, e) in robust.iter_mut().zip(&resid) {
            *r = bisquare(e / scale);
        }
    }
    let mut out = vec![0.0; n];
    for (k, &i) in order.iter().enumerate() {
        out[i] = fitted[k];
    }
    Ok(out)
}

fn local_fit(pts: &[(f64, f64)], robust: &[f64], i: usize, q: usize) -> f64 {
    let x0 = pts[i].0;
    let mut dist: Vec<f64> = pts.iter().map(|p| (p.0 - x0).abs()).collect();
    let mut sorted = dist.clone();
    sorted.sort_by(f64::total_cmp);
    let h = sorted[q - 1];
    for d in dist.iter_mut() {
        *d = if h > 0.0 { tricube(*d / h) } else if *d == 0.0 { 1.0 } else { 0.0 };
    }
    let w: Vec<f64> = dist.iter().zip(robust).map(|(a, b)| a * b).collect();
    let sw: f64 = w.iter().sum();
    if sw <= 0.0 {
        return pts[i].1;
    }
    let mx = pts.iter().zip(&w).map(|(p, w)| w * p.0).sum::<f64>() / sw;
    let my = pts.iter().zip(&w).map(|(p, w)| w * p.1).sum::<f64>() / sw;
    let sxx: f64 = pts.iter().zip(&w).map(|(p, w)| w * (p.0 - mx).powi(2)).sum();
    if sxx <= 1e-12 * (1.0 + mx * mx) * sw {
        return my;
    }
    let sxy: f64 = pts.iter().zip(&w).map(|(p, w)| w * (p.0 - mx) * (p.1 - my)).sum();
    my + sxy / sxx * (x0 - mx)
}
