use crate::corpus::{Corpus, PatentSet};
use crate::cpc::parse_level_prefix;
use crate::error::Result;

/// Sentinel prefix selecting every patent of the corpus.
pub const ALL_GROUP: &str = "All";

/// Benchmark technology groups: all patents, computing, wireless
/// communication, biochemistry/genetic engineering, nanotechnology and
/// climate-related technologies.
pub const BENCHMARK_GROUPS: [&str; 6] = [ALL_GROUP, "G06", "H04W", "C12", "B82", "Y02"];

/// Patents with at least one code at `prefix` (a 1-, 3- or 4-character
/// CPC prefix), or the whole corpus for [`ALL_GROUP`].
pub fn classify_prefix_group(corpus: &Corpus, prefix: &str) -> Result<PatentSet> {
    if prefix.trim() == ALL_GROUP {
        return Ok(corpus.all_patents());
    }
    let (code, level) = parse_level_prefix(prefix)?;
    Ok(corpus.patents_with_class(level, &code))
}

/// Patents citing at least one member of `ai_set` without being members
/// themselves.
pub fn descendants_of(corpus: &Corpus, ai_set: &PatentSet) -> PatentSet {
    ai_set
        .iter()
        .flat_map(|p| corpus.cited_by(p).iter().copied())
        .filter(|q| !ai_set.contains(*q))
        .collect()
}
