//! Classifiers that turn a corpus into named patent sets.
//!
//! Four AI approaches (keyword search, science citations, code/keyword
//! rules, a seed-trained linear model) plus CPC-prefix benchmark groups and
//! the set of patents citing a group.

mod groups;
mod keyword;
mod science;
mod uspto;
mod wipo;

pub use groups::{classify_prefix_group, descendants_of, BENCHMARK_GROUPS, ALL_GROUP};
pub use keyword::{classify_keyword, KeywordCategory, KeywordTable};
pub use science::{classify_science, ScienceRule, AI_FIELD_LABEL};
pub use uspto::{
    build_uspto_seed, classify_uspto, train_uspto, ComponentModel, ComponentSeeds, UsptoConfig, UsptoModel,
    USPTO_COMPONENTS,
};
pub use wipo::{classify_wipo, WipoRuleSet};

/// Names of the four AI approach groups.
pub const KEYWORD: &str = "Keyword";
pub const SCIENCE: &str = "Science";
pub const WIPO: &str = "WIPO";
pub const USPTO: &str = "USPTO";
pub const APPROACHES: [&str; 4] = [KEYWORD, SCIENCE, WIPO, USPTO];
