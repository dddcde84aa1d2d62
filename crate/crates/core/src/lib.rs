//! Patent-corpus analytics for comparing AI patent classification approaches.
//!
//! The crate is organised around an immutable [`Corpus`]: loaders in [`io`]
//! and the generator in [`synth`] produce one, [`classify`] turns it into named
//! patent sets, [`metrics`] computes per-group yearly series from those sets
//! and [`stats`] compares the series.

pub mod classify;
pub mod corpus;
pub mod cpc;
pub mod error;
pub mod io;
pub mod metrics;
pub mod stats;
pub mod synth;
pub mod text;

pub use corpus::{
    Citation, CitationEdge, Corpus, CorpusBuilder, LoadReport, PatentId, PatentIdx, PatentRecord,
    PatentSet, ScienceLink, YearWindow,
};
pub use cpc::{CpcCode, Level};
pub use error::{Error, Result};
pub use metrics::GroupSeries;

