//! Benchmarks live in `benches/`. This crate only hosts shared setup.

use aigpt_core::synth::{generate, SynthConfig, SynthOutput};

/// The fixture corpus used by the benchmarks, scaled by `n0`.
pub fn fixture_corpus(n0: usize) -> SynthOutput {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/desk.synth");
    let mut config = SynthConfig::load(&path).expect("fixture loads");
    config.volume.n0 = n0;
    generate(&config).expect("fixture generates")
}
