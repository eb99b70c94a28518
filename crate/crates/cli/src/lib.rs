//! Experiment harness: configuration ingestion, multi-trial execution,
//! result tabulation, ablation sweeps, and deterministic CSV/SVG emission.

pub mod config;
pub mod corpus;
pub mod experiment;
pub mod export;
pub mod svg;

pub use config::ExperimentConfig;
pub use corpus::{build_agent_corpora, bundled_vocabulary, Scheme};
pub use experiment::{Experiment, TrialSummary, WordRow};
