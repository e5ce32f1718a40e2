//! ripscan: an anti-piracy discovery and reporting toolkit for public
//! broadcast channels on messaging platforms.
//!
//! The pipeline synthesizes candidate handles from a seed lexicon, probes
//! them against a platform client, expands discoveries through bounded
//! link traversal, classifies posts against a behavior taxonomy, matches
//! distributed content to a rights catalog, analyzes the promotion graph,
//! estimates lower-bound financial losses, and assembles evidence-backed
//! abuse reports with longitudinal takedown tracking.
//!
//! All stages are deterministic given a seed and an injected clock; a
//! synthetic-ecosystem simulator stands in for the live platform in tests
//! and offline runs.

pub mod catalog;
pub mod crawler;
pub mod graph;
pub mod handles;
pub mod loss;
pub mod pipeline;
pub mod platform;
pub mod report;
pub mod taxonomy;
pub mod text;
