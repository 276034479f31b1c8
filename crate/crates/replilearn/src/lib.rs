//! Paired-run certification harness and experiment runners on top of
//! `replilearn-core`: Wilson-interval reporting, deterministic parallel
//! trial scheduling, flat-config experiments, and stable CSV emission.

pub mod config;
pub mod csvout;
pub mod experiments;
pub mod harness;
pub mod report;
