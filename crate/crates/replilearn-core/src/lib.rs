//! Relaxed-replicability learning transforms over synthetic PAC tasks.
//!
//! A learning algorithm is replicable when two runs on independently
//! resampled data — sharing one internal random string — produce the same
//! output with high probability. Exact replicability is expensive, so this
//! crate implements the relaxed notions and the transforms that achieve
//! them, as composable combinators over a [`learner::Learner`] oracle:
//!
//! * **Pointwise** ([`pointwise`]): outputs agree at any fixed domain point
//!   w.p. ≥ 1−ρ; achieved by aggregating repeated runs against a shared
//!   random cut.
//! * **Approximate** ([`approximate`]): outputs are within classification
//!   distance γ except w.p. ρ; achieved via exponential-mechanism selection
//!   ([`selection`]), stable-string testing and cluster detection.
//! * **Semi-replicable** ([`semirepl`]): exactly equal outputs given a
//!   shared unlabeled pool, via a cover construction plus replicable
//!   selection.
//!
//! Plus proper threshold learners ([`thresholds`]) and forward executions of
//! the hardness reductions ([`reductions`]). Everything is deterministic
//! given a [`rng::SharedRandomness`]; all tasks ([`task`]) have exactly
//! computable error and distance so Monte-Carlo harnesses measure the
//! contracts without numerical confounders.
//!
//! The crate is `no_std` + `alloc`; IO, parallel harnessing, and the CLI
//! live in the companion `replilearn` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod approximate;
pub mod constants;
pub mod data;
pub mod hypothesis;
pub mod learner;
pub mod pointwise;
pub mod reductions;
pub mod rng;
pub mod selection;
pub mod semirepl;
pub mod task;
pub mod thresholds;

pub use constants::Constants;
pub use data::{DataSource, Dataset};
pub use hypothesis::{Hypothesis, Label, Point};
pub use learner::{ArcLearner, Learner};
pub use rng::SharedRandomness;
pub use task::{FiniteLabeledDistribution, PiecewiseCdf, Task, ThresholdTask};
