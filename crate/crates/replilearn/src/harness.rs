//! Paired-run Monte-Carlo harness.
//!
//! Every replicability definition is a probability over two runs that draw
//! independent samples but share one random string. The harness realizes
//! that experiment trial by trial: shared string from substream ("r", t),
//! the two data streams from substreams under ("data", t), fresh per
//! trial. Trials are independent work units; aggregation is indexed by
//! trial number, so reports are byte-identical for any worker count.

use rayon::prelude::*;
use replilearn_core::learner::ArcLearner;
use replilearn_core::{DataSource, Point, SharedRandomness, Task};

use crate::report::Estimate;

/// One paired-run experiment: which learner, on which task, measuring
/// which quantities, over how many trials.
pub struct PairedTrialConfig<'a> {
    pub task: &'a Task,
    pub learner: ArcLearner,
    pub n_trials: u64,
    pub root_seed: u64,
    /// Domain points whose paired-run disagreement is tracked.
    pub track_points: Vec<Point>,
    /// Distance threshold for the approximate-replicability event.
    pub gamma: Option<f64>,
    /// Excess-error threshold for the accuracy event.
    pub excess_alpha: Option<f64>,
}

impl PairedTrialConfig<'_> {
    fn validate(&self) {
        assert!(self.n_trials >= 100, "need at least 100 trials");
        if let Some(g) = self.gamma {
            assert!(g >= 0.0, "gamma must be nonnegative");
        }
    }
}

/// Aggregated estimates from one paired-run experiment.
#[derive(Clone, Debug)]
pub struct ReplicabilityReport {
    pub n_trials: u64,
    pub seed: u64,
    /// Labeled samples consumed: `n_trials * 2 * sample_need`.
    pub samples_labeled: u64,
    /// Shared unlabeled samples consumed: `n_trials * shared_need`.
    pub samples_shared: u64,
    /// Structural output identity h1 == h2.
    pub exact_equality: Estimate,
    /// Classification distance within gamma (when tracked).
    pub within_gamma: Option<Estimate>,
    /// Per-tracked-point paired disagreement rates.
    pub pointwise_disagree: Vec<Estimate>,
    /// Excess error within alpha, over both runs (when tracked).
    pub within_alpha: Option<Estimate>,
    /// 90th percentile of per-run excess error.
    pub excess_err_p90: f64,
}

impl ReplicabilityReport {
    /// Largest tracked per-point disagreement estimate.
    pub fn pointwise_max(&self) -> Option<&Estimate> {
        self.pointwise_disagree
            .iter()
            .max_by(|a, b| a.estimate.partial_cmp(&b.estimate).unwrap())
    }
}

struct TrialRecord {
    exact: bool,
    within_gamma: bool,
    point_disagree: Vec<bool>,
    excess: [f64; 2],
}

fn one_trial(config: &PairedTrialConfig, root: &SharedRandomness, t: u64) -> TrialRecord {
    let r = root.substream("r", t);
    let data_scope = root.substream("data", t);
    let need = config.learner.sample_need();
    let run = |half: u64| {
        let mut src = DataSource::fresh(config.task, data_scope.substream("s", half));
        let h = config.learner.learn(&mut src, &r);
        assert_eq!(
            src.consumed(),
            need,
            "trial {t}: learner consumed {} of a declared {need}",
            src.consumed()
        );
        h
    };
    let h1 = run(1);
    let h2 = run(2);
    let opt = config.task.opt_error();
    TrialRecord {
        exact: h1 == h2,
        within_gamma: match config.gamma {
            Some(g) => config.task.classification_distance(&h1, &h2) <= g,
            None => true,
        },
        point_disagree: config
            .track_points
            .iter()
            .map(|x| h1.eval(*x) != h2.eval(*x))
            .collect(),
        excess: [
            config.task.true_error(&h1) - opt,
            config.task.true_error(&h2) - opt,
        ],
    }
}

fn aggregate(config: &PairedTrialConfig, records: Vec<TrialRecord>) -> ReplicabilityReport {
    let n = config.n_trials;
    let count = |f: &dyn Fn(&TrialRecord) -> bool| records.iter().filter(|r| f(r)).count() as u64;
    let mut excess: Vec<f64> = records.iter().flat_map(|r| r.excess).collect();
    excess.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let p90 = excess[((excess.len() as f64 * 0.9).ceil() as usize).max(1) - 1];
    ReplicabilityReport {
        n_trials: n,
        seed: config.root_seed,
        samples_labeled: n * 2 * config.learner.sample_need(),
        samples_shared: n * config.learner.shared_need(),
        exact_equality: Estimate::from_counts(count(&|r| r.exact), n),
        within_gamma: config
            .gamma
            .map(|_| Estimate::from_counts(count(&|r| r.within_gamma), n)),
        pointwise_disagree: (0..config.track_points.len())
            .map(|i| Estimate::from_counts(count(&|r| r.point_disagree[i]), n))
            .collect(),
        within_alpha: config.excess_alpha.map(|a| {
            Estimate::from_counts(
                records
                    .iter()
                    .flat_map(|r| r.excess)
                    .filter(|e| *e <= a)
                    .count() as u64,
                2 * n,
            )
        }),
        excess_err_p90: p90,
    }
}

fn run_scoped(config: &PairedTrialConfig, root: SharedRandomness) -> ReplicabilityReport {
    config.validate();
    let records: Vec<TrialRecord> = (0..config.n_trials)
        .into_par_iter()
        .map(|t| one_trial(config, &root, t))
        .collect();
    aggregate(config, records)
}

/// Run one paired-run experiment. Deterministic in the config alone.
pub fn run_paired(config: &PairedTrialConfig) -> ReplicabilityReport {
    run_scoped(config, SharedRandomness::from_seed(config.root_seed))
}

/// Run a sweep: cell `i` executes under substream ("cell", i) of the grid
/// seed, except that a single-cell grid degenerates to [`run_paired`] on
/// its one config. Results are independent of execution schedule.
pub fn run_grid(cells: &[PairedTrialConfig], grid_seed: u64) -> Vec<ReplicabilityReport> {
    assert!(!cells.is_empty(), "empty grid");
    if cells.len() == 1 {
        return vec![run_paired(&cells[0])];
    }
    let root = SharedRandomness::from_seed(grid_seed);
    cells
        .iter()
        .enumerate()
        .map(|(i, c)| run_scoped(c, root.substream("cell", i as u64)))
        .collect()
}

/// Run `f` on a dedicated thread pool of `workers` threads (0 = default
/// machine parallelism).
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> T {
    if workers == 0 {
        f()
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .expect("thread pool")
            .install(f)
    }
}
