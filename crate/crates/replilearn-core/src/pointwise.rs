//! Pointwise-replicability transforms.
//!
//! [`basic_pointwise`] aggregates `T = ceil(c_T/ρ²)` independent runs of a
//! base learner against one shared random cut `r`: the returned predictor
//! labels `x` as `+1` iff the fraction of runs voting `+1` strictly exceeds
//! `r`. Because the vote fraction concentrates (variance ≤ 1/(4T)), two
//! executions on resampled data disagree at any fixed point w.p. ≲ ρ, while
//! the expected error is exactly the base learner's.
//!
//! [`boost_pointwise_error`] boosts confidence: run such a learner
//! `K = ceil(k·ln(1/β))` times, estimate each output's error on a held-out
//! block, and return the first hypothesis within α/2 of the empirical
//! minimum — with shared per-run substreams, both paired executions usually
//! return the same index.

use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::constants::{ceil_budget, Constants};
use crate::data::DataSource;
use crate::hypothesis::Hypothesis;
use crate::learner::{ArcLearner, Learner};
use crate::rng::SharedRandomness;
use crate::task::InvalidInput;

/// Parameters of the basic pointwise transform.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PointwiseParams {
    /// Target accuracy of the composed learner.
    pub alpha: f64,
    /// Target failure probability.
    pub beta: f64,
    /// Target pointwise replicability.
    pub rho: f64,
    /// Leading constant of the repetition count.
    pub c_t: f64,
}

impl PointwiseParams {
    pub fn new(alpha: f64, beta: f64, rho: f64, c_t: f64) -> Result<Self, InvalidInput> {
        for (name, v) in [("alpha", alpha), ("beta", beta), ("rho", rho)] {
            if !(0.0..1.0).contains(&v) || v == 0.0 {
                return Err(InvalidInput(alloc::format!("{name} must lie in (0,1)")));
            }
        }
        if c_t <= 0.0 {
            return Err(InvalidInput("c_T must be positive".into()));
        }
        Ok(PointwiseParams { alpha, beta, rho, c_t })
    }

    /// Repetition count `T = ceil(c_T/ρ²) ≥ 1`.
    pub fn t(&self) -> u64 {
        ceil_budget(self.c_t / (self.rho * self.rho))
    }

    /// The accuracy level the base learner must be budgeted for (`αβ/2`
    /// accuracy and confidence) so the Markov argument yields (α, β).
    pub fn base_level(&self) -> f64 {
        self.alpha * self.beta / 2.0
    }
}

struct BasicPointwise {
    base: ArcLearner,
    params: PointwiseParams,
}

impl Learner for BasicPointwise {
    fn learn(&self, data: &mut DataSource, rng: &SharedRandomness) -> Hypothesis {
        let scope = rng.named("alg1");
        let t = self.params.t();
        let subs: Vec<Hypothesis> = (0..t)
            .map(|i| self.base.learn(data, &scope.substream("run", i)))
            .collect();
        let cut = scope.named("cut").stream().uniform();
        Hypothesis::Aggregate { subs, cut }
    }

    fn sample_need(&self) -> u64 {
        self.params.t() * self.base.sample_need()
    }

    fn shared_need(&self) -> u64 {
        self.params.t() * self.base.shared_need()
    }
}

/// Aggregate `T` base runs on disjoint fresh blocks against a shared cut.
/// The base learner must be budgeted at accuracy/confidence `αβ/2`
/// ([`PointwiseParams::base_level`]); the composite is then a ρ-pointwise
/// replicable (α, β)-learner.
pub fn basic_pointwise(base: ArcLearner, params: PointwiseParams) -> ArcLearner {
    Arc::new(BasicPointwise { base, params })
}

/// Index of the first entry within `slack` of the minimum.
pub fn first_within_slack(errs: &[f64], slack: f64) -> usize {
    let min = errs.iter().copied().fold(f64::INFINITY, f64::min);
    errs.iter().position(|e| *e <= min + slack).unwrap()
}

struct BoostPointwiseError {
    base: ArcLearner,
    alpha: f64,
    k: u64,
    m_test: u64,
}

impl Learner for BoostPointwiseError {
    fn learn(&self, data: &mut DataSource, rng: &SharedRandomness) -> Hypothesis {
        let scope = rng.named("alg2");
        let hyps: Vec<Hypothesis> = (0..self.k)
            .map(|i| self.base.learn(data, &scope.substream("run", i)))
            .collect();
        let refs: Vec<&Hypothesis> = hyps.iter().collect();
        let errs = data.empirical_errors(self.m_test, &refs);
        let idx = first_within_slack(&errs, self.alpha / 2.0);
        hyps.into_iter().nth(idx).unwrap()
    }

    fn sample_need(&self) -> u64 {
        self.k * self.base.sample_need() + self.m_test
    }

    fn shared_need(&self) -> u64 {
        self.k * self.base.shared_need()
    }
}

/// Confidence boosting: `K = ceil(k·ln(1/β))` base runs on disjoint blocks
/// (per-run shared substreams), a final test block of
/// `ceil(c·ln(2K/β)/α²)` samples, and the first-within-α/2 selection rule.
/// The base learner should be ρ-pointwise-replicable and (α, ρ)-accurate
/// (typically [`basic_pointwise`] with β ← ρ).
pub fn boost_pointwise_error(
    base: ArcLearner,
    alpha: f64,
    beta: f64,
    consts: &Constants,
) -> ArcLearner {
    assert!(alpha > 0.0 && alpha < 1.0, "alpha must lie in (0,1)");
    assert!(beta > 0.0 && beta < 1.0, "beta must lie in (0,1)");
    let k = ceil_budget(consts.alg2_k * libm::log(1.0 / beta));
    let m_test = ceil_budget(
        consts.alg2_mtest * libm::log(2.0 * k as f64 / beta) / (alpha * alpha),
    );
    Arc::new(BoostPointwiseError { base, alpha, k, m_test })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypothesis::Point;
    use crate::learner::{ConstantLearner, ErmFinite};
    use crate::task::{FiniteLabeledDistribution, Task};
    use alloc::vec;

    fn task4() -> Task {
        Task::Finite(
            FiniteLabeledDistribution::uniform(vec![0.4, -0.4, 0.4, -0.4]).unwrap(),
        )
    }

    /// Run a learner twice with shared string and resampled data.
    fn paired_run(
        task: &Task,
        learner: &dyn Learner,
        seed: u64,
        trial: u64,
    ) -> (Hypothesis, Hypothesis) {
        let root = SharedRandomness::from_seed(seed);
        let r = root.substream("r", trial);
        let mut d1 = DataSource::fresh(task, root.substream("data", 2 * trial));
        let mut d2 = DataSource::fresh(task, root.substream("data", 2 * trial + 1));
        (learner.learn(&mut d1, &r), learner.learn(&mut d2, &r))
    }

    #[test]
    fn constant_base_never_disagrees() {
        let task = task4();
        let params = PointwiseParams::new(0.1, 0.1, 0.5, 4.0).unwrap();
        let learner =
            basic_pointwise(Arc::new(ConstantLearner(Hypothesis::ConstantPlus)), params);
        for trial in 0..20 {
            let (h1, h2) = paired_run(&task, learner.as_ref(), 40, trial);
            for i in 0..4 {
                assert_eq!(h1.eval(Point::Index(i)), 1);
                assert_eq!(h2.eval(Point::Index(i)), 1);
            }
        }
    }

    #[test]
    fn t_equals_one_degenerates_to_base() {
        // T=1: vote fraction is 0 or 1, so for any cut in (0,1) the
        // aggregate replays its single sub-hypothesis.
        let task = task4();
        let params = PointwiseParams::new(0.2, 0.2, 0.9, 0.5).unwrap();
        assert_eq!(params.t(), 1);
        let base = Arc::new(ErmFinite::with_budget(4, 50));
        let learner = basic_pointwise(base.clone(), params);
        let root = SharedRandomness::from_seed(41);
        let mut d1 = DataSource::fresh(&task, root.named("data"));
        let agg = learner.learn(&mut d1, &root.named("r"));
        let mut d2 = DataSource::fresh(&task, root.named("data"));
        let single = base.learn(&mut d2, &root.named("r").named("alg1").substream("run", 0));
        let Hypothesis::Aggregate { subs, cut } = &agg else { panic!() };
        assert_eq!(subs.len(), 1);
        assert!(*cut > 0.0 && *cut < 1.0);
        for i in 0..4 {
            assert_eq!(agg.eval(Point::Index(i)), single.eval(Point::Index(i)));
        }
    }

    #[test]
    fn budget_is_t_times_base() {
        let params = PointwiseParams::new(0.1, 0.1, 0.2, 4.0).unwrap();
        assert_eq!(params.t(), 100);
        let learner = basic_pointwise(Arc::new(ErmFinite::with_budget(4, 30)), params);
        assert_eq!(learner.sample_need(), 3000);
    }

    #[test]
    fn pointwise_disagreement_small_scale() {
        // Desk-scale version of the acceptance run: rho=0.4, 300 trials.
        let task = task4();
        let consts = Constants::default();
        let params = PointwiseParams::new(0.1, 0.1, 0.4, consts.alg1_ct).unwrap();
        let base = Arc::new(ErmFinite::agnostic(
            4,
            params.base_level(),
            params.base_level(),
            &consts,
        ));
        let learner = basic_pointwise(base, params);
        let trials = 300;
        let mut disagree = [0u32; 4];
        for trial in 0..trials {
            let (h1, h2) = paired_run(&task, learner.as_ref(), 42, trial);
            for (i, d) in disagree.iter_mut().enumerate() {
                if h1.eval(Point::Index(i)) != h2.eval(Point::Index(i)) {
                    *d += 1;
                }
            }
        }
        let se = (0.4f64 * 0.6 / trials as f64).sqrt();
        for d in disagree {
            let rate = d as f64 / trials as f64;
            assert!(rate <= 0.4 + 3.0 * se, "disagreement {rate}");
        }
    }

    #[test]
    fn unbiasedness_small_scale() {
        // Pr over (S, r) that the aggregate labels x0 = +1 equals the base
        // learner's probability of labeling x0 = +1 (N=3000 each side).
        let task = task4();
        let consts = Constants::default();
        let params = PointwiseParams::new(0.2, 0.2, 0.25, consts.alg1_ct).unwrap();
        // Deliberately tiny base budget so p_x is strictly inside (0,1).
        let base = Arc::new(ErmFinite::with_budget(4, 6));
        let learner = basic_pointwise(base.clone(), params);
        let n = 3000;
        let root = SharedRandomness::from_seed(43);
        let mut agg_plus = 0u32;
        let mut base_plus = 0u32;
        for t in 0..n {
            let r = root.substream("r", t);
            let mut d = DataSource::fresh(&task, root.substream("data", t));
            if learner.learn(&mut d, &r).eval(Point::Index(0)) == 1 {
                agg_plus += 1;
            }
            let mut db = DataSource::fresh(&task, root.substream("bdata", t));
            if base.learn(&mut db, &r).eval(Point::Index(0)) == 1 {
                base_plus += 1;
            }
        }
        let diff = (agg_plus as f64 - base_plus as f64) / n as f64;
        // Two independent estimates: allow 3 * sqrt(2 * 0.25 / n) ~ 0.039.
        assert!(diff.abs() < 0.04, "bias {diff}");
    }

    #[test]
    fn first_within_slack_rule() {
        // errors (0.30, 0.10, 0.12), slack alpha/2 = 0.05: index 1 (first
        // within 0.05 of the 0.10 minimum).
        assert_eq!(first_within_slack(&[0.30, 0.10, 0.12], 0.05), 1);
        assert_eq!(first_within_slack(&[0.2], 0.0), 0);
        // All identical: index 0 always.
        assert_eq!(first_within_slack(&[0.1, 0.1, 0.1], 0.05), 0);
    }

    #[test]
    fn boost_returns_first_index_for_identical_hypotheses() {
        let task = task4();
        let consts = Constants::default();
        let base = Arc::new(ConstantLearner(Hypothesis::FiniteLabeling(vec![1, -1, 1, -1])));
        let learner = boost_pointwise_error(base, 0.15, 0.1, &consts);
        let root = SharedRandomness::from_seed(44);
        let mut d = DataSource::fresh(&task, root.named("data"));
        let h = learner.learn(&mut d, &root.named("r"));
        assert_eq!(h, Hypothesis::FiniteLabeling(vec![1, -1, 1, -1]));
        assert_eq!(d.consumed(), learner.sample_need());
    }

    #[test]
    fn boost_budget_formula() {
        let consts = Constants::default();
        let base = Arc::new(ErmFinite::with_budget(4, 10));
        let learner = boost_pointwise_error(base, 0.15, 0.01, &consts);
        // K = ceil(7 ln 100) = 33, m_test = ceil(32 ln(66/0.01)/0.15^2).
        let k = 33u64;
        let m_test = (32.0 * (2.0 * k as f64 / 0.01f64).ln() / 0.0225).ceil() as u64;
        assert_eq!(learner.sample_need(), k * 10 + m_test);
    }
}
