//! The learner contract and the non-replicable ERM base learners.
//!
//! A [`Learner`] maps (sample supply, shared random string) to a hypothesis,
//! deterministically. The supply hands out disjoint fresh blocks and the
//! learner declares up front how many labeled samples it consumes
//! (`sample_need`), which the harness verifies exactly. ERM over finite
//! labelings and over thresholds are the oracles `A` plugged into every
//! replicability transform; both have fixed tie-breaks so any paired-run
//! disagreement is attributable to data resampling alone.

use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::constants::{ceil_budget, Constants};
use crate::data::{DataSource, Dataset, FiniteCounts};
use crate::hypothesis::{sign_label, Hypothesis, Point};
use crate::rng::SharedRandomness;

/// A deterministic learning algorithm with a declared sample budget.
pub trait Learner: Send + Sync {
    /// Consume exactly `sample_need()` labeled samples from `data` and
    /// return a hypothesis. `rng` is the shared random string of the
    /// replicability definitions; identical `(data stream, rng)` inputs
    /// yield identical outputs.
    fn learn(&self, data: &mut DataSource, rng: &SharedRandomness) -> Hypothesis;

    /// Labeled samples consumed per run, exactly.
    fn sample_need(&self) -> u64;

    /// Shared unlabeled samples consumed per run (semi-replicable learners).
    fn shared_need(&self) -> u64 {
        0
    }
}

/// Shared-ownership alias used by the combinators.
pub type ArcLearner = Arc<dyn Learner>;

/// Agnostic-rate sample budget `ceil(C·(d + ln(1/β))/α²)`, `C` from the
/// constants table. Panics outside `α ∈ (0,1]`, `β ∈ (0,1)`.
pub fn sample_need_agnostic(d: usize, alpha: f64, beta: f64, consts: &Constants) -> u64 {
    assert!(alpha > 0.0 && alpha <= 1.0, "alpha must lie in (0,1]");
    assert!(beta > 0.0 && beta < 1.0, "beta must lie in (0,1)");
    ceil_budget(consts.erm_c * (d as f64 + libm::log(1.0 / beta)) / (alpha * alpha))
}

/// ERM over all finite labelings: per-point majority, with unseen points and
/// exact ties labeled `+1`.
pub fn erm_finite(s: &Dataset, d: usize) -> Hypothesis {
    erm_finite_counts(&FiniteCounts::from_dataset(s, d))
}

/// Counts form of [`erm_finite`].
pub fn erm_finite_counts(counts: &FiniteCounts) -> Hypothesis {
    let labels = counts
        .pos
        .iter()
        .zip(&counts.neg)
        .map(|(p, n)| sign_label(p >= n))
        .collect();
    Hypothesis::FiniteLabeling(labels)
}

/// Proper ERM for thresholds: minimizes empirical error over cuts at `lo`,
/// the midpoints between consecutive distinct sample values, and `hi`; ties
/// broken by the smallest cut. Panics on an empty sample.
pub fn erm_threshold(s: &Dataset, lo: f64, hi: f64) -> Hypothesis {
    assert!(!s.is_empty(), "erm_threshold on empty dataset");
    let mut pts: Vec<(f64, i8)> = s
        .points
        .iter()
        .map(|(x, y)| match x {
            Point::Real(v) => (*v, *y),
            Point::Index(_) => panic!("erm_threshold over an index-valued dataset"),
        })
        .collect();
    pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());

    // Group by distinct value; prefix counts of +1 / -1 labels.
    let mut values = Vec::new();
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    for (x, y) in pts {
        if values.last() != Some(&x) {
            values.push(x);
            pos.push(0u64);
            neg.push(0u64);
        }
        if y == 1 {
            *pos.last_mut().unwrap() += 1;
        } else {
            *neg.last_mut().unwrap() += 1;
        }
    }
    let total_pos: u64 = pos.iter().sum();
    let k_max = values.len();

    // Cut after the first k distinct values (those classified -1):
    // wrong(k) = (+1 labels among first k) + (-1 labels among the rest).
    let mut best_k = 0;
    let mut best_wrong = u64::MAX;
    let mut pos_prefix = 0u64;
    let mut neg_prefix = 0u64;
    let total_neg: u64 = neg.iter().sum();
    for k in 0..=k_max {
        let wrong = pos_prefix + (total_neg - neg_prefix);
        if wrong < best_wrong {
            best_wrong = wrong;
            best_k = k;
        }
        if k < k_max {
            pos_prefix += pos[k];
            neg_prefix += neg[k];
        }
    }
    let _ = total_pos;
    let t = if best_k == 0 {
        lo
    } else if best_k == k_max {
        hi
    } else {
        0.5 * (values[best_k - 1] + values[best_k])
    };
    Hypothesis::Threshold(t)
}

/// ERM learner for finite tasks with a fixed per-run block size.
#[derive(Clone, Debug)]
pub struct ErmFinite {
    pub d: usize,
    pub m: u64,
}

impl ErmFinite {
    pub fn with_budget(d: usize, m: u64) -> Self {
        assert!(m > 0, "ERM needs a positive budget");
        ErmFinite { d, m }
    }

    /// Budgeted as an agnostic (α, β)-learner.
    pub fn agnostic(d: usize, alpha: f64, beta: f64, consts: &Constants) -> Self {
        Self::with_budget(d, sample_need_agnostic(d, alpha, beta, consts))
    }
}

impl Learner for ErmFinite {
    fn learn(&self, data: &mut DataSource, _rng: &SharedRandomness) -> Hypothesis {
        erm_finite_counts(&data.labeled_counts(self.m))
    }

    fn sample_need(&self) -> u64 {
        self.m
    }
}

/// ERM learner for threshold tasks with a fixed per-run block size.
#[derive(Clone, Debug)]
pub struct ErmThreshold {
    m: u64,
    lo: f64,
    hi: f64,
}

impl ErmThreshold {
    pub fn with_budget(m: u64, lo: f64, hi: f64) -> Self {
        assert!(m > 0, "ERM needs a positive budget");
        ErmThreshold { m, lo, hi }
    }

    /// Budgeted as an agnostic (α, β)-learner (`d_eff = 1`).
    pub fn agnostic(alpha: f64, beta: f64, lo: f64, hi: f64, consts: &Constants) -> Self {
        Self::with_budget(sample_need_agnostic(1, alpha, beta, consts), lo, hi)
    }
}

impl Learner for ErmThreshold {
    fn learn(&self, data: &mut DataSource, _rng: &SharedRandomness) -> Hypothesis {
        erm_threshold(&data.labeled_points(self.m), self.lo, self.hi)
    }

    fn sample_need(&self) -> u64 {
        self.m
    }
}

/// Diagnostic learner: ignores data and randomness, returns a fixed
/// hypothesis. Fully replicable by construction.
#[derive(Clone, Debug)]
pub struct ConstantLearner(pub Hypothesis);

impl Learner for ConstantLearner {
    fn learn(&self, _data: &mut DataSource, _rng: &SharedRandomness) -> Hypothesis {
        self.0.clone()
    }

    fn sample_need(&self) -> u64 {
        0
    }
}

/// Diagnostic learner: labels each of `d` points by an independent fair coin
/// drawn from the *data* randomness — maximally non-replicable, used for the
/// 1/√T scaling measurements.
#[derive(Clone, Debug)]
pub struct FairCoinLearner {
    pub d: usize,
}

impl Learner for FairCoinLearner {
    fn learn(&self, data: &mut DataSource, _rng: &SharedRandomness) -> Hypothesis {
        let mut s = data.stat_stream(0);
        Hypothesis::FiniteLabeling((0..self.d).map(|_| sign_label(s.bernoulli(0.5))).collect())
    }

    fn sample_need(&self) -> u64 {
        0
    }
}

/// Diagnostic learner: draws uniformly from a fixed list of hypotheses using
/// data randomness (an i.i.d. hypothesis sampler with known support).
#[derive(Clone, Debug)]
pub struct UniformPickLearner {
    pub choices: Vec<Hypothesis>,
}

impl Learner for UniformPickLearner {
    fn learn(&self, data: &mut DataSource, _rng: &SharedRandomness) -> Hypothesis {
        assert!(!self.choices.is_empty());
        let mut s = data.stat_stream(1);
        self.choices[s.index(self.choices.len())].clone()
    }

    fn sample_need(&self) -> u64 {
        1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::task::{FiniteLabeledDistribution, PiecewiseCdf, Task, ThresholdTask};
    use alloc::vec;

    #[test]
    fn erm_finite_majority_and_tiebreak() {
        let s = Dataset {
            points: vec![(Point::Index(0), 1), (Point::Index(0), 1), (Point::Index(1), -1)],
        };
        assert_eq!(erm_finite(&s, 2), Hypothesis::FiniteLabeling(vec![1, -1]));
        // Empty sample: all +1 by the tie-break.
        assert_eq!(
            erm_finite(&Dataset::default(), 3),
            Hypothesis::FiniteLabeling(vec![1, 1, 1])
        );
        // Exact tie: +1.
        let tie = Dataset {
            points: vec![(Point::Index(0), 1), (Point::Index(0), -1)],
        };
        assert_eq!(erm_finite(&tie, 1), Hypothesis::FiniteLabeling(vec![1]));
    }

    #[test]
    fn erm_finite_correct_on_biased_task_whp() {
        // 1e4 samples from p = (0.4, -0.4): failure probability of either
        // per-point majority is a ~e^-400 binomial tail; 50 seeds must all hit.
        let task =
            Task::Finite(FiniteLabeledDistribution::uniform(vec![0.4, -0.4]).unwrap());
        for seed in 0..50 {
            let mut src = DataSource::fresh(&task, SharedRandomness::from_seed(seed).named("d"));
            let h = erm_finite_counts(&src.labeled_counts(10_000));
            assert_eq!(h, Hypothesis::FiniteLabeling(vec![1, -1]));
        }
    }

    #[test]
    fn erm_finite_brute_force_equivalence() {
        let mut s = SharedRandomness::from_seed(21).stream();
        for case in 0..60 {
            let d = 1 + case % 12;
            let n = 1 + s.index(40);
            let points = (0..n)
                .map(|_| (Point::Index(s.index(d)), sign_label(s.bernoulli(0.5))))
                .collect();
            let data = Dataset { points };
            let erm_err = data.empirical_error(&erm_finite(&data, d));
            let mut best = f64::INFINITY;
            for code in 0..(1u32 << d) {
                let labels: Vec<i8> = (0..d)
                    .map(|i| if code >> i & 1 == 1 { 1 } else { -1 })
                    .collect();
                best = best.min(data.empirical_error(&Hypothesis::FiniteLabeling(labels)));
            }
            assert!((erm_err - best).abs() < 1e-12, "case {case}");
        }
    }

    #[test]
    fn erm_threshold_examples() {
        let s = Dataset {
            points: vec![(Point::Real(0.2), -1), (Point::Real(0.8), 1)],
        };
        let h = erm_threshold(&s, 0.0, 1.0);
        assert_eq!(h, Hypothesis::Threshold(0.5));
        assert_eq!(s.empirical_error(&h), 0.0);

        // All labels +1: cut at the lower bound.
        let plus = Dataset {
            points: vec![(Point::Real(0.3), 1), (Point::Real(0.6), 1)],
        };
        assert_eq!(erm_threshold(&plus, 0.0, 1.0), Hypothesis::Threshold(0.0));

        // All labels -1: cut at the upper bound.
        let minus = Dataset {
            points: vec![(Point::Real(0.3), -1), (Point::Real(0.6), -1)],
        };
        assert_eq!(erm_threshold(&minus, 0.0, 1.0), Hypothesis::Threshold(1.0));
    }

    #[test]
    fn erm_threshold_zero_error_on_noiseless_data() {
        let task = Task::Threshold(
            ThresholdTask::new(PiecewiseCdf::uniform(0.0, 1.0).unwrap(), 0.37, 0.0).unwrap(),
        );
        for seed in 0..20 {
            let mut src = DataSource::fresh(&task, SharedRandomness::from_seed(seed).named("d"));
            let s = src.labeled_points(50);
            assert_eq!(s.empirical_error(&erm_threshold(&s, 0.0, 1.0)), 0.0);
        }
    }

    #[test]
    fn erm_threshold_brute_force_equivalence() {
        let mut rs = SharedRandomness::from_seed(22).stream();
        for case in 0..40 {
            let n = 1 + rs.index(200);
            let points: Vec<(Point, i8)> = (0..n)
                .map(|_| (Point::Real(rs.uniform()), sign_label(rs.bernoulli(0.5))))
                .collect();
            let data = Dataset { points: points.clone() };
            let erm_err = data.empirical_error(&erm_threshold(&data, 0.0, 1.0));
            // Brute force over every candidate cut position.
            let mut xs: Vec<f64> = points
                .iter()
                .map(|(p, _)| match p {
                    Point::Real(v) => *v,
                    _ => unreachable!(),
                })
                .collect();
            xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
            xs.dedup();
            let mut cuts = vec![0.0, 1.0];
            cuts.extend(xs.windows(2).map(|w| 0.5 * (w[0] + w[1])));
            let best = cuts
                .iter()
                .map(|t| data.empirical_error(&Hypothesis::Threshold(*t)))
                .fold(f64::INFINITY, f64::min);
            assert!((erm_err - best).abs() < 1e-12, "case {case}");
        }
    }

    #[test]
    fn sample_need_formula() {
        let c = Constants::default();
        // ceil(8 * (1 + 1) / 1) = 16.
        assert_eq!(sample_need_agnostic(1, 1.0, 1.0 / core::f64::consts::E, &c), 16);
        // Halving alpha exactly quadruples the pre-rounding value.
        let coarse = 8.0 * (3.0 + (1.0f64 / 0.05).ln()) / (0.2 * 0.2);
        let fine = 8.0 * (3.0 + (1.0f64 / 0.05).ln()) / (0.1 * 0.1);
        assert_eq!(fine, 4.0 * coarse);
        // Monotone in d with the formula's exact increment.
        let a = sample_need_agnostic(4, 0.5, 0.1, &c);
        let b = sample_need_agnostic(8, 0.5, 0.1, &c);
        assert!(b > a && b <= a + ((8.0 * 4.0 / 0.25) as u64) + 1);
    }

    #[test]
    fn agnostic_budget_meets_accuracy_contract() {
        // With m = sample_need(d, alpha, beta), excess error > alpha in at
        // most beta + 3*SE of 2000 random finite tasks (d <= 8).
        let c = Constants::default();
        let (alpha, beta) = (0.25, 0.1);
        let trials = 2000;
        let mut meta = SharedRandomness::from_seed(23).stream();
        let mut failures = 0;
        for t in 0..trials {
            let d = 1 + meta.index(8);
            let biases: Vec<f64> = (0..d).map(|_| meta.uniform_in(-1.0, 1.0)).collect();
            let task = Task::Finite(FiniteLabeledDistribution::uniform(biases).unwrap());
            let learner = ErmFinite::agnostic(d, alpha, beta, &c);
            let mut src = DataSource::fresh(
                &task,
                SharedRandomness::from_seed(24).substream("data", t),
            );
            let h = learner.learn(&mut src, &SharedRandomness::from_seed(0));
            assert_eq!(src.consumed(), learner.sample_need());
            if task.true_error(&h) - task.opt_error() > alpha {
                failures += 1;
            }
        }
        let rate = failures as f64 / trials as f64;
        let se = (beta * (1.0 - beta) / trials as f64).sqrt();
        assert!(rate <= beta + 3.0 * se, "excess-error rate {rate}");
    }

    #[test]
    fn diagnostic_learners() {
        let task =
            Task::Finite(FiniteLabeledDistribution::uniform(vec![0.0, 0.0]).unwrap());
        let rng = SharedRandomness::from_seed(30);
        let constant = ConstantLearner(Hypothesis::ConstantPlus);
        let mut src = DataSource::fresh(&task, rng.named("a"));
        assert_eq!(constant.learn(&mut src, &rng), Hypothesis::ConstantPlus);

        // Fair coin: two different data streams give different labelings
        // somewhere over 32 paired draws.
        let coin = FairCoinLearner { d: 4 };
        let mut diffs = 0;
        for i in 0..32 {
            let mut s1 = DataSource::fresh(&task, rng.substream("d1", i));
            let mut s2 = DataSource::fresh(&task, rng.substream("d2", i));
            if coin.learn(&mut s1, &rng) != coin.learn(&mut s2, &rng) {
                diffs += 1;
            }
        }
        assert!(diffs > 0);
    }
}
