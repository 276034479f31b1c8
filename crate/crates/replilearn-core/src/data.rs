//! Datasets, sufficient statistics, and the budget-tracked sample source.
//!
//! Learners consume labeled samples through a [`DataSource`]: a task plus a
//! private randomness substream, handing out disjoint fresh blocks and
//! counting every sample charged against the learner's declared budget.
//!
//! Two representations of a block exist and are exchangeable in
//! distribution:
//!
//! * materialized points ([`Dataset`]), and
//! * sufficient statistics — per-point label counts on finite tasks
//!   ([`FiniteCounts`]), per-cell label counts on threshold tasks
//!   ([`IntervalCounts`]) — drawn exactly via multinomial/binomial sampling.
//!
//! The statistics paths matter: several transforms have selection budgets in
//! the 10⁹–10¹⁰ sample range at their prescribed constants, where a sample
//! is only ever inspected through an empirical error. Drawing the counts
//! directly is exact and O(#cells) instead of O(budget).

use alloc::vec;
use alloc::vec::Vec;

use rand_distr::Distribution;

use crate::hypothesis::{Hypothesis, Label, Point};
use crate::rng::{RandomStream, SharedRandomness};
use crate::task::Task;

/// A materialized labeled sample.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Dataset {
    pub points: Vec<(Point, Label)>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `err_S(h)`: fraction of points misclassified. Panics on empty `S`
    /// (the caller sizes sample budgets; an empty block is a bug).
    pub fn empirical_error(&self, h: &Hypothesis) -> f64 {
        assert!(!self.is_empty(), "empirical_error on empty dataset");
        let wrong = self
            .points
            .iter()
            .filter(|(x, y)| h.eval(*x) != *y)
            .count();
        wrong as f64 / self.len() as f64
    }

    /// `dist_S(h1, h2)`: fraction of points where the hypotheses differ.
    pub fn empirical_distance(&self, h1: &Hypothesis, h2: &Hypothesis) -> f64 {
        assert!(!self.is_empty(), "empirical_distance on empty dataset");
        let diff = self
            .points
            .iter()
            .filter(|(x, _)| h1.eval(*x) != h2.eval(*x))
            .count();
        diff as f64 / self.len() as f64
    }
}

/// Per-point label counts of a finite-task sample of size `m()`.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteCounts {
    /// Count of (x_i, +1) observations.
    pub pos: Vec<u64>,
    /// Count of (x_i, −1) observations.
    pub neg: Vec<u64>,
}

impl FiniteCounts {
    pub fn from_dataset(s: &Dataset, d: usize) -> Self {
        let mut c = FiniteCounts {
            pos: vec![0; d],
            neg: vec![0; d],
        };
        for (x, y) in &s.points {
            let Point::Index(i) = x else {
                panic!("finite counts over a real-valued dataset")
            };
            if *y == 1 {
                c.pos[*i] += 1;
            } else {
                c.neg[*i] += 1;
            }
        }
        c
    }

    pub fn d(&self) -> usize {
        self.pos.len()
    }

    pub fn m(&self) -> u64 {
        self.pos.iter().chain(&self.neg).sum()
    }

    /// Empirical error of a labeling vector over the counted sample.
    pub fn empirical_error_labels(&self, labels: &[Label]) -> f64 {
        let m = self.m();
        assert!(m > 0, "empirical error on empty counts");
        let wrong: u64 = labels
            .iter()
            .enumerate()
            .map(|(i, l)| if *l == 1 { self.neg[i] } else { self.pos[i] })
            .sum();
        wrong as f64 / m as f64
    }
}

/// Per-cell label counts of a threshold-task sample. Cells are the
/// partition of the support at a fixed set of cuts plus the true threshold,
/// so any hypothesis whose cuts are within that set is constant per cell.
#[derive(Clone, Debug, PartialEq)]
pub struct IntervalCounts {
    /// Cell edges, `edges[i]..edges[i+1]`, covering the support.
    edges: Vec<f64>,
    /// Representative (midpoint) per cell.
    reps: Vec<f64>,
    pos: Vec<u64>,
    neg: Vec<u64>,
}

impl IntervalCounts {
    pub fn m(&self) -> u64 {
        self.pos.iter().chain(&self.neg).sum()
    }

    /// Empirical error of `h` over the counted sample. `h`'s cuts must be a
    /// subset of the cell edges (checked in debug builds via constancy).
    pub fn empirical_error(&self, h: &Hypothesis) -> f64 {
        let m = self.m();
        assert!(m > 0, "empirical error on empty counts");
        let mut wrong = 0u64;
        for (i, rep) in self.reps.iter().enumerate() {
            if h.eval(Point::Real(*rep)) == 1 {
                wrong += self.neg[i];
            } else {
                wrong += self.pos[i];
            }
        }
        wrong as f64 / m as f64
    }
}

/// Clamped exact binomial draw.
pub(crate) fn binomial(stream: &mut RandomStream, n: u64, p: f64) -> u64 {
    if n == 0 || p <= 0.0 {
        return 0;
    }
    if p >= 1.0 {
        return n;
    }
    rand_distr::Binomial::new(n, p)
        .expect("valid binomial")
        .sample(stream)
}

/// Exact multinomial draw by sequential conditional binomials.
pub(crate) fn multinomial(stream: &mut RandomStream, n: u64, probs: &[f64]) -> Vec<u64> {
    let mut out = Vec::with_capacity(probs.len());
    let mut remaining_n = n;
    let mut remaining_p: f64 = probs.iter().sum();
    for (i, p) in probs.iter().enumerate() {
        if i + 1 == probs.len() || remaining_p <= 0.0 {
            out.push(remaining_n);
            remaining_n = 0;
            continue;
        }
        let ratio = (p / remaining_p).clamp(0.0, 1.0);
        let c = binomial(stream, remaining_n, ratio);
        out.push(c);
        remaining_n -= c;
        remaining_p -= p;
    }
    if let Some(last) = out.last_mut() {
        *last += remaining_n;
    }
    out
}

/// An unlabeled block from the marginal, in whichever representation suits
/// the task family.
#[derive(Clone, Debug)]
pub enum UnlabeledBlock {
    Points(Vec<Point>),
    /// Finite-task draw counts per point index.
    Counts(Vec<u64>),
}

impl UnlabeledBlock {
    pub fn len(&self) -> u64 {
        match self {
            UnlabeledBlock::Points(v) => v.len() as u64,
            UnlabeledBlock::Counts(c) => c.iter().sum(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Empirical classification distance between two hypotheses on the block.
    pub fn empirical_distance(&self, h1: &Hypothesis, h2: &Hypothesis) -> f64 {
        match self {
            UnlabeledBlock::Points(v) => {
                assert!(!v.is_empty());
                let diff = v.iter().filter(|x| h1.eval(**x) != h2.eval(**x)).count();
                diff as f64 / v.len() as f64
            }
            UnlabeledBlock::Counts(c) => {
                let m: u64 = c.iter().sum();
                assert!(m > 0);
                let diff: u64 = c
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| {
                        h1.eval(Point::Index(*i)) != h2.eval(Point::Index(*i))
                    })
                    .map(|(_, n)| n)
                    .sum();
                diff as f64 / m as f64
            }
        }
    }
}

enum Inner {
    /// I.i.d. blocks from the task, one substream per block.
    Fresh {
        rng: SharedRandomness,
        next_block: u64,
        /// Cumulative per-point draw totals on finite tasks (used by the
        /// reductions' sample-cap accounting).
        point_totals: Vec<u64>,
    },
    /// Replay of a pre-materialized dataset in contiguous blocks.
    Replay {
        points: Vec<(Point, Label)>,
        cursor: usize,
    },
}

/// The sample supply of one learner run: disjoint fresh blocks, every
/// sample counted.
pub struct DataSource<'a> {
    task: &'a Task,
    inner: Inner,
    consumed: u64,
}

impl<'a> DataSource<'a> {
    /// Fresh i.i.d. supply driven by `rng` (one run's private data stream).
    pub fn fresh(task: &'a Task, rng: SharedRandomness) -> Self {
        let d = task.as_finite().map(|f| f.d()).unwrap_or(0);
        DataSource {
            task,
            inner: Inner::Fresh {
                rng,
                next_block: 0,
                point_totals: vec![0; d],
            },
            consumed: 0,
        }
    }

    /// Supply that replays a fixed dataset in contiguous blocks (used by the
    /// reductions, which construct their datasets explicitly).
    pub fn replay(task: &'a Task, dataset: Dataset) -> Self {
        DataSource {
            task,
            inner: Inner::Replay {
                points: dataset.points,
                cursor: 0,
            },
            consumed: 0,
        }
    }

    pub fn task(&self) -> &'a Task {
        self.task
    }

    /// Total labeled samples handed out so far.
    pub fn consumed(&self) -> u64 {
        self.consumed
    }

    /// Cumulative per-point draw totals (fresh finite supply only).
    pub fn point_totals(&self) -> Option<&[u64]> {
        match &self.inner {
            Inner::Fresh { point_totals, .. } if !point_totals.is_empty() => {
                Some(point_totals)
            }
            _ => None,
        }
    }

    /// Charge `n` samples and return the stream that realizes the block.
    /// This is the primitive behind every sufficient-statistic path.
    pub fn stat_stream(&mut self, n: u64) -> RandomStream {
        let Inner::Fresh { rng, next_block, .. } = &mut self.inner else {
            panic!("stat_stream requires a fresh supply");
        };
        let s = rng.substream("blk", *next_block).stream();
        *next_block += 1;
        self.consumed += n;
        s
    }

    /// Next block of `n` labeled points, materialized.
    pub fn labeled_points(&mut self, n: u64) -> Dataset {
        match &mut self.inner {
            Inner::Fresh { .. } => {
                let mut s = self.stat_stream(n);
                let points = (0..n).map(|_| self.task.sample_one(&mut s)).collect();
                Dataset { points }
            }
            Inner::Replay { points, cursor } => {
                let end = *cursor + n as usize;
                assert!(end <= points.len(), "replay supply exhausted");
                let out = points[*cursor..end].to_vec();
                *cursor = end;
                self.consumed += n;
                Dataset { points: out }
            }
        }
    }

    /// Next block of `n` labeled samples from a finite task, as counts.
    pub fn labeled_counts(&mut self, n: u64) -> FiniteCounts {
        let f = self.task.as_finite().expect("labeled_counts needs a finite task");
        match &mut self.inner {
            Inner::Fresh { .. } => {
                let mut s = self.stat_stream(n);
                let per_point = multinomial(&mut s, n, f.marginal());
                let mut pos = Vec::with_capacity(f.d());
                let mut neg = Vec::with_capacity(f.d());
                for (i, &c) in per_point.iter().enumerate() {
                    let plus = binomial(&mut s, c, (1.0 + f.biases()[i]) / 2.0);
                    pos.push(plus);
                    neg.push(c - plus);
                }
                if let Inner::Fresh { point_totals, .. } = &mut self.inner {
                    for (t, c) in point_totals.iter_mut().zip(&per_point) {
                        *t += c;
                    }
                }
                FiniteCounts { pos, neg }
            }
            Inner::Replay { .. } => {
                let block = self.labeled_points(n);
                FiniteCounts::from_dataset(&block, f.d())
            }
        }
    }

    /// Next block of `n` labeled threshold-task samples, as per-cell counts
    /// over the partition induced by `cuts` (plus `t*`).
    pub fn labeled_interval_counts(&mut self, n: u64, cuts: &[f64]) -> IntervalCounts {
        let t = self
            .task
            .as_threshold()
            .expect("labeled_interval_counts needs a threshold task");
        let (lo, hi) = (t.cdf().lo(), t.cdf().hi());
        let mut edges: Vec<f64> = cuts.to_vec();
        edges.push(t.true_threshold());
        edges.extend_from_slice(t.cdf().breakpoints());
        edges.retain(|x| (lo..=hi).contains(x));
        edges.push(lo);
        edges.push(hi);
        edges.sort_by(|a, b| a.partial_cmp(b).unwrap());
        edges.dedup();
        let reps: Vec<f64> = edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        let masses: Vec<f64> = edges
            .windows(2)
            .map(|w| t.cdf().eval(w[1]) - t.cdf().eval(w[0]))
            .collect();

        let (pos, neg) = match &mut self.inner {
            Inner::Fresh { .. } => {
                let mut s = self.stat_stream(n);
                let per_cell = multinomial(&mut s, n, &masses);
                let mut pos = Vec::with_capacity(reps.len());
                let mut neg = Vec::with_capacity(reps.len());
                for (rep, &c) in reps.iter().zip(&per_cell) {
                    let p_plus = if *rep > t.true_threshold() {
                        1.0 - t.noise()
                    } else {
                        t.noise()
                    };
                    let plus = binomial(&mut s, c, p_plus);
                    pos.push(plus);
                    neg.push(c - plus);
                }
                (pos, neg)
            }
            Inner::Replay { .. } => {
                let block = self.labeled_points(n);
                let mut pos = vec![0u64; reps.len()];
                let mut neg = vec![0u64; reps.len()];
                for (x, y) in &block.points {
                    let Point::Real(v) = x else {
                        panic!("interval counts over an index-valued dataset")
                    };
                    // Cell containing v: last edge <= v (left-closed first cell).
                    let i = match edges.partition_point(|e| e < v) {
                        0 => 0,
                        k => (k - 1).min(reps.len() - 1),
                    };
                    if *y == 1 {
                        pos[i] += 1;
                    } else {
                        neg[i] += 1;
                    }
                }
                (pos, neg)
            }
        };
        IntervalCounts { edges, reps, pos, neg }
    }

    /// Next block of `n` unlabeled draws from the marginal.
    pub fn unlabeled(&mut self, n: u64) -> UnlabeledBlock {
        match self.task {
            Task::Finite(f) => match &mut self.inner {
                Inner::Fresh { .. } => {
                    let mut s = self.stat_stream(n);
                    let counts = multinomial(&mut s, n, f.marginal());
                    if let Inner::Fresh { point_totals, .. } = &mut self.inner {
                        for (t, c) in point_totals.iter_mut().zip(&counts) {
                            *t += c;
                        }
                    }
                    UnlabeledBlock::Counts(counts)
                }
                Inner::Replay { .. } => {
                    let block = self.labeled_points(n);
                    UnlabeledBlock::Points(block.points.into_iter().map(|(x, _)| x).collect())
                }
            },
            Task::Threshold(_) => {
                let block = self.labeled_points(n);
                UnlabeledBlock::Points(block.points.into_iter().map(|(x, _)| x).collect())
            }
        }
    }

    /// Empirical errors of several hypotheses on one fresh shared block of
    /// size `n`, using the cheapest exact representation for the task.
    pub fn empirical_errors(&mut self, n: u64, hyps: &[&Hypothesis]) -> Vec<f64> {
        match self.task {
            Task::Finite(f) => {
                let counts = self.labeled_counts(n);
                hyps.iter()
                    .map(|h| counts.empirical_error_labels(&h.finite_labels(f.d())))
                    .collect()
            }
            Task::Threshold(_) => {
                let mut cuts = Vec::new();
                for h in hyps {
                    h.collect_cuts(&mut cuts);
                }
                let counts = self.labeled_interval_counts(n, &cuts);
                hyps.iter().map(|h| counts.empirical_error(h)).collect()
            }
        }
    }
}
