//! Synthetic learning tasks with exactly computable error and distance.
//!
//! Two task families:
//!
//! * [`FiniteLabeledDistribution`] — a marginal over `d` shattered points
//!   whose labels are Rademacher with per-point bias `p_i`
//!   (`Pr[y = +1] = (1 + p_i)/2`). `OPT` is closed-form.
//! * [`ThresholdTask`] — a real-line task with a piecewise-linear marginal
//!   CDF, a true threshold `t*`, and label noise `η`: the clean label
//!   `sign(x > t*)` is flipped independently with probability `η`. `OPT`
//!   over thresholds is exactly `η`.
//!
//! Marginals on the line are restricted to piecewise-linear CDFs so that
//! true error and classification distance are *exact* (finite partitions,
//! no numerical integration error to confound replicability measurements).

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::hypothesis::{sign_label, Hypothesis, Point};

/// Construction-time validation failure for tasks and parameter sets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InvalidInput(pub String);

impl core::fmt::Display for InvalidInput {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "invalid input: {}", self.0)
    }
}

/// Distribution over `d` points with Rademacher label biases.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteLabeledDistribution {
    biases: Vec<f64>,
    marginal: Vec<f64>,
    /// Cumulative marginal, for inverse-CDF point sampling.
    cum: Vec<f64>,
}

impl FiniteLabeledDistribution {
    pub fn new(biases: Vec<f64>, marginal: Vec<f64>) -> Result<Self, InvalidInput> {
        if biases.is_empty() {
            return Err(InvalidInput("d must be >= 1".into()));
        }
        if biases.len() != marginal.len() {
            return Err(InvalidInput("biases and marginal must have equal length".into()));
        }
        if biases.iter().any(|p| !(-1.0..=1.0).contains(p)) {
            return Err(InvalidInput("every bias must lie in [-1, 1]".into()));
        }
        if marginal.iter().any(|w| *w < 0.0 || !w.is_finite()) {
            return Err(InvalidInput("marginal weights must be nonnegative".into()));
        }
        let total: f64 = marginal.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(InvalidInput(format!("marginal sums to {total}, not 1")));
        }
        let mut cum = Vec::with_capacity(marginal.len());
        let mut acc = 0.0;
        for w in &marginal {
            acc += w;
            cum.push(acc);
        }
        *cum.last_mut().unwrap() = 1.0;
        Ok(Self { biases, marginal, cum })
    }

    /// Uniform marginal over the given biases.
    pub fn uniform(biases: Vec<f64>) -> Result<Self, InvalidInput> {
        let d = biases.len();
        let w = 1.0 / d.max(1) as f64;
        Self::new(biases, alloc::vec![w; d])
    }

    pub fn d(&self) -> usize {
        self.biases.len()
    }

    pub fn biases(&self) -> &[f64] {
        &self.biases
    }

    pub fn marginal(&self) -> &[f64] {
        &self.marginal
    }

    /// Draw a point index from the marginal.
    pub fn sample_index(&self, stream: &mut crate::rng::RandomStream) -> usize {
        let u = stream.uniform();
        match self.cum.iter().position(|c| u < *c) {
            Some(i) => i,
            None => self.cum.len() - 1,
        }
    }
}

/// Piecewise-linear CDF on a bounded interval: `F(xs[0]) = 0`,
/// `F(xs[last]) = 1`, linear between breakpoints.
#[derive(Clone, Debug, PartialEq)]
pub struct PiecewiseCdf {
    xs: Vec<f64>,
    fs: Vec<f64>,
}

impl PiecewiseCdf {
    pub fn new(xs: Vec<f64>, fs: Vec<f64>) -> Result<Self, InvalidInput> {
        if xs.len() < 2 || xs.len() != fs.len() {
            return Err(InvalidInput("need >= 2 matching breakpoints".into()));
        }
        if xs.windows(2).any(|w| w[1] <= w[0]) {
            return Err(InvalidInput("breakpoints must strictly increase".into()));
        }
        if fs.windows(2).any(|w| w[1] < w[0]) {
            return Err(InvalidInput("CDF values must be nondecreasing".into()));
        }
        if fs[0] != 0.0 || *fs.last().unwrap() != 1.0 {
            return Err(InvalidInput("CDF must run from 0 to 1".into()));
        }
        Ok(Self { xs, fs })
    }

    /// The uniform distribution on [lo, hi].
    pub fn uniform(lo: f64, hi: f64) -> Result<Self, InvalidInput> {
        Self::new(alloc::vec![lo, hi], alloc::vec![0.0, 1.0])
    }

    pub fn lo(&self) -> f64 {
        self.xs[0]
    }

    pub fn hi(&self) -> f64 {
        *self.xs.last().unwrap()
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.xs
    }

    /// Evaluate `F(t)` (clamped outside the support).
    pub fn eval(&self, t: f64) -> f64 {
        if t <= self.lo() {
            return 0.0;
        }
        if t >= self.hi() {
            return 1.0;
        }
        // Last breakpoint <= t.
        let i = match self.xs.partition_point(|x| *x <= t) {
            0 => 0,
            k => k - 1,
        };
        let (x0, x1) = (self.xs[i], self.xs[i + 1]);
        let (f0, f1) = (self.fs[i], self.fs[i + 1]);
        f0 + (f1 - f0) * (t - x0) / (x1 - x0)
    }

    /// Inverse CDF: the smallest `x` with `F(x) >= u`. Flat (mass-zero)
    /// segments resolve to their left endpoint.
    pub fn inverse(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        let i = match self.fs.partition_point(|f| *f < u) {
            0 => return self.lo(),
            k => k - 1,
        };
        let (f0, f1) = (self.fs[i], self.fs[i + 1]);
        if f1 == f0 {
            return self.xs[i];
        }
        let (x0, x1) = (self.xs[i], self.xs[i + 1]);
        x0 + (x1 - x0) * (u - f0) / (f1 - f0)
    }
}

/// Real-line threshold task: marginal CDF, true threshold, label noise.
#[derive(Clone, Debug, PartialEq)]
pub struct ThresholdTask {
    cdf: PiecewiseCdf,
    true_threshold: f64,
    noise: f64,
}

impl ThresholdTask {
    pub fn new(cdf: PiecewiseCdf, true_threshold: f64, noise: f64) -> Result<Self, InvalidInput> {
        if !(0.0..0.5).contains(&noise) {
            return Err(InvalidInput("noise must lie in [0, 1/2)".into()));
        }
        if !(cdf.lo()..=cdf.hi()).contains(&true_threshold) {
            return Err(InvalidInput("true threshold outside the support".into()));
        }
        Ok(Self { cdf, true_threshold, noise })
    }

    pub fn cdf(&self) -> &PiecewiseCdf {
        &self.cdf
    }

    pub fn true_threshold(&self) -> f64 {
        self.true_threshold
    }

    pub fn noise(&self) -> f64 {
        self.noise
    }
}

/// A learning task: either family, with uniform evaluation operations.
#[derive(Clone, Debug, PartialEq)]
pub enum Task {
    Finite(FiniteLabeledDistribution),
    Threshold(ThresholdTask),
}

impl Task {
    /// Domain size for finite tasks; panics for threshold tasks.
    pub fn d(&self) -> usize {
        match self {
            Task::Finite(f) => f.d(),
            Task::Threshold(_) => panic!("threshold task has no finite domain size"),
        }
    }

    pub fn as_finite(&self) -> Option<&FiniteLabeledDistribution> {
        match self {
            Task::Finite(f) => Some(f),
            _ => None,
        }
    }

    pub fn as_threshold(&self) -> Option<&ThresholdTask> {
        match self {
            Task::Threshold(t) => Some(t),
            _ => None,
        }
    }

    /// `Pr[y = +1 | x]` for a threshold task point.
    fn plus_prob_at(&self, x: f64) -> f64 {
        let t = self.as_threshold().expect("threshold task");
        if x > t.true_threshold {
            1.0 - t.noise
        } else {
            t.noise
        }
    }

    /// One labeled draw.
    pub fn sample_one(&self, stream: &mut crate::rng::RandomStream) -> (Point, i8) {
        match self {
            Task::Finite(f) => {
                let i = f.sample_index(stream);
                let y = sign_label(stream.uniform() < (1.0 + f.biases[i]) / 2.0);
                (Point::Index(i), y)
            }
            Task::Threshold(t) => {
                let x = t.cdf.inverse(stream.uniform());
                let clean = sign_label(x > t.true_threshold);
                let y = if stream.uniform() < t.noise { -clean } else { clean };
                (Point::Real(x), y)
            }
        }
    }

    /// Exact `err_D(h) = Pr[h(x) != y]`.
    pub fn true_error(&self, h: &Hypothesis) -> f64 {
        match self {
            Task::Finite(f) => {
                let labels = h.finite_labels(f.d());
                f.biases
                    .iter()
                    .zip(&f.marginal)
                    .zip(&labels)
                    .map(|((p, w), l)| {
                        w * if *l == 1 { (1.0 - p) / 2.0 } else { (1.0 + p) / 2.0 }
                    })
                    .sum()
            }
            Task::Threshold(t) => {
                let cells = self.threshold_partition(&[h]);
                let mut err = 0.0;
                for (mass, mid) in cells {
                    let p_plus = self.plus_prob_at(mid);
                    err += mass
                        * if h.eval(Point::Real(mid)) == 1 {
                            1.0 - p_plus
                        } else {
                            p_plus
                        };
                }
                let _ = t;
                err
            }
        }
    }

    /// `OPT` over the task's hypothesis class.
    pub fn opt_error(&self) -> f64 {
        match self {
            Task::Finite(f) => f
                .biases
                .iter()
                .zip(&f.marginal)
                .map(|(p, w)| w * (1.0 - libm::fabs(*p)) / 2.0)
                .sum(),
            Task::Threshold(t) => t.noise,
        }
    }

    /// Exact `dist_D(h1, h2) = Pr[h1(x) != h2(x)]`.
    pub fn classification_distance(&self, h1: &Hypothesis, h2: &Hypothesis) -> f64 {
        match self {
            Task::Finite(f) => {
                let (a, b) = (h1.finite_labels(f.d()), h2.finite_labels(f.d()));
                f.marginal
                    .iter()
                    .zip(a.iter().zip(&b))
                    .filter(|(_, (x, y))| x != y)
                    .map(|(w, _)| w)
                    .sum()
            }
            Task::Threshold(_) => {
                let cells = self.threshold_partition(&[h1, h2]);
                cells
                    .into_iter()
                    .filter(|(_, mid)| {
                        h1.eval(Point::Real(*mid)) != h2.eval(Point::Real(*mid))
                    })
                    .map(|(mass, _)| mass)
                    .sum()
            }
        }
    }

    /// Partition the threshold support at CDF breakpoints, `t*`, and every
    /// cut of the given hypotheses; return `(mass, representative)` per cell.
    /// The hypotheses are constant on each open cell, so sums over cells are
    /// exact (no numerical integration).
    fn threshold_partition(&self, hs: &[&Hypothesis]) -> Vec<(f64, f64)> {
        let t = self.as_threshold().expect("threshold task");
        let mut pts: Vec<f64> = t.cdf.breakpoints().to_vec();
        pts.push(t.true_threshold);
        for h in hs {
            h.collect_cuts(&mut pts);
        }
        let (lo, hi) = (t.cdf.lo(), t.cdf.hi());
        pts.retain(|x| (lo..=hi).contains(x));
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        pts.dedup();
        let mut cells = Vec::with_capacity(pts.len());
        for w in pts.windows(2) {
            let mass = t.cdf.eval(w[1]) - t.cdf.eval(w[0]);
            if mass > 0.0 {
                cells.push((mass, 0.5 * (w[0] + w[1])));
            }
        }
        cells
    }
}
