//! Semi-replicable learning from a shared unlabeled pool.
//!
//! Semi-replicability relaxes exact replicability by letting the two
//! paired runs share an *unlabeled* pool (drawn once from the marginal)
//! in addition to the internal random string, while labeled data still
//! resamples. The learner:
//!
//! 1. draws the pool from substream `("semi","pool")` of the shared
//!    randomness — identical across paired runs;
//! 2. enumerates the class's distinct labelings of the pool and fits a
//!    realizable ERM to each, producing a non-uniform cover that contains
//!    a near-optimal hypothesis with high probability;
//! 3. replicably selects from the cover with the exponential mechanism.
//!
//! Because the cover and the selection randomness are identical across
//! paired runs, the selection's exact-agreement guarantee applies and the
//! output hypotheses are *equal objects* (not merely close) with
//! probability ≥ 1−ρ.

use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::constants::{ceil_budget, Constants};
use crate::data::{DataSource, Dataset};
use crate::hypothesis::{Hypothesis, Label, Point};
use crate::learner::{erm_threshold, ArcLearner, Learner};
use crate::rng::SharedRandomness;
use crate::selection::{
    hypothesis_selection_from_errors, selection_sample_need, SelectionParams,
};
use crate::task::{InvalidInput, Task};

/// The unlabeled pool both paired runs hold; identical because it derives
/// from the shared substream `("semi","pool")`.
#[derive(Clone, Debug, PartialEq)]
pub struct SharedPool {
    pub points: Vec<Point>,
}

/// Pool size `m_u = ceil(c·(d_eff + ln(2/β))/α)`.
pub fn pool_size(d_eff: u64, alpha: f64, beta: f64, consts: &Constants) -> u64 {
    ceil_budget(consts.pool_c * (d_eff as f64 + libm::log(2.0 / beta)) / alpha)
}

/// Draw the shared pool from the task's marginal.
pub fn draw_pool(task: &Task, rng: &SharedRandomness, m_u: u64) -> SharedPool {
    let mut st = rng.named("semi").named("pool").stream();
    let points = (0..m_u)
        .map(|_| match task {
            Task::Finite(f) => Point::Index(f.sample_index(&mut st)),
            Task::Threshold(t) => Point::Real(t.cdf().inverse(st.uniform())),
        })
        .collect();
    SharedPool { points }
}

/// Enumerate the class's realizable labelings of the pool and fit the ERM
/// to each. Thresholds: the |distinct values|+1 prefix labelings after
/// sorting. Finite(d): all 2^k labelings of the k distinct indices present
/// (absent indices default to +1), capped at d ≤ 12. Deterministic given
/// the pool; duplicates removed.
pub fn build_cover(pool: &SharedPool, task: &Task) -> Result<Vec<Hypothesis>, InvalidInput> {
    if pool.points.is_empty() {
        return Err(InvalidInput("pool must be nonempty".into()));
    }
    let mut cover: Vec<Hypothesis> = Vec::new();
    match task {
        Task::Threshold(t) => {
            let mut xs: Vec<f64> = pool
                .points
                .iter()
                .map(|p| match p {
                    Point::Real(x) => *x,
                    Point::Index(_) => panic!("real pool required"),
                })
                .collect();
            xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
            xs.dedup();
            let (lo, hi) = (t.cdf().lo(), t.cdf().hi());
            // Prefix labeling j: the j smallest values labeled -1, the
            // rest +1 (thresholds predict +1 strictly above the cut).
            for j in 0..=xs.len() {
                let s = Dataset {
                    points: xs
                        .iter()
                        .enumerate()
                        .map(|(i, x)| {
                            (Point::Real(*x), if i < j { -1 as Label } else { 1 })
                        })
                        .collect(),
                };
                cover.push(erm_threshold(&s, lo, hi));
            }
        }
        Task::Finite(f) => {
            let d = f.d();
            if d > 12 {
                return Err(InvalidInput("finite cover enumeration capped at d <= 12".into()));
            }
            let mut present = alloc::vec![false; d];
            for p in &pool.points {
                match p {
                    Point::Index(i) => present[*i] = true,
                    Point::Real(_) => panic!("index pool required"),
                }
            }
            let idxs: Vec<usize> =
                (0..d).filter(|i| present[*i]).collect();
            // ERM on a realizable labeling of the pool reproduces that
            // labeling on present indices and defaults absent ones to +1.
            for mask in 0..(1u32 << idxs.len()) {
                let mut labels = alloc::vec![1 as Label; d];
                for (bit, i) in idxs.iter().enumerate() {
                    if mask >> bit & 1 == 1 {
                        labels[*i] = -1;
                    }
                }
                cover.push(Hypothesis::FiniteLabeling(labels));
            }
        }
    }
    let mut dedup: Vec<Hypothesis> = Vec::with_capacity(cover.len());
    for h in cover {
        if !dedup.contains(&h) {
            dedup.push(h);
        }
    }
    Ok(dedup)
}

/// Selection robustness radius used for the labeled budget:
/// `τ_eff = ρ·(α/2)/(c_rob·ln(n/β))`.
pub fn semi_tau(n: usize, alpha: f64, beta: f64, rho: f64, consts: &Constants) -> f64 {
    rho * (alpha / 2.0) / (consts.rob_c * libm::log(n as f64 / beta))
}

/// Labeled budget for a cover of (at most) `n` members, before rounding.
pub fn semi_labeled_need_raw(
    n: usize,
    alpha: f64,
    beta: f64,
    rho: f64,
    consts: &Constants,
) -> f64 {
    let tau = semi_tau(n, alpha, beta, rho, consts);
    consts.sel_c * libm::log(n as f64 / beta) / (tau * tau)
}

/// Labeled budget for a cover of (at most) `n` members.
pub fn semi_labeled_need(n: usize, alpha: f64, beta: f64, rho: f64, consts: &Constants) -> u64 {
    let tau = semi_tau(n, alpha, beta, rho, consts);
    selection_sample_need(n, beta / 2.0, tau, consts)
}

struct SemiReplicable {
    m_u: u64,
    m_s: u64,
    alpha: f64,
    beta: f64,
    rho: f64,
    consts: Constants,
}

impl Learner for SemiReplicable {
    fn learn(&self, data: &mut DataSource, rng: &SharedRandomness) -> Hypothesis {
        let pool = draw_pool(data.task(), rng, self.m_u);
        let cover = build_cover(&pool, data.task()).expect("valid pool");
        let n = cover.len();
        assert!(
            self.m_s >= semi_labeled_need(n, self.alpha, self.beta, self.rho, &self.consts),
            "insufficient labeled budget for a cover of {n}"
        );
        let tau = semi_tau(n, self.alpha, self.beta, self.rho, &self.consts);
        let params = SelectionParams::new(self.alpha / 2.0, self.beta / 2.0, self.rho, tau)
            .expect("valid selection parameters");
        let refs: Vec<&Hypothesis> = cover.iter().collect();
        let errs = data.empirical_errors(self.m_s, &refs);
        let idx = hypothesis_selection_from_errors(&errs, &params, &rng.named("semi"));
        cover.into_iter().nth(idx).unwrap()
    }

    fn sample_need(&self) -> u64 {
        self.m_s
    }

    fn shared_need(&self) -> u64 {
        self.m_u
    }
}

/// Upper bound on the cover size a task can produce (used to budget m_s).
pub fn cover_size_bound(task: &Task, m_u: u64) -> Result<usize, InvalidInput> {
    match task {
        Task::Threshold(_) => Ok(m_u as usize + 1),
        Task::Finite(f) => {
            if f.d() > 12 {
                return Err(InvalidInput("finite cover enumeration capped at d <= 12".into()));
            }
            Ok(1usize << f.d())
        }
    }
}

/// The semi-replicable learner: shared pool of
/// `m_u = ceil(c·(d_eff + ln(2/β))/α)` unlabeled draws, cover construction,
/// and replicable selection with slack α/2, error β/2, replicability ρ
/// over `m_s` labeled samples. Pass `m_s = None` to budget for the
/// worst-case cover size.
pub fn semi_replicable(
    task: &Task,
    m_s: Option<u64>,
    alpha: f64,
    beta: f64,
    rho: f64,
    consts: &Constants,
) -> Result<ArcLearner, InvalidInput> {
    if !(alpha > 0.0 && alpha < 1.0 && beta > 0.0 && beta < 1.0 && rho > 0.0 && rho < 1.0) {
        return Err(InvalidInput("alpha, beta, rho must lie in (0,1)".into()));
    }
    let d_eff = match task {
        Task::Finite(f) => f.d() as u64,
        Task::Threshold(_) => 1,
    };
    let m_u = pool_size(d_eff, alpha, beta, consts);
    let n_max = cover_size_bound(task, m_u)?;
    let m_s = m_s.unwrap_or(semi_labeled_need(n_max, alpha, beta, rho, consts));
    Ok(Arc::new(SemiReplicable {
        m_u,
        m_s,
        alpha,
        beta,
        rho,
        consts: *consts,
    }))
}
