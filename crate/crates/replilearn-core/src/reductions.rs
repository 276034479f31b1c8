//! Forward executions of the lower-bound reductions.
//!
//! These operations run the hardness reductions *forward* as empirical
//! demonstrations: given a learner with a measured replicability contract,
//! they produce a bias-estimation (or sign-one-way-marginals) answer whose
//! measured agreement and error rates are asserted against the constants
//! the proofs state (0.03, 2ρ, 2ρ+γ, 100α, 2α). No lower bound is claimed.
//!
//! The planted dataset a reduction feeds its learner is i.i.d. from a
//! finite task whose label biases encode the instance, so instead of
//! materializing the dataset (infeasible at ~10⁹ labeled samples) each
//! reduction runs the learner on a fresh [`DataSource`] over that planted
//! task — identical in distribution — and enforces the proofs' per-point
//! sample caps through the source's exact per-point draw totals.

use crate::constants::Constants;
use crate::data::DataSource;
use crate::hypothesis::{Label, Point};
use crate::learner::Learner;
use crate::rng::SharedRandomness;
use crate::task::{FiniteLabeledDistribution, Task};
use alloc::vec::Vec;

/// Sign of a bias, with ties resolved to +1.
pub fn sign_of(p: f64) -> Label {
    if p >= 0.0 {
        1
    } else {
        -1
    }
}

/// One reduction run's result.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReductionOutcome {
    /// The bias-estimation answer.
    pub answer: Label,
    /// Whether the planted point's sample cap fired (forcing answer +1).
    pub cap_hit: bool,
    /// The planted coordinate's weighted error `1[answer ≠ sign(p)]·|p|`.
    pub err_r: f64,
}

fn outcome(answer: Label, cap_hit: bool, p: f64) -> ReductionOutcome {
    let err_r = if answer == sign_of(p) { 0.0 } else { libm::fabs(p) };
    ReductionOutcome { answer, cap_hit, err_r }
}

/// Fisher–Yates shuffle driven by a shared stream.
fn shuffle(v: &mut [usize], st: &mut crate::rng::RandomStream) {
    for i in (1..v.len()).rev() {
        let j = st.index(i + 1);
        v.swap(i, j);
    }
}

/// Bias estimation through a pointwise-replicable learner over `d_eff =
/// 2d+1` points. Shared randomness (substream ("reduce","plant")) picks
/// the planted index `r` and splits the rest into B₊/B₋ labeled at
/// bias ±α; the planted point is labeled at the unknown bias `p`. The
/// learner runs on the planted task; if it drew the planted point more
/// than `2(m/d)·√ln(1/ρ)` times the answer is forced to +1, otherwise it
/// is the output hypothesis's label at the planted point. Demonstrated:
/// paired answers agree except w.p. ~2ρ; at |p| = α the wrong sign
/// appears w.p. ≲ 0.03 when the learner meets its accuracy contract.
pub fn bias_estimator_pointwise(
    a: &dyn Learner,
    d_eff: usize,
    alpha: f64,
    rho: f64,
    p: f64,
    shared: &SharedRandomness,
    data_rng: &SharedRandomness,
) -> ReductionOutcome {
    assert!(d_eff % 2 == 1, "domain size must be 2d+1");
    let d = ((d_eff - 1) / 2).max(1);
    let mut st = shared.named("reduce").named("plant").stream();
    let r = st.index(d_eff);
    let mut others: Vec<usize> = (0..d_eff).filter(|i| *i != r).collect();
    shuffle(&mut others, &mut st);
    let mut biases = alloc::vec![0.0f64; d_eff];
    for (k, i) in others.iter().enumerate() {
        biases[*i] = if k < others.len() / 2 { alpha } else { -alpha };
    }
    biases[r] = p;
    let task = Task::Finite(FiniteLabeledDistribution::uniform(biases).expect("valid biases"));

    let mut data = DataSource::fresh(&task, *data_rng);
    let h = a.learn(&mut data, shared);
    let m = a.sample_need() as f64;
    let cap = 2.0 * (m / d as f64) * libm::sqrt(libm::log(1.0 / rho));
    let planted = data.point_totals().expect("finite supply")[r] as f64;
    if planted > cap {
        outcome(1, true, p)
    } else {
        outcome(h.eval(Point::Index(r)), false, p)
    }
}

/// Hardness amplification for approximate replicability: shared randomness
/// picks the planted index `r` and draws `d−1` dummy biases uniformly from
/// `[−α, α]` (the hard meta-distribution); the planted point carries the
/// unknown bias `p` drawn from the same meta-distribution by the caller.
/// The cap `10(m/d)·√ln(1/ρ)` forces the all-plus hypothesis. Demonstrated
/// over the meta-distribution: paired agreement ≥ 1−(2ρ+γ); the planted
/// error `err_r` exceeds 100α w.p. ≤ 0.1.
pub fn apx_repl_hardness_amplification(
    a0: &dyn Learner,
    d: usize,
    alpha: f64,
    rho: f64,
    p: f64,
    shared: &SharedRandomness,
    data_rng: &SharedRandomness,
) -> ReductionOutcome {
    let mut st = shared.named("reduce").named("plant").stream();
    let r = st.index(d);
    let mut biases = alloc::vec![0.0f64; d];
    for (i, b) in biases.iter_mut().enumerate() {
        let draw = st.uniform_in(-alpha, alpha);
        if i != r {
            *b = draw;
        }
    }
    biases[r] = p;
    let task = Task::Finite(FiniteLabeledDistribution::uniform(biases).expect("valid biases"));

    let mut data = DataSource::fresh(&task, *data_rng);
    let h = a0.learn(&mut data, shared);
    let m = a0.sample_need() as f64;
    let cap = 10.0 * (m / d as f64) * libm::sqrt(libm::log(1.0 / rho));
    let planted = data.point_totals().expect("finite supply")[r] as f64;
    if planted >= cap {
        outcome(1, true, p)
    } else {
        outcome(h.eval(Point::Index(r)), false, p)
    }
}

/// Sign-one-way marginals through a learner over the uniform-marginal
/// planted task with bias vector `p`. Returns the per-coordinate signs of
/// the output hypothesis, or `None` when some coordinate was drawn more
/// than `C·m/d` times (the trial is discarded and counted by the caller,
/// per the proof's 0.0001 allowance). The vector's sign-one-way error is
/// exactly twice the hypothesis's excess error.
pub fn sign_one_way_from_learner(
    a: &dyn Learner,
    p: &[f64],
    consts: &Constants,
    shared: &SharedRandomness,
    data_rng: &SharedRandomness,
) -> Option<Vec<Label>> {
    let d = p.len();
    let task = Task::Finite(FiniteLabeledDistribution::uniform(p.to_vec()).expect("valid biases"));
    let mut data = DataSource::fresh(&task, *data_rng);
    let h = a.learn(&mut data, shared);
    let cap = consts.oneway_cap_c * a.sample_need() as f64 / d as f64;
    if data
        .point_totals()
        .expect("finite supply")
        .iter()
        .any(|t| *t as f64 > cap)
    {
        return None;
    }
    Some((0..d).map(|i| h.eval(Point::Index(i))).collect())
}

/// The sign-one-way error of a vector `v` against bias vector `p`:
/// `(1/d)·Σ|p_i| − (1/d)·Σ v_i·p_i`.
pub fn sign_one_way_error(v: &[Label], p: &[f64]) -> f64 {
    let d = p.len() as f64;
    v.iter()
        .zip(p)
        .map(|(vi, pi)| (libm::fabs(*pi) - *vi as f64 * pi) / d)
        .sum()
}
