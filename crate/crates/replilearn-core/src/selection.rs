//! Correlated sampling and robustly replicable hypothesis selection.
//!
//! [`correlated_sample`] draws from a finite weight vector by the classical
//! shared-uniform rejection scheme: both paired runs read the same stream of
//! `(index, level)` pairs and accept the first level under their own weight
//! profile. Marginals are exact, and two runs whose normalized weights are
//! at total-variation distance δ disagree w.p. ≤ 2δ.
//!
//! [`hypothesis_selection`] is the exponential mechanism over empirical
//! errors, sampled through correlated sampling: with `t = 2·ln(2n/β)/α`, the
//! weight of candidate `i` is `exp(−t·err_S(f_i))`. On a large enough shared
//! budget this selects an α-optimal index w.p. ≥ 1−β, and two runs with
//! shared randomness, independent data, and per-index candidates within
//! classification distance τ agree w.p. ≥ 1−(ρ+β) whenever
//! τ ≤ ρα/(c_rob·ln(n/β)).

use alloc::vec::Vec;

use crate::constants::{ceil_budget, Constants};
use crate::data::{DataSource, Dataset};
use crate::hypothesis::Hypothesis;
use crate::rng::SharedRandomness;
use crate::task::InvalidInput;

/// Parameters of robust hypothesis selection.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SelectionParams {
    /// Optimality slack.
    pub alpha: f64,
    /// Failure probability.
    pub beta: f64,
    /// Replicability target.
    pub rho: f64,
    /// Robustness radius (τ ≤ α).
    pub tau: f64,
}

impl SelectionParams {
    pub fn new(alpha: f64, beta: f64, rho: f64, tau: f64) -> Result<Self, InvalidInput> {
        for (name, v) in [("alpha", alpha), ("beta", beta), ("rho", rho), ("tau", tau)] {
            if !(0.0..1.0).contains(&v) || v == 0.0 {
                return Err(InvalidInput(alloc::format!("{name} must lie in (0,1)")));
            }
        }
        if tau > alpha {
            return Err(InvalidInput("tau must not exceed alpha".into()));
        }
        Ok(SelectionParams { alpha, beta, rho, tau })
    }

    /// Exponential-mechanism temperature `t = 2·ln(2n/β)/α`.
    pub fn temperature(&self, n: usize) -> f64 {
        2.0 * libm::log(2.0 * n as f64 / self.beta) / self.alpha
    }
}

/// Shared sample budget `m = ceil(c_sel·ln(n/β)/τ²)` for selecting among
/// `n` candidates at robustness radius `tau`.
pub fn selection_sample_need(n: usize, beta: f64, tau: f64, consts: &Constants) -> u64 {
    ceil_budget(consts.sel_c * libm::log(n as f64 / beta) / (tau * tau))
}

/// The largest robustness radius at which the replicability contract
/// applies: `ρα/(c_rob·ln(n/β))`.
pub fn robustness_radius(rho: f64, alpha: f64, n: usize, beta: f64, consts: &Constants) -> f64 {
    rho * alpha / (consts.rob_c * libm::log(n as f64 / beta))
}

/// Draw index `i` with probability `weights_i / Σ weights` by shared-uniform
/// rejection over substream `("corrsamp")` of `rng`: read pairs `(u_k, v_k)`
/// with `u_k` uniform on `[n]` and `v_k` uniform on `[0,1]`, and accept the
/// first `k` with `v_k ≤ weights_{u_k}/Σ_j weights_j`. Normalizing the
/// acceptance threshold by the *total* weight (a common envelope, not each
/// call's own maximum) is what makes the paired-disagreement bound `≤ 2δ`
/// hold at total-variation distance δ. Expected stream reads are `n` per
/// call. Panics if the weights are empty, negative, or all zero.
pub fn correlated_sample(weights: &[f64], rng: &SharedRandomness) -> usize {
    assert!(!weights.is_empty(), "correlated_sample over empty weights");
    assert!(
        weights.iter().all(|w| *w >= 0.0 && w.is_finite()),
        "weights must be finite and nonnegative"
    );
    let total: f64 = weights.iter().sum();
    assert!(total > 0.0, "correlated_sample over all-zero weights");
    let mut stream = rng.named("corrsamp").stream();
    loop {
        let u = stream.index(weights.len());
        let v = stream.uniform();
        if v <= weights[u] / total {
            return u;
        }
    }
}

/// Exponential-mechanism weights `exp(−t·(err_i − min err))` (shifting by
/// the minimum is scale-invariant for selection and numerically safe).
pub fn selection_weights(errs: &[f64], t: f64) -> Vec<f64> {
    let min = errs.iter().copied().fold(f64::INFINITY, f64::min);
    errs.iter().map(|e| libm::exp(-t * (e - min))).collect()
}

/// Selection from precomputed empirical errors (the core of Alg. 7; used
/// directly by callers that obtain errors through sufficient statistics).
pub fn hypothesis_selection_from_errors(
    errs: &[f64],
    params: &SelectionParams,
    rng: &SharedRandomness,
) -> usize {
    assert!(!errs.is_empty(), "selection over empty candidate list");
    let weights = selection_weights(errs, params.temperature(errs.len()));
    correlated_sample(&weights, &rng.named("hypsel"))
}

/// Robustly replicable hypothesis selection over one shared dataset `S`.
/// Requires `|S| ≥ selection_sample_need(n, β, τ)`.
pub fn hypothesis_selection(
    hyps: &[Hypothesis],
    s: &Dataset,
    params: &SelectionParams,
    consts: &Constants,
    rng: &SharedRandomness,
) -> usize {
    assert!(!hyps.is_empty(), "selection over empty candidate list");
    let need = selection_sample_need(hyps.len(), params.beta, params.tau, consts);
    assert!(
        s.len() as u64 >= need,
        "selection dataset below its budget: {} < {need}",
        s.len()
    );
    let errs: Vec<f64> = hyps.iter().map(|h| s.empirical_error(h)).collect();
    hypothesis_selection_from_errors(&errs, params, rng)
}

/// Selection drawing its shared dataset from a budget-tracked supply,
/// using the task's sufficient-statistic representation.
pub fn hypothesis_selection_from_source(
    hyps: &[Hypothesis],
    data: &mut DataSource,
    params: &SelectionParams,
    consts: &Constants,
    rng: &SharedRandomness,
) -> usize {
    assert!(!hyps.is_empty(), "selection over empty candidate list");
    let need = selection_sample_need(hyps.len(), params.beta, params.tau, consts);
    let refs: Vec<&Hypothesis> = hyps.iter().collect();
    let errs = data.empirical_errors(need, &refs);
    hypothesis_selection_from_errors(&errs, params, rng)
}
