//! Proper approximately replicable threshold learning.
//!
//! Two learners over real-line tasks:
//!
//! * [`threshold_learner`] — estimate K empirical quantiles of the
//!   marginal (accurate to a radius τ far below the replicability budget),
//!   then replicably select among the K+3 induced proper hypotheses with
//!   the exponential mechanism.
//! * [`realizable_apx_repl`] — the OPT gate: replicably estimate the best
//!   achievable empirical error; if it exceeds a shared random threshold
//!   `r ∈ [0.1α, 0.2α]` output the constant-plus hypothesis, otherwise the
//!   ERM fit. On realizable data this is accurate; on arbitrary data the
//!   paired outputs stay within distance max(γ, 4α).
//!
//! Quantile estimation at the reference budget needs ~10⁹ draws, so the
//! learner samples the K selected order statistics directly via Gamma
//! spacings of the uniform order statistics pushed through the exact
//! marginal inverse CDF — identical in distribution to sorting the full
//! sample, at O(K) cost. [`dkw_quantiles`] keeps the literal sort-based
//! computation for in-memory datasets.

use alloc::sync::Arc;
use alloc::vec::Vec;

use rand_distr::{Distribution, Gamma};

use crate::constants::{ceil_budget, Constants};
use crate::data::DataSource;
use crate::hypothesis::Hypothesis;
use crate::learner::{erm_finite_counts, erm_threshold, ArcLearner, Learner};
use crate::rng::SharedRandomness;
use crate::selection::{
    hypothesis_selection_from_errors, robustness_radius, selection_sample_need, SelectionParams,
};
use crate::task::{InvalidInput, Task};

/// Empirical quantile thresholds: sorts `xs`, discards the remainder
/// beyond the largest multiple of `k`, and returns `k+1` values with
/// entry 0 = `lo` and entry i = the (i·m/k)-th order statistic.
pub fn dkw_quantiles(xs: &[f64], k: usize, lo: f64) -> Vec<f64> {
    assert!(k > 0 && xs.len() >= k, "need at least k samples");
    let mut sorted: Vec<f64> = xs.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let block = sorted.len() / k;
    let mut out = Vec::with_capacity(k + 1);
    out.push(lo);
    for i in 1..=k {
        out.push(sorted[i * block - 1]);
    }
    out
}

/// Quantile-stage sample size `ceil(c·ln(1/β)/τ²)`.
pub fn dkw_sample_need(beta: f64, tau: f64, consts: &Constants) -> u64 {
    ceil_budget(consts.dkw_c * libm::log(1.0 / beta) / (tau * tau))
}

struct ThresholdLearner {
    k: u64,
    m_q: u64,
    sel_params: SelectionParams,
    sel_need: u64,
}

impl ThresholdLearner {
    /// K selected uniform order statistics at positions i·(m/K) out of m,
    /// via cumulative Gamma spacings (exact in distribution).
    fn quantile_fractions(&self, data: &mut DataSource) -> Vec<f64> {
        let mut st = data.stat_stream(self.m_q);
        let block = (self.m_q / self.k).max(1);
        let g_block = Gamma::new(block as f64, 1.0).unwrap();
        let mut cum = Vec::with_capacity(self.k as usize);
        let mut total = 0.0;
        for _ in 0..self.k {
            total += g_block.sample(&mut st);
            cum.push(total);
        }
        // Spacing after the last selected position (remainder discarded).
        total += Gamma::new(1.0, 1.0).unwrap().sample(&mut st);
        cum.iter().map(|c| c / total).collect()
    }
}

impl Learner for ThresholdLearner {
    fn learn(&self, data: &mut DataSource, rng: &SharedRandomness) -> Hypothesis {
        let task = data.task().as_threshold().expect("threshold task required");
        let cdf = task.cdf().clone();
        let fracs = self.quantile_fractions(data);
        let mut hyps = Vec::with_capacity(self.k as usize + 3);
        hyps.push(Hypothesis::ConstantMinus);
        hyps.push(Hypothesis::Threshold(cdf.lo()));
        for u in fracs {
            hyps.push(Hypothesis::Threshold(cdf.inverse(u)));
        }
        hyps.push(Hypothesis::ConstantPlus);
        let refs: Vec<&Hypothesis> = hyps.iter().collect();
        let errs = data.empirical_errors(self.sel_need, &refs);
        let idx = hypothesis_selection_from_errors(&errs, &self.sel_params, rng);
        hyps.into_iter().nth(idx).unwrap()
    }

    fn sample_need(&self) -> u64 {
        self.m_q + self.sel_need
    }
}

/// The proper (ρ, γ)-approximately replicable (α, β) threshold learner:
/// `K = ceil(3/α)` empirical quantiles (plus the domain-low threshold and
/// the two constant hypotheses), robustly replicable selection at slack
/// α/2, error β/2, replicability ρ/3, robustness
/// `τ = min(γ, ρα/(c·ln(K/β)))/2`. Requires β < ρ.
pub fn threshold_learner(
    alpha: f64,
    beta: f64,
    rho: f64,
    gamma: f64,
    consts: &Constants,
) -> Result<ArcLearner, InvalidInput> {
    if !(beta > 0.0 && beta < rho && rho < 1.0) {
        return Err(InvalidInput("need 0 < beta < rho < 1".into()));
    }
    if !(alpha > 0.0 && alpha < 1.0 && gamma > 0.0) {
        return Err(InvalidInput("need alpha in (0,1), gamma > 0".into()));
    }
    let k = ceil_budget(3.0 / alpha);
    let tau = gamma.min(robustness_radius(rho, alpha, k as usize, beta, consts)) / 2.0;
    let tau = tau.min(alpha / 2.0);
    let n = k as usize + 3;
    let sel_params = SelectionParams::new(alpha / 2.0, beta / 2.0, rho / 3.0, tau)?;
    Ok(Arc::new(ThresholdLearner {
        k,
        m_q: dkw_sample_need(beta, tau, consts),
        sel_params,
        sel_need: selection_sample_need(n, beta / 2.0, tau, consts),
    }))
}

/// The quantile robustness radius the learner uses (exposed for tests).
pub fn threshold_tau(alpha: f64, beta: f64, rho: f64, gamma: f64, consts: &Constants) -> f64 {
    let k = ceil_budget(3.0 / alpha);
    (gamma.min(robustness_radius(rho, alpha, k as usize, beta, consts)) / 2.0).min(alpha / 2.0)
}

/// The OPT-gate decision: keep the ERM fit iff `ÔPT ≤ r`.
pub fn opt_gate_keeps_erm(opt_hat: f64, r: f64) -> bool {
    opt_hat <= r
}

/// Realizable-case sample size
/// `ceil(c·(d_eff + ln(1/min(ρ,β)))/(ρ²·min(α,γ)))`.
pub fn realizable_sample_need(
    d_eff: u64,
    alpha: f64,
    beta: f64,
    rho: f64,
    gamma: f64,
    consts: &Constants,
) -> u64 {
    ceil_budget(
        consts.realizable_c * (d_eff as f64 + libm::log(1.0 / beta.min(rho)))
            / (rho * rho * alpha.min(gamma)),
    )
}

struct RealizableApxRepl {
    alpha: f64,
    m1: u64,
}

impl Learner for RealizableApxRepl {
    fn learn(&self, data: &mut DataSource, rng: &SharedRandomness) -> Hypothesis {
        let (opt_hat, erm) = match data.task() {
            Task::Finite(_) => {
                let counts = data.labeled_counts(self.m1);
                let total: u64 = counts.m();
                let mism: u64 = counts
                    .pos
                    .iter()
                    .zip(counts.neg.iter())
                    .map(|(p, n)| (*p).min(*n))
                    .sum();
                (mism as f64 / total as f64, erm_finite_counts(&counts))
            }
            Task::Threshold(t) => {
                let (lo, hi) = (t.cdf().lo(), t.cdf().hi());
                let s = data.labeled_points(self.m1);
                let erm = erm_threshold(&s, lo, hi);
                (s.empirical_error(&erm), erm)
            }
        };
        let r = rng
            .named("alg9")
            .named("cut")
            .stream()
            .uniform_in(0.1 * self.alpha, 0.2 * self.alpha);
        if opt_gate_keeps_erm(opt_hat, r) {
            erm
        } else {
            Hypothesis::ConstantPlus
        }
    }

    fn sample_need(&self) -> u64 {
        self.m1
    }
}

/// The realizable OPT-gate learner: fits the class's exact empirical
/// minimizer, compares `ÔPT` against a shared random threshold
/// `r ∈ [0.1α, 0.2α]` (substream ("alg9","cut")), and returns the ERM fit
/// when `ÔPT ≤ r`, constant-plus otherwise. On realizable data: error ≤ α
/// w.p. ≥ 1−β. On arbitrary data: paired outputs within classification
/// distance max(γ, 4α) except w.p. O(ρ), and the gate decision itself is
/// 11ρ-replicable. The finite brute-force minimizer caps at d ≤ 20.
pub fn realizable_apx_repl(
    task: &Task,
    alpha: f64,
    beta: f64,
    rho: f64,
    gamma: f64,
    consts: &Constants,
) -> Result<ArcLearner, InvalidInput> {
    let d_eff = match task {
        Task::Finite(f) => {
            if f.d() > 20 {
                return Err(InvalidInput("finite brute force capped at d <= 20".into()));
            }
            f.d() as u64
        }
        Task::Threshold(_) => 1,
    };
    if !(alpha > 0.0 && alpha < 1.0 && gamma > 0.0 && beta > 0.0 && beta < 1.0) {
        return Err(InvalidInput("alpha, beta in (0,1), gamma > 0".into()));
    }
    if !(rho > 0.0 && rho < 1.0) {
        return Err(InvalidInput("rho in (0,1)".into()));
    }
    Ok(Arc::new(RealizableApxRepl {
        alpha,
        m1: realizable_sample_need(d_eff, alpha, beta, rho, gamma, consts),
    }))
}
