//! The single table of leading constants.
//!
//! Every sample-size and repetition-count formula in the transforms has the
//! shape `ceil(c · f(parameters))` with `c` a "sufficiently large constant".
//! All of those constants live here so they are centrally tunable and every
//! module derives its budgets from one source of truth. `Constants::default()`
//! is the reference parameterization the test suite certifies.

/// Leading constants for every derived budget formula.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Constants {
    /// `C` in the agnostic ERM budget `ceil(C·(d + ln(1/β))/α²)`.
    pub erm_c: f64,
    /// `c_T` in Alg. 1's repetition count `T = ceil(c_T/ρ²)`.
    pub alg1_ct: f64,
    /// Multiplier in Alg. 2's run count `K = ceil(k·ln(1/β))`.
    pub alg2_k: f64,
    /// Constant in Alg. 2's test-block size `ceil(c·ln(2K/β)/α²)`.
    pub alg2_mtest: f64,
    /// `c_sel` in the selection budget `ceil(c_sel·ln(n/β)/τ²)`.
    pub sel_c: f64,
    /// `c_rob` in the robustness radius `ρα/(c_rob·ln(n/β))`.
    pub rob_c: f64,
    /// Multiplier in Alg. 3's run count `D = ceil(c·ln(1/β))`.
    pub alg3_d: f64,
    /// `c₁` in the tester's pair count `ceil(c₁·(1/(ρ²ε²) + ln(1/β)/ε²))`.
    pub tester_c1: f64,
    /// `c₂` in the tester's distance-block size `ceil(c₂·ln(m₁/β)/γ²)`.
    pub tester_c2: f64,
    /// Constant in cluster detection's draw count `ceil(c·ln(1/β)/ε²)`.
    pub cluster_c1: f64,
    /// Constant in cluster detection's shared-sample count `ceil(c·ln(n/β)/γ²)`.
    pub cluster_c2: f64,
    /// Multiplier in Alg. 5's string count `R = ceil(c·ln(1/ρ))`.
    pub alg5_r: f64,
    /// Alg. 5's inner accuracy confidence `β₁` as a multiplier of `β`.
    pub alg5_beta1: f64,
    /// Constant in the DKW quantile sample size `ceil(c·ln(1/β)/τ²)`.
    pub dkw_c: f64,
    /// `c` in Alg. 9's budget `ceil(c·(d_eff + ln(1/min(ρ,β)))/(ρ²·min(α,γ)))`.
    pub realizable_c: f64,
    /// Constant in the semi-replicable shared-pool size `ceil(c·(d_eff + ln(2/β))/α)`.
    pub pool_c: f64,
    /// Per-point sample-cap constant of the sign-one-way reduction.
    pub oneway_cap_c: f64,
}

impl Default for Constants {
    fn default() -> Self {
        Constants {
            erm_c: 8.0,
            alg1_ct: 4.0,
            alg2_k: 7.0,
            alg2_mtest: 32.0,
            sel_c: 64.0,
            rob_c: 12.0,
            alg3_d: 200.0,
            tester_c1: 16.0,
            tester_c2: 16.0,
            cluster_c1: 16.0,
            cluster_c2: 16.0,
            alg5_r: 4.0,
            alg5_beta1: 0.1,
            dkw_c: 16.0,
            realizable_c: 16.0,
            pool_c: 8.0,
            oneway_cap_c: 8.0,
        }
    }
}

/// `ceil(x)` as a u64 budget, at least 1.
pub(crate) fn ceil_budget(x: f64) -> u64 {
    let c = libm::ceil(x);
    if c < 1.0 {
        1
    } else {
        c as u64
    }
}
