//! Certification suite: one test per published acceptance criterion, each
//! printing a single PASS/FAIL line (run with `--nocapture` to see them).
//! Statistical tolerances are three binomial standard errors at the
//! configured trial counts; fixed seeds make every run reproducible.

use std::sync::Arc;

use replilearn::experiments::{run_bias_experiment, run_selection_experiment};
use replilearn::harness::{run_paired, PairedTrialConfig};
use replilearn::report::wilson_interval;
use replilearn_core::approximate::{
    build_approx_learner_with, replicable_stable_tester, ApproxMode, ApproxOverrides,
    ClusterBudget, ClusterParams, TesterBudget,
};
use replilearn_core::learner::{
    ArcLearner, ConstantLearner, ErmFinite, FairCoinLearner, UniformPickLearner,
};
use replilearn_core::pointwise::{basic_pointwise, boost_pointwise_error, PointwiseParams};
use replilearn_core::reductions::{apx_repl_hardness_amplification, sign_of, sign_one_way_error};
use replilearn_core::selection::correlated_sample;
use replilearn_core::semirepl::{build_cover, draw_pool, pool_size, semi_labeled_need_raw,
    semi_replicable};
use replilearn_core::thresholds::{realizable_apx_repl, threshold_learner};
use replilearn_core::Learner;
use replilearn_core::{
    Constants, DataSource, FiniteLabeledDistribution, Hypothesis, Label, PiecewiseCdf, Point,
    SharedRandomness, Task, ThresholdTask,
};

fn se(p: f64, n: u64) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

fn criterion(n: u32, name: &str, checks: &[(bool, String)]) {
    let pass = checks.iter().all(|c| c.0);
    let detail: Vec<String> = checks
        .iter()
        .map(|(ok, s)| if *ok { s.clone() } else { format!("FAILED<{s}>") })
        .collect();
    println!(
        "criterion {n:2}: {} — {name}: {}",
        if pass { "PASS" } else { "FAIL" },
        detail.join("; ")
    );
    assert!(pass, "criterion {n} ({name}) failed: {}", detail.join("; "));
}

fn task4() -> Task {
    Task::Finite(FiniteLabeledDistribution::uniform(vec![0.4, -0.4, 0.4, -0.4]).unwrap())
}

fn uniform_threshold_task(noise: f64) -> Task {
    let cdf = PiecewiseCdf::uniform(0.0, 1.0).unwrap();
    Task::Threshold(ThresholdTask::new(cdf, 0.37, noise).unwrap())
}

/// Reference wiring: the pointwise transform over an ERM base budgeted at
/// the transform's base accuracy level.
fn pointwise_wiring(d: usize, alpha: f64, beta: f64, rho: f64, consts: &Constants) -> ArcLearner {
    let params = PointwiseParams::new(alpha, beta, rho, consts.alg1_ct).unwrap();
    let level = params.base_level();
    basic_pointwise(Arc::new(ErmFinite::agnostic(d, level, level, consts)), params)
}

#[test]
fn criterion_01_pointwise_replicability() {
    let consts = Constants::default();
    let task = task4();
    let (alpha, beta, rho) = (0.1, 0.1, 0.2);
    let n = 5000u64;
    let report = run_paired(&PairedTrialConfig {
        task: &task,
        learner: pointwise_wiring(4, alpha, beta, rho, &consts),
        n_trials: n,
        root_seed: 1001,
        track_points: (0..4).map(Point::Index).collect(),
        gamma: None,
        excess_alpha: Some(alpha),
    });
    let max = report.pointwise_max().unwrap().estimate;
    let bound = rho + 3.0 * se(rho, n);
    criterion(
        1,
        "pointwise replicability on the d=4 reference task",
        &[(max <= bound, format!("max disagreement {max:.4} <= {bound:.4}"))],
    );
}

#[test]
fn criterion_02_vote_unbiasedness() {
    // The aggregate labels +1 exactly when the vote fraction clears a
    // uniform cut, so Pr[g(x)=+1] equals the base learner's +1-rate at x.
    let consts = Constants::default();
    let task = task4();
    let n = 20_000u64;
    let params = PointwiseParams::new(0.1, 0.1, 0.2, consts.alg1_ct).unwrap();

    // (a) fair-coin base: the +1-rate is exactly 1/2.
    let coin = basic_pointwise(Arc::new(FairCoinLearner { d: 4 }), params);
    let root = SharedRandomness::from_seed(1002);
    let plus = (0..n)
        .filter(|t| {
            let mut d = DataSource::fresh(&task, root.substream("data", *t));
            coin.learn(&mut d, &root.substream("r", *t)).eval(Point::Index(0)) == 1
        })
        .count() as f64
        / n as f64;
    let dev_coin = (plus - 0.5).abs();

    // (b) small-budget ERM base: compare against the empirical base rate.
    let base = Arc::new(ErmFinite::with_budget(4, 30));
    let g = basic_pointwise(base.clone(), params);
    let root = SharedRandomness::from_seed(1003);
    let g_plus = (0..n)
        .filter(|t| {
            let mut d = DataSource::fresh(&task, root.substream("data", *t));
            g.learn(&mut d, &root.substream("r", *t)).eval(Point::Index(0)) == 1
        })
        .count() as f64
        / n as f64;
    let base_plus = (0..n)
        .filter(|t| {
            let mut d = DataSource::fresh(&task, root.substream("base", *t));
            base.learn(&mut d, &root.substream("br", *t)).eval(Point::Index(0)) == 1
        })
        .count() as f64
        / n as f64;
    let dev_erm = (g_plus - base_plus).abs();
    criterion(
        2,
        "aggregate +1-rate is unbiased for the base rate",
        &[
            (dev_coin <= 0.02, format!("fair-coin |{plus:.4} - 0.5| <= 0.02")),
            (dev_erm <= 0.02, format!("erm |{g_plus:.4} - {base_plus:.4}| <= 0.02")),
        ],
    );
}

#[test]
fn criterion_03_boosted_confidence() {
    let consts = Constants::default();
    let task = task4();
    let (alpha, beta, rho) = (0.15, 0.01, 0.2);
    let n = 3000u64;
    let inner = pointwise_wiring(4, alpha / 2.0, rho, rho, &consts);
    let learner = boost_pointwise_error(inner, alpha, beta, &consts);
    let report = run_paired(&PairedTrialConfig {
        task: &task,
        learner,
        n_trials: n,
        root_seed: 1004,
        track_points: (0..4).map(Point::Index).collect(),
        gamma: None,
        excess_alpha: Some(alpha),
    });
    let fail_rate = 1.0 - report.within_alpha.unwrap().estimate;
    let fail_bound = beta + 3.0 * se(beta, 2 * n);
    let max = report.pointwise_max().unwrap().estimate;
    let dis_bound = 2.0 * rho + 3.0 * se(2.0 * rho, n);
    criterion(
        3,
        "confidence boosting at beta=0.01",
        &[
            (fail_rate <= fail_bound, format!("excess>alpha rate {fail_rate:.4} <= {fail_bound:.4}")),
            (max <= dis_bound, format!("max disagreement {max:.4} <= {dis_bound:.4}")),
        ],
    );
}

#[test]
fn criterion_04_hypothesis_selection() {
    let n = 2000u64;
    let out = run_selection_experiment(n, 1005);
    let correct = out.correct as f64 / n as f64;
    let agree = out.agree as f64 / n as f64;
    let (beta, rho) = (0.05, 0.2);
    let c_bound = 1.0 - beta - 3.0 * se(beta, n);
    let a_bound = 1.0 - (rho + beta) - 3.0 * se(rho + beta, n);
    criterion(
        4,
        "robust hypothesis selection, n=10 reference configuration",
        &[
            (correct >= c_bound, format!("optimal-index rate {correct:.4} >= {c_bound:.4}")),
            (agree >= a_bound, format!("perturbed agreement {agree:.4} >= {a_bound:.4}")),
            (out.tail_violations == 0, format!("{} tail violations", out.tail_violations)),
        ],
    );
}

#[test]
fn criterion_05_correlated_sampling() {
    // Identical-input determinism.
    let rng = SharedRandomness::from_seed(1006);
    let deterministic = (0..10_000u64).all(|t| {
        let r = rng.substream("det", t);
        let w = [0.3, 1.2, 0.7, 0.1];
        correlated_sample(&w, &r) == correlated_sample(&w, &r)
    });

    // Collision rate <= 2 TV + 3 SE at pinned TV levels.
    let mut collisions_ok = Vec::new();
    for &tv in &[0.01f64, 0.05, 0.1, 0.3] {
        let p = [0.4, 0.4, 0.1, 0.1];
        let q = [0.4 - tv / 2.0, 0.4 - tv / 2.0, 0.1 + tv / 2.0, 0.1 + tv / 2.0];
        let n = 20_000u64;
        let mismatches = (0..n)
            .filter(|t| {
                let r = rng.substream("tv", (tv * 1000.0) as u64 + t * 4096);
                correlated_sample(&p, &r) != correlated_sample(&q, &r)
            })
            .count() as f64
            / n as f64;
        let bound = 2.0 * tv + 3.0 * se(2.0 * tv, n);
        collisions_ok.push((
            mismatches <= bound,
            format!("TV={tv}: mismatch {mismatches:.4} <= {bound:.4}"),
        ));
    }

    // Chi-square marginal fit at n = 32 (critical value 61.098 at 1e-3).
    let mut st = rng.named("weights").stream();
    let weights: Vec<f64> = (0..32).map(|_| 0.1 + st.uniform()).collect();
    let total: f64 = weights.iter().sum();
    let draws = 20_000u64;
    let mut counts = [0u64; 32];
    for t in 0..draws {
        counts[correlated_sample(&weights, &rng.substream("chi", t))] += 1;
    }
    let chi2: f64 = counts
        .iter()
        .zip(&weights)
        .map(|(c, w)| {
            let expect = draws as f64 * w / total;
            (*c as f64 - expect).powi(2) / expect
        })
        .sum();

    let mut checks = vec![(deterministic, "deterministic over 10^4 calls".to_owned())];
    checks.extend(collisions_ok);
    checks.push((chi2 <= 61.098, format!("chi2 {chi2:.2} <= 61.098 (df=31)")));
    criterion(5, "correlated sampling", &checks);
}

#[test]
fn criterion_06_approximate_pipelines() {
    // Desk-scale configuration: the reference const_gamma budgets are
    // computationally infeasible (the tester alone needs ~10^10 learner
    // pairs), so both pipelines run at alpha=0.3, beta=0.3, rho=0.5,
    // gamma=0.4 with explicit scaled-down inner budgets while asserting
    // the same distance and error contracts.
    let consts = Constants::default();
    let task = task4();
    let (alpha, beta, rho, gamma) = (0.3, 0.3, 0.5, 0.4);
    let factory =
        |a: f64, b: f64| -> ArcLearner { Arc::new(ErmFinite::agnostic(4, a, b, &consts)) };
    let mut checks = Vec::new();
    for (mode, label, n, overrides) in [
        (ApproxMode::ConstAlpha, "const_alpha", 400u64, ApproxOverrides::default()),
        (
            ApproxMode::ConstGamma,
            "const_gamma",
            300,
            ApproxOverrides {
                inner_rho: Some(0.3),
                tester: Some(TesterBudget { m1: 40, m2: 40 }),
                cluster: Some(ClusterBudget { n: 40, m: 40 }),
            },
        ),
    ] {
        let learner = build_approx_learner_with(
            mode, &factory, alpha, beta, rho, gamma, &consts, &overrides,
        );
        let report = run_paired(&PairedTrialConfig {
            task: &task,
            learner,
            n_trials: n,
            root_seed: 1007,
            track_points: Vec::new(),
            gamma: Some(gamma),
            excess_alpha: Some(alpha),
        });
        let far = 1.0 - report.within_gamma.unwrap().estimate;
        let far_bound = rho + 3.0 * se(rho, n);
        let bad = 1.0 - report.within_alpha.unwrap().estimate;
        let bad_bound = beta + 3.0 * se(beta, 2 * n);
        checks.push((far <= far_bound, format!("{label} dist>gamma {far:.4} <= {far_bound:.4}")));
        checks.push((bad <= bad_bound, format!("{label} excess>alpha {bad:.4} <= {bad_bound:.4}")));
    }

    // Tester completeness, soundness, and decision replicability on
    // constructed instances at explicit desk budgets.
    let params = ClusterParams::new(0.8, 0.3, 0.05, 0.1).unwrap();
    let budget = TesterBudget { m1: 200, m2: 120 };
    let point_mass: ArcLearner = Arc::new(ConstantLearner(Hypothesis::ConstantPlus));
    let split: ArcLearner = Arc::new(UniformPickLearner {
        choices: vec![Hypothesis::ConstantPlus, Hypothesis::ConstantMinus],
    });
    let root = SharedRandomness::from_seed(1008);
    let n_t = 200u64;
    let mut accept = 0u64;
    let mut reject = 0u64;
    let mut agree = 0u64;
    for t in 0..n_t {
        let string = root.substream("string", t);
        let shared = root.substream("shared", t);
        let run = |a: &ArcLearner, tag: u64| {
            let mut data = DataSource::fresh(&task, root.substream("data", t * 8 + tag));
            replicable_stable_tester(a.as_ref(), &string, &mut data, &params, &budget, &shared)
                .accept
        };
        if run(&point_mass, 0) {
            accept += 1;
        }
        if !run(&split, 1) {
            reject += 1;
        }
        let pair_agrees =
            run(&point_mass, 2) == run(&point_mass, 3) && run(&split, 4) == run(&split, 5);
        if pair_agrees {
            agree += 1;
        }
    }
    let (beta_t, rho_t) = (0.1, 0.2);
    for (count, label, level) in [
        (accept, "completeness", beta_t),
        (reject, "soundness", beta_t),
        (agree, "replicability", rho_t),
    ] {
        let rate = count as f64 / n_t as f64;
        let bound = 1.0 - level - 3.0 * se(level, n_t);
        checks.push((rate >= bound, format!("tester {label} {rate:.4} >= {bound:.4}")));
    }
    criterion(6, "approximate pipelines and stability tester", &checks);
}

#[test]
fn criterion_07_threshold_learner() {
    let consts = Constants::default();
    let task = uniform_threshold_task(0.1);
    let (alpha, gamma, rho, beta) = (0.1, 0.15, 0.3, 0.05);
    let learner = threshold_learner(alpha, beta, rho, gamma, &consts).unwrap();
    let n = 1000u64;
    let root = SharedRandomness::from_seed(1009);
    let opt = task.opt_error();
    let (mut accurate, mut close, mut proper) = (0u64, 0u64, 0u64);
    for t in 0..n {
        let r = root.substream("r", t);
        let run = |half: u64| {
            let mut d = DataSource::fresh(&task, root.substream("data", t * 2 + half));
            learner.learn(&mut d, &r)
        };
        let (h1, h2) = (run(0), run(1));
        if task.true_error(&h1) - opt <= alpha {
            accurate += 1;
        }
        if task.classification_distance(&h1, &h2) <= gamma {
            close += 1;
        }
        if h1.is_proper() && h2.is_proper() {
            proper += 1;
        }
    }
    let acc = accurate as f64 / n as f64;
    let cls = close as f64 / n as f64;
    let acc_bound = (1.0 - beta) - 3.0 * se(beta, n);
    let cls_bound = (1.0 - rho) - 3.0 * se(rho, n);

    // DKW sup-gap tail at a pinned desk configuration.
    let (m, tau) = (500usize, 0.08f64);
    let dkw_trials = 2000u64;
    let mut violations = 0u64;
    for t in 0..dkw_trials {
        let mut st = root.substream("dkw", t).stream();
        let mut xs: Vec<f64> = (0..m).map(|_| st.uniform()).collect();
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let sup = xs
            .iter()
            .enumerate()
            .map(|(i, x)| {
                (x - i as f64 / m as f64).max((i as f64 + 1.0) / m as f64 - x)
            })
            .fold(0.0f64, f64::max);
        if sup > tau {
            violations += 1;
        }
    }
    let dkw_rate = violations as f64 / dkw_trials as f64;
    let dkw_bound = 2.0 * (-(m as f64) * tau * tau).exp() + 3.0 * se(0.08, dkw_trials);
    criterion(
        7,
        "proper replicable threshold learner",
        &[
            (acc >= acc_bound, format!("accuracy {acc:.4} >= {acc_bound:.4}")),
            (cls >= cls_bound, format!("gamma-closeness {cls:.4} >= {cls_bound:.4}")),
            (proper == n, format!("properness {proper}/{n}")),
            (dkw_rate <= dkw_bound, format!("DKW violations {dkw_rate:.4} <= {dkw_bound:.4}")),
        ],
    );
}

#[test]
fn criterion_08_realizable_gate() {
    let consts = Constants::default();
    // Realizable regime: noiseless threshold task.
    let task = uniform_threshold_task(0.0);
    let (alpha, beta, rho, gamma) = (0.2, 0.1, 0.1, 0.2);
    let learner = realizable_apx_repl(&task, alpha, beta, rho, gamma, &consts).unwrap();
    let n = 500u64;
    let root = SharedRandomness::from_seed(1010);
    let good = (0..n)
        .filter(|t| {
            let mut d = DataSource::fresh(&task, root.substream("data", *t));
            let h = learner.learn(&mut d, &root.substream("r", *t));
            h.is_proper() && task.true_error(&h) <= alpha
        })
        .count() as f64
        / n as f64;
    let good_bound = (1.0 - beta) - 3.0 * se(beta, n);

    // Boundary regime: OPT engineered to 0.15 alpha, inside the random
    // acceptance window [0.1 alpha, 0.2 alpha].
    let boundary = Task::Finite(FiniteLabeledDistribution::uniform(vec![0.88, 1.0]).unwrap());
    let rho_b = 0.05;
    let gate = realizable_apx_repl(&boundary, alpha, beta, rho_b, gamma, &consts).unwrap();
    let nb = 400u64;
    let disagreements = (0..nb)
        .filter(|t| {
            let r = root.substream("br", *t);
            let run = |half: u64| {
                let mut d = DataSource::fresh(&boundary, root.substream("bd", t * 2 + half));
                matches!(gate.learn(&mut d, &r), Hypothesis::ConstantPlus)
            };
            run(0) != run(1)
        })
        .count() as f64
        / nb as f64;
    let dis_bound = 11.0 * rho_b + 3.0 * se(11.0 * rho_b, nb);
    criterion(
        8,
        "realizable accept/reject gate",
        &[
            (good >= good_bound, format!("accept-and-accurate {good:.4} >= {good_bound:.4}")),
            (
                disagreements <= dis_bound,
                format!("boundary decision disagreement {disagreements:.4} <= {dis_bound:.4}"),
            ),
        ],
    );
}

#[test]
fn criterion_09_semi_replicable() {
    let consts = Constants::default();
    let task = uniform_threshold_task(0.0);
    let (alpha, beta, rho) = (0.1, 0.05, 0.2);
    let learner = semi_replicable(&task, None, alpha, beta, rho, &consts).unwrap();
    let n = 1000u64;
    let report = run_paired(&PairedTrialConfig {
        task: &task,
        learner,
        n_trials: n,
        root_seed: 1011,
        track_points: Vec::new(),
        gamma: None,
        excess_alpha: Some(alpha),
    });
    let eq = report.exact_equality.estimate;
    let eq_bound = 0.8 - 3.0 * se(0.2, n);
    let acc = report.within_alpha.unwrap().estimate;
    let acc_bound = 0.95 - 3.0 * se(0.05, 2 * n);

    // Cover-size identity: distinct pool values + 1, exactly, every trial.
    let m_u = pool_size(1, alpha, beta, &consts);
    let root = SharedRandomness::from_seed(1012);
    let identity = (0..200u64).all(|t| {
        let pool = draw_pool(&task, &root.substream("r", t), m_u);
        let mut xs: Vec<f64> = pool
            .points
            .iter()
            .map(|p| match p {
                Point::Real(x) => *x,
                Point::Index(_) => unreachable!(),
            })
            .collect();
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        xs.dedup();
        build_cover(&pool, &task).unwrap().len() == xs.len() + 1
    });
    criterion(
        9,
        "semi-replicable threshold learner",
        &[
            (eq >= eq_bound, format!("exact equality {eq:.4} >= {eq_bound:.4}")),
            (acc >= acc_bound, format!("accuracy {acc:.4} >= {acc_bound:.4}")),
            (identity, "cover size == distinct pool values + 1 on all trials".into()),
        ],
    );
}

#[test]
fn criterion_10_reductions() {
    let consts = Constants::default();
    // Bias planting: wrong-sign rate at |p| = alpha.
    let (alpha, rho) = (0.3, 0.3);
    let learner = pointwise_wiring(7, 0.03, 0.05, rho, &consts);
    let n = 400u64;
    let mut checks = Vec::new();
    for (tag, p, seed) in [("+alpha", alpha, 1013u64), ("-alpha", -alpha, 1014)] {
        let (_agree, wrong, _caps) =
            run_bias_experiment(learner.as_ref(), 7, alpha, rho, p, n, seed);
        let rate = wrong as f64 / n as f64;
        let bound = 0.03 + 3.0 * se(0.03, n);
        checks.push((rate <= bound, format!("wrong sign at p={tag}: {rate:.4} <= {bound:.4}")));
    }

    // Hardness amplification over the bias meta-distribution.
    let (d, a_amp, rho_amp, gamma_amp) = (8usize, 0.2, 0.2, 0.1);
    let a0 = pointwise_wiring(d, 0.1, 0.1, rho_amp, &consts);
    let root = SharedRandomness::from_seed(1015);
    let na = 400u64;
    let (mut agree, mut big_err) = (0u64, 0u64);
    for t in 0..na {
        let sh = root.substream("sh", t);
        let mut meta = root.substream("meta", t).named("p").stream();
        let p = meta.uniform_in(-a_amp, a_amp);
        let o1 = apx_repl_hardness_amplification(
            a0.as_ref(), d, a_amp, rho_amp, p, &sh, &root.substream("d1", t),
        );
        let o2 = apx_repl_hardness_amplification(
            a0.as_ref(), d, a_amp, rho_amp, p, &sh, &root.substream("d2", t),
        );
        if o1.answer == o2.answer {
            agree += 1;
        }
        if o1.err_r > 100.0 * a_amp {
            big_err += 1;
        }
    }
    let ag = agree as f64 / na as f64;
    let ag_bound = 1.0 - (2.0 * rho_amp + gamma_amp) - 3.0 * se(2.0 * rho_amp + gamma_amp, na);
    let be = big_err as f64 / na as f64;
    let be_bound = 0.1 + 3.0 * se(0.1, na);
    checks.push((ag >= ag_bound, format!("amplified agreement {ag:.4} >= {ag_bound:.4}")));
    checks.push((be <= be_bound, format!("err_r>100alpha rate {be:.4} <= {be_bound:.4}")));

    // Sign-one-way error identity on random instances, exactly.
    let mut st = root.named("inst").stream();
    let identity = (0..100).all(|_| {
        let dd = 2 + st.index(9);
        let p: Vec<f64> = (0..dd).map(|_| st.uniform_in(-1.0, 1.0)).collect();
        let labels: Vec<Label> = (0..dd).map(|_| if st.bernoulli(0.5) { 1 } else { -1 }).collect();
        let task = Task::Finite(FiniteLabeledDistribution::uniform(p.clone()).unwrap());
        let h = Hypothesis::FiniteLabeling(labels.clone());
        let excess = task.true_error(&h) - task.opt_error();
        let direct: f64 = labels
            .iter()
            .zip(&p)
            .filter(|(l, pi)| **l != sign_of(**pi))
            .map(|(_, pi)| 2.0 * pi.abs() / dd as f64)
            .sum();
        (sign_one_way_error(&labels, &p) - 2.0 * excess).abs() < 1e-12
            && (direct - 2.0 * excess).abs() < 1e-12
    });
    checks.push((identity, "sign-one-way error identity exact on 100 instances".into()));
    criterion(10, "lower-bound reductions run forward", &checks);
}

#[test]
fn criterion_11_scaling() {
    let consts = Constants::default();
    // 1/sqrt(T) disagreement scaling with a fair-coin base.
    let task = Task::Finite(FiniteLabeledDistribution::uniform(vec![0.0]).unwrap());
    let mut points = Vec::new();
    for rho in [0.5f64, 0.25, 0.125, 0.0625] {
        let params = PointwiseParams::new(0.2, 0.2, rho, consts.alg1_ct).unwrap();
        let t_budget = params.t();
        assert_eq!(t_budget, (consts.alg1_ct / (rho * rho)).ceil() as u64);
        let learner = basic_pointwise(Arc::new(FairCoinLearner { d: 1 }), params);
        let n = 3000u64;
        let root = SharedRandomness::from_seed(1016 + t_budget);
        let disagree = (0..n)
            .filter(|t| {
                let r = root.substream("r", *t);
                let run = |half: u64| {
                    let mut d = DataSource::fresh(&task, root.substream("data", t * 2 + half));
                    learner.learn(&mut d, &r).eval(Point::Index(0))
                };
                run(0) != run(1)
            })
            .count() as f64
            / n as f64;
        points.push(((t_budget as f64).ln(), disagree.ln()));
    }
    let k = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / k;
    let my = points.iter().map(|p| p.1).sum::<f64>() / k;
    let slope = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>()
        / points.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();

    // Deterministic budget identities.
    let t_quadratic = (0..5).all(|i| {
        let rho = 0.4 / (1 << i) as f64;
        let t1 = PointwiseParams::new(0.2, 0.2, rho, consts.alg1_ct).unwrap().t();
        let t2 = PointwiseParams::new(0.2, 0.2, rho / 2.0, consts.alg1_ct).unwrap().t();
        t2 == 4 * t1
    });
    let raw = semi_labeled_need_raw(100, 0.1, 0.05, 0.2, &consts);
    let raw4 = semi_labeled_need_raw(100, 0.1, 0.05, 0.05, &consts);
    let sixteen = raw4 / raw == 16.0;
    criterion(
        11,
        "scaling laws and budget identities",
        &[
            ((slope + 0.5).abs() <= 0.15, format!("log-log slope {slope:.3} in -0.5 +- 0.15")),
            (t_quadratic, "T(rho/2) == 4 T(rho) exactly".into()),
            (sixteen, "semi-replicable budget grows 16x under rho/4".into()),
        ],
    );
}

#[test]
fn criterion_12_infrastructure() {
    // Deterministic selftest CSV across executions and worker counts.
    let bin = env!("CARGO_BIN_EXE_replilearn");
    let run = |extra: &[&str]| {
        let out = std::process::Command::new(bin)
            .args(["selftest", "--quick", "--seed", "42"])
            .args(extra)
            .output()
            .expect("selftest run");
        assert!(out.status.success(), "selftest exited {:?}", out.status);
        out.stdout
    };
    let a = run(&[]);
    let b = run(&[]);
    let w1 = run(&["--workers", "1"]);
    let w8 = run(&["--workers", "8"]);
    let deterministic = a == b && w1 == w8 && a == w1;

    // Wilson interval coverage on known Bernoulli streams.
    let root = SharedRandomness::from_seed(1017);
    let coverage_ok = [0.01f64, 0.2, 0.5].iter().enumerate().all(|(pi, p)| {
        let meta = 5000u64;
        let per = 500u64;
        let covered = (0..meta)
            .filter(|t| {
                let mut st = root.substream("cov", pi as u64 * meta + t).stream();
                let k = (0..per).filter(|_| st.bernoulli(*p)).count() as u64;
                let (lo, hi) = wilson_interval(k, per);
                (lo..=hi).contains(p)
            })
            .count() as f64
            / meta as f64;
        (0.93..=0.97).contains(&covered)
    });
    criterion(
        12,
        "infrastructure determinism and interval coverage",
        &[
            (deterministic, "selftest CSV byte-identical across runs and workers {1,8}".into()),
            (coverage_ok, "Wilson coverage within [0.93, 0.97] at p in {0.01, 0.2, 0.5}".into()),
        ],
    );
}
