//! Stable CSV emission.
//!
//! One fixed header; quantities a subcommand does not measure are emitted
//! as empty fields, never as dropped columns. Floats carry 17 significant
//! digits so determinism is byte-testable.

use std::io::Write;

pub const HEADER: &str = "experiment_id,subcommand,d,alpha,beta,rho,gamma,n_trials,seed,\
samples_labeled,samples_shared,est_exact_repl,est_approx_repl,est_pointwise_max,\
excess_err_p90,opt,ci_lo,ci_hi";

/// One emitted experiment row.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Row {
    pub experiment_id: String,
    pub subcommand: String,
    pub d: Option<u64>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub rho: Option<f64>,
    pub gamma: Option<f64>,
    pub n_trials: u64,
    pub seed: u64,
    pub samples_labeled: u64,
    pub samples_shared: u64,
    pub est_exact_repl: Option<f64>,
    pub est_approx_repl: Option<f64>,
    pub est_pointwise_max: Option<f64>,
    pub excess_err_p90: Option<f64>,
    pub opt: Option<f64>,
    /// Wilson 95% interval of the subcommand's headline estimate.
    pub ci_lo: Option<f64>,
    pub ci_hi: Option<f64>,
}

fn fmt_f64(v: f64) -> String {
    format!("{:.16e}", v)
}

fn opt_f(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

fn opt_u(v: Option<u64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl Row {
    pub fn to_line(&self) -> String {
        [
            self.experiment_id.clone(),
            self.subcommand.clone(),
            opt_u(self.d),
            opt_f(self.alpha),
            opt_f(self.beta),
            opt_f(self.rho),
            opt_f(self.gamma),
            self.n_trials.to_string(),
            self.seed.to_string(),
            self.samples_labeled.to_string(),
            self.samples_shared.to_string(),
            opt_f(self.est_exact_repl),
            opt_f(self.est_approx_repl),
            opt_f(self.est_pointwise_max),
            opt_f(self.excess_err_p90),
            opt_f(self.opt),
            opt_f(self.ci_lo),
            opt_f(self.ci_hi),
        ]
        .join(",")
    }
}

/// Write header plus rows, UTF-8, LF endings.
pub fn write_csv(rows: &[Row], out: &mut dyn Write) -> std::io::Result<()> {
    writeln!(out, "{HEADER}")?;
    for row in rows {
        writeln!(out, "{}", row.to_line())?;
    }
    Ok(())
}
