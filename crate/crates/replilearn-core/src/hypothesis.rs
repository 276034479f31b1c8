//! Hypotheses over the two task domains.
//!
//! Labels are {−1, +1} throughout. A hypothesis is a finite labeling vector
//! (domain = point indices), a real threshold with strict semantics
//! `x ↦ +1 iff x > t`, a constant, or an aggregate predictor: a list of
//! sub-hypotheses voted against a shared cut `r`, `x ↦ +1` iff the fraction
//! of sub-hypotheses voting +1 strictly exceeds `r`. Aggregates are
//! first-class so improper outputs stay representable and evaluable.

use alloc::vec::Vec;

/// A ±1 label.
pub type Label = i8;

/// `+1` if the condition holds, else `−1`.
#[inline]
pub fn sign_label(plus: bool) -> Label {
    if plus {
        1
    } else {
        -1
    }
}

/// A domain element: an index into a finite task or a real for thresholds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Point {
    Index(usize),
    Real(f64),
}

/// A classifier. Structural equality (`PartialEq`) is the exact-output
/// identity used by the semi-replicability predicate: thresholds compare by
/// exact value, labelings by vector, aggregates by (subs, cut).
#[derive(Clone, Debug, PartialEq)]
pub enum Hypothesis {
    /// One ±1 label per point index of a finite task.
    FiniteLabeling(Vec<Label>),
    /// `x ↦ +1 iff x > t` (strict).
    Threshold(f64),
    ConstantPlus,
    ConstantMinus,
    /// Averaged predictor: `+1` iff the +1 vote fraction strictly exceeds `cut`.
    Aggregate { subs: Vec<Hypothesis>, cut: f64 },
}

impl Hypothesis {
    /// Evaluate at a domain point. Panics on a domain mismatch (contract
    /// violation: hypotheses are only ever applied to their own task).
    pub fn eval(&self, x: Point) -> Label {
        match self {
            Hypothesis::FiniteLabeling(labels) => match x {
                Point::Index(i) => labels[i],
                Point::Real(_) => panic!("finite labeling applied to a real point"),
            },
            Hypothesis::Threshold(t) => match x {
                Point::Real(v) => sign_label(v > *t),
                Point::Index(_) => panic!("threshold applied to an index point"),
            },
            Hypothesis::ConstantPlus => 1,
            Hypothesis::ConstantMinus => -1,
            Hypothesis::Aggregate { subs, cut } => {
                sign_label(self::positive_fraction(subs, x) > *cut)
            }
        }
    }

    /// The labels this hypothesis induces on the `d` points of a finite task.
    pub fn finite_labels(&self, d: usize) -> Vec<Label> {
        (0..d).map(|i| self.eval(Point::Index(i))).collect()
    }

    /// True iff the hypothesis is proper for its class (no aggregates).
    pub fn is_proper(&self) -> bool {
        !matches!(self, Hypothesis::Aggregate { .. })
    }

    /// Collect every threshold cut appearing in this hypothesis (recursing
    /// through aggregates). Used to build exact piecewise-constant partitions
    /// on threshold tasks.
    pub fn collect_cuts(&self, out: &mut Vec<f64>) {
        match self {
            Hypothesis::Threshold(t) => out.push(*t),
            Hypothesis::Aggregate { subs, .. } => {
                for h in subs {
                    h.collect_cuts(out);
                }
            }
            _ => {}
        }
    }
}

fn positive_fraction(subs: &[Hypothesis], x: Point) -> f64 {
    debug_assert!(!subs.is_empty(), "aggregate with no sub-hypotheses");
    let pos = subs.iter().filter(|h| h.eval(x) == 1).count();
    pos as f64 / subs.len() as f64
}
