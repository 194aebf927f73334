//! Pointwise rate evaluators.
//!
//! Each evaluator takes a channel and an explicit choice of the auxiliary
//! distributions and returns a [`RateValue`]. Nothing here searches; the
//! [`optimize`](crate::optimize) module maximizes these functions.
//!
//! Absent auxiliaries (`Q = ∅`, `T = ∅`, ...) are size-1 alphabets, so every
//! information term involving them is exactly zero.

mod erasure;
mod kg;
mod outer;
mod special;
mod state;

pub use erasure::{erasure_rates, ErasureRates};
pub use kg::{
    factorization_residual, kg_cardinality_bounds, rate_kg1, rate_kg2, sk_inner_rate, FactorizationKG, KgBounds,
    KgTerms,
};
pub use outer::{
    outer_cardinality_bounds, outer_secrecy_parallel, outer_sk_parallel, FactorizationOuter, OuterBounds, OuterTerms,
};
pub use special::{check_hypothesis, special_case_value, HypothesisStatus, SpecialCase};
pub use state::{causal_state_rate, perfect_feedback_rate, StateBranch, StateFactors, UPRIME};

use serde::{Deserialize, Serialize};

pub const Q: &str = "Q";
pub const U: &str = "U";
pub const V: &str = "V";
pub const T: &str = "T";

/// Slack allowed on the feasibility conditions to absorb rounding.
pub const CONDITION_TOLERANCE: f64 = 1e-12;

/// Which part of a rate expression determines its value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Binding {
    /// The first term of a two-term minimum.
    First,
    /// The second term of a two-term minimum.
    Second,
    /// Both terms of a minimum agree to within 1e-12.
    Both,
    /// Single-expression objective.
    Single,
    /// The expression was negative and the rate clamps to zero.
    Clamped,
    /// The feasibility condition fails; no rate.
    Infeasible,
}

/// A rate in bits together with how it was determined.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateValue {
    /// Nonnegative rate, absent when infeasible.
    pub bits: Option<f64>,
    /// The unclamped expression.
    pub raw: f64,
    pub binding: Binding,
    /// `rhs − lhs` of the feasibility condition, when the expression has one.
    pub condition_slack: Option<f64>,
    /// Named information terms that entered the expression.
    pub terms: Vec<(String, f64)>,
}

impl RateValue {
    pub fn feasible(&self) -> bool {
        self.bits.is_some()
    }

    /// Rate in bits, zero when infeasible.
    pub fn bits_or_zero(&self) -> f64 {
        self.bits.unwrap_or(0.0)
    }

    /// Value used by the optimizer: the unclamped expression when feasible, and a
    /// large negative number decreasing in the violation otherwise.
    pub fn search_score(&self) -> f64 {
        match self.bits {
            Some(_) => self.raw,
            None => -1e3 + self.condition_slack.unwrap_or(0.0),
        }
    }

    pub(crate) fn min2(first: f64, second: f64, terms: Vec<(String, f64)>) -> Self {
        let raw = first.min(second);
        let binding = if raw < 0.0 {
            Binding::Clamped
        } else if (first - second).abs() <= 1e-12 {
            Binding::Both
        } else if first < second {
            Binding::First
        } else {
            Binding::Second
        };
        Self {
            bits: Some(raw.max(0.0)),
            raw,
            binding,
            condition_slack: None,
            terms,
        }
    }

    pub(crate) fn single(raw: f64, terms: Vec<(String, f64)>) -> Self {
        Self {
            bits: Some(raw.max(0.0)),
            raw,
            binding: if raw < 0.0 { Binding::Clamped } else { Binding::Single },
            condition_slack: None,
            terms,
        }
    }

    /// Attach a feasibility condition `lhs ≤ rhs`.
    pub(crate) fn with_condition(mut self, lhs: f64, rhs: f64) -> Self {
        let slack = rhs - lhs;
        self.condition_slack = Some(slack);
        if slack < -CONDITION_TOLERANCE {
            self.bits = None;
            self.binding = Binding::Infeasible;
        }
        self
    }
}

pub(crate) fn terms(list: &[(&str, f64)]) -> Vec<(String, f64)> {
    list.iter().map(|(n, v)| (n.to_string(), *v)).collect()
}

/// `|x|⁺`.
pub fn pos(x: f64) -> f64 {
    x.max(0.0)
}
