use serde::{Deserialize, Serialize};

use super::{pos, terms, RateValue, U};
use crate::channels::{StateChannel, WtgfChannel, S, X};
use crate::error::{Error, Result};
use crate::probkit::{JointPmf, Kernel};

pub const UPRIME: &str = "Uprime";

/// Secrecy rate with perfect output feedback for a given `p(u, x)` over `(U, X)`.
pub fn perfect_feedback_rate(ch: &WtgfChannel, ux: &JointPmf) -> Result<RateValue> {
    if !ch.has_output_feedback() {
        return Err(Error::Model("perfect output feedback needs Yhat = Y".into()));
    }
    if ux.names() != [U, X] {
        return Err(Error::Model("input distribution must be over (U, X)".into()));
    }
    let joint = ux.compose(ch.kernel())?;
    let m = joint.measures();
    // positions: U X Y Yhat Z
    let (mu, my, mz) = (1, 4, 16);
    let iuy = m.mi(mu, my, 0);
    let iuz = m.mi(mu, mz, 0);
    let h = m.cond_entropy(my, mu | mz);
    Ok(RateValue::min2(
        iuy,
        pos(iuy - iuz) + h,
        terms(&[("I(U;Y)", iuy), ("I(U;Z)", iuz), ("H(Y|UZ)", h)]),
    ))
}

/// Which of the two causal-state strategies to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StateBranch {
    One,
    Two,
}

/// Auxiliary distributions for the causal-state secrecy rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum StateFactors {
    /// `p(u)`, a deterministic map `u′(u, s)` and `p(x | u′, s)`.
    One {
        pu: JointPmf,
        uprime: Kernel,
        x_given_uprime_s: Kernel,
    },
    /// `p(u)` and `p(x | u, s)`.
    Two { pu: JointPmf, x_given_u_s: Kernel },
}

impl StateFactors {
    pub fn branch(&self) -> StateBranch {
        match self {
            Self::One { .. } => StateBranch::One,
            Self::Two { .. } => StateBranch::Two,
        }
    }
}

/// Secrecy rate of one causal-state strategy.
///
/// Branch one: `min{I(U;YS) − I(U;ZS) + H(S|Z), I(U;YS)}`.
/// Branch two: `min{H(S|ZU), I(U;Y|S)}`.
pub fn causal_state_rate(sc: &StateChannel, f: &StateFactors) -> Result<RateValue> {
    match f {
        StateFactors::One {
            pu,
            uprime,
            x_given_uprime_s,
        } => {
            if !uprime.is_deterministic() {
                return Err(Error::Argument("the map u'(u, s) must be deterministic".into()));
            }
            if pu.names() != [U]
                || uprime.from().iter().map(|v| v.name.as_str()).ne([U, S])
                || uprime.to().len() != 1
            {
                return Err(Error::Model("expected p(U) and u'(U, S)".into()));
            }
            let joint = pu
                .product(sc.state())?
                .compose(uprime)?
                .compose(x_given_uprime_s)?
                .compose(sc.kernel())?;
            // positions: U S U' X Y Z
            let m = joint.measures();
            let (mu, ms, my, mz) = (1, 2, 16, 32);
            let iuys = m.mi(mu, my | ms, 0);
            let iuzs = m.mi(mu, mz | ms, 0);
            let hsz = m.cond_entropy(ms, mz);
            Ok(RateValue::min2(
                iuys - iuzs + hsz,
                iuys,
                terms(&[("I(U;YS)", iuys), ("I(U;ZS)", iuzs), ("H(S|Z)", hsz)]),
            ))
        }
        StateFactors::Two { pu, x_given_u_s } => {
            if pu.names() != [U] {
                return Err(Error::Model("expected p(U)".into()));
            }
            let joint = pu.product(sc.state())?.compose(x_given_u_s)?.compose(sc.kernel())?;
            // positions: U S X Y Z
            let m = joint.measures();
            let (mu, ms, my, mz) = (1, 2, 8, 16);
            let hszu = m.cond_entropy(ms, mz | mu);
            let iuy_s = m.mi(mu, my, ms);
            Ok(RateValue::min2(hszu, iuy_s, terms(&[("H(S|ZU)", hszu), ("I(U;Y|S)", iuy_s)])))
        }
    }
}
