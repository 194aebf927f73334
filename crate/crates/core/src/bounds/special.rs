use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::outer::{FactorizationOuter, OuterTerms};
use super::{pos, RateValue};
use crate::channels::{less_noisy_at, less_noisy_verdict, LessNoisyVerdict, ParallelSourcesChannel, ProbeConfig, YHATS, YS, ZS};
use crate::error::{Error, Result};

/// Closed-form capacity cases of the parallel-sources model.
///
/// `P1`–`P3` are secret-key capacities, `P4`–`P6` secrecy capacities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SpecialCase {
    /// Eve's channel is less noisy; key from the sources only.
    P1,
    /// Eve's side information is less noisy; key from the channel only.
    P2,
    /// Alice and Bob share the same side information `Ŷs = Ys`.
    P3,
    /// Eve's channel is less noisy; secrecy from the source key only.
    P4,
    /// Eve's side information is less noisy; plain wiretap channel.
    P5,
    /// `Ŷs = Ys` and Bob's channel is less noisy.
    P6,
}

impl SpecialCase {
    pub const ALL: [SpecialCase; 6] = [Self::P1, Self::P2, Self::P3, Self::P4, Self::P5, Self::P6];

    /// Which auxiliaries the objective depends on: `(U, V and T)`.
    pub fn uses(&self) -> (bool, bool) {
        match self {
            Self::P1 | Self::P4 => (false, true),
            Self::P2 | Self::P3 | Self::P5 => (true, false),
            Self::P6 => (false, false),
        }
    }
}

impl fmt::Display for SpecialCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

impl FromStr for SpecialCase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|c| c.to_string().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Argument(format!("unknown case `{s}`, expected P1..P6")))
    }
}

/// The case objective evaluated at one point of the outer-bound family.
pub fn special_case_value(case: SpecialCase, ps: &ParallelSourcesChannel, f: &FactorizationOuter) -> Result<RateValue> {
    let t = OuterTerms::evaluate(ps, f)?;
    let key = t.i_v_ys_given_t - t.i_v_zs_given_t;
    let wiretap = t.i_u_yc - t.i_u_zc;
    Ok(match case {
        SpecialCase::P1 => RateValue::single(key, t.listing()).with_condition(t.i_v_yhats_given_ys, t.i_xc_yc),
        SpecialCase::P2 | SpecialCase::P5 => RateValue::single(wiretap, t.listing()),
        SpecialCase::P3 => RateValue::single(t.h_ys_given_zs + pos(wiretap), t.listing()),
        SpecialCase::P4 => RateValue::min2(key, t.i_xc_yc - t.i_v_yhats_given_ys, t.listing()),
        SpecialCase::P6 => RateValue::min2(t.i_xc_yc, t.i_xc_yc - t.i_xc_zc + t.h_ys_given_zs, t.listing()),
    })
}

/// How a case hypothesis was established.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum HypothesisStatus {
    /// Proven: by degradedness or by the structure of the source.
    Verified,
    /// Neither proven nor refuted by the probe.
    Unknown,
    /// Refuted or unproven, but the caller asserted it.
    Overridden { refuted: bool },
}

/// Check the hypothesis of `case` on `ps`.
///
/// A refuted hypothesis is an error unless `assume` is set, in which case the
/// status records the override.
pub fn check_hypothesis(
    case: SpecialCase,
    ps: &ParallelSourcesChannel,
    probe: &ProbeConfig,
    assume: bool,
) -> Result<HypothesisStatus> {
    let mut verdicts: Vec<(&str, LessNoisyVerdict)> = Vec::new();
    let same_side = ps.feedback_equals_bob_source();
    match case {
        SpecialCase::P1 | SpecialCase::P4 => {
            verdicts.push(("Eve's channel less noisy", less_noisy_verdict(&ps.eve_kernel(), &ps.bob_kernel(), probe)?));
        }
        SpecialCase::P2 | SpecialCase::P5 => {
            let anchor = ps.source().marginalize(&[YHATS])?;
            let to_ys = ps.source().conditional(&[YHATS], &[YS])?;
            let to_zs = ps.source().conditional(&[YHATS], &[ZS])?;
            verdicts.push(("Eve's side information less noisy", less_noisy_at(&to_zs, &to_ys, anchor.mass(), probe)?));
        }
        SpecialCase::P3 => {}
        SpecialCase::P6 => {
            verdicts.push(("Bob's channel less noisy", less_noisy_verdict(&ps.bob_kernel(), &ps.eve_kernel(), probe)?));
        }
    }
    let needs_same_side = matches!(case, SpecialCase::P3 | SpecialCase::P6);
    let refuted = (needs_same_side && !same_side) || verdicts.iter().any(|(_, v)| v.is_no());
    let proven = (!needs_same_side || same_side) && verdicts.iter().all(|(_, v)| v.is_yes());
    if assume {
        return Ok(if proven {
            HypothesisStatus::Verified
        } else {
            HypothesisStatus::Overridden { refuted }
        });
    }
    if needs_same_side && !same_side {
        return Err(Error::HypothesisViolated {
            case: case.to_string(),
            detail: "Yhats is not equal to Ys".into(),
            witness: None,
        });
    }
    for (what, v) in verdicts.iter() {
        if let LessNoisyVerdict::No { witness } = v {
            return Err(Error::HypothesisViolated {
                case: case.to_string(),
                detail: format!("{what} fails"),
                witness: Some(witness.clone()),
            });
        }
    }
    Ok(if proven {
        HypothesisStatus::Verified
    } else {
        HypothesisStatus::Unknown
    })
}
