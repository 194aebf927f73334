use serde::{Deserialize, Serialize};

use crate::bounds::{FactorizationKG, Q, T, U, V};
use crate::channels::{WtgfChannel, X, Y, YHAT, Z};
use crate::error::{Error, Result};

/// Which of the two KG strategies a scheme implements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    /// Wiretap layer plus feedback key; the `q` layer and index recombination are present.
    Kg1,
    /// Fully encrypted message, `Q = ∅`, `t` superimposed on `u`, no recombination.
    Kg2,
}

/// Rate slacks. Defaults `ε1 = ε2 = 0.10`, `ε̃1 = ε̃2 = 0.15`, `ε′ = 0.05`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Slacks {
    pub eps1: f64,
    pub eps1_tilde: f64,
    pub eps2: f64,
    pub eps2_tilde: f64,
    pub eps_prime: f64,
}

impl Default for Slacks {
    fn default() -> Self {
        Self {
            eps1: 0.10,
            eps1_tilde: 0.15,
            eps2: 0.10,
            eps2_tilde: 0.15,
            eps_prime: 0.05,
        }
    }
}

/// Rates (bits per symbol) of the block-Markov scheme at blocklength `n` over `b` blocks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeRates {
    pub strategy: Strategy,
    pub n: usize,
    pub b: usize,
    pub s1: f64,
    pub s1_tilde: f64,
    pub s2: f64,
    pub s2_tilde: f64,
    pub s2_bar: f64,
    pub r0: f64,
    pub r1: f64,
    pub rf: f64,
    pub s_tilde_prime: f64,
    pub s_tilde_dprime: f64,
    pub slacks: Slacks,
}

/// Rounded code sizes. Every count is `⌈2^{n·rate}⌉`; the sub-bin count is
/// further rounded up to a multiple of the key count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeSizes {
    pub l_prime: u64,
    pub l_dprime: u64,
    pub m0: u64,
    pub m1: u64,
    pub lf: u64,
    pub t_bins: u64,
    pub t_per_bin: u64,
    pub v_bins: u64,
    pub v_subbins: u64,
    pub v_per_subbin: u64,
    /// Number of key values `2^{nR1}`; equals `m1`.
    pub keys: u64,
}

impl CodeSizes {
    pub fn u_total(&self) -> u64 {
        self.l_prime * self.l_dprime * self.m0 * self.m1 * self.lf
    }

    pub fn t_total(&self) -> u64 {
        self.t_bins * self.t_per_bin
    }

    pub fn v_per_bin(&self) -> u64 {
        self.v_subbins * self.v_per_subbin
    }

    pub fn v_total(&self) -> u64 {
        self.v_bins * self.v_per_bin()
    }
}

const ROUNDING: f64 = 1e-9;
const RATE_TOLERANCE: f64 = 1e-9;

/// `⌈2^{n·rate}⌉`, at least 1.
pub fn code_size(n: usize, rate: f64) -> Result<u64> {
    let e = n as f64 * rate;
    if e > 40.0 {
        return Err(Error::BudgetExceeded {
            required: 1u128 << 40,
            budget: 1u128 << 40,
        });
    }
    Ok((e.exp2() - ROUNDING).ceil().max(1.0) as u64)
}

impl SchemeRates {
    /// Check the ordering constraints of the construction.
    pub fn validate(&self) -> Result<()> {
        let fail = |what: &str| Err(Error::Infeasible(format!("violated {what}")));
        if self.n == 0 {
            return Err(Error::Argument("blocklength must be positive".into()));
        }
        if self.b < 2 {
            return Err(Error::Argument("need at least two blocks".into()));
        }
        let named = [
            ("S1", self.s1),
            ("S̃1", self.s1_tilde),
            ("S2", self.s2),
            ("S̃2", self.s2_tilde),
            ("R0", self.r0),
            ("R1", self.r1),
            ("Rf", self.rf),
            ("S̃′", self.s_tilde_prime),
            ("S̃″", self.s_tilde_dprime),
        ];
        for (name, r) in named {
            if !r.is_finite() || r < -RATE_TOLERANCE {
                return fail(&format!("{name} ≥ 0 ({name} = {r})"));
            }
        }
        if self.s2_bar < -RATE_TOLERANCE {
            return fail(&format!("S̄2 ≥ 0 (S̄2 = {})", self.s2_bar));
        }
        if self.s1_tilde > self.s1 + RATE_TOLERANCE {
            return fail("S̃1 ≤ S1");
        }
        if self.s2_tilde > self.s2 + RATE_TOLERANCE {
            return fail("S̃2 ≤ S2");
        }
        if self.s2_bar > self.s2 - self.s2_tilde + RATE_TOLERANCE {
            return fail("S̄2 ≤ S2 − S̃2");
        }
        if self.r1 > self.s2_bar + RATE_TOLERANCE {
            return fail("R1 ≤ S̄2");
        }
        if (self.s_tilde_prime + self.s_tilde_dprime - self.s1_tilde - self.s2_tilde).abs() > RATE_TOLERANCE {
            return fail("S̃′ + S̃″ = S̃1 + S̃2");
        }
        if self.strategy == Strategy::Kg2 && (self.r0 > RATE_TOLERANCE || self.rf > RATE_TOLERANCE) {
            return fail("R0 = Rf = 0 for the second strategy");
        }
        Ok(())
    }

    /// Rounded sizes; fails when the recombination map cannot be a bijection.
    pub fn sizes(&self) -> Result<CodeSizes> {
        self.validate()?;
        let n = self.n;
        let keys = code_size(n, self.r1)?;
        let sub = code_size(n, self.s2_bar)?;
        let s = CodeSizes {
            l_prime: code_size(n, self.s_tilde_prime)?,
            l_dprime: code_size(n, self.s_tilde_dprime)?,
            m0: code_size(n, self.r0)?,
            m1: keys,
            lf: code_size(n, self.rf)?,
            t_bins: code_size(n, self.s1_tilde)?,
            t_per_bin: code_size(n, self.s1 - self.s1_tilde)?,
            v_bins: code_size(n, self.s2_tilde)?,
            v_subbins: sub.div_ceil(keys) * keys,
            v_per_subbin: code_size(n, self.s2 - self.s2_tilde - self.s2_bar)?,
            keys,
        };
        if s.l_prime * s.l_dprime != s.t_bins * s.v_bins
            || (self.strategy == Strategy::Kg2 && s.l_dprime != s.v_bins)
        {
            return Err(Error::Infeasible(format!(
                "index recombination needs 2^(nS̃′)·2^(nS̃″) = 2^(nS̃1)·2^(nS̃2) after rounding ({}·{} vs {}·{})",
                s.l_prime, s.l_dprime, s.t_bins, s.v_bins
            )));
        }
        Ok(s)
    }

    /// Replace the message-side rates, keeping the description rates.
    pub fn with_message_rates(mut self, r0: f64, r1: f64, rf: f64) -> Result<Self> {
        self.r0 = r0;
        self.r1 = r1;
        self.rf = rf;
        self.validate()?;
        Ok(self)
    }

    /// Message bits per block, `log2(|M0|·|M1|) / n` after rounding.
    pub fn block_rate(&self) -> Result<f64> {
        let s = self.sizes()?;
        Ok(((s.m0 * s.m1) as f64).log2() / self.n as f64)
    }

    /// Message bits per symbol over the whole session, counting the message-free first block.
    pub fn session_rate(&self) -> Result<f64> {
        Ok(self.block_rate()? * (self.b - 1) as f64 / self.b as f64)
    }
}

/// Information terms the scheme rates are built from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchemeTerms {
    /// `I(T;UXŶ|Q)`, or `I(T;XŶ|U)` for the second strategy.
    pub i_t_cover: f64,
    /// `I(T;UY|Q)`, or `I(T;Y|U)` for the second strategy.
    pub i_t_pack: f64,
    pub i_v_xyhat_given_ut: f64,
    pub i_v_y_given_ut: f64,
    pub i_v_z_given_ut: f64,
    pub i_u_tz_given_q: f64,
    pub i_u_y: f64,
    pub i_u_y_given_q: f64,
}

impl SchemeTerms {
    pub fn evaluate(ch: &WtgfChannel, f: &FactorizationKG, strategy: Strategy) -> Result<Self> {
        let j = f.assemble(ch)?;
        let mi = |a: &[&str], b: &[&str], c: &[&str]| j.mutual_information(a, b, c);
        let (i_t_cover, i_t_pack) = match strategy {
            Strategy::Kg1 => (mi(&[T], &[U, X, YHAT], &[Q])?, mi(&[T], &[U, Y], &[Q])?),
            Strategy::Kg2 => (mi(&[T], &[X, YHAT], &[U])?, mi(&[T], &[Y], &[U])?),
        };
        Ok(Self {
            i_t_cover,
            i_t_pack,
            i_v_xyhat_given_ut: mi(&[V], &[X, YHAT], &[U, T])?,
            i_v_y_given_ut: mi(&[V], &[Y], &[U, T])?,
            i_v_z_given_ut: mi(&[V], &[Z], &[U, T])?,
            i_u_tz_given_q: mi(&[U], &[T, Z], &[Q])?,
            i_u_y: mi(&[U], &[Y], &[])?,
            i_u_y_given_q: mi(&[U], &[Y], &[Q])?,
        })
    }
}

/// Scheme rates for a factorization.
///
/// Description rates follow the codebook construction. The message side is
/// `R1 + Rf = I(U;TZ|Q) − ε′` with `R1 = min(S̄2, ·)`, and `R0` is what remains
/// of the decoding budget `min(I(U;Y) − S̃′ − S̃″, I(U;Y|Q) − S̃″) − ε′`.
/// For the second strategy `R0 = Rf = 0` and `R1 = min(S̄2, I(U;Y) − S̃1 − S̃2 − ε′)`.
pub fn derive_scheme_rates(
    f: &FactorizationKG,
    ch: &WtgfChannel,
    strategy: Strategy,
    n: usize,
    b: usize,
    slacks: Slacks,
) -> Result<SchemeRates> {
    if strategy == Strategy::Kg2 && f.cardinalities()[0] != 1 {
        return Err(Error::Argument("the second strategy needs a singleton Q".into()));
    }
    let t = SchemeTerms::evaluate(ch, f, strategy)?;
    let sl = slacks;
    let s1 = t.i_t_cover + sl.eps1;
    // a bin never holds fewer than one word
    let s1_tilde = (t.i_t_cover - t.i_t_pack + sl.eps1 + sl.eps1_tilde).min(s1);
    let s2 = t.i_v_xyhat_given_ut + sl.eps2;
    let s2_tilde = (t.i_v_xyhat_given_ut - t.i_v_y_given_ut + sl.eps2 + sl.eps2_tilde).min(s2);
    let secret = t.i_v_y_given_ut - t.i_v_z_given_ut;
    let s2_bar = if secret < 0.0 { secret } else { secret.min(s2 - s2_tilde) };
    let (r0, r1, rf) = match strategy {
        Strategy::Kg1 => {
            let key_side = (t.i_u_tz_given_q - sl.eps_prime).max(0.0);
            let r1 = s2_bar.min(key_side).max(0.0);
            let rf = key_side - r1;
            let budget = (t.i_u_y - s1_tilde - s2_tilde).min(t.i_u_y_given_q - s2_tilde) - sl.eps_prime;
            (0f64.max(budget - r1 - rf), r1, rf)
        }
        Strategy::Kg2 => {
            let r1 = s2_bar.min(t.i_u_y - s1_tilde - s2_tilde - sl.eps_prime).max(0.0);
            (0.0, r1, 0.0)
        }
    };
    let rates = SchemeRates {
        strategy,
        n,
        b,
        s1,
        s1_tilde,
        s2,
        s2_tilde,
        s2_bar,
        r0,
        r1,
        rf,
        s_tilde_prime: s1_tilde,
        s_tilde_dprime: s2_tilde,
        slacks,
    };
    rates.validate()?;
    Ok(rates)
}
