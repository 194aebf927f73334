//! Small reference instances for the simulator.

use super::rates::{derive_scheme_rates, SchemeRates, Slacks, Strategy};
use super::typical::TypicalityConfig;
use crate::bounds::{FactorizationKG, Q, T, U, V};
use crate::channels::{WtgfChannel, X, YHAT};
use crate::error::Result;
use crate::probkit::{Alphabet, JointPmf, Kernel, Var};

/// A channel, a factorization, scheme rates and typicality thresholds.
#[derive(Debug, Clone)]
pub struct SchemeFixture {
    pub channel: WtgfChannel,
    pub factors: FactorizationKG,
    pub rates: SchemeRates,
    pub typicality: TypicalityConfig,
}

fn degenerate(name: &str) -> Var {
    Var::new(name, Alphabet::degenerate())
}

/// Noiseless legitimate channel with state feedback at `n = 12`, `b = 4`.
///
/// `X = (U, W)` with `U` uniform on four symbols and `W` a uniform bit, `Y = Ŷ = X`,
/// and Eve sees `W` through an erasure channel with erasure probability 1/3.
/// The description is `V = W` and `T = ∅`. Slacks are chosen so that every
/// code size is an exact power of two: a single `t` word, 1024 `v` bins of 32
/// words split into 16 sub-bins, four keys, two plain messages.
/// Typicality thresholds are loose, so decoding reduces to the exact matches
/// forced by zero-probability letter pairs.
pub fn noiseless_session() -> Result<SchemeFixture> {
    let nu = 4;
    let xa = Alphabet::indexed(2 * nu);
    let za = Alphabet::new(["0", "1", "e"])?;
    let erase = 1.0 / 3.0;
    let mut rows = Vec::new();
    for x in 0..2 * nu {
        let w = x % 2;
        for y in 0..2 * nu {
            let mut z = [0.0; 3];
            if y == x {
                z[w] = 1.0 - erase;
                z[2] = erase;
            }
            rows.extend(z);
        }
    }
    let channel = WtgfChannel::with_output_feedback(xa.clone(), xa.clone(), za, rows)?;
    let uvar = Var::new(U, Alphabet::indexed(nu));
    let qu = JointPmf::new(vec![degenerate(Q), uvar.clone()], vec![1.0 / nu as f64; nu])?;
    let mut xu = vec![0.0; nu * 2 * nu];
    for u in 0..nu {
        xu[u * 2 * nu + 2 * u] = 0.5;
        xu[u * 2 * nu + 2 * u + 1] = 0.5;
    }
    let x_given_u = Kernel::new(vec![uvar.clone()], vec![Var::new(X, xa.clone())], xu)?;
    let vvar = Var::new(V, Alphabet::indexed(2));
    let v_given = Kernel::deterministic(
        vec![uvar, Var::new(X, xa.clone()), Var::new(YHAT, xa)],
        vec![vvar.clone()],
        |i| (i / (2 * nu)) % 2,
    )?;
    let t_given_v = Kernel::constant(vec![vvar], vec![degenerate(T)], vec![1.0])?;
    let factors = FactorizationKG::new(qu, x_given_u, v_given, t_given_v)?;
    let slacks = Slacks {
        eps1: 0.0,
        eps1_tilde: 0.0,
        eps2: 0.25,
        eps2_tilde: 7.0 / 12.0,
        eps_prime: 0.05,
    };
    let rates = derive_scheme_rates(&factors, &channel, Strategy::Kg1, 12, 4, slacks)?.with_message_rates(
        1.0 / 12.0,
        2.0 / 12.0,
        0.0,
    )?;
    Ok(SchemeFixture {
        channel,
        factors,
        rates,
        typicality: TypicalityConfig {
            codebook: 0.4,
            encoder: 0.45,
            decoder: 0.5,
        },
    })
}

/// Binary instance for leakage enumeration at `n = 3`, `b = 2`.
///
/// `U = X` uniform, `Y = Ŷ = X`, `V = X`, `T = ∅`; Eve sees `X` through a
/// binary symmetric channel with crossover `eve_flip`, or nothing at all when
/// `eve_flip` is `None`. Rates: four `v` words in two bins of two sub-bins,
/// two keys, two plain messages. Since `V` is a function of `U`, every `v` word
/// equals its `u` word and the lowest-index rule always picks sub-bin 0, so the
/// generated key is constant.
pub fn tiny_leakage(eve_flip: Option<f64>) -> Result<SchemeFixture> {
    let b2 = Alphabet::indexed(2);
    let channel = match eve_flip {
        Some(p) => WtgfChannel::with_output_feedback(
            b2.clone(),
            b2.clone(),
            b2.clone(),
            vec![1.0 - p, p, 0.0, 0.0, 0.0, 0.0, p, 1.0 - p],
        )?,
        None => WtgfChannel::with_output_feedback(b2.clone(), b2.clone(), Alphabet::degenerate(), vec![1.0, 0.0, 0.0, 1.0])?,
    };
    let uvar = Var::new(U, b2.clone());
    let qu = JointPmf::new(vec![degenerate(Q), uvar.clone()], vec![0.5, 0.5])?;
    let x_given_u = Kernel::identity(uvar.clone(), X);
    let vvar = Var::new(V, b2.clone());
    let v_given = Kernel::deterministic(
        vec![uvar, Var::new(X, b2.clone()), Var::new(YHAT, b2)],
        vec![vvar.clone()],
        |i| (i / 2) % 2,
    )?;
    let t_given_v = Kernel::constant(vec![vvar], vec![degenerate(T)], vec![1.0])?;
    let factors = FactorizationKG::new(qu, x_given_u, v_given, t_given_v)?;
    let third = 1.0 / 3.0;
    let rates = SchemeRates {
        strategy: Strategy::Kg1,
        n: 3,
        b: 2,
        s1: 0.0,
        s1_tilde: 0.0,
        s2: 2.0 * third,
        s2_tilde: third,
        s2_bar: third,
        r0: third,
        r1: third,
        rf: 0.0,
        s_tilde_prime: 0.0,
        s_tilde_dprime: third,
        slacks: Slacks::default(),
    };
    rates.validate()?;
    Ok(SchemeFixture {
        channel,
        factors,
        rates,
        typicality: TypicalityConfig {
            codebook: 1.0,
            encoder: 1.0,
            decoder: 1.0,
        },
    })
}
