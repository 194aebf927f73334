mod common;

use common::*;
use proptest::prelude::*;
use wtgf::bounds::{FactorizationKG, Q, T, U, V};
use wtgf::channels::{WtgfChannel, X, YHAT};
use wtgf::probkit::{Alphabet, JointPmf, Kernel, Var};
use wtgf::simkit::fixtures::{noiseless_session, tiny_leakage};
use wtgf::simkit::*;
use wtgf::simkit::Strategy;
use wtgf::Error;

/// Measured at the first green run of the session suite; any change is a regression.
const FROZEN_SUCCESSES: u32 = 198;

fn rates(n: usize, b: usize) -> SchemeRates {
    SchemeRates {
        strategy: Strategy::Kg1,
        n,
        b,
        s1: 0.0,
        s1_tilde: 0.0,
        s2: 0.0,
        s2_tilde: 0.0,
        s2_bar: 0.0,
        r0: 0.0,
        r1: 0.0,
        rf: 0.0,
        s_tilde_prime: 0.0,
        s_tilde_dprime: 0.0,
        slacks: Slacks::default(),
    }
}

#[test]
fn noiseless_session_rate_is_frozen() {
    let fx = noiseless_session().unwrap();
    let mut ok = 0;
    for seed in 0..200u64 {
        let cb = build_codebook(&fx.rates, &fx.factors, &fx.channel, seed, fx.typicality).unwrap();
        ok += run_session(&cb, &fx.channel, &random_messages(&cb, seed), seed).unwrap().success as u32;
    }
    assert_eq!(ok, FROZEN_SUCCESSES);
}

#[test]
fn noiseless_fixture_sizes() {
    let s = noiseless_session().unwrap().rates.sizes().unwrap();
    assert_eq!((s.t_bins, s.t_per_bin), (1, 1));
    assert_eq!((s.v_bins, s.v_per_bin(), s.v_subbins, s.v_per_subbin), (1024, 32, 16, 2));
    assert_eq!((s.keys, s.m0, s.lf), (4, 2, 1));
    assert_eq!((s.l_prime, s.l_dprime), (1, 1024));
}

#[test]
fn sixteen_t_words_in_four_bins() {
    let mut r = rates(4, 2);
    r.s1 = 1.0;
    r.s1_tilde = 0.5;
    r.s_tilde_prime = 0.5;
    let s = r.sizes().unwrap();
    assert_eq!((s.t_total(), s.t_bins, s.t_per_bin), (16, 4, 4));
    let fx = tiny_leakage(Some(0.2)).unwrap();
    let cb = build_codebook(&r, &fx.factors, &fx.channel, 3, fx.typicality).unwrap();
    for l1 in 0..4 {
        assert_eq!(cb.t_bin_members(l1).count(), 4);
    }
}

#[test]
fn same_seed_same_codebook() {
    let fx = noiseless_session().unwrap();
    let a = build_codebook(&fx.rates, &fx.factors, &fx.channel, 11, fx.typicality).unwrap();
    let b = build_codebook(&fx.rates, &fx.factors, &fx.channel, 11, fx.typicality).unwrap();
    let c = build_codebook(&fx.rates, &fx.factors, &fx.channel, 12, fx.typicality).unwrap();
    let words = |cb: &Codebook| -> Vec<Vec<u8>> { (0..64).map(|r| cb.u_word(r)).collect() };
    let bins = |cb: &Codebook| -> Vec<(u64, u64)> { (0..cb.sizes().v_total()).map(|s| cb.v_bin(s)).collect() };
    assert_eq!(words(&a), words(&b));
    assert_eq!(bins(&a), bins(&b));
    assert_ne!(bins(&a), bins(&c));
    let ma = random_messages(&a, 5);
    assert_eq!(run_session(&a, &fx.channel, &ma, 5).unwrap(), run_session(&b, &fx.channel, &ma, 5).unwrap());
}

#[test]
fn recombination_round_trip() {
    let fx = noiseless_session().unwrap();
    let cb = build_codebook(&fx.rates, &fx.factors, &fx.channel, 1, fx.typicality).unwrap();
    let s = cb.sizes();
    for l1 in 0..s.t_bins {
        for l2 in 0..s.v_bins {
            let (a, b) = cb.recombine(l1, l2);
            assert_eq!(cb.recombine_inv(a, b), (l1, l2));
        }
    }
}

#[test]
fn singleton_descriptions_carry_no_key() {
    let ch = bsc_wiretap(0.1, 0.2);
    let f = FactorizationKG::wiretap(&ch, &[0.5, 0.5]).unwrap();
    let sl = Slacks::default();
    let r = derive_scheme_rates(&f, &ch, Strategy::Kg1, 8, 2, sl).unwrap();
    assert!((r.s1 - sl.eps1).abs() < 1e-12);
    assert!((r.s2 - sl.eps2).abs() < 1e-12);
    assert_eq!(r.s2_bar, 0.0);
    assert_eq!(r.r1, 0.0);
}

#[test]
fn noiseless_feedback_gives_positive_subbin_rate() {
    // V = W is seen by Bob exactly and by Eve through an erasure
    let fx = noiseless_session().unwrap();
    let sl = Slacks::default();
    let t = SchemeTerms::evaluate(&fx.channel, &fx.factors, Strategy::Kg1).unwrap();
    let r = derive_scheme_rates(&fx.factors, &fx.channel, Strategy::Kg1, 12, 4, sl).unwrap();
    let expected = (t.i_v_y_given_ut - t.i_v_z_given_ut).min(r.s2 - r.s2_tilde);
    assert!(r.s2_bar > 0.0);
    assert!((r.s2_bar - expected).abs() < 1e-12);
}

#[test]
fn eve_learning_more_of_the_description_is_infeasible() {
    // Y is pure noise, Ŷ = Z = X; U constant and V = X
    let b = Alphabet::indexed(2);
    let mut rows = Vec::new();
    for x in 0..2 {
        for _y in 0..2 {
            for yh in 0..2 {
                for z in 0..2 {
                    rows.push(if yh == x && z == x { 0.5 } else { 0.0 });
                }
            }
        }
    }
    let ch = WtgfChannel::new(b.clone(), b.clone(), b.clone(), b.clone(), rows).unwrap();
    let u = Var::new(U, Alphabet::degenerate());
    let qu = JointPmf::new(vec![Var::new(Q, Alphabet::degenerate()), u.clone()], vec![1.0]).unwrap();
    let xk = Kernel::constant(vec![u.clone()], vec![Var::new(X, b.clone())], vec![0.5, 0.5]).unwrap();
    let v = Var::new(V, b.clone());
    let vk = Kernel::deterministic(vec![u, Var::new(X, b.clone()), Var::new(YHAT, b)], vec![v.clone()], |i| i / 2).unwrap();
    let tk = Kernel::constant(vec![v], vec![Var::new(T, Alphabet::degenerate())], vec![1.0]).unwrap();
    let f = FactorizationKG::new(qu, xk, vk, tk).unwrap();
    let err = derive_scheme_rates(&f, &ch, Strategy::Kg1, 8, 2, Slacks::default()).unwrap_err();
    assert!(matches!(err, Error::Infeasible(_)), "{err:?}");
}

#[test]
fn unkeyed_two_block_session_recovers_the_plain_message() {
    let fx = tiny_leakage(Some(0.2)).unwrap();
    let r = fx.rates.clone().with_message_rates(1.0 / 3.0, 0.0, 0.0).unwrap();
    let cb = build_codebook(&r, &fx.factors, &fx.channel, 2, fx.typicality).unwrap();
    assert_eq!(cb.sizes().keys, 1);
    for seed in 0..20 {
        let t = run_session(&cb, &fx.channel, &[(1, 0)], seed).unwrap();
        let last = &t.blocks[1];
        assert!(last.m1_encrypted == Some(0));
        if last.decoded_r.is_some() {
            assert_eq!(last.decoded_message.map(|m| m.0), Some(1));
        }
    }
}

#[test]
fn identity_channel_with_a_single_message_never_errs() {
    let fx = tiny_leakage(None).unwrap();
    let cb = build_codebook(&rates(3, 2), &fx.factors, &fx.channel, 0, fx.typicality).unwrap();
    assert_eq!(cb.sizes().u_total(), 1);
    let e = estimate_error(&cb, &fx.channel, 200, 0).unwrap();
    assert_eq!(e.failures, 0);
    assert_eq!(e.p_error, 0.0);
    assert_eq!(e.block_rate, 0.0);
}

#[test]
fn output_independent_of_input_mostly_errs() {
    let b = Alphabet::indexed(2);
    let ch = WtgfChannel::with_output_feedback(b.clone(), b.clone(), b, vec![0.25; 8]).unwrap();
    let fx = tiny_leakage(Some(0.2)).unwrap();
    let mut r = rates(8, 2);
    r.s1 = 0.0;
    r.r0 = 1.0;
    let cb = build_codebook(&r, &fx.factors, &ch, 0, TypicalityConfig::default()).unwrap();
    let e = estimate_error(&cb, &ch, 200, 0).unwrap();
    assert!(e.p_error >= 0.5, "{e:?}");
    assert_eq!(e, estimate_error(&cb, &ch, 200, 0).unwrap());
}

#[test]
fn stochastic_encoder_is_refused() {
    let fx = noiseless_session().unwrap();
    let cb = build_codebook(&fx.rates, &fx.factors, &fx.channel, 0, fx.typicality).unwrap();
    assert!(matches!(exact_leakage_tiny(&cb, &fx.channel, true, false, ENUMERATION_BUDGET), Err(Error::Refused(_))));
    let fx = tiny_leakage(Some(0.2)).unwrap();
    let cb = build_codebook(&fx.rates, &fx.factors, &fx.channel, 0, fx.typicality).unwrap();
    assert!(matches!(exact_leakage_tiny(&cb, &fx.channel, false, false, ENUMERATION_BUDGET), Err(Error::Refused(_))));
    assert!(matches!(exact_leakage_tiny(&cb, &fx.channel, true, false, 10), Err(Error::BudgetExceeded { .. })));
}

#[test]
fn noiseless_eve_sees_the_plain_codeword() {
    // no descriptions, no key: Eve's second block is u(m0) itself
    let fx = tiny_leakage(Some(0.0)).unwrap();
    let mut r = rates(3, 2);
    r.r0 = 2.0 / 3.0;
    for seed in 0..5 {
        let cb = build_codebook(&r, &fx.factors, &fx.channel, seed, fx.typicality).unwrap();
        let l = exact_leakage_tiny(&cb, &fx.channel, true, false, ENUMERATION_BUDGET).unwrap();
        let mut counts = std::collections::BTreeMap::new();
        for m0 in 0..4 {
            *counts.entry(cb.u_word(m0)).or_insert(0.0) += 0.25;
        }
        let h: f64 = counts.values().map(|p: &f64| -p * p.log2()).sum();
        assert!((l.message_bits - h).abs() < 1e-12, "{l:?} vs {h}");
        assert!(l.key_bits.is_none());
    }
}

#[test]
fn oversized_codebooks_are_refused() {
    let fx = tiny_leakage(Some(0.2)).unwrap();
    let mut r = rates(30, 2);
    r.r0 = 1.0;
    assert!(matches!(
        build_codebook(&r, &fx.factors, &fx.channel, 0, fx.typicality),
        Err(Error::BudgetExceeded { .. })
    ));
}

proptest! {
    #[test]
    fn one_time_pad_is_exact(keys in 1u64..40) {
        let c = one_time_pad_check(keys).unwrap();
        prop_assert!(c.output_uniform && c.independent);
        prop_assert_eq!(c.mutual_information_bits, 0.0);
    }

    #[test]
    fn encryption_inverts(keys in 1u64..1000, m in 0u64..1000, k in 0u64..1000) {
        let (m, k) = (m % keys, k % keys);
        prop_assert_eq!(decrypt(encrypt(m, k, keys), k, keys), m);
    }

    #[test]
    fn index_split_inverts_join(r in 0u64..8192) {
        let fx = noiseless_session().unwrap();
        let cb = build_codebook(&fx.rates, &fx.factors, &fx.channel, 0, fx.typicality).unwrap();
        prop_assert_eq!(cb.join(cb.split(r)), r);
    }

    #[test]
    fn code_sizes_round_up(n in 1usize..20, e in 0u32..20) {
        prop_assert_eq!(code_size(n, e as f64 / n as f64).unwrap(), 1u64 << e);
        let between = code_size(n, (e as f64 + 0.5) / n as f64).unwrap();
        prop_assert!(between > 1u64 << e && between <= 2u64 << e);
    }
}
