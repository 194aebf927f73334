mod common;

use common::{bsc, bsc_wiretap, parallel, perfect_feedback, shared_source};
use proptest::prelude::*;
use wtgf::bounds::{
    causal_state_rate, erasure_rates, outer_secrecy_parallel, outer_sk_parallel, perfect_feedback_rate, rate_kg1,
    rate_kg2, sk_inner_rate, special_case_value, Binding, FactorizationKG, FactorizationOuter, SpecialCase,
    StateFactors, Q, T, U, UPRIME, V,
};
use wtgf::channels::{
    ErasureParams, ParallelSourcesChannel, StateChannel, WtgfChannel, S, X, XC, YC, YHAT, YHATS, YS, ZC, ZS,
};
use wtgf::optimize::{random_start, Family, KgFamily, KgKind, OuterFamily, OuterKind};
use wtgf::probkit::{Alphabet, JointPmf, Kernel, Var};
use wtgf::Error;

fn h(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        0.0
    } else {
        -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
    }
}

/// `I(A;B)` of a joint given as a matrix.
fn mi(pab: &[Vec<f64>]) -> f64 {
    let pa: Vec<f64> = pab.iter().map(|r| r.iter().sum()).collect();
    let nb = pab[0].len();
    let pb: Vec<f64> = (0..nb).map(|b| pab.iter().map(|r| r[b]).sum()).collect();
    let mut i = 0.0;
    for (a, r) in pab.iter().enumerate() {
        for (b, &p) in r.iter().enumerate() {
            if p > 0.0 {
                i += p * (p / (pa[a] * pb[b])).log2();
            }
        }
    }
    i
}

/// `I(U; out)` where `out` is reached from `X` through `w`.
fn mi_through(pux: &[Vec<f64>], w: &[Vec<f64>]) -> f64 {
    let m: Vec<Vec<f64>> = pux
        .iter()
        .map(|row| (0..w[0].len()).map(|o| row.iter().zip(w).map(|(p, wr)| p * wr[o]).sum()).collect())
        .collect();
    mi(&m)
}

fn degenerate(name: &str) -> Var {
    Var::new(name, Alphabet::degenerate())
}

fn binary(name: &str) -> Var {
    Var::new(name, Alphabet::indexed(2))
}

/// Solve `h(q) = target` on `[0, 1/2]` by bisection.
fn inverse_h(target: f64) -> f64 {
    let (mut lo, mut hi) = (0.0, 0.5);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if h(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Random rows for one random factorization of the family.
fn random_point<F: Family>(f: &F, seed: u64) -> F::Point {
    f.point(&random_start(&f.rows(), seed, 0)).unwrap()
}

fn stochastic(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..1.0, n).prop_map(|r| {
        let s: f64 = r.iter().sum();
        if s == 0.0 {
            let mut e = vec![0.0; r.len()];
            e[0] = 1.0;
            e
        } else {
            r.into_iter().map(|x| x / s).collect()
        }
    })
}

/// `Y` from `X` through `wy`, `Ŷ` through `wyh` independently, and `Z = Y`.
fn eve_copies_bob(wy: &[Vec<f64>], wyh: &[Vec<f64>]) -> WtgfChannel {
    let (nx, ny, nyh) = (wy.len(), wy[0].len(), wyh[0].len());
    let mut rows = Vec::new();
    for x in 0..nx {
        for y in 0..ny {
            for yh in 0..nyh {
                for z in 0..ny {
                    rows.push(if z == y { wy[x][y] * wyh[x][yh] } else { 0.0 });
                }
            }
        }
    }
    WtgfChannel::new(
        Alphabet::indexed(nx),
        Alphabet::indexed(ny),
        Alphabet::indexed(nyh),
        Alphabet::indexed(ny),
        rows,
    )
    .unwrap()
}

/// Binary `Y = X` with clean feedback `Ŷ = X` and Bob through a BSC.
fn clean_feedback_noisy_bob(flip: f64) -> WtgfChannel {
    let mut rows = Vec::new();
    for x in 0..2 {
        for y in 0..2 {
            for yh in 0..2 {
                let py = if y == x { 1.0 - flip } else { flip };
                rows.push(if yh == x { py } else { 0.0 });
            }
        }
    }
    WtgfChannel::new(
        Alphabet::indexed(2),
        Alphabet::indexed(2),
        Alphabet::indexed(2),
        Alphabet::degenerate(),
        rows,
    )
    .unwrap()
}

/// `Q`, `T` degenerate, `U` binary with `p(u)` and `p(x|u)`, and `V` given as a
/// map of the row index of `(U, X, Ŷ)`.
fn kg_factors(
    ch: &WtgfChannel,
    pu: Vec<f64>,
    x_given_u: Vec<f64>,
    v_len: usize,
    v_of: impl Fn(usize) -> usize,
) -> FactorizationKG {
    let u = Var::new(U, Alphabet::indexed(pu.len()));
    let qu = JointPmf::new(vec![degenerate(Q), u.clone()], pu).unwrap();
    let xk = Kernel::new(vec![u.clone()], vec![Var::new(X, ch.x().clone())], x_given_u).unwrap();
    let v = Var::new(V, if v_len == 1 { Alphabet::degenerate() } else { Alphabet::indexed(v_len) });
    let vk = Kernel::deterministic(
        vec![u, Var::new(X, ch.x().clone()), Var::new(YHAT, ch.yhat().clone())],
        vec![v.clone()],
        v_of,
    )
    .unwrap();
    let tk = Kernel::constant(vec![v], vec![degenerate(T)], vec![1.0]).unwrap();
    FactorizationKG::new(qu, xk, vk, tk).unwrap()
}

fn singleton_source() -> JointPmf {
    JointPmf::new(vec![degenerate(YS), degenerate(YHATS), degenerate(ZS)], vec![1.0]).unwrap()
}

#[test]
fn wiretap_factorization_on_the_bsc_pair() {
    let ch = bsc_wiretap(0.1, 0.2);
    let f = FactorizationKG::wiretap(&ch, &[0.5, 0.5]).unwrap();
    let oracle = h(0.2) - h(0.1);
    assert!((oracle - 0.252932).abs() < 1e-6);
    for r in [rate_kg1(&ch, &f).unwrap(), sk_inner_rate(&ch, &f).unwrap(), rate_kg2(&ch, &f).unwrap()] {
        assert!(r.feasible());
    }
    assert!((rate_kg1(&ch, &f).unwrap().bits.unwrap() - oracle).abs() < 1e-12);
    assert!((sk_inner_rate(&ch, &f).unwrap().bits.unwrap() - oracle).abs() < 1e-12);
    // the description term vanishes without V, so KG2 gives nothing
    assert_eq!(rate_kg2(&ch, &f).unwrap().bits, Some(0.0));
}

#[test]
fn kg2_on_noiseless_feedback_balances_both_terms() {
    let ch = WtgfChannel::with_output_feedback(
        Alphabet::indexed(2),
        Alphabet::indexed(2),
        Alphabet::degenerate(),
        vec![1.0, 0.0, 0.0, 1.0],
    )
    .unwrap();
    let q = inverse_h(0.5);
    assert!((q - 0.110028).abs() < 5e-7);
    let f = kg_factors(&ch, vec![0.5, 0.5], vec![1.0 - q, q, q, 1.0 - q], 2, |i| i % 2);
    let r = rate_kg2(&ch, &f).unwrap();
    assert!((r.bits.unwrap() - 0.5).abs() < 1e-9, "{r:?}");
    assert_eq!(r.binding, Binding::Both);
    let single_v = kg_factors(&ch, vec![0.5, 0.5], vec![1.0 - q, q, q, 1.0 - q], 1, |_| 0);
    assert_eq!(rate_kg2(&ch, &single_v).unwrap().bits, Some(0.0));
}

#[test]
fn secret_key_condition() {
    let ch = clean_feedback_noisy_bob(0.1);
    let f = kg_factors(&ch, vec![1.0], vec![0.5, 0.5], 2, |i| i % 2);
    let r = sk_inner_rate(&ch, &f).unwrap();
    assert!(!r.feasible());
    assert_eq!(r.binding, Binding::Infeasible);
    // I(V;XŶ|UY) = H(X|Y) = h(0.1) against I(U;Y) = 0
    assert!((r.condition_slack.unwrap() + h(0.1)).abs() < 1e-12);
    let trivial = kg_factors(&ch, vec![1.0], vec![0.5, 0.5], 1, |_| 0);
    let r = sk_inner_rate(&ch, &trivial).unwrap();
    assert_eq!(r.bits, Some(0.0));
}

#[test]
fn outer_bounds_collapse_without_sources() {
    let ps = ParallelSourcesChannel::from_independent_main(&bsc(XC, YC, 0.1), &bsc(XC, ZC, 0.2), singleton_source())
        .unwrap();
    let f = FactorizationOuter::simple(&ps, &[0.5, 0.5], false).unwrap();
    let r = outer_secrecy_parallel(&ps, &f).unwrap();
    assert!((r.bits.unwrap() - (h(0.2) - h(0.1))).abs() < 1e-12);
}

#[test]
fn outer_bounds_with_a_noiseless_main_channel() {
    let ps = parallel(0.2, 0.2);
    let f = FactorizationOuter::simple(&ps, &[0.5, 0.5], false).unwrap();
    let r = outer_secrecy_parallel(&ps, &f).unwrap();
    assert!((r.bits.unwrap() - (1.0 - (1.0 - h(0.2))).min(1.0)).abs() < 1e-12);

    let ps = parallel(0.0, 0.2);
    let f = FactorizationOuter::simple(&ps, &[0.5, 0.5], true).unwrap();
    let r = outer_sk_parallel(&ps, &f).unwrap();
    assert!((r.bits.unwrap() - h(0.2)).abs() < 1e-12);
    assert!((h(0.2) - 0.721928).abs() < 5e-7);
}

#[test]
fn secret_key_outer_infeasible_when_the_channel_cannot_carry_the_description() {
    // Ŷs is an independent fair bit, V = Ŷs, and the main channel is useless
    let b = Alphabet::indexed(2);
    let src = JointPmf::new(
        vec![Var::new(YS, b.clone()), Var::new(YHATS, b.clone()), Var::new(ZS, b)],
        vec![0.125; 8],
    )
    .unwrap();
    let ps = ParallelSourcesChannel::from_independent_main(&bsc(XC, YC, 0.5), &bsc(XC, ZC, 0.5), src).unwrap();
    let f = FactorizationOuter::simple(&ps, &[0.5, 0.5], true).unwrap();
    let r = outer_sk_parallel(&ps, &f).unwrap();
    assert!(!r.feasible());
    assert!((r.condition_slack.unwrap() + 1.0).abs() < 1e-12);
}

#[test]
fn closed_forms_at_their_optimizers() {
    let ps = parallel(0.0, 0.2);
    let f = FactorizationOuter::simple(&ps, &[0.5, 0.5], false).unwrap();
    let p3 = special_case_value(SpecialCase::P3, &ps, &f).unwrap();
    assert!((p3.bits.unwrap() - h(0.2)).abs() < 1e-12);
    let ps = parallel(0.2, 0.2);
    let f = FactorizationOuter::simple(&ps, &[0.5, 0.5], false).unwrap();
    let p6 = special_case_value(SpecialCase::P6, &ps, &f).unwrap();
    assert!((p6.bits.unwrap() - 1.0).abs() < 1e-12);
    assert_eq!(p6.binding, Binding::First);
    // 1 − (1 − h(0.2)) + h(0.2)
    assert!((p6.raw - 1.0).abs() < 1e-12);
}

#[test]
fn perfect_feedback_examples() {
    let ux = |p: [f64; 2]| {
        JointPmf::new(vec![binary(U), binary(X)], vec![p[0], 0.0, 0.0, p[1]]).unwrap()
    };
    let open = WtgfChannel::with_output_feedback(
        Alphabet::indexed(2),
        Alphabet::indexed(2),
        Alphabet::degenerate(),
        vec![1.0, 0.0, 0.0, 1.0],
    )
    .unwrap();
    assert!((perfect_feedback_rate(&open, &ux([0.5, 0.5])).unwrap().bits.unwrap() - 1.0).abs() < 1e-12);
    let r = perfect_feedback_rate(&perfect_feedback(0.2), &ux([0.5, 0.5])).unwrap();
    assert!((r.bits.unwrap() - h(0.2)).abs() < 1e-12);
    assert!(matches!(perfect_feedback_rate(&bsc_wiretap(0.1, 0.2), &ux([0.5, 0.5])), Err(Error::Model(_))));
}

#[test]
fn eve_seeing_bobs_output_gets_everything_with_perfect_feedback() {
    for flip in [0.0, 0.1, 0.3] {
        let w = [vec![1.0 - flip, flip], vec![flip, 1.0 - flip]];
        let mut rows = Vec::new();
        for x in 0..2 {
            for y in 0..2 {
                for z in 0..2 {
                    rows.push(if z == y { w[x][y] } else { 0.0 });
                }
            }
        }
        let ch =
            WtgfChannel::with_output_feedback(Alphabet::indexed(2), Alphabet::indexed(2), Alphabet::indexed(2), rows)
                .unwrap();
        let ux = JointPmf::new(vec![binary(U), binary(X)], vec![0.3, 0.1, 0.2, 0.4]).unwrap();
        assert!(perfect_feedback_rate(&ch, &ux).unwrap().bits.unwrap() < 1e-12);
    }
}

fn state_channel(rows: Vec<f64>, ps: Vec<f64>, ns: usize) -> StateChannel {
    let s = if ns == 1 { Alphabet::degenerate() } else { Alphabet::indexed(ns) };
    let nz = rows.len() / (2 * ns * 2);
    let z = if nz == 1 { Alphabet::degenerate() } else { Alphabet::indexed(nz) };
    StateChannel::from_tensors(Alphabet::indexed(2), s, Alphabet::indexed(2), z, rows, ps).unwrap()
}

fn branch_one_with_u_equal_x(sc: &StateChannel, pu: Vec<f64>) -> StateFactors {
    let ns = sc.s().len();
    let uvar = binary(U);
    let svar = Var::new(S, sc.s().clone());
    let up = binary(UPRIME);
    StateFactors::One {
        pu: JointPmf::single(uvar.clone(), pu).unwrap(),
        uprime: Kernel::deterministic(vec![uvar, svar.clone()], vec![up.clone()], |i| i / ns).unwrap(),
        x_given_uprime_s: Kernel::deterministic(vec![up, svar], vec![binary(X)], |i| i / ns).unwrap(),
    }
}

#[test]
fn causal_state_examples() {
    // Y = X, Z constant, S a fair bit that does not act
    let mut rows = Vec::new();
    for x in 0..2 {
        for _s in 0..2 {
            for y in 0..2 {
                rows.push(f64::from(u8::from(y == x)));
            }
        }
    }
    let sc = state_channel(rows, vec![0.5, 0.5], 2);
    let r = causal_state_rate(&sc, &branch_one_with_u_equal_x(&sc, vec![0.5, 0.5])).unwrap();
    assert!((r.bits.unwrap() - 1.0).abs() < 1e-12);

    // Y = Z = X, branch two with U = X independent of S
    let mut rows = Vec::new();
    for x in 0..2 {
        for _s in 0..2 {
            for y in 0..2 {
                for z in 0..2 {
                    rows.push(f64::from(u8::from(y == x && z == x)));
                }
            }
        }
    }
    let sc = state_channel(rows, vec![0.5, 0.5], 2);
    let f = StateFactors::Two {
        pu: JointPmf::single(binary(U), vec![0.5, 0.5]).unwrap(),
        x_given_u_s: Kernel::deterministic(vec![binary(U), Var::new(S, Alphabet::indexed(2))], vec![binary(X)], |i| i / 2)
            .unwrap(),
    };
    let r = causal_state_rate(&sc, &f).unwrap();
    assert!((r.bits.unwrap() - 1.0).abs() < 1e-12);
    assert_eq!(r.binding, Binding::Both);
}

#[test]
fn degenerate_state_gives_the_wiretap_form() {
    let (wy, wz) = (0.1, 0.2);
    let mut rows = Vec::new();
    for x in 0..2 {
        for y in 0..2 {
            for z in 0..2 {
                let py = if y == x { 1.0 - wy } else { wy };
                let pz = if z == x { 1.0 - wz } else { wz };
                rows.push(py * pz);
            }
        }
    }
    let sc = state_channel(rows, vec![1.0], 1);
    for p in [0.5, 0.3, 0.85] {
        let r = causal_state_rate(&sc, &branch_one_with_u_equal_x(&sc, vec![p, 1.0 - p])).unwrap();
        let pux = vec![vec![p, 0.0], vec![0.0, 1.0 - p]];
        let by = mi_through(&pux, &[vec![1.0 - wy, wy], vec![wy, 1.0 - wy]]);
        let bz = mi_through(&pux, &[vec![1.0 - wz, wz], vec![wz, 1.0 - wz]]);
        assert!((r.raw - (by - bz)).abs() < 1e-12);
    }
}

#[test]
fn randomized_map_is_rejected() {
    let sc = state_channel(vec![0.25; 16], vec![0.5, 0.5], 2);
    let uvar = binary(U);
    let svar = Var::new(S, Alphabet::indexed(2));
    let up = binary(UPRIME);
    let f = StateFactors::One {
        pu: JointPmf::single(uvar.clone(), vec![0.5, 0.5]).unwrap(),
        uprime: Kernel::new(vec![uvar, svar.clone()], vec![up.clone()], vec![0.5; 8]).unwrap(),
        x_given_uprime_s: Kernel::deterministic(vec![up, svar], vec![binary(X)], |i| i / 2).unwrap(),
    };
    assert!(matches!(causal_state_rate(&sc, &f), Err(Error::Argument(_))));
}

#[test]
fn erasure_closed_forms() {
    let r = erasure_rates(ErasureParams::new(0.5, 0.5).unwrap());
    assert!((r.inner_kg - 1.0 / 6.0).abs() < 1e-15);
    assert!((r.capacity - 3.0 / 14.0).abs() < 1e-15);
    for d in [0.0, 0.3, 1.0] {
        let r = erasure_rates(ErasureParams::new(d, 0.0).unwrap());
        assert_eq!((r.inner_kg, r.capacity), (0.0, 0.0));
    }
    for de in [0.2, 0.7, 1.0] {
        let r = erasure_rates(ErasureParams::new(0.0, de).unwrap());
        assert!((r.inner_kg - de).abs() < 1e-15);
        assert!((r.capacity - de).abs() < 1e-15);
    }
}

#[test]
fn erasure_inner_stays_below_capacity() {
    for i in 0..=20 {
        for j in 0..=20 {
            let (d, de) = (i as f64 * 0.05, j as f64 * 0.05);
            let r = erasure_rates(ErasureParams::new(d, de).unwrap());
            assert!(r.inner_kg <= r.capacity + 1e-15, "({d}, {de})");
            if (1..20).contains(&i) && (1..20).contains(&j) {
                assert!(r.capacity - r.inner_kg > 1e-6, "({d}, {de})");
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn identical_outputs_give_nothing(
        wy in prop::collection::vec(stochastic(2), 3),
        wyh in prop::collection::vec(stochastic(2), 3),
        seed in any::<u64>(),
    ) {
        let ch = eve_copies_bob(&wy, &wyh);
        for kind in [KgKind::Kg1, KgKind::Kg2, KgKind::SecretKey] {
            let q = if kind == KgKind::Kg2 { 1 } else { 2 };
            let fam = KgFamily { ch: &ch, kind, q, u: 2, v: 2, t: 2, u_is_x: false };
            let f = random_point(&fam, seed);
            let r = fam.value(&f).unwrap();
            prop_assert!(r.raw <= 1e-12, "{kind:?}: {r:?}");
            prop_assert!(r.bits.is_none_or(|b| b <= 1e-12));
        }
    }

    #[test]
    fn rates_are_never_negative(
        rows in prop::collection::vec(stochastic(8), 2),
        seed in any::<u64>(),
    ) {
        let ch = WtgfChannel::new(
            Alphabet::indexed(2), Alphabet::indexed(2), Alphabet::indexed(2), Alphabet::indexed(2),
            rows.concat(),
        ).unwrap();
        for kind in [KgKind::Kg1, KgKind::Kg2, KgKind::SecretKey] {
            let q = if kind == KgKind::Kg2 { 1 } else { 2 };
            let fam = KgFamily { ch: &ch, kind, q, u: 2, v: 2, t: 2, u_is_x: false };
            let r = fam.value(&random_point(&fam, seed)).unwrap();
            if let Some(b) = r.bits {
                prop_assert!(b >= 0.0);
                prop_assert_eq!(b, r.raw.max(0.0));
            }
        }
    }

    #[test]
    fn shared_side_information_costs_nothing(seed in any::<u64>(), eve in 0.0f64..0.5, src in 0.0f64..0.5) {
        let ps = parallel(eve, src);
        let fam = OuterFamily { ps: &ps, kind: OuterKind::Secrecy, u: 2, v: 3, t: 2, u_is_x: false };
        let f = random_point(&fam, seed);
        let joint = f.source_joint(&ps).unwrap();
        prop_assert!(joint.mutual_information(&[V], &[YHATS], &[YS]).unwrap() < 1e-12);
    }

    #[test]
    fn key_outer_without_description_is_the_channel_part(
        bob in 0.0f64..0.5,
        eve in 0.0f64..0.5,
        pu in stochastic(2),
        xu in prop::collection::vec(stochastic(2), 2),
    ) {
        let ps = ParallelSourcesChannel::from_independent_main(
            &bsc(XC, YC, bob), &bsc(XC, ZC, eve), shared_source(0.3),
        ).unwrap();
        let pux: Vec<Vec<f64>> = (0..2).map(|u| xu[u].iter().map(|p| p * pu[u]).collect()).collect();
        let uxc = JointPmf::new(vec![binary(U), binary(XC)], pux.concat()).unwrap();
        let vk = Kernel::constant(vec![binary(YHATS)], vec![degenerate(V)], vec![1.0]).unwrap();
        let tk = Kernel::constant(vec![degenerate(V)], vec![degenerate(T)], vec![1.0]).unwrap();
        let f = FactorizationOuter::new(uxc, vk, tk).unwrap();
        let r = outer_sk_parallel(&ps, &f).unwrap();
        let w = |p: f64| vec![vec![1.0 - p, p], vec![p, 1.0 - p]];
        let oracle = mi_through(&pux, &w(bob)) - mi_through(&pux, &w(eve));
        prop_assert!((r.raw - oracle).abs() < 1e-12);
    }

    #[test]
    fn p2_and_p5_coincide(seed in any::<u64>(), eve in 0.0f64..0.5, src in 0.0f64..0.5) {
        let ps = parallel(eve, src);
        let fam = OuterFamily { ps: &ps, kind: OuterKind::Secrecy, u: 2, v: 2, t: 2, u_is_x: false };
        let f = random_point(&fam, seed);
        let a = special_case_value(SpecialCase::P2, &ps, &f).unwrap();
        let b = special_case_value(SpecialCase::P5, &ps, &f).unwrap();
        prop_assert_eq!(a.raw, b.raw);
        prop_assert_eq!(a.bits, b.bits);
    }

    #[test]
    fn wiretap_reduction_matches_the_oracle(
        bob in 0.0f64..0.5,
        eve in 0.0f64..0.5,
        pu in stochastic(3),
        xu in prop::collection::vec(stochastic(2), 3),
    ) {
        let ch = bsc_wiretap(bob, eve);
        let u = Var::new(U, Alphabet::indexed(3));
        let qu = JointPmf::new(vec![degenerate(Q), u.clone()], pu.clone()).unwrap();
        let xk = Kernel::from_rows(vec![u], vec![binary(X)], xu.clone()).unwrap();
        let f = FactorizationKG::with_channel_part(&ch, qu, xk).unwrap();
        let pux: Vec<Vec<f64>> = (0..3).map(|i| xu[i].iter().map(|p| p * pu[i]).collect()).collect();
        let w = |p: f64| vec![vec![1.0 - p, p], vec![p, 1.0 - p]];
        let oracle = (mi_through(&pux, &w(bob)) - mi_through(&pux, &w(eve))).max(0.0);
        prop_assert!((rate_kg1(&ch, &f).unwrap().bits.unwrap() - oracle).abs() < 1e-12);
    }
}
