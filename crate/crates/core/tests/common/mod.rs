#![allow(dead_code)]

use wtgf::channels::{ParallelSourcesChannel, WtgfChannel, X, XC, Y, YC, YHATS, YS, Z, ZC, ZS};
use wtgf::probkit::{binary_entropy, Alphabet, JointPmf, Kernel, Var};

pub fn bsc(from: &str, to: &str, p: f64) -> Kernel {
    Kernel::bsc(from, to, p).unwrap()
}

/// Degraded binary symmetric wiretap channel with no feedback.
pub fn bsc_wiretap(bob: f64, eve: f64) -> WtgfChannel {
    WtgfChannel::from_independent(&bsc(X, Y, bob), &bsc(X, Z, eve)).unwrap()
}

/// `Y = Ŷ = X` and Eve through a BSC.
pub fn perfect_feedback(eve: f64) -> WtgfChannel {
    let b = Alphabet::indexed(2);
    let mut rows = Vec::new();
    for x in 0..2 {
        for y in 0..2 {
            for z in 0..2 {
                rows.push(if y != x { 0.0 } else if z == x { 1.0 - eve } else { eve });
            }
        }
    }
    WtgfChannel::with_output_feedback(b.clone(), b.clone(), b, rows).unwrap()
}

/// `Ys` uniform, `Ŷs = Ys`, `Zs = Ys` through a BSC with crossover `source_flip`.
pub fn shared_source(source_flip: f64) -> JointPmf {
    let b = Alphabet::indexed(2);
    let mut p = vec![0.0; 8];
    for y in 0..2 {
        for z in 0..2 {
            p[y * 4 + y * 2 + z] = 0.5 * if y == z { 1.0 - source_flip } else { source_flip };
        }
    }
    JointPmf::new(vec![Var::new(YS, b.clone()), Var::new(YHATS, b.clone()), Var::new(ZS, b)], p).unwrap()
}

/// Noiseless Bob, Eve through a BSC with crossover `eve_flip`, plus the shared source.
pub fn parallel(eve_flip: f64, source_flip: f64) -> ParallelSourcesChannel {
    ParallelSourcesChannel::from_independent_main(&bsc(XC, YC, 0.0), &bsc(XC, ZC, eve_flip), shared_source(source_flip))
        .unwrap()
}

/// `h(0.2)`.
pub fn h02() -> f64 {
    binary_entropy(0.2)
}

pub fn ms(t: std::time::Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}
