//! Run the reference simulator fixtures and print what they measure.

use wtgf::simkit::fixtures::{noiseless_session, tiny_leakage};
use wtgf::simkit::{build_codebook, exact_leakage_tiny, monte_carlo_leakage, random_messages, run_session, ENUMERATION_BUDGET};

fn main() -> wtgf::Result<()> {
    let f = noiseless_session()?;
    println!("code sizes: {:?}", f.rates.sizes()?);
    let mut ok = 0;
    for seed in 0..200u64 {
        let cb = build_codebook(&f.rates, &f.factors, &f.channel, seed, f.typicality)?;
        if run_session(&cb, &f.channel, &random_messages(&cb, seed), seed)?.success {
            ok += 1;
        }
    }
    println!("all blocks decoded in {ok} of 200 sessions");

    for flip in [Some(0.2), None] {
        let f = tiny_leakage(flip)?;
        let cb = build_codebook(&f.rates, &f.factors, &f.channel, 7, f.typicality)?;
        let exact = exact_leakage_tiny(&cb, &f.channel, true, true, ENUMERATION_BUDGET)?;
        let mc = monte_carlo_leakage(&cb, &f.channel, 100_000, 1, true)?;
        println!("eve {flip:?}: exact {exact:?}");
        println!("eve {flip:?}: sampled {mc:?}");
    }
    Ok(())
}
