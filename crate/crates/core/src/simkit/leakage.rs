use std::collections::{BTreeMap, HashMap};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::codebook::{derive_seed, Codebook};
use super::session::{channel_input, describe, encode_index, ChannelSampler, Description, TieBreak};
use crate::channels::WtgfChannel;
use crate::error::{Error, Result};

/// Default cap on enumerated weighted paths.
pub const ENUMERATION_BUDGET: u128 = 100_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LeakageMethod {
    Enumeration,
    MonteCarlo,
}

/// Leakage of the messages (and optionally keys) to Eve's sequences over a session,
/// for a fixed codebook, a deterministic encoder and lowest-index tie-breaks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeakageResult {
    pub method: LeakageMethod,
    /// `I(M; Z^{nb})` in bits.
    pub message_bits: f64,
    /// `I(K; Z^{nb})` for the keys of blocks `1..b−1` (key mode).
    pub key_bits: Option<f64>,
    /// `log2 |K| − H(K)` (key mode).
    pub key_uniformity_deficit: Option<f64>,
    /// Standard error of a Monte Carlo estimate.
    pub std_error: Option<f64>,
    pub trials: Option<u64>,
    /// Number of enumerated weighted paths.
    pub state_space: Option<u128>,
}

/// `I(A;B)` in bits from a joint table.
fn mutual_information(joint: &BTreeMap<(u64, u64), f64>) -> f64 {
    let mut pa: BTreeMap<u64, f64> = BTreeMap::new();
    let mut pb: BTreeMap<u64, f64> = BTreeMap::new();
    for (&(a, b), &p) in joint {
        *pa.entry(a).or_default() += p;
        *pb.entry(b).or_default() += p;
    }
    let mut sum = 0.0;
    let mut comp = 0.0;
    for (&(a, b), &p) in joint {
        if p > 0.0 {
            let term = p * (p / (pa[&a] * pb[&b])).log2() - comp;
            let t = sum + term;
            comp = (t - sum) - term;
            sum = t;
        }
    }
    sum.max(0.0)
}

fn entropy_of_first(joint: &BTreeMap<(u64, u64), f64>) -> f64 {
    let mut pa: BTreeMap<u64, f64> = BTreeMap::new();
    for (&(a, _), &p) in joint {
        *pa.entry(a).or_default() += p;
    }
    -pa.values().filter(|&&p| p > 0.0).map(|&p| p * p.log2()).sum::<f64>()
}

fn require_deterministic(cb: &Codebook, deterministic: bool) -> Result<()> {
    if !deterministic {
        return Err(Error::Refused(
            "exact leakage needs the deterministic-encoder mode (lowest-index tie-breaks)".into(),
        ));
    }
    if !cb.deterministic_encoder() {
        return Err(Error::Refused("exact leakage needs a deterministic p(x|u)".into()));
    }
    Ok(())
}

/// Output sequences `(ŷ, z)` of one block for input `x`, with their probabilities.
fn block_outputs(ch: &WtgfChannel, x: &[u8]) -> Vec<(Vec<u8>, u64, f64)> {
    let k = ch.kernel();
    let (ny, nyh, nz) = (ch.y().len(), ch.yhat().len(), ch.z().len());
    // p(ŷ, z | x) per letter
    let letter: Vec<Vec<f64>> = (0..ch.x().len())
        .map(|xi| {
            let row = k.row(xi);
            let mut m = vec![0.0; nyh * nz];
            for y in 0..ny {
                for (c, slot) in m.iter_mut().enumerate() {
                    *slot += row[y * nyh * nz + c];
                }
            }
            m
        })
        .collect();
    let mut out: Vec<(Vec<u8>, u64, f64)> = vec![(Vec::new(), 0, 1.0)];
    for &xi in x {
        let mut next = Vec::with_capacity(out.len() * nyh * nz);
        for (yh, zi, p) in &out {
            for (c, &q) in letter[xi as usize].iter().enumerate() {
                if q == 0.0 {
                    continue;
                }
                let mut yh2 = yh.clone();
                yh2.push((c / nz) as u8);
                next.push((yh2, zi * nz as u64 + (c % nz) as u64, p * q));
            }
        }
        out = next;
    }
    out
}

struct Enumerator<'a> {
    cb: &'a Codebook,
    ch: &'a WtgfChannel,
    z_space: u64,
    desc_cache: HashMap<(u64, Vec<u8>), Description>,
    out_cache: HashMap<u64, Vec<(Vec<u8>, u64, f64)>>,
    msg: BTreeMap<(u64, u64), f64>,
    key: BTreeMap<(u64, u64), f64>,
}

impl Enumerator<'_> {
    fn outputs(&mut self, r: u64) -> Vec<(Vec<u8>, u64, f64)> {
        if let Some(o) = self.out_cache.get(&r) {
            return o.clone();
        }
        let u = self.cb.u_word(r);
        let x = channel_input(self.cb, &u, None);
        let o = block_outputs(self.ch, &x);
        self.out_cache.insert(r, o.clone());
        o
    }

    fn description(&mut self, r: u64, yhat: &[u8]) -> Description {
        let key = (r, yhat.to_vec());
        if let Some(d) = self.desc_cache.get(&key) {
            return *d;
        }
        let u = self.cb.u_word(r);
        let x = channel_input(self.cb, &u, None);
        let d = describe(self.cb, r, &x, yhat, &mut TieBreak::Lowest);
        self.desc_cache.insert(key, d);
        d
    }

    #[allow(clippy::too_many_arguments)]
    fn walk(&mut self, j: usize, r: u64, p: f64, m: u64, k: u64, z: u64) {
        let b = self.cb.rates.b;
        for (yhat, zb, q) in self.outputs(r) {
            let p2 = p * q;
            let z2 = z * self.z_space + zb;
            if j + 1 == b {
                *self.msg.entry((m, z2)).or_default() += p2;
                *self.key.entry((k, z2)).or_default() += p2;
                continue;
            }
            let d = self.description(r, &yhat);
            let s = self.cb.sizes;
            let w = 1.0 / (s.m0 * s.m1 * s.lf) as f64;
            for m0 in 0..s.m0 {
                for m1 in 0..s.m1 {
                    for lf in 0..s.lf {
                        let (r2, _) = encode_index(self.cb, d.chain(), m0, m1, lf);
                        let mi = m * s.m0 * s.m1 + m0 * s.m1 + m1;
                        self.walk(j + 1, r2, p2 * w, mi, k * s.keys + d.key, z2);
                    }
                }
            }
        }
    }
}

/// `|Z|^n`, checking that a whole session's Eve sequence fits a `u64` index.
fn z_space(cb: &Codebook, ch: &WtgfChannel) -> Result<u64> {
    let nz = ch.z().len() as u128;
    let session = nz.checked_pow((cb.n * cb.rates.b) as u32);
    match session {
        Some(v) if v <= u64::MAX as u128 => Ok(nz.pow(cb.n as u32) as u64),
        _ => Err(Error::Argument("Eve's session output space is too large to index".into())),
    }
}

fn path_count(cb: &Codebook, ch: &WtgfChannel) -> u128 {
    let s = cb.sizes;
    let per_block = ((ch.yhat().len() * ch.z().len()) as u128).saturating_pow(cb.n as u32);
    let msgs = (s.m0 * s.m1 * s.lf) as u128;
    let b = cb.rates.b as u32;
    (s.u_total() as u128)
        .saturating_mul(msgs.saturating_pow(b - 1))
        .saturating_mul(per_block.saturating_pow(b))
}

/// Exact leakage by enumerating every first-block codeword, message, `lf` and
/// channel realization. The first-block codeword is uniform; messages are uniform.
pub fn exact_leakage_tiny(
    cb: &Codebook,
    ch: &WtgfChannel,
    deterministic: bool,
    key_mode: bool,
    budget: u128,
) -> Result<LeakageResult> {
    require_deterministic(cb, deterministic)?;
    let paths = path_count(cb, ch);
    if paths > budget {
        return Err(Error::BudgetExceeded { required: paths, budget });
    }
    let z_space = z_space(cb, ch)?;
    let mut e = Enumerator {
        cb,
        ch,
        z_space,
        desc_cache: HashMap::new(),
        out_cache: HashMap::new(),
        msg: BTreeMap::new(),
        key: BTreeMap::new(),
    };
    let w = 1.0 / cb.sizes.u_total() as f64;
    for r in 0..cb.sizes.u_total() {
        e.walk(0, r, w, 0, 0, 0);
    }
    let key_count = (cb.sizes.keys as f64).log2() * (cb.rates.b - 1) as f64;
    Ok(LeakageResult {
        method: LeakageMethod::Enumeration,
        message_bits: mutual_information(&e.msg),
        key_bits: key_mode.then(|| mutual_information(&e.key)),
        key_uniformity_deficit: key_mode.then(|| (key_count - entropy_of_first(&e.key)).max(0.0)),
        std_error: None,
        trials: None,
        state_space: Some(paths),
    })
}

/// Plug-in estimate with the Miller–Madow correction and a delta-method standard error.
fn plug_in(counts: &BTreeMap<(u64, u64), u64>, n: u64) -> (f64, f64) {
    let nf = n as f64;
    let mut ca: BTreeMap<u64, u64> = BTreeMap::new();
    let mut cb: BTreeMap<u64, u64> = BTreeMap::new();
    for (&(a, b), &c) in counts {
        *ca.entry(a).or_default() += c;
        *cb.entry(b).or_default() += c;
    }
    let h = |it: &mut dyn Iterator<Item = u64>| -> (f64, usize) {
        let mut s = 0.0;
        let mut k = 0;
        for c in it {
            let p = c as f64 / nf;
            s -= p * p.log2();
            k += 1;
        }
        (s + (k as f64 - 1.0) / (2.0 * nf * std::f64::consts::LN_2), k)
    };
    let (ha, _) = h(&mut ca.values().copied());
    let (hb, _) = h(&mut cb.values().copied());
    let (hab, _) = h(&mut counts.values().copied());
    let est = ha + hb - hab;
    let (mut m1, mut m2) = (0.0, 0.0);
    for (&(a, b), &c) in counts {
        let i = ((c as f64 * nf) / (ca[&a] as f64 * cb[&b] as f64)).log2();
        let w = c as f64 / nf;
        m1 += w * i;
        m2 += w * i * i;
    }
    let se = ((m2 - m1 * m1).max(0.0) / nf).sqrt();
    (est, se)
}

/// Monte Carlo leakage with the same deterministic encoder; trial `i` uses seed `seed + i`.
pub fn monte_carlo_leakage(
    cb: &Codebook,
    ch: &WtgfChannel,
    trials: u64,
    seed: u64,
    key_mode: bool,
) -> Result<LeakageResult> {
    require_deterministic(cb, true)?;
    if trials == 0 {
        return Err(Error::Argument("need at least one trial".into()));
    }
    let chan = ChannelSampler::new(ch)?;
    let s = cb.sizes;
    let b = cb.rates.b;
    let z_space = z_space(cb, ch)?;
    let nz = ch.z().len() as u64;
    let samples: Vec<(u64, u64, u64)> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(&[seed.wrapping_add(i), 0x6c65_616b]));
            let mut r = rng.gen_range(0..s.u_total());
            let (mut m, mut k, mut z) = (0u64, 0u64, 0u64);
            for j in 0..b {
                let u = cb.u_word(r);
                let x = channel_input(cb, &u, None);
                let (_, yhat, zs) = chan.transmit(&x, &mut rng);
                z = z * z_space + zs.iter().fold(0u64, |acc, &c| acc * nz + c as u64);
                if j + 1 == b {
                    break;
                }
                let d = describe(cb, r, &x, &yhat, &mut TieBreak::Lowest);
                let (m0, m1, lf) = (rng.gen_range(0..s.m0), rng.gen_range(0..s.m1), rng.gen_range(0..s.lf));
                r = encode_index(cb, d.chain(), m0, m1, lf).0;
                m = m * s.m0 * s.m1 + m0 * s.m1 + m1;
                k = k * s.keys + d.key;
            }
            (m, k, z)
        })
        .collect();
    let mut mc: BTreeMap<(u64, u64), u64> = BTreeMap::new();
    let mut kc: BTreeMap<(u64, u64), u64> = BTreeMap::new();
    for (m, k, z) in samples {
        *mc.entry((m, z)).or_default() += 1;
        *kc.entry((k, z)).or_default() += 1;
    }
    let (bits, se) = plug_in(&mc, trials);
    Ok(LeakageResult {
        method: LeakageMethod::MonteCarlo,
        message_bits: bits,
        key_bits: key_mode.then(|| plug_in(&kc, trials).0),
        key_uniformity_deficit: None,
        std_error: Some(se),
        trials: Some(trials),
        state_space: None,
    })
}

/// One-time-pad check by exhaustive enumeration over `(m1, k′)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OtpCheck {
    pub keys: u64,
    /// Every ciphertext value has the same count.
    pub output_uniform: bool,
    /// Joint counts factor exactly into the product of marginals.
    pub independent: bool,
    /// `I(M1; M1 ⊕ K′)` in bits from the exact counts.
    pub mutual_information_bits: f64,
}

/// Enumerate uniform independent `m1` and `k′` on `[0, keys)`.
pub fn one_time_pad_check(keys: u64) -> Result<OtpCheck> {
    if keys == 0 {
        return Err(Error::Argument("need at least one key".into()));
    }
    let n = keys as usize;
    let mut joint = vec![0u64; n * n];
    for m in 0..keys {
        for k in 0..keys {
            joint[m as usize * n + super::codebook::encrypt(m, k, keys) as usize] += 1;
        }
    }
    let total = keys * keys;
    let row: Vec<u64> = (0..n).map(|m| joint[m * n..(m + 1) * n].iter().sum()).collect();
    let col: Vec<u64> = (0..n).map(|c| (0..n).map(|m| joint[m * n + c]).sum()).collect();
    let output_uniform = col.iter().all(|&c| c == col[0]);
    let mut independent = true;
    let mut mi = 0.0;
    for m in 0..n {
        for c in 0..n {
            let j = joint[m * n + c];
            if j * total != row[m] * col[c] {
                independent = false;
            }
            if j > 0 {
                // ratio is an exact integer quotient when the counts factor
                let num = (j * total) as f64;
                let den = (row[m] * col[c]) as f64;
                mi += j as f64 / total as f64 * (num / den).log2();
            }
        }
    }
    Ok(OtpCheck {
        keys,
        output_uniform,
        independent,
        mutual_information_bits: mi,
    })
}
