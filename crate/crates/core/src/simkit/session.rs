use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::codebook::{decrypt, derive_seed, encrypt, Codebook, Rows, UIndex};
use crate::channels::WtgfChannel;
use crate::error::{Error, Result};

/// How the encoder resolves several (or no) typical candidates.
pub(crate) enum TieBreak<'a> {
    /// Uniform among candidates; uniform over the whole range when there are none.
    Random(&'a mut ChaCha8Rng),
    /// Lowest candidate index; index 0 when there are none.
    Lowest,
}

impl TieBreak<'_> {
    fn pick(&mut self, candidates: &[u64], range: u64) -> (u64, bool) {
        match (self, candidates.is_empty()) {
            (TieBreak::Random(rng), false) => (candidates[rng.gen_range(0..candidates.len())], true),
            (TieBreak::Random(rng), true) => (rng.gen_range(0..range), false),
            (TieBreak::Lowest, false) => (candidates[0], true),
            (TieBreak::Lowest, true) => (0, false),
        }
    }

    fn wants_all(&self) -> bool {
        matches!(self, TieBreak::Random(_))
    }
}

/// Feedback description of one block: the covering indices and what they map to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Description {
    pub s1: u64,
    pub s1_found: bool,
    pub s2: u64,
    pub s2_found: bool,
    pub l1: u64,
    pub l2: u64,
    pub k: u64,
    /// `k′ = M_k(k)`.
    pub key: u64,
}

/// Indices carried from one block to the next.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Chain {
    pub l1: u64,
    pub l2: u64,
    pub key: u64,
}

impl Description {
    pub fn chain(&self) -> Chain {
        Chain {
            l1: self.l1,
            l2: self.l2,
            key: self.key,
        }
    }
}

/// Encoder covering step on a finished block with codeword `u(r)`, input `x` and feedback `ŷ`.
pub(crate) fn describe(cb: &Codebook, r: u64, x: &[u8], yhat: &[u8], tie: &mut TieBreak<'_>) -> Description {
    let delta = cb.typ.encoder;
    let q = cb.q_word(cb.split(r).l_prime);
    let u = cb.u_word_on(r, &q);
    let parent = cb.t_parent(r);
    let pw = cb.t_parent_word(&q, &u);
    let all = tie.wants_all();
    let mut cand = Vec::new();
    for s1 in 0..cb.sizes.t_total() {
        let t = cb.t_word_on(parent, &pw, s1);
        if cb.tab_enc1.is_typical(&[&t, &q, &u, x, yhat], delta) {
            cand.push(s1);
            if !all {
                break;
            }
        }
    }
    let (s1, s1_found) = tie.pick(&cand, cb.sizes.t_total());
    let t = cb.t_word_on(parent, &pw, s1);
    cand.clear();
    for s2 in 0..cb.sizes.v_total() {
        let v = cb.v_word_on(r, s1, s2, &u, &t);
        if cb.tab_enc2.is_typical(&[&v, &t, &q, &u, x, yhat], delta) {
            cand.push(s2);
            if !all {
                break;
            }
        }
    }
    let (s2, s2_found) = tie.pick(&cand, cb.sizes.v_total());
    let l1 = cb.t_bin(s1);
    let (l2, k) = cb.v_bin(s2);
    Description {
        s1,
        s1_found,
        s2,
        s2_found,
        l1,
        l2,
        k,
        key: cb.key_of(k),
    }
}

/// Codeword index for a message given the chained indices of the previous block.
/// Returns the index and the encrypted `m1′`.
pub fn encode_index(cb: &Codebook, chain: Chain, m0: u64, m1: u64, lf: u64) -> (u64, u64) {
    let (l_prime, l_dprime) = cb.recombine(chain.l1, chain.l2);
    let m1e = encrypt(m1, chain.key, cb.sizes.keys);
    let r = cb.join(UIndex {
        l_prime,
        l_dprime,
        m0,
        m1: m1e,
        lf,
    });
    (r, m1e)
}

pub(crate) fn channel_input(cb: &Codebook, u: &[u8], rng: Option<&mut ChaCha8Rng>) -> Vec<u8> {
    match (&cb.x_map, rng) {
        (Some(map), _) => u.iter().map(|&s| map[s as usize]).collect(),
        (None, Some(rng)) => u.iter().map(|&s| cb.x_rows.sample(s as usize, rng)).collect(),
        (None, None) => unreachable!("stochastic encoder needs randomness"),
    }
}

pub(crate) struct ChannelSampler {
    rows: Rows,
    ny: usize,
    nyh: usize,
    nz: usize,
}

impl ChannelSampler {
    pub(crate) fn new(ch: &WtgfChannel) -> Result<Self> {
        let k = ch.kernel();
        let rows = (0..k.in_len())
            .map(|r| {
                rand::distributions::WeightedIndex::new(k.row(r)).map_err(|e| Error::Model(format!("channel row {r}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            rows: Rows::new(rows),
            ny: ch.y().len(),
            nyh: ch.yhat().len(),
            nz: ch.z().len(),
        })
    }

    /// `(y, ŷ, z)` for input `x`.
    pub(crate) fn transmit(&self, x: &[u8], rng: &mut ChaCha8Rng) -> (Vec<u8>, Vec<u8>, Vec<u8>) {
        let n = x.len();
        let (mut y, mut yh, mut z) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
        for &xi in x {
            let o = self.rows.sample_index(xi as usize, rng);
            z.push((o % self.nz) as u8);
            yh.push((o / self.nz % self.nyh) as u8);
            y.push((o / (self.nz * self.nyh) % self.ny) as u8);
        }
        (y, yh, z)
    }
}

/// Everything that happened in one block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockTrace {
    /// One-based block number.
    pub block: usize,
    /// `(m0, m1)`; absent in the first block.
    pub message: Option<(u64, u64)>,
    pub m1_encrypted: Option<u64>,
    pub index: UIndex,
    pub r: u64,
    /// Feedback description of this block, computed at the start of the next one.
    pub description: Option<Description>,
    pub x: Vec<u8>,
    pub y: Vec<u8>,
    pub yhat: Vec<u8>,
    pub z: Vec<u8>,
    /// Decoder's estimate of `r` for this block.
    pub decoded_r: Option<u64>,
    /// Decoder's estimates of the previous block's `(s1, s2)`.
    pub decoded_prev_s1: Option<u64>,
    pub decoded_prev_s2: Option<u64>,
    pub decoded_key: Option<u64>,
    pub decoded_message: Option<(u64, u64)>,
    /// Message decoded correctly; always true for the first block.
    pub success: bool,
}

/// One encoder/decoder session over `b` blocks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionTrace {
    pub seed: u64,
    pub blocks: Vec<BlockTrace>,
    /// Every message decoded correctly.
    pub success: bool,
}

/// Uniform messages for blocks `2..=b`.
pub fn random_messages(cb: &Codebook, seed: u64) -> Vec<(u64, u64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(&[seed, 0x6d65_7373]));
    (1..cb.rates.b)
        .map(|_| (rng.gen_range(0..cb.sizes.m0), rng.gen_range(0..cb.sizes.m1)))
        .collect()
}

struct Decoder<'a> {
    cb: &'a Codebook,
    q_words: Vec<Vec<u8>>,
    u_words: Vec<Vec<u8>>,
}

const U_CACHE_LIMIT: u64 = 1 << 16;

impl<'a> Decoder<'a> {
    fn new(cb: &'a Codebook) -> Self {
        let s = cb.sizes;
        let q_words: Vec<Vec<u8>> = (0..s.l_prime).map(|l| cb.q_word(l)).collect();
        let u_words = if s.u_total() <= U_CACHE_LIMIT {
            (0..s.u_total())
                .map(|r| cb.u_word_on(r, &q_words[cb.split(r).l_prime as usize]))
                .collect()
        } else {
            Vec::new()
        };
        Self { cb, q_words, u_words }
    }

    fn u(&self, r: u64) -> std::borrow::Cow<'_, [u8]> {
        match self.u_words.get(r as usize) {
            Some(w) => std::borrow::Cow::Borrowed(w),
            None => std::borrow::Cow::Owned(self.cb.u_word_on(r, self.q(r))),
        }
    }

    fn q(&self, r: u64) -> &[u8] {
        &self.q_words[self.cb.split(r).l_prime as usize]
    }

    /// Unique `r` with `(q, u(r), y)` typical.
    fn decode_u(&self, y: &[u8]) -> Option<u64> {
        let delta = self.cb.typ.decoder;
        let mut found = None;
        for r in 0..self.cb.sizes.u_total() {
            if self.cb.tab_dec_u.is_typical(&[self.q(r), &self.u(r), y], delta) {
                if found.is_some() {
                    return None;
                }
                found = Some(r);
            }
        }
        found
    }

    /// Unique `(s1, s2)` in bins `(l1, l2)` consistent with the previous block.
    fn decode_description(&self, r: u64, y: &[u8], l1: u64, l2: u64) -> (Option<u64>, Option<u64>) {
        let cb = self.cb;
        let delta = cb.typ.decoder;
        let q = self.q(r);
        let u = self.u(r);
        let parent = cb.t_parent(r);
        let pw = cb.t_parent_word(q, &u);
        let mut s1_hat = None;
        for s1 in cb.t_bin_members(l1) {
            let t = cb.t_word_on(parent, &pw, s1);
            if cb.tab_dec1.is_typical(&[&t, q, &u, y], delta) {
                if s1_hat.is_some() {
                    return (None, None);
                }
                s1_hat = Some(s1);
            }
        }
        let Some(s1) = s1_hat else { return (None, None) };
        let t = cb.t_word_on(parent, &pw, s1);
        let mut s2_hat = None;
        for s2 in cb.v_bin_members(l2) {
            let v = cb.v_word_on(r, s1, s2, &u, &t);
            if cb.tab_dec2.is_typical(&[&v, &t, q, &u, y], delta) {
                if s2_hat.is_some() {
                    return (Some(s1), None);
                }
                s2_hat = Some(s2);
            }
        }
        (Some(s1), s2_hat)
    }
}

/// Run one session: `b` blocks, messages in blocks `2..=b`.
pub fn run_session(cb: &Codebook, ch: &WtgfChannel, messages: &[(u64, u64)], seed: u64) -> Result<SessionTrace> {
    let b = cb.rates.b;
    if messages.len() != b - 1 {
        return Err(Error::Argument(format!("need {} messages, got {}", b - 1, messages.len())));
    }
    if let Some((m0, m1)) = messages.iter().find(|(m0, m1)| *m0 >= cb.sizes.m0 || *m1 >= cb.sizes.m1) {
        return Err(Error::Argument(format!("message ({m0}, {m1}) out of range")));
    }
    if ch.x().len() != cb.x_rows_len() {
        return Err(Error::Argument("channel input alphabet differs from the codebook's".into()));
    }
    let chan = ChannelSampler::new(ch)?;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(&[seed, 0x7365_7373]));
    let mut blocks: Vec<BlockTrace> = Vec::with_capacity(b);
    for j in 0..b {
        let (r, message, m1e) = if j == 0 {
            (rng.gen_range(0..cb.sizes.u_total()), None, None)
        } else {
            let prev = &blocks[j - 1];
            let desc = describe(cb, prev.r, &prev.x, &prev.yhat, &mut TieBreak::Random(&mut rng));
            blocks[j - 1].description = Some(desc);
            let (m0, m1) = messages[j - 1];
            let lf = rng.gen_range(0..cb.sizes.lf);
            let (r, m1e) = encode_index(cb, desc.chain(), m0, m1, lf);
            (r, Some((m0, m1)), Some(m1e))
        };
        let q = cb.q_word(cb.split(r).l_prime);
        let u = cb.u_word_on(r, &q);
        let x = channel_input(cb, &u, Some(&mut rng));
        let (y, yhat, z) = chan.transmit(&x, &mut rng);
        blocks.push(BlockTrace {
            block: j + 1,
            message,
            m1_encrypted: m1e,
            index: cb.split(r),
            r,
            description: None,
            x,
            y,
            yhat,
            z,
            decoded_r: None,
            decoded_prev_s1: None,
            decoded_prev_s2: None,
            decoded_key: None,
            decoded_message: None,
            success: j == 0,
        });
    }
    let dec = Decoder::new(cb);
    for j in 0..b {
        blocks[j].decoded_r = dec.decode_u(&blocks[j].y);
    }
    let keys = cb.sizes.keys;
    for j in 1..b {
        let (Some(r_hat), Some(prev_hat)) = (blocks[j].decoded_r, blocks[j - 1].decoded_r) else {
            continue;
        };
        let idx = cb.split(r_hat);
        let (l1, l2) = cb.recombine_inv(idx.l_prime, idx.l_dprime);
        let (s1, s2) = dec.decode_description(prev_hat, &blocks[j - 1].y, l1, l2);
        let key = s2.map(|s2| cb.key_of(cb.v_bin(s2).1));
        let m1 = if keys == 1 { Some(0) } else { key.map(|k| decrypt(idx.m1, k, keys)) };
        let bt = &mut blocks[j];
        bt.decoded_prev_s1 = s1;
        bt.decoded_prev_s2 = s2;
        bt.decoded_key = key;
        bt.decoded_message = m1.map(|m1| (idx.m0, m1));
        bt.success = bt.decoded_message == bt.message;
    }
    let success = blocks.iter().all(|b| b.success);
    Ok(SessionTrace { seed, blocks, success })
}

/// Empirical error probability over independent sessions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorEstimate {
    pub trials: u64,
    pub failures: u64,
    pub p_error: f64,
    /// Half-width of the 95% normal-approximation interval.
    pub half_width: f64,
    /// Message bits per symbol within a message-carrying block.
    pub block_rate: f64,
    /// Message bits per symbol over the session, first block included.
    pub session_rate: f64,
}

/// Fraction of sessions with any message decoding failure; trial `i` uses seed `seed + i`
/// and uniform messages drawn from it.
pub fn estimate_error(cb: &Codebook, ch: &WtgfChannel, trials: u64, seed: u64) -> Result<ErrorEstimate> {
    if trials == 0 {
        return Err(Error::Argument("need at least one trial".into()));
    }
    let outcomes: Vec<Result<bool>> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let s = seed.wrapping_add(i);
            Ok(run_session(cb, ch, &random_messages(cb, s), s)?.success)
        })
        .collect();
    let mut failures = 0u64;
    for o in outcomes {
        if !o? {
            failures += 1;
        }
    }
    let p = failures as f64 / trials as f64;
    Ok(ErrorEstimate {
        trials,
        failures,
        p_error: p,
        half_width: 1.96 * (p * (1.0 - p) / trials as f64).sqrt(),
        block_rate: cb.rates.block_rate()?,
        session_rate: cb.rates.session_rate()?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simkit::build_codebook;
    use crate::simkit::fixtures::noiseless_session;

    #[test]
    fn covering_miss_falls_back_to_a_uniform_index() {
        let fx = noiseless_session().unwrap();
        let mut typ = fx.typicality;
        typ.encoder = -1.0;
        let cb = build_codebook(&fx.rates, &fx.factors, &fx.channel, 0, typ).unwrap();
        let u = cb.u_word(0);
        let x = channel_input(&cb, &u, Some(&mut ChaCha8Rng::seed_from_u64(1)));
        let lowest = describe(&cb, 0, &x, &x, &mut TieBreak::Lowest);
        assert!(!lowest.s1_found && !lowest.s2_found);
        assert_eq!((lowest.s1, lowest.s2), (0, 0));
        let total = cb.sizes.v_total();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut quarters = [0u32; 4];
        let draws = 4000;
        for _ in 0..draws {
            let d = describe(&cb, 0, &x, &x, &mut TieBreak::Random(&mut rng));
            assert!(!d.s2_found && d.s2 < total);
            quarters[(d.s2 * 4 / total) as usize] += 1;
        }
        // each quarter expects 1000 draws, standard deviation about 27
        assert!(quarters.iter().all(|&c| (880..=1120).contains(&c)), "{quarters:?}");
    }
}
