use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::rates::{CodeSizes, SchemeRates, Strategy};
use super::typical::{TypTable, TypicalityConfig};
use crate::bounds::{FactorizationKG, Q, T, U, V};
use crate::channels::{WtgfChannel, X, Y, YHAT};
use crate::error::{Error, Result};
use crate::probkit::{JointPmf, Kernel};

/// Largest index space (words per layer, bin-map entries) a codebook may span.
pub const CODEBOOK_BUDGET: u128 = 1 << 22;

const REJECTION_TRIES: usize = 64;

/// Seed mixer (SplitMix64 finalizer).
pub(crate) fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub(crate) fn derive_seed(parts: &[u64]) -> u64 {
    parts.iter().fold(0x51_7cc1_b727_220a, |acc, &p| mix(acc ^ mix(p)))
}

const LAYER_Q: u64 = 1;
const LAYER_U: u64 = 2;
const LAYER_T: u64 = 3;
const LAYER_V: u64 = 4;
const LAYER_PERM: u64 = 5;

pub(crate) struct Rows(Vec<WeightedIndex<f64>>);

impl Rows {
    fn from_kernel(k: &Kernel) -> Result<Self> {
        (0..k.in_len())
            .map(|r| WeightedIndex::new(k.row(r)).map_err(|e| Error::Model(format!("sampler row {r}: {e}"))))
            .collect::<Result<Vec<_>>>()
            .map(Self)
    }

    pub(crate) fn new(rows: Vec<WeightedIndex<f64>>) -> Self {
        Self(rows)
    }

    pub(crate) fn sample(&self, row: usize, rng: &mut ChaCha8Rng) -> u8 {
        self.0[row].sample(rng) as u8
    }

    pub(crate) fn sample_index(&self, row: usize, rng: &mut ChaCha8Rng) -> usize {
        self.0[row].sample(rng)
    }
}

/// Index of a `u` codeword.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct UIndex {
    pub l_prime: u64,
    pub l_dprime: u64,
    pub m0: u64,
    pub m1: u64,
    pub lf: u64,
}

/// Layered random codebook with bins, sub-bins, key partition and index
/// recombination. Codewords are generated on demand from the seed, so two
/// codebooks with equal inputs are identical.
pub struct Codebook {
    pub(crate) rates: SchemeRates,
    pub(crate) sizes: CodeSizes,
    pub(crate) seed: u64,
    pub(crate) typ: TypicalityConfig,
    pub(crate) n: usize,
    nx: usize,
    nt: usize,
    q_rows: Rows,
    u_rows: Rows,
    t_rows: Rows,
    v_rows: Rows,
    pub(crate) x_rows: Rows,
    pub(crate) x_map: Option<Vec<u8>>,
    tab_q: TypTable,
    tab_qu: TypTable,
    tab_pt: TypTable,
    tab_utv: TypTable,
    pub(crate) tab_enc1: TypTable,
    pub(crate) tab_enc2: TypTable,
    pub(crate) tab_dec_u: TypTable,
    pub(crate) tab_dec1: TypTable,
    pub(crate) tab_dec2: TypTable,
    perm_t: Vec<u32>,
    inv_t: Vec<u32>,
    perm_v: Vec<u32>,
    inv_v: Vec<u32>,
    perm_k: Vec<u32>,
    perm_l: Vec<u32>,
    inv_l: Vec<u32>,
}

fn permutation(len: u64, seed: u64, which: u64) -> (Vec<u32>, Vec<u32>) {
    let mut p: Vec<u32> = (0..len as u32).collect();
    p.shuffle(&mut ChaCha8Rng::seed_from_u64(derive_seed(&[seed, LAYER_PERM, which])));
    let mut inv = vec![0u32; p.len()];
    for (i, &v) in p.iter().enumerate() {
        inv[v as usize] = i as u32;
    }
    (p, inv)
}

/// Build the codebook of a scheme.
pub fn build_codebook(
    rates: &SchemeRates,
    f: &FactorizationKG,
    ch: &WtgfChannel,
    seed: u64,
    typ: TypicalityConfig,
) -> Result<Codebook> {
    let sizes = rates.sizes()?;
    if rates.strategy == Strategy::Kg2 && f.cardinalities()[0] != 1 {
        return Err(Error::Argument("the second strategy needs a singleton Q".into()));
    }
    let largest = [
        sizes.u_total() as u128,
        sizes.t_total() as u128,
        sizes.v_total() as u128,
        (sizes.t_bins * sizes.v_bins) as u128,
    ]
    .into_iter()
    .max()
    .unwrap_or(0);
    if largest > CODEBOOK_BUDGET {
        return Err(Error::BudgetExceeded {
            required: largest,
            budget: CODEBOOK_BUDGET,
        });
    }
    let joint: JointPmf = f.assemble(ch)?;
    if joint.vars().iter().any(|v| v.len() > 256) {
        return Err(Error::Argument("simulation supports alphabets of at most 256 symbols".into()));
    }
    let parent = match rates.strategy {
        Strategy::Kg1 => Q,
        Strategy::Kg2 => U,
    };
    let q_rows = Rows(vec![WeightedIndex::new(joint.marginalize(&[Q])?.mass())
        .map_err(|e| Error::Model(format!("p(q): {e}")))?]);
    let (perm_t, inv_t) = permutation(sizes.t_total(), seed, 0);
    let (perm_v, inv_v) = permutation(sizes.v_total(), seed, 1);
    let (perm_k, _) = permutation(sizes.v_subbins, seed, 2);
    let (perm_l, inv_l) = permutation(sizes.t_bins * sizes.v_bins, seed, 3);
    let x_map = if f.x_given_u.is_deterministic() {
        Some((0..f.x_given_u.in_len()).map(|u| f.x_given_u.deterministic_output(u).unwrap_or(0) as u8).collect())
    } else {
        None
    };
    Ok(Codebook {
        rates: rates.clone(),
        sizes,
        seed,
        typ,
        n: rates.n,
        nx: joint.alphabet(X)?.len(),
        nt: joint.alphabet(T)?.len(),
        q_rows,
        u_rows: Rows::from_kernel(&joint.conditional(&[Q], &[U])?)?,
        t_rows: Rows::from_kernel(&joint.conditional(&[parent], &[T])?)?,
        v_rows: Rows::from_kernel(&joint.conditional(&[U, T], &[V])?)?,
        x_rows: Rows::from_kernel(&f.x_given_u)?,
        x_map,
        tab_q: TypTable::new(&joint, &[Q])?,
        tab_qu: TypTable::new(&joint, &[Q, U])?,
        tab_pt: TypTable::new(&joint, &[parent, T])?,
        tab_utv: TypTable::new(&joint, &[U, T, V])?,
        tab_enc1: TypTable::new(&joint, &[T, Q, U, X, YHAT])?,
        tab_enc2: TypTable::new(&joint, &[V, T, Q, U, X, YHAT])?,
        tab_dec_u: TypTable::new(&joint, &[Q, U, Y])?,
        tab_dec1: TypTable::new(&joint, &[T, Q, U, Y])?,
        tab_dec2: TypTable::new(&joint, &[V, T, Q, U, Y])?,
        perm_t,
        inv_t,
        perm_v,
        inv_v,
        perm_k,
        perm_l,
        inv_l,
    })
}

impl Codebook {
    pub fn rates(&self) -> &SchemeRates {
        &self.rates
    }

    pub fn sizes(&self) -> &CodeSizes {
        &self.sizes
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn typicality(&self) -> &TypicalityConfig {
        &self.typ
    }

    pub fn blocklength(&self) -> usize {
        self.n
    }

    pub fn strategy(&self) -> Strategy {
        self.rates.strategy
    }

    /// Whether `p(x|u)` is deterministic.
    pub fn deterministic_encoder(&self) -> bool {
        self.x_map.is_some()
    }

    /// Draw i.i.d. from `row_of(i)` until the word passes `check` (bounded tries).
    fn draw(&self, key: &[u64], row_of: impl Fn(usize) -> usize, rows: &Rows, check: impl Fn(&[u8]) -> bool) -> Vec<u8> {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(key));
        let mut w = vec![0u8; self.n];
        for _ in 0..REJECTION_TRIES {
            for (i, s) in w.iter_mut().enumerate() {
                *s = rows.sample(row_of(i), &mut rng);
            }
            if check(&w) {
                break;
            }
        }
        w
    }

    /// `q(l′)`; the all-zero degenerate word for the second strategy.
    pub fn q_word(&self, l_prime: u64) -> Vec<u8> {
        let l = if self.rates.strategy == Strategy::Kg2 { 0 } else { l_prime };
        let delta = self.typ.codebook;
        self.draw(&[self.seed, LAYER_Q, l], |_| 0, &self.q_rows, |w| self.tab_q.is_typical(&[w], delta))
    }

    /// `u(r)` drawn conditionally on `q(l′)`.
    pub fn u_word_on(&self, r: u64, q: &[u8]) -> Vec<u8> {
        let delta = self.typ.codebook;
        self.draw(&[self.seed, LAYER_U, r], |i| q[i] as usize, &self.u_rows, |w| {
            self.tab_qu.is_typical(&[q, w], delta)
        })
    }

    pub fn u_word(&self, r: u64) -> Vec<u8> {
        let q = self.q_word(self.split(r).l_prime);
        self.u_word_on(r, &q)
    }

    /// Index of the layer a `t` word hangs from: `l′` (first strategy) or `r` (second).
    pub fn t_parent(&self, r: u64) -> u64 {
        match self.rates.strategy {
            Strategy::Kg1 => self.split(r).l_prime,
            Strategy::Kg2 => r,
        }
    }

    /// `t(parent, s1)` drawn conditionally on the parent word (`q` or `u`).
    pub fn t_word_on(&self, parent: u64, parent_word: &[u8], s1: u64) -> Vec<u8> {
        let delta = self.typ.codebook;
        self.draw(
            &[self.seed, LAYER_T, parent, s1],
            |i| parent_word[i] as usize,
            &self.t_rows,
            |w| self.tab_pt.is_typical(&[parent_word, w], delta),
        )
    }

    /// Parent word of the `t` layer for the codeword `u(r)`.
    pub fn t_parent_word(&self, q: &[u8], u: &[u8]) -> Vec<u8> {
        match self.rates.strategy {
            Strategy::Kg1 => q.to_vec(),
            Strategy::Kg2 => u.to_vec(),
        }
    }

    /// `v(r, s1, s2)` drawn conditionally on `(u(r), t(·, s1))`.
    pub fn v_word_on(&self, r: u64, s1: u64, s2: u64, u: &[u8], t: &[u8]) -> Vec<u8> {
        let delta = self.typ.codebook;
        let nt = self.nt;
        self.draw(
            &[self.seed, LAYER_V, r, s1, s2],
            |i| u[i] as usize * nt + t[i] as usize,
            &self.v_rows,
            |w| self.tab_utv.is_typical(&[u, t, w], delta),
        )
    }

    pub fn split(&self, r: u64) -> UIndex {
        let s = &self.sizes;
        let lf = r % s.lf;
        let r = r / s.lf;
        let m1 = r % s.m1;
        let r = r / s.m1;
        let m0 = r % s.m0;
        let r = r / s.m0;
        UIndex {
            l_prime: r / s.l_dprime,
            l_dprime: r % s.l_dprime,
            m0,
            m1,
            lf,
        }
    }

    pub fn join(&self, i: UIndex) -> u64 {
        let s = &self.sizes;
        (((i.l_prime * s.l_dprime + i.l_dprime) * s.m0 + i.m0) * s.m1 + i.m1) * s.lf + i.lf
    }

    /// Bin `l1` holding `t(·, s1)`.
    pub fn t_bin(&self, s1: u64) -> u64 {
        self.perm_t[s1 as usize] as u64 / self.sizes.t_per_bin
    }

    /// Members of bin `B1(l1)`.
    pub fn t_bin_members(&self, l1: u64) -> impl Iterator<Item = u64> + '_ {
        let b = self.sizes.t_per_bin as usize;
        self.inv_t[l1 as usize * b..(l1 as usize + 1) * b].iter().map(|&s| s as u64)
    }

    /// Bin `l2` and sub-bin `k` holding `v(·, ·, s2)`.
    pub fn v_bin(&self, s2: u64) -> (u64, u64) {
        let p = self.perm_v[s2 as usize] as u64;
        let per_bin = self.sizes.v_per_bin();
        (p / per_bin, (p % per_bin) / self.sizes.v_per_subbin)
    }

    /// Members of bin `B2(·, l2)`.
    pub fn v_bin_members(&self, l2: u64) -> impl Iterator<Item = u64> + '_ {
        let b = self.sizes.v_per_bin() as usize;
        self.inv_v[l2 as usize * b..(l2 as usize + 1) * b].iter().map(|&s| s as u64)
    }

    /// Members of sub-bin `B̄2(·, l2, k)`.
    pub fn v_subbin_members(&self, l2: u64, k: u64) -> impl Iterator<Item = u64> + '_ {
        let b = self.sizes.v_per_subbin as usize;
        let start = l2 as usize * self.sizes.v_per_bin() as usize + k as usize * b;
        self.inv_v[start..start + b].iter().map(|&s| s as u64)
    }

    /// Key `k′ = M_k(k)`.
    pub fn key_of(&self, k: u64) -> u64 {
        let per_key = self.sizes.v_subbins / self.sizes.keys;
        self.perm_k[k as usize] as u64 / per_key
    }

    /// `(l′, l″) = M_l(l1, l2)`; the identity layout for the second strategy.
    pub fn recombine(&self, l1: u64, l2: u64) -> (u64, u64) {
        let flat = l1 * self.sizes.v_bins + l2;
        let img = match self.rates.strategy {
            Strategy::Kg1 => self.perm_l[flat as usize] as u64,
            Strategy::Kg2 => flat,
        };
        (img / self.sizes.l_dprime, img % self.sizes.l_dprime)
    }

    /// `M_l⁻¹`.
    pub fn recombine_inv(&self, l_prime: u64, l_dprime: u64) -> (u64, u64) {
        let img = l_prime * self.sizes.l_dprime + l_dprime;
        let flat = match self.rates.strategy {
            Strategy::Kg1 => self.inv_l[img as usize] as u64,
            Strategy::Kg2 => img,
        };
        (flat / self.sizes.v_bins, flat % self.sizes.v_bins)
    }

    pub(crate) fn x_rows_len(&self) -> usize {
        self.nx
    }
}

/// One-time pad on zero-based indices: addition modulo the key count.
pub fn encrypt(m1: u64, key: u64, keys: u64) -> u64 {
    (m1 + key) % keys
}

pub fn decrypt(c: u64, key: u64, keys: u64) -> u64 {
    (c + keys - key % keys) % keys
}
