use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::probkit::JointPmf;

/// Letter-frequency typicality thresholds.
///
/// A tuple of sequences is typical at `δ` when every joint letter frequency is
/// within `δ` of its probability and no zero-probability tuple occurs.
/// Defaults: codebook 0.10, encoder 0.09 (below ε1 = ε2), decoder 0.14 (below ε̃1 = ε̃2).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TypicalityConfig {
    /// Codewords are drawn conditionally typical at this threshold.
    pub codebook: f64,
    /// Encoder covering searches.
    pub encoder: f64,
    /// Decoder searches.
    pub decoder: f64,
}

impl Default for TypicalityConfig {
    fn default() -> Self {
        Self {
            codebook: 0.10,
            encoder: 0.09,
            decoder: 0.14,
        }
    }
}

/// Joint pmf of a fixed tuple of variables, laid out for counting.
#[derive(Debug, Clone)]
pub struct TypTable {
    dims: Vec<usize>,
    pmf: Vec<f64>,
}

impl TypTable {
    /// Marginal of `joint` over `names`, in the given order.
    pub fn new(joint: &JointPmf, names: &[&str]) -> Result<Self> {
        let m = joint.marginalize(names)?.reorder(names)?;
        Ok(Self {
            dims: m.dims(),
            pmf: m.mass().to_vec(),
        })
    }

    pub fn from_parts(dims: Vec<usize>, pmf: Vec<f64>) -> Self {
        assert_eq!(dims.iter().product::<usize>(), pmf.len());
        Self { dims, pmf }
    }

    /// Whether the sequences (one per variable, equal lengths) are jointly typical at `delta`.
    pub fn is_typical(&self, seqs: &[&[u8]], delta: f64) -> bool {
        debug_assert_eq!(seqs.len(), self.dims.len());
        let n = seqs[0].len();
        if n == 0 {
            return true;
        }
        let mut counts = vec![0u32; self.pmf.len()];
        for i in 0..n {
            let mut idx = 0usize;
            for (s, &d) in seqs.iter().zip(&self.dims) {
                idx = idx * d + s[i] as usize;
            }
            if self.pmf[idx] == 0.0 {
                return false;
            }
            counts[idx] += 1;
        }
        let nf = n as f64;
        counts
            .iter()
            .zip(&self.pmf)
            .all(|(&c, &p)| (c as f64 / nf - p).abs() <= delta)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_probability_pairs_are_never_typical() {
        let t = TypTable::from_parts(vec![2, 2], vec![0.5, 0.0, 0.0, 0.5]);
        assert!(t.is_typical(&[&[0, 1, 0, 1], &[0, 1, 0, 1]], 0.0));
        assert!(!t.is_typical(&[&[0, 1, 0, 1], &[0, 1, 1, 1]], 1.0));
    }
}
