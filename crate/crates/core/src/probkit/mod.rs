//! Finite-alphabet probability tensors and information measures.
//!
//! Every quantity in this crate is computed from a [`JointPmf`]: a normalized
//! tensor over an ordered list of named variables. Mass is stored row-major
//! in declaration order (the last declared variable varies fastest), and that
//! layout is also the on-disk layout used by the command-line tool.
//!
//! Logarithms are base 2 throughout and `0 log 0 = 0`.

mod kernel;
mod measures;
mod pmf;

pub use kernel::Kernel;
pub use measures::Measures;
pub use pmf::JointPmf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default tolerance for normalization checks on construction.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-9;

/// Label used for the single symbol of a degenerate alphabet.
pub const EMPTY_SYMBOL: &str = "∅";

/// An ordered set of distinct symbol labels.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Alphabet {
    symbols: Vec<String>,
}

impl Alphabet {
    pub fn new<I, S>(labels: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let symbols: Vec<String> = labels.into_iter().map(Into::into).collect();
        if symbols.is_empty() {
            return Err(Error::Argument("alphabet must contain at least one symbol".into()));
        }
        for (i, s) in symbols.iter().enumerate() {
            if symbols[..i].contains(s) {
                return Err(Error::Argument(format!("duplicate alphabet symbol `{s}`")));
            }
        }
        Ok(Self { symbols })
    }

    /// Alphabet with labels `"0"`, `"1"`, ..., `"n-1"`.
    pub fn indexed(n: usize) -> Self {
        assert!(n >= 1, "alphabet size must be at least 1");
        Self {
            symbols: (0..n).map(|i| i.to_string()).collect(),
        }
    }

    /// The one-symbol alphabet standing in for an absent variable.
    pub fn degenerate() -> Self {
        Self {
            symbols: vec![EMPTY_SYMBOL.to_string()],
        }
    }

    /// Cartesian product; labels are `(a,b,...)` and the first factor varies slowest.
    pub fn product(parts: &[&Alphabet]) -> Self {
        let mut symbols = vec![String::new()];
        for part in parts {
            let mut next = Vec::with_capacity(symbols.len() * part.len());
            for prefix in &symbols {
                for s in &part.symbols {
                    if prefix.is_empty() {
                        next.push(s.clone());
                    } else {
                        next.push(format!("{prefix},{s}"));
                    }
                }
            }
            symbols = next;
        }
        if parts.len() > 1 {
            for s in &mut symbols {
                *s = format!("({s})");
            }
        }
        Self { symbols }
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    /// Always false; present for API symmetry with collections.
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn is_degenerate(&self) -> bool {
        self.symbols.len() == 1
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn symbol(&self, index: usize) -> &str {
        &self.symbols[index]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.symbols.iter().position(|s| s == label)
    }
}

/// A named random variable.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Var {
    pub name: String,
    pub alphabet: Alphabet,
}

impl Var {
    pub fn new(name: impl Into<String>, alphabet: Alphabet) -> Self {
        Self {
            name: name.into(),
            alphabet,
        }
    }

    pub fn len(&self) -> usize {
        self.alphabet.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Binary entropy function in bits.
pub fn binary_entropy(p: f64) -> f64 {
    xlog2(p) + xlog2(1.0 - p)
}

/// `-p log2 p` with the `0 log 0 = 0` convention.
#[inline]
pub(crate) fn xlog2(p: f64) -> f64 {
    if p > 0.0 {
        -p * p.log2()
    } else {
        0.0
    }
}

pub(crate) fn check_unique(vars: &[Var]) -> Result<()> {
    for (i, v) in vars.iter().enumerate() {
        if vars[..i].iter().any(|w| w.name == v.name) {
            return Err(Error::DuplicateVariable(v.name.clone()));
        }
    }
    Ok(())
}

/// Row-major strides for the given dimensions.
pub(crate) fn strides(dims: &[usize]) -> Vec<usize> {
    let mut out = vec![1; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        out[i] = out[i + 1] * dims[i + 1];
    }
    out
}

/// Normalize `values` in place when within `tolerance` of summing to one.
pub(crate) fn normalize_checked(values: &mut [f64], tolerance: f64, what: impl FnOnce() -> String) -> Result<()> {
    for (index, &value) in values.iter().enumerate() {
        if !(value >= 0.0) || !value.is_finite() {
            return Err(Error::NegativeMass { index, value });
        }
    }
    let sum: f64 = values.iter().sum();
    if (sum - 1.0).abs() > tolerance {
        return Err(Error::NotNormalized {
            what: what(),
            sum,
            tolerance,
        });
    }
    if sum != 1.0 {
        for v in values.iter_mut() {
            *v /= sum;
        }
    }
    Ok(())
}

/// Draw a row from the flat Dirichlet(1, ..., 1) distribution.
pub fn dirichlet_row<R: rand::Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    let mut row: Vec<f64> = (0..n).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
    let s: f64 = row.iter().sum();
    row.iter_mut().for_each(|v| *v /= s);
    row
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alphabet_rejects_duplicates_and_empty() {
        assert!(Alphabet::new(["a", "b", "a"]).is_err());
        assert!(Alphabet::new(Vec::<String>::new()).is_err());
        assert!(Alphabet::degenerate().is_degenerate());
    }

    #[test]
    fn product_alphabet_is_lexicographic() {
        let a = Alphabet::indexed(2);
        let b = Alphabet::new(["x", "y", "z"]).unwrap();
        let p = Alphabet::product(&[&a, &b]);
        assert_eq!(p.len(), 6);
        assert_eq!(p.symbol(0), "(0,x)");
        assert_eq!(p.symbol(4), "(1,y)");
    }

    #[test]
    fn binary_entropy_values() {
        assert!((binary_entropy(0.2) - 0.721_928_094_887_362_3).abs() < 1e-15);
        assert_eq!(binary_entropy(0.0), 0.0);
        assert_eq!(binary_entropy(1.0), 0.0);
        assert_eq!(binary_entropy(0.5), 1.0);
    }
}
