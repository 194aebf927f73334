use serde::{Deserialize, Serialize};

use super::{check_unique, normalize_checked, Alphabet, Var, NORMALIZATION_TOLERANCE};
use crate::error::{Error, Result};

/// A conditional distribution `p(to | from)` stored as row-stochastic matrix.
///
/// Rows are indexed by the row-major flat index of the `from` tuple, columns by
/// the flat index of the `to` tuple.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Kernel {
    from: Vec<Var>,
    to: Vec<Var>,
    rows: Vec<f64>,
}

impl Kernel {
    pub fn new(from: Vec<Var>, to: Vec<Var>, mut rows: Vec<f64>) -> Result<Self> {
        let mut all = from.clone();
        all.extend(to.iter().cloned());
        check_unique(&all)?;
        if to.is_empty() {
            return Err(Error::Argument("kernel needs at least one output variable".into()));
        }
        let in_len: usize = from.iter().map(Var::len).product();
        let out_len: usize = to.iter().map(Var::len).product();
        if rows.len() != in_len * out_len {
            return Err(Error::ShapeMismatch {
                expected: in_len * out_len,
                found: rows.len(),
            });
        }
        for (r, row) in rows.chunks_mut(out_len).enumerate() {
            normalize_checked(row, NORMALIZATION_TOLERANCE, || format!("kernel row {r}"))?;
        }
        Ok(Self { from, to, rows })
    }

    pub fn from_rows(from: Vec<Var>, to: Vec<Var>, rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(from, to, rows.into_iter().flatten().collect())
    }

    pub(crate) fn from_parts_unchecked(from: Vec<Var>, to: Vec<Var>, rows: Vec<f64>) -> Self {
        Self { from, to, rows }
    }

    /// `to` is an exact copy of `from`.
    pub fn identity(from: Var, to_name: &str) -> Self {
        let n = from.len();
        let mut rows = vec![0.0; n * n];
        for i in 0..n {
            rows[i * n + i] = 1.0;
        }
        let to = Var::new(to_name, from.alphabet.clone());
        Self {
            from: vec![from],
            to: vec![to],
            rows,
        }
    }

    /// Every input row equals `row`.
    pub fn constant(from: Vec<Var>, to: Vec<Var>, row: Vec<f64>) -> Result<Self> {
        let in_len: usize = from.iter().map(Var::len).product();
        let rows = (0..in_len).flat_map(|_| row.iter().copied()).collect();
        Self::new(from, to, rows)
    }

    /// Deterministic map from input flat index to output flat index.
    pub fn deterministic(from: Vec<Var>, to: Vec<Var>, map: impl Fn(usize) -> usize) -> Result<Self> {
        let in_len: usize = from.iter().map(Var::len).product();
        let out_len: usize = to.iter().map(Var::len).product();
        let mut rows = vec![0.0; in_len * out_len];
        for r in 0..in_len {
            let c = map(r);
            if c >= out_len {
                return Err(Error::Argument(format!("deterministic map sends row {r} to {c} >= {out_len}")));
            }
            rows[r * out_len + c] = 1.0;
        }
        Self::new(from, to, rows)
    }

    /// Binary symmetric kernel with crossover probability `flip`.
    pub fn bsc(from_name: &str, to_name: &str, flip: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&flip) {
            return Err(Error::Argument(format!("flip probability {flip} outside [0,1]")));
        }
        Self::new(
            vec![Var::new(from_name, Alphabet::indexed(2))],
            vec![Var::new(to_name, Alphabet::indexed(2))],
            vec![1.0 - flip, flip, flip, 1.0 - flip],
        )
    }

    pub fn from(&self) -> &[Var] {
        &self.from
    }

    pub fn to(&self) -> &[Var] {
        &self.to
    }

    pub fn in_len(&self) -> usize {
        self.from.iter().map(Var::len).product()
    }

    pub fn out_len(&self) -> usize {
        self.to.iter().map(Var::len).product()
    }

    pub fn row(&self, index: usize) -> &[f64] {
        let n = self.out_len();
        &self.rows[index * n..(index + 1) * n]
    }

    pub fn rows(&self) -> &[f64] {
        &self.rows
    }

    /// True when every row is a point mass.
    pub fn is_deterministic(&self) -> bool {
        self.rows.chunks(self.out_len()).all(|r| r.iter().all(|&p| p == 0.0 || p == 1.0))
    }

    /// Output index of a deterministic row, if the row is a point mass.
    pub fn deterministic_output(&self, row: usize) -> Option<usize> {
        let r = self.row(row);
        let pos = r.iter().position(|&p| p == 1.0)?;
        r.iter().enumerate().all(|(i, &p)| i == pos || p == 0.0).then_some(pos)
    }

    /// Serial composition `self: A -> B` then `next: B -> C`, giving `A -> C`.
    pub fn then(&self, next: &Kernel) -> Result<Kernel> {
        if next.from != self.to {
            return Err(Error::Argument("kernel chain: outputs of the first must be the inputs of the second".into()));
        }
        let (a, b, c) = (self.in_len(), self.out_len(), next.out_len());
        let mut rows = vec![0.0; a * c];
        for i in 0..a {
            for j in 0..b {
                let p = self.rows[i * b + j];
                if p == 0.0 {
                    continue;
                }
                for k in 0..c {
                    rows[i * c + k] += p * next.rows[j * c + k];
                }
            }
        }
        Kernel::new(self.from.clone(), next.to.clone(), rows)
    }

    /// Kernel onto a subset of the output variables, summing out the rest.
    pub fn marginal_outputs(&self, keep: &[&str]) -> Result<Kernel> {
        let mut mask = 0u64;
        for name in keep {
            let pos = self
                .to
                .iter()
                .position(|v| v.name == *name)
                .ok_or_else(|| Error::UnknownVariable(name.to_string()))?;
            mask |= 1 << pos;
        }
        if mask == 0 {
            return Err(Error::Argument("keep at least one output variable".into()));
        }
        let dims: Vec<usize> = self.to.iter().map(Var::len).collect();
        let full = (1u64 << dims.len()) - 1;
        let out_len = self.out_len();
        let rows = self
            .rows
            .chunks(out_len)
            .flat_map(|r| super::measures::marginalize_raw(&dims, full, r, mask))
            .collect();
        let to = self
            .to
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, v)| v.clone())
            .collect();
        Kernel::new(self.from.clone(), to, rows)
    }

    /// Same matrix with renamed variables.
    pub fn renamed(&self, from: &[&str], to: &[&str]) -> Result<Kernel> {
        if from.len() != self.from.len() || to.len() != self.to.len() {
            return Err(Error::Argument("rename needs one name per variable".into()));
        }
        let f = self
            .from
            .iter()
            .zip(from)
            .map(|(v, n)| Var::new(*n, v.alphabet.clone()))
            .collect();
        let t = self
            .to
            .iter()
            .zip(to)
            .map(|(v, n)| Var::new(*n, v.alphabet.clone()))
            .collect();
        Kernel::new(f, t, self.rows.clone())
    }

    /// Largest absolute entry difference, ignoring names; `None` on shape mismatch.
    pub fn max_abs_diff(&self, other: &Kernel) -> Option<f64> {
        if self.in_len() != other.in_len() || self.out_len() != other.out_len() {
            return None;
        }
        Some(
            self.rows
                .iter()
                .zip(&other.rows)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn row_validation_names_row() {
        let err = Kernel::new(
            vec![Var::new("X", Alphabet::indexed(2))],
            vec![Var::new("Y", Alphabet::indexed(2))],
            vec![0.5, 0.5, 0.6, 0.3],
        )
        .unwrap_err();
        match err {
            Error::NotNormalized { what, .. } => assert_eq!(what, "kernel row 1"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bsc_chain_composes_crossovers() {
        let a = Kernel::bsc("X", "Y", 0.1).unwrap();
        let b = Kernel::bsc("Y", "Z", 0.2).unwrap();
        let c = a.then(&b).unwrap();
        let p = 0.1 * 0.8 + 0.9 * 0.2;
        assert!((c.row(0)[1] - p).abs() < 1e-15);
        assert!(a.then(&a).is_err());
    }

    #[test]
    fn deterministic_detection() {
        let k = Kernel::identity(Var::new("X", Alphabet::indexed(3)), "Y");
        assert!(k.is_deterministic());
        assert_eq!(k.deterministic_output(2), Some(2));
        assert!(!Kernel::bsc("X", "Y", 0.3).unwrap().is_deterministic());
    }
}
