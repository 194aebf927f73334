use serde::{Deserialize, Serialize};

use super::measures::marginalize_raw;
use super::{check_unique, normalize_checked, strides, Alphabet, Kernel, Measures, Var, NORMALIZATION_TOLERANCE};
use crate::error::{Error, Result};

/// A normalized probability tensor over named finite variables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointPmf {
    vars: Vec<Var>,
    mass: Vec<f64>,
}

impl JointPmf {
    /// Build a joint from row-major mass, renormalizing deviations below 1e-9.
    pub fn new(vars: Vec<Var>, mass: Vec<f64>) -> Result<Self> {
        Self::with_tolerance(vars, mass, NORMALIZATION_TOLERANCE)
    }

    pub fn with_tolerance(vars: Vec<Var>, mut mass: Vec<f64>, tolerance: f64) -> Result<Self> {
        check_unique(&vars)?;
        if vars.len() > 64 {
            return Err(Error::Argument("at most 64 variables per joint".into()));
        }
        let expected: usize = vars.iter().map(Var::len).product();
        if expected != mass.len() {
            return Err(Error::ShapeMismatch {
                expected,
                found: mass.len(),
            });
        }
        normalize_checked(&mut mass, tolerance, || "joint pmf".to_string())?;
        Ok(Self { vars, mass })
    }

    /// Uniform distribution over one variable.
    pub fn uniform(var: Var) -> Self {
        let n = var.len();
        Self {
            vars: vec![var],
            mass: vec![1.0 / n as f64; n],
        }
    }

    /// Point mass at `index` of a single variable.
    pub fn point(var: Var, index: usize) -> Result<Self> {
        let n = var.len();
        if index >= n {
            return Err(Error::Argument(format!("index {index} outside alphabet of size {n}")));
        }
        let mut mass = vec![0.0; n];
        mass[index] = 1.0;
        Ok(Self { vars: vec![var], mass })
    }

    /// Distribution over a single variable.
    pub fn single(var: Var, mass: Vec<f64>) -> Result<Self> {
        Self::new(vec![var], mass)
    }

    pub fn vars(&self) -> &[Var] {
        &self.vars
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn dims(&self) -> Vec<usize> {
        self.vars.iter().map(Var::len).collect()
    }

    pub fn names(&self) -> Vec<&str> {
        self.vars.iter().map(|v| v.name.as_str()).collect()
    }

    pub fn var(&self, name: &str) -> Result<&Var> {
        Ok(&self.vars[self.position(name)?])
    }

    pub fn alphabet(&self, name: &str) -> Result<&Alphabet> {
        Ok(&self.var(name)?.alphabet)
    }

    /// Declaration position of a variable.
    pub fn position(&self, name: &str) -> Result<usize> {
        self.vars
            .iter()
            .position(|v| v.name == name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    /// Bit mask of a variable group over declaration positions.
    pub fn mask(&self, names: &[&str]) -> Result<u64> {
        names
            .iter()
            .try_fold(0u64, |acc, n| Ok(acc | 1u64 << self.position(n)?))
    }

    /// Probability of one cell, indexed by symbol positions in declaration order.
    pub fn prob(&self, index: &[usize]) -> f64 {
        let dims = self.dims();
        let st = strides(&dims);
        let flat: usize = index.iter().zip(&st).map(|(i, s)| i * s).sum();
        self.mass[flat]
    }

    pub fn measures(&self) -> Measures<'_> {
        Measures::from_raw(&self.dims(), &self.mass)
    }

    /// `H(group)` in bits.
    pub fn entropy(&self, group: &[&str]) -> Result<f64> {
        let mask = self.mask(group)?;
        let dims = self.dims();
        let marginal = marginalize_raw(&dims, full_mask(dims.len()), &self.mass, mask);
        Ok(marginal.iter().map(|&p| super::xlog2(p)).sum())
    }

    /// `H(a | c)` in bits.
    pub fn conditional_entropy(&self, a: &[&str], c: &[&str]) -> Result<f64> {
        let (ma, mc) = (self.mask(a)?, self.mask(c)?);
        Ok(self.measures().cond_entropy(ma, mc))
    }

    /// `I(a; b | c)` before clamping. Pass an empty `c` for the unconditional form.
    pub fn mutual_information_raw(&self, a: &[&str], b: &[&str], c: &[&str]) -> Result<f64> {
        let (ma, mb, mc) = (self.mask(a)?, self.mask(b)?, self.mask(c)?);
        if ma & mb != 0 || ma & mc != 0 || mb & mc != 0 {
            return Err(Error::Argument("mutual information groups must be pairwise disjoint".into()));
        }
        if ma == 0 || mb == 0 {
            return Err(Error::Argument("mutual information groups must be nonempty".into()));
        }
        Ok(self.measures().mi_raw(ma, mb, mc))
    }

    /// `I(a; b | c)` clamped at zero.
    pub fn mutual_information(&self, a: &[&str], b: &[&str], c: &[&str]) -> Result<f64> {
        let raw = self.mutual_information_raw(a, b, c)?;
        debug_assert!(raw > -1e-9);
        Ok(raw.max(0.0))
    }

    /// Sum out every variable not in `keep`; kept variables stay in declaration order.
    pub fn marginalize(&self, keep: &[&str]) -> Result<JointPmf> {
        if keep.is_empty() {
            return Err(Error::Argument("marginalize needs at least one variable to keep".into()));
        }
        let mask = self.mask(keep)?;
        let dims = self.dims();
        let mass = marginalize_raw(&dims, full_mask(dims.len()), &self.mass, mask);
        let vars = self
            .vars
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, v)| v.clone())
            .collect();
        Ok(JointPmf { vars, mass })
    }

    /// Extend the joint with the output of `kernel`: `p(a) k(b | a restricted to kernel.from)`.
    pub fn compose(&self, kernel: &Kernel) -> Result<JointPmf> {
        let mut from_pos = Vec::with_capacity(kernel.from().len());
        for fv in kernel.from() {
            let pos = self.position(&fv.name)?;
            if self.vars[pos].alphabet != fv.alphabet {
                return Err(Error::Argument(format!("alphabet of `{}` differs between joint and kernel", fv.name)));
            }
            from_pos.push(pos);
        }
        for tv in kernel.to() {
            if self.vars.iter().any(|v| v.name == tv.name) {
                return Err(Error::Argument(format!("kernel output `{}` collides with a joint variable", tv.name)));
            }
        }
        let dims = self.dims();
        let st = strides(&dims);
        let from_dims: Vec<usize> = kernel.from().iter().map(Var::len).collect();
        let from_st = strides(&from_dims);
        let out_len = kernel.out_len();
        let mut mass = Vec::with_capacity(self.mass.len() * out_len);
        for (flat, &p) in self.mass.iter().enumerate() {
            let row: usize = from_pos
                .iter()
                .zip(&from_st)
                .map(|(&pos, &s)| (flat / st[pos]) % dims[pos] * s)
                .sum();
            mass.extend(kernel.row(row).iter().map(|&k| p * k));
        }
        let mut vars = self.vars.clone();
        vars.extend(kernel.to().iter().cloned());
        Ok(JointPmf { vars, mass })
    }

    /// Independent product `p(a) q(b)`.
    pub fn product(&self, other: &JointPmf) -> Result<JointPmf> {
        let mut vars = self.vars.clone();
        vars.extend(other.vars.iter().cloned());
        check_unique(&vars)?;
        let mass = self
            .mass
            .iter()
            .flat_map(|&a| other.mass.iter().map(move |&b| a * b))
            .collect();
        Ok(JointPmf { vars, mass })
    }

    /// Conditional kernel `p(to | from)`. Rows of zero-probability inputs are uniform.
    pub fn conditional(&self, from: &[&str], to: &[&str]) -> Result<Kernel> {
        let from_mask = self.mask(from)?;
        let to_mask = self.mask(to)?;
        if from_mask & to_mask != 0 {
            return Err(Error::Argument("conditional groups overlap".into()));
        }
        let dims = self.dims();
        // ordering of the joint marginal is declaration order, which may interleave
        // `from` and `to`; reorder explicitly to (from..., to...) as given.
        let from_pos: Vec<usize> = from.iter().map(|n| self.position(n)).collect::<Result<_>>()?;
        let to_pos: Vec<usize> = to.iter().map(|n| self.position(n)).collect::<Result<_>>()?;
        let from_dims: Vec<usize> = from_pos.iter().map(|&p| dims[p]).collect();
        let to_dims: Vec<usize> = to_pos.iter().map(|&p| dims[p]).collect();
        let in_len: usize = from_dims.iter().product();
        let out_len: usize = to_dims.iter().product();
        let (fs, ts) = (strides(&from_dims), strides(&to_dims));
        let st = strides(&dims);
        let mut rows = vec![0.0; in_len * out_len];
        for (flat, &p) in self.mass.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let digit = |pos: usize| (flat / st[pos]) % dims[pos];
            let r: usize = from_pos.iter().zip(&fs).map(|(&pos, &s)| digit(pos) * s).sum();
            let c: usize = to_pos.iter().zip(&ts).map(|(&pos, &s)| digit(pos) * s).sum();
            rows[r * out_len + c] += p;
        }
        for row in rows.chunks_mut(out_len) {
            let s: f64 = row.iter().sum();
            if s > 0.0 {
                row.iter_mut().for_each(|v| *v /= s);
            } else {
                row.iter_mut().for_each(|v| *v = 1.0 / out_len as f64);
            }
        }
        let from_vars = from_pos.iter().map(|&p| self.vars[p].clone()).collect();
        let to_vars = to_pos.iter().map(|&p| self.vars[p].clone()).collect();
        Kernel::new(from_vars, to_vars, rows)
    }

    /// Reorder variables to the given name order (a permutation of all names).
    pub fn reorder(&self, names: &[&str]) -> Result<JointPmf> {
        if names.len() != self.vars.len() {
            return Err(Error::Argument("reorder needs every variable exactly once".into()));
        }
        let pos: Vec<usize> = names.iter().map(|n| self.position(n)).collect::<Result<_>>()?;
        let vars: Vec<Var> = pos.iter().map(|&p| self.vars[p].clone()).collect();
        check_unique(&vars)?;
        let dims = self.dims();
        let st = strides(&dims);
        let new_dims: Vec<usize> = pos.iter().map(|&p| dims[p]).collect();
        let new_st = strides(&new_dims);
        let mut mass = vec![0.0; self.mass.len()];
        for (flat, &p) in self.mass.iter().enumerate() {
            let idx: usize = pos
                .iter()
                .zip(&new_st)
                .map(|(&q, &s)| (flat / st[q]) % dims[q] * s)
                .sum();
            mass[idx] = p;
        }
        Ok(JointPmf { vars, mass })
    }

    /// Rename one variable.
    pub fn rename(mut self, from: &str, to: &str) -> Result<JointPmf> {
        let pos = self.position(from)?;
        if from != to && self.vars.iter().any(|v| v.name == to) {
            return Err(Error::DuplicateVariable(to.to_string()));
        }
        self.vars[pos].name = to.to_string();
        Ok(self)
    }

    /// Largest absolute cell difference to another joint with identical variables.
    pub fn max_abs_diff(&self, other: &JointPmf) -> Option<f64> {
        if self.vars != other.vars {
            return None;
        }
        Some(
            self.mass
                .iter()
                .zip(&other.mass)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max),
        )
    }
}

fn full_mask(n: usize) -> u64 {
    if n == 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}
