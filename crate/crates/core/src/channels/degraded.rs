use minilp::{ComparisonOp, OptimizationDirection, Problem};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::probkit::{Kernel, Var};

/// Largest accepted reconstruction error `‖k1 ∘ M − k2‖∞`.
pub const DEGRADED_TOLERANCE: f64 = 1e-7;

/// Outcome of a degradedness test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Degradedness {
    pub degraded: bool,
    /// A stochastic `M` with `k2 = k1 ∘ M`, present when `degraded`.
    pub intermediate: Option<Kernel>,
    /// Reconstruction error of the best `M` found.
    pub residual: f64,
}

/// Decide whether `k2` is a stochastically degraded version of `k1`, that is
/// whether some kernel `M` satisfies `k2(b|x) = Σ_a k1(a|x) M(b|a)`.
///
/// Solved as a linear program minimizing the total absolute violation.
pub fn is_degraded(k1: &Kernel, k2: &Kernel) -> Result<Degradedness> {
    if k1.from().len() != k2.from().len()
        || k1.from().iter().zip(k2.from()).any(|(a, b)| a.alphabet != b.alphabet)
    {
        return Err(Error::Argument("degradedness needs a shared input alphabet".into()));
    }
    let (nx, na, nb) = (k1.in_len(), k1.out_len(), k2.out_len());
    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let m: Vec<_> = (0..na * nb).map(|_| lp.add_var(0.0, (0.0, 1.0))).collect();
    for a in 0..na {
        lp.add_constraint((0..nb).map(|b| (m[a * nb + b], 1.0)), ComparisonOp::Eq, 1.0);
    }
    for x in 0..nx {
        let r1 = k1.row(x);
        let r2 = k2.row(x);
        for b in 0..nb {
            let plus = lp.add_var(1.0, (0.0, f64::INFINITY));
            let minus = lp.add_var(1.0, (0.0, f64::INFINITY));
            let mut expr: Vec<_> = (0..na)
                .filter(|&a| r1[a] != 0.0)
                .map(|a| (m[a * nb + b], r1[a]))
                .collect();
            expr.push((plus, -1.0));
            expr.push((minus, 1.0));
            lp.add_constraint(expr, ComparisonOp::Eq, r2[b]);
        }
    }
    let solution = lp
        .solve()
        .map_err(|e| Error::Model(format!("degradedness program failed: {e}")))?;

    let mut rows: Vec<f64> = m.iter().map(|&v| solution.var_value(v).max(0.0)).collect();
    for row in rows.chunks_mut(nb) {
        let s: f64 = row.iter().sum();
        row.iter_mut().for_each(|v| *v /= s);
    }
    let mut residual = 0.0f64;
    for x in 0..nx {
        let r1 = k1.row(x);
        for b in 0..nb {
            let v: f64 = (0..na).map(|a| r1[a] * rows[a * nb + b]).sum();
            residual = residual.max((v - k2.row(x)[b]).abs());
        }
    }
    let degraded = residual <= DEGRADED_TOLERANCE;
    let intermediate = if degraded {
        let from = k1.to().to_vec();
        let to = k2
            .to()
            .iter()
            .map(|v| {
                let mut name = v.name.clone();
                while from.iter().any(|f| f.name == name) {
                    name.push('\'');
                }
                Var::new(name, v.alphabet.clone())
            })
            .collect();
        Some(Kernel::new(from, to, rows)?)
    } else {
        None
    };
    Ok(Degradedness {
        degraded,
        intermediate,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::probkit::Alphabet;

    #[test]
    fn composed_kernel_is_degraded() {
        let k1 = Kernel::bsc("X", "Y", 0.1).unwrap();
        let k2 = k1.then(&Kernel::bsc("Y", "Z", 0.125).unwrap()).unwrap();
        let d = is_degraded(&k1, &k2).unwrap();
        assert!(d.degraded);
        let m = d.intermediate.unwrap();
        let back = k1.then(&m.renamed(&["Y"], &["Z"]).unwrap()).unwrap();
        assert!(back.max_abs_diff(&k2).unwrap() <= DEGRADED_TOLERANCE);
        assert!(!is_degraded(&k2, &k1).unwrap().degraded);
    }

    #[test]
    fn identity_is_reflexive() {
        let k = Kernel::identity(Var::new("X", Alphabet::indexed(3)), "Y");
        let d = is_degraded(&k, &k).unwrap();
        assert!(d.degraded);
        assert_eq!(d.intermediate.unwrap().to()[0].name, "Y'");
    }
}
