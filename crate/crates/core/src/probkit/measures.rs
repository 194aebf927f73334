use std::cell::RefCell;

use super::xlog2;

/// Memoized entropy evaluator over a fixed joint tensor.
///
/// Variable groups are bit masks over declaration positions. Marginals are
/// computed from the smallest already-computed superset, so evaluating many
/// mutual-information terms on one joint stays close to a single pass over the
/// full tensor.
pub struct Measures<'a> {
    dims: Vec<usize>,
    mass: &'a [f64],
    marginals: RefCell<Vec<(u64, Vec<f64>)>>,
    entropies: RefCell<Vec<(u64, f64)>>,
}

impl<'a> Measures<'a> {
    pub fn from_raw(dims: &[usize], mass: &'a [f64]) -> Self {
        debug_assert_eq!(dims.iter().product::<usize>(), mass.len());
        assert!(dims.len() <= 64, "at most 64 variables are supported");
        Self {
            dims: dims.to_vec(),
            mass,
            marginals: RefCell::new(Vec::new()),
            entropies: RefCell::new(Vec::new()),
        }
    }

    fn full_mask(&self) -> u64 {
        if self.dims.len() == 64 {
            u64::MAX
        } else {
            (1u64 << self.dims.len()) - 1
        }
    }

    /// Marginal over the variables in `mask`, in declaration order.
    pub fn marginal(&self, mask: u64) -> Vec<f64> {
        let mask = mask & self.full_mask();
        if mask == self.full_mask() {
            return self.mass.to_vec();
        }
        if let Some((_, m)) = self.marginals.borrow().iter().find(|(k, _)| *k == mask) {
            return m.clone();
        }
        let computed = {
            let cache = self.marginals.borrow();
            let best = cache
                .iter()
                .filter(|(k, _)| k & mask == mask)
                .min_by_key(|(_, v)| v.len());
            match best {
                Some((src_mask, src)) => marginalize_raw(&self.dims, *src_mask, src, mask),
                None => marginalize_raw(&self.dims, self.full_mask(), self.mass, mask),
            }
        };
        self.marginals.borrow_mut().push((mask, computed.clone()));
        computed
    }

    /// Joint entropy `H(group)` in bits.
    pub fn entropy(&self, mask: u64) -> f64 {
        let mask = mask & self.full_mask();
        if mask == 0 {
            return 0.0;
        }
        if let Some((_, h)) = self.entropies.borrow().iter().find(|(k, _)| *k == mask) {
            return *h;
        }
        let h = if mask == self.full_mask() {
            self.mass.iter().map(|&p| xlog2(p)).sum()
        } else {
            self.marginal(mask).iter().map(|&p| xlog2(p)).sum()
        };
        self.entropies.borrow_mut().push((mask, h));
        h
    }

    /// `H(a | c)`.
    pub fn cond_entropy(&self, a: u64, c: u64) -> f64 {
        self.entropy(a | c) - self.entropy(c)
    }

    /// `I(a; b | c)` before clamping; may be slightly negative from rounding.
    pub fn mi_raw(&self, a: u64, b: u64, c: u64) -> f64 {
        self.entropy(a | c) + self.entropy(b | c) - self.entropy(a | b | c) - self.entropy(c)
    }

    /// `I(a; b | c)` clamped at zero.
    pub fn mi(&self, a: u64, b: u64, c: u64) -> f64 {
        let raw = self.mi_raw(a, b, c);
        debug_assert!(raw > -1e-9, "mutual information {raw} is negative beyond rounding");
        raw.max(0.0)
    }
}

/// Sum out every variable of `src_mask` that is not in `dst_mask`.
pub(crate) fn marginalize_raw(dims: &[usize], src_mask: u64, src: &[f64], dst_mask: u64) -> Vec<f64> {
    let src_vars: Vec<usize> = (0..dims.len()).filter(|&v| src_mask >> v & 1 == 1).collect();
    let sdims: Vec<usize> = src_vars.iter().map(|&v| dims[v]).collect();
    let mut out_stride = vec![0usize; src_vars.len()];
    let mut s = 1usize;
    for (pos, &v) in src_vars.iter().enumerate().rev() {
        if dst_mask >> v & 1 == 1 {
            out_stride[pos] = s;
            s *= dims[v];
        }
    }
    let mut out = vec![0.0; s];
    if src_vars.is_empty() {
        out[0] = src.iter().sum();
        return out;
    }
    let mut digits = vec![0usize; src_vars.len()];
    let mut oidx = 0usize;
    for &p in src {
        out[oidx] += p;
        let mut pos = src_vars.len();
        while pos > 0 {
            pos -= 1;
            digits[pos] += 1;
            oidx += out_stride[pos];
            if digits[pos] < sdims[pos] {
                break;
            }
            oidx -= out_stride[pos] * sdims[pos];
            digits[pos] = 0;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn marginal_of_product() {
        // p(a, b) = p(a) p(b), a in {0,1}, b in {0,1,2}
        let pa = [0.3, 0.7];
        let pb = [0.2, 0.5, 0.3];
        let mass: Vec<f64> = pa.iter().flat_map(|a| pb.iter().map(move |b| a * b)).collect();
        let m = Measures::from_raw(&[2, 3], &mass);
        let ma = m.marginal(0b01);
        let mb = m.marginal(0b10);
        for (x, y) in ma.iter().zip(pa) {
            assert!((x - y).abs() < 1e-15);
        }
        for (x, y) in mb.iter().zip(pb) {
            assert!((x - y).abs() < 1e-15);
        }
        assert!(m.mi(0b01, 0b10, 0).abs() < 1e-15);
    }

    #[test]
    fn cached_superset_marginal_matches_direct() {
        let mass: Vec<f64> = (1..=24).map(|i| i as f64 / 300.0).collect();
        let m = Measures::from_raw(&[2, 3, 4], &mass);
        let via_superset = {
            m.marginal(0b011);
            m.marginal(0b001)
        };
        let direct = marginalize_raw(&[2, 3, 4], 0b111, &mass, 0b001);
        for (a, b) in via_superset.iter().zip(&direct) {
            assert!((a - b).abs() < 1e-15);
        }
    }
}
