use super::search::Family;
use crate::bounds::{
    causal_state_rate, outer_secrecy_parallel, outer_sk_parallel, perfect_feedback_rate, rate_kg1, rate_kg2,
    sk_inner_rate, special_case_value, FactorizationKG, FactorizationOuter, RateValue, SpecialCase, StateFactors, Q,
    T, U, UPRIME, V,
};
use crate::channels::{ParallelSourcesChannel, StateChannel, WtgfChannel, S, X, XC, YHAT, YHATS};
use crate::error::Result;
use crate::probkit::{Alphabet, JointPmf, Kernel, Var};

fn flat(rows: &[Vec<f64>]) -> Vec<f64> {
    rows.iter().flatten().copied().collect()
}

/// Which KG expression a [`KgFamily`] maximizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KgKind {
    Kg1,
    Kg2,
    SecretKey,
}

/// `p(q u) p(x|u) p(v|u x ŷ) p(t|v)` with fixed cardinalities.
pub struct KgFamily<'a> {
    pub ch: &'a WtgfChannel,
    pub kind: KgKind,
    pub q: usize,
    pub u: usize,
    pub v: usize,
    pub t: usize,
    /// `U = X`, dropping the `p(x|u)` rows.
    pub u_is_x: bool,
}

impl KgFamily<'_> {
    fn u_len(&self) -> usize {
        if self.u_is_x {
            self.ch.x().len()
        } else {
            self.u
        }
    }
}

impl Family for KgFamily<'_> {
    type Point = FactorizationKG;

    fn rows(&self) -> Vec<usize> {
        let (nx, nyh, u) = (self.ch.x().len(), self.ch.yhat().len(), self.u_len());
        let mut rows = vec![self.q * u];
        if !self.u_is_x {
            rows.extend(std::iter::repeat_n(nx, u));
        }
        rows.extend(std::iter::repeat_n(self.v, u * nx * nyh));
        rows.extend(std::iter::repeat_n(self.t, self.v));
        rows
    }

    fn point(&self, rows: &[Vec<f64>]) -> Result<FactorizationKG> {
        let u_len = self.u_len();
        let nx = self.ch.x().len();
        let nyh = self.ch.yhat().len();
        let alpha = |n: usize| if n == 1 { Alphabet::degenerate() } else { Alphabet::indexed(n) };
        let uvar = Var::new(U, if self.u_is_x { self.ch.x().clone() } else { alpha(u_len) });
        let qvar = Var::new(Q, alpha(self.q));
        let vvar = Var::new(V, alpha(self.v));
        let tvar = Var::new(T, alpha(self.t));
        let xvar = Var::new(X, self.ch.x().clone());
        let qu = JointPmf::new(vec![qvar, uvar.clone()], rows[0].clone())?;
        let mut at = 1;
        let x_given_u = if self.u_is_x {
            Kernel::identity(uvar.clone(), X)
        } else {
            at += u_len;
            Kernel::new(vec![uvar.clone()], vec![xvar.clone()], flat(&rows[1..at]))?
        };
        let nv = u_len * nx * nyh;
        let vk = Kernel::new(
            vec![uvar, xvar, Var::new(YHAT, self.ch.yhat().clone())],
            vec![vvar.clone()],
            flat(&rows[at..at + nv]),
        )?;
        at += nv;
        let tk = Kernel::new(vec![vvar], vec![tvar], flat(&rows[at..at + self.v]))?;
        FactorizationKG::new(qu, x_given_u, vk, tk)
    }

    fn value(&self, f: &FactorizationKG) -> Result<RateValue> {
        match self.kind {
            KgKind::Kg1 => rate_kg1(self.ch, f),
            KgKind::Kg2 => rate_kg2(self.ch, f),
            KgKind::SecretKey => sk_inner_rate(self.ch, f),
        }
    }
}

/// Which expression an [`OuterFamily`] maximizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OuterKind {
    Secrecy,
    SecretKey,
    Case(SpecialCase),
}

/// `p(u xc) p(v|ŷs) p(t|v)` with fixed cardinalities.
pub struct OuterFamily<'a> {
    pub ps: &'a ParallelSourcesChannel,
    pub kind: OuterKind,
    pub u: usize,
    pub v: usize,
    pub t: usize,
    /// `U = Xc`; the first row is then `p(xc)`.
    pub u_is_x: bool,
}

impl Family for OuterFamily<'_> {
    type Point = FactorizationOuter;

    fn rows(&self) -> Vec<usize> {
        let nxc = self.ps.xc().len();
        let first = if self.u_is_x { nxc } else { self.u * nxc };
        let mut rows = vec![first];
        rows.extend(std::iter::repeat_n(self.v, self.ps.yhats().len()));
        rows.extend(std::iter::repeat_n(self.t, self.v));
        rows
    }

    fn point(&self, rows: &[Vec<f64>]) -> Result<FactorizationOuter> {
        let alpha = |n: usize| if n == 1 { Alphabet::degenerate() } else { Alphabet::indexed(n) };
        let nxc = self.ps.xc().len();
        let uxc = if self.u_is_x {
            let mut mass = vec![0.0; nxc * nxc];
            for (i, &p) in rows[0].iter().enumerate() {
                mass[i * nxc + i] = p;
            }
            JointPmf::new(vec![Var::new(U, self.ps.xc().clone()), Var::new(XC, self.ps.xc().clone())], mass)?
        } else {
            JointPmf::new(vec![Var::new(U, alpha(self.u)), Var::new(XC, self.ps.xc().clone())], rows[0].clone())?
        };
        let nyh = self.ps.yhats().len();
        let vvar = Var::new(V, alpha(self.v));
        let vk = Kernel::new(
            vec![Var::new(YHATS, self.ps.yhats().clone())],
            vec![vvar.clone()],
            flat(&rows[1..1 + nyh]),
        )?;
        let tk = Kernel::new(vec![vvar], vec![Var::new(T, alpha(self.t))], flat(&rows[1 + nyh..]))?;
        FactorizationOuter::new(uxc, vk, tk)
    }

    fn value(&self, f: &FactorizationOuter) -> Result<RateValue> {
        match self.kind {
            OuterKind::Secrecy => outer_secrecy_parallel(self.ps, f),
            OuterKind::SecretKey => outer_sk_parallel(self.ps, f),
            OuterKind::Case(c) => special_case_value(c, self.ps, f),
        }
    }
}

/// `p(u, x)` for the perfect-feedback rate.
pub struct FeedbackFamily<'a> {
    pub ch: &'a WtgfChannel,
    pub u: usize,
    pub u_is_x: bool,
}

impl Family for FeedbackFamily<'_> {
    type Point = JointPmf;

    fn rows(&self) -> Vec<usize> {
        let nx = self.ch.x().len();
        if self.u_is_x {
            vec![nx]
        } else {
            vec![self.u * nx]
        }
    }

    fn point(&self, rows: &[Vec<f64>]) -> Result<JointPmf> {
        let nx = self.ch.x().len();
        let xvar = Var::new(X, self.ch.x().clone());
        if self.u_is_x {
            let mut mass = vec![0.0; nx * nx];
            for (i, &p) in rows[0].iter().enumerate() {
                mass[i * nx + i] = p;
            }
            JointPmf::new(vec![Var::new(U, self.ch.x().clone()), xvar], mass)
        } else {
            let ua = if self.u == 1 { Alphabet::degenerate() } else { Alphabet::indexed(self.u) };
            JointPmf::new(vec![Var::new(U, ua), xvar], rows[0].clone())
        }
    }

    fn value(&self, ux: &JointPmf) -> Result<RateValue> {
        perfect_feedback_rate(self.ch, ux)
    }
}

/// One causal-state strategy; branch one carries a fixed map `u′(u, s)`
/// given as the flat list of `u′` indices.
pub struct StateFamily<'a> {
    pub sc: &'a StateChannel,
    pub u: usize,
    pub map: Option<Vec<usize>>,
}

impl Family for StateFamily<'_> {
    type Point = StateFactors;

    fn rows(&self) -> Vec<usize> {
        let (nx, ns) = (self.sc.x().len(), self.sc.s().len());
        let mut rows = vec![self.u];
        rows.extend(std::iter::repeat_n(nx, self.u * ns));
        rows
    }

    fn point(&self, rows: &[Vec<f64>]) -> Result<StateFactors> {
        let ua = if self.u == 1 { Alphabet::degenerate() } else { Alphabet::indexed(self.u) };
        let uvar = Var::new(U, ua.clone());
        let svar = Var::new(S, self.sc.s().clone());
        let xvar = Var::new(X, self.sc.x().clone());
        let pu = JointPmf::new(vec![uvar.clone()], rows[0].clone())?;
        match &self.map {
            Some(map) => {
                let upvar = Var::new(UPRIME, ua);
                let uprime = Kernel::deterministic(vec![uvar, svar.clone()], vec![upvar.clone()], |i| map[i])?;
                let x_given_uprime_s = Kernel::new(vec![upvar, svar], vec![xvar], flat(&rows[1..]))?;
                Ok(StateFactors::One {
                    pu,
                    uprime,
                    x_given_uprime_s,
                })
            }
            None => {
                let x_given_u_s = Kernel::new(vec![uvar, svar], vec![xvar], flat(&rows[1..]))?;
                Ok(StateFactors::Two { pu, x_given_u_s })
            }
        }
    }

    fn value(&self, f: &StateFactors) -> Result<RateValue> {
        causal_state_rate(self.sc, f)
    }
}
