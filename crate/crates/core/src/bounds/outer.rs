use serde::{Deserialize, Serialize};

use super::{terms, RateValue, T, U, V};
use crate::channels::{ParallelSourcesChannel, XC, YHATS};
use crate::error::{Error, Result};
use crate::probkit::{Alphabet, JointPmf, Kernel, Var};

/// Free factors of `p(u xc) p(yc zc|xc) p(ys ŷs zs) p(v|ŷs) p(t|v)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorizationOuter {
    pub uxc: JointPmf,
    pub v_given_yhats: Kernel,
    pub t_given_v: Kernel,
}

/// Cardinality bounds on `(U, T, V)` for the parallel-sources outer bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OuterBounds {
    pub u: usize,
    pub t: usize,
    pub v: usize,
}

pub fn outer_cardinality_bounds(ps: &ParallelSourcesChannel) -> OuterBounds {
    let nyh = ps.yhats().len();
    OuterBounds {
        u: ps.xc().len(),
        t: nyh + 1,
        v: (nyh + 1) * (nyh + 1),
    }
}

impl FactorizationOuter {
    pub fn new(uxc: JointPmf, v_given_yhats: Kernel, t_given_v: Kernel) -> Result<Self> {
        let ok = uxc.names() == [U, XC]
            && v_given_yhats.from().len() == 1
            && v_given_yhats.from()[0].name == YHATS
            && v_given_yhats.to().len() == 1
            && v_given_yhats.to()[0].name == V
            && t_given_v.from() == v_given_yhats.to()
            && t_given_v.to().len() == 1
            && t_given_v.to()[0].name == T;
        if !ok {
            return Err(Error::Model("factors must be p(U,Xc), p(V|Yhats) and p(T|V) with matching alphabets".into()));
        }
        Ok(Self {
            uxc,
            v_given_yhats,
            t_given_v,
        })
    }

    /// `U = Xc` with distribution `pxc`; `V = Ŷs` when `v_copies_yhat`, else absent; `T` absent.
    pub fn simple(ps: &ParallelSourcesChannel, pxc: &[f64], v_copies_yhat: bool) -> Result<Self> {
        let n = pxc.len();
        let mut mass = vec![0.0; n * n];
        for (i, &p) in pxc.iter().enumerate() {
            mass[i * n + i] = p;
        }
        let uxc = JointPmf::new(vec![Var::new(U, ps.xc().clone()), Var::new(XC, ps.xc().clone())], mass)?;
        let yh = Var::new(YHATS, ps.yhats().clone());
        let vk = if v_copies_yhat {
            Kernel::identity(yh, V)
        } else {
            Kernel::constant(vec![yh], vec![Var::new(V, Alphabet::degenerate())], vec![1.0])?
        };
        let tk = Kernel::constant(vk.to().to_vec(), vec![Var::new(T, Alphabet::degenerate())], vec![1.0])?;
        Self::new(uxc, vk, tk)
    }

    /// `(|U|, |V|, |T|)`.
    pub fn cardinalities(&self) -> [usize; 3] {
        [self.uxc.vars()[0].len(), self.t_given_v.from()[0].len(), self.t_given_v.to()[0].len()]
    }

    /// Channel half `(U, Xc, Yc, Zc)`.
    pub fn channel_joint(&self, ps: &ParallelSourcesChannel) -> Result<JointPmf> {
        self.uxc.compose(ps.main_kernel())
    }

    /// Source half `(Ys, Yhats, Zs, V, T)`.
    pub fn source_joint(&self, ps: &ParallelSourcesChannel) -> Result<JointPmf> {
        ps.source().compose(&self.v_given_yhats)?.compose(&self.t_given_v)
    }

    /// Full joint over `(U, Xc, Yc, Zc, Ys, Yhats, Zs, V, T)`.
    pub fn assemble(&self, ps: &ParallelSourcesChannel) -> Result<JointPmf> {
        self.channel_joint(ps)?.product(&self.source_joint(ps)?)
    }
}

/// Information terms of the parallel-sources expressions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OuterTerms {
    pub i_u_yc: f64,
    pub i_u_zc: f64,
    pub i_xc_yc: f64,
    pub i_xc_zc: f64,
    pub i_v_ys_given_t: f64,
    pub i_v_zs_given_t: f64,
    pub i_v_yhats_given_ys: f64,
    pub h_ys_given_zs: f64,
}

impl OuterTerms {
    pub fn evaluate(ps: &ParallelSourcesChannel, f: &FactorizationOuter) -> Result<Self> {
        let c = f.channel_joint(ps)?;
        let s = f.source_joint(ps)?;
        let (mu, mxc, myc, mzc) = (1, 2, 4, 8);
        let (mys, myh, mzs, mv, mt) = (1, 2, 4, 8, 16);
        let cm = c.measures();
        let sm = s.measures();
        Ok(Self {
            i_u_yc: cm.mi(mu, myc, 0),
            i_u_zc: cm.mi(mu, mzc, 0),
            i_xc_yc: cm.mi(mxc, myc, 0),
            i_xc_zc: cm.mi(mxc, mzc, 0),
            i_v_ys_given_t: sm.mi(mv, mys, mt),
            i_v_zs_given_t: sm.mi(mv, mzs, mt),
            i_v_yhats_given_ys: sm.mi(mv, myh, mys),
            h_ys_given_zs: sm.cond_entropy(mys, mzs),
        })
    }

    pub(crate) fn listing(&self) -> Vec<(String, f64)> {
        terms(&[
            ("I(U;Yc)", self.i_u_yc),
            ("I(U;Zc)", self.i_u_zc),
            ("I(Xc;Yc)", self.i_xc_yc),
            ("I(Xc;Zc)", self.i_xc_zc),
            ("I(V;Ys|T)", self.i_v_ys_given_t),
            ("I(V;Zs|T)", self.i_v_zs_given_t),
            ("I(V;Yhats|Ys)", self.i_v_yhats_given_ys),
            ("H(Ys|Zs)", self.h_ys_given_zs),
        ])
    }

    pub fn secrecy(&self) -> RateValue {
        let first = self.i_u_yc - self.i_u_zc + self.i_v_ys_given_t - self.i_v_zs_given_t;
        let second = self.i_xc_yc - self.i_v_yhats_given_ys;
        RateValue::min2(first, second, self.listing())
    }

    pub fn secret_key(&self) -> RateValue {
        let raw = self.i_u_yc - self.i_u_zc + self.i_v_ys_given_t - self.i_v_zs_given_t;
        RateValue::single(raw, self.listing()).with_condition(self.i_v_yhats_given_ys, self.i_xc_yc)
    }
}

/// Secrecy-rate outer bound expression for the parallel-sources model.
pub fn outer_secrecy_parallel(ps: &ParallelSourcesChannel, f: &FactorizationOuter) -> Result<RateValue> {
    Ok(OuterTerms::evaluate(ps, f)?.secrecy())
}

/// Secret-key outer bound expression, infeasible when `I(V;Ŷs|Ys) > I(Xc;Yc)`.
pub fn outer_sk_parallel(ps: &ParallelSourcesChannel, f: &FactorizationOuter) -> Result<RateValue> {
    Ok(OuterTerms::evaluate(ps, f)?.secret_key())
}
