use serde::{Deserialize, Serialize};

use super::{pos, terms, RateValue, Q, T, U, V};
use crate::channels::{WtgfChannel, X, Y, YHAT, Z};
use crate::error::{Error, Result};
use crate::probkit::{Alphabet, JointPmf, Kernel, Var};

/// Free factors of `p(q u) p(x|u) p(y ŷ z|x) p(v|u x ŷ) p(t|v)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorizationKG {
    pub qu: JointPmf,
    pub x_given_u: Kernel,
    pub v_given_uxyhat: Kernel,
    pub t_given_v: Kernel,
}

/// Cardinality bounds on `(Q, U, T, V)` sufficient for the KG region.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KgBounds {
    pub q: usize,
    pub u: usize,
    pub t: usize,
    pub v: usize,
}

pub fn kg_cardinality_bounds(ch: &WtgfChannel) -> KgBounds {
    let (nx, nyh) = (ch.x().len(), ch.yhat().len());
    let q = nx + 4;
    let t = nx * nyh + 2;
    KgBounds {
        q,
        u: q * (nx + 3),
        t,
        v: t * (nx * nyh + 1),
    }
}

fn names_are(vars: &[Var], names: &[&str]) -> bool {
    vars.iter().map(|v| v.name.as_str()).eq(names.iter().copied())
}

impl FactorizationKG {
    pub fn new(qu: JointPmf, x_given_u: Kernel, v_given_uxyhat: Kernel, t_given_v: Kernel) -> Result<Self> {
        let ok = names_are(qu.vars(), &[Q, U])
            && names_are(x_given_u.from(), &[U])
            && names_are(x_given_u.to(), &[X])
            && names_are(v_given_uxyhat.from(), &[U, X, YHAT])
            && names_are(v_given_uxyhat.to(), &[V])
            && names_are(t_given_v.from(), &[V])
            && names_are(t_given_v.to(), &[T]);
        if !ok {
            return Err(Error::Model(
                "factors must be p(Q,U), p(X|U), p(V|U,X,Yhat) and p(T|V) with these names".into(),
            ));
        }
        if qu.vars()[1] != x_given_u.from()[0]
            || x_given_u.to()[0] != v_given_uxyhat.from()[1]
            || qu.vars()[1] != v_given_uxyhat.from()[0]
            || v_given_uxyhat.to()[0] != t_given_v.from()[0]
        {
            return Err(Error::Model("factor alphabets disagree".into()));
        }
        Ok(Self {
            qu,
            x_given_u,
            v_given_uxyhat,
            t_given_v,
        })
    }

    /// `U = X` with input distribution `px`; `Q`, `V`, `T` absent.
    pub fn wiretap(ch: &WtgfChannel, px: &[f64]) -> Result<Self> {
        let u = Var::new(U, ch.x().clone());
        let q = Var::new(Q, Alphabet::degenerate());
        let qu = JointPmf::new(vec![q, u.clone()], px.to_vec())?;
        Self::with_channel_part(ch, qu, Kernel::identity(u, X))
    }

    /// Given `p(q,u)` and `p(x|u)`; `V` and `T` absent.
    pub fn with_channel_part(ch: &WtgfChannel, qu: JointPmf, x_given_u: Kernel) -> Result<Self> {
        let u = qu.var(U)?.clone();
        let v = Var::new(V, Alphabet::degenerate());
        let vk = Kernel::constant(
            vec![u, Var::new(X, ch.x().clone()), Var::new(YHAT, ch.yhat().clone())],
            vec![v.clone()],
            vec![1.0],
        )?;
        let tk = Kernel::constant(vec![v], vec![Var::new(T, Alphabet::degenerate())], vec![1.0])?;
        Self::new(qu, x_given_u, vk, tk)
    }

    /// `(|Q|, |U|, |V|, |T|)`.
    pub fn cardinalities(&self) -> [usize; 4] {
        [
            self.qu.vars()[0].len(),
            self.qu.vars()[1].len(),
            self.t_given_v.from()[0].len(),
            self.t_given_v.to()[0].len(),
        ]
    }

    /// Joint over `(Q, U, X, Y, Yhat, Z, V, T)`.
    pub fn assemble(&self, ch: &WtgfChannel) -> Result<JointPmf> {
        self.qu
            .compose(&self.x_given_u)?
            .compose(ch.kernel())?
            .compose(&self.v_given_uxyhat)?
            .compose(&self.t_given_v)
    }

    /// Recover the factors from a joint over `(Q, U, X, Y, Yhat, Z, V, T)`,
    /// checking that it carries the channel and has the required structure.
    pub fn from_joint(ch: &WtgfChannel, joint: &JointPmf) -> Result<Self> {
        if !names_are(joint.vars(), &[Q, U, X, Y, YHAT, Z, V, T]) {
            return Err(Error::Model("joint must be over (Q, U, X, Y, Yhat, Z, V, T)".into()));
        }
        let channel = joint.conditional(&[X], &[Y, YHAT, Z])?;
        let px = joint.marginalize(&[X])?;
        if channel.to() != ch.kernel().to() || channel.from() != ch.kernel().from() {
            return Err(Error::Model("joint alphabets differ from the channel".into()));
        }
        for (x, &p) in px.mass().iter().enumerate() {
            if p > 0.0 {
                let d = channel
                    .row(x)
                    .iter()
                    .zip(ch.kernel().row(x))
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max);
                if d > 1e-9 {
                    return Err(Error::Model(format!("joint does not carry the channel at x = {x} (gap {d:e})")));
                }
            }
        }
        let residual = factorization_residual(joint)?;
        if residual > 1e-9 {
            return Err(Error::Model(format!("factorization residual {residual:e} exceeds 1e-9")));
        }
        Self::new(
            joint.marginalize(&[Q, U])?,
            joint.conditional(&[U], &[X])?,
            joint.conditional(&[U, X, YHAT], &[V])?,
            joint.conditional(&[V], &[T])?,
        )
    }
}

/// Largest conditional mutual information among the Markov conditions of the
/// KG factorization; zero exactly when the joint factorizes.
pub fn factorization_residual(joint: &JointPmf) -> Result<f64> {
    let checks: [(&[&str], &[&str], &[&str]); 4] = [
        (&[X], &[Q], &[U]),
        (&[Y, YHAT, Z], &[Q, U], &[X]),
        (&[V], &[Q, Y, Z], &[U, X, YHAT]),
        (&[T], &[Q, U, X, Y, YHAT, Z], &[V]),
    ];
    let mut worst = 0.0f64;
    for (a, b, c) in checks {
        worst = worst.max(joint.mutual_information_raw(a, b, c)?);
    }
    Ok(worst)
}

/// Information terms shared by the KG expressions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KgTerms {
    pub i_u_y: f64,
    pub i_u_z_given_q: f64,
    pub i_u_t_given_qz: f64,
    pub i_q_y: f64,
    pub i_v_xyhat_given_uy: f64,
    pub i_v_y_given_ut: f64,
    pub i_v_z_given_ut: f64,
}

const MQ: u64 = 1;
const MU: u64 = 1 << 1;
const MX: u64 = 1 << 2;
const MY: u64 = 1 << 3;
const MYH: u64 = 1 << 4;
const MZ: u64 = 1 << 5;
const MV: u64 = 1 << 6;
const MT: u64 = 1 << 7;

impl KgTerms {
    /// Evaluate on an assembled joint in canonical order.
    pub fn from_joint(joint: &JointPmf) -> Self {
        debug_assert!(names_are(joint.vars(), &[Q, U, X, Y, YHAT, Z, V, T]));
        let m = joint.measures();
        Self {
            i_u_y: m.mi(MU, MY, 0),
            i_u_z_given_q: m.mi(MU, MZ, MQ),
            i_u_t_given_qz: m.mi(MU, MT, MQ | MZ),
            i_q_y: m.mi(MQ, MY, 0),
            i_v_xyhat_given_uy: m.mi(MV, MX | MYH, MU | MY),
            i_v_y_given_ut: m.mi(MV, MY, MU | MT),
            i_v_z_given_ut: m.mi(MV, MZ, MU | MT),
        }
    }

    fn listing(&self) -> Vec<(String, f64)> {
        terms(&[
            ("I(U;Y)", self.i_u_y),
            ("I(U;Z|Q)", self.i_u_z_given_q),
            ("I(U;T|QZ)", self.i_u_t_given_qz),
            ("I(Q;Y)", self.i_q_y),
            ("I(V;XYhat|UY)", self.i_v_xyhat_given_uy),
            ("I(V;Y|UT)", self.i_v_y_given_ut),
            ("I(V;Z|UT)", self.i_v_z_given_ut),
        ])
    }

    pub fn kg1(&self) -> RateValue {
        let cost = self.i_q_y.max(self.i_v_xyhat_given_uy);
        let first = self.i_u_y - self.i_u_z_given_q - self.i_u_t_given_qz - cost + self.i_v_y_given_ut
            - self.i_v_z_given_ut;
        let second = self.i_u_y - cost;
        RateValue::min2(first, second, self.listing())
    }

    pub fn kg2(&self) -> RateValue {
        let first = self.i_v_y_given_ut - self.i_v_z_given_ut;
        let second = self.i_u_y - self.i_v_xyhat_given_uy;
        RateValue::min2(first, second, self.listing())
    }

    pub fn sk_inner(&self) -> RateValue {
        let cost = self.i_q_y.max(self.i_v_xyhat_given_uy);
        let channel = pos(self.i_u_y - cost - self.i_u_z_given_q - self.i_u_t_given_qz);
        let raw = self.i_v_y_given_ut - self.i_v_z_given_ut + channel;
        RateValue::single(raw, self.listing()).with_condition(self.i_v_xyhat_given_uy, self.i_u_y)
    }
}

/// Secrecy rate of the first KG strategy (time-shared message and key).
pub fn rate_kg1(ch: &WtgfChannel, f: &FactorizationKG) -> Result<RateValue> {
    Ok(KgTerms::from_joint(&f.assemble(ch)?).kg1())
}

/// Secrecy rate of the second KG strategy; requires `Q = ∅`.
pub fn rate_kg2(ch: &WtgfChannel, f: &FactorizationKG) -> Result<RateValue> {
    if !f.qu.vars()[0].alphabet.is_degenerate() {
        return Err(Error::Argument("the second KG strategy needs a singleton Q".into()));
    }
    Ok(KgTerms::from_joint(&f.assemble(ch)?).kg2())
}

/// Secret-key rate inner bound, infeasible when `I(V;XŶ|UY) > I(U;Y)`.
pub fn sk_inner_rate(ch: &WtgfChannel, f: &FactorizationKG) -> Result<RateValue> {
    Ok(KgTerms::from_joint(&f.assemble(ch)?).sk_inner())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::probkit::binary_entropy;

    fn bsc_pair(a: f64, b: f64) -> WtgfChannel {
        WtgfChannel::from_independent(&Kernel::bsc(X, Y, a).unwrap(), &Kernel::bsc(X, Z, b).unwrap()).unwrap()
    }

    #[test]
    fn degraded_bsc_wiretap_value() {
        let ch = bsc_pair(0.1, 0.2);
        let f = FactorizationKG::wiretap(&ch, &[0.5, 0.5]).unwrap();
        let r = rate_kg1(&ch, &f).unwrap();
        let expected = binary_entropy(0.2) - binary_entropy(0.1);
        assert!((r.bits.unwrap() - expected).abs() < 1e-12);
        let sk = sk_inner_rate(&ch, &f).unwrap();
        assert!((sk.bits.unwrap() - expected).abs() < 1e-12);
        assert!(factorization_residual(&f.assemble(&ch).unwrap()).unwrap() < 1e-12);
    }

    #[test]
    fn from_joint_round_trip_and_rejection() {
        let ch = bsc_pair(0.1, 0.3);
        let f = FactorizationKG::wiretap(&ch, &[0.3, 0.7]).unwrap();
        let joint = f.assemble(&ch).unwrap();
        let back = FactorizationKG::from_joint(&ch, &joint).unwrap();
        let a = rate_kg1(&ch, &f).unwrap().raw;
        let b = rate_kg1(&ch, &back).unwrap().raw;
        assert!((a - b).abs() < 1e-12);
        let other = bsc_pair(0.1, 0.4);
        assert!(matches!(FactorizationKG::from_joint(&other, &joint), Err(Error::Model(_))));
    }

    #[test]
    fn kg2_needs_singleton_q() {
        let ch = bsc_pair(0.1, 0.2);
        let u = Var::new(U, Alphabet::indexed(2));
        let qu = JointPmf::new(vec![Var::new(Q, Alphabet::indexed(2)), u.clone()], vec![0.25; 4]).unwrap();
        let f = FactorizationKG::with_channel_part(&ch, qu, Kernel::identity(u, X)).unwrap();
        assert!(rate_kg1(&ch, &f).is_ok());
        assert!(matches!(rate_kg2(&ch, &f), Err(Error::Argument(_))));
    }
}
