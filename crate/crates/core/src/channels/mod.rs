//! Channel models and channel-class predicates.
//!
//! A [`WtgfChannel`] is a single kernel `p(y, ŷ, z | x)`: Bob observes `Y`,
//! the encoder receives the generalized feedback `Ŷ` one block late, and Eve
//! observes `Z`. Its variables always carry the canonical names [`X`], [`Y`],
//! [`YHAT`] and [`Z`], which the rate evaluators rely on.

mod degraded;
mod less_noisy;

pub use degraded::{is_degraded, Degradedness, DEGRADED_TOLERANCE};
pub use less_noisy::{classify, less_noisy_at, less_noisy_verdict, ClassificationReport, LessNoisyVerdict, ProbeConfig, Witness};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::probkit::{Alphabet, JointPmf, Kernel, Var};

pub const X: &str = "X";
pub const Y: &str = "Y";
pub const YHAT: &str = "Yhat";
pub const Z: &str = "Z";

pub const XC: &str = "Xc";
pub const YC: &str = "Yc";
pub const ZC: &str = "Zc";
pub const YS: &str = "Ys";
pub const YHATS: &str = "Yhats";
pub const ZS: &str = "Zs";

pub const S: &str = "S";

/// Wiretap channel with generalized feedback, `p(y ŷ z | x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WtgfChannel {
    kernel: Kernel,
}

impl WtgfChannel {
    /// Build from a flat row-major tensor indexed `[x][y][ŷ][z]`.
    pub fn new(x: Alphabet, y: Alphabet, yhat: Alphabet, z: Alphabet, rows: Vec<f64>) -> Result<Self> {
        let kernel = Kernel::new(
            vec![Var::new(X, x)],
            vec![Var::new(Y, y), Var::new(YHAT, yhat), Var::new(Z, z)],
            rows,
        )?;
        Ok(Self { kernel })
    }

    /// Wrap a kernel `X -> (Y, Yhat, Z)` with the canonical names.
    pub fn from_kernel(kernel: Kernel) -> Result<Self> {
        let ok = kernel.from().len() == 1
            && kernel.from()[0].name == X
            && kernel.to().iter().map(|v| v.name.as_str()).eq([Y, YHAT, Z]);
        if !ok {
            return Err(Error::Model("channel kernel must map X to (Y, Yhat, Z)".into()));
        }
        Ok(Self { kernel })
    }

    /// Wiretap pair with independent outputs `p(y|x) p(z|x)` and no feedback.
    pub fn from_independent(bob: &Kernel, eve: &Kernel) -> Result<Self> {
        let (x, y) = single_io(bob)?;
        let (xe, z) = single_io(eve)?;
        if x != xe {
            return Err(Error::Argument("Bob and Eve kernels have different input alphabets".into()));
        }
        let (ny, nz) = (y.len(), z.len());
        let mut rows = Vec::with_capacity(x.len() * ny * nz);
        for xi in 0..x.len() {
            for &py in bob.row(xi) {
                rows.extend(eve.row(xi).iter().map(|&pz| py * pz));
            }
        }
        Self::new(x, y, Alphabet::degenerate(), z, rows)
    }

    /// Wiretap pair given as a joint kernel `p(y z | x)`, flat `[x][y][z]`, without feedback.
    pub fn from_pair(x: Alphabet, y: Alphabet, z: Alphabet, rows: Vec<f64>) -> Result<Self> {
        Self::new(x, y, Alphabet::degenerate(), z, rows)
    }

    /// Wiretap pair `p(y z | x)` with perfect output feedback `Ŷ = Y`.
    pub fn with_output_feedback(x: Alphabet, y: Alphabet, z: Alphabet, rows: Vec<f64>) -> Result<Self> {
        let (nx, ny, nz) = (x.len(), y.len(), z.len());
        if rows.len() != nx * ny * nz {
            return Err(Error::ShapeMismatch {
                expected: nx * ny * nz,
                found: rows.len(),
            });
        }
        let mut full = vec![0.0; nx * ny * ny * nz];
        for xi in 0..nx {
            for yi in 0..ny {
                for zi in 0..nz {
                    full[((xi * ny + yi) * ny + yi) * nz + zi] = rows[(xi * ny + yi) * nz + zi];
                }
            }
        }
        Self::new(x, y.clone(), y, z, full)
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn x(&self) -> &Alphabet {
        &self.kernel.from()[0].alphabet
    }

    pub fn y(&self) -> &Alphabet {
        &self.kernel.to()[0].alphabet
    }

    pub fn yhat(&self) -> &Alphabet {
        &self.kernel.to()[1].alphabet
    }

    pub fn z(&self) -> &Alphabet {
        &self.kernel.to()[2].alphabet
    }

    /// `p(y | x)`.
    pub fn bob_kernel(&self) -> Kernel {
        self.kernel.marginal_outputs(&[Y]).expect("canonical names")
    }

    /// `p(z | x)`.
    pub fn eve_kernel(&self) -> Kernel {
        self.kernel.marginal_outputs(&[Z]).expect("canonical names")
    }

    /// `p(ŷ | x)`.
    pub fn feedback_kernel(&self) -> Kernel {
        self.kernel.marginal_outputs(&[YHAT]).expect("canonical names")
    }

    /// True when `Ŷ = Y` with probability one for every input.
    pub fn has_output_feedback(&self) -> bool {
        if self.y() != self.yhat() {
            return false;
        }
        let (ny, nz) = (self.y().len(), self.z().len());
        (0..self.x().len()).all(|xi| {
            let row = self.kernel.row(xi);
            (0..ny).all(|a| (0..ny).all(|b| a == b || (0..nz).all(|c| row[(a * ny + b) * nz + c] == 0.0)))
        })
    }

    /// Joint `p(x) p(y ŷ z | x)` for an input distribution over `X`.
    pub fn joint(&self, px: &[f64]) -> Result<JointPmf> {
        JointPmf::single(self.kernel.from()[0].clone(), px.to_vec())?.compose(&self.kernel)
    }
}

fn single_io(k: &Kernel) -> Result<(Alphabet, Alphabet)> {
    if k.from().len() != 1 || k.to().len() != 1 {
        return Err(Error::Argument("expected a single-input single-output kernel".into()));
    }
    Ok((k.from()[0].alphabet.clone(), k.to()[0].alphabet.clone()))
}

/// Wiretap channel plus an independent correlated source triple `(Ys, Ŷs, Zs)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParallelSourcesChannel {
    main: Kernel,
    source: JointPmf,
}

impl ParallelSourcesChannel {
    /// `main` maps `Xc` to `(Yc, Zc)`; `source` is a joint over `(Ys, Yhats, Zs)`.
    pub fn new(main: Kernel, source: JointPmf) -> Result<Self> {
        let main_ok = main.from().len() == 1
            && main.from()[0].name == XC
            && main.to().iter().map(|v| v.name.as_str()).eq([YC, ZC]);
        if !main_ok {
            return Err(Error::Model("main kernel must map Xc to (Yc, Zc)".into()));
        }
        if !source.names().into_iter().eq([YS, YHATS, ZS]) {
            return Err(Error::Model("source joint must be over (Ys, Yhats, Zs)".into()));
        }
        Ok(Self { main, source })
    }

    /// Build from flat tensors `[xc][yc][zc]` and `[ys][ŷs][zs]`.
    #[allow(clippy::too_many_arguments)]
    pub fn from_tensors(
        xc: Alphabet,
        yc: Alphabet,
        zc: Alphabet,
        main: Vec<f64>,
        ys: Alphabet,
        yhats: Alphabet,
        zs: Alphabet,
        source: Vec<f64>,
    ) -> Result<Self> {
        let main = Kernel::new(vec![Var::new(XC, xc)], vec![Var::new(YC, yc), Var::new(ZC, zc)], main)?;
        let source = JointPmf::new(vec![Var::new(YS, ys), Var::new(YHATS, yhats), Var::new(ZS, zs)], source)?;
        Self::new(main, source)
    }

    /// Main channel built from independent Bob and Eve kernels over `Xc`.
    pub fn from_independent_main(bob: &Kernel, eve: &Kernel, source: JointPmf) -> Result<Self> {
        let w = WtgfChannel::from_independent(bob, eve)?;
        let main = w
            .kernel()
            .marginal_outputs(&[Y, Z])?
            .renamed(&[XC], &[YC, ZC])?;
        Self::new(main, source)
    }

    pub fn main_kernel(&self) -> &Kernel {
        &self.main
    }

    pub fn source(&self) -> &JointPmf {
        &self.source
    }

    pub fn xc(&self) -> &Alphabet {
        &self.main.from()[0].alphabet
    }

    pub fn yc(&self) -> &Alphabet {
        &self.main.to()[0].alphabet
    }

    pub fn zc(&self) -> &Alphabet {
        &self.main.to()[1].alphabet
    }

    pub fn ys(&self) -> &Alphabet {
        &self.source.vars()[0].alphabet
    }

    pub fn yhats(&self) -> &Alphabet {
        &self.source.vars()[1].alphabet
    }

    pub fn zs(&self) -> &Alphabet {
        &self.source.vars()[2].alphabet
    }

    /// `p(yc | xc)`.
    pub fn bob_kernel(&self) -> Kernel {
        self.main.marginal_outputs(&[YC]).expect("canonical names")
    }

    /// `p(zc | xc)`.
    pub fn eve_kernel(&self) -> Kernel {
        self.main.marginal_outputs(&[ZC]).expect("canonical names")
    }

    /// True when `Ŷs = Ys` almost surely (same alphabet, mass only on the diagonal).
    pub fn feedback_equals_bob_source(&self) -> bool {
        if self.ys() != self.yhats() {
            return false;
        }
        let (ny, nz) = (self.ys().len(), self.zs().len());
        let m = self.source.mass();
        (0..ny).all(|a| (0..ny).all(|b| a == b || (0..nz).all(|c| m[(a * ny + b) * nz + c] == 0.0)))
    }
}

/// Fold a parallel-sources channel into a single WTC-GF with `Y = (Ys, Yc)`,
/// `Ŷ = Ŷs` and `Z = (Zs, Zc)`.
pub fn embed_parallel(ps: &ParallelSourcesChannel) -> WtgfChannel {
    let (nyc, nzc) = (ps.yc().len(), ps.zc().len());
    let (nys, nyh, nzs) = (ps.ys().len(), ps.yhats().len(), ps.zs().len());
    let src = ps.source.mass();
    let mut rows = Vec::with_capacity(ps.xc().len() * nys * nyc * nyh * nzs * nzc);
    for xc in 0..ps.xc().len() {
        let main = ps.main.row(xc);
        for ys in 0..nys {
            for yc in 0..nyc {
                for yh in 0..nyh {
                    for zs in 0..nzs {
                        let s = src[(ys * nyh + yh) * nzs + zs];
                        for zc in 0..nzc {
                            rows.push(s * main[yc * nzc + zc]);
                        }
                    }
                }
            }
        }
    }
    let y = Alphabet::product(&[ps.ys(), ps.yc()]);
    let z = Alphabet::product(&[ps.zs(), ps.zc()]);
    let kernel = Kernel::from_parts_unchecked(
        vec![Var::new(X, ps.xc().clone())],
        vec![Var::new(Y, y), Var::new(YHAT, ps.yhats().clone()), Var::new(Z, z)],
        rows,
    );
    WtgfChannel { kernel }
}

/// Erasure probabilities of the legitimate link (`delta`) and of Eve (`delta_e`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErasureParams {
    delta: f64,
    delta_e: f64,
}

impl ErasureParams {
    pub fn new(delta: f64, delta_e: f64) -> Result<Self> {
        for (name, v) in [("delta", delta), ("delta_e", delta_e)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Argument(format!("{name} = {v} outside [0, 1]")));
            }
        }
        Ok(Self { delta, delta_e })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn delta_e(&self) -> f64 {
        self.delta_e
    }
}

/// Binary erasure wiretap channel with public erasure-state feedback.
///
/// `Y ∈ {0,1,e}` is erased with probability `δ`; `Z = (Ze, F)` where `Ze` is
/// erased independently with probability `δ_E` and `F = 1{Y = e}`; the encoder
/// receives `Ŷ = F`.
pub fn make_erasure_wtgf(p: ErasureParams) -> WtgfChannel {
    let (d, de) = (p.delta, p.delta_e);
    let ternary = Alphabet::new(["0", "1", "e"]).expect("distinct labels");
    let flag = Alphabet::indexed(2);
    let z = Alphabet::product(&[&ternary, &flag]);
    // index helpers: y in 0..3, f in 0..2, z = ze * 2 + f
    let mut rows = vec![0.0; 2 * 3 * 2 * 6];
    for x in 0..2 {
        for (y, py) in [(x, 1.0 - d), (2, d)] {
            let f = usize::from(y == 2);
            for (ze, pz) in [(x, 1.0 - de), (2, de)] {
                rows[((x * 3 + y) * 2 + f) * 6 + ze * 2 + f] += py * pz;
            }
        }
    }
    let kernel = Kernel::from_parts_unchecked(
        vec![Var::new(X, Alphabet::indexed(2))],
        vec![Var::new(Y, ternary), Var::new(YHAT, flag), Var::new(Z, z)],
        rows,
    );
    WtgfChannel { kernel }
}

/// State-dependent wiretap channel `p(y z | x s)` with i.i.d. state `p(s)`
/// known causally at the encoder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateChannel {
    kernel: Kernel,
    state: JointPmf,
}

impl StateChannel {
    /// `kernel` maps `(X, S)` to `(Y, Z)`; `state` is a pmf over `S`.
    pub fn new(kernel: Kernel, state: JointPmf) -> Result<Self> {
        let ok = kernel.from().iter().map(|v| v.name.as_str()).eq([X, S])
            && kernel.to().iter().map(|v| v.name.as_str()).eq([Y, Z]);
        if !ok {
            return Err(Error::Model("state kernel must map (X, S) to (Y, Z)".into()));
        }
        if state.vars().len() != 1 || state.vars()[0] != kernel.from()[1] {
            return Err(Error::Model("state pmf must be over the kernel's S variable".into()));
        }
        Ok(Self { kernel, state })
    }

    /// Build from flat tensors `[x][s][y][z]` and `[s]`.
    pub fn from_tensors(x: Alphabet, s: Alphabet, y: Alphabet, z: Alphabet, rows: Vec<f64>, ps: Vec<f64>) -> Result<Self> {
        let sv = Var::new(S, s);
        let kernel = Kernel::new(vec![Var::new(X, x), sv.clone()], vec![Var::new(Y, y), Var::new(Z, z)], rows)?;
        Self::new(kernel, JointPmf::single(sv, ps)?)
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn state(&self) -> &JointPmf {
        &self.state
    }

    pub fn x(&self) -> &Alphabet {
        &self.kernel.from()[0].alphabet
    }

    pub fn s(&self) -> &Alphabet {
        &self.kernel.from()[1].alphabet
    }

    pub fn y(&self) -> &Alphabet {
        &self.kernel.to()[0].alphabet
    }

    pub fn z(&self) -> &Alphabet {
        &self.kernel.to()[1].alphabet
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn erasure_rows_and_cells() {
        let ch = make_erasure_wtgf(ErasureParams::new(0.5, 0.5).unwrap());
        for x in 0..2 {
            let s: f64 = ch.kernel().row(x).iter().sum();
            assert!((s - 1.0).abs() < 1e-12);
            // Y = x, F = 0, Ze = x
            assert_eq!(ch.kernel().row(x)[(x * 2) * 6 + x * 2], 0.25);
        }
        let perfect = make_erasure_wtgf(ErasureParams::new(0.0, 0.3).unwrap());
        let fb = perfect.feedback_kernel();
        assert_eq!(fb.row(0), &[1.0, 0.0]);
        let dead = make_erasure_wtgf(ErasureParams::new(1.0, 0.3).unwrap());
        assert_eq!(dead.feedback_kernel().row(1), &[0.0, 1.0]);
        assert!(ErasureParams::new(1.2, 0.0).is_err());
    }

    #[test]
    fn output_feedback_detected() {
        let x = Alphabet::indexed(2);
        let ch = WtgfChannel::with_output_feedback(x.clone(), x.clone(), x.clone(), vec![0.5, 0.0, 0.0, 0.5, 0.0, 0.5, 0.5, 0.0])
            .unwrap();
        assert!(ch.has_output_feedback());
        let plain = WtgfChannel::from_pair(x.clone(), x.clone(), x, vec![0.5, 0.0, 0.0, 0.5, 0.0, 0.5, 0.5, 0.0]).unwrap();
        assert!(!plain.has_output_feedback());
    }

    #[test]
    fn embedding_with_singleton_sources_is_main_channel() {
        let main = Kernel::new(
            vec![Var::new(XC, Alphabet::indexed(2))],
            vec![Var::new(YC, Alphabet::indexed(2)), Var::new(ZC, Alphabet::indexed(2))],
            vec![0.72, 0.18, 0.08, 0.02, 0.02, 0.08, 0.18, 0.72],
        )
        .unwrap();
        let one = |n: &str| Var::new(n, Alphabet::degenerate());
        let src = JointPmf::new(vec![one(YS), one(YHATS), one(ZS)], vec![1.0]).unwrap();
        let ps = ParallelSourcesChannel::new(main.clone(), src).unwrap();
        let w = embed_parallel(&ps);
        assert!(w.yhat().is_degenerate());
        assert_eq!(w.kernel().rows(), main.rows());
    }
}
