use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::degraded::is_degraded;
use crate::error::{Error, Result};
use crate::probkit::{dirichlet_row, JointPmf, Kernel};

/// Settings of the randomized concavity probe.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeConfig {
    pub probes: usize,
    pub seed: u64,
    pub threshold: f64,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        Self {
            probes: 512,
            seed: 0,
            threshold: 1e-9,
        }
    }
}

/// Two input distributions whose midpoint breaks concavity of
/// `f(p) = I(X; better) − I(X; worse)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub p1: Vec<f64>,
    pub p2: Vec<f64>,
    pub lambda: f64,
    /// `λ f(p1) + (1−λ) f(p2) − f(λ p1 + (1−λ) p2)` at discovery.
    pub margin: f64,
}

impl Witness {
    /// Recompute the concavity violation with the probkit evaluators.
    pub fn violation(&self, better: &Kernel, worse: &Kernel) -> Result<f64> {
        let mix: Vec<f64> = self
            .p1
            .iter()
            .zip(&self.p2)
            .map(|(a, b)| self.lambda * a + (1.0 - self.lambda) * b)
            .collect();
        let f = |p: &[f64]| gap(better, worse, p);
        Ok(self.lambda * f(&self.p1)? + (1.0 - self.lambda) * f(&self.p2)? - f(&mix)?)
    }
}

/// Three-valued answer to "is `better` less noisy than `worse`".
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum LessNoisyVerdict {
    Yes,
    No { witness: Witness },
    Unknown,
}

impl LessNoisyVerdict {
    pub fn is_yes(&self) -> bool {
        matches!(self, Self::Yes)
    }

    pub fn is_no(&self) -> bool {
        matches!(self, Self::No { .. })
    }
}

fn input_mi(k: &Kernel, p: &[f64]) -> Result<f64> {
    let joint = JointPmf::single(k.from()[0].clone(), p.to_vec())?.compose(k)?;
    let names: Vec<&str> = k.to().iter().map(|v| v.name.as_str()).collect();
    joint.mutual_information(&[&k.from()[0].name], &names, &[])
}

/// `I(X; better) − I(X; worse)` under input distribution `p`.
fn gap(better: &Kernel, worse: &Kernel, p: &[f64]) -> Result<f64> {
    Ok(input_mi(better, p)? - input_mi(worse, p)?)
}

/// Decide whether `better` is less noisy than `worse`.
///
/// `Yes` when `worse` is degraded with respect to `better`. Otherwise the
/// midpoint concavity of `I(X; better) − I(X; worse)` is probed over vertex
/// pairs and then random Dirichlet pairs; a violation proves the property
/// fails and yields `No`. Nothing found yields `Unknown`.
pub fn less_noisy_verdict(better: &Kernel, worse: &Kernel, cfg: &ProbeConfig) -> Result<LessNoisyVerdict> {
    if better.from().len() != 1 || worse.from().len() != 1 || better.from()[0].alphabet != worse.from()[0].alphabet {
        return Err(Error::Argument("less-noisy check needs a shared single input variable".into()));
    }
    if is_degraded(better, worse)?.degraded {
        return Ok(LessNoisyVerdict::Yes);
    }
    let n = better.in_len();
    let mut pairs: Vec<(Vec<f64>, Vec<f64>)> = Vec::new();
    let vertex = |i: usize| {
        let mut v = vec![0.0; n];
        v[i] = 1.0;
        v
    };
    for i in 0..n {
        for j in i + 1..n {
            pairs.push((vertex(i), vertex(j)));
        }
    }
    pairs.truncate(cfg.probes);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    while pairs.len() < cfg.probes {
        pairs.push((dirichlet_row(&mut rng, n), dirichlet_row(&mut rng, n)));
    }
    let lambda = 0.5;
    let mut best: Option<Witness> = None;
    for (p1, p2) in pairs {
        let mix: Vec<f64> = p1.iter().zip(&p2).map(|(a, b)| lambda * a + (1.0 - lambda) * b).collect();
        let margin =
            lambda * gap(better, worse, &p1)? + (1.0 - lambda) * gap(better, worse, &p2)? - gap(better, worse, &mix)?;
        if margin > cfg.threshold && best.as_ref().is_none_or(|w| margin > w.margin) {
            best = Some(Witness { p1, p2, lambda, margin });
        }
    }
    Ok(match best {
        Some(witness) => LessNoisyVerdict::No { witness },
        None => LessNoisyVerdict::Unknown,
    })
}

/// Less-noisy check with the input distribution held at `anchor`.
///
/// Asks whether `I(V; better) ≥ I(V; worse)` for every `V` with
/// `V − X − (outputs)` when `X ~ anchor`, which is the form used for correlated
/// sources. Probes split `anchor` into two halves `anchor ± t·d`; a violation is
/// a binary `V` with `I(V; worse) > I(V; better)`.
pub fn less_noisy_at(better: &Kernel, worse: &Kernel, anchor: &[f64], cfg: &ProbeConfig) -> Result<LessNoisyVerdict> {
    if better.from().len() != 1 || worse.from().len() != 1 || better.from()[0].alphabet != worse.from()[0].alphabet {
        return Err(Error::Argument("less-noisy check needs a shared single input variable".into()));
    }
    if anchor.len() != better.in_len() {
        return Err(Error::ShapeMismatch {
            expected: better.in_len(),
            found: anchor.len(),
        });
    }
    if is_degraded(better, worse)?.degraded {
        return Ok(LessNoisyVerdict::Yes);
    }
    let support: Vec<usize> = (0..anchor.len()).filter(|&i| anchor[i] > 0.0).collect();
    if support.len() < 2 {
        // a point mass leaves no room for V to carry information
        return Ok(LessNoisyVerdict::Yes);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut best: Option<Witness> = None;
    for _ in 0..cfg.probes {
        let raw = dirichlet_row(&mut rng, support.len());
        let mean = 1.0 / support.len() as f64;
        let mut d = vec![0.0; anchor.len()];
        for (k, &i) in support.iter().enumerate() {
            d[i] = raw[k] - mean;
        }
        let t = support
            .iter()
            .filter(|&&i| d[i] != 0.0)
            .map(|&i| anchor[i] / d[i].abs())
            .fold(f64::INFINITY, f64::min);
        if !t.is_finite() {
            continue;
        }
        let p1: Vec<f64> = anchor.iter().zip(&d).map(|(a, x)| (a + t * x).max(0.0)).collect();
        let p2: Vec<f64> = anchor.iter().zip(&d).map(|(a, x)| (a - t * x).max(0.0)).collect();
        let w = Witness {
            p1,
            p2,
            lambda: 0.5,
            margin: 0.0,
        };
        let margin = w.violation(better, worse)?;
        if margin > cfg.threshold && best.as_ref().is_none_or(|b| margin > b.margin) {
            best = Some(Witness { margin, ..w });
        }
    }
    Ok(match best {
        Some(witness) => LessNoisyVerdict::No { witness },
        None => LessNoisyVerdict::Unknown,
    })
}

/// Degradedness and less-noisy verdicts in both directions for a wiretap pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    /// `X − Y − Z`: Eve's output is degraded with respect to Bob's.
    pub degraded_y_to_z: bool,
    /// `X − Z − Y`: Bob's output is degraded with respect to Eve's.
    pub degraded_z_to_y: bool,
    /// Bob's channel less noisy than Eve's.
    pub bob_less_noisy: LessNoisyVerdict,
    /// Eve's channel less noisy than Bob's.
    pub eve_less_noisy: LessNoisyVerdict,
}

pub fn classify(bob: &Kernel, eve: &Kernel, cfg: &ProbeConfig) -> Result<ClassificationReport> {
    Ok(ClassificationReport {
        degraded_y_to_z: is_degraded(bob, eve)?.degraded,
        degraded_z_to_y: is_degraded(eve, bob)?.degraded,
        bob_less_noisy: less_noisy_verdict(bob, eve, cfg)?,
        eve_less_noisy: less_noisy_verdict(eve, bob, cfg)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::probkit::{Alphabet, Var};

    #[test]
    fn erased_eve_is_not_less_noisy() {
        let x = Var::new("X", Alphabet::indexed(2));
        let bob = Kernel::identity(x.clone(), "Y");
        let eve = Kernel::constant(vec![x], vec![Var::new("Z", Alphabet::degenerate())], vec![1.0]).unwrap();
        match less_noisy_verdict(&eve, &bob, &ProbeConfig::default()).unwrap() {
            LessNoisyVerdict::No { witness } => {
                assert!(witness.violation(&eve, &bob).unwrap() > 1e-9);
            }
            other => panic!("expected a witness, got {other:?}"),
        }
        assert!(less_noisy_verdict(&bob, &eve, &ProbeConfig::default()).unwrap().is_yes());
    }
}
