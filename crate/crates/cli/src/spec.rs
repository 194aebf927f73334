//! Channel specification files.
//!
//! A spec is a JSON object with a `kind` tag, symbol lists for every alphabet
//! and flat tensors with explicit `dims`. Tensors are row-major in the order
//! the dimensions are listed, the last index varying fastest.
//!
//! ```json
//! {
//!   "version": 1,
//!   "kind": "wiretap_pair",
//!   "alphabets": { "x": ["0", "1"], "y": ["0", "1"], "z": ["0", "1"] },
//!   "kernel": { "dims": [2, 2, 2], "data": [0.72, 0.18, 0.08, 0.02, 0.02, 0.08, 0.18, 0.72] }
//! }
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};
use wtgf::channels::{make_erasure_wtgf, ErasureParams, ParallelSourcesChannel, StateChannel, WtgfChannel};
use wtgf::optimize::ChannelRef;
use wtgf::probkit::Alphabet;

use crate::error::CliError;

pub const FORMAT_VERSION: u32 = 1;

/// A flat tensor with its dimension list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tensor {
    pub dims: Vec<usize>,
    pub data: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WtgfAlphabets {
    pub x: Vec<String>,
    pub y: Vec<String>,
    pub yhat: Vec<String>,
    pub z: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairAlphabets {
    pub x: Vec<String>,
    pub y: Vec<String>,
    pub z: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParallelAlphabets {
    pub xc: Vec<String>,
    pub yc: Vec<String>,
    pub zc: Vec<String>,
    pub ys: Vec<String>,
    pub yhats: Vec<String>,
    pub zs: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateAlphabets {
    pub x: Vec<String>,
    pub s: Vec<String>,
    pub y: Vec<String>,
    pub z: Vec<String>,
}

/// The kind-specific part of a spec.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ChannelBody {
    /// `p(y ŷ z | x)` with dims `[|X|, |Y|, |Ŷ|, |Z|]`.
    Wtgf { alphabets: WtgfAlphabets, kernel: Tensor },
    /// `p(y z | x)` with dims `[|X|, |Y|, |Z|]`; the encoder sees nothing, or
    /// `Y` itself when `output_feedback` is set.
    WiretapPair {
        alphabets: PairAlphabets,
        kernel: Tensor,
        #[serde(default)]
        output_feedback: bool,
    },
    /// Main channel `p(yc zc | xc)` and source `p(ys ŷs zs)`.
    Parallel {
        alphabets: ParallelAlphabets,
        main: Tensor,
        source: Tensor,
    },
    /// Binary erasure wiretap channel with public erasure feedback.
    Erasure { delta: f64, delta_e: f64 },
    /// `p(y z | x s)` with dims `[|X|, |S|, |Y|, |Z|]` and `p(s)`.
    StateChannel {
        alphabets: StateAlphabets,
        kernel: Tensor,
        state: Tensor,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelSpecFile {
    pub version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    #[serde(flatten)]
    pub body: ChannelBody,
}

/// A validated channel of one of the three model families.
#[derive(Debug, Clone, PartialEq)]
pub enum Channel {
    Wtgf(WtgfChannel),
    Parallel(ParallelSourcesChannel),
    State(StateChannel),
}

impl Channel {
    pub fn as_ref(&self) -> ChannelRef<'_> {
        match self {
            Channel::Wtgf(c) => ChannelRef::Wtgf(c),
            Channel::Parallel(c) => ChannelRef::Parallel(c),
            Channel::State(c) => ChannelRef::State(c),
        }
    }

    pub fn family(&self) -> &'static str {
        match self {
            Channel::Wtgf(_) => "wtgf",
            Channel::Parallel(_) => "parallel",
            Channel::State(_) => "state_channel",
        }
    }
}

fn alphabet(what: &str, labels: &[String]) -> Result<Alphabet, CliError> {
    Alphabet::new(labels.iter().cloned()).map_err(|e| CliError::Validation(format!("alphabet {what}: {e}")))
}

/// Check shape, signs and row sums of a tensor and return its data with
/// every row renormalized exactly.
fn checked(what: &str, t: &Tensor, dims: &[usize], row_len: usize, tolerance: f64) -> Result<Vec<f64>, CliError> {
    if t.dims != dims {
        return Err(CliError::Validation(format!(
            "{what}: dims {:?} do not match the alphabet sizes {dims:?}",
            t.dims
        )));
    }
    let n: usize = dims.iter().product();
    if t.data.len() != n {
        return Err(CliError::Validation(format!(
            "{what}: {} entries for dims {dims:?}, expected {n}",
            t.data.len()
        )));
    }
    if let Some((i, v)) = t.data.iter().enumerate().find(|(_, v)| !v.is_finite() || **v < 0.0) {
        return Err(CliError::Validation(format!("{what}: entry {i} is {v}")));
    }
    let mut data = t.data.clone();
    for (r, row) in data.chunks_mut(row_len).enumerate() {
        let sum: f64 = row.iter().sum();
        if (sum - 1.0).abs() > tolerance {
            return Err(CliError::Validation(format!(
                "{what}: row {r} sums to {sum} (tolerance {tolerance:e})"
            )));
        }
        row.iter_mut().for_each(|p| *p /= sum);
    }
    Ok(data)
}

fn lib(e: wtgf::Error) -> CliError {
    CliError::Validation(e.to_string())
}

impl ChannelSpecFile {
    /// Validate and build the channel. Row sums may deviate from one by at most `tolerance`.
    pub fn build(&self, tolerance: f64) -> Result<Channel, CliError> {
        if self.version != FORMAT_VERSION {
            return Err(CliError::Validation(format!(
                "format version {} is not supported (expected {FORMAT_VERSION})",
                self.version
            )));
        }
        match &self.body {
            ChannelBody::Wtgf { alphabets: a, kernel } => {
                let (x, y, yh, z) = (alphabet("x", &a.x)?, alphabet("y", &a.y)?, alphabet("yhat", &a.yhat)?, alphabet("z", &a.z)?);
                let dims = [x.len(), y.len(), yh.len(), z.len()];
                let rows = checked("kernel", kernel, &dims, y.len() * yh.len() * z.len(), tolerance)?;
                Ok(Channel::Wtgf(WtgfChannel::new(x, y, yh, z, rows).map_err(lib)?))
            }
            ChannelBody::WiretapPair {
                alphabets: a,
                kernel,
                output_feedback,
            } => {
                let (x, y, z) = (alphabet("x", &a.x)?, alphabet("y", &a.y)?, alphabet("z", &a.z)?);
                let dims = [x.len(), y.len(), z.len()];
                let rows = checked("kernel", kernel, &dims, y.len() * z.len(), tolerance)?;
                let ch = if *output_feedback {
                    WtgfChannel::with_output_feedback(x, y, z, rows)
                } else {
                    WtgfChannel::from_pair(x, y, z, rows)
                };
                Ok(Channel::Wtgf(ch.map_err(lib)?))
            }
            ChannelBody::Parallel { alphabets: a, main, source } => {
                let (xc, yc, zc) = (alphabet("xc", &a.xc)?, alphabet("yc", &a.yc)?, alphabet("zc", &a.zc)?);
                let (ys, yh, zs) = (alphabet("ys", &a.ys)?, alphabet("yhats", &a.yhats)?, alphabet("zs", &a.zs)?);
                let m = checked("main", main, &[xc.len(), yc.len(), zc.len()], yc.len() * zc.len(), tolerance)?;
                let n = ys.len() * yh.len() * zs.len();
                let s = checked("source", source, &[ys.len(), yh.len(), zs.len()], n, tolerance)?;
                let ps = ParallelSourcesChannel::from_tensors(xc, yc, zc, m, ys, yh, zs, s).map_err(lib)?;
                Ok(Channel::Parallel(ps))
            }
            ChannelBody::Erasure { delta, delta_e } => {
                let p = ErasureParams::new(*delta, *delta_e).map_err(lib)?;
                Ok(Channel::Wtgf(make_erasure_wtgf(p)))
            }
            ChannelBody::StateChannel { alphabets: a, kernel, state } => {
                let (x, s, y, z) = (alphabet("x", &a.x)?, alphabet("s", &a.s)?, alphabet("y", &a.y)?, alphabet("z", &a.z)?);
                let dims = [x.len(), s.len(), y.len(), z.len()];
                let rows = checked("kernel", kernel, &dims, y.len() * z.len(), tolerance)?;
                let ps = checked("state", state, &[s.len()], s.len(), tolerance)?;
                Ok(Channel::State(StateChannel::from_tensors(x, s, y, z, rows, ps).map_err(lib)?))
            }
        }
    }

    /// The spec of an already built channel, in its most general kind.
    pub fn from_channel(ch: &Channel) -> Self {
        let labels = |a: &Alphabet| a.symbols().to_vec();
        let tensor = |dims: Vec<usize>, data: &[f64]| Tensor {
            dims,
            data: data.to_vec(),
        };
        let body = match ch {
            Channel::Wtgf(c) => ChannelBody::Wtgf {
                alphabets: WtgfAlphabets {
                    x: labels(c.x()),
                    y: labels(c.y()),
                    yhat: labels(c.yhat()),
                    z: labels(c.z()),
                },
                kernel: tensor(vec![c.x().len(), c.y().len(), c.yhat().len(), c.z().len()], c.kernel().rows()),
            },
            Channel::Parallel(c) => ChannelBody::Parallel {
                alphabets: ParallelAlphabets {
                    xc: labels(c.xc()),
                    yc: labels(c.yc()),
                    zc: labels(c.zc()),
                    ys: labels(c.ys()),
                    yhats: labels(c.yhats()),
                    zs: labels(c.zs()),
                },
                main: tensor(vec![c.xc().len(), c.yc().len(), c.zc().len()], c.main_kernel().rows()),
                source: tensor(vec![c.ys().len(), c.yhats().len(), c.zs().len()], c.source().mass()),
            },
            Channel::State(c) => ChannelBody::StateChannel {
                alphabets: StateAlphabets {
                    x: labels(c.x()),
                    s: labels(c.s()),
                    y: labels(c.y()),
                    z: labels(c.z()),
                },
                kernel: tensor(vec![c.x().len(), c.s().len(), c.y().len(), c.z().len()], c.kernel().rows()),
                state: tensor(vec![c.s().len()], c.state().mass()),
            },
        };
        Self {
            version: FORMAT_VERSION,
            name: None,
            description: None,
            body,
        }
    }
}

/// Parse spec text; syntax errors carry their line and column.
pub fn parse_spec(text: &str) -> Result<ChannelSpecFile, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

/// Parse and validate spec text.
pub fn parse_channel_spec(text: &str, tolerance: f64) -> Result<Channel, CliError> {
    parse_spec(text)?.build(tolerance)
}

/// Read, parse and validate a spec file.
pub fn load_channel(path: &Path, tolerance: f64) -> Result<(ChannelSpecFile, Channel), CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let spec = parse_spec(&text)?;
    let ch = spec.build(tolerance)?;
    Ok((spec, ch))
}
