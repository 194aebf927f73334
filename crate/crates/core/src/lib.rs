//! Secrecy-rate and secret-key-rate bounds for discrete memoryless wiretap
//! channels with generalized feedback.
//!
//! The crate is organised bottom-up:
//!
//! - [`probkit`]: joint probability tensors, kernels and information measures.
//! - [`channels`]: channel models, canonical constructors and the degraded /
//!   less-noisy predicates.
//! - [`bounds`]: pointwise rate evaluators for given auxiliary distributions.
//! - [`optimize`]: maximization of those evaluators over their distribution
//!   families.
//! - [`simkit`]: a desk-scale simulation of the block-Markov key-generation
//!   coding scheme, with exact leakage on tiny instances.
//!
//! ```
//! use wtgf::bounds::{erasure_rates};
//! use wtgf::channels::ErasureParams;
//!
//! let r = erasure_rates(ErasureParams::new(0.5, 0.5).unwrap());
//! assert!((r.inner_kg - 1.0 / 6.0).abs() < 1e-12);
//! assert!((r.capacity - 3.0 / 14.0).abs() < 1e-12);
//! ```

pub mod bounds;
pub mod channels;
pub mod error;
pub mod optimize;
pub mod probkit;
pub mod simkit;

pub use error::{Error, Result};
