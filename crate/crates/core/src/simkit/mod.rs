//! Desk-scale simulation of the block-Markov key-generation scheme.
//!
//! A [`Codebook`] is built from [`SchemeRates`] and a KG factorization; each
//! block carries a message and the bin indices describing the previous
//! block's feedback, and the key recovered from the sub-bin index encrypts the
//! next message. Everything is seeded: equal seeds give equal codebooks and
//! equal sessions.
//!
//! Codewords are drawn on demand rather than stored, so codebooks with large
//! index spaces cost memory only for their bin maps.

mod codebook;
mod leakage;
mod rates;
mod session;
mod typical;

pub use codebook::{build_codebook, decrypt, encrypt, Codebook, UIndex, CODEBOOK_BUDGET};
pub use leakage::{
    exact_leakage_tiny, monte_carlo_leakage, one_time_pad_check, LeakageMethod, LeakageResult, OtpCheck,
    ENUMERATION_BUDGET,
};
pub use rates::{code_size, derive_scheme_rates, CodeSizes, SchemeRates, SchemeTerms, Slacks, Strategy};
pub use session::{
    encode_index, estimate_error, random_messages, run_session, BlockTrace, Chain, Description, ErrorEstimate,
    SessionTrace,
};
pub use typical::{TypTable, TypicalityConfig};
pub mod fixtures;
