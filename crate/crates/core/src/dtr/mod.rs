//! Dynamic time-range MAC: message words evolve by a rotation whose count
//! encodes the sleep interval, authenticated with HMAC-SHA-256, plus the
//! oversleep penalty ledger.

mod penalty;
mod session;
pub mod vectors;
mod word;

pub use penalty::{oversleep_deduction, PenaltyLedger};
pub use session::{
    next_ap_message, next_ue_message, run_handshake, shift_bits_from_interval, ApPending, AuthSession, Credentials,
    HandshakeTranscript, Role, UePending,
};
pub use word::{
    circular_shift, compute_tag, hmac_sha256, pair_tag, word_tag, MacTag, MessageWord, SessionKey, KEY_LEN, TAG_LEN,
    WORD_BITS,
};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DtrError {
    #[error("timestamp earlier than the previous authentication")]
    ClockRegression,
    #[error("sleep unit must be positive")]
    InvalidSleepUnit,
    #[error("registration words must be non-zero")]
    ZeroWord,
    #[error("operation not available to this endpoint role")]
    WrongRole,
    #[error("device has been evicted")]
    Evicted,
    #[error("malformed encoding: {0}")]
    Encoding(&'static str),
}
