//! Framed byte protocol that carries the negotiation broadcasts and the
//! three-message authentication between one access point and its devices.

pub mod ap;
pub mod channel;
pub mod clock;
pub mod frame;
pub mod message;
pub mod ue;

pub use ap::{ap_service_loop, DeviceRecord, LedgerStore, NegotiationOutcome};
pub use channel::Channel;
pub use clock::{Clock, SystemClock, VirtualClock};
pub use frame::{decode_frame, encode_frame, read_frame, write_frame, Frame, FrameError, FrameKind};
pub use message::{Message, Phase, RegisterStatus};
pub use ue::{ue_client_loop, SessionOutcome, UeProfile};

use hisam_core::dtr::DtrError;
use hisam_core::mfg::{MfgError, SystemParams};
use thiserror::Error;

pub const DEFAULT_LISTEN: &str = "127.0.0.1:7878";

#[derive(Debug, Error)]
pub enum WireError {
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("framing: {0}")]
    Frame(#[from] FrameError),
    #[error("protocol: {0}")]
    Protocol(String),
    #[error(transparent)]
    Mfg(#[from] MfgError),
    #[error(transparent)]
    Dtr(#[from] DtrError),
    #[error("registration rejected: {0:?}")]
    Rejected(RegisterStatus),
    #[error("peer disconnected")]
    Disconnected,
    #[error("negotiation aborted")]
    NegotiationAborted,
}

/// Settings both endpoints must agree on out of band.
#[derive(Debug, Clone, PartialEq)]
pub struct WireConfig {
    /// Physical time unit; `n_devices` is the number of registrations the
    /// AP waits for before negotiating.
    pub params: SystemParams,
    /// Registration credentials are derived from this and the device id.
    pub credential_seed: u64,
    pub oversleep_limit: u32,
    /// Authentications each device performs after negotiating.
    pub auth_rounds: usize,
    pub record_transcript: bool,
}

impl WireConfig {
    pub fn new(params: SystemParams) -> Self {
        Self {
            params,
            credential_seed: 0,
            oversleep_limit: 2,
            auth_rounds: 10,
            record_transcript: false,
        }
    }

    pub fn sleep_unit(&self) -> f64 {
        self.params.time_unit / self.params.f_m()
    }

    pub fn validate(&self) -> Result<(), WireError> {
        self.params.validated()?;
        if self.oversleep_limit == 0 {
            return Err(WireError::Protocol("oversleep limit must be positive".into()));
        }
        Ok(())
    }
}
