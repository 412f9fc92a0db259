//! Typed payloads. Floats are IEEE-754 binary64, big-endian.

use hisam_core::dtr::{MacTag, TAG_LEN};

use crate::frame::{Frame, FrameKind};
use crate::WireError;

/// Registration outcome carried back in a 1-byte REGISTER payload.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum RegisterStatus {
    Accepted = 0,
    DuplicateId = 1,
    Closed = 2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum Phase {
    /// Devices answer with an ALPHA_REPORT.
    Report = 0,
    /// Negotiation is over; the last reported alpha stands.
    Final = 1,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Message {
    Register {
        id: u32,
        demand: f64,
    },
    RegisterAck(RegisterStatus),
    Broadcast {
        workload: f64,
        total_resource: f64,
        f_m: f64,
        phase: Phase,
    },
    AlphaReport(f64),
    /// `None` is an explicit rejection (empty payload).
    Auth1(Option<MacTag>),
    Auth2(Option<MacTag>),
    Auth3(Option<MacTag>),
    Evict,
}

fn f64_at(p: &[u8], at: usize) -> f64 {
    f64::from_be_bytes(p[at..at + 8].try_into().expect("length checked"))
}

fn tag_payload(tag: &Option<MacTag>) -> Vec<u8> {
    tag.as_ref().map(|t| t.0.to_vec()).unwrap_or_default()
}

fn parse_tag(p: &[u8]) -> Result<Option<MacTag>, WireError> {
    match p.len() {
        0 => Ok(None),
        TAG_LEN => Ok(Some(MacTag::from_slice(p)?)),
        _ => Err(WireError::Protocol(format!("tag payload of {} bytes", p.len()))),
    }
}

impl Message {
    pub fn kind(&self) -> FrameKind {
        match self {
            Message::Register { .. } | Message::RegisterAck(_) => FrameKind::Register,
            Message::Broadcast { .. } => FrameKind::NegotiateBroadcast,
            Message::AlphaReport(_) => FrameKind::AlphaReport,
            Message::Auth1(_) => FrameKind::Auth1,
            Message::Auth2(_) => FrameKind::Auth2,
            Message::Auth3(_) => FrameKind::Auth3,
            Message::Evict => FrameKind::Evict,
        }
    }

    pub fn to_frame(&self) -> Frame {
        let payload = match self {
            Message::Register { id, demand } => {
                let mut p = id.to_be_bytes().to_vec();
                p.extend_from_slice(&demand.to_be_bytes());
                p
            }
            Message::RegisterAck(s) => vec![*s as u8],
            Message::Broadcast {
                workload,
                total_resource,
                f_m,
                phase,
            } => {
                let mut p = Vec::with_capacity(25);
                for v in [workload, total_resource, f_m] {
                    p.extend_from_slice(&v.to_be_bytes());
                }
                p.push(*phase as u8);
                p
            }
            Message::AlphaReport(a) => a.to_be_bytes().to_vec(),
            Message::Auth1(t) | Message::Auth2(t) | Message::Auth3(t) => tag_payload(t),
            Message::Evict => Vec::new(),
        };
        Frame::new(self.kind(), payload)
    }

    pub fn from_frame(frame: &Frame) -> Result<Self, WireError> {
        let p = &frame.payload[..];
        let bad = |what: &str| Err(WireError::Protocol(format!("{what}: {} byte payload", p.len())));
        match frame.kind {
            FrameKind::Register => match p.len() {
                12 => Ok(Message::Register {
                    id: u32::from_be_bytes(p[..4].try_into().expect("length checked")),
                    demand: f64_at(p, 4),
                }),
                1 => match p[0] {
                    0 => Ok(Message::RegisterAck(RegisterStatus::Accepted)),
                    1 => Ok(Message::RegisterAck(RegisterStatus::DuplicateId)),
                    2 => Ok(Message::RegisterAck(RegisterStatus::Closed)),
                    s => Err(WireError::Protocol(format!("register status {s}"))),
                },
                _ => bad("REGISTER"),
            },
            FrameKind::NegotiateBroadcast => {
                if p.len() != 25 {
                    return bad("NEGOTIATE_BROADCAST");
                }
                let phase = match p[24] {
                    0 => Phase::Report,
                    1 => Phase::Final,
                    b => return Err(WireError::Protocol(format!("broadcast phase {b}"))),
                };
                Ok(Message::Broadcast {
                    workload: f64_at(p, 0),
                    total_resource: f64_at(p, 8),
                    f_m: f64_at(p, 16),
                    phase,
                })
            }
            FrameKind::AlphaReport => {
                if p.len() != 8 {
                    return bad("ALPHA_REPORT");
                }
                Ok(Message::AlphaReport(f64_at(p, 0)))
            }
            FrameKind::Auth1 => Ok(Message::Auth1(parse_tag(p)?)),
            FrameKind::Auth2 => Ok(Message::Auth2(parse_tag(p)?)),
            FrameKind::Auth3 => Ok(Message::Auth3(parse_tag(p)?)),
            FrameKind::Evict => {
                if !p.is_empty() {
                    return bad("EVICT");
                }
                Ok(Message::Evict)
            }
        }
    }
}
