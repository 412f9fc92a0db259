//! `[kind: u8] [len: u16 BE] [payload; len]`

use std::io::{self, Read, Write};

use thiserror::Error;

pub const HEADER_LEN: usize = 3;
pub const MAX_PAYLOAD: usize = u16::MAX as usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum FrameKind {
    Register = 1,
    NegotiateBroadcast = 2,
    AlphaReport = 3,
    Auth1 = 4,
    Auth2 = 5,
    Auth3 = 6,
    Evict = 7,
}

impl FrameKind {
    pub const ALL: [FrameKind; 7] = [
        FrameKind::Register,
        FrameKind::NegotiateBroadcast,
        FrameKind::AlphaReport,
        FrameKind::Auth1,
        FrameKind::Auth2,
        FrameKind::Auth3,
        FrameKind::Evict,
    ];

    pub fn from_byte(b: u8) -> Result<Self, FrameError> {
        Self::ALL
            .into_iter()
            .find(|k| *k as u8 == b)
            .ok_or(FrameError::UnknownKind(b))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    pub kind: FrameKind,
    pub payload: Vec<u8>,
}

impl Frame {
    pub fn new(kind: FrameKind, payload: Vec<u8>) -> Self {
        Self { kind, payload }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FrameError {
    #[error("payload of {0} bytes exceeds the 16-bit length field")]
    Oversize(usize),
    #[error("unknown frame kind {0}")]
    UnknownKind(u8),
    /// Resumable: at least this many more bytes are required.
    #[error("need {0} more bytes")]
    NeedMore(usize),
}

pub fn encode_frame(kind: FrameKind, payload: &[u8]) -> Result<Vec<u8>, FrameError> {
    if payload.len() > MAX_PAYLOAD {
        return Err(FrameError::Oversize(payload.len()));
    }
    let mut out = Vec::with_capacity(HEADER_LEN + payload.len());
    out.push(kind as u8);
    out.extend_from_slice(&(payload.len() as u16).to_be_bytes());
    out.extend_from_slice(payload);
    Ok(out)
}

/// Decode one frame from the front of `buf`, returning it with the number
/// of bytes consumed.
pub fn decode_frame(buf: &[u8]) -> Result<(Frame, usize), FrameError> {
    if buf.len() < HEADER_LEN {
        return Err(FrameError::NeedMore(HEADER_LEN - buf.len()));
    }
    let kind = FrameKind::from_byte(buf[0])?;
    let len = u16::from_be_bytes([buf[1], buf[2]]) as usize;
    let end = HEADER_LEN + len;
    if buf.len() < end {
        return Err(FrameError::NeedMore(end - buf.len()));
    }
    Ok((Frame::new(kind, buf[HEADER_LEN..end].to_vec()), end))
}

/// Blocking read of exactly one frame. `Ok(None)` on clean EOF before the
/// header.
pub fn read_frame<R: Read>(r: &mut R) -> io::Result<Option<Frame>> {
    let mut header = [0u8; HEADER_LEN];
    let mut got = 0;
    while got < HEADER_LEN {
        match r.read(&mut header[got..]) {
            Ok(0) if got == 0 => return Ok(None),
            Ok(0) => return Err(io::ErrorKind::UnexpectedEof.into()),
            Ok(n) => got += n,
            Err(e) if e.kind() == io::ErrorKind::Interrupted => {}
            Err(e) => return Err(e),
        }
    }
    let kind = FrameKind::from_byte(header[0]).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))?;
    let mut payload = vec![0u8; u16::from_be_bytes([header[1], header[2]]) as usize];
    r.read_exact(&mut payload)?;
    Ok(Some(Frame::new(kind, payload)))
}

pub fn write_frame<W: Write>(w: &mut W, frame: &Frame) -> io::Result<()> {
    let bytes = encode_frame(frame.kind, &frame.payload).map_err(|e| io::Error::new(io::ErrorKind::InvalidInput, e))?;
    w.write_all(&bytes)?;
    w.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_payload_is_three_bytes() {
        let b = encode_frame(FrameKind::Evict, &[]).unwrap();
        assert_eq!(b, vec![7, 0, 0]);
    }

    #[test]
    fn length_is_big_endian() {
        let b = encode_frame(FrameKind::Auth1, &[0xAA; 300]).unwrap();
        assert_eq!(&b[..3], &[4, 0x01, 0x2C]);
    }

    #[test]
    fn truncation_asks_for_more() {
        let b = encode_frame(FrameKind::AlphaReport, &[1, 2, 3, 4, 5, 6, 7, 8]).unwrap();
        assert_eq!(decode_frame(&b[..b.len() - 1]), Err(FrameError::NeedMore(1)));
        assert_eq!(decode_frame(&b[..1]), Err(FrameError::NeedMore(2)));
        assert_eq!(decode_frame(&[]), Err(FrameError::NeedMore(3)));
    }

    #[test]
    fn unknown_and_oversize() {
        assert_eq!(decode_frame(&[0, 0, 0]), Err(FrameError::UnknownKind(0)));
        assert_eq!(decode_frame(&[8, 0, 0]), Err(FrameError::UnknownKind(8)));
        assert!(matches!(
            encode_frame(FrameKind::Register, &vec![0; MAX_PAYLOAD + 1]),
            Err(FrameError::Oversize(_))
        ));
        assert!(encode_frame(FrameKind::Register, &vec![0; MAX_PAYLOAD]).is_ok());
    }

    #[test]
    fn stream_helpers() {
        let mut buf = Vec::new();
        let f = Frame::new(FrameKind::Auth2, vec![9; 32]);
        write_frame(&mut buf, &f).unwrap();
        write_frame(&mut buf, &Frame::new(FrameKind::Evict, vec![])).unwrap();
        let mut r = &buf[..];
        assert_eq!(read_frame(&mut r).unwrap(), Some(f));
        assert_eq!(read_frame(&mut r).unwrap().unwrap().kind, FrameKind::Evict);
        assert_eq!(read_frame(&mut r).unwrap(), None);
        let mut cut = &buf[..10];
        assert!(read_frame(&mut cut).is_err());
    }
}
