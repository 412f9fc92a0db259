use std::io::{self, Read, Write};
use std::net::{Shutdown, TcpStream};

use crate::frame::{encode_frame, read_frame, FrameError};
use crate::message::Message;
use crate::WireError;

/// Transcript direction markers.
pub const SENT: u8 = b'>';
pub const RECEIVED: u8 = b'<';

/// Typed message stream over any byte stream, optionally recording every
/// frame with a direction marker.
pub struct Channel<S> {
    stream: S,
    transcript: Option<Vec<u8>>,
}

impl<S: Read + Write> Channel<S> {
    pub fn new(stream: S, record: bool) -> Self {
        Self {
            stream,
            transcript: record.then(Vec::new),
        }
    }

    pub fn send(&mut self, msg: &Message) -> Result<(), WireError> {
        let frame = msg.to_frame();
        let bytes = encode_frame(frame.kind, &frame.payload)?;
        self.stream.write_all(&bytes)?;
        self.stream.flush()?;
        if let Some(t) = &mut self.transcript {
            t.push(SENT);
            t.extend_from_slice(&bytes);
        }
        Ok(())
    }

    /// `Ok(None)` on a clean close between frames.
    pub fn recv(&mut self) -> Result<Option<Message>, WireError> {
        let frame = match read_frame(&mut self.stream) {
            Ok(f) => f,
            Err(e) if e.kind() == io::ErrorKind::InvalidData => {
                return Err(match e.into_inner().map(|inner| inner.downcast::<FrameError>()) {
                    Some(Ok(fe)) => WireError::Frame(*fe),
                    _ => WireError::Protocol("undecodable frame".into()),
                })
            }
            Err(e) if e.kind() == io::ErrorKind::UnexpectedEof => return Err(WireError::Disconnected),
            Err(e) => return Err(e.into()),
        };
        let Some(frame) = frame else {
            return Ok(None);
        };
        if let Some(t) = &mut self.transcript {
            t.push(RECEIVED);
            t.extend_from_slice(&encode_frame(frame.kind, &frame.payload)?);
        }
        Message::from_frame(&frame).map(Some)
    }

    /// Like [`Self::recv`] but a close is an error.
    pub fn expect(&mut self) -> Result<Message, WireError> {
        self.recv()?.ok_or(WireError::Disconnected)
    }

    pub fn take_transcript(&mut self) -> Vec<u8> {
        self.transcript.take().unwrap_or_default()
    }

    pub fn get_mut(&mut self) -> &mut S {
        &mut self.stream
    }
}

impl Channel<TcpStream> {
    pub fn shutdown_write(&self) {
        let _ = self.stream.shutdown(Shutdown::Write);
    }

    /// Discard whatever the peer still sends until it closes.
    pub fn drain(&mut self) {
        let mut sink = [0u8; 256];
        while matches!(self.stream.read(&mut sink), Ok(n) if n > 0) {}
    }
}
