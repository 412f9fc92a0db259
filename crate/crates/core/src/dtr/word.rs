use std::fmt;

use hmac::{Hmac, KeyInit, Mac};
use sha2::Sha256;

use super::DtrError;

pub const WORD_BITS: u32 = 128;
pub const KEY_LEN: usize = 32;
pub const TAG_LEN: usize = 32;

/// 128-bit authentication message. Serialized big-endian on the wire and
/// into MAC inputs.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct MessageWord(pub u128);

impl MessageWord {
    pub const ZERO: MessageWord = MessageWord(0);

    pub fn to_bytes(self) -> [u8; 16] {
        self.0.to_be_bytes()
    }

    pub fn from_bytes(bytes: [u8; 16]) -> Self {
        Self(u128::from_be_bytes(bytes))
    }

    /// Left rotation by `count mod 128`.
    pub fn rotate(self, count: u64) -> Self {
        Self(self.0.rotate_left((count % WORD_BITS as u64) as u32))
    }

    pub fn xor(self, other: Self) -> Self {
        Self(self.0 ^ other.0)
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    pub fn to_hex(self) -> String {
        hex::encode(self.to_bytes())
    }

    pub fn from_hex(s: &str) -> Result<Self, DtrError> {
        let mut buf = [0u8; 16];
        hex::decode_to_slice(s, &mut buf).map_err(|_| DtrError::Encoding("message word hex"))?;
        Ok(Self::from_bytes(buf))
    }
}

impl fmt::Debug for MessageWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MessageWord({:032x})", self.0)
    }
}

pub fn circular_shift(word: MessageWord, count: u64) -> MessageWord {
    word.rotate(count)
}

/// Pre-shared session key; never leaves the endpoint.
#[derive(Clone, PartialEq, Eq)]
pub struct SessionKey(pub [u8; KEY_LEN]);

impl fmt::Debug for SessionKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("SessionKey(..)")
    }
}

impl SessionKey {
    pub fn to_hex(&self) -> String {
        hex::encode(self.0)
    }

    pub fn from_hex(s: &str) -> Result<Self, DtrError> {
        let mut buf = [0u8; KEY_LEN];
        hex::decode_to_slice(s, &mut buf).map_err(|_| DtrError::Encoding("key hex"))?;
        Ok(Self(buf))
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
pub struct MacTag(pub [u8; TAG_LEN]);

impl MacTag {
    pub fn from_slice(bytes: &[u8]) -> Result<Self, DtrError> {
        let arr: [u8; TAG_LEN] = bytes.try_into().map_err(|_| DtrError::Encoding("tag length"))?;
        Ok(Self(arr))
    }

    /// Comparison without an early exit on the first differing byte.
    pub fn ct_eq(&self, other: &MacTag) -> bool {
        self.0.iter().zip(other.0.iter()).fold(0u8, |acc, (a, b)| acc | (a ^ b)) == 0
    }

    pub fn to_hex(&self) -> String {
        hex::encode(self.0)
    }

    pub fn from_hex(s: &str) -> Result<Self, DtrError> {
        let mut buf = [0u8; TAG_LEN];
        hex::decode_to_slice(s, &mut buf).map_err(|_| DtrError::Encoding("tag hex"))?;
        Ok(Self(buf))
    }
}

impl fmt::Debug for MacTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MacTag({})", self.to_hex())
    }
}

/// HMAC-SHA-256 over arbitrary bytes.
pub fn hmac_sha256(key: &[u8], message: &[u8]) -> [u8; TAG_LEN] {
    let mut mac = Hmac::<Sha256>::new_from_slice(key).expect("HMAC accepts keys of any length");
    mac.update(message);
    mac.finalize().into_bytes().into()
}

pub fn compute_tag(message: &[u8], key: &SessionKey) -> MacTag {
    MacTag(hmac_sha256(&key.0, message))
}

/// Tag over a single word (messages 1 and 3).
pub fn word_tag(word: MessageWord, key: &SessionKey) -> MacTag {
    compute_tag(&word.to_bytes(), key)
}

/// Tag over `ue || ap` (message 2).
pub fn pair_tag(ue: MessageWord, ap: MessageWord, key: &SessionKey) -> MacTag {
    let mut buf = [0u8; 32];
    buf[..16].copy_from_slice(&ue.to_bytes());
    buf[16..].copy_from_slice(&ap.to_bytes());
    compute_tag(&buf, key)
}
