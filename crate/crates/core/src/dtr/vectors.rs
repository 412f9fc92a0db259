//! Conformance vectors: a line-oriented record of a handshake sequence so
//! that independent implementations can check message evolution and tags.
//!
//! ```text
//! # key=<64 hex>
//! # m_ue0=<32 hex>
//! # m_ap0=<32 hex>
//! step,shift,m_ue,m_ap,tag1,tag2,tag3
//! 1,5,<m_ue_1>,<m_ap_1>,<MAC(m_ue_1)>,<MAC(m_ue_1||m_ap_1)>,<MAC(m_ap_1)>
//! ```

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::session::{next_ap_message, next_ue_message, Credentials};
use super::word::{pair_tag, word_tag, MacTag, MessageWord, SessionKey};
use super::DtrError;

pub const HEADER: &str = "step,shift,m_ue,m_ap,tag1,tag2,tag3";

#[derive(Debug, Clone, PartialEq)]
pub struct VectorRecord {
    pub step: u64,
    pub shift: u64,
    pub m_ue: MessageWord,
    pub m_ap: MessageWord,
    pub tag1: MacTag,
    pub tag2: MacTag,
    pub tag3: MacTag,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VectorSet {
    pub credentials: Credentials,
    pub records: Vec<VectorRecord>,
}

/// Evolve `steps` handshakes from `creds` with the given shift sequence.
pub fn build_vectors(creds: &Credentials, shifts: &[u64]) -> VectorSet {
    let (mut ue, mut ap) = (creds.ue0, creds.ap0);
    let key = &creds.key;
    let records = shifts
        .iter()
        .enumerate()
        .map(|(i, &shift)| {
            let next_ue = next_ue_message(ue, ap, shift);
            let next_ap = next_ap_message(ap, ue, shift);
            ue = next_ue;
            ap = next_ap;
            VectorRecord {
                step: i as u64 + 1,
                shift,
                m_ue: ue,
                m_ap: ap,
                tag1: word_tag(ue, key),
                tag2: pair_tag(ue, ap, key),
                tag3: word_tag(ap, key),
            }
        })
        .collect();
    VectorSet {
        credentials: creds.clone(),
        records,
    }
}

/// Random credentials and shifts in `[0, 256)` so wrap-around is exercised.
pub fn generate_vectors(seed: u64, steps: usize) -> VectorSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let creds = Credentials::random(&mut rng);
    let shifts: Vec<u64> = (0..steps).map(|_| rng.random_range(0..256)).collect();
    build_vectors(&creds, &shifts)
}

impl VectorSet {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let c = &self.credentials;
        let _ = writeln!(out, "# key={}", c.key.to_hex());
        let _ = writeln!(out, "# m_ue0={}", c.ue0.to_hex());
        let _ = writeln!(out, "# m_ap0={}", c.ap0.to_hex());
        let _ = writeln!(out, "{HEADER}");
        for r in &self.records {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                r.step,
                r.shift,
                r.m_ue.to_hex(),
                r.m_ap.to_hex(),
                r.tag1.to_hex(),
                r.tag2.to_hex(),
                r.tag3.to_hex()
            );
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, DtrError> {
        let (mut key, mut ue0, mut ap0) = (None, None, None);
        let mut records = Vec::new();
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
            if let Some(meta) = line.strip_prefix('#') {
                if let Some((k, v)) = meta.trim().split_once('=') {
                    match k.trim() {
                        "key" => key = Some(SessionKey::from_hex(v.trim())?),
                        "m_ue0" => ue0 = Some(MessageWord::from_hex(v.trim())?),
                        "m_ap0" => ap0 = Some(MessageWord::from_hex(v.trim())?),
                        _ => {}
                    }
                }
                continue;
            }
            if line == HEADER {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            let [step, shift, m_ue, m_ap, t1, t2, t3] = fields[..] else {
                return Err(DtrError::Encoding("vector record needs 7 fields"));
            };
            records.push(VectorRecord {
                step: step.parse().map_err(|_| DtrError::Encoding("step"))?,
                shift: shift.parse().map_err(|_| DtrError::Encoding("shift"))?,
                m_ue: MessageWord::from_hex(m_ue)?,
                m_ap: MessageWord::from_hex(m_ap)?,
                tag1: MacTag::from_hex(t1)?,
                tag2: MacTag::from_hex(t2)?,
                tag3: MacTag::from_hex(t3)?,
            });
        }
        let (Some(key), Some(ue0), Some(ap0)) = (key, ue0, ap0) else {
            return Err(DtrError::Encoding("missing key or initial words"));
        };
        Ok(Self {
            credentials: Credentials::new(ue0, ap0, key)?,
            records,
        })
    }

    /// Index of the first record that does not replay, if any.
    pub fn first_mismatch(&self) -> Option<usize> {
        let shifts: Vec<u64> = self.records.iter().map(|r| r.shift).collect();
        let replay = build_vectors(&self.credentials, &shifts);
        replay.records.iter().zip(&self.records).position(|(a, b)| a != b)
    }
}
