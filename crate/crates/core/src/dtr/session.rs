//! Three-message mutual authentication with sleep-interval-driven message
//! evolution.
//!
//! ```text
//! UE                                   AP
//! b = round(dt_ue / Ts)
//! ue' = rot(ue, b) ^ ap
//! --- MAC(ue') ----------------------->
//!                                      b^ = round(dt_ap / Ts)
//!                                      try b in {b^, b^-1, b^+1}
//!                                      ap' = rot(ap, b) ^ ue
//! <-- MAC(ue' || ap') -----------------
//! verify with own ap'
//! --- MAC(ap') ----------------------->
//! commit                               verify, commit
//! ```
//!
//! Only tags travel. Neither side commits until its last verification
//! succeeds, so a lost or forged message leaves the committed state intact.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::word::{pair_tag, word_tag, MacTag, MessageWord, SessionKey, KEY_LEN};
use super::DtrError;

/// `floor(dt / Ts + 0.5)`.
pub fn shift_bits_from_interval(t_prev: f64, t_now: f64, sleep_unit: f64) -> Result<u64, DtrError> {
    if !(sleep_unit > 0.0) {
        return Err(DtrError::InvalidSleepUnit);
    }
    if t_now < t_prev {
        return Err(DtrError::ClockRegression);
    }
    Ok(((t_now - t_prev) / sleep_unit + 0.5).floor() as u64)
}

/// `rot(ue, shift) ^ ap`.
pub fn next_ue_message(ue: MessageWord, ap: MessageWord, shift: u64) -> MessageWord {
    ue.rotate(shift).xor(ap)
}

/// `rot(ap, shift) ^ ue`, the AP-side mirror of [`next_ue_message`].
pub fn next_ap_message(ap: MessageWord, ue: MessageWord, shift: u64) -> MessageWord {
    ap.rotate(shift).xor(ue)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    AccessPoint,
    Device,
}

/// Material agreed at registration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Credentials {
    pub ue0: MessageWord,
    pub ap0: MessageWord,
    pub key: SessionKey,
}

impl Credentials {
    pub fn new(ue0: MessageWord, ap0: MessageWord, key: SessionKey) -> Result<Self, DtrError> {
        if ue0.is_zero() || ap0.is_zero() {
            return Err(DtrError::ZeroWord);
        }
        Ok(Self { ue0, ap0, key })
    }

    /// Deterministic credentials for demos and tests.
    pub fn derive(seed: u64, device: u32) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(device as u64 + 1);
        Self::random(&mut rng)
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let mut word = || loop {
            let w = MessageWord(rng.random());
            if !w.is_zero() {
                return w;
            }
        };
        let ue0 = word();
        let ap0 = word();
        let mut key = [0u8; KEY_LEN];
        rng.fill(&mut key[..]);
        Self {
            ue0,
            ap0,
            key: SessionKey(key),
        }
    }
}

/// Device-side state between message 1 and message 2.
#[derive(Debug, Clone, PartialEq)]
pub struct UePending {
    pub shift: u64,
    pub next_ue: MessageWord,
    pub sent_at: f64,
}

/// AP-side state between accepting message 1 and checking message 3.
#[derive(Debug, Clone, PartialEq)]
pub struct ApPending {
    pub matched_shift: u64,
    pub next_ue: MessageWord,
    pub next_ap: MessageWord,
    pub arrival: f64,
}

#[derive(Debug, Clone)]
pub struct AuthSession {
    pub ue_msg: MessageWord,
    pub ap_msg: MessageWord,
    key: SessionKey,
    pub last_time: f64,
    pub sleep_unit: f64,
    pub step_index: u64,
    pub role: Role,
    revoked: bool,
}

impl AuthSession {
    pub fn new(role: Role, creds: &Credentials, registered_at: f64, sleep_unit: f64) -> Result<Self, DtrError> {
        if creds.ue0.is_zero() || creds.ap0.is_zero() {
            return Err(DtrError::ZeroWord);
        }
        if !(sleep_unit > 0.0 && sleep_unit.is_finite()) {
            return Err(DtrError::InvalidSleepUnit);
        }
        Ok(Self {
            ue_msg: creds.ue0,
            ap_msg: creds.ap0,
            key: creds.key.clone(),
            last_time: registered_at,
            sleep_unit,
            step_index: 0,
            role,
            revoked: false,
        })
    }

    /// The part of the state both endpoints must agree on.
    pub fn shared_state(&self) -> (MessageWord, MessageWord, u64) {
        (self.ue_msg, self.ap_msg, self.step_index)
    }

    pub fn revoke(&mut self) {
        self.revoked = true;
    }

    pub fn is_revoked(&self) -> bool {
        self.revoked
    }

    pub fn derive_next_ue_message(&self, shift: u64) -> MessageWord {
        next_ue_message(self.ue_msg, self.ap_msg, shift)
    }

    pub fn derive_next_ap_message(&self, shift: u64) -> MessageWord {
        next_ap_message(self.ap_msg, self.ue_msg, shift)
    }

    fn expect_role(&self, role: Role) -> Result<(), DtrError> {
        if self.role != role {
            return Err(DtrError::WrongRole);
        }
        if self.revoked {
            return Err(DtrError::Evicted);
        }
        Ok(())
    }

    /// Message 1. Nothing is committed.
    pub fn ue_initiate(&self, now: f64) -> Result<(MacTag, UePending), DtrError> {
        self.expect_role(Role::Device)?;
        let shift = shift_bits_from_interval(self.last_time, now, self.sleep_unit)?;
        let next_ue = self.derive_next_ue_message(shift);
        Ok((
            word_tag(next_ue, &self.key),
            UePending {
                shift,
                next_ue,
                sent_at: now,
            },
        ))
    }

    /// Check message 1 against the shift implied by arrival times, allowing
    /// one sleep unit of disagreement. `None` means rejection.
    pub fn ap_verify_initiation(&self, tag: &MacTag, arrival: f64) -> Result<Option<ApPending>, DtrError> {
        self.expect_role(Role::AccessPoint)?;
        let estimate = shift_bits_from_interval(self.last_time, arrival, self.sleep_unit)?;
        let candidates = [Some(estimate), estimate.checked_sub(1), estimate.checked_add(1)];
        for shift in candidates.into_iter().flatten() {
            let next_ue = self.derive_next_ue_message(shift);
            if word_tag(next_ue, &self.key).ct_eq(tag) {
                return Ok(Some(ApPending {
                    matched_shift: shift,
                    next_ue,
                    next_ap: self.derive_next_ap_message(shift),
                    arrival,
                }));
            }
        }
        Ok(None)
    }

    /// Message 2. Only reachable with an accepted [`ApPending`].
    pub fn ap_respond(&self, pending: &ApPending) -> MacTag {
        pair_tag(pending.next_ue, pending.next_ap, &self.key)
    }

    /// Verify message 2; on success commit and return message 3.
    pub fn ue_verify_response_and_finalize(
        &mut self,
        pending: UePending,
        tag: &MacTag,
    ) -> Result<Option<MacTag>, DtrError> {
        self.expect_role(Role::Device)?;
        let next_ap = self.derive_next_ap_message(pending.shift);
        if !pair_tag(pending.next_ue, next_ap, &self.key).ct_eq(tag) {
            return Ok(None);
        }
        self.ue_msg = pending.next_ue;
        self.ap_msg = next_ap;
        self.last_time = pending.sent_at;
        self.step_index += 1;
        Ok(Some(word_tag(next_ap, &self.key)))
    }

    /// Verify message 3; on success commit the AP side.
    pub fn ap_finalize(&mut self, pending: ApPending, reply: &MacTag) -> Result<bool, DtrError> {
        self.expect_role(Role::AccessPoint)?;
        if !word_tag(pending.next_ap, &self.key).ct_eq(reply) {
            return Ok(false);
        }
        self.ue_msg = pending.next_ue;
        self.ap_msg = pending.next_ap;
        self.last_time = pending.arrival;
        self.step_index += 1;
        Ok(true)
    }
}

/// Outcome of one in-memory handshake between a device and the AP.
#[derive(Debug, Clone, PartialEq)]
pub struct HandshakeTranscript {
    pub shift: u64,
    pub tag1: MacTag,
    pub tag2: Option<MacTag>,
    pub tag3: Option<MacTag>,
    pub completed: bool,
}

/// Run all three messages in memory with the device sending at `ue_time`
/// and the AP observing the arrival at `ap_time`.
pub fn run_handshake(
    ue: &mut AuthSession,
    ap: &mut AuthSession,
    ue_time: f64,
    ap_time: f64,
) -> Result<HandshakeTranscript, DtrError> {
    let (tag1, ue_pending) = ue.ue_initiate(ue_time)?;
    let shift = ue_pending.shift;
    let Some(ap_pending) = ap.ap_verify_initiation(&tag1, ap_time)? else {
        return Ok(HandshakeTranscript {
            shift,
            tag1,
            tag2: None,
            tag3: None,
            completed: false,
        });
    };
    let tag2 = ap.ap_respond(&ap_pending);
    let tag3 = ue.ue_verify_response_and_finalize(ue_pending, &tag2)?;
    let completed = match &tag3 {
        Some(reply) => ap.ap_finalize(ap_pending, reply)?,
        None => false,
    };
    Ok(HandshakeTranscript {
        shift,
        tag1,
        tag2: Some(tag2),
        tag3,
        completed,
    })
}
