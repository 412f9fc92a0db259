use std::net::TcpStream;

use hisam_core::dtr::{AuthSession, Credentials, Role};
use hisam_core::mfg::{optimal_alpha_for_cap, DeviceProfile};

use crate::channel::Channel;
use crate::clock::Clock;
use crate::message::{Message, Phase, RegisterStatus};
use crate::{WireConfig, WireError};

#[derive(Debug, Clone, PartialEq)]
pub struct UeProfile {
    pub device: DeviceProfile,
    /// Sleep before each authentication in seconds. `None` uses `T / alpha`.
    pub sleep_schedule: Option<Vec<f64>>,
}

impl UeProfile {
    pub fn new(device: DeviceProfile) -> Self {
        Self {
            device,
            sleep_schedule: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SessionOutcome {
    pub id: u32,
    pub alpha: f64,
    pub negotiation_rounds: usize,
    pub completed: u64,
    pub failures: u64,
    pub evicted: bool,
    pub transcript: Vec<u8>,
}

/// Register, negotiate, then run `config.auth_rounds` authentications.
pub fn ue_client_loop(
    stream: TcpStream,
    profile: &UeProfile,
    config: &WireConfig,
    clock: &dyn Clock,
) -> Result<SessionOutcome, WireError> {
    stream.set_nodelay(true)?;
    let mut ch = Channel::new(stream, config.record_transcript);
    let id = profile.device.id;
    let demand = profile.device.demand;
    let registered_at = clock.now(id);
    ch.send(&Message::Register { id, demand })?;
    match ch.expect()? {
        Message::RegisterAck(RegisterStatus::Accepted) => {}
        Message::RegisterAck(s) => return Err(WireError::Rejected(s)),
        other => {
            return Err(WireError::Protocol(format!(
                "expected REGISTER ack, got {:?}",
                other.kind()
            )))
        }
    }

    let mut alpha = None;
    let mut rounds = 0;
    loop {
        let Message::Broadcast {
            workload,
            total_resource,
            f_m,
            phase,
        } = ch.expect()?
        else {
            return Err(WireError::Protocol("expected NEGOTIATE_BROADCAST".into()));
        };
        if phase == Phase::Final {
            break;
        }
        let a = optimal_alpha_for_cap(demand, workload, config.params.f_pop_max, f_m, 1.0, total_resource)?;
        ch.send(&Message::AlphaReport(a))?;
        alpha = Some(a);
        rounds += 1;
    }
    let alpha = alpha.ok_or_else(|| WireError::Protocol("negotiation ended without a round".into()))?;

    let creds = Credentials::derive(config.credential_seed, id);
    let mut session = AuthSession::new(Role::Device, &creds, registered_at, config.sleep_unit())?;
    let period = config.params.time_unit / alpha;
    let (mut completed, mut failures, mut evicted) = (0, 0, false);
    for k in 0..config.auth_rounds {
        let pause = profile
            .sleep_schedule
            .as_ref()
            .and_then(|s| s.get(k).copied())
            .unwrap_or(period);
        clock.sleep(id, pause);
        let (tag1, pending) = session.ue_initiate(clock.now(id))?;
        ch.send(&Message::Auth1(Some(tag1)))?;
        match ch.expect()? {
            Message::Auth2(Some(tag2)) => match session.ue_verify_response_and_finalize(pending, &tag2)? {
                Some(tag3) => {
                    ch.send(&Message::Auth3(Some(tag3)))?;
                    completed += 1;
                }
                None => {
                    ch.send(&Message::Auth3(None))?;
                    failures += 1;
                }
            },
            Message::Auth2(None) => failures += 1,
            Message::Evict => {
                evicted = true;
                break;
            }
            other => return Err(WireError::Protocol(format!("expected AUTH2, got {:?}", other.kind()))),
        }
    }
    ch.shutdown_write();
    while !evicted {
        match ch.recv() {
            Ok(Some(Message::Evict)) => evicted = true,
            Ok(Some(_)) => {}
            Ok(None) | Err(_) => break,
        }
    }
    if evicted {
        session.revoke();
    }
    Ok(SessionOutcome {
        id,
        alpha,
        negotiation_rounds: rounds,
        completed,
        failures,
        evicted,
        transcript: ch.take_transcript(),
    })
}
