//! Access-point service: registration, the negotiation barrier, then
//! concurrent DTR-MAC sessions with penalty bookkeeping.

use std::collections::{BTreeMap, BTreeSet};
use std::io;
use std::net::{TcpListener, TcpStream};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError, Sender};
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::Duration;

use hisam_core::dtr::{AuthSession, Credentials, PenaltyLedger, Role};
use hisam_core::mfg::{Broadcast, NegotiationTrace, Negotiator, RoundStatus};

use crate::channel::Channel;
use crate::clock::Clock;
use crate::message::{Message, Phase, RegisterStatus};
use crate::{WireConfig, WireError};

const POLL: Duration = Duration::from_millis(5);

#[derive(Debug, Clone, PartialEq)]
pub struct DeviceRecord {
    pub id: u32,
    pub demand: f64,
    /// Frequency fixed by the negotiation, once it finished.
    pub alpha: Option<f64>,
    pub ledger: PenaltyLedger,
    pub completed: u64,
    pub failures: u64,
    /// Largest oversleep deduction seen so far.
    pub max_deduction: f64,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum NegotiationOutcome {
    Converged(NegotiationTrace),
    Failed(String),
}

/// Shared AP state, readable while the service runs.
#[derive(Debug, Default)]
pub struct LedgerStore {
    devices: Mutex<BTreeMap<u32, DeviceRecord>>,
    transcripts: Mutex<BTreeMap<u32, Vec<u8>>>,
    negotiation: Mutex<Option<NegotiationOutcome>>,
    rejected: Mutex<Vec<(u32, RegisterStatus)>>,
    session_errors: Mutex<Vec<String>>,
    finished: Mutex<usize>,
}

impl LedgerStore {
    pub fn new() -> Arc<Self> {
        Arc::new(Self::default())
    }

    pub fn devices(&self) -> Vec<DeviceRecord> {
        self.devices.lock().unwrap().values().cloned().collect()
    }

    pub fn device(&self, id: u32) -> Option<DeviceRecord> {
        self.devices.lock().unwrap().get(&id).cloned()
    }

    pub fn negotiation(&self) -> Option<NegotiationOutcome> {
        self.negotiation.lock().unwrap().clone()
    }

    pub fn rejected(&self) -> Vec<(u32, RegisterStatus)> {
        self.rejected.lock().unwrap().clone()
    }

    pub fn session_errors(&self) -> Vec<String> {
        self.session_errors.lock().unwrap().clone()
    }

    /// Per-device transcripts concatenated in id order, each prefixed with
    /// the id and its byte length.
    pub fn transcript(&self) -> Vec<u8> {
        let mut out = Vec::new();
        for (id, bytes) in self.transcripts.lock().unwrap().iter() {
            out.extend_from_slice(&id.to_be_bytes());
            out.extend_from_slice(&(bytes.len() as u32).to_be_bytes());
            out.extend_from_slice(bytes);
        }
        out
    }

    /// Accepted device sessions that have ended, for whatever reason.
    pub fn finished_sessions(&self) -> usize {
        *self.finished.lock().unwrap()
    }

    fn update(&self, id: u32, f: impl FnOnce(&mut DeviceRecord)) {
        if let Some(r) = self.devices.lock().unwrap().get_mut(&id) {
            f(r);
        }
    }
}

enum ToCoordinator {
    Registered {
        id: u32,
        demand: f64,
        tx: Sender<FromCoordinator>,
    },
    Report {
        id: u32,
        alpha: Option<f64>,
    },
}

enum FromCoordinator {
    Broadcast(Broadcast, Phase),
    Abort,
}

struct Shared {
    config: WireConfig,
    store: Arc<LedgerStore>,
    clock: Arc<dyn Clock>,
    /// Ids seen so far, and whether registration is still open.
    registry: Mutex<(BTreeSet<u32>, bool)>,
    coordinator: Mutex<Sender<ToCoordinator>>,
}

/// Serve until `shutdown` is set, then wait for open sessions to end.
pub fn ap_service_loop(
    listener: TcpListener,
    config: WireConfig,
    store: Arc<LedgerStore>,
    clock: Arc<dyn Clock>,
    shutdown: Arc<AtomicBool>,
) -> Result<(), WireError> {
    config.validate()?;
    listener.set_nonblocking(true)?;
    let (tx, rx) = mpsc::channel();
    let shared = Arc::new(Shared {
        config,
        store,
        clock,
        registry: Mutex::new((BTreeSet::new(), true)),
        coordinator: Mutex::new(tx),
    });

    let coordinator = {
        let shared = Arc::clone(&shared);
        let shutdown = Arc::clone(&shutdown);
        thread::spawn(move || coordinate(&shared, rx, &shutdown))
    };

    let mut sessions = Vec::new();
    while !shutdown.load(Ordering::SeqCst) {
        match listener.accept() {
            Ok((stream, _)) => {
                stream.set_nonblocking(false)?;
                stream.set_nodelay(true)?;
                let shared = Arc::clone(&shared);
                sessions.push(thread::spawn(move || {
                    if let Err(e) = serve_session(&shared, stream) {
                        shared.store.session_errors.lock().unwrap().push(e.to_string());
                    }
                }));
            }
            Err(e) if e.kind() == io::ErrorKind::WouldBlock => thread::sleep(POLL),
            Err(e) => return Err(e.into()),
        }
    }
    for s in sessions {
        let _ = s.join();
    }
    let _ = coordinator.join();
    Ok(())
}

fn coordinate(shared: &Shared, rx: Receiver<ToCoordinator>, shutdown: &AtomicBool) {
    let n = shared.config.params.n_devices;
    let mut members: BTreeMap<u32, (f64, Sender<FromCoordinator>)> = BTreeMap::new();
    while members.len() < n {
        match rx.recv_timeout(POLL) {
            Ok(ToCoordinator::Registered { id, demand, tx }) => {
                members.insert(id, (demand, tx));
            }
            Ok(ToCoordinator::Report { .. }) => {}
            Err(RecvTimeoutError::Timeout) if !shutdown.load(Ordering::SeqCst) => {}
            Err(_) => return,
        }
    }

    let ids: Vec<u32> = members.keys().copied().collect();
    let total: f64 = members.values().map(|(d, _)| d).sum();
    let abort = |why: String| {
        for (_, tx) in members.values() {
            let _ = tx.send(FromCoordinator::Abort);
        }
        *shared.store.negotiation.lock().unwrap() = Some(NegotiationOutcome::Failed(why));
    };
    let mut ap = match Negotiator::new(total, &shared.config.params) {
        Ok(ap) => ap,
        Err(e) => return abort(e.to_string()),
    };
    loop {
        let b = ap.broadcast();
        for (_, tx) in members.values() {
            let _ = tx.send(FromCoordinator::Broadcast(b, Phase::Report));
        }
        let mut reports: BTreeMap<u32, f64> = BTreeMap::new();
        while reports.len() < n {
            match rx.recv() {
                Ok(ToCoordinator::Report { id, alpha: Some(a) }) => {
                    reports.insert(id, a);
                }
                Ok(ToCoordinator::Report { id, alpha: None }) => {
                    return abort(format!("device {id} left during negotiation"));
                }
                Ok(ToCoordinator::Registered { .. }) => {}
                Err(_) => return abort("coordinator channel closed".into()),
            }
        }
        let ordered: Vec<f64> = ids.iter().map(|id| reports[id]).collect();
        match ap.absorb(ordered) {
            Ok(RoundStatus::Continue) => {}
            Ok(RoundStatus::Converged) => break,
            Ok(RoundStatus::Exhausted) => return abort("negotiation did not converge".into()),
            Err(e) => return abort(e.to_string()),
        }
    }
    let b = ap.broadcast();
    for (id, alpha) in ids.iter().zip(ap.alphas()) {
        shared.store.update(*id, |r| r.alpha = Some(*alpha));
    }
    for (_, tx) in members.values() {
        let _ = tx.send(FromCoordinator::Broadcast(b, Phase::Final));
    }
    *shared.store.negotiation.lock().unwrap() = Some(NegotiationOutcome::Converged(ap.into_trace()));
}

fn serve_session(shared: &Shared, stream: TcpStream) -> Result<(), WireError> {
    let mut ch = Channel::new(stream, shared.config.record_transcript);
    let (id, demand) = match ch.expect()? {
        Message::Register { id, demand } => (id, demand),
        other => {
            return Err(WireError::Protocol(format!(
                "expected REGISTER, got {:?}",
                other.kind()
            )))
        }
    };
    if !(demand > 0.0 && demand.is_finite()) {
        return Err(WireError::Protocol(format!("device {id}: demand {demand}")));
    }
    let status = {
        let mut reg = shared.registry.lock().unwrap();
        if reg.0.contains(&id) {
            RegisterStatus::DuplicateId
        } else if !reg.1 {
            RegisterStatus::Closed
        } else {
            reg.0.insert(id);
            if reg.0.len() == shared.config.params.n_devices {
                reg.1 = false;
            }
            RegisterStatus::Accepted
        }
    };
    ch.send(&Message::RegisterAck(status))?;
    if status != RegisterStatus::Accepted {
        shared.store.rejected.lock().unwrap().push((id, status));
        return Ok(());
    }
    let registered_at = shared.clock.now(id);
    shared.store.devices.lock().unwrap().insert(
        id,
        DeviceRecord {
            id,
            demand,
            alpha: None,
            ledger: PenaltyLedger::new(shared.config.oversleep_limit),
            completed: 0,
            failures: 0,
            max_deduction: 0.0,
            error: None,
        },
    );

    let result = run_device(shared, &mut ch, id, demand, registered_at);
    if let Err(e) = &result {
        shared.store.update(id, |r| r.error = Some(e.to_string()));
    }
    if shared.config.record_transcript {
        shared
            .store
            .transcripts
            .lock()
            .unwrap()
            .insert(id, ch.take_transcript());
    }
    *shared.store.finished.lock().unwrap() += 1;
    result
}

fn run_device(
    shared: &Shared,
    ch: &mut Channel<TcpStream>,
    id: u32,
    demand: f64,
    registered_at: f64,
) -> Result<(), WireError> {
    let (tx, rx) = mpsc::channel();
    let coord = shared.coordinator.lock().unwrap().clone();
    coord
        .send(ToCoordinator::Registered { id, demand, tx })
        .map_err(|_| WireError::NegotiationAborted)?;

    // negotiation barrier
    loop {
        match rx.recv().map_err(|_| WireError::NegotiationAborted)? {
            FromCoordinator::Broadcast(b, phase) => {
                let sent = ch.send(&Message::Broadcast {
                    workload: b.workload,
                    total_resource: b.total_resource,
                    f_m: b.f_m,
                    phase,
                });
                if phase == Phase::Final {
                    sent?;
                    break;
                }
                // every round must be answered, or the coordinator would wait forever
                let alpha = match sent.and_then(|_| ch.expect()) {
                    Ok(Message::AlphaReport(a)) => Some(a),
                    _ => None,
                };
                let _ = coord.send(ToCoordinator::Report { id, alpha });
                if alpha.is_none() {
                    return Err(WireError::Protocol(format!("device {id}: no ALPHA_REPORT")));
                }
            }
            FromCoordinator::Abort => return Err(WireError::NegotiationAborted),
        }
    }

    let creds = Credentials::derive(shared.config.credential_seed, id);
    let mut session = AuthSession::new(Role::AccessPoint, &creds, registered_at, shared.config.sleep_unit())?;
    let sleep_unit = shared.config.sleep_unit();
    loop {
        let tag1 = match ch.recv()? {
            None => return Ok(()),
            Some(Message::Auth1(Some(t))) => t,
            Some(other) => {
                return Err(WireError::Protocol(format!(
                    "device {id}: unexpected {:?}",
                    other.kind()
                )))
            }
        };
        let arrival = shared.clock.now(id);
        let Some(pending) = session.ap_verify_initiation(&tag1, arrival)? else {
            ch.send(&Message::Auth2(None))?;
            shared.store.update(id, |r| r.failures += 1);
            continue;
        };
        ch.send(&Message::Auth2(Some(session.ap_respond(&pending))))?;
        let reply = match ch.expect()? {
            Message::Auth3(Some(t)) => t,
            Message::Auth3(None) => {
                shared.store.update(id, |r| r.failures += 1);
                continue;
            }
            other => {
                return Err(WireError::Protocol(format!(
                    "device {id}: expected AUTH3, got {:?}",
                    other.kind()
                )))
            }
        };
        let previous = session.last_time;
        if !session.ap_finalize(pending, &reply)? {
            shared.store.update(id, |r| r.failures += 1);
            continue;
        }
        let mut evicted = false;
        shared.store.update(id, |r| {
            r.completed += 1;
            r.ledger.credit(1.0);
            let d = r.ledger.apply_oversleep_penalty(arrival - previous, sleep_unit);
            r.max_deduction = r.max_deduction.max(d);
            evicted = r.ledger.evicted;
        });
        if evicted {
            session.revoke();
            ch.send(&Message::Evict)?;
            ch.shutdown_write();
            ch.drain();
            return Ok(());
        }
    }
}
