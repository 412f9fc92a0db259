use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::net::{TcpListener, TcpStream};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::thread;
use std::time::Duration;

use hisam_core::dtr::vectors::{generate_vectors, VectorSet};
use hisam_core::mfg::{negotiate_equilibrium, negotiate_rounds, DeviceProfile, MfgError};
use hisam_core::sim::{experiment_grid, run_simulation, seed_demands, MetricsRecord, SimError};
use hisam_wire::{
    ap_service_loop, ue_client_loop, LedgerStore, NegotiationOutcome, SystemClock, UeProfile, WireConfig, WireError,
};

use crate::config::{ConfigError, RunConfig};
use crate::format::g12;

pub const NEGOTIATE_ROUNDS: usize = 10;

#[derive(Debug)]
pub enum CliError {
    Config(ConfigError),
    Convergence(String),
    Protocol(String),
    Io(io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Convergence(_) => 3,
            CliError::Protocol(_) => 4,
            CliError::Io(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(e) => write!(f, "config error: {e}"),
            CliError::Convergence(m) => write!(f, "negotiation failed: {m}"),
            CliError::Protocol(m) => write!(f, "protocol error: {m}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e)
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<MfgError> for CliError {
    fn from(e: MfgError) -> Self {
        match e {
            MfgError::NotConverged(t) => CliError::Convergence(format!("no convergence after {} rounds", t.rounds())),
            MfgError::InvalidParams(m) => CliError::Config(ConfigError::field("params", m)),
            other => CliError::Convergence(other.to_string()),
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Mfg(m) => m.into(),
            SimError::InvalidScenario(m) | SimError::Sampling(m) => CliError::Config(ConfigError::field("scenario", m)),
            SimError::Dtr(d) => CliError::Protocol(d.to_string()),
        }
    }
}

impl From<WireError> for CliError {
    fn from(e: WireError) -> Self {
        match e {
            WireError::Mfg(m) => CliError::Protocol(m.to_string()),
            WireError::NegotiationAborted => CliError::Convergence("aborted by the access point".into()),
            other => CliError::Protocol(other.to_string()),
        }
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(p) => fs::write(p, text)?,
        None => io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn sibling(path: &Path, suffix: &str, ext: &str) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    path.with_file_name(format!("{stem}{suffix}.{ext}"))
}

/// Error decay of the negotiation on the first seed's demands.
pub fn negotiate(cfg: &RunConfig) -> Result<String, CliError> {
    let s = &cfg.scenario;
    let demands = seed_demands(s, s.seeds[0])?;
    // the stopping rule must be met, otherwise exit with a convergence failure
    let eq = negotiate_equilibrium(&demands, &s.params)?;
    let trace = negotiate_rounds(&demands, &s.params, NEGOTIATE_ROUNDS)?;
    let mut csv = String::from("round,error,X\n");
    for (i, e) in trace.per_round_errors.iter().enumerate() {
        let _ = writeln!(csv, "{},{},{}", i + 1, g12(*e), g12(trace.per_round_workloads[i + 1]));
    }
    emit(cfg.out.as_deref(), &csv)?;
    eprintln!(
        "converged in {} rounds; X = {}",
        eq.trace.rounds(),
        g12(eq.workload_expectation)
    );
    Ok(csv)
}

fn seed_row(out: &mut String, prefix: &str, r: &MetricsRecord) {
    for s in &r.per_seed {
        let _ = writeln!(
            out,
            "{prefix}{},{},{},{},{}",
            r.policy,
            s.seed,
            g12(s.population_loss),
            g12(s.mean_detection_time),
            g12(s.total_workload)
        );
    }
}

fn mean_row(out: &mut String, prefix: &str, r: &MetricsRecord) {
    let _ = writeln!(
        out,
        "{prefix}{},{},{},{},{},{}",
        r.policy,
        g12(r.population_loss),
        g12(r.mean_detection_time),
        g12(r.total_workload),
        g12(r.evicted_devices),
        g12(r.handshake_failures)
    );
}

pub fn simulate(cfg: &RunConfig) -> Result<String, CliError> {
    let r = run_simulation(&cfg.scenario)?;
    let mut csv = String::from("policy,seed,loss,detection_time,workload\n");
    seed_row(&mut csv, "", &r);
    emit(cfg.out.as_deref(), &csv)?;
    let mut summary = String::from("policy,loss,detection_time,workload,evicted,handshake_failures\n");
    mean_row(&mut summary, "", &r);
    eprint!("{summary}");
    Ok(csv)
}

fn metadata(cfg: &RunConfig) -> String {
    let s = &cfg.scenario;
    let p = &s.params;
    let mut m = String::new();
    let seeds: Vec<String> = s.seeds.iter().map(u64::to_string).collect();
    let _ = writeln!(m, "n = {}", p.n_devices);
    let _ = writeln!(m, "fp = {}", g12(p.f_pop_max));
    let _ = writeln!(m, "fi = {}", g12(p.f_ind_max));
    let _ = writeln!(m, "time_unit = {}", g12(p.time_unit));
    let _ = writeln!(m, "horizon = {}", g12(s.horizon));
    let _ = writeln!(m, "mean = {}", g12(s.demand_mean));
    let _ = writeln!(m, "variance = {}", g12(cfg.variance));
    let _ = writeln!(m, "variance_interpretation = variance (stddev = sqrt(variance))");
    let _ = writeln!(m, "demand_stddev = {}", g12(s.demand_stddev));
    let _ = writeln!(
        m,
        "demand_bounds = ({}, {})",
        g12(s.demand_bounds.0),
        g12(s.demand_bounds.1)
    );
    let _ = writeln!(m, "demand_scale = {}", s.demand_scale.name());
    let _ = writeln!(m, "oversleep_limit = {}", s.oversleep_limit);
    let _ = writeln!(m, "seeds = {}", seeds.join(","));
    m
}

/// Returns the per-seed CSV; the seed-averaged table and the metadata
/// sidecar are written next to `out`.
pub fn grid(cfg: &RunConfig) -> Result<String, CliError> {
    let sweep = cfg
        .sweep
        .ok_or_else(|| ConfigError::field("sweep", "grid needs --sweep mean|variance|size"))?;
    let values = cfg
        .sweep_values
        .clone()
        .unwrap_or_else(|| sweep.default_values().to_vec());
    let points = experiment_grid(&cfg.scenario, sweep, &values)?;
    let mut csv = String::from("sweep_name,sweep_value,policy,seed,loss,detection_time,workload\n");
    let mut means =
        String::from("sweep_name,sweep_value,policy,loss,detection_time,workload,evicted,handshake_failures\n");
    for p in &points {
        let prefix = format!("{},{},", sweep.name(), g12(p.value));
        for r in &p.records {
            seed_row(&mut csv, &prefix, r);
            mean_row(&mut means, &prefix, r);
        }
    }
    let out = cfg
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("grid-{}.csv", sweep.name())));
    fs::write(&out, &csv)?;
    fs::write(sibling(&out, "-mean", "csv"), &means)?;
    fs::write(sibling(&out, "", "meta"), metadata(cfg))?;
    eprintln!("wrote {} rows to {}", csv.lines().count() - 1, out.display());
    Ok(csv)
}

pub fn gen_vectors(cfg: &RunConfig) -> Result<String, CliError> {
    let set = generate_vectors(cfg.vector_seed, cfg.steps);
    let text = set.to_text();
    // replay what was written before handing it out
    let parsed = VectorSet::parse(&text).map_err(|e| CliError::Protocol(e.to_string()))?;
    if let Some(i) = parsed.first_mismatch() {
        return Err(CliError::Protocol(format!("vector {i} does not replay")));
    }
    emit(cfg.out.as_deref(), &text)?;
    Ok(text)
}

/// Replay a vector file; `Ok` when every record reproduces.
pub fn check_vectors(path: &Path) -> Result<usize, CliError> {
    let text = fs::read_to_string(path)?;
    let set = VectorSet::parse(&text).map_err(|e| CliError::Protocol(e.to_string()))?;
    match set.first_mismatch() {
        None => Ok(set.records.len()),
        Some(i) => Err(CliError::Protocol(format!("record {} does not replay", i + 1))),
    }
}

fn wire_config(cfg: &RunConfig) -> WireConfig {
    let mut w = WireConfig::new(cfg.scenario.params);
    w.credential_seed = cfg.credential_seed;
    w.oversleep_limit = cfg.scenario.oversleep_limit;
    w.auth_rounds = cfg.auth_rounds;
    w
}

/// Serve until all `n` registered devices have finished their sessions.
pub fn serve_ap(cfg: &RunConfig) -> Result<String, CliError> {
    let listener = TcpListener::bind(&cfg.listen)?;
    eprintln!(
        "listening on {}, waiting for {} devices",
        listener.local_addr()?,
        cfg.scenario.params.n_devices
    );
    let store = LedgerStore::new();
    let shutdown = Arc::new(AtomicBool::new(false));
    let n = cfg.scenario.params.n_devices;
    let watcher = {
        let (store, shutdown) = (Arc::clone(&store), Arc::clone(&shutdown));
        thread::spawn(move || {
            while store.finished_sessions() < n && !matches!(store.negotiation(), Some(NegotiationOutcome::Failed(_))) {
                thread::sleep(Duration::from_millis(20));
            }
            shutdown.store(true, Ordering::SeqCst);
        })
    };
    ap_service_loop(
        listener,
        wire_config(cfg),
        Arc::clone(&store),
        Arc::new(SystemClock),
        shutdown,
    )?;
    let _ = watcher.join();

    let mut report = String::from("id,demand,alpha,completed,failures,workload,evicted\n");
    for d in store.devices() {
        let _ = writeln!(
            report,
            "{},{},{},{},{},{},{}",
            d.id,
            g12(d.demand),
            d.alpha.map(g12).unwrap_or_default(),
            d.completed,
            d.failures,
            g12(d.ledger.workload),
            d.ledger.evicted
        );
    }
    emit(cfg.out.as_deref(), &report)?;
    if let Some(NegotiationOutcome::Failed(why)) = store.negotiation() {
        return Err(CliError::Convergence(why));
    }
    let errors = store.session_errors();
    if !errors.is_empty() {
        return Err(CliError::Protocol(errors.join("; ")));
    }
    Ok(report)
}

pub fn run_ue(cfg: &RunConfig) -> Result<String, CliError> {
    let demand = cfg
        .demand
        .ok_or_else(|| ConfigError::field("demand", "run-ue needs --demand"))?;
    let device = DeviceProfile::new(cfg.id, demand).map_err(|e| ConfigError::field("demand", e.to_string()))?;
    let stream = TcpStream::connect(&cfg.connect)?;
    let o = ue_client_loop(stream, &UeProfile::new(device), &wire_config(cfg), &SystemClock)?;
    let line = format!(
        "id={} alpha={} rounds={} completed={} failures={} evicted={}\n",
        o.id,
        g12(o.alpha),
        o.negotiation_rounds,
        o.completed,
        o.failures,
        o.evicted
    );
    emit(None, &line)?;
    Ok(line)
}
