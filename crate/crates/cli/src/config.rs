//! Flat `key = value` configuration with flag overrides.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use hisam_core::mfg::SystemParams;
use hisam_core::sim::{DemandScale, Policy, Scenario, Sweep};

/// Keys accepted in a config file; flags use the same names with dashes.
pub const KEYS: &[&str] = &[
    "n",
    "fp",
    "fi",
    "time_unit",
    "mean",
    "variance",
    "policy",
    "sweep",
    "sweep_values",
    "seeds",
    "out",
    "listen",
    "connect",
    "horizon",
    "demand_scale",
    "id",
    "demand",
    "auth_rounds",
    "credential_seed",
    "steps",
    "vector_seed",
];

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub field: String,
    pub message: String,
}

impl ConfigError {
    pub fn field(field: &str, message: impl Into<String>) -> Self {
        Self {
            line: None,
            field: field.to_string(),
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: `{}`: {}", self.field, self.message),
            None => write!(f, "`{}`: {}", self.field, self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

/// Raw string values keyed by name, remembering the source line.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawConfig {
    values: BTreeMap<String, (String, Option<usize>)>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut values = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(ConfigError {
                    line: Some(line_no),
                    field: line.to_string(),
                    message: "expected key = value".into(),
                });
            };
            let key = k.trim().replace('-', "_");
            if !KEYS.contains(&key.as_str()) {
                return Err(ConfigError {
                    line: Some(line_no),
                    field: key,
                    message: "unknown key".into(),
                });
            }
            values.insert(key, (v.trim().to_string(), Some(line_no)));
        }
        Ok(Self { values })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::field("config", format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Flag values win over file values.
    pub fn set(&mut self, key: &str, value: Option<String>) {
        if let Some(v) = value {
            self.values.insert(key.to_string(), (v, None));
        }
    }

    fn get<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, ConfigError>
    where
        T::Err: fmt::Display,
    {
        match self.values.get(key) {
            None => Ok(None),
            Some((v, line)) => v.parse().map(Some).map_err(|e: T::Err| ConfigError {
                line: *line,
                field: key.to_string(),
                message: format!("`{v}`: {e}"),
            }),
        }
    }

    fn get_list<T: std::str::FromStr>(&self, key: &str) -> Result<Option<Vec<T>>, ConfigError>
    where
        T::Err: fmt::Display,
    {
        let Some((v, line)) = self.values.get(key) else {
            return Ok(None);
        };
        let err = |message: String| ConfigError {
            line: *line,
            field: key.to_string(),
            message,
        };
        let items: Vec<&str> = v.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
        if items.is_empty() {
            return Err(err("empty list".into()));
        }
        items
            .into_iter()
            .map(|s| s.parse().map_err(|e: T::Err| err(format!("`{s}`: {e}"))))
            .collect::<Result<Vec<T>, _>>()
            .map(Some)
    }

    pub fn resolve(&self) -> Result<RunConfig, ConfigError> {
        let d = RunConfig::default();
        let n: usize = self.get("n")?.unwrap_or(d.scenario.params.n_devices);
        let fp = self.get("fp")?.unwrap_or(d.scenario.params.f_pop_max);
        let fi = self.get("fi")?.unwrap_or(d.scenario.params.f_ind_max);
        let time_unit = self.get("time_unit")?.unwrap_or(d.scenario.params.time_unit);
        let params = SystemParams::new(n, fp, fi, time_unit)
            .map_err(|e| ConfigError::field("n/fp/fi/time_unit", e.to_string()))?;

        let mut scenario = d.scenario.clone();
        scenario.params = params;
        scenario.horizon = self.get("horizon")?.unwrap_or(time_unit);
        scenario.demand_mean = self.get("mean")?.unwrap_or(scenario.demand_mean);
        let variance: f64 = self.get("variance")?.unwrap_or(Scenario::DEFAULT_VARIANCE);
        if !(variance > 0.0) {
            return Err(ConfigError::field("variance", "must be positive"));
        }
        scenario = scenario.with_variance(variance);
        if let Some(p) = self.get::<String>("policy")? {
            scenario.policy = p
                .parse::<Policy>()
                .map_err(|e| ConfigError::field("policy", e.to_string()))?;
        }
        if let Some(s) = self.get::<String>("demand_scale")? {
            scenario.demand_scale = match s.as_str() {
                "population_max" => DemandScale::PopulationMax,
                "upper_bound" => DemandScale::UpperBound,
                _ => return Err(ConfigError::field("demand_scale", format!("unknown `{s}`"))),
            };
        }
        if let Some(seeds) = self.get_list::<u64>("seeds")? {
            scenario.seeds = seeds;
        }
        scenario
            .validate()
            .map_err(|e| ConfigError::field("scenario", e.to_string()))?;

        let sweep = match self.get::<String>("sweep")? {
            Some(s) => Some(
                s.parse::<Sweep>()
                    .map_err(|e| ConfigError::field("sweep", e.to_string()))?,
            ),
            None => None,
        };
        Ok(RunConfig {
            scenario,
            variance,
            sweep,
            sweep_values: self.get_list("sweep_values")?,
            out: self.get::<String>("out")?.map(PathBuf::from),
            listen: self.get("listen")?.unwrap_or(d.listen),
            connect: self.get("connect")?.unwrap_or(d.connect),
            id: self.get("id")?.unwrap_or(d.id),
            demand: self.get("demand")?,
            auth_rounds: self.get("auth_rounds")?.unwrap_or(d.auth_rounds),
            credential_seed: self.get("credential_seed")?.unwrap_or(d.credential_seed),
            steps: self.get("steps")?.unwrap_or(d.steps),
            vector_seed: self.get("vector_seed")?.unwrap_or(d.vector_seed),
        })
    }
}

/// Fully resolved settings for one invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scenario: Scenario,
    /// As given; the demand stddev is its square root.
    pub variance: f64,
    pub sweep: Option<Sweep>,
    pub sweep_values: Option<Vec<f64>>,
    pub out: Option<PathBuf>,
    pub listen: String,
    pub connect: String,
    pub id: u32,
    pub demand: Option<f64>,
    pub auth_rounds: usize,
    pub credential_seed: u64,
    pub steps: usize,
    pub vector_seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            scenario: Scenario::table_defaults(),
            variance: Scenario::DEFAULT_VARIANCE,
            sweep: None,
            sweep_values: None,
            out: None,
            listen: hisam_wire::DEFAULT_LISTEN.to_string(),
            connect: hisam_wire::DEFAULT_LISTEN.to_string(),
            id: 0,
            demand: None,
            auth_rounds: 10,
            credential_seed: 0,
            steps: 16,
            vector_seed: 1,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_resolve_to_table_values() {
        let c = RawConfig::default().resolve().unwrap();
        assert_eq!(c.scenario, Scenario::table_defaults());
        assert_eq!(c.scenario.params.n_devices, 100);
        assert_eq!(c.scenario.demand_stddev, 3f64.sqrt());
        assert_eq!(c.scenario.sleep_unit() * 2.0, 2.0 * 10.0 / 20.0);
    }

    #[test]
    fn flags_override_file() {
        let mut raw = RawConfig::parse("n = 40\n# comment\nmean = 8 # trailing\n").unwrap();
        raw.set("n", Some("60".into()));
        let c = raw.resolve().unwrap();
        assert_eq!(c.scenario.params.n_devices, 60);
        assert_eq!(c.scenario.demand_mean, 8.0);
    }

    #[test]
    fn diagnostics_carry_line_and_field() {
        let e = RawConfig::parse("n = 4\nbogus = 1\n").unwrap_err();
        assert_eq!((e.line, e.field.as_str()), (Some(2), "bogus"));
        let e = RawConfig::parse("\n\nmean = ten\n").unwrap().resolve().unwrap_err();
        assert_eq!((e.line, e.field.as_str()), (Some(3), "mean"));
        let e = RawConfig::parse("just words\n").unwrap_err();
        assert_eq!(e.line, Some(1));
    }

    #[test]
    fn empty_seed_list_is_an_error() {
        let e = RawConfig::parse("seeds = \n").unwrap().resolve().unwrap_err();
        assert_eq!(e.field, "seeds");
        let mut raw = RawConfig::default();
        raw.set("seeds", Some(",".into()));
        assert!(raw.resolve().is_err());
    }

    #[test]
    fn seed_list_parses() {
        let mut raw = RawConfig::default();
        raw.set("seeds", Some("3, 5,8".into()));
        assert_eq!(raw.resolve().unwrap().scenario.seeds, vec![3, 5, 8]);
    }
}
