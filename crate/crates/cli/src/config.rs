//! Run configuration: a TOML file with one `[prior]` section plus one
//! section per command. Unknown keys are rejected so stale configs fail
//! fast instead of silently running with defaults.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use sha2::{Digest, Sha256};
use speclift::priors::Prior;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numerical(speclift::Error),
    Io(std::io::Error),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(e) => write!(f, "{e}"),
            CliError::Numerical(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "{e}"),
        }
    }
}

impl From<speclift::Error> for CliError {
    fn from(e: speclift::Error) -> Self {
        CliError::Numerical(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

pub type CliResult<T> = Result<T, CliError>;

fn config_err<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(CliError::Config(msg.into()))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriorSection {
    pub family: String,
    pub mean: Option<f64>,
    pub sigma: Option<f64>,
    pub lo: Option<f64>,
    pub hi: Option<f64>,
    pub path: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsSection {
    pub levels: usize,
    pub t_max: f64,
    pub t_points: usize,
    /// Probe amplitudes; flat superposition when omitted.
    pub state: Option<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NlevelSweepSection {
    pub n_min: usize,
    pub n_max: usize,
    pub t_points: usize,
    pub seed: Option<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OntheflySection {
    pub steps: usize,
    pub tau: Option<f64>,
    pub seed: Option<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SequentialSection {
    pub v0: f64,
    /// Step constant; the optimizer's choice when omitted.
    pub a: Option<f64>,
    pub steps: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwoQubitSection {
    pub seed: Option<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompileSection {
    pub cutoff: usize,
    pub t: f64,
    pub field: f64,
    pub spectrum: Vec<f64>,
    pub state: Vec<f64>,
    pub schedule_file: PathBuf,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyPulsesSection {
    pub schedule_file: PathBuf,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    prior: Option<PriorSection>,
    bounds: Option<BoundsSection>,
    qubit_opt: Option<toml::Table>,
    nlevel_sweep: Option<NlevelSweepSection>,
    onthefly: Option<OntheflySection>,
    sequential: Option<SequentialSection>,
    two_qubit: Option<TwoQubitSection>,
    compile: Option<CompileSection>,
    verify_pulses: Option<VerifyPulsesSection>,
}

pub struct Config {
    raw: RawConfig,
    /// Hex digest of the config file contents, for provenance lines.
    pub hash: String,
    /// Seed override from the command line, if any.
    pub seed_override: Option<u64>,
}

impl Config {
    pub fn load(path: &Path, seed_override: Option<u64>) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let raw: RawConfig =
            toml::from_str(&text).map_err(|e| CliError::Config(e.to_string()))?;
        if let Some(q) = &raw.qubit_opt {
            if !q.is_empty() {
                return config_err("[qubit_opt] takes no keys");
            }
        }
        let mut hasher = Sha256::new();
        hasher.update(text.as_bytes());
        let hash = hasher
            .finalize()
            .iter()
            .take(8)
            .map(|b| format!("{b:02x}"))
            .collect();
        Ok(Config {
            raw,
            hash,
            seed_override,
        })
    }

    pub fn prior(&self) -> CliResult<Prior> {
        let Some(p) = &self.raw.prior else {
            return config_err("missing [prior] section");
        };
        let prior = match p.family.as_str() {
            "gaussian" => {
                let sigma = p
                    .sigma
                    .ok_or_else(|| CliError::Config("gaussian prior needs `sigma`".into()))?;
                Prior::gaussian(p.mean.unwrap_or(0.0), sigma)?
            }
            "uniform" => {
                let (Some(lo), Some(hi)) = (p.lo, p.hi) else {
                    return config_err("uniform prior needs `lo` and `hi`");
                };
                Prior::uniform(lo, hi)?
            }
            "grid-csv" => {
                let Some(path) = &p.path else {
                    return config_err("grid-csv prior needs `path`");
                };
                Prior::from_csv(path)?
            }
            other => return config_err(format!("unknown prior family `{other}`")),
        };
        Ok(prior)
    }

    /// Resolve the effective seed: command line overrides the config key;
    /// stochastic commands must have one from somewhere.
    pub fn seed(&self, section_seed: Option<u64>) -> CliResult<u64> {
        self.seed_override.or(section_seed).ok_or_else(|| {
            CliError::Config("this command needs a seed (config key `seed` or flag --seed)".into())
        })
    }

    pub fn bounds(&self) -> CliResult<&BoundsSection> {
        self.raw.bounds.as_ref().map_or_else(
            || config_err("missing [bounds] section"),
            |s| {
                if s.levels < 1 {
                    return config_err("bounds: levels must be >= 1");
                }
                if s.t_points < 2 || !s.t_max.is_finite() || s.t_max <= 0.0 {
                    return config_err("bounds: need t_points >= 2 and t_max > 0");
                }
                Ok(s)
            },
        )
    }

    pub fn nlevel_sweep(&self) -> CliResult<&NlevelSweepSection> {
        self.raw.nlevel_sweep.as_ref().map_or_else(
            || config_err("missing [nlevel_sweep] section"),
            |s| {
                if s.n_min < 2 || s.n_max < s.n_min {
                    return config_err("nlevel_sweep: need 2 <= n_min <= n_max");
                }
                if s.t_points < 2 {
                    return config_err("nlevel_sweep: need t_points >= 2");
                }
                Ok(s)
            },
        )
    }

    pub fn onthefly(&self) -> CliResult<&OntheflySection> {
        self.raw
            .onthefly
            .as_ref()
            .map_or_else(|| config_err("missing [onthefly] section"), Ok)
    }

    pub fn sequential(&self) -> CliResult<&SequentialSection> {
        self.raw
            .sequential
            .as_ref()
            .map_or_else(|| config_err("missing [sequential] section"), Ok)
    }

    pub fn two_qubit(&self) -> CliResult<&TwoQubitSection> {
        self.raw
            .two_qubit
            .as_ref()
            .map_or_else(|| config_err("missing [two_qubit] section"), Ok)
    }

    pub fn compile(&self) -> CliResult<&CompileSection> {
        self.raw
            .compile
            .as_ref()
            .map_or_else(|| config_err("missing [compile] section"), Ok)
    }

    pub fn verify_pulses(&self) -> CliResult<&VerifyPulsesSection> {
        self.raw
            .verify_pulses
            .as_ref()
            .map_or_else(|| config_err("missing [verify_pulses] section"), Ok)
    }
}
