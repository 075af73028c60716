//! `key = value` run configuration.
//!
//! Lines hold one assignment each; `#` starts a comment; unknown keys are
//! rejected with their line number. Defaults: `nu = 1`, `dealias =
//! two-thirds`, `order = LN`, all estimate constants `1.0`, `k0 = 2`,
//! `seed = 0`, `band = 4`, `amplitude = 1`.

use std::fmt;
use std::path::PathBuf;

use chsplit_core::energy::Constants;
use chsplit_core::harness::{InitialDataSpec, ModeSpec};
use chsplit_core::propagators::{Dealias, SolverParams, SplitOrder};

#[derive(Debug)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(n) => write!(f, "config line {n}: {}", self.message),
            None => write!(f, "config: {}", self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

fn err<T>(line: usize, message: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError {
        line: Some(line),
        message: message.into(),
    })
}

fn err_global<T>(message: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError {
        line: None,
        message: message.into(),
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum InitKind {
    Modes,
    Random,
    File,
}

/// Everything a subcommand may need; presence of the optional fields is
/// checked per subcommand, values are validated here.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub nu: f64,
    pub tau: Option<f64>,
    pub n: Option<usize>,
    pub dealias: Dealias,
    pub order: SplitOrder,
    pub steps: Option<usize>,
    pub k0: u32,

    pub init: Option<InitKind>,
    pub modes: Vec<ModeSpec>,
    pub seed: u64,
    pub band: u32,
    pub amplitude: f64,
    pub init_file: Option<PathBuf>,

    pub out: Option<PathBuf>,
    pub snapshot_prefix: String,

    pub constants: Constants,

    pub t_horizon: Option<f64>,
    pub taus: Vec<f64>,
    pub tau_ref: Option<f64>,

    pub tau_lo: f64,
    pub tau_hi: f64,
    pub probe_steps: usize,

    pub betas: Vec<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            nu: 1.0,
            tau: None,
            n: None,
            dealias: Dealias::TwoThirds,
            order: SplitOrder::Ln,
            steps: None,
            k0: 2,
            init: None,
            modes: Vec::new(),
            seed: 0,
            band: 4,
            amplitude: 1.0,
            init_file: None,
            out: None,
            snapshot_prefix: "snapshot".into(),
            constants: Constants::default(),
            t_horizon: None,
            taus: Vec::new(),
            tau_ref: None,
            tau_lo: 1e-4,
            tau_hi: 1.0,
            probe_steps: 200,
            betas: (4..=14).map(|j| 2.0_f64.powi(-j)).collect(),
        }
    }
}

fn parse_f64(line: usize, key: &str, v: &str) -> Result<f64, ConfigError> {
    v.parse::<f64>()
        .map_err(|_| ConfigError {
            line: Some(line),
            message: format!("key '{key}': cannot parse '{v}' as a number"),
        })
        .and_then(|x| {
            if x.is_finite() {
                Ok(x)
            } else {
                err(line, format!("key '{key}': value must be finite"))
            }
        })
}

fn parse_usize(line: usize, key: &str, v: &str) -> Result<usize, ConfigError> {
    v.parse::<usize>().map_err(|_| ConfigError {
        line: Some(line),
        message: format!("key '{key}': cannot parse '{v}' as a nonnegative integer"),
    })
}

fn parse_list(line: usize, key: &str, v: &str) -> Result<Vec<f64>, ConfigError> {
    v.split(',')
        .map(|s| parse_f64(line, key, s.trim()))
        .collect()
}

fn parse_modes(line: usize, v: &str) -> Result<Vec<ModeSpec>, ConfigError> {
    let mut out = Vec::new();
    for entry in v.split(';') {
        let parts: Vec<&str> = entry.split(',').map(str::trim).collect();
        if parts.len() != 3 && parts.len() != 4 {
            return err(
                line,
                format!("mode '{entry}' must be 'k1,k2,amplitude[,phase]'"),
            );
        }
        let k1 = parts[0].parse::<i64>().map_err(|_| ConfigError {
            line: Some(line),
            message: format!("mode '{entry}': bad integer k1"),
        })?;
        let k2 = parts[1].parse::<i64>().map_err(|_| ConfigError {
            line: Some(line),
            message: format!("mode '{entry}': bad integer k2"),
        })?;
        let amplitude = parse_f64(line, "modes", parts[2])?;
        let phase = if parts.len() == 4 {
            parse_f64(line, "modes", parts[3])?
        } else {
            0.0
        };
        out.push(ModeSpec {
            k: (k1, k2),
            amplitude,
            phase,
        });
    }
    Ok(out)
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = RunConfig::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return err(line, format!("expected 'key = value', got '{content}'"));
            };
            let key = key.trim();
            let value = value.trim();
            match key {
                "nu" => cfg.nu = parse_f64(line, key, value)?,
                "tau" => cfg.tau = Some(parse_f64(line, key, value)?),
                "n" => cfg.n = Some(parse_usize(line, key, value)?),
                "dealias" => {
                    cfg.dealias = match value {
                        "none" => Dealias::None,
                        "two-thirds" => Dealias::TwoThirds,
                        _ => return err(line, format!("dealias must be 'none' or 'two-thirds', got '{value}'")),
                    }
                }
                "order" => {
                    cfg.order = match value {
                        "LN" => SplitOrder::Ln,
                        "NL" => SplitOrder::Nl,
                        _ => return err(line, format!("order must be 'LN' or 'NL', got '{value}'")),
                    }
                }
                "steps" => cfg.steps = Some(parse_usize(line, key, value)?),
                "k0" => cfg.k0 = parse_usize(line, key, value)? as u32,
                "init" => {
                    cfg.init = Some(match value {
                        "modes" => InitKind::Modes,
                        "random" => InitKind::Random,
                        "file" => InitKind::File,
                        _ => return err(line, format!("init must be 'modes', 'random' or 'file', got '{value}'")),
                    })
                }
                "modes" => cfg.modes = parse_modes(line, value)?,
                "seed" => {
                    cfg.seed = value.parse::<u64>().map_err(|_| ConfigError {
                        line: Some(line),
                        message: format!("key 'seed': cannot parse '{value}'"),
                    })?
                }
                "band" => cfg.band = parse_usize(line, key, value)? as u32,
                "amplitude" => cfg.amplitude = parse_f64(line, key, value)?,
                "init_file" => cfg.init_file = Some(PathBuf::from(value)),
                "out" => cfg.out = Some(PathBuf::from(value)),
                "snapshot_prefix" => cfg.snapshot_prefix = value.to_string(),
                "c" => cfg.constants.c = parse_f64(line, key, value)?,
                "c1" => cfg.constants.c1 = parse_f64(line, key, value)?,
                "c0_1" => cfg.constants.c0_1 = parse_f64(line, key, value)?,
                "c0_2" => cfg.constants.c0_2 = parse_f64(line, key, value)?,
                "d1" => cfg.constants.d1 = parse_f64(line, key, value)?,
                "T" => cfg.t_horizon = Some(parse_f64(line, key, value)?),
                "taus" => cfg.taus = parse_list(line, key, value)?,
                "tau_ref" => cfg.tau_ref = Some(parse_f64(line, key, value)?),
                "tau_lo" => cfg.tau_lo = parse_f64(line, key, value)?,
                "tau_hi" => cfg.tau_hi = parse_f64(line, key, value)?,
                "probe_steps" => cfg.probe_steps = parse_usize(line, key, value)?,
                "betas" => cfg.betas = parse_list(line, key, value)?,
                _ => return err(line, format!("unknown key '{key}'")),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Value checks that do not depend on the subcommand.
    fn validate(&self) -> Result<(), ConfigError> {
        if !(self.nu > 0.0) {
            return err_global(format!("nu must be positive, got {}", self.nu));
        }
        if let Some(tau) = self.tau {
            if !(tau > 0.0) {
                return err_global(format!(
                    "tau must be positive (backward flow ill-posed), got {tau}"
                ));
            }
        }
        if let Some(n) = self.n {
            if n < 8 || n % 2 != 0 {
                return err_global(format!("n must be even and >= 8, got {n}"));
            }
        }
        if let Some(steps) = self.steps {
            if steps == 0 {
                return err_global("steps must be >= 1");
            }
        }
        if self.k0 == 0 {
            return err_global("k0 must be >= 1");
        }
        if self.band == 0 {
            return err_global("band must be >= 1");
        }
        if !(self.amplitude > 0.0) {
            return err_global(format!("amplitude must be positive, got {}", self.amplitude));
        }
        if let Some(t) = self.t_horizon {
            if !(t > 0.0) {
                return err_global(format!("T must be positive, got {t}"));
            }
        }
        for &tau in &self.taus {
            if !(tau > 0.0) {
                return err_global(format!("taus must be positive, got {tau}"));
            }
        }
        for &b in &self.betas {
            if !(b > 0.0) {
                return err_global(format!("betas must be positive, got {b}"));
            }
        }
        if !(self.tau_lo > 0.0 && self.tau_hi > self.tau_lo) {
            return err_global(format!(
                "bracket must satisfy 0 < tau_lo < tau_hi, got [{}, {}]",
                self.tau_lo, self.tau_hi
            ));
        }
        if self.probe_steps < 2 {
            return err_global("probe_steps must be >= 2");
        }
        Ok(())
    }

    pub fn require_tau(&self) -> Result<f64, ConfigError> {
        self.tau.ok_or_else(|| ConfigError {
            line: None,
            message: "missing required key 'tau'".into(),
        })
    }

    pub fn require_n(&self) -> Result<usize, ConfigError> {
        self.n.ok_or_else(|| ConfigError {
            line: None,
            message: "missing required key 'n'".into(),
        })
    }

    pub fn require_steps(&self) -> Result<usize, ConfigError> {
        self.steps.ok_or_else(|| ConfigError {
            line: None,
            message: "missing required key 'steps'".into(),
        })
    }

    pub fn require_horizon(&self) -> Result<f64, ConfigError> {
        self.t_horizon.ok_or_else(|| ConfigError {
            line: None,
            message: "missing required key 'T'".into(),
        })
    }

    pub fn require_taus(&self) -> Result<&[f64], ConfigError> {
        if self.taus.is_empty() {
            return err_global("missing required key 'taus'");
        }
        Ok(&self.taus)
    }

    pub fn solver_params(&self, tau: f64) -> Result<SolverParams, ConfigError> {
        let p = SolverParams {
            nu: self.nu,
            tau,
            n: self.require_n()?,
            dealias: self.dealias,
            order: self.order,
        };
        p.validate().map_err(|e| ConfigError {
            line: None,
            message: e.to_string(),
        })?;
        Ok(p)
    }

    /// Resolve the initial-data spec; `file` inputs are loaded by the
    /// caller (the snapshot module owns that format).
    pub fn initial_data(&self) -> Result<InitialDataSpec, ConfigError> {
        match self.init {
            None => err_global("missing required key 'init'"),
            Some(InitKind::Modes) => {
                if self.modes.is_empty() {
                    return err_global("init = modes requires a 'modes' list");
                }
                Ok(InitialDataSpec::Modes(self.modes.clone()))
            }
            Some(InitKind::Random) => Ok(InitialDataSpec::RandomBandLimited {
                seed: self.seed,
                band: self.band,
                h1_norm: self.amplitude,
            }),
            Some(InitKind::File) => err_global(
                "init = file must be resolved through the snapshot loader",
            ),
        }
    }
}
