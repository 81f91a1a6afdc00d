//! Simulation configuration and its flat `key = value` file format.
//!
//! ```text
//! # comments start with '#'
//! n = 128
//! cp = 16
//! snr_db = 0:2:30        # start:step:stop, stop included when on the grid
//! scheme = ideal, td_ls_fd_ge
//! ```

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::channel::PowerDelayProfile;
use crate::error::{Error, Result};
use crate::iq::IqParams;
use crate::ofdm::{Modulation, OfdmConfig};
use crate::pilot::{EtaRule, PilotBudget, PilotConfig};

/// Environment variable naming the default directory for output files.
pub const OUTPUT_DIR_ENV: &str = "IQOFDM_OUTPUT_DIR";

/// Directory output files land in when no explicit path is given.
pub fn default_output_dir() -> PathBuf {
    std::env::var_os(OUTPUT_DIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("."))
}

/// Channel estimator / equalizer combination.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    /// Balanced receiver with perfect channel knowledge.
    Ideal,
    /// Imbalanced receiver, perfect channel knowledge, no IQ compensation.
    None,
    /// Two-pilot time-domain LS estimation and GE equalization.
    TdLsFdGe,
    /// Per-bin LS estimation from full-band training and 2x2 pair solves.
    FdLsPostFft,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [Scheme::Ideal, Scheme::None, Scheme::TdLsFdGe, Scheme::FdLsPostFft];

    pub fn id(self) -> &'static str {
        match self {
            Scheme::Ideal => "ideal",
            Scheme::None => "none",
            Scheme::TdLsFdGe => "td_ls_fd_ge",
            Scheme::FdLsPostFft => "fd_ls_postfft",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|sc| sc.id() == s.trim())
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown scheme `{s}` (expected one of ideal, none, td_ls_fd_ge, fd_ls_postfft)"
                ))
            })
    }
}

/// Stop a sweep point once both thresholds are met.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EarlyStop {
    pub min_errors: u64,
    pub min_bits: u64,
}

impl Default for EarlyStop {
    fn default() -> Self {
        Self {
            min_errors: 200,
            min_bits: 100_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub ofdm: OfdmConfig,
    /// Channel length `L + 1`.
    pub taps: usize,
    pub profile: PowerDelayProfile,
    pub theta_deg: f64,
    /// I/Q gain ratio in dB.
    pub alpha_db: f64,
    pub snr_db: Vec<f64>,
    /// Frames per SNR point (an upper bound when early stopping).
    pub frames: usize,
    pub schemes: Vec<Scheme>,
    /// Baseline training symbols; `None` means the default of 2.
    pub training_symbols: Option<usize>,
    pub pilot: PilotConfig,
    pub pilot_seed: u64,
    pub seed: u64,
    /// Use the true `kappa` in the GE equalizer.
    pub genie_kappa: bool,
    /// Use the true channel and IQ coefficients instead of estimates.
    pub genie_channel: bool,
    /// Leave DC and Nyquist empty in data symbols.
    pub null_edges: bool,
    pub early_stop: Option<EarlyStop>,
    /// Monte-Carlo trials for the estimator MSE check.
    pub mse_trials: usize,
    pub theta_grid: Vec<f64>,
    pub alpha_grid: Vec<f64>,
    /// Worker threads; 0 picks the available parallelism.
    pub jobs: usize,
    pub output: Option<PathBuf>,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            ofdm: OfdmConfig::default(),
            taps: 16,
            profile: PowerDelayProfile::typical_urban(),
            theta_deg: 20.0,
            alpha_db: 4.0,
            snr_db: range(0.0, 2.0, 30.0),
            frames: 2000,
            schemes: vec![Scheme::TdLsFdGe],
            training_symbols: None,
            pilot: PilotConfig::default(),
            pilot_seed: 0x5eed,
            seed: 1,
            genie_kappa: false,
            genie_channel: false,
            null_edges: false,
            early_stop: Some(EarlyStop::default()),
            mse_trials: 10_000,
            theta_grid: range(0.0, 1.0, 30.0),
            alpha_grid: range(-6.0, 0.5, 6.0),
            jobs: 0,
            output: None,
        }
    }
}

fn round_grid(v: f64) -> f64 {
    (v * 1e9).round() / 1e9
}

/// `start, start + step, ...` up to and including `stop` when it lies on
/// the grid.
pub fn range(start: f64, step: f64, stop: f64) -> Vec<f64> {
    if step == 0.0 || (stop - start) / step < 0.0 {
        return vec![start];
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    (0..count).map(|i| round_grid(start + i as f64 * step)).collect()
}

/// Parses `start:step:stop`, a comma-separated list, or a single number.
pub fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let num = |t: &str| -> Result<f64> {
        t.trim()
            .parse::<f64>()
            .map_err(|_| Error::Config(format!("`{t}` is not a number")))
    };
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [start, step, stop] => {
            let (start, step, stop) = (num(start)?, num(step)?, num(stop)?);
            if !(step > 0.0) || stop < start {
                return Err(Error::Config(format!(
                    "range `{s}` needs a positive step and stop >= start"
                )));
            }
            Ok(range(start, step, stop))
        }
        [_] => s.split(',').map(num).collect(),
        _ => Err(Error::Config(format!("bad range `{s}`: use start:step:stop"))),
    }
}

fn parse_bool(s: &str) -> Result<bool> {
    match s.trim().to_ascii_lowercase().as_str() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        other => Err(Error::Config(format!("`{other}` is not a boolean"))),
    }
}

fn parse_num<T: FromStr>(key: &str, s: &str) -> Result<T> {
    s.trim()
        .parse()
        .map_err(|_| Error::Config(format!("bad value `{s}` for `{key}`")))
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

impl SimConfig {
    pub fn iq_params(&self) -> IqParams {
        IqParams::from_degrees_db(self.theta_deg, self.alpha_db)
    }

    pub fn nt(&self) -> usize {
        self.training_symbols.unwrap_or(2)
    }

    /// Effective worker count.
    pub fn workers(&self) -> usize {
        if self.jobs > 0 {
            self.jobs
        } else {
            std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
        }
    }

    /// Sets one key. Unknown keys are errors.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim();
        let value = value.trim();
        match key {
            "n" => self.ofdm.n = parse_num(key, value)?,
            "cp" => {
                self.ofdm.cp_len = parse_num(key, value)?;
                self.taps = self.ofdm.cp_len;
            }
            "taps" => self.taps = parse_num(key, value)?,
            "bandwidth_hz" => self.ofdm.bandwidth_hz = parse_num(key, value)?,
            "modulation" => self.ofdm.modulation = value.parse::<Modulation>()?,
            "data_symbols" => self.ofdm.data_symbols = parse_num(key, value)?,
            "profile" => {
                self.profile = match value {
                    "tu" | "typical_urban" => PowerDelayProfile::typical_urban(),
                    "flat" => PowerDelayProfile::flat(),
                    other => return Err(Error::Config(format!("unknown profile `{other}`"))),
                }
            }
            "profile_delays_us" => {
                let delays = parse_grid(value)?;
                let powers_db: Vec<f64> = self.profile_powers_db();
                self.profile = PowerDelayProfile::from_us_db(&delays, &resize(powers_db, delays.len()))?;
            }
            "profile_powers_db" => {
                let powers = parse_grid(value)?;
                let delays: Vec<f64> = self.profile.delays_s().iter().map(|d| d * 1e6).collect();
                self.profile = PowerDelayProfile::from_us_db(&resize(delays, powers.len()), &powers)?;
            }
            "theta_deg" => self.theta_deg = parse_num(key, value)?,
            "alpha_db" => self.alpha_db = parse_num(key, value)?,
            "snr_db" => self.snr_db = parse_grid(value)?,
            "frames" => self.frames = parse_num(key, value)?,
            "scheme" | "schemes" => {
                self.schemes = value
                    .split(',')
                    .filter(|s| !s.trim().is_empty())
                    .map(str::parse)
                    .collect::<Result<_>>()?
            }
            "training_symbols" => self.training_symbols = Some(parse_num(key, value)?),
            "pilot_budget" => {
                self.pilot.budget = match value {
                    "full" => PilotBudget::FullBand,
                    "half" => PilotBudget::HalfBand,
                    other => return Err(Error::Config(format!("pilot_budget `{other}`: use full or half"))),
                }
            }
            "eta_rule" => {
                self.pilot.eta = match value {
                    "tone_power" => EtaRule::TonePower,
                    "literal" => EtaRule::Literal,
                    other => return Err(Error::Config(format!("eta_rule `{other}`: use tone_power or literal"))),
                }
            }
            "pilot_power" => self.pilot.avg_power = parse_num(key, value)?,
            "pilot_seed" => self.pilot_seed = parse_num(key, value)?,
            "seed" => self.seed = parse_num(key, value)?,
            "genie_kappa" => self.genie_kappa = parse_bool(value)?,
            "genie_channel" => self.genie_channel = parse_bool(value)?,
            "null_edges" => self.null_edges = parse_bool(value)?,
            "early_stop" => {
                self.early_stop = if parse_bool(value)? {
                    Some(self.early_stop.unwrap_or_default())
                } else {
                    None
                }
            }
            "early_stop_errors" => {
                self.early_stop.get_or_insert_with(EarlyStop::default).min_errors = parse_num(key, value)?
            }
            "early_stop_bits" => {
                self.early_stop.get_or_insert_with(EarlyStop::default).min_bits = parse_num(key, value)?
            }
            "mse_trials" => self.mse_trials = parse_num(key, value)?,
            "theta_grid" => self.theta_grid = parse_grid(value)?,
            "alpha_grid" => self.alpha_grid = parse_grid(value)?,
            "jobs" => self.jobs = parse_num(key, value)?,
            "output" => self.output = Some(PathBuf::from(value)),
            other => return Err(Error::Config(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    fn profile_powers_db(&self) -> Vec<f64> {
        self.profile.powers().iter().map(|p| 10.0 * p.log10()).collect()
    }

    /// Applies every `key = value` line of `text` on top of `self`.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected `key = value`, got `{line}`", lineno + 1))
            })?;
            self.set(key, value)
                .map_err(|e| Error::Config(format!("line {}: {e}", lineno + 1)))?;
        }
        Ok(())
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        cfg.apply_text(text)?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::from_text(&std::fs::read_to_string(path)?)
    }

    /// Checks cross-field constraints.
    pub fn validate(&self) -> Result<()> {
        self.ofdm.validate()?;
        if self.taps == 0 || self.taps > self.ofdm.n {
            return Err(Error::Config(format!("taps = {} must lie in 1..={}", self.taps, self.ofdm.n)));
        }
        if self.taps > self.ofdm.cp_len + 1 {
            return Err(Error::CyclicPrefixTooShort {
                memory: self.taps - 1,
                cp_len: self.ofdm.cp_len,
            });
        }
        self.profile.check_fits(self.ofdm.sample_period(), self.taps)?;
        if self.frames == 0 {
            return Err(Error::Config("frames must be at least 1".into()));
        }
        if self.snr_db.is_empty() {
            return Err(Error::Config("the SNR grid is empty".into()));
        }
        if self.schemes.is_empty() {
            return Err(Error::Config("no scheme selected".into()));
        }
        if self.schemes.contains(&Scheme::FdLsPostFft) && self.nt() < 2 {
            return Err(Error::Config("the FD-LS baseline needs at least 2 training symbols".into()));
        }
        if !(self.pilot.avg_power > 0.0) {
            return Err(Error::Config("pilot_power must be positive".into()));
        }
        if self.alpha_db.abs() > 60.0 || !self.theta_deg.is_finite() {
            return Err(Error::Config("IQ mismatch out of range".into()));
        }
        Ok(())
    }

    /// Non-fatal oddities worth reporting.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.training_symbols.is_some() && !self.schemes.contains(&Scheme::FdLsPostFft) {
            out.push("training_symbols only affects the fd_ls_postfft scheme".to_string());
        }
        if (self.genie_kappa || self.genie_channel) && !self.schemes.contains(&Scheme::TdLsFdGe) {
            out.push("genie flags only affect the td_ls_fd_ge scheme".to_string());
        }
        out
    }

    /// The effective configuration as `key = value` pairs, in a stable
    /// order. Feeding them back through [`SimConfig::set`] gives a
    /// configuration with the same pairs.
    pub fn to_pairs(&self) -> Vec<(&'static str, String)> {
        let delays: Vec<f64> = self.profile.delays_s().iter().map(|d| round_grid(d * 1e6)).collect();
        let powers: Vec<f64> = self.profile_powers_db();
        let mut v = vec![
            ("n", self.ofdm.n.to_string()),
            ("cp", self.ofdm.cp_len.to_string()),
            ("taps", self.taps.to_string()),
            ("bandwidth_hz", self.ofdm.bandwidth_hz.to_string()),
            ("modulation", self.ofdm.modulation.name().to_string()),
            ("data_symbols", self.ofdm.data_symbols.to_string()),
            ("profile_delays_us", join(&delays)),
            ("profile_powers_db", join(&powers)),
            ("theta_deg", self.theta_deg.to_string()),
            ("alpha_db", self.alpha_db.to_string()),
            ("snr_db", join(&self.snr_db)),
            ("frames", self.frames.to_string()),
            (
                "scheme",
                self.schemes.iter().map(|s| s.id()).collect::<Vec<_>>().join(","),
            ),
            ("training_symbols", self.nt().to_string()),
            (
                "pilot_budget",
                match self.pilot.budget {
                    PilotBudget::FullBand => "full",
                    PilotBudget::HalfBand => "half",
                }
                .to_string(),
            ),
            (
                "eta_rule",
                match self.pilot.eta {
                    EtaRule::TonePower => "tone_power",
                    EtaRule::Literal => "literal",
                }
                .to_string(),
            ),
            ("pilot_power", self.pilot.avg_power.to_string()),
            ("pilot_seed", self.pilot_seed.to_string()),
            ("seed", self.seed.to_string()),
            ("genie_kappa", self.genie_kappa.to_string()),
            ("genie_channel", self.genie_channel.to_string()),
            ("null_edges", self.null_edges.to_string()),
            ("early_stop", self.early_stop.is_some().to_string()),
        ];
        if let Some(es) = self.early_stop {
            v.push(("early_stop_errors", es.min_errors.to_string()));
            v.push(("early_stop_bits", es.min_bits.to_string()));
        }
        v.push(("mse_trials", self.mse_trials.to_string()));
        v.push(("theta_grid", join(&self.theta_grid)));
        v.push(("alpha_grid", join(&self.alpha_grid)));
        v
    }
}

fn resize(mut v: Vec<f64>, len: usize) -> Vec<f64> {
    let fill = v.last().copied().unwrap_or(0.0);
    v.resize(len, fill);
    v
}
