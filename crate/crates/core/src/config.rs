//! Scenario configuration and its flat `key = value` text format.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelModel {
    Rayleigh,
    Mmwave,
}

impl std::fmt::Display for ChannelModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ChannelModel::Rayleigh => write!(f, "rayleigh"),
            ChannelModel::Mmwave => write!(f, "mmwave"),
        }
    }
}

impl std::str::FromStr for ChannelModel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rayleigh" => Ok(ChannelModel::Rayleigh),
            "mmwave" => Ok(ChannelModel::Mmwave),
            other => Err(Error::InvalidConfig(format!(
                "channel_model must be rayleigh or mmwave, got '{other}'"
            ))),
        }
    }
}

/// All scenario dimensions and noise/imperfection parameters.
///
/// `snr_db = inf` disables noise entirely. The pilot length per time-block is
/// implicitly `m` because the pilot matrix is the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    /// Transmit antennas.
    pub m: usize,
    /// Receive antennas.
    pub l: usize,
    /// RIS elements.
    pub n: usize,
    /// Time-blocks per frame.
    pub k: usize,
    /// Frames (1 selects the long-term imperfection model).
    pub p: usize,
    pub snr_db: f64,
    /// Imperfection occurrence probability in [0, 1].
    pub r_b: f64,
    /// Convergence threshold on the residual change between ALS iterations.
    pub delta: f64,
    pub max_iters: usize,
    /// Monte Carlo runs per sweep point.
    pub omega: usize,
    pub channel_model: ChannelModel,
    pub seed: u64,
}

impl Default for SystemConfig {
    fn default() -> Self {
        SystemConfig {
            m: 3,
            l: 2,
            n: 4,
            k: 8,
            p: 1,
            snr_db: 20.0,
            r_b: 0.5,
            delta: 1e-6,
            max_iters: 500,
            omega: 100,
            channel_model: ChannelModel::Rayleigh,
            seed: 1,
        }
    }
}

fn parse_usize(key: &str, value: &str) -> Result<usize> {
    value.parse::<usize>().map_err(|_| {
        Error::InvalidConfig(format!(
            "{key}: expected a non-negative integer, got '{value}'"
        ))
    })
}

fn parse_f64(key: &str, value: &str) -> Result<f64> {
    if value.eq_ignore_ascii_case("inf") || value.eq_ignore_ascii_case("+inf") {
        return Ok(f64::INFINITY);
    }
    value
        .parse::<f64>()
        .map_err(|_| Error::InvalidConfig(format!("{key}: expected a number, got '{value}'")))
}

impl SystemConfig {
    /// Applies one `key = value` override. Unknown keys are errors.
    pub fn apply(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "m" => self.m = parse_usize(key, value)?,
            "l" => self.l = parse_usize(key, value)?,
            "n" => self.n = parse_usize(key, value)?,
            "k" => self.k = parse_usize(key, value)?,
            "p" => self.p = parse_usize(key, value)?,
            "snr_db" => self.snr_db = parse_f64(key, value)?,
            "r_b" => self.r_b = parse_f64(key, value)?,
            "delta" => self.delta = parse_f64(key, value)?,
            "max_iters" => self.max_iters = parse_usize(key, value)?,
            // `runs` is accepted as an alias for the Monte Carlo run count.
            "omega" | "runs" => self.omega = parse_usize(key, value)?,
            "channel_model" => self.channel_model = value.parse()?,
            "seed" => {
                self.seed = value.parse::<u64>().map_err(|_| {
                    Error::InvalidConfig(format!("seed: expected a u64, got '{value}'"))
                })?
            }
            other => {
                return Err(Error::InvalidConfig(format!("unknown key '{other}'")));
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("m", self.m),
            ("l", self.l),
            ("n", self.n),
            ("k", self.k),
            ("p", self.p),
            ("max_iters", self.max_iters),
        ] {
            if v < 1 {
                return Err(Error::InvalidConfig(format!(
                    "{name} must be >= 1, got {v}"
                )));
            }
        }
        if !(0.0..=1.0).contains(&self.r_b) {
            return Err(Error::InvalidConfig(format!(
                "r_b must lie in [0, 1], got {}",
                self.r_b
            )));
        }
        if self.delta <= 0.0 || self.delta.is_nan() {
            return Err(Error::InvalidConfig(format!(
                "delta must be > 0, got {}",
                self.delta
            )));
        }
        if self.snr_db.is_nan() {
            return Err(Error::InvalidConfig("snr_db must not be NaN".to_string()));
        }
        Ok(())
    }

    /// Parses a flat `key = value` text body (one pair per line, `#` starts a
    /// comment) on top of the defaults.
    pub fn from_kv_text(text: &str) -> Result<Self> {
        let mut cfg = SystemConfig::default();
        cfg.apply_kv_text(text)?;
        Ok(cfg)
    }

    /// Applies a `key = value` text body to an existing config.
    pub fn apply_kv_text(&mut self, text: &str) -> Result<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::InvalidConfig(format!(
                    "line {}: expected key = value, got '{line}'",
                    lineno + 1
                ))
            })?;
            self.apply(key.trim(), value.trim())?;
        }
        Ok(())
    }

    /// Renders the config back to the text format.
    pub fn to_kv_text(&self) -> String {
        format!(
            "m = {}\nl = {}\nn = {}\nk = {}\np = {}\nsnr_db = {}\nr_b = {}\ndelta = {}\nmax_iters = {}\nomega = {}\nchannel_model = {}\nseed = {}\n",
            self.m,
            self.l,
            self.n,
            self.k,
            self.p,
            self.snr_db,
            self.r_b,
            self.delta,
            self.max_iters,
            self.omega,
            self.channel_model,
            self.seed
        )
    }
}
