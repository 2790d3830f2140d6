//! Run configuration: CLI flags merged over an optional flat key-value
//! config file.
//!
//! File format: one `key = value` per line, `#` comments, blank lines
//! ignored. Lists are comma-separated. Every key has a matching CLI flag
//! and flags win. Keys: `mode`, `pairs`, `antennas`, `user_antennas`,
//! `snr_db`, `trials`, `seed`, `eps`, `tol`, `weights`, `targets`,
//! `schemes`, `utility`, `out`, `trace_out`.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    MaxMin,
    PowerMin,
    Wsr,
    Utility,
    Collab,
    Mimo,
    Sweep,
}

impl Mode {
    pub fn parse(s: &str) -> Result<Mode> {
        Ok(match s {
            "maxmin" => Mode::MaxMin,
            "powermin" => Mode::PowerMin,
            "wsr" => Mode::Wsr,
            "utility" => Mode::Utility,
            "collab" => Mode::Collab,
            "mimo" => Mode::Mimo,
            "sweep" => Mode::Sweep,
            other => bail!("unknown mode '{other}'"),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UtilityKind {
    Wsr,
    Mse,
    SerQpsk,
    SerBpsk,
}

impl UtilityKind {
    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "wsr" => UtilityKind::Wsr,
            "mse" => UtilityKind::Mse,
            "ser-qpsk" => UtilityKind::SerQpsk,
            "ser-bpsk" => UtilityKind::SerBpsk,
            other => bail!("unknown utility '{other}' (wsr|mse|ser-qpsk|ser-bpsk)"),
        })
    }

    pub fn metric_name(&self) -> &'static str {
        match self {
            UtilityKind::Wsr => "wsr",
            UtilityKind::Mse => "neg_sum_mse",
            UtilityKind::SerQpsk | UtilityKind::SerBpsk => "neg_sum_ser",
        }
    }
}

/// Everything a run needs; defaults follow the standard simulation setup
/// (equal user powers tied to the relay budget, unit noise, unit targets).
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub mode: Mode,
    pub pairs: usize,
    pub antennas: usize,
    pub user_antennas: Vec<usize>,
    pub snr_db: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub eps: f64,
    pub tol: f64,
    pub weights: Vec<f64>,
    pub targets: Vec<f64>,
    pub schemes: Vec<String>,
    pub utility: UtilityKind,
    pub out: Option<PathBuf>,
    pub trace_out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            mode: Mode::MaxMin,
            pairs: 1,
            antennas: 2,
            user_antennas: Vec::new(),
            snr_db: vec![10.0],
            trials: 100,
            seed: 1,
            eps: 0.01,
            tol: 1e-6,
            weights: Vec::new(),
            targets: Vec::new(),
            schemes: Vec::new(),
            utility: UtilityKind::Wsr,
            out: None,
            trace_out: None,
        }
    }
}

impl RunConfig {
    pub fn users(&self) -> usize {
        2 * self.pairs
    }

    /// Per-user weights, defaulting to all ones.
    pub fn weights_or_default(&self) -> Vec<f64> {
        if self.weights.is_empty() {
            vec![1.0; self.users()]
        } else {
            self.weights.clone()
        }
    }

    pub fn targets_or_default(&self) -> Vec<f64> {
        if self.targets.is_empty() {
            vec![1.0; self.users()]
        } else {
            self.targets.clone()
        }
    }

    pub fn user_antennas_or_default(&self) -> Vec<usize> {
        if self.user_antennas.is_empty() {
            vec![1; self.users()]
        } else {
            self.user_antennas.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.pairs == 0 {
            bail!("pairs must be at least 1");
        }
        if self.antennas == 0 {
            bail!("antennas must be at least 1");
        }
        if self.trials == 0 {
            bail!("trials must be at least 1");
        }
        if self.snr_db.is_empty() {
            bail!("snr_db list must be nonempty");
        }
        if !(self.eps > 0.0) {
            bail!("eps must be positive");
        }
        if !(self.tol > 0.0) {
            bail!("tol must be positive");
        }
        if !self.weights.is_empty() && self.weights.len() != self.users() {
            bail!(
                "weights must list one value per user ({} expected, {} given)",
                self.users(),
                self.weights.len()
            );
        }
        if self.weights.iter().any(|w| !(*w > 0.0)) {
            bail!("weights must be strictly positive");
        }
        if !self.targets.is_empty() && self.targets.len() != self.users() {
            bail!(
                "targets must list one value per user ({} expected, {} given)",
                self.users(),
                self.targets.len()
            );
        }
        if self.targets.iter().any(|t| !(*t > 0.0)) {
            bail!("targets must be strictly positive");
        }
        if !self.user_antennas.is_empty() && self.user_antennas.len() != self.users() {
            bail!(
                "user_antennas must list one count per user ({} expected, {} given)",
                self.users(),
                self.user_antennas.len()
            );
        }
        Ok(())
    }

    /// Applies key-value pairs from a config file; CLI values are laid on
    /// top by the caller afterwards.
    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config file {}", path.display()))?;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').with_context(|| {
                format!("{}:{}: expected 'key = value'", path.display(), lineno + 1)
            })?;
            self.apply_kv(key.trim(), value.trim())
                .with_context(|| format!("{}:{}", path.display(), lineno + 1))?;
        }
        Ok(())
    }

    fn apply_kv(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "mode" => self.mode = Mode::parse(value)?,
            "pairs" => self.pairs = value.parse()?,
            "antennas" => self.antennas = value.parse()?,
            "user_antennas" => self.user_antennas = parse_list(value)?,
            "snr_db" => self.snr_db = parse_list(value)?,
            "trials" => self.trials = value.parse()?,
            "seed" => self.seed = value.parse()?,
            "eps" => self.eps = value.parse()?,
            "tol" => self.tol = value.parse()?,
            "weights" => self.weights = parse_list(value)?,
            "targets" => self.targets = parse_list(value)?,
            "schemes" => self.schemes = value.split(',').map(|s| s.trim().to_string()).collect(),
            "utility" => self.utility = UtilityKind::parse(value)?,
            "out" => self.out = Some(PathBuf::from(value)),
            "trace_out" => self.trace_out = Some(PathBuf::from(value)),
            other => bail!("unknown config key '{other}'"),
        }
        Ok(())
    }
}

fn parse_list<T: std::str::FromStr>(value: &str) -> Result<Vec<T>>
where
    T::Err: std::error::Error + Send + Sync + 'static,
{
    value
        .split(',')
        .map(|s| s.trim().parse::<T>().map_err(Into::into))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_roundtrip_and_overrides() {
        let dir = std::env::temp_dir().join("relaybf-config-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("run.conf");
        std::fs::write(
            &path,
            "# comment\nmode = wsr\npairs = 2\nsnr_db = 0, 10, 20\nweights = 0.2,0.8,0.5,0.5\n",
        )
        .unwrap();
        let mut cfg = RunConfig::default();
        cfg.apply_file(&path).unwrap();
        assert_eq!(cfg.mode, Mode::Wsr);
        assert_eq!(cfg.pairs, 2);
        assert_eq!(cfg.snr_db, vec![0.0, 10.0, 20.0]);
        assert_eq!(cfg.weights.len(), 4);
        cfg.validate().unwrap();
    }

    #[test]
    fn rejects_unknown_keys_and_bad_lists() {
        let dir = std::env::temp_dir().join("relaybf-config-test2");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("bad.conf");
        std::fs::write(&path, "zzz = 3\n").unwrap();
        let mut cfg = RunConfig::default();
        assert!(cfg.apply_file(&path).is_err());

        let mut cfg = RunConfig::default();
        cfg.weights = vec![0.5];
        cfg.pairs = 1;
        assert!(cfg.validate().is_err());
    }
}
