//! Simulation settings and the `key = value` config file.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::fmt;
use std::path::Path;
use std::str::FromStr;
use thiserror::Error;
use zac_core::zoning::ZoningMethod;
use zac_core::Seconds;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("bad value `{value}` for `{key}`: {reason}")]
    BadValue { key: String, value: String, reason: String },
    #[error("{0}")]
    Invalid(String),
    #[error("reading config: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Zac,
    ZacBenders,
    Greedy,
}

impl FromStr for Method {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "zac" => Ok(Method::Zac),
            "zacbenders" | "benders" => Ok(Method::ZacBenders),
            "greedy" => Ok(Method::Greedy),
            _ => Err("expected zac, zacbenders or greedy".into()),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Zac => "zac",
            Method::ZacBenders => "zacbenders",
            Method::Greedy => "greedy",
        })
    }
}

/// Vehicle capacities: one value for the whole fleet or a named mix.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum KappaSpec {
    Fixed(u32),
    /// Uniform on 1..=4.
    Uniform4,
    /// Uniform on 1..=10.
    Uniform10,
    /// 80% capacity 4, 20% capacity 6.
    Mix80_20,
}

impl KappaSpec {
    /// Per-vehicle capacities. The mix preset assigns exactly
    /// `round(0.2 * fleet)` vehicles capacity 6, chosen at random.
    pub fn draw(&self, fleet: usize, rng: &mut ChaCha8Rng) -> Vec<u32> {
        match *self {
            KappaSpec::Fixed(k) => vec![k; fleet],
            KappaSpec::Uniform4 => (0..fleet).map(|_| rng.gen_range(1..=4)).collect(),
            KappaSpec::Uniform10 => (0..fleet).map(|_| rng.gen_range(1..=10)).collect(),
            KappaSpec::Mix80_20 => {
                let mut caps = vec![4; fleet];
                let big = (fleet as f64 * 0.2).round() as usize;
                let mut idx: Vec<usize> = (0..fleet).collect();
                for i in 0..big {
                    let j = rng.gen_range(i..fleet);
                    idx.swap(i, j);
                    caps[idx[i]] = 6;
                }
                caps
            }
        }
    }
}

impl FromStr for KappaSpec {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "uniform_4" | "uniform4" => Ok(KappaSpec::Uniform4),
            "uniform_10" | "uniform10" => Ok(KappaSpec::Uniform10),
            "80_20" | "mix80_20" => Ok(KappaSpec::Mix80_20),
            other => match other.parse::<u32>() {
                Ok(k) if k > 0 => Ok(KappaSpec::Fixed(k)),
                _ => Err("expected a positive integer, uniform_4, uniform_10 or 80_20".into()),
            },
        }
    }
}

impl fmt::Display for KappaSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KappaSpec::Fixed(k) => write!(f, "{k}"),
            KappaSpec::Uniform4 => f.write_str("uniform_4"),
            KappaSpec::Uniform10 => f.write_str("uniform_10"),
            KappaSpec::Mix80_20 => f.write_str("80_20"),
        }
    }
}

fn parse_zoning_method(s: &str) -> Result<ZoningMethod, String> {
    match s.to_ascii_lowercase().as_str() {
        "gbc" | "grid" => Ok(ZoningMethod::Grid),
        "hac_max" | "hacmax" => Ok(ZoningMethod::HacMax),
        "hac_avg" | "hacavg" => Ok(ZoningMethod::HacAvg),
        _ => Err("expected gbc, hac_max or hac_avg".into()),
    }
}

pub fn zoning_method_name(m: ZoningMethod) -> &'static str {
    match m {
        ZoningMethod::Grid => "gbc",
        ZoningMethod::HacMax => "hac_max",
        ZoningMethod::HacAvg => "hac_avg",
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    pub delta: Seconds,
    pub tau: Seconds,
    pub lambda: Seconds,
    pub kappa: KappaSpec,
    pub fleet: usize,
    /// Zone sizes used for path completion, ascending from 0.
    pub zone_sizes: Vec<Seconds>,
    /// Zone size used to abstract future demand.
    pub zs: Seconds,
    pub rho: Seconds,
    pub num_samples: usize,
    pub method: Method,
    pub clustering: ZoningMethod,
    /// Wall-clock budget for one epoch, seconds.
    pub time_limit: f64,
    pub seed: u64,
    pub horizon: Seconds,
    pub max_destinations: usize,
    pub node_budget: usize,
    /// Upper bound on drain seconds after the horizon.
    pub drain_limit: Seconds,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            delta: 60,
            tau: 120,
            lambda: 240,
            kappa: KappaSpec::Fixed(4),
            fleet: 100,
            zone_sizes: vec![0, 60, 120, 300],
            zs: 600,
            rho: 900,
            num_samples: 5,
            method: Method::Zac,
            clustering: ZoningMethod::HacMax,
            time_limit: 30.0,
            seed: 1,
            horizon: 3600,
            max_destinations: 12,
            node_budget: 10_000,
            drain_limit: 7200,
        }
    }
}

fn bad(key: &str, value: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::BadValue { key: key.into(), value: value.into(), reason: reason.into() }
}

fn num<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: fmt::Display,
{
    value.parse::<T>().map_err(|e| bad(key, value, e.to_string()))
}

impl SimConfig {
    /// Sets one field from its textual form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let value = value.trim();
        match key.trim() {
            "delta" => self.delta = num(key, value)?,
            "tau" => self.tau = num(key, value)?,
            "lambda" | "lambda_delay" => self.lambda = num(key, value)?,
            "kappa" => self.kappa = value.parse().map_err(|e: String| bad(key, value, e))?,
            "fleet" | "fleet_size" => self.fleet = num(key, value)?,
            "zone_sizes" => {
                self.zone_sizes =
                    value.split(',').map(|s| num::<Seconds>(key, s.trim())).collect::<Result<_, _>>()?;
            }
            "zs" => self.zs = num(key, value)?,
            "rho" => self.rho = num(key, value)?,
            "samples" | "num_samples" => self.num_samples = num(key, value)?,
            "method" => self.method = value.parse().map_err(|e: String| bad(key, value, e))?,
            "clustering" => self.clustering = parse_zoning_method(value).map_err(|e| bad(key, value, e))?,
            "time_limit" => self.time_limit = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            "horizon" => self.horizon = num(key, value)?,
            "max_destinations" => self.max_destinations = num(key, value)?,
            "node_budget" => self.node_budget = num(key, value)?,
            "drain_limit" => self.drain_limit = num(key, value)?,
            other => return Err(ConfigError::UnknownKey(other.into())),
        }
        Ok(())
    }

    /// Applies a `key = value` file on top of `self`. `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<(), ConfigError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or(ConfigError::Syntax { line: i + 1 })?;
            self.set(k, v)?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<(), ConfigError> {
        let text = std::fs::read_to_string(path)?;
        self.apply_text(&text)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let fail = |m: &str| Err(ConfigError::Invalid(m.into()));
        if self.delta <= 0 {
            return fail("delta must be positive");
        }
        if self.tau < 0 || self.lambda < 0 {
            return fail("tau and lambda must be non-negative");
        }
        if self.zone_sizes.first() != Some(&0) || self.zone_sizes.windows(2).any(|w| w[0] >= w[1]) {
            return fail("zone_sizes must ascend strictly from 0");
        }
        if self.rho < 0 || self.rho % self.delta != 0 {
            return fail("rho must be a non-negative multiple of delta");
        }
        if self.zs < 0 {
            return fail("zs must be non-negative");
        }
        if !(self.time_limit > 0.0) {
            return fail("time_limit must be positive");
        }
        if self.horizon < 0 {
            return fail("horizon must be non-negative");
        }
        if self.max_destinations == 0 {
            return fail("max_destinations must be positive");
        }
        Ok(())
    }

    /// Canonical `key = value` dump, readable by [`SimConfig::apply_text`].
    pub fn to_text(&self) -> String {
        let sizes: Vec<String> = self.zone_sizes.iter().map(|s| s.to_string()).collect();
        format!(
            "delta = {}\ntau = {}\nlambda = {}\nkappa = {}\nfleet = {}\nzone_sizes = {}\nzs = {}\nrho = {}\n\
             samples = {}\nmethod = {}\nclustering = {}\ntime_limit = {}\nseed = {}\nhorizon = {}\n\
             max_destinations = {}\nnode_budget = {}\ndrain_limit = {}\n",
            self.delta,
            self.tau,
            self.lambda,
            self.kappa,
            self.fleet,
            sizes.join(","),
            self.zs,
            self.rho,
            self.num_samples,
            self.method,
            zoning_method_name(self.clustering),
            self.time_limit,
            self.seed,
            self.horizon,
            self.max_destinations,
            self.node_budget,
            self.drain_limit,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn round_trip() {
        let mut c = SimConfig { method: Method::ZacBenders, kappa: KappaSpec::Mix80_20, ..Default::default() };
        c.zone_sizes = vec![0, 90];
        let mut d = SimConfig::default();
        d.apply_text(&c.to_text()).unwrap();
        assert_eq!(c, d);
    }

    #[test]
    fn comments_and_errors() {
        let mut c = SimConfig::default();
        c.apply_text("# top\nfleet = 7 # trailing\n\n").unwrap();
        assert_eq!(c.fleet, 7);
        assert!(matches!(c.apply_text("fleet 7"), Err(ConfigError::Syntax { line: 1 })));
        assert!(matches!(c.apply_text("colour = red"), Err(ConfigError::UnknownKey(_))));
        assert!(matches!(c.apply_text("tau = soon"), Err(ConfigError::BadValue { .. })));
    }

    #[test]
    fn validation() {
        assert!(SimConfig::default().validate().is_ok());
        assert!(SimConfig { rho: 90, ..Default::default() }.validate().is_err());
        assert!(SimConfig { zone_sizes: vec![60, 120], ..Default::default() }.validate().is_err());
    }

    #[test]
    fn capacity_presets() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let caps = KappaSpec::Mix80_20.draw(100, &mut rng);
        assert_eq!(caps.iter().filter(|&&c| c == 6).count(), 20);
        assert_eq!(caps.iter().filter(|&&c| c == 4).count(), 80);
        let u = KappaSpec::Uniform4.draw(200, &mut rng);
        assert!(u.iter().all(|&c| (1..=4).contains(&c)));
        assert_eq!(KappaSpec::Fixed(3).draw(2, &mut rng), vec![3, 3]);
        assert_eq!("uniform_10".parse::<KappaSpec>().unwrap(), KappaSpec::Uniform10);
    }
}
