//! `key = value` run configuration.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::soliton::{SolitonParams, DEMAND_SCALE};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Csv,
    Svg,
    Both,
}

impl OutputFormat {
    pub fn csv(self) -> bool {
        matches!(self, Self::Csv | Self::Both)
    }

    pub fn svg(self) -> bool {
        matches!(self, Self::Svg | Self::Both)
    }
}

impl FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Self::Csv),
            "svg" => Ok(Self::Svg),
            "both" => Ok(Self::Both),
            other => Err(format!("unknown format `{other}` (expected csv, svg or both)")),
        }
    }
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Csv => "csv",
            Self::Svg => "svg",
            Self::Both => "both",
        })
    }
}

/// Everything a CLI run needs.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: SolitonParams,
    pub s_min: f64,
    pub s_max: f64,
    pub t_min: f64,
    pub t_max: f64,
    pub n_s: usize,
    pub n_t: usize,
    /// Transverse position used by figures 6 and 7.
    pub x1: f64,
    pub x2: f64,
    /// Transverse position used by figure 8.
    pub x1_alt: f64,
    pub x2_alt: f64,
    pub demand_a: f64,
    pub demand_max: f64,
    pub demand_n: usize,
    pub output_dir: PathBuf,
    pub format: OutputFormat,
}

impl Default for RunConfig {
    fn default() -> Self {
        let params = SolitonParams::default();
        Self {
            s_min: -params.half_length,
            s_max: params.half_length,
            params,
            t_min: 0.0,
            t_max: 4.0,
            n_s: 201,
            n_t: 201,
            x1: 1.0,
            x2: 0.0,
            x1_alt: 2.0,
            x2_alt: 2.0,
            demand_a: DEMAND_SCALE,
            demand_max: 1.5,
            demand_n: 31,
            output_dir: PathBuf::from("out"),
            format: OutputFormat::Csv,
        }
    }
}

/// Recognised configuration keys.
pub const KEYS: &[&str] = &[
    "beta",
    "tau",
    "l_scale",
    "L",
    "activity",
    "gamma",
    "d",
    "s_min",
    "s_max",
    "t_min",
    "t_max",
    "n_s",
    "n_t",
    "x1",
    "x2",
    "x1_alt",
    "x2_alt",
    "demand_a",
    "demand_max",
    "demand_n",
    "output_dir",
    "format",
];

impl RunConfig {
    /// Parses configuration text; missing keys keep their defaults.
    ///
    /// When `L` is given but the `s` range is not, the range follows `[−L, L]`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        let mut s_range_set = false;
        for (lineno, raw) in text.lines().enumerate() {
            let line = lineno + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| Error::Parse {
                line,
                message: format!("expected `key = value`, found `{content}`"),
            })?;
            let key = key.trim();
            let value = value.trim();
            if matches!(key, "s_min" | "s_max") {
                s_range_set = true;
            }
            cfg.set(key, value).map_err(|e| match e {
                Error::InvalidParameter { name, reason } => Error::Parse {
                    line,
                    message: format!("{name}: {reason}"),
                },
                other => other,
            })?;
        }
        if !s_range_set {
            cfg.s_min = -cfg.params.half_length;
            cfg.s_max = cfg.params.half_length;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Sets one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num(name: &'static str, v: &str) -> Result<f64> {
            v.parse::<f64>()
                .map_err(|_| Error::invalid(name, format!("`{v}` is not a number")))
        }
        fn count(name: &'static str, v: &str) -> Result<usize> {
            v.parse::<usize>()
                .map_err(|_| Error::invalid(name, format!("`{v}` is not a non-negative integer")))
        }
        let p = &mut self.params;
        match key {
            "beta" => p.beta = num("beta", value)?,
            "tau" => p.tau = num("tau", value)?,
            "l_scale" => p.l_scale = num("l_scale", value)?,
            "L" => p.half_length = num("L", value)?,
            "activity" => p.activity = num("activity", value)?,
            "gamma" => p.gamma = num("gamma", value)?,
            "d" => p.cutoff = num("d", value)?,
            "s_min" => self.s_min = num("s_min", value)?,
            "s_max" => self.s_max = num("s_max", value)?,
            "t_min" => self.t_min = num("t_min", value)?,
            "t_max" => self.t_max = num("t_max", value)?,
            "n_s" => self.n_s = count("n_s", value)?,
            "n_t" => self.n_t = count("n_t", value)?,
            "x1" => self.x1 = num("x1", value)?,
            "x2" => self.x2 = num("x2", value)?,
            "x1_alt" => self.x1_alt = num("x1_alt", value)?,
            "x2_alt" => self.x2_alt = num("x2_alt", value)?,
            "demand_a" => self.demand_a = num("demand_a", value)?,
            "demand_max" => self.demand_max = num("demand_max", value)?,
            "demand_n" => self.demand_n = count("demand_n", value)?,
            "output_dir" => self.output_dir = PathBuf::from(value),
            "format" => self.format = value.parse().map_err(|e| Error::invalid("format", e))?,
            other => return Err(Error::UnknownKey(other.to_string())),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.n_s < 2 || self.n_t < 2 {
            return Err(Error::invalid("n_s/n_t", "need at least 2 samples per axis"));
        }
        if !(self.s_max > self.s_min) || !(self.t_max > self.t_min) {
            return Err(Error::invalid("range", "s and t ranges must be non-empty"));
        }
        if [self.s_min, self.s_max, self.t_min, self.t_max]
            .iter()
            .any(|v| !v.is_finite())
        {
            return Err(Error::invalid("range", "bounds must be finite"));
        }
        if self.x1.hypot(self.x2) == 0.0 || self.x1_alt.hypot(self.x2_alt) == 0.0 {
            return Err(Error::invalid(
                "x1/x2",
                "profit figures need a point off the capital axis",
            ));
        }
        if !(self.demand_a > 0.0) || !(self.demand_max > 0.0) || self.demand_n < 2 {
            return Err(Error::invalid(
                "demand",
                "demand_a, demand_max > 0 and demand_n >= 2 required",
            ));
        }
        Ok(())
    }

    pub fn s_values(&self) -> Vec<f64> {
        linspace(self.s_min, self.s_max, self.n_s)
    }

    pub fn t_values(&self) -> Vec<f64> {
        linspace(self.t_min, self.t_max, self.n_t)
    }
}

/// `n` evenly spaced values from `a` to `b` inclusive.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    (0..n)
        .map(|i| {
            if i + 1 == n {
                b
            } else {
                a + (b - a) * i as f64 / (n - 1) as f64
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_gives_defaults() {
        let c = RunConfig::parse("").unwrap();
        assert_eq!(c, RunConfig::default());
        assert_eq!(c.params.beta, 0.5);
        assert_eq!(c.params.tau, 0.25);
        assert_eq!(c.params.half_length, 5.0);
        assert_eq!((c.s_min, c.s_max), (-5.0, 5.0));
    }

    #[test]
    fn overrides_and_comments() {
        let c = RunConfig::parse("# header\nbeta = 1.0   # trailing\n\n  n_s=11\nformat = both\n").unwrap();
        assert_eq!(c.params.beta, 1.0);
        assert_eq!(c.params.nu(), 0.5);
        assert_eq!(c.n_s, 11);
        assert_eq!(c.format, OutputFormat::Both);
    }

    #[test]
    fn half_length_moves_default_range() {
        let c = RunConfig::parse("L = 3").unwrap();
        assert_eq!((c.s_min, c.s_max), (-3.0, 3.0));
        let c = RunConfig::parse("L = 3\ns_min = -1").unwrap();
        assert_eq!((c.s_min, c.s_max), (-1.0, 5.0));
    }

    #[test]
    fn unknown_key_is_named() {
        match RunConfig::parse("beta = 0.5\nbogus = 3") {
            Err(Error::UnknownKey(k)) => assert_eq!(k, "bogus"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        match RunConfig::parse("beta = 0.5\n\ntau 0.3") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        match RunConfig::parse("n_t = many") {
            Err(Error::Parse { line, message }) => {
                assert_eq!(line, 1);
                assert!(message.contains("n_t"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn invalid_values_rejected() {
        assert!(RunConfig::parse("beta = 0").is_err());
        assert!(RunConfig::parse("n_s = 1").is_err());
        assert!(RunConfig::parse("t_min = 5").is_err());
        assert!(RunConfig::parse("x1 = 0").is_err());
        assert!(RunConfig::parse("format = png").is_err());
    }

    #[test]
    fn linspace_hits_endpoints() {
        let v = linspace(-5.0, 5.0, 201);
        assert_eq!(v.len(), 201);
        assert_eq!(v[0], -5.0);
        assert_eq!(v[100], 0.0);
        assert_eq!(v[200], 5.0);
    }
}
