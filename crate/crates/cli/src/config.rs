//! Shared run configuration: a plain `key=value` file merged with command
//! line overrides. The canonical emission is stable (fixed key order,
//! shortest round-trip float formatting) so a config can be emitted, stored,
//! and fed back with identical results.

use num_complex::Complex64;
use serde::Serialize;
use std::fmt::Write as _;
use std::path::Path;
use testvector_core::{HighestWeight, InducedParams, QuadratureSpec, RealCharacter, SpectralError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("config line {0} is not `key=value`: {1:?}")]
    BadLine(usize, String),
    #[error("unknown config key {0:?}")]
    UnknownKey(String),
    #[error("bad value for {key}: {value:?} ({reason})")]
    BadValue {
        key: String,
        value: String,
        reason: String,
    },
}

/// The evaluation context shared by every subcommand.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    /// Inducing integer weight (even length, pure).
    pub nu: Vec<i64>,
    /// Sign exponent of the twisting character (0 or 1).
    pub chi_sign: u8,
    pub chi_power_re: f64,
    pub chi_power_im: f64,
    /// Evaluation point of the functional.
    pub s_re: f64,
    pub s_im: f64,
    /// Monte-Carlo sample count.
    pub samples: usize,
    pub seed: u64,
    /// Trapezoid nodes for the block integrals.
    pub quad_nodes: usize,
    pub quad_tmin: f64,
    pub quad_tmax: f64,
    pub quad_tol: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        let q = QuadratureSpec::default();
        Self {
            nu: vec![0, 0],
            chi_sign: 0,
            chi_power_re: 0.0,
            chi_power_im: 0.0,
            s_re: 1.0,
            s_im: 0.0,
            samples: 10_000,
            seed: 7,
            quad_nodes: q.nodes,
            quad_tmin: q.t_min,
            quad_tmax: q.t_max,
            quad_tol: q.tol,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let mut cfg = RunConfig::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| ConfigError::BadLine(idx + 1, raw.to_string()))?;
            cfg.set(key.trim(), value.trim())?;
        }
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let bad = |reason: &str| ConfigError::BadValue {
            key: key.to_string(),
            value: value.to_string(),
            reason: reason.to_string(),
        };
        match key {
            "nu" => {
                let parsed: Result<Vec<i64>, _> =
                    value.split(',').map(|t| t.trim().parse::<i64>()).collect();
                self.nu = parsed.map_err(|e| bad(&e.to_string()))?;
            }
            "chi_sign" => {
                let v: u8 = value.parse().map_err(|_| bad("expected 0 or 1"))?;
                if v > 1 {
                    return Err(bad("expected 0 or 1"));
                }
                self.chi_sign = v;
            }
            "chi_power_re" => self.chi_power_re = value.parse().map_err(|_| bad("not a float"))?,
            "chi_power_im" => self.chi_power_im = value.parse().map_err(|_| bad("not a float"))?,
            "s_re" => self.s_re = value.parse().map_err(|_| bad("not a float"))?,
            "s_im" => self.s_im = value.parse().map_err(|_| bad("not a float"))?,
            "samples" => {
                self.samples = value.parse().map_err(|_| bad("not a positive integer"))?;
                if self.samples == 0 {
                    return Err(bad("must be positive"));
                }
            }
            "seed" => self.seed = value.parse().map_err(|_| bad("not an integer"))?,
            "quad_nodes" => {
                self.quad_nodes = value.parse().map_err(|_| bad("not an integer"))?;
                if self.quad_nodes < 16 {
                    return Err(bad("need at least 16 nodes"));
                }
            }
            "quad_tmin" => self.quad_tmin = value.parse().map_err(|_| bad("not a float"))?,
            "quad_tmax" => self.quad_tmax = value.parse().map_err(|_| bad("not a float"))?,
            "quad_tol" => self.quad_tol = value.parse().map_err(|_| bad("not a float"))?,
            _ => return Err(ConfigError::UnknownKey(key.to_string())),
        }
        Ok(())
    }

    /// Canonical `key=value` form: fixed alphabetical key order, shortest
    /// round-trip float formatting. Feeding the output back through
    /// [`RunConfig::load`] reproduces the config exactly.
    pub fn canonical(&self) -> String {
        let mut out = String::new();
        let nu: Vec<String> = self.nu.iter().map(|v| v.to_string()).collect();
        let _ = writeln!(out, "chi_power_im={}", self.chi_power_im);
        let _ = writeln!(out, "chi_power_re={}", self.chi_power_re);
        let _ = writeln!(out, "chi_sign={}", self.chi_sign);
        let _ = writeln!(out, "nu={}", nu.join(","));
        let _ = writeln!(out, "quad_nodes={}", self.quad_nodes);
        let _ = writeln!(out, "quad_tmax={}", self.quad_tmax);
        let _ = writeln!(out, "quad_tmin={}", self.quad_tmin);
        let _ = writeln!(out, "quad_tol={}", self.quad_tol);
        let _ = writeln!(out, "s_im={}", self.s_im);
        let _ = writeln!(out, "s_re={}", self.s_re);
        let _ = writeln!(out, "samples={}", self.samples);
        let _ = writeln!(out, "seed={}", self.seed);
        out
    }

    pub fn chi(&self) -> RealCharacter {
        RealCharacter::new(
            self.chi_sign,
            Complex64::new(self.chi_power_re, self.chi_power_im),
        )
    }

    pub fn s(&self) -> Complex64 {
        Complex64::new(self.s_re, self.s_im)
    }

    pub fn quad(&self) -> QuadratureSpec {
        QuadratureSpec {
            nodes: self.quad_nodes,
            t_min: self.quad_tmin,
            t_max: self.quad_tmax,
            tol: self.quad_tol,
        }
    }

    pub fn params(&self) -> Result<InducedParams, SpectralError> {
        InducedParams::from_weight(&HighestWeight::new(self.nu.clone())?)
    }
}
