//! Sectioned key-value configuration with strict key checking. A file looks
//! like
//!
//! ```text
//! [model]
//! d = 3
//! k = 1
//! q = 1.0
//!
//! [grid]
//! l = 16
//! eps = 0.1
//! ```
//!
//! and every value can be overridden on the command line by a flag of the
//! same dotted name, e.g. `--grid.l 32`. Unknown keys are rejected. The fully
//! resolved configuration is echoed into the header of every output file.

use repulsion_core::lattice::{ModelSpec, QPolynomial, TorusGrid};
use std::collections::BTreeMap;
use std::fmt;

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn err<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

/// Every key the configuration understands, with its documentation line.
pub const KNOWN_KEYS: &[(&str, &str)] = &[
    ("model.d", "lattice dimension"),
    ("model.k", "minimal degree of q"),
    ("model.q", "comma-separated coefficients q_k..q_K"),
    ("grid.l", "torus side length"),
    ("grid.eps", "mass regularization"),
    ("run.seed", "master seed for all stochastic work"),
    ("run.workers", "worker threads (0 = all cores)"),
    ("output.dir", "output directory"),
    ("output.plot", "also write SVG line plots (true/false)"),
    ("output.store", "JSON-lines run store filename"),
    ("green.radii_min", "smallest decay-table radius"),
    ("green.radii_max", "largest decay-table radius"),
    ("green.nodes", "quadrature nodes per axis (base level)"),
    ("green.levels", "quadrature extrapolation levels"),
    ("green.max_displacement", "tabulate G(0,x) for |x| up to this"),
    ("sample.draws", "number of field draws"),
    ("sample.max_displacement", "covariance displacements up to this"),
    ("conditional.l_boxes", "comma-separated box sides for the G_L curve"),
    ("conditional.markov_l", "torus side for the screening check"),
    ("conditional.markov_l_box", "box side for the screening check"),
    ("capacity.h_steps", "comma-separated obstacle grid steps"),
    ("capacity.radius", "obstacle cutoff radius"),
    ("capacity.radius2", "second cutoff radius for the R-correction"),
    ("capacity.kernel_resolution", "kernel cells per axis"),
    ("capacity.identity_resolution", "cells per axis for the inverse-identity probe"),
    ("repulsion.n_list", "comma-separated region half-sides"),
    ("repulsion.draws", "comma-separated draws per region (or one value)"),
    ("repulsion.capacity", "capacity value for the asymptote (blank = compute)"),
    ("height.n_list", "comma-separated region half-sides"),
    ("height.block_scale", "block half-side as a fraction of N"),
    ("height.eps_scale", "mass = eps_scale / L^2 on the enclosing torus"),
    ("height.burn_in", "burn-in sweeps per chain"),
    ("height.thinning", "sweeps between retained samples"),
    ("height.chains", "chains per start"),
    ("height.samples", "retained samples per chain"),
    ("check_c.eps_list", "comma-separated mass values to scan"),
    ("check_c.l", "torus side for the scan"),
];

/// Resolved configuration: a flat dotted-key map.
#[derive(Debug, Clone, Default)]
pub struct Config {
    values: BTreeMap<String, String>,
}

impl Config {
    pub fn parse_file(path: &str) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read {path}: {e}")))?;
        Self::parse_str(&text)
    }

    pub fn parse_str(text: &str) -> Result<Self, ConfigError> {
        let mut section = String::new();
        let mut values = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| ConfigError(format!("line {}: unterminated section", lineno + 1)))?;
                section = name.trim().to_string();
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return err(format!("line {}: expected key = value", lineno + 1));
            };
            let dotted = if section.is_empty() {
                key.trim().to_string()
            } else {
                format!("{}.{}", section, key.trim())
            };
            Self::check_known(&dotted)?;
            values.insert(dotted, value.trim().to_string());
        }
        Ok(Self { values })
    }

    pub fn check_known(key: &str) -> Result<(), ConfigError> {
        if KNOWN_KEYS.iter().any(|(k, _)| *k == key) {
            Ok(())
        } else {
            err(format!("unknown key `{key}`"))
        }
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        Self::check_known(key)?;
        self.values.insert(key.to_string(), value.to_string());
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    /// All resolved entries, for output-file headers.
    pub fn entries(&self) -> impl Iterator<Item = (&str, &str)> {
        self.values.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn usize_or(&self, key: &str, default: usize) -> Result<usize, ConfigError> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| ConfigError(format!("{key}: expected integer, got `{v}`"))),
        }
    }

    pub fn u64_or(&self, key: &str, default: u64) -> Result<u64, ConfigError> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| ConfigError(format!("{key}: expected integer, got `{v}`"))),
        }
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64, ConfigError> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| ConfigError(format!("{key}: expected number, got `{v}`"))),
        }
    }

    pub fn bool_or(&self, key: &str, default: bool) -> Result<bool, ConfigError> {
        match self.get(key) {
            None => Ok(default),
            Some("true") | Some("1") => Ok(true),
            Some("false") | Some("0") => Ok(false),
            Some(v) => err(format!("{key}: expected true/false, got `{v}`")),
        }
    }

    pub fn list_usize_or(&self, key: &str, default: &[usize]) -> Result<Vec<usize>, ConfigError> {
        match self.get(key) {
            None => Ok(default.to_vec()),
            Some(v) => v
                .split(',')
                .map(|p| {
                    p.trim()
                        .parse()
                        .map_err(|_| ConfigError(format!("{key}: bad integer `{p}`")))
                })
                .collect(),
        }
    }

    pub fn list_f64_or(&self, key: &str, default: &[f64]) -> Result<Vec<f64>, ConfigError> {
        match self.get(key) {
            None => Ok(default.to_vec()),
            Some(v) => v
                .split(',')
                .map(|p| {
                    p.trim()
                        .parse()
                        .map_err(|_| ConfigError(format!("{key}: bad number `{p}`")))
                })
                .collect(),
        }
    }

    /// The model section: dimension plus the symbol polynomial.
    pub fn model(&self) -> Result<ModelSpec, ConfigError> {
        let d = self.usize_or("model.d", 3)?;
        let k = self.usize_or("model.k", 1)?;
        let coeffs = self.list_f64_or("model.q", &[1.0])?;
        let q = QPolynomial::new(k, coeffs).map_err(|e| ConfigError(format!("model.q: {e}")))?;
        Ok(ModelSpec::new(q, d))
    }

    /// The grid section.
    pub fn grid(&self, d: usize) -> Result<TorusGrid, ConfigError> {
        let l = self.usize_or("grid.l", 16)?;
        let eps = self.f64_or("grid.eps", 0.1)?;
        if eps < 0.0 {
            return err("grid.eps: must be nonnegative");
        }
        Ok(TorusGrid::new(d, l, eps))
    }

    pub fn seed(&self) -> Result<u64, ConfigError> {
        self.u64_or("run.seed", 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sections_and_rejects_unknown_keys() {
        let cfg = Config::parse_str("[model]\nd = 3\nq = 1.0, 0.5\nk = 1\n").unwrap();
        assert_eq!(cfg.get("model.d"), Some("3"));
        let model = cfg.model().unwrap();
        assert_eq!(model.q.max_degree(), 2);
        assert!(Config::parse_str("[model]\nbogus = 1\n").is_err());
        assert!(Config::parse_str("[nosuch]\nd = 1\n").is_err());
    }

    #[test]
    fn comments_and_blank_lines_ignored() {
        let cfg = Config::parse_str("# top\n[grid]\nl = 8 # inline\n\neps = 0.25\n").unwrap();
        let grid = cfg.grid(3).unwrap();
        assert_eq!(grid.l, 8);
        assert_eq!(grid.eps, 0.25);
    }

    #[test]
    fn overrides_replace_file_values() {
        let mut cfg = Config::parse_str("[grid]\nl = 8\n").unwrap();
        cfg.set("grid.l", "32").unwrap();
        assert_eq!(cfg.get("grid.l"), Some("32"));
        assert!(cfg.set("grid.nope", "1").is_err());
    }
}
