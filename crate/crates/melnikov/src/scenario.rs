//! Scenario files: the perturbed foliation `df − ε(P dx + Q dy) = 0`
//! together with an oval family, a `t`-grid, and tolerances.
//!
//! The on-disk format is plain sectioned `key = value` text:
//!
//! ```text
//! [scenario]
//! name = circle
//! f = (x^2 + y^2)/2
//! P = 0
//! Q = x
//! center = 0, 0
//! seed_ray = 1, 0
//! ray_bracket = 1e-9, 6
//! t_min = 0.1
//! t_max = 2.0
//! t_samples = 20
//!
//! [tolerances]
//! vanish_tol = 1e-8
//!
//! [oracle]
//! eps_grid = 0.01, 0.005, 0.0025, 0.00125
//! ```
//!
//! Unknown keys are rejected, missing required keys are reported by name,
//! and every tolerance has a documented default.

use crate::geometry::TransversalSpec;
use crate::poly::{parse_polynomial, BiPoly};
use crate::{Error, Result};
use std::collections::BTreeMap;
use std::path::Path as FsPath;

/// Raw parsed scenario file: sections of key/value pairs.
#[derive(Debug, Clone, Default)]
pub struct ScenarioFile {
    pub sections: BTreeMap<String, BTreeMap<String, String>>,
}

impl ScenarioFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut out = ScenarioFile::default();
        let mut current = String::from("scenario");
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let name = name.strip_suffix(']').ok_or_else(|| Error::Scenario(format!(
                    "line {}: unterminated section header",
                    lineno + 1
                )))?;
                current = name.trim().to_string();
                out.sections.entry(current.clone()).or_default();
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Scenario(format!("line {}: expected `key = value`", lineno + 1))
            })?;
            out.sections
                .entry(current.clone())
                .or_default()
                .insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(out)
    }

    fn get(&self, section: &str, key: &str) -> Option<&str> {
        self.sections.get(section).and_then(|s| s.get(key)).map(|s| s.as_str())
    }

    fn require(&self, section: &str, key: &str) -> Result<&str> {
        self.get(section, key).ok_or_else(|| {
            Error::Scenario(format!("missing required key `{key}` in section [{section}]"))
        })
    }
}

/// A fully validated scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub f: BiPoly,
    /// `ω = P dx + Q dy`.
    pub p: BiPoly,
    pub q: BiPoly,
    pub transversal: TransversalSpec,
    pub t_grid: Vec<f64>,
    /// Resampled points per traced oval (quadrature density).
    pub quad_samples: usize,
    /// Target quadrature accuracy, used for error reporting.
    pub quad_tol: f64,
    /// Threshold deciding `M_k ≡ 0` on the grid (scaled by oval length).
    pub vanish_tol: f64,
    pub fiber_tol: f64,
    pub closure_tol: f64,
    /// Minimum distance from grid points to real critical values.
    pub crit_margin: f64,
    /// Geometric ε-grid for the return-map oracle.
    pub eps_grid: Vec<f64>,
    pub eps_cap: f64,
}

fn parse_f64(s: &str, what: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| Error::Scenario(format!("cannot parse {what} from `{s}`")))
}

fn parse_pair(s: &str, what: &str) -> Result<(f64, f64)> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        return Err(Error::Scenario(format!("{what} needs two comma-separated numbers")));
    }
    Ok((parse_f64(parts[0], what)?, parse_f64(parts[1], what)?))
}

fn parse_list(s: &str, what: &str) -> Result<Vec<f64>> {
    s.split(',').map(|p| parse_f64(p, what)).collect()
}

impl Scenario {
    pub fn from_scn_str(text: &str) -> Result<Self> {
        let raw = ScenarioFile::parse(text)?;
        let name = raw.get("scenario", "name").unwrap_or("unnamed").to_string();
        let f = parse_polynomial(raw.require("scenario", "f")?)?;
        let p = parse_polynomial(raw.require("scenario", "P")?)?;
        let q = parse_polynomial(raw.require("scenario", "Q")?)?;
        let center = parse_pair(raw.require("scenario", "center")?, "center")?;
        let seed_ray = match raw.get("scenario", "seed_ray") {
            Some(s) => parse_pair(s, "seed_ray")?,
            None => (1.0, 0.0),
        };
        let bracket = match raw.get("scenario", "ray_bracket") {
            Some(s) => parse_pair(s, "ray_bracket")?,
            None => (1e-9, 10.0),
        };
        let t_min = parse_f64(raw.require("scenario", "t_min")?, "t_min")?;
        let t_max = parse_f64(raw.require("scenario", "t_max")?, "t_max")?;
        let t_samples = parse_f64(raw.require("scenario", "t_samples")?, "t_samples")? as usize;
        if t_samples < 2 {
            return Err(Error::Scenario("t_samples must be at least 2".into()));
        }
        if !(t_max > t_min) {
            return Err(Error::Scenario("t_max must exceed t_min".into()));
        }
        let t_grid = (0..t_samples)
            .map(|i| t_min + (t_max - t_min) * i as f64 / (t_samples - 1) as f64)
            .collect();

        let tol = |key: &str, default: f64| -> Result<f64> {
            match raw.get("tolerances", key) {
                Some(s) => {
                    let v = parse_f64(s, key)?;
                    if v <= 0.0 {
                        return Err(Error::Scenario(format!("{key} must be positive")));
                    }
                    Ok(v)
                }
                None => Ok(default),
            }
        };
        let quad_samples = match raw.get("tolerances", "quad_samples") {
            Some(s) => parse_f64(s, "quad_samples")? as usize,
            None => 2048,
        };

        let eps_grid = match raw.get("oracle", "eps_grid") {
            Some(s) => parse_list(s, "eps_grid")?,
            None => vec![1e-2, 5e-3, 2.5e-3, 1.25e-3],
        };
        let eps_cap = match raw.get("oracle", "eps_cap") {
            Some(s) => parse_f64(s, "eps_cap")?,
            None => 0.05,
        };

        let scenario = Scenario {
            name,
            f,
            p,
            q,
            transversal: TransversalSpec::new(center, seed_ray, bracket),
            t_grid,
            quad_samples,
            quad_tol: tol("quad_tol", 1e-9)?,
            vanish_tol: tol("vanish_tol", 1e-8)?,
            fiber_tol: tol("fiber_tol", 1e-10)?,
            closure_tol: tol("closure_tol", 1e-8)?,
            crit_margin: tol("crit_margin", 0.02)?,
            eps_grid,
            eps_cap,
        };
        scenario.transversal.validate_monotone(&scenario.f, 400)?;
        Ok(scenario)
    }

    pub fn from_file(path: &FsPath) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_scn_str(&text)
    }
}

/// Names of the scenarios shipped with the crate.
pub const BUNDLED: [&str; 5] = [
    "circle",
    "circle_k2",
    "example1",
    "elliptic_interior",
    "elliptic_exterior",
];

/// Loads one of the bundled scenario files compiled into the library.
pub fn bundled(name: &str) -> Result<Scenario> {
    let text = match name {
        "circle" => include_str!("../scenarios/circle.scn"),
        "circle_k2" => include_str!("../scenarios/circle_k2.scn"),
        "example1" => include_str!("../scenarios/example1.scn"),
        "elliptic_interior" => include_str!("../scenarios/elliptic_interior.scn"),
        "elliptic_exterior" => include_str!("../scenarios/elliptic_exterior.scn"),
        other => {
            return Err(Error::Scenario(format!(
                "unknown bundled scenario `{other}` (available: {})",
                BUNDLED.join(", ")
            )))
        }
    };
    Scenario::from_scn_str(text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_bundled_circle() {
        let s = bundled("circle").unwrap();
        assert_eq!(s.name, "circle");
        assert_eq!(s.t_grid.len(), 20);
        assert!((s.t_grid[0] - 0.1).abs() < 1e-12);
        assert!((s.t_grid[19] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn all_bundled_parse() {
        for name in BUNDLED {
            bundled(name).unwrap_or_else(|e| panic!("scenario {name}: {e}"));
        }
    }

    #[test]
    fn missing_key_is_named() {
        let text = "[scenario]\nP = 0\nQ = x\ncenter = 0,0\nt_min = 0\nt_max = 1\nt_samples = 5\n";
        match Scenario::from_scn_str(text) {
            Err(Error::Scenario(msg)) => assert!(msg.contains("`f`"), "message: {msg}"),
            other => panic!("expected scenario error, got {other:?}"),
        }
    }

    #[test]
    fn comments_and_blank_lines() {
        let text = "# top comment\n[scenario]\nname = demo # trailing\nf = x\nP = 0\nQ = x\ncenter = 0,0\nray_bracket = 0.1, 2\nt_min = 0.2\nt_max = 1\nt_samples = 3\n";
        let s = Scenario::from_scn_str(text).unwrap();
        assert_eq!(s.name, "demo");
    }
}
