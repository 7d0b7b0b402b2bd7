use serde::Deserialize;

use crate::error::{Error, Result};

/// One record holding every tunable tolerance, branch and grid choice.
///
/// All operations that compare floats, pick a logarithm branch or snap
/// time coordinates read from a `Config`; `Config::default()` gives the
/// documented defaults.
#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    /// Absolute equality epsilon on unit-scale data.
    pub eq_eps: f64,
    /// Norm threshold below which inversion reports division by zero.
    pub inverse_eps: f64,
    /// Below this imaginary norm exp/Ln switch to series evaluation.
    pub small_angle: f64,
    /// Generator index that fixes the Ln branch on the negative real axis.
    pub ln_branch_gen: usize,
    /// Optional snap-to-grid step for bar-word time coordinates.
    pub time_grid: Option<f64>,
    /// Maximum nesting depth for iterated B constructions.
    pub depth_cap: usize,
    /// Largest simplicial degree a form family is defined for.
    pub form_family_cap: usize,
    /// Exponent of the scale normalization in the plaquette curvature.
    pub curvature_exponent: f64,
    /// Maximum segment length accepted by the holonomy quadrature.
    pub h_max: f64,
    /// Singular-value style tolerance for matrix ranks.
    pub rank_tol: f64,
    /// Guard on dense cochain matrix sizes (entries).
    pub max_matrix_entries: usize,
    /// Samples per plaquette edge in curvature estimation.
    pub plaquette_samples: usize,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            eq_eps: 1e-12,
            inverse_eps: 1e-300,
            small_angle: 1e-8,
            ln_branch_gen: 1,
            time_grid: Some(2f64.powi(-20)),
            depth_cap: 3,
            form_family_cap: 6,
            curvature_exponent: 2.0,
            h_max: 0.1,
            rank_tol: 1e-10,
            max_matrix_entries: 50_000_000,
            plaquette_samples: 64,
        }
    }
}

impl Config {
    /// Loads a TOML config file.
    pub fn from_path(path: &std::path::Path) -> Result<Config> {
        let text = std::fs::read_to_string(path)?;
        toml::from_str(&text).map_err(|e| Error::parse(format!("config: {e}")))
    }

    /// Loads `--config FILE` if given, else the `CAYLEY_WRAP_CONFIG`
    /// env var, else defaults.
    pub fn resolve(explicit: Option<&std::path::Path>) -> Result<Config> {
        if let Some(p) = explicit {
            return Config::from_path(p);
        }
        if let Ok(p) = std::env::var("CAYLEY_WRAP_CONFIG") {
            return Config::from_path(std::path::Path::new(&p));
        }
        Ok(Config::default())
    }

    /// Snaps a time coordinate to the configured grid, if any.
    pub fn snap_time(&self, t: f64) -> f64 {
        match self.time_grid {
            Some(g) if g > 0.0 => (t / g).round() * g,
            _ => t,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_through_toml() {
        let cfg: Config = toml::from_str("eq_eps = 1e-10\nln_branch_gen = 2\n").unwrap();
        assert_eq!(cfg.eq_eps, 1e-10);
        assert_eq!(cfg.ln_branch_gen, 2);
        assert_eq!(cfg.depth_cap, Config::default().depth_cap);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(toml::from_str::<Config>("nope = 1\n").is_err());
    }

    #[test]
    fn snap_makes_nearby_times_equal() {
        let cfg = Config::default();
        let a = cfg.snap_time(0.25 + 1e-9);
        let b = cfg.snap_time(0.25 - 1e-9);
        assert_eq!(a, b);
    }
}
