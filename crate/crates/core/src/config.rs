//! Flat TOML run configuration.
//!
//! ```toml
//! delta_e = 11.0
//! g = 0.3386
//! spin = 1
//! n0 = 100000
//! delta_n = 15
//! ```

use serde::{Deserialize, Serialize};

use crate::dressed::ResonanceSpec;
use crate::error::{invalid, Error, Result};
use crate::model::{coupling_from_g, recommended_n_max, ModelParams, Spin};

/// Every key the CLI understands. Unknown keys are rejected.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub delta_e: Option<f64>,
    pub coupling_u: Option<f64>,
    pub g: Option<f64>,
    pub spin: Option<f64>,
    pub n0: Option<usize>,
    pub n_max: Option<usize>,
    pub delta_n: Option<usize>,
    /// Hermann–Swain order; Δn = 2k + 1 when delta_n is absent.
    pub k: Option<usize>,
    pub n0_list: Option<Vec<usize>>,
    pub g_bracket: Option<[f64; 2]>,
    pub t_max: Option<f64>,
    pub t_steps: Option<usize>,
    /// g sweep for the dressed-energy table.
    pub g_min: Option<f64>,
    pub g_max: Option<f64>,
    pub g_steps: Option<usize>,
    /// Half-width in n of the spectrum and fit windows.
    pub window: Option<usize>,
    /// ε₀ − ε±₁ for detuned three-state runs.
    pub detuning: Option<f64>,
}

pub const DEFAULT_DELTA_E: f64 = 11.0;
pub const DEFAULT_DELTA_N: usize = 15;
pub const DEFAULT_N0: usize = 100_000;

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| invalid(format!("config: {}", e.message())))?;
        cfg.check()?;
        Ok(cfg)
    }

    fn check(&self) -> Result<()> {
        if self.coupling_u.is_some() && self.g.is_some() {
            return Err(invalid("config: give either `g` or `coupling_u`, not both"));
        }
        if self.delta_n.is_some() && self.k.is_some() {
            let spec = ResonanceSpec::from_k(self.k.unwrap_or(0));
            if Some(spec.delta_n) != self.delta_n {
                return Err(invalid("config: `delta_n` and `k` disagree"));
            }
        }
        if let Some([lo, hi]) = self.g_bracket {
            if !(lo > 0.0 && hi > lo) {
                return Err(invalid(format!("config: `g_bracket` = [{lo}, {hi}] must satisfy 0 < lo < hi")));
            }
        }
        if let Some(t) = self.t_max {
            if !(t >= 0.0 && t.is_finite()) {
                return Err(invalid("config: `t_max` must be finite and >= 0"));
            }
        }
        if self.t_steps == Some(0) {
            return Err(invalid("config: `t_steps` must be >= 1"));
        }
        if self.g_steps == Some(0) {
            return Err(invalid("config: `g_steps` must be >= 1"));
        }
        Ok(())
    }

    pub fn delta_e(&self) -> f64 {
        self.delta_e.unwrap_or(DEFAULT_DELTA_E)
    }

    pub fn spin(&self) -> Result<Spin> {
        self.spin.map_or(Ok(Spin::ONE), |s| {
            Spin::new(s).map_err(|e| match e {
                Error::InvalidParameter(m) => invalid(format!("config: `spin`: {m}")),
                other => other,
            })
        })
    }

    pub fn n0(&self) -> usize {
        self.n0.unwrap_or(DEFAULT_N0)
    }

    pub fn resonance_spec(&self) -> Result<ResonanceSpec> {
        match (self.delta_n, self.k) {
            (Some(dn), _) => ResonanceSpec::new(dn).map_err(|_| invalid(format!("config: `delta_n` = {dn} must be odd"))),
            (None, Some(k)) => Ok(ResonanceSpec::from_k(k)),
            (None, None) => ResonanceSpec::new(DEFAULT_DELTA_N),
        }
    }

    pub fn n_max(&self, delta_n: usize) -> usize {
        self.n_max.unwrap_or_else(|| recommended_n_max(self.n0(), delta_n))
    }

    /// Coupling U if the config fixes one.
    pub fn coupling(&self) -> Result<Option<f64>> {
        match (self.coupling_u, self.g) {
            (Some(u), _) => Ok(Some(u)),
            (None, Some(g)) => coupling_from_g(g, self.n0(), self.delta_e()).map(Some),
            (None, None) => Ok(None),
        }
    }

    /// Model parameters; U defaults to 0 when neither key is set.
    pub fn model_params(&self) -> Result<ModelParams> {
        let dn = self.resonance_spec()?.delta_n;
        ModelParams::new(
            self.delta_e(),
            self.coupling()?.unwrap_or(0.0),
            self.spin()?,
            self.n0(),
            self.n_max(dn),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_flat_keys() {
        let c = RunConfig::from_toml_str("delta_e = 5.0\ng = 0.2\nn0 = 400\nn_max = 1200\ndelta_n = 7\n").unwrap();
        let p = c.model_params().unwrap();
        assert_eq!(p.n_max, 1200);
        assert!((p.g() - 0.2).abs() < 1e-15);
        assert_eq!(c.resonance_spec().unwrap().delta_n, 7);
    }

    #[test]
    fn unknown_key_named() {
        let err = RunConfig::from_toml_str("delta_e = 5.0\nbogus = 1\n").unwrap_err();
        assert!(format!("{err:?}").contains("bogus"));
    }

    #[test]
    fn both_couplings_rejected() {
        assert!(RunConfig::from_toml_str("g = 0.1\ncoupling_u = 0.01\n").is_err());
    }

    #[test]
    fn k_sets_delta_n() {
        let c = RunConfig::from_toml_str("k = 12\n").unwrap();
        assert_eq!(c.resonance_spec().unwrap().delta_n, 25);
        assert!(RunConfig::from_toml_str("k = 12\ndelta_n = 15\n").is_err());
    }

    #[test]
    fn defaults_are_reference_model() {
        let c = RunConfig::from_toml_str("").unwrap();
        let p = c.model_params().unwrap();
        assert_eq!((p.delta_e, p.n0, p.spin), (11.0, 100_000, Spin::ONE));
        assert_eq!(p.coupling_u, 0.0);
    }
}
