//! TOML run configuration. Every field is optional; anything left out
//! falls back to the bivariate OU-mixture study setup. Keys may be written
//! as tables or as dotted keys (`rates.p = 2`). Command-line flags take
//! precedence over the file.

use std::fs;
use std::path::{Path, PathBuf};

use ctspec_core::rates::{Exponent, RatePlan};
use ctspec_core::OuMixtureModel;
use serde::Deserialize;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub model: ModelSection,
    #[serde(default)]
    pub rates: RatesSection,
    #[serde(default)]
    pub kernel: Option<String>,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub threads: Option<usize>,
    #[serde(default)]
    pub mc: McSection,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub beta: Option<[f64; 4]>,
    pub alpha: Option<[f64; 4]>,
}

/// A number or a string such as `"-1/3"`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum ExponentValue {
    Integer(i64),
    Float(f64),
    Text(String),
}

impl ExponentValue {
    pub fn to_exponent(&self) -> CliResult<Exponent> {
        Ok(match self {
            ExponentValue::Integer(i) => Exponent::from(*i),
            // Display gives the shortest round-trip decimal, which parses exactly.
            ExponentValue::Float(x) => x.to_string().parse()?,
            ExponentValue::Text(s) => s.parse()?,
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RatesSection {
    pub paper_rates: Option<bool>,
    pub p: Option<ExponentValue>,
    pub q: Option<ExponentValue>,
    pub bn_const: Option<f64>,
    pub bn_exp: Option<ExponentValue>,
    pub rho_const: Option<f64>,
    pub rho_exp: Option<ExponentValue>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub freq_min: Option<f64>,
    pub freq_max: Option<f64>,
    pub freq_step: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McSection {
    pub n: Option<usize>,
    pub replicates: Option<usize>,
    pub profile: Option<String>,
    pub level: Option<f64>,
    pub out_dir: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text).map_err(|message| CliError::Config {
            path: path.into(),
            message,
        })
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.message().to_string())
    }

    /// Model parameters, defaulting to the shipped OU mixture.
    pub fn model(&self) -> CliResult<OuMixtureModel> {
        let default = OuMixtureModel::default();
        Ok(OuMixtureModel::new(
            self.model.beta.unwrap_or(default.beta),
            self.model.alpha.unwrap_or(default.alpha),
        )?)
    }
}

/// Rate-plan settings merged from flags and config.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RateSettings {
    pub paper_rates: bool,
    pub p: Option<Exponent>,
    pub q: Option<Exponent>,
    pub bn_const: Option<f64>,
    pub bn_exp: Option<Exponent>,
    pub rho_const: Option<f64>,
    pub rho_exp: Option<Exponent>,
}

impl RateSettings {
    pub fn from_section(section: &RatesSection) -> CliResult<Self> {
        let conv =
            |v: &Option<ExponentValue>| v.as_ref().map(ExponentValue::to_exponent).transpose();
        Ok(Self {
            paper_rates: section.paper_rates.unwrap_or(false),
            p: conv(&section.p)?,
            q: conv(&section.q)?,
            bn_const: section.bn_const,
            bn_exp: conv(&section.bn_exp)?,
            rho_const: section.rho_const,
            rho_exp: conv(&section.rho_exp)?,
        })
    }

    /// Builds the plan: the fixed `(¼ n^{-1/4}, 4 n^{1/6})` plan when
    /// `paper_rates` is set or `study_default` applies and nothing else was
    /// asked for, otherwise the optimal exponents for `(p, q)`, with any
    /// explicit constant or exponent overriding either.
    pub fn plan(&self, study_default: bool) -> CliResult<RatePlan> {
        let customized = self.p.is_some() || self.q.is_some();
        let mut plan = if self.paper_rates || (study_default && !customized) {
            let mut plan = RatePlan::study_default();
            plan.p = self.p.unwrap_or(plan.p);
            plan.q = self.q.unwrap_or(plan.q);
            plan
        } else {
            RatePlan::optimal(
                self.p.unwrap_or(Exponent::from(2)),
                self.q.unwrap_or(Exponent::from(2)),
            )?
        };
        plan.bn_constant = self.bn_const.unwrap_or(plan.bn_constant);
        plan.bn_exponent = self.bn_exp.unwrap_or(plan.bn_exponent);
        plan.rho_constant = self.rho_const.unwrap_or(plan.rho_constant);
        plan.rho_exponent = self.rho_exp.unwrap_or(plan.rho_exponent);
        plan.validate()?;
        Ok(plan)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_uses_defaults() {
        let cfg = RunConfig::parse("").unwrap();
        assert_eq!(cfg.model().unwrap(), OuMixtureModel::default());
        let plan = RateSettings::from_section(&cfg.rates)
            .unwrap()
            .plan(true)
            .unwrap();
        assert_eq!(plan, RatePlan::study_default());
    }

    #[test]
    fn dotted_keys_and_exponent_forms() {
        let cfg = RunConfig::parse(
            "rates.p = 3\nrates.q = \"3/2\"\nrates.bn_exp = -0.3\nmc.n = 1000\nkernel = \"bartlett\"\n",
        )
        .unwrap();
        let settings = RateSettings::from_section(&cfg.rates).unwrap();
        assert_eq!(settings.p, Some(Exponent::from(3)));
        assert_eq!(settings.q, Some(Exponent::ratio(3, 2)));
        assert_eq!(settings.bn_exp, Some(Exponent::ratio(-3, 10)));
        assert_eq!(cfg.mc.n, Some(1000));
        assert_eq!(cfg.kernel.as_deref(), Some("bartlett"));
        let plan = settings.plan(true).unwrap();
        assert_eq!(plan.bn_exponent, Exponent::ratio(-3, 10));
        // p = 3, q = 3/2: ρ exponent q/(p+q+2pq) = (3/2)/(27/2) = 1/9
        assert_eq!(plan.rho_exponent, Exponent::ratio(1, 9));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = RunConfig::parse("rates.pp = 2").unwrap_err();
        assert!(err.contains("pp"), "{err}");
    }

    #[test]
    fn user_data_default_is_optimal_plan() {
        let plan = RateSettings::default().plan(false).unwrap();
        assert_eq!(plan.bn_exponent, Exponent::ratio(-1, 3));
        assert_eq!(plan.rho_exponent, Exponent::ratio(1, 6));
    }
}
