//! Experiment configuration files.

use std::fmt;

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

use nalgebra::DMatrix;
use tempered::divergences::QuadratureSpec;
use tempered::experiments::{ExperimentConfig, Metric, TrueModel, DEFAULT_MC_SAMPLES, DEFAULT_REPLICATES};
use tempered::models::{BetaBernoulliSpec, LinRegSpec, ModelSpec, NormalLocationSpec};
use tempered::selection::TempGrid;

use crate::CliError;

pub const DEFAULT_SEED: u64 = 0;
pub const DEFAULT_QUAD_TOLERANCE: f64 = 1e-10;

pub const REFERENCE: &str = "\
CONFIG FILE (TOML; unknown keys are errors)

  seed            = 0          root seed; --seed overrides it
  metric          = \"tvd\"      tvd | kl | elpd (select: elpd, the default)
  n_values        = [10, 100]  sample sizes (required)
  replicates      = 200
  mc_samples      = 10000      covariate draws per replicate (regression tvd/kl)
  scale_by_sqrt_n = false      multiply summaries by sqrt(n)
  quad_tolerance  = 1e-10      absolute quadrature tolerance

  [grid]   points = [..]  or  lo = 0.01, hi = 100.0, count = 61 (log spaced; the default)

  [truth]  kind = \"normal\"              theta = 0, sigma = 1
           kind = \"student_t\"           df (> 2), loc = 0, scale = 1
           kind = \"bernoulli\"           theta
           kind = \"mixture_regression\"  beta = [0.1, 0.1, 0.1, 0.1, 0], sigma = 1,
                                         outlier_rate = 0.5, outlier_sd = 0.1

  [model]  kind = \"normal_location\"  sigma = 1, prior_mean = 0, prior_var = \"flat\" | number
           kind = \"beta_bernoulli\"   a = 1, b = 1
           kind = \"linreg\"           noise_sd = 1, prior_cov = scale | [[row], ..] (default 1)
";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricName {
    Tvd,
    Kl,
    Elpd,
}

impl From<MetricName> for Metric {
    fn from(m: MetricName) -> Metric {
        match m {
            MetricName::Tvd => Metric::Tvd,
            MetricName::Kl => Metric::Kl,
            MetricName::Elpd => Metric::Elpd,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lo: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hi: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TruthConfig {
    Normal {
        #[serde(default)]
        theta: f64,
        #[serde(default = "one")]
        sigma: f64,
    },
    StudentT {
        df: f64,
        #[serde(default)]
        loc: f64,
        #[serde(default = "one")]
        scale: f64,
    },
    Bernoulli {
        theta: f64,
    },
    MixtureRegression {
        #[serde(default = "default_beta")]
        beta: Vec<f64>,
        #[serde(default = "one")]
        sigma: f64,
        #[serde(default = "half")]
        outlier_rate: f64,
        #[serde(default = "tenth")]
        outlier_sd: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelConfig {
    NormalLocation {
        #[serde(default = "one")]
        sigma: f64,
        #[serde(default)]
        prior_mean: f64,
        #[serde(default)]
        prior_var: PriorVar,
    },
    BetaBernoulli {
        #[serde(default = "one")]
        a: f64,
        #[serde(default = "one")]
        b: f64,
    },
    Linreg {
        #[serde(default = "one")]
        noise_sd: f64,
        #[serde(default)]
        prior_cov: PriorCov,
    },
}

/// Prior variance: a positive number or the improper flat prior.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum PriorVar {
    #[default]
    Flat,
    Finite(f64),
}

impl Serialize for PriorVar {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            PriorVar::Flat => s.serialize_str("flat"),
            PriorVar::Finite(v) => s.serialize_f64(*v),
        }
    }
}

impl<'de> Deserialize<'de> for PriorVar {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = PriorVar;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("\"flat\" or a positive number")
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<PriorVar, E> {
                match v {
                    "flat" => Ok(PriorVar::Flat),
                    _ => Err(E::invalid_value(de::Unexpected::Str(v), &self)),
                }
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> Result<PriorVar, E> {
                Ok(PriorVar::Finite(v))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<PriorVar, E> {
                Ok(PriorVar::Finite(v as f64))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<PriorVar, E> {
                Ok(PriorVar::Finite(v as f64))
            }
        }
        d.deserialize_any(V)
    }
}

/// Prior covariance: a multiple of the identity or an explicit matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PriorCov {
    Scale(f64),
    Matrix(Vec<Vec<f64>>),
}

impl Default for PriorCov {
    fn default() -> Self {
        PriorCov::Scale(1.0)
    }
}

fn one() -> f64 {
    1.0
}

fn half() -> f64 {
    0.5
}

fn tenth() -> f64 {
    0.1
}

fn default_beta() -> Vec<f64> {
    vec![0.1, 0.1, 0.1, 0.1, 0.0]
}

fn default_replicates() -> usize {
    DEFAULT_REPLICATES
}

fn default_mc_samples() -> usize {
    DEFAULT_MC_SAMPLES
}

fn default_quad_tolerance() -> f64 {
    DEFAULT_QUAD_TOLERANCE
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric: Option<MetricName>,
    pub n_values: Vec<usize>,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    #[serde(default = "default_mc_samples")]
    pub mc_samples: usize,
    #[serde(default)]
    pub scale_by_sqrt_n: bool,
    #[serde(default = "default_quad_tolerance")]
    pub quad_tolerance: f64,
    #[serde(default)]
    pub grid: GridConfig,
    pub truth: TruthConfig,
    pub model: ModelConfig,
}

fn field(name: &str) -> impl Fn(tempered::Error) -> CliError + '_ {
    move |e| CliError::Config(format!("{name}: {e}"))
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<RunConfig, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    /// Fills every default so that the echo alone reproduces the run.
    pub fn resolve(mut self, seed_override: Option<u64>, default_metric: Option<MetricName>) -> Result<RunConfig, CliError> {
        self.seed = Some(seed_override.or(self.seed).unwrap_or(DEFAULT_SEED));
        self.metric = match (self.metric, default_metric) {
            (Some(m), _) | (None, Some(m)) => Some(m),
            (None, None) => return Err(CliError::Config("metric: missing field; expected tvd, kl or elpd".into())),
        };
        self.grid = GridConfig { points: Some(self.temp_grid()?.points().to_vec()), ..GridConfig::default() };
        if let ModelConfig::Linreg { prior_cov, .. } = &mut self.model {
            if let PriorCov::Scale(s) = *prior_cov {
                let dim = match &self.truth {
                    TruthConfig::MixtureRegression { beta, .. } => beta.len(),
                    _ => 1,
                };
                *prior_cov = PriorCov::Matrix((0..dim).map(|i| (0..dim).map(|j| if i == j { s } else { 0.0 }).collect()).collect());
            }
        }
        Ok(self)
    }

    fn temp_grid(&self) -> Result<TempGrid, CliError> {
        let g = &self.grid;
        match (&g.points, g.lo, g.hi, g.count) {
            (Some(points), None, None, None) => TempGrid::new(points.clone()).map_err(field("grid.points")),
            (None, lo, hi, count) => {
                let d = TempGrid::default();
                TempGrid::log_spaced(
                    lo.unwrap_or(d.points()[0]),
                    hi.unwrap_or(d.points()[d.len() - 1]),
                    count.unwrap_or(d.len()),
                )
                .map_err(field("grid"))
            }
            _ => Err(CliError::Config("grid: give either points or lo/hi/count, not both".into())),
        }
    }

    fn true_model(&self) -> Result<TrueModel, CliError> {
        match &self.truth {
            TruthConfig::Normal { theta, sigma } => TrueModel::normal_iid(*theta, *sigma),
            TruthConfig::StudentT { df, loc, scale } => TrueModel::student_t_iid(*df, *loc, *scale),
            TruthConfig::Bernoulli { theta } => TrueModel::bernoulli_iid(*theta),
            TruthConfig::MixtureRegression { beta, sigma, outlier_rate, outlier_sd } => {
                TrueModel::mixture_regression(beta.clone(), *sigma, *outlier_rate, *outlier_sd)
            }
        }
        .map_err(field("truth"))
    }

    fn model_spec(&self) -> Result<ModelSpec, CliError> {
        let spec = match &self.model {
            ModelConfig::NormalLocation { sigma, prior_mean, prior_var } => {
                let var = match prior_var {
                    PriorVar::Flat => f64::INFINITY,
                    PriorVar::Finite(v) => *v,
                };
                NormalLocationSpec::new(*sigma, *prior_mean, var).map(ModelSpec::from)
            }
            ModelConfig::BetaBernoulli { a, b } => BetaBernoulliSpec::new(*a, *b).map(ModelSpec::from),
            ModelConfig::Linreg { noise_sd, prior_cov } => match prior_cov {
                PriorCov::Scale(s) => LinRegSpec::isotropic(*noise_sd, 1, *s).map(ModelSpec::from),
                PriorCov::Matrix(rows) => {
                    let dim = rows.len();
                    if dim == 0 || rows.iter().any(|r| r.len() != dim) {
                        return Err(CliError::Config("model.prior_cov: matrix must be square and nonempty".into()));
                    }
                    let m = DMatrix::from_fn(dim, dim, |i, j| rows[i][j]);
                    LinRegSpec::new(*noise_sd, m).map(ModelSpec::from)
                }
            },
        };
        spec.map_err(field("model"))
    }

    /// Builds the harness config. Call on a resolved config.
    pub fn experiment(&self) -> Result<ExperimentConfig, CliError> {
        let metric = self.metric.ok_or_else(|| CliError::Config("metric: missing field".into()))?;
        let mut cfg = ExperimentConfig::new(
            self.true_model()?,
            self.model_spec()?,
            self.n_values.clone(),
            metric.into(),
            self.seed.unwrap_or(DEFAULT_SEED),
        );
        cfg.replicates = self.replicates;
        cfg.mc_samples = self.mc_samples;
        cfg.scale_by_sqrt_n = self.scale_by_sqrt_n;
        cfg.grid = self.temp_grid()?;
        cfg.quadrature = QuadratureSpec::new(self.quad_tolerance).map_err(field("quad_tolerance"))?;
        cfg.validate_parameters().map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate_compatibility().map_err(|e| CliError::Incompatible(e.to_string()))?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String, CliError> {
        toml::to_string(self).map_err(|e| CliError::Internal(format!("cannot echo config: {e}")))
    }
}
