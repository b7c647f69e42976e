//! Data generators, the seeded replication harness, and summaries of its
//! output.

mod harness;
mod summary;

pub use harness::{
    replicate_values, run_replicates, run_replicates_with, tau_selection_histogram, Execution, ExperimentConfig,
    Metric, DEFAULT_MC_SAMPLES, DEFAULT_REPLICATES, ReplicateRow, ReplicateTable, SelectionRow,
};
pub use summary::{flatness, summarize, FlatnessReport, FlatnessRow, SummaryCurve, SummaryPoint};

use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, StandardNormal};

use crate::dists::{DensityKernel, Normal};
use crate::error::{invalid, Error, Result};
use crate::models::Dataset;
use crate::rng::RandomSource;

/// The data-generating process.
#[derive(Debug, Clone, PartialEq)]
pub enum TrueModel {
    NormalIid { theta: f64, sigma: f64 },
    StudentTIid { df: f64, loc: f64, scale: f64 },
    BernoulliIid { theta: f64 },
    /// Covariates X ~ N(0, I_p); y | X ~ (1 − ε)N(Xᵀβ*, σ*²) + εN(0, δ²).
    MixtureRegression { beta: Vec<f64>, sigma: f64, outlier_rate: f64, outlier_sd: f64 },
}

impl TrueModel {
    pub fn normal_iid(theta: f64, sigma: f64) -> Result<Self> {
        Normal::new(theta, sigma)?;
        Ok(TrueModel::NormalIid { theta, sigma })
    }

    pub fn student_t_iid(df: f64, loc: f64, scale: f64) -> Result<Self> {
        if !(df > 2.0) {
            return Err(invalid(format!("student-t generator needs df > 2, got {df}")));
        }
        DensityKernel::student_t(df, loc, scale)?;
        Ok(TrueModel::StudentTIid { df, loc, scale })
    }

    pub fn bernoulli_iid(theta: f64) -> Result<Self> {
        DensityKernel::bernoulli(theta)?;
        Ok(TrueModel::BernoulliIid { theta })
    }

    pub fn mixture_regression(beta: Vec<f64>, sigma: f64, outlier_rate: f64, outlier_sd: f64) -> Result<Self> {
        if beta.is_empty() || beta.iter().any(|b| !b.is_finite()) {
            return Err(invalid("regression coefficients must be a nonempty finite vector"));
        }
        if !(0.0..=1.0).contains(&outlier_rate) {
            return Err(invalid(format!("outlier rate must lie in [0, 1], got {outlier_rate}")));
        }
        Normal::new(0.0, sigma)?;
        Normal::new(0.0, outlier_sd)?;
        Ok(TrueModel::MixtureRegression { beta, sigma, outlier_rate, outlier_sd })
    }

    /// Regression setup with ε = 0.5, δ = √0.01, β* = (0.1, 0.1, 0.1, 0.1, 0), σ* = 1.
    pub fn default_regression() -> Self {
        TrueModel::MixtureRegression {
            beta: vec![0.1, 0.1, 0.1, 0.1, 0.0],
            sigma: 1.0,
            outlier_rate: 0.5,
            outlier_sd: 0.01f64.sqrt(),
        }
    }

    pub fn is_regression(&self) -> bool {
        matches!(self, TrueModel::MixtureRegression { .. })
    }

    /// Covariate dimension for regression generators.
    pub fn dim(&self) -> Option<usize> {
        match self {
            TrueModel::MixtureRegression { beta, .. } => Some(beta.len()),
            _ => None,
        }
    }

    /// `n` independent draws.
    pub fn generate(&self, n: usize, rng: &mut RandomSource) -> Result<Dataset> {
        if n == 0 {
            return Err(Error::TooFewObservations { needed: 1, got: 0 });
        }
        match self {
            TrueModel::MixtureRegression { beta, .. } => {
                let p = beta.len();
                let mut x = DMatrix::zeros(n, p);
                let mut y = DVector::zeros(n);
                for i in 0..n {
                    let row = draw_covariate(p, rng);
                    let law = self.true_predictive(Some(&row))?;
                    y[i] = law.sample(rng);
                    x.row_mut(i).copy_from_slice(&row);
                }
                Dataset::regression(x, y)
            }
            _ => {
                let law = self.true_predictive(None)?;
                Dataset::univariate((0..n).map(|_| law.sample(rng)).collect())
            }
        }
    }

    /// The data density itself: for iid generators it does not depend on the
    /// sample; for regression it is the conditional law at `covariate`.
    pub fn true_predictive(&self, covariate: Option<&[f64]>) -> Result<DensityKernel> {
        match self {
            TrueModel::NormalIid { theta, sigma } => DensityKernel::normal(*theta, *sigma),
            TrueModel::StudentTIid { df, loc, scale } => DensityKernel::student_t(*df, *loc, *scale),
            TrueModel::BernoulliIid { theta } => DensityKernel::bernoulli(*theta),
            TrueModel::MixtureRegression { beta, sigma, outlier_rate, outlier_sd } => {
                let at = covariate
                    .ok_or_else(|| Error::DataMismatch("regression truth needs a covariate vector".into()))?;
                if at.len() != beta.len() {
                    return Err(Error::DataMismatch(format!(
                        "covariate has length {} but the generator is {}-dimensional",
                        at.len(),
                        beta.len()
                    )));
                }
                let signal: f64 = beta.iter().zip(at).map(|(b, x)| b * x).sum();
                DensityKernel::normal_mixture(
                    vec![1.0 - outlier_rate, *outlier_rate],
                    vec![Normal::new(signal, *sigma)?, Normal::new(0.0, *outlier_sd)?],
                )
            }
        }
    }
}

/// One standard p-variate normal covariate vector.
pub fn draw_covariate(p: usize, rng: &mut RandomSource) -> Vec<f64> {
    (0..p).map(|_| StandardNormal.sample(rng)).collect()
}
