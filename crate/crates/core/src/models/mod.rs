//! Tempered conjugate inference.
//!
//! Each family raises its likelihood to a temperature τ > 0 and keeps a
//! closed-form posterior. Predictives integrate the likelihood against that
//! posterior; the plug-in and prior predictives are the τ → ∞ and τ → 0
//! limits and are separate operations. τ itself must be finite and positive.

mod beta;
mod linreg;
mod normal;

pub use beta::BetaBernoulliSpec;
pub use linreg::LinRegSpec;
pub use normal::NormalLocationSpec;

use nalgebra::{DMatrix, DVector};

use crate::dists::DensityKernel;
use crate::error::{Error, Result};

/// Observed data.
#[derive(Debug, Clone, PartialEq)]
pub enum Dataset {
    Univariate(Vec<f64>),
    Regression { x: DMatrix<f64>, y: DVector<f64> },
}

impl Dataset {
    pub fn univariate(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::TooFewObservations { needed: 1, got: 0 });
        }
        Ok(Dataset::Univariate(values))
    }

    pub fn regression(x: DMatrix<f64>, y: DVector<f64>) -> Result<Self> {
        if y.is_empty() {
            return Err(Error::TooFewObservations { needed: 1, got: 0 });
        }
        if x.nrows() != y.len() {
            return Err(Error::DataMismatch(format!(
                "design has {} rows but response has {} entries",
                x.nrows(),
                y.len()
            )));
        }
        Ok(Dataset::Regression { x, y })
    }

    pub fn len(&self) -> usize {
        match self {
            Dataset::Univariate(v) => v.len(),
            Dataset::Regression { y, .. } => y.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The `i`th response value.
    pub fn response(&self, i: usize) -> f64 {
        match self {
            Dataset::Univariate(v) => v[i],
            Dataset::Regression { y, .. } => y[i],
        }
    }

    /// A copy with observation `i` removed.
    pub fn without(&self, i: usize) -> Result<Dataset> {
        let n = self.len();
        if i >= n {
            return Err(Error::DataMismatch(format!("index {i} out of range for {n} observations")));
        }
        if n < 2 {
            return Err(Error::TooFewObservations { needed: 2, got: n });
        }
        Ok(match self {
            Dataset::Univariate(v) => {
                let mut kept = v.clone();
                kept.remove(i);
                Dataset::Univariate(kept)
            }
            Dataset::Regression { x, y } => Dataset::Regression {
                x: x.clone().remove_row(i),
                y: y.clone().remove_row(i),
            },
        })
    }

    pub(crate) fn as_univariate(&self) -> Result<&[f64]> {
        match self {
            Dataset::Univariate(v) => Ok(v),
            Dataset::Regression { .. } => Err(Error::DataMismatch("expected univariate data".into())),
        }
    }

    pub(crate) fn as_regression(&self) -> Result<(&DMatrix<f64>, &DVector<f64>)> {
        match self {
            Dataset::Regression { x, y } => Ok((x, y)),
            Dataset::Univariate(_) => Err(Error::DataMismatch("expected regression data".into())),
        }
    }
}

/// Closed-form tempered posterior.
#[derive(Debug, Clone, PartialEq)]
pub enum PosteriorSummary {
    NormalLocation { mean: f64, var: f64 },
    BetaBernoulli { a: f64, b: f64 },
    LinReg { mean: DVector<f64>, cov: DMatrix<f64> },
}

pub(crate) fn check_temperature(tau: f64) -> Result<()> {
    if tau > 0.0 && tau.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidTemperature(tau))
    }
}

/// A conjugate model family together with its prior.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelSpec {
    NormalLocation(NormalLocationSpec),
    BetaBernoulli(BetaBernoulliSpec),
    LinReg(LinRegSpec),
}

fn need_covariate(covariate: Option<&[f64]>) -> Result<&[f64]> {
    covariate.ok_or_else(|| Error::DataMismatch("regression predictive needs a covariate vector".into()))
}

impl ModelSpec {
    pub fn posterior(&self, data: &Dataset, tau: f64) -> Result<PosteriorSummary> {
        match self {
            ModelSpec::NormalLocation(s) => s.posterior(data, tau),
            ModelSpec::BetaBernoulli(s) => s.posterior(data, tau),
            ModelSpec::LinReg(s) => s.posterior(data, tau),
        }
    }

    /// Posterior predictive; regression models need the new covariate.
    pub fn predictive(&self, data: &Dataset, tau: f64, covariate: Option<&[f64]>) -> Result<DensityKernel> {
        match self {
            ModelSpec::NormalLocation(s) => s.predictive(data, tau),
            ModelSpec::BetaBernoulli(s) => s.predictive(data, tau),
            ModelSpec::LinReg(s) => s.predictive(data, tau, need_covariate(covariate)?),
        }
    }

    /// Predictive for observation `i` fitted on the other `n − 1`.
    /// Regression predictives are evaluated at the held-out row.
    pub fn loo_predictive(&self, data: &Dataset, tau: f64, i: usize) -> Result<DensityKernel> {
        match self {
            ModelSpec::NormalLocation(s) => s.loo_predictive(data, tau, i),
            ModelSpec::BetaBernoulli(s) => s.loo_predictive(data, tau, i),
            ModelSpec::LinReg(s) => s.loo_predictive(data, tau, i),
        }
    }

    pub fn plug_in_predictive(&self, data: &Dataset, covariate: Option<&[f64]>) -> Result<DensityKernel> {
        match self {
            ModelSpec::NormalLocation(s) => s.plug_in_predictive(data),
            ModelSpec::BetaBernoulli(s) => s.plug_in_predictive(data),
            ModelSpec::LinReg(s) => s.plug_in_predictive(data, need_covariate(covariate)?),
        }
    }

    pub fn prior_predictive(&self, covariate: Option<&[f64]>) -> Result<DensityKernel> {
        match self {
            ModelSpec::NormalLocation(s) => s.prior_predictive(),
            ModelSpec::BetaBernoulli(s) => s.prior_predictive(),
            ModelSpec::LinReg(s) => s.prior_predictive(need_covariate(covariate)?),
        }
    }

    /// Posterior probability that the parameter lies farther than `radius`
    /// from `center`. Only the scalar-parameter families support this.
    pub fn posterior_mass_outside(&self, data: &Dataset, tau: f64, center: f64, radius: f64) -> Result<f64> {
        match self {
            ModelSpec::NormalLocation(s) => s.posterior_mass_outside(data, tau, center, radius),
            ModelSpec::BetaBernoulli(s) => s.posterior_mass_outside(data, tau, center, radius),
            ModelSpec::LinReg(_) => Err(Error::Unsupported(
                "posterior mass probe is defined for scalar-parameter models only".into(),
            )),
        }
    }

    /// Minimum sample size for which leave-one-out scoring is defined.
    pub fn min_loo_size(&self) -> usize {
        match self {
            ModelSpec::NormalLocation(_) | ModelSpec::BetaBernoulli(_) => 2,
            ModelSpec::LinReg(s) => s.dim() + 1,
        }
    }

    /// Log predictive score of every held-out point, in index order.
    ///
    /// Uses downdated sufficient statistics instead of refitting each fold;
    /// [`ModelSpec::loo_predictive`] is the refit definition it must agree with.
    pub fn loo_log_scores(&self, data: &Dataset, tau: f64) -> Result<Vec<f64>> {
        check_temperature(tau)?;
        let n = data.len();
        let needed = self.min_loo_size();
        if n < needed {
            return Err(Error::TooFewObservations { needed, got: n });
        }
        match self {
            ModelSpec::NormalLocation(s) => s.loo_log_scores(data, tau),
            ModelSpec::BetaBernoulli(s) => s.loo_log_scores(data, tau),
            ModelSpec::LinReg(s) => s.loo_log_scores(data, tau),
        }
    }
}

impl From<NormalLocationSpec> for ModelSpec {
    fn from(s: NormalLocationSpec) -> Self {
        ModelSpec::NormalLocation(s)
    }
}

impl From<BetaBernoulliSpec> for ModelSpec {
    fn from(s: BetaBernoulliSpec) -> Self {
        ModelSpec::BetaBernoulli(s)
    }
}

impl From<LinRegSpec> for ModelSpec {
    fn from(s: LinRegSpec) -> Self {
        ModelSpec::LinReg(s)
    }
}

impl ModelSpec {
    /// Predictive implied by an already computed posterior. Lets callers reuse
    /// one fit across many covariates.
    pub fn predictive_from_posterior(
        &self,
        posterior: &PosteriorSummary,
        covariate: Option<&[f64]>,
    ) -> Result<DensityKernel> {
        match (self, posterior) {
            (ModelSpec::NormalLocation(s), PosteriorSummary::NormalLocation { mean, var }) => {
                DensityKernel::normal(*mean, (s.sigma() * s.sigma() + var).sqrt())
            }
            (ModelSpec::BetaBernoulli(_), PosteriorSummary::BetaBernoulli { a, b }) => {
                DensityKernel::beta_binomial(1, *a, *b)
            }
            (ModelSpec::LinReg(s), PosteriorSummary::LinReg { mean, cov }) => {
                let at = DVector::from_column_slice(need_covariate(covariate)?);
                if at.len() != s.dim() {
                    return Err(Error::DataMismatch(format!(
                        "covariate has length {} but the model is {}-dimensional",
                        at.len(),
                        s.dim()
                    )));
                }
                let var = (cov * &at).dot(&at).max(0.0) + s.noise_sd() * s.noise_sd();
                DensityKernel::normal(mean.dot(&at), var.sqrt())
            }
            _ => Err(Error::DataMismatch("posterior does not belong to this model family".into())),
        }
    }
}
