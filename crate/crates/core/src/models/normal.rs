use crate::dists::{std_normal_cdf, DensityKernel, Normal};
use crate::error::{invalid, Error, Result};

use super::{check_temperature, Dataset, PosteriorSummary};

/// Normal likelihood with known sd and a normal (or flat) prior on the mean.
///
/// The flat prior is stored as prior precision zero, so the τ-posterior mean is
/// exactly the sample mean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalLocationSpec {
    sigma: f64,
    prior_mean: f64,
    prior_precision: f64,
}

impl NormalLocationSpec {
    /// `prior_var = f64::INFINITY` selects the flat prior.
    pub fn new(sigma: f64, prior_mean: f64, prior_var: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(invalid(format!("likelihood sd must be positive, got {sigma}")));
        }
        if !prior_mean.is_finite() {
            return Err(invalid(format!("prior mean must be finite, got {prior_mean}")));
        }
        if !(prior_var > 0.0) {
            return Err(invalid(format!("prior variance must be positive, got {prior_var}")));
        }
        let prior_precision = if prior_var == f64::INFINITY { 0.0 } else { 1.0 / prior_var };
        Ok(NormalLocationSpec { sigma, prior_mean, prior_precision })
    }

    pub fn flat(sigma: f64) -> Result<Self> {
        Self::new(sigma, 0.0, f64::INFINITY)
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn prior_mean(&self) -> f64 {
        self.prior_mean
    }

    pub fn prior_var(&self) -> f64 {
        if self.is_flat() {
            f64::INFINITY
        } else {
            1.0 / self.prior_precision
        }
    }

    pub fn is_flat(&self) -> bool {
        self.prior_precision == 0.0
    }

    /// Posterior (mean, variance) from the sample size and the sum of the data.
    pub(crate) fn posterior_from_stats(&self, n: usize, sum: f64, tau: f64) -> (f64, f64) {
        let s2 = self.sigma * self.sigma;
        let weight = n as f64 * tau;
        let ybar = sum / n as f64;
        let var = 1.0 / (weight / s2 + self.prior_precision);
        let mean = if self.is_flat() {
            ybar
        } else {
            var * (self.prior_mean * self.prior_precision + weight * ybar / s2)
        };
        (mean, var)
    }

    fn predictive_from(&self, mean: f64, var: f64) -> DensityKernel {
        DensityKernel::Normal(Normal::new(mean, (self.sigma * self.sigma + var).sqrt()).expect("positive variance"))
    }

    pub fn posterior(&self, data: &Dataset, tau: f64) -> Result<PosteriorSummary> {
        check_temperature(tau)?;
        let values = data.as_univariate()?;
        let (mean, var) = self.posterior_from_stats(values.len(), values.iter().sum(), tau);
        Ok(PosteriorSummary::NormalLocation { mean, var })
    }

    pub fn predictive(&self, data: &Dataset, tau: f64) -> Result<DensityKernel> {
        match self.posterior(data, tau)? {
            PosteriorSummary::NormalLocation { mean, var } => Ok(self.predictive_from(mean, var)),
            _ => unreachable!(),
        }
    }

    /// Refits on the data with observation `i` deleted.
    pub fn loo_predictive(&self, data: &Dataset, tau: f64, i: usize) -> Result<DensityKernel> {
        check_temperature(tau)?;
        data.as_univariate()?;
        self.predictive(&data.without(i)?, tau)
    }

    pub(crate) fn loo_log_scores(&self, data: &Dataset, tau: f64) -> Result<Vec<f64>> {
        let values = data.as_univariate()?;
        let n = values.len();
        let total: f64 = values.iter().sum();
        Ok(values
            .iter()
            .map(|y| {
                let (mean, var) = self.posterior_from_stats(n - 1, total - y, tau);
                self.predictive_from(mean, var).log_density(*y)
            })
            .collect())
    }

    /// Likelihood at the sample mean.
    pub fn plug_in_predictive(&self, data: &Dataset) -> Result<DensityKernel> {
        let values = data.as_univariate()?;
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        DensityKernel::normal(mean, self.sigma)
    }

    pub fn prior_predictive(&self) -> Result<DensityKernel> {
        if self.is_flat() {
            return Err(Error::ImproperPrior);
        }
        DensityKernel::normal(self.prior_mean, (self.sigma * self.sigma + self.prior_var()).sqrt())
    }

    pub fn posterior_mass_outside(&self, data: &Dataset, tau: f64, center: f64, radius: f64) -> Result<f64> {
        if !(radius > 0.0) {
            return Err(invalid(format!("radius must be positive, got {radius}")));
        }
        let (mean, var) = match self.posterior(data, tau)? {
            PosteriorSummary::NormalLocation { mean, var } => (mean, var),
            _ => unreachable!(),
        };
        if radius == f64::INFINITY {
            return Ok(0.0);
        }
        let sd = var.sqrt();
        let below = std_normal_cdf((center - radius - mean) / sd);
        let above = std_normal_cdf(-(center + radius - mean) / sd);
        Ok((below + above).clamp(0.0, 1.0))
    }
}
