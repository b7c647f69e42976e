use crate::dists::{Beta, BetaBinomial, DensityKernel};
use crate::error::{invalid, Error, Result};

use super::{check_temperature, Dataset, PosteriorSummary};

/// Bernoulli likelihood with a Beta(α, β) prior.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaBernoulliSpec {
    a: f64,
    b: f64,
}

fn count_successes(values: &[f64]) -> Result<(usize, usize)> {
    let mut successes = 0;
    for v in values {
        match *v {
            1.0 => successes += 1,
            0.0 => {}
            other => return Err(Error::DataMismatch(format!("beta-Bernoulli data must be 0 or 1, got {other}"))),
        }
    }
    Ok((successes, values.len() - successes))
}

impl BetaBernoulliSpec {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite() && b > 0.0 && b.is_finite()) {
            return Err(invalid(format!("beta prior shapes must be positive, got ({a}, {b})")));
        }
        Ok(BetaBernoulliSpec { a, b })
    }

    pub fn prior_a(&self) -> f64 {
        self.a
    }

    pub fn prior_b(&self) -> f64 {
        self.b
    }

    fn shapes(&self, successes: usize, failures: usize, tau: f64) -> (f64, f64) {
        (tau * successes as f64 + self.a, tau * failures as f64 + self.b)
    }

    pub fn posterior(&self, data: &Dataset, tau: f64) -> Result<PosteriorSummary> {
        check_temperature(tau)?;
        let (x, z) = count_successes(data.as_univariate()?)?;
        let (a, b) = self.shapes(x, z, tau);
        Ok(PosteriorSummary::BetaBernoulli { a, b })
    }

    /// Single-trial beta-binomial.
    pub fn predictive(&self, data: &Dataset, tau: f64) -> Result<DensityKernel> {
        match self.posterior(data, tau)? {
            PosteriorSummary::BetaBernoulli { a, b } => DensityKernel::beta_binomial(1, a, b),
            _ => unreachable!(),
        }
    }

    pub fn loo_predictive(&self, data: &Dataset, tau: f64, i: usize) -> Result<DensityKernel> {
        check_temperature(tau)?;
        data.as_univariate()?;
        self.predictive(&data.without(i)?, tau)
    }

    pub(crate) fn loo_log_scores(&self, data: &Dataset, tau: f64) -> Result<Vec<f64>> {
        let values = data.as_univariate()?;
        let (x, z) = count_successes(values)?;
        Ok(values
            .iter()
            .map(|y| {
                let (a, b) = if *y == 1.0 { self.shapes(x - 1, z, tau) } else { self.shapes(x, z - 1, tau) };
                BetaBinomial::new(1, a, b).expect("positive shapes").ln_pmf(*y)
            })
            .collect())
    }

    /// Bernoulli at the empirical success rate; degenerate when the data are
    /// all successes or all failures.
    pub fn plug_in_predictive(&self, data: &Dataset) -> Result<DensityKernel> {
        let values = data.as_univariate()?;
        let (x, _) = count_successes(values)?;
        DensityKernel::bernoulli(x as f64 / values.len() as f64)
    }

    pub fn prior_predictive(&self) -> Result<DensityKernel> {
        DensityKernel::beta_binomial(1, self.a, self.b)
    }

    pub fn posterior_mass_outside(&self, data: &Dataset, tau: f64, center: f64, radius: f64) -> Result<f64> {
        if !(radius > 0.0) {
            return Err(invalid(format!("radius must be positive, got {radius}")));
        }
        let (a, b) = match self.posterior(data, tau)? {
            PosteriorSummary::BetaBernoulli { a, b } => (a, b),
            _ => unreachable!(),
        };
        let law = Beta::new(a, b)?;
        let below = law.cdf(center - radius);
        let above = 1.0 - law.cdf(center + radius);
        Ok((below + above).clamp(0.0, 1.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn data(v: &[f64]) -> Dataset {
        Dataset::univariate(v.to_vec()).unwrap()
    }

    fn five_of_ten() -> Dataset {
        data(&[1., 0., 1., 0., 1., 0., 1., 0., 1., 0.])
    }

    fn success_mass(k: &DensityKernel) -> f64 {
        k.density(1.0)
    }

    #[test]
    fn posterior_substitution() {
        let spec = BetaBernoulliSpec::new(1.0, 1.0).unwrap();
        assert_eq!(spec.posterior(&five_of_ten(), 1.0).unwrap(), PosteriorSummary::BetaBernoulli { a: 6.0, b: 6.0 });
        assert_eq!(spec.posterior(&five_of_ten(), 2.0).unwrap(), PosteriorSummary::BetaBernoulli { a: 11.0, b: 11.0 });
        assert_eq!(
            spec.posterior(&data(&[0.0; 5]), 1.0).unwrap(),
            PosteriorSummary::BetaBernoulli { a: 1.0, b: 6.0 }
        );
    }

    #[test]
    fn predictive_success_masses() {
        let spec = BetaBernoulliSpec::new(1.0, 1.0).unwrap();
        assert_eq!(success_mass(&spec.predictive(&five_of_ten(), 1.0).unwrap()), 0.5);
        assert!((success_mass(&spec.predictive(&data(&[1.0; 10]), 1.0).unwrap()) - 11.0 / 12.0).abs() < 1e-15);
        assert!(success_mass(&spec.predictive(&data(&[0.0; 10]), 1e9).unwrap()) < 1e-9);
    }

    #[test]
    fn rejects_non_binary_data() {
        let spec = BetaBernoulliSpec::new(1.0, 1.0).unwrap();
        assert!(matches!(spec.posterior(&data(&[0.0, 0.5]), 1.0), Err(Error::DataMismatch(_))));
    }

    #[test]
    fn plug_in_pathology() {
        let spec = BetaBernoulliSpec::new(1.0, 1.0).unwrap();
        assert_eq!(spec.plug_in_predictive(&data(&[1.0, 1.0, 1.0])).unwrap(), DensityKernel::bernoulli(1.0).unwrap());
        let failures = spec.plug_in_predictive(&data(&[0.0, 0.0])).unwrap();
        assert_eq!(failures, DensityKernel::bernoulli(0.0).unwrap());
        assert_eq!(failures.log_density(1.0), f64::NEG_INFINITY);
    }

    #[test]
    fn uniform_prior_predictive() {
        let spec = BetaBernoulliSpec::new(1.0, 1.0).unwrap();
        assert_eq!(success_mass(&spec.prior_predictive().unwrap()), 0.5);
    }

    #[test]
    fn loo_scores_match_refits() {
        let spec = BetaBernoulliSpec::new(1.0, 1.0).unwrap();
        let d = data(&[1.0, 0.0]);
        let scores = spec.loo_log_scores(&d, 1.0).unwrap();
        assert_eq!(scores, vec![(1.0f64 / 3.0).ln(), (1.0f64 / 3.0).ln()]);
        for (i, s) in scores.iter().enumerate() {
            assert_eq!(*s, spec.loo_predictive(&d, 1.0, i).unwrap().log_density(d.response(i)));
        }
    }

    #[test]
    fn mass_outside_shrinks_with_radius() {
        let spec = BetaBernoulliSpec::new(1.0, 1.0).unwrap();
        let d = five_of_ten();
        let wide = spec.posterior_mass_outside(&d, 1.0, 0.5, 0.4).unwrap();
        let narrow = spec.posterior_mass_outside(&d, 1.0, 0.5, 0.1).unwrap();
        assert!(wide < narrow);
        assert_eq!(spec.posterior_mass_outside(&d, 1.0, 0.5, f64::INFINITY).unwrap(), 0.0);
    }
}
