use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::dists::DensityKernel;
use crate::error::{invalid, Error, Result};

use super::{check_temperature, Dataset, PosteriorSummary};

/// Largest eigenvalue ratio accepted before a system counts as ill-conditioned:
/// 1/√ε_machine.
pub const MAX_CONDITION: f64 = 67_108_864.0;

/// Cholesky factor of a symmetric matrix, guarded by an eigenvalue condition check.
pub(crate) fn guarded_cholesky(m: DMatrix<f64>, what: &str) -> Result<Cholesky<f64, Dyn>> {
    let eig = m.clone().symmetric_eigenvalues();
    let lo = eig.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = eig.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(lo > 0.0) || hi / lo > MAX_CONDITION {
        return Err(Error::IllConditioned(format!("{what}: eigenvalues span [{lo:e}, {hi:e}]")));
    }
    Cholesky::new(m).ok_or_else(|| Error::IllConditioned(format!("{what}: Cholesky factorization failed")))
}

/// Gaussian linear regression with known noise sd and a N(0, Σ0) prior.
#[derive(Debug, Clone, PartialEq)]
pub struct LinRegSpec {
    noise_sd: f64,
    prior_cov: DMatrix<f64>,
    prior_precision: DMatrix<f64>,
}

impl LinRegSpec {
    pub fn new(noise_sd: f64, prior_cov: DMatrix<f64>) -> Result<Self> {
        if !(noise_sd > 0.0 && noise_sd.is_finite()) {
            return Err(invalid(format!("noise sd must be positive, got {noise_sd}")));
        }
        if prior_cov.nrows() == 0 || !prior_cov.is_square() {
            return Err(invalid("prior covariance must be a nonempty square matrix"));
        }
        if (&prior_cov - prior_cov.transpose()).amax() > 1e-12 {
            return Err(invalid("prior covariance must be symmetric"));
        }
        let chol = Cholesky::new(prior_cov.clone())
            .ok_or_else(|| invalid("prior covariance must be positive definite"))?;
        let prior_precision = chol.inverse();
        Ok(LinRegSpec { noise_sd, prior_cov, prior_precision })
    }

    /// Isotropic prior Σ0 = scale · I_p.
    pub fn isotropic(noise_sd: f64, dim: usize, scale: f64) -> Result<Self> {
        Self::new(noise_sd, DMatrix::identity(dim, dim) * scale)
    }

    pub fn noise_sd(&self) -> f64 {
        self.noise_sd
    }

    pub fn prior_cov(&self) -> &DMatrix<f64> {
        &self.prior_cov
    }

    pub fn dim(&self) -> usize {
        self.prior_cov.nrows()
    }

    fn check_design(&self, x: &DMatrix<f64>) -> Result<()> {
        if x.ncols() != self.dim() {
            return Err(Error::DataMismatch(format!(
                "design has {} columns but the prior is {}-dimensional",
                x.ncols(),
                self.dim()
            )));
        }
        Ok(())
    }

    fn check_covariate(&self, covariate: &[f64]) -> Result<DVector<f64>> {
        if covariate.len() != self.dim() {
            return Err(Error::DataMismatch(format!(
                "covariate has length {} but the model is {}-dimensional",
                covariate.len(),
                self.dim()
            )));
        }
        Ok(DVector::from_column_slice(covariate))
    }

    /// Σ_n⁻¹ = τσ⁻²G + Σ0⁻¹ and β_n = Σ_n τσ⁻² b for G = XᵀX, b = Xᵀy.
    pub(crate) fn posterior_from_stats(
        &self,
        gram: &DMatrix<f64>,
        xty: &DVector<f64>,
        tau: f64,
    ) -> Result<(DVector<f64>, DMatrix<f64>)> {
        let scale = tau / (self.noise_sd * self.noise_sd);
        let precision = &self.prior_precision + gram * scale;
        let chol = guarded_cholesky(precision, "posterior precision")?;
        let mean = chol.solve(&(xty * scale));
        Ok((mean, chol.inverse()))
    }

    fn predictive_from(&self, mean: &DVector<f64>, cov: &DMatrix<f64>, at: &DVector<f64>) -> DensityKernel {
        let loc = mean.dot(at);
        let var = (cov * at).dot(at).max(0.0) + self.noise_sd * self.noise_sd;
        DensityKernel::normal(loc, var.sqrt()).expect("positive predictive variance")
    }

    pub fn posterior(&self, data: &Dataset, tau: f64) -> Result<PosteriorSummary> {
        check_temperature(tau)?;
        let (x, y) = data.as_regression()?;
        self.check_design(x)?;
        let gram = x.transpose() * x;
        let xty = x.transpose() * y;
        let (mean, cov) = self.posterior_from_stats(&gram, &xty, tau)?;
        Ok(PosteriorSummary::LinReg { mean, cov })
    }

    /// Predictive law of the response at a new covariate.
    pub fn predictive(&self, data: &Dataset, tau: f64, covariate: &[f64]) -> Result<DensityKernel> {
        let at = self.check_covariate(covariate)?;
        match self.posterior(data, tau)? {
            PosteriorSummary::LinReg { mean, cov } => Ok(self.predictive_from(&mean, &cov, &at)),
            _ => unreachable!(),
        }
    }

    pub fn loo_predictive(&self, data: &Dataset, tau: f64, i: usize) -> Result<DensityKernel> {
        check_temperature(tau)?;
        let (x, _) = data.as_regression()?;
        self.check_design(x)?;
        let needed = self.dim() + 1;
        if x.nrows() < needed {
            return Err(Error::TooFewObservations { needed, got: x.nrows() });
        }
        if i >= x.nrows() {
            return Err(Error::DataMismatch(format!("index {i} out of range for {} observations", x.nrows())));
        }
        let row: Vec<f64> = x.row(i).iter().copied().collect();
        self.predictive(&data.without(i)?, tau, &row)
    }

    pub(crate) fn loo_log_scores(&self, data: &Dataset, tau: f64) -> Result<Vec<f64>> {
        let (x, y) = data.as_regression()?;
        self.check_design(x)?;
        let gram = x.transpose() * x;
        let xty = x.transpose() * y;
        (0..x.nrows())
            .map(|i| {
                let xi = x.row(i).transpose();
                let gram_i = &gram - &xi * xi.transpose();
                let xty_i = &xty - &xi * y[i];
                let (mean, cov) = self.posterior_from_stats(&gram_i, &xty_i, tau)?;
                Ok(self.predictive_from(&mean, &cov, &xi).log_density(y[i]))
            })
            .collect()
    }

    /// Least-squares coefficients.
    pub fn least_squares(&self, data: &Dataset) -> Result<DVector<f64>> {
        let (x, y) = data.as_regression()?;
        self.check_design(x)?;
        let chol = guarded_cholesky(x.transpose() * x, "design Gram matrix")?;
        Ok(chol.solve(&(x.transpose() * y)))
    }

    pub fn plug_in_predictive(&self, data: &Dataset, covariate: &[f64]) -> Result<DensityKernel> {
        let at = self.check_covariate(covariate)?;
        let beta = self.least_squares(data)?;
        DensityKernel::normal(beta.dot(&at), self.noise_sd)
    }

    pub fn prior_predictive(&self, covariate: &[f64]) -> Result<DensityKernel> {
        let at = self.check_covariate(covariate)?;
        let var = (&self.prior_cov * &at).dot(&at) + self.noise_sd * self.noise_sd;
        DensityKernel::normal(0.0, var.sqrt())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn intercept_data(values: &[f64]) -> Dataset {
        Dataset::regression(DMatrix::from_element(values.len(), 1, 1.0), DVector::from_column_slice(values)).unwrap()
    }

    fn normal_params(k: &DensityKernel) -> (f64, f64) {
        match k {
            DensityKernel::Normal(n) => (n.mean(), n.sd()),
            other => panic!("unexpected {other:?}"),
        }
    }

    fn design(n: usize, p: usize) -> DMatrix<f64> {
        DMatrix::from_fn(n, p, |i, j| ((i * 7 + j * 3) as f64 * 0.61).sin() + if j == 0 { 1.0 } else { 0.0 })
    }

    #[test]
    fn intercept_only_reduces_to_normal_location() {
        let values: Vec<f64> = (0..100).map(|i| (i as f64 * 0.3).cos()).collect();
        let ybar = values.iter().sum::<f64>() / 100.0;
        let spec = LinRegSpec::new(1.0, DMatrix::from_element(1, 1, 1e12)).unwrap();
        match spec.posterior(&intercept_data(&values), 1.0).unwrap() {
            PosteriorSummary::LinReg { mean, cov } => {
                assert!((mean[0] - ybar).abs() < 1e-10);
                assert!((cov[(0, 0)] - 0.01).abs() < 1e-12);
            }
            other => panic!("unexpected {other:?}"),
        }
        let (m, sd) = normal_params(&spec.predictive(&intercept_data(&values), 1.0, &[1.0]).unwrap());
        assert!((m - ybar).abs() < 1e-10);
        assert!((sd - 1.01f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn tiny_temperature_recovers_prior() {
        let spec = LinRegSpec::new(1.0, DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 2.0, 0.5]))).unwrap();
        let x = design(20, 3);
        let y = DVector::from_fn(20, |i, _| i as f64);
        match spec.posterior(&Dataset::regression(x, y).unwrap(), 1e-12).unwrap() {
            PosteriorSummary::LinReg { mean, cov } => {
                assert!(mean.amax() < 1e-9);
                assert!((cov - spec.prior_cov()).amax() < 1e-9);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn large_temperature_recovers_exact_fit() {
        let truth = DVector::from_vec(vec![0.5, -1.0, 2.0]);
        let x = design(30, 3);
        let y = &x * &truth;
        let data = Dataset::regression(x, y).unwrap();
        let spec = LinRegSpec::isotropic(1.0, 3, 1.0).unwrap();
        let ls = spec.least_squares(&data).unwrap();
        assert!((&ls - &truth).amax() < 1e-10);
        match spec.posterior(&data, 1e6).unwrap() {
            PosteriorSummary::LinReg { mean, .. } => assert!((mean - truth).amax() < 1e-5),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn zero_covariate_predictive_is_noise_only() {
        let spec = LinRegSpec::isotropic(0.7, 2, 3.0).unwrap();
        let data = Dataset::regression(design(5, 2), DVector::from_element(5, 4.0)).unwrap();
        assert_eq!(normal_params(&spec.predictive(&data, 1.0, &[0.0, 0.0]).unwrap()), (0.0, 0.7));
    }

    #[test]
    fn dimension_mismatches_rejected() {
        let spec = LinRegSpec::isotropic(1.0, 2, 1.0).unwrap();
        let data = Dataset::regression(design(5, 2), DVector::from_element(5, 1.0)).unwrap();
        assert!(matches!(spec.predictive(&data, 1.0, &[1.0]), Err(Error::DataMismatch(_))));
        let wide = Dataset::regression(design(5, 3), DVector::from_element(5, 1.0)).unwrap();
        assert!(matches!(spec.posterior(&wide, 1.0), Err(Error::DataMismatch(_))));
        assert!(Dataset::regression(design(5, 2), DVector::from_element(4, 1.0)).is_err());
    }

    #[test]
    fn minimal_loo_size_executes() {
        let spec = LinRegSpec::isotropic(1.0, 5, 10.0).unwrap();
        let data = Dataset::regression(design(6, 5), DVector::from_fn(6, |i, _| i as f64 * 0.1)).unwrap();
        for i in 0..6 {
            spec.loo_predictive(&data, 1.0, i).unwrap();
        }
        let short = Dataset::regression(design(5, 5), DVector::from_element(5, 0.0)).unwrap();
        assert!(matches!(spec.loo_predictive(&short, 1.0, 0), Err(Error::TooFewObservations { .. })));
    }

    #[test]
    fn singular_design_plug_in_fails() {
        let mut x = design(10, 2);
        let first: Vec<f64> = x.column(0).iter().copied().collect();
        x.set_column(1, &DVector::from_vec(first));
        let data = Dataset::regression(x, DVector::from_element(10, 1.0)).unwrap();
        let spec = LinRegSpec::isotropic(1.0, 2, 1.0).unwrap();
        assert!(matches!(spec.plug_in_predictive(&data, &[1.0, 1.0]), Err(Error::IllConditioned(_))));
    }

    #[test]
    fn prior_validation() {
        assert!(LinRegSpec::new(1.0, DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.4, 1.0])).is_err());
        assert!(LinRegSpec::new(1.0, DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0])).is_err());
        assert!(LinRegSpec::new(0.0, DMatrix::identity(2, 2)).is_err());
    }

    #[test]
    fn prior_predictive_variance() {
        let spec = LinRegSpec::isotropic(1.0, 2, 2.0).unwrap();
        assert_eq!(normal_params(&spec.prior_predictive(&[1.0, 1.0]).unwrap()), (0.0, 5f64.sqrt()));
    }
}
