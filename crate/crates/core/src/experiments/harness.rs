use rayon::prelude::*;

use crate::divergences::{kl_auto, tvd, QuadratureSpec};
use crate::error::{invalid, Error, Result};
use crate::models::{Dataset, ModelSpec};
use crate::rng::{stream, StreamTag};
use crate::selection::{argmax_on_grid, elpd_loo, TauSelection, TempGrid};

use super::{draw_covariate, TrueModel};

/// Quantity recorded for each (n, replicate, τ).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    /// TVD between the true predictive and the τ-predictive.
    Tvd,
    /// KL from the true predictive to the τ-predictive.
    Kl,
    /// Leave-one-out expected log predictive density.
    Elpd,
}

/// A fully specified, reproducible experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub true_model: TrueModel,
    pub model: ModelSpec,
    pub n_values: Vec<usize>,
    pub replicates: usize,
    pub grid: TempGrid,
    pub metric: Metric,
    /// Covariate draws for the outer expectation of regression TVD/KL.
    pub mc_samples: usize,
    pub root_seed: u64,
    pub scale_by_sqrt_n: bool,
    pub quadrature: QuadratureSpec,
}

pub const DEFAULT_REPLICATES: usize = 200;
pub const DEFAULT_MC_SAMPLES: usize = 10_000;

impl ExperimentConfig {
    /// Config with default grid, replicate count, MC size and quadrature.
    pub fn new(true_model: TrueModel, model: ModelSpec, n_values: Vec<usize>, metric: Metric, root_seed: u64) -> Self {
        ExperimentConfig {
            true_model,
            model,
            n_values,
            replicates: DEFAULT_REPLICATES,
            grid: TempGrid::default(),
            metric,
            mc_samples: DEFAULT_MC_SAMPLES,
            root_seed,
            scale_by_sqrt_n: false,
            quadrature: QuadratureSpec::default(),
        }
    }

    /// Parameter checks; failures here are configuration errors.
    pub fn validate_parameters(&self) -> Result<()> {
        if self.replicates == 0 {
            return Err(invalid("replicates must be at least 1"));
        }
        if self.mc_samples == 0 {
            return Err(invalid("mc_samples must be at least 1"));
        }
        if self.n_values.is_empty() || self.n_values.contains(&0) {
            return Err(invalid("n_values must be a nonempty list of positive sample sizes"));
        }
        Ok(())
    }

    /// Model/generator/metric pairing checks; failures here are incompatibilities.
    pub fn validate_compatibility(&self) -> Result<()> {
        let paired = match (&self.true_model, &self.model) {
            (TrueModel::NormalIid { .. } | TrueModel::StudentTIid { .. }, ModelSpec::NormalLocation(_)) => true,
            (TrueModel::BernoulliIid { .. }, ModelSpec::BetaBernoulli(_)) => true,
            (TrueModel::MixtureRegression { beta, .. }, ModelSpec::LinReg(spec)) => {
                if beta.len() != spec.dim() {
                    return Err(Error::Incompatible(format!(
                        "generator has {} coefficients but the model prior is {}-dimensional",
                        beta.len(),
                        spec.dim()
                    )));
                }
                true
            }
            _ => false,
        };
        if !paired {
            return Err(Error::Incompatible(format!(
                "{} data cannot be scored by the {} model",
                generator_name(&self.true_model),
                model_name(&self.model)
            )));
        }
        if self.metric == Metric::Elpd {
            let needed = self.model.min_loo_size();
            if let Some(n) = self.n_values.iter().find(|n| **n < needed) {
                return Err(Error::Incompatible(format!(
                    "leave-one-out scoring needs n >= {needed}, config has n = {n}"
                )));
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.validate_parameters()?;
        self.validate_compatibility()
    }

    /// The dataset for replicate `replicate` at the `n_index`th sample size.
    pub fn dataset(&self, n_index: usize, replicate: usize) -> Result<Dataset> {
        let mut rng = stream(self.root_seed, StreamTag::Data, replicate as u64, n_index as u64);
        self.true_model.generate(self.n_values[n_index], &mut rng)
    }

    /// Covariate draws for the regression outer expectation, shared by every τ.
    pub fn predictor_draws(&self, replicate: usize) -> Vec<Vec<f64>> {
        let p = self.true_model.dim().unwrap_or(0);
        let mut rng = stream(self.root_seed, StreamTag::Predictor, replicate as u64, 0);
        (0..self.mc_samples).map(|_| draw_covariate(p, &mut rng)).collect()
    }
}

fn generator_name(tm: &TrueModel) -> &'static str {
    match tm {
        TrueModel::NormalIid { .. } => "normal",
        TrueModel::StudentTIid { .. } => "student-t",
        TrueModel::BernoulliIid { .. } => "Bernoulli",
        TrueModel::MixtureRegression { .. } => "mixture regression",
    }
}

fn model_name(m: &ModelSpec) -> &'static str {
    match m {
        ModelSpec::NormalLocation(_) => "normal location",
        ModelSpec::BetaBernoulli(_) => "beta-Bernoulli",
        ModelSpec::LinReg(_) => "linear regression",
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReplicateRow {
    pub n: usize,
    pub replicate: usize,
    pub tau: f64,
    pub value: f64,
}

/// One row per (n, replicate, τ), ordered by n, then replicate, then τ.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ReplicateTable {
    pub rows: Vec<ReplicateRow>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Serial,
    Parallel,
}

fn distance(cfg: &ExperimentConfig, truth: &crate::dists::DensityKernel, pred: &crate::dists::DensityKernel) -> Result<f64> {
    match cfg.metric {
        Metric::Tvd => tvd(truth, pred, &cfg.quadrature),
        Metric::Kl => kl_auto(truth, pred, &cfg.quadrature),
        Metric::Elpd => unreachable!("elpd is not a distance"),
    }
}

/// Metric values across the grid for one (n, replicate) cell.
pub fn replicate_values(cfg: &ExperimentConfig, n_index: usize, replicate: usize) -> Result<Vec<f64>> {
    let data = cfg.dataset(n_index, replicate)?;
    let taus = cfg.grid.points();
    match cfg.metric {
        Metric::Elpd => taus.iter().map(|t| elpd_loo(&cfg.model, &data, *t)).collect(),
        Metric::Tvd | Metric::Kl if cfg.true_model.is_regression() => {
            let draws = cfg.predictor_draws(replicate);
            let truths = draws
                .iter()
                .map(|x| cfg.true_model.true_predictive(Some(x)))
                .collect::<Result<Vec<_>>>()?;
            taus.iter()
                .map(|t| {
                    let posterior = cfg.model.posterior(&data, *t)?;
                    let mut total = 0.0;
                    for (x, truth) in draws.iter().zip(&truths) {
                        let pred = cfg.model.predictive_from_posterior(&posterior, Some(x))?;
                        total += distance(cfg, truth, &pred)?;
                    }
                    Ok(total / draws.len() as f64)
                })
                .collect()
        }
        Metric::Tvd | Metric::Kl => {
            let truth = cfg.true_model.true_predictive(None)?;
            taus.iter()
                .map(|t| distance(cfg, &truth, &cfg.model.predictive(&data, *t, None)?))
                .collect()
        }
    }
}

fn cells(cfg: &ExperimentConfig) -> Vec<(usize, usize)> {
    (0..cfg.n_values.len())
        .flat_map(|i| (0..cfg.replicates).map(move |r| (i, r)))
        .collect()
}

fn map_cells<T, F>(cfg: &ExperimentConfig, execution: Execution, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize, usize) -> Result<T> + Sync,
{
    let work = cells(cfg);
    match execution {
        Execution::Serial => work.iter().map(|(i, r)| f(*i, *r)).collect(),
        Execution::Parallel => work.par_iter().map(|(i, r)| f(*i, *r)).collect(),
    }
}

/// Runs every (n, replicate) cell in parallel; see [`run_replicates_with`].
pub fn run_replicates(cfg: &ExperimentConfig) -> Result<ReplicateTable> {
    run_replicates_with(cfg, Execution::Parallel)
}

/// Output is independent of `execution`: each cell draws from its own stream
/// and results are gathered in cell order.
pub fn run_replicates_with(cfg: &ExperimentConfig, execution: Execution) -> Result<ReplicateTable> {
    cfg.validate()?;
    let per_cell = map_cells(cfg, execution, |i, r| replicate_values(cfg, i, r))?;
    let rows = cells(cfg)
        .into_iter()
        .zip(per_cell)
        .flat_map(|((i, r), values)| {
            let n = cfg.n_values[i];
            cfg.grid
                .points()
                .iter()
                .zip(values)
                .map(move |(tau, value)| ReplicateRow { n, replicate: r, tau: *tau, value })
                .collect::<Vec<_>>()
        })
        .collect();
    Ok(ReplicateTable { rows })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelectionRow {
    pub n: usize,
    pub replicate: usize,
    pub selection: TauSelection,
}

/// Cross-validated temperature for every (n, replicate) cell.
pub fn tau_selection_histogram(cfg: &ExperimentConfig, execution: Execution) -> Result<Vec<SelectionRow>> {
    cfg.validate()?;
    if cfg.metric != Metric::Elpd {
        return Err(Error::Incompatible("temperature selection needs the elpd metric".into()));
    }
    let selections = map_cells(cfg, execution, |i, r| {
        let curve = replicate_values(cfg, i, r)?;
        argmax_on_grid(&cfg.grid, &curve)
    })?;
    Ok(cells(cfg)
        .into_iter()
        .zip(selections)
        .map(|((i, r), selection)| SelectionRow { n: cfg.n_values[i], replicate: r, selection })
        .collect())
}
