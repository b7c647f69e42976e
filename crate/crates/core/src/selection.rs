//! Temperature machinery: grids, schedules, leave-one-out scoring and
//! grid-argmax selection, and the analytic normal-location risk.

use crate::error::{invalid, Error, Result};
use crate::models::{Dataset, ModelSpec};

/// Strictly increasing set of positive temperatures.
#[derive(Debug, Clone, PartialEq)]
pub struct TempGrid {
    points: Vec<f64>,
}

impl Default for TempGrid {
    /// 61 log-spaced points on [0.01, 100].
    fn default() -> Self {
        TempGrid::log_spaced(0.01, 100.0, 61).expect("valid default grid")
    }
}

impl TempGrid {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.len() < 2 {
            return Err(invalid("temperature grid needs at least two points"));
        }
        if points.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
            return Err(invalid("temperatures must be finite and positive"));
        }
        if points.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("temperature grid must be strictly increasing"));
        }
        Ok(TempGrid { points })
    }

    /// `count` points equally spaced in log10 between `lo` and `hi`, endpoints exact.
    pub fn log_spaced(lo: f64, hi: f64, count: usize) -> Result<Self> {
        if !(lo > 0.0 && hi > lo && hi.is_finite()) || count < 2 {
            return Err(invalid(format!("bad log grid: lo={lo}, hi={hi}, count={count}")));
        }
        let (a, b) = (lo.log10(), hi.log10());
        let last = count - 1;
        let points = (0..count)
            .map(|k| match k {
                0 => lo,
                k if k == last => hi,
                k => 10f64.powf(a + (b - a) * k as f64 / last as f64),
            })
            .collect();
        TempGrid::new(points)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Index of the point closest to `tau` on the log scale; ties go low.
    pub fn nearest_index(&self, tau: f64) -> usize {
        let target = tau.ln();
        let mut best = 0;
        for (i, t) in self.points.iter().enumerate() {
            if (t.ln() - target).abs() < (self.points[best].ln() - target).abs() {
                best = i;
            }
        }
        best
    }
}

/// Temperature as a function of sample size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TempSchedule {
    Fixed(f64),
    /// τ_n = c · n^(−γ) with 0 < γ < 1.
    PowerDecay { c: f64, gamma: f64 },
    /// τ_n = α / (α + n).
    Coarsened { alpha: f64 },
}

impl TempSchedule {
    pub fn fixed(tau: f64) -> Result<Self> {
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::InvalidTemperature(tau));
        }
        Ok(TempSchedule::Fixed(tau))
    }

    pub fn power_decay(c: f64, gamma: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) || !(gamma > 0.0 && gamma < 1.0) {
            return Err(invalid(format!("power decay needs c > 0 and 0 < γ < 1, got c={c}, γ={gamma}")));
        }
        Ok(TempSchedule::PowerDecay { c, gamma })
    }

    pub fn coarsened(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(invalid(format!("coarsening α must be positive, got {alpha}")));
        }
        Ok(TempSchedule::Coarsened { alpha })
    }

    /// τ at sample size `n` (n ≥ 1).
    pub fn tau(&self, n: u64) -> f64 {
        let n = n.max(1) as f64;
        match *self {
            TempSchedule::Fixed(t) => t,
            TempSchedule::PowerDecay { c, gamma } => c * n.powf(-gamma),
            TempSchedule::Coarsened { alpha } => alpha / (alpha + n),
        }
    }
}

/// Outcome of a grid search over temperatures.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TauSelection {
    pub tau_star: f64,
    pub elpd_at_star: f64,
    pub at_lower_boundary: bool,
    pub at_upper_boundary: bool,
}

/// Mean held-out log predictive score; −∞ as soon as any fold scores −∞.
pub fn elpd_loo(spec: &ModelSpec, data: &Dataset, tau: f64) -> Result<f64> {
    let scores = spec.loo_log_scores(data, tau)?;
    let mut total = 0.0;
    for s in &scores {
        if *s == f64::NEG_INFINITY || s.is_nan() {
            return Ok(f64::NEG_INFINITY);
        }
        total += s;
    }
    Ok(total / scores.len() as f64)
}

/// Argmax over a score curve aligned with `grid`. Ties resolve to the
/// smallest τ; −∞ (and NaN) lose to every finite score. If nothing is finite
/// the smallest τ is reported with both boundary flags clear.
pub fn argmax_on_grid(grid: &TempGrid, scores: &[f64]) -> Result<TauSelection> {
    if scores.len() != grid.len() {
        return Err(invalid(format!("{} scores for a {}-point grid", scores.len(), grid.len())));
    }
    let mut best: Option<usize> = None;
    for (i, s) in scores.iter().enumerate() {
        if s.is_nan() || *s == f64::NEG_INFINITY {
            continue;
        }
        if best.is_none_or(|b| *s > scores[b]) {
            best = Some(i);
        }
    }
    Ok(match best {
        Some(i) => TauSelection {
            tau_star: grid.points()[i],
            elpd_at_star: scores[i],
            at_lower_boundary: i == 0,
            at_upper_boundary: i == grid.len() - 1,
        },
        None => TauSelection {
            tau_star: grid.points()[0],
            elpd_at_star: f64::NEG_INFINITY,
            at_lower_boundary: false,
            at_upper_boundary: false,
        },
    })
}

/// The elpd curve over every grid point.
pub fn elpd_curve(spec: &ModelSpec, data: &Dataset, grid: &TempGrid) -> Result<Vec<f64>> {
    grid.points().iter().map(|t| elpd_loo(spec, data, *t)).collect()
}

/// Cross-validated temperature: the grid point maximising [`elpd_loo`].
pub fn select_tau_cv(spec: &ModelSpec, data: &Dataset, grid: &TempGrid) -> Result<TauSelection> {
    argmax_on_grid(grid, &elpd_curve(spec, data, grid)?)
}

/// Expected KL from N(0,1) to the τ-predictive of the normal location model
/// with σ = 1, μ0 = 0 and prior variance `prior_var` (∞ for flat):
/// ½log(1 + s) + (1 + τs)/(2(1 + s)) − ½ where s = 1/(nτ + 1/σ0²).
pub fn risk_normal(n: u64, tau: f64, prior_var: f64) -> f64 {
    let prior_precision = if prior_var == f64::INFINITY { 0.0 } else { 1.0 / prior_var };
    let s = 1.0 / (n as f64 * tau + prior_precision);
    0.5 * s.ln_1p() + s * (tau - 1.0) / (2.0 * (1.0 + s))
}

/// Flat-prior risk ½log(1 + 1/(nτ)) + (1 + 1/n)/(2(1 + 1/(nτ))) − ½.
pub fn risk_normal_flat(n: u64, tau: f64) -> f64 {
    let n = n as f64;
    let u = 1.0 / (n * tau);
    // middle term minus ½, combined over the common denominator
    0.5 * u.ln_1p() + (1.0 / n - u) / (2.0 * (1.0 + u))
}

/// ∂/∂τ of [`risk_normal_flat`]: (1/(2n)) · (τ − 1)n⁻¹ / (τ(τ + n⁻¹)²).
pub fn risk_derivative_normal_flat(n: u64, tau: f64) -> f64 {
    let inv_n = 1.0 / n as f64;
    let shifted = tau + inv_n;
    0.5 * inv_n * (tau - 1.0) * inv_n / (tau * shifted * shifted)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{BetaBernoulliSpec, NormalLocationSpec};

    #[test]
    fn default_grid_shape() {
        let g = TempGrid::default();
        assert_eq!(g.len(), 61);
        assert_eq!(g.points()[0], 0.01);
        assert_eq!(g.points()[60], 100.0);
        assert_eq!(g.points()[30], 1.0);
        assert_eq!(g.nearest_index(1.0), 30);
    }

    #[test]
    fn grid_validation() {
        assert!(TempGrid::new(vec![1.0]).is_err());
        assert!(TempGrid::new(vec![1.0, 1.0]).is_err());
        assert!(TempGrid::new(vec![0.0, 1.0]).is_err());
        assert!(TempGrid::new(vec![2.0, 1.0]).is_err());
    }

    #[test]
    fn schedules() {
        assert_eq!(TempSchedule::coarsened(1.0).unwrap().tau(99), 0.01);
        assert_eq!(TempSchedule::fixed(2.5).unwrap().tau(12345), 2.5);
        assert!((TempSchedule::power_decay(1.0, 0.5).unwrap().tau(100) - 0.1).abs() < 1e-16);
        assert!(TempSchedule::power_decay(1.0, 1.0).is_err());
        assert!(TempSchedule::coarsened(0.0).is_err());
        assert!(TempSchedule::fixed(-1.0).is_err());
    }

    #[test]
    fn argmax_increasing_curve_hits_upper_boundary() {
        let g = TempGrid::default();
        let scores: Vec<f64> = (0..61).map(|i| i as f64).collect();
        let s = argmax_on_grid(&g, &scores).unwrap();
        assert_eq!(s.tau_star, 100.0);
        assert!(s.at_upper_boundary && !s.at_lower_boundary);
    }

    #[test]
    fn argmax_constant_curve_prefers_smallest() {
        let g = TempGrid::default();
        let s = argmax_on_grid(&g, &[-1.5; 61]).unwrap();
        assert_eq!(s.tau_star, 0.01);
        assert!(s.at_lower_boundary && !s.at_upper_boundary);
    }

    #[test]
    fn argmax_neg_inf_loses() {
        let g = TempGrid::new(vec![0.1, 1.0, 10.0]).unwrap();
        let s = argmax_on_grid(&g, &[f64::NEG_INFINITY, -50.0, f64::NEG_INFINITY]).unwrap();
        assert_eq!(s.tau_star, 1.0);
        assert!(!s.at_lower_boundary && !s.at_upper_boundary);
        let none = argmax_on_grid(&g, &[f64::NEG_INFINITY; 3]).unwrap();
        assert_eq!(none.tau_star, 0.1);
        assert_eq!(none.elpd_at_star, f64::NEG_INFINITY);
        assert!(!none.at_lower_boundary && !none.at_upper_boundary);
    }

    #[test]
    fn beta_bernoulli_two_point_elpd() {
        let spec = ModelSpec::from(BetaBernoulliSpec::new(1.0, 1.0).unwrap());
        let data = Dataset::univariate(vec![1.0, 0.0]).unwrap();
        let e = elpd_loo(&spec, &data, 1.0).unwrap();
        assert_eq!(e, (1.0f64 / 3.0).ln());
        assert!((e + 1.098_612_3).abs() < 1e-7);
    }

    #[test]
    fn elpd_is_permutation_invariant_on_symmetric_data() {
        let spec = ModelSpec::from(NormalLocationSpec::new(1.0, 0.0, 1.0).unwrap());
        let a = Dataset::univariate(vec![-1.0, 1.0, -2.0, 2.0]).unwrap();
        let b = Dataset::univariate(vec![2.0, -1.0, 1.0, -2.0]).unwrap();
        let (ea, eb) = (elpd_loo(&spec, &a, 0.7).unwrap(), elpd_loo(&spec, &b, 0.7).unwrap());
        assert!(ea.is_finite());
        assert!((ea - eb).abs() < 1e-15);
    }

    #[test]
    fn elpd_preconditions() {
        let spec = ModelSpec::from(NormalLocationSpec::flat(1.0).unwrap());
        let one = Dataset::univariate(vec![0.3]).unwrap();
        assert!(matches!(elpd_loo(&spec, &one, 1.0), Err(Error::TooFewObservations { .. })));
        let two = Dataset::univariate(vec![0.3, 0.4]).unwrap();
        assert!(matches!(elpd_loo(&spec, &two, 0.0), Err(Error::InvalidTemperature(_))));
    }

    #[test]
    fn risk_values() {
        assert!((risk_normal_flat(100, 1.0) - 0.004_975_2).abs() < 1e-7);
        assert!((risk_normal_flat(100, 1.0) - 0.5 * 1.01f64.ln()).abs() < 1e-16);
        assert!((risk_normal_flat(1000, 0.01) - 0.002_655_1).abs() < 1e-7);
        assert!((risk_normal(1, 1.0, f64::INFINITY) - 0.5 * 2f64.ln()).abs() < 1e-16);
        assert!((risk_normal(100, 1e8, f64::INFINITY) - 0.005).abs() < 1e-6);
    }

    #[test]
    fn general_risk_reduces_to_flat() {
        for n in [1, 10, 100, 1000] {
            for tau in [0.01, 0.3, 1.0, 4.0, 100.0] {
                assert!((risk_normal(n, tau, f64::INFINITY) - risk_normal_flat(n, tau)).abs() <= 1e-15);
            }
        }
    }

    #[test]
    fn derivative_signs() {
        assert_eq!(risk_derivative_normal_flat(10, 1.0), 0.0);
        assert!(risk_derivative_normal_flat(10, 0.5) < 0.0);
        assert!(risk_derivative_normal_flat(10, 2.0) > 0.0);
    }

    /// [R(τ+h) − R(τ−h)] / 2h for the flat-prior risk, with both differences
    /// taken in closed form so no O(1) terms cancel: the log terms combine to
    /// log1p(Δu/(1+u₋)) and the rational terms to −Δu(1+1/n)/(2(1+u₊)(1+u₋)),
    /// where u± = 1/(n(τ±h)).
    fn centered_difference(n: u64, tau: f64, h: f64) -> f64 {
        let n = n as f64;
        let (up, um) = (1.0 / (n * (tau + h)), 1.0 / (n * (tau - h)));
        let du = -2.0 * h / (n * (tau + h) * (tau - h));
        let log_part = 0.5 * (du / (1.0 + um)).ln_1p();
        let rational = -du * (1.0 + 1.0 / n) / (2.0 * (1.0 + up) * (1.0 + um));
        (log_part + rational) / (2.0 * h)
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let h = 1e-6;
        for n in [10, 100] {
            for tau in [0.1, 1.0, 10.0] {
                let fd = centered_difference(n, tau, h);
                let naive = (risk_normal_flat(n, tau + h) - risk_normal_flat(n, tau - h)) / (2.0 * h);
                assert!((fd - naive).abs() < 1e-9, "oracle disagrees with naive difference");
                let exact = risk_derivative_normal_flat(n, tau);
                if exact == 0.0 {
                    assert!(fd.abs() < 1e-12, "n={n} τ={tau} fd={fd}");
                } else {
                    assert!(((fd - exact) / exact).abs() < 1e-6, "n={n} τ={tau} fd={fd} exact={exact}");
                }
            }
        }
    }

    #[test]
    fn risk_is_unimodal_around_one() {
        for n in [10, 100, 1000] {
            let below: Vec<f64> = (1..1000).map(|k| k as f64 / 1000.0).collect();
            assert!(below.windows(2).all(|w| risk_normal_flat(n, w[0]) > risk_normal_flat(n, w[1])));
            let above: Vec<f64> = (0..1000).map(|k| 1.0 + k as f64 / 100.0).collect();
            assert!(above.windows(2).all(|w| risk_normal_flat(n, w[0]) < risk_normal_flat(n, w[1])));
        }
    }

    #[test]
    fn coarsened_risk_limits() {
        for alpha in [0.5, 5.0] {
            let tau = TempSchedule::coarsened(alpha).unwrap().tau(1_000_000);
            let limit = 0.5 * (1.0 + 1.0 / alpha).ln() + 1.0 / (2.0 * (1.0 + 1.0 / alpha)) - 0.5;
            assert!((risk_normal_flat(1_000_000, tau) - limit).abs() < 1e-4);
        }
    }

    #[test]
    fn power_decay_risk_vanishes() {
        let s = TempSchedule::power_decay(1.0, 0.5).unwrap();
        let risks: Vec<f64> = [100u64, 1_000, 10_000, 100_000].iter().map(|n| risk_normal_flat(*n, s.tau(*n))).collect();
        assert!(risks.windows(2).all(|w| w[1] < w[0]), "{risks:?}");
    }
}
