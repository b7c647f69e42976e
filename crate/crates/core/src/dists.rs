//! Univariate probability kernels.
//!
//! A [`DensityKernel`] is an immutable, validated law that can be evaluated
//! (density or mass), sampled from, and asked for its support. Continuous
//! kernels report densities with respect to Lebesgue measure; discrete kernels
//! report masses with respect to counting measure.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use statrs::function::beta::{beta_reg, inv_beta_reg, ln_beta};
use statrs::function::erf::erfc;
use statrs::function::gamma::ln_gamma;

use crate::error::{invalid, Result};
use crate::rng::RandomSource;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Where a kernel puts its mass.
#[derive(Debug, Clone, PartialEq)]
pub enum Support {
    /// Interval with possibly infinite endpoints; `lo < hi`.
    ContinuousInterval { lo: f64, hi: f64 },
    /// Nonempty, sorted set of integer atoms.
    FiniteSet(Vec<i64>),
}

impl Support {
    pub fn is_discrete(&self) -> bool {
        matches!(self, Support::FiniteSet(_))
    }

    pub fn contains(&self, x: f64) -> bool {
        match self {
            Support::ContinuousInterval { lo, hi } => *lo <= x && x <= *hi,
            Support::FiniteSet(points) => x.fract() == 0.0 && points.binary_search(&(x as i64)).is_ok(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Normal {
    mean: f64,
    sd: f64,
}

impl Normal {
    pub fn new(mean: f64, sd: f64) -> Result<Self> {
        if !mean.is_finite() {
            return Err(invalid(format!("normal mean must be finite, got {mean}")));
        }
        if !(sd > 0.0 && sd.is_finite()) {
            return Err(invalid(format!("normal sd must be positive, got {sd}")));
        }
        Ok(Normal { mean, sd })
    }

    pub fn standard() -> Self {
        Normal { mean: 0.0, sd: 1.0 }
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn sd(&self) -> f64 {
        self.sd
    }

    pub fn variance(&self) -> f64 {
        self.sd * self.sd
    }

    pub fn ln_pdf(&self, x: f64) -> f64 {
        let z = (x - self.mean) / self.sd;
        -0.5 * z * z - self.sd.ln() - LN_SQRT_2PI
    }

    pub fn pdf(&self, x: f64) -> f64 {
        let z = (x - self.mean) / self.sd;
        (-0.5 * z * z).exp() / (self.sd * (2.0 * PI).sqrt())
    }

    pub fn cdf(&self, x: f64) -> f64 {
        std_normal_cdf((x - self.mean) / self.sd)
    }

    fn draw(&self, rng: &mut RandomSource) -> f64 {
        let z: f64 = StandardNormal.sample(rng);
        self.mean + self.sd * z
    }
}

/// Standard normal CDF via the complementary error function.
pub fn std_normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

/// Location-scale Student-t.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StudentT {
    df: f64,
    loc: f64,
    scale: f64,
    ln_norm: f64,
}

impl StudentT {
    pub fn new(df: f64, loc: f64, scale: f64) -> Result<Self> {
        if !(df > 0.0) || df.is_nan() {
            return Err(invalid(format!("student-t df must be positive, got {df}")));
        }
        if !loc.is_finite() {
            return Err(invalid(format!("student-t location must be finite, got {loc}")));
        }
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(invalid(format!("student-t scale must be positive, got {scale}")));
        }
        let ln_norm = ln_gamma(0.5 * (df + 1.0)) - ln_gamma(0.5 * df) - 0.5 * (df * PI).ln() - scale.ln();
        Ok(StudentT { df, loc, scale, ln_norm })
    }

    pub fn df(&self) -> f64 {
        self.df
    }

    pub fn loc(&self) -> f64 {
        self.loc
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn ln_pdf(&self, x: f64) -> f64 {
        let z = (x - self.loc) / self.scale;
        self.ln_norm - 0.5 * (self.df + 1.0) * (z * z / self.df).ln_1p()
    }

    pub fn pdf(&self, x: f64) -> f64 {
        let z = (x - self.loc) / self.scale;
        self.ln_norm.exp() * (1.0 + z * z / self.df).powf(-0.5 * (self.df + 1.0))
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let t = (x - self.loc) / self.scale;
        if t.is_infinite() {
            return if t > 0.0 { 1.0 } else { 0.0 };
        }
        let tail = 0.5 * beta_reg(0.5 * self.df, 0.5, self.df / (self.df + t * t));
        if t > 0.0 {
            1.0 - tail
        } else {
            tail
        }
    }

    /// Scale times the standard deviation multiplier, when the variance exists.
    pub fn effective_sd(&self) -> Option<f64> {
        (self.df > 2.0).then(|| self.scale * (self.df / (self.df - 2.0)).sqrt())
    }

    /// Half-width `w` with P(|X − loc| > w) = `tail`.
    pub fn two_sided_quantile(&self, tail: f64) -> f64 {
        let x = inv_beta_reg(0.5 * self.df, 0.5, tail);
        self.scale * (self.df * (1.0 - x) / x).sqrt()
    }

    fn draw(&self, rng: &mut RandomSource) -> f64 {
        let t = rand_distr::StudentT::new(self.df).expect("validated df").sample(rng);
        self.loc + self.scale * t
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bernoulli {
    p: f64,
}

impl Bernoulli {
    pub fn new(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(invalid(format!("bernoulli probability must lie in [0, 1], got {p}")));
        }
        Ok(Bernoulli { p })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn pmf(&self, x: f64) -> f64 {
        if x == 1.0 {
            self.p
        } else if x == 0.0 {
            1.0 - self.p
        } else {
            0.0
        }
    }

    pub fn ln_pmf(&self, x: f64) -> f64 {
        self.pmf(x).ln()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Beta {
    a: f64,
    b: f64,
}

impl Beta {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite() && b > 0.0 && b.is_finite()) {
            return Err(invalid(format!("beta shapes must be positive, got ({a}, {b})")));
        }
        Ok(Beta { a, b })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn ln_pdf(&self, x: f64) -> f64 {
        if !(0.0..=1.0).contains(&x) {
            return f64::NEG_INFINITY;
        }
        (self.a - 1.0) * x.ln() + (self.b - 1.0) * (-x).ln_1p() - ln_beta(self.a, self.b)
    }

    pub fn pdf(&self, x: f64) -> f64 {
        if !(0.0..=1.0).contains(&x) {
            return 0.0;
        }
        x.powf(self.a - 1.0) * (1.0 - x).powf(self.b - 1.0) / ln_beta(self.a, self.b).exp()
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else if x >= 1.0 {
            1.0
        } else {
            beta_reg(self.a, self.b, x)
        }
    }
}

/// Beta-binomial on `{0, ..., trials}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaBinomial {
    trials: u32,
    a: f64,
    b: f64,
}

impl BetaBinomial {
    pub fn new(trials: u32, a: f64, b: f64) -> Result<Self> {
        if trials == 0 {
            return Err(invalid("beta-binomial needs at least one trial"));
        }
        Beta::new(a, b)?;
        Ok(BetaBinomial { trials, a, b })
    }

    pub fn trials(&self) -> u32 {
        self.trials
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// Probability of a success on a single trial.
    pub fn success_mass(&self) -> f64 {
        self.a / (self.a + self.b)
    }

    fn atom(&self, x: f64) -> Option<u32> {
        (x >= 0.0 && x <= self.trials as f64 && x.fract() == 0.0).then_some(x as u32)
    }

    pub fn pmf(&self, x: f64) -> f64 {
        match self.atom(x) {
            None => 0.0,
            // single trial: exact ratio, no log-gamma round trip
            Some(k) if self.trials == 1 => {
                if k == 1 {
                    self.a / (self.a + self.b)
                } else {
                    self.b / (self.a + self.b)
                }
            }
            Some(k) => {
                let (n, k) = (self.trials as f64, k as f64);
                let ln_choose = ln_gamma(n + 1.0) - ln_gamma(k + 1.0) - ln_gamma(n - k + 1.0);
                ln_choose.exp() * (ln_beta(k + self.a, n - k + self.b) - ln_beta(self.a, self.b)).exp()
            }
        }
    }

    pub fn ln_pmf(&self, x: f64) -> f64 {
        match self.atom(x) {
            None => f64::NEG_INFINITY,
            Some(_) if self.trials == 1 => self.pmf(x).ln(),
            Some(k) => {
                let (n, k) = (self.trials as f64, k as f64);
                ln_gamma(n + 1.0) - ln_gamma(k + 1.0) - ln_gamma(n - k + 1.0)
                    + ln_beta(k + self.a, n - k + self.b)
                    - ln_beta(self.a, self.b)
            }
        }
    }
}

/// Finite mixture of normals.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalMixture {
    weights: Vec<f64>,
    components: Vec<Normal>,
}

impl NormalMixture {
    pub fn new(weights: Vec<f64>, components: Vec<Normal>) -> Result<Self> {
        if weights.is_empty() || weights.len() != components.len() {
            return Err(invalid("mixture needs one weight per component and at least one component"));
        }
        if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(invalid("mixture weights must be nonnegative"));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(invalid(format!("mixture weights must sum to 1, got {total}")));
        }
        Ok(NormalMixture { weights, components })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn components(&self) -> &[Normal] {
        &self.components
    }

    pub fn ln_pdf(&self, x: f64) -> f64 {
        let terms: Vec<f64> = self
            .weights
            .iter()
            .zip(&self.components)
            .map(|(w, c)| w.ln() + c.ln_pdf(x))
            .collect();
        log_sum_exp(&terms)
    }

    pub fn pdf(&self, x: f64) -> f64 {
        self.weights.iter().zip(&self.components).map(|(w, c)| w * c.pdf(x)).sum()
    }

    pub fn cdf(&self, x: f64) -> f64 {
        self.weights.iter().zip(&self.components).map(|(w, c)| w * c.cdf(x)).sum()
    }

    fn draw(&self, rng: &mut RandomSource) -> f64 {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (w, c) in self.weights.iter().zip(&self.components) {
            acc += w;
            if u < acc {
                return c.draw(rng);
            }
        }
        // u landed in the rounding gap above the cumulative sum
        let last = self.weights.iter().rposition(|w| *w > 0.0).unwrap_or(0);
        self.components[last].draw(rng)
    }
}

pub(crate) fn log_sum_exp(terms: &[f64]) -> f64 {
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln()
}

/// An evaluable, sampleable univariate law.
#[derive(Debug, Clone, PartialEq)]
pub enum DensityKernel {
    Normal(Normal),
    StudentT(StudentT),
    Bernoulli(Bernoulli),
    Beta(Beta),
    BetaBinomial(BetaBinomial),
    NormalMixture(NormalMixture),
}

impl DensityKernel {
    pub fn normal(mean: f64, sd: f64) -> Result<Self> {
        Normal::new(mean, sd).map(DensityKernel::Normal)
    }

    pub fn student_t(df: f64, loc: f64, scale: f64) -> Result<Self> {
        StudentT::new(df, loc, scale).map(DensityKernel::StudentT)
    }

    pub fn bernoulli(p: f64) -> Result<Self> {
        Bernoulli::new(p).map(DensityKernel::Bernoulli)
    }

    pub fn beta(a: f64, b: f64) -> Result<Self> {
        Beta::new(a, b).map(DensityKernel::Beta)
    }

    pub fn beta_binomial(trials: u32, a: f64, b: f64) -> Result<Self> {
        BetaBinomial::new(trials, a, b).map(DensityKernel::BetaBinomial)
    }

    pub fn normal_mixture(weights: Vec<f64>, components: Vec<Normal>) -> Result<Self> {
        NormalMixture::new(weights, components).map(DensityKernel::NormalMixture)
    }

    /// Natural log of the density (continuous) or mass (discrete) at `x`.
    /// Returns negative infinity where the mass is exactly zero.
    pub fn log_density(&self, x: f64) -> f64 {
        match self {
            DensityKernel::Normal(k) => k.ln_pdf(x),
            DensityKernel::StudentT(k) => k.ln_pdf(x),
            DensityKernel::Bernoulli(k) => k.ln_pmf(x),
            DensityKernel::Beta(k) => k.ln_pdf(x),
            DensityKernel::BetaBinomial(k) => k.ln_pmf(x),
            DensityKernel::NormalMixture(k) => k.ln_pdf(x),
        }
    }

    /// Density or mass at `x`, computed directly rather than by exponentiating
    /// [`DensityKernel::log_density`].
    pub fn density(&self, x: f64) -> f64 {
        match self {
            DensityKernel::Normal(k) => k.pdf(x),
            DensityKernel::StudentT(k) => k.pdf(x),
            DensityKernel::Bernoulli(k) => k.pmf(x),
            DensityKernel::Beta(k) => k.pdf(x),
            DensityKernel::BetaBinomial(k) => k.pmf(x),
            DensityKernel::NormalMixture(k) => k.pdf(x),
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            DensityKernel::Normal(k) => k.cdf(x),
            DensityKernel::StudentT(k) => k.cdf(x),
            DensityKernel::Beta(k) => k.cdf(x),
            DensityKernel::NormalMixture(k) => k.cdf(x),
            DensityKernel::Bernoulli(_) | DensityKernel::BetaBinomial(_) => {
                let floor = x.floor();
                match self.support() {
                    Support::FiniteSet(points) => points
                        .iter()
                        .take_while(|p| (**p as f64) <= floor)
                        .map(|p| self.density(*p as f64))
                        .sum::<f64>()
                        .min(1.0),
                    Support::ContinuousInterval { .. } => unreachable!("discrete kernel"),
                }
            }
        }
    }

    pub fn sample(&self, rng: &mut RandomSource) -> f64 {
        match self {
            DensityKernel::Normal(k) => k.draw(rng),
            DensityKernel::StudentT(k) => k.draw(rng),
            DensityKernel::Bernoulli(k) => {
                if rng.random::<f64>() < k.p {
                    1.0
                } else {
                    0.0
                }
            }
            DensityKernel::Beta(k) => rand_distr::Beta::new(k.a, k.b).expect("validated shapes").sample(rng),
            DensityKernel::BetaBinomial(k) => {
                let p: f64 = rand_distr::Beta::new(k.a, k.b).expect("validated shapes").sample(rng);
                (0..k.trials).filter(|_| rng.random::<f64>() < p).count() as f64
            }
            DensityKernel::NormalMixture(k) => k.draw(rng),
        }
    }

    pub fn support(&self) -> Support {
        match self {
            DensityKernel::Normal(_) | DensityKernel::StudentT(_) | DensityKernel::NormalMixture(_) => {
                Support::ContinuousInterval { lo: f64::NEG_INFINITY, hi: f64::INFINITY }
            }
            DensityKernel::Beta(_) => Support::ContinuousInterval { lo: 0.0, hi: 1.0 },
            DensityKernel::Bernoulli(_) => Support::FiniteSet(vec![0, 1]),
            DensityKernel::BetaBinomial(k) => Support::FiniteSet((0..=k.trials as i64).collect()),
        }
    }

    pub fn is_discrete(&self) -> bool {
        matches!(self, DensityKernel::Bernoulli(_) | DensityKernel::BetaBinomial(_))
    }

    /// Integration windows `(location, spread, half_width)`: one per unimodal
    /// kernel, one per mixture component. The half-width is 12 spreads, widened
    /// for Student-t to the point where under 1e-13 of the mass lies beyond.
    pub(crate) fn windows(&self) -> Vec<(f64, f64, f64)> {
        const SPREADS: f64 = 12.0;
        match self {
            DensityKernel::Normal(k) => vec![(k.mean, k.sd, SPREADS * k.sd)],
            DensityKernel::StudentT(k) => {
                let spread = k.effective_sd().unwrap_or(k.scale);
                let half = (SPREADS * spread).max(k.two_sided_quantile(1e-13));
                vec![(k.loc, spread, half)]
            }
            DensityKernel::Beta(k) => {
                let s = k.a + k.b;
                let sd = (k.a * k.b / (s * s * (s + 1.0))).sqrt();
                vec![(k.a / s, sd, SPREADS * sd)]
            }
            DensityKernel::NormalMixture(k) => k
                .weights
                .iter()
                .zip(&k.components)
                .filter(|(w, _)| **w > 0.0)
                .map(|(_, c)| (c.mean, c.sd, SPREADS * c.sd))
                .collect(),
            DensityKernel::Bernoulli(_) | DensityKernel::BetaBinomial(_) => Vec::new(),
        }
    }
}

impl From<Normal> for DensityKernel {
    fn from(k: Normal) -> Self {
        DensityKernel::Normal(k)
    }
}
