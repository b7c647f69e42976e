//! Distances between predictive laws.
//!
//! Continuous pairs go through [`QuadratureSpec`]; discrete pairs are summed
//! exactly over the union of their atoms. Pairs with one continuous and one
//! discrete kernel are rejected.

mod quadrature;

pub use quadrature::{integrate, QuadratureSpec};

use crate::dists::{DensityKernel, Normal, Support};
use crate::error::{Error, Result};

fn atoms(p: &DensityKernel, q: &DensityKernel) -> Result<Option<Vec<f64>>> {
    match (p.support(), q.support()) {
        (Support::FiniteSet(a), Support::FiniteSet(b)) => {
            let mut all: Vec<i64> = a.into_iter().chain(b).collect();
            all.sort_unstable();
            all.dedup();
            Ok(Some(all.into_iter().map(|x| x as f64).collect()))
        }
        (Support::ContinuousInterval { .. }, Support::ContinuousInterval { .. }) => Ok(None),
        _ => Err(Error::IncompatibleSupport),
    }
}

/// Total variation distance ½∫|p − q|, clamped to [0, 1].
pub fn tvd(p: &DensityKernel, q: &DensityKernel, quad: &QuadratureSpec) -> Result<f64> {
    let raw = match atoms(p, q)? {
        Some(points) => 0.5 * points.iter().map(|x| (p.density(*x) - q.density(*x)).abs()).sum::<f64>(),
        None => 0.5 * quad.integrate_over(&[p, q], |x| (p.density(x) - q.density(x)).abs()),
    };
    Ok(raw.clamp(0.0, 1.0))
}

/// Squared Hellinger distance ½∫(√p − √q)², clamped to [0, 1].
pub fn hellinger_sq(p: &DensityKernel, q: &DensityKernel, quad: &QuadratureSpec) -> Result<f64> {
    let gap = |x: f64| {
        let d = p.density(x).sqrt() - q.density(x).sqrt();
        d * d
    };
    let raw = match atoms(p, q)? {
        Some(points) => 0.5 * points.iter().map(|x| gap(*x)).sum::<f64>(),
        None => 0.5 * quad.integrate_over(&[p, q], gap),
    };
    Ok(raw.clamp(0.0, 1.0))
}

fn kl_term(p: &DensityKernel, q: &DensityKernel, x: f64) -> f64 {
    let lp = p.log_density(x);
    if lp == f64::NEG_INFINITY {
        return 0.0;
    }
    let lq = q.log_density(x);
    if lq == f64::NEG_INFINITY {
        return f64::INFINITY;
    }
    lp.exp() * (lp - lq)
}

fn support_contained(p: &Support, q: &Support) -> bool {
    match (p, q) {
        (Support::ContinuousInterval { lo: plo, hi: phi }, Support::ContinuousInterval { lo: qlo, hi: qhi }) => {
            qlo <= plo && phi <= qhi
        }
        (Support::FiniteSet(a), Support::FiniteSet(b)) => a.iter().all(|x| b.binary_search(x).is_ok()),
        _ => false,
    }
}

/// Kullback–Leibler divergence ∫ p log(p/q). Returns +∞ when p charges a
/// region q does not.
pub fn kl(p: &DensityKernel, q: &DensityKernel, quad: &QuadratureSpec) -> Result<f64> {
    if let (DensityKernel::Normal(a), DensityKernel::Normal(b)) = (p, q) {
        if a == b {
            return Ok(0.0);
        }
    }
    match atoms(p, q)? {
        Some(points) => {
            let total: f64 = points.iter().map(|x| kl_term(p, q, *x)).sum();
            Ok(total.max(0.0))
        }
        None => {
            if !support_contained(&p.support(), &q.support()) {
                return Ok(f64::INFINITY);
            }
            Ok(quad.integrate_over(&[p, q], |x| kl_term(p, q, x)).max(0.0))
        }
    }
}

/// Closed-form KL between two normals.
pub fn kl_normal(p: &Normal, q: &Normal) -> f64 {
    let ratio = p.variance() / q.variance();
    let shift = p.mean() - q.mean();
    // log(σq/σp) + (σp² + Δ²)/(2σq²) − ½, arranged to stay accurate near p = q
    let value = 0.5 * (ratio - 1.0 - ratio.ln()) + shift * shift / (2.0 * q.variance());
    value.max(0.0)
}

/// Dispatches to [`kl_normal`] for normal pairs and to [`kl`] otherwise.
pub fn kl_auto(p: &DensityKernel, q: &DensityKernel, quad: &QuadratureSpec) -> Result<f64> {
    match (p, q) {
        (DensityKernel::Normal(a), DensityKernel::Normal(b)) => Ok(kl_normal(a, b)),
        _ => kl(p, q, quad),
    }
}
