//! Adaptive Gauss–Legendre quadrature over kernel-driven ranges.

use std::sync::OnceLock;

use crate::dists::{DensityKernel, Support};
use crate::error::{invalid, Result};

const GL_ORDER: usize = 15;
const MAX_DEPTH: u32 = 60;
/// Panels agreeing to within this many ulps of their value count as converged.
const ROUNDING_FLOOR: f64 = 100.0 * f64::EPSILON;

/// Nodes and weights of the Gauss–Legendre rule on [-1, 1].
fn gauss_legendre() -> &'static [(f64, f64)] {
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| legendre_rule(GL_ORDER))
}

/// Newton iteration on P_n from the Chebyshev initial guess.
pub(crate) fn legendre_rule(order: usize) -> Vec<(f64, f64)> {
    let n = order as f64;
    let mut rule = Vec::with_capacity(order);
    for i in 0..order {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n + 0.5)).cos();
        let mut deriv = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=order {
                let k = k as f64;
                let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            deriv = n * (x * p1 - p0) / (x * x - 1.0);
            let step = p1 / deriv;
            x -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        rule.push((x, 2.0 / ((1.0 - x * x) * deriv * deriv)));
    }
    rule.sort_by(|a, b| a.0.total_cmp(&b.0));
    rule
}

fn fixed_rule<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    half * gauss_legendre().iter().map(|(x, w)| w * f(mid + half * x)).sum::<f64>()
}

/// Integrates `f` over the finite interval `[a, b]` to absolute tolerance `tol`.
///
/// Each panel is compared with the sum over its two halves; panels whose
/// disagreement exceeds both their share of the tolerance and the rounding
/// noise of their value are split.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    if !(b > a) {
        return 0.0;
    }
    let mut total = 0.0;
    let mut compensation = 0.0;
    let mut stack = vec![(a, b, fixed_rule(&f, a, b), tol, 0u32)];
    while let Some((lo, hi, whole, local_tol, depth)) = stack.pop() {
        let mid = 0.5 * (lo + hi);
        let left = fixed_rule(&f, lo, mid);
        let right = fixed_rule(&f, mid, hi);
        let refined = left + right;
        let converged = (refined - whole).abs() <= local_tol.max(ROUNDING_FLOOR * refined.abs())
            || depth >= MAX_DEPTH
            || mid <= lo
            || mid >= hi
            || !refined.is_finite();
        if converged {
            // Neumaier summation keeps the accumulated panels order-stable.
            let t = total + refined;
            if total.abs() >= refined.abs() {
                compensation += (total - t) + refined;
            } else {
                compensation += (refined - t) + total;
            }
            total = t;
        } else {
            stack.push((mid, hi, right, 0.5 * local_tol, depth + 1));
            stack.push((lo, mid, left, 0.5 * local_tol, depth + 1));
        }
    }
    total + compensation
}

/// How continuous integrals over kernel pairs are carried out.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    abs_tolerance: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec { abs_tolerance: 1e-10 }
    }
}

impl QuadratureSpec {
    pub fn new(abs_tolerance: f64) -> Result<Self> {
        if !(abs_tolerance > 0.0 && abs_tolerance.is_finite()) {
            return Err(invalid(format!("quadrature tolerance must be positive, got {abs_tolerance}")));
        }
        Ok(QuadratureSpec { abs_tolerance })
    }

    pub fn abs_tolerance(&self) -> f64 {
        self.abs_tolerance
    }

    /// Breakpoints covering the union of each kernel's integration window
    /// (mean ± 12 effective sd, wider for heavy tails), clipped to the kernels'
    /// support hull. Interior breakpoints sit at each location and ±1, ±3, ±12
    /// spreads so narrow components are not skipped, and at every finite
    /// support endpoint, where a density may jump.
    pub fn breakpoints(&self, kernels: &[&DensityKernel]) -> Vec<f64> {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        let mut points = Vec::new();
        for (m, s, half) in kernels.iter().flat_map(|k| k.windows()) {
            lo = lo.min(m - half);
            hi = hi.max(m + half);
            points.extend([m - 12.0 * s, m - 3.0 * s, m - s, m, m + s, m + 3.0 * s, m + 12.0 * s]);
        }
        let (mut sup_lo, mut sup_hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for k in kernels {
            if let Support::ContinuousInterval { lo, hi } = k.support() {
                sup_lo = sup_lo.min(lo);
                sup_hi = sup_hi.max(hi);
                points.extend([lo, hi].into_iter().filter(|e| e.is_finite()));
            }
        }
        lo = lo.max(sup_lo);
        hi = hi.min(sup_hi);
        points.retain(|p| *p > lo && *p < hi);
        points.push(lo);
        points.push(hi);
        points.sort_by(f64::total_cmp);
        points.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * (1.0 + b.abs()));
        points
    }

    /// Integrates `f` over the range the kernels jointly occupy. The tolerance
    /// is split evenly across the panels between breakpoints.
    pub fn integrate_over<F: Fn(f64) -> f64>(&self, kernels: &[&DensityKernel], f: F) -> f64 {
        let points = self.breakpoints(kernels);
        let share = self.abs_tolerance / (points.len() - 1) as f64;
        points.windows(2).map(|w| integrate(&f, w[0], w[1], share)).sum()
    }
}
