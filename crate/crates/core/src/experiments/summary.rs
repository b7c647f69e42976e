use crate::error::{invalid, Result};

use super::ReplicateTable;

/// Summary of one (n, τ) cell across replicates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SummaryPoint {
    pub n: usize,
    pub tau: f64,
    /// Mean over finite values.
    pub mean: f64,
    pub q05: f64,
    pub q95: f64,
    /// Share of replicates whose value was not finite.
    pub degenerate_fraction: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryCurve {
    pub points: Vec<SummaryPoint>,
    pub scaled: bool,
}

impl SummaryCurve {
    /// Points for sample size `n`, in τ order.
    pub fn for_n(&self, n: usize) -> impl Iterator<Item = &SummaryPoint> {
        self.points.iter().filter(move |p| p.n == n)
    }

    /// Distinct sample sizes in order of first appearance.
    pub fn n_values(&self) -> Vec<usize> {
        let mut out: Vec<usize> = Vec::new();
        for p in &self.points {
            if !out.contains(&p.n) {
                out.push(p.n);
            }
        }
        out
    }
}

/// Empirical quantile with linear interpolation between order statistics,
/// position (len − 1)·prob. `sorted` must be ascending and nonempty.
pub(crate) fn quantile(sorted: &[f64], prob: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * prob;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Per-(n, τ) mean and 5%/95% quantiles, optionally scaled by √n. Non-finite
/// values are excluded from the statistics and counted as degenerate.
pub fn summarize(table: &ReplicateTable, scale_by_sqrt_n: bool) -> Result<SummaryCurve> {
    if table.rows.is_empty() {
        return Err(invalid("cannot summarize an empty table"));
    }
    let mut keys: Vec<(usize, f64)> = Vec::new();
    for row in &table.rows {
        if !keys.iter().any(|(n, t)| *n == row.n && *t == row.tau) {
            keys.push((row.n, row.tau));
        }
    }
    let points = keys
        .into_iter()
        .map(|(n, tau)| {
            let factor = if scale_by_sqrt_n { (n as f64).sqrt() } else { 1.0 };
            let all: Vec<f64> = table
                .rows
                .iter()
                .filter(|r| r.n == n && r.tau == tau)
                .map(|r| r.value)
                .collect();
            let mut finite: Vec<f64> = all.iter().copied().filter(|v| v.is_finite()).map(|v| v * factor).collect();
            finite.sort_by(f64::total_cmp);
            let degenerate_fraction = (all.len() - finite.len()) as f64 / all.len() as f64;
            let (mean, q05, q95) = if finite.is_empty() {
                (all[0], all[0], all[0])
            } else {
                let mean = finite.iter().sum::<f64>() / finite.len() as f64;
                (mean, quantile(&finite, 0.05), quantile(&finite, 0.95))
            };
            SummaryPoint { n, tau, mean, q05, q95, degenerate_fraction }
        })
        .collect();
    Ok(SummaryCurve { points, scaled: scale_by_sqrt_n })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlatnessRow {
    pub n: usize,
    /// max − min of the mean curve over the τ window.
    pub spread: f64,
    /// Mean at the grid point nearest τ = 1.
    pub at_unit_tau: f64,
    pub ratio_to_unit_tau: f64,
    /// Smallest mean inside the window.
    pub min: f64,
    pub ratio_to_min: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlatnessReport {
    pub rows: Vec<FlatnessRow>,
}

impl FlatnessReport {
    pub fn row(&self, n: usize) -> Option<&FlatnessRow> {
        self.rows.iter().find(|r| r.n == n)
    }
}

/// How much the mean curve moves across `[tau_lo, tau_hi]`, per sample size.
pub fn flatness(curve: &SummaryCurve, tau_lo: f64, tau_hi: f64) -> Result<FlatnessReport> {
    let within = |t: f64| t >= tau_lo * (1.0 - 1e-12) && t <= tau_hi * (1.0 + 1e-12);
    let rows = curve
        .n_values()
        .into_iter()
        .map(|n| {
            let points: Vec<_> = curve.for_n(n).collect();
            let window: Vec<f64> = points.iter().filter(|p| within(p.tau)).map(|p| p.mean).collect();
            if window.len() < 2 {
                return Err(invalid(format!(
                    "τ window [{tau_lo}, {tau_hi}] covers {} grid points at n = {n}; need at least 2",
                    window.len()
                )));
            }
            let max = window.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let min = window.iter().copied().fold(f64::INFINITY, f64::min);
            let unit = points
                .iter()
                .min_by(|a, b| a.tau.ln().abs().total_cmp(&b.tau.ln().abs()))
                .expect("nonempty curve")
                .mean;
            let spread = max - min;
            Ok(FlatnessRow {
                n,
                spread,
                at_unit_tau: unit,
                ratio_to_unit_tau: spread / unit,
                min,
                ratio_to_min: spread / min,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FlatnessReport { rows })
}
