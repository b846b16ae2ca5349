//! Dark-period detection and dwell-time statistics: from a binned
//! fluorescence trace to the counting function `N(t)`, the fitted lifetime,
//! and the comparisons against the Born survival probability and the
//! resonance width.

use crate::jump::FluorescenceTrace;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum AnalysisError {
    #[error("no bright level: the trace has no counts to calibrate against")]
    NoBrightLevel,
    #[error("negative duration {0} rejected: durations are measured from preparation")]
    NegativeDuration(f64),
    #[error("lifetime fit needs at least 2 usable points, got {0}")]
    InsufficientPoints(usize),
    #[error("data do not decay: fitted log-slope {0} is not negative")]
    NonDecayingData(f64),
    #[error("threshold fraction must lie in (0, 1), got {0}")]
    BadThreshold(f64),
    #[error("minimum dark run must be >= 1 bin")]
    BadMinDarkBins,
    #[error("survival curve needs bin > 0 and t_max >= bin")]
    BadCurveGrid,
}

/// One detected dark period on the laboratory clock.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DarkPeriod {
    pub t0_s: f64,
    pub t1_s: f64,
}

impl DarkPeriod {
    pub fn dwell_s(&self) -> f64 {
        self.t1_s - self.t0_s
    }
}

/// The dwell times of the experimental ensemble; the onset times all map to
/// the single evolution-parameter origin `t = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct DwellEnsemble {
    dwells_s: Vec<f64>,
}

impl DwellEnsemble {
    /// Durations must all be positive.
    pub fn new(dwells_s: Vec<f64>) -> Result<Self, AnalysisError> {
        if dwells_s.is_empty() {
            return Err(AnalysisError::InsufficientPoints(0));
        }
        if let Some(&bad) = dwells_s.iter().find(|&&d| !(d > 0.0)) {
            return Err(AnalysisError::NegativeDuration(bad));
        }
        Ok(Self { dwells_s })
    }

    pub fn from_periods(periods: &[DarkPeriod]) -> Result<Self, AnalysisError> {
        Self::new(periods.iter().map(|p| p.dwell_s()).collect())
    }

    pub fn dwells_s(&self) -> &[f64] {
        &self.dwells_s
    }

    pub fn m(&self) -> usize {
        self.dwells_s.len()
    }
}

/// `N(t)` evaluated on a regular duration grid, with the counting ratio
/// `N(t)/M`.
#[derive(Debug, Clone, PartialEq)]
pub struct SurvivalCurve {
    pub t_s: Vec<f64>,
    pub n_of_t: Vec<u64>,
    pub ratio: Vec<f64>,
    pub m: usize,
}

/// Weighted log-linear lifetime fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitResult {
    pub tau_s: f64,
    pub tau_stderr_s: f64,
    pub log_intercept: f64,
    pub points_used: usize,
}

/// Counting ratio vs Born probability comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    /// `sup_t |N(t)/M - e^{-t/τ}|` over the curve points.
    pub sup_deviation: f64,
    /// Kolmogorov-Smirnov statistic of the raw dwells vs Exponential(1/τ),
    /// when the ensemble was supplied.
    pub ks_statistic: Option<f64>,
    /// `1.36/√M`, the α = 0.05 critical value.
    pub ks_critical: f64,
    pub ks_pass: Option<bool>,
    /// Rows `(t, ratio, born)` for the pointwise table.
    pub rows: Vec<(f64, f64, f64)>,
}

/// Lifetime–width consistency report.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LifetimeWidthReport {
    pub tau_from_width_s: f64,
    pub tau_fitted_s: f64,
    /// `(fitted - from_width) / sqrt(stderr² + width_err²)`.
    pub pull: f64,
    /// `|pull| < 3`.
    pub consistent: bool,
}

/// Detect dark periods in a trace.
///
/// The bright level is the median of all bins above half the global maximum;
/// a bin is dark when its count falls below `threshold_frac` times that
/// level. Maximal runs of at least `min_dark_bins` dark bins become periods
/// with `t0` the left edge of the first dark bin and `t1` the right edge of
/// the last one. Runs touching either end of the trace are censored and
/// discarded.
pub fn detect_dark_periods(
    trace: &FluorescenceTrace,
    threshold_frac: f64,
    min_dark_bins: usize,
) -> Result<Vec<DarkPeriod>, AnalysisError> {
    if !(threshold_frac > 0.0 && threshold_frac < 1.0) {
        return Err(AnalysisError::BadThreshold(threshold_frac));
    }
    if min_dark_bins == 0 {
        return Err(AnalysisError::BadMinDarkBins);
    }
    let max = trace.counts.iter().copied().max().unwrap_or(0);
    if max == 0 {
        return Err(AnalysisError::NoBrightLevel);
    }
    let mut bright: Vec<u32> = trace
        .counts
        .iter()
        .copied()
        .filter(|&c| c as f64 > 0.5 * max as f64)
        .collect();
    bright.sort_unstable();
    let bright_level = if bright.len() % 2 == 1 {
        bright[bright.len() / 2] as f64
    } else {
        0.5 * (bright[bright.len() / 2 - 1] as f64 + bright[bright.len() / 2] as f64)
    };
    let threshold = threshold_frac * bright_level;

    let w = trace.bin_width_s;
    let n = trace.counts.len();
    let mut periods = Vec::new();
    let mut run_start: Option<usize> = None;
    for k in 0..=n {
        let dark = k < n && (trace.counts[k] as f64) < threshold;
        match (dark, run_start) {
            (true, None) => run_start = Some(k),
            (false, Some(start)) => {
                let len = k - start;
                let touches_boundary = start == 0 || k == n;
                if len >= min_dark_bins && !touches_boundary {
                    periods.push(DarkPeriod {
                        t0_s: trace.t_start_s + start as f64 * w,
                        t1_s: trace.t_start_s + k as f64 * w,
                    });
                }
                run_start = None;
            }
            _ => {}
        }
    }
    Ok(periods)
}

/// `N(t)`: the number of dwell times strictly longer than `t`.
pub fn counting_function(ens: &DwellEnsemble, t: f64) -> Result<u64, AnalysisError> {
    if t < 0.0 || !t.is_finite() {
        return Err(AnalysisError::NegativeDuration(t));
    }
    Ok(ens.dwells_s.iter().filter(|&&d| d > t).count() as u64)
}

/// Evaluate the counting function on `t = 0, bin, 2·bin, … <= t_max`.
pub fn survival_curve(
    ens: &DwellEnsemble,
    bin_s: f64,
    t_max_s: f64,
) -> Result<SurvivalCurve, AnalysisError> {
    if !(bin_s > 0.0) || !(t_max_s >= bin_s) {
        return Err(AnalysisError::BadCurveGrid);
    }
    let m = ens.m();
    let mut t_s = Vec::new();
    let mut n_of_t = Vec::new();
    let mut ratio = Vec::new();
    let mut k = 0u64;
    loop {
        let t = k as f64 * bin_s;
        if t > t_max_s {
            break;
        }
        let n = counting_function(ens, t)?;
        t_s.push(t);
        n_of_t.push(n);
        ratio.push(n as f64 / m as f64);
        k += 1;
    }
    Ok(SurvivalCurve {
        t_s,
        n_of_t,
        ratio,
        m,
    })
}

/// Weighted least squares on `(t, ln N(t))` over points with `N(t) > 0`,
/// with weights `N(t)`; the lifetime is the negative inverse of the slope.
pub fn fit_lifetime(curve: &SurvivalCurve) -> Result<FitResult, AnalysisError> {
    let pts: Vec<(f64, f64, f64)> = curve
        .t_s
        .iter()
        .zip(&curve.n_of_t)
        .filter(|(_, &n)| n > 0)
        .map(|(&t, &n)| (t, (n as f64).ln(), n as f64))
        .collect();
    if pts.len() < 2 {
        return Err(AnalysisError::InsufficientPoints(pts.len()));
    }

    let sw: f64 = pts.iter().map(|p| p.2).sum();
    let t_bar = pts.iter().map(|p| p.0 * p.2).sum::<f64>() / sw;
    let y_bar = pts.iter().map(|p| p.1 * p.2).sum::<f64>() / sw;
    let sxx: f64 = pts.iter().map(|p| p.2 * (p.0 - t_bar).powi(2)).sum();
    let sxy: f64 = pts
        .iter()
        .map(|p| p.2 * (p.0 - t_bar) * (p.1 - y_bar))
        .sum();
    if sxx == 0.0 {
        return Err(AnalysisError::InsufficientPoints(pts.len()));
    }
    let slope = sxy / sxx;
    if slope >= 0.0 {
        return Err(AnalysisError::NonDecayingData(slope));
    }
    let intercept = y_bar - slope * t_bar;

    // Slope variance from weighted residuals; a two-point fit is exact.
    let tau_stderr_s = if pts.len() > 2 {
        let ss_res: f64 = pts
            .iter()
            .map(|p| p.2 * (p.1 - (intercept + slope * p.0)).powi(2))
            .sum();
        let sigma_sq = ss_res / (pts.len() as f64 - 2.0);
        let slope_var = sigma_sq / sxx;
        slope_var.sqrt() / (slope * slope)
    } else {
        0.0
    };

    Ok(FitResult {
        tau_s: -1.0 / slope,
        tau_stderr_s,
        log_intercept: intercept,
        points_used: pts.len(),
    })
}

/// Born survival probability `e^{-t/τ}` of a state prepared at `t = 0`.
pub fn born_survival(tau_s: f64, t: f64) -> Result<f64, AnalysisError> {
    if t < 0.0 || !t.is_finite() {
        return Err(AnalysisError::NegativeDuration(t));
    }
    Ok((-t / tau_s).exp())
}

/// Kolmogorov-Smirnov statistic of `sample` against Exponential(1/τ).
fn ks_statistic_exponential(sample: &[f64], tau_s: f64) -> f64 {
    let mut sorted = sample.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut sup = 0.0f64;
    for (i, &x) in sorted.iter().enumerate() {
        let cdf = 1.0 - (-x / tau_s).exp();
        sup = sup
            .max((cdf - i as f64 / n).abs())
            .max(((i + 1) as f64 / n - cdf).abs());
    }
    sup
}

/// Compare the counting ratio `N(t)/M` with the Born probability
/// `e^{-t/τ}`, pointwise and (when the raw ensemble is supplied) by a KS
/// test against Exponential(1/τ) at the α = 0.05 bound `1.36/√M`.
pub fn compare_counting_to_born(
    curve: &SurvivalCurve,
    tau_s: f64,
    dwells: Option<&DwellEnsemble>,
) -> Result<ComparisonReport, AnalysisError> {
    if !(tau_s > 0.0) {
        return Err(AnalysisError::NonDecayingData(tau_s));
    }
    let mut rows = Vec::with_capacity(curve.t_s.len());
    let mut sup = 0.0f64;
    for (&t, &r) in curve.t_s.iter().zip(&curve.ratio) {
        let born = born_survival(tau_s, t)?;
        sup = sup.max((r - born).abs());
        rows.push((t, r, born));
    }
    let ks_critical = 1.36 / (curve.m as f64).sqrt();
    let ks_statistic = dwells.map(|d| ks_statistic_exponential(d.dwells_s(), tau_s));
    let ks_pass = ks_statistic.map(|k| k < ks_critical);
    Ok(ComparisonReport {
        sup_deviation: sup,
        ks_statistic,
        ks_critical,
        ks_pass,
        rows,
    })
}

/// Compare the fitted lifetime with `ħ/Γ`.
///
/// The pull is `(fitted − ħ/Γ)/sqrt(stderr² + width_err²)`; the report calls
/// the two consistent when `|pull| < 3`.
pub fn lifetime_width_report(
    gamma_energy: f64,
    fitted: &FitResult,
    hbar: f64,
    width_err_s: Option<f64>,
) -> LifetimeWidthReport {
    let tau_from_width_s = hbar / gamma_energy;
    let var = fitted.tau_stderr_s.powi(2) + width_err_s.unwrap_or(0.0).powi(2);
    let pull = if var > 0.0 {
        (fitted.tau_s - tau_from_width_s) / var.sqrt()
    } else if fitted.tau_s == tau_from_width_s {
        0.0
    } else {
        f64::INFINITY * (fitted.tau_s - tau_from_width_s).signum()
    };
    LifetimeWidthReport {
        tau_from_width_s,
        tau_fitted_s: fitted.tau_s,
        pull,
        consistent: pull.abs() < 3.0,
    }
}
