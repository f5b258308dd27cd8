//! Distribution fitting: exponential, power law, normal (with KS test) and
//! exponential growth.
//!
//! All regression-style fits are ordinary least squares in log space, the
//! simplest method that reproduces published parameters for this kind of
//! data. Zero-count bins are skipped rather than smoothed (their log is
//! undefined); the number of bins actually used is recorded in each result.
//!
//! The KS p-value comes from the asymptotic Kolmogorov series. When the
//! normal parameters were themselves fitted from the sample this is
//! formally a Lilliefors setting and the classical p is optimistic; report
//! renderers print that caveat.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metrics::{Histogram, LevelHistogram, RankTable};

/// Decay fit for `count(n) ~ e^(-lambda * n)` over an integer support.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentialFit {
    pub lambda: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub support: (u32, u32),
    pub bins_used: usize,
}

/// Power-law fit for `count(x) ~ x^(-exponent)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub exponent: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub support: (u32, u32),
    pub bins_used: usize,
}

/// Weighted normal fit over binned integer data, with its KS statistic.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalFit {
    pub mean: f64,
    /// Population standard deviation.
    pub sigma: f64,
    pub n: u64,
    pub ks_statistic: f64,
    pub ks_p: f64,
}

/// Exponential growth fit; `monthly_rate` is the fractional growth per step.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthFit {
    pub monthly_rate: f64,
    pub r_squared: f64,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FitError {
    #[error("need at least {needed} usable bins, found {found}")]
    InsufficientBins { needed: usize, found: usize },
    #[error("insufficient data: {0}")]
    InsufficientData(&'static str),
    #[error("degenerate distribution: {0}")]
    DegenerateDistribution(&'static str),
    #[error("non-positive count at point {0}")]
    NonPositiveCount(usize),
}

/// Ordinary least squares over (x, y) points: slope, intercept, r-squared.
/// r-squared is 1 when the residuals vanish, including the constant case.
fn ols(points: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    let sxy: f64 = points
        .iter()
        .map(|p| (p.0 - mean_x) * (p.1 - mean_y))
        .sum();
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let ss_res: f64 = points
        .iter()
        .map(|p| (p.1 - (intercept + slope * p.0)).powi(2))
        .sum();
    let ss_tot: f64 = points.iter().map(|p| (p.1 - mean_y).powi(2)).sum();
    // Constant data leaves ss_tot at rounding-noise scale; that is an exact
    // fit, not a zero-variance-explained one.
    let noise_floor = 1e-24 * points.iter().map(|p| p.1 * p.1).sum::<f64>().max(1.0);
    let r2 = if ss_tot > noise_floor {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    } else {
        1.0
    };
    (slope, intercept, r2)
}

/// Fit `count(n) ~ e^(-lambda n)` on the bins with positive count inside
/// `[nmin, nmax]`; lambda is minus the log-space slope.
pub fn fit_exponential(hist: &Histogram, nmin: u32, nmax: u32) -> Result<ExponentialFit, FitError> {
    let points: Vec<(f64, f64)> = hist
        .bins
        .iter()
        .filter(|&(&n, &c)| n >= nmin && n <= nmax && c > 0)
        .map(|(&n, &c)| (n as f64, (c as f64).ln()))
        .collect();
    if points.len() < 2 {
        return Err(FitError::InsufficientBins {
            needed: 2,
            found: points.len(),
        });
    }
    let (slope, intercept, r2) = ols(&points);
    Ok(ExponentialFit {
        lambda: -slope,
        intercept,
        r_squared: r2,
        support: (nmin, nmax),
        bins_used: points.len(),
    })
}

/// Fit `count ~ rank^(-exponent)` over explicit (rank, count) pairs with
/// rank <= kmax. The rank column is taken as given, so tables transcribed
/// from published sources keep their printed order.
pub fn fit_power_law_pairs(pairs: &[(u32, u64)], kmax: u32) -> Result<PowerLawFit, FitError> {
    let points: Vec<(f64, f64)> = pairs
        .iter()
        .filter(|&&(rank, count)| rank >= 1 && rank <= kmax && count > 0)
        .map(|&(rank, count)| ((rank as f64).ln(), (count as f64).ln()))
        .collect();
    if points.len() < 2 {
        return Err(FitError::InsufficientBins {
            needed: 2,
            found: points.len(),
        });
    }
    let (slope, intercept, r2) = ols(&points);
    let lo = pairs
        .iter()
        .filter(|&&(r, c)| r >= 1 && r <= kmax && c > 0)
        .map(|&(r, _)| r)
        .min()
        .unwrap_or(1);
    let hi = pairs
        .iter()
        .filter(|&&(r, c)| r >= 1 && r <= kmax && c > 0)
        .map(|&(r, _)| r)
        .max()
        .unwrap_or(kmax);
    Ok(PowerLawFit {
        exponent: -slope,
        intercept,
        r_squared: r2,
        support: (lo, hi),
        bins_used: points.len(),
    })
}

/// Fit a power law to the top `kmax` entries of a rank table.
pub fn fit_power_law_ranks(table: &RankTable, kmax: usize) -> Result<PowerLawFit, FitError> {
    let pairs: Vec<(u32, u64)> = table
        .entries
        .iter()
        .take(kmax)
        .enumerate()
        .map(|(i, e)| (i as u32 + 1, e.count))
        .collect();
    fit_power_law_pairs(&pairs, kmax as u32)
}

/// Fit the tail of a histogram (`n >= nmin`, count >= `count_floor`) with a
/// power law in n.
pub fn fit_power_law_tail(
    hist: &Histogram,
    nmin: u32,
    count_floor: u64,
) -> Result<PowerLawFit, FitError> {
    let points: Vec<(f64, f64)> = hist
        .bins
        .iter()
        .filter(|&(&n, &c)| n >= nmin && c >= count_floor.max(1))
        .map(|(&n, &c)| ((n as f64).ln(), (c as f64).ln()))
        .collect();
    if points.len() < 2 {
        return Err(FitError::InsufficientBins {
            needed: 2,
            found: points.len(),
        });
    }
    let (slope, intercept, r2) = ols(&points);
    let used: Vec<u32> = hist
        .bins
        .iter()
        .filter(|&(&n, &c)| n >= nmin && c >= count_floor.max(1))
        .map(|(&n, _)| n)
        .collect();
    Ok(PowerLawFit {
        exponent: -slope,
        intercept,
        r_squared: r2,
        support: (*used.first().unwrap(), *used.last().unwrap()),
        bins_used: points.len(),
    })
}

/// Weighted population mean and standard deviation over binned levels,
/// followed by a KS test against the fitted normal.
///
/// With `exclude_level0` the whole level-0 bucket (roots plus descriptors
/// that never reach a top) is dropped before fitting; reproducing published
/// level statistics requires this.
pub fn fit_normal(levels: &LevelHistogram, exclude_level0: bool) -> Result<NormalFit, FitError> {
    let included: Vec<(u32, u64)> = levels
        .bins
        .iter()
        .filter(|&(&l, &c)| c > 0 && !(exclude_level0 && l == 0))
        .map(|(&l, &c)| (l, c))
        .collect();
    if included.len() < 2 {
        return Err(FitError::InsufficientData(
            "need at least two distinct levels with counts",
        ));
    }
    let n: u64 = included.iter().map(|&(_, c)| c).sum();
    let nf = n as f64;
    let mean = included
        .iter()
        .map(|&(l, c)| l as f64 * c as f64)
        .sum::<f64>()
        / nf;
    let variance = included
        .iter()
        .map(|&(l, c)| c as f64 * (l as f64 - mean).powi(2))
        .sum::<f64>()
        / nf;
    let sigma = variance.sqrt();
    if sigma <= 0.0 {
        return Err(FitError::InsufficientData(
            "sigma undefined for a single distinct level",
        ));
    }
    let sample = Histogram::from_counts(included.iter().copied());
    let (ks_statistic, ks_p) = ks_test(&sample, mean, sigma)?;
    Ok(NormalFit {
        mean,
        sigma,
        n,
        ks_statistic,
        ks_p,
    })
}

/// Standard normal CDF via the complementary error function.
pub fn normal_cdf(x: f64, mean: f64, sigma: f64) -> f64 {
    0.5 * erfc(-(x - mean) / (sigma * std::f64::consts::SQRT_2))
}

/// Standard normal density.
pub fn normal_pdf(x: f64, mean: f64, sigma: f64) -> f64 {
    let z = (x - mean) / sigma;
    (-0.5 * z * z).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt())
}

/// Complementary error function, Numerical-Recipes style Chebyshev fit;
/// absolute error below 1.2e-7 everywhere, which is far inside what binned
/// counts can resolve.
fn erfc(x: f64) -> f64 {
    let z = x.abs();
    let t = 1.0 / (1.0 + 0.5 * z);
    let ans = t
        * (-z * z - 1.26551223
            + t * (1.00002368
                + t * (0.37409196
                    + t * (0.09678418
                        + t * (-0.18628806
                            + t * (0.27886807
                                + t * (-1.13520398
                                    + t * (1.48851587
                                        + t * (-0.82215223 + t * 0.17087277)))))))))
        .exp();
    if x >= 0.0 {
        ans
    } else {
        2.0 - ans
    }
}

/// Kolmogorov-Smirnov test of a binned integer sample against a normal.
///
/// The statistic is the supremum of |empirical CDF - model CDF| over the
/// integer right edges spanning the sample. The p-value is the asymptotic
/// Kolmogorov series at `sqrt(n) * D`, truncated once terms drop below
/// 1e-12.
pub fn ks_test(sample: &Histogram, mean: f64, sigma: f64) -> Result<(f64, f64), FitError> {
    if sigma <= 0.0 {
        return Err(FitError::DegenerateDistribution("sigma must be positive"));
    }
    if sample.total == 0 {
        return Err(FitError::DegenerateDistribution("empty sample"));
    }
    let lo = *sample.bins.keys().next().unwrap();
    let hi = *sample.bins.keys().next_back().unwrap();
    let n = sample.total as f64;
    let mut cum = 0u64;
    let mut d = 0.0f64;
    for edge in lo..=hi {
        cum += sample.count(edge);
        let ecdf = cum as f64 / n;
        let model = normal_cdf(edge as f64, mean, sigma);
        let dev = (ecdf - model).abs();
        if dev > d {
            d = dev;
        }
    }
    Ok((d, kolmogorov_p(n.sqrt() * d)))
}

/// Asymptotic Kolmogorov survival function Q(z) = 2 sum (-1)^(k-1) e^(-2 k^2 z^2).
pub fn kolmogorov_p(z: f64) -> f64 {
    if z <= 0.0 {
        return 1.0;
    }
    let mut sum = 0.0f64;
    let mut k = 1u32;
    loop {
        let term = (-2.0 * (k as f64).powi(2) * z * z).exp();
        if term < 1e-12 || k > 100_000 {
            break;
        }
        if k % 2 == 1 {
            sum += term;
        } else {
            sum -= term;
        }
        k += 1;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Fit exponential growth to a (month, count) series: OLS on log counts,
/// rate = e^slope - 1.
pub fn fit_growth(series: &[(u32, u64)]) -> Result<GrowthFit, FitError> {
    if series.len() < 2 {
        return Err(FitError::InsufficientData("need at least two time points"));
    }
    for (i, &(_, c)) in series.iter().enumerate() {
        if c == 0 {
            return Err(FitError::NonPositiveCount(i));
        }
    }
    let points: Vec<(f64, f64)> = series
        .iter()
        .map(|&(t, c)| (t as f64, (c as f64).ln()))
        .collect();
    let (slope, _, r2) = ols(&points);
    Ok(GrowthFit {
        monthly_rate: slope.exp() - 1.0,
        r_squared: r2,
    })
}
