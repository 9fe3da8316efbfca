//! Monte-Carlo hardness estimation.
//!
//! The hardness of an instance with respect to a partitioning of size `s`
//! and a complete solver is the total runtime over all cells, which equals
//! `s · E[ξ]` for the runtime `ξ` of a uniformly drawn cell. The estimator
//! samples cells without replacement, reports the sample mean scaled by `s`,
//! and attaches Chebyshev-style confidence statements instantiated with the
//! sample moments (the true moments are what the bounds ask for; the
//! substitution is reported as such).

use alloc::vec::Vec;
use core::fmt;

use crate::randutil::{self, sample_distinct};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum MetricUnit {
    Seconds,
    Conflicts,
    Propagations,
}

impl MetricUnit {
    pub fn name(self) -> &'static str {
        match self {
            MetricUnit::Seconds => "seconds",
            MetricUnit::Conflicts => "conflicts",
            MetricUnit::Propagations => "propagations",
        }
    }

    pub fn from_name(name: &str) -> Option<MetricUnit> {
        match name {
            "seconds" => Some(MetricUnit::Seconds),
            "conflicts" => Some(MetricUnit::Conflicts),
            "propagations" => Some(MetricUnit::Propagations),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum EstimateError {
    SampleLargerThanPopulation { n: u64, population: u64 },
    EmptySample,
    BadParams(&'static str),
}

impl fmt::Display for EstimateError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EstimateError::SampleLargerThanPopulation { n, population } => {
                write!(f, "sample size {n} exceeds population size {population}")
            }
            EstimateError::EmptySample => write!(f, "at least one observation is required"),
            EstimateError::BadParams(msg) => write!(f, "{msg}"),
        }
    }
}

impl core::error::Error for EstimateError {}

/// One solved cell: its index and the runtime in the chosen unit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    pub cell: u64,
    pub value: f64,
}

/// Aggregated hardness estimate `T ≈ s · ξ̂`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct HardnessEstimate {
    pub unit: MetricUnit,
    /// Number of observations `N`.
    pub n: u64,
    /// Partitioning size `s`.
    pub population: u64,
    /// Sample mean `ξ̂`.
    pub mean: f64,
    /// Unbiased sample variance (0 when `n < 2`).
    pub variance: f64,
    pub std_dev: f64,
    /// `s · ξ̂`; exact total when `n = s`.
    pub total_estimate: f64,
    /// Observations cut short by a timeout. When nonzero the estimate only
    /// bounds the hardness from below.
    pub censored: u64,
    pub lower_bound_only: bool,
}

impl HardnessEstimate {
    /// Confidence that `ξ̂` lies within `(1 ± ε)·E[ξ]`, with the sample
    /// moments standing in for the true ones:
    /// `1 − Var/(ε²·N·mean²)`. May be negative (vacuous).
    pub fn chebyshev_relative_confidence(&self, epsilon: f64) -> f64 {
        1.0 - self.variance / (epsilon * epsilon * self.n as f64 * self.mean * self.mean)
    }

    /// Confidence that `|ξ̂ − E[ξ]| ≤ ε`: `1 − Var/(ε²·N)`.
    pub fn chebyshev_absolute_confidence(&self, epsilon: f64) -> f64 {
        1.0 - self.variance / (epsilon * epsilon * self.n as f64)
    }
}

/// Aggregates observations into a hardness estimate.
pub fn estimate_from_observations(
    observations: &[Observation],
    population: u64,
    unit: MetricUnit,
    censored: u64,
) -> Result<HardnessEstimate, EstimateError> {
    let n = observations.len() as u64;
    if n == 0 {
        return Err(EstimateError::EmptySample);
    }
    if n > population {
        return Err(EstimateError::SampleLargerThanPopulation { n, population });
    }
    let mean = observations.iter().map(|o| o.value).sum::<f64>() / n as f64;
    let variance = if n >= 2 {
        observations
            .iter()
            .map(|o| {
                let d = o.value - mean;
                d * d
            })
            .sum::<f64>()
            / (n - 1) as f64
    } else {
        0.0
    };
    Ok(HardnessEstimate {
        unit,
        n,
        population,
        mean,
        variance,
        std_dev: libm::sqrt(variance),
        total_estimate: population as f64 * mean,
        censored,
        lower_bound_only: censored > 0,
    })
}

/// Uniform sample of `n` distinct cell indices out of `0..population`,
/// reproducible from the seed.
pub fn sample_cells(population: u64, n: u64, seed: u64) -> Result<Vec<u64>, EstimateError> {
    if n > population {
        return Err(EstimateError::SampleLargerThanPopulation { n, population });
    }
    Ok(sample_distinct(population, n, &mut randutil::prng(seed)))
}

/// Chernoff confidence `1 − 2·e^(−ε²·N/4)` that the mean of `N` Bernoulli
/// observations lies within ε of the true mean.
pub fn chernoff_bernoulli_bound(epsilon: f64, n: u64) -> Result<f64, EstimateError> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(EstimateError::BadParams("epsilon must lie in (0, 1)"));
    }
    if n == 0 {
        return Err(EstimateError::BadParams("N must be at least 1"));
    }
    Ok(1.0 - 2.0 * libm::exp(-(epsilon * epsilon) * n as f64 / 4.0))
}

/// Distribution of sample means at one sample size, all values normalized by
/// the population mean.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SampleMeansRow {
    pub n: u64,
    /// Mean of the resample means, `Ξ(N) / E[ξ]`.
    pub mean_of_means: f64,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SampleMeansReport {
    /// The normalization reference `E[ξ]`: the full-population mean.
    pub reference_mean: f64,
    /// Resamples per grid point (`P`).
    pub resamples: u64,
    pub rows: Vec<SampleMeansRow>,
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    let frac = pos - lo as f64;
    sorted[lo] * (1.0 - frac) + sorted[hi] * frac
}

/// For each sample size in the grid, draws `resamples` random samples
/// without replacement from the full per-cell population, and reports the
/// distribution of the sample means normalized by the population mean.
pub fn sample_means_experiment(
    population: &[f64],
    grid: &[u64],
    resamples: u64,
    seed: u64,
) -> Result<SampleMeansReport, EstimateError> {
    if population.is_empty() {
        return Err(EstimateError::EmptySample);
    }
    if resamples == 0 {
        return Err(EstimateError::BadParams("P must be at least 1"));
    }
    let s = population.len() as u64;
    for &n in grid {
        if n == 0 {
            return Err(EstimateError::BadParams("sample sizes must be positive"));
        }
        if n > s {
            return Err(EstimateError::SampleLargerThanPopulation { n, population: s });
        }
    }
    let reference = population.iter().sum::<f64>() / s as f64;
    if !(reference.is_finite() && reference > 0.0) {
        return Err(EstimateError::BadParams(
            "population mean must be finite and positive",
        ));
    }
    let mut rng = randutil::prng(seed);
    let mut rows = Vec::with_capacity(grid.len());
    for &n in grid {
        let mut means = Vec::with_capacity(resamples as usize);
        for _ in 0..resamples {
            let picks = sample_distinct(s, n, &mut rng);
            let sum: f64 = picks.iter().map(|&i| population[i as usize]).sum();
            means.push(sum / n as f64 / reference);
        }
        means.sort_by(f64::total_cmp);
        let mean_of_means = means.iter().sum::<f64>() / resamples as f64;
        rows.push(SampleMeansRow {
            n,
            mean_of_means,
            min: means[0],
            q1: quantile(&means, 0.25),
            median: quantile(&means, 0.5),
            q3: quantile(&means, 0.75),
            max: means[means.len() - 1],
        });
    }
    Ok(SampleMeansReport {
        reference_mean: reference,
        resamples,
        rows,
    })
}

/// Spearman rank correlation with average ranks on ties. `None` when either
/// side has fewer than two values or no rank variation.
pub fn spearman_correlation(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    let rx = average_ranks(xs);
    let ry = average_ranks(ys);
    let n = xs.len() as f64;
    let mean = (n + 1.0) / 2.0;
    let mut cov = 0.0;
    let mut var_x = 0.0;
    let mut var_y = 0.0;
    for (a, b) in rx.iter().zip(&ry) {
        let (dx, dy) = (a - mean, b - mean);
        cov += dx * dy;
        var_x += dx * dx;
        var_y += dy * dy;
    }
    if var_x == 0.0 || var_y == 0.0 {
        return None;
    }
    Some(cov / libm::sqrt(var_x * var_y))
}

fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = alloc::vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        // 1-based ranks, ties share the average
        let rank = (i + 1 + j + 1) as f64 / 2.0;
        for &idx in &order[i..=j] {
            ranks[idx] = rank;
        }
        i = j + 1;
    }
    ranks
}
