//! Monte Carlo aggregation, plot-axis normalization and trend statistics.
//!
//! Sweep outputs are normalized per path-loss-exponent family against the
//! baseline scheme's mean at the smallest user intensity, pinning that
//! curve's first point to 1.0 so cross-scheme comparison is a pure ratio.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::model::ScenarioConfig;
use crate::scalar::Scalar;

/// Association scheme selector for sweeps and reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Scheme {
    MaxSinr,
    InterferenceMin,
    EnergyOpt,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [Scheme::MaxSinr, Scheme::InterferenceMin, Scheme::EnergyOpt];

    pub fn name(&self) -> &'static str {
        match self {
            Scheme::MaxSinr => "max-sinr",
            Scheme::InterferenceMin => "interference-min",
            Scheme::EnergyOpt => "energy-opt",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "max-sinr" => Ok(Scheme::MaxSinr),
            "interference-min" => Ok(Scheme::InterferenceMin),
            "energy-opt" => Ok(Scheme::EnergyOpt),
            other => Err(format!(
                "unknown scheme '{other}' (expected max-sinr, interference-min or energy-opt)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("at least one sample is required")]
    EmptyInput,
    #[error("normalization reference must be > 0")]
    ZeroReference,
    #[error("series need matching lengths >= 3 and strictly increasing xs")]
    BadSeries,
    #[error("tier-1 intensity must be > 0")]
    ZeroTierIntensity,
}

/// Aggregated metrics of one (scheme, α, normalized user intensity) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint<S> {
    pub scheme: Scheme,
    pub alpha: S,
    /// User intensity divided by the tier-1 station intensity.
    pub lambda_norm: S,
    pub drops: u32,
    /// Mean over drops of the per-user average co-channel interference.
    pub mean_interference_w: S,
    pub ci95_interference_w: Option<S>,
    pub mean_flow_bps: S,
    pub mean_power_w: S,
    pub mean_eff_bpj: S,
    pub ci95_eff_bpj: Option<S>,
    /// Interference mean divided by the per-α reference cell.
    pub norm_interference: S,
    /// Efficiency mean divided by the per-α reference cell.
    pub norm_eff: S,
}

/// Complete (scheme × α × λ) grid with provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult<S> {
    pub points: Vec<SweepPoint<S>>,
    pub provenance: Provenance,
}

/// Enough to reproduce a sweep byte-for-byte.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Provenance {
    pub config_digest: String,
    pub master_seed: u64,
    pub resampled_drops: u64,
}

/// User intensity normalized by the tier-1 station intensity.
pub fn normalized_user_intensity<S: Scalar>(
    lambda_users: S,
    scenario: &ScenarioConfig<S>,
) -> Result<S, MetricsError> {
    let tier1 = scenario
        .tiers
        .iter()
        .find(|t| t.tier_id.0 == 1)
        .map(|t| t.station_intensity)
        .unwrap_or_else(S::zero);
    if !(tier1 > S::zero()) {
        return Err(MetricsError::ZeroTierIntensity);
    }
    Ok(lambda_users / tier1)
}

/// Divide every value by the reference; the reference cell maps to 1.0.
pub fn normalize_curves<S: Scalar>(values: &[S], reference: S) -> Result<Vec<S>, MetricsError> {
    if !(reference > S::zero()) {
        return Err(MetricsError::ZeroReference);
    }
    Ok(values.iter().map(|v| *v / reference).collect())
}

/// Sample mean plus the 1.96·s/√n half-width; the half-width is `None` for
/// a single sample.
pub fn aggregate_drops<S: Scalar>(samples: &[S]) -> Result<(S, Option<S>), MetricsError> {
    if samples.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let n = S::from_usize(samples.len()).expect("count fits");
    let mean = samples.iter().copied().sum::<S>() / n;
    if samples.len() < 2 {
        return Ok((mean, None));
    }
    let ss = samples
        .iter()
        .map(|x| {
            let d = *x - mean;
            d * d
        })
        .sum::<S>();
    let std = (ss / (n - S::one())).sqrt();
    let half_width = S::c(1.96) * std / n.sqrt();
    Ok((mean, Some(half_width)))
}

/// Spearman rank correlation with average ranks for ties; +1 for any
/// strictly increasing series, −1 for strictly decreasing.
pub fn trend_monotone<S: Scalar>(xs: &[S], ys: &[S]) -> Result<S, MetricsError> {
    if xs.len() != ys.len() || xs.len() < 3 {
        return Err(MetricsError::BadSeries);
    }
    if xs.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(MetricsError::BadSeries);
    }
    let rx = average_ranks(xs);
    let ry = average_ranks(ys);
    Ok(pearson(&rx, &ry))
}

fn average_ranks<S: Scalar>(values: &[S]) -> Vec<S> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).expect("finite values"));
    let mut ranks = vec![S::zero(); values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        // ranks are 1-based; tied entries share the average rank
        let avg = S::from_usize(i + j + 2).expect("rank fits") / S::c(2.0);
        for &idx in &order[i..=j] {
            ranks[idx] = avg;
        }
        i = j + 1;
    }
    ranks
}

fn pearson<S: Scalar>(xs: &[S], ys: &[S]) -> S {
    let n = S::from_usize(xs.len()).expect("count fits");
    let mx = xs.iter().copied().sum::<S>() / n;
    let my = ys.iter().copied().sum::<S>() / n;
    let mut sxy = S::zero();
    let mut sxx = S::zero();
    let mut syy = S::zero();
    for (x, y) in xs.iter().zip(ys) {
        let dx = *x - mx;
        let dy = *y - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == S::zero() || syy == S::zero() {
        return S::zero();
    }
    sxy / (sxx * syy).sqrt()
}
