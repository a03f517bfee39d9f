// SPDX-License-Identifier: MIT OR Apache-2.0

//! Short-memory linear processes `X_i = sum_j psi_j eta_{i-j}`.
//!
//! A [`FilterSpec`] describes the coefficients `psi_j`, an [`InnovationSpec`]
//! the i.i.d. driving noise. Infinite filters are truncated at the smallest
//! lag `J` whose certified tail bound `sum_{j>J} |psi_j|` is within the
//! requested tolerance.

use std::fmt;
use std::sync::Arc;

use rand_distr::{Distribution, StandardNormal, StudentT};

use crate::error::{Error, Result};
use crate::rng::{replicate_rng, Rng};

/// Default bound on the discarded filter tail.
pub const DEFAULT_TRUNCATION_TOL: f64 = 1e-12;

/// Longest filter we are willing to materialize.
pub const MAX_FILTER_LEN: usize = 10_000_000;

pub type CoefficientFn = Arc<dyn Fn(usize) -> f64 + Send + Sync>;
/// `tail_bound(J)` must bound `sum_{j>J} |psi_j|` and be nonincreasing in `J`.
pub type TailBoundFn = Arc<dyn Fn(usize) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum FilterFamily {
    /// `psi_j = scale * ratio^j`.
    Geometric { ratio: f64, scale: f64 },
    /// `psi_0..psi_J` given explicitly.
    Finite(Vec<f64>),
    /// Coefficients from a callback, with a user-supplied tail bound.
    Callback {
        coeff: CoefficientFn,
        tail_bound: Option<TailBoundFn>,
    },
}

impl fmt::Debug for FilterFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Geometric { ratio, scale } => f
                .debug_struct("Geometric")
                .field("ratio", ratio)
                .field("scale", scale)
                .finish(),
            Self::Finite(c) => f.debug_tuple("Finite").field(c).finish(),
            Self::Callback { tail_bound, .. } => f
                .debug_struct("Callback")
                .field("tail_bound", &tail_bound.is_some())
                .finish_non_exhaustive(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct FilterSpec {
    pub family: FilterFamily,
    pub truncation_tol: f64,
}

/// Coefficients `psi_0..psi_J` together with the certified discarded tail.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedFilter {
    pub coeffs: Vec<f64>,
    pub tail_bound: f64,
}

impl TruncatedFilter {
    /// Largest retained lag `J`.
    pub fn lag(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn sum(&self) -> f64 {
        self.coeffs.iter().sum()
    }

    pub fn sum_of_squares(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum()
    }
}

impl FilterSpec {
    pub fn geometric(ratio: f64, scale: f64) -> Self {
        Self {
            family: FilterFamily::Geometric { ratio, scale },
            truncation_tol: DEFAULT_TRUNCATION_TOL,
        }
    }

    pub fn finite(coeffs: impl Into<Vec<f64>>) -> Self {
        Self {
            family: FilterFamily::Finite(coeffs.into()),
            truncation_tol: DEFAULT_TRUNCATION_TOL,
        }
    }

    /// `psi = delta_0`, i.e. `X_i = eta_i`.
    pub fn identity() -> Self {
        Self::finite(vec![1.0])
    }

    pub fn callback(coeff: CoefficientFn, tail_bound: Option<TailBoundFn>) -> Self {
        Self {
            family: FilterFamily::Callback { coeff, tail_bound },
            truncation_tol: DEFAULT_TRUNCATION_TOL,
        }
    }

    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.truncation_tol = tol;
        self
    }

    /// Truncates the filter and checks summability and `A_psi != 0`.
    pub fn truncate(&self) -> Result<TruncatedFilter> {
        let tol = self.truncation_tol;
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(Error::Config(format!(
                "truncation_tol must be a positive finite number, got {tol}"
            )));
        }
        let truncated = match &self.family {
            FilterFamily::Geometric { ratio, scale } => {
                check_geometric(*ratio, *scale)?;
                let lag = geometric_lag(*ratio, *scale, tol)?;
                TruncatedFilter {
                    coeffs: (0..=lag).map(|j| scale * ratio.powi(j as i32)).collect(),
                    tail_bound: geometric_tail(*ratio, *scale, lag),
                }
            }
            FilterFamily::Finite(coeffs) => {
                if coeffs.is_empty() {
                    return Err(Error::Config(
                        "finite filter needs at least one coefficient".into(),
                    ));
                }
                if let Some(bad) = coeffs.iter().find(|c| !c.is_finite()) {
                    return Err(Error::Config(format!(
                        "non-finite filter coefficient {bad}"
                    )));
                }
                TruncatedFilter {
                    coeffs: coeffs.clone(),
                    tail_bound: 0.0,
                }
            }
            FilterFamily::Callback { coeff, tail_bound } => {
                let bound = tail_bound
                    .as_ref()
                    .ok_or_else(|| Error::Config("callback filter requires a tail bound".into()))?;
                let lag = smallest_lag(bound.as_ref(), tol)?;
                let coeffs: Vec<f64> = (0..=lag).map(|j| coeff(j)).collect();
                if let Some(bad) = coeffs.iter().find(|c| !c.is_finite()) {
                    return Err(Error::Config(format!(
                        "non-finite filter coefficient {bad}"
                    )));
                }
                TruncatedFilter {
                    coeffs,
                    tail_bound: bound(lag),
                }
            }
        };
        let a_psi = self.closed_form_sum().unwrap_or_else(|| truncated.sum());
        if a_psi.abs() <= tol {
            return Err(Error::DegenerateFilter { a_psi, tol });
        }
        Ok(truncated)
    }

    /// `A_psi = sum_j psi_j`, in closed form when the family allows it.
    pub fn a_psi(&self) -> Result<f64> {
        let truncated = self.truncate()?;
        Ok(self.closed_form_sum().unwrap_or_else(|| truncated.sum()))
    }

    /// `sum_j psi_j^2`, in closed form when the family allows it.
    pub fn sum_of_squares(&self) -> Result<f64> {
        let truncated = self.truncate()?;
        Ok(match self.family {
            FilterFamily::Geometric { ratio, scale } => scale * scale / (1.0 - ratio * ratio),
            _ => truncated.sum_of_squares(),
        })
    }

    fn closed_form_sum(&self) -> Option<f64> {
        match self.family {
            FilterFamily::Geometric { ratio, scale } => Some(scale / (1.0 - ratio)),
            _ => None,
        }
    }
}

/// Free-function form of [`FilterSpec::truncate`].
pub fn truncate_filter(spec: &FilterSpec) -> Result<TruncatedFilter> {
    spec.truncate()
}

/// Free-function form of [`FilterSpec::a_psi`].
pub fn a_psi(spec: &FilterSpec) -> Result<f64> {
    spec.a_psi()
}

fn check_geometric(ratio: f64, scale: f64) -> Result<()> {
    if ratio.is_nan() || ratio.abs() >= 1.0 {
        return Err(Error::Config(format!(
            "geometric ratio must lie in (-1, 1), got {ratio}"
        )));
    }
    if !scale.is_finite() {
        return Err(Error::Config(format!(
            "geometric scale must be finite, got {scale}"
        )));
    }
    Ok(())
}

/// `sum_{j>lag} |scale * ratio^j| = |scale| |ratio|^(lag+1) / (1 - |ratio|)`.
pub fn geometric_tail(ratio: f64, scale: f64, lag: usize) -> f64 {
    let r = ratio.abs();
    scale.abs() * r.powi(lag as i32 + 1) / (1.0 - r)
}

fn geometric_lag(ratio: f64, scale: f64, tol: f64) -> Result<usize> {
    let r = ratio.abs();
    if r == 0.0 || scale == 0.0 {
        return Ok(0);
    }
    let guess = ((tol * (1.0 - r) / scale.abs()).ln() / r.ln()).ceil() - 1.0;
    if guess > MAX_FILTER_LEN as f64 {
        return Err(Error::Config(format!(
            "geometric filter with ratio {ratio} needs more than {MAX_FILTER_LEN} lags"
        )));
    }
    let mut lag = guess.max(0.0) as usize;
    while geometric_tail(ratio, scale, lag) > tol {
        lag += 1;
    }
    while lag > 0 && geometric_tail(ratio, scale, lag - 1) <= tol {
        lag -= 1;
    }
    Ok(lag)
}

fn smallest_lag(bound: &(dyn Fn(usize) -> f64 + Send + Sync), tol: f64) -> Result<usize> {
    if bound(0) <= tol {
        return Ok(0);
    }
    // Exponential search for an admissible lag, then bisect.
    let mut hi = 1usize;
    while bound(hi) > tol {
        if hi >= MAX_FILTER_LEN {
            return Err(Error::Config(format!(
                "callback tail bound stays above {tol:e} beyond {MAX_FILTER_LEN} lags"
            )));
        }
        hi = (hi * 2).min(MAX_FILTER_LEN);
    }
    let mut lo = hi / 2;
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if bound(mid) <= tol {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Distribution of the innovations, normalized to mean zero and unit variance
/// before scaling by `sigma_eta`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Innovation {
    Normal,
    /// Uniform on `[-sqrt(3), sqrt(3)]`.
    Uniform,
    /// `+1` or `-1` with equal probability.
    Rademacher,
    /// Student-t scaled by `sqrt((df - 2) / df)`.
    StudentT {
        df: f64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InnovationSpec {
    pub distribution: Innovation,
    pub sigma_eta: f64,
}

impl InnovationSpec {
    pub fn new(distribution: Innovation, sigma_eta: f64) -> Result<Self> {
        let spec = Self {
            distribution,
            sigma_eta,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn standard_normal() -> Self {
        Self {
            distribution: Innovation::Normal,
            sigma_eta: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_eta > 0.0 && self.sigma_eta.is_finite()) {
            return Err(Error::Config(format!(
                "sigma_eta must be positive, got {}",
                self.sigma_eta
            )));
        }
        if let Innovation::StudentT { df } = self.distribution {
            if !(df > 2.0 && df.is_finite()) {
                return Err(Error::Config(format!(
                    "Student-t innovations need df > 2 for finite variance, got {df}"
                )));
            }
        }
        Ok(())
    }

    /// Draws `len` i.i.d. innovations.
    pub fn sample(&self, len: usize, rng: &mut Rng) -> Vec<f64> {
        let s = self.sigma_eta;
        match self.distribution {
            Innovation::Normal => (0..len)
                .map(|_| {
                    let z: f64 = StandardNormal.sample(rng);
                    s * z
                })
                .collect(),
            Innovation::Uniform => {
                let half_width = 3f64.sqrt();
                (0..len)
                    .map(|_| s * half_width * (2.0 * rand::Rng::random::<f64>(rng) - 1.0))
                    .collect()
            }
            Innovation::Rademacher => (0..len)
                .map(|_| {
                    if rand::Rng::random::<bool>(rng) {
                        s
                    } else {
                        -s
                    }
                })
                .collect(),
            Innovation::StudentT { df } => {
                let t = StudentT::new(df).expect("df validated");
                let norm = ((df - 2.0) / df).sqrt();
                (0..len).map(|_| s * norm * t.sample(rng)).collect()
            }
        }
    }
}

/// Whether a [`Series`] holds raw observations or a cumulative path.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Origin {
    Raw,
    /// `S_1..S_n`, with the implicit anchor `S_0 = 0`.
    Cumulative,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    values: Vec<f64>,
    origin: Origin,
}

impl Series {
    pub fn new(values: Vec<f64>, origin: Origin) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySeries);
        }
        Ok(Self { values, origin })
    }

    pub fn raw(values: Vec<f64>) -> Result<Self> {
        Self::new(values, Origin::Raw)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn origin(&self) -> Origin {
        self.origin
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// The anchored path `(0, S_1, ..., S_n)` of length `n + 1`.
    pub fn anchored_path(&self) -> Vec<f64> {
        match self.origin {
            Origin::Raw => cumulative_path(&self.values),
            Origin::Cumulative => std::iter::once(0.0)
                .chain(self.values.iter().copied())
                .collect(),
        }
    }
}

/// `(0, x_1, x_1 + x_2, ...)`.
pub fn cumulative_path(x: &[f64]) -> Vec<f64> {
    let mut path = Vec::with_capacity(x.len() + 1);
    let mut acc = 0.0;
    path.push(acc);
    for v in x {
        acc += v;
        path.push(acc);
    }
    path
}

/// Applies the filter to a block of innovations `eta_{1-J}..eta_n`,
/// returning `X_1..X_n`.
pub fn apply_filter(coeffs: &[f64], innovations: &[f64]) -> Vec<f64> {
    let lag = coeffs.len() - 1;
    assert!(
        innovations.len() > lag,
        "need at least J + 1 innovations for a filter of lag J"
    );
    let n = innovations.len() - lag;
    (0..n)
        .map(|t| {
            coeffs
                .iter()
                .enumerate()
                .map(|(j, psi)| psi * innovations[t + lag - j])
                .sum()
        })
        .collect()
}

/// Simulates `X_1..X_n` using the supplied generator. Pre-sample innovations
/// are drawn, so the segment is an exact draw from the stationary process
/// (up to the truncated tail).
pub fn simulate_with(
    filter: &TruncatedFilter,
    innov: &InnovationSpec,
    n: usize,
    rng: &mut Rng,
) -> Vec<f64> {
    let eta = innov.sample(n + filter.lag(), rng);
    apply_filter(&filter.coeffs, &eta)
}

/// Simulates a raw path of length `n`; deterministic in `(seed, n, specs)`.
pub fn simulate_path(
    filter: &FilterSpec,
    innov: &InnovationSpec,
    n: usize,
    seed: u64,
) -> Result<Series> {
    if n == 0 {
        return Err(Error::EmptySeries);
    }
    innov.validate()?;
    let truncated = filter.truncate()?;
    let mut rng = replicate_rng(seed, 0);
    Series::raw(simulate_with(&truncated, innov, n, &mut rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn geometric_half_truncates_at_forty() {
        let t = FilterSpec::geometric(0.5, 1.0).truncate().unwrap();
        assert_eq!(t.lag(), 40);
        assert_eq!(t.coeffs[3], 0.125);
        assert!(t.tail_bound <= 1e-12);
        assert_relative_eq!(t.tail_bound, 0.5f64.powi(41) / 0.5);
        // One lag fewer would violate the tolerance.
        assert!(geometric_tail(0.5, 1.0, 39) > 1e-12);
    }

    #[test]
    fn geometric_point_nine_tail_by_direct_summation() {
        let spec = FilterSpec::geometric(0.9, 1.0).with_tolerance(1e-10);
        let t = spec.truncate().unwrap();
        let lag = t.lag();
        let direct_tail: f64 = (lag + 1..lag + 20_000).map(|j| 0.9f64.powi(j as i32)).sum();
        assert!(direct_tail <= 1e-10, "tail {direct_tail:e}");
        let prev_tail: f64 = (lag..lag + 20_000).map(|j| 0.9f64.powi(j as i32)).sum();
        assert!(prev_tail > 1e-10, "J is not minimal");
    }

    #[test]
    fn negative_ratio_and_zero_ratio() {
        let t = FilterSpec::geometric(-0.4, 2.0).truncate().unwrap();
        assert!(t.coeffs[1] < 0.0);
        assert!(geometric_tail(-0.4, 2.0, t.lag()) <= 1e-12);
        assert_eq!(
            FilterSpec::geometric(0.0, 3.0).truncate().unwrap().coeffs,
            vec![3.0]
        );
    }

    #[test]
    fn finite_filter_is_unchanged() {
        for tol in [1e-3, 1e-12] {
            let t = FilterSpec::finite(vec![1.0, -0.3])
                .with_tolerance(tol)
                .truncate()
                .unwrap();
            assert_eq!(t.coeffs, vec![1.0, -0.3]);
        }
    }

    #[test]
    fn a_psi_values() {
        assert_eq!(FilterSpec::geometric(0.5, 1.0).a_psi().unwrap(), 2.0);
        assert_eq!(
            FilterSpec::finite(vec![1.0, 0.5, 0.25]).a_psi().unwrap(),
            1.75
        );
        assert_relative_eq!(
            FilterSpec::geometric(-0.4, 2.0).a_psi().unwrap(),
            2.0 / 1.4,
            max_relative = 1e-15
        );
        assert_relative_eq!(
            FilterSpec::geometric(0.5, 1.0).sum_of_squares().unwrap(),
            4.0 / 3.0
        );
    }

    #[test]
    fn degenerate_filters_rejected() {
        assert!(matches!(
            FilterSpec::finite(vec![0.0, 0.0]).truncate(),
            Err(Error::DegenerateFilter { .. })
        ));
        assert!(matches!(
            FilterSpec::finite(vec![1.0, -1.0]).truncate(),
            Err(Error::DegenerateFilter { .. })
        ));
        assert!(matches!(
            FilterSpec::geometric(0.5, 0.0).truncate(),
            Err(Error::DegenerateFilter { .. })
        ));
        assert!(matches!(
            FilterSpec::geometric(1.0, 1.0).truncate(),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            FilterSpec::finite(vec![]).truncate(),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn callback_needs_tail_bound() {
        let coeff: CoefficientFn = Arc::new(|j| 1.0 / ((j + 1) as f64).powi(3));
        let spec = FilterSpec::callback(coeff.clone(), None);
        assert!(matches!(spec.truncate(), Err(Error::Config(_))));

        // sum_{j>J} (j+1)^-3 <= integral_{J+1}^inf x^-3 dx = 1 / (2 (J+1)^2)
        let bound: TailBoundFn = Arc::new(|lag| 0.5 / ((lag + 1) as f64).powi(2));
        let spec = FilterSpec::callback(coeff, Some(bound)).with_tolerance(1e-6);
        let t = spec.truncate().unwrap();
        assert!(0.5 / ((t.lag() + 1) as f64).powi(2) <= 1e-6);
        assert!(0.5 / (t.lag() as f64).powi(2) > 1e-6);
        assert_eq!(t.coeffs[1], 0.125);
    }

    #[test]
    fn identity_filter_returns_innovations() {
        let innov = InnovationSpec::standard_normal();
        let x = simulate_path(&FilterSpec::identity(), &innov, 3, 11).unwrap();
        let eta = innov.sample(3, &mut replicate_rng(11, 0));
        assert_eq!(x.values(), eta.as_slice());
    }

    #[test]
    fn simulation_is_deterministic_and_linear() {
        let innov = InnovationSpec::new(Innovation::StudentT { df: 5.0 }, 1.5).unwrap();
        let psi = vec![1.0, -0.3, 0.2];
        let doubled: Vec<f64> = psi.iter().map(|c| 2.0 * c).collect();
        let a = simulate_path(&FilterSpec::finite(psi.clone()), &innov, 50, 9).unwrap();
        let b = simulate_path(&FilterSpec::finite(psi), &innov, 50, 9).unwrap();
        let c = simulate_path(&FilterSpec::finite(doubled), &innov, 50, 9).unwrap();
        assert_eq!(a, b);
        for (x, y) in a.values().iter().zip(c.values()) {
            assert_eq!(2.0 * x, *y);
        }
    }

    #[test]
    fn apply_filter_convolution() {
        // eta_{-1}, eta_0, eta_1, eta_2 with psi = (1, 10, 100)
        let x = apply_filter(&[1.0, 10.0, 100.0], &[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(x, vec![3.0 + 20.0 + 100.0, 4.0 + 30.0 + 200.0]);
    }

    #[test]
    fn innovation_validation() {
        assert!(InnovationSpec::new(Innovation::Normal, 0.0).is_err());
        assert!(InnovationSpec::new(Innovation::StudentT { df: 2.0 }, 1.0).is_err());
        assert!(InnovationSpec::new(Innovation::StudentT { df: 2.5 }, 1.0).is_ok());
    }

    #[test]
    fn rademacher_takes_two_values() {
        let innov = InnovationSpec::new(Innovation::Rademacher, 2.0).unwrap();
        let eta = innov.sample(100, &mut replicate_rng(1, 0));
        assert!(eta.iter().all(|v| v.abs() == 2.0));
        let uni = InnovationSpec::new(Innovation::Uniform, 1.0).unwrap();
        let eta = uni.sample(1000, &mut replicate_rng(1, 0));
        assert!(eta.iter().all(|v| v.abs() <= 3f64.sqrt()));
    }

    #[test]
    fn anchored_paths() {
        let raw = Series::raw(vec![1.0, -1.0, 2.0]).unwrap();
        assert_eq!(raw.anchored_path(), vec![0.0, 1.0, 0.0, 2.0]);
        let cum = Series::new(vec![1.0, 0.0], Origin::Cumulative).unwrap();
        assert_eq!(cum.anchored_path(), vec![0.0, 1.0, 0.0]);
        assert!(Series::raw(vec![]).is_err());
    }
}
