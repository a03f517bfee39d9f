// SPDX-License-Identifier: MIT OR Apache-2.0

//! Multiple change-point testing with `T_n = ||S_n||_(p)`.
//!
//! The observations are `Y_j = mu_j + X_j` with a piecewise-constant mean
//! `mu_j = sum_k beta_k 1{tau_{k-1} < j/n <= tau_k}`. For every segmentation,
//! `||Q_n beta_hat||_p^p` is the sum of `|block sums of Y|^p`, so maximizing
//! over all segmentations gives the p-variation of the partial-sum path of
//! `Y`. Under `H_0` the statistic `n^{-1/2} (sigma_eta |A_psi|)^{-1} T_n`
//! converges to `||W||_(p)` for `p > 2`.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::filters::{simulate_with, FilterSpec, InnovationSpec, TruncatedFilter};
use crate::funcspace::StepFunction;
use crate::limits::CriticalValueTable;
use crate::pvar::{pvar_partial_sum, PvarResult};
use crate::rng::{replicate_rng, Rng};

/// Piecewise-constant mean on `0 = tau_0 < tau_1 < ... < tau_d = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChangeModel {
    tau: Vec<f64>,
    beta: Vec<f64>,
}

impl ChangeModel {
    /// `tau` includes both endpoints; `beta` has one level per segment.
    pub fn new(tau: Vec<f64>, beta: Vec<f64>) -> Result<Self> {
        if beta.is_empty() || tau.len() != beta.len() + 1 {
            return Err(Error::Config(format!(
                "change model needs d + 1 breakpoints for d levels, got {} and {}",
                tau.len(),
                beta.len()
            )));
        }
        if tau[0] != 0.0
            || tau[tau.len() - 1] != 1.0
            || tau
                .windows(2)
                .any(|w| w[0].partial_cmp(&w[1]) != Some(Ordering::Less))
        {
            return Err(Error::Config(
                "breakpoints must increase strictly from 0 to 1".into(),
            ));
        }
        if beta.iter().any(|b| !b.is_finite()) {
            return Err(Error::Config("levels must be finite".into()));
        }
        Ok(Self { tau, beta })
    }

    /// `H_0`: a single segment with zero mean.
    pub fn null() -> Self {
        Self {
            tau: vec![0.0, 1.0],
            beta: vec![0.0],
        }
    }

    /// One change at `at` from level 0 to level `jump`.
    pub fn single_change(at: f64, jump: f64) -> Result<Self> {
        Self::new(vec![0.0, at, 1.0], vec![0.0, jump])
    }

    pub fn tau(&self) -> &[f64] {
        &self.tau
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    pub fn segments(&self) -> usize {
        self.beta.len()
    }

    pub fn is_null(&self) -> bool {
        self.beta.iter().all(|&b| b == 0.0)
    }

    /// The mean as a weight function on `[0, 1]`.
    pub fn to_step_function(&self) -> StepFunction {
        StepFunction::new(self.tau.clone(), self.beta.clone(), self.beta[0])
            .expect("validated on construction")
    }

    /// `(mu_1, ..., mu_n)`, assigned by counting grid points per segment.
    pub fn mean_vector(&self, n: usize) -> Vec<f64> {
        let mut mu = Vec::with_capacity(n);
        let mut start = 0;
        for (k, &b) in self.beta.iter().enumerate() {
            let end = grid_count(self.tau[k + 1], n);
            mu.extend(std::iter::repeat_n(b, end - start));
            start = end;
        }
        mu
    }

    /// `sqrt(n) (sum_k (tau_k - tau_{k-1})^p |beta_k|^p)^{1/p}`; power
    /// diverges when this does.
    pub fn drift(&self, p: f64, n: usize) -> f64 {
        let sum: f64 = self
            .tau
            .windows(2)
            .zip(&self.beta)
            .map(|(w, b)| ((w[1] - w[0]) * b.abs()).powf(p))
            .sum();
        (n as f64).sqrt() * sum.powf(1.0 / p)
    }
}

/// `#{ j in 1..=n : j/n <= tau }`, i.e. `floor(tau n)` evaluated with the same
/// floating-point predicate as grid evaluation of step functions.
pub fn grid_count(tau: f64, n: usize) -> usize {
    let nf = n as f64;
    let mut k = ((tau * nf).floor().max(0.0) as usize).min(n);
    while k < n && ((k + 1) as f64 / nf) <= tau {
        k += 1;
    }
    while k > 0 && (k as f64 / nf) > tau {
        k -= 1;
    }
    k
}

/// Simulates `Y = mu + X` with the supplied generator.
pub fn simulate_cpm_with(
    model: &ChangeModel,
    filter: &TruncatedFilter,
    innov: &InnovationSpec,
    n: usize,
    rng: &mut Rng,
) -> Vec<f64> {
    let mut y = simulate_with(filter, innov, n, rng);
    if !model.is_null() {
        y.iter_mut()
            .zip(model.mean_vector(n))
            .for_each(|(yj, mj)| *yj += mj);
    }
    y
}

/// Simulates `Y_{n1}..Y_{nn}`; the noise matches
/// [`crate::filters::simulate_path`] under the same seed.
pub fn simulate_cpm(
    model: &ChangeModel,
    filter: &FilterSpec,
    innov: &InnovationSpec,
    n: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::EmptySeries);
    }
    innov.validate()?;
    let truncated = filter.truncate()?;
    Ok(simulate_cpm_with(
        model,
        &truncated,
        innov,
        n,
        &mut replicate_rng(seed, 0),
    ))
}

/// Least-squares fit of segment levels for a fixed segmentation.
#[derive(Clone, Debug, PartialEq)]
pub struct SegmentFit {
    pub beta_hat: Vec<f64>,
    /// Diagonal of `Q_n`: grid points per segment.
    pub counts: Vec<usize>,
}

impl SegmentFit {
    /// `||Q_n beta_hat||_p`.
    pub fn weighted_norm(&self, p: f64) -> f64 {
        self.beta_hat
            .iter()
            .zip(&self.counts)
            .map(|(b, &c)| (c as f64 * b).abs().powf(p))
            .sum::<f64>()
            .powf(1.0 / p)
    }
}

/// Segment means of `y` over `(tau_{k-1}, tau_k]`; `tau` runs from 0 to 1.
pub fn lse_segments(y: &[f64], tau: &[f64]) -> Result<SegmentFit> {
    if y.is_empty() {
        return Err(Error::EmptySeries);
    }
    if tau.len() < 2 || tau[0] != 0.0 || tau[tau.len() - 1] != 1.0 {
        return Err(Error::Config("segmentation must run from 0 to 1".into()));
    }
    let n = y.len();
    let mut beta_hat = Vec::with_capacity(tau.len() - 1);
    let mut counts = Vec::with_capacity(tau.len() - 1);
    let mut start = 0;
    for (k, &t) in tau.iter().enumerate().skip(1) {
        let end = grid_count(t, n);
        if end <= start {
            return Err(Error::DegeneratePartition { segment: k });
        }
        let count = end - start;
        beta_hat.push(y[start..end].iter().sum::<f64>() / count as f64);
        counts.push(count);
        start = end;
    }
    Ok(SegmentFit { beta_hat, counts })
}

/// `T_n` with the segmentation attaining it.
#[derive(Clone, Debug, PartialEq)]
pub struct TnStatistic {
    pub t_n: f64,
    pub pvar: PvarResult,
}

/// `T_n = v_p(S_n)^{1/p}` for the partial sums of `y`. Defined for `p >= 1`;
/// calibration against `||W||_(p)` needs `p > 2`.
pub fn tn_statistic(y: &[f64], p: f64) -> Result<TnStatistic> {
    let pvar = pvar_partial_sum(y, p)?;
    Ok(TnStatistic {
        t_n: pvar.norm(),
        pvar,
    })
}

/// Bartlett-kernel long-run variance of `x` (mean-centred), estimating
/// `sigma_eta^2 A_psi^2`.
pub fn bartlett_lrv(x: &[f64], bandwidth: usize) -> f64 {
    let n = x.len();
    let mean = x.iter().sum::<f64>() / n as f64;
    let c: Vec<f64> = x.iter().map(|v| v - mean).collect();
    let autocov = |h: usize| c[h..].iter().zip(&c).map(|(a, b)| a * b).sum::<f64>() / n as f64;
    let bw = bandwidth.min(n.saturating_sub(1));
    (1..=bw).fold(autocov(0), |acc, h| {
        acc + 2.0 * (1.0 - h as f64 / (bw + 1) as f64) * autocov(h)
    })
}

/// `floor(4 (n / 100)^{2/9})`.
pub fn default_bandwidth(n: usize) -> usize {
    (4.0 * (n as f64 / 100.0).powf(2.0 / 9.0)).floor() as usize
}

/// How the statistic is normalized.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Scale {
    /// Known `sigma_eta` and `A_psi`.
    Known { sigma_eta: f64, a_psi: f64 },
    /// `sqrt` of a Bartlett long-run variance estimate.
    Bartlett { bandwidth: usize, estimate: f64 },
}

impl Scale {
    pub fn value(&self) -> f64 {
        match *self {
            Scale::Known { sigma_eta, a_psi } => sigma_eta * a_psi.abs(),
            Scale::Bartlett { estimate, .. } => estimate,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TestReport {
    pub n: usize,
    pub p: f64,
    pub t_n: f64,
    /// `n^{-1/2} T_n / scale`.
    pub statistic: f64,
    pub critical_value: f64,
    pub alpha: f64,
    pub reject: bool,
    pub p_value: f64,
    pub scale: Scale,
    /// Interior points of the maximizing segmentation, as fractions `j/n`.
    pub candidates: Vec<f64>,
    pub partition: Vec<usize>,
    pub generator: String,
}

fn check_test_inputs(p: f64, alpha: f64, table: &CriticalValueTable) -> Result<()> {
    if !(p > 2.0 && p.is_finite()) {
        return Err(Error::UnsupportedExponent {
            p,
            requirement: "the Wiener-calibrated test needs p > 2",
        });
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Config(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )));
    }
    if (table.p - p).abs() > 1e-12 {
        return Err(Error::TableMismatch {
            table_p: table.p,
            p,
        });
    }
    Ok(())
}

fn run_test(
    y: &[f64],
    p: f64,
    alpha: f64,
    table: &CriticalValueTable,
    scale: Scale,
) -> Result<TestReport> {
    let s = scale.value();
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::ZeroScale(s));
    }
    let critical_value = table.critical_value(1.0 - alpha)?;
    let tn = tn_statistic(y, p)?;
    let n = y.len();
    let statistic = tn.t_n / ((n as f64).sqrt() * s);
    let partition = tn.pvar.partition;
    let candidates = partition[1..partition.len() - 1]
        .iter()
        .map(|&k| k as f64 / n as f64)
        .collect();
    Ok(TestReport {
        n,
        p,
        t_n: tn.t_n,
        statistic,
        critical_value,
        alpha,
        reject: statistic > critical_value,
        p_value: table.p_value(statistic),
        scale,
        candidates,
        partition,
        generator: table.generator.clone(),
    })
}

/// Tests `H_0: mu = 0` at level `alpha` with known `sigma_eta` and `A_psi`.
/// Only `|A_psi|` enters the normalization.
pub fn cp_test(
    y: &[f64],
    p: f64,
    alpha: f64,
    table: &CriticalValueTable,
    sigma_eta: f64,
    a_psi: f64,
) -> Result<TestReport> {
    check_test_inputs(p, alpha, table)?;
    run_test(y, p, alpha, table, Scale::Known { sigma_eta, a_psi })
}

/// As [`cp_test`], with `sigma_eta |A_psi|` replaced by the square root of a
/// Bartlett long-run variance estimate.
pub fn cp_test_lrv(
    y: &[f64],
    p: f64,
    alpha: f64,
    table: &CriticalValueTable,
    bandwidth: Option<usize>,
) -> Result<TestReport> {
    check_test_inputs(p, alpha, table)?;
    if y.is_empty() {
        return Err(Error::EmptySeries);
    }
    let bandwidth = bandwidth.unwrap_or_else(|| default_bandwidth(y.len()));
    let estimate = bartlett_lrv(y, bandwidth).max(0.0).sqrt();
    run_test(
        y,
        p,
        alpha,
        table,
        Scale::Bartlett {
            bandwidth,
            estimate,
        },
    )
}

/// One scenario of a size/power study.
#[derive(Clone, Debug, PartialEq)]
pub struct StudyScenario {
    pub id: String,
    pub model: ChangeModel,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StudyRow {
    pub scenario_id: String,
    pub n: usize,
    pub drift: f64,
    pub rejections: usize,
    pub reps: usize,
    pub rate: f64,
}

/// Study settings shared by every scenario.
#[derive(Clone, Debug)]
pub struct StudyDesign {
    pub filter: FilterSpec,
    pub innov: InnovationSpec,
    pub p: f64,
    pub alpha: f64,
    pub sample_sizes: Vec<usize>,
    pub reps: usize,
    pub seed: u64,
}

/// Rejection frequencies of [`cp_test`] (known scale) per scenario and `n`.
///
/// Replicate `r` at the `i`-th sample size draws its noise from stream
/// `(i << 32) | r`, shared across scenarios (common random numbers), so rows
/// with `beta = 0` reproduce the size study and power comparisons between
/// scenarios are not blurred by independent noise.
pub fn size_power_study(
    scenarios: &[StudyScenario],
    design: &StudyDesign,
    table: &CriticalValueTable,
) -> Result<Vec<StudyRow>> {
    check_test_inputs(design.p, design.alpha, table)?;
    design.innov.validate()?;
    let truncated = design.filter.truncate()?;
    let sigma_eta = design.innov.sigma_eta;
    let a_psi = design.filter.a_psi()?;
    let mut rows = Vec::new();
    for scenario in scenarios {
        for (i, &n) in design.sample_sizes.iter().enumerate() {
            if n == 0 {
                return Err(Error::EmptySeries);
            }
            let decisions = (0..design.reps)
                .into_par_iter()
                .map(|r| {
                    let mut rng = replicate_rng(design.seed, ((i as u64) << 32) | r as u64);
                    let y =
                        simulate_cpm_with(&scenario.model, &truncated, &design.innov, n, &mut rng);
                    cp_test(&y, design.p, design.alpha, table, sigma_eta, a_psi).map(|t| t.reject)
                })
                .collect::<Result<Vec<_>>>()?;
            let rejections = decisions.iter().filter(|&&d| d).count();
            rows.push(StudyRow {
                scenario_id: scenario.id.clone(),
                n,
                drift: scenario.model.drift(design.p, n),
                rejections,
                reps: design.reps,
                rate: rejections as f64 / design.reps.max(1) as f64,
            });
        }
    }
    Ok(rows)
}
