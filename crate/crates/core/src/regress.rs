// SPDX-License-Identifier: MIT OR Apache-2.0

//! Simple regression `Y_j = beta f(j/n) + X_j` with linear-process noise.
//!
//! Since `sum_j f^2(j/n) (beta_hat - beta) = sum_j X_j f(j/n)`, the
//! estimation error is a weighted sum of the noise, and
//! `sqrt(n) (beta_hat - beta)` is asymptotically normal with variance
//! `sigma_eta^2 A_psi^2 / I(f^2)`.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::filters::{simulate_with, FilterSpec, InnovationSpec, TruncatedFilter};
use crate::funcspace::WeightFunction;
use crate::limits::EmpiricalSample;
use crate::rng::{par_replicates, replicate_rng, Rng};

#[derive(Clone, Debug)]
pub struct RegressionScenario {
    pub beta: f64,
    pub f: WeightFunction,
    pub filter: FilterSpec,
    pub innov: InnovationSpec,
    pub n: usize,
    pub seed: u64,
}

/// Observations together with the noise that generated them.
#[derive(Clone, Debug, PartialEq)]
pub struct RegressionSample {
    pub y: Vec<f64>,
    pub noise: Vec<f64>,
}

impl RegressionScenario {
    pub fn validate(&self) -> Result<TruncatedFilter> {
        if self.n == 0 {
            return Err(Error::EmptySeries);
        }
        if !self.beta.is_finite() {
            return Err(Error::Config(format!(
                "beta must be finite, got {}",
                self.beta
            )));
        }
        if design_energy(&self.f.eval_grid(self.n)) <= 0.0 {
            return Err(Error::DegenerateDesign);
        }
        self.innov.validate()?;
        self.filter.truncate()
    }

    /// `sigma_eta^2 A_psi^2 / I(f^2)`, the variance of the limit of
    /// `sqrt(n) (beta_hat - beta)`.
    pub fn limit_variance(&self) -> Result<f64> {
        let a = self.filter.a_psi()?;
        let s = self.innov.sigma_eta;
        Ok(s * s * a * a / self.f.integral_of_square())
    }

    fn sample_with(&self, filter: &TruncatedFilter, rng: &mut Rng) -> RegressionSample {
        let noise = simulate_with(filter, &self.innov, self.n, rng);
        RegressionSample {
            y: observations(self.beta, &self.f, &noise),
            noise,
        }
    }
}

/// `Y_j = beta f(j/n) + noise_j`.
pub fn observations(beta: f64, f: &WeightFunction, noise: &[f64]) -> Vec<f64> {
    f.eval_grid(noise.len())
        .iter()
        .zip(noise)
        .map(|(fj, xj)| beta * fj + xj)
        .collect()
}

/// Simulates one data set; the noise uses the same stream as
/// [`crate::filters::simulate_path`] with the scenario seed.
pub fn simulate_regression(s: &RegressionScenario) -> Result<RegressionSample> {
    let filter = s.validate()?;
    Ok(s.sample_with(&filter, &mut replicate_rng(s.seed, 0)))
}

fn design_energy(grid: &[f64]) -> f64 {
    grid.iter().map(|v| v * v).sum()
}

/// `(sum_j f^2(j/n), sum_j Y_j f(j/n))` with `n = y.len()`.
fn moments(y: &[f64], f: &WeightFunction) -> Result<(f64, f64)> {
    if y.is_empty() {
        return Err(Error::EmptySeries);
    }
    let grid = f.eval_grid(y.len());
    let energy = design_energy(&grid);
    if energy <= 0.0 {
        return Err(Error::DegenerateDesign);
    }
    Ok((energy, y.iter().zip(&grid).map(|(a, b)| a * b).sum()))
}

/// Least-squares estimate `(sum f^2(j/n))^{-1} sum Y_j f(j/n)`.
pub fn lse_beta(y: &[f64], f: &WeightFunction) -> Result<f64> {
    let (energy, cross) = moments(y, f)?;
    Ok(cross / energy)
}

/// `W_n(f) = n^{-1/2} sum f^2(j/n) (beta_hat - beta)`.
pub fn wn_stat(y: &[f64], f: &WeightFunction, beta: f64) -> Result<f64> {
    let (energy, cross) = moments(y, f)?;
    Ok(energy * (cross / energy - beta) / (y.len() as f64).sqrt())
}

/// `Q_n(f) = (sum f^2(j/n))^{1/2} (beta_hat - beta)`.
pub fn qn_stat(y: &[f64], f: &WeightFunction, beta: f64) -> Result<f64> {
    let (energy, cross) = moments(y, f)?;
    Ok(energy.sqrt() * (cross / energy - beta))
}

/// Relative defect in `sum f^2 (beta_hat - beta) = sum X_j f(j/n)`,
/// scaled by `sum |X_j f(j/n)|`.
pub fn identity_residual(y: &[f64], noise: &[f64], f: &WeightFunction, beta: f64) -> Result<f64> {
    let (energy, cross) = moments(y, f)?;
    let grid = f.eval_grid(y.len());
    let lhs = energy * (cross / energy - beta);
    let rhs: f64 = noise.iter().zip(&grid).map(|(x, g)| x * g).sum();
    let scale: f64 = noise.iter().zip(&grid).map(|(x, g)| (x * g).abs()).sum();
    Ok(if scale > 0.0 {
        (lhs - rhs).abs() / scale
    } else {
        (lhs - rhs).abs()
    })
}

/// Outcome of [`beta_clt_study`].
#[derive(Clone, Debug)]
pub struct BetaStudy {
    /// Sample of `sqrt(n) (beta_hat - beta)`.
    pub sample: EmpiricalSample,
    pub limit_variance: f64,
    /// Largest [`identity_residual`] over the replicates.
    pub max_identity_residual: f64,
}

/// Replicates the estimator `reps` times; replicate `r` draws its noise from
/// stream `r` of the scenario seed.
pub fn beta_clt_study(s: &RegressionScenario, reps: usize) -> Result<BetaStudy> {
    let filter = s.validate()?;
    let root_n = (s.n as f64).sqrt();
    let results = par_replicates(reps, s.seed, |_, rng| -> Result<(f64, f64)> {
        let data = s.sample_with(&filter, rng);
        let err = lse_beta(&data.y, &s.f)? - s.beta;
        let residual = identity_residual(&data.y, &data.noise, &s.f, s.beta)?;
        Ok((root_n * err, residual))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let max_identity_residual = results.iter().map(|r| r.1).fold(0.0, f64::max);
    let params: BTreeMap<String, f64> = [("beta", s.beta), ("n", s.n as f64)]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect();
    Ok(BetaStudy {
        sample: EmpiricalSample::new(
            "sqrt(n) (beta_hat - beta)",
            params,
            s.seed,
            results.into_iter().map(|r| r.0).collect(),
        ),
        limit_variance: s.limit_variance()?,
        max_identity_residual,
    })
}
