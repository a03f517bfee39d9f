// SPDX-License-Identifier: MIT OR Apache-2.0

//! Monte Carlo realizations of the limit laws.
//!
//! The Wiener process is approximated on a grid of `m` points by a scaled
//! Gaussian random walk `m^{-1/2} sum_{i<=k} Z_i`. Restricting partitions to
//! grid points biases `v_p(W)` downwards; the bias is monitored empirically
//! by comparing grids of different sizes.

use std::collections::BTreeMap;
use std::path::Path;

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filters::{cumulative_path, simulate_with, FilterSpec, InnovationSpec};
use crate::funcspace::{weighted_sum, WeightFunction};
use crate::pvar::{pvar, pvar_partial_sum};
use crate::rng::{par_replicates, GENERATOR};

/// Default walk length used to approximate `W`.
pub const DEFAULT_GRID: usize = 1 << 14;

/// Default quantile levels of a critical-value table.
pub const DEFAULT_LEVELS: [f64; 3] = [0.90, 0.95, 0.99];

/// Sorted Monte Carlo sample of a statistic with its provenance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalSample {
    pub statistic: String,
    pub params: BTreeMap<String, f64>,
    pub seed: u64,
    values: Vec<f64>,
}

impl EmpiricalSample {
    pub fn new(
        statistic: impl Into<String>,
        params: BTreeMap<String, f64>,
        seed: u64,
        mut values: Vec<f64>,
    ) -> Self {
        values.sort_by(f64::total_cmp);
        Self {
            statistic: statistic.into(),
            params,
            seed,
            values,
        }
    }

    /// Unlabelled sample, mostly for tests and ad hoc comparisons.
    pub fn from_values(values: Vec<f64>) -> Self {
        Self::new("sample", BTreeMap::new(), 0, values)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.len() as f64
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        let mean = self.mean();
        self.values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (self.len() as f64 - 1.0)
    }

    /// Nearest-rank quantile: the smallest value whose empirical CDF is at
    /// least `level`.
    pub fn quantile(&self, level: f64) -> f64 {
        nearest_rank(&self.values, level)
    }

    /// Fraction of the sample at or above `x`.
    pub fn upper_tail_fraction(&self, x: f64) -> f64 {
        let below = self.values.partition_point(|&v| v < x);
        (self.len() - below) as f64 / self.len() as f64
    }

    /// Applies `g` to every value (re-sorting).
    pub fn map(&self, g: impl Fn(f64) -> f64) -> Self {
        Self::new(
            self.statistic.clone(),
            self.params.clone(),
            self.seed,
            self.values.iter().map(|&v| g(v)).collect(),
        )
    }
}

fn nearest_rank(sorted: &[f64], level: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of an empty sample");
    let n = sorted.len();
    // Guard against level * n landing one ulp above an integer.
    let rank = (level * n as f64 * (1.0 - 1e-12)).ceil() as usize;
    sorted[rank.clamp(1, n) - 1]
}

/// Free-function form of [`EmpiricalSample::quantile`].
pub fn quantile(sample: &EmpiricalSample, level: f64) -> f64 {
    sample.quantile(level)
}

/// Two-sample Kolmogorov-Smirnov distance `sup_x |F_a(x) - F_b(x)|`.
pub fn ks_distance(a: &EmpiricalSample, b: &EmpiricalSample) -> f64 {
    ks_distance_sorted(a.values(), b.values())
}

/// KS distance between two ascending slices, by a merged sweep.
pub fn ks_distance_sorted(a: &[f64], b: &[f64]) -> f64 {
    assert!(
        !a.is_empty() && !b.is_empty(),
        "KS distance of an empty sample"
    );
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Asymptotic two-sample KS critical value at significance `alpha`.
pub fn ks_critical_value(alpha: f64, n: usize, m: usize) -> f64 {
    let c = (-(alpha / 2.0).ln() / 2.0).sqrt();
    c * ((n + m) as f64 / (n as f64 * m as f64)).sqrt()
}

fn require_wiener_exponent(p: f64) -> Result<()> {
    if p > 2.0 && p.is_finite() {
        Ok(())
    } else {
        Err(Error::UnsupportedExponent {
            p,
            requirement: "the Wiener process has finite p-variation only for p > 2",
        })
    }
}

fn params(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
    pairs.iter().map(|&(k, v)| (k.to_string(), v)).collect()
}

/// `reps` exact `n(0, sd^2)` draws.
pub fn normal_sample(sd: f64, reps: usize, seed: u64) -> EmpiricalSample {
    let values = par_replicates(reps, seed, |_, rng| {
        let z: f64 = StandardNormal.sample(rng);
        sd * z
    });
    EmpiricalSample::new("normal", params(&[("sd", sd)]), seed, values)
}

/// `n(0, I(f^2))` draws: the exact law of the isonormal process at `f`.
pub fn isonormal_marginal(f: &WeightFunction, reps: usize, seed: u64) -> EmpiricalSample {
    let i_f2 = f.integral_of_square();
    let mut s = normal_sample(i_f2.sqrt(), reps, seed);
    s.statistic = "isonormal_marginal".into();
    s.params = params(&[("I_f2", i_f2)]);
    s
}

/// `v_p` of the walk `m^{-1/2} (0, z_1, z_1 + z_2, ...)` built from the given
/// increments, `m = increments.len()`.
pub fn wiener_pvar_of_increments(increments: &[f64], p: f64) -> Result<f64> {
    let scale = (increments.len() as f64).sqrt().recip();
    let scaled: Vec<f64> = increments.iter().map(|z| z * scale).collect();
    Ok(pvar(&cumulative_path(&scaled), p)?.value)
}

/// Sample of `v_p(W)` approximated on a grid of `grid` steps.
pub fn wiener_pvar_sample(p: f64, grid: usize, reps: usize, seed: u64) -> Result<EmpiricalSample> {
    require_wiener_exponent(p)?;
    if grid == 0 {
        return Err(Error::Config("grid must be positive".into()));
    }
    let values = par_replicates(reps, seed, |_, rng| {
        let z: Vec<f64> = (0..grid).map(|_| StandardNormal.sample(rng)).collect();
        wiener_pvar_of_increments(&z, p)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok(EmpiricalSample::new(
        "v_p(W)",
        params(&[("p", p), ("grid", grid as f64)]),
        seed,
        values,
    ))
}

/// Sample of `n^{-p/2} v_p(S_n)` for a linear process.
///
/// With `weight = Some(g)` the partial sums are taken of `X_i g(i/n)`.
pub fn pvar_limit_null_sample(
    filter: &FilterSpec,
    innov: &InnovationSpec,
    weight: Option<&WeightFunction>,
    p: f64,
    n: usize,
    reps: usize,
    seed: u64,
) -> Result<EmpiricalSample> {
    require_wiener_exponent(p)?;
    if n == 0 {
        return Err(Error::EmptySeries);
    }
    innov.validate()?;
    let truncated = filter.truncate()?;
    let grid_weights = weight.map(|g| g.eval_grid(n));
    let norm = (n as f64).powf(-p / 2.0);
    let values = par_replicates(reps, seed, |_, rng| {
        let mut x = simulate_with(&truncated, innov, n, rng);
        if let Some(w) = &grid_weights {
            x.iter_mut().zip(w).for_each(|(xi, wi)| *xi *= wi);
        }
        pvar_partial_sum(&x, p).map(|r| norm * r.value)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok(EmpiricalSample::new(
        "n^(-p/2) v_p(S_n)",
        params(&[("p", p), ("n", n as f64)]),
        seed,
        values,
    ))
}

/// Sample of `n^{-1/2} nu_n(g)`.
pub fn weighted_sum_sample(
    filter: &FilterSpec,
    innov: &InnovationSpec,
    g: &WeightFunction,
    n: usize,
    reps: usize,
    seed: u64,
) -> Result<EmpiricalSample> {
    if n == 0 {
        return Err(Error::EmptySeries);
    }
    innov.validate()?;
    let truncated = filter.truncate()?;
    let scale = (n as f64).sqrt().recip();
    let values = par_replicates(reps, seed, |_, rng| {
        scale * weighted_sum(&simulate_with(&truncated, innov, n, rng), g)
    });
    Ok(EmpiricalSample::new(
        "n^(-1/2) nu_n(g)",
        params(&[("n", n as f64)]),
        seed,
        values,
    ))
}

/// Monte Carlo quantiles of `||W||_(p) = v_p(W)^(1/p)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CriticalValueTable {
    pub p: f64,
    pub grid: usize,
    pub reps: usize,
    pub seed: u64,
    /// Level (formatted with at least two decimals) to quantile.
    pub quantiles: BTreeMap<String, f64>,
    pub generator: String,
    /// Sorted sample of `||W||_(p)`, used for empirical p-values.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample: Option<Vec<f64>>,
}

/// `0.9 -> "0.90"`, `0.975 -> "0.975"`.
pub fn level_key(level: f64) -> String {
    let s = format!("{level}");
    match s.split_once('.') {
        Some((_, frac)) if frac.len() >= 2 => s,
        Some(_) => format!("{level:.2}"),
        None => format!("{level:.2}"),
    }
}

fn check_level(level: f64) -> Result<()> {
    if level > 0.0 && level < 1.0 {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "quantile level must lie in (0, 1), got {level}"
        )))
    }
}

/// Simulates `||W||_(p)` and tabulates its quantiles at `levels`.
pub fn build_cv_table(
    p: f64,
    grid: usize,
    reps: usize,
    levels: &[f64],
    seed: u64,
    keep_sample: bool,
) -> Result<CriticalValueTable> {
    if reps == 0 {
        return Err(Error::Config("reps must be positive".into()));
    }
    for &l in levels {
        check_level(l)?;
    }
    let norms = wiener_pvar_sample(p, grid, reps, seed)?.map(|v| v.powf(1.0 / p));
    Ok(CriticalValueTable {
        p,
        grid,
        reps,
        seed,
        quantiles: levels
            .iter()
            .map(|&l| (level_key(l), norms.quantile(l)))
            .collect(),
        generator: GENERATOR.to_string(),
        sample: keep_sample.then(|| norms.values().to_vec()),
    })
}

impl CriticalValueTable {
    pub fn save(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })?;
        std::fs::write(path, json + "\n").map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })
    }

    fn levels(&self) -> Vec<(f64, f64)> {
        let mut out: Vec<(f64, f64)> = self
            .quantiles
            .iter()
            .filter_map(|(k, &v)| k.parse::<f64>().ok().map(|l| (l, v)))
            .collect();
        out.sort_by(|a, b| a.0.total_cmp(&b.0));
        out
    }

    /// Quantile of `||W||_(p)` at `level`: tabulated if present, otherwise
    /// taken from the stored sample.
    pub fn critical_value(&self, level: f64) -> Result<f64> {
        check_level(level)?;
        if let Some(&(_, v)) = self
            .levels()
            .iter()
            .find(|(l, _)| (l - level).abs() < 1e-12)
        {
            return Ok(v);
        }
        match &self.sample {
            Some(s) if !s.is_empty() => Ok(nearest_rank(s, level)),
            _ => Err(Error::LevelMissing { level }),
        }
    }

    /// Upper-tail probability of `x` under the tabulated law.
    ///
    /// Uses the stored sample when present. Otherwise the CDF is linearly
    /// interpolated between tabulated quantiles, anchored at `(0, 0)`; values
    /// beyond the largest quantile get `1 - max level`, an upper bound.
    pub fn p_value(&self, x: f64) -> f64 {
        if let Some(s) = self.sample.as_ref().filter(|s| !s.is_empty()) {
            let below = s.partition_point(|&v| v < x);
            return (s.len() - below) as f64 / s.len() as f64;
        }
        let mut prev = (0.0, 0.0);
        for (level, q) in self.levels() {
            if x <= q {
                let (l0, q0) = prev;
                let cdf = if q > q0 {
                    l0 + (level - l0) * ((x - q0) / (q - q0)).max(0.0)
                } else {
                    level
                };
                return 1.0 - cdf;
            }
            prev = (level, q);
        }
        1.0 - prev.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nearest_rank_rule() {
        let s = EmpiricalSample::from_values(vec![3.0, 1.0, 2.0]);
        assert_eq!(s.quantile(0.5), 2.0);
        assert_eq!(s.quantile(0.01), 1.0);
        assert_eq!(s.quantile(0.99), 3.0);
        let s = EmpiricalSample::from_values((1..=2000).map(f64::from).collect());
        assert_eq!(s.quantile(0.95), 1900.0);
    }

    #[test]
    fn ks_basics() {
        let a = EmpiricalSample::from_values(vec![0.0]);
        let b = EmpiricalSample::from_values(vec![1.0]);
        assert_eq!(ks_distance(&a, &b), 1.0);
        assert_eq!(ks_distance(&a, &a), 0.0);
        let a = EmpiricalSample::from_values(vec![1.0, 2.0, 3.0, 4.0]);
        let b = EmpiricalSample::from_values(vec![2.5, 3.5]);
        assert_eq!(ks_distance(&a, &b), 0.5);
        // ties across samples
        let a = EmpiricalSample::from_values(vec![1.0, 1.0, 2.0]);
        let b = EmpiricalSample::from_values(vec![1.0, 2.0, 2.0]);
        assert!((ks_distance(&a, &b) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn ks_critical_values() {
        let c = ks_critical_value(0.01, 5000, 5000);
        assert!((c - 0.03255).abs() < 1e-4, "{c}");
    }

    #[test]
    fn isonormal_trivial_cases() {
        let zero = WeightFunction::poly(vec![0.0]).unwrap();
        assert!(isonormal_marginal(&zero, 10, 1)
            .values()
            .iter()
            .all(|&v| v == 0.0));
        let one = WeightFunction::poly(vec![1.0]).unwrap();
        let s = isonormal_marginal(&one, 10, 1);
        let mut direct: Vec<f64> = (0..10)
            .map(|r| StandardNormal.sample(&mut crate::rng::replicate_rng(1, r)))
            .collect();
        direct.sort_by(f64::total_cmp);
        assert_eq!(s.values(), direct.as_slice());
    }

    #[test]
    fn wiener_zero_walk_and_scaling() {
        assert_eq!(wiener_pvar_of_increments(&[0.0; 64], 3.0).unwrap(), 0.0);
        let z: Vec<f64> = (0..64).map(|k| ((k * 7919) % 13) as f64 - 6.0).collect();
        let base = wiener_pvar_of_increments(&z, 3.0).unwrap();
        let scaled: Vec<f64> = z.iter().map(|v| -2.0 * v).collect();
        let v = wiener_pvar_of_increments(&scaled, 3.0).unwrap();
        assert!((v - 8.0 * base).abs() <= 1e-12 * v);
    }

    #[test]
    fn wiener_requires_p_above_two() {
        assert!(matches!(
            wiener_pvar_sample(2.0, 16, 1, 0),
            Err(Error::UnsupportedExponent { .. })
        ));
        let s = wiener_pvar_sample(3.0, 16, 5, 0).unwrap();
        assert!(s.values().iter().all(|&v| v > 0.0));
    }

    #[test]
    fn small_n_null_sample_is_finite() {
        let s = pvar_limit_null_sample(
            &FilterSpec::identity(),
            &InnovationSpec::standard_normal(),
            None,
            3.0,
            4,
            50,
            2,
        )
        .unwrap();
        assert!(s.values().iter().all(|v| v.is_finite() && *v >= 0.0));
    }

    #[test]
    fn level_keys() {
        assert_eq!(level_key(0.9), "0.90");
        assert_eq!(level_key(0.95), "0.95");
        assert_eq!(level_key(0.975), "0.975");
    }

    #[test]
    fn table_lookup_and_p_values() {
        let mut t = build_cv_table(3.0, 64, 200, &[0.9, 0.95], 5, true).unwrap();
        assert_eq!(t.quantiles.len(), 2);
        assert!(t.quantiles["0.90"] <= t.quantiles["0.95"]);
        assert_eq!(t.critical_value(0.95).unwrap(), t.quantiles["0.95"]);
        // level absent from the table falls back to the sample
        let q99 = t.critical_value(0.99).unwrap();
        assert!(q99 >= t.quantiles["0.95"]);
        assert_eq!(t.p_value(0.0), 1.0);
        assert_eq!(t.p_value(f64::INFINITY), 0.0);

        t.sample = None;
        assert!(matches!(
            t.critical_value(0.99),
            Err(Error::LevelMissing { .. })
        ));
        let pv = t.p_value(t.quantiles["0.95"]);
        assert!((pv - 0.05).abs() < 1e-12);
        assert!((t.p_value(f64::INFINITY) - 0.05).abs() < 1e-12);
        let mid = 0.5 * (t.quantiles["0.90"] + t.quantiles["0.95"]);
        assert!((t.p_value(mid) - 0.075).abs() < 1e-12);
    }
}
