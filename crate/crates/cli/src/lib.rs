// SPDX-License-Identifier: MIT OR Apache-2.0

//! Subcommands of the `lpvar` binary. Each command reads its inputs from
//! files, writes its outputs to files or returns a JSON document for stdout.

pub mod config;
pub mod error;
pub mod io;

use std::path::Path;

use lpvar::changepoint::{
    cp_test, cp_test_lrv, simulate_cpm, size_power_study, ChangeModel, StudyDesign, StudyScenario,
    TestReport,
};
use lpvar::filters::simulate_path;
use lpvar::limits::{build_cv_table, ks_critical_value, ks_distance, normal_sample};
use lpvar::pvar::pvar;
use lpvar::regress::{beta_clt_study, simulate_regression, RegressionScenario};
use lpvar::rng::GENERATOR;
use lpvar::{CriticalValueTable, Origin, Series, VERSION};
use serde::Serialize;

use crate::config::{
    load_json, CalibrateConfig, CpStudyConfig, RegressStudyConfig, SimulateConfig, TableSource,
};
pub use crate::error::{CliError, CliResult};
use crate::io::{read_series, to_json, write_rows, write_series};

/// One-line version banner.
pub fn version_banner() -> String {
    format!("{VERSION} (generator {GENERATOR})")
}

/// Writes the simulated series described by the config at `config` to `out`.
pub fn cmd_simulate(config: &Path, out: &Path) -> CliResult<()> {
    let values = match SimulateConfig::load(config)? {
        SimulateConfig::Linproc(c) => {
            simulate_path(&c.filter.to_spec(), &c.innovations.to_spec()?, c.n, c.seed)?
                .into_values()
        }
        SimulateConfig::Cpm(c) => {
            let model = ChangeModel::new(c.tau, c.beta)?;
            simulate_cpm(
                &model,
                &c.filter.to_spec(),
                &c.innovations.to_spec()?,
                c.n,
                c.seed,
            )?
        }
        SimulateConfig::Regression(c) => {
            simulate_regression(&RegressionScenario {
                beta: c.beta,
                f: c.f.to_weight()?,
                filter: c.filter.to_spec(),
                innov: c.innovations.to_spec()?,
                n: c.n,
                seed: c.seed,
            })?
            .y
        }
    };
    write_series(out, &values)
}

#[derive(Serialize)]
struct PvarOutput {
    p: f64,
    n: usize,
    origin: &'static str,
    value: f64,
    norm: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    partition: Option<Vec<usize>>,
    library: &'static str,
    generator: &'static str,
}

/// p-variation of the series in `input`. Partition indices refer to the
/// anchored path `(0, S_1, ..., S_n)`.
pub fn cmd_pvar(input: &Path, p: f64, origin: Origin, emit_partition: bool) -> CliResult<String> {
    let series = Series::new(read_series(input)?, origin)?;
    let result = pvar(&series.anchored_path(), p)?;
    to_json(&PvarOutput {
        p,
        n: series.len(),
        origin: match origin {
            Origin::Raw => "raw",
            Origin::Cumulative => "cumulative",
        },
        value: result.value,
        norm: result.norm(),
        partition: emit_partition.then_some(result.partition),
        library: VERSION,
        generator: GENERATOR,
    })
}

/// Builds a critical-value table and saves it to `out`.
pub fn cmd_calibrate(config: &Path, out: &Path) -> CliResult<()> {
    let c: CalibrateConfig = load_json(config)?;
    let table = build_cv_table(c.p, c.grid, c.reps, &c.levels, c.seed, c.store_sample)?;
    Ok(table.save(out)?)
}

/// Normalization of the change-point statistic.
#[derive(Clone, Copy, Debug)]
pub enum ScaleArg {
    Known { sigma_eta: f64, a_psi: f64 },
    LongRun { bandwidth: Option<usize> },
}

#[derive(Serialize)]
struct CpTestOutput {
    #[serde(flatten)]
    report: TestReport,
    library: &'static str,
}

/// Runs the change-point test on the series in `input`.
pub fn cmd_cptest(
    input: &Path,
    p: f64,
    alpha: f64,
    cv: &Path,
    scale: ScaleArg,
) -> CliResult<String> {
    let y = read_series(input)?;
    let table = CriticalValueTable::load(cv)?;
    let report = match scale {
        ScaleArg::Known { sigma_eta, a_psi } => cp_test(&y, p, alpha, &table, sigma_eta, a_psi)?,
        ScaleArg::LongRun { bandwidth } => cp_test_lrv(&y, p, alpha, &table, bandwidth)?,
    };
    to_json(&CpTestOutput {
        report,
        library: VERSION,
    })
}

fn resolve_table(source: &TableSource, p: f64, config: &Path) -> CliResult<CriticalValueTable> {
    match source {
        TableSource::Path(rel) => {
            let path = config.parent().unwrap_or(Path::new(".")).join(rel);
            Ok(CriticalValueTable::load(&path)?)
        }
        TableSource::Inline(t) => Ok(build_cv_table(p, t.grid, t.reps, &t.levels, t.seed, false)?),
    }
}

/// Size/power study; writes one CSV row per scenario and sample size.
pub fn cmd_cpstudy(config: &Path, out: &Path) -> CliResult<()> {
    let c: CpStudyConfig = load_json(config)?;
    let scenarios = c
        .scenarios
        .iter()
        .map(|s| {
            Ok(StudyScenario {
                id: s.id.clone(),
                model: s.model()?,
            })
        })
        .collect::<CliResult<Vec<_>>>()?;
    let design = StudyDesign {
        filter: c.filter.to_spec(),
        innov: c.innovations.to_spec()?,
        p: c.p,
        alpha: c.alpha,
        sample_sizes: c.sample_sizes.clone(),
        reps: c.reps,
        seed: c.seed,
    };
    let table = resolve_table(&c.cv, c.p, config)?;
    let rows = size_power_study(&scenarios, &design, &table)?;
    write_rows(out, &rows)
}

#[derive(Serialize)]
struct RegressSummary {
    statistic: String,
    beta: f64,
    n: usize,
    reps: usize,
    seed: u64,
    mean: f64,
    variance: f64,
    limit_variance: f64,
    ks_distance: f64,
    ks_critical_value_05: f64,
    reference_seed: u64,
    max_identity_residual: f64,
    library: &'static str,
    generator: &'static str,
}

/// Estimator study: sample of `sqrt(n)(beta_hat - beta)` to `out`, summary
/// JSON to `summary` or, without one, returned for stdout.
pub fn cmd_regress_study(
    config: &Path,
    out: &Path,
    summary: Option<&Path>,
) -> CliResult<Option<String>> {
    let c: RegressStudyConfig = load_json(config)?;
    if c.reps == 0 {
        return Err(CliError::invalid("reps must be positive"));
    }
    let scenario = RegressionScenario {
        beta: c.beta,
        f: c.f.to_weight()?,
        filter: c.filter.to_spec(),
        innov: c.innovations.to_spec()?,
        n: c.n,
        seed: c.seed,
    };
    let study = beta_clt_study(&scenario, c.reps)?;
    let reference_seed = c.reference_seed.unwrap_or(c.seed.wrapping_add(1));
    let reference = normal_sample(study.limit_variance.sqrt(), c.reps, reference_seed);
    write_series(out, study.sample.values())?;
    let json = to_json(&RegressSummary {
        statistic: study.sample.statistic.clone(),
        beta: c.beta,
        n: c.n,
        reps: c.reps,
        seed: c.seed,
        mean: study.sample.mean(),
        variance: study.sample.variance(),
        limit_variance: study.limit_variance,
        ks_distance: ks_distance(&study.sample, &reference),
        ks_critical_value_05: ks_critical_value(0.05, c.reps, c.reps),
        reference_seed,
        max_identity_residual: study.max_identity_residual,
        library: VERSION,
        generator: GENERATOR,
    })?;
    match summary {
        Some(path) => {
            std::fs::write(path, json + "\n").map_err(|e| CliError::io(path, e))?;
            Ok(None)
        }
        None => Ok(Some(json)),
    }
}
