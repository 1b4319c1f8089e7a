//! Runtime sweeps over one hyper-parameter.
//!
//! Every configuration is fitted and applied `repeats` times. The fastest
//! run per value feeds an ordinary least-squares line `y = a x + c`.

use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use crate::analysis::{roc_auc, split_halves};
use crate::data::Dataset;
use crate::error::{invalid, Error, Result};
use crate::gbdt::{fit_forest, FitConfig};
use crate::synthetic::gaussian_dataset;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParameter {
    Trees,
    Depth,
    Events,
    Features,
    Subsample,
}

impl SweepParameter {
    pub fn name(self) -> &'static str {
        match self {
            SweepParameter::Trees => "trees",
            SweepParameter::Depth => "depth",
            SweepParameter::Events => "events",
            SweepParameter::Features => "features",
            SweepParameter::Subsample => "subsample",
        }
    }
}

impl fmt::Display for SweepParameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepParameter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "trees" => SweepParameter::Trees,
            "depth" => SweepParameter::Depth,
            "events" => SweepParameter::Events,
            "features" => SweepParameter::Features,
            "subsample" => SweepParameter::Subsample,
            other => return Err(invalid(format!("unknown sweep parameter `{other}`"))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Fit,
    Apply,
}

impl Phase {
    pub fn name(self) -> &'static str {
        match self {
            Phase::Fit => "fit",
            Phase::Apply => "apply",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRecord {
    pub parameter: SweepParameter,
    pub value: f64,
    pub phase: Phase,
    pub repeats: usize,
    pub best_seconds: f64,
    pub mean_seconds: f64,
    /// AUC of the fitted forest on the test events.
    pub auc: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub sweep: SweepParameter,
    pub values: Vec<f64>,
    pub repeats: usize,
    /// Settings for the parameters that are not swept.
    pub fit: FitConfig,
    pub n_events: usize,
    pub n_features: usize,
    /// Rows used for the apply phase; synthetic data only.
    pub n_test_events: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            sweep: SweepParameter::Trees,
            values: vec![50.0, 100.0, 200.0, 400.0],
            repeats: 5,
            fit: FitConfig::default(),
            n_events: 50_000,
            n_features: 10,
            n_test_events: 50_000,
        }
    }
}

/// Least-squares line with its coefficient of determination.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

impl LinearFit {
    pub fn ols(xs: &[f64], ys: &[f64]) -> Result<Self> {
        if xs.len() != ys.len() || xs.len() < 2 {
            return Err(invalid("regression needs at least two (x, y) pairs"));
        }
        let n = xs.len() as f64;
        let mx = xs.iter().sum::<f64>() / n;
        let my = ys.iter().sum::<f64>() / n;
        let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
        let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        if sxx == 0.0 {
            return Err(invalid("regression needs at least two distinct x values"));
        }
        let slope = sxy / sxx;
        let intercept = my - slope * mx;
        let ss_tot: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
        let ss_res: f64 = xs
            .iter()
            .zip(ys)
            .map(|(x, y)| (y - slope * x - intercept).powi(2))
            .sum();
        let r_squared = if ss_tot > 0.0 {
            1.0 - ss_res / ss_tot
        } else {
            1.0
        };
        Ok(Self {
            slope,
            intercept,
            r_squared,
        })
    }
}

fn as_count(v: f64, what: &str) -> Result<usize> {
    if v.fract() != 0.0 || v < 1.0 {
        return Err(invalid(format!(
            "{what} must be a positive integer, got {v}"
        )));
    }
    Ok(v as usize)
}

/// Runs the sweep. With `data`, its seeded halves are used for fitting and
/// applying; otherwise Gaussian data is generated from the fit seed.
pub fn run_bench(config: &BenchConfig, data: Option<&Dataset>) -> Result<Vec<BenchRecord>> {
    if config.repeats < 1 {
        return Err(invalid("repeats must be at least 1"));
    }
    if config.values.is_empty() {
        return Err(invalid("no sweep values given"));
    }
    let halves = data.map(|d| split_halves(d, config.fit.seed));
    let mut records = Vec::with_capacity(2 * config.values.len());
    for &value in &config.values {
        let mut fit = config.fit;
        let mut n_events = config.n_events;
        let mut n_features = config.n_features;
        match config.sweep {
            SweepParameter::Trees => fit.n_trees = as_count(value, "trees")?,
            SweepParameter::Depth => fit.depth = as_count(value, "depth")?,
            SweepParameter::Events => n_events = as_count(value, "events")?,
            SweepParameter::Features => n_features = as_count(value, "features")?,
            SweepParameter::Subsample => fit.subsample = value,
        }
        fit.validate()?;

        let (train, test) = match &halves {
            Some((train, test)) => {
                if n_events > train.n_rows() {
                    return Err(invalid(format!(
                        "{n_events} events requested but the training half has {}",
                        train.n_rows()
                    )));
                }
                let features: Vec<usize> = (0..n_features.min(train.n_features())).collect();
                if n_features > train.n_features() {
                    return Err(invalid(format!(
                        "{n_features} features requested but the data has {}",
                        train.n_features()
                    )));
                }
                let rows: Vec<usize> = (0..n_events).collect();
                (
                    train.select_rows(&rows).select_features(&features)?,
                    test.select_features(&features)?,
                )
            }
            None => (
                gaussian_dataset(n_events, n_features, fit.seed),
                gaussian_dataset(config.n_test_events, n_features, fit.seed.wrapping_add(1)),
            ),
        };
        let test_rows: Vec<&[f64]> = test.rows().collect();

        let mut fit_times = Vec::with_capacity(config.repeats);
        let mut apply_times = Vec::with_capacity(config.repeats);
        let mut predictions = Vec::new();
        for _ in 0..config.repeats {
            let start = Instant::now();
            let forest = fit_forest(&train, &fit)?;
            fit_times.push(start.elapsed().as_secs_f64());

            let start = Instant::now();
            predictions = forest.predict_batch(&test_rows, 1)?;
            apply_times.push(start.elapsed().as_secs_f64());
        }
        let auc = roc_auc(&predictions, test.labels(), test.weights())?;
        for (phase, times) in [(Phase::Fit, &fit_times), (Phase::Apply, &apply_times)] {
            records.push(BenchRecord {
                parameter: config.sweep,
                value,
                phase,
                repeats: config.repeats,
                best_seconds: times.iter().copied().fold(f64::INFINITY, f64::min),
                mean_seconds: times.iter().sum::<f64>() / times.len() as f64,
                auc,
            });
        }
    }
    Ok(records)
}

/// Regression of the per-value minimum runtime of `phase` on the swept value.
pub fn regression(records: &[BenchRecord], phase: Phase) -> Result<LinearFit> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = records
        .iter()
        .filter(|r| r.phase == phase)
        .map(|r| (r.value, r.best_seconds))
        .unzip();
    LinearFit::ols(&xs, &ys)
}

pub const RECORD_HEADER: &str = "parameter,value,phase,repeats,best_seconds,mean_seconds,auc";

pub fn write_records(records: &[BenchRecord], mut out: impl Write) -> std::io::Result<()> {
    writeln!(out, "{RECORD_HEADER}")?;
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{:.9},{:.9},{:.6}",
            r.parameter,
            r.value,
            r.phase.name(),
            r.repeats,
            r.best_seconds,
            r.mean_seconds,
            r.auc
        )?;
    }
    Ok(())
}
