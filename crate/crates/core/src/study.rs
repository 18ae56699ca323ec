//! Monte Carlo convergence studies.
//!
//! A study draws `replications` samples at each size, estimates the frontier
//! on a grid over `Ω` with the scheduled `(p_n, h_n)`, and aggregates sup-norm
//! errors. Cells run in parallel; results are collected in `(size, replication)`
//! order so the report does not depend on the number of worker threads.
//! Wall-clock timings are kept apart from the report for the same reason.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::{
    estimate_grid, sup_error, w_rate, EstimatorConfig, RateSchedule, DEFAULT_A, DEFAULT_K1, DEFAULT_K2,
};
use crate::kernel::{KernelProfile, KernelSpec};
use crate::model::{FrontierModel, ModelSpec};
use crate::moments::scaled_moment;
use crate::oracle::SmoothedMoments;

pub const REPORT_SCHEMA_VERSION: u32 = 1;
/// Odd multiplier separating replication seeds: `seed = base + rep·stride (mod 2^64)`.
pub const SEED_STRIDE: u64 = 0x9E37_79B9_7F4A_7C15;
pub const DEFAULT_SIZES: [usize; 3] = [1_000, 4_000, 16_000];
pub const DEFAULT_REPLICATIONS: usize = 20;
pub const DEFAULT_GRID: usize = 101;
pub const DEFAULT_SEED: u64 = 1;

pub fn replication_seed(base: u64, replication: usize) -> u64 {
    base.wrapping_add((replication as u64).wrapping_mul(SEED_STRIDE))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyConfig {
    pub sizes: Vec<usize>,
    pub replications: usize,
    pub schedule: RateSchedule,
    /// Grid points per axis over `Ω`.
    pub grid_resolution: usize,
    pub base_seed: u64,
    pub a: f64,
    pub kernel: KernelProfile,
}

impl StudyConfig {
    /// Defaults: sizes 10³, 4·10³, 1.6·10⁴; 20 replications; rate-optimal
    /// exponents with `k1 = 0.5`, `k2 = 1`; 101 grid points per axis.
    pub fn for_model(model: &FrontierModel) -> Result<Self> {
        let schedule = RateSchedule::optimal(
            model.dimension(),
            model.eta_g(),
            model.alpha_bar(),
            DEFAULT_K1,
            DEFAULT_K2,
        )?;
        Ok(StudyConfig {
            sizes: DEFAULT_SIZES.to_vec(),
            replications: DEFAULT_REPLICATIONS,
            schedule,
            grid_resolution: DEFAULT_GRID,
            base_seed: DEFAULT_SEED,
            a: DEFAULT_A,
            kernel: KernelProfile::EpanechnikovBall,
        })
    }

    /// Checks the configuration and returns `(p_n, h_n)` per size.
    pub fn validate(&self, model: &FrontierModel) -> Result<Vec<(f64, f64)>> {
        if self.sizes.len() < 2 {
            return Err(Error::config("a study needs at least two sample sizes"));
        }
        if self.sizes.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::config("sample sizes must be strictly increasing"));
        }
        if self.replications == 0 {
            return Err(Error::config("replications must be at least 1"));
        }
        if self.grid_resolution == 0 {
            return Err(Error::config("grid resolution must be at least 1"));
        }
        if self.schedule.d != model.dimension() {
            return Err(Error::config(format!(
                "schedule dimension {} does not match model dimension {}",
                self.schedule.d,
                model.dimension()
            )));
        }
        let params = self.schedule.check_range(&self.sizes)?;
        for &(p, h) in &params {
            EstimatorConfig::new(self.a, p, h, KernelSpec::new(self.kernel, model.dimension()))?;
        }
        Ok(params)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub n: usize,
    pub replication: usize,
    pub seed: u64,
    pub p: f64,
    pub h: f64,
    pub w: f64,
    /// `None` when every grid point failed.
    pub sup_error: Option<f64>,
    pub failures: usize,
    /// `max_grid |μ̂_p/μ_p − 1|`; `None` when the smoothed-moment oracle is unavailable.
    pub concentration: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasTerms {
    pub h_pow_eta_g: f64,
    pub h_pow_eta_alpha_over_p: f64,
    pub p_pow_neg_beta_min_minus_one: f64,
    /// `w_n` times the largest of the three terms.
    pub w_times_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeSummary {
    pub n: usize,
    pub p: f64,
    pub h: f64,
    pub w: f64,
    pub median_sup_error: Option<f64>,
    /// `w_n · median_sup_error`
    pub scaled_sup_error: Option<f64>,
    pub median_concentration: Option<f64>,
    pub total_failures: usize,
    pub bias_terms: BiasTerms,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub residual_ss: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyReport {
    pub schema_version: u32,
    pub model: ModelSpec,
    pub config: StudyConfig,
    pub grid_points: usize,
    pub alpha_bar: f64,
    pub beta_min: f64,
    pub cells: Vec<CellResult>,
    pub summary: Vec<SizeSummary>,
    /// Least-squares fit of `ln median_sup_error` on `ln n`.
    pub slope: Option<SlopeFit>,
    /// `max/min` of `w_n · median_sup_error` across sizes.
    pub scaled_error_spread: Option<f64>,
    pub sup_error_decreasing: bool,
    pub concentration_decreasing: bool,
}

impl StudyReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialises");
        s.push('\n');
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellTiming {
    pub n: usize,
    pub replication: usize,
    pub wall_seconds: f64,
}

#[derive(Debug, Clone)]
pub struct StudyOutput {
    pub report: StudyReport,
    pub timings: Vec<CellTiming>,
}

/// Runs the study; `threads = None` uses the global rayon pool.
pub fn run_study(model: &FrontierModel, config: &StudyConfig, threads: Option<usize>) -> Result<StudyOutput> {
    let params = config.validate(model)?;
    match threads {
        None => run_validated(model, config, &params),
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t.max(1))
                .build()
                .map_err(|e| Error::config(format!("cannot build thread pool: {e}")))?;
            pool.install(|| run_validated(model, config, &params))
        }
    }
}

fn run_validated(model: &FrontierModel, config: &StudyConfig, params: &[(f64, f64)]) -> Result<StudyOutput> {
    let d = model.dimension();
    let kernel = KernelSpec::new(config.kernel, d);
    let grid = model.omega().grid(config.grid_resolution);
    let alpha_bar = config.schedule.alpha_bar;
    let beta_min = model.beta_min();

    // smoothed moments per size, shared by every replication
    let oracle_moments: Vec<Option<Vec<f64>>> = params
        .iter()
        .map(|&(p, h)| {
            let smoothed = SmoothedMoments::new(model, &kernel).ok()?;
            grid.par_iter()
                .map(|x| smoothed.relative_moment(x, p, h).ok())
                .collect::<Option<Vec<f64>>>()
        })
        .collect();

    let cells: Vec<(usize, usize)> = (0..config.sizes.len())
        .flat_map(|i| (0..config.replications).map(move |r| (i, r)))
        .collect();

    let results = cells
        .par_iter()
        .map(|&(i, rep)| {
            let start = Instant::now();
            let n = config.sizes[i];
            let (p, h) = params[i];
            let seed = replication_seed(config.base_seed, rep);
            let sample = model.sample(n, seed)?;
            let est = EstimatorConfig::new(config.a, p, h, kernel)?;
            let records = estimate_grid(&sample, &grid, &est)?;
            let failures = records.iter().filter(|r| !r.is_success()).count();
            let sup = match sup_error(&records, model.g()) {
                Ok(s) => Some(s.sup),
                Err(Error::AllPointsFailed) => None,
                Err(e) => return Err(e),
            };
            let concentration = match &oracle_moments[i] {
                Some(truth) => {
                    let mut worst: f64 = 0.0;
                    for (x, mu) in grid.iter().zip(truth) {
                        let m = scaled_moment(&sample, x, p, h, &kernel)?;
                        let rel = m.relative_to(model.g().eval(x).ln(), p);
                        worst = worst.max((rel / mu - 1.0).abs());
                    }
                    Some(worst)
                }
                None => None,
            };
            let cell = CellResult {
                n,
                replication: rep,
                seed,
                p,
                h,
                w: w_rate(n as f64, p, h, alpha_bar, d),
                sup_error: sup,
                failures,
                concentration,
            };
            let timing = CellTiming { n, replication: rep, wall_seconds: start.elapsed().as_secs_f64() };
            Ok((cell, timing))
        })
        .collect::<Result<Vec<_>>>()?;
    let (cells, timings): (Vec<CellResult>, Vec<CellTiming>) = results.into_iter().unzip();

    let summary: Vec<SizeSummary> = config
        .sizes
        .iter()
        .zip(params)
        .map(|(&n, &(p, h))| {
            let of_size: Vec<&CellResult> = cells.iter().filter(|c| c.n == n).collect();
            let w = w_rate(n as f64, p, h, alpha_bar, d);
            let median_sup_error = median(of_size.iter().filter_map(|c| c.sup_error));
            let median_concentration = median(of_size.iter().filter_map(|c| c.concentration));
            let h_eta_g = h.powf(model.eta_g());
            let h_eta_alpha = h.powf(model.eta_alpha()) / p;
            let p_beta = p.powf(-beta_min - 1.0);
            SizeSummary {
                n,
                p,
                h,
                w,
                median_sup_error,
                scaled_sup_error: median_sup_error.map(|m| w * m),
                median_concentration,
                total_failures: of_size.iter().map(|c| c.failures).sum(),
                bias_terms: BiasTerms {
                    h_pow_eta_g: h_eta_g,
                    h_pow_eta_alpha_over_p: h_eta_alpha,
                    p_pow_neg_beta_min_minus_one: p_beta,
                    w_times_max: w * h_eta_g.max(h_eta_alpha).max(p_beta),
                },
            }
        })
        .collect();

    let slope = fit_log_log(
        &summary
            .iter()
            .filter_map(|s| s.median_sup_error.map(|m| (s.n as f64, m)))
            .collect::<Vec<_>>(),
    );
    let scaled: Vec<f64> = summary.iter().filter_map(|s| s.scaled_sup_error).collect();
    let scaled_error_spread = (scaled.len() == summary.len() && !scaled.is_empty()).then(|| {
        let hi = scaled.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = scaled.iter().copied().fold(f64::INFINITY, f64::min);
        hi / lo
    });

    let report = StudyReport {
        schema_version: REPORT_SCHEMA_VERSION,
        model: ModelSpec::from(model.clone()),
        config: config.clone(),
        grid_points: grid.len(),
        alpha_bar,
        beta_min,
        sup_error_decreasing: strictly_decreasing(summary.iter().map(|s| s.median_sup_error)),
        concentration_decreasing: strictly_decreasing(summary.iter().map(|s| s.median_concentration)),
        cells,
        summary,
        slope,
        scaled_error_spread,
    };
    Ok(StudyOutput { report, timings })
}

fn strictly_decreasing(values: impl Iterator<Item = Option<f64>>) -> bool {
    let values: Option<Vec<f64>> = values.collect();
    match values {
        Some(v) if v.len() >= 2 => v.windows(2).all(|w| w[1] < w[0]),
        _ => false,
    }
}

pub fn median(values: impl Iterator<Item = f64>) -> Option<f64> {
    let mut v: Vec<f64> = values.collect();
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    Some(if v.len().is_multiple_of(2) { 0.5 * (v[mid - 1] + v[mid]) } else { v[mid] })
}

/// Ordinary least squares of `ln y` on `ln x`.
pub fn fit_log_log(points: &[(f64, f64)]) -> Option<SlopeFit> {
    if points.len() < 2 || points.iter().any(|&(x, y)| !(x > 0.0 && y > 0.0)) {
        return None;
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let n = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual_ss = logs.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    Some(SlopeFit { slope, intercept, residual_ss })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_even_and_odd() {
        assert_eq!(median([3.0, 1.0, 2.0].into_iter()), Some(2.0));
        assert_eq!(median([4.0, 1.0, 2.0, 3.0].into_iter()), Some(2.5));
        assert_eq!(median(std::iter::empty()), None);
    }

    #[test]
    fn log_log_fit_recovers_power_law() {
        let pts: Vec<(f64, f64)> = [10.0, 100.0, 1000.0].iter().map(|&n: &f64| (n, 3.0 * n.powf(-0.5))).collect();
        let fit = fit_log_log(&pts).unwrap();
        assert!((fit.slope + 0.5).abs() < 1e-12);
        assert!(fit.residual_ss < 1e-20);
        assert!(fit_log_log(&pts[..1]).is_none());
    }

    #[test]
    fn seeds_are_distinct_and_wrap() {
        assert_eq!(replication_seed(5, 0), 5);
        assert_ne!(replication_seed(5, 1), replication_seed(5, 2));
        let _ = replication_seed(u64::MAX, 3);
    }

    #[test]
    fn config_validation() {
        let model = FrontierModel::canonical();
        let base = StudyConfig::for_model(&model).unwrap();
        assert!(base.validate(&model).is_ok());
        let mut c = base.clone();
        c.sizes = vec![1000];
        assert!(c.validate(&model).is_err());
        let mut c = base.clone();
        c.sizes = vec![4000, 1000];
        assert!(c.validate(&model).is_err());
        let mut c = base.clone();
        c.replications = 0;
        assert!(c.validate(&model).is_err());
        let mut c = base;
        c.schedule.c1 = 0.7;
        assert!(matches!(c.validate(&model), Err(Error::Config(_))));
    }

    #[test]
    fn small_study_is_deterministic_across_thread_counts() {
        let model = FrontierModel::canonical();
        let mut config = StudyConfig::for_model(&model).unwrap();
        config.sizes = vec![400, 800];
        config.replications = 3;
        config.grid_resolution = 11;
        let a = run_study(&model, &config, Some(1)).unwrap().report.to_json();
        let b = run_study(&model, &config, Some(3)).unwrap().report.to_json();
        assert_eq!(a, b);
    }
}
