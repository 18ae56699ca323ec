//! High-order moment frontier estimator.
//!
//! ```text
//! 1/ĝ(x) = (1/(a·p)) · [ ((a+1)p + 1)·μ̂_{(a+1)p}/μ̂_{(a+1)p+1} − (p + 1)·μ̂_p/μ̂_{p+1} ]
//! ```
//!
//! Both ratios tend to `1/g(x)` with a bias of order `α(x)/p`; the weighted
//! difference cancels that leading term.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::KernelSpec;
use crate::model::{Sample, ScalarField};
use crate::moments::KernelWindow;

/// Default moment-order multiplier `a`.
pub const DEFAULT_A: f64 = 1.0;
pub const DEFAULT_K1: f64 = 0.5;
pub const DEFAULT_K2: f64 = 1.0;
const EXPONENT_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorConfig {
    pub a: f64,
    pub p: f64,
    pub h: f64,
    pub kernel: KernelSpec,
}

impl EstimatorConfig {
    pub fn new(a: f64, p: f64, h: f64, kernel: KernelSpec) -> Result<Self> {
        let config = EstimatorConfig { a, p, h, kernel };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a > 0.0 && self.a.is_finite()) {
            return Err(Error::config(format!("a = {} must be positive", self.a)));
        }
        if !(self.p >= 1.0 && self.p.is_finite()) {
            return Err(Error::config(format!("p = {} must be at least 1", self.p)));
        }
        if !(self.h > 0.0 && self.h < 1.0) {
            return Err(Error::config(format!("h = {} must lie in (0, 1)", self.h)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimateFailure {
    /// The kernel window held no data (or only zero responses).
    InsufficientLocalData,
    /// The bracket of the estimator was not positive.
    Unstable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateRecord {
    pub x: Vec<f64>,
    pub g_hat: Option<f64>,
    pub effective_count: usize,
    /// The bracket divided by `a·p`, i.e. the unclipped `1/ĝ(x)`.
    pub raw_inverse: Option<f64>,
    pub failure: Option<EstimateFailure>,
}

impl EstimateRecord {
    pub fn is_success(&self) -> bool {
        self.g_hat.is_some()
    }
}

pub fn estimate_at(sample: &Sample, x: &[f64], config: &EstimatorConfig) -> Result<EstimateRecord> {
    config.validate()?;
    let window = KernelWindow::scan(sample, x, config.h, &config.kernel)?;
    let (a, p) = (config.a, config.p);
    let high = (a + 1.0) * p;
    let mut record = EstimateRecord {
        x: x.to_vec(),
        g_hat: None,
        effective_count: window.count(),
        raw_inverse: None,
        failure: None,
    };
    let (ratio_high, ratio_low) = match window.ratio_pair(high, p) {
        Ok(pair) => pair,
        Err(Error::InsufficientLocalData { .. }) => {
            record.failure = Some(EstimateFailure::InsufficientLocalData);
            return Ok(record);
        }
        Err(e) => return Err(e),
    };
    let raw = ((high + 1.0) * ratio_high - (p + 1.0) * ratio_low) / (a * p);
    record.raw_inverse = Some(raw);
    if raw > 0.0 && raw.is_finite() {
        record.g_hat = Some(1.0 / raw);
    } else {
        record.failure = Some(EstimateFailure::Unstable);
    }
    Ok(record)
}

/// Evaluates the estimator at every grid point; output order follows `grid`.
pub fn estimate_grid(sample: &Sample, grid: &[Vec<f64>], config: &EstimatorConfig) -> Result<Vec<EstimateRecord>> {
    if grid.is_empty() {
        return Err(Error::domain("estimation grid is empty"));
    }
    grid.par_iter().map(|x| estimate_at(sample, x, config)).collect()
}

/// Rate-optimal exponents `(c1, c2)` for `p_n ∝ n^{c1}`, `h_n ∝ n^{−c2}`.
///
/// The resulting sup-norm rate is `n^{−η_g/(d + ᾱη_g)}` up to a `√log n` factor.
pub fn rate_exponents(d: usize, eta_g: f64, alpha_bar: f64) -> Result<(f64, f64)> {
    if d == 0 || !(eta_g > 0.0) || !(alpha_bar > 0.0) {
        return Err(Error::domain(format!(
            "rate exponents need positive inputs (d = {d}, eta_g = {eta_g}, alpha_bar = {alpha_bar})"
        )));
    }
    let denom = d as f64 + alpha_bar * eta_g;
    Ok((eta_g / denom, 1.0 / denom))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateSchedule {
    pub c1: f64,
    pub c2: f64,
    pub k1: f64,
    pub k2: f64,
    pub d: usize,
    pub eta_g: f64,
    pub alpha_bar: f64,
}

impl RateSchedule {
    /// Optimal exponents with the given multipliers.
    pub fn optimal(d: usize, eta_g: f64, alpha_bar: f64, k1: f64, k2: f64) -> Result<Self> {
        let (c1, c2) = rate_exponents(d, eta_g, alpha_bar)?;
        let s = RateSchedule { c1, c2, k1, k2, d, eta_g, alpha_bar };
        s.check_exponents()?;
        Ok(s)
    }

    /// Checks the asymptotic constraints on the exponents.
    ///
    /// `1 − ᾱc1 − d·c2 ≥ 0` keeps `n p^{−ᾱ} h^d` from vanishing and
    /// `1 + (2 − ᾱ)c1 − (d + 2η_g)c2 ≤ 0` keeps `w_n · h^{η_g}` bounded. The rate-optimal
    /// pair lies on both boundaries, so equality is accepted.
    pub fn check_exponents(&self) -> Result<()> {
        for (name, v) in [
            ("c1", self.c1),
            ("c2", self.c2),
            ("k1", self.k1),
            ("k2", self.k2),
            ("eta_g", self.eta_g),
            ("alpha_bar", self.alpha_bar),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::config(format!("{name} = {v} must be positive")));
            }
        }
        if self.d == 0 {
            return Err(Error::config("dimension must be positive"));
        }
        let d = self.d as f64;
        let growth = 1.0 - self.alpha_bar * self.c1 - d * self.c2;
        if growth < -EXPONENT_SLACK {
            return Err(Error::config(format!(
                "growth condition violated: alpha_bar*c1 + d*c2 = {} exceeds 1, so n p^-alpha_bar h^d / log n does not diverge",
                1.0 - growth
            )));
        }
        let bias = 1.0 + (2.0 - self.alpha_bar) * self.c1 - (d + 2.0 * self.eta_g) * self.c2;
        if bias > EXPONENT_SLACK {
            return Err(Error::config(format!(
                "bias condition violated: 1 + (2 - alpha_bar)c1 - (d + 2 eta_g)c2 = {bias} > 0"
            )));
        }
        Ok(())
    }

    /// `(p_n, h_n)` with the constraints checked at this `n`.
    pub fn at(&self, n: usize) -> Result<(f64, f64)> {
        if n < 2 {
            return Err(Error::config(format!("sample size {n} must be at least 2")));
        }
        self.check_exponents()?;
        let nf = n as f64;
        let p = self.k1 * nf.powf(self.c1);
        let h = self.k2 * nf.powf(-self.c2);
        if p < 1.0 {
            return Err(Error::config(format!("p_n = {p} < 1 at n = {n}")));
        }
        if !(h > 0.0 && h < 1.0) {
            return Err(Error::config(format!("h_n = {h} outside (0, 1) at n = {n}")));
        }
        Ok((p, h))
    }

    /// Checks every size and that `p_n h_n^{η_g}` does not grow along the sizes.
    pub fn check_range(&self, sizes: &[usize]) -> Result<Vec<(f64, f64)>> {
        let params = sizes.iter().map(|&n| self.at(n)).collect::<Result<Vec<_>>>()?;
        let products: Vec<f64> = params.iter().map(|(p, h)| p * h.powf(self.eta_g)).collect();
        for (i, w) in products.windows(2).enumerate() {
            if w[1] > w[0] * (1.0 + 1e-9) {
                return Err(Error::config(format!(
                    "p_n h_n^eta_g increases from {} (n = {}) to {} (n = {})",
                    w[0],
                    sizes[i],
                    w[1],
                    sizes[i + 1]
                )));
            }
        }
        Ok(params)
    }
}

pub fn schedule(n: usize, sched: &RateSchedule) -> Result<(f64, f64)> {
    sched.at(n)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupError {
    pub sup: f64,
    pub failures: usize,
    pub evaluated: usize,
}

/// `max |ĝ(x) − g(x)|` over successful records; failures are counted, not dropped.
pub fn sup_error(estimates: &[EstimateRecord], truth: &ScalarField) -> Result<SupError> {
    let mut sup: f64 = 0.0;
    let mut failures = 0;
    for rec in estimates {
        match rec.g_hat {
            Some(g_hat) => sup = sup.max((g_hat - truth.eval(&rec.x)).abs()),
            None => failures += 1,
        }
    }
    if failures == estimates.len() {
        return Err(Error::AllPointsFailed);
    }
    Ok(SupError { sup, failures, evaluated: estimates.len() })
}

/// `w_n = √(n p^{2−ᾱ} h^d / log n)`.
pub fn w_rate(n: f64, p: f64, h: f64, alpha_bar: f64, d: usize) -> f64 {
    (n * p.powf(2.0 - alpha_bar) * h.powi(d as i32) / n.ln()).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::FrontierModel;

    fn epa() -> KernelSpec {
        KernelSpec::epanechnikov(1)
    }

    #[test]
    fn constant_data_identity() {
        let xs: Vec<f64> = (0..50).map(|i| i as f64 / 50.0).collect();
        let s = Sample::new(1, xs, vec![1.7; 50]).unwrap();
        for &(a, p) in &[(1.0, 3.0), (0.5, 60.0), (2.0, 400.0)] {
            let cfg = EstimatorConfig::new(a, p, 0.15, epa()).unwrap();
            let rec = estimate_at(&s, &[0.5], &cfg).unwrap();
            assert!((rec.g_hat.unwrap() - 1.7).abs() < 1e-12);
            assert!((rec.raw_inverse.unwrap() - 1.0 / 1.7).abs() < 1e-12);
        }
    }

    #[test]
    fn empty_window_is_flagged() {
        let s = Sample::new(1, vec![0.1, 0.12], vec![1.0, 1.0]).unwrap();
        let cfg = EstimatorConfig::new(1.0, 10.0, 0.05, epa()).unwrap();
        let rec = estimate_at(&s, &[0.8], &cfg).unwrap();
        assert_eq!(rec.g_hat, None);
        assert_eq!(rec.effective_count, 0);
        assert_eq!(rec.failure, Some(EstimateFailure::InsufficientLocalData));
    }

    #[test]
    fn config_validation() {
        assert!(EstimatorConfig::new(0.0, 10.0, 0.1, epa()).is_err());
        assert!(EstimatorConfig::new(1.0, 0.5, 0.1, epa()).is_err());
        assert!(EstimatorConfig::new(1.0, 10.0, 0.0, epa()).is_err());
        assert!(EstimatorConfig::new(1.0, 10.0, 1.0, epa()).is_err());
    }

    #[test]
    fn grid_order_and_duplicates() {
        let s = FrontierModel::canonical().sample(2000, 4).unwrap();
        let cfg = EstimatorConfig::new(1.0, 20.0, 0.1, epa()).unwrap();
        let single = estimate_grid(&s, &[vec![0.3]], &cfg).unwrap();
        assert_eq!(single[0], estimate_at(&s, &[0.3], &cfg).unwrap());
        let pair = estimate_grid(&s, &[vec![0.6], vec![0.6]], &cfg).unwrap();
        assert_eq!(pair[0], pair[1]);
        assert!(estimate_grid(&s, &[], &cfg).is_err());
    }

    #[test]
    fn rate_exponent_examples() {
        let (c1, c2) = rate_exponents(1, 1.0, 1.0).unwrap();
        assert!((c1 - 0.5).abs() < 1e-15 && (c2 - 0.5).abs() < 1e-15);
        let (c1, c2) = rate_exponents(1, 1.0, 2.0).unwrap();
        assert!((c1 - 1.0 / 3.0).abs() < 1e-15 && (c2 - 1.0 / 3.0).abs() < 1e-15);
        let (c1, c2) = rate_exponents(2, 1.0, 1.0).unwrap();
        assert!((c1 - 1.0 / 3.0).abs() < 1e-15 && (c2 - 1.0 / 3.0).abs() < 1e-15);
        assert!(rate_exponents(0, 1.0, 1.0).is_err());
        assert!(rate_exponents(1, 0.0, 1.0).is_err());
        assert!(rate_exponents(1, 1.0, -1.0).is_err());
    }

    #[test]
    fn schedule_examples() {
        let s = RateSchedule { c1: 0.5, c2: 0.5, k1: 0.5, k2: 1.0, d: 1, eta_g: 1.0, alpha_bar: 1.0 };
        let (p, h) = schedule(10_000, &s).unwrap();
        assert!((p - 50.0).abs() < 1e-12 && (h - 0.01).abs() < 1e-15);
        let s3 = RateSchedule { k2: 3.0, ..s };
        let (p, h) = schedule(10_000, &s3).unwrap();
        assert!((p - 50.0).abs() < 1e-12 && (h - 0.03).abs() < 1e-15);

        let bad = RateSchedule { c1: 0.6, ..s };
        let err = schedule(10_000, &bad).unwrap_err();
        assert!(err.to_string().contains("growth condition"));
        assert!(schedule(1, &s).is_err());
    }

    #[test]
    fn schedule_range_product_check() {
        // bias condition satisfied but p h^eta grows: c1 > c2·eta
        let s = RateSchedule { c1: 0.3, c2: 0.2, k1: 2.0, k2: 0.5, d: 1, eta_g: 0.5, alpha_bar: 1.0 };
        assert!(s.check_exponents().is_err());
        let ok = RateSchedule { c1: 0.5, c2: 0.5, k1: 0.5, k2: 1.0, d: 1, eta_g: 1.0, alpha_bar: 1.0 };
        assert_eq!(ok.check_range(&[1000, 4000, 16000]).unwrap().len(), 3);
    }

    #[test]
    fn sup_error_examples() {
        let truth = ScalarField::constant(1.0);
        let rec = |x: f64, g: Option<f64>| EstimateRecord {
            x: vec![x],
            g_hat: g,
            effective_count: 10,
            raw_inverse: g.map(|v| 1.0 / v),
            failure: if g.is_some() { None } else { Some(EstimateFailure::Unstable) },
        };
        let perfect: Vec<_> = (0..5).map(|i| rec(i as f64 * 0.1, Some(1.0))).collect();
        assert_eq!(sup_error(&perfect, &truth).unwrap().sup, 0.0);
        let mut off = perfect.clone();
        off[2].g_hat = Some(1.2);
        let se = sup_error(&off, &truth).unwrap();
        assert!((se.sup - 0.2).abs() < 1e-15 && se.failures == 0);
        let mut some_failed: Vec<_> = (0..50).map(|i| rec(i as f64 * 0.01, Some(1.0))).collect();
        for r in some_failed.iter_mut().take(3) {
            r.g_hat = None;
        }
        assert_eq!(sup_error(&some_failed, &truth).unwrap().failures, 3);
        let all_failed = vec![rec(0.1, None)];
        assert_eq!(sup_error(&all_failed, &truth), Err(Error::AllPointsFailed));
    }

    #[test]
    fn w_rate_examples() {
        let e2 = std::f64::consts::E.powi(2);
        assert!((w_rate(e2, 1.0, 1.0, 2.0, 1) - (e2 / 2.0).sqrt()).abs() < 1e-12);
        assert!((w_rate(e2, 1.0, 1.0, 2.0, 1) - 1.9221).abs() < 1e-4);
        let w = w_rate(10_000.0, 50.0, 0.01, 1.0, 1);
        assert!((w - 23.30).abs() < 5e-3, "{w}");
        // p = 1, ᾱ = 2: independent of p
        assert_eq!(w_rate(500.0, 1.0, 0.2, 2.0, 1), (500.0 * 0.2 / 500f64.ln()).sqrt());
    }
}
