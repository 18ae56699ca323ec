//! Empirical kernel moments `μ̂_p(x) = n⁻¹ Σ Y_i^p K_h(x − X_i)` in scaled form.
//!
//! Raw powers overflow long before the moment orders the estimator needs, so
//! every moment is stored as `mantissa · exp(log_scale)` with
//! `log_scale = p·ln M`, `M` the largest response inside the kernel window.
//! Each summand is then `(Y_i/M)^p K_h(x − X_i)` with `(Y_i/M)^p ∈ [0, 1]`.

use crate::error::{Error, Result};
use crate::kernel::KernelSpec;
use crate::model::Sample;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledMoment {
    pub log_scale: f64,
    pub mantissa: f64,
    /// Points with positive kernel weight.
    pub count: usize,
}

impl ScaledMoment {
    /// `μ̂_p`; may overflow to infinity for large `p`.
    pub fn value(&self) -> f64 {
        self.mantissa * self.log_scale.exp()
    }

    pub fn ln_value(&self) -> f64 {
        self.mantissa.ln() + self.log_scale
    }

    /// `μ̂_p / c^p` for a reference level `c > 0`, computed without forming `μ̂_p`.
    pub fn relative_to(&self, ln_reference: f64, p: f64) -> f64 {
        if self.mantissa == 0.0 {
            return 0.0;
        }
        self.mantissa * (self.log_scale - p * ln_reference).exp()
    }
}

/// Points of a sample inside the kernel window around one query point.
#[derive(Debug, Clone)]
pub struct KernelWindow {
    n_total: usize,
    scale: f64,
    /// `(ln(Y_i/M), K_h(x − X_i))` for every point with positive weight and response.
    entries: Vec<(f64, f64)>,
    count: usize,
}

impl KernelWindow {
    pub fn scan(sample: &Sample, x: &[f64], h: f64, kernel: &KernelSpec) -> Result<Self> {
        if !(h > 0.0) {
            return Err(Error::domain(format!("bandwidth must be positive, got {h}")));
        }
        if x.len() != sample.dimension() || kernel.dimension() != sample.dimension() {
            return Err(Error::domain("query point, kernel and sample dimensions differ"));
        }
        let inv_h = 1.0 / h;
        let inv_hd = inv_h.powi(sample.dimension() as i32);
        let mut raw = Vec::new();
        let mut count = 0;
        let mut scale = 0.0_f64;
        for (xi, yi) in sample.iter() {
            let r2: f64 = x
                .iter()
                .zip(xi)
                .map(|(a, b)| {
                    let u = (a - b) * inv_h;
                    u * u
                })
                .sum();
            let k = kernel.eval_sq_norm(r2);
            if k > 0.0 {
                count += 1;
                if yi > 0.0 {
                    scale = scale.max(yi);
                    raw.push((yi, k * inv_hd));
                }
            }
        }
        let entries = if scale > 0.0 {
            let ln_scale = scale.ln();
            raw.into_iter().map(|(y, w)| (y.ln() - ln_scale, w)).collect()
        } else {
            Vec::new()
        };
        Ok(KernelWindow { n_total: sample.len(), scale, entries, count })
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// `M`, the largest response in the window (0 when empty).
    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn moment(&self, p: f64) -> ScaledMoment {
        if self.entries.is_empty() {
            return ScaledMoment { log_scale: 0.0, mantissa: 0.0, count: self.count };
        }
        let sum: f64 = self.entries.iter().map(|(lr, w)| w * (p * lr).exp()).sum();
        ScaledMoment {
            log_scale: p * self.scale.ln(),
            mantissa: sum / self.n_total as f64,
            count: self.count,
        }
    }

    /// `μ̂_p / μ̂_{p+1}`.
    pub fn ratio(&self, p: f64) -> Result<f64> {
        let (num, den) = self
            .entries
            .iter()
            .fold((0.0, 0.0), |(num, den), (lr, w)| {
                let t = w * (p * lr).exp();
                (num + t, den + t * lr.exp())
            });
        self.finish_ratio(num, den)
    }

    /// `(μ̂_{p1}/μ̂_{p1+1}, μ̂_{p2}/μ̂_{p2+1})` from one pass over the window.
    pub fn ratio_pair(&self, p1: f64, p2: f64) -> Result<(f64, f64)> {
        let mut sums = [0.0; 4];
        for (lr, w) in &self.entries {
            let r = lr.exp();
            let t1 = w * (p1 * lr).exp();
            let t2 = w * (p2 * lr).exp();
            sums[0] += t1;
            sums[1] += t1 * r;
            sums[2] += t2;
            sums[3] += t2 * r;
        }
        Ok((self.finish_ratio(sums[0], sums[1])?, self.finish_ratio(sums[2], sums[3])?))
    }

    fn finish_ratio(&self, num: f64, den: f64) -> Result<f64> {
        if self.entries.is_empty() || !(den > 0.0) || !(num > 0.0) {
            return Err(Error::InsufficientLocalData { count: self.count });
        }
        Ok(num / (self.scale * den))
    }
}

fn check_power(p: f64) -> Result<()> {
    if !(p > 0.0 && p.is_finite()) {
        return Err(Error::domain(format!("moment power must be positive, got {p}")));
    }
    Ok(())
}

pub fn scaled_moment(sample: &Sample, x: &[f64], p: f64, h: f64, kernel: &KernelSpec) -> Result<ScaledMoment> {
    check_power(p)?;
    Ok(KernelWindow::scan(sample, x, h, kernel)?.moment(p))
}

/// `μ̂_p(x) / μ̂_{p+1}(x)` with a shared scale.
pub fn moment_ratio(sample: &Sample, x: &[f64], p: f64, h: f64, kernel: &KernelSpec) -> Result<f64> {
    check_power(p)?;
    KernelWindow::scan(sample, x, h, kernel)?.ratio(p)
}

/// Number of points with `‖x − X_i‖ < h`.
pub fn effective_count(sample: &Sample, x: &[f64], h: f64) -> usize {
    let h2 = h * h;
    sample
        .iter()
        .filter(|(xi, _)| {
            let d2: f64 = x.iter().zip(*xi).map(|(a, b)| (a - b) * (a - b)).sum();
            d2 < h2
        })
        .count()
}
