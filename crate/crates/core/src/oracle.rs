//! Ground-truth moment computations for the Hall-class model.
//!
//! All moments are reported relative to `g^p(x)`: the absolute values overflow
//! for large `p` whenever `g > 1`, and every asymptotic statement about the
//! estimator is made in this normalised form anyway.
//!
//! For the model `S(y|x) = C(1 − y)^α + D0(1 − y)^{α+β}`,
//!
//! ```text
//! m_p(x)/g^p(x) = p ∫₀¹ y^{p−1} S(y|x) dy = C·p·B(p, α+1) + D0·p·B(p, α+β+1).
//! ```

use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::KernelSpec;
use crate::model::FrontierModel;
use crate::quadrature::GaussLegendre;
use crate::special::{gamma, scaled_beta};

/// Nodes per axis for the smoothed-moment quadrature.
pub const SMOOTHING_NODES: usize = 64;

/// `2 ∫₀^∞ t/(e^{2πt} − 1) dt = 1/12`: bound on the remainder of the
/// Stirling-type log-Gamma ratio expansion per unit of `|1/z − 1/z'|`.
pub const STIRLING_REMAINDER_BOUND: f64 = 1.0 / 12.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentDecomposition {
    /// `C(x)·p·B(p, α(x)+1)`
    pub main: f64,
    /// `D0(x)·p·B(p, α(x)+β(x)+1)`
    pub error: f64,
    /// `m_p(x)/g^p(x)`
    pub total: f64,
}

fn check_power(p: f64) -> Result<()> {
    if !(p > 0.0 && p.is_finite()) {
        return Err(Error::domain(format!("moment power must be positive, got {p}")));
    }
    Ok(())
}

fn check_point(model: &FrontierModel, x: &[f64]) -> Result<()> {
    if x.len() != model.dimension() {
        return Err(Error::domain(format!(
            "point has {} coordinates, model dimension is {}",
            x.len(),
            model.dimension()
        )));
    }
    Ok(())
}

pub fn m_p_closed(model: &FrontierModel, x: &[f64], p: f64) -> Result<MomentDecomposition> {
    check_power(p)?;
    check_point(model, x)?;
    let law = model.conditional(x);
    let main = law.c * scaled_beta(p, law.alpha + 1.0);
    let error = if law.d0 == 0.0 {
        0.0
    } else {
        law.d0 * scaled_beta(p, law.alpha + law.beta + 1.0)
    };
    Ok(MomentDecomposition { main, error, total: main + error })
}

/// `m_p(x)/g^p(x)` by direct quadrature of `p ∫₀¹ y^{p−1} S(y|x) dy`.
///
/// Substitutes `y = 1 − s/p` so the mass near the endpoint sits in `s = O(1)`,
/// then integrates over geometric panels `[2^{k−1}, 2^k]` in `s`, which also
/// resolves the `s^α` behaviour at the origin for non-integer `α`.
pub fn m_p_quadrature_1d(model: &FrontierModel, x: &[f64], p: f64) -> Result<f64> {
    check_power(p)?;
    check_point(model, x)?;
    let law = model.conditional(x);
    let rule = GaussLegendre::new(32);
    let integrand = |s: f64| -> f64 {
        let y = 1.0 - s / p;
        if y <= 0.0 {
            return 0.0;
        }
        // p y^{p−1} S(y) dy with dy = ds/p
        ((p - 1.0) * y.ln()).exp() * law.survival(y).unwrap_or(0.0)
    };
    let mut total = rule.integrate(0.0, 2f64.powi(-40), integrand);
    let mut lo = 2f64.powi(-40);
    while lo < p {
        let hi = (2.0 * lo).min(p);
        total += rule.integrate(lo, hi, integrand);
        lo = hi;
    }
    Ok(total)
}

/// `m_{p+1}(x)/m_p(x)`, which tends to `g(x)`.
pub fn m_ratio_closed(model: &FrontierModel, x: &[f64], p: f64) -> Result<f64> {
    let lower = m_p_closed(model, x, p)?.total;
    let upper = m_p_closed(model, x, p + 1.0)?.total;
    Ok(model.g().eval(x) * upper / lower)
}

/// `μ_p(x)/g^p(x) = g(x)^{−p} ∫ K_h(x − t) m_p(t) f(t) dt`.
///
/// Gauss–Legendre with [`SMOOTHING_NODES`] nodes per axis: on `[−1, 1]` for
/// `d = 1` and in polar coordinates over the unit disc for `d = 2`.
pub fn mu_p_quadrature(model: &FrontierModel, x: &[f64], p: f64, h: f64, kernel: &KernelSpec) -> Result<f64> {
    SmoothedMoments::new(model, kernel)?.relative_moment(x, p, h)
}

/// Reusable quadrature state for `μ_p`.
#[derive(Debug, Clone)]
pub struct SmoothedMoments<'a> {
    model: &'a FrontierModel,
    kernel: KernelSpec,
    /// Offsets `u` in the unit ball with weights `K(u)·du`.
    nodes: Vec<(Vec<f64>, f64)>,
}

impl<'a> SmoothedMoments<'a> {
    pub fn new(model: &'a FrontierModel, kernel: &KernelSpec) -> Result<Self> {
        let d = model.dimension();
        if kernel.dimension() != d {
            return Err(Error::domain("kernel and model dimensions differ"));
        }
        let rule = GaussLegendre::new(SMOOTHING_NODES);
        let nodes = match d {
            1 => rule.pairs().map(|(u, w)| (vec![u], w * kernel.eval(&[u]))).collect(),
            2 => {
                let mut nodes = Vec::with_capacity(SMOOTHING_NODES * SMOOTHING_NODES);
                for (r, wr) in rule.pairs() {
                    let r = 0.5 * (r + 1.0);
                    let wr = 0.5 * wr;
                    for (t, wt) in rule.pairs() {
                        let theta = std::f64::consts::PI * (t + 1.0);
                        let wt = std::f64::consts::PI * wt;
                        let u = vec![r * theta.cos(), r * theta.sin()];
                        let k = kernel.eval_sq_norm(r * r);
                        nodes.push((u, wr * wt * r * k));
                    }
                }
                nodes
            }
            _ => {
                return Err(Error::Unsupported(format!(
                    "smoothed moment quadrature supports d <= 2, got d = {d}"
                )))
            }
        };
        Ok(SmoothedMoments { model, kernel: *kernel, nodes })
    }

    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    pub fn relative_moment(&self, x: &[f64], p: f64, h: f64) -> Result<f64> {
        check_power(p)?;
        check_point(self.model, x)?;
        if !(h > 0.0) {
            return Err(Error::domain(format!("bandwidth must be positive, got {h}")));
        }
        if x.iter().any(|&xi| xi - h < 0.0 || xi + h > 1.0) {
            return Err(Error::domain(format!(
                "ball of radius {h} around {x:?} leaves the support [0, 1]^d"
            )));
        }
        let g = self.model.g();
        let ln_gx = g.eval(x).ln();
        let mut t = vec![0.0; x.len()];
        let mut total = 0.0;
        for (u, w) in &self.nodes {
            if *w == 0.0 {
                continue;
            }
            for ((ti, xi), ui) in t.iter_mut().zip(x).zip(u) {
                *ti = xi - h * ui;
            }
            let m = m_p_closed(self.model, &t, p)?.total;
            let lift = (p * (g.eval(&t).ln() - ln_gx)).exp();
            total += w * self.model.density(&t) * m * lift;
        }
        Ok(total)
    }

    /// `μ_p(x)/μ_{p+1}(x)` in absolute units.
    pub fn moment_ratio(&self, x: &[f64], p: f64, h: f64) -> Result<f64> {
        let lower = self.relative_moment(x, p, h)?;
        let upper = self.relative_moment(x, p + 1.0, h)?;
        Ok(lower / (upper * self.model.g().eval(x)))
    }
}

/// `f(x)·C(x)·Γ(α(x)+1)·p^{−α(x)}`, the leading-order `μ_p(x)/g^p(x)`.
pub fn equiv_approx(model: &FrontierModel, x: &[f64], p: f64) -> Result<f64> {
    check_power(p)?;
    check_point(model, x)?;
    let law = model.conditional(x);
    Ok(model.density(x) * law.c * gamma(law.alpha + 1.0) * p.powf(-law.alpha))
}

/// `(1/g(x))·(1 + α(x)/(p+1))`, the expansion of `μ_p/μ_{p+1}`.
pub fn bias_ratio_approx(model: &FrontierModel, x: &[f64], p: f64) -> Result<f64> {
    check_power(p)?;
    check_point(model, x)?;
    Ok((1.0 + model.alpha().eval(x) / (p + 1.0)) / model.g().eval(x))
}

/// `(z − ½)ln z − (z' − ½)ln z' − (z − z')`, approximating `ln(Γ(z)/Γ(z'))`
/// with error at most [`STIRLING_REMAINDER_BOUND`]`·|1/z − 1/z'|`.
pub fn log_gamma_ratio_expansion(z: f64, z_prime: f64) -> Result<f64> {
    if !(z > 0.0 && z_prime > 0.0) {
        return Err(Error::domain(format!(
            "gamma ratio expansion needs positive arguments, got ({z}, {z_prime})"
        )));
    }
    Ok((z - 0.5) * z.ln() - (z_prime - 0.5) * z_prime.ln() - (z - z_prime))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ScalarField;
    use crate::special::ln_gamma_diff;

    fn power(g: f64, alpha: f64) -> FrontierModel {
        FrontierModel::power_law(1, g, alpha).unwrap()
    }

    #[test]
    fn closed_moment_examples() {
        for &p in &[1.0, 9.0, 123.0] {
            let m = m_p_closed(&power(1.0, 1.0), &[0.4], p).unwrap();
            assert!((m.total - 1.0 / (p + 1.0)).abs() < 1e-15);
            assert_eq!(m.error, 0.0);
            let m2 = m_p_closed(&power(1.0, 2.0), &[0.4], p).unwrap();
            let expected = 2.0 / ((p + 1.0) * (p + 2.0));
            assert!((m2.total - expected).abs() < 1e-14 * expected);
        }
        assert!((m_p_closed(&power(1.0, 1.0), &[0.4], 9.0).unwrap().total - 0.1).abs() < 1e-15);
    }

    #[test]
    fn decomposition_is_additive() {
        let m = FrontierModel::new(
            1,
            ScalarField::constant(1.0),
            ScalarField::constant(2.0),
            ScalarField::constant(1.0),
            ScalarField::constant(0.75),
            ScalarField::constant(0.25),
        )
        .unwrap();
        let dec = m_p_closed(&m, &[0.5], 40.0).unwrap();
        assert_eq!(dec.total, dec.main + dec.error);
        assert!(dec.main > 0.0 && dec.error > 0.0);
        let brute = m_p_quadrature_1d(&m, &[0.5], 40.0).unwrap();
        assert!((brute - dec.total).abs() < 1e-12 * dec.total);
    }

    #[test]
    fn brute_quadrature_handles_fractional_alpha() {
        let m = power(1.0, 0.37);
        for &p in &[2.0, 50.0, 500.0] {
            let exact = m_p_closed(&m, &[0.5], p).unwrap().total;
            let brute = m_p_quadrature_1d(&m, &[0.5], p).unwrap();
            assert!((brute - exact).abs() < 1e-10 * exact, "p={p} {brute} {exact}");
        }
    }

    #[test]
    fn ratio_examples() {
        let m = power(2.0, 1.0);
        assert!((m_ratio_closed(&m, &[0.5], 8.0).unwrap() - 1.8).abs() < 1e-14);
        let far = m_ratio_closed(&m, &[0.5], 1e6).unwrap();
        assert!((far - 2.0).abs() <= 2.0 * 2e-6);
        let m2 = power(1.0, 2.0);
        assert!((m_ratio_closed(&m2, &[0.5], 98.0).unwrap() - 99.0 / 101.0).abs() < 1e-13);
    }

    #[test]
    fn smoothed_moment_constant_integrand() {
        let m = power(1.0, 1.0);
        let k = KernelSpec::epanechnikov(1);
        let v = mu_p_quadrature(&m, &[0.5], 9.0, 0.05, &k).unwrap();
        assert!((v - 0.1).abs() < 1e-13);
        let m2 = FrontierModel::power_law(2, 1.3, 1.5).unwrap();
        let k2 = KernelSpec::epanechnikov(2);
        let v = mu_p_quadrature(&m2, &[0.4, 0.6], 20.0, 0.1, &k2).unwrap();
        let expected = m_p_closed(&m2, &[0.4, 0.6], 20.0).unwrap().total;
        assert!((v - expected).abs() < 1e-12 * expected);
    }

    #[test]
    fn smoothed_moment_small_bandwidth_limit() {
        let m = FrontierModel::new(
            1,
            ScalarField::sinusoid(1.0, 0.5, vec![1.0]),
            ScalarField::affine(1.0, vec![0.5]),
            ScalarField::constant(1.0),
            ScalarField::constant(1.0),
            ScalarField::constant(0.0),
        )
        .unwrap();
        let k = KernelSpec::epanechnikov(1);
        for &x in &[0.2, 0.5, 0.63] {
            let v = mu_p_quadrature(&m, &[x], 25.0, 1e-4, &k).unwrap();
            let limit = m.density(&[x]) * m_p_closed(&m, &[x], 25.0).unwrap().total;
            assert!((v / limit - 1.0).abs() < 1e-3, "x={x}");
        }
    }

    #[test]
    fn smoothed_moment_domain_errors() {
        let m = power(1.0, 1.0);
        let k = KernelSpec::epanechnikov(1);
        assert!(matches!(mu_p_quadrature(&m, &[0.05], 5.0, 0.1, &k), Err(Error::Domain(_))));
        let m3 = FrontierModel::power_law(3, 1.0, 1.0).unwrap();
        let k3 = KernelSpec::epanechnikov(3);
        assert!(matches!(
            mu_p_quadrature(&m3, &[0.5; 3], 5.0, 0.1, &k3),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn equivalent_examples() {
        assert!((equiv_approx(&power(1.0, 1.0), &[0.5], 100.0).unwrap() - 0.01).abs() < 1e-15);
        assert!((equiv_approx(&power(1.0, 2.0), &[0.5], 10.0).unwrap() - 0.02).abs() < 1e-15);
    }

    #[test]
    fn bias_ratio_examples() {
        assert!((bias_ratio_approx(&power(1.0, 1.0), &[0.5], 9.0).unwrap() - 1.1).abs() < 1e-15);
        assert!((bias_ratio_approx(&power(2.0, 0.5), &[0.5], 99.0).unwrap() - 0.5025).abs() < 1e-15);
        let m = power(1.0, 1.0);
        let k = KernelSpec::epanechnikov(1);
        let sm = SmoothedMoments::new(&m, &k).unwrap();
        for &p in &[3.0, 30.0, 300.0] {
            let exact = sm.moment_ratio(&[0.5], p, 0.05).unwrap();
            assert!((exact - (p + 2.0) / (p + 1.0)).abs() < 1e-12);
            assert!((exact - bias_ratio_approx(&m, &[0.5], p).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn gamma_ratio_expansion_examples() {
        assert_eq!(log_gamma_ratio_expansion(7.0, 7.0).unwrap(), 0.0);
        let e = log_gamma_ratio_expansion(10.0, 11.0).unwrap();
        assert!((e - (-2.3033)).abs() < 5e-4, "{e}");
        let truth = -(10f64).ln();
        let gap = (e - truth).abs();
        assert!(gap <= STIRLING_REMAINDER_BOUND * (0.1 - 1.0 / 11.0));
        let e = log_gamma_ratio_expansion(100.0, 101.0).unwrap();
        assert!((e - ln_gamma_diff(100.0, 101.0)).abs() <= 1e-4);
        assert!(log_gamma_ratio_expansion(0.0, 1.0).is_err());
    }
}
