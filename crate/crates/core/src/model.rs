//! Semiparametric Hall-class frontier model.
//!
//! Given `X = x`, the normalised response `Y / g(x)` has survival function
//!
//! ```text
//! S(y | x) = C(x) (1 − y)^α(x) + D0(x) (1 − y)^(α(x) + β(x)),   y ∈ [0, 1]
//! ```
//!
//! which is the Hall-class form `(1 − y)^α L(x, (1 − y)^−1)` with
//! `L(x, z) = C(x) + D0(x) z^−β(x)`. The second-order coefficient does not
//! depend on `z`, so every conditional moment has a closed form in Beta
//! functions (see [`crate::oracle`]).
//!
//! Covariates live in `E = [0, 1]^d` with a product-form density; the compact
//! evaluation set `Ω` defaults to `[0.1, 0.9]^d`.

use std::f64::consts::PI;
use std::path::Path;

use rand::distr::{Distribution, Open01, StandardUniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const QUANTILE_TOLERANCE: f64 = 1e-12;
pub const QUANTILE_MAX_ITER: usize = 100;
pub const VALIDATION_GRID_PER_AXIS: usize = 256;
pub const VALIDATION_Y_VALUES: usize = 64;
const NORMALISATION_TOLERANCE: f64 = 1e-12;
const MONOTONE_SLACK: f64 = 1e-15;

/// A real-valued field on `[0, 1]^d` drawn from a small serialisable family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ScalarField {
    /// `a`
    Constant { a: f64 },
    /// `a + ⟨b, x⟩`
    Affine { a: f64, b: Vec<f64> },
    /// `a + b·sin(2π⟨c, x⟩)`
    Sinusoid { a: f64, b: f64, c: Vec<f64> },
}

impl ScalarField {
    pub fn constant(a: f64) -> Self {
        ScalarField::Constant { a }
    }

    pub fn affine(a: f64, b: Vec<f64>) -> Self {
        ScalarField::Affine { a, b }
    }

    pub fn sinusoid(a: f64, b: f64, c: Vec<f64>) -> Self {
        ScalarField::Sinusoid { a, b, c }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            ScalarField::Constant { a } => *a,
            ScalarField::Affine { a, b } => a + dot(b, x),
            ScalarField::Sinusoid { a, b, c } => a + b * (2.0 * PI * dot(c, x)).sin(),
        }
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        match self {
            ScalarField::Constant { .. } => vec![0.0; x.len()],
            ScalarField::Affine { b, .. } => b.clone(),
            ScalarField::Sinusoid { b, c, .. } => {
                let scale = b * 2.0 * PI * (2.0 * PI * dot(c, x)).cos();
                c.iter().map(|ci| scale * ci).collect()
            }
        }
    }

    /// Declared Hölder exponent; `None` for constants, where smoothness is moot.
    pub fn holder_exponent(&self) -> Option<f64> {
        if self.is_constant() {
            None
        } else {
            Some(1.0)
        }
    }

    pub fn is_constant(&self) -> bool {
        match self {
            ScalarField::Constant { .. } => true,
            ScalarField::Affine { b, .. } => b.iter().all(|v| *v == 0.0),
            ScalarField::Sinusoid { b, c, .. } => *b == 0.0 || c.iter().all(|v| *v == 0.0),
        }
    }

    fn coefficient_len(&self) -> Option<usize> {
        match self {
            ScalarField::Constant { .. } => None,
            ScalarField::Affine { b, .. } => Some(b.len()),
            ScalarField::Sinusoid { c, .. } => Some(c.len()),
        }
    }

    fn all_finite(&self) -> bool {
        match self {
            ScalarField::Constant { a } => a.is_finite(),
            ScalarField::Affine { a, b } => a.is_finite() && b.iter().all(|v| v.is_finite()),
            ScalarField::Sinusoid { a, b, c } => {
                a.is_finite() && b.is_finite() && c.iter().all(|v| v.is_finite())
            }
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| u * v).sum()
}

/// Marginal density of one covariate coordinate on `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum AxisDensity {
    #[default]
    Uniform,
    /// `1 + slope·(t − ½)`, positive on `[0, 1]` when `|slope| < 2`.
    Linear { slope: f64 },
}

impl AxisDensity {
    pub fn pdf(&self, t: f64) -> f64 {
        if !(0.0..=1.0).contains(&t) {
            return 0.0;
        }
        match self {
            AxisDensity::Uniform => 1.0,
            AxisDensity::Linear { slope } => 1.0 + slope * (t - 0.5),
        }
    }

    pub fn inverse_cdf(&self, u: f64) -> f64 {
        match *self {
            AxisDensity::Uniform => u,
            AxisDensity::Linear { slope } => {
                if slope.abs() < 1e-12 {
                    return u;
                }
                // F(t) = (s/2) t² + (1 − s/2) t; stable root of F(t) = u
                let qa = 0.5 * slope;
                let qb = 1.0 - 0.5 * slope;
                let disc = (qb * qb + 4.0 * qa * u).max(0.0);
                (2.0 * u / (qb + disc.sqrt())).clamp(0.0, 1.0)
            }
        }
    }
}

/// Axis-aligned box in `R^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Omega {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Omega {
    pub fn cube(d: usize, lo: f64, hi: f64) -> Self {
        Omega {
            lower: vec![lo; d],
            upper: vec![hi; d],
        }
    }

    pub fn default_for(d: usize) -> Self {
        Omega::cube(d, 0.1, 0.9)
    }

    pub fn dimension(&self) -> usize {
        self.lower.len()
    }

    pub fn center(&self) -> Vec<f64> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(l, u)| 0.5 * (l + u))
            .collect()
    }

    /// Tensor grid with `per_axis` equispaced points per coordinate, endpoints
    /// included, in row-major order (last coordinate fastest).
    pub fn grid(&self, per_axis: usize) -> Vec<Vec<f64>> {
        let axes: Vec<Vec<f64>> = self
            .lower
            .iter()
            .zip(&self.upper)
            .map(|(&l, &u)| equispaced(l, u, per_axis))
            .collect();
        tensor_grid(&axes)
    }
}

pub(crate) fn equispaced(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![0.5 * (lo + hi)],
        _ => {
            let step = (hi - lo) / (count - 1) as f64;
            (0..count)
                .map(|k| if k == count - 1 { hi } else { lo + step * k as f64 })
                .collect()
        }
    }
}

pub(crate) fn tensor_grid(axes: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut points: Vec<Vec<f64>> = vec![Vec::new()];
    for axis in axes {
        points = points
            .into_iter()
            .flat_map(|prefix| {
                axis.iter().map(move |&v| {
                    let mut p = prefix.clone();
                    p.push(v);
                    p
                })
            })
            .collect();
    }
    points
}

/// On-disk model description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub dimension: usize,
    pub g: ScalarField,
    pub alpha: ScalarField,
    pub beta: ScalarField,
    #[serde(rename = "C")]
    pub c: ScalarField,
    #[serde(rename = "D0")]
    pub d0: ScalarField,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density: Option<Vec<AxisDensity>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<Omega>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta_g: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta_alpha: Option<f64>,
}

/// The conditional law of `Y / g(x)` at a fixed covariate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionalLaw {
    pub alpha: f64,
    pub beta: f64,
    pub c: f64,
    pub d0: f64,
}

impl ConditionalLaw {
    pub fn survival(&self, y: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&y) {
            return Err(Error::domain(format!("survival argument {y} outside [0, 1]")));
        }
        Ok(self.survival_unchecked(y))
    }

    fn survival_unchecked(&self, y: f64) -> f64 {
        let base = 1.0 - y;
        if base <= 0.0 {
            return 0.0;
        }
        let lead = base.powf(self.alpha);
        lead * (self.c + self.d0 * base.powf(self.beta))
    }

    /// Inverts the survival function by bisection on `[0, 1]`.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u <= 1.0) {
            return Err(Error::domain(format!("quantile level {u} outside (0, 1]")));
        }
        if u == 1.0 {
            return Ok(0.0);
        }
        let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
        let (mut s_lo, mut s_hi) = (self.survival_unchecked(lo), self.survival_unchecked(hi));
        let mut mid = 0.5;
        for _ in 0..QUANTILE_MAX_ITER {
            mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let s = self.survival_unchecked(mid);
            if s > s_lo + MONOTONE_SLACK || s < s_hi - MONOTONE_SLACK {
                return Err(Error::Model(format!(
                    "survival is not monotone near y = {mid} (S = {s}, bracket [{s_hi}, {s_lo}])"
                )));
            }
            if (s - u).abs() <= QUANTILE_TOLERANCE {
                break;
            }
            if s > u {
                lo = mid;
                s_lo = s;
            } else {
                hi = mid;
                s_hi = s;
            }
        }
        Ok(mid)
    }
}

/// A validated-structure frontier model; numerical invariants are checked by
/// [`FrontierModel::validate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ModelSpec", into = "ModelSpec")]
pub struct FrontierModel {
    dimension: usize,
    g: ScalarField,
    alpha: ScalarField,
    beta: ScalarField,
    c: ScalarField,
    d0: ScalarField,
    density: Vec<AxisDensity>,
    omega: Omega,
    eta_g: f64,
    eta_alpha: f64,
}

impl TryFrom<ModelSpec> for FrontierModel {
    type Error = Error;

    fn try_from(spec: ModelSpec) -> Result<Self> {
        let d = spec.dimension;
        if d == 0 {
            return Err(Error::Model("dimension must be at least 1".into()));
        }
        for (name, field) in [
            ("g", &spec.g),
            ("alpha", &spec.alpha),
            ("beta", &spec.beta),
            ("C", &spec.c),
            ("D0", &spec.d0),
        ] {
            if let Some(len) = field.coefficient_len() {
                if len != d {
                    return Err(Error::Model(format!(
                        "field {name} has {len} coefficients, dimension is {d}"
                    )));
                }
            }
            if !field.all_finite() {
                return Err(Error::Model(format!("field {name} has non-finite coefficients")));
            }
        }
        let density = spec.density.unwrap_or_else(|| vec![AxisDensity::Uniform; d]);
        if density.len() != d {
            return Err(Error::Model(format!(
                "density has {} axes, dimension is {d}",
                density.len()
            )));
        }
        for axis in &density {
            if let AxisDensity::Linear { slope } = axis {
                if !(slope.abs() < 2.0) {
                    return Err(Error::Model(format!(
                        "linear axis density slope {slope} must satisfy |slope| < 2"
                    )));
                }
            }
        }
        let omega = spec.omega.unwrap_or_else(|| Omega::default_for(d));
        if omega.lower.len() != d || omega.upper.len() != d {
            return Err(Error::Model("omega bounds must match the dimension".into()));
        }
        for (l, u) in omega.lower.iter().zip(&omega.upper) {
            if !(0.0 < *l && l < u && *u < 1.0) {
                return Err(Error::Model(format!(
                    "omega side [{l}, {u}] must be a nonempty interval inside (0, 1)"
                )));
            }
        }
        let eta_g = spec.eta_g.or(spec.g.holder_exponent()).unwrap_or(1.0);
        let eta_alpha = spec.eta_alpha.or(spec.alpha.holder_exponent()).unwrap_or(1.0);
        for (name, eta) in [("eta_g", eta_g), ("eta_alpha", eta_alpha)] {
            if !(eta > 0.0 && eta <= 1.0) {
                return Err(Error::Model(format!("{name} = {eta} must lie in (0, 1]")));
            }
        }
        Ok(FrontierModel {
            dimension: d,
            g: spec.g,
            alpha: spec.alpha,
            beta: spec.beta,
            c: spec.c,
            d0: spec.d0,
            density,
            omega,
            eta_g,
            eta_alpha,
        })
    }
}

impl From<FrontierModel> for ModelSpec {
    fn from(m: FrontierModel) -> Self {
        ModelSpec {
            dimension: m.dimension,
            g: m.g,
            alpha: m.alpha,
            beta: m.beta,
            c: m.c,
            d0: m.d0,
            density: Some(m.density),
            omega: Some(m.omega),
            eta_g: Some(m.eta_g),
            eta_alpha: Some(m.eta_alpha),
        }
    }
}

impl FrontierModel {
    /// Model with uniform covariates and the default `Ω`.
    pub fn new(
        dimension: usize,
        g: ScalarField,
        alpha: ScalarField,
        beta: ScalarField,
        c: ScalarField,
        d0: ScalarField,
    ) -> Result<Self> {
        FrontierModel::try_from(ModelSpec {
            dimension,
            g,
            alpha,
            beta,
            c,
            d0,
            density: None,
            omega: None,
            eta_g: None,
            eta_alpha: None,
        })
    }

    /// Pure power tail `(1 − y)^α` with constant fields.
    pub fn power_law(dimension: usize, g: f64, alpha: f64) -> Result<Self> {
        FrontierModel::new(
            dimension,
            ScalarField::constant(g),
            ScalarField::constant(alpha),
            ScalarField::constant(1.0),
            ScalarField::constant(1.0),
            ScalarField::constant(0.0),
        )
    }

    /// `g(x) = 1 + ½ sin(2πx)`, `α ≡ 1`, `C ≡ 1`, `D0 ≡ 0`, uniform covariate on `[0, 1]`.
    pub fn canonical() -> Self {
        FrontierModel::new(
            1,
            ScalarField::sinusoid(1.0, 0.5, vec![1.0]),
            ScalarField::constant(1.0),
            ScalarField::constant(1.0),
            ScalarField::constant(1.0),
            ScalarField::constant(0.0),
        )
        .expect("canonical model is well formed")
    }

    pub fn with_density(self, density: Vec<AxisDensity>) -> Result<Self> {
        let mut spec = ModelSpec::from(self);
        spec.density = Some(density);
        FrontierModel::try_from(spec)
    }

    pub fn with_omega(self, omega: Omega) -> Result<Self> {
        let mut spec = ModelSpec::from(self);
        spec.omega = Some(omega);
        FrontierModel::try_from(spec)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let spec: ModelSpec =
            serde_json::from_str(text).map_err(|e| Error::Model(format!("invalid model JSON: {e}")))?;
        FrontierModel::try_from(spec)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref()).map_err(|e| {
            Error::Io(format!("cannot read model file {}: {e}", path.as_ref().display()))
        })?;
        FrontierModel::from_json_str(&text)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&ModelSpec::from(self.clone()))
            .expect("model spec serialises")
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn g(&self) -> &ScalarField {
        &self.g
    }

    pub fn alpha(&self) -> &ScalarField {
        &self.alpha
    }

    pub fn beta(&self) -> &ScalarField {
        &self.beta
    }

    pub fn c(&self) -> &ScalarField {
        &self.c
    }

    pub fn d0(&self) -> &ScalarField {
        &self.d0
    }

    pub fn omega(&self) -> &Omega {
        &self.omega
    }

    pub fn eta_g(&self) -> f64 {
        self.eta_g
    }

    pub fn eta_alpha(&self) -> f64 {
        self.eta_alpha
    }

    pub fn density(&self, x: &[f64]) -> f64 {
        self.density.iter().zip(x).map(|(axis, &t)| axis.pdf(t)).product()
    }

    pub fn conditional(&self, x: &[f64]) -> ConditionalLaw {
        ConditionalLaw {
            alpha: self.alpha.eval(x),
            beta: self.beta.eval(x),
            c: self.c.eval(x),
            d0: self.d0.eval(x),
        }
    }

    /// `P(Y / g(x) > y | X = x)`.
    pub fn survival(&self, x: &[f64], y: f64) -> Result<f64> {
        self.check_point(x)?;
        self.conditional(x).survival(y)
    }

    /// Normalised quantile: `y` with `survival(x, y) = u`. The response value is `g(x)·y`.
    pub fn quantile(&self, x: &[f64], u: f64) -> Result<f64> {
        self.check_point(x)?;
        self.conditional(x).quantile(u)
    }

    /// `max_Ω α`, evaluated on the grid used for sup-norm studies.
    pub fn alpha_bar(&self) -> f64 {
        self.extremum_on_omega(&self.alpha, f64::max, f64::NEG_INFINITY)
    }

    /// `min_Ω β`.
    pub fn beta_min(&self) -> f64 {
        self.extremum_on_omega(&self.beta, f64::min, f64::INFINITY)
    }

    fn extremum_on_omega(&self, field: &ScalarField, pick: fn(f64, f64) -> f64, init: f64) -> f64 {
        if let ScalarField::Constant { a } = field {
            return *a;
        }
        let per_axis = if self.dimension <= 2 { 101 } else { 11 };
        self.omega
            .grid(per_axis)
            .iter()
            .map(|x| field.eval(x))
            .fold(init, pick)
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dimension {
            return Err(Error::domain(format!(
                "point has {} coordinates, model dimension is {}",
                x.len(),
                self.dimension
            )));
        }
        Ok(())
    }

    /// Draws `n` pairs: covariates by per-coordinate inverse CDF, then
    /// `Y = g(X)·quantile(X, U)` with `U` uniform on `(0, 1)`.
    ///
    /// The generator is ChaCha8 seeded from `seed`; for each pair the `d`
    /// covariate uniforms are drawn before the response uniform.
    pub fn sample(&self, n: usize, seed: u64) -> Result<Sample> {
        if n == 0 {
            return Err(Error::domain("sample size must be at least 1"));
        }
        let d = self.dimension;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut xs = Vec::with_capacity(n * d);
        let mut ys = Vec::with_capacity(n);
        let mut point = vec![0.0; d];
        for _ in 0..n {
            for (coord, axis) in point.iter_mut().zip(&self.density) {
                let u: f64 = StandardUniform.sample(&mut rng);
                *coord = axis.inverse_cdf(u);
            }
            let u: f64 = Open01.sample(&mut rng);
            let y = self.conditional(&point).quantile(u)?;
            xs.extend_from_slice(&point);
            ys.push(self.g.eval(&point) * y);
        }
        Sample::new(d, xs, ys)
    }

    /// Draws `n` responses `Y = g(x)·quantile(x, U)` at a fixed covariate.
    pub fn sample_at(&self, x: &[f64], n: usize, seed: u64) -> Result<Vec<f64>> {
        if x.len() != self.dimension {
            return Err(Error::domain("point dimension does not match the model"));
        }
        let law = self.conditional(x);
        let g = self.g.eval(x);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                let u: f64 = Open01.sample(&mut rng);
                Ok(g * law.quantile(u)?)
            })
            .collect()
    }

    /// Checks the model invariants on a grid over `E = [0, 1]^d`.
    pub fn validate(&self) -> ValidationReport {
        let d = self.dimension;
        let per_axis = validation_resolution(d);
        let axes = vec![equispaced(0.0, 1.0, per_axis); d];
        let grid = tensor_grid(&axes);
        let ys = equispaced(0.0, 1.0, VALIDATION_Y_VALUES);

        let mut checks = Vec::new();

        let mut worst = Worst::new();
        for x in &grid {
            let gap = (self.c.eval(x) + self.d0.eval(x) - 1.0).abs();
            worst.observe_max(gap, x);
        }
        checks.push(worst.into_check("normalisation", |v| v <= NORMALISATION_TOLERANCE));

        let mut worst = Worst::new();
        for x in &grid {
            let law = self.conditional(x);
            let mut prev = law.survival_unchecked(ys[0]);
            let mut increase = f64::NEG_INFINITY;
            for &y in &ys[1..] {
                let s = law.survival_unchecked(y);
                increase = increase.max(s - prev);
                prev = s;
            }
            worst.observe_max(increase, x);
        }
        checks.push(worst.into_check("monotone_survival", |v| v <= MONOTONE_SLACK));

        let positive: [(&str, FieldEval<'_>); 5] = [
            ("g_positive", Box::new(|x| self.g.eval(x))),
            ("density_positive", Box::new(|x| self.density(x))),
            ("C_positive", Box::new(|x| self.c.eval(x))),
            ("alpha_positive", Box::new(|x| self.alpha.eval(x))),
            ("beta_positive", Box::new(|x| self.beta.eval(x))),
        ];
        for (name, f) in positive {
            let mut worst = Worst::new_min();
            for x in &grid {
                worst.observe_min(f(x), x);
            }
            checks.push(worst.into_check(name, |v| v > 0.0));
        }

        ValidationReport { checks }
    }

    /// Returns `self` when every invariant holds, otherwise a model error naming the failures.
    pub fn validated(self) -> Result<Self> {
        let report = self.validate();
        if report.passed() {
            Ok(self)
        } else {
            Err(Error::Model(report.failure_summary()))
        }
    }
}

type FieldEval<'a> = Box<dyn Fn(&[f64]) -> f64 + 'a>;

fn validation_resolution(d: usize) -> usize {
    if d <= 2 {
        VALIDATION_GRID_PER_AXIS
    } else {
        // keep the tensor grid at roughly 2^16 points
        ((65536.0f64).powf(1.0 / d as f64).floor() as usize).max(2)
    }
}

struct Worst {
    value: f64,
    point: Option<Vec<f64>>,
}

impl Worst {
    fn new() -> Self {
        Worst { value: f64::NEG_INFINITY, point: None }
    }

    fn new_min() -> Self {
        Worst { value: f64::INFINITY, point: None }
    }

    fn observe_max(&mut self, v: f64, x: &[f64]) {
        if v > self.value || v.is_nan() {
            self.value = v;
            self.point = Some(x.to_vec());
        }
    }

    fn observe_min(&mut self, v: f64, x: &[f64]) {
        if v < self.value || v.is_nan() {
            self.value = v;
            self.point = Some(x.to_vec());
        }
    }

    fn into_check(self, name: &str, ok: impl Fn(f64) -> bool) -> ValidationCheck {
        ValidationCheck {
            name: name.to_string(),
            passed: ok(self.value),
            worst_value: self.value,
            worst_point: self.point,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationCheck {
    pub name: String,
    pub passed: bool,
    /// Largest violation measure (or smallest value, for positivity checks).
    pub worst_value: f64,
    pub worst_point: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<ValidationCheck>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&ValidationCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failure_summary(&self) -> String {
        self.checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| match &c.worst_point {
                Some(p) => format!("{} failed (worst value {} at {:?})", c.name, c.worst_value, p),
                None => format!("{} failed", c.name),
            })
            .collect::<Vec<_>>()
            .join("; ")
    }
}

/// `n` observations `(X_i, Y_i)` with `X_i ∈ R^d`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    d: usize,
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl Sample {
    pub fn new(d: usize, xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if d == 0 {
            return Err(Error::domain("sample dimension must be at least 1"));
        }
        if ys.is_empty() {
            return Err(Error::domain("sample must hold at least one observation"));
        }
        if xs.len() != ys.len() * d {
            return Err(Error::domain(format!(
                "{} covariate values for {} responses in dimension {d}",
                xs.len(),
                ys.len()
            )));
        }
        if let Some(i) = ys.iter().position(|y| !(*y > 0.0 && y.is_finite())) {
            return Err(Error::domain(format!("response {i} = {} is not strictly positive", ys[i])));
        }
        if xs.iter().any(|x| !x.is_finite()) {
            return Err(Error::domain("covariates must be finite"));
        }
        Ok(Sample { d, xs, ys })
    }

    pub fn dimension(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.ys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ys.is_empty()
    }

    pub fn x(&self, i: usize) -> &[f64] {
        &self.xs[i * self.d..(i + 1) * self.d]
    }

    pub fn y(&self, i: usize) -> f64 {
        self.ys[i]
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64], f64)> + '_ {
        self.xs.chunks_exact(self.d).zip(self.ys.iter().copied())
    }

    /// First `n` observations.
    pub fn prefix(&self, n: usize) -> Result<Sample> {
        let n = n.min(self.len());
        Sample::new(self.d, self.xs[..n * self.d].to_vec(), self.ys[..n].to_vec())
    }
}
