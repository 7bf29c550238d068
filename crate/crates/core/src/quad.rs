//! One-dimensional quadrature over the real line and a cumulative
//! evaluator for inner integrals `I(x) = ∫₀^x g(y) dy`.
//!
//! The line integrator truncates the domain using a caller-supplied decay
//! envelope, then runs the trapezoidal rule with repeated interval halving.
//! For the smooth, rapidly decaying integrands used in this crate the
//! trapezoidal rule converges geometrically, so the difference between two
//! successive levels bounds the error of the finer level with a wide margin.
//! For integrands with kinks the rule is second order and the same
//! difference is still about three times the error of the finer level.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalMethod {
    Quadrature,
    ClosedForm,
    Asymptotic,
}

impl EvalMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Quadrature => "quadrature",
            Self::ClosedForm => "closed_form",
            Self::Asymptotic => "asymptotic",
        }
    }
}

impl fmt::Display for EvalMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A computed value together with an absolute error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    pub value: f64,
    pub abs_error_estimate: f64,
    pub method: EvalMethod,
    pub nodes_used: usize,
}

impl EvalResult {
    pub fn exact(value: f64, method: EvalMethod) -> Self {
        Self {
            value,
            abs_error_estimate: 0.0,
            method,
            nodes_used: 0,
        }
    }

    /// Multiplies the value and its error estimate by `factor`.
    pub fn scaled(self, factor: f64) -> Self {
        Self {
            value: self.value * factor,
            abs_error_estimate: self.abs_error_estimate * factor.abs(),
            ..self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Number of interval halvings allowed after the initial grid.
    pub max_refinements: u32,
    /// Truncation error is kept below `abs_tol / truncation_margin`.
    pub truncation_margin: f64,
    /// Inner-integral panels per outer node spacing.
    pub inner_grid_factor: u32,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_refinements: 20,
            truncation_margin: 10.0,
            inner_grid_factor: 4,
        }
    }
}

impl QuadratureConfig {
    pub fn with_tolerances(rel_tol: f64, abs_tol: f64) -> Self {
        Self {
            rel_tol,
            abs_tol,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), QuadError> {
        let bad = |what: &'static str| Err(QuadError::InvalidConfig(what));
        if !(self.rel_tol > 0.0) {
            return bad("rel_tol must be positive");
        }
        if !(self.abs_tol > 0.0) {
            return bad("abs_tol must be positive");
        }
        if self.max_refinements < 1 {
            return bad("max_refinements must be at least 1");
        }
        if !(self.truncation_margin >= 1.0) {
            return bad("truncation_margin must be at least 1");
        }
        if self.inner_grid_factor < 1 {
            return bad("inner_grid_factor must be at least 1");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadError {
    #[error("quadrature did not reach tolerance: best value {} ± {}", best.value, best.abs_error_estimate)]
    NonConvergence { best: EvalResult },
    #[error("integrand returned a non-finite value at x = {x}")]
    NonFinite { x: f64 },
    #[error("invalid quadrature configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("invalid envelope: {0}")]
    InvalidEnvelope(&'static str),
    #[error("invalid grid: {0}")]
    Grid(&'static str),
}

/// Tail behaviour of an envelope.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Decay {
    /// `exp(-x² / (2σ²))`
    Gaussian { sigma: f64 },
    /// `exp(-rate·|x|)`
    Exponential { rate: f64 },
}

/// Upper bound `|f(x)| <= C (1 + |x|)^p decay(x)` supplied by the caller.
///
/// The envelope controls where the infinite domain is cut and how fine the
/// initial grid is. It is never inferred from samples of `f`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Envelope {
    pub ln_constant: f64,
    pub degree: f64,
    pub decay: Decay,
    /// Length scale of the integrand's features; the initial step is half of it.
    pub resolution: f64,
}

impl Envelope {
    pub fn gaussian(sigma: f64) -> Self {
        Self {
            ln_constant: 0.0,
            degree: 0.0,
            decay: Decay::Gaussian { sigma },
            resolution: sigma.min(1.0),
        }
    }

    pub fn exponential(rate: f64) -> Self {
        Self {
            ln_constant: 0.0,
            degree: 0.0,
            decay: Decay::Exponential { rate },
            resolution: (1.0 / rate).min(1.0),
        }
    }

    pub fn with_constant(mut self, constant: f64) -> Self {
        self.ln_constant = constant.ln();
        self
    }

    pub fn with_ln_constant(mut self, ln_constant: f64) -> Self {
        self.ln_constant = ln_constant;
        self
    }

    pub fn with_degree(mut self, degree: f64) -> Self {
        self.degree = degree;
        self
    }

    pub fn with_resolution(mut self, resolution: f64) -> Self {
        self.resolution = resolution;
        self
    }

    fn validate(&self) -> Result<(), QuadError> {
        let positive = match self.decay {
            Decay::Gaussian { sigma } => sigma > 0.0 && sigma.is_finite(),
            Decay::Exponential { rate } => rate > 0.0 && rate.is_finite(),
        };
        if !positive {
            return Err(QuadError::InvalidEnvelope(
                "decay parameter must be positive",
            ));
        }
        if !(self.degree >= 0.0) || !self.ln_constant.is_finite() {
            return Err(QuadError::InvalidEnvelope(
                "degree and constant must be finite",
            ));
        }
        if !(self.resolution > 0.0) || !self.resolution.is_finite() {
            return Err(QuadError::InvalidEnvelope("resolution must be positive"));
        }
        Ok(())
    }

    fn ln_bound(&self, x: f64) -> f64 {
        let x = x.abs();
        let decay = match self.decay {
            Decay::Gaussian { sigma } => -0.5 * (x / sigma).powi(2),
            Decay::Exponential { rate } => -rate * x,
        };
        self.ln_constant + self.degree * x.ln_1p() + decay
    }

    // Rate at which the log of the bound decreases for arguments >= x.
    fn log_slope(&self, x: f64) -> f64 {
        let decay = match self.decay {
            Decay::Gaussian { sigma } => x / (sigma * sigma),
            Decay::Exponential { rate } => rate,
        };
        decay - self.degree / (1.0 + x)
    }

    /// Upper bound on `∫_x^∞` of the envelope; infinite while the envelope
    /// is still increasing at `x`.
    pub fn tail_bound(&self, x: f64) -> f64 {
        let slope = self.log_slope(x);
        if slope <= 0.0 {
            return f64::INFINITY;
        }
        (self.ln_bound(x) - slope.ln()).exp()
    }

    /// Smallest cut-off (to within bisection accuracy) whose one-sided tail
    /// bound is below `target`.
    pub fn truncation_point(&self, target: f64) -> Result<f64, QuadError> {
        self.validate()?;
        let mut hi = self.resolution;
        let mut doublings = 0;
        while self.tail_bound(hi) > target {
            hi *= 2.0;
            doublings += 1;
            if doublings > 80 {
                return Err(QuadError::InvalidEnvelope("envelope does not decay"));
            }
        }
        let mut lo = 0.0;
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if self.tail_bound(mid) > target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(hi)
    }
}

/// Integrates `f` over the whole real line.
pub fn integrate_line<F>(
    f: F,
    envelope: &Envelope,
    cfg: &QuadratureConfig,
) -> Result<EvalResult, QuadError>
where
    F: Fn(f64) -> f64,
{
    integrate_line_with_l1(f, envelope, cfg).map(|(r, _)| r)
}

/// [`integrate_line`], also returning the same rule applied to `|f|`.
/// The ratio of the two measures how much cancellation the integral hides.
pub fn integrate_line_with_l1<F>(
    f: F,
    envelope: &Envelope,
    cfg: &QuadratureConfig,
) -> Result<(EvalResult, f64), QuadError>
where
    F: Fn(f64) -> f64,
{
    cfg.validate()?;
    let cut = half_width(envelope, cfg)?;
    let truncation = 2.0 * envelope.tail_bound(cut);
    trapezoid(&f, -cut, cut, envelope.resolution, truncation, cfg)
}

/// Half-width of the truncated domain for this envelope and configuration.
pub fn half_width(envelope: &Envelope, cfg: &QuadratureConfig) -> Result<f64, QuadError> {
    envelope.truncation_point(cfg.abs_tol / cfg.truncation_margin / 2.0)
}

/// Integrates `f` over `[0, ∞)`. For even `f`, twice this equals
/// [`integrate_line`] up to rounding: both visit the same nodes.
pub fn integrate_half_line<F>(
    f: F,
    envelope: &Envelope,
    cfg: &QuadratureConfig,
) -> Result<EvalResult, QuadError>
where
    F: Fn(f64) -> f64,
{
    integrate_half_line_with_l1(f, envelope, cfg).map(|(r, _)| r)
}

pub fn integrate_half_line_with_l1<F>(
    f: F,
    envelope: &Envelope,
    cfg: &QuadratureConfig,
) -> Result<(EvalResult, f64), QuadError>
where
    F: Fn(f64) -> f64,
{
    cfg.validate()?;
    let cut = half_width(envelope, cfg)?;
    let truncation = envelope.tail_bound(cut);
    trapezoid(&f, 0.0, cut, envelope.resolution, truncation, cfg)
}

/// Initial step used for a domain half-width `cut` and feature scale
/// `resolution`: the largest `cut / m` (m a power of two, m >= 4) not
/// exceeding `resolution / 2`.
pub fn initial_step(cut: f64, resolution: f64) -> f64 {
    let mut intervals = 4usize;
    while cut / intervals as f64 > 0.5 * resolution {
        intervals *= 2;
    }
    cut / intervals as f64
}

fn trapezoid<F>(
    f: &F,
    a: f64,
    b: f64,
    resolution: f64,
    truncation: f64,
    cfg: &QuadratureConfig,
) -> Result<(EvalResult, f64), QuadError>
where
    F: Fn(f64) -> f64,
{
    let eval = |x: f64| -> Result<f64, QuadError> {
        let y = f(x);
        if y.is_finite() {
            Ok(y)
        } else {
            Err(QuadError::NonFinite { x })
        }
    };

    let mut h = initial_step(b - a, resolution);
    let intervals = ((b - a) / h).round() as usize;
    let mut nodes = intervals + 1;

    let fa = eval(a)?;
    let fb = eval(b)?;
    let mut sum = 0.5 * (fa + fb);
    let mut sum_abs = 0.5 * (fa.abs() + fb.abs());
    for j in 1..intervals {
        let y = eval(a + j as f64 * h)?;
        sum += y;
        sum_abs += y.abs();
    }
    let mut estimate = h * sum;
    let mut level_intervals = intervals;
    let mut best = EvalResult {
        value: estimate,
        abs_error_estimate: f64::INFINITY,
        method: EvalMethod::Quadrature,
        nodes_used: nodes,
    };

    for level in 1..=cfg.max_refinements {
        h *= 0.5;
        let mut fresh = 0.0;
        let mut fresh_abs = 0.0;
        for j in 0..level_intervals {
            let y = eval(a + (2 * j + 1) as f64 * h)?;
            fresh += y;
            fresh_abs += y.abs();
        }
        nodes += level_intervals;
        level_intervals *= 2;
        sum += fresh;
        sum_abs += fresh_abs;

        let refined = h * sum;
        let discretization = (refined - estimate).abs();
        let roundoff = 16.0 * f64::EPSILON * (h * sum_abs + refined.abs());
        estimate = refined;
        best = EvalResult {
            value: refined,
            abs_error_estimate: discretization + roundoff + truncation,
            method: EvalMethod::Quadrature,
            nodes_used: nodes,
        };

        let tolerance = cfg.abs_tol.max(cfg.rel_tol * refined.abs());
        if level >= 2 && (discretization <= tolerance || discretization <= roundoff) {
            return Ok((best, h * sum_abs));
        }
    }
    Err(QuadError::NonConvergence { best })
}

// 8-point Gauss-Legendre rule on [-1, 1] (exact for degree 15).
const GL_NODES: [f64; 4] = [
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL_WEIGHTS: [f64; 4] = [
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

/// `∫_a^b g` by the 8-point Gauss-Legendre rule.
pub fn gauss_legendre<G: Fn(f64) -> f64>(g: &G, a: f64, b: f64) -> f64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = 0.0;
    for (t, w) in GL_NODES.iter().zip(GL_WEIGHTS.iter()) {
        acc += w * (g(mid - half * t) + g(mid + half * t));
    }
    acc * half
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Symmetry {
    None,
    /// `g(-y) = g(y)`; the evaluator is built on `[0, ∞)` and mirrored, so
    /// `I(-x) = -I(x)` holds exactly.
    Even,
}

/// Queryable `I(x) = ∫₀^x g(y) dy`.
///
/// Panel integrals between consecutive grid points are computed once by an
/// 8-point Gauss-Legendre rule and accumulated outward from zero. A query
/// between grid points adds a Gauss-Legendre integral over the partial panel,
/// so accuracy between nodes matches accuracy at nodes. Queries beyond the
/// grid extend from the nearest end point the same way.
#[derive(Debug, Clone)]
pub struct CumulativeIntegral<G> {
    g: G,
    grid: Vec<f64>,
    values: Vec<f64>,
    symmetry: Symmetry,
}

pub fn cumulative_integral<G>(
    g: G,
    x_points: &[f64],
    symmetry: Symmetry,
) -> Result<CumulativeIntegral<G>, QuadError>
where
    G: Fn(f64) -> f64,
{
    if x_points.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(QuadError::Grid("grid must be strictly increasing"));
    }
    let zero = x_points
        .iter()
        .position(|&x| x == 0.0)
        .ok_or(QuadError::Grid("grid must contain 0"))?;

    let grid: Vec<f64> = match symmetry {
        Symmetry::None => x_points.to_vec(),
        Symmetry::Even => {
            let mut mirrored: Vec<f64> = x_points.iter().map(|x| x.abs()).collect();
            mirrored.sort_by(f64::total_cmp);
            mirrored.dedup();
            mirrored
        }
    };
    let zero = match symmetry {
        Symmetry::None => zero,
        Symmetry::Even => 0,
    };

    let mut values = vec![0.0; grid.len()];
    for i in zero + 1..grid.len() {
        values[i] = values[i - 1] + gauss_legendre(&g, grid[i - 1], grid[i]);
    }
    for i in (0..zero).rev() {
        values[i] = values[i + 1] - gauss_legendre(&g, grid[i], grid[i + 1]);
    }
    Ok(CumulativeIntegral {
        g,
        grid,
        values,
        symmetry,
    })
}

impl<G: Fn(f64) -> f64> CumulativeIntegral<G> {
    pub fn eval(&self, x: f64) -> f64 {
        match self.symmetry {
            Symmetry::Even if x < 0.0 => -self.eval_on_grid(-x),
            _ => self.eval_on_grid(x),
        }
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    fn eval_on_grid(&self, x: f64) -> f64 {
        // Index of the last grid point <= x, clamped into range.
        let idx = match self.grid.binary_search_by(|p| p.total_cmp(&x)) {
            Ok(i) => return self.values[i],
            Err(0) => 0,
            Err(i) => i - 1,
        };
        let anchor = if x < self.grid[0] { 0 } else { idx };
        let base = self.grid[anchor];
        self.values[anchor] + gauss_legendre(&self.g, base, x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn gaussian_integral() {
        let cfg = QuadratureConfig::default();
        let r = integrate_line(|x| (-0.5 * x * x).exp(), &Envelope::gaussian(1.0), &cfg).unwrap();
        assert!((r.value - (2.0 * PI).sqrt()).abs() < 1e-12);
        assert!(r.abs_error_estimate >= (r.value - (2.0 * PI).sqrt()).abs());
        assert_eq!(r.method, EvalMethod::Quadrature);
    }

    #[test]
    fn odd_integrand_vanishes() {
        let cfg = QuadratureConfig::default();
        let env = Envelope::gaussian(1.0).with_degree(1.0);
        let r = integrate_line(|x| x * (-0.5 * x * x).exp(), &env, &cfg).unwrap();
        assert!(r.value.abs() < 1e-12);
    }

    #[test]
    fn sech_squared() {
        let cfg = QuadratureConfig::default();
        let env = Envelope::exponential(2.0).with_constant(4.0);
        let r = integrate_line(|x| x.cosh().powi(-2), &env, &cfg).unwrap();
        assert!((r.value - 2.0).abs() < 1e-10, "{r:?}");
    }

    #[test]
    fn half_line_mirrors_full_line() {
        let cfg = QuadratureConfig::default();
        let env = Envelope::gaussian(1.5).with_constant(2.0);
        let f = |x: f64| (1.0 + x * x).recip() * (-x * x / 4.5).exp();
        let full = integrate_line(f, &env, &cfg).unwrap();
        let half = integrate_half_line(f, &env, &cfg).unwrap();
        assert!(((2.0 * half.value - full.value) / full.value).abs() < 1e-13);
    }

    #[test]
    fn determinism() {
        let cfg = QuadratureConfig::default();
        let env = Envelope::exponential(1.0).with_constant(2.0);
        let f = |x: f64| 1.0 / x.cosh();
        let a = integrate_line(f, &env, &cfg).unwrap();
        let b = integrate_line(f, &env, &cfg).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        assert_eq!(a, b);
    }

    #[test]
    fn non_convergence_reports_best_value() {
        let cfg = QuadratureConfig {
            max_refinements: 2,
            rel_tol: 1e-15,
            abs_tol: 1e-300,
            ..QuadratureConfig::default()
        };
        // A kink keeps the rule second order, so two halvings cannot reach 1e-15.
        let env = Envelope::exponential(1.0).with_resolution(10.0);
        let err = integrate_line(|x| (-x.abs()).exp(), &env, &cfg).unwrap_err();
        match err {
            QuadError::NonConvergence { best } => {
                assert!((best.value - 2.0).abs() <= 3.0 * best.abs_error_estimate);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let env = Envelope::gaussian(1.0);
        let bad = QuadratureConfig {
            rel_tol: 0.0,
            ..QuadratureConfig::default()
        };
        assert!(matches!(
            integrate_line(|x| x, &env, &bad),
            Err(QuadError::InvalidConfig(_))
        ));
        let cfg = QuadratureConfig::default();
        assert!(matches!(
            integrate_line(|_| f64::NAN, &env, &cfg),
            Err(QuadError::NonFinite { .. })
        ));
        assert!(matches!(
            integrate_line(|x| x, &Envelope::gaussian(-1.0), &cfg),
            Err(QuadError::InvalidEnvelope(_))
        ));
    }

    fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        // n panels on each side of zero
        let mut g: Vec<f64> = (0..=n).map(|i| lo * (n - i) as f64 / n as f64).collect();
        g.extend((1..=n).map(|i| hi * i as f64 / n as f64));
        g
    }

    #[test]
    fn cumulative_cosh() {
        let ci = cumulative_integral(f64::cosh, &grid(-3.0, 3.0, 12), Symmetry::None).unwrap();
        assert!((ci.eval(1.0) - 1f64.sinh()).abs() < 1e-10);
        assert!((ci.eval(-2.3) - (-2.3f64).sinh()).abs() < 1e-10);
        assert_eq!(ci.eval(0.0), 0.0);
    }

    #[test]
    fn cumulative_constant() {
        let ci = cumulative_integral(|_| 1.0, &grid(-2.0, 2.0, 8), Symmetry::None).unwrap();
        for &x in ci.grid() {
            assert!((ci.eval(x) - x).abs() < 1e-15);
        }
    }

    #[test]
    fn cumulative_cosh_squared_even() {
        let g = |y: f64| y.cosh().powi(2);
        let ci = cumulative_integral(g, &grid(-5.0, 5.0, 20), Symmetry::Even).unwrap();
        let truth = (2f64.sinh() * 2f64.cosh() + 2.0) / 2.0;
        assert!((ci.eval(2.0) - truth).abs() < 1e-9);
        assert_eq!(ci.eval(-1.7), -ci.eval(1.7));
    }

    #[test]
    fn cumulative_grid_errors() {
        assert!(matches!(
            cumulative_integral(|_| 1.0, &[0.5, 1.0], Symmetry::None),
            Err(QuadError::Grid(_))
        ));
        assert!(matches!(
            cumulative_integral(|_| 1.0, &[0.0, 1.0, 0.5], Symmetry::None),
            Err(QuadError::Grid(_))
        ));
    }
}
