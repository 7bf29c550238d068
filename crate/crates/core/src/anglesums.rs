//! Expected internal-angle sums at the vertices of Gaussian (regular),
//! beta and beta-prime simplices, evaluated from their one-dimensional
//! complex integral representations.
//!
//! Each integrand has the form `outer(x) · (1/2 + i·I(x))^{n-1}` with `I`
//! odd. Only the real part survives integration; it is even, so it is
//! integrated over the half line and doubled. The complex power is formed as
//! `exp((n-1)·log(1/2 + iI) + log outer)` so that the large factors cancel
//! before anything is exponentiated.

use std::f64::consts::{LN_2, PI};

use num_complex::Complex64;
use thiserror::Error;

use crate::quad::{
    self, cumulative_integral, initial_step, CumulativeIntegral, Envelope, EvalResult, QuadError,
    QuadratureConfig, Symmetry,
};
use crate::specfun::{self, SpecFunError};

/// Largest number of vertices for which the quadrature tolerances hold
/// as configured.
pub const GUARANTEED_MAX_VERTICES: u32 = 20;
/// Largest number of vertices accepted at all. Between
/// [`GUARANTEED_MAX_VERTICES`] and this bound the error estimate is
/// multiplied by [`DEGRADED_ERROR_FACTOR`].
pub const MAX_VERTICES: u32 = 40;
pub const DEGRADED_ERROR_FACTOR: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AngleSumError {
    #[error("parameter outside the validity region: {0}")]
    Domain(String),
    #[error(transparent)]
    Quad(#[from] QuadError),
    #[error(transparent)]
    SpecFun(#[from] SpecFunError),
    #[error("imaginary part {imaginary} of the angle-sum integral is not negligible")]
    NotReal { imaginary: f64 },
}

pub type Result<T> = std::result::Result<T, AngleSumError>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Variant {
    GaussianLimit,
    Beta(f64),
    BetaPrime(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngleSumQuery {
    /// Number of vertices; the simplex has dimension `n - 1`.
    pub n: u32,
    pub variant: Variant,
    pub cfg: QuadratureConfig,
}

impl AngleSumQuery {
    pub fn new(n: u32, variant: Variant, cfg: QuadratureConfig) -> Self {
        Self { n, variant, cfg }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n;
        if n > MAX_VERTICES {
            return Err(AngleSumError::Domain(format!(
                "n = {n} exceeds the supported maximum of {MAX_VERTICES} vertices"
            )));
        }
        match self.variant {
            Variant::GaussianLimit => {
                if n < 2 {
                    return Err(AngleSumError::Domain(format!("n = {n}: need n >= 2")));
                }
            }
            Variant::Beta(beta) => {
                if n < 3 {
                    return Err(AngleSumError::Domain(format!(
                        "n = {n}: need n >= 3 for the beta integral"
                    )));
                }
                if !beta.is_finite() {
                    return Err(AngleSumError::Domain(format!(
                        "beta = {beta} is not finite"
                    )));
                }
                if beta < -1.0 && !(n >= 4 && beta >= -1.5) {
                    return Err(AngleSumError::Domain(format!(
                        "beta = {beta}, n = {n}: need beta >= -1, or beta >= -3/2 with n >= 4"
                    )));
                }
            }
            Variant::BetaPrime(beta) => {
                if n < 2 {
                    return Err(AngleSumError::Domain(format!("n = {n}: need n >= 2")));
                }
                let alpha = beta_prime_alpha(n, beta);
                if !(alpha * f64::from(n) > 1.0) || !beta.is_finite() {
                    return Err(AngleSumError::Domain(format!(
                        "beta = {beta}, n = {n}: need 2*beta > n - 1 + 1/n for the integral to converge"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn evaluate(&self) -> Result<EvalResult> {
        self.validate()?;
        let (result, imaginary) = match self.variant {
            Variant::GaussianLimit => GaussianIntegrand::new(self.n)?.integrate(&self.cfg)?,
            Variant::Beta(beta) => {
                CoshIntegrand::beta(self.n, beta_alpha(self.n, beta))?.integrate(&self.cfg)?
            }
            Variant::BetaPrime(beta) => {
                CoshIntegrand::beta_prime(self.n, beta_prime_alpha(self.n, beta))?
                    .integrate(&self.cfg)?
            }
        };
        if imaginary.value.abs() > 10.0 * self.cfg.abs_tol + imaginary.abs_error_estimate {
            return Err(AngleSumError::NotReal {
                imaginary: imaginary.value,
            });
        }
        Ok(result)
    }

    /// The separately integrated imaginary part of the complex integral.
    pub fn imaginary_part(&self) -> Result<EvalResult> {
        self.validate()?;
        Ok(match self.variant {
            Variant::GaussianLimit => GaussianIntegrand::new(self.n)?.integrate(&self.cfg)?.1,
            Variant::Beta(beta) => {
                CoshIntegrand::beta(self.n, beta_alpha(self.n, beta))?
                    .integrate(&self.cfg)?
                    .1
            }
            Variant::BetaPrime(beta) => {
                CoshIntegrand::beta_prime(self.n, beta_prime_alpha(self.n, beta))?
                    .integrate(&self.cfg)?
                    .1
            }
        })
    }
}

/// `α = 2β + n - 1`, the exponent parameter of the beta integral.
pub fn beta_alpha(n: u32, beta: f64) -> f64 {
    2.0 * beta + f64::from(n) - 1.0
}

/// `α = 2β - n + 1`, the exponent parameter of the beta-prime integral.
pub fn beta_prime_alpha(n: u32, beta: f64) -> f64 {
    2.0 * beta - f64::from(n) + 1.0
}

/// Sum of the solid angles at the vertices of the regular simplex with `n`
/// vertices, which is also the expected sum for a Gaussian simplex.
pub fn gaussian_angle_sum(n: u32, cfg: &QuadratureConfig) -> Result<EvalResult> {
    AngleSumQuery::new(n, Variant::GaussianLimit, *cfg).evaluate()
}

/// Expected vertex angle sum of the beta simplex with `n` vertices drawn
/// from the `(n-1)`-dimensional beta law with parameter `beta`.
pub fn beta_angle_sum(n: u32, beta: f64, cfg: &QuadratureConfig) -> Result<EvalResult> {
    AngleSumQuery::new(n, Variant::Beta(beta), *cfg).evaluate()
}

/// [`beta_angle_sum`] parametrized by `α`, i.e. at `β = (α - n + 1) / 2`.
pub fn beta_angle_sum_alpha(n: u32, alpha: f64, cfg: &QuadratureConfig) -> Result<EvalResult> {
    beta_angle_sum(n, (alpha - f64::from(n) + 1.0) / 2.0, cfg)
}

/// Expected vertex angle sum of the beta-prime simplex.
pub fn beta_prime_angle_sum(n: u32, beta: f64, cfg: &QuadratureConfig) -> Result<EvalResult> {
    AngleSumQuery::new(n, Variant::BetaPrime(beta), *cfg).evaluate()
}

fn ln_cosh(x: f64) -> f64 {
    let a = x.abs();
    a + (-2.0 * a).exp().ln_1p() - LN_2
}

// (n-1) log(1/2 + i t) + ln_outer, exponentiated once.
fn power_term(n: u32, t: f64, ln_outer: f64) -> Complex64 {
    let z = Complex64::new(0.5, t);
    (z.ln() * f64::from(n - 1) + ln_outer).exp()
}

// Adds the integrand-evaluation error (relative ~n·eps from the complex
// power) and the degradation factor for large n.
fn finish(n: u32, mut result: EvalResult, l1: f64, prefactor: f64) -> EvalResult {
    result.abs_error_estimate += 4.0 * f64::from(n) * f64::EPSILON * l1;
    let mut result = result.scaled(prefactor);
    if n > GUARANTEED_MAX_VERTICES {
        result.abs_error_estimate *= DEGRADED_ERROR_FACTOR;
    }
    result
}

/// `(1/2 + i h(u))^{n-1} e^{-n u²/2}` after substituting `x = √n u`.
struct GaussianIntegrand {
    n: u32,
}

impl GaussianIntegrand {
    fn new(n: u32) -> Result<Self> {
        Ok(Self { n })
    }

    fn value(&self, u: f64) -> Complex64 {
        let h = specfun::h_imag_cdf(u).unwrap_or(f64::NAN);
        power_term(self.n, h, -0.5 * f64::from(self.n) * u * u)
    }

    // |1/2 + i h(u)| <= (1/2 + u/√(2π)) e^{u²/2} <= (1 + u) e^{u²/2}.
    fn envelope(&self) -> Envelope {
        Envelope::gaussian(1.0)
            .with_degree(f64::from(self.n - 1))
            .with_resolution(1.0 / f64::from(self.n).sqrt())
    }

    fn integrate(&self, cfg: &QuadratureConfig) -> Result<(EvalResult, EvalResult)> {
        let n = f64::from(self.n);
        let prefactor = n * n.sqrt() / (2.0 * PI).sqrt();
        // Tolerances apply to the angle sum, not to the bare integral.
        let inner_cfg = QuadratureConfig {
            abs_tol: cfg.abs_tol / prefactor,
            ..*cfg
        };
        let env = self.envelope();
        let (re, l1) = quad::integrate_half_line_with_l1(|u| self.value(u).re, &env, &inner_cfg)?;
        let im = quad::integrate_line(|u| self.value(u).im, &env, &inner_cfg)?;
        Ok((
            finish(self.n, re, l1, 2.0 * prefactor),
            im.scaled(prefactor),
        ))
    }
}

/// Integrand shared by the beta and beta-prime formulas:
/// `c_out (cosh x)^{-p_out} (1/2 + i ∫₀^x c_in (cosh y)^{p_in} dy)^{n-1}`.
struct CoshIntegrand {
    n: u32,
    ln_c_out: f64,
    p_out: f64,
    c_in: f64,
    p_in: f64,
    // Exponential decay rate of the full integrand's modulus.
    rate: f64,
}

impl CoshIntegrand {
    fn beta(n: u32, alpha: f64) -> Result<Self> {
        let nf = f64::from(n);
        let ln_c_out = specfun::ln_beta_const(1, alpha * nf / 2.0)?;
        let c_in = specfun::beta_const(1, (alpha - 1.0) / 2.0)?;
        Ok(Self {
            n,
            ln_c_out,
            p_out: alpha * nf + 2.0,
            c_in,
            p_in: alpha,
            rate: alpha + 2.0,
        })
    }

    fn beta_prime(n: u32, alpha: f64) -> Result<Self> {
        let nf = f64::from(n);
        let ln_c_out = specfun::ln_beta_prime_const(1, alpha * nf / 2.0)?;
        let c_in = specfun::beta_prime_const(1, (alpha + 1.0) / 2.0)?;
        let rate = if alpha >= 1.0 {
            alpha + nf - 2.0
        } else {
            alpha * nf - 1.0
        };
        Ok(Self {
            n,
            ln_c_out,
            p_out: alpha * nf - 1.0,
            c_in,
            p_in: alpha - 1.0,
            rate,
        })
    }

    // |I(x)| <= c_in |x| max(1, cosh^{p_in} x), so the modulus is at most
    // c_out (1/2 + c_in|x|)^{n-1} (cosh x)^{-rate} <= C (1+|x|)^{n-1} 2^rate e^{-rate|x|}.
    fn envelope(&self) -> Envelope {
        let n1 = f64::from(self.n - 1);
        let ln_c = self.ln_c_out + n1 * self.c_in.max(0.5).ln() + self.rate * LN_2;
        Envelope::exponential(self.rate)
            .with_ln_constant(ln_c)
            .with_degree(n1)
            .with_resolution((self.p_out + 1.0).sqrt().recip().min(1.0))
    }

    fn inner(
        &self,
        cut: f64,
        step: f64,
    ) -> std::result::Result<CumulativeIntegral<impl Fn(f64) -> f64 + '_>, QuadError> {
        let panels = (cut / step).ceil() as usize;
        let grid: Vec<f64> = (0..=panels).map(|j| (j as f64 * step).min(cut)).collect();
        let mut grid = grid;
        grid.dedup();
        let c_in = self.c_in;
        let p_in = self.p_in;
        cumulative_integral(
            move |y: f64| c_in * (p_in * ln_cosh(y)).exp(),
            &grid,
            Symmetry::Even,
        )
    }

    fn value<G: Fn(f64) -> f64>(&self, inner: &CumulativeIntegral<G>, x: f64) -> Complex64 {
        power_term(
            self.n,
            inner.eval(x),
            self.ln_c_out - self.p_out * ln_cosh(x),
        )
    }

    fn integrate(&self, cfg: &QuadratureConfig) -> Result<(EvalResult, EvalResult)> {
        let n = f64::from(self.n);
        let inner_cfg = QuadratureConfig {
            abs_tol: cfg.abs_tol / n,
            ..*cfg
        };
        let env = self.envelope();
        let cut = quad::half_width(&env, &inner_cfg)?;
        let step = initial_step(cut, env.resolution) / f64::from(cfg.inner_grid_factor);
        let inner = self.inner(cut, step)?;

        let (re, l1) =
            quad::integrate_half_line_with_l1(|x| self.value(&inner, x).re, &env, &inner_cfg)?;
        let im = quad::integrate_line(|x| self.value(&inner, x).im, &env, &inner_cfg)?;
        Ok((finish(self.n, re, l1, 2.0 * n), im.scaled(n)))
    }
}
