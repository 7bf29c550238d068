//! Front-end for `p_d(μ)`: the probability that `d + 2` i.i.d. points with
//! law `μ` form a simplex, for the Gaussian, beta and beta-prime families.
//!
//! Three routes are available: quadrature through [`crate::anglesums`]
//! (`p = 2 · J_{d+2,1}`), a registry of exact closed forms, and, for the
//! multivariate Cauchy law, a large-`d` asymptotic that is reported
//! separately and never substituted for a probability.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::anglesums::{self, AngleSumError, MAX_VERTICES};
use crate::quad::{EvalMethod, EvalResult, QuadratureConfig};
use crate::specfun::{self, SpecFunError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    #[serde(rename = "gauss")]
    Gaussian,
    #[serde(rename = "beta")]
    Beta,
    #[serde(rename = "betaprime")]
    BetaPrime,
}

impl Family {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Gaussian => "gauss",
            Self::Beta => "beta",
            Self::BetaPrime => "betaprime",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "gauss" | "gaussian" => Ok(Self::Gaussian),
            "beta" => Ok(Self::Beta),
            "betaprime" | "beta-prime" => Ok(Self::BetaPrime),
            other => Err(format!("unknown family `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SylvesterError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("no closed form registered for {0}")]
    NotInRegistry(String),
    #[error(transparent)]
    Numeric(AngleSumError),
}

impl From<AngleSumError> for SylvesterError {
    fn from(err: AngleSumError) -> Self {
        match err {
            AngleSumError::Domain(msg) => Self::Domain(msg),
            AngleSumError::SpecFun(SpecFunError::Domain { .. }) => Self::Domain(err.to_string()),
            other => Self::Numeric(other),
        }
    }
}

impl From<SpecFunError> for SylvesterError {
    fn from(err: SpecFunError) -> Self {
        Self::Domain(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, SylvesterError>;

/// A point law on `R^d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Distribution {
    pub family: Family,
    pub d: u32,
    /// Shape parameter; `None` for the Gaussian family.
    pub beta: Option<f64>,
}

impl Distribution {
    pub fn gaussian(d: u32) -> Self {
        Self {
            family: Family::Gaussian,
            d,
            beta: None,
        }
    }

    /// Density proportional to `(1 - |x|²)^β` on the unit ball; `β = -1`
    /// is the uniform law on the unit sphere.
    pub fn beta(d: u32, beta: f64) -> Self {
        Self {
            family: Family::Beta,
            d,
            beta: Some(beta),
        }
    }

    /// Density proportional to `(1 + |x|²)^{-β}`.
    pub fn beta_prime(d: u32, beta: f64) -> Self {
        Self {
            family: Family::BetaPrime,
            d,
            beta: Some(beta),
        }
    }

    pub fn new(family: Family, d: u32, beta: Option<f64>) -> Result<Self> {
        let dist = Self { family, d, beta };
        dist.validate()?;
        Ok(dist)
    }

    pub fn validate(&self) -> Result<()> {
        if self.d < 1 {
            return Err(SylvesterError::Domain(
                "dimension d must be at least 1".into(),
            ));
        }
        match (self.family, self.beta) {
            (Family::Gaussian, None) => Ok(()),
            (Family::Gaussian, Some(_)) => Err(SylvesterError::Domain(
                "the Gaussian family takes no beta parameter".into(),
            )),
            (_, None) => Err(SylvesterError::Domain(format!(
                "the {} family requires a beta parameter",
                self.family
            ))),
            (_, Some(b)) if !b.is_finite() => {
                Err(SylvesterError::Domain(format!("beta = {b} is not finite")))
            }
            (Family::Beta, Some(b)) if b < -1.0 => Err(SylvesterError::Domain(format!(
                "beta = {b}: the beta family requires beta >= -1"
            ))),
            (Family::BetaPrime, Some(b)) if b <= f64::from(self.d) / 2.0 => {
                Err(SylvesterError::Domain(format!(
                    "beta = {b}: the beta-prime family requires beta > d/2 = {}",
                    f64::from(self.d) / 2.0
                )))
            }
            _ => Ok(()),
        }
    }

    pub fn label(&self) -> String {
        match self.beta {
            Some(b) => format!("{} d={} beta={}", self.family, self.d, b),
            None => format!("{} d={}", self.family, self.d),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Method {
    #[default]
    Auto,
    Quadrature,
    ClosedForm,
}

/// Which dimensions a registry entry covers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Dims {
    Exactly(u32),
    AtLeast(u32),
}

/// Which shape parameter a registry entry covers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Param {
    Any,
    None,
    Value(f64),
    /// `β = d/2 + 1`.
    HalfDimPlusOne,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegistryKey {
    /// `None` matches every family.
    pub family: Option<Family>,
    pub dims: Dims,
    pub param: Param,
}

impl RegistryKey {
    pub fn matches(&self, dist: &Distribution) -> bool {
        if self.family.is_some_and(|f| f != dist.family) {
            return false;
        }
        let dims_ok = match self.dims {
            Dims::Exactly(d) => dist.d == d,
            Dims::AtLeast(d) => dist.d >= d,
        };
        let param_ok = match (self.param, dist.beta) {
            (Param::Any, _) => true,
            (Param::None, b) => b.is_none(),
            (Param::Value(v), Some(b)) => b == v,
            (Param::HalfDimPlusOne, Some(b)) => b == f64::from(dist.d) / 2.0 + 1.0,
            _ => false,
        };
        dims_ok && param_ok
    }
}

impl fmt::Display for RegistryKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.family {
            Some(family) => write!(f, "{family}")?,
            None => f.write_str("any")?,
        }
        match self.dims {
            Dims::Exactly(d) => write!(f, " d={d}")?,
            Dims::AtLeast(d) => write!(f, " d>={d}")?,
        }
        match self.param {
            Param::Any | Param::None => Ok(()),
            Param::Value(v) => write!(f, " beta={v}"),
            Param::HalfDimPlusOne => f.write_str(" beta=d/2+1"),
        }
    }
}

type ValueFn = Arc<dyn Fn(u32) -> std::result::Result<f64, SpecFunError> + Send + Sync>;

/// An exact formula for `p_d` on some set of distributions.
#[derive(Clone)]
pub struct ClosedFormEntry {
    pub key: RegistryKey,
    pub description: String,
    value_fn: ValueFn,
}

impl fmt::Debug for ClosedFormEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ClosedFormEntry")
            .field("key", &self.key)
            .field("description", &self.description)
            .finish_non_exhaustive()
    }
}

impl ClosedFormEntry {
    pub fn new<F>(key: RegistryKey, description: impl Into<String>, value_fn: F) -> Self
    where
        F: Fn(u32) -> std::result::Result<f64, SpecFunError> + Send + Sync + 'static,
    {
        Self {
            key,
            description: description.into(),
            value_fn: Arc::new(value_fn),
        }
    }

    pub fn evaluate(&self, d: u32) -> Result<f64> {
        Ok((self.value_fn)(d)?)
    }
}

/// Ordered collection of closed forms; the first matching entry wins.
#[derive(Debug, Clone)]
pub struct Registry {
    entries: Vec<ClosedFormEntry>,
}

impl Registry {
    pub fn new(entries: Vec<ClosedFormEntry>) -> Self {
        Self { entries }
    }

    /// The shared registry of known values.
    pub fn standard() -> &'static Registry {
        static REGISTRY: OnceLock<Registry> = OnceLock::new();
        REGISTRY.get_or_init(|| Registry::new(standard_entries()))
    }

    pub fn entries(&self) -> &[ClosedFormEntry] {
        &self.entries
    }

    pub fn find(&self, dist: &Distribution) -> Option<&ClosedFormEntry> {
        self.entries.iter().find(|e| e.key.matches(dist))
    }

    pub fn lookup(&self, dist: &Distribution) -> Option<Result<EvalResult>> {
        self.find(dist).map(|entry| {
            entry
                .evaluate(dist.d)
                .map(|v| EvalResult::exact(v, EvalMethod::ClosedForm))
        })
    }

    /// Copy of this registry with the first entry matching `dist` replaced
    /// by one that returns `value` for every dimension.
    pub fn with_override(&self, dist: &Distribution, value: f64) -> Self {
        let mut entries = self.entries.clone();
        if let Some(entry) = entries.iter_mut().find(|e| e.key.matches(dist)) {
            entry.value_fn = Arc::new(move |_| Ok(value));
        }
        Self { entries }
    }
}

fn key(family: Option<Family>, dims: Dims, param: Param) -> RegistryKey {
    RegistryKey {
        family,
        dims,
        param,
    }
}

/// `(d+2)/2^d · C(d+1, (d+1)/2)^{d+1} / C((d+1)², (d+1)²/2)` in log-space.
pub fn kingman(d: u32) -> std::result::Result<f64, SpecFunError> {
    let df = f64::from(d);
    let m = df + 1.0;
    let ln = (df + 2.0).ln() - df * std::f64::consts::LN_2
        + m * specfun::ln_gen_binomial(m, m / 2.0)?
        - specfun::ln_gen_binomial(m * m, m * m / 2.0)?;
    Ok(ln.exp())
}

/// Closed form for the beta law with `β = 1`.
pub fn beta_one(d: u32) -> std::result::Result<f64, SpecFunError> {
    let df = f64::from(d);
    let n = df + 2.0;
    let n2 = n * n;
    let ln = (2.0 * PI * n * (n2 + 1.0) * (n2 + df + 4.0) / (df + 5.0)).ln()
        - n * (2.0 * df + 5.0) * std::f64::consts::LN_2
        + (df + 1.0) * specfun::ln_gen_binomial(df + 3.0, (df + 3.0) / 2.0)?
        + specfun::ln_gen_binomial(n2, n2 / 2.0)?;
    Ok(ln.exp())
}

/// `4(2d+3) / C(2d+4, d+2)`, the beta-prime law with `β = d/2 + 1`.
pub fn beta_prime_special(d: u32) -> std::result::Result<f64, SpecFunError> {
    let df = f64::from(d);
    Ok(4.0 * (2.0 * df + 3.0) / specfun::gen_binomial(2.0 * df + 4.0, df + 2.0)?)
}

fn standard_entries() -> Vec<ClosedFormEntry> {
    use Family::{Beta, BetaPrime, Gaussian};
    let pi2 = PI * PI;
    let pi4 = pi2 * pi2;
    vec![
        // Three distinct points on a line always span a segment.
        ClosedFormEntry::new(key(None, Dims::Exactly(1), Param::Any), "1", |_| Ok(1.0)),
        ClosedFormEntry::new(
            key(Some(Beta), Dims::AtLeast(2), Param::Value(-1.0)),
            "0 (points on the sphere are in convex position)",
            |_| Ok(0.0),
        ),
        ClosedFormEntry::new(
            key(Some(Gaussian), Dims::Exactly(2), Param::None),
            "1 - (6/pi) asin(1/3)",
            |_| Ok(1.0 - 6.0 / PI * (1.0f64 / 3.0).asin()),
        ),
        // Printed with a subscript 2 in the source; the value is the d = 3 case.
        ClosedFormEntry::new(
            key(Some(Gaussian), Dims::Exactly(3), Param::None),
            "1/2 - (5/pi) asin(1/4)",
            |_| Ok(0.5 - 5.0 / PI * 0.25f64.asin()),
        ),
        ClosedFormEntry::new(
            key(Some(Beta), Dims::AtLeast(1), Param::Value(0.0)),
            "(d+2)/2^d * C(d+1,(d+1)/2)^(d+1) / C((d+1)^2,(d+1)^2/2)",
            kingman,
        ),
        ClosedFormEntry::new(
            key(Some(Beta), Dims::AtLeast(1), Param::Value(1.0)),
            "2pi(d+2)((d+2)^2+1)((d+2)^2+d+4) / ((d+5) 2^((d+2)(2d+5))) * C(d+3,(d+3)/2)^(d+1) * C((d+2)^2,(d+2)^2/2)",
            beta_one,
        ),
        ClosedFormEntry::new(
            key(Some(Beta), Dims::Exactly(2), Param::Value(-0.5)),
            "1/4",
            |_| Ok(0.25),
        ),
        ClosedFormEntry::new(
            key(Some(Beta), Dims::Exactly(3), Param::Value(-0.5)),
            "539/(144 pi^2) - 1/3",
            move |_| Ok(539.0 / (144.0 * pi2) - 1.0 / 3.0),
        ),
        ClosedFormEntry::new(
            key(Some(Beta), Dims::Exactly(4), Param::Value(-0.5)),
            "25411/3670016",
            |_| Ok(25411.0 / 3_670_016.0),
        ),
        ClosedFormEntry::new(
            key(Some(Beta), Dims::Exactly(5), Param::Value(-0.5)),
            "1/3 + 113537407/(24192000 pi^4) - 2144238917/(570810240 pi^2)",
            move |_| {
                Ok(1.0 / 3.0 + 113_537_407.0 / (24_192_000.0 * pi4)
                    - 2_144_238_917.0 / (570_810_240.0 * pi2))
            },
        ),
        ClosedFormEntry::new(
            key(Some(Beta), Dims::Exactly(2), Param::Value(0.5)),
            "401/1280",
            |_| Ok(401.0 / 1280.0),
        ),
        ClosedFormEntry::new(
            key(Some(Beta), Dims::Exactly(3), Param::Value(0.5)),
            "1692197/(423360 pi^2) - 1/3",
            move |_| Ok(1_692_197.0 / (423_360.0 * pi2) - 1.0 / 3.0),
        ),
        ClosedFormEntry::new(
            key(Some(Beta), Dims::Exactly(4), Param::Value(0.5)),
            "112433094897/8598524526592",
            |_| Ok(112_433_094_897.0 / 8_598_524_526_592.0),
        ),
        ClosedFormEntry::new(
            key(Some(BetaPrime), Dims::AtLeast(1), Param::HalfDimPlusOne),
            "4(2d+3) / C(2d+4,d+2)",
            beta_prime_special,
        ),
    ]
}

/// Exact value of `p_d(μ)` from the standard registry, if one is known.
pub fn closed_form_lookup(dist: &Distribution) -> Option<EvalResult> {
    Registry::standard().lookup(dist).and_then(|r| r.ok())
}

/// `2√3 · d · π^{-d-1}`, the large-`d` asymptotic of the simplex
/// probability for the multivariate Cauchy law (`β = (d+1)/2`).
pub fn cauchy_asymptotic(d: u32) -> EvalResult {
    let df = f64::from(d);
    let value = 2.0 * 3f64.sqrt() * df * PI.powf(-df - 1.0);
    EvalResult::exact(value, EvalMethod::Asymptotic)
}

/// Validity condition of the beta-prime quadrature route.
pub fn beta_prime_quadrature_ok(d: u32, beta: f64) -> bool {
    let df = f64::from(d);
    2.0 * beta > df + 1.0 / (df + 2.0)
}

/// Probability that `d + 2` i.i.d. points with law `dist` form a simplex.
pub fn sylvester_probability(
    dist: &Distribution,
    method: Method,
    cfg: &QuadratureConfig,
) -> Result<EvalResult> {
    sylvester_probability_with(Registry::standard(), dist, method, cfg)
}

pub fn sylvester_probability_with(
    registry: &Registry,
    dist: &Distribution,
    method: Method,
    cfg: &QuadratureConfig,
) -> Result<EvalResult> {
    dist.validate()?;
    match method {
        Method::Auto => match registry.lookup(dist) {
            Some(found) => found,
            None => by_quadrature(dist, cfg),
        },
        Method::ClosedForm => registry
            .lookup(dist)
            .unwrap_or_else(|| Err(SylvesterError::NotInRegistry(dist.label()))),
        Method::Quadrature => by_quadrature(dist, cfg),
    }
}

fn by_quadrature(dist: &Distribution, cfg: &QuadratureConfig) -> Result<EvalResult> {
    let n = dist.d + 2;
    if n > MAX_VERTICES {
        return Err(SylvesterError::Domain(format!(
            "d = {} exceeds the quadrature limit d <= {}",
            dist.d,
            MAX_VERTICES - 2
        )));
    }
    let half = match (dist.family, dist.beta) {
        (Family::Gaussian, _) => anglesums::gaussian_angle_sum(n, cfg)?,
        (Family::Beta, Some(beta)) => {
            if beta < -0.5 && dist.d < 2 {
                return Err(SylvesterError::Domain(format!(
                    "beta = {beta} < -1/2 is only reachable by quadrature for d >= 2"
                )));
            }
            anglesums::beta_angle_sum(n, beta - 0.5, cfg)?
        }
        (Family::BetaPrime, Some(beta)) => {
            if !beta_prime_quadrature_ok(dist.d, beta) {
                return Err(SylvesterError::Domain(format!(
                    "beta = {beta}: the beta-prime integral needs 2*beta > d + (d+2)^-1 = {}",
                    f64::from(dist.d) + 1.0 / f64::from(dist.d + 2)
                )));
            }
            anglesums::beta_prime_angle_sum(n, beta + 0.5, cfg)?
        }
        (_, None) => unreachable!("validated above"),
    };
    Ok(half.scaled(2.0))
}
