//! Cross-checks between the quadrature route, the closed-form registry and
//! the Monte Carlo oracle.
//!
//! Each check returns a [`Check`]; hard checks decide the exit status of
//! `sylvester verify`, report-only checks never do.

use std::f64::consts::PI;
use std::fmt;
use std::time::{Duration, Instant};

use crate::anglesums;
use crate::geomc::{self, McConfig, McResult, SimplicialCone};
use crate::quad::{self, Envelope, EvalResult, QuadratureConfig};
use crate::sylvester::{self, Distribution, Family, Method, Registry};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Report,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Report => "INFO",
        })
    }
}

#[derive(Debug, Clone)]
pub struct Check {
    pub id: u8,
    pub name: &'static str,
    pub status: Status,
    pub detail: String,
    pub elapsed: Duration,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.status != Status::Fail
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} [{:>2}] {} ({:.2}s): {}",
            self.status,
            self.id,
            self.name,
            self.elapsed.as_secs_f64(),
            self.detail
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Basic,
    Full,
}

impl Suite {
    pub fn trials(self) -> u64 {
        match self {
            Suite::Basic => 100_000,
            Suite::Full => 1_000_000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    pub suite: Suite,
    pub seed: u64,
    pub workers: usize,
    pub registry: Registry,
}

impl VerifyOptions {
    pub fn new(suite: Suite, seed: u64) -> Self {
        Self {
            suite,
            seed,
            workers: default_workers(),
            registry: Registry::standard().clone(),
        }
    }

    fn mc(&self, trials: u64) -> McConfig {
        McConfig::new(trials, self.seed).with_workers(self.workers)
    }
}

pub fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

/// Tolerances used by every deterministic check.
pub fn check_config() -> QuadratureConfig {
    QuadratureConfig::with_tolerances(1e-10, 1e-12)
}

fn timed<F: FnOnce() -> (Status, String)>(id: u8, name: &'static str, body: F) -> Check {
    let start = Instant::now();
    let (status, detail) = body();
    Check {
        id,
        name,
        status,
        detail,
        elapsed: start.elapsed(),
    }
}

fn quadrature(dist: &Distribution) -> Result<EvalResult, String> {
    sylvester::sylvester_probability(dist, Method::Quadrature, &check_config())
        .map_err(|e| format!("{}: {e}", dist.label()))
}

#[derive(Clone, Copy)]
enum Tol {
    Abs(f64),
    Rel(f64),
}

/// Compares quadrature against the registry for each distribution; the
/// detail names every failing key.
fn route_agreement(registry: &Registry, dists: &[Distribution], tol: Tol) -> (Status, String) {
    let mut worst = 0.0f64;
    let mut failures = Vec::new();
    for dist in dists {
        let exact = match registry.lookup(dist) {
            Some(Ok(r)) => r.value,
            Some(Err(e)) => {
                failures.push(format!("{}: {e}", dist.label()));
                continue;
            }
            None => {
                failures.push(format!("{}: no registry entry", dist.label()));
                continue;
            }
        };
        let q = match quadrature(dist) {
            Ok(q) => q.value,
            Err(e) => {
                failures.push(e);
                continue;
            }
        };
        let (err, limit) = match tol {
            Tol::Abs(t) => ((q - exact).abs(), t),
            Tol::Rel(t) => (((q - exact) / exact).abs(), t),
        };
        worst = worst.max(err);
        if !(err <= limit) {
            let key = registry
                .find(dist)
                .map(|e| e.key.to_string())
                .unwrap_or_default();
            failures.push(format!(
                "{} (registry key {key}): quadrature {q:.12e} vs closed form {exact:.12e}",
                dist.label()
            ));
        }
    }
    let kind = match tol {
        Tol::Abs(t) => format!("max abs error {worst:.2e} (limit {t:.0e})"),
        Tol::Rel(t) => format!("max rel error {worst:.2e} (limit {t:.0e})"),
    };
    if failures.is_empty() {
        (Status::Pass, kind)
    } else {
        (
            Status::Fail,
            format!("{kind}; mismatches: {}", failures.join("; ")),
        )
    }
}

fn with_deadline(check: Check, limit: Duration) -> Check {
    if check.status == Status::Pass && check.elapsed > limit {
        let detail = format!("{}; exceeded {}s budget", check.detail, limit.as_secs());
        return Check {
            status: Status::Fail,
            detail,
            ..check
        };
    }
    check
}

pub fn gaussian_closed_forms(registry: &Registry) -> Check {
    let dists = [Distribution::gaussian(2), Distribution::gaussian(3)];
    let check = timed(1, "Gaussian closed forms d=2,3", || {
        route_agreement(registry, &dists, Tol::Abs(1e-8))
    });
    with_deadline(check, Duration::from_secs(1))
}

pub fn kingman_cross_check(registry: &Registry) -> Check {
    let dists: Vec<_> = (2..=8).map(|d| Distribution::beta(d, 0.0)).collect();
    let check = timed(2, "uniform ball (beta=0) d=2..8", || {
        route_agreement(registry, &dists, Tol::Rel(1e-6))
    });
    with_deadline(check, Duration::from_secs(30))
}

pub fn beta_one_cross_check(registry: &Registry) -> Check {
    let dists: Vec<_> = (2..=6).map(|d| Distribution::beta(d, 1.0)).collect();
    timed(3, "beta=1 d=2..6", || {
        route_agreement(registry, &dists, Tol::Rel(1e-6))
    })
}

pub fn registry_tables(registry: &Registry) -> Check {
    let mut dists: Vec<_> = (2..=5).map(|d| Distribution::beta(d, -0.5)).collect();
    dists.extend((2..=4).map(|d| Distribution::beta(d, 0.5)));
    timed(4, "arcsine d=2..5 and semispherical d=2..4", || {
        route_agreement(registry, &dists, Tol::Abs(1e-6))
    })
}

pub fn beta_prime_special(registry: &Registry) -> Check {
    let dists: Vec<_> = (2..=8)
        .map(|d| Distribution::beta_prime(d, f64::from(d) / 2.0 + 1.0))
        .collect();
    timed(5, "beta-prime beta=d/2+1 d=2..8", || {
        route_agreement(registry, &dists, Tol::Rel(1e-6))
    })
}

/// Beta grid for the `d = 1` check (quadrature needs `beta >= -1/2` there).
pub const LINE_BETA_GRID: [f64; 6] = [-0.5, -0.2, 0.0, 0.7, 2.5, 10.0];
/// Beta-prime grid for the `d = 1` check (above the threshold `2/3`).
pub const LINE_BETA_PRIME_GRID: [f64; 5] = [0.7, 1.0, 1.5, 3.0, 10.0];

pub fn degenerate_endpoints() -> Check {
    timed(6, "p_1 = 1 and sphere limit", || {
        let mut dists = vec![Distribution::gaussian(1)];
        dists.extend(LINE_BETA_GRID.iter().map(|&b| Distribution::beta(1, b)));
        dists.extend(
            LINE_BETA_PRIME_GRID
                .iter()
                .map(|&b| Distribution::beta_prime(1, b)),
        );
        let mut failures = Vec::new();
        let mut worst_line = 0.0f64;
        for dist in &dists {
            match quadrature(dist) {
                Ok(r) => {
                    worst_line = worst_line.max((r.value - 1.0).abs());
                    if !((r.value - 1.0).abs() <= 1e-8) {
                        failures.push(format!("{} = {:.12}", dist.label(), r.value));
                    }
                }
                Err(e) => failures.push(e),
            }
        }
        let mut worst_sphere = 0.0f64;
        for d in 2..=4 {
            let dist = Distribution::beta(d, -1.0);
            match quadrature(&dist) {
                Ok(r) => {
                    worst_sphere = worst_sphere.max(r.value.abs());
                    if !(r.value.abs() <= 1e-6) {
                        failures.push(format!("{} = {:.3e}", dist.label(), r.value));
                    }
                }
                Err(e) => failures.push(e),
            }
        }
        let detail =
            format!("max |p_1 - 1| = {worst_line:.2e}, max |p_d(-1)| = {worst_sphere:.2e}");
        if failures.is_empty() {
            (Status::Pass, detail)
        } else {
            (Status::Fail, format!("{detail}; {}", failures.join("; ")))
        }
    })
}

pub fn gaussian_limit() -> Check {
    timed(7, "Gaussian limit of beta and beta-prime", || {
        let mut parts = Vec::new();
        let mut ok = true;
        for d in [2u32, 3] {
            let gauss = match quadrature(&Distribution::gaussian(d)) {
                Ok(r) => r.value,
                Err(e) => return (Status::Fail, e),
            };
            for family in [Family::Beta, Family::BetaPrime] {
                let gap = |beta: f64| -> Result<f64, String> {
                    let dist =
                        Distribution::new(family, d, Some(beta)).map_err(|e| e.to_string())?;
                    Ok((quadrature(&dist)?.value - gauss).abs())
                };
                match (gap(10.0), gap(100.0)) {
                    (Ok(g10), Ok(g100)) => {
                        ok &= g100 < 0.02 && g100 < g10;
                        parts.push(format!(
                            "{family} d={d}: gap(10)={g10:.2e} gap(100)={g100:.2e}"
                        ));
                    }
                    (Err(e), _) | (_, Err(e)) => return (Status::Fail, e),
                }
            }
        }
        (
            if ok { Status::Pass } else { Status::Fail },
            parts.join(", "),
        )
    })
}

/// The nine Monte Carlo configurations: each family for `d = 2, 3, 4`.
pub fn triangulation_configs() -> Vec<Distribution> {
    let mut out = Vec::new();
    for d in 2..=4 {
        out.push(Distribution::gaussian(d));
        out.push(Distribution::beta(d, 0.0));
        out.push(Distribution::beta_prime(d, f64::from(d) / 2.0 + 1.0));
    }
    out
}

fn within(estimate: &McResult, truth: f64, sigmas: f64) -> bool {
    (estimate.estimate - truth).abs() <= sigmas * estimate.stderr
}

pub fn monte_carlo_triangulation(opts: &VerifyOptions) -> Check {
    let check = timed(8, "Monte Carlo vs deterministic values", || {
        let mut ok = true;
        let mut parts = Vec::new();
        for dist in triangulation_configs() {
            let exact = match sylvester::sylvester_probability_with(
                &opts.registry,
                &dist,
                Method::Auto,
                &check_config(),
            ) {
                Ok(r) => r.value,
                Err(e) => return (Status::Fail, format!("{}: {e}", dist.label())),
            };
            let mc = match geomc::estimate_sylvester(&dist, &opts.mc(opts.suite.trials())) {
                Ok(r) => r,
                Err(e) => return (Status::Fail, format!("{}: {e}", dist.label())),
            };
            let z = (mc.estimate - exact) / mc.stderr;
            if !within(&mc, exact, 4.0) {
                ok = false;
                parts.push(format!(
                    "{}: MC {:.6} vs {exact:.6} (z = {z:.2}) OUT",
                    dist.label(),
                    mc.estimate
                ));
            } else {
                parts.push(format!("{}: z = {z:.2}", dist.label()));
            }
        }
        (
            if ok { Status::Pass } else { Status::Fail },
            parts.join(", "),
        )
    });
    with_deadline(check, Duration::from_secs(600))
}

/// Standard basis vectors `e_1, ..., e_n` of `R^n`.
pub fn standard_simplex(n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect()
}

pub fn projection_identity(opts: &VerifyOptions) -> Check {
    timed(9, "projection identity on [e1..e4]", || {
        let vertices = standard_simplex(4);
        let apex = &vertices[3];
        let generators = vertices[..3]
            .iter()
            .map(|v| v.iter().zip(apex).map(|(a, b)| a - b).collect())
            .collect();
        let cone = match SimplicialCone::new(generators) {
            Ok(c) => c,
            Err(e) => return (Status::Fail, e.to_string()),
        };
        let trials = opts.suite.trials();
        let proj = geomc::projection_experiment(&vertices, &opts.mc(trials));
        let angle = geomc::estimate_cone_angle(
            &cone,
            &McConfig::new(trials, opts.seed ^ 0x9e37_79b9).with_workers(opts.workers),
        );
        let target = anglesums::gaussian_angle_sum(4, &check_config()).map(|j| 2.0 * j.value / 4.0);
        let (proj, angle, target) = match (proj, angle, target) {
            (Ok(p), Ok(a), Ok(t)) => (p, a, t),
            (Err(e), _, _) | (_, Err(e), _) => return (Status::Fail, e.to_string()),
            (_, _, Err(e)) => return (Status::Fail, e.to_string()),
        };
        let doubled = 2.0 * angle.estimate;
        let combined = proj.stderr.hypot(2.0 * angle.stderr);
        let ok = (proj.estimate - doubled).abs() <= 4.0 * combined
            && within(&proj, target, 4.0)
            && (doubled - target).abs() <= 4.0 * 2.0 * angle.stderr;
        let detail = format!(
            "projection {:.6} ± {:.1e}, 2·cone {doubled:.6} ± {:.1e}, 2·J_4/4 = {target:.7}",
            proj.estimate,
            proj.stderr,
            2.0 * angle.stderr
        );
        (if ok { Status::Pass } else { Status::Fail }, detail)
    })
}

pub fn reproducibility(opts: &VerifyOptions) -> Check {
    timed(10, "worker-count independence", || {
        let dist = Distribution::gaussian(2);
        let trials = opts.suite.trials();
        let mut counts = Vec::new();
        for workers in [1, 2, 8] {
            match geomc::estimate_sylvester(
                &dist,
                &McConfig::new(trials, opts.seed).with_workers(workers),
            ) {
                Ok(r) => counts.push(r.successes),
                Err(e) => return (Status::Fail, e.to_string()),
            }
        }
        let ok = counts.windows(2).all(|w| w[0] == w[1]);
        (
            if ok { Status::Pass } else { Status::Fail },
            format!("successes for workers 1, 2, 8: {counts:?}"),
        )
    })
}

/// An integrand with a known integral over the real line or `[0, ∞)`.
#[derive(Debug, Clone, Copy)]
pub struct HonestyCase {
    pub name: &'static str,
    pub f: fn(f64) -> f64,
    pub envelope: Envelope,
    pub truth: f64,
    pub half_line: bool,
}

impl HonestyCase {
    pub fn integrate(&self, cfg: &QuadratureConfig) -> Result<EvalResult, quad::QuadError> {
        if self.half_line {
            quad::integrate_half_line(self.f, &self.envelope, cfg)
        } else {
            quad::integrate_line(self.f, &self.envelope, cfg)
        }
    }
}

fn gauss(x: f64) -> f64 {
    (-0.5 * x * x).exp()
}

/// Twenty integrands with closed-form integrals.
pub fn honesty_suite() -> Vec<HonestyCase> {
    let s2p = (2.0 * PI).sqrt();
    let line = |name, f, envelope, truth| HonestyCase {
        name,
        f,
        envelope,
        truth,
        half_line: false,
    };
    let half = |name, f, envelope, truth| HonestyCase {
        name,
        f,
        envelope,
        truth,
        half_line: true,
    };
    let g = Envelope::gaussian(1.0);
    let sech = |rate: f64| Envelope::exponential(rate).with_constant(2f64.powf(rate));
    vec![
        line("exp(-x^2/2)", gauss, g, s2p),
        line(
            "x^2 exp(-x^2/2)",
            |x| x * x * gauss(x),
            g.with_degree(2.0),
            s2p,
        ),
        line(
            "x^4 exp(-x^2/2)",
            |x| x.powi(4) * gauss(x),
            g.with_degree(4.0),
            3.0 * s2p,
        ),
        line(
            "cos(x) exp(-x^2/2)",
            |x| x.cos() * gauss(x),
            g,
            s2p * (-0.5f64).exp(),
        ),
        line(
            "cos(5x) exp(-x^2/2)",
            |x| (5.0 * x).cos() * gauss(x),
            g.with_resolution(0.2),
            s2p * (-12.5f64).exp(),
        ),
        line(
            "x sin(x) exp(-x^2/2)",
            |x| x * x.sin() * gauss(x),
            g.with_degree(1.0),
            s2p * (-0.5f64).exp(),
        ),
        line("x exp(-x^2/2)", |x| x * gauss(x), g.with_degree(1.0), 0.0),
        line(
            "exp(-50x^2)",
            |x| (-50.0 * x * x).exp(),
            Envelope::gaussian(0.1),
            0.1 * s2p,
        ),
        line(
            "exp(-x^2/50)",
            |x| (-x * x / 50.0).exp(),
            Envelope::gaussian(5.0),
            5.0 * s2p,
        ),
        line(
            "exp(-x^2+x)",
            |x| (x - x * x).exp(),
            g.with_constant(0.5f64.exp()),
            PI.sqrt() * 0.25f64.exp(),
        ),
        line(
            "exp(-x^2/2)/(1+x^2)",
            |x| gauss(x) / (1.0 + x * x),
            g,
            PI * 0.5f64.exp() * libm::erfc(std::f64::consts::FRAC_1_SQRT_2),
        ),
        line("sech(x)", |x| 1.0 / x.cosh(), sech(1.0), PI),
        line("sech(x)^2", |x| x.cosh().powi(-2), sech(2.0), 2.0),
        line("sech(x)^4", |x| x.cosh().powi(-4), sech(4.0), 4.0 / 3.0),
        line(
            "cos(x) sech(x)",
            |x| x.cos() / x.cosh(),
            sech(1.0),
            PI / (PI / 2.0).cosh(),
        ),
        line(
            "cos(2x) sech(x)",
            |x| (2.0 * x).cos() / x.cosh(),
            sech(1.0),
            PI / PI.cosh(),
        ),
        line(
            "x^2 sech(x)",
            |x| x * x / x.cosh(),
            sech(1.0).with_degree(2.0),
            PI.powi(3) / 4.0,
        ),
        half("exp(-x^2/2) on [0,inf)", gauss, g, (PI / 2.0).sqrt()),
        half(
            "sech(x)^2 on [0,inf)",
            |x| x.cosh().powi(-2),
            sech(2.0),
            1.0,
        ),
        half(
            "cos(x) sech(x) on [0,inf)",
            |x| x.cos() / x.cosh(),
            sech(1.0),
            PI / (2.0 * (PI / 2.0).cosh()),
        ),
    ]
}

/// Tolerance settings the honesty suite is run under.
pub fn honesty_configs() -> [QuadratureConfig; 3] {
    [
        QuadratureConfig::with_tolerances(1e-6, 1e-8),
        QuadratureConfig::with_tolerances(1e-10, 1e-12),
        QuadratureConfig::with_tolerances(1e-13, 1e-15),
    ]
}

pub fn error_honesty() -> Check {
    timed(11, "quadrature error estimates are honest", || {
        let mut failures = Vec::new();
        let mut worst_ratio = 0.0f64;
        let mut count = 0;
        for cfg in honesty_configs() {
            for case in honesty_suite() {
                count += 1;
                match case.integrate(&cfg) {
                    Ok(r) => {
                        let err = (r.value - case.truth).abs();
                        if r.abs_error_estimate > 0.0 {
                            worst_ratio = worst_ratio.max(err / r.abs_error_estimate);
                        }
                        if !(err <= 3.0 * r.abs_error_estimate) {
                            failures.push(format!(
                                "{} at rel_tol {:.0e}: error {err:.2e} > 3 × {:.2e}",
                                case.name, cfg.rel_tol, r.abs_error_estimate
                            ));
                        }
                    }
                    Err(e) => failures.push(format!("{}: {e}", case.name)),
                }
            }
        }
        let detail = format!("{count} integrations, max error/estimate = {worst_ratio:.3}");
        if failures.is_empty() {
            (Status::Pass, detail)
        } else {
            (Status::Fail, format!("{detail}; {}", failures.join("; ")))
        }
    })
}

fn linspace(a: f64, b: f64, points: usize) -> impl Iterator<Item = f64> {
    (0..points).map(move |i| a + (b - a) * i as f64 / (points - 1) as f64)
}

/// Counts adjacent pairs on a 30-point grid that break the expected direction.
fn monotone_violations(
    family: Family,
    d: u32,
    grid: impl Iterator<Item = f64>,
) -> Result<usize, String> {
    let mut values = Vec::new();
    for beta in grid {
        let dist = Distribution::new(family, d, Some(beta)).map_err(|e| e.to_string())?;
        values.push(quadrature(&dist)?.value);
    }
    let increasing = family == Family::Beta;
    Ok(values
        .windows(2)
        .filter(|w| if increasing { w[1] < w[0] } else { w[1] > w[0] })
        .count())
}

pub fn monotonicity_and_cauchy() -> Check {
    timed(
        12,
        "monotonicity sweep and Cauchy ratios (report only)",
        || {
            let mut parts = Vec::new();
            for d in [2u32, 3] {
                let df = f64::from(d);
                let beta_grid = linspace(-0.95, 10.0, 30);
                let lo = 0.5 * (df + 1.0 / (df + 2.0)) + 0.02;
                let prime_grid = linspace(lo, lo + 12.0, 30);
                for (family, grid) in [
                    (
                        Family::Beta,
                        Box::new(beta_grid) as Box<dyn Iterator<Item = f64>>,
                    ),
                    (Family::BetaPrime, Box::new(prime_grid)),
                ] {
                    match monotone_violations(family, d, grid) {
                        Ok(v) => parts.push(format!("{family} d={d}: {v} violations")),
                        Err(e) => parts.push(format!("{family} d={d}: {e}")),
                    }
                }
            }
            let ratios: Vec<String> = (2..=8u32)
                .map(|d| {
                    let dist = Distribution::beta_prime(d, (f64::from(d) + 1.0) / 2.0);
                    match quadrature(&dist) {
                        Ok(r) => format!(
                            "d={d}: {:.4}",
                            r.value / sylvester::cauchy_asymptotic(d).value
                        ),
                        Err(e) => format!("d={d}: {e}"),
                    }
                })
                .collect();
            parts.push(format!("Cauchy ratios {}", ratios.join(", ")));
            (Status::Report, parts.join("; "))
        },
    )
}

/// Every check in order.
pub fn run_suite(opts: &VerifyOptions) -> Vec<Check> {
    let reg = &opts.registry;
    vec![
        gaussian_closed_forms(reg),
        kingman_cross_check(reg),
        beta_one_cross_check(reg),
        registry_tables(reg),
        beta_prime_special(reg),
        degenerate_endpoints(),
        gaussian_limit(),
        monte_carlo_triangulation(opts),
        projection_identity(opts),
        reproducibility(opts),
        error_honesty(),
        monotonicity_and_cauchy(),
    ]
}
