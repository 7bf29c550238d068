//! Monte Carlo geometric oracle.
//!
//! Samples point clouds from the three families, decides simplex-ness by
//! barycentric membership tests, and estimates solid angles of simplicial
//! cones both directly and through random projections.
//!
//! Trial `i` draws from its own ChaCha8 stream (`seed`, stream `i`), so an
//! estimate depends only on `(seed, trials)`. Workers take contiguous blocks
//! of trial indices and return integer success counts.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta as BetaLaw, Distribution as _, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sylvester::{Distribution, Family, SylvesterError};

/// Relative condition bound beyond which a linear system counts as degenerate.
pub const TAU_RANK: f64 = 1e-12;
/// Barycentric coordinates down to `-TAU_INSIDE · (1 + ‖M‖)` count as inside.
pub const TAU_INSIDE: f64 = 1e-12;
/// Resampling attempts per trial before giving up.
pub const MAX_RETRIES: u32 = 100;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeomError {
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("degenerate configuration (condition estimate {condition:.3e})")]
    Degenerate { condition: f64 },
    #[error("trial {trial}: still degenerate after {MAX_RETRIES} resamples")]
    RetriesExhausted { trial: u64 },
    #[error("trial {trial}: {count} points each lie inside the hull of the others")]
    Exclusivity { trial: u64, count: usize },
    #[error(transparent)]
    Distribution(#[from] SylvesterError),
}

pub type Result<T> = std::result::Result<T, GeomError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct McConfig {
    pub trials: u64,
    pub seed: u64,
    pub workers: usize,
}

impl McConfig {
    pub fn new(trials: u64, seed: u64) -> Self {
        Self {
            trials,
            seed,
            workers: 1,
        }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(GeomError::Invalid("trials must be positive".into()));
        }
        if self.workers == 0 {
            return Err(GeomError::Invalid("workers must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McResult {
    pub estimate: f64,
    pub stderr: f64,
    pub successes: u64,
    pub trials: u64,
    pub seed: u64,
}

impl McResult {
    fn from_counts(successes: u64, trials: u64, seed: u64) -> Self {
        let estimate = successes as f64 / trials as f64;
        Self {
            estimate,
            stderr: (estimate * (1.0 - estimate) / trials as f64).sqrt(),
            successes,
            trials,
            seed,
        }
    }
}

/// The generator for trial `index`.
pub fn trial_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Runs `trial` for every index in `0..mc.trials` across `mc.workers`
/// threads and counts successes.
fn run_trials<F>(mc: &McConfig, trial: F) -> Result<McResult>
where
    F: Fn(u64, &mut ChaCha8Rng) -> Result<bool> + Sync,
{
    mc.validate()?;
    let workers = (mc.workers as u64).min(mc.trials);
    let block = mc.trials.div_ceil(workers);
    let counts: Vec<Result<u64>> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let trial = &trial;
                scope.spawn(move || {
                    let start = w * block;
                    let end = (start + block).min(mc.trials);
                    let mut hits = 0;
                    for i in start..end {
                        let mut rng = trial_rng(mc.seed, i);
                        if trial(i, &mut rng)? {
                            hits += 1;
                        }
                    }
                    Ok(hits)
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("Monte Carlo worker panicked"))
            .collect()
    });
    let mut successes = 0;
    for c in counts {
        successes += c?;
    }
    Ok(McResult::from_counts(successes, mc.trials, mc.seed))
}

/// Ordered points in `R^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    d: usize,
    points: Vec<Vec<f64>>,
}

impl PointCloud {
    pub fn new(d: usize, points: Vec<Vec<f64>>) -> Result<Self> {
        if let Some(bad) = points.iter().find(|p| p.len() != d) {
            return Err(GeomError::Invalid(format!(
                "point with {} coordinates in a {d}-dimensional cloud",
                bad.len()
            )));
        }
        Ok(Self { d, points })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    /// Applies `x -> A x + b` to every point.
    pub fn map_affine(&self, a: &DMatrix<f64>, b: &DVector<f64>) -> Self {
        let points = self
            .points
            .iter()
            .map(|p| (a * DVector::from_column_slice(p) + b).as_slice().to_vec())
            .collect();
        Self { d: self.d, points }
    }
}

/// Draws points from one [`Distribution`] by radial decomposition.
#[derive(Debug, Clone)]
pub struct PointSampler {
    d: usize,
    radial: Radial,
}

#[derive(Debug, Clone)]
enum Radial {
    Gaussian,
    Sphere,
    /// `R² ~ Beta(d/2, β+1)`
    Beta(BetaLaw<f64>),
    /// `R² = V / (1 - V)`, `V ~ Beta(d/2, β - d/2)`
    BetaPrime(BetaLaw<f64>),
}

impl PointSampler {
    pub fn new(dist: &Distribution) -> Result<Self> {
        dist.validate()?;
        let half_d = f64::from(dist.d) / 2.0;
        let law = |a: f64, b: f64| {
            BetaLaw::new(a, b)
                .map_err(|e| GeomError::Invalid(format!("radial law Beta({a}, {b}): {e}")))
        };
        let radial = match (dist.family, dist.beta) {
            (Family::Gaussian, _) => Radial::Gaussian,
            (Family::Beta, Some(-1.0)) => Radial::Sphere,
            (Family::Beta, Some(b)) => Radial::Beta(law(half_d, b + 1.0)?),
            (Family::BetaPrime, Some(b)) => Radial::BetaPrime(law(half_d, b - half_d)?),
            (_, None) => unreachable!("validated above"),
        };
        Ok(Self {
            d: dist.d as usize,
            radial,
        })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let mut x: Vec<f64> = (0..self.d).map(|_| rng.sample(StandardNormal)).collect();
        let radius = match &self.radial {
            Radial::Gaussian => return x,
            Radial::Sphere => 1.0,
            Radial::Beta(law) => law.sample(rng).sqrt(),
            Radial::BetaPrime(law) => loop {
                let v = law.sample(rng);
                if v < 1.0 {
                    break (v / (1.0 - v)).sqrt();
                }
            },
        };
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        for v in &mut x {
            *v *= radius / norm;
        }
        x
    }

    /// Squared radius only, for checking the radial law.
    pub fn sample_radius_squared<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.sample(rng).iter().map(|v| v * v).sum()
    }
}

/// One draw from `dist`.
pub fn sample_point<R: Rng + ?Sized>(dist: &Distribution, rng: &mut R) -> Result<Vec<f64>> {
    Ok(PointSampler::new(dist)?.sample(rng))
}

fn norm1(m: &DMatrix<f64>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Inverse of `m` with a 1-norm condition check against [`TAU_RANK`].
fn checked_inverse(m: DMatrix<f64>) -> Result<(DMatrix<f64>, f64)> {
    let norm = norm1(&m);
    let inv = m.try_inverse().ok_or(GeomError::Degenerate {
        condition: f64::INFINITY,
    })?;
    let condition = norm * norm1(&inv);
    if !(condition <= 1.0 / TAU_RANK) {
        return Err(GeomError::Degenerate { condition });
    }
    Ok((inv, norm))
}

/// Barycentric coordinates of `x` with respect to `vertices` (d+1 points in `R^d`).
pub fn barycentric(x: &[f64], vertices: &[&[f64]]) -> Result<(Vec<f64>, f64)> {
    let d = x.len();
    if vertices.len() != d + 1 || vertices.iter().any(|v| v.len() != d) {
        return Err(GeomError::Invalid(format!(
            "need {} vertices with {d} coordinates each",
            d + 1
        )));
    }
    let m = DMatrix::from_fn(
        d + 1,
        d + 1,
        |r, c| if r < d { vertices[c][r] } else { 1.0 },
    );
    let (inv, norm) = checked_inverse(m)?;
    let mut rhs = DVector::from_column_slice(x).push(1.0);
    rhs = inv * rhs;
    Ok((rhs.as_slice().to_vec(), norm))
}

/// Whether `x` lies in the simplex spanned by `vertices`; the boundary
/// counts as inside.
pub fn is_inside_simplex(x: &[f64], vertices: &[&[f64]]) -> Result<bool> {
    let (lambda, norm) = barycentric(x, vertices)?;
    let tau = TAU_INSIDE * (1.0 + norm);
    Ok(lambda.iter().all(|&l| l >= -tau))
}

/// Whether the convex hull of `d + 2` points in `R^d` is a simplex, i.e.
/// whether one point lies in the hull of the others.
pub fn hull_is_simplex(cloud: &PointCloud) -> Result<bool> {
    let inside = count_inside(cloud)?;
    if inside > 1 {
        return Err(GeomError::Exclusivity {
            trial: u64::MAX,
            count: inside,
        });
    }
    Ok(inside == 1)
}

/// How many points lie in the hull of the remaining ones.
pub fn count_inside(cloud: &PointCloud) -> Result<usize> {
    let pts = cloud.points();
    if pts.len() != cloud.dim() + 2 {
        return Err(GeomError::Invalid(format!(
            "need d + 2 = {} points, got {}",
            cloud.dim() + 2,
            pts.len()
        )));
    }
    let mut inside = 0;
    for i in 0..pts.len() {
        let others: Vec<&[f64]> = pts
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, p)| p.as_slice())
            .collect();
        if is_inside_simplex(&pts[i], &others)? {
            inside += 1;
        }
    }
    Ok(inside)
}

/// Draws the `d + 2` points of trial `index`, resampling on degeneracy.
pub fn draw_trial_cloud(sampler: &PointSampler, seed: u64, index: u64) -> PointCloud {
    let mut rng = trial_rng(seed, index);
    draw_cloud(sampler, &mut rng)
}

fn draw_cloud<R: Rng + ?Sized>(sampler: &PointSampler, rng: &mut R) -> PointCloud {
    let points = (0..sampler.d + 2).map(|_| sampler.sample(rng)).collect();
    PointCloud {
        d: sampler.d,
        points,
    }
}

/// Monte Carlo estimate of the probability that `d + 2` i.i.d. points from
/// `dist` form a simplex.
pub fn estimate_sylvester(dist: &Distribution, mc: &McConfig) -> Result<McResult> {
    let sampler = PointSampler::new(dist)?;
    if dist.d == 1 && dist.family == Family::Beta && dist.beta == Some(-1.0) {
        return Err(GeomError::Invalid(
            "beta = -1 in d = 1 puts all mass on two points; trials are degenerate".into(),
        ));
    }
    run_trials(mc, |i, rng| {
        for _ in 0..MAX_RETRIES {
            let cloud = draw_cloud(&sampler, rng);
            match count_inside(&cloud) {
                Ok(0) => return Ok(false),
                Ok(1) => return Ok(true),
                Ok(count) => return Err(GeomError::Exclusivity { trial: i, count }),
                Err(GeomError::Degenerate { .. }) => continue,
                Err(e) => return Err(e),
            }
        }
        Err(GeomError::RetriesExhausted { trial: i })
    })
}

/// Positive hull of linearly independent generators.
#[derive(Debug, Clone)]
pub struct SimplicialCone {
    generators: Vec<Vec<f64>>,
    // Inverse of the generators' coordinates in an orthonormal basis of lin C.
    coords_inv: DMatrix<f64>,
    norm: f64,
}

impl SimplicialCone {
    pub fn new(generators: Vec<Vec<f64>>) -> Result<Self> {
        let k = generators.len();
        let m = generators.first().map_or(0, Vec::len);
        if k == 0 || k > m || generators.iter().any(|g| g.len() != m) {
            return Err(GeomError::Invalid(format!(
                "need 1 <= k <= m generators of equal length m (k = {k}, m = {m})"
            )));
        }
        let g = DMatrix::from_fn(m, k, |r, c| generators[c][r]);
        let r = g.qr().r();
        let (coords_inv, norm) = checked_inverse(r)?;
        Ok(Self {
            generators,
            coords_inv,
            norm,
        })
    }

    pub fn generators(&self) -> &[Vec<f64>] {
        &self.generators
    }

    pub fn dim(&self) -> usize {
        self.generators.len()
    }

    /// Whether the direction with coordinates `u` in the basis of lin C lies in the cone.
    fn contains_coords(&self, u: DVector<f64>) -> bool {
        let c = &self.coords_inv * u;
        let tau = TAU_INSIDE * (1.0 + self.norm);
        c.iter().all(|&v| v >= -tau)
    }
}

/// Monte Carlo estimate of the solid angle of `cone`, measured inside its
/// linear hull.
pub fn estimate_cone_angle(cone: &SimplicialCone, mc: &McConfig) -> Result<McResult> {
    let k = cone.dim();
    run_trials(mc, |_, rng| {
        let u = DVector::from_fn(k, |_, _| rng.sample::<f64, _>(StandardNormal));
        Ok(cone.contains_coords(u))
    })
}

/// Coordinates of `n + 1` affinely independent points in their own affine
/// hull, with the last point at the origin.
fn intrinsic_coordinates(vertices: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let count = vertices.len();
    if count < 3 {
        return Err(GeomError::Invalid(format!(
            "need at least 3 vertices (got {count}); projecting a segment leaves a point"
        )));
    }
    let n = count - 1;
    let m = vertices[0].len();
    if m < n || vertices.iter().any(|v| v.len() != m) {
        return Err(GeomError::Invalid(format!(
            "{count} vertices need at least {n} coordinates each"
        )));
    }
    let last = &vertices[n];
    let edges = DMatrix::from_fn(m, n, |r, c| vertices[c][r] - last[r]);
    let r = edges.qr().r();
    checked_inverse(r.clone())?;
    let mut coords: Vec<Vec<f64>> = (0..n)
        .map(|c| r.column(c).iter().copied().collect())
        .collect();
    coords.push(vec![0.0; n]);
    Ok(coords)
}

/// Projects `x` onto `u^⊥` and returns coordinates in a basis of `u^⊥`
/// (Householder reflection sending `u` to a multiple of the last axis).
fn project_out(x: &[f64], v: &[f64], vv: f64) -> Vec<f64> {
    let dot: f64 = x.iter().zip(v).map(|(a, b)| a * b).sum();
    let scale = 2.0 * dot / vv;
    let n = x.len();
    (0..n - 1).map(|i| x[i] - scale * v[i]).collect()
}

/// Probability, over a uniform random direction `U`, that the projection
/// of the last vertex onto `U^⊥` lies in the hull of the other projected
/// vertices. Equals twice the solid angle of the simplex at that vertex.
pub fn projection_experiment(vertices: &[Vec<f64>], mc: &McConfig) -> Result<McResult> {
    let coords = intrinsic_coordinates(vertices)?;
    let n = coords.len() - 1;
    run_trials(mc, |i, rng| {
        for _ in 0..MAX_RETRIES {
            let mut u: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
            let norm = u.iter().map(|a| a * a).sum::<f64>().sqrt();
            u.iter_mut().for_each(|a| *a /= norm);
            let mut v = u.clone();
            v[n - 1] += if u[n - 1] >= 0.0 { 1.0 } else { -1.0 };
            let vv: f64 = v.iter().map(|a| a * a).sum();

            let projected: Vec<Vec<f64>> = coords.iter().map(|x| project_out(x, &v, vv)).collect();
            let others: Vec<&[f64]> = projected[..n].iter().map(Vec::as_slice).collect();
            match is_inside_simplex(&projected[n], &others) {
                Ok(inside) => return Ok(inside),
                Err(GeomError::Degenerate { .. }) => continue,
                Err(e) => return Err(e),
            }
        }
        Err(GeomError::RetriesExhausted { trial: i })
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const TRIANGLE: [&[f64]; 3] = [&[0.0, 0.0], &[1.0, 0.0], &[0.0, 1.0]];

    #[test]
    fn inside_simplex_examples() {
        assert!(is_inside_simplex(&[0.25, 0.25], &TRIANGLE).unwrap());
        assert!(!is_inside_simplex(&[1.0, 1.0], &TRIANGLE).unwrap());
        assert!(is_inside_simplex(&[0.0, 0.0], &TRIANGLE).unwrap());
        let (lambda, _) = barycentric(&[0.25, 0.25], &TRIANGLE).unwrap();
        for (got, want) in lambda.iter().zip([0.5, 0.25, 0.25]) {
            assert!((got - want).abs() < 1e-15);
        }
    }

    #[test]
    fn degenerate_vertices() {
        let flat: [&[f64]; 3] = [&[0.0, 0.0], &[1.0, 1.0], &[2.0, 2.0]];
        assert!(matches!(
            is_inside_simplex(&[0.5, 0.5], &flat),
            Err(GeomError::Degenerate { .. })
        ));
        assert!(matches!(
            is_inside_simplex(&[0.5], &TRIANGLE),
            Err(GeomError::Invalid(_))
        ));
    }

    #[test]
    fn line_is_always_a_simplex() {
        let mc = McConfig::new(100_000, 3);
        let r = estimate_sylvester(&Distribution::beta(1, 0.0), &mc).unwrap();
        assert_eq!(r.estimate, 1.0);
        assert_eq!(r.successes, 100_000);
        assert_eq!(r.stderr, 0.0);
    }

    #[test]
    fn beta_points_stay_in_ball() {
        let mut rng = trial_rng(11, 0);
        for (d, beta) in [(2, 0.0), (3, -0.7), (5, 2.5), (2, -1.0)] {
            let sampler = PointSampler::new(&Distribution::beta(d, beta)).unwrap();
            for _ in 0..10_000 {
                assert!(sampler.sample_radius_squared(&mut rng) <= 1.0 + 1e-15);
            }
        }
    }

    #[test]
    fn radial_means() {
        // E|x|² = 1/2 for Beta(1, 1); E[V/(1-V)] = 1 for V ~ Beta(1, 2).
        let draws = 1_000_000u64;
        for (dist, mean, var) in [
            (Distribution::beta(2, 0.0), 0.5, 1.0 / 12.0),
            (Distribution::beta_prime(2, 3.0), 1.0, f64::NAN),
        ] {
            let sampler = PointSampler::new(&dist).unwrap();
            let mut rng = trial_rng(5, 1);
            let xs: Vec<f64> = (0..draws)
                .map(|_| sampler.sample_radius_squared(&mut rng))
                .collect();
            let m = xs.iter().sum::<f64>() / draws as f64;
            let var = if var.is_nan() {
                xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (draws - 1) as f64
            } else {
                var
            };
            let se = (var / draws as f64).sqrt();
            assert!(
                (m - mean).abs() < 4.0 * se,
                "{}: mean {m}, se {se}",
                dist.label()
            );
        }
    }

    #[test]
    fn quarter_plane_and_wedge() {
        let mc = McConfig::new(200_000, 9);
        for (gens, want) in [
            (vec![vec![1.0, 0.0], vec![0.0, 1.0]], 0.25),
            (vec![vec![1.0, 0.0], vec![1.0, 1.0]], 0.125),
        ] {
            let cone = SimplicialCone::new(gens).unwrap();
            let r = estimate_cone_angle(&cone, &mc).unwrap();
            assert!(
                (r.estimate - want).abs() < 4.0 * r.stderr,
                "{r:?} vs {want}"
            );
        }
    }

    #[test]
    fn cone_rank_check() {
        let e = SimplicialCone::new(vec![vec![1.0, 1.0], vec![2.0, 2.0]]).unwrap_err();
        assert!(matches!(e, GeomError::Degenerate { .. }));
        assert!(SimplicialCone::new(vec![vec![1.0], vec![2.0]]).is_err());
    }

    #[test]
    fn projection_of_triangle() {
        let mc = McConfig::new(200_000, 4);
        let tri = vec![
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ];
        let r = projection_experiment(&tri, &mc).unwrap();
        assert!((r.estimate - 1.0 / 3.0).abs() < 4.0 * r.stderr, "{r:?}");
        let seg = vec![vec![0.0, 0.0], vec![1.0, 0.0]];
        assert!(matches!(
            projection_experiment(&seg, &mc),
            Err(GeomError::Invalid(_))
        ));
    }

    #[test]
    fn worker_count_does_not_matter() {
        let dist = Distribution::gaussian(2);
        let base = estimate_sylvester(&dist, &McConfig::new(20_001, 77)).unwrap();
        for w in [2, 3, 8] {
            let r = estimate_sylvester(&dist, &McConfig::new(20_001, 77).with_workers(w)).unwrap();
            assert_eq!(r, base);
        }
    }

    #[test]
    fn sphere_points_never_form_a_simplex() {
        let r = estimate_sylvester(
            &Distribution::beta(2, -1.0),
            &McConfig::new(20_000, 1).with_workers(2),
        )
        .unwrap();
        assert_eq!(r.successes, 0);
        assert!(estimate_sylvester(&Distribution::beta(1, -1.0), &McConfig::new(10, 1)).is_err());
    }
}
