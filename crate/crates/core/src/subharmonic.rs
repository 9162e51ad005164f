//! Numerical evidence for the submean value inequality.
//!
//! A function `u` is subharmonic with radius `R` when
//! `u(x) ≤ σ(B(x, r))^{-1} ∫_{B(x, r)} u dσ` for every `r < R`. The checks
//! here estimate the ball mean, compare it with the center value and report
//! the `margin = mean − u(x)` together with an error estimate. Verdicts are
//! decided at `k` standard errors (default 4): a margin below `−k·se` is a
//! failure, margins all above `+k·se` are strict, anything else passes.
//!
//! Monte Carlo means use antithetic pairs `x ± z`, which removes the linear
//! part of `u` from the estimator; the remaining noise scales like the
//! second-order term that the margin measures. Tensor rules use polar
//! Gauss–Legendre products on tori and, on the sphere, the reduction of a
//! cap mean of a zonal function to one integral over the colatitude.

use std::f64::consts::{PI, TAU};

use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::energy::{potential, serialize_extended, DiagonalPolicy};
use crate::error::{Error, Result};
use crate::geometry::{
    ball_volume, distance, euclidean_ball_offset, sphere_exp, sphere_frame, uniform_point, wrap_angle, Point,
    Space,
};
use crate::kernels::{riesz_eval, KernelSpec, ProfileSpec};
use crate::measures::Measure;
use crate::quadrature::{composite, gauss_legendre};
use crate::rng;
use crate::sum::pairwise_sum;

/// Default number of standard errors for verdicts.
pub const DEFAULT_K_SIGMA: f64 = 4.0;

/// Smallest ball radius used by scans, and the gap kept from the singularity.
pub const MIN_RADIUS: f64 = 1e-3;

pub const SEMICONTINUITY_ASSUMPTION: &str =
    "upper semi-continuity of the scanned functions is assumed, not tested";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "lowercase")]
pub enum Quadrature {
    /// Antithetic Monte Carlo with `n` evaluations.
    Mc { n: usize, seed: u64 },
    /// Product Gauss rule with `n` nodes per axis; the error estimate is the
    /// difference to the rule with `n / 2` nodes.
    Tensor { n: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BallMean {
    pub mean: f64,
    pub stderr: f64,
}

fn mc_stats(pair_means: &[f64]) -> BallMean {
    let m = pair_means.len() as f64;
    let mean = pairwise_sum(pair_means) / m;
    let dev: Vec<f64> = pair_means.iter().map(|v| (v - mean).powi(2)).collect();
    let var = if pair_means.len() > 1 { pairwise_sum(&dev) / (m - 1.0) } else { 0.0 };
    BallMean { mean, stderr: (var / m).sqrt() }
}

/// Mean of `f` over the Euclidean ball `B(center, r) ⊂ R^d` (Lebesgue).
pub fn euclidean_ball_mean(center: &[f64], r: f64, quad: Quadrature, f: impl Fn(&[f64]) -> f64) -> Result<BallMean> {
    let d = center.len();
    match quad {
        Quadrature::Mc { n, seed } => {
            if n < 2 {
                return Err(Error::invalid("Monte Carlo ball means need n ≥ 2"));
            }
            let mut rng = rng::stream(seed, 0);
            let mut z = vec![0.0; d];
            let mut a = vec![0.0; d];
            let mut b = vec![0.0; d];
            let pairs: Vec<f64> = (0..n / 2)
                .map(|_| {
                    euclidean_ball_offset(d, r, &mut rng, &mut z);
                    for i in 0..d {
                        a[i] = center[i] + z[i];
                        b[i] = center[i] - z[i];
                    }
                    0.5 * (f(&a) + f(&b))
                })
                .collect();
            Ok(mc_stats(&pairs))
        }
        Quadrature::Tensor { n } => {
            if n < 4 {
                return Err(Error::invalid("tensor ball means need n ≥ 4"));
            }
            let fine = polar_mean(center, r, n, &f)?;
            let coarse = polar_mean(center, r, n / 2, &f)?;
            Ok(BallMean { mean: fine, stderr: (fine - coarse).abs() })
        }
    }
}

/// Polar product rule for the ball mean in dimensions 1 to 3.
fn polar_mean(center: &[f64], r: f64, n: usize, f: &impl Fn(&[f64]) -> f64) -> Result<f64> {
    let d = center.len();
    let (rx, rw) = gauss_legendre(n);
    let mut terms = Vec::new();
    match d {
        1 => {
            let (x, w) = composite(-r, r, 2, n);
            for (x, w) in x.iter().zip(&w) {
                terms.push(w * f(&[center[0] + x]));
            }
            Ok(pairwise_sum(&terms) / (2.0 * r))
        }
        2 => {
            let m = 2 * n;
            for (x, w) in rx.iter().zip(&rw) {
                let rho = 0.5 * r * (x + 1.0);
                let wr = 0.5 * r * w * rho;
                for k in 0..m {
                    let th = TAU * k as f64 / m as f64;
                    let p = [center[0] + rho * th.cos(), center[1] + rho * th.sin()];
                    terms.push(wr * TAU / m as f64 * f(&p));
                }
            }
            Ok(pairwise_sum(&terms) / (PI * r * r))
        }
        3 => {
            let m = 2 * n;
            for (x, w) in rx.iter().zip(&rw) {
                let rho = 0.5 * r * (x + 1.0);
                let wr = 0.5 * r * w * rho * rho;
                for (c, wc) in rx.iter().zip(&rw) {
                    let s = (1.0 - c * c).sqrt();
                    for k in 0..m {
                        let ph = TAU * k as f64 / m as f64;
                        let p = [
                            center[0] + rho * s * ph.cos(),
                            center[1] + rho * s * ph.sin(),
                            center[2] + rho * c,
                        ];
                        terms.push(wr * wc * TAU / m as f64 * f(&p));
                    }
                }
            }
            Ok(pairwise_sum(&terms) / (4.0 / 3.0 * PI * r.powi(3)))
        }
        _ => Err(Error::invalid("tensor ball means support dimensions 1 to 3; use Monte Carlo")),
    }
}

/// Mean of `f` over the geodesic ball `B(center, r)` of `space` with respect to σ.
pub fn ball_mean(center: &Point, r: f64, quad: Quadrature, f: impl Fn(&[f64]) -> f64) -> Result<BallMean> {
    ball_volume(center.space(), r)?;
    match center.space() {
        Space::Torus(_) | Space::Circle => {
            let wrapped = |y: &[f64]| {
                let w: Vec<f64> = y.iter().map(|c| wrap_angle(*c)).collect();
                f(&w)
            };
            euclidean_ball_mean(center.coords(), r, quad, wrapped)
        }
        Space::Sphere2 => sphere_cap_mean(center.coords(), r, quad, f),
    }
}

fn sphere_cap_mean(c: &[f64], r: f64, quad: Quadrature, f: impl Fn(&[f64]) -> f64) -> Result<BallMean> {
    let frame = sphere_frame(c);
    let cr = r.cos();
    match quad {
        Quadrature::Mc { n, seed } => {
            if n < 2 {
                return Err(Error::invalid("Monte Carlo ball means need n ≥ 2"));
            }
            let mut rng = rng::stream(seed, 0);
            let pairs: Vec<f64> = (0..n / 2)
                .map(|_| {
                    let z: f64 = cr + (1.0 - cr) * rng.random::<f64>();
                    let t = z.clamp(-1.0, 1.0).acos();
                    let phi = rng.random::<f64>() * TAU;
                    let a = sphere_exp(c, &frame, t, phi);
                    let b = sphere_exp(c, &frame, t, phi + PI);
                    0.5 * (f(&a) + f(&b))
                })
                .collect();
            Ok(mc_stats(&pairs))
        }
        Quadrature::Tensor { n } => {
            let rule = |n: usize| {
                let (tx, tw) = composite(0.0, r, 2, n);
                let m = 2 * n;
                let mut terms = Vec::new();
                for (t, w) in tx.iter().zip(&tw) {
                    for k in 0..m {
                        let phi = TAU * k as f64 / m as f64;
                        terms.push(w * t.sin() * TAU / m as f64 * f(&sphere_exp(c, &frame, *t, phi)));
                    }
                }
                pairwise_sum(&terms) / (TAU * (1.0 - cr))
            };
            let fine = rule(n);
            Ok(BallMean { mean: fine, stderr: (fine - rule(n / 2)).abs() })
        }
    }
}

/// Cap mean of a zonal function `g(θ)` (θ = angle to the pole `y`) over the
/// cap of radius `r` around a point at angle `rho` from `y`.
///
/// The cap meets the circle of colatitude θ in an arc of half-angle
/// `α(θ)` with `cos r = cos θ cos ρ + sin θ sin ρ cos α`, so the mean is
/// `∫ g(θ) 2α(θ) sin θ dθ / (2π (1 − cos r))`. The substitution
/// `θ = ρ − r cos φ` removes the square-root endpoint behavior of α.
pub fn zonal_cap_mean(g: impl Fn(f64) -> f64, rho: f64, r: f64, n: usize) -> f64 {
    let (x, w) = composite(0.0, PI, 2, n);
    let (sr, cr) = (rho.sin(), rho.cos());
    let mut terms = Vec::with_capacity(x.len());
    for (phi, wp) in x.iter().zip(&w) {
        let theta = rho - r * phi.cos();
        if theta <= 0.0 || theta >= PI {
            // the cap wraps past a pole: the whole latitude circle lies inside
            let th = theta.abs().min(TAU - theta.abs());
            terms.push(wp * r * phi.sin() * g(th) * TAU * th.sin());
            continue;
        }
        let denom = theta.sin() * sr;
        let cos_a = if denom > 0.0 { ((r.cos() - theta.cos() * cr) / denom).clamp(-1.0, 1.0) } else { 1.0 };
        let alpha = cos_a.acos();
        terms.push(wp * r * phi.sin() * g(theta) * 2.0 * alpha * theta.sin());
    }
    pairwise_sum(&terms) / (TAU * (1.0 - r.cos()))
}

/// One submean comparison for `K(·, y)` on `B(x, r)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubmeanSample {
    pub center: Vec<f64>,
    pub source: Vec<f64>,
    pub distance: f64,
    pub radius: f64,
    pub mean_estimate: f64,
    pub mean_stderr: f64,
    pub value_at_center: f64,
    pub margin: f64,
}

impl SubmeanSample {
    /// Error scale used for verdicts, floored at round-off level.
    pub fn error_scale(&self) -> f64 {
        self.mean_stderr.max(1e-12 * (1.0 + self.value_at_center.abs()))
    }

    /// Margin in units of [`SubmeanSample::error_scale`].
    pub fn z_score(&self) -> f64 {
        self.margin / self.error_scale()
    }
}

/// Estimates `mean_{B(x, r)} K(·, y) − K(x, y)`.
pub fn submean_check(kernel: &KernelSpec, y: &Point, x: &Point, r: f64, quad: Quadrature) -> Result<SubmeanSample> {
    let space = x.space();
    kernel.validate_for(space)?;
    let dist = distance(x, y)?;
    ball_volume(space, r)?;
    if dist <= r {
        return Err(Error::Precondition(format!(
            "ball of radius {r} around x reaches the source at distance {dist}"
        )));
    }
    let value = kernel.eval_coords(space, x.coords(), y.coords());
    let yc = y.coords().to_vec();
    let mean = match (space, quad) {
        (Space::Sphere2, Quadrature::Tensor { n }) => {
            if n < 4 {
                return Err(Error::invalid("tensor ball means need n ≥ 4"));
            }
            let pole = y.coords();
            let g = |theta: f64| {
                let p = sphere_exp(pole, &sphere_frame(pole), theta, 0.0);
                kernel.eval_coords(space, &p, pole)
            };
            let fine = zonal_cap_mean(g, dist, r, n);
            let coarse = zonal_cap_mean(g, dist, r, n / 2);
            BallMean { mean: fine, stderr: (fine - coarse).abs() }
        }
        _ => ball_mean(x, r, quad, |z| kernel.eval_coords(space, z, &yc))?,
    };
    Ok(SubmeanSample {
        center: x.coords().to_vec(),
        source: yc,
        distance: dist,
        radius: r,
        mean_estimate: mean.mean,
        mean_stderr: mean.stderr,
        value_at_center: value,
        margin: mean.mean - value,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Passes,
    StrictlyPasses,
    Fails,
}

impl Verdict {
    pub fn from_samples<'a>(samples: impl IntoIterator<Item = &'a SubmeanSample>, k: f64) -> Verdict {
        let mut strict = true;
        let mut any = false;
        for s in samples {
            any = true;
            let z = s.z_score();
            if z < -k {
                return Verdict::Fails;
            }
            if z <= k {
                strict = false;
            }
        }
        if any && strict {
            Verdict::StrictlyPasses
        } else {
            Verdict::Passes
        }
    }

    pub fn is_pass(&self) -> bool {
        !matches!(self, Verdict::Fails)
    }
}

/// Quadrature choice for scans; Monte Carlo seeds are derived per sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "lowercase")]
pub enum ScanQuadrature {
    Mc { n: usize },
    Tensor { n: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScanConfig {
    pub radius_bound: f64,
    pub n_pairs: usize,
    pub radii_per_pair: usize,
    pub quadrature: ScanQuadrature,
    pub k_sigma: f64,
    pub seed: u64,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig {
            radius_bound: 0.5,
            n_pairs: 250,
            radii_per_pair: 4,
            quadrature: ScanQuadrature::Mc { n: 20_000 },
            k_sigma: DEFAULT_K_SIGMA,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubharmonicityReport {
    pub kernel: KernelSpec,
    pub space: Space,
    pub radius_bound: f64,
    pub k_sigma: f64,
    pub seed: u64,
    pub quadrature: ScanQuadrature,
    pub samples: Vec<SubmeanSample>,
    pub worst_margin: f64,
    pub worst_z: f64,
    /// Sample with the most negative standardized margin.
    pub witness: Option<SubmeanSample>,
    pub verdict: Verdict,
    pub confidence: String,
    pub assumptions: Vec<String>,
}

impl SubharmonicityReport {
    /// CSV with columns `x…, y…, distance, r, margin, stderr`.
    pub fn write_samples_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        let k = self.space.coord_len();
        let mut header: Vec<String> = (1..=k).map(|i| format!("x{i}")).collect();
        header.extend((1..=k).map(|i| format!("y{i}")));
        header.extend(["distance", "r", "margin", "stderr"].map(String::from));
        wtr.write_record(&header)?;
        for s in &self.samples {
            let mut row: Vec<String> = s.center.iter().chain(&s.source).map(|v| v.to_string()).collect();
            row.extend([s.distance, s.radius, s.margin, s.mean_stderr].map(|v| v.to_string()));
            wtr.write_record(&row)?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Random point at geodesic distance `t` (up to wrapping) from `y`.
fn point_at_distance(space: Space, y: &Point, t: f64, rng: &mut rng::Rng) -> Result<Point> {
    match space {
        Space::Sphere2 => {
            let phi = rng.random::<f64>() * TAU;
            let p = sphere_exp(y.coords(), &sphere_frame(y.coords()), t, phi);
            Point::sphere_normalized(p)
        }
        _ => {
            let d = space.coord_len();
            let dir: Vec<f64> = (0..d).map(|_| StandardNormal.sample(rng)).collect();
            let n = dir.iter().map(|v: &f64| v * v).sum::<f64>().sqrt();
            let c: Vec<f64> = y.coords().iter().zip(&dir).map(|(c, v)| c + t * v / n).collect();
            Point::on(space, &c)
        }
    }
}

/// Scans `K(·, y)` for the submean inequality over random `(x, y, r)`.
///
/// Pairs are stratified in the distance `d(x, y)` over `(2·MIN_RADIUS, diam]`
/// and radii are log-uniform in `[MIN_RADIUS, min(R, d(x, y) − MIN_RADIUS)]`.
pub fn scan_entire_subharmonicity(kernel: &KernelSpec, space: Space, cfg: &ScanConfig) -> Result<SubharmonicityReport> {
    kernel.validate_for(space)?;
    let r_cap = match space {
        Space::Sphere2 => PI,
        _ => PI - 1e-9,
    };
    if !(cfg.radius_bound > MIN_RADIUS && cfg.radius_bound <= r_cap) {
        return Err(Error::range(format!("radius bound {} outside ({MIN_RADIUS}, {r_cap}]", cfg.radius_bound)));
    }
    if cfg.n_pairs == 0 || cfg.radii_per_pair == 0 {
        return Err(Error::invalid("scan needs at least one pair and one radius"));
    }
    let diam = space.diameter();
    let lo = 2.0 * MIN_RADIUS + 1e-9;
    let jobs: Vec<(usize, usize)> =
        (0..cfg.n_pairs).flat_map(|p| (0..cfg.radii_per_pair).map(move |k| (p, k))).collect();
    let samples: Vec<SubmeanSample> = jobs
        .par_iter()
        .map(|&(p, k)| -> Result<SubmeanSample> {
            let mut prng = rng::stream(cfg.seed, p as u64);
            let y = uniform_point(space, &mut prng);
            let t = lo + (diam - lo) * (p as f64 + prng.random::<f64>()) / cfg.n_pairs as f64;
            let x = point_at_distance(space, &y, t, &mut prng)?;
            let dist = distance(&x, &y)?;
            let dist = if dist > lo { dist } else { lo };
            let x = if distance(&x, &y)? > lo { x } else { point_at_distance(space, &y, lo, &mut prng)? };
            let mut rrng = rng::stream(cfg.seed, ((p as u64) << 20) | (k as u64 + 1));
            let hi = cfg.radius_bound.min(dist - MIN_RADIUS);
            let r = MIN_RADIUS * (hi / MIN_RADIUS).powf(rrng.random::<f64>());
            let quad = match cfg.quadrature {
                ScanQuadrature::Mc { n } => {
                    Quadrature::Mc { n, seed: rng::derive_seed(cfg.seed, (p * cfg.radii_per_pair + k) as u64) }
                }
                ScanQuadrature::Tensor { n } => Quadrature::Tensor { n },
            };
            submean_check(kernel, &y, &x, r, quad)
        })
        .collect::<Result<_>>()?;
    let verdict = Verdict::from_samples(&samples, cfg.k_sigma);
    let worst_margin = samples.iter().map(|s| s.margin).fold(f64::INFINITY, f64::min);
    let witness = samples
        .iter()
        .min_by(|a, b| a.z_score().total_cmp(&b.z_score()))
        .cloned();
    let worst_z = witness.as_ref().map_or(f64::NAN, |w| w.z_score());
    let confidence = match cfg.quadrature {
        ScanQuadrature::Mc { n } => format!(
            "antithetic Monte Carlo, {n} evaluations per ball; verdicts at {} standard errors over {} samples",
            cfg.k_sigma,
            samples.len()
        ),
        ScanQuadrature::Tensor { n } => format!(
            "product Gauss rule with {n} nodes per axis; error = difference to {} nodes; verdicts at {} error units",
            n / 2,
            cfg.k_sigma
        ),
    };
    Ok(SubharmonicityReport {
        kernel: kernel.clone(),
        space,
        radius_bound: cfg.radius_bound,
        k_sigma: cfg.k_sigma,
        seed: cfg.seed,
        quadrature: cfg.quadrature,
        samples,
        worst_margin,
        worst_z,
        witness,
        verdict,
        confidence,
        assumptions: vec![
            SEMICONTINUITY_ASSUMPTION.to_string(),
            "evidence over finitely many radii and pairs, not a proof".to_string(),
        ],
    })
}

// ---------------------------------------------------------------------------
// profile conditions

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionResult {
    pub applicable: bool,
    pub passes: bool,
    pub checked: usize,
    pub worst: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProfileConditionReport {
    pub profile: ProfileSpec,
    /// Continuity in the extended sense is taken from the tabulation.
    pub continuity_assumed: bool,
    pub subharmonic: ConditionResult,
    pub decreasing_at_pi: ConditionResult,
    pub riesz_equivalent: ConditionResult,
    pub all_pass: bool,
    pub assumptions: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProfileCheckConfig {
    /// Ball centers tested for subharmonicity.
    pub centers: usize,
    /// Largest Euclidean ball radius.
    pub max_radius: f64,
    pub mc_n: usize,
    /// Width of the slab `π − x_i < slice_width` tested for strict decrease.
    pub slice_width: f64,
    pub slice_samples: usize,
    pub certificate_samples: usize,
    pub k_sigma: f64,
    pub seed: u64,
}

impl Default for ProfileCheckConfig {
    fn default() -> Self {
        ProfileCheckConfig {
            centers: 200,
            max_radius: 0.1,
            mc_n: 4000,
            slice_width: 0.05,
            slice_samples: 200,
            certificate_samples: 500,
            k_sigma: DEFAULT_K_SIGMA,
            seed: 0,
        }
    }
}

/// Spot-checks the profile conditions under which the product kernel
/// `f(d(x_1, y_1), …)` has σ as a minimizer: subharmonicity of `f` on the
/// cube minus the origin (Lebesgue ball means), strict decrease toward `π`
/// in every coordinate, and the Riesz-equivalence certificate near 0.
pub fn check_profile_conditions(p: &ProfileSpec, cfg: &ProfileCheckConfig) -> Result<ProfileConditionReport> {
    p.validate()?;
    let d = p.dim;
    let mut rng = rng::stream(cfg.seed, 0);

    // subharmonicity on the cube minus the origin
    let mut samples = Vec::with_capacity(cfg.centers);
    for i in 0..cfg.centers {
        let rmax = cfg.max_radius.min(PI / 4.0);
        let r = MIN_RADIUS * (rmax / MIN_RADIUS).powf(rng.random::<f64>());
        let c: Vec<f64> = loop {
            let c: Vec<f64> = (0..d).map(|_| r + (PI - 2.0 * r) * rng.random::<f64>()).collect();
            if c.iter().map(|v| v * v).sum::<f64>().sqrt() > 2.0 * r {
                break c;
            }
        };
        let m = euclidean_ball_mean(&c, r, Quadrature::Mc { n: cfg.mc_n, seed: rng::derive_seed(cfg.seed, i as u64) }, |u| p.eval(u))?;
        let v = p.eval(&c);
        samples.push(SubmeanSample {
            center: c,
            source: vec![0.0; d],
            distance: f64::NAN,
            radius: r,
            mean_estimate: m.mean,
            mean_stderr: m.stderr,
            value_at_center: v,
            margin: m.mean - v,
        });
    }
    let sub_verdict = Verdict::from_samples(&samples, cfg.k_sigma);
    let worst_z = samples.iter().map(|s| s.z_score()).fold(f64::INFINITY, f64::min);
    let subharmonic = ConditionResult {
        applicable: true,
        passes: sub_verdict.is_pass(),
        checked: samples.len(),
        worst: worst_z,
        detail: format!("worst standardized submean margin {worst_z:.3} (fail below −{})", cfg.k_sigma),
    };

    // strict decrease at π
    let mut worst_gap = f64::INFINITY;
    let mut checked = 0;
    for axis in 0..d {
        for _ in 0..cfg.slice_samples {
            let mut x: Vec<f64> = (0..d).map(|_| PI * rng.random::<f64>()).collect();
            x[axis] = PI - cfg.slice_width * (1.0 - rng.random::<f64>());
            if x.iter().all(|v| *v == 0.0) {
                continue;
            }
            let mut at_pi = x.clone();
            at_pi[axis] = PI;
            let gap = p.eval(&x) - p.eval(&at_pi);
            worst_gap = worst_gap.min(gap);
            checked += 1;
        }
    }
    let decreasing_at_pi = ConditionResult {
        applicable: true,
        passes: worst_gap > 0.0,
        checked,
        worst: worst_gap,
        detail: format!("min f(x) − f(x with x_i = π) over the slab of width {}: {worst_gap:e}", cfg.slice_width),
    };

    // Riesz equivalence near the origin
    let riesz_equivalent = match (p.singular_at_zero, p.riesz_equivalence) {
        (false, _) => ConditionResult {
            applicable: false,
            passes: true,
            checked: 0,
            worst: f64::NAN,
            detail: "profile is finite at the origin".into(),
        },
        (true, None) => return Err(Error::invalid("singular profile without a Riesz-equivalence certificate")),
        (true, Some(cert)) => {
            let mut worst = f64::INFINITY;
            let reach = cert.r.min(PI);
            for _ in 0..cfg.certificate_samples {
                let dir: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut rng)).map(|v: f64| v.abs()).collect();
                let n = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
                let rad = reach * rng.random::<f64>().powf(1.0 / d as f64);
                let y: Vec<f64> = dir.iter().map(|v| v / n * rad).collect();
                let ks = riesz_eval(cert.s, rad);
                let f = p.eval(&y);
                if !(ks.is_finite() && f.is_finite()) || rad == 0.0 {
                    continue;
                }
                let slack = 1e-12 * ks.abs().max(1.0);
                let lower = f - cert.c1 * ks + slack;
                let upper = cert.c2 * ks - f + slack;
                worst = worst.min(lower.min(upper));
            }
            ConditionResult {
                applicable: true,
                passes: worst >= 0.0,
                checked: cfg.certificate_samples,
                worst,
                detail: format!(
                    "c1 K_s ≤ f ≤ c2 K_s on B(0, {}) with (c1, c2, s) = ({}, {}, {})",
                    cert.r, cert.c1, cert.c2, cert.s
                ),
            }
        }
    };

    let all_pass = subharmonic.passes && decreasing_at_pi.passes && riesz_equivalent.passes;
    Ok(ProfileConditionReport {
        profile: p.clone(),
        continuity_assumed: true,
        subharmonic,
        decreasing_at_pi,
        riesz_equivalent,
        all_pass,
        assumptions: vec![
            "continuity in the extended sense is assumed from the tabulation".into(),
            SEMICONTINUITY_ASSUMPTION.into(),
        ],
    })
}

// ---------------------------------------------------------------------------
// first maximum principle

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaxPrincipleReport {
    pub probes: usize,
    pub mesh: f64,
    /// `M`: max of the potential over probes within `mesh` of the support.
    #[serde(serialize_with = "serialize_extended")]
    pub near_support_max: f64,
    #[serde(serialize_with = "serialize_extended")]
    pub off_support_max: f64,
    pub violation: f64,
    pub tolerance: f64,
    pub argmax: Vec<f64>,
    pub argmax_distance_to_support: f64,
    pub attained_near_support: bool,
    pub infinite_probes: usize,
    pub passes: bool,
}

/// Probe points covering `space` and the matching mesh size.
pub fn probe_points(space: Space, probe: usize) -> Result<(Vec<Point>, f64)> {
    if probe < 2 {
        return Err(Error::invalid("probe resolution must be at least 2"));
    }
    match space {
        Space::Torus(_) | Space::Circle => {
            let d = space.dim();
            let g = crate::measures::GridMeasure::zeros(d, probe)?;
            let pts = (0..g.len()).map(|i| Point::on(space, &g.cell_center(i))).collect::<Result<_>>()?;
            Ok((pts, g.cell_width() * (d as f64).sqrt()))
        }
        Space::Sphere2 => {
            let n = probe * probe;
            let golden = PI * (3.0 - 5f64.sqrt());
            let pts = (0..n)
                .map(|i| {
                    let z = 1.0 - (2.0 * i as f64 + 1.0) / n as f64;
                    let rho = (1.0 - z * z).sqrt();
                    let th = golden * i as f64;
                    Point::sphere_normalized([rho * th.cos(), rho * th.sin(), z])
                })
                .collect::<Result<_>>()?;
            Ok((pts, (4.0 * PI / n as f64).sqrt() * 2f64.sqrt()))
        }
    }
}

/// Compares the potential's maximum near `supp μ` with its maximum elsewhere.
pub fn max_principle_check(kernel: &KernelSpec, mu: &Measure, probe: usize, tolerance: f64) -> Result<MaxPrincipleReport> {
    if !mu.is_unsigned() {
        return Err(Error::invalid("the maximum principle check needs an unsigned measure"));
    }
    let space = mu.space();
    kernel.validate_for(space)?;
    let support: Vec<Vec<f64>> = match mu {
        Measure::Discrete(m) => m.support().into_iter().map(|p| p.coords().to_vec()).collect(),
        Measure::Grid(g) => g.support_cells().into_iter().map(|i| g.cell_center(i)).collect(),
    };
    if support.is_empty() {
        return Err(Error::invalid("measure has empty support"));
    }
    let (probes, mesh) = probe_points(space, probe)?;
    let evals: Vec<(f64, f64)> = probes
        .par_iter()
        .map(|p| -> Result<(f64, f64)> {
            let u = match mu {
                Measure::Grid(_) => crate::energy::potential_with(kernel, mu, p, DiagonalPolicy::AnalyticCell)?,
                _ => potential(kernel, mu, p)?,
            };
            let dist = support
                .iter()
                .map(|s| space.distance_coords(p.coords(), s))
                .fold(f64::INFINITY, f64::min);
            Ok((u, dist))
        })
        .collect::<Result<_>>()?;
    let mut near = f64::NEG_INFINITY;
    let mut off = f64::NEG_INFINITY;
    let mut best = (f64::NEG_INFINITY, 0usize);
    let mut infinite = 0;
    for (i, (u, dist)) in evals.iter().enumerate() {
        if u.is_infinite() {
            infinite += 1;
        }
        if *dist <= mesh {
            near = near.max(*u);
        } else {
            off = off.max(*u);
        }
        if *u > best.0 {
            best = (*u, i);
        }
    }
    let violation = if off == f64::NEG_INFINITY || near == f64::INFINITY { 0.0 } else { (off - near).max(0.0) };
    let (_, arg) = best;
    Ok(MaxPrincipleReport {
        probes: probes.len(),
        mesh,
        near_support_max: near,
        off_support_max: off,
        violation,
        tolerance,
        argmax: probes[arg].coords().to_vec(),
        argmax_distance_to_support: evals[arg].1,
        attained_near_support: evals[arg].1 <= mesh,
        infinite_probes: infinite,
        passes: violation <= tolerance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::ProfileSpec;

    #[test]
    fn affine_profile_has_zero_margin() {
        // f(t) = π − t on T^1 with y far from the ball on the non-wrapped side
        let k = KernelSpec::product(ProfileSpec::affine(PI, vec![1.0]).unwrap());
        let y = Point::torus(&[0.0]).unwrap();
        let x = Point::torus(&[1.5]).unwrap();
        for quad in [Quadrature::Mc { n: 2000, seed: 1 }, Quadrature::Tensor { n: 16 }] {
            let s = submean_check(&k, &y, &x, 0.3, quad).unwrap();
            assert!(s.margin.abs() <= 4.0 * s.error_scale(), "{s:?}");
        }
    }

    #[test]
    fn ball_touching_source_is_rejected() {
        let k = KernelSpec::riesz(1.0);
        let y = Point::torus(&[0.0, 0.0]).unwrap();
        let x = Point::torus(&[0.2, 0.0]).unwrap();
        assert!(matches!(
            submean_check(&k, &y, &x, 0.3, Quadrature::Tensor { n: 8 }),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn zonal_cap_mean_of_constant_and_linear_cosine() {
        // mean of cos θ over a cap around a point at angle ρ equals cos ρ (1 + cos r)/2
        let (rho, r) = (0.9, 0.4);
        let m = zonal_cap_mean(|t| t.cos(), rho, r, 32);
        assert!((m - rho.cos() * (1.0 + r.cos()) / 2.0).abs() < 1e-12, "{m}");
        assert!((zonal_cap_mean(|_| 1.0, rho, r, 32) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sphere_tensor_and_mc_agree() {
        let k = KernelSpec::riesz(-1.0);
        let y = Point::sphere([0.0, 0.0, 1.0]).unwrap();
        let x = Point::sphere_normalized([1.0, 0.0, 1.0]).unwrap();
        let t = submean_check(&k, &y, &x, 0.1, Quadrature::Tensor { n: 32 }).unwrap();
        let m = submean_check(&k, &y, &x, 0.1, Quadrature::Mc { n: 20_000, seed: 9 }).unwrap();
        assert!((t.mean_estimate - m.mean_estimate).abs() < 4.0 * (m.mean_stderr + t.mean_stderr) + 1e-12);
        assert!(t.margin < 0.0);
    }

    #[test]
    fn verdict_rules() {
        let mk = |margin: f64| SubmeanSample {
            center: vec![],
            source: vec![],
            distance: 1.0,
            radius: 0.1,
            mean_estimate: margin,
            mean_stderr: 1.0,
            value_at_center: 0.0,
            margin,
        };
        assert_eq!(Verdict::from_samples(&[mk(5.0), mk(6.0)], 4.0), Verdict::StrictlyPasses);
        assert_eq!(Verdict::from_samples(&[mk(5.0), mk(0.0)], 4.0), Verdict::Passes);
        assert_eq!(Verdict::from_samples(&[mk(5.0), mk(-4.5)], 4.0), Verdict::Fails);
    }

    #[test]
    fn profile_conditions_for_simple_profiles() {
        let cfg = ProfileCheckConfig { centers: 50, mc_n: 1000, ..Default::default() };
        let good = check_profile_conditions(&ProfileSpec::affine(PI, vec![1.0]).unwrap(), &cfg).unwrap();
        assert!(good.all_pass, "{good:?}");
        let bad = check_profile_conditions(&ProfileSpec::affine(0.0, vec![-1.0]).unwrap(), &cfg).unwrap();
        assert!(!bad.decreasing_at_pi.passes);
        assert!(!bad.all_pass);
    }
}
