//! N-point energy minimization on the torus and uniformity diagnostics.
//!
//! The objective is the normalized off-diagonal energy
//! `E(X) = N^{-2} Σ_{i≠j} K(x_i, x_j)`, which converges to the continuous
//! energy of the limiting empirical measure. Two optimizers are provided:
//! wrap-projected gradient descent with a backtracking Armijo search, and
//! single-point Metropolis annealing followed by a compass-search polish.
//! The polish moves points along coordinate axes, which copes with the
//! axis-aligned kinks of the wrapped distance at antipodal offsets.

use std::f64::consts::{PI, TAU};

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{torus_distance_coords, wrap_angle, wrap_offset, Space};
use crate::kernels::{KernelSpec, riesz_eval};
use crate::rng;
use crate::sum::pairwise_sum;

/// Default radius for concentration and cluster metrics.
pub const DEFAULT_DELTA: f64 = 0.05;

/// Concentration threshold separating collapsed projections from spread ones.
pub const CONCENTRATION_THRESHOLD: f64 = 0.95;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "lowercase")]
pub enum Optimizer {
    Gradient {
        #[serde(default = "default_max_iters")]
        max_iters: usize,
        #[serde(default = "default_tol")]
        tol: f64,
        /// Largest coordinate displacement of the first trial step.
        #[serde(default = "default_max_step")]
        max_step: f64,
    },
    Anneal {
        moves: usize,
        #[serde(default)]
        seed: u64,
        /// Initial temperature; estimated from the initial configuration when absent.
        #[serde(default)]
        t0: Option<f64>,
        #[serde(default = "default_true")]
        polish: bool,
    },
}

fn default_max_iters() -> usize {
    5000
}
fn default_tol() -> f64 {
    1e-8
}
fn default_max_step() -> f64 {
    0.1
}
fn default_true() -> bool {
    true
}
fn default_restarts() -> usize {
    1
}
fn default_delta() -> f64 {
    DEFAULT_DELTA
}

impl Optimizer {
    pub fn gradient() -> Self {
        Optimizer::Gradient { max_iters: default_max_iters(), tol: default_tol(), max_step: default_max_step() }
    }

    pub fn anneal(moves: usize, seed: u64) -> Self {
        Optimizer::Anneal { moves, seed, t0: None, polish: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Init {
    Random { seed: u64 },
    /// Regular `m^d` lattice; needs `N = m^d`.
    Lattice,
    Custom { points: Vec<Vec<f64>> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimizeConfig {
    pub kernel: KernelSpec,
    pub space: Space,
    #[serde(alias = "N")]
    pub n: usize,
    pub optimizer: Optimizer,
    pub init: Init,
    /// Independent chains; chain `r > 0` derives its seeds from `(seed, r)`.
    #[serde(default = "default_restarts")]
    pub restarts: usize,
    #[serde(default = "default_delta")]
    pub delta: f64,
}

impl MinimizeConfig {
    pub fn new(kernel: KernelSpec, space: Space, n: usize, optimizer: Optimizer, init: Init) -> Self {
        MinimizeConfig { kernel, space, n, optimizer, init, restarts: 1, delta: DEFAULT_DELTA }
    }

    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts;
        self
    }

    fn dim(&self) -> Result<usize> {
        self.space
            .torus_dim()
            .ok_or_else(|| Error::invalid(format!("minimization runs on a torus, not {}", self.space)))
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.dim()?;
        self.kernel.validate_for(self.space)?;
        if self.n < 2 {
            return Err(Error::invalid("minimization needs N ≥ 2"));
        }
        if self.restarts == 0 {
            return Err(Error::invalid("restarts must be at least 1"));
        }
        if !(self.delta > 0.0 && self.delta < PI) {
            return Err(Error::range("delta must lie in (0, π)"));
        }
        match &self.init {
            Init::Lattice => {
                lattice_side(self.n, d)?;
            }
            Init::Custom { points } => {
                if points.len() != self.n || points.iter().any(|p| p.len() != d || p.iter().any(|v| !v.is_finite())) {
                    return Err(Error::invalid(format!("custom init needs {} finite points of dimension {d}", self.n)));
                }
            }
            Init::Random { .. } => {}
        }
        match &self.optimizer {
            Optimizer::Gradient { max_iters, tol, max_step } => {
                if *max_iters == 0 || !(*tol >= 0.0) || !(*max_step > 0.0) {
                    return Err(Error::invalid("gradient optimizer needs max_iters ≥ 1, tol ≥ 0, max_step > 0"));
                }
                let probe = vec![0.3; d];
                self.kernel.gradient_offset(&probe)?;
            }
            Optimizer::Anneal { moves, t0, .. } => {
                if *moves < 2 {
                    return Err(Error::invalid("annealing needs at least 2 moves"));
                }
                if let Some(t) = t0 {
                    if !(*t > 0.0) {
                        return Err(Error::invalid("initial temperature must be positive"));
                    }
                }
            }
        }
        Ok(())
    }
}

fn lattice_side(n: usize, d: usize) -> Result<usize> {
    let m = (n as f64).powf(1.0 / d as f64).round() as usize;
    if m.checked_pow(d as u32) == Some(n) {
        Ok(m)
    } else {
        Err(Error::invalid(format!("lattice init needs N = m^{d}; got {n}")))
    }
}

/// Points of the `m^d` lattice `2πk/m`.
pub fn lattice_points(m: usize, d: usize) -> Vec<Vec<f64>> {
    let total = m.pow(d as u32);
    (0..total)
        .map(|mut flat| {
            let mut p = vec![0.0; d];
            for axis in (0..d).rev() {
                p[axis] = TAU * (flat % m) as f64 / m as f64;
                flat /= m;
            }
            p
        })
        .collect()
}

fn random_points(n: usize, d: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = rng::stream(seed, 0);
    (0..n).map(|_| (0..d).map(|_| rng.random::<f64>() * TAU).collect()).collect()
}

// ---------------------------------------------------------------------------
// objective

/// `N^{-2} Σ_{i≠j} K(x_i, x_j)` with a fixed reduction order.
pub fn normalized_energy(kernel: &KernelSpec, space: Space, points: &[Vec<f64>]) -> f64 {
    let n = points.len();
    let rows: Vec<f64> = points
        .par_iter()
        .enumerate()
        .map(|(i, x)| {
            let mut acc = 0.0;
            for (j, y) in points.iter().enumerate() {
                if i != j {
                    acc += kernel.eval_coords(space, x, y);
                }
            }
            acc
        })
        .collect();
    pairwise_sum(&rows) / (n * n) as f64
}

/// Change of [`normalized_energy`] when point `i` moves to `to`.
fn move_delta(kernel: &KernelSpec, space: Space, points: &[Vec<f64>], i: usize, to: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (j, y) in points.iter().enumerate() {
        if j != i {
            acc += kernel.eval_coords(space, to, y) - kernel.eval_coords(space, &points[i], y);
        }
    }
    2.0 * acc / (points.len() * points.len()) as f64
}

/// Gradient of [`normalized_energy`] for every point.
fn energy_gradient(kernel: &KernelSpec, points: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let n = points.len();
    let scale = 2.0 / (n * n) as f64;
    let finite_diagonal = kernel.singular_exponent().is_none();
    points
        .par_iter()
        .enumerate()
        .map(|(i, x)| {
            let d = x.len();
            let mut g = vec![0.0; d];
            let mut w = vec![0.0; d];
            for (j, y) in points.iter().enumerate() {
                if i == j {
                    continue;
                }
                // offsets are computed once per pair so that w_ji = -w_ij exactly,
                // also on the cut locus
                for k in 0..d {
                    w[k] = if i < j { wrap_offset(x[k] - y[k]) } else { -wrap_offset(y[k] - x[k]) };
                }
                match kernel.gradient_offset(&w) {
                    Ok(gk) => g.iter_mut().zip(&gk).for_each(|(a, b)| *a += b),
                    // coincident points of a kernel finite on the diagonal: zero subgradient
                    Err(Error::SingularGradient) if finite_diagonal => {}
                    Err(e) => return Err(e),
                }
            }
            g.iter_mut().for_each(|v| *v *= scale);
            Ok(g)
        })
        .collect()
}

fn norm(g: &[Vec<f64>]) -> f64 {
    let sq: Vec<f64> = g.iter().map(|v| v.iter().map(|x| x * x).sum()).collect();
    pairwise_sum(&sq).sqrt()
}

// ---------------------------------------------------------------------------
// results

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iter: usize,
    pub energy: f64,
    /// Gradient norm for descent; proposal scale for annealing.
    pub grad_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cluster {
    pub center: Vec<f64>,
    pub mass: f64,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UniformityMetrics {
    pub covering_radius: f64,
    /// Kolmogorov distance between the pair-distance law of the
    /// configuration and the one under the uniform measure.
    pub pair_distance_ks: f64,
    pub projection_concentration: Vec<f64>,
    pub cluster_count: usize,
    pub clusters: Vec<Cluster>,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinimizeResult {
    pub config: MinimizeConfig,
    pub points: Vec<Vec<f64>>,
    pub energy: f64,
    pub initial_energy: f64,
    pub energy_trace: Vec<TraceRow>,
    pub diagnostics: UniformityMetrics,
    pub initial_diagnostics: UniformityMetrics,
    pub converged: bool,
    pub iterations: usize,
    /// Chain that produced the reported configuration.
    pub best_restart: usize,
    pub restart_energies: Vec<f64>,
}

impl MinimizeResult {
    pub fn write_points_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        write_points_csv(&self.points, w)
    }

    pub fn write_trace_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["iter", "energy", "grad_norm"])?;
        for r in &self.energy_trace {
            wtr.write_record([r.iter.to_string(), r.energy.to_string(), r.grad_norm.to_string()])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// One point per row, columns `x1..xd`.
pub fn write_points_csv<W: std::io::Write>(points: &[Vec<f64>], w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    let d = points.first().map_or(0, |p| p.len());
    wtr.write_record((1..=d).map(|i| format!("x{i}")))?;
    for p in points {
        wtr.write_record(p.iter().map(|v| v.to_string()))?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_points_csv<R: std::io::Read>(r: R) -> Result<Vec<Vec<f64>>> {
    let mut rdr = csv::Reader::from_reader(r);
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let p = rec
            .iter()
            .map(|f| f.trim().parse::<f64>().map_err(|e| Error::invalid(format!("bad coordinate {f:?}: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        out.push(p);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// optimizers

struct Chain {
    points: Vec<Vec<f64>>,
    trace: Vec<TraceRow>,
    converged: bool,
    iterations: usize,
}

/// Averages `g` over groups of points whose offset in some coordinate lies
/// within `eps` of `±π`, so a step along the result keeps those
/// near-antipodal gaps fixed. Returns `None` when no gap is active.
fn project_on_kinks(x: &[Vec<f64>], g: &[Vec<f64>], eps: f64) -> Option<Vec<Vec<f64>>> {
    let n = x.len();
    let d = x[0].len();
    let mut out = g.to_vec();
    let mut active = false;
    for k in 0..d {
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], mut i: usize) -> usize {
            while p[i] != i {
                p[i] = p[p[i]];
                i = p[i];
            }
            i
        }
        for i in 0..n {
            for j in i + 1..n {
                if wrap_offset(x[i][k] - x[j][k]).abs() >= PI - eps {
                    active = true;
                    let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
        let mut sum = vec![0.0; n];
        let mut count = vec![0usize; n];
        for i in 0..n {
            let r = find(&mut parent, i);
            sum[r] += g[i][k];
            count[r] += 1;
        }
        for i in 0..n {
            let r = find(&mut parent, i);
            out[i][k] = sum[r] / count[r] as f64;
        }
    }
    active.then_some(out)
}

/// Backtracking Armijo search along `-dir`; the first trial moves the
/// farthest-travelling coordinate by `max_step`.
fn line_search(
    kernel: &KernelSpec,
    space: Space,
    x: &[Vec<f64>],
    e: f64,
    dir: &[Vec<f64>],
    max_step: f64,
) -> Option<(Vec<Vec<f64>>, f64)> {
    let dn = norm(dir);
    let dmax = dir.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    if dmax == 0.0 {
        return None;
    }
    let mut t = max_step / dmax;
    for _ in 0..100 {
        let trial: Vec<Vec<f64>> = x
            .iter()
            .zip(dir)
            .map(|(p, gp)| p.iter().zip(gp).map(|(a, b)| wrap_angle(a - t * b)).collect())
            .collect();
        let et = normalized_energy(kernel, space, &trial);
        if et <= e - 1e-4 * t * dn * dn && et < e {
            return Some((trial, et));
        }
        t *= 0.5;
    }
    None
}

/// Wrap-projected gradient descent. When the plain gradient admits no
/// decrease (the iterate sits on a kink of the wrapped distance), the
/// gradient is projected onto steps that keep near-antipodal gaps fixed,
/// with a widening tolerance.
fn descend(kernel: &KernelSpec, space: Space, mut x: Vec<Vec<f64>>, max_iters: usize, tol: f64, max_step: f64) -> Result<Chain> {
    let mut e = normalized_energy(kernel, space, &x);
    let mut g = energy_gradient(kernel, &x)?;
    let mut gn = norm(&g);
    let mut trace = vec![TraceRow { iter: 0, energy: e, grad_norm: gn }];
    let mut converged = gn <= tol;
    let mut it = 0;
    while !converged && it < max_iters {
        let mut step = line_search(kernel, space, &x, e, &g, max_step).map(|s| (s, gn));
        if step.is_none() {
            for eps in [1e-10, 1e-8, 1e-6, 1e-4, 1e-3] {
                let Some(p) = project_on_kinks(&x, &g, eps) else { continue };
                let pn = norm(&p);
                if pn <= tol {
                    converged = true;
                    break;
                }
                if let Some(s) = line_search(kernel, space, &x, e, &p, max_step) {
                    step = Some((s, pn));
                    break;
                }
            }
        }
        let Some(((nx, ne), used)) = step else { break };
        x = nx;
        e = ne;
        it += 1;
        g = energy_gradient(kernel, &x)?;
        gn = norm(&g);
        trace.push(TraceRow { iter: it, energy: e, grad_norm: used });
        converged = converged || gn <= tol;
    }
    Ok(Chain { points: x, trace, converged, iterations: it })
}

fn anneal(kernel: &KernelSpec, space: Space, mut x: Vec<Vec<f64>>, moves: usize, seed: u64, t0: Option<f64>, polish: bool) -> Chain {
    let n = x.len();
    let d = x[0].len();
    let mut rng = rng::stream(seed, 1);
    let mut proposal = vec![0.0; d];
    let t0 = t0.unwrap_or_else(|| {
        let mut probe = rng::stream(seed, 2);
        let deltas: Vec<f64> = (0..256)
            .map(|k| {
                let i = k % n;
                for (c, p) in proposal.iter_mut().zip(&x[i]) {
                    *c = wrap_angle(p + PI * (2.0 * probe.random::<f64>() - 1.0));
                }
                move_delta(kernel, space, &x, i, &proposal).abs()
            })
            .collect();
        let m = pairwise_sum(&deltas) / deltas.len() as f64;
        if m > 0.0 && m.is_finite() { m } else { 1.0 }
    });
    let mut e = normalized_energy(kernel, space, &x);
    let mut trace = vec![TraceRow { iter: 0, energy: e, grad_norm: PI }];
    let last = (moves - 1) as f64;
    for k in 0..moves {
        let frac = k as f64 / last;
        let scale = PI * (1e-3 / PI).powf(frac);
        let temp = t0 * 1e-6f64.powf(frac);
        let i = rng.random_range(0..n);
        for (c, p) in proposal.iter_mut().zip(&x[i]) {
            *c = wrap_angle(p + scale * (2.0 * rng.random::<f64>() - 1.0));
        }
        let de = move_delta(kernel, space, &x, i, &proposal);
        let u: f64 = rng.random();
        if de.is_finite() && (de <= 0.0 || u < (-de / temp).exp()) {
            x[i].copy_from_slice(&proposal);
            e += de;
        }
        if (k + 1) % n == 0 || k + 1 == moves {
            trace.push(TraceRow { iter: k + 1, energy: e, grad_norm: scale });
        }
    }
    let mut iterations = moves;
    if polish {
        iterations += compass_polish(kernel, space, &mut x);
    }
    let e = normalized_energy(kernel, space, &x);
    trace.push(TraceRow { iter: iterations, energy: e, grad_norm: 0.0 });
    Chain { points: x, trace, converged: true, iterations }
}

/// Axis-aligned pattern search; the step halves whenever a full sweep fails
/// to improve, down to `1e-12`. Returns the number of sweeps.
fn compass_polish(kernel: &KernelSpec, space: Space, x: &mut [Vec<f64>]) -> usize {
    let d = x[0].len();
    let mut h = 1e-2;
    let mut sweeps = 0;
    let mut trial = vec![0.0; d];
    while h >= 1e-12 {
        let mut improved = true;
        let mut rounds = 0;
        while improved && rounds < 200 {
            improved = false;
            rounds += 1;
            sweeps += 1;
            for i in 0..x.len() {
                for axis in 0..d {
                    for sign in [1.0, -1.0] {
                        trial.copy_from_slice(&x[i]);
                        trial[axis] = wrap_angle(trial[axis] + sign * h);
                        if move_delta(kernel, space, x, i, &trial) < 0.0 {
                            x[i].copy_from_slice(&trial);
                            improved = true;
                        }
                    }
                }
            }
        }
        h *= 0.5;
    }
    sweeps
}

/// Runs all chains of `config` and returns the lowest-energy one.
pub fn minimize_points(config: &MinimizeConfig) -> Result<MinimizeResult> {
    config.validate()?;
    let d = config.dim()?;
    let space = Space::Torus(d);
    let kernel = &config.kernel;
    let chains: Vec<(Vec<Vec<f64>>, Chain)> = (0..config.restarts)
        .into_par_iter()
        .map(|r| -> Result<_> {
            let chain_seed = |s: u64| if r == 0 { s } else { rng::derive_seed(s, r as u64) };
            let init = match &config.init {
                Init::Random { seed } => random_points(config.n, d, chain_seed(*seed)),
                Init::Lattice => lattice_points(lattice_side(config.n, d)?, d),
                Init::Custom { points } => {
                    points.iter().map(|p| p.iter().map(|v| wrap_angle(*v)).collect()).collect()
                }
            };
            let chain = match &config.optimizer {
                Optimizer::Gradient { max_iters, tol, max_step } => {
                    descend(kernel, space, init.clone(), *max_iters, *tol, *max_step)?
                }
                Optimizer::Anneal { moves, seed, t0, polish } => {
                    anneal(kernel, space, init.clone(), *moves, chain_seed(*seed), *t0, *polish)
                }
            };
            Ok((init, chain))
        })
        .collect::<Result<_>>()?;
    let restart_energies: Vec<f64> = chains.iter().map(|(_, c)| c.trace.last().map_or(f64::NAN, |t| t.energy)).collect();
    let best = (0..chains.len())
        .min_by(|a, b| restart_energies[*a].total_cmp(&restart_energies[*b]))
        .unwrap_or(0);
    let (init, chain) = chains.into_iter().nth(best).expect("at least one chain");
    let initial_energy = chain.trace[0].energy;
    Ok(MinimizeResult {
        config: config.clone(),
        energy: restart_energies[best],
        initial_energy,
        diagnostics: uniformity_metrics(&chain.points, None, config.delta)?,
        initial_diagnostics: uniformity_metrics(&init, None, config.delta)?,
        points: chain.points,
        energy_trace: chain.trace,
        converged: chain.converged,
        iterations: chain.iterations,
        best_restart: best,
        restart_energies,
    })
}

// ---------------------------------------------------------------------------
// diagnostics

fn default_probe(d: usize) -> usize {
    match d {
        1 => 4096,
        2 => 128,
        3 => 32,
        _ => 8,
    }
}

/// Largest distance from a probe-grid node `2πk/probe` to the configuration.
pub fn covering_radius(points: &[Vec<f64>], probe: usize) -> f64 {
    let d = points[0].len();
    let total = probe.pow(d as u32);
    (0..total)
        .into_par_iter()
        .map(|mut flat| {
            let mut q = vec![0.0; d];
            for axis in (0..d).rev() {
                q[axis] = TAU * (flat % probe) as f64 / probe as f64;
                flat /= probe;
            }
            points.iter().map(|p| torus_distance_coords(&q, p)).fold(f64::INFINITY, f64::min)
        })
        .reduce(|| 0.0, f64::max)
}

fn ks_distance(a: &mut [f64], b: &mut [f64]) -> f64 {
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (mut i, mut j, mut best) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let v = a[i].min(b[j]);
        while i < a.len() && a[i] <= v {
            i += 1;
        }
        while j < b.len() && b[j] <= v {
            j += 1;
        }
        best = best.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
    }
    best
}

/// Fraction of mass per coordinate within `delta` of the best antipodal pair `{z, z + π}`.
pub fn projection_concentration(points: &[Vec<f64>], weights: &[f64], delta: f64) -> Vec<f64> {
    let d = points[0].len();
    let total: f64 = weights.iter().sum();
    (0..d)
        .map(|axis| {
            let mut best = 0.0f64;
            for p in points {
                let z = p[axis];
                let mass: f64 = points
                    .iter()
                    .zip(weights)
                    .filter(|(q, _)| {
                        let t = q[axis];
                        wrap_offset(t - z).abs() <= delta || wrap_offset(t - z - PI).abs() <= delta
                    })
                    .map(|(_, w)| w)
                    .sum();
                best = best.max(mass / total);
            }
            best.clamp(0.0, 1.0)
        })
        .collect()
}

/// Single-linkage clusters at threshold `delta`, largest mass first.
pub fn clusters(points: &[Vec<f64>], weights: &[f64], delta: f64) -> Vec<Cluster> {
    let n = points.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    for i in 0..n {
        for j in i + 1..n {
            if torus_distance_coords(&points[i], &points[j]) <= delta {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: Vec<(usize, Vec<usize>)> = Vec::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        match groups.iter_mut().find(|(root, _)| *root == r) {
            Some((_, m)) => m.push(i),
            None => groups.push((r, vec![i])),
        }
    }
    let mut out: Vec<Cluster> = groups
        .into_iter()
        .map(|(root, members)| {
            let d = points[root].len();
            let mass: f64 = members.iter().map(|&i| weights[i]).sum();
            // offsets relative to the root avoid wrap-around in the average
            let center = (0..d)
                .map(|k| {
                    let off: f64 = members.iter().map(|&i| weights[i] * wrap_offset(points[i][k] - points[root][k])).sum();
                    wrap_angle(points[root][k] + if mass != 0.0 { off / mass } else { 0.0 })
                })
                .collect();
            Cluster { center, mass, size: members.len() }
        })
        .collect();
    out.sort_by(|a, b| b.mass.total_cmp(&a.mass));
    out
}

/// Uniformity diagnostics for a weighted configuration (uniform weights by default).
pub fn uniformity_metrics(points: &[Vec<f64>], weights: Option<&[f64]>, delta: f64) -> Result<UniformityMetrics> {
    if points.is_empty() {
        return Err(Error::invalid("empty configuration"));
    }
    let d = points[0].len();
    if d == 0 || points.iter().any(|p| p.len() != d) {
        return Err(Error::invalid("points must share a positive dimension"));
    }
    let uniform = vec![1.0 / points.len() as f64; points.len()];
    let weights = match weights {
        Some(w) if w.len() != points.len() => return Err(Error::invalid("one weight per point required")),
        Some(w) => w,
        None => &uniform,
    };
    let mut pair: Vec<f64> = Vec::new();
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            pair.push(torus_distance_coords(&points[i], &points[j]));
        }
    }
    let pair_distance_ks = if pair.is_empty() {
        1.0
    } else {
        let mut rng = rng::stream(0x5eed, 0);
        let mut law: Vec<f64> = (0..20_000)
            .map(|_| (0..d).map(|_| (PI * (2.0 * rng.random::<f64>() - 1.0)).powi(2)).sum::<f64>().sqrt())
            .collect();
        ks_distance(&mut pair, &mut law)
    };
    let cl = clusters(points, weights, delta);
    Ok(UniformityMetrics {
        covering_radius: covering_radius(points, default_probe(d)),
        pair_distance_ks,
        projection_concentration: projection_concentration(points, weights, delta),
        cluster_count: cl.len(),
        clusters: cl,
        delta,
    })
}

// ---------------------------------------------------------------------------
// regimes

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// `s < −2`: two antipodal atoms of mass ½.
    Collapse,
    /// `s = −2`: every coordinate projection is two antipodal atoms.
    Projection,
    /// `d − 2 ≤ s < d`: the uniform measure.
    Spread,
    NotCovered,
}

impl Regime {
    pub fn of(s: f64, d: usize) -> Regime {
        let d = d as f64;
        if s < -2.0 {
            Regime::Collapse
        } else if s == -2.0 {
            Regime::Projection
        } else if s >= d - 2.0 && s < d {
            Regime::Spread
        } else {
            Regime::NotCovered
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegimeCheck {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub passes: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegimeVerdict {
    pub regime: Regime,
    pub passes: bool,
    pub checks: Vec<RegimeCheck>,
}

fn check(name: &str, value: f64, threshold: f64, passes: bool) -> RegimeCheck {
    RegimeCheck { name: name.into(), value, threshold, passes }
}

/// Checks the diagnostic that matches the Riesz regime of `(s, d)`.
pub fn regime_classifier(result: &MinimizeResult, s: f64, d: usize) -> RegimeVerdict {
    regime_classifier_metrics(&result.diagnostics, Some(&result.initial_diagnostics), s, d)
}

/// As [`regime_classifier`], from metrics; the spread regime compares with `baseline`.
pub fn regime_classifier_metrics(m: &UniformityMetrics, baseline: Option<&UniformityMetrics>, s: f64, d: usize) -> RegimeVerdict {
    let regime = Regime::of(s, d);
    let diam = PI * (d as f64).sqrt();
    let checks = match regime {
        Regime::Collapse => {
            let mut c = vec![check("cluster_count", m.cluster_count as f64, 2.0, m.cluster_count == 2)];
            if m.cluster_count == 2 {
                let sep = torus_distance_coords(&m.clusters[0].center, &m.clusters[1].center);
                c.push(check("cluster_distance", sep, diam, (sep - diam).abs() <= 0.01));
                for (k, cl) in m.clusters.iter().enumerate() {
                    c.push(check(&format!("cluster_{k}_mass"), cl.mass, 0.5, (cl.mass - 0.5).abs() <= 0.05));
                }
            }
            c
        }
        Regime::Projection => m
            .projection_concentration
            .iter()
            .enumerate()
            .map(|(k, v)| check(&format!("concentration_{}", k + 1), *v, CONCENTRATION_THRESHOLD, *v >= CONCENTRATION_THRESHOLD))
            .collect(),
        Regime::Spread => {
            let mut c = Vec::new();
            if let Some(b) = baseline {
                c.push(check("covering_radius", m.covering_radius, b.covering_radius, m.covering_radius < b.covering_radius));
            }
            c.push(check("cluster_count", m.cluster_count as f64, 2.0, m.cluster_count > 2));
            let conc = m.projection_concentration.iter().copied().fold(0.0, f64::max);
            c.push(check("max_concentration", conc, CONCENTRATION_THRESHOLD, conc < CONCENTRATION_THRESHOLD));
            c
        }
        Regime::NotCovered => Vec::new(),
    };
    let passes = regime != Regime::NotCovered && checks.iter().all(|c| c.passes);
    RegimeVerdict { regime, passes, checks }
}

/// For `K = −ρ²` the energy of a weighted configuration equals the sum of
/// the circle energies of its coordinate projections. Returns both sides.
pub fn separability_identity(points: &[Vec<f64>], weights: &[f64]) -> (f64, f64) {
    let d = points[0].len();
    let mut joint = Vec::new();
    let mut proj = vec![Vec::new(); d];
    for (p, wp) in points.iter().zip(weights) {
        for (q, wq) in points.iter().zip(weights) {
            let mut r2 = 0.0;
            for k in 0..d {
                let c = wrap_offset(p[k] - q[k]).powi(2);
                r2 += c;
                proj[k].push(wp * wq * -c);
            }
            joint.push(wp * wq * riesz_eval(-2.0, r2.sqrt()));
        }
    }
    let per_axis: Vec<f64> = proj.iter().map(|v| pairwise_sum(v)).collect();
    (pairwise_sum(&joint), pairwise_sum(&per_axis))
}
