//! Potentials, energies, mutual energies and the G-ratio.
//!
//! For a kernel `K` and a measure `μ`:
//!
//! * potential `U(x) = ∫ K(x, y) dμ(y)`;
//! * energy `I(μ) = ∫∫ K(x, y) dμ(x) dμ(y)`;
//! * signed energy `I(μ⁺) + I(μ⁻) − 2 ∫∫ K dμ⁺ dμ⁻`, defined as long as one
//!   of the two parts is finite;
//! * `G(μ, ν) = I(μ) I(ν) / (∫ U^μ dν)²`.
//!
//! Discrete measures are summed exactly. Grid measures use the midpoint
//! rule over cell centers; since every kernel here is translation
//! invariant on the torus, the cell-pair values form an offset table and
//! the double sum becomes `Σ_i m_i Σ_j m_j T[i − j]`. The self-cell entry
//! `T[0]` is governed by a [`DiagonalPolicy`].
//!
//! Sums are accumulated per row in index order and rows are combined with
//! [`pairwise_sum`], so results do not depend on the thread count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::geometry::{unit_ball_volume, wrap_offset, Point, Space};
use crate::kernels::{KernelFamily, KernelSpec};
use crate::measures::{DiscreteMeasure, GridMeasure, Measure};
use crate::quadrature::{integrate_box_around, CornerRule};
use crate::sum::{pairwise_sum, weighted, ExtendedSum};

/// Assumption carried by every energy report: balls have positive capacity.
pub const CAPACITY_ASSUMPTION: &str =
    "capacity of every ball is assumed positive; not verified numerically";

/// Treatment of the self-cell term of grid quadratures.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "snake_case")]
#[derive(Default)]
pub enum DiagonalPolicy {
    /// Drop the self-cell term (biased low for singular kernels).
    Exclude,
    /// Replace it by the kernel's average over the cell: closed form over the
    /// equal-volume ball for Riesz kernels, cube quadrature otherwise.
    #[default]
    AnalyticCell,
    /// Evaluate the truncated kernel `min(K, m)` everywhere.
    CapM { m: f64 },
}


pub(crate) fn serialize_extended<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else {
        s.serialize_none()
    }
}

/// Result of an energy computation. `value` is `+∞` exactly when `infinite`
/// is set; JSON renders infinite values as `null`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyReport {
    #[serde(serialize_with = "serialize_extended")]
    pub value: f64,
    pub infinite: bool,
    /// The grid integral diverges (`s ≥ d`).
    pub diverged: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagonal_policy: Option<DiagonalPolicy>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub include_diagonal: Option<bool>,
    /// Number of atoms or cells.
    pub size: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub resolution: Option<usize>,
    pub kernel: KernelSpec,
    pub assumptions: Vec<String>,
}

impl EnergyReport {
    fn new(value: f64, kernel: &KernelSpec, size: usize) -> Self {
        EnergyReport {
            value,
            infinite: value == f64::INFINITY,
            diverged: false,
            diagonal_policy: None,
            include_diagonal: None,
            size,
            resolution: None,
            kernel: kernel.clone(),
            assumptions: vec![CAPACITY_ASSUMPTION.to_string()],
        }
    }
}

fn check_space(kernel: &KernelSpec, space: Space) -> Result<()> {
    kernel.validate_for(space)
}

// ---------------------------------------------------------------------------
// potentials

/// `U_K^μ(x)` with the default diagonal policy.
pub fn potential(kernel: &KernelSpec, mu: &Measure, x: &Point) -> Result<f64> {
    potential_with(kernel, mu, x, DiagonalPolicy::default())
}

pub fn potential_with(kernel: &KernelSpec, mu: &Measure, x: &Point, policy: DiagonalPolicy) -> Result<f64> {
    if x.space() != mu.space() {
        return Err(Error::invalid(format!("point on {} but measure on {}", x.space(), mu.space())));
    }
    check_space(kernel, x.space())?;
    match mu {
        Measure::Discrete(m) => potential_discrete(kernel, m, x.coords()),
        Measure::Grid(g) => potential_grid(kernel, g, x.coords(), policy),
    }
}

pub(crate) fn potential_discrete(kernel: &KernelSpec, mu: &DiscreteMeasure, x: &[f64]) -> Result<f64> {
    let space = mu.space();
    let mut acc = ExtendedSum::new();
    for (p, w) in mu.iter() {
        acc.push(weighted(w, kernel.eval_coords(space, x, p.coords())));
    }
    acc.total().map_err(|m| Error::UndefinedPotential(m.to_string()))
}

/// Average of `K(x, ·)` over the grid cell `cell` (exact up to quadrature).
fn cell_average(kernel: &KernelSpec, grid: &GridMeasure, cell: usize, x: &[f64]) -> f64 {
    let h = grid.cell_width();
    let c = grid.cell_center(cell);
    let local: Vec<f64> = x.iter().zip(&c).map(|(x, c)| c + wrap_offset(x - c)).collect();
    let lo: Vec<f64> = c.iter().map(|c| c - 0.5 * h).collect();
    let hi: Vec<f64> = c.iter().map(|c| c + 0.5 * h).collect();
    let rule = CornerRule { order: 12, panels: 2, levels: 12 };
    let integral = integrate_box_around(&rule, &lo, &hi, &local, |y| {
        let w: Vec<f64> = local.iter().zip(y).map(|(a, b)| a - b).collect();
        kernel.eval_offset(&w)
    });
    integral / h.powi(grid.dim() as i32)
}

pub(crate) fn potential_grid(kernel: &KernelSpec, grid: &GridMeasure, x: &[f64], policy: DiagonalPolicy) -> Result<f64> {
    let kernel = match policy {
        DiagonalPolicy::CapM { m } => kernel.truncate(m),
        _ => kernel.clone(),
    };
    let home = grid.cell_of(x);
    let masses = grid.masses();
    let terms: Vec<f64> = (0..masses.len())
        .map(|j| {
            let m = masses[j];
            if m == 0.0 {
                return 0.0;
            }
            if j == home && policy == DiagonalPolicy::AnalyticCell {
                return m * cell_average(&kernel, grid, j, x);
            }
            let k = kernel.eval_offset(&diff(x, &grid.cell_center(j)));
            if k.is_infinite() && policy == DiagonalPolicy::Exclude {
                0.0
            } else {
                weighted(m, k)
            }
        })
        .collect();
    let mut acc = ExtendedSum::new();
    terms.into_iter().for_each(|t| acc.push(t));
    acc.total().map_err(|m| Error::UndefinedPotential(m.to_string()))
}

fn diff(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Potential on the midpoint probe grid of `T^d` with `probe` points per
/// axis: rows of `(coordinates, U)`.
pub fn potential_field(kernel: &KernelSpec, mu: &Measure, probe: usize) -> Result<Vec<(Vec<f64>, f64)>> {
    let d = mu
        .space()
        .torus_dim()
        .ok_or_else(|| Error::invalid("potential fields are tabulated on tori only"))?;
    let probe_grid = GridMeasure::zeros(d, probe)?;
    let space = mu.space();
    (0..probe_grid.len())
        .into_par_iter()
        .map(|i| {
            let c = probe_grid.cell_center(i);
            let p = Point::on(space, &c)?;
            Ok((c, potential(kernel, mu, &p)?))
        })
        .collect()
}

// ---------------------------------------------------------------------------
// discrete energies

/// `Σ_{i,j} w_i w_j K(x_i, x_j)`, with or without the diagonal `i = j`.
pub fn energy_discrete(kernel: &KernelSpec, mu: &DiscreteMeasure, include_diagonal: bool) -> Result<EnergyReport> {
    check_space(kernel, mu.space())?;
    let value = discrete_double_sum(kernel, mu, mu, include_diagonal)?;
    let mut report = EnergyReport::new(value, kernel, mu.len());
    report.include_diagonal = Some(include_diagonal);
    Ok(report)
}

/// Row-ordered double sum shared by energies and mutual energies.
fn discrete_double_sum(kernel: &KernelSpec, a: &DiscreteMeasure, b: &DiscreteMeasure, include_diagonal: bool) -> Result<f64> {
    let space = a.space();
    let same = std::ptr::eq(a, b);
    let rows: Vec<(f64, bool, bool)> = (0..a.len())
        .into_par_iter()
        .map(|i| {
            let xi = a.points()[i].coords();
            let wi = a.weights()[i];
            let mut acc = 0.0;
            let (mut pos, mut neg) = (false, false);
            for j in 0..b.len() {
                if same && !include_diagonal && i == j {
                    continue;
                }
                let ww = wi * b.weights()[j];
                if ww == 0.0 {
                    continue;
                }
                let k = kernel.eval_coords(space, xi, b.points()[j].coords());
                let t = ww * k;
                if t == f64::INFINITY {
                    pos = true;
                } else if t == f64::NEG_INFINITY {
                    neg = true;
                } else {
                    acc += t;
                }
            }
            (acc, pos, neg)
        })
        .collect();
    let pos = rows.iter().any(|r| r.1);
    let neg = rows.iter().any(|r| r.2);
    match (pos, neg) {
        (true, true) => Err(Error::UndefinedEnergy("+∞ and −∞ contributions of opposite sign".into())),
        (true, false) => Ok(f64::INFINITY),
        (false, true) => Ok(f64::NEG_INFINITY),
        // rows are combined in index order, matching a plain double loop
        (false, false) => Ok(rows.iter().fold(0.0, |acc, r| acc + r.0)),
    }
}

// ---------------------------------------------------------------------------
// grid energies

/// Midpoint offset table `T[o] = K(h o)` with the self-cell entry set by a policy.
#[derive(Debug, Clone)]
pub struct OffsetTable {
    pub dim: usize,
    pub resolution: usize,
    pub values: Vec<f64>,
    pub diverged: bool,
}

/// Average of `sign(s)|u|^{-s}` (or `-log|u|`) over the Euclidean ball of
/// radius `a` in `R^d`, for `s < d`.
pub fn riesz_ball_average(s: f64, d: usize, a: f64) -> f64 {
    let df = d as f64;
    if s == 0.0 {
        -a.ln() + 1.0 / df
    } else {
        s.signum() * df / (df - s) * a.powf(-s)
    }
}

impl OffsetTable {
    pub fn build(kernel: &KernelSpec, dim: usize, resolution: usize, policy: DiagonalPolicy) -> Result<Self> {
        check_space(kernel, Space::Torus(dim))?;
        let h = std::f64::consts::TAU / resolution as f64;
        let eval_kernel = match policy {
            DiagonalPolicy::CapM { m } => kernel.truncate(m),
            _ => kernel.clone(),
        };
        let probe = GridMeasure::zeros(dim, resolution)?;
        let values: Vec<f64> = (0..probe.len())
            .into_par_iter()
            .map(|o| {
                let w: Vec<f64> = probe.cell_index(o).iter().map(|&k| k as f64 * h).collect();
                eval_kernel.eval_offset(&w)
            })
            .collect();
        let mut table = OffsetTable { dim, resolution, values, diverged: false };
        let singular = eval_kernel.singular_exponent();
        if let Some(s) = singular {
            if s >= dim as f64 {
                table.diverged = true;
                table.values[0] = f64::INFINITY;
                return Ok(table);
            }
        }
        table.values[0] = match policy {
            DiagonalPolicy::Exclude => 0.0,
            DiagonalPolicy::CapM { .. } => table.values[0],
            DiagonalPolicy::AnalyticCell => match (&kernel.family, kernel.cap) {
                (KernelFamily::Riesz { s }, None) => {
                    let a = (h.powi(dim as i32) / unit_ball_volume(dim)).powf(1.0 / dim as f64);
                    riesz_ball_average(*s, dim, a) + kernel.shift
                }
                _ => {
                    let g = GridMeasure::zeros(dim, resolution)?;
                    cell_average(kernel, &g, 0, &g.cell_center(0))
                }
            },
        };
        Ok(table)
    }

    /// Per-axis offset `(i - j) mod n` flattened.
    #[inline]
    fn offset_index(&self, a: &[usize], b: &[usize]) -> usize {
        let n = self.resolution;
        a.iter().zip(b).fold(0, |acc, (i, j)| acc * n + (i + n - j) % n)
    }

    /// `Σ_i a_i Σ_j b_j T[i − j]`.
    pub fn bilinear(&self, a: &[f64], b: &[f64]) -> f64 {
        let n = self.resolution;
        let d = self.dim;
        let idx: Vec<Vec<usize>> = (0..a.len())
            .map(|flat| {
                let mut v = vec![0; d];
                let mut r = flat;
                for k in (0..d).rev() {
                    v[k] = r % n;
                    r /= n;
                }
                v
            })
            .collect();
        let rows: Vec<f64> = (0..a.len())
            .into_par_iter()
            .map(|i| {
                if a[i] == 0.0 {
                    return 0.0;
                }
                let mut acc = 0.0;
                for j in 0..b.len() {
                    if b[j] != 0.0 {
                        acc += b[j] * self.values[self.offset_index(&idx[i], &idx[j])];
                    }
                }
                a[i] * acc
            })
            .collect();
        pairwise_sum(&rows)
    }
}

/// Midpoint energy of a grid measure.
pub fn energy_grid(kernel: &KernelSpec, mu: &GridMeasure, policy: DiagonalPolicy) -> Result<EnergyReport> {
    let table = OffsetTable::build(kernel, mu.dim(), mu.resolution(), policy)?;
    let mut report = grid_report(kernel, mu, policy, &table);
    if !table.diverged {
        report.value = table.bilinear(mu.masses(), mu.masses());
        report.infinite = false;
    }
    Ok(report)
}

fn grid_report(kernel: &KernelSpec, mu: &GridMeasure, policy: DiagonalPolicy, table: &OffsetTable) -> EnergyReport {
    let mut report = EnergyReport::new(f64::INFINITY, kernel, mu.len());
    report.diagonal_policy = Some(policy);
    report.resolution = Some(mu.resolution());
    report.diverged = table.diverged;
    report
}

/// Energy with the natural conventions: discrete measures include the
/// diagonal, grids use the default policy.
pub fn energy(kernel: &KernelSpec, mu: &Measure) -> Result<EnergyReport> {
    match mu {
        Measure::Discrete(m) => energy_discrete(kernel, m, true),
        Measure::Grid(g) => energy_grid(kernel, g, DiagonalPolicy::default()),
    }
}

// ---------------------------------------------------------------------------
// mutual and signed energies

/// `∫∫ K dμ dν`.
pub fn mutual_energy(kernel: &KernelSpec, mu: &Measure, nu: &Measure) -> Result<f64> {
    mutual_energy_with(kernel, mu, nu, DiagonalPolicy::default())
}

pub fn mutual_energy_with(kernel: &KernelSpec, mu: &Measure, nu: &Measure, policy: DiagonalPolicy) -> Result<f64> {
    if mu.space() != nu.space() {
        return Err(Error::invalid("measures live on different spaces"));
    }
    check_space(kernel, mu.space())?;
    match (mu, nu) {
        (Measure::Discrete(a), Measure::Discrete(b)) => discrete_double_sum(kernel, a, b, true),
        (Measure::Grid(a), Measure::Grid(b)) => {
            if a.dim() != b.dim() || a.resolution() != b.resolution() {
                return Err(Error::invalid("grid measures have different shapes"));
            }
            let table = OffsetTable::build(kernel, a.dim(), a.resolution(), policy)?;
            if table.diverged {
                return Ok(f64::INFINITY);
            }
            Ok(table.bilinear(a.masses(), b.masses()))
        }
        (Measure::Grid(g), Measure::Discrete(d)) | (Measure::Discrete(d), Measure::Grid(g)) => {
            let mut acc = ExtendedSum::new();
            for (p, w) in d.iter() {
                acc.push(weighted(w, potential_grid(kernel, g, p.coords(), policy)?));
            }
            acc.energy_total()
        }
    }
}

/// Energy of a signed measure through its Jordan decomposition.
pub fn energy_signed(kernel: &KernelSpec, mu: &Measure) -> Result<EnergyReport> {
    energy_signed_with(kernel, mu, DiagonalPolicy::default())
}

pub fn energy_signed_with(kernel: &KernelSpec, mu: &Measure, policy: DiagonalPolicy) -> Result<EnergyReport> {
    check_space(kernel, mu.space())?;
    let (plus, minus) = mu.jordan_split();
    let part = |m: &Measure| -> Result<EnergyReport> {
        match m {
            Measure::Discrete(d) => energy_discrete(kernel, d, true),
            Measure::Grid(g) => energy_grid(kernel, g, policy),
        }
    };
    let ip = part(&plus)?;
    let im = part(&minus)?;
    let cross = mutual_energy_with(kernel, &plus, &minus, policy)?;
    let parts = ip.value + im.value;
    if parts.is_infinite() && cross.is_infinite() {
        return Err(Error::UndefinedEnergy(
            "both I(μ⁺) + I(μ⁻) and the cross term are infinite".into(),
        ));
    }
    let value = parts - 2.0 * cross;
    let mut report = EnergyReport::new(value, kernel, mu.size());
    report.diverged = ip.diverged || im.diverged;
    if let Measure::Grid(g) = mu {
        report.diagonal_policy = Some(policy);
        report.resolution = Some(g.resolution());
    } else {
        report.include_diagonal = Some(true);
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// G-ratio and capacity

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GRatio {
    pub g: f64,
    pub at_least_one: bool,
    pub energy_mu: f64,
    pub energy_nu: f64,
    pub cross: f64,
}

/// `G(μ, ν) = I(μ) I(ν) / (∫ U^μ dν)²` for unsigned measures.
pub fn g_ratio(kernel: &KernelSpec, mu: &Measure, nu: &Measure) -> Result<GRatio> {
    if !mu.is_unsigned() || !nu.is_unsigned() {
        return Err(Error::invalid("G-ratio needs unsigned measures"));
    }
    let emu = energy(kernel, mu)?.value;
    let enu = energy(kernel, nu)?.value;
    let cross = mutual_energy(kernel, mu, nu)?;
    for (name, v) in [("I(μ)", emu), ("I(ν)", enu), ("∫U^μ dν", cross)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::UndefinedRatio(format!("{name} = {v} must be positive and finite")));
        }
    }
    let g = emu * enu / (cross * cross);
    Ok(GRatio { g, at_least_one: g >= 1.0, energy_mu: emu, energy_nu: enu, cross })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CapacityEstimate {
    pub capacity: f64,
    pub zero_capacity: bool,
    #[serde(serialize_with = "serialize_extended")]
    pub minimal_energy: f64,
    pub kernel: KernelSpec,
    pub space: Space,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub resolution: Option<usize>,
}

/// `c_K = 1 / W_K` from a supplied minimal energy.
pub fn capacity_estimate(
    kernel: &KernelSpec,
    space: Space,
    minimal_energy: f64,
    resolution: Option<usize>,
) -> Result<CapacityEstimate> {
    if minimal_energy.is_nan() || minimal_energy <= 0.0 {
        return Err(Error::range(format!("minimal energy {minimal_energy} must be positive")));
    }
    let capacity = if minimal_energy.is_infinite() { 0.0 } else { minimal_energy.recip() };
    Ok(CapacityEstimate {
        capacity,
        zero_capacity: capacity == 0.0,
        minimal_energy,
        kernel: kernel.clone(),
        space,
        resolution,
    })
}

/// Energy of `N` equally spaced points on the circle, off-diagonal and
/// normalized by `N²`.
pub fn equally_spaced_circle_energy(kernel: &KernelSpec, n: usize) -> f64 {
    let step = std::f64::consts::TAU / n as f64;
    let pts: Vec<f64> = (0..n).map(|i| i as f64 * step).collect();
    let mut rows = Vec::with_capacity(n);
    for i in 0..n {
        let mut acc = 0.0;
        for j in 0..n {
            if i != j {
                acc += kernel.eval_coords(Space::Circle, &[pts[i]], &[pts[j]]);
            }
        }
        rows.push(acc);
    }
    pairwise_sum(&rows) / (n * n) as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn t2(x: f64, y: f64) -> Point {
        Point::torus(&[x, y]).unwrap()
    }

    #[test]
    fn single_atom_potential_is_kernel() {
        let k = KernelSpec::riesz(1.0);
        let mu = Measure::Discrete(DiscreteMeasure::dirac(t2(1.0, 2.0)));
        let x = t2(0.5, 0.5);
        let expect = k.eval_coords(Space::Torus(2), x.coords(), &[1.0, 2.0]);
        assert_eq!(potential(&k, &mu, &x).unwrap(), expect);
        assert_eq!(potential(&k, &mu, &t2(1.0, 2.0)).unwrap(), f64::INFINITY);
    }

    #[test]
    fn two_point_potential_and_energy_for_quadratic_kernel() {
        let k = KernelSpec::riesz(-2.0);
        let z = t2(0.3, 1.1);
        let mu = DiscreteMeasure::new(Space::Torus(2), vec![z.clone(), z.antipode()], vec![0.5, 0.5]).unwrap();
        let u = potential(&k, &Measure::Discrete(mu.clone()), &z).unwrap();
        assert!((u + PI * PI).abs() < 1e-12);
        let e = energy_discrete(&k, &mu, true).unwrap();
        assert!((e.value + PI * PI).abs() < 1e-12);
        assert!(!e.infinite);
    }

    #[test]
    fn log_energy_of_two_antipodal_points_on_circle() {
        let k = KernelSpec::riesz(0.0);
        let mu = DiscreteMeasure::new(
            Space::Torus(1),
            vec![Point::torus(&[0.0]).unwrap(), Point::torus(&[PI]).unwrap()],
            vec![0.5, 0.5],
        )
        .unwrap();
        let e = energy_discrete(&k, &mu, false).unwrap();
        assert!((e.value + 0.5 * PI.ln()).abs() < 1e-15);
        assert!((e.value + 0.57236).abs() < 1e-5);
        let full = energy_discrete(&k, &mu, true).unwrap();
        assert!(full.infinite);
        let zero = DiscreteMeasure::zero(Space::Torus(1));
        assert_eq!(energy_discrete(&k, &zero, true).unwrap().value, 0.0);
    }

    #[test]
    fn opposite_infinities_are_undefined() {
        let k = KernelSpec::riesz(1.0);
        let x = t2(1.0, 1.0);
        let mu = Measure::Discrete(
            DiscreteMeasure::new(Space::Torus(2), vec![x.clone(), t2(2.0, 2.0)], vec![1.0, -1.0]).unwrap(),
        );
        // +∞ on the diagonal of μ⁺ and μ⁻ alike: the signed energy needs the cross term
        let e = energy_signed(&k, &mu).unwrap();
        assert!(e.infinite);
        let nu = Measure::Discrete(DiscreteMeasure::new(Space::Torus(2), vec![x.clone()], vec![-1.0]).unwrap());
        let both = Measure::Discrete(DiscreteMeasure::new(Space::Torus(2), vec![x], vec![1.0]).unwrap());
        assert!(matches!(
            energy_signed(&k, &both.add(&nu).unwrap()),
            Ok(EnergyReport { value, .. }) if value == 0.0
        ));
    }

    #[test]
    fn grid_energy_flags_divergence() {
        let g = GridMeasure::uniform(1, 16).unwrap();
        let e = energy_grid(&KernelSpec::riesz(1.0), &g, DiagonalPolicy::AnalyticCell).unwrap();
        assert!(e.diverged && e.infinite);
    }

    #[test]
    fn riesz_ball_average_matches_corner_quadrature() {
        // average of |u|^{-1} over the unit disk is 2
        assert!((riesz_ball_average(1.0, 2, 1.0) - 2.0).abs() < 1e-15);
        // average of -ln|u| over [-a, a] is 1 - ln a
        assert!((riesz_ball_average(0.0, 1, 0.3) - (1.0 - 0.3f64.ln())).abs() < 1e-15);
        let rule = CornerRule::default();
        let a = 0.4;
        let q = rule.integrate(&[a], |u| u[0].powf(-0.5)) / a;
        assert!((q - riesz_ball_average(0.5, 1, a)).abs() < 1e-10);
    }

    #[test]
    fn capacity_examples() {
        let k = KernelSpec::riesz(0.0);
        assert_eq!(capacity_estimate(&k, Space::Circle, 2.0, None).unwrap().capacity, 0.5);
        let inf = capacity_estimate(&k, Space::Circle, f64::INFINITY, None).unwrap();
        assert!(inf.zero_capacity && inf.capacity == 0.0);
        assert!(capacity_estimate(&k, Space::Circle, 0.0, None).is_err());
        assert!(capacity_estimate(&k, Space::Circle, -1.0, None).is_err());
        assert_eq!(capacity_estimate(&k, Space::Circle, 1.0, Some(64)).unwrap().capacity, 1.0);
    }

    #[test]
    fn g_ratio_of_a_measure_with_itself_is_one() {
        let k = KernelSpec::riesz(1.0);
        let mu = Measure::Grid(GridMeasure::from_fn(2, 8, |x| 1.0 + 0.5 * x[0].cos()).unwrap());
        let r = g_ratio(&k, &mu, &mu).unwrap();
        assert!((r.g - 1.0).abs() < 1e-12);
        let r = g_ratio(&k, &mu, &mu.scaled(3.0)).unwrap();
        assert!((r.g - 1.0).abs() < 1e-12);
        let zero = Measure::Grid(GridMeasure::zeros(2, 8).unwrap());
        assert!(matches!(g_ratio(&k, &mu, &zero), Err(Error::UndefinedRatio(_))));
    }

    #[test]
    fn report_json_renders_infinity_as_null() {
        let r = EnergyReport::new(f64::INFINITY, &KernelSpec::riesz(1.0), 3);
        let j = serde_json::to_value(&r).unwrap();
        assert!(j["value"].is_null());
        assert_eq!(j["infinite"], true);
    }
}
